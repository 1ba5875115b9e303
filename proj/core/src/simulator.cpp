#include "chosim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "chosim/beam_mgmt.hpp"
#include "chosim/channel.hpp"
#include "chosim/cho_engine.hpp"
#include "chosim/deployment.hpp"
#include "chosim/event_queue.hpp"
#include "chosim/measurement.hpp"
#include "chosim/sinr.hpp"
#include "chosim/ta_protocol.hpp"

namespace chosim {

namespace {

enum class Conn { connected, executing, completing, reestablishing };

struct ActiveProcedure {
  Procedure proc;
  bool abortable = true;
};

struct UeState {
  UeState(int i, const UEKinematics& k, UeChannel ch, UeMeasurement m, Rng r, RlqFilter q)
      : index(i), kin(k), channel(std::move(ch)), meas(std::move(m)), meas_rng(r), rlq(std::move(q)) {}

  int index = 0;
  UEKinematics kin;
  UeChannel channel;
  UeMeasurement meas;
  Rng meas_rng;
  RlqFilter rlq;
  BeamMgmtState beam;
  ChoState cho;
  Conn conn = Conn::connected;
  CellId serving = 0;

  CellId target = -1;
  ModeDecision decision;
  AccessAttempt access;
  SimTime complete_at;
  LinkChoice access_link;
  SimTime reest_at;

  std::map<std::uint64_t, ActiveProcedure> procs;
  OutageLedger ledger;
};

struct ProcRef {
  int ue;
  std::uint64_t id;
};

class Detail {
public:
  template <class T>
  Detail& add(std::string_view key, const T& value) {
    if (!text_.empty()) text_ += ';';
    text_ += key;
    text_ += '=';
    if constexpr (std::is_same_v<T, SimTime>) {
      text_ += value.str();
    } else if constexpr (std::is_same_v<T, bool>) {
      text_ += value ? "1" : "0";
    } else if constexpr (std::is_arithmetic_v<T>) {
      text_ += std::to_string(value);
    } else {
      text_ += value;
    }
    return *this;
  }
  std::string str() const { return text_; }

private:
  std::string text_;
};

class Simulation {
public:
  explicit Simulation(const ScenarioConfig& cfg);
  RunArtifacts run();

private:
  bool in_window(SimTime t) const { return t >= window_begin_ && t < window_end_; }
  void emit(SimTime t, const UeState& u, std::string kind, std::string detail) {
    events_.push_back({t, u.index, std::move(kind), std::move(detail)});
  }

  void step_ue(UeState& u, SimTime now, bool first);
  void connected_step(UeState& u, SimTime now, bool period);
  void cho_step(UeState& u, SimTime now);
  void start_execution(UeState& u, CellId target, SimTime now);
  void access_step(UeState& u, SimTime now);
  void complete_handover(UeState& u);
  void radio_link_failure(UeState& u, SimTime now);
  void reestablish(UeState& u, SimTime now);
  void deliver_due(SimTime now);
  void on_delivered(UeState& u, const Procedure& p, const SignalingEvent& ev, SimTime now);

  void start_procedure(UeState& u, ProcedureKind kind, CellId target, SimTime start,
                       std::optional<SimTime> span, bool abortable);
  void abort_procedures(UeState& u);
  void abort_ta(UeState& u, CellId target);
  void close_low_sinr(UeState& u, SimTime now);
  std::vector<double> l3_vector(const UeState& u) const;
  void attach(UeState& u, CellId cell, std::optional<LinkChoice> fallback);
  BeamCandidate best_l1_beam(const UeState& u, CellId c) const;

  ScenarioConfig cfg_;
  ScheduleSet schedules_;
  CellTopology topo_;
  ChoEngine engine_;
  SimTime window_begin_;
  SimTime window_end_;
  std::vector<UeState> ues_;
  PowerSnapshot snap_;
  EventQueue<ProcRef> queue_;
  std::uint64_t next_proc_id_ = 0;
  std::vector<EventRecord> events_;
  KpiCounts counts_;
};

Simulation::Simulation(const ScenarioConfig& cfg)
    : cfg_([&] {
        ScenarioConfig c = cfg;
        c.finalize();
        c.validate();
        return c;
      }()),
      schedules_(cfg_.schedules()),
      topo_(build_topology(cfg_.isd_m, cfg_.n_sites)),
      engine_(cfg_.cho),
      window_begin_(cfg_.warmup),
      window_end_(cfg_.warmup + cfg_.t_sim) {
  const auto drops = drop_ues(cfg_.n_ue, cfg_.seed, topo_, kmh_to_mps(cfg_.ue_speed_kmh));
  const double dt_s = cfg_.dt.to_s();
  ues_.reserve(drops.size());
  for (int i = 0; i < cfg_.n_ue; ++i) {
    const auto& kin = drops[static_cast<std::size_t>(i)];
    ues_.emplace_back(i, kin, UeChannel(topo_, cfg_.channel, kin, cfg_.seed, i, dt_s),
                      UeMeasurement(topo_.n_cells(), cfg_.measurement),
                      make_rng(cfg_.seed, Stream::measurement, static_cast<std::uint64_t>(i)),
                      RlqFilter(cfg_.rlq_window));
  }
  snap_.resize(topo_.n_cells());
}

std::vector<double> Simulation::l3_vector(const UeState& u) const {
  std::vector<double> l3(static_cast<std::size_t>(topo_.n_cells()));
  for (CellId c = 0; c < topo_.n_cells(); ++c) l3[static_cast<std::size_t>(c)] = u.meas.l3(c);
  return l3;
}

BeamCandidate Simulation::best_l1_beam(const UeState& u, CellId c) const {
  BeamCandidate cand;
  cand.beam = select_serving_beam(u.meas.l1_beams(c));
  u.meas.l1_best_panel(c, cand.beam, &cand.panel);
  return cand;
}

void Simulation::attach(UeState& u, CellId cell, std::optional<LinkChoice> fallback) {
  u.serving = cell;
  u.conn = Conn::connected;
  u.beam = BeamMgmtState{};
  if (u.meas.has_output()) {
    const BeamCandidate c = best_l1_beam(u, cell);
    u.beam.serving_beam = c.beam;
    u.beam.serving_panel = c.panel;
  } else if (fallback) {
    u.beam.serving_beam = fallback->beam;
    u.beam.serving_panel = fallback->panel;
  }
  u.rlq.reset();
  u.cho = engine_.make_state(topo_.n_cells(), cell);
}

void Simulation::start_procedure(UeState& u, ProcedureKind kind, CellId target, SimTime start,
                                 std::optional<SimTime> span, bool abortable) {
  const std::uint64_t id = next_proc_id_++;
  auto [it, ok] = u.procs.emplace(id, ActiveProcedure{Procedure(schedules_.get(kind), kind, target, start, span),
                                                      abortable});
  queue_.push(it->second.proc.next_time(), ProcRef{u.index, id});
}

void Simulation::abort_procedures(UeState& u) {
  std::erase_if(u.procs, [](const auto& kv) { return kv.second.abortable; });
}

void Simulation::abort_ta(UeState& u, CellId target) {
  std::erase_if(u.procs, [&](const auto& kv) {
    const Procedure& p = kv.second.proc;
    return kv.second.abortable && p.kind() == ProcedureKind::ta_acquisition && p.target() == target;
  });
}

void Simulation::close_low_sinr(UeState& u, SimTime now) {
  if (u.ledger.is_open()) u.ledger.close(now);
}

void Simulation::step_ue(UeState& u, SimTime now, bool first) {
  if (!first) {
    u.kin = advance_ue(u.kin, cfg_.dt.to_s(), topo_);
    u.channel.step(u.kin.speed * cfg_.dt.to_s());
  }
  u.channel.snapshot(u.kin, snap_);
  const bool period =
      u.meas.add_raw(snap_, cfg_.measurement.meas_error_db > 0.0 ? &u.meas_rng : nullptr);

  if (first) {
    // Initial access: strongest raw link.
    CellId best = 0;
    LinkChoice link;
    double best_p = -1e300;
    for (CellId c = 0; c < topo_.n_cells(); ++c) {
      for (BeamId b = 1; b <= kBeamsPerCell; ++b) {
        for (PanelId p = 0; p < kPanels; ++p) {
          if (snap_.at_dbm(c, b, p) > best_p) {
            best_p = snap_.at_dbm(c, b, p);
            best = c;
            link.beam = b;
            link.panel = p;
          }
        }
      }
    }
    attach(u, best, link);
  }

  if (u.conn == Conn::completing && now >= u.complete_at) complete_handover(u);
  if (u.conn == Conn::reestablishing && now >= u.reest_at) reestablish(u, now);

  if (u.conn == Conn::connected) connected_step(u, now, period);
  if (u.conn == Conn::executing) access_step(u, now);
}

void Simulation::connected_step(UeState& u, SimTime now, bool period) {
  if (period && u.meas.has_output() && !u.beam.recovery.active) {
    const BeamCandidate c = best_l1_beam(u, u.serving);
    u.beam.serving_beam = c.beam;
    u.beam.serving_panel = c.panel;
  }
  const double sinr = sinr_db(snap_, u.serving, u.beam.serving_beam, u.beam.serving_panel, cfg_.sinr);
  u.rlq.update(sinr);

  const BeamCandidate cand =
      u.meas.has_output() ? best_l1_beam(u, u.serving)
                          : BeamCandidate{u.beam.serving_beam, u.beam.serving_panel};
  const BeamEvent ev = beam_failure_step(
      u.beam, u.rlq.value_db(), cand,
      [&](BeamId b, PanelId p) { return sinr_db(snap_, u.serving, b, p, cfg_.sinr); }, now, cfg_.beam);
  switch (ev) {
    case BeamEvent::recovery_started:
      emit(now, u, "beam_recovery_started",
           Detail().add("cell", u.serving).add("beam", u.beam.recovery.target).str());
      break;
    case BeamEvent::attempt_failed:
      emit(now, u, "beam_recovery_attempt_failed",
           Detail().add("cell", u.serving).add("attempt", u.beam.recovery.attempts).str());
      break;
    case BeamEvent::recovered:
      emit(now, u, "beam_recovery_succeeded",
           Detail().add("cell", u.serving).add("beam", u.beam.serving_beam).str());
      break;
    case BeamEvent::rlf:
      radio_link_failure(u, now);
      return;
    case BeamEvent::none:
      break;
  }

  if (period && u.meas.has_output()) cho_step(u, now);
  if (u.conn != Conn::connected) return;

  if (u.rlq.value_db() < cfg_.beam.gamma_out_db) {
    if (!u.ledger.is_open()) u.ledger.open(now, OutageCause::other_mobility);
  } else {
    close_low_sinr(u, now);
  }
}

void Simulation::cho_step(UeState& u, SimTime now) {
  const std::vector<double> l3 = l3_vector(u);
  for (const ChoAction& a : engine_.on_measurement(u.cho, l3, cfg_.scheme, now)) {
    switch (a.kind) {
      case ChoActionKind::execute:
        start_execution(u, a.cell, now);
        return;
      case ChoActionKind::start_preparation:
        start_procedure(u, ProcedureKind::preparation, a.cell, now, cfg_.cho.t_prep_delay, true);
        break;
      case ChoActionKind::start_ta_acquisition:
        start_procedure(u, ProcedureKind::ta_acquisition, a.cell, now, cfg_.cho.t_acq_delay, true);
        break;
      case ChoActionKind::release:
        abort_ta(u, a.cell);
        engine_.release(u.cho, a.cell);
        emit(now, u, "prep_release", Detail().add("cell", a.cell).str());
        break;
    }
  }
}

void Simulation::start_execution(UeState& u, CellId target, SimTime now) {
  close_low_sinr(u, now);
  u.decision = engine_.decide_mode(u.cho, target, cfg_.scheme, now);
  const PreparedCell* pc = u.cho.find(target);
  Detail d;
  d.add("source", u.serving)
      .add("target", target)
      .add("mode", std::string(to_string(u.decision.mode)))
      .add("reason", std::string(to_string(u.decision.reason)))
      .add("ta_phase", std::string(to_string(pc->ta.phase)));
  if (pc->ta.phase == TaPhase::acquired) {
    d.add("t_acq", pc->ta.t_acq).add("ta_valid", ta_valid(pc->ta, now, cfg_.cho.t_alig));
  }
  emit(now, u, "ho_exec", d.str());
  abort_procedures(u);
  u.target = target;
  u.access = AccessAttempt{target, u.decision.mode, now};
  u.conn = Conn::executing;
}

void Simulation::access_step(UeState& u, SimTime now) {
  const LinkChoice link = best_link(snap_, u.target, cfg_.sinr);
  const AccessStatus st =
      handover_failure_check(u.access, link.sinr_db, now, cfg_.beam.gamma_out_db, cfg_.cho.t_hof);
  if (st == AccessStatus::pending) return;

  if (st == AccessStatus::hof) {
    const SimTime reest = now + cfg_.beam.t_reestablishment;
    u.ledger.add(u.access.started, reest, OutageCause::other_mobility);
    emit(now, u, "hof", Detail().add("source", u.serving).add("target", u.target).str());
    if (in_window(now)) ++counts_.handover_failures;
    u.cho = engine_.make_state(topo_.n_cells(), u.serving);
    u.conn = Conn::reestablishing;
    u.reest_at = reest;
    return;
  }

  const bool rach_less = u.decision.mode == HandoverMode::rach_less;
  const SimTime interruption = interruption_time(rach_less, cfg_.early_forwarding && cfg_.scheme == Scheme::rach_less);
  u.access_link = link;
  u.complete_at = now + interruption;
  u.ledger.add(u.access.started, u.complete_at, OutageCause::handover_interruption);
  start_procedure(u, rach_less ? ProcedureKind::exec_rach_less : ProcedureKind::exec_rach_aided, u.target, now,
                  std::nullopt, false);
  u.conn = Conn::completing;
}

void Simulation::complete_handover(UeState& u) {
  const CellId source = u.serving;
  const bool rach_less = u.decision.mode == HandoverMode::rach_less;
  emit(u.complete_at, u, "ho_complete",
       Detail()
           .add("source", source)
           .add("target", u.target)
           .add("mode", std::string(to_string(u.decision.mode)))
           .add("reason", std::string(to_string(u.decision.reason)))
           .add("t_exec", u.access.started)
           .add("interruption", u.complete_at - u.access.started)
           .str());
  if (in_window(u.complete_at)) {
    ++counts_.successful_handovers;
    ++(rach_less ? counts_.rach_less : counts_.rach_aided);
  }
  attach(u, u.target, u.access_link);
}

void Simulation::radio_link_failure(UeState& u, SimTime now) {
  const RlfDeclaration decl = declare_rlf(u.beam, now, cfg_.beam);
  close_low_sinr(u, now);
  u.ledger.add(decl.outage_start, decl.reestablish_at, OutageCause::other_mobility);
  emit(now, u, "rlf", Detail().add("cell", u.serving).str());
  if (in_window(now)) ++counts_.radio_link_failures;
  abort_procedures(u);
  u.cho = engine_.make_state(topo_.n_cells(), u.serving);
  u.conn = Conn::reestablishing;
  u.reest_at = decl.reestablish_at;
}

void Simulation::reestablish(UeState& u, SimTime now) {
  const CellId cell = reestablishment_target(l3_vector(u));
  emit(now, u, "reest_complete", Detail().add("cell", cell).str());
  attach(u, cell, std::nullopt);
}

void Simulation::deliver_due(SimTime now) {
  while (queue_.due(now)) {
    const auto entry = queue_.pop();
    UeState& u = ues_[static_cast<std::size_t>(entry.payload.ue)];
    auto it = u.procs.find(entry.payload.id);
    if (it == u.procs.end()) continue;  // aborted
    Procedure& p = it->second.proc;
    const bool link_ok = u.conn == Conn::connected && u.rlq.value_db() >= cfg_.beam.gamma_out_db;
    const SignalingEvent ev = p.deliver(link_ok);

    emit(ev.time, u, "signal",
         Detail()
             .add("procedure", std::string(to_string(ev.procedure)))
             .add("msg", ev.kind)
             .add("iface", std::string(to_string(ev.iface)))
             .add("target", ev.target)
             .add("lost", ev.lost)
             .str());
    if (in_window(ev.time)) ++(ev.iface == Interface::radio ? counts_.radio_msgs : counts_.xn_msgs);

    on_delivered(u, p, ev, now);
    if (p.finished()) {
      u.procs.erase(it);
    } else {
      queue_.push(p.next_time(), entry.payload);
    }
  }
}

void Simulation::on_delivered(UeState& u, const Procedure& p, const SignalingEvent& ev, SimTime now) {
  switch (p.kind()) {
    case ProcedureKind::preparation: {
      if (p.failed()) {
        engine_.on_preparation_failed(u.cho, p.target());
        emit(ev.time, u, "prep_failed", Detail().add("cell", p.target()).add("msg", ev.kind).str());
      } else if (p.succeeded()) {
        const auto dropped = engine_.on_prepared(u.cho, p.target(), l3_vector(u), ev.time);
        if (dropped != p.target()) {
          emit(ev.time, u, "prep_done", Detail().add("cell", p.target()).str());
        }
        if (dropped) {
          abort_ta(u, *dropped);
          emit(ev.time, u, "prep_evict", Detail().add("cell", *dropped).str());
        }
      }
      break;
    }
    case ProcedureKind::ta_acquisition: {
      PreparedCell* pc = u.cho.find(p.target());
      if (pc == nullptr) break;
      apply_ta_event(pc->ta, ev, p.succeeded());
      if (p.succeeded()) {
        emit(ev.time, u, "ta_acquired", Detail().add("cell", p.target()).add("t_acq", pc->ta.t_acq).str());
      } else if (p.failed()) {
        emit(ev.time, u, "ta_failed", Detail().add("cell", p.target()).add("msg", ev.kind).str());
        if (cfg_.cho.ta_retry) pc->ta.retry_after = now + cfg_.cho.ta_retry_backoff;
      }
      break;
    }
    case ProcedureKind::exec_rach_less:
    case ProcedureKind::exec_rach_aided:
      break;
  }
}

RunArtifacts Simulation::run() {
  const std::int64_t n_steps = (window_end_.count_us()) / cfg_.dt.count_us();
  std::int64_t window_steps = 0;
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const SimTime now = cfg_.dt * k;
    for (UeState& u : ues_) step_ue(u, now, k == 0);
    deliver_due(now);
    if (in_window(now)) ++window_steps;
  }

  // Outcomes still pending at the end are cut at the window end.
  for (UeState& u : ues_) {
    if (u.ledger.is_open()) u.ledger.close(window_end_);
    if (u.conn == Conn::executing) {
      u.ledger.add(u.access.started, std::max(u.access.started, window_end_), OutageCause::handover_interruption);
    }
  }

  RunArtifacts out;
  for (UeState& u : ues_) {
    counts_.outage_ho += u.ledger.duration(OutageCause::handover_interruption, window_begin_, window_end_);
    counts_.outage_other += u.ledger.duration(OutageCause::other_mobility, window_begin_, window_end_);
    for (const auto& iv : u.ledger.intervals()) {
      emit(iv.start, u, "outage",
           Detail().add("start", iv.start).add("end", iv.end).add("cause", std::string(to_string(iv.cause))).str());
    }
    out.ledgers.push_back(u.ledger);
  }
  std::stable_sort(events_.begin(), events_.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });

  out.report = KpiReport::build(std::string(to_string(cfg_.scheme)), cfg_.fingerprint(), cfg_.n_ue, cfg_.t_sim,
                                counts_);
  out.events = std::move(events_);
  out.resolved_config = cfg_.resolved_text();
  out.window_steps = window_steps;
  return out;
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string RunArtifacts::ledger_csv() const {
  std::string out = "ue,start,end,cause\n";
  for (std::size_t u = 0; u < ledgers.size(); ++u) {
    for (const auto& iv : ledgers[u].intervals()) {
      out += std::to_string(u) + "," + iv.start.str() + "," + iv.end.str() + "," + std::string(to_string(iv.cause)) +
             "\n";
    }
  }
  return out;
}

void RunArtifacts::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << body;
  };
  put("kpi_report.csv", kpi_csv());
  put("events.csv", events_csv());
  put("ledger.csv", ledger_csv());
  put("resolved_config.txt", resolved_config);
}

RunArtifacts run(const ScenarioConfig& config) { return Simulation(config).run(); }

std::vector<RunArtifacts> run_many(std::span<const ScenarioConfig> configs, int threads) {
  std::vector<RunArtifacts> out(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) { out[i] = run(configs[i]); });
  return out;
}

PairResult run_pair(const ScenarioConfig& config, std::span<const std::uint64_t> seeds, int threads,
                    const RunSink& sink) {
  if (seeds.empty()) throw std::invalid_argument("run_pair: at least one seed is required");
  std::vector<ScenarioConfig> configs;
  for (std::uint64_t s : seeds) {
    for (Scheme scheme : {Scheme::rach_aided, Scheme::rach_less}) {
      ScenarioConfig c = config;
      c.seed = s;
      c.scheme = scheme;
      configs.push_back(c);
    }
  }
  PairResult result;
  result.seeds.assign(seeds.begin(), seeds.end());
  result.rach_aided.resize(seeds.size());
  result.rach_less.resize(seeds.size());
  std::mutex sink_mutex;
  parallel_for(configs.size(), threads, [&](std::size_t i) {
    RunArtifacts a = run(configs[i]);
    if (sink) {
      std::lock_guard lock(sink_mutex);
      sink(configs[i], a);
    }
    (i % 2 == 0 ? result.rach_aided : result.rach_less)[i / 2] = std::move(a.report);
  });
  result.mean_rach_aided = mean_report(result.rach_aided);
  result.mean_rach_less = mean_report(result.rach_less);
  result.comparison = compare_schemes(result.mean_rach_aided, result.mean_rach_less);
  return result;
}

}  // namespace chosim
