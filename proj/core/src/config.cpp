#include "chosim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "chosim/kpi.hpp"

namespace chosim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw std::invalid_argument("config key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                              "' as " + std::string(expected));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a number");
  return out;
}

template <class Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "a boolean");
}

enum class Unit { ms, s };

/// Either sets one key (`set_key` non-empty) or records every key's value.
class Visitor {
public:
  Visitor(std::string_view set_key, std::string_view set_value) : key_(set_key), value_(set_value) {}

  void operator()(std::string_view name, double& f) {
    if (hit(name)) f = to_double(name, value_);
    record(name, format_double(f));
  }
  void operator()(std::string_view name, int& f) {
    if (hit(name)) f = to_int<int>(name, value_);
    record(name, std::to_string(f));
  }
  void operator()(std::string_view name, std::uint64_t& f) {
    if (hit(name)) f = to_int<std::uint64_t>(name, value_);
    record(name, std::to_string(f));
  }
  void operator()(std::string_view name, bool& f) {
    if (hit(name)) f = to_bool(name, value_);
    record(name, f ? "true" : "false");
  }
  void operator()(std::string_view name, std::string& f) {
    if (hit(name)) f = std::string(value_);
    record(name, f);
  }
  void operator()(std::string_view name, SimTime& f, Unit unit) {
    if (hit(name)) {
      const double v = to_double(name, value_);
      f = unit == Unit::ms ? SimTime::from_ms(v) : SimTime::from_s(v);
    }
    record(name, format_double(unit == Unit::ms ? f.to_ms() : f.to_s()));
  }
  template <class E>
  void operator()(std::string_view name, E& f, std::initializer_list<std::pair<E, std::string_view>> names) {
    if (hit(name)) {
      bool ok = false;
      for (const auto& [e, n] : names) {
        if (n == value_) {
          f = e;
          ok = true;
        }
      }
      if (!ok) {
        std::string list;
        for (const auto& [e, n] : names) list += (list.empty() ? "" : "|") + std::string(n);
        bad_value(name, value_, "one of " + list);
      }
    }
    for (const auto& [e, n] : names) {
      if (e == f) record(name, std::string(n));
    }
  }

  bool matched() const { return matched_; }
  std::vector<std::pair<std::string, std::string>> take() { return std::move(entries_); }

private:
  bool hit(std::string_view name) {
    if (key_.empty() || name != key_) return false;
    matched_ = true;
    return true;
  }
  void record(std::string_view name, std::string v) {
    if (key_.empty()) entries_.emplace_back(std::string(name), std::move(v));
  }

  std::string_view key_;
  std::string_view value_;
  bool matched_ = false;
  std::vector<std::pair<std::string, std::string>> entries_;
};

template <class Cfg>
void visit_fields(Cfg& c, Visitor& v) {
  v("deployment.isd_m", c.isd_m);
  v("deployment.n_sites", c.n_sites);
  v("deployment.ue_speed_kmh", c.ue_speed_kmh);
  v("deployment.n_ue", c.n_ue);

  auto& ch = c.channel;
  v("channel.fc_ghz", ch.fc_ghz);
  v("channel.h_bs_m", ch.h_bs_m);
  v("channel.h_ut_m", ch.h_ut_m);
  v("channel.tx_power_dbm", ch.tx_power_dbm);
  v("channel.noise_figure_db", ch.noise_figure_db);
  v("channel.bandwidth_mhz", ch.bandwidth_mhz);
  v("channel.sf_sigma_los_db", ch.sf_sigma_los_db);
  v("channel.sf_sigma_nlos_db", ch.sf_sigma_nlos_db);
  v("channel.sf_decorr_m", ch.sf_decorr_m);
  v("channel.fast_fading", ch.fast_fading);
  v("channel.n_sinusoids", ch.n_sinusoids);
  v("channel.narrow_peak_dbi", ch.narrow_peak_dbi);
  v("channel.narrow_az_bw_deg", ch.narrow_az_bw_deg);
  v("channel.narrow_el_bw_deg", ch.narrow_el_bw_deg);
  v("channel.narrow_tilt_deg", ch.narrow_tilt_deg);
  v("channel.wide_peak_dbi", ch.wide_peak_dbi);
  v("channel.wide_az_bw_deg", ch.wide_az_bw_deg);
  v("channel.wide_el_bw_deg", ch.wide_el_bw_deg);
  v("channel.wide_tilt_deg", ch.wide_tilt_deg);
  v("channel.beam_side_lobe_db", ch.beam_side_lobe_db);
  v("channel.panel_peak_db", ch.panel_peak_db);
  v("channel.panel_bw_deg", ch.panel_bw_deg);
  v("channel.panel_side_lobe_db", ch.panel_side_lobe_db);

  auto& m = c.measurement;
  v("measurement.ssb_period_steps", m.omega);
  v("measurement.l3_k", m.l3_k);
  v("measurement.consolidation", m.policy,
    {{ConsolidationPolicy::strongest, "strongest"}, {ConsolidationPolicy::avg_top_n, "avg_top_n"}});
  v("measurement.avg_top_n", m.avg_top_n);
  v("measurement.consolidation_threshold_dbm", m.consolidation_threshold_dbm);
  v("measurement.meas_error_db", m.meas_error_db);

  v("sinr.interference_model", c.sinr.model,
    {{InterferenceModel::scaled_topk, "scaled_topk"}, {InterferenceModel::full, "full"},
     {InterferenceModel::single, "single"}});
  v("sinr.k_b", c.sinr.k_b);
  v("sinr.rlq_window", c.rlq_window);

  v("beam.gamma_out_db", c.beam.gamma_out_db);
  v("beam.n_batt", c.beam.n_batt);
  v("beam.t_batt_ms", c.beam.t_batt, Unit::ms);
  v("beam.t_rlf_ms", c.beam.t_rlf, Unit::ms);
  v("beam.t_reestablishment_ms", c.beam.t_reestablishment, Unit::ms);

  auto& h = c.cho;
  v("cho.o_prep_db", h.o_prep_db);
  v("cho.o_exec_db", h.o_exec_db);
  v("cho.release_hysteresis_db", h.release_hysteresis_db);
  v("cho.t_prep_ms", h.t_prep, Unit::ms);
  v("cho.t_exec_ms", h.t_exec, Unit::ms);
  v("cho.t_prep_delay_ms", h.t_prep_delay, Unit::ms);
  v("cho.n_c_max", h.n_c_max);
  v("cho.t_hof_ms", h.t_hof, Unit::ms);

  v("ta.o_acq_db", h.o_acq_db);
  v("ta.t_acq_ms", h.t_acq, Unit::ms);
  v("ta.t_acq_delay_ms", h.t_acq_delay, Unit::ms);
  v("ta.t_alig_ms", h.t_alig, Unit::ms);
  v("ta.retry", h.ta_retry);
  v("ta.retry_backoff_ms", h.ta_retry_backoff, Unit::ms);
  v("ta.early_forwarding", c.early_forwarding);
  v("ta.xn_delay_ms", c.xn_delay, Unit::ms);
  v("ta.schedule_file", c.schedule_file);

  v("sim.dt_ms", c.dt, Unit::ms);
  v("sim.t_sim_s", c.t_sim, Unit::s);
  v("sim.warmup_s", c.warmup, Unit::s);
  v("sim.scheme", c.scheme, {{Scheme::rach_aided, "rach_aided"}, {Scheme::rach_less, "rach_less"}});
  v("sim.seed", c.seed);
}

}  // namespace

Scheme parse_scheme(std::string_view s) {
  if (s == "rach_less" || s == "rach-less") return Scheme::rach_less;
  if (s == "rach_aided" || s == "rach-aided") return Scheme::rach_aided;
  throw std::invalid_argument("unknown scheme '" + std::string(s) + "' (expected rach-aided or rach-less)");
}

void ScenarioConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key.empty()) throw std::invalid_argument("config: empty key");
  std::string scheme_name;
  if (key == "sim.scheme") {
    scheme_name = std::string(to_string(parse_scheme(value)));
    value = scheme_name;
  }
  Visitor v(key, value);
  visit_fields(*this, v);
  if (!v.matched()) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> ScenarioConfig::entries() const {
  Visitor v({}, {});
  visit_fields(const_cast<ScenarioConfig&>(*this), v);
  return v.take();
}

std::string ScenarioConfig::resolved_text() const {
  std::string out;
  for (const auto& [k, val] : entries()) out += k + " = " + val + "\n";
  return out;
}

std::string ScenarioConfig::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& [k, val] : entries()) {
    if (k == "sim.scheme" || k == "sim.seed") continue;
    for (char ch : k + "=" + val + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ScenarioConfig::finalize() {
  sinr.noise_dbm = channel.noise_dbm();
  cho.meas_period = dt * measurement.omega;
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(isd_m > 0.0, "deployment.isd_m must be positive");
  require(n_sites == 1 || n_sites == 7, "deployment.n_sites must be 1 or 7");
  require(ue_speed_kmh >= 0.0, "deployment.ue_speed_kmh must be non-negative");
  require(n_ue > 0, "deployment.n_ue must be positive");
  require(channel.n_sinusoids > 0, "channel.n_sinusoids must be positive");
  require(channel.sf_decorr_m > 0.0, "channel.sf_decorr_m must be positive");
  require(measurement.omega >= 1, "measurement.ssb_period_steps must be at least 1");
  require(measurement.l3_k >= 0, "measurement.l3_k must be non-negative");
  require(measurement.avg_top_n >= 1 && measurement.avg_top_n <= kBeamsPerCell,
          "measurement.avg_top_n must be in [1, 12]");
  require(measurement.meas_error_db >= 0.0, "measurement.meas_error_db must be non-negative");
  require(sinr.k_b >= 1 && sinr.k_b <= kBeamsPerCell, "sinr.k_b must be in [1, 12]");
  require(rlq_window >= 1, "sinr.rlq_window must be at least 1");
  require(beam.n_batt >= 1, "beam.n_batt must be at least 1");
  require(cho.n_c_max >= 1, "cho.n_c_max must be at least 1");
  require(dt > SimTime{}, "sim.dt_ms must be positive");
  require(t_sim > SimTime{}, "sim.t_sim_s must be positive");
  require(warmup >= SimTime{}, "sim.warmup_s must be non-negative");
  require(cho.t_alig > SimTime{}, "ta.t_alig_ms must be positive");
  require(xn_delay > SimTime{}, "ta.xn_delay_ms must be positive");

  const std::pair<const char*, SimTime> stepped[] = {
      {"beam.t_batt_ms", beam.t_batt},          {"beam.t_rlf_ms", beam.t_rlf},
      {"beam.t_reestablishment_ms", beam.t_reestablishment},
      {"cho.t_prep_ms", cho.t_prep},            {"cho.t_exec_ms", cho.t_exec},
      {"cho.t_prep_delay_ms", cho.t_prep_delay}, {"cho.t_hof_ms", cho.t_hof},
      {"ta.t_acq_ms", cho.t_acq},               {"ta.t_acq_delay_ms", cho.t_acq_delay},
      {"ta.retry_backoff_ms", cho.ta_retry_backoff},
      {"sim.t_sim_s", t_sim},                   {"sim.warmup_s", warmup},
  };
  for (const auto& [name, t] : stepped) {
    require(t >= SimTime{}, std::string(name) + " must be non-negative");
    require(t.count_us() % dt.count_us() == 0,
            std::string(name) + " = " + format_double(t.to_ms()) + " ms is not a multiple of sim.dt_ms = " +
                format_double(dt.to_ms()) + " ms");
  }
  require(beam.t_batt > SimTime{}, "beam.t_batt_ms must be positive");
  require(cho.t_hof > SimTime{}, "cho.t_hof_ms must be positive");

  const ScheduleSet s = schedules();
  s.validate(xn_delay);
  require(s.preparation.total() <= cho.t_prep_delay,
          "cho.t_prep_delay_ms is shorter than the preparation message schedule (" +
              format_double(s.preparation.total().to_ms()) + " ms)");
  require(s.ta_acquisition.total() <= cho.t_acq_delay,
          "ta.t_acq_delay_ms is shorter than the TA message schedule (" +
              format_double(s.ta_acquisition.total().to_ms()) + " ms)");
}

ScheduleSet ScenarioConfig::schedules() const {
  return schedule_file.empty() ? ScheduleSet::defaults() : ScheduleSet::load(schedule_file);
}

void apply_config_text(ScenarioConfig& cfg, std::string_view text) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      cfg.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(ScenarioConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str());
}

void apply_override(ScenarioConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw std::invalid_argument("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  cfg.set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

}  // namespace chosim
