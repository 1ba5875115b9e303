#include "chosim/cho_engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace chosim {

bool trigger_satisfied(TriggerKind kind, double serving_l3, double target_l3, double offset_db) {
  switch (kind) {
    case TriggerKind::prep:
    case TriggerKind::acq:
      return serving_l3 < target_l3 + offset_db;
    case TriggerKind::exec:
      return serving_l3 < target_l3 - offset_db;
    case TriggerKind::release:
      return serving_l3 > target_l3 + offset_db;
  }
  return false;
}

TriggerCondition::TriggerCondition(TriggerKind kind, double offset_db, SimTime window, SimTime meas_period)
    : kind_(kind), offset_(offset_db) {
  if (meas_period <= SimTime{}) throw std::invalid_argument("TriggerCondition: period must be positive");
  if (window < SimTime{}) throw std::invalid_argument("TriggerCondition: negative window");
  const auto w = window.count_us();
  const auto p = meas_period.count_us();
  required_ = std::max<int>(1, static_cast<int>((w + p - 1) / p));
}

bool TriggerCondition::evaluate(double serving_l3, double target_l3) {
  if (trigger_satisfied(kind_, serving_l3, target_l3, offset_)) {
    ++counter_;
  } else {
    counter_ = 0;
  }
  return counter_ >= required_;
}

bool eval_condition(TriggerCondition& cond, double serving_l3, double target_l3) {
  return cond.evaluate(serving_l3, target_l3);
}

PreparedCell* ChoState::find(CellId c) {
  auto it = std::find_if(prepared.begin(), prepared.end(), [&](const PreparedCell& p) { return p.cell == c; });
  return it == prepared.end() ? nullptr : &*it;
}

const PreparedCell* ChoState::find(CellId c) const {
  auto it = std::find_if(prepared.begin(), prepared.end(), [&](const PreparedCell& p) { return p.cell == c; });
  return it == prepared.end() ? nullptr : &*it;
}

ChoState ChoEngine::make_state(int n_cells, CellId serving) const {
  ChoState s;
  s.prep_monitor.assign(static_cast<std::size_t>(n_cells),
                        TriggerCondition(TriggerKind::prep, params_.o_prep_db, params_.t_prep, params_.meas_period));
  s.preparing.assign(static_cast<std::size_t>(n_cells), false);
  s.serving = serving;
  return s;
}

void ChoEngine::reset_for_serving(ChoState& state, CellId serving) const {
  state = make_state(static_cast<int>(state.prep_monitor.size()), serving);
}

std::vector<ChoAction> ChoEngine::on_measurement(ChoState& state, std::span<const double> l3, Scheme scheme,
                                                 SimTime now) const {
  std::vector<ChoAction> actions;
  const double serving = l3[static_cast<std::size_t>(state.serving)];

  std::optional<CellId> exec_target;
  std::vector<CellId> acq_fired;
  for (PreparedCell& pc : state.prepared) {
    const double target = l3[static_cast<std::size_t>(pc.cell)];
    if (pc.exec.evaluate(serving, target) &&
        (!exec_target || target > l3[static_cast<std::size_t>(*exec_target)])) {
      exec_target = pc.cell;
    }
    if (pc.release.evaluate(serving, target)) actions.push_back({ChoActionKind::release, pc.cell});

    if (scheme != Scheme::rach_less) continue;
    TaState& ta = pc.ta;
    if (ta.phase == TaPhase::failed && ta.retry_after && now >= *ta.retry_after) {
      ta = TaState{};
      pc.acq.reset();
    }
    if (ta.phase == TaPhase::none && !ta.in_progress && pc.acq.evaluate(serving, target)) {
      acq_fired.push_back(pc.cell);
    }
  }
  if (exec_target) return {ChoAction{ChoActionKind::execute, *exec_target}};

  for (CellId c : acq_fired) {
    state.find(c)->ta.in_progress = true;
    actions.push_back({ChoActionKind::start_ta_acquisition, c});
  }

  for (CellId c = 0; c < static_cast<CellId>(l3.size()); ++c) {
    const auto ci = static_cast<std::size_t>(c);
    if (c == state.serving || state.preparing[ci] || state.is_prepared(c)) continue;
    if (state.prep_monitor[ci].evaluate(serving, l3[ci])) {
      state.preparing[ci] = true;
      state.prep_monitor[ci].reset();
      actions.push_back({ChoActionKind::start_preparation, c});
    }
  }
  std::stable_sort(actions.begin(), actions.end(),
                   [](const ChoAction& a, const ChoAction& b) { return a.cell < b.cell; });
  return actions;
}

std::optional<CellId> ChoEngine::on_prepared(ChoState& state, CellId cell, std::span<const double> l3,
                                             SimTime now) const {
  state.preparing[static_cast<std::size_t>(cell)] = false;
  if (cell == state.serving || state.is_prepared(cell)) return std::nullopt;

  std::optional<CellId> dropped;
  if (static_cast<int>(state.prepared.size()) >= params_.n_c_max) {
    auto weakest = std::min_element(state.prepared.begin(), state.prepared.end(),
                                    [&](const PreparedCell& a, const PreparedCell& b) {
                                      return l3[static_cast<std::size_t>(a.cell)] <
                                             l3[static_cast<std::size_t>(b.cell)];
                                    });
    if (l3[static_cast<std::size_t>(cell)] <= l3[static_cast<std::size_t>(weakest->cell)]) return cell;
    dropped = weakest->cell;
    state.prepared.erase(weakest);
  }
  PreparedCell pc;
  pc.cell = cell;
  pc.prepared_at = now;
  pc.exec = TriggerCondition(TriggerKind::exec, params_.o_exec_db, params_.t_exec, params_.meas_period);
  pc.acq = TriggerCondition(TriggerKind::acq, params_.o_acq_db, params_.t_acq, params_.meas_period);
  pc.release = TriggerCondition(TriggerKind::release, params_.o_prep_db + params_.release_hysteresis_db,
                                params_.t_prep, params_.meas_period);
  state.prepared.push_back(std::move(pc));
  return dropped;
}

void ChoEngine::on_preparation_failed(ChoState& state, CellId cell) const {
  const auto ci = static_cast<std::size_t>(cell);
  state.preparing[ci] = false;
  state.prep_monitor[ci].reset();
}

void ChoEngine::release(ChoState& state, CellId cell) const {
  std::erase_if(state.prepared, [&](const PreparedCell& p) { return p.cell == cell; });
}

ModeDecision ChoEngine::decide_mode(const ChoState& state, CellId target, Scheme scheme, SimTime now) const {
  const PreparedCell* pc = state.find(target);
  if (pc == nullptr) throw std::logic_error("execution towards an unprepared cell");
  return choose_mode(scheme, &pc->ta, now, params_.t_alig);
}

AccessStatus handover_failure_check(const AccessAttempt& attempt, double target_sinr_db, SimTime now,
                                    double gamma_out_db, SimTime t_hof) {
  if (target_sinr_db >= gamma_out_db) return AccessStatus::success;
  if (now - attempt.started >= t_hof) return AccessStatus::hof;
  return AccessStatus::pending;
}

CellId reestablishment_target(std::span<const double> l3) {
  if (l3.empty()) throw std::invalid_argument("reestablishment_target: no cells");
  std::size_t best = 0;
  for (std::size_t i = 1; i < l3.size(); ++i) {
    if (l3[i] > l3[best]) best = i;
  }
  return static_cast<CellId>(best);
}

}  // namespace chosim
