#pragma once

#include <optional>
#include <span>
#include <vector>

#include "chosim/sim_time.hpp"
#include "chosim/ta_protocol.hpp"

namespace chosim {

enum class TriggerKind {
  prep,     // serving < target + offset
  exec,     // serving < target - offset
  acq,      // serving < target + offset
  release,  // serving > target + offset
};

/// Inequality of a trigger kind for one measurement instant.
bool trigger_satisfied(TriggerKind kind, double serving_l3, double target_l3, double offset_db);

/// Offset condition with a monitoring window.
///
/// Fires at instant m iff the inequality held at every measurement instant in
/// (m - window, m]; i.e. once the consecutive-satisfaction counter times the
/// measurement period reaches the window. Any violating sample resets the
/// counter.
class TriggerCondition {
public:
  TriggerCondition() = default;
  TriggerCondition(TriggerKind kind, double offset_db, SimTime window, SimTime meas_period);

  bool evaluate(double serving_l3, double target_l3);
  void reset() { counter_ = 0; }
  int counter() const { return counter_; }
  int required_samples() const { return required_; }
  TriggerKind kind() const { return kind_; }
  double offset_db() const { return offset_; }

private:
  TriggerKind kind_ = TriggerKind::prep;
  double offset_ = 0.0;
  int required_ = 1;
  int counter_ = 0;
};

/// Free-function form of TriggerCondition::evaluate.
bool eval_condition(TriggerCondition& cond, double serving_l3, double target_l3);

struct ChoParams {
  double o_prep_db = 5.0;
  double o_exec_db = 3.0;
  double o_acq_db = 2.0;
  double release_hysteresis_db = 2.0;
  SimTime t_prep = SimTime::ms(80);
  SimTime t_exec = SimTime::ms(80);
  SimTime t_acq = SimTime::ms(20);
  SimTime t_prep_delay = SimTime::ms(50);
  SimTime t_acq_delay = SimTime::ms(50);
  SimTime t_alig = SimTime::ms(10240);
  SimTime t_hof = SimTime::ms(200);
  SimTime meas_period = SimTime::ms(20);
  int n_c_max = 4;
  bool ta_retry = false;
  SimTime ta_retry_backoff = SimTime::ms(100);
};

struct PreparedCell {
  CellId cell = -1;
  SimTime prepared_at;
  TaState ta;
  TriggerCondition exec;
  TriggerCondition acq;
  TriggerCondition release;
};

/// Per-UE conditional handover state for the current serving cell.
struct ChoState {
  CellId serving = -1;
  std::vector<PreparedCell> prepared;
  std::vector<TriggerCondition> prep_monitor;  // indexed by cell
  std::vector<bool> preparing;                 // preparation in flight, by cell

  PreparedCell* find(CellId c);
  const PreparedCell* find(CellId c) const;
  bool is_prepared(CellId c) const { return find(c) != nullptr; }
};

enum class ChoActionKind { start_preparation, start_ta_acquisition, execute, release };

struct ChoAction {
  ChoActionKind kind;
  CellId cell;
};

class ChoEngine {
public:
  explicit ChoEngine(const ChoParams& params) : params_(params) {}

  const ChoParams& params() const { return params_; }

  /// Fresh state for a UE served by `serving` among `n_cells` cells.
  ChoState make_state(int n_cells, CellId serving) const;

  /// Clears every prepared cell, monitor and TA state for a new serving cell.
  void reset_for_serving(ChoState& state, CellId serving) const;

  /// Evaluates every condition at a measurement instant.
  ///
  /// An execution wins over everything else: if any prepared cell fires its
  /// execution condition only that execution (towards the strongest such
  /// cell) is returned. Otherwise preparations, TA acquisitions and releases
  /// are returned in cell order. Returned preparations and acquisitions are
  /// already marked in flight.
  std::vector<ChoAction> on_measurement(ChoState& state, std::span<const double> l3, Scheme scheme,
                                        SimTime now) const;

  /// A preparation completed (RRC reconfiguration delivered). Adds the cell,
  /// evicting the weakest prepared cell if the set is full. Returns the cell
  /// that was dropped, which is `cell` itself if it is the weakest.
  std::optional<CellId> on_prepared(ChoState& state, CellId cell, std::span<const double> l3,
                                    SimTime now) const;

  /// The measurement report was lost: the preparation condition re-arms.
  void on_preparation_failed(ChoState& state, CellId cell) const;

  void release(ChoState& state, CellId cell) const;

  /// Execution mode towards `target` at `now`.
  ModeDecision decide_mode(const ChoState& state, CellId target, Scheme scheme, SimTime now) const;

private:
  ChoParams params_;
};

/// Handover access outcome while executing.
enum class AccessStatus { pending, success, hof };

struct AccessAttempt {
  CellId target = -1;
  HandoverMode mode = HandoverMode::rach_aided;
  SimTime started;
};

/// Access succeeds at the first instant the target-link SINR reaches
/// gamma_out; a handover failure is declared once it has stayed below for
/// the whole of t_hof.
AccessStatus handover_failure_check(const AccessAttempt& attempt, double target_sinr_db, SimTime now,
                                    double gamma_out_db, SimTime t_hof);

/// Re-establishment target: the strongest cell by L3 (lowest id on ties).
CellId reestablishment_target(std::span<const double> l3);

}  // namespace chosim
