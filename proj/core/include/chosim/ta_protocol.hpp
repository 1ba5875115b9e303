#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chosim/deployment.hpp"
#include "chosim/sim_time.hpp"

namespace chosim {

enum class Interface { radio, xn };

/// The four message sequences that make up handover signaling.
enum class ProcedureKind { preparation, ta_acquisition, exec_rach_less, exec_rach_aided };

std::string_view to_string(Interface i);
std::string_view to_string(ProcedureKind k);

/// One row of a message schedule: the message is delivered `delay` after the
/// previous row (or after the procedure start for the first row).
struct MessageSpec {
  std::string kind;
  Interface iface = Interface::radio;
  SimTime delay;
  bool fallible = false;
};

struct MessageSchedule {
  std::vector<MessageSpec> rows;

  SimTime total() const;
  int count(Interface i) const;
};

/// Declarative message tables for the whole handover signaling, loaded from
/// a text file so the counts can be audited as data.
///
/// Format: `[section]` headers (preparation, ta_acquisition, exec_rach_less,
/// exec_rach_aided) followed by rows `kind, radio|xn, delay_ms, 0|1`.
/// `#` starts a comment.
struct ScheduleSet {
  MessageSchedule preparation;
  MessageSchedule ta_acquisition;
  MessageSchedule exec_rach_less;
  MessageSchedule exec_rach_aided;

  static ScheduleSet defaults();
  static ScheduleSet parse(std::string_view text);
  static ScheduleSet load(const std::string& path);
  static std::string_view default_text();

  const MessageSchedule& get(ProcedureKind k) const;

  /// Throws std::invalid_argument if any Xn row deviates from `xn_delay`.
  void validate(SimTime xn_delay) const;
};

/// A message as emitted on the wire.
struct SignalingEvent {
  SimTime time;
  std::string kind;
  Interface iface = Interface::radio;
  ProcedureKind procedure = ProcedureKind::preparation;
  CellId target = -1;
  bool fallible = false;
  bool lost = false;
};

/// A running instance of a message schedule.
///
/// The optional `span` stretches the sequence so its last message lands
/// exactly `span` after the start: the padding goes in front of the last row.
class Procedure {
public:
  Procedure(const MessageSchedule& schedule, ProcedureKind kind, CellId target, SimTime start,
            std::optional<SimTime> span = std::nullopt);

  SimTime next_time() const { return next_time_; }
  bool finished() const { return failed_ || next_ >= rows_->size(); }
  bool failed() const { return failed_; }
  bool succeeded() const { return !failed_ && next_ >= rows_->size(); }
  ProcedureKind kind() const { return kind_; }
  CellId target() const { return target_; }
  SimTime start() const { return start_; }
  const MessageSpec& next_row() const { return (*rows_)[next_]; }
  std::size_t delivered() const { return next_; }

  /// Emits the next message. A fallible message is lost when `link_ok` is
  /// false, which fails the procedure; nothing is emitted afterwards.
  SignalingEvent deliver(bool link_ok);

private:
  const std::vector<MessageSpec>* rows_;
  ProcedureKind kind_;
  CellId target_;
  SimTime start_;
  SimTime pad_;
  std::size_t next_ = 0;
  SimTime next_time_;
  bool failed_ = false;
};

// --- Timing advance state ---------------------------------------------------

enum class TaPhase { none, reported, commanded, preamble_sent, acquired, failed };
std::string_view to_string(TaPhase p);

struct TaState {
  TaPhase phase = TaPhase::none;
  bool in_progress = false;
  SimTime t_acq;
  bool early_forwarding_active = false;
  std::string failed_step;             // kind of the lost message
  std::optional<SimTime> retry_after;  // set when retry is enabled
};

/// Applies a delivered TA-sequence message to the state.
void apply_ta_event(TaState& state, const SignalingEvent& ev, bool last_row);

struct TaSequenceResult {
  TaState state;
  std::vector<SignalingEvent> events;
};

/// Runs the whole TA acquisition sequence in isolation, sampling the serving
/// link quality at each delivery instant. Fallible messages are lost when
/// the quality is below `gamma_out_db`.
TaSequenceResult run_ta_sequence(const MessageSchedule& schedule, CellId target, SimTime start,
                                 SimTime t_acq_delay,
                                 const std::function<double(SimTime)>& serving_rlq_db,
                                 double gamma_out_db);

/// Time-alignment validity: acquired and not older than `t_alig`.
bool ta_valid(const TaState& state, SimTime now, SimTime t_alig);

// --- Interruption accounting ------------------------------------------------

struct InterruptionComponent {
  int index;
  std::string_view description;
  SimTime duration;
};

/// Handover interruption components for an intra-frequency CHO in FR2.
std::span<const InterruptionComponent> interruption_components();
SimTime interruption_component_sum();

inline constexpr int kLateForwardingComponent = 8;

/// Total interruption: RACH-aided, RACH-less with late forwarding, and
/// RACH-less with early forwarding (component 8 removed).
SimTime interruption_time(bool rach_less, bool early_forwarding);

// --- Mode selection and message tallies -------------------------------------

enum class HandoverMode { rach_aided, rach_less };
enum class Scheme { rach_aided, rach_less };

std::string_view to_string(HandoverMode m);
std::string_view to_string(Scheme s);

enum class FallbackReason { none, no_ta, lost_step10, lost_step16, ta_expired };
std::string_view to_string(FallbackReason r);

struct ModeDecision {
  HandoverMode mode = HandoverMode::rach_aided;
  FallbackReason reason = FallbackReason::no_ta;
};

/// RACH-less iff the scheme allows it and the target's TA was acquired and
/// is still valid; otherwise RACH-aided with the reason recorded.
ModeDecision choose_mode(Scheme scheme, const TaState* ta, SimTime now, SimTime t_alig);

struct MessageTally {
  long radio = 0;
  long xn = 0;
  bool operator==(const MessageTally&) const = default;
  MessageTally& operator+=(const MessageTally& o) {
    radio += o.radio;
    xn += o.xn;
    return *this;
  }
};

/// What a single handover went through, for table-driven counting.
struct HandoverRecord {
  std::size_t preparation_rows = 0;  // messages emitted by the preparation
  std::size_t ta_rows = 0;           // messages emitted by the TA sequence
  std::optional<HandoverMode> executed;
};

MessageTally tally(const MessageSchedule& schedule, std::size_t rows);
MessageTally tally_messages(const HandoverRecord& record, const ScheduleSet& schedules);
MessageTally tally_events(std::span<const SignalingEvent> events);

}  // namespace chosim
