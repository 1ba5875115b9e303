#include "chosim/ta_protocol.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "default_schedules.hpp"

namespace chosim {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void parse_error(int line, const std::string& msg) {
  throw std::invalid_argument("message schedule line " + std::to_string(line) + ": " + msg);
}

constexpr std::array<InterruptionComponent, 8> kComponents{{
    {1, "UE processing time", SimTime::us(20'000)},
    {2, "Fine time tracking and acquiring full timing information of the target cell", SimTime::us(10'000)},
    {3, "Margin for SSB post-processing", SimTime::us(2'000)},
    {4, "Delay in acquiring first available PRACH in target cell", SimTime::us(10'000)},
    {5, "PRACH preamble transmission", SimTime::us(125)},
    {6, "UL grant allocation and TA for UE", SimTime::us(1'250)},
    {7, "UE RRC reconfiguration complete message", SimTime::us(1'000)},
    {8, "Interruption from late data forwarding (handover success and SN status transfer)",
     SimTime::us(10'000)},
}};

// Stated total once the random access is skipped and the target timing is
// already known; with late data forwarding still in place.
constexpr SimTime kRachLessLateForwarding = SimTime::ms(40);

}  // namespace

std::string_view to_string(Interface i) { return i == Interface::radio ? "radio" : "xn"; }

std::string_view to_string(ProcedureKind k) {
  switch (k) {
    case ProcedureKind::preparation: return "preparation";
    case ProcedureKind::ta_acquisition: return "ta_acquisition";
    case ProcedureKind::exec_rach_less: return "exec_rach_less";
    case ProcedureKind::exec_rach_aided: return "exec_rach_aided";
  }
  return "?";
}

std::string_view to_string(TaPhase p) {
  switch (p) {
    case TaPhase::none: return "none";
    case TaPhase::reported: return "reported";
    case TaPhase::commanded: return "commanded";
    case TaPhase::preamble_sent: return "preamble_sent";
    case TaPhase::acquired: return "acquired";
    case TaPhase::failed: return "failed";
  }
  return "?";
}

std::string_view to_string(HandoverMode m) { return m == HandoverMode::rach_less ? "rach_less" : "rach_aided"; }
std::string_view to_string(Scheme s) { return s == Scheme::rach_less ? "rach_less" : "rach_aided"; }

std::string_view to_string(FallbackReason r) {
  switch (r) {
    case FallbackReason::none: return "none";
    case FallbackReason::no_ta: return "no_ta";
    case FallbackReason::lost_step10: return "lost_step10";
    case FallbackReason::lost_step16: return "lost_step16";
    case FallbackReason::ta_expired: return "ta_expired";
  }
  return "?";
}

SimTime MessageSchedule::total() const {
  SimTime t;
  for (const auto& r : rows) t += r.delay;
  return t;
}

int MessageSchedule::count(Interface i) const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [&](const MessageSpec& r) { return r.iface == i; }));
}

std::string_view ScheduleSet::default_text() { return kDefaultScheduleText; }

ScheduleSet ScheduleSet::defaults() { return parse(default_text()); }

ScheduleSet ScheduleSet::parse(std::string_view text) {
  ScheduleSet set;
  MessageSchedule* current = nullptr;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_error(line_no, "unterminated section header");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (name == "preparation") current = &set.preparation;
      else if (name == "ta_acquisition") current = &set.ta_acquisition;
      else if (name == "exec_rach_less") current = &set.exec_rach_less;
      else if (name == "exec_rach_aided") current = &set.exec_rach_aided;
      else parse_error(line_no, "unknown section '" + name + "'");
      continue;
    }
    if (current == nullptr) parse_error(line_no, "row outside of a section");
    const auto fields = split(line, ',');
    if (fields.size() != 4) parse_error(line_no, "expected 4 fields: kind, interface, delay_ms, fallible");

    MessageSpec row;
    row.kind = fields[0];
    if (row.kind.empty()) parse_error(line_no, "empty message kind");
    if (fields[1] == "radio") row.iface = Interface::radio;
    else if (fields[1] == "xn") row.iface = Interface::xn;
    else parse_error(line_no, "interface must be radio or xn");
    double delay_ms = 0.0;
    try {
      std::size_t used = 0;
      delay_ms = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      parse_error(line_no, "bad delay_ms '" + fields[2] + "'");
    }
    if (delay_ms < 0.0) parse_error(line_no, "negative delay");
    row.delay = SimTime::from_ms(delay_ms);
    if (fields[3] == "1") row.fallible = true;
    else if (fields[3] != "0") parse_error(line_no, "fallible must be 0 or 1");
    current->rows.push_back(std::move(row));
  }
  for (ProcedureKind k : {ProcedureKind::preparation, ProcedureKind::ta_acquisition,
                          ProcedureKind::exec_rach_less, ProcedureKind::exec_rach_aided}) {
    if (set.get(k).rows.empty()) {
      throw std::invalid_argument("message schedule: section '" + std::string(to_string(k)) + "' is empty");
    }
  }
  return set;
}

ScheduleSet ScheduleSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open message schedule file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const MessageSchedule& ScheduleSet::get(ProcedureKind k) const {
  switch (k) {
    case ProcedureKind::preparation: return preparation;
    case ProcedureKind::ta_acquisition: return ta_acquisition;
    case ProcedureKind::exec_rach_less: return exec_rach_less;
    case ProcedureKind::exec_rach_aided: return exec_rach_aided;
  }
  throw std::logic_error("unknown procedure kind");
}

void ScheduleSet::validate(SimTime xn_delay) const {
  for (const MessageSchedule* s : {&preparation, &ta_acquisition, &exec_rach_less, &exec_rach_aided}) {
    for (const auto& r : s->rows) {
      if (r.iface == Interface::xn && r.delay != xn_delay) {
        throw std::invalid_argument("message schedule: Xn message '" + r.kind + "' has delay " +
                                    std::to_string(r.delay.to_ms()) + " ms, expected " +
                                    std::to_string(xn_delay.to_ms()) + " ms");
      }
    }
  }
}

Procedure::Procedure(const MessageSchedule& schedule, ProcedureKind kind, CellId target, SimTime start,
                     std::optional<SimTime> span)
    : rows_(&schedule.rows), kind_(kind), target_(target), start_(start) {
  if (schedule.rows.empty()) throw std::invalid_argument("Procedure: empty schedule");
  if (span) {
    if (*span < schedule.total()) {
      throw std::invalid_argument("Procedure: schedule for " + std::string(to_string(kind)) +
                                  " is longer than its configured span");
    }
    pad_ = *span - schedule.total();
  }
  next_time_ = start + schedule.rows.front().delay + (schedule.rows.size() == 1 ? pad_ : SimTime{});
}

SignalingEvent Procedure::deliver(bool link_ok) {
  if (finished()) throw std::logic_error("Procedure::deliver on a finished procedure");
  const MessageSpec& row = (*rows_)[next_];
  SignalingEvent ev{.time = next_time_,
                    .kind = row.kind,
                    .iface = row.iface,
                    .procedure = kind_,
                    .target = target_,
                    .fallible = row.fallible,
                    .lost = row.fallible && !link_ok};
  ++next_;
  if (ev.lost) {
    failed_ = true;
  } else if (next_ < rows_->size()) {
    next_time_ = next_time_ + (*rows_)[next_].delay + (next_ + 1 == rows_->size() ? pad_ : SimTime{});
  }
  return ev;
}

void apply_ta_event(TaState& state, const SignalingEvent& ev, bool last_row) {
  if (ev.lost) {
    state.phase = TaPhase::failed;
    state.in_progress = false;
    state.failed_step = ev.kind;
    return;
  }
  if (last_row) {
    state.phase = TaPhase::acquired;
    state.in_progress = false;
    state.t_acq = ev.time;
    return;
  }
  if (ev.kind.starts_with("measurement_report")) {
    state.phase = TaPhase::reported;
  } else if (ev.kind.starts_with("ta_acquisition_command")) {
    state.phase = TaPhase::commanded;
    state.early_forwarding_active = true;
  } else if (ev.kind.starts_with("prach_preamble")) {
    state.phase = TaPhase::preamble_sent;
  }
}

TaSequenceResult run_ta_sequence(const MessageSchedule& schedule, CellId target, SimTime start,
                                 SimTime t_acq_delay,
                                 const std::function<double(SimTime)>& serving_rlq_db,
                                 double gamma_out_db) {
  TaSequenceResult result;
  result.state.in_progress = true;
  Procedure proc(schedule, ProcedureKind::ta_acquisition, target, start, t_acq_delay);
  while (!proc.finished()) {
    const bool ok = serving_rlq_db(proc.next_time()) >= gamma_out_db;
    SignalingEvent ev = proc.deliver(ok);
    apply_ta_event(result.state, ev, proc.succeeded());
    result.events.push_back(std::move(ev));
  }
  return result;
}

bool ta_valid(const TaState& state, SimTime now, SimTime t_alig) {
  return state.phase == TaPhase::acquired && now - state.t_acq <= t_alig;
}

std::span<const InterruptionComponent> interruption_components() { return kComponents; }

SimTime interruption_component_sum() {
  SimTime t;
  for (const auto& c : kComponents) t += c.duration;
  return t;
}

SimTime interruption_time(bool rach_less, bool early_forwarding) {
  if (!rach_less) return interruption_component_sum();
  SimTime t = kRachLessLateForwarding;
  if (early_forwarding) t -= kComponents[kLateForwardingComponent - 1].duration;
  return t;
}

ModeDecision choose_mode(Scheme scheme, const TaState* ta, SimTime now, SimTime t_alig) {
  if (scheme == Scheme::rach_aided || ta == nullptr) return {HandoverMode::rach_aided, FallbackReason::no_ta};
  switch (ta->phase) {
    case TaPhase::acquired:
      if (ta_valid(*ta, now, t_alig)) return {HandoverMode::rach_less, FallbackReason::none};
      return {HandoverMode::rach_aided, FallbackReason::ta_expired};
    case TaPhase::failed:
      return {HandoverMode::rach_aided, ta->failed_step.find("step10") != std::string::npos
                                            ? FallbackReason::lost_step10
                                            : FallbackReason::lost_step16};
    default:
      return {HandoverMode::rach_aided, FallbackReason::no_ta};
  }
}

MessageTally tally(const MessageSchedule& schedule, std::size_t rows) {
  MessageTally t;
  rows = std::min(rows, schedule.rows.size());
  for (std::size_t i = 0; i < rows; ++i) {
    if (schedule.rows[i].iface == Interface::radio) ++t.radio;
    else ++t.xn;
  }
  return t;
}

MessageTally tally_messages(const HandoverRecord& record, const ScheduleSet& schedules) {
  MessageTally t = tally(schedules.preparation, record.preparation_rows);
  t += tally(schedules.ta_acquisition, record.ta_rows);
  if (record.executed) {
    const auto& exec = *record.executed == HandoverMode::rach_less ? schedules.exec_rach_less
                                                                   : schedules.exec_rach_aided;
    t += tally(exec, exec.rows.size());
  }
  return t;
}

MessageTally tally_events(std::span<const SignalingEvent> events) {
  MessageTally t;
  for (const auto& e : events) {
    if (e.iface == Interface::radio) ++t.radio;
    else ++t.xn;
  }
  return t;
}

}  // namespace chosim
