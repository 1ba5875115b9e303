#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chosim/sim_time.hpp"
#include "chosim/ta_protocol.hpp"

namespace chosim {

enum class OutageCause { handover_interruption, other_mobility };
std::string_view to_string(OutageCause c);
OutageCause parse_outage_cause(std::string_view s);

struct OutageInterval {
  SimTime start;
  SimTime end;
  OutageCause cause = OutageCause::other_mobility;
};

/// Append-only outage intervals of one UE. At most one interval is open; the
/// cause is fixed when the interval is opened.
class OutageLedger {
public:
  void open(SimTime start, OutageCause cause);
  /// Closes the open interval; returns it.
  OutageInterval close(SimTime end);
  /// Records an interval whose extent is already known.
  void add(SimTime start, SimTime end, OutageCause cause);

  bool is_open() const { return open_.has_value(); }
  std::optional<OutageCause> open_cause() const;
  std::span<const OutageInterval> intervals() const { return closed_; }

  /// Outage time of `cause` inside [begin, end).
  SimTime duration(OutageCause cause, SimTime begin, SimTime end) const;

  /// True if intervals are well formed and pairwise disjoint.
  bool disjoint() const;

private:
  std::vector<OutageInterval> closed_;
  std::optional<OutageInterval> open_;
};

/// 100 * sum of outage / (n_ue * simulated time).
double outage_percent(SimTime total_outage, int n_ue, SimTime simulated_time);
double outage_percent(std::span<const OutageLedger> ledgers, SimTime begin, SimTime end);

/// Events per UE per minute.
double normalize(double count, int n_ue, SimTime simulated_time);

struct KpiCounts {
  long successful_handovers = 0;
  long rach_less = 0;
  long rach_aided = 0;
  long handover_failures = 0;
  long radio_link_failures = 0;
  long radio_msgs = 0;
  long xn_msgs = 0;
  SimTime outage_ho;
  SimTime outage_other;

  long mobility_failures() const { return handover_failures + radio_link_failures; }
  bool operator==(const KpiCounts&) const = default;
};

struct KpiReport {
  std::string scheme;
  std::string scenario;  // fingerprint of every parameter except the scheme
  int n_ue = 0;
  SimTime simulated_time;
  KpiCounts counts;

  double successful_handovers = 0.0;  // per UE per minute
  double rach_less = 0.0;
  double rach_aided = 0.0;
  double mobility_failures = 0.0;
  double radio_msgs = 0.0;
  double xn_msgs = 0.0;
  double outage_total_pct = 0.0;
  double outage_ho_pct = 0.0;
  double outage_other_pct = 0.0;

  static KpiReport build(std::string scheme, std::string scenario, int n_ue, SimTime simulated_time,
                         const KpiCounts& counts);

  /// Numeric KPI rows in report order.
  std::vector<std::pair<std::string, double>> rows() const;
  std::optional<double> value(std::string_view kpi) const;

  /// `kpi,value` CSV with a header row. Floating values use the shortest
  /// representation that parses back to the same double.
  std::string to_csv() const;
  static KpiReport from_csv(std::string_view text);
};

/// Relative change per KPI: (A - B) / A. KPIs where A is zero report 0 if B
/// is zero too and nullopt otherwise.
struct SchemeComparison {
  std::string scheme_a;
  std::string scheme_b;
  std::vector<std::pair<std::string, std::optional<double>>> deltas;

  std::optional<double> delta(std::string_view kpi) const;
  std::string to_csv(const KpiReport& a, const KpiReport& b) const;
};

/// Throws std::invalid_argument when the reports come from different scenarios.
SchemeComparison compare_schemes(const KpiReport& a, const KpiReport& b);

/// Mean of several reports of the same scheme and scenario shape.
KpiReport mean_report(std::span<const KpiReport> reports);

// --- Event log ---------------------------------------------------------------

struct EventRecord {
  SimTime time;
  int ue = 0;
  std::string kind;
  std::string detail;  // key=value pairs separated by ';'
};

std::string format_double(double v);

std::string events_to_csv(std::span<const EventRecord> events);
std::vector<EventRecord> events_from_csv(std::string_view text);

/// Parses `detail` into key/value pairs.
std::map<std::string, std::string> parse_detail(std::string_view detail);

/// Recomputes every counter from the event log alone, counting what falls in
/// [begin, end).
KpiCounts counts_from_events(std::span<const EventRecord> events, SimTime begin, SimTime end);

}  // namespace chosim
