#include "chosim/kpi.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace chosim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

long parse_long(std::string_view s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

SimTime clip(const OutageInterval& iv, SimTime begin, SimTime end) {
  const SimTime s = std::max(iv.start, begin);
  const SimTime e = std::min(iv.end, end);
  return e > s ? e - s : SimTime{};
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

}  // namespace

std::string_view to_string(OutageCause c) {
  return c == OutageCause::handover_interruption ? "handover_interruption" : "other_mobility";
}

OutageCause parse_outage_cause(std::string_view s) {
  if (s == "handover_interruption") return OutageCause::handover_interruption;
  if (s == "other_mobility") return OutageCause::other_mobility;
  throw std::invalid_argument("unknown outage cause '" + std::string(s) + "'");
}

void OutageLedger::open(SimTime start, OutageCause cause) {
  if (open_) throw std::logic_error("OutageLedger::open while an interval is open");
  if (!closed_.empty() && start < closed_.back().end) {
    throw std::logic_error("OutageLedger::open overlaps the previous interval");
  }
  open_ = OutageInterval{start, start, cause};
}

OutageInterval OutageLedger::close(SimTime end) {
  if (!open_) throw std::logic_error("OutageLedger::close without an open interval");
  if (end < open_->start) throw std::logic_error("OutageLedger::close before start");
  OutageInterval iv = *open_;
  iv.end = end;
  open_.reset();
  closed_.push_back(iv);
  return iv;
}

void OutageLedger::add(SimTime start, SimTime end, OutageCause cause) {
  open(start, cause);
  close(end);
}

std::optional<OutageCause> OutageLedger::open_cause() const {
  if (!open_) return std::nullopt;
  return open_->cause;
}

SimTime OutageLedger::duration(OutageCause cause, SimTime begin, SimTime end) const {
  SimTime total;
  for (const auto& iv : closed_) {
    if (iv.cause == cause) total += clip(iv, begin, end);
  }
  return total;
}

bool OutageLedger::disjoint() const {
  for (std::size_t i = 0; i < closed_.size(); ++i) {
    if (closed_[i].end < closed_[i].start) return false;
    if (i > 0 && closed_[i].start < closed_[i - 1].end) return false;
  }
  return true;
}

double outage_percent(SimTime total_outage, int n_ue, SimTime simulated_time) {
  if (simulated_time <= SimTime{}) throw std::invalid_argument("outage_percent: simulated time must be positive");
  if (n_ue <= 0) throw std::invalid_argument("outage_percent: n_ue must be positive");
  return 100.0 * static_cast<double>(total_outage.count_us()) /
         (static_cast<double>(n_ue) * static_cast<double>(simulated_time.count_us()));
}

double outage_percent(std::span<const OutageLedger> ledgers, SimTime begin, SimTime end) {
  SimTime total;
  for (const auto& l : ledgers) {
    total += l.duration(OutageCause::handover_interruption, begin, end);
    total += l.duration(OutageCause::other_mobility, begin, end);
  }
  return outage_percent(total, static_cast<int>(ledgers.size()), end - begin);
}

double normalize(double count, int n_ue, SimTime simulated_time) {
  if (simulated_time <= SimTime{}) throw std::invalid_argument("normalize: simulated time must be positive");
  if (n_ue <= 0) throw std::invalid_argument("normalize: n_ue must be positive");
  const double minutes = static_cast<double>(simulated_time.count_us()) / 60e6;
  return count / (static_cast<double>(n_ue) * minutes);
}

KpiReport KpiReport::build(std::string scheme, std::string scenario, int n_ue, SimTime simulated_time,
                           const KpiCounts& counts) {
  KpiReport r;
  r.scheme = std::move(scheme);
  r.scenario = std::move(scenario);
  r.n_ue = n_ue;
  r.simulated_time = simulated_time;
  r.counts = counts;
  auto per_min = [&](long c) { return normalize(static_cast<double>(c), n_ue, simulated_time); };
  r.successful_handovers = per_min(counts.successful_handovers);
  r.rach_less = per_min(counts.rach_less);
  r.rach_aided = per_min(counts.rach_aided);
  r.mobility_failures = per_min(counts.mobility_failures());
  r.radio_msgs = per_min(counts.radio_msgs);
  r.xn_msgs = per_min(counts.xn_msgs);
  r.outage_ho_pct = outage_percent(counts.outage_ho, n_ue, simulated_time);
  r.outage_other_pct = outage_percent(counts.outage_other, n_ue, simulated_time);
  r.outage_total_pct = r.outage_ho_pct + r.outage_other_pct;
  return r;
}

std::vector<std::pair<std::string, double>> KpiReport::rows() const {
  return {
      {"n_ue", static_cast<double>(n_ue)},
      {"sim_time_s", simulated_time.to_s()},
      {"successful_handovers", successful_handovers},
      {"rach_less_handovers", rach_less},
      {"rach_aided_handovers", rach_aided},
      {"mobility_failures", mobility_failures},
      {"radio_msgs", radio_msgs},
      {"xn_msgs", xn_msgs},
      {"outage_total_pct", outage_total_pct},
      {"outage_ho_pct", outage_ho_pct},
      {"outage_other_pct", outage_other_pct},
      {"count_successful_handovers", static_cast<double>(counts.successful_handovers)},
      {"count_rach_less", static_cast<double>(counts.rach_less)},
      {"count_rach_aided", static_cast<double>(counts.rach_aided)},
      {"count_handover_failures", static_cast<double>(counts.handover_failures)},
      {"count_radio_link_failures", static_cast<double>(counts.radio_link_failures)},
      {"count_radio_msgs", static_cast<double>(counts.radio_msgs)},
      {"count_xn_msgs", static_cast<double>(counts.xn_msgs)},
      {"outage_ho_s", counts.outage_ho.to_s()},
      {"outage_other_s", counts.outage_other.to_s()},
  };
}

std::optional<double> KpiReport::value(std::string_view kpi) const {
  for (const auto& [k, v] : rows()) {
    if (k == kpi) return v;
  }
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string KpiReport::to_csv() const {
  std::ostringstream out;
  out << "kpi,value\n";
  out << "scheme," << scheme << "\n";
  out << "scenario," << scenario << "\n";
  for (const auto& [k, v] : rows()) {
    if (k.starts_with("count_") || k == "n_ue") {
      out << k << "," << static_cast<long>(v) << "\n";
    } else if (k == "sim_time_s") {
      out << k << "," << simulated_time.str() << "\n";
    } else if (k == "outage_ho_s") {
      out << k << "," << counts.outage_ho.str() << "\n";
    } else if (k == "outage_other_s") {
      out << k << "," << counts.outage_other.str() << "\n";
    } else {
      out << k << "," << format_double(v) << "\n";
    }
  }
  return out.str();
}

KpiReport KpiReport::from_csv(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  bool header = true;
  for (std::string_view line : split_lines(text)) {
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      if (line != "kpi,value") throw std::invalid_argument("kpi report: missing 'kpi,value' header");
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw std::invalid_argument("kpi report: malformed row");
    kv.emplace(std::string(line.substr(0, comma)), std::string(line.substr(comma + 1)));
  }
  auto get = [&](const char* k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw std::invalid_argument(std::string("kpi report: missing row '") + k + "'");
    return it->second;
  };
  KpiCounts c;
  c.successful_handovers = parse_long(get("count_successful_handovers"));
  c.rach_less = parse_long(get("count_rach_less"));
  c.rach_aided = parse_long(get("count_rach_aided"));
  c.handover_failures = parse_long(get("count_handover_failures"));
  c.radio_link_failures = parse_long(get("count_radio_link_failures"));
  c.radio_msgs = parse_long(get("count_radio_msgs"));
  c.xn_msgs = parse_long(get("count_xn_msgs"));
  c.outage_ho = SimTime::parse(get("outage_ho_s"));
  c.outage_other = SimTime::parse(get("outage_other_s"));
  return build(get("scheme"), get("scenario"), static_cast<int>(parse_long(get("n_ue"))),
               SimTime::parse(get("sim_time_s")), c);
}

std::optional<double> SchemeComparison::delta(std::string_view kpi) const {
  for (const auto& [k, v] : deltas) {
    if (k == kpi) return v;
  }
  return std::nullopt;
}

SchemeComparison compare_schemes(const KpiReport& a, const KpiReport& b) {
  if (a.scenario != b.scenario || a.n_ue != b.n_ue || a.simulated_time != b.simulated_time) {
    throw std::invalid_argument("compare_schemes: reports come from different scenarios");
  }
  SchemeComparison cmp{a.scheme, b.scheme, {}};
  const auto rb = b.rows();
  const auto ra = a.rows();
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const auto& [k, va] = ra[i];
    if (k == "n_ue" || k == "sim_time_s") continue;
    const double vb = rb[i].second;
    std::optional<double> d;
    if (va != 0.0) d = (va - vb) / va;
    else if (vb == 0.0) d = 0.0;
    cmp.deltas.emplace_back(k, d);
  }
  return cmp;
}

std::string SchemeComparison::to_csv(const KpiReport& a, const KpiReport& b) const {
  std::ostringstream out;
  out << "kpi," << scheme_a << "," << scheme_b << ",relative_delta\n";
  for (const auto& [k, d] : deltas) {
    out << k << "," << format_double(*a.value(k)) << "," << format_double(*b.value(k)) << ","
        << (d ? format_double(*d) : std::string("nan")) << "\n";
  }
  return out.str();
}

KpiReport mean_report(std::span<const KpiReport> reports) {
  if (reports.empty()) throw std::invalid_argument("mean_report: no reports");
  KpiCounts c;
  int n_ue = 0;
  for (const auto& r : reports) {
    if (r.simulated_time != reports.front().simulated_time || r.scheme != reports.front().scheme) {
      throw std::invalid_argument("mean_report: reports differ in scheme or simulated time");
    }
    n_ue += r.n_ue;
    c.successful_handovers += r.counts.successful_handovers;
    c.rach_less += r.counts.rach_less;
    c.rach_aided += r.counts.rach_aided;
    c.handover_failures += r.counts.handover_failures;
    c.radio_link_failures += r.counts.radio_link_failures;
    c.radio_msgs += r.counts.radio_msgs;
    c.xn_msgs += r.counts.xn_msgs;
    c.outage_ho += r.counts.outage_ho;
    c.outage_other += r.counts.outage_other;
  }
  return KpiReport::build(reports.front().scheme, reports.front().scenario, n_ue,
                          reports.front().simulated_time, c);
}

std::string events_to_csv(std::span<const EventRecord> events) {
  std::string out = "time,ue,kind,detail\n";
  for (const auto& e : events) {
    out += e.time.str();
    out += ',';
    out += std::to_string(e.ue);
    out += ',';
    out += e.kind;
    out += ',';
    out += e.detail;
    out += '\n';
  }
  return out;
}

std::vector<EventRecord> events_from_csv(std::string_view text) {
  std::vector<EventRecord> out;
  bool header = true;
  for (std::string_view line : split_lines(text)) {
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      if (line != "time,ue,kind,detail") throw std::invalid_argument("events log: bad header");
      header = false;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const auto c3 = line.find(',', c2 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos || c3 == std::string_view::npos) {
      throw std::invalid_argument("events log: malformed row");
    }
    EventRecord e;
    e.time = SimTime::parse(std::string(line.substr(0, c1)));
    e.ue = static_cast<int>(parse_long(line.substr(c1 + 1, c2 - c1 - 1)));
    e.kind = std::string(line.substr(c2 + 1, c3 - c2 - 1));
    e.detail = std::string(line.substr(c3 + 1));
    out.push_back(std::move(e));
  }
  return out;
}

std::map<std::string, std::string> parse_detail(std::string_view detail) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  while (pos < detail.size()) {
    std::size_t semi = detail.find(';', pos);
    if (semi == std::string_view::npos) semi = detail.size();
    const std::string_view item = detail.substr(pos, semi - pos);
    const auto eq = item.find('=');
    if (eq != std::string_view::npos) kv.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    pos = semi + 1;
  }
  return kv;
}

KpiCounts counts_from_events(std::span<const EventRecord> events, SimTime begin, SimTime end) {
  KpiCounts c;
  for (const auto& e : events) {
    if (e.kind == "outage") {
      const auto kv = parse_detail(e.detail);
      const OutageInterval iv{SimTime::parse(kv.at("start")), SimTime::parse(kv.at("end")),
                              parse_outage_cause(kv.at("cause"))};
      (iv.cause == OutageCause::handover_interruption ? c.outage_ho : c.outage_other) += clip(iv, begin, end);
      continue;
    }
    if (e.time < begin || e.time >= end) continue;
    if (e.kind == "signal") {
      const auto kv = parse_detail(e.detail);
      (kv.at("iface") == "radio" ? c.radio_msgs : c.xn_msgs) += 1;
    } else if (e.kind == "ho_complete") {
      const auto kv = parse_detail(e.detail);
      ++c.successful_handovers;
      (kv.at("mode") == "rach_less" ? c.rach_less : c.rach_aided) += 1;
    } else if (e.kind == "hof") {
      ++c.handover_failures;
    } else if (e.kind == "rlf") {
      ++c.radio_link_failures;
    }
  }
  return c;
}

}  // namespace chosim
