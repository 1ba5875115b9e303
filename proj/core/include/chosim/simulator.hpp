#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chosim/config.hpp"
#include "chosim/kpi.hpp"

namespace chosim {

struct RunArtifacts {
  KpiReport report;
  std::vector<EventRecord> events;  // sorted by time, stable
  std::vector<OutageLedger> ledgers;
  std::string resolved_config;
  std::int64_t window_steps = 0;  // time steps inside the KPI window

  std::string kpi_csv() const { return report.to_csv(); }
  std::string events_csv() const { return events_to_csv(events); }
  /// `ue,start,end,cause` rows.
  std::string ledger_csv() const;

  /// Writes kpi_report.csv, events.csv, ledger.csv and resolved_config.txt.
  void write(const std::filesystem::path& dir) const;
};

/// Runs one replication. The run simulates `warmup + t_sim`; KPIs cover
/// [warmup, warmup + t_sim). Throws std::invalid_argument for invalid configs.
RunArtifacts run(const ScenarioConfig& config);

struct PairResult {
  std::vector<std::uint64_t> seeds;
  std::vector<KpiReport> rach_aided;  // per seed
  std::vector<KpiReport> rach_less;
  KpiReport mean_rach_aided;
  KpiReport mean_rach_less;
  SchemeComparison comparison;  // A = RACH-aided, B = RACH-less
};

/// Called once per finished run, serialized; useful for writing artifacts.
using RunSink = std::function<void(const ScenarioConfig&, const RunArtifacts&)>;

/// Runs both schemes on every seed over `threads` workers. Results do not
/// depend on the thread count.
PairResult run_pair(const ScenarioConfig& config, std::span<const std::uint64_t> seeds, int threads = 1,
                    const RunSink& sink = {});

/// Runs `configs` over `threads` workers; output order follows the input.
std::vector<RunArtifacts> run_many(std::span<const ScenarioConfig> configs, int threads);

}  // namespace chosim
