// Command-line front end: `chosim run` and `chosim compare`.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "chosim/config.hpp"
#include "chosim/simulator.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string scheme;
  std::optional<std::uint64_t> seed;
  std::optional<int> ues;
  std::optional<double> sim_time_s;
  std::string out = "out";
  std::vector<std::string> overrides;
};

void add_common(CLI::App& app, CommonOptions& o) {
  app.add_option("--config", o.config_path, "Scenario config file (section.key = value)")->check(CLI::ExistingFile);
  app.add_option("--ues", o.ues, "Number of UEs");
  app.add_option("--sim-time", o.sim_time_s, "Simulated time in seconds, excluding warm-up");
  app.add_option("--out", o.out, "Output directory")->capture_default_str();
  app.add_option("--override", o.overrides, "key=value, applied last; repeatable")->take_all();
}

chosim::ScenarioConfig build_config(const CommonOptions& o) {
  chosim::ScenarioConfig cfg;
  if (!o.config_path.empty()) chosim::apply_config_file(cfg, o.config_path);
  if (!o.scheme.empty()) cfg.scheme = chosim::parse_scheme(o.scheme);
  if (o.seed) cfg.seed = *o.seed;
  if (o.ues) cfg.n_ue = *o.ues;
  if (o.sim_time_s) cfg.t_sim = chosim::SimTime::from_s(*o.sim_time_s);
  for (const auto& ov : o.overrides) chosim::apply_override(cfg, ov);
  cfg.finalize();
  cfg.validate();
  return cfg;
}

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) return {std::stoull(text)};
    const std::uint64_t lo = std::stoull(text.substr(0, dots));
    const std::uint64_t hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty range");
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  } catch (const std::exception&) {
    throw std::invalid_argument("--seeds expects N or N..M, got '" + text + "'");
  }
}

void print_report(const chosim::KpiReport& r) {
  std::cout << "scheme " << r.scheme << "\n";
  for (const auto& [k, v] : r.rows()) {
    if (k.starts_with("count_") || k.ends_with("_s")) continue;
    std::cout << "  " << k << " = " << chosim::format_double(v) << "\n";
  }
}

int cmd_run(const CommonOptions& o) {
  const chosim::ScenarioConfig cfg = build_config(o);
  const chosim::RunArtifacts a = chosim::run(cfg);
  a.write(o.out);
  print_report(a.report);
  std::cout << "wrote " << o.out << "\n";
  return 0;
}

int cmd_compare(const CommonOptions& o, const std::string& seeds_text, int threads) {
  const chosim::ScenarioConfig cfg = build_config(o);
  const std::vector<std::uint64_t> seeds = seeds_text.empty() ? std::vector<std::uint64_t>{cfg.seed}
                                                              : parse_seed_range(seeds_text);
  const fs::path out = o.out;
  const auto result = chosim::run_pair(cfg, seeds, threads, [&](const chosim::ScenarioConfig& c, const chosim::RunArtifacts& a) {
    a.write(out / std::string(chosim::to_string(c.scheme)) / ("seed_" + std::to_string(c.seed)));
  });
  fs::create_directories(out);
  {
    std::ofstream(out / "kpi_report_rach_aided.csv") << result.mean_rach_aided.to_csv();
    std::ofstream(out / "kpi_report_rach_less.csv") << result.mean_rach_less.to_csv();
    std::ofstream(out / "comparison.csv") << result.comparison.to_csv(result.mean_rach_aided, result.mean_rach_less);
  }
  print_report(result.mean_rach_aided);
  print_report(result.mean_rach_less);
  std::cout << "relative change (rach_aided - rach_less) / rach_aided\n";
  for (const auto& [k, d] : result.comparison.deltas) {
    if (k.starts_with("count_") || k.ends_with("_s")) continue;
    std::cout << "  " << k << " = " << (d ? chosim::format_double(*d) : std::string("n/a")) << "\n";
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional handover mobility simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one replication and write its artifacts");
  add_common(*run, run_opts);
  run->add_option("--scheme", run_opts.scheme, "rach-aided or rach-less")
      ->check(CLI::IsMember({"rach-aided", "rach-less", "rach_aided", "rach_less"}));
  run->add_option("--seed", run_opts.seed, "Replication seed");

  CommonOptions cmp_opts;
  std::string seeds_text;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* compare = app.add_subcommand("compare", "Run both schemes over seeds and compare their KPIs");
  add_common(*compare, cmp_opts);
  compare->add_option("--seed", cmp_opts.seed, "Single seed (ignored when --seeds is given)");
  compare->add_option("--seeds", seeds_text, "Seed range N..M");
  compare->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_opts);
    return cmd_compare(cmp_opts, seeds_text, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
