#include <benchmark/benchmark.h>

#include "chosim/channel.hpp"
#include "chosim/config.hpp"
#include "chosim/deployment.hpp"
#include "chosim/measurement.hpp"
#include "chosim/simulator.hpp"
#include "chosim/sinr.hpp"

using namespace chosim;

namespace {

struct Fixture {
  CellTopology topo = build_topology(200.0, 7);
  ChannelParams params;
  UEKinematics ue = drop_ues(1, 7, topo, 60.0 / 3.6).front();
  UeChannel channel{topo, params, ue, 7, 0, 0.01};
  PowerSnapshot snap;
};

void BM_ChannelSnapshot(benchmark::State& state) {
  Fixture f;
  for (auto _ : state) {
    f.channel.step(0.1667);
    f.channel.snapshot(f.ue, f.snap);
    benchmark::DoNotOptimize(f.snap.mw.data());
  }
}
BENCHMARK(BM_ChannelSnapshot);

void BM_Sinr(benchmark::State& state) {
  Fixture f;
  f.channel.snapshot(f.ue, f.snap);
  SinrParams p;
  p.noise_dbm = f.params.noise_dbm();
  p.model = static_cast<InterferenceModel>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(best_link(f.snap, 0, p));
}
BENCHMARK(BM_Sinr)->Arg(0)->Arg(1)->Arg(2);

void BM_MeasurementPeriod(benchmark::State& state) {
  Fixture f;
  f.channel.snapshot(f.ue, f.snap);
  UeMeasurement m(f.topo.n_cells(), MeasurementParams{});
  for (auto _ : state) benchmark::DoNotOptimize(m.add_raw(f.snap, nullptr));
}
BENCHMARK(BM_MeasurementPeriod);

void BM_ShortRun(benchmark::State& state) {
  ScenarioConfig c;
  c.n_ue = static_cast<int>(state.range(0));
  c.t_sim = SimTime::s(1);
  c.warmup = SimTime{};
  for (auto _ : state) benchmark::DoNotOptimize(run(c).report.counts.successful_handovers);
  state.SetItemsProcessed(state.iterations() * c.n_ue * c.steps());
}
BENCHMARK(BM_ShortRun)->Arg(10)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
