#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "chosim/measurement.hpp"

using namespace chosim;

namespace {

double lin_mean_dbm(std::initializer_list<double> dbm) {
  double s = 0.0;
  for (double v : dbm) s += std::pow(10.0, v / 10.0);
  return 10.0 * std::log10(s / static_cast<double>(dbm.size()));
}

PowerSnapshot constant_snapshot(int cells, double dbm) {
  PowerSnapshot s;
  s.resize(cells);
  for (std::size_t i = 0; i < s.dbm.size(); ++i) {
    s.dbm[i] = dbm;
    s.mw[i] = dbm_to_mw(dbm);
  }
  return s;
}

void set(PowerSnapshot& s, CellId c, BeamId b, PanelId p, double dbm) {
  s.dbm[PowerSnapshot::index(c, b, p)] = dbm;
  s.mw[PowerSnapshot::index(c, b, p)] = dbm_to_mw(dbm);
}

}  // namespace

TEST_CASE("L1 averages in the linear domain") {
  const std::vector<double> samples{-70.0, -70.0, -70.0, -60.0};
  // 10 log10((3 * 1e-7 + 1e-6) / 4)
  CHECK(l1_average(samples) == doctest::Approx(-64.8812).epsilon(1e-5));
  CHECK(l1_average(samples) == doctest::Approx(lin_mean_dbm({-70.0, -70.0, -70.0, -60.0})));
  CHECK_THROWS_AS(l1_average(std::span<const double>{}), std::invalid_argument);
}

TEST_CASE("beam consolidation policies") {
  MeasurementParams strongest;
  const std::vector<double> beams{-75.0, -77.0, -99.0};
  CHECK(cell_consolidate(beams, strongest) == -75.0);

  MeasurementParams top2;
  top2.policy = ConsolidationPolicy::avg_top_n;
  top2.avg_top_n = 2;
  top2.consolidation_threshold_dbm = -100.0;
  CHECK(cell_consolidate(beams, top2) == doctest::Approx(lin_mean_dbm({-75.0, -77.0})));
  // Nothing above the threshold falls back to the strongest beam.
  const std::vector<double> weak{-120.0, -110.0};
  CHECK(cell_consolidate(weak, top2) == -110.0);
  CHECK_THROWS(cell_consolidate(std::span<const double>{}, top2));
}

TEST_CASE("L3 filter converges geometrically") {
  MeasurementParams p;
  CHECK(p.l3_coefficient() == doctest::Approx(0.5));
  L3Filter f;
  CHECK(f.update(-90.0, 0.5) == -90.0);  // first sample initialises
  const double gap = -70.0 - -90.0;
  double v = 0.0;
  for (int k = 0; k < 10; ++k) v = f.update(-70.0, 0.5);
  CHECK(-70.0 - v == doctest::Approx(gap * std::pow(2.0, -10.0)));
  CHECK(l3_update(-80.0, -60.0, 0.25) == doctest::Approx(-75.0));
  p.l3_k = 0;
  CHECK(p.l3_coefficient() == doctest::Approx(1.0));
}

TEST_CASE("one L1 output per omega raw samples") {
  MeasurementParams p;
  p.omega = 2;
  UeMeasurement m(3, p);
  const PowerSnapshot s = constant_snapshot(3, -80.0);
  CHECK_FALSE(m.has_output());
  int outputs = 0;
  for (int step = 0; step < 100; ++step) outputs += m.add_raw(s) ? 1 : 0;
  // 100 steps of 10 ms = 1 s -> one output per 20 ms.
  CHECK(outputs == 50);
  CHECK(m.has_output());
}

TEST_CASE("MPUE-A3: cell input is the best panel consolidation") {
  MeasurementParams p;
  p.omega = 2;
  UeMeasurement m(2, p);
  PowerSnapshot a = constant_snapshot(2, -100.0);
  PowerSnapshot b = constant_snapshot(2, -100.0);
  set(a, 1, 5, 2, -70.0);
  set(b, 1, 5, 2, -60.0);
  set(a, 1, 3, 0, -80.0);
  set(b, 1, 3, 0, -80.0);
  CHECK_FALSE(m.add_raw(a));
  CHECK(m.add_raw(b));
  CHECK(m.l1(1, 5, 2) == doctest::Approx(lin_mean_dbm({-70.0, -60.0})));
  PanelId panel = -1;
  CHECK(m.l1_best_panel(1, 5, &panel) == doctest::Approx(-62.596).epsilon(1e-4));
  CHECK(panel == 2);
  CHECK(m.l3(1) == doctest::Approx(lin_mean_dbm({-70.0, -60.0})));
  CHECK(m.l3(0) == doctest::Approx(-100.0));
  const auto beams = m.l1_beams(1);
  CHECK(beams.size() == 12);
  CHECK(beams[4] == doctest::Approx(m.l1(1, 5, 2)));
  CHECK(beams[2] == doctest::Approx(-80.0));
}

TEST_CASE("measurement error only when configured") {
  MeasurementParams p;
  p.omega = 1;
  p.meas_error_db = 2.0;
  UeMeasurement noisy(1, p);
  UeMeasurement clean(1, MeasurementParams{.omega = 1});
  Rng rng(1);
  const PowerSnapshot s = constant_snapshot(1, -80.0);
  noisy.add_raw(s, &rng);
  clean.add_raw(s, &rng);
  CHECK(clean.l3(0) == doctest::Approx(-80.0));
  CHECK(noisy.l1(0, 1, 0) != doctest::Approx(-80.0));
}
