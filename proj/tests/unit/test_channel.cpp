#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>

#include "chosim/channel.hpp"

using namespace chosim;

namespace {

// UMi street canyon, written out independently of the library.
constexpr double kC = 3.0e8;

double ref_d3d(double d2d) { return std::sqrt(d2d * d2d + 8.5 * 8.5); }

double ref_los(double d2d, double fc) {
  const double dbp = 4.0 * 9.0 * 0.5 * fc * 1e9 / kC;
  const double d3 = ref_d3d(d2d);
  if (d2d <= dbp) return 32.4 + 21.0 * std::log10(d3) + 20.0 * std::log10(fc);
  return 32.4 + 40.0 * std::log10(d3) + 20.0 * std::log10(fc) - 9.5 * std::log10(dbp * dbp + 8.5 * 8.5);
}

double ref_nlos(double d2d, double fc) {
  const double pl = 35.3 * std::log10(ref_d3d(d2d)) + 22.4 + 21.3 * std::log10(fc);
  return std::max(pl, ref_los(d2d, fc));
}

double ref_plos(double d2d) {
  return d2d <= 18.0 ? 1.0 : 18.0 / d2d + std::exp(-d2d / 36.0) * (1.0 - 18.0 / d2d);
}

}  // namespace

TEST_CASE("UMi path loss matches the reference formulas") {
  for (double d : {10.0, 18.0, 35.0, 80.0, 150.0, 200.0, 400.0, 900.0}) {
    // Breakpoint uses c = 3e8 in the reference; the library uses the exact
    // constant, which moves the breakpoint by less than a metre.
    CHECK(pathloss_umi_los(d, 28.0) == doctest::Approx(ref_los(d, 28.0)).epsilon(1e-3));
    CHECK(pathloss_umi_nlos(d, 28.0) == doctest::Approx(ref_nlos(d, 28.0)).epsilon(1e-3));
    CHECK(los_probability_umi(d) == doctest::Approx(ref_plos(d)));
  }
}

TEST_CASE("soft LoS blend") {
  CHECK(pathloss_soft_los(10.0, 28.0) == doctest::Approx(pathloss_umi_los(10.0, 28.0)));
  const double pl = pathloss_soft_los(200.0, 28.0);
  CHECK(pl >= pathloss_umi_los(200.0, 28.0));
  CHECK(pl <= pathloss_umi_nlos(200.0, 28.0));
  const double w = ref_plos(200.0);
  CHECK(pl == doctest::Approx(w * ref_los(200.0, 28.0) + (1.0 - w) * ref_nlos(200.0, 28.0)).epsilon(1e-3));
  // Short distances are evaluated at 10 m.
  CHECK(pathloss_soft_los(2.0, 28.0) == doctest::Approx(pathloss_soft_los(10.0, 28.0)));
  CHECK_THROWS_AS(pathloss_soft_los(0.0, 28.0), std::invalid_argument);
  CHECK_THROWS_AS(pathloss_soft_los(-1.0, 28.0), std::invalid_argument);

  ChannelParams p;
  CHECK(shadow_sigma_soft_los(10.0, p) == doctest::Approx(4.0));
  CHECK(shadow_sigma_soft_los(300.0, p) > 4.0);
  CHECK(shadow_sigma_soft_los(300.0, p) < 7.82);
}

TEST_CASE("shadowing is a stationary AR(1) process in displacement") {
  Rng rng(42);
  const double sigma = 7.82;
  const double disp = 1.0;
  const int n = 100000;
  std::vector<double> x(n);
  std::normal_distribution<double> n01;
  x[0] = sigma * n01(rng);
  for (int i = 1; i < n; ++i) x[i] = shadow_step(x[i - 1], disp, sigma, 13.0, rng);

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  double cov = 0.0;
  for (int i = 0; i < n; ++i) {
    var += (x[i] - mean) * (x[i] - mean);
    if (i > 0) cov += (x[i] - mean) * (x[i - 1] - mean);
  }
  var /= n;
  cov /= (n - 1);
  CHECK(std::abs(cov / var - std::exp(-disp / 13.0)) < 0.02);
  CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.10));

  CHECK(shadow_step(3.5, 0.0, sigma, 13.0, rng) == 3.5);
  CHECK_THROWS(shadow_step(0.0, -1.0, sigma, 13.0, rng));
}

TEST_CASE("beam grid patterns") {
  ChannelParams p;
  const BeamGrid g = BeamGrid::from_params(p);
  double narrow_max = -1e9;
  double wide_max = -1e9;
  for (BeamId b = 1; b <= kBeamsPerCell; ++b) {
    const BeamDef& d = g.beam(b);
    const double peak = beam_gain(g, b, 0.0);
    CHECK(peak == doctest::Approx(d.peak_dbi));
    CHECK(beam_gain(g, b, 0.2) < peak);
    CHECK(beam_gain(g, b, std::numbers::pi) == doctest::Approx(d.peak_dbi - 30.0));
    (b <= 8 ? narrow_max : wide_max) = std::max(b <= 8 ? narrow_max : wide_max, peak);
    // -3 dB at half the beamwidth.
    CHECK(beam_gain(g, b, d.az_bw / 2.0) == doctest::Approx(d.peak_dbi - 3.0));
  }
  CHECK(narrow_max > wide_max);
  CHECK(g.beam(1).azimuth == doctest::Approx(-52.5 * std::numbers::pi / 180.0));
  CHECK(g.beam(8).azimuth == doctest::Approx(52.5 * std::numbers::pi / 180.0));
  CHECK(g.beam(9).azimuth == doctest::Approx(-45.0 * std::numbers::pi / 180.0));
  CHECK_THROWS_AS(g.beam(0), std::out_of_range);
  CHECK_THROWS_AS(g.beam(13), std::out_of_range);
}

TEST_CASE("UE panel pattern") {
  ChannelParams p;
  CHECK(panel_gain(p, 0, 0.0, 0.0) == doctest::Approx(5.0));
  CHECK(panel_gain(p, 1, 0.0, 2.0 * std::numbers::pi / 3.0) == doctest::Approx(5.0));
  CHECK(panel_gain(p, 0, 0.0, std::numbers::pi) == doctest::Approx(5.0 - 25.0));
  CHECK(panel_gain(p, 0, 0.0, std::numbers::pi / 4.0) == doctest::Approx(2.0));
}

TEST_CASE("fading has unit mean power") {
  Rng rng(3);
  FadingBank bank(64, 16, 1556.0, 0.01, rng);
  double sum = 0.0;
  int n = 0;
  for (int t = 0; t < 2000; ++t) {
    for (std::size_t l = 0; l < bank.n_links(); ++l) {
      sum += bank.power(l);
      ++n;
    }
    bank.step();
  }
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("noise floor") {
  ChannelParams p;
  CHECK(p.noise_dbm() == doctest::Approx(-174.0 + 80.0 + 9.0));
}

TEST_CASE("snapshot is the sum of the link budget terms") {
  const CellTopology topo = build_topology(200.0, 7);
  ChannelParams with;
  ChannelParams without;
  without.fast_fading = false;
  const UEKinematics ue{{37.0, -52.0}, 16.0, 0.7};
  UeChannel a(topo, with, ue, 9, 4, 0.01);
  UeChannel b(topo, without, ue, 9, 4, 0.01);
  for (int s = 0; s < 5; ++s) {
    a.step(0.16);
    b.step(0.16);
  }
  PowerSnapshot sa;
  PowerSnapshot sb;
  a.snapshot(ue, sa);
  b.snapshot(ue, sb);
  for (CellId c = 0; c < topo.n_cells(); ++c) {
    for (BeamId beam = 1; beam <= kBeamsPerCell; ++beam) {
      for (PanelId p = 0; p < kPanels; ++p) {
        const LinkBudget lb = a.budget(ue, c, beam, p);
        const double expect = lb.tx_power_dbm + lb.beam_gain_db + lb.panel_gain_db - lb.pathloss_db -
                              lb.shadow_db + lb.fading_db;
        CHECK(sa.at_dbm(c, beam, p) == doctest::Approx(expect));
        CHECK(sa.at_mw(c, beam, p) == doctest::Approx(std::pow(10.0, expect / 10.0)));
        // Differential: only the fading term separates the two channels.
        CHECK(sa.at_dbm(c, beam, p) - sb.at_dbm(c, beam, p) == doctest::Approx(lb.fading_db));
      }
    }
  }
}
