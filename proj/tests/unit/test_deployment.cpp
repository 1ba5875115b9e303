#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>
#include <random>

#include "chosim/deployment.hpp"

using namespace chosim;

namespace {

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Coefficients (i, j) with v = i * w0 + j * w1, by Cramer's rule.
std::pair<double, double> lattice_coords(Vec2 v, Vec2 w0, Vec2 w1) {
  const double det = w0.x * w1.y - w0.y * w1.x;
  return {(v.x * w1.y - v.y * w1.x) / det, (w0.x * v.y - w0.y * v.x) / det};
}

}  // namespace

TEST_CASE("reference layout has 7 sites and 21 cells at 200 m spacing") {
  const CellTopology t = build_topology(200.0, 7);
  CHECK(t.n_sites() == 7);
  CHECK(t.n_cells() == 21);
  double nearest = 1e9;
  for (int i = 0; i < 7; ++i)
    for (int j = i + 1; j < 7; ++j) nearest = std::min(nearest, dist(t.sites[i], t.sites[j]));
  CHECK(nearest == doctest::Approx(200.0));
  for (const Cell& c : t.cells) {
    CHECK(c.boresight == doctest::Approx(c.sector * 2.0 * std::numbers::pi / 3.0));
  }
}

TEST_CASE("adjacent sites are exactly isd apart (brute force over pairs)") {
  const CellTopology t = build_topology(100.0, 7);
  int adjacent = 0;
  for (int i = 0; i < 7; ++i) {
    for (int j = i + 1; j < 7; ++j) {
      const double d = dist(t.sites[i], t.sites[j]);
      CHECK(d >= 100.0 - 1e-9);
      if (std::abs(d - 100.0) < 1e-9) ++adjacent;
    }
  }
  // Hexagonal flower: 6 spokes plus 6 ring edges.
  CHECK(adjacent == 12);
}

TEST_CASE("invalid topology input is rejected") {
  CHECK_THROWS_AS(build_topology(0.0, 7), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(-5.0, 7), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(200.0, 3), std::invalid_argument);
}

TEST_CASE("wrap images form the first hexagonal ring of the cluster lattice") {
  const CellTopology t = build_topology(200.0, 7);
  Vec2 sum;
  for (int k = 0; k < 6; ++k) {
    const Vec2 w = t.wrap_images[k];
    CHECK(w.norm() == doctest::Approx(std::sqrt(7.0) * 200.0));
    sum = sum + w;
    const Vec2 next = t.wrap_images[(k + 1) % 6];
    const double angle = std::atan2(w.x * next.y - w.y * next.x, w.x * next.x + w.y * next.y);
    CHECK(angle == doctest::Approx(std::numbers::pi / 3.0));
  }
  CHECK(sum.norm() == doctest::Approx(0.0).epsilon(1e-9));
  // Translating the cluster by a wrap vector never lands a site on a site.
  for (const Vec2& w : t.wrap_images)
    for (const Vec2& a : t.sites)
      for (const Vec2& b : t.sites) CHECK(dist(a + w, b) >= 200.0 - 1e-6);
}

TEST_CASE("effective displacement is the minimum over the seven images") {
  const CellTopology t = build_topology(200.0, 7);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  int wrapped_shorter = 0;
  for (int i = 0; i < 2000; ++i) {
    const Vec2 a = wrap_into_layout({u(rng), u(rng)}, t);
    const Vec2 b = wrap_into_layout({u(rng), u(rng)}, t);
    double oracle = dist(a, b);
    for (const Vec2& w : t.wrap_images) oracle = std::min(oracle, dist(a, b + w));
    const Displacement d = effective_displacement(a, b, t);
    CHECK(d.distance == doctest::Approx(oracle));
    CHECK(d.vector.norm() == doctest::Approx(d.distance));
    if (d.distance < dist(a, b) - 1e-9) ++wrapped_shorter;
  }
  CHECK(wrapped_shorter > 0);

  const Vec2 a{10.0, 20.0};
  const Vec2 b{60.0, -30.0};
  CHECK(effective_displacement(a, b, t).distance == doctest::Approx(dist(a, b)));
}

TEST_CASE("wrap tile tiles the plane with the cluster lattice") {
  const CellTopology t = build_topology(200.0, 7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3000.0, 3000.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    const Vec2 q = wrap_into_layout(p, t);
    CHECK(in_layout(q, t));
    const auto [ci, cj] = lattice_coords(p - q, t.wrap_images[0], t.wrap_images[1]);
    CHECK(std::abs(ci - std::round(ci)) < 1e-9);
    CHECK(std::abs(cj - std::round(cj)) < 1e-9);
  }

  // Tile area equals seven site hexagons (Monte Carlo over the bounding box).
  const auto [lo, hi] = layout_bounds(t);
  std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
  int inside = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) inside += in_layout({ux(rng), uy(rng)}, t) ? 1 : 0;
  const double box = (hi.x - lo.x) * (hi.y - lo.y);
  const double tile = 7.0 * std::sqrt(3.0) / 2.0 * 200.0 * 200.0;
  CHECK(box * inside / n == doctest::Approx(tile).epsilon(0.01));
}

TEST_CASE("drop produces the requested count inside the layout") {
  const CellTopology t = build_topology(200.0, 7);
  const auto ues = drop_ues(420, 3, t, kmh_to_mps(60.0));
  CHECK(ues.size() == 420);
  for (const auto& ue : ues) {
    CHECK(in_layout(ue.position, t));
    CHECK(ue.speed == doctest::Approx(16.6667).epsilon(1e-4));
    CHECK(ue.heading >= 0.0);
    CHECK(ue.heading < 2.0 * std::numbers::pi);
  }
  CHECK_THROWS(drop_ues(0, 3, t, 1.0));
}

TEST_CASE("drop positions are uniform (chi-square on a 10x10 grid)") {
  const CellTopology t = build_topology(200.0, 7);
  const auto ues = drop_ues(10000, 5, t, 1.0);
  // Square inscribed in the tile's inscribed circle lies entirely inside.
  const double r = std::sqrt(7.0) * 200.0 / 2.0;
  const double half = r / std::sqrt(2.0);
  std::array<int, 100> bins{};
  int n = 0;
  for (const auto& ue : ues) {
    const Vec2 p = ue.position;
    if (std::abs(p.x) >= half || std::abs(p.y) >= half) continue;
    const int ix = static_cast<int>((p.x + half) / (2.0 * half) * 10.0);
    const int iy = static_cast<int>((p.y + half) / (2.0 * half) * 10.0);
    ++bins[static_cast<std::size_t>(iy * 10 + ix)];
    ++n;
  }
  // Share of drops inside the square equals its share of the tile area.
  const double tile = 7.0 * std::sqrt(3.0) / 2.0 * 200.0 * 200.0;
  CHECK(static_cast<double>(n) / ues.size() == doctest::Approx(4.0 * half * half / tile).epsilon(0.05));
  const double expected = n / 100.0;
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - expected) * (b - expected) / expected;
  // 99th percentile of chi-square with 99 degrees of freedom.
  CHECK(chi2 < 134.6416);
}

TEST_CASE("straight-line motion with wrap re-entry") {
  const CellTopology t = build_topology(200.0, 7);
  UEKinematics ue{{0.0, 0.0}, kmh_to_mps(60.0), 0.3};
  const UEKinematics next = advance_ue(ue, 0.01, t);
  CHECK(dist(next.position, ue.position) == doctest::Approx(0.166667).epsilon(1e-5));
  CHECK(next.heading == ue.heading);
  CHECK(next.speed == ue.speed);

  UEKinematics still{{5.0, 5.0}, 0.0, 1.0};
  CHECK(advance_ue(still, 0.01, t).position == still.position);
  CHECK_THROWS(advance_ue(ue, 0.0, t));

  auto ues = drop_ues(50, 9, t, 30.0);
  int reentries = 0;
  for (int step = 0; step < 4000; ++step) {
    for (auto& u : ues) {
      const UEKinematics n = advance_ue(u, 0.01, t);
      CHECK(in_layout(n.position, t));
      CHECK(effective_displacement(u.position, n.position, t).distance <= u.speed * 0.01 + 1e-9);
      if (dist(u.position, n.position) > 1.0) ++reentries;
      u = n;
    }
  }
  CHECK(reentries > 0);
}
