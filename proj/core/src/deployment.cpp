#include "chosim/deployment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace chosim {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// Neighbour direction k of the site lattice.
Vec2 lattice_step(double isd, int k) { return polar(isd, kPi / 6.0 + k * kPi / 3.0); }

// Half-plane test against the face of the wrap tile orthogonal to w:
// returns how far p sticks out past the face (positive means outside).
double face_excess(Vec2 p, Vec2 w) {
  const double len2 = dot(w, w);
  return dot(p, w) / std::sqrt(len2) - 0.5 * std::sqrt(len2);
}

// Same half-plane construction for the single-site hexagon.
double site_face_excess(Vec2 p, double isd, int k) {
  const Vec2 n = lattice_step(isd, k);
  return dot(p, n) / isd - 0.5 * isd;
}

}  // namespace

double Vec2::norm() const { return std::hypot(x, y); }

CellTopology build_topology(double isd, int n_sites) {
  if (!(isd > 0.0) || !std::isfinite(isd)) {
    throw std::invalid_argument("build_topology: isd must be positive");
  }
  if (n_sites != 1 && n_sites != 7) {
    throw std::invalid_argument("build_topology: n_sites must be 1 or 7");
  }

  CellTopology topo;
  topo.isd = isd;
  topo.sites.push_back({0.0, 0.0});
  if (n_sites == 7) {
    for (int k = 0; k < 6; ++k) {
      topo.sites.push_back(lattice_step(isd, k));
    }
    for (int k = 0; k < 6; ++k) {
      topo.wrap_images[k] = lattice_step(isd, k) * 2.0 + lattice_step(isd, (k + 1) % 6);
    }
    topo.wrap_enabled = true;
  }

  for (SiteId s = 0; s < topo.n_sites(); ++s) {
    for (int sector = 0; sector < 3; ++sector) {
      topo.cells.push_back(Cell{.id = static_cast<CellId>(topo.cells.size()),
                                .site = s,
                                .sector = sector,
                                .boresight = sector * 2.0 * kPi / 3.0});
    }
  }
  return topo;
}

Displacement effective_displacement(Vec2 a, Vec2 b, const CellTopology& topo) {
  Vec2 best = b - a;
  double best_d = best.norm();
  if (topo.wrap_enabled) {
    for (const Vec2& w : topo.wrap_images) {
      const Vec2 cand = b + w - a;
      const double d = cand.norm();
      if (d < best_d) {
        best = cand;
        best_d = d;
      }
    }
  }
  return {best, best_d};
}

bool in_layout(Vec2 p, const CellTopology& topo) {
  if (topo.wrap_enabled) {
    return std::all_of(topo.wrap_images.begin(), topo.wrap_images.end(),
                       [&](Vec2 w) { return face_excess(p, w) <= 0.0; });
  }
  for (int k = 0; k < 6; ++k) {
    if (site_face_excess(p, topo.isd, k) > 0.0) return false;
  }
  return true;
}

Vec2 wrap_into_layout(Vec2 p, const CellTopology& topo) {
  if (!topo.wrap_enabled) return p;
  // Each pass moves p one tile closer to the origin; a step of a few metres
  // never needs more than one pass, arbitrary points need a handful.
  for (int guard = 0; guard < 64; ++guard) {
    int worst = -1;
    double worst_excess = 0.0;
    for (int k = 0; k < 6; ++k) {
      const double e = face_excess(p, topo.wrap_images[k]);
      if (e > worst_excess) {
        worst_excess = e;
        worst = k;
      }
    }
    if (worst < 0) return p;
    p = p - topo.wrap_images[worst];
  }
  return p;
}

std::array<Vec2, 2> layout_bounds(const CellTopology& topo) {
  std::array<Vec2, 6> vertices{};
  if (topo.wrap_enabled) {
    for (int k = 0; k < 6; ++k) {
      vertices[k] = (topo.wrap_images[k] + topo.wrap_images[(k + 1) % 6]) * (1.0 / 3.0);
    }
  } else {
    const double r = topo.isd / std::sqrt(3.0);
    for (int k = 0; k < 6; ++k) vertices[k] = polar(r, k * kPi / 3.0);
  }
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Vec2& v : vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
  }
  return {lo, hi};
}

std::vector<UEKinematics> drop_ues(int n, std::uint64_t seed, const CellTopology& topo,
                                   double speed_mps) {
  if (n < 1) throw std::invalid_argument("drop_ues: n must be >= 1");
  Rng rng = make_rng(seed, Stream::drop);
  const auto [lo, hi] = layout_bounds(topo);
  std::uniform_real_distribution<double> ux(lo.x, hi.x);
  std::uniform_real_distribution<double> uy(lo.y, hi.y);
  std::uniform_real_distribution<double> uh(0.0, 2.0 * kPi);

  std::vector<UEKinematics> ues;
  ues.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(ues.size()) < n) {
    const Vec2 p{ux(rng), uy(rng)};
    if (!in_layout(p, topo)) continue;
    ues.push_back({p, speed_mps, uh(rng)});
  }
  return ues;
}

UEKinematics advance_ue(const UEKinematics& ue, double dt_s, const CellTopology& topo) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("advance_ue: dt must be positive");
  UEKinematics next = ue;
  const double step = ue.speed * dt_s;
  next.position = ue.position + Vec2{std::cos(ue.heading), std::sin(ue.heading)} * step;
  next.position = wrap_into_layout(next.position, topo);
  return next;
}

}  // namespace chosim
