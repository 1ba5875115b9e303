#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "chosim/rng.hpp"

namespace chosim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  bool operator==(const Vec2&) const = default;
  double norm() const;
};

using CellId = int;
using SiteId = int;

struct Cell {
  CellId id = 0;
  SiteId site = 0;
  int sector = 0;           // 0, 1, 2
  double boresight = 0.0;   // radians
};

/// Hexagonal multi-site layout with three 120-degree sectors per site.
///
/// Sites are the centre of a hexagonal lattice plus rings around it. The six
/// wrap vectors translate the whole 7-site cluster onto its neighbours in
/// the tiling, which is how the layout is repeated as six replicas.
struct CellTopology {
  double isd = 0.0;
  std::vector<Vec2> sites;
  std::vector<Cell> cells;
  std::array<Vec2, 6> wrap_images{};
  bool wrap_enabled = false;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_sites() const { return static_cast<int>(sites.size()); }
};

struct UEKinematics {
  Vec2 position;
  double speed = 0.0;    // m/s
  double heading = 0.0;  // radians, [0, 2pi)
};

struct Displacement {
  Vec2 vector;
  double distance = 0.0;
};

/// Builds the layout. `n_sites` must be 1 or 7; only the 7-site layout has
/// wrap-around. Throws std::invalid_argument on bad input.
CellTopology build_topology(double isd, int n_sites);

/// Shortest vector from `a` to `b` or any of b's wrap images.
Displacement effective_displacement(Vec2 a, Vec2 b, const CellTopology& topo);

/// True if `p` lies in the region UEs live in: the wrap tile (hexagon of
/// the cluster translation lattice) for the 7-site layout, or the hexagonal
/// cell around the site for the single-site layout.
bool in_layout(Vec2 p, const CellTopology& topo);

/// Maps a point back into the layout region by wrap translation.
Vec2 wrap_into_layout(Vec2 p, const CellTopology& topo);

/// Axis-aligned bounding box of the layout region: {min, max}.
std::array<Vec2, 2> layout_bounds(const CellTopology& topo);

std::vector<UEKinematics> drop_ues(int n, std::uint64_t seed, const CellTopology& topo,
                                   double speed_mps);

UEKinematics advance_ue(const UEKinematics& ue, double dt_s, const CellTopology& topo);

constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }

}  // namespace chosim
