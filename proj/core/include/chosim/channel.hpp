#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "chosim/deployment.hpp"
#include "chosim/rng.hpp"

namespace chosim {

inline constexpr int kBeamsPerCell = 12;
inline constexpr int kPanels = 3;

using BeamId = int;  // 1-based, 1..12
using PanelId = int; // 0-based, 0..2

struct ChannelParams {
  double fc_ghz = 28.0;
  double h_bs_m = 10.0;
  double h_ut_m = 1.5;
  double tx_power_dbm = 30.0;   // per SSB beam
  double noise_figure_db = 9.0;
  double bandwidth_mhz = 100.0;
  double sf_sigma_los_db = 4.0;
  double sf_sigma_nlos_db = 7.82;
  double sf_decorr_m = 13.0;
  bool fast_fading = true;
  int n_sinusoids = 16;

  // Tx beam grid: beams 1-8 narrow, 9-12 wide.
  double narrow_peak_dbi = 26.0;
  double narrow_az_bw_deg = 15.0;
  double narrow_el_bw_deg = 8.0;
  double narrow_tilt_deg = 4.0;
  double wide_peak_dbi = 20.0;
  double wide_az_bw_deg = 30.0;
  double wide_el_bw_deg = 20.0;
  double wide_tilt_deg = 15.0;
  double beam_side_lobe_db = 30.0;

  // UE panels (MPUE): three panels 120 degrees apart.
  double panel_peak_db = 5.0;
  double panel_bw_deg = 90.0;
  double panel_side_lobe_db = 25.0;

  double noise_dbm() const;
};

// --- Path loss (UMi street canyon, soft LoS) --------------------------------

double los_probability_umi(double d2d_m);
double pathloss_umi_los(double d2d_m, double fc_ghz, double h_bs_m = 10.0, double h_ut_m = 1.5);
double pathloss_umi_nlos(double d2d_m, double fc_ghz, double h_bs_m = 10.0, double h_ut_m = 1.5);

/// w * PL_LoS + (1 - w) * PL_NLoS with w the LoS probability at d2d.
/// Distances below 10 m are evaluated at 10 m. Throws on d2d <= 0.
double pathloss_soft_los(double d2d_m, double fc_ghz, double h_bs_m = 10.0, double h_ut_m = 1.5);

/// Shadow standard deviation blended with the soft-LoS weight.
double shadow_sigma_soft_los(double d2d_m, const ChannelParams& p);

/// One AR(1) step of a Gudmundson shadowing process:
/// rho * old + sqrt(1 - rho^2) * N(0, sigma), rho = exp(-displacement / d_corr).
double shadow_step(double shadow_db, double displacement_m, double sigma_db, double d_corr_m,
                   Rng& rng);

// --- Antenna patterns -------------------------------------------------------

struct BeamDef {
  double azimuth = 0.0;    // rad, relative to the cell boresight
  double tilt = 0.0;       // rad below horizon
  double az_bw = 0.0;      // rad, full -3 dB width
  double el_bw = 0.0;
  double peak_dbi = 0.0;
  bool wide = false;
};

struct BeamGrid {
  std::array<BeamDef, kBeamsPerCell> beams{};
  double side_lobe_db = 30.0;

  static BeamGrid from_params(const ChannelParams& p);
  const BeamDef& beam(BeamId id) const;  // throws std::out_of_range
};

/// Horizontal cut of the beam pattern, taken at the beam's own tilt.
double beam_gain(const BeamGrid& grid, BeamId beam, double azimuth_offset);

/// Full pattern: azimuth offset from the beam's pointing direction and the
/// elevation angle below horizon of the UE as seen from the site.
double beam_gain(const BeamGrid& grid, BeamId beam, double azimuth_offset, double elevation);

/// Gain of UE panel `panel` for a signal arriving from `arrival_azimuth`
/// (global frame) when the UE heads along `heading`.
double panel_gain(const ChannelParams& p, PanelId panel, double heading, double arrival_azimuth);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

// --- Fast fading ------------------------------------------------------------

/// Bank of Jakes-style sum-of-sinusoids oscillators, one per link.
/// Each link yields a complex gain with unit mean power; the bank is advanced
/// by a fixed time step by rotating every phasor.
class FadingBank {
public:
  FadingBank() = default;
  FadingBank(std::size_t n_links, int n_sinusoids, double doppler_hz, double dt_s, Rng& rng);

  void step();
  double gain_db(std::size_t link) const;
  double power(std::size_t link) const;
  std::size_t n_links() const { return n_links_; }

private:
  std::size_t n_links_ = 0;
  int n_sin_ = 0;
  std::vector<double> re_, im_;     // current phasors
  std::vector<double> rot_re_, rot_im_;
};

// --- Received power ---------------------------------------------------------

/// The five additive terms of a raw RSRP sample, all in dB(m).
struct LinkBudget {
  double tx_power_dbm = 0.0;
  double beam_gain_db = 0.0;
  double panel_gain_db = 0.0;
  double pathloss_db = 0.0;
  double shadow_db = 0.0;
  double fading_db = 0.0;
};

double rsrp_raw(const LinkBudget& b);

/// Received power of every (cell, beam, panel) at one instant.
struct PowerSnapshot {
  int n_cells = 0;
  std::vector<double> dbm;  // index(c, b, p)
  std::vector<double> mw;

  static std::size_t index(CellId c, BeamId b, PanelId p) {
    return (static_cast<std::size_t>(c) * kBeamsPerCell + static_cast<std::size_t>(b - 1)) * kPanels +
           static_cast<std::size_t>(p);
  }
  double at_dbm(CellId c, BeamId b, PanelId p) const { return dbm[index(c, b, p)]; }
  double at_mw(CellId c, BeamId b, PanelId p) const { return mw[index(c, b, p)]; }
  void resize(int cells);
};

/// Large-scale and fading state of one UE towards every cell.
class UeChannel {
public:
  UeChannel(const CellTopology& topo, const ChannelParams& params, const UEKinematics& ue,
            std::uint64_t seed, int ue_index, double dt_s);

  /// Advances shadowing by `displacement_m` and fading by one time step.
  void step(double displacement_m);

  /// Evaluates every link for the UE at `ue`.
  void snapshot(const UEKinematics& ue, PowerSnapshot& out) const;

  /// Budget of a single link; used by tests and diagnostics.
  LinkBudget budget(const UEKinematics& ue, CellId c, BeamId b, PanelId p) const;

  /// Unit-variance shadow process state towards site `s`.
  double shadow_unit(SiteId s) const { return shadow_unit_[static_cast<std::size_t>(s)]; }

private:
  const CellTopology* topo_;
  const ChannelParams* params_;
  BeamGrid grid_;
  Rng shadow_rng_;
  std::vector<double> shadow_unit_;  // per site, N(0,1) process
  FadingBank fading_;
};

}  // namespace chosim
