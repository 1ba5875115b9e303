#include "chosim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chosim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpeedOfLight = 299'792'458.0;
constexpr double kMinDistance = 10.0;

double deg(double d) { return d * kPi / 180.0; }

double d3d(double d2d, double h_bs, double h_ut) {
  const double dh = h_bs - h_ut;
  return std::sqrt(d2d * d2d + dh * dh);
}

double clamp_distance(double d2d) {
  if (!(d2d > 0.0)) throw std::invalid_argument("path loss: distance must be positive");
  return std::max(d2d, kMinDistance);
}

double pattern_attenuation(double offset, double bw) {
  const double r = offset / bw;
  return 12.0 * r * r;
}

}  // namespace

double ChannelParams::noise_dbm() const {
  return -174.0 + 10.0 * std::log10(bandwidth_mhz * 1e6) + noise_figure_db;
}

double los_probability_umi(double d2d_m) {
  if (d2d_m <= 18.0) return 1.0;
  return 18.0 / d2d_m + std::exp(-d2d_m / 36.0) * (1.0 - 18.0 / d2d_m);
}

double pathloss_umi_los(double d2d_m, double fc_ghz, double h_bs_m, double h_ut_m) {
  const double d2d = clamp_distance(d2d_m);
  const double d = d3d(d2d, h_bs_m, h_ut_m);
  const double d_bp = 4.0 * (h_bs_m - 1.0) * (h_ut_m - 1.0) * fc_ghz * 1e9 / kSpeedOfLight;
  if (d2d <= d_bp) {
    return 32.4 + 21.0 * std::log10(d) + 20.0 * std::log10(fc_ghz);
  }
  const double dh = h_bs_m - h_ut_m;
  return 32.4 + 40.0 * std::log10(d) + 20.0 * std::log10(fc_ghz) -
         9.5 * std::log10(d_bp * d_bp + dh * dh);
}

double pathloss_umi_nlos(double d2d_m, double fc_ghz, double h_bs_m, double h_ut_m) {
  const double d2d = clamp_distance(d2d_m);
  const double d = d3d(d2d, h_bs_m, h_ut_m);
  const double nlos = 35.3 * std::log10(d) + 22.4 + 21.3 * std::log10(fc_ghz) - 0.3 * (h_ut_m - 1.5);
  return std::max(pathloss_umi_los(d2d, fc_ghz, h_bs_m, h_ut_m), nlos);
}

double pathloss_soft_los(double d2d_m, double fc_ghz, double h_bs_m, double h_ut_m) {
  const double d2d = clamp_distance(d2d_m);
  const double w = los_probability_umi(d2d);
  return w * pathloss_umi_los(d2d, fc_ghz, h_bs_m, h_ut_m) +
         (1.0 - w) * pathloss_umi_nlos(d2d, fc_ghz, h_bs_m, h_ut_m);
}

double shadow_sigma_soft_los(double d2d_m, const ChannelParams& p) {
  const double w = los_probability_umi(std::max(d2d_m, kMinDistance));
  return w * p.sf_sigma_los_db + (1.0 - w) * p.sf_sigma_nlos_db;
}

double shadow_step(double shadow_db, double displacement_m, double sigma_db, double d_corr_m,
                   Rng& rng) {
  if (displacement_m < 0.0) throw std::invalid_argument("shadow_step: negative displacement");
  const double rho = std::exp(-displacement_m / d_corr_m);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double innovation = n01(rng);
  if (rho >= 1.0) return shadow_db;
  return rho * shadow_db + std::sqrt(1.0 - rho * rho) * sigma_db * innovation;
}

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

BeamGrid BeamGrid::from_params(const ChannelParams& p) {
  BeamGrid g;
  g.side_lobe_db = p.beam_side_lobe_db;
  for (int i = 0; i < 8; ++i) {
    g.beams[static_cast<std::size_t>(i)] = BeamDef{
        .azimuth = deg(-60.0 + p.narrow_az_bw_deg * (i + 0.5)),
        .tilt = deg(p.narrow_tilt_deg),
        .az_bw = deg(p.narrow_az_bw_deg),
        .el_bw = deg(p.narrow_el_bw_deg),
        .peak_dbi = p.narrow_peak_dbi,
        .wide = false,
    };
  }
  for (int i = 0; i < 4; ++i) {
    g.beams[static_cast<std::size_t>(8 + i)] = BeamDef{
        .azimuth = deg(-60.0 + p.wide_az_bw_deg * (i + 0.5)),
        .tilt = deg(p.wide_tilt_deg),
        .az_bw = deg(p.wide_az_bw_deg),
        .el_bw = deg(p.wide_el_bw_deg),
        .peak_dbi = p.wide_peak_dbi,
        .wide = true,
    };
  }
  return g;
}

const BeamDef& BeamGrid::beam(BeamId id) const {
  if (id < 1 || id > kBeamsPerCell) throw std::out_of_range("unknown beam id");
  return beams[static_cast<std::size_t>(id - 1)];
}

double beam_gain(const BeamGrid& grid, BeamId beam, double azimuth_offset) {
  return beam_gain(grid, beam, azimuth_offset, grid.beam(beam).tilt);
}

double beam_gain(const BeamGrid& grid, BeamId beam, double azimuth_offset, double elevation) {
  const BeamDef& b = grid.beam(beam);
  const double att = pattern_attenuation(wrap_angle(azimuth_offset), b.az_bw) +
                     pattern_attenuation(elevation - b.tilt, b.el_bw);
  return b.peak_dbi - std::min(att, grid.side_lobe_db);
}

double panel_gain(const ChannelParams& p, PanelId panel, double heading, double arrival_azimuth) {
  const double boresight = heading + panel * 2.0 * kPi / 3.0;
  const double off = wrap_angle(arrival_azimuth - boresight);
  return p.panel_peak_db - std::min(pattern_attenuation(off, deg(p.panel_bw_deg)), p.panel_side_lobe_db);
}

FadingBank::FadingBank(std::size_t n_links, int n_sinusoids, double doppler_hz, double dt_s, Rng& rng)
    : n_links_(n_links), n_sin_(n_sinusoids) {
  const std::size_t n = n_links * static_cast<std::size_t>(n_sinusoids);
  re_.resize(n);
  im_.resize(n);
  rot_re_.resize(n);
  rot_im_.resize(n);
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  for (std::size_t i = 0; i < n; ++i) {
    const double aoa = u(rng);
    const double phase = u(rng);
    const double w = 2.0 * kPi * doppler_hz * std::cos(aoa) * dt_s;
    re_[i] = std::cos(phase);
    im_[i] = std::sin(phase);
    rot_re_[i] = std::cos(w);
    rot_im_[i] = std::sin(w);
  }
}

void FadingBank::step() {
  const std::size_t n = re_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = re_[i] * rot_re_[i] - im_[i] * rot_im_[i];
    const double m = re_[i] * rot_im_[i] + im_[i] * rot_re_[i];
    re_[i] = r;
    im_[i] = m;
  }
}

double FadingBank::power(std::size_t link) const {
  double sr = 0.0;
  double si = 0.0;
  const std::size_t base = link * static_cast<std::size_t>(n_sin_);
  for (int k = 0; k < n_sin_; ++k) {
    sr += re_[base + static_cast<std::size_t>(k)];
    si += im_[base + static_cast<std::size_t>(k)];
  }
  return (sr * sr + si * si) / n_sin_;
}

double FadingBank::gain_db(std::size_t link) const {
  // Floor keeps a perfectly cancelled sum finite.
  return 10.0 * std::log10(std::max(power(link), 1e-12));
}

double rsrp_raw(const LinkBudget& b) {
  return b.tx_power_dbm + b.beam_gain_db + b.panel_gain_db - b.pathloss_db - b.shadow_db + b.fading_db;
}

void PowerSnapshot::resize(int cells) {
  n_cells = cells;
  const std::size_t n = static_cast<std::size_t>(cells) * kBeamsPerCell * kPanels;
  dbm.assign(n, 0.0);
  mw.assign(n, 0.0);
}

UeChannel::UeChannel(const CellTopology& topo, const ChannelParams& params, const UEKinematics& ue,
                     std::uint64_t seed, int ue_index, double dt_s)
    : topo_(&topo),
      params_(&params),
      grid_(BeamGrid::from_params(params)),
      shadow_rng_(make_rng(seed, Stream::shadow, static_cast<std::uint64_t>(ue_index))) {
  std::normal_distribution<double> n01(0.0, 1.0);
  shadow_unit_.resize(static_cast<std::size_t>(topo.n_sites()));
  for (double& z : shadow_unit_) z = n01(shadow_rng_);

  Rng fading_rng = make_rng(seed, Stream::fading, static_cast<std::uint64_t>(ue_index));
  const double doppler = ue.speed * params.fc_ghz * 1e9 / kSpeedOfLight;
  fading_ = FadingBank(static_cast<std::size_t>(topo.n_cells()) * kBeamsPerCell, params.n_sinusoids,
                       doppler, dt_s, fading_rng);
}

void UeChannel::step(double displacement_m) {
  for (double& z : shadow_unit_) {
    z = shadow_step(z, displacement_m, 1.0, params_->sf_decorr_m, shadow_rng_);
  }
  if (params_->fast_fading) fading_.step();
}

LinkBudget UeChannel::budget(const UEKinematics& ue, CellId c, BeamId b, PanelId p) const {
  const Cell& cell = topo_->cells[static_cast<std::size_t>(c)];
  const Displacement disp =
      effective_displacement(topo_->sites[static_cast<std::size_t>(cell.site)], ue.position, *topo_);
  const double d2d = std::max(disp.distance, 1e-3);
  const double az_from_site = std::atan2(disp.vector.y, disp.vector.x);
  const double elevation = std::atan2(params_->h_bs_m - params_->h_ut_m, d2d);
  const BeamDef& beam = grid_.beam(b);

  LinkBudget lb;
  lb.tx_power_dbm = params_->tx_power_dbm;
  lb.beam_gain_db = beam_gain(grid_, b, az_from_site - cell.boresight - beam.azimuth, elevation);
  lb.panel_gain_db = panel_gain(*params_, p, ue.heading, az_from_site + kPi);
  lb.pathloss_db = pathloss_soft_los(d2d, params_->fc_ghz, params_->h_bs_m, params_->h_ut_m);
  lb.shadow_db = shadow_sigma_soft_los(d2d, *params_) * shadow_unit_[static_cast<std::size_t>(cell.site)];
  lb.fading_db = params_->fast_fading
                     ? fading_.gain_db(static_cast<std::size_t>(c) * kBeamsPerCell +
                                       static_cast<std::size_t>(b - 1))
                     : 0.0;
  return lb;
}

void UeChannel::snapshot(const UEKinematics& ue, PowerSnapshot& out) const {
  if (out.n_cells != topo_->n_cells()) out.resize(topo_->n_cells());

  for (const Cell& cell : topo_->cells) {
    const Displacement disp =
        effective_displacement(topo_->sites[static_cast<std::size_t>(cell.site)], ue.position, *topo_);
    const double d2d = std::max(disp.distance, 1e-3);
    const double az_from_site = std::atan2(disp.vector.y, disp.vector.x);
    const double elevation = std::atan2(params_->h_bs_m - params_->h_ut_m, d2d);
    const double pl = pathloss_soft_los(d2d, params_->fc_ghz, params_->h_bs_m, params_->h_ut_m);
    const double sf =
        shadow_sigma_soft_los(d2d, *params_) * shadow_unit_[static_cast<std::size_t>(cell.site)];

    std::array<double, kPanels> pg{};
    for (PanelId p = 0; p < kPanels; ++p) {
      pg[static_cast<std::size_t>(p)] = panel_gain(*params_, p, ue.heading, az_from_site + kPi);
    }
    for (BeamId b = 1; b <= kBeamsPerCell; ++b) {
      const BeamDef& beam = grid_.beam(b);
      const double bg = beam_gain(grid_, b, az_from_site - cell.boresight - beam.azimuth, elevation);
      const double ff = params_->fast_fading
                            ? fading_.gain_db(static_cast<std::size_t>(cell.id) * kBeamsPerCell +
                                              static_cast<std::size_t>(b - 1))
                            : 0.0;
      for (PanelId p = 0; p < kPanels; ++p) {
        const double v = rsrp_raw(LinkBudget{params_->tx_power_dbm, bg, pg[static_cast<std::size_t>(p)],
                                             pl, sf, ff});
        const std::size_t i = PowerSnapshot::index(cell.id, b, p);
        out.dbm[i] = v;
        out.mw[i] = std::pow(10.0, v / 10.0);
      }
    }
  }
}

}  // namespace chosim
