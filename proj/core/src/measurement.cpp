#include "chosim/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <functional>
#include <limits>
#include <stdexcept>

namespace chosim {

double MeasurementParams::l3_coefficient() const { return 1.0 / std::pow(2.0, l3_k / 4.0); }

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double l1_average(std::span<const double> samples_dbm) {
  if (samples_dbm.empty()) throw std::invalid_argument("l1_average: empty sample set");
  double sum = 0.0;
  for (double s : samples_dbm) sum += dbm_to_mw(s);
  return mw_to_dbm(sum / static_cast<double>(samples_dbm.size()));
}

double cell_consolidate(std::span<const double> l1_beams_dbm, const MeasurementParams& p) {
  if (l1_beams_dbm.empty()) throw std::invalid_argument("cell_consolidate: no beam measurements");
  const double strongest = *std::max_element(l1_beams_dbm.begin(), l1_beams_dbm.end());
  if (p.policy == ConsolidationPolicy::strongest) return strongest;

  std::vector<double> above;
  for (double v : l1_beams_dbm) {
    if (v > p.consolidation_threshold_dbm) above.push_back(v);
  }
  if (above.empty()) return strongest;
  std::sort(above.begin(), above.end(), std::greater<>());
  const std::size_t n = std::min(above.size(), static_cast<std::size_t>(std::max(p.avg_top_n, 1)));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += dbm_to_mw(above[i]);
  return mw_to_dbm(sum / static_cast<double>(n));
}

double l3_update(double prev_dbm, double input_dbm, double a) {
  return (1.0 - a) * prev_dbm + a * input_dbm;
}

double L3Filter::update(double input_dbm, double a) {
  if (!init_) {
    init_ = true;
    value_ = input_dbm;
  } else {
    value_ = l3_update(value_, input_dbm, a);
  }
  return value_;
}

UeMeasurement::UeMeasurement(int n_cells, const MeasurementParams& params)
    : n_cells_(n_cells), params_(params) {
  if (params_.omega < 1) throw std::invalid_argument("L1 period must span at least one step");
  const std::size_t n = static_cast<std::size_t>(n_cells) * kBeamsPerCell * kPanels;
  acc_mw_.assign(n, 0.0);
  l1_dbm_.assign(n, -std::numeric_limits<double>::infinity());
  l3_.assign(static_cast<std::size_t>(n_cells), L3Filter{});
}

bool UeMeasurement::add_raw(const PowerSnapshot& raw, Rng* error_rng) {
  if (error_rng != nullptr && params_.meas_error_db > 0.0) {
    std::normal_distribution<double> err(0.0, params_.meas_error_db);
    for (std::size_t i = 0; i < acc_mw_.size(); ++i) acc_mw_[i] += dbm_to_mw(raw.dbm[i] + err(*error_rng));
  } else {
    for (std::size_t i = 0; i < acc_mw_.size(); ++i) acc_mw_[i] += raw.mw[i];
  }
  if (++samples_ < params_.omega) return false;

  const double inv = 1.0 / samples_;
  for (std::size_t i = 0; i < acc_mw_.size(); ++i) {
    l1_dbm_[i] = mw_to_dbm(acc_mw_[i] * inv);
    acc_mw_[i] = 0.0;
  }
  samples_ = 0;
  ++periods_;

  const double a = params_.l3_coefficient();
  std::array<double, kBeamsPerCell> beams{};
  for (CellId c = 0; c < n_cells_; ++c) {
    double best = -std::numeric_limits<double>::infinity();
    for (PanelId p = 0; p < kPanels; ++p) {
      for (BeamId b = 1; b <= kBeamsPerCell; ++b) {
        beams[static_cast<std::size_t>(b - 1)] = l1(c, b, p);
      }
      best = std::max(best, cell_consolidate(beams, params_));
    }
    l3_[static_cast<std::size_t>(c)].update(best, a);
  }
  return true;
}

double UeMeasurement::l1(CellId c, BeamId b, PanelId p) const {
  return l1_dbm_[PowerSnapshot::index(c, b, p)];
}

double UeMeasurement::l1_best_panel(CellId c, BeamId b, PanelId* panel) const {
  PanelId best_p = 0;
  double best = l1(c, b, 0);
  for (PanelId p = 1; p < kPanels; ++p) {
    const double v = l1(c, b, p);
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  if (panel) *panel = best_p;
  return best;
}

std::vector<double> UeMeasurement::l1_beams(CellId c) const {
  std::vector<double> out(kBeamsPerCell);
  for (BeamId b = 1; b <= kBeamsPerCell; ++b) out[static_cast<std::size_t>(b - 1)] = l1_best_panel(c, b);
  return out;
}

}  // namespace chosim
