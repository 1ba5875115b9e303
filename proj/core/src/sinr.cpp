#include "chosim/sinr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "chosim/measurement.hpp"

namespace chosim {

double interference_from_cell(const PowerSnapshot& s, CellId c, PanelId panel, const SinrParams& p) {
  std::array<double, kBeamsPerCell> mw{};
  for (BeamId b = 1; b <= kBeamsPerCell; ++b) mw[static_cast<std::size_t>(b - 1)] = s.at_mw(c, b, panel);
  const double load = static_cast<double>(p.k_b) / kBeamsPerCell;

  switch (p.model) {
    case InterferenceModel::full:
      return load * std::accumulate(mw.begin(), mw.end(), 0.0);
    case InterferenceModel::single:
      return *std::max_element(mw.begin(), mw.end());
    case InterferenceModel::scaled_topk: {
      const int k = std::clamp(p.k_b, 1, kBeamsPerCell);
      std::partial_sort(mw.begin(), mw.begin() + k, mw.end(), std::greater<>());
      return load * std::accumulate(mw.begin(), mw.begin() + k, 0.0);
    }
  }
  return 0.0;
}

double sinr_db(const PowerSnapshot& s, CellId c, BeamId b, PanelId panel, const SinrParams& p) {
  double interference = 0.0;
  for (CellId other = 0; other < s.n_cells; ++other) {
    if (other == c) continue;
    interference += interference_from_cell(s, other, panel, p);
  }
  return mw_to_dbm(s.at_mw(c, b, panel)) - mw_to_dbm(interference + dbm_to_mw(p.noise_dbm));
}

LinkChoice best_link(const PowerSnapshot& s, CellId c, const SinrParams& p) {
  LinkChoice best;
  double best_mw = -1.0;
  for (BeamId b = 1; b <= kBeamsPerCell; ++b) {
    for (PanelId q = 0; q < kPanels; ++q) {
      const double v = s.at_mw(c, b, q);
      if (v > best_mw) {
        best_mw = v;
        best.beam = b;
        best.panel = q;
      }
    }
  }
  best.sinr_db = sinr_db(s, c, best.beam, best.panel, p);
  return best;
}

RlqFilter::RlqFilter(int window) : capacity_(window) {
  if (window < 1) throw std::invalid_argument("RLQ window must be >= 1");
}

double RlqFilter::update(double sinr) {
  window_.push_back(dbm_to_mw(sinr));
  if (static_cast<int>(window_.size()) > capacity_) window_.pop_front();
  return value_db();
}

void RlqFilter::reset() { window_.clear(); }

double RlqFilter::value_db() const {
  if (window_.empty()) return std::numeric_limits<double>::infinity();
  const double sum = std::accumulate(window_.begin(), window_.end(), 0.0);
  return mw_to_dbm(sum / static_cast<double>(window_.size()));
}

}  // namespace chosim
