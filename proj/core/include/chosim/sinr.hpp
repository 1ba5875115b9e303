#pragma once

#include <deque>

#include "chosim/channel.hpp"

namespace chosim {

enum class InterferenceModel {
  scaled_topk,  // K_b strongest beams of each interferer, scaled by K_b / 12
  full,         // every beam of each interferer, scaled by K_b / 12
  single,       // strongest beam of each interferer, unscaled
};

struct SinrParams {
  InterferenceModel model = InterferenceModel::scaled_topk;
  int k_b = 4;
  double noise_dbm = -85.0;
};

/// Interference power (mW) seen on panel `panel` from cell `c`.
double interference_from_cell(const PowerSnapshot& s, CellId c, PanelId panel, const SinrParams& p);

/// Average downlink SINR (dB) of link (c, b) received on `panel`.
/// Interference comes from every cell other than `c`.
double sinr_db(const PowerSnapshot& s, CellId c, BeamId b, PanelId panel, const SinrParams& p);

/// Best (beam, panel) of cell `c` by received power, with its SINR.
struct LinkChoice {
  BeamId beam = 1;
  PanelId panel = 0;
  double sinr_db = 0.0;
};
LinkChoice best_link(const PowerSnapshot& s, CellId c, const SinrParams& p);

/// Sliding-window linear moving average of the serving-link SINR.
class RlqFilter {
public:
  explicit RlqFilter(int window = 20);

  double update(double sinr_db);
  void reset();
  double value_db() const;
  int size() const { return static_cast<int>(window_.size()); }
  bool empty() const { return window_.empty(); }
  int capacity() const { return capacity_; }

private:
  int capacity_;
  std::deque<double> window_;  // linear
};

}  // namespace chosim
