#pragma once

#include <span>
#include <string>
#include <vector>

#include "chosim/channel.hpp"

namespace chosim {

enum class ConsolidationPolicy {
  strongest,     // strongest beam
  avg_top_n,     // linear mean of the N strongest beams above a threshold
};

struct MeasurementParams {
  int omega = 2;  // L1 period in time steps
  int l3_k = 4;
  ConsolidationPolicy policy = ConsolidationPolicy::strongest;
  int avg_top_n = 2;
  double consolidation_threshold_dbm = -100.0;
  double meas_error_db = 0.0;  // std-dev of additive raw RSRP error, 0 disables

  double l3_coefficient() const;
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// Linear-domain average of raw samples, returned in dBm.
/// Throws std::invalid_argument on an empty set.
double l1_average(std::span<const double> samples_dbm);

/// Beam-to-cell consolidation of L1 beam values.
double cell_consolidate(std::span<const double> l1_beams_dbm, const MeasurementParams& p);

/// IIR update in the dB domain: (1 - a) * prev + a * input.
double l3_update(double prev_dbm, double input_dbm, double a);

class L3Filter {
public:
  double update(double input_dbm, double a);
  bool initialized() const { return init_; }
  double value() const { return value_; }

private:
  bool init_ = false;
  double value_ = 0.0;
};

/// Per-UE L1/L3 measurement chain with MPUE-A3 panel handling: every panel
/// measures every beam; a cell's L3 input is the best per-panel consolidation.
class UeMeasurement {
public:
  UeMeasurement(int n_cells, const MeasurementParams& params);

  /// Accumulates one raw snapshot. Returns true when an L1 period closed and
  /// fresh L1/L3 outputs are available. When `error_rng` is given and the
  /// configured error is non-zero, each raw sample gets a Gaussian dB error.
  bool add_raw(const PowerSnapshot& raw, Rng* error_rng = nullptr);

  /// L1 RSRP of (cell, beam, panel) from the last closed period.
  double l1(CellId c, BeamId b, PanelId p) const;
  /// Best-panel L1 RSRP of (cell, beam) and the panel achieving it.
  double l1_best_panel(CellId c, BeamId b, PanelId* panel = nullptr) const;
  /// Best-panel L1 beam vector of a cell (index 0 is beam 1).
  std::vector<double> l1_beams(CellId c) const;
  double l3(CellId c) const { return l3_[static_cast<std::size_t>(c)].value(); }
  std::span<const L3Filter> l3_filters() const { return l3_; }
  int n_cells() const { return n_cells_; }
  bool has_output() const { return periods_ > 0; }

private:
  int n_cells_;
  MeasurementParams params_;
  int samples_ = 0;
  long periods_ = 0;
  std::vector<double> acc_mw_;
  std::vector<double> l1_dbm_;
  std::vector<L3Filter> l3_;
};

}  // namespace chosim
