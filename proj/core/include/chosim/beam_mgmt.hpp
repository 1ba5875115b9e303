#pragma once

#include <functional>
#include <optional>
#include <span>

#include "chosim/channel.hpp"
#include "chosim/sim_time.hpp"

namespace chosim {

struct BeamMgmtParams {
  double gamma_out_db = -8.0;
  int n_batt = 4;
  SimTime t_batt = SimTime::ms(40);
  SimTime t_rlf = SimTime::ms(1000);  // zero disables the overall timer
  SimTime t_reestablishment = SimTime::ms(100);
};

struct BeamRecovery {
  bool active = false;
  int attempts = 0;
  SimTime started;
  SimTime next_attempt;
  BeamId target = 1;
  PanelId panel = 0;
};

struct BeamMgmtState {
  BeamId serving_beam = 1;
  PanelId serving_panel = 0;
  BeamRecovery recovery;
  bool rlf_declared = false;
  std::optional<SimTime> below_since;  // start of the current RLQ < gamma_out run
};

/// Argmax over L1 beam values (index 0 is beam 1); ties go to the lowest id.
BeamId select_serving_beam(std::span<const double> l1_beams);

enum class BeamEvent { none, recovery_started, attempt_failed, recovered, rlf };

struct BeamCandidate {
  BeamId beam = 1;
  PanelId panel = 0;
};

/// One time step of beam-failure detection and recovery.
///
/// RLQ below gamma_out starts recovery towards `best_l1`, the L1-argmax beam
/// at that instant. Attempts happen every t_batt; an attempt succeeds iff the
/// candidate SINR is at least gamma_out. After n_batt failures, or when the
/// RLQ stays below gamma_out for t_rlf, RLF is declared.
BeamEvent beam_failure_step(BeamMgmtState& state, double rlq_db, BeamCandidate best_l1,
                            const std::function<double(BeamId, PanelId)>& candidate_sinr_db,
                            SimTime now, const BeamMgmtParams& params);

struct RlfDeclaration {
  SimTime outage_start;
  SimTime reestablish_at;
};

/// Consumes a declared RLF: returns the re-establishment window and clears
/// the beam-management state.
RlfDeclaration declare_rlf(BeamMgmtState& state, SimTime now, const BeamMgmtParams& params);

}  // namespace chosim
