#include "chosim/beam_mgmt.hpp"

#include <stdexcept>

namespace chosim {

BeamId select_serving_beam(std::span<const double> l1_beams) {
  if (l1_beams.empty()) throw std::invalid_argument("select_serving_beam: no beams measured");
  std::size_t best = 0;
  for (std::size_t i = 1; i < l1_beams.size(); ++i) {
    if (l1_beams[i] > l1_beams[best]) best = i;
  }
  return static_cast<BeamId>(best + 1);
}

BeamEvent beam_failure_step(BeamMgmtState& state, double rlq_db, BeamCandidate best_l1,
                            const std::function<double(BeamId, PanelId)>& candidate_sinr_db,
                            SimTime now, const BeamMgmtParams& params) {
  if (state.rlf_declared) return BeamEvent::none;

  const bool below = rlq_db < params.gamma_out_db;
  if (below) {
    if (!state.below_since) state.below_since = now;
  } else {
    state.below_since.reset();
  }

  if (below && params.t_rlf > SimTime{} && now - *state.below_since >= params.t_rlf) {
    state.rlf_declared = true;
    state.recovery = {};
    return BeamEvent::rlf;
  }

  BeamRecovery& rec = state.recovery;
  if (!rec.active) {
    if (!below) return BeamEvent::none;
    rec = BeamRecovery{.active = true,
                       .attempts = 0,
                       .started = now,
                       .next_attempt = now + params.t_batt,
                       .target = best_l1.beam,
                       .panel = best_l1.panel};
    return BeamEvent::recovery_started;
  }

  if (now < rec.next_attempt) return BeamEvent::none;

  ++rec.attempts;
  if (candidate_sinr_db(rec.target, rec.panel) >= params.gamma_out_db) {
    state.serving_beam = rec.target;
    state.serving_panel = rec.panel;
    rec = {};
    return BeamEvent::recovered;
  }
  if (rec.attempts >= params.n_batt) {
    state.rlf_declared = true;
    rec = {};
    return BeamEvent::rlf;
  }
  rec.next_attempt = rec.next_attempt + params.t_batt;
  return BeamEvent::attempt_failed;
}

RlfDeclaration declare_rlf(BeamMgmtState& state, SimTime now, const BeamMgmtParams& params) {
  if (!state.rlf_declared) throw std::logic_error("declare_rlf without a declared RLF");
  const BeamId beam = state.serving_beam;
  const PanelId panel = state.serving_panel;
  state = BeamMgmtState{};
  state.serving_beam = beam;
  state.serving_panel = panel;
  return {now, now + params.t_reestablishment};
}

}  // namespace chosim
