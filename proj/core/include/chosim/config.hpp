#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chosim/beam_mgmt.hpp"
#include "chosim/channel.hpp"
#include "chosim/cho_engine.hpp"
#include "chosim/measurement.hpp"
#include "chosim/sim_time.hpp"
#include "chosim/sinr.hpp"
#include "chosim/ta_protocol.hpp"

namespace chosim {

/// Every tunable of one simulation run. Defaults are the reference scenario.
struct ScenarioConfig {
  // deployment
  double isd_m = 200.0;
  int n_sites = 7;
  double ue_speed_kmh = 60.0;
  int n_ue = 420;

  ChannelParams channel;
  MeasurementParams measurement;
  SinrParams sinr;
  int rlq_window = 20;
  BeamMgmtParams beam;
  ChoParams cho;

  // ta
  bool early_forwarding = true;
  SimTime xn_delay = SimTime::ms(5);
  std::string schedule_file;  // empty: built-in tables

  // sim
  SimTime dt = SimTime::ms(10);
  SimTime t_sim = SimTime::s(30);
  SimTime warmup = SimTime::s(1);
  Scheme scheme = Scheme::rach_less;
  std::uint64_t seed = 1;

  /// Sets `section.key` from its textual value. Throws std::invalid_argument
  /// for unknown keys and malformed values.
  void set(std::string_view key, std::string_view value);

  /// Every key with its effective value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  /// `key = value` lines for every key.
  std::string resolved_text() const;

  /// Hash of every entry except the scheme and the seed; two runs are
  /// comparable iff their fingerprints match.
  std::string fingerprint() const;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  /// Fills derived fields (noise floor, measurement period). Called by
  /// load functions and by the simulator.
  void finalize();

  ScheduleSet schedules() const;

  int steps() const { return static_cast<int>(t_sim.count_us() / dt.count_us()); }
};

/// Parses a config file body: `section.key = value` lines, `#` comments.
void apply_config_text(ScenarioConfig& cfg, std::string_view text);
void apply_config_file(ScenarioConfig& cfg, const std::string& path);

/// Applies a `key=value` override.
void apply_override(ScenarioConfig& cfg, std::string_view assignment);

Scheme parse_scheme(std::string_view s);

}  // namespace chosim
