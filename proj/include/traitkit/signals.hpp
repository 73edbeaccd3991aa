#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "traitkit/traits.hpp"

namespace traitkit::signals {

enum class Channel { GSR = 0, HR = 1 };

inline constexpr const char* to_string(Channel c) { return c == Channel::GSR ? "GSR" : "HR"; }

// Nominal sensor rates and the analysis window.
inline constexpr double kGsrRate = 0.3;       // samples per second
inline constexpr double kHrRate = 1.1;        // samples per second
inline constexpr double kSessionSeconds = 420.0;  // first 7 minutes

struct SignalSample {
  double timestamp_s = 0.0;  // seconds from session start, >= 0
  double value = 0.0;        // sensor units, finite

  bool operator==(const SignalSample&) const = default;
};

struct RecordingSession {
  std::string participant_id;
  std::vector<SignalSample> gsr;  // strictly increasing timestamps
  std::vector<SignalSample> hr;
  double duration_s = 0.0;  // >= max timestamp

  const std::vector<SignalSample>& channel(Channel c) const {
    return c == Channel::GSR ? gsr : hr;
  }
  bool operator==(const RecordingSession&) const = default;
};

struct Warning {
  std::string participant_id;
  std::string message;
};

struct EffectPlanting {
  Trait trait = Trait::Ex;
  std::string feature;  // one of the 12 canonical feature names
  double effect_size = 0.0;
};

struct SynthSpec {
  int n_participants = 0;  // >= 4
  std::uint64_t seed = 0;
  std::vector<EffectPlanting> effect_map;
  double noise_sd = 1.0;  // > 0
};

// Header: participant_id,channel,timestamp_s,value. One session per
// participant, channels sorted by timestamp, sessions sorted by id.
// duration_s is the last timestamp seen on either channel.
std::vector<RecordingSession> parse_signals(std::istream& in);
std::vector<RecordingSession> parse_signals(const std::string& text);

void serialize_signals(const std::vector<RecordingSession>& sessions, std::ostream& out);
std::string serialize_signals(const std::vector<RecordingSession>& sessions);

std::vector<Warning> validate_session(const RecordingSession& session);

struct SynthCohort {
  std::vector<RecordingSession> sessions;            // sorted by participant_id
  std::map<std::string, TraitScores> trait_scores;   // ground truth per participant
};

// Deterministic test-fixture cohort: nominal-rate signals over the full
// analysis window with Gaussian noise; planted effects scale the generating
// spread of the named feature for participants whose generated trait score
// falls strictly above the cohort median.
SynthCohort generate_synthetic_cohort(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json synth_spec_to_json(const SynthSpec& spec);

}  // namespace traitkit::signals
