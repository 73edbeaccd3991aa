#include "traitkit/signals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "traitkit/csv.hpp"
#include "traitkit/error.hpp"
#include "traitkit/features.hpp"
#include "traitkit/ipip.hpp"
#include "traitkit/rng.hpp"

namespace traitkit::signals {

namespace {

constexpr const char* kHeader = "participant_id,channel,timestamp_s,value";

// Seed-stream tags; one per independent purpose.
constexpr std::uint64_t kTraitStream = 1;
constexpr std::uint64_t kSignalStream = 2;

}  // namespace

std::vector<RecordingSession> parse_signals(std::istream& in) {
  const auto lines = csv::read_lines(in);
  if (lines.empty()) throw DataError("signals CSV: missing header");
  csv::require_header(lines[0], kHeader, "signals CSV");

  std::map<std::string, RecordingSession> by_id;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line_no = i + 1;
    const auto fields = csv::split_fields(lines[i]);
    if (fields.size() != 4) {
      throw DataError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                      std::to_string(fields.size()));
    }
    const std::string& pid = fields[0];
    if (pid.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty participant_id");
    }
    Channel channel;
    if (fields[1] == "GSR") {
      channel = Channel::GSR;
    } else if (fields[1] == "HR") {
      channel = Channel::HR;
    } else {
      throw DataError("line " + std::to_string(line_no) + ": unknown channel '" +
                      fields[1] + "'");
    }
    const double t = parse_double(fields[2], "timestamp_s", line_no);
    const double v = parse_double(fields[3], "value", line_no);
    if (!std::isfinite(t) || t < 0.0) {
      throw DataError("line " + std::to_string(line_no) + ": timestamp_s must be finite and >= 0");
    }
    if (!std::isfinite(v)) {
      throw DataError("line " + std::to_string(line_no) + ": non-finite value");
    }
    auto& session = by_id[pid];
    session.participant_id = pid;
    auto& samples = (channel == Channel::GSR) ? session.gsr : session.hr;
    samples.push_back({t, v});
  }

  std::vector<RecordingSession> sessions;
  sessions.reserve(by_id.size());
  for (auto& [pid, session] : by_id) {
    for (Channel c : {Channel::GSR, Channel::HR}) {
      auto& samples = (c == Channel::GSR) ? session.gsr : session.hr;
      std::stable_sort(samples.begin(), samples.end(),
                       [](const SignalSample& a, const SignalSample& b) {
                         return a.timestamp_s < b.timestamp_s;
                       });
      for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].timestamp_s == samples[i - 1].timestamp_s) {
          throw DataError("participant " + pid + ": duplicate " +
                          std::string(to_string(c)) + " timestamp " +
                          fmt_double(samples[i].timestamp_s));
        }
      }
      if (!samples.empty()) {
        session.duration_s = std::max(session.duration_s, samples.back().timestamp_s);
      }
    }
    sessions.push_back(std::move(session));
  }
  return sessions;
}

std::vector<RecordingSession> parse_signals(const std::string& text) {
  std::istringstream in(text);
  return parse_signals(in);
}

void serialize_signals(const std::vector<RecordingSession>& sessions, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& s : sessions) {
    for (Channel c : {Channel::GSR, Channel::HR}) {
      for (const auto& sample : s.channel(c)) {
        out << s.participant_id << ',' << to_string(c) << ',' << fmt_double(sample.timestamp_s)
            << ',' << fmt_double(sample.value) << '\n';
      }
    }
  }
}

std::string serialize_signals(const std::vector<RecordingSession>& sessions) {
  std::ostringstream out;
  serialize_signals(sessions, out);
  return out.str();
}

std::vector<Warning> validate_session(const RecordingSession& session) {
  std::vector<Warning> warnings;
  auto warn = [&](std::string msg) {
    warnings.push_back({session.participant_id, std::move(msg)});
  };

  if (session.duration_s < kSessionSeconds) {
    warn("short duration: " + fmt_double(session.duration_s) + " s < " +
         fmt_double(kSessionSeconds) + " s");
  }
  for (Channel c : {Channel::GSR, Channel::HR}) {
    const auto& samples = session.channel(c);
    const double nominal = (c == Channel::GSR) ? kGsrRate : kHrRate;
    const double realized = (session.duration_s > 0.0)
                                ? static_cast<double>(samples.size()) / session.duration_s
                                : 0.0;
    if (std::fabs(realized - nominal) > 0.5 * nominal) {
      warn(std::string(to_string(c)) + " rate deviation: realized " + fmt_double(realized) +
           "/s vs nominal " + fmt_double(nominal) + "/s");
    }
    for (int seg = 0; seg < 3; ++seg) {
      const double lo = 140.0 * seg;
      const double hi = 140.0 * (seg + 1);
      std::size_t count = 0;
      for (const auto& sample : samples) {
        if (sample.timestamp_s >= lo && sample.timestamp_s < hi) ++count;
      }
      if (count < 10) {
        warn(std::string(to_string(c)) + " segment " + std::to_string(seg + 1) +
             " window has only " + std::to_string(count) + " samples");
      }
    }
  }
  return warnings;
}

namespace {

void validate_spec(const SynthSpec& spec) {
  if (spec.n_participants < 4) throw DataError("synth spec: n_participants must be >= 4");
  if (!(spec.noise_sd > 0.0)) throw DataError("synth spec: noise_sd must be > 0");
  for (const auto& e : spec.effect_map) {
    features::feature_index(e.feature);  // throws on unknown names
    if (!std::isfinite(e.effect_size)) throw DataError("synth spec: non-finite effect_size");
    if (1.0 + 0.5 * e.effect_size <= 0.05) {
      throw DataError("synth spec: effect_size " + fmt_double(e.effect_size) +
                      " collapses the generating spread");
    }
  }
}

std::string participant_name(int index, int total) {
  int width = 1;
  for (int v = total; v >= 10; v /= 10) ++width;
  width = std::max(width, 3);
  std::string digits = std::to_string(index + 1);
  return "p" + std::string(width - digits.size(), '0') + digits;
}

// Which (channel, segment) spread parameter generates each feature. Deltas
// are driven by scaling the later segment of their pair.
struct ParamTarget {
  Channel channel;
  int segment;  // 0..2
};

ParamTarget feature_target(const std::string& name) {
  const int idx = features::feature_index(name);
  switch (idx) {
    case 0: return {Channel::GSR, 0};   // gsr1_var
    case 1: return {Channel::HR, 0};    // hr1_var
    case 2: return {Channel::GSR, 1};   // gsr2_var
    case 3: return {Channel::HR, 1};    // hr2_var
    case 4: return {Channel::GSR, 2};   // gsr3_var
    case 5: return {Channel::HR, 2};    // hr3_var
    case 6: return {Channel::GSR, 1};   // delta_gsr12
    case 7: return {Channel::GSR, 2};   // delta_gsr23
    case 8: return {Channel::GSR, 2};   // delta_gsr13
    case 9: return {Channel::HR, 1};    // delta_hr12
    case 10: return {Channel::HR, 2};   // delta_hr23
    default: return {Channel::HR, 2};   // delta_hr13
  }
}

}  // namespace

SynthCohort generate_synthetic_cohort(const SynthSpec& spec) {
  validate_spec(spec);
  const int n = spec.n_participants;

  SynthCohort cohort;
  std::vector<std::string> ids(n);
  std::vector<TraitScores> scores(n);
  for (int i = 0; i < n; ++i) {
    ids[i] = participant_name(i, n);
    Rng rng(mix_seed(spec.seed, kTraitStream, static_cast<std::uint64_t>(i)));
    for (Trait t : kAllTraits) {
      scores[i][t] = 10 + static_cast<int>(rng.below(41));
    }
    cohort.trait_scores[ids[i]] = scores[i];
  }

  // Median split of the generated scores decides who carries each planting.
  const auto labels = ipip::median_split(cohort.trait_scores);

  const double base_value[2] = {300.0, 75.0};  // GSR, HR sensor-unit baselines
  const double base_scale[2] = {20.0, 5.0};

  cohort.sessions.reserve(n);
  for (int i = 0; i < n; ++i) {
    double mult[2][3] = {{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
    for (const auto& effect : spec.effect_map) {
      if (labels.at(ids[i])[effect.trait] == Label::H) {
        const ParamTarget target = feature_target(effect.feature);
        mult[static_cast<int>(target.channel)][target.segment] *=
            1.0 + 0.5 * effect.effect_size;
      }
    }

    RecordingSession session;
    session.participant_id = ids[i];
    session.duration_s = kSessionSeconds;
    for (Channel c : {Channel::GSR, Channel::HR}) {
      const int ci = static_cast<int>(c);
      const double rate = (c == Channel::GSR) ? kGsrRate : kHrRate;
      Rng rng(mix_seed(spec.seed, kSignalStream, static_cast<std::uint64_t>(i),
                       static_cast<std::uint64_t>(ci)));
      auto& samples = (c == Channel::GSR) ? session.gsr : session.hr;
      const auto last = static_cast<long>(std::floor(kSessionSeconds * rate));
      samples.reserve(last + 1);
      for (long k = 0; k <= last; ++k) {
        const double t = static_cast<double>(k) / rate;
        const int seg = std::min(2, static_cast<int>(t / 140.0));
        const double sd = spec.noise_sd * base_scale[ci] * mult[ci][seg];
        samples.push_back({t, base_value[ci] + sd * rng.next_normal()});
      }
    }
    cohort.sessions.push_back(std::move(session));
  }
  return cohort;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec spec;
  try {
    spec.n_participants = j.at("n_participants").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.noise_sd = j.value("noise_sd", 1.0);
    if (j.contains("effect_map")) {
      for (const auto& e : j.at("effect_map")) {
        EffectPlanting p;
        p.trait = trait_from_string(e.at("trait").get<std::string>());
        p.feature = e.at("feature").get<std::string>();
        p.effect_size = e.at("effect_size").get<double>();
        spec.effect_map.push_back(std::move(p));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("synth spec JSON: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

nlohmann::ordered_json synth_spec_to_json(const SynthSpec& spec) {
  nlohmann::ordered_json j;
  j["n_participants"] = spec.n_participants;
  j["seed"] = spec.seed;
  j["noise_sd"] = spec.noise_sd;
  j["effect_map"] = nlohmann::ordered_json::array();
  for (const auto& e : spec.effect_map) {
    nlohmann::ordered_json je;
    je["trait"] = to_string(e.trait);
    je["feature"] = e.feature;
    je["effect_size"] = e.effect_size;
    j["effect_map"].push_back(std::move(je));
  }
  return j;
}

}  // namespace traitkit::signals
