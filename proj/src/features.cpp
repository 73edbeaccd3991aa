#include "traitkit/features.hpp"

#include <algorithm>
#include <cmath>

#include "traitkit/csv.hpp"
#include "traitkit/error.hpp"

namespace traitkit::features {

int feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    if (name == kFeatureNames[i]) return static_cast<int>(i);
  }
  throw DataError("unknown feature name '" + std::string(name) + "'");
}

const FeatureVector& CohortFeatureTable::row_for(const std::string& participant_id) const {
  const auto it = std::lower_bound(participant_ids.begin(), participant_ids.end(),
                                   participant_id);
  if (it == participant_ids.end() || *it != participant_id) {
    throw DataError("no feature row for participant '" + participant_id + "'");
  }
  return rows[static_cast<std::size_t>(it - participant_ids.begin())];
}

double percentile_linear(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty list");
  if (sorted.size() == 1) return sorted[0];
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::array<std::vector<double>, 3> segment(const signals::RecordingSession& session,
                                           signals::Channel channel) {
  if (session.duration_s < signals::kSessionSeconds) {
    throw DataError("session '" + session.participant_id + "': duration " +
                    fmt_double(session.duration_s) + " s is below the required " +
                    fmt_double(signals::kSessionSeconds) + " s");
  }
  std::array<std::vector<double>, 3> segments;
  for (const auto& sample : session.channel(channel)) {
    if (sample.timestamp_s >= signals::kSessionSeconds) continue;
    const int k = static_cast<int>(sample.timestamp_s / 140.0);
    segments[static_cast<std::size_t>(std::min(k, 2))].push_back(sample.value);
  }
  for (int k = 0; k < 3; ++k) {
    if (segments[static_cast<std::size_t>(k)].size() < 4) {
      throw DataError("session '" + session.participant_id + "': " +
                      std::string(to_string(channel)) + " segment " + std::to_string(k + 1) +
                      " has only " +
                      std::to_string(segments[static_cast<std::size_t>(k)].size()) +
                      " samples (need >= 4)");
    }
  }
  return segments;
}

std::vector<double> trim_percentiles(const std::vector<double>& xs) {
  if (xs.size() < 4) throw std::invalid_argument("trim_percentiles: need at least 4 values");
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const double p10 = percentile_linear(sorted, 0.10);
  const double p90 = percentile_linear(sorted, 0.90);
  std::vector<double> kept;
  kept.reserve(xs.size());
  for (double v : xs) {
    if (v >= p10 && v <= p90) kept.push_back(v);
  }
  if (kept.size() < 2) {
    throw DataError("trim_percentiles: fewer than 2 values survive the [P10, P90] trim");
  }
  return kept;
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw DataError("variance: need at least 2 values");
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

double delta_ratio(double v_early, double v_late) {
  if (v_early == 0.0) {
    throw DataError("delta_ratio: zero early-segment variance (degenerate denominator)");
  }
  return (v_late - v_early) / v_early;
}

SegmentVariances raw_segment_variances(const signals::RecordingSession& session) {
  SegmentVariances out;
  for (signals::Channel c : {signals::Channel::GSR, signals::Channel::HR}) {
    const auto segments = segment(session, c);
    for (int k = 0; k < 3; ++k) {
      const double var = sample_variance(trim_percentiles(segments[static_cast<std::size_t>(k)]));
      if (c == signals::Channel::GSR) {
        out.gsr_var[static_cast<std::size_t>(k)] = var;
      } else {
        out.hr_var[static_cast<std::size_t>(k)] = var;
      }
    }
  }
  return out;
}

namespace {

// Raw variances in column order gsr1,hr1,gsr2,hr2,gsr3,hr3.
std::array<double, 6> variance_columns(const SegmentVariances& sv) {
  return {sv.gsr_var[0], sv.hr_var[0], sv.gsr_var[1],
          sv.hr_var[1],  sv.gsr_var[2], sv.hr_var[2]};
}

std::array<double, 6> delta_columns(const SegmentVariances& sv) {
  return {delta_ratio(sv.gsr_var[0], sv.gsr_var[1]),
          delta_ratio(sv.gsr_var[1], sv.gsr_var[2]),
          delta_ratio(sv.gsr_var[0], sv.gsr_var[2]),
          delta_ratio(sv.hr_var[0], sv.hr_var[1]),
          delta_ratio(sv.hr_var[1], sv.hr_var[2]),
          delta_ratio(sv.hr_var[0], sv.hr_var[2])};
}

}  // namespace

CohortFeatureTable zscore_columns(const std::map<std::string, SegmentVariances>& raw) {
  if (raw.size() < 2) {
    throw DataError("z-score normalization needs at least 2 participants");
  }
  const std::size_t n = raw.size();

  CohortFeatureTable table;
  table.participant_ids.reserve(n);
  std::vector<std::array<double, 6>> variances;
  variances.reserve(n);
  std::vector<std::array<double, 6>> deltas;
  deltas.reserve(n);
  for (const auto& [pid, sv] : raw) {
    table.participant_ids.push_back(pid);
    variances.push_back(variance_columns(sv));
    try {
      deltas.push_back(delta_columns(sv));
    } catch (const DataError& e) {
      throw DataError("participant " + pid + ": " + e.what());
    }
  }

  for (std::size_t col = 0; col < 6; ++col) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += variances[r][col];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double c = variances[r][col] - mean;
      ss += c * c;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) {
      throw DataError(std::string("z-score: variance column '") + kFeatureNames[col] +
                      "' is constant across the cohort");
    }
    table.normalization.mean[col] = mean;
    table.normalization.sd[col] = sd;
  }

  table.rows.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t col = 0; col < 6; ++col) {
      table.rows[r].values[col] =
          (variances[r][col] - table.normalization.mean[col]) / table.normalization.sd[col];
    }
    for (std::size_t col = 0; col < 6; ++col) {
      table.rows[r].values[6 + col] = deltas[r][col];
    }
  }
  return table;
}

CohortFeatureTable extract_features(const std::vector<signals::RecordingSession>& sessions) {
  std::map<std::string, SegmentVariances> raw;
  for (const auto& session : sessions) {
    if (raw.count(session.participant_id) != 0) {
      throw DataError("duplicate participant '" + session.participant_id + "'");
    }
    try {
      raw[session.participant_id] = raw_segment_variances(session);
    } catch (const DataError& e) {
      throw DataError("participant " + session.participant_id + ": " + e.what());
    }
  }
  return zscore_columns(raw);
}

FeatureVector apply_normalization(const SegmentVariances& raw,
                                  const NormalizationStats& stats) {
  FeatureVector fv;
  const auto vars = variance_columns(raw);
  for (std::size_t col = 0; col < 6; ++col) {
    if (stats.sd[col] == 0.0) {
      throw DataError("normalization stats: zero sd in column " + std::to_string(col));
    }
    fv.values[col] = (vars[col] - stats.mean[col]) / stats.sd[col];
  }
  const auto d = delta_columns(raw);
  for (std::size_t col = 0; col < 6; ++col) fv.values[6 + col] = d[col];
  return fv;
}

namespace {

std::string feature_csv_header() {
  std::string header = "participant_id";
  for (const char* name : kFeatureNames) {
    header += ',';
    header += name;
  }
  return header;
}

}  // namespace

void write_feature_csv(const CohortFeatureTable& table, std::ostream& out) {
  out << feature_csv_header() << '\n';
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << table.participant_ids[r];
    for (double v : table.rows[r].values) out << ',' << fmt_double(v);
    out << '\n';
  }
}

CohortFeatureTable read_feature_csv(std::istream& in) {
  const auto lines = csv::read_lines(in);
  if (lines.empty()) throw DataError("feature CSV: missing header");
  csv::require_header(lines[0], feature_csv_header(), "feature CSV");
  CohortFeatureTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 13) {
      throw DataError("feature CSV line " + std::to_string(i + 1) + ": expected 13 fields");
    }
    FeatureVector fv;
    for (std::size_t col = 0; col < 12; ++col) {
      fv.values[col] = parse_double(f[col + 1], kFeatureNames[col], i + 1);
    }
    table.participant_ids.push_back(f[0]);
    table.rows.push_back(fv);
  }
  if (!std::is_sorted(table.participant_ids.begin(), table.participant_ids.end())) {
    throw DataError("feature CSV: participant ids must be sorted ascending");
  }
  return table;
}

nlohmann::ordered_json normalization_to_json(const NormalizationStats& stats) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  nlohmann::ordered_json cols;
  for (std::size_t i = 0; i < 6; ++i) {
    nlohmann::ordered_json c;
    c["mean"] = stats.mean[i];
    c["sd"] = stats.sd[i];
    cols[kFeatureNames[i]] = std::move(c);
  }
  j["columns"] = std::move(cols);
  return j;
}

NormalizationStats normalization_from_json(const nlohmann::json& j) {
  NormalizationStats stats;
  try {
    const auto& cols = j.at("columns");
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& c = cols.at(kFeatureNames[i]);
      stats.mean[i] = c.at("mean").get<double>();
      stats.sd[i] = c.at("sd").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("normalization JSON: ") + e.what());
  }
  return stats;
}

}  // namespace traitkit::features
