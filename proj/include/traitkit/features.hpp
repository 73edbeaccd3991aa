#pragma once

#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "traitkit/signals.hpp"

namespace traitkit::features {

// Canonical model-input order; also the feature CSV column order.
inline constexpr std::array<const char*, 12> kFeatureNames = {
    "gsr1_var",    "hr1_var",     "gsr2_var",    "hr2_var",
    "gsr3_var",    "hr3_var",     "delta_gsr12", "delta_gsr23",
    "delta_gsr13", "delta_hr12",  "delta_hr23",  "delta_hr13"};

// Index into kFeatureNames; throws DataError for unknown names.
int feature_index(std::string_view name);

// Per-segment sample variances of the trimmed signal, before normalization.
struct SegmentVariances {
  std::array<double, 3> gsr_var{};
  std::array<double, 3> hr_var{};

  bool operator==(const SegmentVariances&) const = default;
};

struct FeatureVector {
  std::array<double, 12> values{};  // kFeatureNames order

  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
  bool operator==(const FeatureVector&) const = default;
};

// Cohort mean/sd used to z-score the six variance columns; kept so new
// participants can be scored against a frozen cohort.
struct NormalizationStats {
  std::array<double, 6> mean{};
  std::array<double, 6> sd{};

  bool operator==(const NormalizationStats&) const = default;
};

struct CohortFeatureTable {
  std::vector<std::string> participant_ids;  // sorted ascending
  std::vector<FeatureVector> rows;           // parallel to participant_ids
  NormalizationStats normalization;

  std::size_t size() const { return rows.size(); }
  const FeatureVector& row_for(const std::string& participant_id) const;
};

// Linear interpolation between closest ranks, p(k) = (k-1)/(n-1).
double percentile_linear(const std::vector<double>& sorted, double p);

// Segment k holds samples with timestamp in [140(k-1), 140k); anything at or
// beyond 420 s is discarded. Errors if any segment retains < 4 samples.
std::array<std::vector<double>, 3> segment(const signals::RecordingSession& session,
                                           signals::Channel channel);

// Keeps values inside the closed interval [P10, P90], preserving input order.
std::vector<double> trim_percentiles(const std::vector<double>& xs);

// Sample variance, divisor n-1, sums accumulated in index order.
double sample_variance(const std::vector<double>& xs);

// (v_late - v_early) / v_early; errors when v_early is zero.
double delta_ratio(double v_early, double v_late);

// segment -> trim -> variance for both channels of one session.
SegmentVariances raw_segment_variances(const signals::RecordingSession& session);

// z-scores the six variance columns across the cohort, carries the six delta
// ratios through unchanged, and records the normalization statistics.
CohortFeatureTable zscore_columns(const std::map<std::string, SegmentVariances>& raw);

// Full pipeline over a cohort; row order follows participant_id order and the
// output is independent of the input permutation.
CohortFeatureTable extract_features(const std::vector<signals::RecordingSession>& sessions);

// Scores one out-of-cohort recording against frozen normalization statistics.
FeatureVector apply_normalization(const SegmentVariances& raw, const NormalizationStats& stats);

// CSV with header participant_id,<12 feature columns>; stats travel as JSON.
void write_feature_csv(const CohortFeatureTable& table, std::ostream& out);
CohortFeatureTable read_feature_csv(std::istream& in);

nlohmann::ordered_json normalization_to_json(const NormalizationStats& stats);
NormalizationStats normalization_from_json(const nlohmann::json& j);

}  // namespace traitkit::features
