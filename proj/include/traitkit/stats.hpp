#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace traitkit::stats {

struct Descriptives {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample sd, divisor n-1
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::optional<double> skew;  // type-3; absent for n < 3 or zero spread
};

// n, mean, sample sd, median, min, max and type-3 skewness
// g1 * ((n-1)/n)^{3/2} with g1 = m3 / m2^{3/2} (central moments, divisor n).
Descriptives describe(const std::vector<double>& xs);

enum class TestKind { ShapiroWilk, StudentT, MannWhitneyU };

struct TestResult {
  TestKind kind = TestKind::StudentT;
  double statistic = 0.0;
  std::optional<double> df;
  double p_value = 1.0;
  std::optional<double> effect_estimate;  // mean difference or Hodges-Lehmann
  std::optional<double> se;
  std::optional<std::pair<double, double>> ci95;
  // Exact Mann-Whitney path: the two-sided p as an unreduced rational.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> exact_p_ratio;
  std::string method;
};

// Shapiro-Wilk W and p via Royston's AS R94 approximation (uncensored).
// Requires 3 <= n <= 5000 and a non-zero range.
TestResult shapiro_wilk(const std::vector<double>& xs);

// Pooled-variance two-sample t from summary statistics; df = n1 + n2 - 2.
TestResult pooled_t_from_summary(std::size_t n1, double mean1, double sd1,
                                 std::size_t n2, double mean2, double sd2);

// Sample version; algebraically identical to the summary form.
TestResult t_test(const std::vector<double>& xs, const std::vector<double>& ys);

// U statistic reported as min(U1, U2); exact two-sided p when n1 + n2 <= 20
// and there are no ties, otherwise a tie-corrected, continuity-corrected
// normal approximation. Effect estimate is the Hodges-Lehmann median of
// pairwise differences with a CI from the ordered differences.
TestResult mann_whitney_u(const std::vector<double>& xs, const std::vector<double>& ys);

// --- distribution kernels (used by the tests as well) -----------------------

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
double student_t_quantile(double p, double df);
double normal_cdf(double z);
// Wichura's AS 241 (PPND16) inverse normal.
double normal_quantile(double p);
// Null U distribution counts for group sizes (m, n): counts[u], u in [0, m*n].
std::vector<std::uint64_t> mann_whitney_null_counts(std::size_t m, std::size_t n);

// --- learning-gain evaluation ------------------------------------------------

enum class Group { Experiment, Control };

inline constexpr const char* to_string(Group g) {
  return g == Group::Experiment ? "Experiment" : "Control";
}

struct LearningOutcome {
  std::string participant_id;
  Group group = Group::Experiment;
  double before = 0.0;  // must be > 0
  double after = 0.0;
  double delta = 0.0;  // (after - before) / before
};

LearningOutcome make_outcome(std::string participant_id, Group group, double before,
                             double after);

enum class NormalityScope { Pooled, PerGroup };

struct GroupComparison {
  Descriptives experiment;  // of deltas
  Descriptives control;
  TestResult normality;  // pooled deltas unless PerGroup
  std::optional<TestResult> normality_experiment;
  std::optional<TestResult> normality_control;
  TestResult student_t;
  TestResult mann_whitney;
};

GroupComparison compare_groups(const std::vector<LearningOutcome>& outcomes,
                               NormalityScope scope = NormalityScope::Pooled);

// CSV header: participant_id,group,before,after
std::vector<LearningOutcome> read_outcomes_csv(std::istream& in);

std::string render_report(const GroupComparison& cmp);
nlohmann::ordered_json report_to_json(const GroupComparison& cmp);

}  // namespace traitkit::stats
