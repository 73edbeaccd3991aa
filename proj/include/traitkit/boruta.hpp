#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "traitkit/forest.hpp"

namespace traitkit::boruta {

struct BorutaConfig {
  int max_runs = 100;
  double alpha = 0.01;  // two-sided, no multiplicity correction
  forest::ForestConfig forest;
  std::uint64_t seed = 0;
};

enum class Decision { Confirmed, Rejected, Tentative };

inline constexpr const char* to_string(Decision d) {
  switch (d) {
    case Decision::Confirmed: return "Confirmed";
    case Decision::Rejected: return "Rejected";
    case Decision::Tentative: return "Tentative";
  }
  return "?";
}

struct BorutaResult {
  std::vector<std::string> feature_names;
  std::vector<Decision> decisions;
  int iterations_run = 0;
  // Scaled importance per iteration; NaN once a feature left the design matrix.
  std::vector<std::vector<double>> importance_history;  // [iteration][feature]
  std::vector<double> shadow_max_history;               // [iteration]
  double elapsed_seconds = 0.0;

  std::vector<std::string> with_decision(Decision d) const;
};

// Shadow-feature all-relevant selection: each undecided feature gets a
// permuted shadow copy, a feature scores a hit when its scaled importance
// beats the best shadow, and accumulated hits face a two-sided binomial test
// against Binomial(iterations, 1/2) at alpha.
BorutaResult select(const forest::Dataset& data, const BorutaConfig& config);

// Optional post-pass for leftover Tentatives: confirm when the feature's
// median importance over its history beats the median of the shadow maxima.
void rough_fix(BorutaResult& result);

// Exact two-sided binomial test against p = 1/2.
double binomial_two_sided_p(int hits, int trials);

std::string render_report(const BorutaResult& result);
nlohmann::ordered_json to_json(const BorutaResult& result);

}  // namespace traitkit::boruta
