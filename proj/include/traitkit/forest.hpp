#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace traitkit::forest {

enum class FeatureKind { Numeric, Categorical };

// Column-major two-class training table. Categorical columns store level
// codes (at most two levels occur here: H/L trait classes).
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> kinds;                     // per feature
  std::vector<std::vector<std::string>> level_names;  // per feature; empty if numeric
  std::vector<std::vector<double>> columns;           // [feature][row]
  std::vector<int> labels;                            // index into class_levels
  std::vector<std::string> class_levels = {"H", "L"};

  std::size_t n_rows() const { return labels.size(); }
  std::size_t n_features() const { return feature_names.size(); }
  void validate(bool for_training = true) const;
};

struct ForestConfig {
  int ntree = 500;
  int mtry = 0;  // 0 -> floor(sqrt(p)), at least 1
  int min_node_size = 1;
  std::uint64_t seed = 0;
  bool importance = true;
  int threads = 1;  // execution detail only; results are thread-count independent
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // numeric split: value < threshold goes left
  std::uint32_t left_levels = 0;  // categorical split: level-code bit set -> left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::int32_t, 2> counts{};  // bootstrap class counts at the node
};

struct Tree {
  std::vector<TreeNode> nodes;        // nodes[0] is the root
  std::vector<std::uint16_t> inbag;   // bootstrap multiplicity per training row
};

struct OobSummary {
  double error = 0.0;            // misclassified / rows with >= 1 OOB vote
  std::size_t evaluated_rows = 0;
  std::size_t excluded_rows = 0;  // rows that were in-bag for every tree
};

struct FeatureImportance {
  double raw_mda = 0.0;     // mean decrease in per-tree OOB accuracy
  double scaled_mda = 0.0;  // raw / (sd over trees / sqrt(ntree)); 0 when sd is 0
};

struct Prediction {
  int class_index = 0;
  std::string class_level;
  double vote_fraction = 0.0;  // winning votes / ntree
};

struct ForestModel {
  ForestConfig config;
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> kinds;
  std::vector<std::vector<std::string>> level_names;
  std::vector<std::string> class_levels;
  std::vector<Tree> trees;
  OobSummary oob;
  std::vector<FeatureImportance> importance;  // empty when not recorded
  std::string normalization_ref;              // sidecar filename inside a bundle

  // Majority vote; ties break toward the lexicographically first class level.
  // Rows use feature_names order; NaN marks a missing value and is rejected.
  Prediction predict(std::span<const double> row) const;
  int tree_predict(const Tree& tree, std::span<const double> row) const;
};

// Bootstrap bagging of fully grown CART trees; each node takes the best
// Gini-decrease split among mtry features sampled without replacement.
// Deterministic for a fixed (dataset, config) at any thread count.
ForestModel train(const Dataset& data, const ForestConfig& config);

// Recomputed from the recorded bootstrap memberships.
OobSummary compute_oob(const ForestModel& model, const Dataset& data);

// Per tree and feature: OOB accuracy minus OOB accuracy after permuting the
// feature's OOB values. Requires importance recorded at train time.
std::vector<FeatureImportance> permutation_importance(const ForestModel& model,
                                                      const Dataset& data);

// Outward search from the default mtry; a step in either direction is kept
// only while the relative OOB-error improvement exceeds `improve`.
int tune_mtry(const Dataset& data, const ForestConfig& config, double step_factor,
              double improve);

nlohmann::ordered_json to_json(const ForestModel& model);
ForestModel forest_from_json(const nlohmann::json& j);

}  // namespace traitkit::forest
