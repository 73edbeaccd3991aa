#include "traitkit/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <thread>

#include "traitkit/error.hpp"
#include "traitkit/rng.hpp"

namespace traitkit::forest {

namespace {

constexpr std::uint64_t kBootstrapStream = 11;
constexpr std::uint64_t kPermuteStream = 13;

int resolved_mtry(const ForestConfig& config, std::size_t p) {
  if (config.mtry > 0) return config.mtry;
  return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
}

void run_over_trees(int ntree, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || ntree < 2) {
    for (int t = 0; t < ntree; ++t) body(t);
    return;
  }
  std::vector<std::thread> workers;
  std::atomic<int> next{0};
  for (int w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= ntree) return;
        body(t);
      }
    });
  }
  for (auto& worker : workers) worker.join();
}

double gini(const std::array<std::int64_t, 2>& counts) {
  const double n = static_cast<double>(counts[0] + counts[1]);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(counts[0]) / n;
  const double p1 = static_cast<double>(counts[1]) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  std::uint32_t left_levels = 0;  // non-zero marks a categorical split
  double decrease = 0.0;
};

// Grows one fully developed CART tree; rows arrive bootstrap-expanded
// (duplicates included). Nodes are processed depth-first, left child first,
// so the RNG consumption order is well defined.
class TreeGrower {
 public:
  TreeGrower(const Dataset& data, const ForestConfig& config, Rng& rng, Tree& tree)
      : data_(data),
        config_(config),
        rng_(rng),
        tree_(tree),
        mtry_(resolved_mtry(config, data.n_features())) {}

  void grow(std::vector<std::int32_t> root_rows) {
    tree_.nodes.clear();
    tree_.nodes.push_back(TreeNode{});
    std::vector<PendingNode> stack;
    stack.push_back({0, std::move(root_rows)});
    while (!stack.empty()) {
      PendingNode pending = std::move(stack.back());
      stack.pop_back();
      expand(pending.node_index, std::move(pending.rows), stack);
    }
  }

 private:
  struct PendingNode {
    std::int32_t node_index;
    std::vector<std::int32_t> rows;
  };

  void expand(std::int32_t node_index, std::vector<std::int32_t> rows,
              std::vector<PendingNode>& stack) {
    std::array<std::int64_t, 2> counts{};
    for (std::int32_t r : rows) counts[static_cast<std::size_t>(data_.labels[r])] += 1;
    tree_.nodes[static_cast<std::size_t>(node_index)].counts = {
        static_cast<std::int32_t>(counts[0]), static_cast<std::int32_t>(counts[1])};

    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool too_small = rows.size() < static_cast<std::size_t>(config_.min_node_size);
    if (pure || too_small) return;

    const SplitChoice split = best_split(rows, counts);
    if (split.feature < 0) return;

    const auto& column = data_.columns[static_cast<std::size_t>(split.feature)];
    std::vector<std::int32_t> left_rows;
    std::vector<std::int32_t> right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (std::int32_t r : rows) {
      const double value = column[r];
      const bool left = (split.left_levels != 0)
                            ? ((split.left_levels >> static_cast<std::uint32_t>(value)) & 1u)
                            : (value < split.threshold);
      (left ? left_rows : right_rows).push_back(r);
    }

    const auto left_index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    const auto right_index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    TreeNode& parent = tree_.nodes[static_cast<std::size_t>(node_index)];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left_levels = split.left_levels;
    parent.left = left_index;
    parent.right = right_index;

    // Right pushed first so the left subtree is expanded first.
    stack.push_back({right_index, std::move(right_rows)});
    stack.push_back({left_index, std::move(left_rows)});
  }

  SplitChoice best_split(const std::vector<std::int32_t>& rows,
                         const std::array<std::int64_t, 2>& counts) {
    const double parent_impurity = gini(counts);
    const double n_node = static_cast<double>(rows.size());
    SplitChoice best;
    const auto candidates =
        rng_.sample_without_replacement(data_.n_features(), static_cast<std::size_t>(mtry_));
    for (std::size_t f : candidates) {
      if (data_.kinds[f] == FeatureKind::Numeric) {
        consider_numeric(static_cast<int>(f), rows, counts, parent_impurity, n_node, best);
      } else {
        consider_categorical(static_cast<int>(f), rows, counts, parent_impurity, n_node, best);
      }
    }
    return best;
  }
  void consider_numeric(int feature, const std::vector<std::int32_t>& rows,
                        const std::array<std::int64_t, 2>& counts, double parent_impurity,
                        double n_node, SplitChoice& best) {
    const auto& column = data_.columns[static_cast<std::size_t>(feature)];
    scratch_.clear();
    scratch_.reserve(rows.size());
    for (std::int32_t r : rows) {
      scratch_.push_back({column[r], data_.labels[r]});
    }
    std::sort(scratch_.begin(), scratch_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::array<std::int64_t, 2> left{};
    std::size_t i = 0;
    while (i < scratch_.size()) {
      // Consume a run of equal values; thresholds sit between distinct runs.
      const double value = scratch_[i].first;
      while (i < scratch_.size() && scratch_[i].first == value) {
        left[static_cast<std::size_t>(scratch_[i].second)] += 1;
        ++i;
      }
      if (i == scratch_.size()) break;
      const std::array<std::int64_t, 2> right = {counts[0] - left[0], counts[1] - left[1]};
      const double n_left = static_cast<double>(left[0] + left[1]);
      const double n_right = n_node - n_left;
      const double child_impurity =
          (n_left / n_node) * gini(left) + (n_right / n_node) * gini(right);
      const double decrease = parent_impurity - child_impurity;
      if (decrease > best.decrease && decrease > 0.0) {
        best.feature = feature;
        best.threshold = (value + scratch_[i].first) / 2.0;
        best.left_levels = 0;
        best.decrease = decrease;
      }
    }
  }

  void consider_categorical(int feature, const std::vector<std::int32_t>& rows,
                            const std::array<std::int64_t, 2>& counts, double parent_impurity,
                            double n_node, SplitChoice& best) {
    const auto& column = data_.columns[static_cast<std::size_t>(feature)];
    // Only binary categoricals occur; the single bipartition puts level 0 left.
    std::array<std::int64_t, 2> left{};
    for (std::int32_t r : rows) {
      if (column[r] == 0.0) left[static_cast<std::size_t>(data_.labels[r])] += 1;
    }
    const std::array<std::int64_t, 2> right = {counts[0] - left[0], counts[1] - left[1]};
    const double n_left = static_cast<double>(left[0] + left[1]);
    const double n_right = n_node - n_left;
    if (n_left == 0.0 || n_right == 0.0) return;
    const double child_impurity =
        (n_left / n_node) * gini(left) + (n_right / n_node) * gini(right);
    const double decrease = parent_impurity - child_impurity;
    if (decrease > best.decrease && decrease > 0.0) {
      best.feature = feature;
      best.threshold = 0.0;
      best.left_levels = 1u;  // bit 0: level code 0 goes left
      best.decrease = decrease;
    }
  }

  const Dataset& data_;
  const ForestConfig& config_;
  Rng& rng_;
  Tree& tree_;
  int mtry_;
  std::vector<std::pair<double, int>> scratch_;
};

bool split_goes_left(const TreeNode& node, FeatureKind kind, double value) {
  if (kind == FeatureKind::Categorical) {
    const auto code = static_cast<std::uint32_t>(value);
    return (node.left_levels >> code) & 1u;
  }
  return value < node.threshold;
}

}  // namespace

void Dataset::validate(bool for_training) const {
  if (feature_names.size() != columns.size() || feature_names.size() != kinds.size() ||
      feature_names.size() != level_names.size()) {
    throw DataError("dataset: feature metadata arrays disagree in length");
  }
  if (class_levels.size() != 2) throw DataError("dataset: exactly two class levels required");
  if (n_rows() < 2) throw DataError("dataset: need at least 2 rows");
  for (std::size_t f = 0; f < columns.size(); ++f) {
    if (columns[f].size() != n_rows()) throw DataError("dataset: ragged column lengths");
    if (kinds[f] == FeatureKind::Categorical) {
      if (level_names[f].empty() || level_names[f].size() > 2) {
        throw DataError("dataset: categorical feature '" + feature_names[f] +
                        "' must have 1..2 levels");
      }
      for (double v : columns[f]) {
        if (v != 0.0 && v != 1.0) {
          throw DataError("dataset: categorical feature '" + feature_names[f] +
                          "' has a code outside {0, 1}");
        }
      }
    } else {
      for (double v : columns[f]) {
        if (!std::isfinite(v)) {
          throw DataError("dataset: non-finite value in feature '" + feature_names[f] + "'");
        }
      }
    }
  }
  std::array<std::size_t, 2> per_class{};
  for (int label : labels) {
    if (label != 0 && label != 1) throw DataError("dataset: label index outside {0, 1}");
    per_class[static_cast<std::size_t>(label)] += 1;
  }
  if (for_training && (per_class[0] == 0 || per_class[1] == 0)) {
    throw DataError("dataset: both classes must be present for training");
  }
}

int ForestModel::tree_predict(const Tree& tree, std::span<const double> row) const {
  const TreeNode* node = &tree.nodes[0];
  while (node->feature >= 0) {
    const auto f = static_cast<std::size_t>(node->feature);
    const double value = row[f];
    node = split_goes_left(*node, kinds[f], value)
               ? &tree.nodes[static_cast<std::size_t>(node->left)]
               : &tree.nodes[static_cast<std::size_t>(node->right)];
  }
  // Leaf vote: majority of bootstrap counts, ties toward the first level.
  return node->counts[0] >= node->counts[1] ? 0 : 1;
}

Prediction ForestModel::predict(std::span<const double> row) const {
  if (row.size() != feature_names.size()) {
    throw DataError("predict: row has " + std::to_string(row.size()) + " values, model expects " +
                    std::to_string(feature_names.size()));
  }
  for (std::size_t f = 0; f < row.size(); ++f) {
    if (std::isnan(row[f])) {
      throw DataError("predict: missing value for feature '" + feature_names[f] + "'");
    }
    if (kinds[f] == FeatureKind::Categorical && row[f] != 0.0 && row[f] != 1.0) {
      throw DataError("predict: bad level code for feature '" + feature_names[f] + "'");
    }
  }
  std::array<std::int64_t, 2> votes{};
  for (const auto& tree : trees) {
    votes[static_cast<std::size_t>(tree_predict(tree, row))] += 1;
  }
  const int first = (class_levels[0] <= class_levels[1]) ? 0 : 1;
  int winner;
  if (votes[0] == votes[1]) {
    winner = first;
  } else {
    winner = votes[0] > votes[1] ? 0 : 1;
  }
  Prediction out;
  out.class_index = winner;
  out.class_level = class_levels[static_cast<std::size_t>(winner)];
  out.vote_fraction = static_cast<double>(votes[static_cast<std::size_t>(winner)]) /
                      static_cast<double>(trees.size());
  return out;
}

namespace {

// Shared by train-time OOB and compute_oob; aggregates votes across the
// trees that kept each row out of bag.
OobSummary oob_from_votes(const ForestModel& model, const Dataset& data) {
  const std::size_t n = data.n_rows();
  std::vector<std::array<std::int64_t, 2>> votes(n, {0, 0});
  std::vector<double> row(model.feature_names.size());
  for (const auto& tree : model.trees) {
    for (std::size_t r = 0; r < n; ++r) {
      if (tree.inbag[r] != 0) continue;
      for (std::size_t f = 0; f < model.feature_names.size(); ++f) row[f] = data.columns[f][r];
      votes[r][static_cast<std::size_t>(model.tree_predict(tree, row))] += 1;
    }
  }
  const int first = (model.class_levels[0] <= model.class_levels[1]) ? 0 : 1;
  OobSummary summary;
  std::size_t wrong = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto total = votes[r][0] + votes[r][1];
    if (total == 0) {
      summary.excluded_rows += 1;
      continue;
    }
    summary.evaluated_rows += 1;
    int predicted;
    if (votes[r][0] == votes[r][1]) {
      predicted = first;
    } else {
      predicted = votes[r][0] > votes[r][1] ? 0 : 1;
    }
    if (predicted != data.labels[r]) ++wrong;
  }
  summary.error = (summary.evaluated_rows > 0)
                      ? static_cast<double>(wrong) / static_cast<double>(summary.evaluated_rows)
                      : 0.0;
  return summary;
}

// Per-tree mean decrease in OOB accuracy, then scaled by the standard error.
std::vector<FeatureImportance> importance_from_trees(const ForestModel& model,
                                                     const Dataset& data) {
  const std::size_t p = model.feature_names.size();
  const std::size_t n = data.n_rows();
  const int ntree = static_cast<int>(model.trees.size());
  std::vector<std::vector<double>> decrease(static_cast<std::size_t>(ntree),
                                            std::vector<double>(p, 0.0));

  run_over_trees(ntree, model.config.threads, [&](int t) {
    const Tree& tree = model.trees[static_cast<std::size_t>(t)];
    std::vector<std::size_t> oob_rows;
    for (std::size_t r = 0; r < n; ++r) {
      if (tree.inbag[r] == 0) oob_rows.push_back(r);
    }
    if (oob_rows.empty()) return;

    // Features actually used by this tree; permuting any other column
    // cannot change a prediction path.
    std::vector<bool> used(p, false);
    for (const auto& node : tree.nodes) {
      if (node.feature >= 0) used[static_cast<std::size_t>(node.feature)] = true;
    }

    std::vector<double> row(p);
    std::vector<int> base_pred(oob_rows.size());
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < oob_rows.size(); ++i) {
      const std::size_t r = oob_rows[i];
      for (std::size_t f = 0; f < p; ++f) row[f] = data.columns[f][r];
      base_pred[i] = model.tree_predict(tree, row);
      if (base_pred[i] == data.labels[r]) ++correct;
    }
    const double base_acc =
        static_cast<double>(correct) / static_cast<double>(oob_rows.size());

    for (std::size_t f = 0; f < p; ++f) {
      if (!used[f]) continue;  // exact zero contribution
      Rng rng(mix_seed(model.config.seed, kPermuteStream, static_cast<std::uint64_t>(t),
                       static_cast<std::uint64_t>(f)));
      std::vector<double> permuted(oob_rows.size());
      for (std::size_t i = 0; i < oob_rows.size(); ++i) {
        permuted[i] = data.columns[f][oob_rows[i]];
      }
      rng.shuffle(permuted);
      std::int64_t perm_correct = 0;
      for (std::size_t i = 0; i < oob_rows.size(); ++i) {
        const std::size_t r = oob_rows[i];
        for (std::size_t g = 0; g < p; ++g) row[g] = data.columns[g][r];
        row[f] = permuted[i];
        if (model.tree_predict(tree, row) == data.labels[r]) ++perm_correct;
      }
      const double perm_acc =
          static_cast<double>(perm_correct) / static_cast<double>(oob_rows.size());
      decrease[static_cast<std::size_t>(t)][f] = base_acc - perm_acc;
    }
  });

  std::vector<FeatureImportance> importance(p);
  for (std::size_t f = 0; f < p; ++f) {
    double sum = 0.0;
    for (int t = 0; t < ntree; ++t) sum += decrease[static_cast<std::size_t>(t)][f];
    const double mean = sum / static_cast<double>(ntree);
    double ss = 0.0;
    for (int t = 0; t < ntree; ++t) {
      const double c = decrease[static_cast<std::size_t>(t)][f] - mean;
      ss += c * c;
    }
    const double sd = (ntree > 1) ? std::sqrt(ss / static_cast<double>(ntree - 1)) : 0.0;
    importance[f].raw_mda = mean;
    importance[f].scaled_mda =
        (sd > 0.0) ? mean / (sd / std::sqrt(static_cast<double>(ntree))) : 0.0;
  }
  return importance;
}

}  // namespace

ForestModel train(const Dataset& data, const ForestConfig& config) {
  data.validate(true);
  const std::size_t p = data.n_features();
  const std::size_t n = data.n_rows();
  if (config.ntree < 1) throw DataError("forest config: ntree must be >= 1");
  if (config.mtry > static_cast<int>(p)) {
    throw DataError("forest config: mtry " + std::to_string(config.mtry) + " exceeds " +
                    std::to_string(p) + " features");
  }
  if (config.min_node_size < 1) throw DataError("forest config: min_node_size must be >= 1");

  ForestModel model;
  model.config = config;
  model.feature_names = data.feature_names;
  model.kinds = data.kinds;
  model.level_names = data.level_names;
  model.class_levels = data.class_levels;
  model.trees.resize(static_cast<std::size_t>(config.ntree));

  run_over_trees(config.ntree, config.threads, [&](int t) {
    Tree& tree = model.trees[static_cast<std::size_t>(t)];
    Rng rng(mix_seed(config.seed, kBootstrapStream, static_cast<std::uint64_t>(t)));
    tree.inbag.assign(n, 0);
    std::vector<std::int32_t> rows;
    rows.reserve(n);
    for (std::size_t draw = 0; draw < n; ++draw) {
      const auto r = static_cast<std::int32_t>(rng.below(n));
      tree.inbag[static_cast<std::size_t>(r)] += 1;
      rows.push_back(r);
    }
    TreeGrower grower(data, config, rng, tree);
    grower.grow(std::move(rows));
  });

  model.oob = oob_from_votes(model, data);
  if (config.importance) {
    model.importance = importance_from_trees(model, data);
  }
  return model;
}

OobSummary compute_oob(const ForestModel& model, const Dataset& data) {
  data.validate(false);
  if (data.n_rows() != model.trees.front().inbag.size()) {
    throw DataError("compute_oob: dataset row count does not match recorded memberships");
  }
  return oob_from_votes(model, data);
}

std::vector<FeatureImportance> permutation_importance(const ForestModel& model,
                                                      const Dataset& data) {
  if (!model.config.importance) {
    throw DataError("permutation importance was not recorded at train time");
  }
  data.validate(false);
  return importance_from_trees(model, data);
}

int tune_mtry(const Dataset& data, const ForestConfig& config, double step_factor,
              double improve) {
  if (!(step_factor > 1.0)) throw DataError("tune_mtry: step_factor must be > 1");
  if (improve < 0.0) throw DataError("tune_mtry: improve must be >= 0");
  const int p = static_cast<int>(data.n_features());
  const int start = resolved_mtry(config, static_cast<std::size_t>(p));

  std::map<int, double> error_at;
  auto evaluate = [&](int mtry) {
    const auto it = error_at.find(mtry);
    if (it != error_at.end()) return it->second;
    ForestConfig c = config;
    c.mtry = mtry;
    c.importance = false;
    const double err = train(data, c).oob.error;
    error_at[mtry] = err;
    return err;
  };

  const double start_error = evaluate(start);
  std::vector<std::pair<int, double>> visited = {{start, start_error}};

  for (int direction : {-1, +1}) {
    int current = start;
    double reference = start_error;
    for (;;) {
      const double scaled = (direction < 0) ? current / step_factor : current * step_factor;
      int next = static_cast<int>(std::llround(scaled));
      next = std::clamp(next, 1, p);
      if (next == current) break;
      const double err = evaluate(next);
      const double gain = (reference > 0.0) ? 1.0 - err / reference : 0.0;
      if (gain > improve) {
        visited.emplace_back(next, err);
        reference = err;
        current = next;
      } else {
        break;
      }
    }
  }

  int best = visited.front().first;
  double best_error = visited.front().second;
  for (const auto& [mtry, err] : visited) {
    if (err < best_error) {
      best = mtry;
      best_error = err;
    }
  }
  return best;
}

nlohmann::ordered_json to_json(const ForestModel& model) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  nlohmann::ordered_json cfg;
  cfg["ntree"] = model.config.ntree;
  cfg["mtry"] = model.config.mtry;
  cfg["min_node_size"] = model.config.min_node_size;
  cfg["seed"] = model.config.seed;
  cfg["importance"] = model.config.importance;
  j["config"] = std::move(cfg);
  j["feature_names"] = model.feature_names;
  nlohmann::ordered_json kinds = nlohmann::ordered_json::array();
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < model.kinds.size(); ++f) {
    kinds.push_back(model.kinds[f] == FeatureKind::Numeric ? "numeric" : "categorical");
    if (model.kinds[f] == FeatureKind::Categorical) {
      levels.push_back(model.level_names[f]);
    } else {
      levels.push_back(nullptr);
    }
  }
  j["feature_kinds"] = std::move(kinds);
  j["level_names"] = std::move(levels);
  j["class_levels"] = model.class_levels;
  nlohmann::ordered_json oob;
  oob["error"] = model.oob.error;
  oob["evaluated_rows"] = model.oob.evaluated_rows;
  oob["excluded_rows"] = model.oob.excluded_rows;
  j["oob"] = std::move(oob);
  if (!model.importance.empty()) {
    nlohmann::ordered_json imp = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < model.importance.size(); ++f) {
      nlohmann::ordered_json e;
      e["feature"] = model.feature_names[f];
      e["raw_mda"] = model.importance[f].raw_mda;
      e["scaled_mda"] = model.importance[f].scaled_mda;
      imp.push_back(std::move(e));
    }
    j["importance"] = std::move(imp);
  } else {
    j["importance"] = nullptr;
  }
  if (!model.normalization_ref.empty()) {
    j["normalization_ref"] = model.normalization_ref;
  } else {
    j["normalization_ref"] = nullptr;
  }
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const auto& tree : model.trees) {
    nlohmann::ordered_json jt;
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& node : tree.nodes) {
      nodes.push_back({node.feature,
                       (node.left_levels != 0) ? nlohmann::ordered_json(node.left_levels)
                                               : nlohmann::ordered_json(node.threshold),
                       node.left, node.right, node.counts[0], node.counts[1]});
    }
    jt["nodes"] = std::move(nodes);
    jt["inbag"] = tree.inbag;
    trees.push_back(std::move(jt));
  }
  j["trees"] = std::move(trees);
  return j;
}

ForestModel forest_from_json(const nlohmann::json& j) {
  ForestModel model;
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw DataError("model JSON: unsupported format_version");
    }
    const auto& cfg = j.at("config");
    model.config.ntree = cfg.at("ntree").get<int>();
    model.config.mtry = cfg.at("mtry").get<int>();
    model.config.min_node_size = cfg.at("min_node_size").get<int>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.config.importance = cfg.at("importance").get<bool>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& kind : j.at("feature_kinds")) {
      model.kinds.push_back(kind.get<std::string>() == "numeric" ? FeatureKind::Numeric
                                                                 : FeatureKind::Categorical);
    }
    for (const auto& level : j.at("level_names")) {
      if (level.is_null()) {
        model.level_names.emplace_back();
      } else {
        model.level_names.push_back(level.get<std::vector<std::string>>());
      }
    }
    model.class_levels = j.at("class_levels").get<std::vector<std::string>>();
    model.oob.error = j.at("oob").at("error").get<double>();
    model.oob.evaluated_rows = j.at("oob").at("evaluated_rows").get<std::size_t>();
    model.oob.excluded_rows = j.at("oob").at("excluded_rows").get<std::size_t>();
    if (!j.at("importance").is_null()) {
      for (const auto& e : j.at("importance")) {
        FeatureImportance fi;
        fi.raw_mda = e.at("raw_mda").get<double>();
        fi.scaled_mda = e.at("scaled_mda").get<double>();
        model.importance.push_back(fi);
      }
    }
    if (j.contains("normalization_ref") && !j.at("normalization_ref").is_null()) {
      model.normalization_ref = j.at("normalization_ref").get<std::string>();
    }
    for (const auto& jt : j.at("trees")) {
      Tree tree;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode node;
        node.feature = jn.at(0).get<std::int32_t>();
        if (node.feature >= 0 &&
            model.kinds[static_cast<std::size_t>(node.feature)] == FeatureKind::Categorical) {
          node.left_levels = jn.at(1).get<std::uint32_t>();
        } else {
          node.threshold = jn.at(1).get<double>();
        }
        node.left = jn.at(2).get<std::int32_t>();
        node.right = jn.at(3).get<std::int32_t>();
        node.counts = {jn.at(4).get<std::int32_t>(), jn.at(5).get<std::int32_t>()};
        tree.nodes.push_back(node);
      }
      tree.inbag = jt.at("inbag").get<std::vector<std::uint16_t>>();
      model.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model JSON: ") + e.what());
  }
  if (model.trees.empty()) throw DataError("model JSON: no trees");
  return model;
}

}  // namespace traitkit::forest
