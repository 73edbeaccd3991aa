#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "traitkit/boruta.hpp"
#include "traitkit/features.hpp"
#include "traitkit/forest.hpp"
#include "traitkit/traits.hpp"

namespace traitkit::models {

enum class TraitModelMode { FixedFeatures, BorutaSelected };

struct TraitModelSpec {
  Trait trait = Trait::Ex;
  // Canonical feature names, plus other traits' "<T>_class" columns.
  std::vector<std::string> feature_set;
  TraitModelMode mode = TraitModelMode::FixedFeatures;

  void validate() const;
};

// The trait models found effective, with their reported input variables.
// Es and Op have no model; they go through the tendency table.
TraitModelSpec default_model_spec(Trait trait);

// Presence/absence of a model is an explicit outcome: selection can end with
// zero confirmed features.
struct TraitModelOutcome {
  TraitModelSpec spec_requested;
  std::vector<std::string> features_used;  // empty for the no-model outcome
  std::optional<forest::ForestModel> model;
  std::optional<boruta::BorutaResult> selection;
};

// Builds the forest training table for a spec; class-valued features come
// from the supplied ground-truth labels.
forest::Dataset build_dataset(const features::CohortFeatureTable& table,
                              const std::map<std::string, TraitLabels>& labels,
                              const TraitModelSpec& spec);

TraitModelOutcome train_trait_model(const features::CohortFeatureTable& table,
                                    const std::map<std::string, TraitLabels>& labels,
                                    const TraitModelSpec& spec,
                                    const forest::ForestConfig& forest_config,
                                    const boruta::BorutaConfig* boruta_config = nullptr);

// --- tendency lookup ---------------------------------------------------------

struct TendencyRow {
  double es_h_pct = 0.0;  // percent of observed participants with Es = H
  double op_h_pct = 0.0;
};

class TendencyTable {
 public:
  static TendencyTable default_table();
  static TendencyTable from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;

  void insert(Label ex, Label co, Label ag, TendencyRow row);
  std::optional<TendencyRow> lookup(Label ex, Label co, Label ag) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::map<std::tuple<Label, Label, Label>, TendencyRow> rows_;
};

// --- strategy mapping ----------------------------------------------------------

inline constexpr std::array<const char*, 3> kStrategies = {"deep", "surface", "strategic"};

struct StrategyRule {
  std::map<Trait, Label> require;  // conjunction over trait labels
  std::string strategy;
};

struct StrategyMap {
  std::vector<StrategyRule> rules;  // first match wins
  std::string default_strategy;     // required; keeps the map total

  void validate() const;
  static StrategyMap from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

std::string recommend_strategy(const TraitLabels& labels, const StrategyMap& map);

// --- full-profile prediction ---------------------------------------------------

enum class PredictedLabel { H, L, Unknown };

inline constexpr const char* to_string(PredictedLabel l) {
  switch (l) {
    case PredictedLabel::H: return "H";
    case PredictedLabel::L: return "L";
    case PredictedLabel::Unknown: return "Unknown";
  }
  return "?";
}

struct TraitPrediction {
  PredictedLabel label = PredictedLabel::Unknown;
  double confidence = 0.0;  // vote fraction (models) or tendency percent / 100
  std::string source;       // "model", "tendency", "tendency (no observed row)", ...
};

struct TraitProfile {
  std::array<TraitPrediction, 5> predictions;  // indexed by trait_index

  const TraitPrediction& operator[](Trait t) const { return predictions[trait_index(t)]; }
  TraitPrediction& operator[](Trait t) { return predictions[trait_index(t)]; }
};

// Ex and Co are predicted from the feature vector; Ag is stacked on the
// predicted Ex/Co classes (or on provided ground-truth classes when given);
// Es and Op come from the tendency table, H iff the observed H-percent
// exceeds 50, with a 50/50 or missing row surfacing as Unknown.
TraitProfile predict_all_traits(const forest::ForestModel& ex_model,
                                const forest::ForestModel& co_model,
                                const forest::ForestModel& ag_model,
                                const TendencyTable& tendency,
                                const features::FeatureVector& fv,
                                const std::optional<std::pair<Label, Label>>&
                                    provided_ex_co = std::nullopt);

// --- persisted bundle ----------------------------------------------------------

struct ModelBundle {
  std::map<Trait, forest::ForestModel> models;  // Ex/Co/Ag subset
  TendencyTable tendency;
  std::optional<StrategyMap> strategies;  // absent unless configured
  features::NormalizationStats normalization;
  std::map<Trait, boruta::BorutaResult> selections;

  void save(const std::filesystem::path& dir) const;
  static ModelBundle load(const std::filesystem::path& dir);
};

}  // namespace traitkit::models
