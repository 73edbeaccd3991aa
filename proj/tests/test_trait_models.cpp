#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>

#include "doctest.h"
#include "traitkit/error.hpp"
#include "traitkit/features.hpp"
#include "traitkit/ipip.hpp"
#include "traitkit/manifest.hpp"
#include "traitkit/rng.hpp"
#include "traitkit/signals.hpp"
#include "traitkit/trait_models.hpp"

using namespace traitkit;
using namespace traitkit::models;

namespace {

// Single-leaf forest that always votes the given class.
forest::ForestModel constant_model(const std::vector<std::string>& feature_names,
                                   Label vote) {
  forest::ForestModel m;
  m.feature_names = feature_names;
  for (const auto& name : feature_names) {
    if (name.find("_class") != std::string::npos) {
      m.kinds.push_back(forest::FeatureKind::Categorical);
      m.level_names.push_back({"H", "L"});
    } else {
      m.kinds.push_back(forest::FeatureKind::Numeric);
      m.level_names.emplace_back();
    }
  }
  m.class_levels = {"H", "L"};
  forest::Tree t;
  forest::TreeNode leaf;
  leaf.counts = (vote == Label::H) ? std::array<std::int32_t, 2>{1, 0}
                                   : std::array<std::int32_t, 2>{0, 1};
  t.nodes.push_back(leaf);
  t.inbag.assign(4, 1);
  m.trees.push_back(t);
  return m;
}

// Ag model that echoes the Ex_class input.
forest::ForestModel echo_ex_model() {
  forest::ForestModel m;
  m.feature_names = {"Ex_class", "Co_class", "hr2_var"};
  m.kinds = {forest::FeatureKind::Categorical, forest::FeatureKind::Categorical,
             forest::FeatureKind::Numeric};
  m.level_names = {{"H", "L"}, {"H", "L"}, {}};
  m.class_levels = {"H", "L"};
  forest::Tree t;
  forest::TreeNode root;
  root.feature = 0;
  root.left_levels = 1u;  // H code 0 goes left
  root.left = 1;
  root.right = 2;
  root.counts = {1, 1};
  forest::TreeNode h_leaf;
  h_leaf.counts = {1, 0};
  forest::TreeNode l_leaf;
  l_leaf.counts = {0, 1};
  t.nodes = {root, h_leaf, l_leaf};
  t.inbag.assign(4, 1);
  m.trees.push_back(t);
  return m;
}

features::FeatureVector zero_features() {
  features::FeatureVector fv;
  fv.values.fill(0.0);
  return fv;
}

struct PlantedCohort {
  features::CohortFeatureTable table;
  std::map<std::string, TraitLabels> labels;
};

PlantedCohort planted_cohort(int n, std::uint64_t seed, double effect) {
  signals::SynthSpec spec;
  spec.n_participants = n;
  spec.seed = seed;
  if (effect != 0.0) {
    spec.effect_map.push_back({Trait::Ex, "delta_gsr12", effect});
  }
  const auto cohort = signals::generate_synthetic_cohort(spec);
  PlantedCohort out;
  out.table = features::extract_features(cohort.sessions);
  out.labels = ipip::median_split(cohort.trait_scores);
  return out;
}

}  // namespace

TEST_CASE("default model specs carry the reported per-trait inputs") {
  const auto ex = default_model_spec(Trait::Ex);
  CHECK(ex.feature_set == std::vector<std::string>{"delta_gsr12", "delta_hr12", "gsr2_var"});
  const auto co = default_model_spec(Trait::Co);
  CHECK(co.feature_set == std::vector<std::string>{"delta_gsr23", "delta_hr13", "gsr2_var"});
  const auto ag = default_model_spec(Trait::Ag);
  CHECK(ag.feature_set == std::vector<std::string>{"Ex_class", "Co_class", "hr2_var"});
  CHECK_THROWS_AS(default_model_spec(Trait::Es), DataError);
  CHECK_THROWS_AS(default_model_spec(Trait::Op), DataError);
}

TEST_CASE("a spec never includes its own class and only known features") {
  TraitModelSpec spec;
  spec.trait = Trait::Ex;
  spec.feature_set = {"Ex_class"};
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec.feature_set = {"mystery"};
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec.feature_set = {};
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec.feature_set = {"Co_class", "gsr1_var"};
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("default tendency table is the published six-row lookup") {
  const auto t = TendencyTable::default_table();
  CHECK(t.size() == 6);
  const auto lhl = t.lookup(Label::L, Label::H, Label::L);
  REQUIRE(lhl.has_value());
  CHECK(lhl->es_h_pct == 75.0);
  CHECK(lhl->op_h_pct == 75.0);
  const auto lll = t.lookup(Label::L, Label::L, Label::L);
  REQUIRE(lll.has_value());
  CHECK(lll->es_h_pct == 50.0);
  CHECK(lll->op_h_pct == 25.0);
  // The two combinations never observed.
  CHECK_FALSE(t.lookup(Label::L, Label::L, Label::H).has_value());
  CHECK_FALSE(t.lookup(Label::H, Label::H, Label::L).has_value());
}

TEST_CASE("tendency table rejects duplicates and bad percentages") {
  auto t = TendencyTable::default_table();
  CHECK_THROWS_AS(t.insert(Label::L, Label::L, Label::L, {10.0, 10.0}), DataError);
  TendencyTable fresh;
  CHECK_THROWS_AS(fresh.insert(Label::H, Label::H, Label::H, {120.0, 10.0}), DataError);

  const auto j = TendencyTable::default_table().to_json();
  const auto back = TendencyTable::from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.size() == 6);
  CHECK(back.to_json().dump() == j.dump());
}

TEST_CASE("predict_all_traits composes models and the tendency lookup") {
  const auto tendency = TendencyTable::default_table();
  const auto fv = zero_features();

  SUBCASE("(H, L, H) row maps Es and Op to H at full confidence") {
    const auto profile = predict_all_traits(
        constant_model({"delta_gsr12", "delta_hr12", "gsr2_var"}, Label::H),
        constant_model({"delta_gsr23", "delta_hr13", "gsr2_var"}, Label::L),
        constant_model({"Ex_class", "Co_class", "hr2_var"}, Label::H), tendency, fv);
    CHECK(profile[Trait::Ex].label == PredictedLabel::H);
    CHECK(profile[Trait::Co].label == PredictedLabel::L);
    CHECK(profile[Trait::Ag].label == PredictedLabel::H);
    CHECK(profile[Trait::Es].label == PredictedLabel::H);
    CHECK(profile[Trait::Es].confidence == doctest::Approx(1.0));
    CHECK(profile[Trait::Op].label == PredictedLabel::H);
    CHECK(profile[Trait::Op].confidence == doctest::Approx(1.0));
    CHECK(profile[Trait::Es].source == "tendency");
  }

  SUBCASE("(L, L, L) leaves Es unknown at the 50/50 row and Op at L") {
    const auto profile = predict_all_traits(
        constant_model({"delta_gsr12"}, Label::L), constant_model({"delta_gsr23"}, Label::L),
        constant_model({"hr2_var"}, Label::L), tendency, fv);
    CHECK(profile[Trait::Es].label == PredictedLabel::Unknown);
    CHECK(profile[Trait::Es].confidence == doctest::Approx(0.5));
    CHECK(profile[Trait::Op].label == PredictedLabel::L);
    CHECK(profile[Trait::Op].confidence == doctest::Approx(0.75));
  }

  SUBCASE("(H, H, L) is absent from the table; Es and Op are unknown") {
    const auto profile = predict_all_traits(
        constant_model({"delta_gsr12"}, Label::H), constant_model({"delta_gsr23"}, Label::H),
        constant_model({"hr2_var"}, Label::L), tendency, fv);
    CHECK(profile[Trait::Es].label == PredictedLabel::Unknown);
    CHECK(profile[Trait::Op].label == PredictedLabel::Unknown);
    CHECK(profile[Trait::Es].source.find("no observed row") != std::string::npos);
  }
}

TEST_CASE("Ag stacks on predicted classes unless ground truth is provided") {
  const auto tendency = TendencyTable::default_table();
  const auto fv = zero_features();
  const auto ex_h = constant_model({"delta_gsr12"}, Label::H);
  const auto co_l = constant_model({"delta_gsr23"}, Label::L);

  const auto stacked = predict_all_traits(ex_h, co_l, echo_ex_model(), tendency, fv);
  CHECK(stacked[Trait::Ag].label == PredictedLabel::H);  // echoes predicted Ex = H
  CHECK(stacked[Trait::Ag].source.find("stacked") != std::string::npos);

  const auto provided = predict_all_traits(ex_h, co_l, echo_ex_model(), tendency, fv,
                                           std::make_pair(Label::L, Label::L));
  CHECK(provided[Trait::Ag].label == PredictedLabel::L);  // echoes provided Ex = L
  CHECK(provided[Trait::Ag].source.find("provided") != std::string::npos);
}

TEST_CASE("strategy maps resolve by first match with a required default") {
  StrategyMap empty;
  empty.default_strategy = "strategic";
  TraitLabels labels;
  labels[Trait::Co] = Label::H;
  CHECK(recommend_strategy(labels, empty) == "strategic");

  StrategyMap map;
  map.default_strategy = "surface";
  StrategyRule deep_rule;
  deep_rule.require[Trait::Co] = Label::H;
  deep_rule.strategy = "deep";
  StrategyRule shadowed;
  shadowed.require[Trait::Co] = Label::H;
  shadowed.strategy = "surface";
  map.rules = {deep_rule, shadowed};
  CHECK(recommend_strategy(labels, map) == "deep");  // earlier rule wins
  labels[Trait::Co] = Label::L;
  CHECK(recommend_strategy(labels, map) == "surface");

  StrategyMap bad;
  CHECK_THROWS_AS(recommend_strategy(labels, bad), DataError);
  bad.default_strategy = "osmosis";
  CHECK_THROWS_AS(recommend_strategy(labels, bad), DataError);

  const auto j = map.to_json();
  const auto back = StrategyMap::from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.rules.size() == 2);
  CHECK(back.default_strategy == "surface");
  CHECK(recommend_strategy(labels, back) == "surface");
}

TEST_CASE("build_dataset wires class features from ground-truth labels") {
  const auto cohort = planted_cohort(8, 31, 0.0);
  const auto data = build_dataset(cohort.table, cohort.labels, default_model_spec(Trait::Ag));
  REQUIRE(data.feature_names.size() == 3);
  CHECK(data.kinds[0] == forest::FeatureKind::Categorical);
  CHECK(data.kinds[1] == forest::FeatureKind::Categorical);
  CHECK(data.kinds[2] == forest::FeatureKind::Numeric);
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    const auto& pid = cohort.table.participant_ids[r];
    const double expected = cohort.labels.at(pid)[Trait::Ex] == Label::H ? 0.0 : 1.0;
    CHECK(data.columns[0][r] == expected);
    const double lbl = cohort.labels.at(pid)[Trait::Ag] == Label::H ? 0 : 1;
    CHECK(data.labels[r] == static_cast<int>(lbl));
  }

  auto missing = cohort.labels;
  missing.erase(missing.begin());
  CHECK_THROWS_AS(build_dataset(cohort.table, missing, default_model_spec(Trait::Ag)),
                  DataError);
}

TEST_CASE("planted Ex signal trains a usable fixed-feature model") {
  const auto cohort = planted_cohort(60, 2718, 1.5);
  forest::ForestConfig cfg;
  cfg.ntree = 300;
  cfg.seed = 12;
  const auto outcome =
      train_trait_model(cohort.table, cohort.labels, default_model_spec(Trait::Ex), cfg);
  REQUIRE(outcome.model.has_value());
  CHECK(outcome.features_used ==
        std::vector<std::string>{"delta_gsr12", "delta_hr12", "gsr2_var"});
  CHECK(outcome.model->oob.error <= 0.25);
  CHECK_FALSE(outcome.selection.has_value());
}

TEST_CASE("boruta mode on a pure-noise cohort yields the explicit no-model outcome") {
  const auto cohort = planted_cohort(24, 99, 0.0);
  TraitModelSpec spec;
  spec.trait = Trait::Ex;
  spec.feature_set.assign(features::kFeatureNames.begin(), features::kFeatureNames.end());
  spec.mode = TraitModelMode::BorutaSelected;
  forest::ForestConfig cfg;
  cfg.ntree = 80;
  cfg.seed = 5;
  boruta::BorutaConfig bcfg;
  bcfg.seed = 5;
  bcfg.max_runs = 30;
  bcfg.forest.ntree = 80;
  const auto outcome = train_trait_model(cohort.table, cohort.labels, spec, cfg, &bcfg);
  CHECK_FALSE(outcome.model.has_value());
  REQUIRE(outcome.selection.has_value());
  CHECK(outcome.selection->with_decision(boruta::Decision::Confirmed).empty());
  CHECK(outcome.features_used.empty());
}

TEST_CASE("persisted models recompute to their stored OOB error and importances") {
  const auto cohort = planted_cohort(40, 404, 1.5);
  forest::ForestConfig cfg;
  cfg.ntree = 120;
  cfg.seed = 9;
  const auto outcome =
      train_trait_model(cohort.table, cohort.labels, default_model_spec(Trait::Ex), cfg);
  REQUIRE(outcome.model.has_value());

  const auto dumped = forest::to_json(*outcome.model).dump();
  const auto reloaded = forest::forest_from_json(nlohmann::json::parse(dumped));
  const auto data = build_dataset(cohort.table, cohort.labels, default_model_spec(Trait::Ex));

  const auto oob = forest::compute_oob(reloaded, data);
  CHECK(oob.error == outcome.model->oob.error);
  CHECK(oob.evaluated_rows == outcome.model->oob.evaluated_rows);
  CHECK(oob.excluded_rows == outcome.model->oob.excluded_rows);

  const auto importance = forest::permutation_importance(reloaded, data);
  REQUIRE(importance.size() == outcome.model->importance.size());
  for (std::size_t f = 0; f < importance.size(); ++f) {
    CHECK(importance[f].raw_mda == outcome.model->importance[f].raw_mda);
    CHECK(importance[f].scaled_mda == outcome.model->importance[f].scaled_mda);
  }
}

TEST_CASE("bundle directory round trip with manifest verification") {
  const auto cohort = planted_cohort(30, 7, 1.2);
  forest::ForestConfig cfg;
  cfg.ntree = 60;
  cfg.seed = 3;

  ModelBundle bundle;
  for (Trait t : {Trait::Ex, Trait::Co, Trait::Ag}) {
    const auto outcome =
        train_trait_model(cohort.table, cohort.labels, default_model_spec(t), cfg);
    REQUIRE(outcome.model.has_value());
    bundle.models[t] = *outcome.model;
  }
  bundle.tendency = TendencyTable::default_table();
  bundle.normalization = cohort.table.normalization;
  StrategyMap strategies;
  strategies.default_strategy = "strategic";
  bundle.strategies = strategies;

  const auto dir = std::filesystem::temp_directory_path() / "traitkit_bundle_test";
  std::filesystem::remove_all(dir);
  bundle.save(dir);
  const auto loaded = ModelBundle::load(dir);
  CHECK(loaded.models.size() == 3);
  CHECK(loaded.tendency.size() == 6);
  CHECK(loaded.normalization == bundle.normalization);
  REQUIRE(loaded.strategies.has_value());
  CHECK(loaded.strategies->default_strategy == "strategic");
  CHECK(forest::to_json(loaded.models.at(Trait::Ex)).dump() ==
        forest::to_json([&] {
          auto m = bundle.models.at(Trait::Ex);
          m.normalization_ref = "normalization.json";
          return m;
        }()).dump());

  // A tampered file fails the manifest check.
  write_file(dir / "tendency.json", "{\"rows\": []}\n");
  CHECK_THROWS_AS(ModelBundle::load(dir), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("full profile prediction from a trained bundle recovers the planted trait") {
  const auto cohort = planted_cohort(60, 1001, 1.5);
  forest::ForestConfig cfg;
  cfg.ntree = 200;
  cfg.seed = 77;

  std::map<Trait, forest::ForestModel> trained;
  for (Trait t : {Trait::Ex, Trait::Co, Trait::Ag}) {
    const auto outcome =
        train_trait_model(cohort.table, cohort.labels, default_model_spec(t), cfg);
    REQUIRE(outcome.model.has_value());
    trained[t] = *outcome.model;
  }
  const auto tendency = TendencyTable::default_table();

  std::size_t correct = 0;
  for (std::size_t r = 0; r < cohort.table.size(); ++r) {
    const auto profile =
        predict_all_traits(trained.at(Trait::Ex), trained.at(Trait::Co),
                           trained.at(Trait::Ag), tendency, cohort.table.rows[r]);
    const auto truth = cohort.labels.at(cohort.table.participant_ids[r])[Trait::Ex];
    const auto predicted = profile[Trait::Ex].label == PredictedLabel::H ? Label::H : Label::L;
    if (predicted == truth) ++correct;
  }
  // In-sample accuracy on a strong planted signal.
  CHECK(static_cast<double>(correct) / static_cast<double>(cohort.table.size()) >= 0.75);
}
