#include "traitkit/trait_models.hpp"

#include <algorithm>
#include <tuple>

#include "traitkit/error.hpp"
#include "traitkit/manifest.hpp"

namespace traitkit::models {

namespace {

// Returns the trait whose "<T>_class" column this name denotes, if any.
std::optional<Trait> class_feature_trait(const std::string& name) {
  for (Trait t : kAllTraits) {
    if (name == std::string(to_string(t)) + "_class") return t;
  }
  return std::nullopt;
}

bool is_signal_feature(const std::string& name) {
  for (const char* canon : features::kFeatureNames) {
    if (name == canon) return true;
  }
  return false;
}

}  // namespace

void TraitModelSpec::validate() const {
  if (feature_set.empty()) throw DataError("trait model spec: empty feature set");
  for (const auto& name : feature_set) {
    if (const auto t = class_feature_trait(name)) {
      if (*t == trait) {
        throw DataError("trait model spec: " + name + " cannot be an input to the " +
                        std::string(to_string(trait)) + " model");
      }
    } else if (!is_signal_feature(name)) {
      throw DataError("trait model spec: unknown feature '" + name + "'");
    }
  }
}

TraitModelSpec default_model_spec(Trait trait) {
  TraitModelSpec spec;
  spec.trait = trait;
  switch (trait) {
    case Trait::Ex:
      spec.feature_set = {"delta_gsr12", "delta_hr12", "gsr2_var"};
      break;
    case Trait::Co:
      spec.feature_set = {"delta_gsr23", "delta_hr13", "gsr2_var"};
      break;
    case Trait::Ag:
      spec.feature_set = {"Ex_class", "Co_class", "hr2_var"};
      break;
    case Trait::Es:
    case Trait::Op:
      throw DataError(std::string("no effective model for ") + to_string(trait) +
                      "; it is resolved through the tendency table");
  }
  return spec;
}

forest::Dataset build_dataset(const features::CohortFeatureTable& table,
                              const std::map<std::string, TraitLabels>& labels,
                              const TraitModelSpec& spec) {
  spec.validate();
  if (table.size() != labels.size()) {
    throw DataError("feature table has " + std::to_string(table.size()) +
                    " participants but labels cover " + std::to_string(labels.size()));
  }
  for (const auto& pid : table.participant_ids) {
    if (labels.find(pid) == labels.end()) {
      throw DataError("no labels for participant '" + pid + "'");
    }
  }

  forest::Dataset data;
  const std::size_t n = table.size();
  for (const auto& name : spec.feature_set) {
    data.feature_names.push_back(name);
    std::vector<double> column(n);
    if (const auto t = class_feature_trait(name)) {
      for (std::size_t r = 0; r < n; ++r) {
        const Label l = labels.at(table.participant_ids[r])[*t];
        column[r] = (l == Label::H) ? 0.0 : 1.0;
      }
      data.kinds.push_back(forest::FeatureKind::Categorical);
      data.level_names.push_back({"H", "L"});
    } else {
      const int idx = features::feature_index(name);
      for (std::size_t r = 0; r < n; ++r) column[r] = table.rows[r][idx];
      data.kinds.push_back(forest::FeatureKind::Numeric);
      data.level_names.emplace_back();
    }
    data.columns.push_back(std::move(column));
  }
  data.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const Label l = labels.at(table.participant_ids[r])[spec.trait];
    data.labels[r] = (l == Label::H) ? 0 : 1;
  }
  return data;
}

TraitModelOutcome train_trait_model(const features::CohortFeatureTable& table,
                                    const std::map<std::string, TraitLabels>& labels,
                                    const TraitModelSpec& spec,
                                    const forest::ForestConfig& forest_config,
                                    const boruta::BorutaConfig* boruta_config) {
  TraitModelOutcome outcome;
  outcome.spec_requested = spec;

  TraitModelSpec train_spec = spec;
  if (spec.mode == TraitModelMode::BorutaSelected) {
    boruta::BorutaConfig selection_config;
    if (boruta_config != nullptr) selection_config = *boruta_config;
    selection_config.forest.threads = forest_config.threads;
    const forest::Dataset candidates = build_dataset(table, labels, spec);
    outcome.selection = boruta::select(candidates, selection_config);

    std::vector<std::string> confirmed;
    for (std::size_t f = 0; f < outcome.selection->feature_names.size(); ++f) {
      if (outcome.selection->decisions[f] == boruta::Decision::Confirmed) {
        confirmed.push_back(outcome.selection->feature_names[f]);
      }
    }
    if (confirmed.empty()) {
      // Mirrors the Es/Op result: selection found nothing workable.
      return outcome;
    }
    train_spec.feature_set = std::move(confirmed);
  }

  const forest::Dataset data = build_dataset(table, labels, train_spec);
  outcome.features_used = train_spec.feature_set;
  outcome.model = forest::train(data, forest_config);
  return outcome;
}

// --- tendency lookup ---------------------------------------------------------

TendencyTable TendencyTable::default_table() {
  TendencyTable t;
  t.insert(Label::L, Label::L, Label::L, {50.0, 25.0});
  t.insert(Label::L, Label::H, Label::L, {75.0, 75.0});
  t.insert(Label::L, Label::H, Label::H, {67.0, 67.0});
  t.insert(Label::H, Label::L, Label::L, {25.0, 25.0});
  t.insert(Label::H, Label::L, Label::H, {100.0, 100.0});
  t.insert(Label::H, Label::H, Label::H, {29.0, 57.0});
  return t;
}

void TendencyTable::insert(Label ex, Label co, Label ag, TendencyRow row) {
  if (row.es_h_pct < 0.0 || row.es_h_pct > 100.0 || row.op_h_pct < 0.0 ||
      row.op_h_pct > 100.0) {
    throw DataError("tendency table: percentage outside [0, 100]");
  }
  const auto key = std::make_tuple(ex, co, ag);
  if (rows_.count(key) != 0) {
    throw DataError(std::string("tendency table: duplicate row (") + to_string(ex) + ", " +
                    to_string(co) + ", " + to_string(ag) + ")");
  }
  rows_[key] = row;
}

std::optional<TendencyRow> TendencyTable::lookup(Label ex, Label co, Label ag) const {
  const auto it = rows_.find(std::make_tuple(ex, co, ag));
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

TendencyTable TendencyTable::from_json(const nlohmann::json& j) {
  TendencyTable t;
  try {
    for (const auto& row : j.at("rows")) {
      t.insert(label_from_string(row.at("Ex_class").get<std::string>()),
               label_from_string(row.at("Co_class").get<std::string>()),
               label_from_string(row.at("Ag_class").get<std::string>()),
               {row.at("es_h_pct").get<double>(), row.at("op_h_pct").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("tendency JSON: ") + e.what());
  }
  return t;
}

nlohmann::ordered_json TendencyTable::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& [key, row] : rows_) {
    nlohmann::ordered_json r;
    r["Ex_class"] = to_string(std::get<0>(key));
    r["Co_class"] = to_string(std::get<1>(key));
    r["Ag_class"] = to_string(std::get<2>(key));
    r["es_h_pct"] = row.es_h_pct;
    r["op_h_pct"] = row.op_h_pct;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

// --- strategy mapping ----------------------------------------------------------

namespace {

void check_strategy_name(const std::string& name) {
  for (const char* s : kStrategies) {
    if (name == s) return;
  }
  throw DataError("strategy map: unknown strategy '" + name +
                  "' (expected deep, surface or strategic)");
}

}  // namespace

void StrategyMap::validate() const {
  if (default_strategy.empty()) {
    throw DataError("strategy map: missing default strategy (map must be total)");
  }
  check_strategy_name(default_strategy);
  for (const auto& rule : rules) check_strategy_name(rule.strategy);
}

std::string recommend_strategy(const TraitLabels& labels, const StrategyMap& map) {
  map.validate();
  for (const auto& rule : map.rules) {
    bool matches = true;
    for (const auto& [trait, label] : rule.require) {
      if (labels[trait] != label) {
        matches = false;
        break;
      }
    }
    if (matches) return rule.strategy;
  }
  return map.default_strategy;
}

StrategyMap StrategyMap::from_json(const nlohmann::json& j) {
  StrategyMap map;
  try {
    map.default_strategy = j.at("default").get<std::string>();
    if (j.contains("rules")) {
      for (const auto& jr : j.at("rules")) {
        StrategyRule rule;
        rule.strategy = jr.at("strategy").get<std::string>();
        for (const auto& [key, value] : jr.at("when").items()) {
          rule.require[trait_from_string(key)] = label_from_string(value.get<std::string>());
        }
        map.rules.push_back(std::move(rule));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("strategy JSON: ") + e.what());
  }
  map.validate();
  return map;
}

nlohmann::ordered_json StrategyMap::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  nlohmann::ordered_json rules = nlohmann::ordered_json::array();
  for (const auto& rule : this->rules) {
    nlohmann::ordered_json jr;
    nlohmann::ordered_json when;
    for (const auto& [trait, label] : rule.require) {
      when[to_string(trait)] = to_string(label);
    }
    jr["when"] = std::move(when);
    jr["strategy"] = rule.strategy;
    rules.push_back(std::move(jr));
  }
  j["rules"] = std::move(rules);
  j["default"] = default_strategy;
  return j;
}

// --- full-profile prediction ---------------------------------------------------

namespace {

double model_input(const forest::ForestModel& model, std::size_t feature,
                   const features::FeatureVector& fv,
                   const std::map<Trait, Label>& resolved) {
  const std::string& name = model.feature_names[feature];
  if (const auto t = class_feature_trait(name)) {
    const auto it = resolved.find(*t);
    if (it == resolved.end()) {
      throw DataError("prediction: no resolved class for input '" + name + "'");
    }
    return (it->second == Label::H) ? 0.0 : 1.0;
  }
  return fv[features::feature_index(name)];
}

std::pair<Label, double> predict_class(const forest::ForestModel& model,
                                       const features::FeatureVector& fv,
                                       const std::map<Trait, Label>& resolved) {
  std::vector<double> row(model.feature_names.size());
  for (std::size_t f = 0; f < row.size(); ++f) row[f] = model_input(model, f, fv, resolved);
  const auto prediction = model.predict(row);
  return {label_from_string(prediction.class_level), prediction.vote_fraction};
}

}  // namespace

TraitProfile predict_all_traits(const forest::ForestModel& ex_model,
                                const forest::ForestModel& co_model,
                                const forest::ForestModel& ag_model,
                                const TendencyTable& tendency,
                                const features::FeatureVector& fv,
                                const std::optional<std::pair<Label, Label>>& provided_ex_co) {
  TraitProfile profile;
  std::map<Trait, Label> resolved;

  const auto [ex_label, ex_votes] = predict_class(ex_model, fv, resolved);
  resolved[Trait::Ex] = ex_label;
  profile[Trait::Ex] = {ex_label == Label::H ? PredictedLabel::H : PredictedLabel::L,
                        ex_votes, "model"};
  const auto [co_label, co_votes] = predict_class(co_model, fv, resolved);
  resolved[Trait::Co] = co_label;
  profile[Trait::Co] = {co_label == Label::H ? PredictedLabel::H : PredictedLabel::L,
                        co_votes, "model"};

  // Ag stacks on the Ex/Co outputs unless ground-truth classes are supplied.
  if (provided_ex_co) {
    resolved[Trait::Ex] = provided_ex_co->first;
    resolved[Trait::Co] = provided_ex_co->second;
  }
  const auto [ag_label, ag_votes] = predict_class(ag_model, fv, resolved);
  resolved[Trait::Ag] = ag_label;
  profile[Trait::Ag] = {ag_label == Label::H ? PredictedLabel::H : PredictedLabel::L, ag_votes,
                        provided_ex_co ? "model (on provided Ex/Co classes)"
                                       : "model (stacked on predicted Ex/Co)"};

  const auto row = tendency.lookup(resolved[Trait::Ex], resolved[Trait::Co],
                                   resolved[Trait::Ag]);
  auto fill_tendency = [&](Trait trait, double h_pct) {
    TraitPrediction& p = profile[trait];
    if (h_pct > 50.0) {
      p = {PredictedLabel::H, h_pct / 100.0, "tendency"};
    } else if (h_pct < 50.0) {
      p = {PredictedLabel::L, (100.0 - h_pct) / 100.0, "tendency"};
    } else {
      p = {PredictedLabel::Unknown, 0.5, "tendency (50/50 split)"};
    }
  };
  if (row) {
    fill_tendency(Trait::Es, row->es_h_pct);
    fill_tendency(Trait::Op, row->op_h_pct);
  } else {
    profile[Trait::Es] = {PredictedLabel::Unknown, 0.0, "tendency (no observed row)"};
    profile[Trait::Op] = {PredictedLabel::Unknown, 0.0, "tendency (no observed row)"};
  }
  return profile;
}

// --- persisted bundle ----------------------------------------------------------

void ModelBundle::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;

  for (const auto& [trait, model] : models) {
    forest::ForestModel copy = model;
    copy.normalization_ref = "normalization.json";
    const std::string name = std::string("model_") + to_string(trait) + ".json";
    write_file(dir / name, forest::to_json(copy).dump(2) + "\n");
    files.push_back(name);
  }
  for (const auto& [trait, selection] : selections) {
    const std::string name = std::string("selection_") + to_string(trait) + ".json";
    write_file(dir / name, boruta::to_json(selection).dump(2) + "\n");
    files.push_back(name);
  }
  write_file(dir / "tendency.json", tendency.to_json().dump(2) + "\n");
  files.push_back("tendency.json");
  if (strategies) {
    write_file(dir / "strategies.json", strategies->to_json().dump(2) + "\n");
    files.push_back("strategies.json");
  }
  write_file(dir / "normalization.json",
             features::normalization_to_json(normalization).dump(2) + "\n");
  files.push_back("normalization.json");

  std::sort(files.begin(), files.end());
  write_manifest(dir, files);
}

ModelBundle ModelBundle::load(const std::filesystem::path& dir) {
  verify_manifest(dir);
  ModelBundle bundle;
  for (Trait t : {Trait::Ex, Trait::Co, Trait::Ag}) {
    const auto path = dir / (std::string("model_") + to_string(t) + ".json");
    if (std::filesystem::exists(path)) {
      bundle.models[t] = forest::forest_from_json(nlohmann::json::parse(read_file(path)));
    }
  }
  bundle.tendency = TendencyTable::from_json(nlohmann::json::parse(read_file(dir / "tendency.json")));
  const auto strategies_path = dir / "strategies.json";
  if (std::filesystem::exists(strategies_path)) {
    bundle.strategies = StrategyMap::from_json(nlohmann::json::parse(read_file(strategies_path)));
  }
  bundle.normalization = features::normalization_from_json(
      nlohmann::json::parse(read_file(dir / "normalization.json")));
  return bundle;
}

}  // namespace traitkit::models
