#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "traitkit/boruta.hpp"
#include "traitkit/csv.hpp"
#include "traitkit/error.hpp"
#include "traitkit/features.hpp"
#include "traitkit/forest.hpp"
#include "traitkit/ipip.hpp"
#include "traitkit/manifest.hpp"
#include "traitkit/service.hpp"
#include "traitkit/signals.hpp"
#include "traitkit/stats.hpp"
#include "traitkit/store.hpp"
#include "traitkit/trait_models.hpp"

namespace {

using namespace traitkit;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

nlohmann::json load_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value != nullptr ? value : fallback;
}

void report_warnings(const std::vector<signals::Warning>& warnings) {
  for (const auto& w : warnings) {
    std::cerr << "warning: participant " << w.participant_id << ": " << w.message << '\n';
  }
}

int run_ingest(const std::string& in_path, const std::string& out_path) {
  auto in = open_input(in_path);
  const auto sessions = signals::parse_signals(in);
  for (const auto& session : sessions) report_warnings(signals::validate_session(session));
  auto out = open_output(out_path);
  signals::serialize_signals(sessions, out);
  std::cerr << "ingested " << sessions.size() << " sessions\n";
  return kExitOk;
}

int run_features(const std::string& in_path, const std::string& out_path,
                 const std::string& stats_path) {
  auto in = open_input(in_path);
  const auto sessions = signals::parse_signals(in);
  const auto table = features::extract_features(sessions);
  auto out = open_output(out_path);
  features::write_feature_csv(table, out);
  if (!stats_path.empty()) {
    auto stats_out = open_output(stats_path);
    stats_out << features::normalization_to_json(table.normalization).dump(2) << '\n';
  }
  return kExitOk;
}

int run_score(const std::string& responses_path, const std::string& keys_path,
              const std::string& out_path) {
  const auto keys = ipip::item_keys_from_json(load_json(keys_path));
  auto in = open_input(responses_path);
  const auto sheets = ipip::read_responses_csv(in);
  std::map<std::string, TraitScores> scores;
  for (const auto& sheet : sheets) {
    if (!scores.emplace(sheet.participant_id, ipip::score(sheet, keys)).second) {
      throw DataError("duplicate participant '" + sheet.participant_id + "'");
    }
  }
  auto out = open_output(out_path);
  ipip::write_scores_csv(scores, out);
  return kExitOk;
}

int run_label(const std::string& scores_path, const std::string& out_path) {
  auto in = open_input(scores_path);
  const auto scores = ipip::read_scores_csv(in);
  const auto labels = ipip::median_split(scores);
  auto out = open_output(out_path);
  ipip::write_labels_csv(labels, out);
  return kExitOk;
}

struct TrainOptions {
  std::string features_path;
  std::string labels_path;
  std::string trait = "Ex";
  std::string out_dir;
  std::string select;  // "" or "boruta"
  std::vector<std::string> feature_set;
  std::string strategies_path;
  int ntree = 500;
  int mtry = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  int max_runs = 100;
  double alpha = 0.01;
};

int run_train(const TrainOptions& opt) {
  auto features_in = open_input(opt.features_path);
  auto table = features::read_feature_csv(features_in);
  auto labels_in = open_input(opt.labels_path);
  const auto labels = ipip::read_labels_csv(labels_in);

  // The CSV does not carry normalization stats; recover them from a sidecar
  // when present next to the feature file, else persist zeros.
  features::NormalizationStats normalization{};
  const std::filesystem::path sidecar =
      std::filesystem::path(opt.features_path).replace_extension(".stats.json");
  if (std::filesystem::exists(sidecar)) {
    normalization = features::normalization_from_json(load_json(sidecar.string()));
  }
  table.normalization = normalization;

  const Trait trait = trait_from_string(opt.trait);
  models::TraitModelSpec spec;
  if (opt.feature_set.empty()) {
    spec = models::default_model_spec(trait);
  } else {
    spec.trait = trait;
    spec.feature_set = opt.feature_set;
  }
  spec.mode = opt.select == "boruta" ? models::TraitModelMode::BorutaSelected
                                     : models::TraitModelMode::FixedFeatures;
  if (spec.mode == models::TraitModelMode::BorutaSelected && opt.feature_set.empty()) {
    // Selection starts from all 12 signal features plus the other traits'
    // classes, mirroring the published search space.
    spec.feature_set.assign(features::kFeatureNames.begin(), features::kFeatureNames.end());
    for (Trait t : kAllTraits) {
      if (t != trait) spec.feature_set.push_back(std::string(to_string(t)) + "_class");
    }
  }

  forest::ForestConfig forest_config;
  forest_config.ntree = opt.ntree;
  forest_config.mtry = opt.mtry;
  forest_config.seed = opt.seed;
  forest_config.threads = opt.threads;
  forest_config.importance = true;

  boruta::BorutaConfig boruta_config;
  boruta_config.max_runs = opt.max_runs;
  boruta_config.alpha = opt.alpha;
  boruta_config.seed = opt.seed;
  boruta_config.forest.ntree = opt.ntree;
  boruta_config.forest.threads = opt.threads;

  const auto outcome =
      models::train_trait_model(table, labels, spec, forest_config, &boruta_config);

  if (outcome.selection) {
    std::cerr << boruta::render_report(*outcome.selection);
  }
  if (!outcome.model) {
    std::cerr << "no effective model for " << to_string(trait)
              << ": selection confirmed zero features\n";
    return kExitData;
  }

  models::ModelBundle bundle;
  const std::filesystem::path out_dir(opt.out_dir);
  if (std::filesystem::exists(out_dir / "manifest.json")) {
    bundle = models::ModelBundle::load(out_dir);
  } else {
    bundle.tendency = models::TendencyTable::default_table();
  }
  bundle.models[trait] = *outcome.model;
  bundle.normalization = normalization;
  if (outcome.selection) bundle.selections[trait] = *outcome.selection;
  if (!opt.strategies_path.empty()) {
    bundle.strategies = models::StrategyMap::from_json(load_json(opt.strategies_path));
  }
  bundle.save(out_dir);

  std::cerr << "trained " << to_string(trait) << " on [";
  for (std::size_t i = 0; i < outcome.features_used.size(); ++i) {
    if (i > 0) std::cerr << ", ";
    std::cerr << outcome.features_used[i];
  }
  std::cerr << "]; OOB error " << fmt_double(outcome.model->oob.error) << " ("
            << outcome.model->oob.evaluated_rows << " rows evaluated, "
            << outcome.model->oob.excluded_rows << " excluded)\n";
  return kExitOk;
}

int run_predict(const std::string& bundle_dir, const std::string& features_path,
                const std::string& participant, const std::string& out_path) {
  const auto bundle = models::ModelBundle::load(bundle_dir);
  for (Trait t : {Trait::Ex, Trait::Co, Trait::Ag}) {
    if (bundle.models.count(t) == 0) {
      throw DataError(std::string("bundle has no trained ") + to_string(t) + " model");
    }
  }
  auto in = open_input(features_path);
  const auto table = features::read_feature_csv(in);

  nlohmann::ordered_json out;
  out["schema_version"] = 1;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (!participant.empty() && table.participant_ids[r] != participant) continue;
    const auto profile = models::predict_all_traits(
        bundle.models.at(Trait::Ex), bundle.models.at(Trait::Co), bundle.models.at(Trait::Ag),
        bundle.tendency, table.rows[r]);
    nlohmann::ordered_json jr;
    jr["participant_id"] = table.participant_ids[r];
    for (Trait t : kAllTraits) {
      nlohmann::ordered_json jt;
      jt["label"] = models::to_string(profile[t].label);
      jt["confidence"] = profile[t].confidence;
      jt["source"] = profile[t].source;
      jr[to_string(t)] = std::move(jt);
    }
    rows.push_back(std::move(jr));
  }
  if (!participant.empty() && rows.empty()) {
    throw DataError("participant '" + participant + "' not found in feature table");
  }
  out["predictions"] = std::move(rows);
  const std::string text = out.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
  return kExitOk;
}

int run_stats_compare(const std::string& in_path, const std::string& json_path,
                      const std::string& scope) {
  auto in = open_input(in_path);
  const auto outcomes = stats::read_outcomes_csv(in);
  const auto comparison = stats::compare_groups(
      outcomes, scope == "per-group" ? stats::NormalityScope::PerGroup
                                     : stats::NormalityScope::Pooled);
  std::cout << stats::render_report(comparison);
  if (!json_path.empty()) {
    write_file(json_path, stats::report_to_json(comparison).dump(2) + "\n");
  }
  return kExitOk;
}

int run_synth(const std::string& spec_path, const std::string& out_path,
              const std::string& traits_path, std::optional<std::uint64_t> seed_override) {
  auto spec = signals::synth_spec_from_json(load_json(spec_path));
  if (seed_override) spec.seed = *seed_override;
  const auto cohort = signals::generate_synthetic_cohort(spec);
  auto out = open_output(out_path);
  signals::serialize_signals(cohort.sessions, out);
  if (!traits_path.empty()) {
    auto traits_out = open_output(traits_path);
    ipip::write_scores_csv(cohort.trait_scores, traits_out);
  }
  std::cerr << "generated " << cohort.sessions.size() << " sessions\n";
  return kExitOk;
}

int run_serve(const std::string& store_dir, const std::string& static_dir,
              const std::string& bundle_dir, int port, const std::string& keys_path) {
  if (!std::filesystem::exists(std::filesystem::path(store_dir) / "items.json")) {
    if (keys_path.empty()) {
      throw DataError("store '" + store_dir +
                      "' is not initialized; pass --keys to create it");
    }
    const auto keys = ipip::item_keys_from_json(load_json(keys_path));
    store::CohortStore init(store_dir, keys);  // writes items.json + manifest
  }
  service::ServiceConfig config;
  config.store_dir = store_dir;
  config.static_dir = static_dir;
  config.bundle_dir = bundle_dir;
  service::Service service(config);
  std::cerr << "serving on port " << port << " (store: " << store_dir << ")\n";
  if (!service.listen("0.0.0.0", port)) {
    throw DataError("failed to bind port " + std::to_string(port));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physiological-signal personality toolkit"};
  app.require_subcommand(1);

  std::string in_path;
  std::string out_path;
  std::string stats_path;
  std::string keys_path;
  std::string scores_path;
  std::string bundle_dir;
  std::string participant;
  std::string scope = "pooled";
  std::string traits_path;
  std::string static_dir = env_or("PP_STATIC", "");
  std::string store_dir = env_or("PP_STORE", "store");
  int port = static_cast<int>(std::strtol(env_or("PP_PORT", "8080").c_str(), nullptr, 10));
  std::optional<std::uint64_t> seed_opt;

  auto* ingest = app.add_subcommand("ingest", "validate a signals CSV into a session store");
  ingest->add_option("--in", in_path, "signals CSV")->required();
  ingest->add_option("--out", out_path, "normalized sessions CSV")->required();

  auto* features_cmd =
      app.add_subcommand("features", "extract the 12-column feature table from signals");
  features_cmd->add_option("--in", in_path, "signals CSV")->required();
  features_cmd->add_option("--out", out_path, "feature CSV")->required();
  features_cmd->add_option("--stats-out", stats_path, "normalization stats JSON sidecar");

  auto* score_cmd = app.add_subcommand("score", "score questionnaire responses");
  score_cmd->add_option("--responses", in_path, "responses CSV")->required();
  score_cmd->add_option("--keys", keys_path, "item key JSON")->required();
  score_cmd->add_option("--out", out_path, "scores CSV")->required();

  auto* label_cmd = app.add_subcommand("label", "median-split scores into H/L classes");
  label_cmd->add_option("--scores", scores_path, "scores CSV")->required();
  label_cmd->add_option("--out", out_path, "labels CSV")->required();

  TrainOptions train_opt;
  auto* train_cmd = app.add_subcommand("train", "train a trait model into a bundle");
  train_cmd->add_option("--features", train_opt.features_path, "feature CSV")->required();
  train_cmd->add_option("--labels", train_opt.labels_path, "labels CSV")->required();
  train_cmd->add_option("--trait", train_opt.trait, "Ex, Co or Ag")->required();
  train_cmd->add_option("--out", train_opt.out_dir, "bundle directory")->required();
  train_cmd->add_option("--select", train_opt.select, "boruta to run feature selection");
  train_cmd->add_option("--feature-set", train_opt.feature_set,
                        "explicit input features (default: published per-trait set)");
  train_cmd->add_option("--strategies", train_opt.strategies_path,
                        "strategy map JSON to embed in the bundle");
  train_cmd->add_option("--ntree", train_opt.ntree, "trees per forest");
  train_cmd->add_option("--mtry", train_opt.mtry, "candidate features per split (0 = sqrt)");
  train_cmd->add_option("--seed", train_opt.seed, "RNG seed");
  train_cmd->add_option("--threads", train_opt.threads, "worker threads");
  train_cmd->add_option("--max-runs", train_opt.max_runs, "Boruta iteration cap");
  train_cmd->add_option("--alpha", train_opt.alpha, "Boruta significance level");

  auto* predict_cmd = app.add_subcommand("predict", "predict trait classes from features");
  predict_cmd->add_option("--bundle", bundle_dir, "bundle directory")->required();
  predict_cmd->add_option("--features", in_path, "feature CSV")->required();
  predict_cmd->add_option("--participant", participant, "restrict to one participant");
  predict_cmd->add_option("--out", out_path, "write JSON here instead of stdout");

  auto* stats_cmd = app.add_subcommand("stats", "statistical evaluation tools");
  stats_cmd->require_subcommand(1);
  auto* compare_cmd =
      stats_cmd->add_subcommand("compare", "compare learning-gain deltas between groups");
  compare_cmd->add_option("--in", in_path, "outcomes CSV")->required();
  compare_cmd->add_option("--json-out", out_path, "also write the report as JSON");
  compare_cmd->add_option("--normality", scope, "pooled (default) or per-group");

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort");
  synth_cmd->add_option("--spec", in_path, "synth spec JSON")->required();
  synth_cmd->add_option("--out", out_path, "signals CSV")->required();
  synth_cmd->add_option("--traits-out", traits_path, "ground-truth trait scores CSV");
  synth_cmd->add_option("--seed", seed_opt, "override the spec seed");

  auto* serve_cmd = app.add_subcommand("serve", "start the HTTP/JSON service");
  serve_cmd->add_option("--port", port, "listen port (env PP_PORT)");
  serve_cmd->add_option("--store", store_dir, "store directory (env PP_STORE)");
  serve_cmd->add_option("--static", static_dir, "web UI directory served at /");
  serve_cmd->add_option("--bundle", bundle_dir, "model bundle for /api/predict");
  serve_cmd->add_option("--keys", keys_path, "item key JSON to initialize a new store");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(ingest)) return run_ingest(in_path, out_path);
    if (app.got_subcommand(features_cmd)) return run_features(in_path, out_path, stats_path);
    if (app.got_subcommand(score_cmd)) return run_score(in_path, keys_path, out_path);
    if (app.got_subcommand(label_cmd)) return run_label(scores_path, out_path);
    if (app.got_subcommand(train_cmd)) return run_train(train_opt);
    if (app.got_subcommand(predict_cmd)) {
      return run_predict(bundle_dir, in_path, participant, out_path);
    }
    if (app.got_subcommand(stats_cmd)) return run_stats_compare(in_path, out_path, scope);
    if (app.got_subcommand(synth_cmd)) return run_synth(in_path, out_path, traits_path, seed_opt);
    if (app.got_subcommand(serve_cmd)) {
      return run_serve(store_dir, static_dir, bundle_dir, port, keys_path);
    }
  } catch (const traitkit::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
