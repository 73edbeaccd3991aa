#include "traitkit/service.hpp"


#include "httplib.h"
#include "json.hpp"
#include "traitkit/error.hpp"
#include "traitkit/stats.hpp"

namespace traitkit::service {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reply_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  ordered_json body;
  body["schema_version"] = 1;
  body["error"] = message;
  reply_json(res, status, body);
}

// Accepts either a 50-element array or an {"1": v, ...} object.
ipip::ResponseSheet parse_submission(const json& body) {
  ipip::ResponseSheet sheet;
  sheet.participant_id = body.at("participant_id").get<std::string>();
  const auto& answers = body.at("answers");
  std::array<bool, 50> seen{};
  if (answers.is_array()) {
    if (answers.size() != 50) {
      throw DataError("expected 50 answers, got " + std::to_string(answers.size()));
    }
    for (std::size_t i = 0; i < 50; ++i) {
      sheet.answers[i] = answers.at(i).get<int>();
      seen[i] = true;
    }
  } else if (answers.is_object()) {
    for (const auto& [key, value] : answers.items()) {
      const int id = std::stoi(key);
      if (id < 1 || id > 50) throw DataError("answer key '" + key + "' outside 1..50");
      sheet.answers[static_cast<std::size_t>(id - 1)] = value.get<int>();
      seen[static_cast<std::size_t>(id - 1)] = true;
    }
    for (int id = 1; id <= 50; ++id) {
      if (!seen[static_cast<std::size_t>(id - 1)]) {
        throw DataError("item " + std::to_string(id) + " unanswered");
      }
    }
  } else {
    throw DataError("answers must be an array or object");
  }
  for (int id = 1; id <= 50; ++id) {
    const int a = sheet.answers[static_cast<std::size_t>(id - 1)];
    if (a < 1 || a > 5) {
      throw DataError("item " + std::to_string(id) + " answer " + std::to_string(a) +
                      " outside 1..5");
    }
  }
  return sheet;
}

ordered_json scores_json(const TraitScores& scores) {
  ordered_json j;
  for (Trait t : kAllTraits) j[to_string(t)] = scores[t];
  return j;
}

}  // namespace

Service::Service(const ServiceConfig& config)
    : config_(config),
      store_(store::CohortStore::open(config.store_dir)),
      server_(std::make_unique<httplib::Server>()) {
  if (!config_.bundle_dir.empty()) {
    bundle_ = models::ModelBundle::load(config_.bundle_dir);
  }
  install_routes();
}

Service::~Service() = default;

bool Service::listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

void Service::stop() { server_->stop(); }

void Service::install_routes() {
  auto& server = *server_;

  server.Get("/api/items", [this](const httplib::Request&, httplib::Response& res) {
    ordered_json body;
    body["schema_version"] = 1;
    body["items"] = ipip::item_keys_to_json(store_.items());
    reply_json(res, 200, body);
  });

  server.Post("/api/questionnaire", [this](const httplib::Request& req,
                                           httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      reply_error(res, 400, std::string("malformed JSON: ") + e.what());
      return;
    }
    ipip::ResponseSheet sheet;
    try {
      sheet = parse_submission(body);
    } catch (const json::exception& e) {
      reply_error(res, 400, std::string("malformed body: ") + e.what());
      return;
    } catch (const DataError& e) {
      reply_error(res, 422, e.what());
      return;
    }
    TraitScores scores;
    try {
      scores = store_.submit(sheet);
    } catch (const DataError& e) {
      const std::string what = e.what();
      reply_error(res, what.find("duplicate participant") != std::string::npos ? 409 : 422,
                  what);
      return;
    }

    const auto cohort = store_.scores();
    ordered_json out;
    out["schema_version"] = 1;
    out["participant_id"] = sheet.participant_id;
    out["scores"] = scores_json(scores);
    const auto percentiles = ipip::cohort_percentiles(cohort, scores);
    ordered_json jp;
    for (Trait t : kAllTraits) jp[to_string(t)] = percentiles[trait_index(t)];
    out["percentiles"] = std::move(jp);
    if (cohort.size() >= 2) {
      const auto labels = ipip::median_split(cohort);
      ordered_json jl;
      const auto& own = labels.at(sheet.participant_id);
      for (Trait t : kAllTraits) jl[to_string(t)] = to_string(own[t]);
      out["labels"] = std::move(jl);
    }
    reply_json(res, 200, out);
  });

  server.Get("/api/cohort/summary", [this](const httplib::Request&, httplib::Response& res) {
    const auto cohort = store_.scores();
    ordered_json out;
    out["schema_version"] = 1;
    out["n"] = cohort.size();
    ordered_json traits;
    for (Trait t : kAllTraits) {
      ordered_json jt;
      if (cohort.size() >= 2) {
        std::vector<double> column;
        column.reserve(cohort.size());
        for (const auto& [pid, s] : cohort) column.push_back(s[t]);
        const auto d = stats::describe(column);
        jt["n"] = d.n;
        jt["mean"] = d.mean;
        jt["sd"] = d.sd;
        jt["median"] = d.median;
        jt["min"] = d.min;
        jt["max"] = d.max;
        if (d.skew) {
          jt["skew"] = *d.skew;
        } else {
          jt["skew"] = nullptr;
        }
      } else {
        jt["n"] = cohort.size();
        for (const char* field : {"mean", "sd", "median", "min", "max", "skew"}) {
          jt[field] = nullptr;
        }
        if (cohort.size() == 1) {
          const auto& only = cohort.begin()->second;
          jt["mean"] = static_cast<double>(only[t]);
          jt["median"] = static_cast<double>(only[t]);
          jt["min"] = static_cast<double>(only[t]);
          jt["max"] = static_cast<double>(only[t]);
        }
      }
      traits[to_string(t)] = std::move(jt);
    }
    out["traits"] = std::move(traits);
    reply_json(res, 200, out);
  });

  server.Post("/api/predict", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      reply_error(res, 400, std::string("malformed JSON: ") + e.what());
      return;
    }
    if (!bundle_) {
      reply_error(res, 422,
                  "no model bundle loaded: start the service with a bundle directory "
                  "containing trained models and normalization stats");
      return;
    }
    for (Trait t : {Trait::Ex, Trait::Co, Trait::Ag}) {
      if (bundle_->models.count(t) == 0) {
        reply_error(res, 422, std::string("bundle has no trained ") + to_string(t) + " model");
        return;
      }
    }
    features::FeatureVector fv;
    try {
      if (body.contains("features")) {
        const auto& jf = body.at("features");
        for (std::size_t i = 0; i < features::kFeatureNames.size(); ++i) {
          fv.values[i] = jf.at(features::kFeatureNames[i]).get<double>();
        }
      } else if (body.contains("variances")) {
        const auto& jv = body.at("variances");
        features::SegmentVariances raw;
        for (int k = 0; k < 3; ++k) {
          raw.gsr_var[static_cast<std::size_t>(k)] =
              jv.at("gsr" + std::to_string(k + 1) + "_var").get<double>();
          raw.hr_var[static_cast<std::size_t>(k)] =
              jv.at("hr" + std::to_string(k + 1) + "_var").get<double>();
        }
        fv = features::apply_normalization(raw, bundle_->normalization);
      } else {
        reply_error(res, 400, "body must contain 'features' or 'variances'");
        return;
      }
    } catch (const json::exception& e) {
      reply_error(res, 400, std::string("malformed body: ") + e.what());
      return;
    } catch (const DataError& e) {
      reply_error(res, 422, e.what());
      return;
    }

    models::TraitProfile profile;
    try {
      profile = models::predict_all_traits(bundle_->models.at(Trait::Ex),
                                           bundle_->models.at(Trait::Co),
                                           bundle_->models.at(Trait::Ag), bundle_->tendency, fv);
    } catch (const DataError& e) {
      reply_error(res, 422, e.what());
      return;
    }

    ordered_json out;
    out["schema_version"] = 1;
    ordered_json jp;
    for (Trait t : kAllTraits) {
      const auto& p = profile[t];
      ordered_json jt;
      jt["label"] = to_string(p.label);
      jt["confidence"] = p.confidence;
      jt["source"] = p.source;
      jp[to_string(t)] = std::move(jt);
    }
    out["predictions"] = std::move(jp);
    if (bundle_->strategies) {
      bool determined = true;
      TraitLabels labels;
      for (Trait t : kAllTraits) {
        if (profile[t].label == models::PredictedLabel::Unknown) {
          determined = false;
          break;
        }
        labels[t] = (profile[t].label == models::PredictedLabel::H) ? Label::H : Label::L;
      }
      if (determined) {
        out["strategy"] = models::recommend_strategy(labels, *bundle_->strategies);
      } else {
        out["strategy"] = nullptr;
      }
    }
    reply_json(res, 200, out);
  });

  if (!config_.static_dir.empty()) {
    server.set_mount_point("/", config_.static_dir);
  }

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (req.path.rfind("/api/", 0) == 0 && res.status == 404) {
      ordered_json body;
      body["schema_version"] = 1;
      body["error"] = "unknown route " + req.path;
      res.set_content(body.dump(), "application/json");
    }
  });
}

}  // namespace traitkit::service
