#include "traitkit/boruta.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "traitkit/error.hpp"
#include "traitkit/rng.hpp"

namespace traitkit::boruta {

namespace {

constexpr std::uint64_t kShadowStream = 17;
constexpr std::uint64_t kForestStream = 19;

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return (n % 2 == 1) ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

}  // namespace

double binomial_two_sided_p(int hits, int trials) {
  if (trials < 1 || hits < 0 || hits > trials) {
    throw std::invalid_argument("binomial_two_sided_p: bad arguments");
  }
  // pmf via the multiplicative recurrence at p = 1/2.
  std::vector<double> pmf(static_cast<std::size_t>(trials) + 1);
  pmf[0] = std::pow(0.5, trials);
  for (int i = 0; i < trials; ++i) {
    pmf[static_cast<std::size_t>(i) + 1] =
        pmf[static_cast<std::size_t>(i)] * static_cast<double>(trials - i) /
        static_cast<double>(i + 1);
  }
  double lower = 0.0;
  for (int i = 0; i <= hits; ++i) lower += pmf[static_cast<std::size_t>(i)];
  double upper = 0.0;
  for (int i = hits; i <= trials; ++i) upper += pmf[static_cast<std::size_t>(i)];
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

std::vector<std::string> BorutaResult::with_decision(Decision d) const {
  std::vector<std::string> names;
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    if (decisions[f] == d) names.push_back(feature_names[f]);
  }
  std::sort(names.begin(), names.end());
  return names;
}

BorutaResult select(const forest::Dataset& data, const BorutaConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  data.validate(true);
  const std::size_t p = data.n_features();
  if (p < 2) throw DataError("boruta: need at least 2 features");
  if (config.max_runs < 1) throw DataError("boruta: max_runs must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw DataError("boruta: alpha must be in (0, 1)");
  }

  BorutaResult result;
  result.feature_names = data.feature_names;
  result.decisions.assign(p, Decision::Tentative);
  std::vector<int> hits(p, 0);

  const auto nan = std::numeric_limits<double>::quiet_NaN();

  for (int iteration = 1; iteration <= config.max_runs; ++iteration) {
    std::vector<std::size_t> present;   // confirmed + tentative, original order
    std::vector<std::size_t> shadowed;  // tentative only
    for (std::size_t f = 0; f < p; ++f) {
      if (result.decisions[f] != Decision::Rejected) present.push_back(f);
      if (result.decisions[f] == Decision::Tentative) shadowed.push_back(f);
    }
    if (shadowed.empty()) break;

    // Shadows mirror every feature still in the system (confirmed included),
    // padded to at least five so the max-shadow bar never collapses.
    std::vector<std::size_t> shadow_sources = present;
    while (shadow_sources.size() < 5) {
      const std::size_t base = shadow_sources.size();
      for (std::size_t i = 0; i < base && shadow_sources.size() < 5; ++i) {
        shadow_sources.push_back(shadow_sources[i]);
      }
    }

    forest::Dataset design;
    design.labels = data.labels;
    design.class_levels = data.class_levels;
    for (std::size_t f : present) {
      design.feature_names.push_back(data.feature_names[f]);
      design.kinds.push_back(data.kinds[f]);
      design.level_names.push_back(data.level_names[f]);
      design.columns.push_back(data.columns[f]);
    }
    for (std::size_t slot = 0; slot < shadow_sources.size(); ++slot) {
      const std::size_t f = shadow_sources[slot];
      design.feature_names.push_back("shadow_" + std::to_string(slot) + "_" +
                                     data.feature_names[f]);
      design.kinds.push_back(data.kinds[f]);
      design.level_names.push_back(data.level_names[f]);
      auto column = data.columns[f];
      Rng rng(mix_seed(config.seed, kShadowStream, static_cast<std::uint64_t>(iteration),
                       static_cast<std::uint64_t>(slot)));
      rng.shuffle(column);
      design.columns.push_back(std::move(column));
    }

    forest::ForestConfig forest_config = config.forest;
    forest_config.importance = true;
    forest_config.mtry = 0;  // re-derived from the widened design matrix
    forest_config.seed =
        mix_seed(config.seed, kForestStream, static_cast<std::uint64_t>(iteration));
    const forest::ForestModel model = forest::train(design, forest_config);

    double shadow_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < shadow_sources.size(); ++i) {
      shadow_max = std::max(shadow_max, model.importance[present.size() + i].scaled_mda);
    }

    std::vector<double> row(p, nan);
    for (std::size_t i = 0; i < present.size(); ++i) {
      row[present[i]] = model.importance[i].scaled_mda;
    }
    result.importance_history.push_back(std::move(row));
    result.shadow_max_history.push_back(shadow_max);
    result.iterations_run = iteration;

    for (std::size_t i = 0; i < present.size(); ++i) {
      const std::size_t f = present[i];
      if (result.decisions[f] != Decision::Tentative) continue;
      if (model.importance[i].scaled_mda > shadow_max) hits[f] += 1;
    }

    for (std::size_t f : shadowed) {
      const double p_value = binomial_two_sided_p(hits[f], iteration);
      if (p_value < config.alpha) {
        const double half = static_cast<double>(iteration) / 2.0;
        result.decisions[f] =
            (static_cast<double>(hits[f]) > half) ? Decision::Confirmed : Decision::Rejected;
      }
    }
  }

  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

void rough_fix(BorutaResult& result) {
  const double shadow_median = median_of(result.shadow_max_history);
  for (std::size_t f = 0; f < result.feature_names.size(); ++f) {
    if (result.decisions[f] != Decision::Tentative) continue;
    std::vector<double> history;
    for (const auto& row : result.importance_history) {
      if (!std::isnan(row[f])) history.push_back(row[f]);
    }
    const double feature_median = median_of(std::move(history));
    result.decisions[f] =
        (feature_median > shadow_median) ? Decision::Confirmed : Decision::Rejected;
  }
}

namespace {

std::string join_names(const std::vector<std::string>& names) {
  constexpr std::size_t kMaxListed = 5;
  std::string out;
  const std::size_t shown = std::min(names.size(), kMaxListed);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) out += ", ";
    out += names[i];
  }
  if (names.size() > kMaxListed) {
    out += " and " + std::to_string(names.size() - kMaxListed) + " more";
  }
  return out;
}

}  // namespace

std::string render_report(const BorutaResult& result) {
  std::ostringstream os;
  os << "Boruta performed " << result.iterations_run << " iterations in "
     << result.elapsed_seconds << " secs.\n";
  const auto confirmed = result.with_decision(Decision::Confirmed);
  const auto rejected = result.with_decision(Decision::Rejected);
  const auto tentative = result.with_decision(Decision::Tentative);
  if (!confirmed.empty()) {
    os << ' ' << confirmed.size() << " attributes confirmed important: " << join_names(confirmed)
       << ";\n";
  } else {
    os << " no attributes confirmed important;\n";
  }
  if (!rejected.empty()) {
    os << ' ' << rejected.size()
       << " attributes confirmed unimportant: " << join_names(rejected) << ";\n";
  } else {
    os << " no attributes confirmed unimportant;\n";
  }
  if (!tentative.empty()) {
    os << ' ' << tentative.size() << " tentative attributes left: " << join_names(tentative)
       << ";\n";
  }
  return os.str();
}

nlohmann::ordered_json to_json(const BorutaResult& result) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  nlohmann::ordered_json decisions;
  for (std::size_t f = 0; f < result.feature_names.size(); ++f) {
    decisions[result.feature_names[f]] = to_string(result.decisions[f]);
  }
  j["decisions"] = std::move(decisions);
  j["iterations_run"] = result.iterations_run;
  nlohmann::ordered_json history = nlohmann::ordered_json::array();
  for (const auto& row : result.importance_history) {
    nlohmann::ordered_json jrow = nlohmann::ordered_json::array();
    for (double v : row) {
      if (std::isnan(v)) {
        jrow.push_back(nullptr);
      } else {
        jrow.push_back(v);
      }
    }
    history.push_back(std::move(jrow));
  }
  j["importance_history"] = std::move(history);
  j["shadow_max_history"] = result.shadow_max_history;
  return j;
}

}  // namespace traitkit::boruta
