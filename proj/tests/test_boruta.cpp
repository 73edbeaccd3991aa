#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "traitkit/boruta.hpp"
#include "traitkit/error.hpp"
#include "traitkit/rng.hpp"

using namespace traitkit;
using namespace traitkit::boruta;
using traitkit::forest::Dataset;
using traitkit::forest::FeatureKind;

namespace {

// Balanced binary labels; `informative` features carry a +/- margin by class,
// the rest are pure noise.
Dataset planted_dataset(std::size_t n, std::size_t informative, std::size_t noise,
                        double margin, std::uint64_t seed) {
  Dataset d;
  Rng rng(seed);
  for (std::size_t r = 0; r < n; ++r) {
    d.labels.push_back(static_cast<int>(rng.below(2)));
  }
  for (std::size_t f = 0; f < informative + noise; ++f) {
    const bool is_signal = f < informative;
    d.feature_names.push_back((is_signal ? "signal" : "noise") + std::to_string(f));
    d.kinds.push_back(FeatureKind::Numeric);
    d.level_names.emplace_back();
    std::vector<double> column(n);
    for (std::size_t r = 0; r < n; ++r) {
      const double shift = is_signal ? (d.labels[r] == 0 ? margin : -margin) : 0.0;
      column[r] = shift + rng.next_normal();
    }
    d.columns.push_back(std::move(column));
  }
  return d;
}

BorutaConfig quick_config(std::uint64_t seed) {
  BorutaConfig cfg;
  cfg.seed = seed;
  cfg.max_runs = 100;
  cfg.forest.ntree = 120;
  return cfg;
}

}  // namespace

TEST_CASE("binomial two-sided test against a fair coin") {
  CHECK(binomial_two_sided_p(8, 8) == doctest::Approx(2.0 / 256.0).epsilon(1e-12));
  CHECK(binomial_two_sided_p(0, 8) == doctest::Approx(2.0 / 256.0).epsilon(1e-12));
  CHECK(binomial_two_sided_p(4, 8) == doctest::Approx(1.0));
  CHECK(binomial_two_sided_p(1, 1) == doctest::Approx(1.0));
  CHECK(binomial_two_sided_p(3, 8) == doctest::Approx(binomial_two_sided_p(5, 8)));
  // Seven straight hits cannot clear alpha = 0.01 yet; eight can.
  CHECK(binomial_two_sided_p(7, 7) > 0.01);
  CHECK(binomial_two_sided_p(8, 8) < 0.01);
  CHECK_THROWS_AS(binomial_two_sided_p(3, 0), std::invalid_argument);
}

TEST_CASE("planted features confirm and noise rejects") {
  const auto d = planted_dataset(150, 2, 6, 1.5, 2024);
  const auto result = select(d, quick_config(1));

  CHECK(result.iterations_run <= 100);
  REQUIRE(result.decisions.size() == 8);
  CHECK(result.decisions[0] == Decision::Confirmed);
  CHECK(result.decisions[1] == Decision::Confirmed);
  // All-relevant selection may keep a noise column that is label-correlated
  // by sampling accident; at most one of the six survives.
  std::size_t rejected = 0;
  for (std::size_t f = 2; f < 8; ++f) {
    if (result.decisions[f] == Decision::Rejected) ++rejected;
  }
  CHECK(rejected >= 5);

  // Shadows never leak into the result.
  for (const auto& name : result.feature_names) {
    CHECK(name.rfind("shadow_", 0) == std::string::npos);
  }
  // History has one row per iteration, one slot per real feature.
  CHECK(result.importance_history.size() == static_cast<std::size_t>(result.iterations_run));
  for (const auto& row : result.importance_history) CHECK(row.size() == 8);
}

TEST_CASE("a single run cannot decide anything at alpha 0.01") {
  const auto d = planted_dataset(60, 1, 3, 2.0, 5);
  auto cfg = quick_config(9);
  cfg.max_runs = 1;
  const auto result = select(d, cfg);
  CHECK(result.iterations_run == 1);
  for (const auto decision : result.decisions) CHECK(decision == Decision::Tentative);
}

TEST_CASE("independent coin-flip labels confirm nothing") {
  for (std::uint64_t seed : {11ULL, 22ULL}) {
    auto d = planted_dataset(100, 0, 6, 0.0, 300 + seed);
    const auto result = select(d, quick_config(seed));
    for (const auto decision : result.decisions) {
      CHECK(decision != Decision::Confirmed);
    }
  }
}

TEST_CASE("selection is deterministic for a fixed config") {
  const auto d = planted_dataset(90, 1, 4, 1.2, 77);
  // The artifact carries no wall-clock fields; byte equality is exact.
  const auto a = to_json(select(d, quick_config(4))).dump();
  const auto b = to_json(select(d, quick_config(4))).dump();
  CHECK(a == b);
}

TEST_CASE("rough_fix resolves leftover tentatives both ways") {
  const auto d = planted_dataset(80, 1, 4, 1.5, 55);
  auto cfg = quick_config(6);
  cfg.max_runs = 9;  // enough iterations to decide clear-cut features only
  auto result = select(d, cfg);
  rough_fix(result);
  for (const auto decision : result.decisions) {
    CHECK(decision != Decision::Tentative);
  }
  // The planted feature survives the rough fix.
  CHECK(result.decisions[0] == Decision::Confirmed);
}

TEST_CASE("report text mirrors the selection outcome") {
  const auto d = planted_dataset(120, 2, 5, 1.5, 88);
  const auto result = select(d, quick_config(12));
  const auto text = render_report(result);
  CHECK(text.find("Boruta performed " + std::to_string(result.iterations_run) +
                  " iterations") != std::string::npos);
  CHECK(text.find("attributes confirmed important: ") != std::string::npos);
  CHECK(text.find("attributes confirmed unimportant: ") != std::string::npos);
  CHECK(text.find("signal0") != std::string::npos);

  const auto j = to_json(result);
  CHECK(j.at("iterations_run").get<int>() == result.iterations_run);
  CHECK(j.at("decisions").size() == 7);
}

TEST_CASE("selection rejects bad configurations") {
  const auto d = planted_dataset(50, 1, 2, 1.0, 3);
  auto cfg = quick_config(1);
  cfg.max_runs = 0;
  CHECK_THROWS_AS(select(d, cfg), DataError);
  cfg = quick_config(1);
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(select(d, cfg), DataError);

  Dataset one_feature;
  one_feature.feature_names = {"only"};
  one_feature.kinds = {FeatureKind::Numeric};
  one_feature.level_names = {{}};
  one_feature.columns = {{1.0, 2.0, 3.0, 4.0}};
  one_feature.labels = {0, 1, 0, 1};
  CHECK_THROWS_AS(select(one_feature, cfg), DataError);
}
