#include <cmath>
#include <random>

#include "doctest.h"
#include "fapforge/difficulty.hpp"
#include "fapforge/distractors.hpp"
#include "fapforge/generator.hpp"

using namespace fapforge;

namespace {

FeatureVector random_features(std::mt19937_64& rng) {
  FeatureVector f;
  f.rule_count = std::uniform_int_distribution<int>(1, 4)(rng);
  // Binary and ternary kinds among the rules, the rest unary.
  const int binary = std::uniform_int_distribution<int>(0, f.rule_count)(rng);
  const int ternary = std::uniform_int_distribution<int>(0, f.rule_count - binary)(rng);
  f.kind_counts[static_cast<std::size_t>(RelationKind::arithmetic)] = binary;
  f.kind_counts[static_cast<std::size_t>(RelationKind::distribution_of_three)] = ternary;
  f.kind_counts[static_cast<std::size_t>(RelationKind::progression)] = f.rule_count - binary - ternary;
  f.entity_count = std::uniform_int_distribution<int>(1, 9)(rng);
  f.harmonic = std::bernoulli_distribution(0.6)(rng);
  f.direction_mix = std::bernoulli_distribution(0.3)(rng);
  return f;
}

std::vector<Response> simulate(const DifficultyModel& truth, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Response> out;
  for (std::size_t i = 0; i < n; ++i) {
    Response r;
    r.features = random_features(rng);
    r.correct = std::bernoulli_distribution(predict(truth, r.features))(rng);
    out.push_back(r);
  }
  return out;
}

double ll(const DifficultyModel& m, const std::vector<Response>& rs) {
  std::vector<std::vector<double>> rows;
  std::unique_ptr<bool[]> y(new bool[rs.size()]);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    rows.push_back(design_row(rs[i].features));
    y[i] = rs[i].correct;
  }
  return log_likelihood(m, rows, std::span<const bool>(y.get(), rs.size()));
}

}  // namespace

TEST_CASE("zero model predicts one half") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) CHECK(predict(zero_model(), random_features(rng)) == 0.5);
}

TEST_CASE("prediction decreases with rule count under a negative weight") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    auto f = random_features(rng);
    auto g = f;
    ++g.rule_count;
    CHECK(predict(default_model(), g) < predict(default_model(), f));
  }
}

TEST_CASE("predict checks the model schema") {
  auto m = default_model();
  m.features.pop_back();
  m.weights.pop_back();
  CHECK_THROWS_AS(predict(m, FeatureVector{}), SchemaError);
  CHECK_THROWS_AS(predict_row(default_model(), std::vector<double>{1.0}), SchemaError);
}

TEST_CASE("design row columns") {
  FeatureVector f;
  f.rule_count = 3;
  f.entity_count = 4;
  f.kind_counts[static_cast<std::size_t>(RelationKind::union_)] = 1;
  f.kind_counts[static_cast<std::size_t>(RelationKind::arithmetic)] = 1;
  f.kind_counts[static_cast<std::size_t>(RelationKind::distribution_of_three)] = 1;
  f.harmonic = false;
  CHECK(design_row(f) == std::vector<double>{3, 4, 2, 1, 1, 0});
  CHECK(design_columns().size() == design_row(f).size());
}

TEST_CASE("fit recovers generating weights") {
  const auto truth = default_model();
  const auto responses = simulate(truth, 20000, 42);
  const auto r = fit(responses);
  CHECK(r.model.features == truth.features);
  for (std::size_t j = 0; j < truth.weights.size(); ++j) {
    CAPTURE(truth.features[j]);
    CHECK(std::abs(r.model.weights[j] - truth.weights[j]) < 0.15);
  }
  CHECK(r.log_likelihood >= ll(zero_model(), responses));
  CHECK(r.log_likelihood == doctest::Approx(ll(r.model, responses)));
  // Deterministic given the data.
  CHECK(fit(responses).model == r.model);
}

TEST_CASE("fit errors") {
  const auto truth = default_model();
  SUBCASE("too few rows") {
    CHECK_THROWS_AS(fit(simulate(truth, 59, 1)), FitError);
  }
  SUBCASE("single outcome class") {
    auto rs = simulate(truth, 200, 2);
    for (auto& r : rs) r.correct = true;
    CHECK_THROWS_WITH_AS(fit(rs), doctest::Contains("separation"), FitError);
  }
  SUBCASE("perfect separation on one column") {
    auto rs = simulate(truth, 400, 3);
    for (auto& r : rs) r.correct = r.features.harmonic;
    CHECK_THROWS_WITH_AS(fit(rs), doctest::Contains("separation"), FitError);
  }
  SUBCASE("duplicated column") {
    const std::vector<std::string> names{"rules", "rules_again", "entities"};
    std::mt19937_64 rng(4);
    std::vector<std::vector<double>> rows;
    std::unique_ptr<bool[]> y(new bool[300]);
    for (int i = 0; i < 300; ++i) {
      const double a = std::uniform_int_distribution<int>(1, 4)(rng);
      const double b = std::uniform_int_distribution<int>(1, 9)(rng);
      rows.push_back({a, a, b});
      y[i] = std::bernoulli_distribution(0.5)(rng);
    }
    try {
      fit_rows(names, rows, std::span<const bool>(y.get(), 300));
      FAIL("expected a collinearity error");
    } catch (const FitError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("rules_again") != std::string::npos);
      CHECK(msg.find("rules") != std::string::npos);
    }
  }
}

TEST_CASE("features ignore the answer set") {
  const auto profile = default_profile(ProfileId::raven);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto item = sample_item_spec(profile, seed);
    const auto before = extract_features(item);
    attach_answers(item, Strategy::fair_tree, catalog(item.profile), seed + 1000);
    CHECK(extract_features(item) == before);
  }
}

TEST_CASE("feature extraction examples") {
  const auto raven = sample_item_spec(default_profile(ProfileId::raven), 7);
  CHECK(extract_features(raven).rule_count == 4);

  auto p = default_profile(ProfileId::pgm);
  p.min_rules = p.max_rules = 1;
  const auto one = sample_item_spec(p, 3);
  const auto f = extract_features(one);
  CHECK(f.rule_count == 1);
  int most = 0;
  for (const auto& panel : one.context) most = std::max(most, static_cast<int>(panel.entities.size()));
  CHECK(f.entity_count == most);
}
