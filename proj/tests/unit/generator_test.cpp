#include <algorithm>
#include <set>

#include "doctest.h"
#include "fapforge/difficulty.hpp"
#include "fapforge/generator.hpp"
#include "fapforge/validator.hpp"

using namespace fapforge;

namespace {

bool layout_rule(const RuleSpec& r) {
  return r.attribute == AttributeId::number || r.attribute == AttributeId::position;
}

bool appearance_rule(const RuleSpec& r) {
  return r.attribute == AttributeId::type || r.attribute == AttributeId::size ||
         r.attribute == AttributeId::color;
}

RuleSpec rule(RelationKind kind, AttributeId attribute, int parameter = 0) {
  RuleSpec r;
  r.relation.kind = kind;
  r.relation.parameter = parameter;
  r.attribute = attribute;
  r.target = natural_target(attribute);
  return r;
}

}  // namespace

TEST_CASE("sampling is deterministic in profile and seed") {
  for (ProfileId id : {ProfileId::pgm, ProfileId::raven, ProfileId::sandia, ProfileId::hornke}) {
    const auto profile = default_profile(id);
    for (std::uint64_t seed : {0ull, 1ull, 977ull}) {
      CHECK(sample_item_spec(profile, seed) == sample_item_spec(profile, seed));
    }
    CHECK_FALSE(sample_item_spec(profile, 1) == sample_item_spec(profile, 2));
  }
}

TEST_CASE("pgm items carry one to four rules") {
  const auto profile = default_profile(ProfileId::pgm);
  std::set<std::size_t> seen;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto item = sample_item_spec(profile, seed);
    REQUIRE(item.rules.size() >= 1);
    REQUIRE(item.rules.size() <= 4);
    seen.insert(item.rules.size());
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("raven items have a layout, type, size and color rule") {
  const auto profile = default_profile(ProfileId::raven);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto item = sample_item_spec(profile, seed);
    REQUIRE(item.rules.size() == 4);
    std::multiset<AttributeId> attrs;
    for (const auto& r : item.rules) attrs.insert(layout_rule(r) ? AttributeId::number : r.attribute);
    CHECK(attrs == std::multiset<AttributeId>{AttributeId::number, AttributeId::type,
                                              AttributeId::size, AttributeId::color});
  }
}

TEST_CASE("generated items validate and solve") {
  for (ProfileId id : {ProfileId::pgm, ProfileId::pgm_shape, ProfileId::pgm_line,
                       ProfileId::raven, ProfileId::sandia, ProfileId::hornke,
                       ProfileId::imak_lite}) {
    const auto profile = default_profile(id);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto item = sample_item_spec(profile, seed);
      CAPTURE(to_string(id));
      CAPTURE(seed);
      CHECK(validate_item(item).verdict);
      CHECK(solve(item.context, item.answers, id).index == item.correct_index);
      CHECK(item.answers.size() == 8);
      CHECK(item.answers[static_cast<std::size_t>(item.correct_index)] == item.correct);
    }
  }
}

TEST_CASE("view modes restrict the rule attributes") {
  const auto base = default_profile(ProfileId::pgm_shape);
  const auto classical = set_view_mode(base, ViewMode::classical);
  const auto normal = set_view_mode(base, ViewMode::normal);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    for (const auto& r : sample_item_spec(classical, seed).rules) {
      CHECK_FALSE(layout_rule(r));
    }
    for (const auto& r : sample_item_spec(normal, seed).rules) {
      if (r.relation.kind != RelationKind::constant) CHECK_FALSE(appearance_rule(r));
    }
  }
  CHECK(set_view_mode(classical, ViewMode::classical) == classical);
  CHECK(set_view_mode(normal, ViewMode::normal) == normal);
}

TEST_CASE("a view mode without surviving triplets is infeasible") {
  CHECK_THROWS_AS(set_view_mode(default_profile(ProfileId::hornke), ViewMode::normal),
                  InfeasibleError);
}

TEST_CASE("contradictory profiles are rejected") {
  auto p = default_profile(ProfileId::raven);
  p.min_rules = 5;
  p.max_rules = 2;
  CHECK_THROWS_AS(check_profile(p), CatalogError);
  p = default_profile(ProfileId::raven);
  p.configurations = {"no-such-configuration"};
  CHECK_THROWS_AS(check_profile(p), CatalogError);
}

TEST_CASE("an unrealizable strategy exhausts the budget") {
  auto p = default_profile(ProfileId::pgm_line);
  p.strategy = Strategy::star;
  p.attempt_budget = 20;
  CHECK_THROWS_AS(sample_item_spec(p, 3), BudgetExhaustedError);
}

TEST_CASE("perceptual organization binds rules to components") {
  const Catalog& cat = catalog(ProfileId::hornke);
  const std::vector<RuleSpec> two{rule(RelationKind::progression, AttributeId::size, 1),
                                  rule(RelationKind::distribution_of_three, AttributeId::color)};
  const std::vector<RuleSpec> one{two[0]};

  const auto sep = assign_perceptual_organization(two, Organization::separation, cat);
  CHECK(sep.components == std::vector<int>{0, 1});
  CHECK(cat.configuration(sep.configuration).components.size() == 2);

  const auto integ = assign_perceptual_organization(two, Organization::integration, cat);
  CHECK(integ.components == std::vector<int>{0, 0});
  CHECK(cat.configuration(integ.configuration).components.size() == 1);

  const auto emb = assign_perceptual_organization(two, Organization::embedding, cat);
  CHECK(emb.configuration == "Out-InCenter");
  CHECK(emb.components == std::vector<int>{0, 1});

  for (Organization m : {Organization::separation, Organization::integration,
                         Organization::embedding}) {
    CHECK(assign_perceptual_organization(one, m, cat).components == std::vector<int>{0});
  }

  const std::vector<RuleSpec> same{two[0], rule(RelationKind::progression, AttributeId::size, -1)};
  CHECK_THROWS_AS(assign_perceptual_organization(same, Organization::integration, cat),
                  InfeasibleError);
  CHECK_THROWS_AS(assign_perceptual_organization({}, Organization::separation, cat),
                  InfeasibleError);
}

TEST_CASE("nonharmonic derivation") {
  const auto profile = default_profile(ProfileId::raven);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto item = sample_item_spec(profile, seed);
    CHECK(derive_nonharmonic(item, 0, seed) == item);

    const auto nh = derive_nonharmonic(item, 1, seed);
    CAPTURE(seed);
    CHECK_FALSE(nh.harmonic);
    REQUIRE(nh.distracting.size() == 1);
    const AttributeId a = nh.distracting[0].attribute;
    CHECK((a == AttributeId::uniformity || a == AttributeId::angle));
    CHECK(validate_item(nh).verdict);
    CHECK(solve(nh.context, nh.answers, ProfileId::raven).index == nh.correct_index);
    CHECK(nh.rules == item.rules);

    // Only the harmonic flag of the feature vector moves.
    auto f = extract_features(nh);
    f.harmonic = true;
    CHECK(f == extract_features(item));
  }
}

TEST_CASE("nonharmonic derivation checks its count") {
  const auto item = sample_item_spec(default_profile(ProfileId::raven), 11);
  const auto free = free_distractor_features(item, catalog(ProfileId::raven));
  CHECK_THROWS_AS(derive_nonharmonic(item, -1, 1), InfeasibleError);
  CHECK_THROWS_AS(derive_nonharmonic(item, static_cast<int>(free.size()) + 1, 1), InfeasibleError);
  CHECK_THROWS_AS(derive_nonharmonic(derive_nonharmonic(item, 1, 1), 1, 2), InfeasibleError);
}
