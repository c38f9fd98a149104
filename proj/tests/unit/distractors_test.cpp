#include <algorithm>
#include <bit>
#include <set>

#include "doctest.h"
#include "fapforge/distractors.hpp"
#include "fapforge/generator.hpp"
#include "fapforge/validator.hpp"
#include "helpers.hpp"

using namespace fapforge;
using testing::entity;
using testing::panel;

namespace {

std::vector<ItemSpec> items(ProfileId id, Strategy s, int n, std::uint64_t first = 0) {
  auto p = default_profile(id);
  p.strategy = s;
  std::vector<ItemSpec> out;
  for (std::uint64_t seed = first; seed < first + static_cast<std::uint64_t>(n); ++seed) {
    out.push_back(sample_item_spec(p, seed));
  }
  return out;
}

const Configuration& config_of(const ItemSpec& it) {
  return catalog(it.profile).configuration(it.configuration);
}

void check_distinct_and_wrong(const ItemSpec& it, const AnswerSet& set) {
  REQUIRE(set.choices.size() == 8);
  CHECK(set.choices[0] == it.correct);
  const Catalog& cat = catalog(it.profile);
  for (std::size_t i = 0; i < set.choices.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(set.choices[i] == set.choices[j]);
    if (i > 0) CHECK_FALSE(completes_validly(it, set.choices[i], cat));
  }
}

}  // namespace

TEST_CASE("panel distance counts attribute edits and presence") {
  const auto& config = catalog(ProfileId::raven).configuration("2x2Grid");
  const auto a = panel("2x2Grid", {entity(0, 0, 1, 2, 3)});
  CHECK(panel_distance(a, a, config) == 0);
  CHECK(panel_distance(a, panel("2x2Grid", {entity(0, 0, 1, 2, 4)}), config) == 1);
  CHECK(panel_distance(a, panel("2x2Grid", {entity(0, 0, 2, 3, 4)}), config) == 3);
  CHECK(panel_distance(a, panel("2x2Grid", {entity(0, 0, 1, 2, 3), entity(0, 1, 1, 2, 3)}),
                       config) == 1);
  // A move is a removal plus an insertion.
  CHECK(panel_distance(a, panel("2x2Grid", {entity(0, 1, 1, 2, 3)}), config) == 2);
}

TEST_CASE("single edits are one step away") {
  const Catalog& cat = catalog(ProfileId::raven);
  const auto& config = cat.configuration("2x2Grid");
  const auto a = panel("2x2Grid", {entity(0, 0, 1, 2, 3), entity(0, 3, 1, 2, 3)});
  const auto edits = single_edits(a, cat, config);
  CHECK_FALSE(edits.empty());
  for (const auto& e : edits) CHECK(panel_distance(a, e.result, config) == 1);
}

TEST_CASE("star answer sets") {
  for (const auto& it : items(ProfileId::raven, Strategy::star, 60)) {
    const auto set = gen_star(it, catalog(it.profile), it.seed);
    check_distinct_and_wrong(it, set);
    for (std::size_t k = 1; k < 8; ++k) {
      CHECK(panel_distance(set.choices[0], set.choices[k], config_of(it)) == 1);
    }
    const auto g = answer_graph(set.choices, config_of(it));
    CHECK(g.topology == Topology::star);
    CHECK(g.center == 0);
    CHECK(set.history.size() == 7);
  }
}

TEST_CASE("impartial answer sets form a 3-cube") {
  for (const auto& it : items(ProfileId::raven, Strategy::impartial, 60)) {
    // Distance profile of Q3 from every vertex: three at 1, three at 2, one at 3.
    for (std::size_t i = 0; i < 8; ++i) {
      std::vector<int> d;
      for (std::size_t j = 0; j < 8; ++j) {
        if (j != i) d.push_back(panel_distance(it.answers[i], it.answers[j], config_of(it)));
      }
      std::sort(d.begin(), d.end());
      CHECK(d == std::vector<int>{1, 1, 1, 2, 2, 2, 3});
    }
    const auto g = answer_graph(it.answers, config_of(it));
    CHECK(g.topology == Topology::three_regular);
    CHECK(g.degree == std::vector<int>(8, 3));
  }
}

TEST_CASE("fair-tree histories are trees") {
  for (const auto& it : items(ProfileId::raven, Strategy::fair_tree, 60)) {
    const auto set = gen_fair_tree(it, catalog(it.profile), it.seed);
    check_distinct_and_wrong(it, set);
    CHECK(set.history.size() == 7);
    CHECK(is_tree(8, set.history));
    for (const auto& [parent, child] : set.history) {
      CHECK(parent < child);
      CHECK(panel_distance(set.choices[static_cast<std::size_t>(parent)],
                           set.choices[static_cast<std::size_t>(child)], config_of(it)) == 1);
    }
  }
}

TEST_CASE("is_tree") {
  using E = std::vector<std::pair<int, int>>;
  CHECK(is_tree(1, E{}));
  CHECK(is_tree(3, E{{0, 1}, {1, 2}}));
  CHECK_FALSE(is_tree(3, E{{0, 1}}));
  CHECK_FALSE(is_tree(3, E{{0, 1}, {1, 2}, {0, 2}}));
  CHECK_FALSE(is_tree(4, E{{0, 1}, {0, 1}, {2, 3}}));
}

TEST_CASE("sandia recipes") {
  const auto pool = items(ProfileId::sandia, Strategy::sandia_c, 40);
  for (const auto& it : pool) {
    const Catalog& cat = catalog(it.profile);
    const auto& config = config_of(it);

    // a: distractors copied from the matrix.
    try {
      const auto a = gen_sandia(it, cat, 'a', it.seed);
      check_distinct_and_wrong(it, a);
      for (std::size_t k = 1; k < 8; ++k) {
        CHECK(std::find(it.context.begin(), it.context.end(), a.choices[k]) != it.context.end());
      }
    } catch (const InfeasibleError&) {
      // Too few distinct matrix entries is a legitimate outcome.
    }

    // c: one edit of the correct answer.
    const auto c = gen_sandia(it, cat, 'c', it.seed);
    check_distinct_and_wrong(it, c);
    for (std::size_t k = 1; k < 8; ++k) {
      CHECK(panel_distance(c.choices[0], c.choices[k], config) == 1);
    }

    // f: every distractor shows a value absent from the matrix.
    std::set<std::pair<int, Value>> seen;
    for (const auto& p : it.context) {
      for (const auto& e : p.entities) {
        for (int a = 0; a < kEntityAttributeCount; ++a) seen.insert({a, e.attrs[static_cast<std::size_t>(a)]});
      }
    }
    try {
      const auto f = gen_sandia(it, cat, 'f', it.seed);
      check_distinct_and_wrong(it, f);
      for (std::size_t k = 1; k < 8; ++k) {
        bool novel = false;
        for (const auto& e : f.choices[k].entities) {
          for (int a = 0; a < kEntityAttributeCount; ++a) {
            novel |= seen.count({a, e.attrs[static_cast<std::size_t>(a)]}) == 0;
          }
        }
        CHECK(novel);
      }
    } catch (const InfeasibleError&) {
    }
  }
  CHECK_THROWS_AS(gen_sandia(pool[0], catalog(ProfileId::sandia), 'z', 1), Error);
}

TEST_CASE("imak option grids by rule count") {
  for (int n : {1, 3, 4}) {
    auto p = default_profile(ProfileId::imak_lite);
    p.min_rules = p.max_rules = n;
    p.strategy = Strategy::imak;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto it = sample_item_spec(p, seed);
      REQUIRE(static_cast<int>(it.rules.size()) == n);
      check_distinct_and_wrong(it, gen_imak(it, catalog(it.profile), it.seed));
      // Choices as tuples of the rule features.
      std::set<std::vector<LineValue>> tuples;
      std::vector<std::set<LineValue>> levels(it.rules.size());
      for (const auto& choice : it.answers) {
        std::vector<LineValue> t;
        for (std::size_t r = 0; r < it.rules.size(); ++r) {
          const auto& rule = it.rules[r];
          const int comp = rule.component == kAllComponents ? 0 : rule.component;
          const auto v = observe(choice, comp, rule.attribute, rule.attribute == AttributeId::position);
          REQUIRE(v);
          t.push_back(*v);
          levels[r].insert(*v);
        }
        tuples.insert(t);
      }
      CAPTURE(n);
      if (n == 1) {
        CHECK(levels[0].size() == 4);
      } else {
        for (const auto& l : levels) CHECK(l.size() == 2);
        CHECK(tuples.size() == 8);
      }
    }
  }
}

TEST_CASE("answer graph topology examples") {
  const auto& config = catalog(ProfileId::raven).configuration("center");
  std::vector<PanelSpec> star{panel("center", {entity(0, 0, 1, 2, 0)})};
  for (int c = 1; c < 8; ++c) star.push_back(panel("center", {entity(0, 0, 1, 2, c)}));
  // Color is a single attribute: every pair differs in one edit, a complete graph.
  CHECK(answer_graph(star, config).topology == Topology::other);

  // Leaves each change a different attribute of the hub.
  const std::vector<PanelSpec> hub{panel("center", {entity(0, 0, 1, 2, 0)}),
                                   panel("center", {entity(0, 0, 1, 2, 1)}),
                                   panel("center", {entity(0, 0, 1, 3, 0)}),
                                   panel("center", {entity(0, 0, 2, 2, 0)})};
  const auto g = answer_graph(hub, config);
  CHECK(g.topology == Topology::star);
  CHECK(g.center == 0);

  std::vector<PanelSpec> path{panel("center", {entity(0, 0, 1, 2, 0)}),
                              panel("center", {entity(0, 0, 1, 2, 1)}),
                              panel("center", {entity(0, 0, 1, 3, 1)}),
                              panel("center", {entity(0, 0, 2, 3, 1)})};
  const auto pg = answer_graph(path, config);
  CHECK(pg.topology == Topology::tree);
  CHECK(pg.degree == std::vector<int>{1, 2, 2, 1});
}

TEST_CASE("context-blind heuristics") {
  const auto& config = catalog(ProfileId::raven).configuration("center");
  std::vector<PanelSpec> answers{panel("center", {entity(0, 0, 1, 2, 0)}),
                                 panel("center", {entity(0, 0, 1, 2, 1)}),
                                 panel("center", {entity(0, 0, 1, 3, 0)}),
                                 panel("center", {entity(0, 0, 2, 2, 0)})};
  auto d = context_blind_solve(answers, Heuristic::max_degree, config);
  CHECK(d.index == 0);
  CHECK(d.tied == std::vector<int>{0});
  auto s = context_blind_solve(answers, Heuristic::max_similarity, config);
  CHECK(s.index == 0);

  const std::vector<PanelSpec> pair{answers[1], answers[2]};
  const auto t = context_blind_solve(pair, Heuristic::max_degree, config);
  CHECK(t.tied == std::vector<int>{0, 1});

  CHECK(parse_heuristic("max-similarity") == Heuristic::max_similarity);
  CHECK_THROWS_AS(parse_heuristic("oracle"), Error);
  CHECK_THROWS_AS(context_blind_audit({}, Heuristic::max_degree), Error);
}

TEST_CASE("star sets give the answer away, impartial sets do not") {
  const auto star = items(ProfileId::raven, Strategy::star, 200);
  CHECK(context_blind_audit(star, Heuristic::max_degree).accuracy == doctest::Approx(1.0));
  const auto imp = items(ProfileId::raven, Strategy::impartial, 200);
  const auto r = context_blind_audit(imp, Heuristic::max_degree);
  CHECK(r.accuracy == doctest::Approx(0.125));
  CHECK(r.ties == 200);
  CHECK(r.topology_counts.at(Topology::three_regular) == 200);
}
