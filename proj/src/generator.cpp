#include "fapforge/generator.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>

#include "fapforge/distractors.hpp"
#include "fapforge/relations.hpp"
#include "fapforge/validator.hpp"

namespace fapforge {

namespace {

constexpr std::array<AttributeId, kEntityAttributeCount> kEntityAttributes = {
    AttributeId::type, AttributeId::size, AttributeId::color, AttributeId::angle,
    AttributeId::uniformity};

// What a rule's cell values are drawn from.
struct Space {
  bool sets = false;
  std::vector<Value> values;  // scalar
  int universe = 0;           // sets
  std::vector<int> sizes;     // allowed set cardinalities
  bool cyclic = false;

  ValueSpace value_space() const {
    return sets ? ValueSpace::sets(universe, cyclic) : ValueSpace::scalar(values);
  }
  bool fits(const LineValue& v) const {
    if (!sets) return std::binary_search(values.begin(), values.end(), v.scalar);
    return std::find(sizes.begin(), sizes.end(), popcount(v.set)) != sizes.end();
  }
};

Mask random_subset(int universe, int size, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(universe));
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  idx.resize(static_cast<std::size_t>(size));
  return mask_of(idx);
}

LineValue random_value(const Space& s, Rng& rng) {
  if (!s.sets) {
    if (s.values.empty()) throw RangeError("empty value domain");
    return LineValue::of(rng.pick(s.values));
  }
  std::vector<int> sizes;
  for (int n : s.sizes) {
    if (n >= 1 && n <= s.universe) sizes.push_back(n);
  }
  if (sizes.empty()) throw RangeError("no admissible set size");
  return LineValue::of_set(random_subset(s.universe, rng.pick(sizes), rng));
}

constexpr int kLineTries = 64;

// Cell values (row-major) realizing `rule` on every line.
std::vector<LineValue> fill_cells(const RuleSpec& rule, const Space& space,
                                  const GridFormat& format, Rng& rng) {
  std::vector<LineValue> cells(static_cast<std::size_t>(format.cells()));
  const auto lines = grid_lines(format, rule.direction);
  const Relation& rel = rule.relation;
  const ValueSpace vs = space.value_space();

  switch (rel.kind) {
    case RelationKind::constant: {
      const LineValue v = random_value(space, rng);
      std::fill(cells.begin(), cells.end(), v);
      return cells;
    }
    case RelationKind::distribution_of_three: {
      if (lines.front().size() != 3) throw StructuralError("distribution needs lines of three");
      std::vector<LineValue> triple;
      if (space.sets) {
        for (int tries = 0; triple.size() < 3 && tries < kLineTries; ++tries) {
          const LineValue v = random_value(space, rng);
          if (std::find(triple.begin(), triple.end(), v) == triple.end()) triple.push_back(v);
        }
      } else {
        std::vector<Value> pool = space.values;
        rng.shuffle(pool);
        const std::size_t real = rel.with_null ? 2 : 3;
        for (std::size_t i = 0; i < real && i < pool.size(); ++i) {
          triple.push_back(LineValue::of(pool[i]));
        }
        if (rel.with_null) triple.push_back(LineValue::of(kNull));
        rng.shuffle(triple);
      }
      if (triple.size() != 3) throw RangeError("distribution needs three distinct values");
      const int sigma = 1 + rng.below(2);
      for (std::size_t li = 0; li < lines.size(); ++li) {
        for (std::size_t k = 0; k < 3; ++k) {
          cells[static_cast<std::size_t>(lines[li][k])] =
              triple[(k + li * static_cast<std::size_t>(sigma)) % 3];
        }
      }
      return cells;
    }
    default:
      break;
  }

  const bool unary = relation_class(rel.kind) == RelationClass::unary;
  for (const auto& line : lines) {
    const std::size_t length = line.size();
    if (!unary && length != 3) throw StructuralError("binary relation needs lines of three");
    std::vector<LineValue> values;
    if (!space.sets && rel.kind == RelationKind::progression) {
      std::vector<Value> starts;
      for (Value v : space.values) {
        bool ok = true;
        for (std::size_t k = 1; k < length && ok; ++k) {
          ok = space.fits(LineValue::of(v + static_cast<Value>(k) * rel.parameter));
        }
        if (ok) starts.push_back(v);
      }
      if (starts.empty()) throw RangeError("progression leaves the domain");
      const Value start = rng.pick(starts);
      for (std::size_t k = 0; k < length; ++k) {
        values.push_back(LineValue::of(start + static_cast<Value>(k) * rel.parameter));
      }
    } else if (!space.sets && rel.kind == RelationKind::arithmetic) {
      std::vector<std::pair<Value, Value>> pairs;
      for (Value a : space.values) {
        for (Value b : space.values) {
          const Value c = rel.parameter >= 0 ? a + b : a - b;
          if (b >= 1 && space.fits(LineValue::of(c))) pairs.emplace_back(a, b);
        }
      }
      if (pairs.empty()) throw RangeError("arithmetic leaves the domain");
      const auto [a, b] = rng.pick(pairs);
      values = {LineValue::of(a), LineValue::of(b),
                LineValue::of(rel.parameter >= 0 ? a + b : a - b)};
    } else {
      // Set-valued lines: rejection over random prefixes.
      for (int tries = 0; tries < kLineTries && values.empty(); ++tries) {
        std::vector<LineValue> attempt;
        attempt.push_back(random_value(space, rng));
        if (!unary) {
          attempt.push_back(random_value(space, rng));
          if (attempt[0] == attempt[1]) continue;
        }
        bool ok = true;
        try {
          while (attempt.size() < length) {
            const auto prefix = std::span<const LineValue>(attempt);
            const LineValue next =
                apply_relation(rel, unary ? prefix.last(1) : prefix.last(2), vs);
            if (next.set == 0 || !space.fits(next)) {
              ok = false;
              break;
            }
            attempt.push_back(next);
          }
        } catch (const RangeError&) {
          ok = false;
        }
        // A rotation that maps a set onto itself reads as constant.
        if (ok && rel.kind == RelationKind::progression && attempt[0] == attempt[1]) ok = false;
        if (ok) values = std::move(attempt);
      }
      if (values.empty()) {
        throw RangeError(std::string(to_string(rel.kind)) + " has no admissible set line");
      }
    }
    for (std::size_t k = 0; k < length; ++k) cells[static_cast<std::size_t>(line[k])] = values[k];
  }
  return cells;
}

std::vector<int> iota_vector(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Builds the complete grid (row-major) for the chosen rules.
std::vector<PanelSpec> build_panels(const Catalog& cat, const Configuration& config,
                                    std::span<const RuleSpec> rules, const GridFormat& format,
                                    Rng& rng) {
  const std::size_t cells = static_cast<std::size_t>(format.cells());
  std::vector<PanelSpec> panels(cells);
  for (auto& p : panels) p.configuration = config.id;

  for (std::size_t ci = 0; ci < config.components.size(); ++ci) {
    const int c = static_cast<int>(ci);
    const Component& comp = config.components[ci];
    const auto& types = cat.domain(AttributeId::type, comp.name);
    const int capacity =
        comp.overlay && comp.fixed_type != kNull ? 1 : comp.capacity(types.size());

    std::vector<int> counts;
    for (Value v : cat.domain(AttributeId::number, comp.name).values) {
      if (v >= 1 && v <= capacity) counts.push_back(v);
    }
    if (counts.empty()) throw InfeasibleError("no admissible entity count in " + comp.name);

    std::vector<const RuleSpec*> scoped;
    for (const auto& r : rules) {
      if (same_scope(r.component, c)) scoped.push_back(&r);
    }
    const RuleSpec* driver = nullptr;
    for (const auto* r : scoped) {
      if (count_driving(*r)) driver = r;
    }

    std::vector<int> slot_order = iota_vector(static_cast<int>(comp.slots.size()));
    std::vector<int> type_order = iota_vector(types.size());
    rng.shuffle(slot_order);
    rng.shuffle(type_order);
    const std::vector<int>& key_order = comp.overlay ? type_order : slot_order;

    std::vector<std::vector<int>> keys(cells);
    std::optional<AttributeId> set_attribute;
    std::vector<std::vector<Value>> set_values(cells);

    auto first_keys = [&](int n) {
      return std::vector<int>(key_order.begin(), key_order.begin() + n);
    };
    auto constant_keys = [&]() {
      const int n = rng.pick(counts);
      auto k = comp.overlay && comp.fixed_type != kNull ? std::vector<int>{comp.fixed_type}
                                                        : first_keys(n);
      std::fill(keys.begin(), keys.end(), k);
    };

    if (driver != nullptr && driver->attribute == AttributeId::position) {
      Space s;
      s.sets = true;
      s.universe = static_cast<int>(comp.slots.size());
      s.sizes = comp.overlay ? std::vector<int>{1} : counts;
      s.cyclic = true;
      const auto masks = fill_cells(*driver, s, format, rng);
      if (comp.overlay) {
        constant_keys();
      } else {
        for (std::size_t k = 0; k < cells; ++k) keys[k] = mask_elements(masks[k].set);
      }
    } else if (driver != nullptr && driver->attribute == AttributeId::number) {
      Space s;
      s.values = counts;
      const auto ns = fill_cells(*driver, s, format, rng);
      for (std::size_t k = 0; k < cells; ++k) keys[k] = first_keys(ns[k].scalar);
    } else if (driver != nullptr) {
      const AttributeId a = driver->attribute;
      Space s;
      s.sets = true;
      s.universe = cat.domain(a, comp.name).size();
      s.sizes = counts;
      const auto sets = fill_cells(*driver, s, format, rng);
      for (std::size_t k = 0; k < cells; ++k) {
        const auto elements = mask_elements(sets[k].set);
        if (comp.overlay && a == AttributeId::type) {
          keys[k] = elements;
        } else {
          keys[k] = first_keys(static_cast<int>(elements.size()));
          set_values[k].assign(elements.begin(), elements.end());
        }
      }
      if (!(comp.overlay && a == AttributeId::type)) set_attribute = a;
    }

    // Scalar rules on entity attributes.
    std::array<std::vector<LineValue>, kEntityAttributeCount> scalar_values;
    for (const auto* r : scoped) {
      if (!is_entity_attribute(r->attribute) || is_set_relation(r->relation.kind)) continue;
      Space s;
      s.values = cat.domain(r->attribute, comp.name).values;
      scalar_values[static_cast<std::size_t>(entity_index(r->attribute))] =
          fill_cells(*r, s, format, rng);
    }
    const auto& type_rule_values = scalar_values[static_cast<std::size_t>(entity_index(AttributeId::type))];

    if (driver == nullptr) {
      if (comp.overlay && !type_rule_values.empty()) {
        for (std::size_t k = 0; k < cells; ++k) keys[k] = {type_rule_values[k].scalar};
      } else {
        constant_keys();
      }
    }

    // Free attributes hold one value over the whole grid.
    std::array<Value, kEntityAttributeCount> constant{};
    for (auto a : kEntityAttributes) {
      if (cat.has_attribute(a, comp.name)) {
        constant[static_cast<std::size_t>(entity_index(a))] =
            rng.pick(cat.domain(a, comp.name).values);
      }
    }
    if (comp.fixed_type != kNull) constant[0] = comp.fixed_type;

    for (std::size_t k = 0; k < cells; ++k) {
      for (std::size_t j = 0; j < keys[k].size(); ++j) {
        Entity e;
        e.component = c;
        e.slot = comp.overlay ? 0 : keys[k][j];
        for (auto a : kEntityAttributes) {
          const auto idx = static_cast<std::size_t>(entity_index(a));
          Value v = constant[idx];
          if (set_attribute && *set_attribute == a) {
            v = set_values[k][j];
          } else if (!scalar_values[idx].empty()) {
            v = scalar_values[idx][k].scalar;
          }
          e.attrs[idx] = v;
        }
        if (comp.overlay) e.set(AttributeId::type, keys[k][j]);
        panels[k].entities.push_back(e);
      }
    }
  }
  for (auto& p : panels) p.canonicalize();
  return panels;
}

bool appearance(AttributeId a) {
  return a == AttributeId::size || a == AttributeId::color || a == AttributeId::angle ||
         a == AttributeId::uniformity;
}

// Constant rules only hold an attribute fixed, so every view keeps them.
bool view_allows(ViewMode view, const Triplet& t) {
  switch (view) {
    case ViewMode::any:
      return true;
    case ViewMode::classical:
      return appearance(t.attribute) || t.relation == RelationKind::constant;
    case ViewMode::normal:
      return t.target == Target::layout || t.relation == RelationKind::constant;
  }
  return false;
}

RuleSpec make_rule(const Triplet& t, const GenerationProfile& gp, Rng& rng, int component) {
  RuleSpec r;
  r.relation.kind = t.relation;
  r.target = t.target;
  r.attribute = t.attribute;
  r.component = component;
  switch (t.relation) {
    case RelationKind::progression: {
      static constexpr std::array<int, 4> steps = {1, -1, 2, -2};
      r.relation.parameter = steps[static_cast<std::size_t>(rng.below(4))];
      break;
    }
    case RelationKind::arithmetic:
      r.relation.parameter = rng.coin() ? 1 : -1;
      break;
    case RelationKind::distribution_of_three:
      r.relation.with_null = t.attribute == AttributeId::type && rng.below(4) == 0;
      break;
    default:
      break;
  }
  r.direction = rng.pick(gp.directions);
  return r;
}

std::vector<const Configuration*> allowed_configurations(const GenerationProfile& gp,
                                                         const Catalog& cat) {
  std::vector<const Configuration*> out;
  for (const auto& c : cat.configurations) {
    if (gp.configurations.empty() ||
        std::find(gp.configurations.begin(), gp.configurations.end(), c.id) !=
            gp.configurations.end()) {
      out.push_back(&c);
    }
  }
  if (out.empty()) throw InfeasibleError("no allowed configuration");
  return out;
}

std::vector<Triplet> candidate_triplets(const GenerationProfile& gp, const Catalog& cat) {
  std::vector<Triplet> out;
  for (const auto& t : cat.triplets()) {
    if (view_allows(gp.view, t)) out.push_back(t);
  }
  return out;
}

struct Draft {
  const Configuration* config = nullptr;
  std::vector<RuleSpec> rules;
  Organization organization = Organization::none;
};

void require_compatible(const Draft& d, const Catalog& cat) {
  const auto verdict = compatible(d.rules, cat, d.config, true);
  if (!verdict) throw InfeasibleError("compatible: " + verdict.reason + " " + verdict.detail);
}

// One rule per attribute group: layout, type, size, color.
Draft choose_grouped(const GenerationProfile& gp, const Catalog& cat, Rng& rng) {
  Draft d;
  d.config = rng.pick(allowed_configurations(gp, cat));
  const auto pool = candidate_triplets(gp, cat);
  const std::array<std::vector<AttributeId>, 4> groups = {
      std::vector<AttributeId>{AttributeId::number, AttributeId::position},
      std::vector<AttributeId>{AttributeId::type},
      std::vector<AttributeId>{AttributeId::size},
      std::vector<AttributeId>{AttributeId::color}};
  for (const auto& group : groups) {
    std::vector<Triplet> options;
    for (const auto& t : pool) {
      if (std::find(group.begin(), group.end(), t.attribute) != group.end()) options.push_back(t);
    }
    if (options.empty()) throw InfeasibleError("no legal triplet for a rule group");
    d.rules.push_back(make_rule(rng.pick(options), gp, rng, kAllComponents));
  }
  require_compatible(d, cat);
  return d;
}

std::vector<RuleSpec> greedy_rules(const GenerationProfile& gp, const Catalog& cat,
                                   const Configuration* scope, Rng& rng) {
  auto pool = candidate_triplets(gp, cat);
  rng.shuffle(pool);
  const int target = rng.between(gp.min_rules, gp.max_rules);
  std::vector<RuleSpec> rules;
  for (const auto& t : pool) {
    if (static_cast<int>(rules.size()) == target) break;
    int component = 0;
    if (!t.object.empty() && scope != nullptr) {
      component = scope->component_index(t.object);
      if (component < 0) continue;
    }
    rules.push_back(make_rule(t, gp, rng, component));
    if (!compatible(rules, cat, scope, false)) rules.pop_back();
  }
  if (static_cast<int>(rules.size()) < gp.min_rules) {
    throw InfeasibleError("rule-count: too few compatible triplets");
  }
  return rules;
}

Draft choose_organized(const GenerationProfile& gp, const Catalog& cat, Rng& rng) {
  Draft d;
  d.rules = greedy_rules(gp, cat, nullptr, rng);
  std::vector<Organization> modes = gp.organizations;
  if (modes.empty()) {
    modes = {Organization::separation, Organization::integration, Organization::embedding};
  }
  const auto plan = assign_perceptual_organization(d.rules, rng.pick(modes), cat);
  d.organization = plan.mode;
  d.config = &cat.configuration(plan.configuration);
  if (!gp.configurations.empty() &&
      std::find(gp.configurations.begin(), gp.configurations.end(), plan.configuration) ==
          gp.configurations.end()) {
    throw InfeasibleError("organization needs a configuration outside the profile");
  }
  for (std::size_t i = 0; i < d.rules.size(); ++i) d.rules[i].component = plan.components[i];
  require_compatible(d, cat);
  return d;
}

Draft choose_greedy(const GenerationProfile& gp, const Catalog& cat, Rng& rng) {
  const auto configs = allowed_configurations(gp, cat);
  const Configuration* widest = *std::max_element(
      configs.begin(), configs.end(), [](const Configuration* a, const Configuration* b) {
        return a->components.size() < b->components.size();
      });
  const bool bound = std::any_of(cat.paths.begin(), cat.paths.end(),
                                 [](const CatalogPath& p) { return !p.triplet.object.empty(); });

  Draft d;
  d.rules = greedy_rules(gp, cat, bound ? widest : nullptr, rng);
  if (bound) {
    // Smallest configuration holding every object the rules name.
    std::vector<std::string> objects;
    for (const auto& r : d.rules) {
      objects.push_back(widest->components[static_cast<std::size_t>(r.component)].name);
    }
    for (const auto* c : configs) {
      const bool holds = std::all_of(objects.begin(), objects.end(), [&](const std::string& o) {
        return c->component_index(o) >= 0;
      });
      if (holds && (d.config == nullptr || c->components.size() < d.config->components.size())) {
        d.config = c;
      }
    }
    if (d.config == nullptr) throw InfeasibleError("no configuration holds the rule objects");
    for (std::size_t i = 0; i < d.rules.size(); ++i) d.rules[i].component = d.config->component_index(objects[i]);
  } else {
    const bool logic = std::any_of(d.rules.begin(), d.rules.end(), [](const RuleSpec& r) {
      return is_set_relation(r.relation.kind);
    });
    std::vector<const Configuration*> preferred;
    for (const auto* c : configs) {
      const bool overlay = std::any_of(c->components.begin(), c->components.end(),
                                       [](const Component& k) { return k.overlay; });
      if (overlay == logic) preferred.push_back(c);
    }
    d.config = rng.pick(preferred.empty() ? configs : preferred);
  }
  require_compatible(d, cat);
  return d;
}

Draft choose_rules(const GenerationProfile& gp, const Catalog& cat, Rng& rng) {
  switch (cat.profile) {
    case ProfileId::raven:
      return choose_grouped(gp, cat, rng);
    case ProfileId::hornke:
      return choose_organized(gp, cat, rng);
    default:
      return choose_greedy(gp, cat, rng);
  }
}

std::string failure_text(const ValidityReport& report) {
  if (!report.structure_error.empty()) return report.structure_error;
  if (!report.first_failure) return "unknown";
  const auto& ce = *report.first_failure;
  return std::string(to_string(ce.attribute)) + " expected " + ce.expected + " found " + ce.found;
}

ItemSpec attempt_item(const GenerationProfile& gp, const Catalog& cat, std::uint64_t seed,
                      std::uint64_t stream) {
  Rng rng(stream);
  Draft d = choose_rules(gp, cat, rng);

  ItemSpec item;
  item.profile = gp.profile;
  item.format = cat.format;
  item.configuration = d.config->id;
  item.rules = d.rules;
  item.organization = d.organization;
  item.meta_options = cat.meta_options;
  item.seed = seed;
  item.strategy = gp.strategy;

  auto panels = build_panels(cat, *d.config, item.rules, item.format, rng);
  item.correct = panels.back();
  panels.pop_back();
  item.context = std::move(panels);

  const auto report = validate_item(item, cat);
  if (!report.verdict) throw InfeasibleError("validator: " + failure_text(report));

  if (gp.unspecified == UnspecifiedPolicy::random) {
    std::vector<Feature> features;
    for (const auto& f : free_distractor_features(item, cat)) {
      if (gp.distracting.empty() || std::find(gp.distracting.begin(), gp.distracting.end(),
                                              f.attribute) != gp.distracting.end()) {
        features.push_back(f);
      }
    }
    randomize_features(item, features, cat, rng);
  }

  attach_answers(item, gp.strategy, cat, rng.next());
  const auto solved = solve(item.context, item.answers, cat);
  if (solved.index != item.correct_index) throw InfeasibleError("solver picked another choice");
  return item;
}

}  // namespace

Strategy default_strategy(ProfileId id) {
  switch (id) {
    case ProfileId::imak_lite:
      return Strategy::imak;
    case ProfileId::sandia:
      return Strategy::sandia_c;
    case ProfileId::pgm_line:
      return Strategy::impartial;  // too few line features for a 7-leaf star
    default:
      return Strategy::star;
  }
}

GenerationProfile default_profile(ProfileId id) {
  const Catalog& cat = catalog(id);
  GenerationProfile gp;
  gp.profile = id;
  gp.min_rules = cat.min_rules;
  gp.max_rules = cat.max_rules;
  gp.directions = cat.directions;
  gp.distracting = cat.distracting;
  gp.strategy = default_strategy(id);
  if (id == ProfileId::hornke) {
    gp.organizations = {Organization::separation, Organization::integration,
                        Organization::embedding};
  }
  return gp;
}

void check_profile(const GenerationProfile& gp) {
  const Catalog& cat = catalog(gp.profile);
  if (gp.min_rules < cat.min_rules || gp.max_rules > cat.max_rules ||
      gp.min_rules > gp.max_rules) {
    throw CatalogError("rule-count bounds outside the catalog's");
  }
  if (gp.directions.empty()) throw CatalogError("profile allows no direction");
  for (auto d : gp.directions) {
    if (!cat.allows(d)) {
      throw CatalogError("direction " + std::string(to_string(d)) + " not in the catalog");
    }
  }
  for (auto a : gp.distracting) {
    if (!cat.distracting.empty() &&
        std::find(cat.distracting.begin(), cat.distracting.end(), a) == cat.distracting.end()) {
      throw CatalogError("attribute " + std::string(to_string(a)) + " is not distracting here");
    }
  }
  for (const auto& id : gp.configurations) cat.configuration(id);
  if (gp.attempt_budget < 1) throw CatalogError("attempt budget must be positive");
}

GenerationProfile set_view_mode(GenerationProfile gp, ViewMode mode) {
  gp.view = mode;
  const Catalog& cat = catalog(gp.profile);
  const auto triplets = cat.triplets();
  const bool any_variation =
      std::any_of(triplets.begin(), triplets.end(), [&](const Triplet& t) {
        return t.relation != RelationKind::constant && view_allows(mode, t);
      });
  if (!any_variation) {
    throw InfeasibleError(std::string(to_string(mode)) + " view leaves no legal triplet for " +
                          std::string(to_string(gp.profile)));
  }
  return gp;
}

ItemSpec sample_item_spec(const GenerationProfile& gp, std::uint64_t seed) {
  check_profile(gp);
  const Catalog& cat = catalog(gp.profile);
  std::string first_failure;
  for (int attempt = 0; attempt < gp.attempt_budget; ++attempt) {
    try {
      return attempt_item(gp, cat, seed, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    } catch (const CatalogError&) {
      throw;
    } catch (const Error& e) {
      if (first_failure.empty()) first_failure = e.what();
    }
  }
  throw BudgetExhaustedError(first_failure, gp.attempt_budget);
}

OrganizationPlan assign_perceptual_organization(std::span<const RuleSpec> rules,
                                                Organization mode, const Catalog& cat) {
  if (rules.empty()) throw InfeasibleError("perceptual organization needs at least one rule");
  OrganizationPlan plan;
  plan.mode = mode;
  switch (mode) {
    case Organization::separation:
      plan.configuration = "Left-Right";
      break;
    case Organization::integration:
      plan.configuration = "center";
      break;
    case Organization::embedding:
      plan.configuration = "Out-InCenter";
      break;
    case Organization::none:
      throw InfeasibleError("organization mode 'none' binds nothing");
  }
  const Configuration* config = nullptr;
  try {
    config = &cat.configuration(plan.configuration);
  } catch (const CatalogError&) {
    throw InfeasibleError(std::string(to_string(mode)) + " needs configuration " +
                          plan.configuration);
  }
  const auto parts = config->components.size();
  if (mode == Organization::integration) {
    for (std::size_t i = 0; i < rules.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (rules[i].attribute == rules[j].attribute) {
          throw InfeasibleError("integration needs distinct attributes");
        }
      }
    }
    plan.components.assign(rules.size(), 0);
    return plan;
  }
  if (mode == Organization::embedding && parts < 2) {
    throw InfeasibleError("embedding needs a multi-part entity");
  }
  if (rules.size() > parts) {
    throw InfeasibleError(std::string(to_string(mode)) + " has " + std::to_string(parts) +
                          " parts for " + std::to_string(rules.size()) + " rules");
  }
  for (std::size_t i = 0; i < rules.size(); ++i) plan.components.push_back(static_cast<int>(i));
  return plan;
}

std::vector<Feature> free_distractor_features(const ItemSpec& item, const Catalog& cat) {
  const Configuration& config = cat.configuration(item.configuration);
  std::vector<Feature> out;
  for (const auto& f : constant_features(item, cat)) {
    if (!is_entity_attribute(f.attribute)) continue;
    const auto& comp = config.components[static_cast<std::size_t>(f.component)];
    if (f.attribute == AttributeId::type && (comp.overlay || comp.fixed_type != kNull)) continue;
    if (cat.domain(f.attribute, comp.name).size() < 2) continue;
    if (!cat.distracting.empty() && std::find(cat.distracting.begin(), cat.distracting.end(),
                                              f.attribute) == cat.distracting.end()) {
      continue;
    }
    out.push_back(f);
  }
  return out;
}

void randomize_features(ItemSpec& item, std::span<const Feature> features, const Catalog& cat,
                        Rng& rng) {
  if (features.empty()) return;
  const Configuration& config = cat.configuration(item.configuration);
  auto scramble = [&](PanelSpec& panel) {
    for (auto& e : panel.entities) {
      for (const auto& f : features) {
        if (e.component != f.component) continue;
        const auto& comp = config.components[static_cast<std::size_t>(f.component)];
        e.set(f.attribute, rng.pick(cat.domain(f.attribute, comp.name).values));
      }
    }
    panel.canonicalize();
  };
  for (auto& p : item.context) scramble(p);
  scramble(item.correct);
  for (const auto& f : features) {
    if (std::find(item.distracting.begin(), item.distracting.end(), f) == item.distracting.end()) {
      item.distracting.push_back(f);
    }
  }
  std::sort(item.distracting.begin(), item.distracting.end());
  item.harmonic = false;
}

ItemSpec derive_nonharmonic(const ItemSpec& item, int count, std::uint64_t seed) {
  if (count == 0) return item;
  if (count < 0) throw InfeasibleError("negative distractor count");
  if (!item.harmonic) throw InfeasibleError("item is already nonharmonic");
  const Catalog& cat = catalog(item.profile);
  const auto available = free_distractor_features(item, cat);
  if (count > static_cast<int>(available.size())) {
    throw InfeasibleError("distractor count " + std::to_string(count) + " exceeds " +
                          std::to_string(available.size()) + " free attributes");
  }
  constexpr int kBudget = 200;
  std::string first_failure;
  for (int attempt = 0; attempt < kBudget; ++attempt) {
    Rng rng(derive_seed(derive_seed(seed, "nonharmonic"), static_cast<std::uint64_t>(attempt)));
    ItemSpec out = item;
    auto chosen = available;
    rng.shuffle(chosen);
    chosen.resize(static_cast<std::size_t>(count));
    try {
      randomize_features(out, chosen, cat, rng);
      attach_answers(out, item.strategy, cat, rng.next());
      if (solve(out.context, out.answers, cat).index == out.correct_index) return out;
      if (first_failure.empty()) first_failure = "solver picked another choice";
    } catch (const Error& e) {
      if (first_failure.empty()) first_failure = e.what();
    }
  }
  throw BudgetExhaustedError(first_failure, kBudget);
}

}  // namespace fapforge
