#include "fapforge/validator.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace fapforge {

bool RuleCheck::ok() const {
  return std::all_of(lines.begin(), lines.end(), [](const LineResult& l) { return l.ok; });
}

namespace {

std::string show(const std::optional<LineValue>& v) {
  if (!v) return "<none>";
  std::ostringstream os;
  if (v->set_valued) {
    os << '{';
    bool first = true;
    for (int e : mask_elements(v->set)) {
      os << (first ? "" : ",") << e;
      first = false;
    }
    os << '}';
  } else if (v->scalar == kNull) {
    os << "null";
  } else {
    os << v->scalar;
  }
  return os.str();
}

bool observes_as_set(const RuleSpec& rule) {
  return is_set_relation(rule.relation.kind) || rule.attribute == AttributeId::position;
}

std::vector<int> rule_components(const RuleSpec& rule, const Configuration& config) {
  std::vector<int> out;
  if (rule.component == kAllComponents) {
    for (std::size_t c = 0; c < config.components.size(); ++c) out.push_back(static_cast<int>(c));
  } else {
    if (rule.component < 0 || rule.component >= static_cast<int>(config.components.size())) {
      throw StructuralError("rule " + describe(rule) + " names a missing component");
    }
    out.push_back(rule.component);
  }
  return out;
}

}  // namespace

ValueSpace value_space(const Catalog& cat, const Configuration& config, int component,
                       AttributeId attribute, const Relation& relation) {
  const Component& comp = config.components.at(static_cast<std::size_t>(component));
  if (!cat.has_attribute(attribute, comp.name)) {
    throw StructuralError("attribute '" + std::string(to_string(attribute)) +
                          "' absent from component '" + comp.name + "'");
  }
  if (attribute == AttributeId::position) {
    return ValueSpace::sets(static_cast<int>(comp.slots.size()), true);
  }
  const auto& domain = cat.domain(attribute, comp.name);
  if (is_set_relation(relation.kind)) return ValueSpace::sets(domain.size());
  ValueSpace space = ValueSpace::scalar(domain.values);
  space.allow_null = relation.with_null;
  return space;
}

int governing_line(const GridFormat& format, Direction direction) {
  return blank_line(format, direction) == 0 ? 1 : 0;
}

RuleCheck check_rule(std::span<const PanelSpec> grid, const RuleSpec& rule, const Catalog& cat,
                     const GridFormat& format) {
  if (static_cast<int>(grid.size()) != format.cells()) {
    throw StructuralError("check_rule needs a complete grid");
  }
  const Configuration& config = cat.configuration(grid.front().configuration);
  RuleCheck result;
  result.rule = rule;
  const auto lines = grid_lines(format, rule.direction);
  const bool as_set = observes_as_set(rule);

  for (int c : rule_components(rule, config)) {
    const ValueSpace space = value_space(cat, config, c, rule.attribute, rule.relation);
    std::vector<std::vector<std::optional<LineValue>>> values;
    for (const auto& line : lines) {
      std::vector<std::optional<LineValue>> vs;
      for (int cell : line) {
        vs.push_back(observe(grid[static_cast<std::size_t>(cell)], c, rule.attribute, as_set));
      }
      values.push_back(std::move(vs));
    }

    std::vector<LineValue> governing;
    bool governing_ok = true;
    if (rule.relation.kind == RelationKind::distribution_of_three) {
      const auto& g = values[static_cast<std::size_t>(governing_line(format, rule.direction))];
      for (const auto& v : g) {
        if (!v || (!space.contains(*v) && !(rule.relation.with_null && v->scalar == kNull))) {
          governing_ok = false;
          break;
        }
        governing.push_back(*v);
      }
      if (governing_ok) {
        std::set<LineValue> distinct(governing.begin(), governing.end());
        const auto nulls = std::count(governing.begin(), governing.end(), LineValue::of(kNull));
        governing_ok = distinct.size() == governing.size() && governing.size() == 3 &&
                       nulls == (rule.relation.with_null ? 1 : 0);
      }
    }

    for (std::size_t li = 0; li < lines.size(); ++li) {
      const auto& vs = values[li];
      bool ok = std::all_of(vs.begin(), vs.end(), [](const auto& v) { return v.has_value(); });
      std::vector<LineValue> line;
      if (ok) {
        for (const auto& v : vs) line.push_back(*v);
      }
      if (ok && rule.relation.kind == RelationKind::distribution_of_three) {
        ok = governing_ok && relation_holds(rule.relation, line, space, governing);
        // Latin arrangement: no value repeats at the same position of an
        // earlier line.
        for (std::size_t prev = 0; ok && prev < li; ++prev) {
          for (std::size_t k = 0; k < line.size(); ++k) {
            if (values[prev][k] == vs[k]) ok = false;
          }
        }
      } else if (ok) {
        ok = relation_holds(rule.relation, line, space);
      }
      result.lines.push_back(LineResult{c, static_cast<int>(li), ok});
      if (!ok && !result.counterexample) {
        Counterexample ce;
        ce.component = c;
        ce.line = static_cast<int>(li);
        ce.attribute = rule.attribute;
        ce.found = show(vs.back());
        std::optional<LineValue> expected;
        try {
          if (line.size() == vs.size() && line.size() >= 2) {
            std::span<const LineValue> prefix(line.data(), line.size() - 1);
            if (rule.relation.kind == RelationKind::distribution_of_three) {
              if (governing_ok) expected = apply_relation(rule.relation, prefix, space, governing);
            } else {
              expected = apply_relation(rule.relation, prefix, space);
            }
          }
        } catch (const Error&) {
        }
        ce.expected = show(expected);
        result.counterexample = ce;
      }
    }
  }
  return result;
}

std::vector<AttributeId> derived_attributes(std::span<const RuleSpec> rules,
                                            const Component& component, int component_index) {
  std::vector<AttributeId> out;
  for (const auto& rule : rules) {
    if (!same_scope(rule.component, component_index) || !count_driving(rule)) continue;
    for (auto a : {AttributeId::number, AttributeId::position}) {
      if (a != rule.attribute) out.push_back(a);
    }
    if (component.overlay && rule.attribute != AttributeId::type) out.push_back(AttributeId::type);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Feature> constant_features(const ItemSpec& item, const Catalog& cat) {
  const Configuration& config = cat.configuration(item.configuration);
  std::vector<Feature> out;
  for (std::size_t ci = 0; ci < config.components.size(); ++ci) {
    const int c = static_cast<int>(ci);
    const auto& comp = config.components[ci];
    const auto derived = derived_attributes(item.rules, comp, c);
    for (auto a : {AttributeId::type, AttributeId::size, AttributeId::color, AttributeId::angle,
                   AttributeId::uniformity, AttributeId::number, AttributeId::position}) {
      if (!cat.has_attribute(a, comp.name)) continue;
      if (std::find(derived.begin(), derived.end(), a) != derived.end()) continue;
      const bool ruled = std::any_of(item.rules.begin(), item.rules.end(), [&](const RuleSpec& r) {
        return same_scope(r.component, c) &&
               (r.attribute == a ||
                // constant position pins the count as well
                (a == AttributeId::number && r.attribute == AttributeId::position));
      });
      if (ruled) continue;
      const Feature f{c, a};
      if (std::find(item.distracting.begin(), item.distracting.end(), f) !=
          item.distracting.end()) {
        continue;
      }
      out.push_back(f);
    }
  }
  return out;
}

std::string panel_problem(const PanelSpec& panel, const Catalog& cat) {
  const Configuration* config = nullptr;
  try {
    config = &cat.configuration(panel.configuration);
  } catch (const CatalogError& e) {
    return e.what();
  }
  std::set<std::pair<int, int>> keys;
  for (const auto& e : panel.entities) {
    if (e.component < 0 || e.component >= static_cast<int>(config->components.size())) {
      return "entity in a missing component";
    }
    const auto& comp = config->components[static_cast<std::size_t>(e.component)];
    if (e.slot < 0 || e.slot >= static_cast<int>(comp.slots.size())) {
      return "entity in a missing slot of " + comp.name;
    }
    if (!keys.insert({e.component, entity_key(e, comp)}).second) {
      return comp.overlay ? "two overlaid parts share a type in " + comp.name
                          : "two entities share a slot in " + comp.name;
    }
  }
  return {};
}

ValidityReport validate_grid(const ItemSpec& item, std::span<const PanelSpec> grid,
                             const Catalog& cat) {
  ValidityReport report;
  for (const auto& panel : grid) {
    if (panel.configuration != item.configuration) {
      report.structure_ok = false;
      report.structure_error = "panel configuration differs from the item's";
      break;
    }
    if (auto problem = panel_problem(panel, cat); !problem.empty()) {
      report.structure_ok = false;
      report.structure_error = problem;
      break;
    }
  }
  if (!report.structure_ok) {
    report.verdict = false;
    return report;
  }

  for (std::size_t i = 0; i < item.rules.size(); ++i) {
    RuleCheck rc = check_rule(grid, item.rules[i], cat, item.format);
    if (rc.counterexample) rc.counterexample->rule_index = static_cast<int>(i);
    if (!rc.ok() && !report.first_failure) report.first_failure = rc.counterexample;
    report.rules.push_back(std::move(rc));
  }

  for (const auto& f : constant_features(item, cat)) {
    const bool entity = is_entity_attribute(f.attribute);
    std::optional<LineValue> reference;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto& panel = grid[k];
      if (entity && panel.count(f.component) == 0) continue;
      const auto v = observe(panel, f.component, f.attribute, false);
      const bool consistent = v.has_value() && (!reference || *reference == *v);
      if (!consistent) {
        report.constancy_ok = false;
        if (!report.first_failure) {
          Counterexample ce;
          ce.component = f.component;
          ce.attribute = f.attribute;
          ce.expected = show(reference);
          ce.found = show(v);
          report.first_failure = ce;
        }
        break;
      }
      reference = v;
    }
  }

  report.verdict = report.structure_ok && report.constancy_ok &&
                   std::all_of(report.rules.begin(), report.rules.end(),
                               [](const RuleCheck& r) { return r.ok(); });
  return report;
}

ValidityReport validate_item(const ItemSpec& item, const Catalog& cat) {
  const auto grid = item.complete_grid();
  return validate_grid(item, grid, cat);
}

ValidityReport validate_item(const ItemSpec& item) {
  return validate_item(item, catalog(item.profile));
}

bool completes_validly(const ItemSpec& item, const PanelSpec& answer, const Catalog& cat) {
  const auto grid = item.grid_with(answer);
  return validate_grid(item, grid, cat).verdict;
}

std::vector<RuleSpec> rule_instances(const Catalog& cat, const Configuration& config) {
  std::vector<RuleSpec> out;
  const bool two_cells = cat.format.rows == 2 || cat.format.cols == 2;
  for (const auto& t : cat.triplets()) {
    for (std::size_t ci = 0; ci < config.components.size(); ++ci) {
      const auto& comp = config.components[ci];
      if (!t.object.empty() && comp.name != t.object) continue;
      if (!cat.has_attribute(t.attribute, comp.name)) continue;
      std::vector<Relation> relations;
      switch (t.relation) {
        case RelationKind::progression:
          for (int step : {1, -1, 2, -2}) relations.push_back({t.relation, step, false});
          break;
        case RelationKind::arithmetic:
          for (int sign : {1, -1}) relations.push_back({t.relation, sign, false});
          break;
        case RelationKind::distribution_of_three:
          relations.push_back({t.relation, 0, false});
          if (t.attribute == AttributeId::type) relations.push_back({t.relation, 0, true});
          break;
        default:
          relations.push_back({t.relation, 0, false});
      }
      for (Direction d : cat.directions) {
        for (const auto& r : relations) {
          if (two_cells && r.kind != RelationKind::constant &&
              r.kind != RelationKind::progression) {
            continue;
          }
          out.push_back(RuleSpec{r, t.target, t.attribute, d, static_cast<int>(ci)});
        }
      }
    }
  }
  // Constancy of every attribute is part of validity whether or not the
  // catalog lists a constant path for it.
  for (std::size_t ci = 0; ci < config.components.size(); ++ci) {
    const auto& comp = config.components[ci];
    for (auto a : {AttributeId::type, AttributeId::size, AttributeId::color, AttributeId::angle,
                   AttributeId::uniformity, AttributeId::number, AttributeId::position}) {
      if (!cat.has_attribute(a, comp.name)) continue;
      const Triplet t{RelationKind::constant, natural_target(a), a, {}};
      const bool listed = std::any_of(out.begin(), out.end(), [&](const RuleSpec& r) {
        return r.component == static_cast<int>(ci) && r.attribute == a &&
               r.relation.kind == RelationKind::constant;
      });
      if (listed) continue;
      for (Direction d : cat.directions) {
        out.push_back(RuleSpec{Relation{}, t.target, a, d, static_cast<int>(ci)});
      }
    }
  }
  return out;
}

namespace {

// Whether the rule holds on every line of the context that avoids the blank.
bool holds_on_complete_lines(std::span<const PanelSpec> context, const RuleSpec& rule,
                             const Catalog& cat, const GridFormat& format) {
  // Pad the blank with a copy of the first panel; lines through it are
  // ignored below.
  std::vector<PanelSpec> grid(context.begin(), context.end());
  grid.push_back(context.front());
  const int blank = blank_line(format, rule.direction);
  RuleCheck rc = check_rule(grid, rule, cat, format);
  bool any = false;
  for (const auto& l : rc.lines) {
    if (l.line == blank) continue;
    if (!l.ok) return false;
    any = true;
  }
  return any;
}

GridFormat format_for(std::size_t context_size, const Catalog& cat) {
  if (static_cast<int>(context_size) == cat.format.context_size()) return cat.format;
  if (context_size == 8) return GridFormat{3, 3};
  if (context_size == 3) return GridFormat{2, 2};
  throw StructuralError("context of " + std::to_string(context_size) + " panels");
}

}  // namespace

SolveResult solve(std::span<const PanelSpec> context, std::span<const PanelSpec> answers,
                  const Catalog& cat) {
  if (context.empty()) throw StructuralError("empty context");
  const GridFormat format = format_for(context.size(), cat);
  const Configuration& config = cat.configuration(context.front().configuration);

  SolveResult result;
  for (const auto& rule : rule_instances(cat, config)) {
    if (holds_on_complete_lines(context, rule, cat, format)) result.retained.push_back(rule);
  }

  std::vector<int> satisfying;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    std::vector<PanelSpec> grid(context.begin(), context.end());
    grid.push_back(answers[i]);
    if (!panel_problem(answers[i], cat).empty() ||
        answers[i].configuration != context.front().configuration) {
      continue;
    }
    const bool all = std::all_of(result.retained.begin(), result.retained.end(),
                                 [&](const RuleSpec& r) {
                                   return check_rule(grid, r, cat, format).ok();
                                 });
    if (all) satisfying.push_back(static_cast<int>(i));
  }
  if (satisfying.empty()) throw UnsolvableError("no answer choice satisfies the induced rules");
  if (satisfying.size() > 1) throw AmbiguityError(satisfying);
  result.index = satisfying.front();

  // Report the weakest class per (component, attribute).
  std::map<std::pair<int, AttributeId>, RelationClass> weakest;
  for (const auto& r : result.retained) {
    const auto key = std::make_pair(r.component, r.attribute);
    const auto cls = relation_class(r.relation.kind);
    auto it = weakest.find(key);
    if (it == weakest.end() || cls < it->second) weakest[key] = cls;
  }
  for (const auto& r : result.retained) {
    if (relation_class(r.relation.kind) == weakest[{r.component, r.attribute}]) {
      result.induced.push_back(r);
    }
  }
  return result;
}

SolveResult solve(std::span<const PanelSpec> context, std::span<const PanelSpec> answers,
                  ProfileId profile) {
  return solve(context, answers, catalog(profile));
}

}  // namespace fapforge
