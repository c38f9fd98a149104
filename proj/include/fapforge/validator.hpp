#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fapforge/catalog.hpp"
#include "fapforge/item.hpp"
#include "fapforge/relations.hpp"

namespace fapforge {

struct Counterexample {
  int rule_index = -1;  // -1 for a constancy failure
  int component = 0;
  int line = -1;        // -1 when the failure is not tied to a line
  AttributeId attribute = AttributeId::type;
  std::string expected;
  std::string found;
};

struct LineResult {
  int component = 0;
  int line = 0;
  bool ok = false;
};

struct RuleCheck {
  RuleSpec rule;
  std::vector<LineResult> lines;
  std::optional<Counterexample> counterexample;

  bool ok() const;
};

struct ValidityReport {
  std::vector<RuleCheck> rules;
  bool constancy_ok = true;
  bool structure_ok = true;
  bool verdict = false;  // conjunction of every check above
  std::optional<Counterexample> first_failure;
  std::string structure_error;
};

// The value space a rule's entries range over.
ValueSpace value_space(const Catalog& cat, const Configuration& config, int component,
                       AttributeId attribute, const Relation& relation);

// Line index the distribution-of-three governing triple is read from.
int governing_line(const GridFormat& format, Direction direction);

// Per-line check of one rule over a complete grid (row-major). Throws
// StructuralError when the rule's attribute or component does not exist.
RuleCheck check_rule(std::span<const PanelSpec> grid, const RuleSpec& rule, const Catalog& cat,
                     const GridFormat& format);

// Attributes of `component` that the rule set leaves free to vary as a side
// effect (positions under a number rule, and so on).
std::vector<AttributeId> derived_attributes(std::span<const RuleSpec> rules,
                                            const Component& component, int component_index);

// Attributes every panel must hold constant for the item to be valid.
std::vector<Feature> constant_features(const ItemSpec& item, const Catalog& cat);

// Structural problems of one panel (empty when well formed).
std::string panel_problem(const PanelSpec& panel, const Catalog& cat);

ValidityReport validate_grid(const ItemSpec& item, std::span<const PanelSpec> grid,
                             const Catalog& cat);
ValidityReport validate_item(const ItemSpec& item);
ValidityReport validate_item(const ItemSpec& item, const Catalog& cat);

// Validity with `answer` in the blank cell instead of the correct answer.
bool completes_validly(const ItemSpec& item, const PanelSpec& answer, const Catalog& cat);

struct SolveResult {
  int index = -1;
  std::vector<RuleSpec> induced;  // subset-minimal under unary ⊂ binary ⊂ ternary
  std::vector<RuleSpec> retained;
};

// Every rule instance (triplet × component × direction × parameter) the
// profile can express on this configuration.
std::vector<RuleSpec> rule_instances(const Catalog& cat, const Configuration& config);

// Symbolic solver: induces the rules holding on the complete context lines
// and returns the unique answer choice satisfying all of them. Throws
// UnsolvableError or AmbiguityError.
SolveResult solve(std::span<const PanelSpec> context, std::span<const PanelSpec> answers,
                  ProfileId profile);
SolveResult solve(std::span<const PanelSpec> context, std::span<const PanelSpec> answers,
                  const Catalog& cat);

}  // namespace fapforge
