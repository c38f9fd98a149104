#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fapforge {

// Ordinal attribute value. Number values are entity counts; every other
// attribute stores an index into its catalog domain.
using Value = int;
inline constexpr Value kNull = -1;

// Set-valued attribute (positions, part sets, value sets) as a bitmask.
using Mask = std::uint64_t;

inline constexpr int kAllComponents = -1;

enum class ProfileId { pgm, pgm_shape, pgm_line, raven, sandia, hornke, imak_lite };

enum class AttributeId { type, size, color, angle, uniformity, number, position };
inline constexpr int kEntityAttributeCount = 5;  // type..uniformity

enum class RelationKind {
  constant,
  progression,
  arithmetic,
  union_,
  intersection,
  symmetric_difference,
  set_subtraction,
  distribution_of_three,
};

enum class RelationClass { unary, binary, ternary };

enum class Target { layout, entity };

enum class Direction { row, column, main_diagonal, secondary_diagonal };

enum class ViewMode { any, classical, normal };

enum class Organization { none, separation, integration, embedding };

enum class Strategy {
  star,
  impartial,
  fair_tree,
  sandia_a,
  sandia_b,
  sandia_c,
  sandia_d,
  sandia_e,
  sandia_f,
  imak,
};

struct Relation {
  RelationKind kind = RelationKind::constant;
  // Progression step (±1, ±2) or arithmetic sign (+1 / -1). Zero otherwise.
  int parameter = 0;
  // Distribution-of-two: a distribution-of-three whose triple holds kNull.
  bool with_null = false;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct RuleSpec {
  Relation relation;
  Target target = Target::entity;
  AttributeId attribute = AttributeId::type;
  Direction direction = Direction::row;
  int component = kAllComponents;

  friend bool operator==(const RuleSpec&, const RuleSpec&) = default;
};

// One [relation, object, attribute] path of a profile's dependency graph.
struct Triplet {
  RelationKind relation = RelationKind::constant;
  Target target = Target::entity;
  AttributeId attribute = AttributeId::type;
  std::string object;  // component name the path is bound to; empty = any

  friend bool operator==(const Triplet&, const Triplet&) = default;
  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

struct Feature {
  int component = 0;
  AttributeId attribute = AttributeId::type;

  friend bool operator==(const Feature&, const Feature&) = default;
  friend auto operator<=>(const Feature&, const Feature&) = default;
};

struct GridFormat {
  int rows = 3;
  int cols = 3;

  int cells() const { return rows * cols; }
  int context_size() const { return rows * cols - 1; }
  friend bool operator==(const GridFormat&, const GridFormat&) = default;
};

// Errors -------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CatalogError : public Error {
 public:
  using Error::Error;
};

// Relation completion left the attribute domain; callers resample.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Rule or panel does not fit the structure it is applied to.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class BudgetExhaustedError : public Error {
 public:
  BudgetExhaustedError(std::string constraint, int attempts)
      : Error("attempt budget of " + std::to_string(attempts) +
              " exhausted; first unsatisfiable constraint: " + constraint),
        constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

class UnsolvableError : public Error {
 public:
  using Error::Error;
};

class AmbiguityError : public Error {
 public:
  explicit AmbiguityError(std::vector<int> tied);
  const std::vector<int>& tied() const { return tied_; }

 private:
  std::vector<int> tied_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Names ---------------------------------------------------------------------

std::string_view to_string(ProfileId id);
std::string_view to_string(AttributeId id);
std::string_view to_string(RelationKind kind);
std::string_view to_string(Target target);
std::string_view to_string(Direction direction);
std::string_view to_string(Strategy strategy);
std::string_view to_string(Organization organization);
std::string_view to_string(RelationClass cls);
std::string_view to_string(ViewMode mode);

ProfileId parse_profile(std::string_view name);
AttributeId parse_attribute(std::string_view name);
RelationKind parse_relation_kind(std::string_view name);
Target parse_target(std::string_view name);
Direction parse_direction(std::string_view name);
Strategy parse_strategy(std::string_view name);
Organization parse_organization(std::string_view name);

std::string describe(const RuleSpec& rule);

inline bool is_entity_attribute(AttributeId a) {
  return static_cast<int>(a) < kEntityAttributeCount;
}
inline int entity_index(AttributeId a) { return static_cast<int>(a); }

inline Target natural_target(AttributeId a) {
  return is_entity_attribute(a) ? Target::entity : Target::layout;
}

bool is_set_relation(RelationKind kind);
RelationClass relation_class(RelationKind kind);

}  // namespace fapforge
