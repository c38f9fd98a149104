#include "fapforge/types.hpp"

#include <array>
#include <sstream>
#include <utility>

namespace fapforge {

namespace {

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
E parse_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view name,
           const char* what) {
  for (const auto& [e, n] : table) {
    if (n == name) return e;
  }
  throw Error(std::string("unknown ") + what + ": '" + std::string(name) + "'");
}

constexpr std::array<std::pair<ProfileId, std::string_view>, 7> kProfiles{{
    {ProfileId::pgm, "pgm"},
    {ProfileId::pgm_shape, "pgm-shape"},
    {ProfileId::pgm_line, "pgm-line"},
    {ProfileId::raven, "raven"},
    {ProfileId::sandia, "sandia"},
    {ProfileId::hornke, "hornke"},
    {ProfileId::imak_lite, "imak-lite"},
}};

constexpr std::array<std::pair<AttributeId, std::string_view>, 7> kAttributes{{
    {AttributeId::type, "type"},
    {AttributeId::size, "size"},
    {AttributeId::color, "color"},
    {AttributeId::angle, "angle"},
    {AttributeId::uniformity, "uniformity"},
    {AttributeId::number, "number"},
    {AttributeId::position, "position"},
}};

constexpr std::array<std::pair<RelationKind, std::string_view>, 8> kRelations{{
    {RelationKind::constant, "constant"},
    {RelationKind::progression, "progression"},
    {RelationKind::arithmetic, "arithmetic"},
    {RelationKind::union_, "union"},
    {RelationKind::intersection, "intersection"},
    {RelationKind::symmetric_difference, "xor"},
    {RelationKind::set_subtraction, "subtraction"},
    {RelationKind::distribution_of_three, "distribution"},
}};

constexpr std::array<std::pair<Target, std::string_view>, 2> kTargets{{
    {Target::layout, "layout"},
    {Target::entity, "entity"},
}};

constexpr std::array<std::pair<Direction, std::string_view>, 4> kDirections{{
    {Direction::row, "row"},
    {Direction::column, "column"},
    {Direction::main_diagonal, "main-diagonal"},
    {Direction::secondary_diagonal, "secondary-diagonal"},
}};

constexpr std::array<std::pair<Strategy, std::string_view>, 10> kStrategies{{
    {Strategy::star, "star"},
    {Strategy::impartial, "impartial"},
    {Strategy::fair_tree, "fair-tree"},
    {Strategy::sandia_a, "sandia-a"},
    {Strategy::sandia_b, "sandia-b"},
    {Strategy::sandia_c, "sandia-c"},
    {Strategy::sandia_d, "sandia-d"},
    {Strategy::sandia_e, "sandia-e"},
    {Strategy::sandia_f, "sandia-f"},
    {Strategy::imak, "imak"},
}};

constexpr std::array<std::pair<Organization, std::string_view>, 4> kOrganizations{{
    {Organization::none, "none"},
    {Organization::separation, "separation"},
    {Organization::integration, "integration"},
    {Organization::embedding, "embedding"},
}};

}  // namespace

AmbiguityError::AmbiguityError(std::vector<int> tied)
    : Error([&] {
        std::ostringstream os;
        os << "ambiguous item: choices";
        for (int i : tied) os << ' ' << i;
        os << " all satisfy the induced rules";
        return os.str();
      }()),
      tied_(std::move(tied)) {}

std::string_view to_string(ProfileId id) { return name_of(kProfiles, id); }
std::string_view to_string(AttributeId id) { return name_of(kAttributes, id); }
std::string_view to_string(RelationKind kind) { return name_of(kRelations, kind); }
std::string_view to_string(Target target) { return name_of(kTargets, target); }
std::string_view to_string(Direction direction) { return name_of(kDirections, direction); }
std::string_view to_string(Strategy strategy) { return name_of(kStrategies, strategy); }
std::string_view to_string(Organization organization) {
  return name_of(kOrganizations, organization);
}

std::string_view to_string(RelationClass cls) {
  switch (cls) {
    case RelationClass::unary: return "unary";
    case RelationClass::binary: return "binary";
    case RelationClass::ternary: return "ternary";
  }
  return "?";
}

std::string_view to_string(ViewMode mode) {
  switch (mode) {
    case ViewMode::any: return "any";
    case ViewMode::classical: return "classical";
    case ViewMode::normal: return "normal";
  }
  return "?";
}

ProfileId parse_profile(std::string_view name) { return parse_of(kProfiles, name, "profile"); }
AttributeId parse_attribute(std::string_view name) {
  if (name == "orientation") return AttributeId::angle;
  if (name == "shape") return AttributeId::type;
  return parse_of(kAttributes, name, "attribute");
}
RelationKind parse_relation_kind(std::string_view name) {
  return parse_of(kRelations, name, "relation");
}
Target parse_target(std::string_view name) { return parse_of(kTargets, name, "target"); }
Direction parse_direction(std::string_view name) {
  return parse_of(kDirections, name, "direction");
}
Strategy parse_strategy(std::string_view name) { return parse_of(kStrategies, name, "strategy"); }
Organization parse_organization(std::string_view name) {
  return parse_of(kOrganizations, name, "perceptual organization");
}

bool is_set_relation(RelationKind kind) {
  switch (kind) {
    case RelationKind::union_:
    case RelationKind::intersection:
    case RelationKind::symmetric_difference:
    case RelationKind::set_subtraction:
      return true;
    default:
      return false;
  }
}

RelationClass relation_class(RelationKind kind) {
  switch (kind) {
    case RelationKind::constant:
    case RelationKind::progression:
      return RelationClass::unary;
    case RelationKind::distribution_of_three:
      return RelationClass::ternary;
    default:
      return RelationClass::binary;
  }
}

std::string describe(const RuleSpec& rule) {
  std::ostringstream os;
  os << to_string(rule.relation.kind);
  if (rule.relation.kind == RelationKind::progression ||
      rule.relation.kind == RelationKind::arithmetic) {
    os << '(' << (rule.relation.parameter > 0 ? "+" : "") << rule.relation.parameter << ')';
  }
  if (rule.relation.with_null) os << "(null)";
  os << '/' << to_string(rule.target) << '/' << to_string(rule.attribute) << '@'
     << to_string(rule.direction);
  if (rule.component != kAllComponents) os << "#c" << rule.component;
  return os.str();
}

}  // namespace fapforge
