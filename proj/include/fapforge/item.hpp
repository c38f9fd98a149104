#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fapforge/catalog.hpp"
#include "fapforge/types.hpp"

namespace fapforge {

struct Entity {
  int component = 0;
  int slot = 0;
  std::array<Value, kEntityAttributeCount> attrs{};  // type, size, color, angle, uniformity

  Value get(AttributeId a) const { return attrs[static_cast<std::size_t>(entity_index(a))]; }
  void set(AttributeId a, Value v) { attrs[static_cast<std::size_t>(entity_index(a))] = v; }

  friend bool operator==(const Entity&, const Entity&) = default;
  friend auto operator<=>(const Entity&, const Entity&) = default;
};

// Symbolic description of one figure.
struct PanelSpec {
  std::string configuration;
  std::vector<Entity> entities;  // canonical order: (component, slot, attrs)

  void canonicalize();
  int count(int component) const;
  Mask positions(int component) const;
  std::vector<Entity> in_component(int component) const;

  friend bool operator==(const PanelSpec&, const PanelSpec&) = default;
};

// Entity key inside its component: the slot for grid components, the type
// for overlaid parts.
inline int entity_key(const Entity& e, const Component& c) {
  return c.overlay ? e.get(AttributeId::type) : e.slot;
}

struct ItemSpec {
  ProfileId profile = ProfileId::raven;
  GridFormat format;
  std::string configuration;
  std::vector<RuleSpec> rules;
  std::vector<PanelSpec> context;  // rows*cols - 1 panels, row-major
  PanelSpec correct;
  std::vector<PanelSpec> answers;  // 8 choices
  int correct_index = 0;
  Strategy strategy = Strategy::star;
  Organization organization = Organization::none;
  bool harmonic = true;
  std::vector<Feature> distracting;  // attributes left random across panels
  bool meta_options = false;         // "none of the above" / "I don't know"
  std::uint64_t seed = 0;

  // Context plus `answer` in the blank cell, row-major.
  std::vector<PanelSpec> grid_with(const PanelSpec& answer) const;
  std::vector<PanelSpec> complete_grid() const { return grid_with(correct); }

  friend bool operator==(const ItemSpec&, const ItemSpec&) = default;
};

// One observed value of a (component, attribute) feature in a panel.
struct LineValue {
  bool set_valued = false;
  Value scalar = 0;
  Mask set = 0;

  static LineValue of(Value v) { return LineValue{false, v, 0}; }
  static LineValue of_set(Mask m) { return LineValue{true, 0, m}; }

  friend bool operator==(const LineValue&, const LineValue&) = default;
  friend auto operator<=>(const LineValue&, const LineValue&) = default;
};

// Reads a feature from a panel. Number is the entity count, position the
// occupied-slot set; entity attributes read as the set of values present
// (`as_set`) or as the single value shared by all entities. Returns nullopt
// when a shared value does not exist.
std::optional<LineValue> observe(const PanelSpec& panel, int component, AttributeId attribute,
                                 bool as_set);

int popcount(Mask m);
std::vector<int> mask_elements(Mask m);
Mask mask_of(const std::vector<int>& elements);

}  // namespace fapforge
