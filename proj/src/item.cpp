#include "fapforge/item.hpp"

#include <algorithm>
#include <bit>

namespace fapforge {

void PanelSpec::canonicalize() { std::sort(entities.begin(), entities.end()); }

int PanelSpec::count(int component) const {
  return static_cast<int>(std::count_if(entities.begin(), entities.end(),
                                        [&](const Entity& e) { return e.component == component; }));
}

Mask PanelSpec::positions(int component) const {
  Mask m = 0;
  for (const auto& e : entities) {
    if (e.component == component) m |= Mask{1} << e.slot;
  }
  return m;
}

std::vector<Entity> PanelSpec::in_component(int component) const {
  std::vector<Entity> out;
  for (const auto& e : entities) {
    if (e.component == component) out.push_back(e);
  }
  return out;
}

std::vector<PanelSpec> ItemSpec::grid_with(const PanelSpec& answer) const {
  std::vector<PanelSpec> grid = context;
  grid.push_back(answer);
  return grid;
}

int popcount(Mask m) { return std::popcount(m); }

std::vector<int> mask_elements(Mask m) {
  std::vector<int> out;
  while (m != 0) {
    out.push_back(std::countr_zero(m));
    m &= m - 1;
  }
  return out;
}

Mask mask_of(const std::vector<int>& elements) {
  Mask m = 0;
  for (int e : elements) m |= Mask{1} << e;
  return m;
}

std::optional<LineValue> observe(const PanelSpec& panel, int component, AttributeId attribute,
                                 bool as_set) {
  if (attribute == AttributeId::number) return LineValue::of(panel.count(component));
  if (attribute == AttributeId::position) return LineValue::of_set(panel.positions(component));
  if (as_set) {
    Mask m = 0;
    for (const auto& e : panel.entities) {
      if (e.component != component) continue;
      const Value v = e.get(attribute);
      if (v < 0 || v >= 64) return std::nullopt;
      m |= Mask{1} << v;
    }
    return LineValue::of_set(m);
  }
  std::optional<Value> shared;
  for (const auto& e : panel.entities) {
    if (e.component != component) continue;
    const Value v = e.get(attribute);
    if (shared && *shared != v) return std::nullopt;
    shared = v;
  }
  if (!shared) return std::nullopt;
  return LineValue::of(*shared);
}

}  // namespace fapforge
