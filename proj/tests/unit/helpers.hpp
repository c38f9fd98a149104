#pragma once

#include <string>
#include <vector>

#include "fapforge/item.hpp"

namespace testing {

inline fapforge::Entity entity(int component, int slot, fapforge::Value type, fapforge::Value size,
                               fapforge::Value color, fapforge::Value angle = 0,
                               fapforge::Value uniformity = 0) {
  fapforge::Entity e;
  e.component = component;
  e.slot = slot;
  e.attrs = {type, size, color, angle, uniformity};
  return e;
}

inline fapforge::PanelSpec panel(const std::string& config, std::vector<fapforge::Entity> es) {
  fapforge::PanelSpec p;
  p.configuration = config;
  p.entities = std::move(es);
  p.canonicalize();
  return p;
}

// Lowest-order mask bits as element indices.
inline std::vector<int> bits(fapforge::Mask m) {
  std::vector<int> out;
  for (int i = 0; i < 64; ++i) {
    if (m >> i & 1) out.push_back(i);
  }
  return out;
}

}  // namespace testing
