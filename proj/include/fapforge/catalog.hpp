#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fapforge/types.hpp"

namespace fapforge {

// Slot bounding box in normalized panel coordinates.
struct Box {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool inside_unit_square() const { return x0 >= 0 && y0 >= 0 && x1 <= 1 && y1 <= 1; }
  bool overlaps(const Box& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }
  bool contains(const Box& o) const {
    return o.x0 >= x0 && o.y0 >= y0 && o.x1 <= x1 && o.y1 <= y1;
  }
};

// A component is one independently governed layer of a panel. Grid
// components key entities by slot; overlay components have a single slot
// and key their overlaid parts by type.
struct Component {
  std::string name;
  bool overlay = false;
  std::vector<Box> slots;
  Value fixed_type = kNull;  // type pinned by the catalog, kNull when free

  int capacity(int type_count) const {
    return overlay ? type_count : static_cast<int>(slots.size());
  }
};

struct Configuration {
  std::string id;
  std::vector<Component> components;

  int component_index(std::string_view name) const;  // -1 when absent
};

struct AttributeDomain {
  AttributeId id = AttributeId::type;
  Target target = Target::entity;
  std::vector<std::string> labels;
  std::vector<Value> values;  // ascending

  int size() const { return static_cast<int>(values.size()); }
  Value min() const { return values.front(); }
  Value max() const { return values.back(); }
  bool contains(Value v) const;
};

struct CatalogPath {
  Triplet triplet;
  std::string rule;  // paths sharing a label form one rule
};

class Catalog {
 public:
  ProfileId profile = ProfileId::pgm;
  int version = 1;
  bool reconstructed = false;
  std::string note;
  GridFormat format;
  std::vector<Direction> directions;
  int min_rules = 1;
  int max_rules = 4;
  bool meta_options = false;
  std::vector<AttributeDomain> attributes;
  std::map<std::string, std::vector<AttributeDomain>, std::less<>> object_attributes;
  std::vector<AttributeId> distracting;
  std::vector<Configuration> configurations;
  std::vector<CatalogPath> paths;

  bool has_attribute(AttributeId id, std::string_view object = {}) const;
  // Domain of `id`, specialised for `object` when the catalog has per-object
  // domains. Throws CatalogError when the attribute is absent.
  const AttributeDomain& domain(AttributeId id, std::string_view object = {}) const;
  const Configuration& configuration(std::string_view id) const;
  bool allows(Direction d) const;

  // Legal triplets, one per rule label, in catalog order.
  std::vector<Triplet> triplets() const;
  bool legal(const Triplet& t) const;
};

Catalog parse_catalog(std::string_view json_text);
Catalog load_catalog(const std::filesystem::path& file);

// FAPFORGE_CATALOG_DIR when set, otherwise the directory checked into the
// source tree.
std::filesystem::path catalog_dir();

// Process-wide immutable registry, loaded once on first use.
const Catalog& catalog(ProfileId id);

std::vector<Triplet> enumerate_triplets(ProfileId id);
std::vector<Triplet> enumerate_triplets(const Catalog& cat);
const AttributeDomain& attribute_domain(ProfileId id, AttributeId attribute);

struct Compatibility {
  bool ok = true;
  std::string reason;  // machine-readable tag, empty when ok
  std::string detail;

  explicit operator bool() const { return ok; }
};

// Legality of a rule combination for a profile. `config`, when given,
// resolves component names and overlay flags.
Compatibility compatible(std::span<const RuleSpec> rules, const Catalog& cat,
                         const Configuration* config = nullptr, bool enforce_count = true);

// Rules whose component scopes intersect.
inline bool same_scope(int a, int b) {
  return a == kAllComponents || b == kAllComponents || a == b;
}

// A rule that fixes how many entities a component holds.
bool count_driving(const RuleSpec& rule);

}  // namespace fapforge
