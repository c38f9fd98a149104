#include "fapforge/catalog.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "json.hpp"

#ifndef FAPFORGE_DEFAULT_CATALOG_DIR
#define FAPFORGE_DEFAULT_CATALOG_DIR "catalog"
#endif

namespace fapforge {

using nlohmann::json;

int Configuration::component_index(std::string_view name) const {
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

bool AttributeDomain::contains(Value v) const {
  return std::binary_search(values.begin(), values.end(), v);
}

bool Catalog::has_attribute(AttributeId id, std::string_view object) const {
  if (!object.empty()) {
    if (auto it = object_attributes.find(object); it != object_attributes.end()) {
      return std::any_of(it->second.begin(), it->second.end(),
                         [&](const AttributeDomain& d) { return d.id == id; });
    }
  }
  return std::any_of(attributes.begin(), attributes.end(),
                     [&](const AttributeDomain& d) { return d.id == id; });
}

const AttributeDomain& Catalog::domain(AttributeId id, std::string_view object) const {
  if (!object.empty()) {
    if (auto it = object_attributes.find(object); it != object_attributes.end()) {
      for (const auto& d : it->second) {
        if (d.id == id) return d;
      }
      throw CatalogError("attribute '" + std::string(to_string(id)) + "' absent from object '" +
                         std::string(object) + "' of profile " + std::string(to_string(profile)));
    }
  }
  for (const auto& d : attributes) {
    if (d.id == id) return d;
  }
  throw CatalogError("attribute '" + std::string(to_string(id)) + "' absent from profile " +
                     std::string(to_string(profile)));
}

const Configuration& Catalog::configuration(std::string_view id) const {
  for (const auto& c : configurations) {
    if (c.id == id) return c;
  }
  throw CatalogError("configuration '" + std::string(id) + "' absent from profile " +
                     std::string(to_string(profile)));
}

bool Catalog::allows(Direction d) const {
  return std::find(directions.begin(), directions.end(), d) != directions.end();
}

std::vector<Triplet> Catalog::triplets() const {
  // A merged rule is represented by its last path (constant over number and
  // position collapses to constant position, which pins both).
  std::vector<Triplet> out;
  std::vector<std::string> seen_rules;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    if (!p.rule.empty()) {
      if (std::find(seen_rules.begin(), seen_rules.end(), p.rule) != seen_rules.end()) continue;
      seen_rules.push_back(p.rule);
      const CatalogPath* last = &p;
      for (std::size_t j = i + 1; j < paths.size(); ++j) {
        if (paths[j].rule == p.rule) last = &paths[j];
      }
      out.push_back(last->triplet);
      continue;
    }
    if (std::find(out.begin(), out.end(), p.triplet) == out.end()) out.push_back(p.triplet);
  }
  return out;
}

bool Catalog::legal(const Triplet& t) const {
  const auto all = triplets();
  return std::find(all.begin(), all.end(), t) != all.end();
}

namespace {

std::vector<AttributeDomain> parse_attributes(const json& list, std::size_t position_slots) {
  std::vector<AttributeDomain> out;
  for (const auto& a : list) {
    AttributeDomain d;
    d.id = parse_attribute(a.at("name").get<std::string>());
    d.target = parse_target(a.value("target", std::string(to_string(natural_target(d.id)))));
    if (a.contains("values")) {
      d.values = a.at("values").get<std::vector<Value>>();
      for (Value v : d.values) d.labels.push_back(std::to_string(v));
    } else if (a.contains("labels")) {
      d.labels = a.at("labels").get<std::vector<std::string>>();
      for (std::size_t i = 0; i < d.labels.size(); ++i) d.values.push_back(static_cast<Value>(i));
    } else if (d.id == AttributeId::position) {
      for (std::size_t i = 0; i < position_slots; ++i) {
        d.values.push_back(static_cast<Value>(i));
        d.labels.push_back("slot" + std::to_string(i));
      }
    }
    if (d.values.empty()) {
      throw CatalogError("attribute '" + std::string(to_string(d.id)) + "' has an empty domain");
    }
    if (!std::is_sorted(d.values.begin(), d.values.end()) ||
        std::adjacent_find(d.values.begin(), d.values.end()) != d.values.end()) {
      throw CatalogError("attribute '" + std::string(to_string(d.id)) +
                         "' domain is not strictly ordered");
    }
    out.push_back(std::move(d));
  }
  return out;
}

Box parse_box(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) throw CatalogError("slot box needs 4 coordinates");
  return Box{v[0], v[1], v[2], v[3]};
}

}  // namespace

Catalog parse_catalog(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw CatalogError(std::string("malformed catalog: ") + e.what());
  }
  if (doc.value("schema", std::string()) != "fapforge-catalog") {
    throw CatalogError("not a fapforge catalog (schema tag missing)");
  }
  Catalog cat;
  try {
    cat.version = doc.at("version").get<int>();
    if (cat.version != 1) {
      throw CatalogError("unsupported catalog version " + std::to_string(cat.version));
    }
    cat.profile = parse_profile(doc.at("profile").get<std::string>());
    cat.reconstructed = doc.value("reconstructed", false);
    cat.note = doc.value("note", std::string());
    cat.format.rows = doc.at("format").at("rows").get<int>();
    cat.format.cols = doc.at("format").at("cols").get<int>();
    for (const auto& d : doc.at("directions")) {
      cat.directions.push_back(parse_direction(d.get<std::string>()));
    }
    cat.min_rules = doc.at("rule_count").at("min").get<int>();
    cat.max_rules = doc.at("rule_count").at("max").get<int>();
    cat.meta_options = doc.value("meta_options", false);

    std::map<std::string, Value> fixed_types;
    if (doc.contains("fixed_types")) {
      fixed_types = doc.at("fixed_types").get<std::map<std::string, Value>>();
    }
    std::map<std::string, std::size_t> slots_by_component;
    std::size_t max_slots = 0;
    for (const auto& c : doc.at("configurations")) {
      Configuration config;
      config.id = c.at("id").get<std::string>();
      for (const auto& comp : c.at("components")) {
        Component component;
        component.name = comp.at("name").get<std::string>();
        component.overlay = comp.value("overlay", false);
        for (const auto& s : comp.at("slots")) component.slots.push_back(parse_box(s));
        if (component.slots.empty()) throw CatalogError("component without slots");
        if (component.overlay && component.slots.size() != 1) {
          throw CatalogError("overlay component '" + component.name + "' must have one slot");
        }
        if (auto it = fixed_types.find(component.name); it != fixed_types.end()) {
          component.fixed_type = it->second;
        }
        for (std::size_t i = 0; i < component.slots.size(); ++i) {
          if (!component.slots[i].inside_unit_square()) {
            throw CatalogError("slot box outside the unit square in " + config.id);
          }
          for (std::size_t j = 0; j < i; ++j) {
            if (component.slots[i].overlaps(component.slots[j])) {
              throw CatalogError("overlapping slot boxes in " + config.id + "/" + component.name);
            }
          }
        }
        auto& seen = slots_by_component[component.name];
        seen = std::max(seen, component.slots.size());
        max_slots = std::max(max_slots, component.slots.size());
        config.components.push_back(std::move(component));
      }
      cat.configurations.push_back(std::move(config));
    }
    if (cat.configurations.empty()) throw CatalogError("catalog has no configurations");

    cat.attributes = parse_attributes(doc.at("attributes"), max_slots);
    if (doc.contains("object_attributes")) {
      for (const auto& [object, list] : doc.at("object_attributes").items()) {
        cat.object_attributes[object] = parse_attributes(list, slots_by_component[object]);
      }
    }
    for (const auto& d : doc.value("distracting", json::array())) {
      cat.distracting.push_back(parse_attribute(d.get<std::string>()));
    }
    for (const auto& p : doc.at("paths")) {
      CatalogPath path;
      path.triplet.relation = parse_relation_kind(p.at("relation").get<std::string>());
      path.triplet.target = parse_target(p.at("target").get<std::string>());
      path.triplet.attribute = parse_attribute(p.at("attribute").get<std::string>());
      path.triplet.object = p.value("object", std::string());
      path.rule = p.value("rule", std::string());
      if (!cat.has_attribute(path.triplet.attribute, path.triplet.object)) {
        throw CatalogError("path references attribute '" +
                           std::string(to_string(path.triplet.attribute)) + "' absent from catalog");
      }
      cat.paths.push_back(std::move(path));
    }
  } catch (const json::exception& e) {
    throw CatalogError(std::string("malformed catalog: ") + e.what());
  } catch (const CatalogError&) {
    throw;
  } catch (const Error& e) {
    throw CatalogError(std::string("malformed catalog: ") + e.what());
  }
  return cat;
}

Catalog load_catalog(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw CatalogError("cannot open catalog file " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_catalog(buffer.str());
}

std::filesystem::path catalog_dir() {
  if (const char* env = std::getenv("FAPFORGE_CATALOG_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return FAPFORGE_DEFAULT_CATALOG_DIR;
}

const Catalog& catalog(ProfileId id) {
  static const std::map<ProfileId, Catalog> registry = [] {
    std::map<ProfileId, Catalog> out;
    for (auto p : {ProfileId::pgm, ProfileId::pgm_shape, ProfileId::pgm_line, ProfileId::raven,
                   ProfileId::sandia, ProfileId::hornke, ProfileId::imak_lite}) {
      auto cat = load_catalog(catalog_dir() / (std::string(to_string(p)) + ".json"));
      if (cat.profile != p) {
        throw CatalogError("catalog file for " + std::string(to_string(p)) +
                           " declares another profile");
      }
      out.emplace(p, std::move(cat));
    }
    return out;
  }();
  return registry.at(id);
}

std::vector<Triplet> enumerate_triplets(ProfileId id) { return catalog(id).triplets(); }
std::vector<Triplet> enumerate_triplets(const Catalog& cat) { return cat.triplets(); }

const AttributeDomain& attribute_domain(ProfileId id, AttributeId attribute) {
  return catalog(id).domain(attribute);
}

bool count_driving(const RuleSpec& rule) {
  return rule.target == Target::layout || is_set_relation(rule.relation.kind);
}

namespace {

Compatibility fail(std::string reason, std::string detail) {
  return Compatibility{false, std::move(reason), std::move(detail)};
}

std::string component_name(const Configuration* config, int component) {
  if (config == nullptr || component < 0 ||
      component >= static_cast<int>(config->components.size())) {
    return {};
  }
  return config->components[static_cast<std::size_t>(component)].name;
}

bool overlay_component(const Configuration* config, int component) {
  if (config == nullptr) return false;
  if (component == kAllComponents) {
    return std::any_of(config->components.begin(), config->components.end(),
                       [](const Component& c) { return c.overlay; });
  }
  return config->components.at(static_cast<std::size_t>(component)).overlay;
}

}  // namespace

Compatibility compatible(std::span<const RuleSpec> rules, const Catalog& cat,
                         const Configuration* config, bool enforce_count) {
  for (const auto& rule : rules) {
    Triplet t{rule.relation.kind, rule.target, rule.attribute, {}};
    bool found = false;
    for (const auto& legal : cat.triplets()) {
      if (legal.relation != t.relation || legal.target != t.target ||
          legal.attribute != t.attribute) {
        continue;
      }
      if (!legal.object.empty() && config != nullptr &&
          component_name(config, rule.component) != legal.object) {
        continue;
      }
      found = true;
      break;
    }
    if (!found) return fail("illegal-triplet", describe(rule));
    if (!cat.allows(rule.direction)) return fail("direction", describe(rule));
    if (cat.format.rows == 2 || cat.format.cols == 2) {
      if (rule.relation.kind != RelationKind::constant &&
          rule.relation.kind != RelationKind::progression) {
        return fail("format", describe(rule) + " needs three cells per line");
      }
    }
    if (rule.relation.with_null && rule.attribute != AttributeId::type) {
      return fail("illegal-triplet", "distribution-of-two only applies to type");
    }
  }

  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const auto& a = rules[i];
      const auto& b = rules[j];
      if (!same_scope(a.component, b.component)) continue;
      const bool number_position =
          (a.attribute == AttributeId::number && b.attribute == AttributeId::position) ||
          (a.attribute == AttributeId::position && b.attribute == AttributeId::number);
      if (number_position) {
        return fail("number-position-conflict", describe(a) + " with " + describe(b));
      }
    }
  }
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const auto& a = rules[i];
      const auto& b = rules[j];
      if (!same_scope(a.component, b.component)) continue;
      if (a.attribute == b.attribute) {
        return fail("duplicate-attribute", describe(a) + " with " + describe(b));
      }
    }
  }
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const auto& a = rules[i];
      const auto& b = rules[j];
      if (!same_scope(a.component, b.component)) continue;
      if (count_driving(a) && count_driving(b)) {
        return fail("count-conflict", describe(a) + " with " + describe(b));
      }
      // Overlaid parts are keyed by type, so a count set by another attribute
      // leaves no room for a type rule.
      const int shared = a.component == kAllComponents ? b.component : a.component;
      if (overlay_component(config, shared)) {
        const bool a_keys = count_driving(a) && a.attribute != AttributeId::type &&
                            b.attribute == AttributeId::type;
        const bool b_keys = count_driving(b) && b.attribute != AttributeId::type &&
                            a.attribute == AttributeId::type;
        if (a_keys || b_keys) {
          return fail("count-conflict", describe(a) + " with " + describe(b) + " (overlay)");
        }
      }
    }
  }
  if (cat.profile == ProfileId::sandia && !rules.empty()) {
    const bool logic = is_set_relation(rules.front().relation.kind);
    for (const auto& rule : rules) {
      if (is_set_relation(rule.relation.kind) != logic) {
        return fail("problem-type-mix", "transformation and logic rules in one item");
      }
    }
  }
  if (enforce_count) {
    const int n = static_cast<int>(rules.size());
    if (n < cat.min_rules || n > cat.max_rules) {
      return fail("rule-count", std::to_string(n) + " rules outside [" +
                                    std::to_string(cat.min_rules) + ", " +
                                    std::to_string(cat.max_rules) + "]");
    }
  }
  return {};
}

}  // namespace fapforge
