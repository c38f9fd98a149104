#include "fapforge/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fapforge/catalog.hpp"
#include "json.hpp"

namespace fapforge {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "fapforge-manifest";

json rule_to_json(const RuleSpec& r) {
  return json{{"relation", to_string(r.relation.kind)},
              {"parameter", r.relation.parameter},
              {"with_null", r.relation.with_null},
              {"target", to_string(r.target)},
              {"attribute", to_string(r.attribute)},
              {"direction", to_string(r.direction)},
              {"component", r.component}};
}

RuleSpec rule_from_json(const json& j) {
  RuleSpec r;
  r.relation.kind = parse_relation_kind(j.at("relation").get<std::string>());
  r.relation.parameter = j.at("parameter").get<int>();
  r.relation.with_null = j.at("with_null").get<bool>();
  r.target = parse_target(j.at("target").get<std::string>());
  r.attribute = parse_attribute(j.at("attribute").get<std::string>());
  r.direction = parse_direction(j.at("direction").get<std::string>());
  r.component = j.at("component").get<int>();
  return r;
}

// Entities as compact arrays [component, slot, type, size, color, angle, uniformity].
json panel_to_json(const PanelSpec& p, const std::string& item_configuration) {
  json entities = json::array();
  for (const auto& e : p.entities) {
    json row = {e.component, e.slot};
    for (Value v : e.attrs) row.push_back(v);
    entities.push_back(std::move(row));
  }
  json j{{"entities", std::move(entities)}};
  if (p.configuration != item_configuration) j["configuration"] = p.configuration;
  return j;
}

PanelSpec panel_from_json(const json& j, const std::string& item_configuration) {
  PanelSpec p;
  p.configuration = j.value("configuration", item_configuration);
  for (const auto& row : j.at("entities")) {
    if (!row.is_array() || row.size() != 2 + kEntityAttributeCount) {
      throw SchemaError("entity must be an array of " + std::to_string(2 + kEntityAttributeCount) +
                        " integers");
    }
    Entity e;
    e.component = row[0].get<int>();
    e.slot = row[1].get<int>();
    for (std::size_t k = 0; k < static_cast<std::size_t>(kEntityAttributeCount); ++k) {
      e.attrs[k] = row[2 + k].get<Value>();
    }
    p.entities.push_back(e);
  }
  return p;
}

json model_to_json(const DifficultyModel& m) {
  return json{{"features", m.features}, {"weights", m.weights}, {"intercept", m.intercept}};
}

DifficultyModel model_from_json(const json& j) {
  DifficultyModel m;
  m.features = j.at("features").get<std::vector<std::string>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  if (m.features.size() != m.weights.size()) {
    throw SchemaError("difficulty model has " + std::to_string(m.features.size()) +
                      " features but " + std::to_string(m.weights.size()) + " weights");
  }
  return m;
}

json parse_line(const std::string& line) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw SchemaError("expected a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace

json features_to_json(const FeatureVector& f) {
  return json{{"rule_count", f.rule_count},
              {"kind_counts", f.kind_counts},
              {"entity_count", f.entity_count},
              {"organization", f.organization},
              {"harmonic", f.harmonic},
              {"direction_mix", f.direction_mix},
              {"format", f.format}};
}

FeatureVector features_from_json(const json& j) {
  FeatureVector f;
  f.rule_count = j.at("rule_count").get<int>();
  f.kind_counts = j.at("kind_counts").get<std::array<int, kRelationKindCount>>();
  f.entity_count = j.at("entity_count").get<int>();
  f.organization = j.at("organization").get<std::array<int, 3>>();
  f.harmonic = j.at("harmonic").get<bool>();
  f.direction_mix = j.at("direction_mix").get<bool>();
  f.format = j.at("format").get<std::string>();
  return f;
}

DatasetHeader make_header(const std::vector<ProfileId>& profiles, const DifficultyModel& model) {
  DatasetHeader h;
  h.difficulty_model = model;
  for (ProfileId p : profiles) h.catalog_versions[std::string(to_string(p))] = catalog(p).version;
  return h;
}

std::string item_id(ProfileId profile, std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", ordinal);
  return std::string(to_string(profile)) + "-" + buf;
}

ItemRecord make_record(std::string id, ItemSpec item) {
  ItemRecord r;
  r.id = std::move(id);
  r.features = extract_features(item);
  r.item = std::move(item);
  return r;
}

std::string encode_header(const DatasetHeader& header) {
  return json{{"schema", kSchema},
              {"version", header.version},
              {"catalogs", header.catalog_versions},
              {"difficulty_model", model_to_json(header.difficulty_model)}}
      .dump();
}

DatasetHeader decode_header(const std::string& line) {
  const json j = parse_line(line);
  try {
    if (j.value("schema", std::string()) != kSchema) throw SchemaError("not a fapforge manifest");
    DatasetHeader h;
    h.version = j.at("version").get<int>();
    if (h.version != kManifestVersion) {
      throw SchemaError("unsupported manifest version " + std::to_string(h.version) +
                        " (expected " + std::to_string(kManifestVersion) + ")");
    }
    h.catalog_versions = j.at("catalogs").get<std::map<std::string, int>>();
    h.difficulty_model = model_from_json(j.at("difficulty_model"));
    return h;
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  }
}

std::string encode_record(const ItemRecord& record) {
  const ItemSpec& it = record.item;
  json rules = json::array();
  for (const auto& r : it.rules) rules.push_back(rule_to_json(r));
  json context = json::array();
  for (const auto& p : it.context) context.push_back(panel_to_json(p, it.configuration));
  json answers = json::array();
  for (const auto& p : it.answers) answers.push_back(panel_to_json(p, it.configuration));
  json distracting = json::array();
  for (const auto& f : it.distracting) distracting.push_back({f.component, to_string(f.attribute)});
  return json{{"id", record.id},
              {"profile", to_string(it.profile)},
              {"configuration", it.configuration},
              {"format", {it.format.rows, it.format.cols}},
              {"rules", std::move(rules)},
              {"context", std::move(context)},
              {"answers", std::move(answers)},
              {"correct_index", it.correct_index},
              {"strategy", to_string(it.strategy)},
              {"organization", to_string(it.organization)},
              {"harmonic", it.harmonic},
              {"distracting", std::move(distracting)},
              {"meta_options", it.meta_options},
              {"seed", std::to_string(it.seed)},
              {"features", features_to_json(record.features)},
              {"files", record.files}}
      .dump();
}

ItemRecord decode_record(const std::string& line) {
  const json j = parse_line(line);
  try {
    ItemRecord rec;
    ItemSpec& it = rec.item;
    rec.id = j.at("id").get<std::string>();
    it.profile = parse_profile(j.at("profile").get<std::string>());
    it.configuration = j.at("configuration").get<std::string>();
    const auto& fmt = j.at("format");
    it.format = GridFormat{fmt.at(0).get<int>(), fmt.at(1).get<int>()};
    for (const auto& r : j.at("rules")) it.rules.push_back(rule_from_json(r));
    for (const auto& p : j.at("context")) it.context.push_back(panel_from_json(p, it.configuration));
    for (const auto& p : j.at("answers")) it.answers.push_back(panel_from_json(p, it.configuration));
    it.correct_index = j.at("correct_index").get<int>();
    if (it.correct_index < 0 || it.correct_index >= static_cast<int>(it.answers.size())) {
      throw SchemaError("correct_index " + std::to_string(it.correct_index) + " outside the " +
                        std::to_string(it.answers.size()) + " answers");
    }
    it.correct = it.answers[static_cast<std::size_t>(it.correct_index)];
    it.strategy = parse_strategy(j.at("strategy").get<std::string>());
    it.organization = parse_organization(j.at("organization").get<std::string>());
    it.harmonic = j.at("harmonic").get<bool>();
    for (const auto& f : j.at("distracting")) {
      it.distracting.push_back(
          Feature{f.at(0).get<int>(), parse_attribute(f.at(1).get<std::string>())});
    }
    it.meta_options = j.at("meta_options").get<bool>();
    const std::string seed = j.at("seed").get<std::string>();
    std::size_t used = 0;
    it.seed = std::stoull(seed, &used);
    if (used != seed.size()) throw SchemaError("seed is not a decimal integer");
    rec.features = features_from_json(j.at("features"));
    rec.files = j.value("files", std::vector<std::string>{});
    return rec;
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  } catch (const std::logic_error& e) {  // stoull
    throw SchemaError(std::string("bad seed: ") + e.what());
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {  // unknown enum names
    throw SchemaError(e.what());
  }
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out << encode_header(dataset.header) << '\n';
  for (const auto& r : dataset.records) out << encode_record(r) << '\n';
}

void write_dataset(const std::filesystem::path& file, const Dataset& dataset) {
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    write_dataset(out, dataset);
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error("cannot write " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, file);
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      if (!have_header) {
        ds.header = decode_header(line);
        have_header = true;
      } else {
        ds.records.push_back(decode_record(line));
      }
    } catch (const Error& e) {
      throw SchemaError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  if (!have_header) throw SchemaError("line 1: missing manifest header");
  return ds;
}

Dataset read_dataset(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  return read_dataset(in);
}

}  // namespace fapforge
