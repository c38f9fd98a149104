#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fapforge/difficulty.hpp"
#include "fapforge/item.hpp"
#include "json.hpp"

namespace fapforge {

inline constexpr int kManifestVersion = 1;

struct ItemRecord {
  std::string id;
  ItemSpec item;
  FeatureVector features;
  std::vector<std::string> files;  // rendered images, relative to the manifest

  friend bool operator==(const ItemRecord&, const ItemRecord&) = default;
};

struct DatasetHeader {
  int version = kManifestVersion;
  std::map<std::string, int> catalog_versions;  // profile name -> catalog version
  DifficultyModel difficulty_model = default_model();

  friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct Dataset {
  DatasetHeader header;
  std::vector<ItemRecord> records;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Header for records of the given profiles, with their catalog versions.
DatasetHeader make_header(const std::vector<ProfileId>& profiles,
                          const DifficultyModel& model = default_model());

// "<profile>-<ordinal, 6 digits>"
std::string item_id(ProfileId profile, std::size_t ordinal);

ItemRecord make_record(std::string id, ItemSpec item);

nlohmann::json features_to_json(const FeatureVector& f);
FeatureVector features_from_json(const nlohmann::json& j);

// One JSON object per line, header first.
std::string encode_header(const DatasetHeader& header);
std::string encode_record(const ItemRecord& record);
DatasetHeader decode_header(const std::string& line);
ItemRecord decode_record(const std::string& line);

void write_dataset(std::ostream& out, const Dataset& dataset);
// Writes to a temporary sibling and renames, so a failed write leaves no file.
void write_dataset(const std::filesystem::path& file, const Dataset& dataset);

// Throws SchemaError ("line N: ...") on a version mismatch or malformed line;
// nothing is returned from a partially valid file.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& file);

}  // namespace fapforge
