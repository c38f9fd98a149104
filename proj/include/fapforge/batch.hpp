#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fapforge/dataset.hpp"
#include "fapforge/distractors.hpp"
#include "fapforge/generator.hpp"

namespace fapforge {

// Item k has ordinal o = first + k, seed derive_seed(seed, o) and id
// item_id(profile, o).
// Output is ordered by ordinal; when items fail, the error of the lowest
// ordinal is rethrown. jobs <= 0 uses the OpenMP default.
std::vector<ItemRecord> generate_batch(const GenerationProfile& profile, std::size_t count,
                                       std::uint64_t seed, int jobs = 0, std::size_t first = 0);
std::vector<ItemRecord> generate_batch_serial(const GenerationProfile& profile, std::size_t count,
                                              std::uint64_t seed, std::size_t first = 0);

struct SolveOutcome {
  bool ok = false;  // valid and the solver picks the stored key
  int solved = -1;
  std::vector<int> tied;  // on ambiguity
  std::string error;
};

SolveOutcome solve_record(const ItemSpec& item);
std::vector<SolveOutcome> solve_batch(std::span<const ItemRecord> records, int jobs = 0);
std::vector<SolveOutcome> solve_batch_serial(std::span<const ItemRecord> records);

// Same report as context_blind_audit, with per-item work spread over threads.
AuditReport audit_batch(std::span<const ItemRecord> records, Heuristic heuristic, int jobs = 0);
AuditReport audit_batch_serial(std::span<const ItemRecord> records, Heuristic heuristic);

// Renders every record's images into `dir` and stores the file names on the
// records. Rethrows the error of the lowest ordinal.
void render_batch(std::vector<ItemRecord>& records, const std::filesystem::path& dir, int jobs = 0);

}  // namespace fapforge
