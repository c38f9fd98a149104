#include "fapforge/batch.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>

#include "fapforge/render.hpp"
#include "fapforge/validator.hpp"

namespace fapforge {

namespace {

int thread_count(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

ItemRecord generate_one(const GenerationProfile& profile, std::uint64_t seed, std::size_t ordinal) {
  return make_record(item_id(profile.profile, ordinal), sample_item_spec(profile, derive_seed(seed, ordinal)));
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct ItemAudit {
  double credit = 0;
  bool tied = false;
  Topology topology = Topology::other;
};

ItemAudit audit_one(const ItemSpec& item, Heuristic heuristic) {
  const auto& config = catalog(item.profile).configuration(item.configuration);
  const auto choice = context_blind_solve(item.answers, heuristic, config);
  const bool hit =
      std::find(choice.tied.begin(), choice.tied.end(), item.correct_index) != choice.tied.end();
  return ItemAudit{hit ? 1.0 / static_cast<double>(choice.tied.size()) : 0.0,
                   choice.tied.size() > 1, answer_graph(item.answers, config).topology};
}

// Summation in ordinal order keeps the parallel report bit-identical.
AuditReport summarize(const std::vector<ItemAudit>& audits) {
  if (audits.empty()) throw Error("context-blind audit of an empty dataset");
  AuditReport report;
  double total = 0;
  for (const auto& a : audits) {
    total += a.credit;
    if (a.tied) ++report.ties;
    ++report.topology_counts[a.topology];
    report.topology_accuracy[a.topology] += a.credit;
  }
  for (auto& [t, acc] : report.topology_accuracy) {
    acc /= static_cast<double>(report.topology_counts[t]);
  }
  report.items = audits.size();
  report.accuracy = total / static_cast<double>(audits.size());
  return report;
}

}  // namespace

std::vector<ItemRecord> generate_batch(const GenerationProfile& profile, std::size_t count,
                                       std::uint64_t seed, int jobs, std::size_t first) {
  check_profile(profile);
  std::vector<ItemRecord> out(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(jobs))
  for (long long k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      out[i] = generate_one(profile, seed, first + i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return out;
}

std::vector<ItemRecord> generate_batch_serial(const GenerationProfile& profile, std::size_t count,
                                              std::uint64_t seed, std::size_t first) {
  check_profile(profile);
  std::vector<ItemRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_one(profile, seed, first + i));
  return out;
}

SolveOutcome solve_record(const ItemSpec& item) {
  SolveOutcome o;
  try {
    const auto report = validate_item(item);
    if (!report.verdict) {
      o.error = "invalid: ";
      if (!report.structure_ok) {
        o.error += report.structure_error;
      } else if (const auto& ce = report.first_failure) {
        o.error += (ce->rule_index >= 0 ? "rule " + std::to_string(ce->rule_index) : "constancy") +
                   " " + std::string(to_string(ce->attribute)) + " expected " + ce->expected +
                   " found " + ce->found;
      }
      return o;
    }
    o.solved = solve(item.context, item.answers, item.profile).index;
    o.ok = o.solved == item.correct_index;
    if (!o.ok) o.error = "solver picked " + std::to_string(o.solved);
  } catch (const AmbiguityError& e) {
    o.tied = e.tied();
    o.error = e.what();
  } catch (const Error& e) {
    o.error = e.what();
  }
  return o;
}

std::vector<SolveOutcome> solve_batch(std::span<const ItemRecord> records, int jobs) {
  std::vector<SolveOutcome> out(records.size());
  const auto n = static_cast<long long>(records.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(jobs))
  for (long long k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    out[i] = solve_record(records[i].item);
  }
  return out;
}

std::vector<SolveOutcome> solve_batch_serial(std::span<const ItemRecord> records) {
  std::vector<SolveOutcome> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(solve_record(r.item));
  return out;
}

AuditReport audit_batch(std::span<const ItemRecord> records, Heuristic heuristic, int jobs) {
  std::vector<ItemAudit> audits(records.size());
  std::vector<std::exception_ptr> errors(records.size());
  const auto n = static_cast<long long>(records.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(jobs))
  for (long long k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      audits[i] = audit_one(records[i].item, heuristic);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return summarize(audits);
}

AuditReport audit_batch_serial(std::span<const ItemRecord> records, Heuristic heuristic) {
  std::vector<ItemAudit> audits;
  audits.reserve(records.size());
  for (const auto& r : records) audits.push_back(audit_one(r.item, heuristic));
  return summarize(audits);
}

void render_batch(std::vector<ItemRecord>& records, const std::filesystem::path& dir, int jobs) {
  std::vector<std::exception_ptr> errors(records.size());
  const auto n = static_cast<long long>(records.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(jobs))
  for (long long k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      auto& r = records[i];
      r.files = write_item_images(r.item, r.id, dir, catalog(r.item.profile));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  rethrow_first(errors);
}

}  // namespace fapforge
