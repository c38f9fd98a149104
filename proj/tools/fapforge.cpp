#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "fapforge/batch.hpp"
#include "fapforge/dataset.hpp"
#include "fapforge/difficulty.hpp"
#include "fapforge/session.hpp"
#include "httplib.h"

namespace fs = std::filesystem;
using namespace fapforge;

namespace {

struct GenerateArgs {
  std::string profile;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::string strategy;
  std::string out;
  bool render = false;
  int jobs = 0;
  std::string view = "any";
  std::string unspecified;
};

ViewMode parse_view(const std::string& name) {
  if (name == "any") return ViewMode::any;
  if (name == "classical") return ViewMode::classical;
  if (name == "normal") return ViewMode::normal;
  throw Error("unknown view mode '" + name + "' (any, classical, normal)");
}

int run_generate(const GenerateArgs& a) {
  const ProfileId id = parse_profile(a.profile);
  GenerationProfile profile = default_profile(id);
  if (!a.strategy.empty()) profile.strategy = parse_strategy(a.strategy);
  if (!a.unspecified.empty()) {
    if (a.unspecified == "constant") {
      profile.unspecified = UnspecifiedPolicy::constant;
    } else if (a.unspecified == "random") {
      profile.unspecified = UnspecifiedPolicy::random;
    } else {
      throw Error("unknown unspecified policy '" + a.unspecified + "' (constant, random)");
    }
  }
  const ViewMode view = parse_view(a.view);
  if (view != ViewMode::any) profile = set_view_mode(profile, view);

  const fs::path out(a.out);
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  fs::create_directories(dir);
  Dataset ds{make_header({id}), generate_batch(profile, a.count, a.seed, a.jobs)};
  try {
    if (a.render) render_batch(ds.records, dir, a.jobs);
    write_dataset(out, ds);
  } catch (...) {
    // Render outputs this run may have written, stored on the record or not.
    for (const auto& r : ds.records) {
      std::vector<std::string> names;
      for (std::size_t k = 0; k < r.item.context.size(); ++k) {
        names.push_back(r.id + "_ctx" + std::to_string(k) + ".png");
      }
      for (std::size_t k = 0; k < r.item.answers.size(); ++k) {
        names.push_back(r.id + "_ans" + std::to_string(k) + ".png");
      }
      names.push_back(r.id + "_sheet.png");
      names.push_back(r.id + "_sheet.svg");
      std::error_code ec;
      for (const auto& f : names) fs::remove(dir / f, ec);
    }
    throw;
  }
  std::printf("wrote %zu items to %s\n", a.count, out.string().c_str());
  return 0;
}

int run_audit(const std::string& in, const std::string& heuristic_name, int jobs) {
  const Heuristic heuristic = parse_heuristic(heuristic_name);
  const Dataset ds = read_dataset(fs::path(in));
  const AuditReport r = audit_batch(ds.records, heuristic, jobs);
  std::printf("items %zu\nheuristic %s\naccuracy %.4f\nties %zu\n", r.items,
              std::string(to_string(heuristic)).c_str(), r.accuracy, r.ties);
  std::printf("topology  count  share   accuracy\n");
  for (const auto& [t, n] : r.topology_counts) {
    std::printf("%-9s %6zu  %.4f  %.4f\n", std::string(to_string(t)).c_str(), n,
                static_cast<double>(n) / static_cast<double>(r.items), r.topology_accuracy.at(t));
  }
  return 0;
}

int run_solve(const std::string& in, int jobs) {
  const Dataset ds = read_dataset(fs::path(in));
  const auto outcomes = solve_batch(ds.records, jobs);
  std::size_t passed = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (o.ok) {
      ++passed;
      continue;
    }
    std::printf("%s: %s", ds.records[i].id.c_str(), o.tied.empty() ? "FAIL" : "AMBIGUOUS");
    if (!o.tied.empty()) {
      std::printf(" tied");
      for (int t : o.tied) std::printf(" %d", t);
    }
    std::printf(" (%s)\n", o.error.c_str());
  }
  const double rate = outcomes.empty() ? 1.0 : static_cast<double>(passed) / outcomes.size();
  std::printf("solved %zu/%zu (%.4f)\n", passed, outcomes.size(), rate);
  return passed == outcomes.size() ? 0 : 1;
}

template <typename K>
void print_histogram(const char* title, const std::map<K, std::size_t>& h, std::size_t total) {
  std::printf("%s\n", title);
  for (const auto& [k, n] : h) {
    std::printf("  %-28s %8zu  %.4f\n", std::string(k).c_str(), n,
                total ? static_cast<double>(n) / static_cast<double>(total) : 0.0);
  }
}

int run_stats(const std::string& in) {
  const Dataset ds = read_dataset(fs::path(in));
  const std::size_t n = ds.records.size();
  std::map<std::string, std::size_t> profiles, configurations, strategies, relations, attributes,
      rule_counts, organizations;
  std::size_t harmonic = 0, rules_total = 0;
  std::vector<double> column_sum(design_columns().size(), 0.0);
  double predicted = 0;
  for (const auto& r : ds.records) {
    const ItemSpec& it = r.item;
    ++profiles[std::string(to_string(it.profile))];
    ++configurations[it.configuration];
    ++strategies[std::string(to_string(it.strategy))];
    ++organizations[std::string(to_string(it.organization))];
    ++rule_counts[std::to_string(it.rules.size())];
    harmonic += it.harmonic;
    for (const auto& rule : it.rules) {
      ++rules_total;
      ++relations[std::string(to_string(rule.relation.kind))];
      ++attributes[std::string(to_string(rule.attribute))];
    }
    const auto row = design_row(r.features);
    for (std::size_t j = 0; j < row.size(); ++j) column_sum[j] += row[j];
    predicted += predict(ds.header.difficulty_model, r.features);
  }
  std::printf("items %zu\n", n);
  print_histogram("profiles", profiles, n);
  print_histogram("configurations", configurations, n);
  print_histogram("strategies", strategies, n);
  print_histogram("organizations", organizations, n);
  print_histogram("rules per item", rule_counts, n);
  print_histogram("relations", relations, rules_total);
  print_histogram("rule attributes", attributes, rules_total);
  if (n > 0) {
    std::printf("harmonic %.4f\n", static_cast<double>(harmonic) / static_cast<double>(n));
    std::printf("feature means\n");
    for (std::size_t j = 0; j < column_sum.size(); ++j) {
      std::printf("  %-28s %.4f\n", design_columns()[j].c_str(),
                  column_sum[j] / static_cast<double>(n));
    }
    std::printf("mean predicted p(correct) %.4f\n", predicted / static_cast<double>(n));
  }
  return 0;
}

int run_serve(int port, const std::string& bank, const std::string& host, std::string log_dir,
              std::string token) {
  if (token.empty()) {
    if (const char* env = std::getenv("FAPFORGE_TOKEN")) token = env;
  }
  const fs::path manifest(bank);
  if (log_dir.empty()) {
    log_dir = ((manifest.has_parent_path() ? manifest.parent_path() : fs::path(".")) / "sessions")
                  .string();
  }
  std::vector<Bank> banks;
  banks.push_back(load_bank(manifest));
  SessionService service(std::move(banks), log_dir);
  httplib::Server server;
  install_routes(server, service, token);
  std::printf("serving bank '%s' on http://%s:%d (logs in %s)\n", service.default_bank().c_str(),
              host.c_str(), port, log_dir.c_str());
  std::fflush(stdout);
  if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate, validate and audit figural analogy problems"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "generate a manifest of items");
  generate->add_option("--profile", gen.profile, "pgm, pgm-shape, pgm-line, raven, sandia, hornke, imak-lite")
      ->required();
  generate->add_option("--count", gen.count, "number of items")->capture_default_str();
  generate->add_option("--seed", gen.seed, "dataset seed")->capture_default_str();
  generate->add_option("--strategy", gen.strategy, "distractor strategy (default per profile)");
  generate->add_option("--out", gen.out, "manifest file (JSON lines)")->required();
  generate->add_flag("--render", gen.render, "write PNG/SVG images beside the manifest");
  generate->add_option("--jobs", gen.jobs, "worker threads (0 = all cores)")->capture_default_str();
  generate->add_option("--view", gen.view, "any, classical or normal")->capture_default_str();
  generate->add_option("--unspecified", gen.unspecified, "constant or random");

  std::string audit_in, heuristic = "max-degree";
  int audit_jobs = 0;
  auto* audit = app.add_subcommand("audit", "context-blind audit of a manifest");
  audit->add_option("--in", audit_in, "manifest")->required();
  audit->add_option("--heuristic", heuristic, "max-degree or max-similarity")->capture_default_str();
  audit->add_option("--jobs", audit_jobs, "worker threads (0 = all cores)");

  std::string solve_in;
  int solve_jobs = 0;
  auto* solve_cmd = app.add_subcommand("solve", "run the symbolic solver over a manifest");
  solve_cmd->add_option("--in", solve_in, "manifest")->required();
  solve_cmd->add_option("--jobs", solve_jobs, "worker threads (0 = all cores)");

  std::string stats_in;
  auto* stats = app.add_subcommand("stats", "rule and feature distributions of a manifest");
  stats->add_option("--in", stats_in, "manifest")->required();

  int port = 8080;
  std::string bank, host = "127.0.0.1", log_dir, token;
  auto* serve = app.add_subcommand("serve", "start the test session service");
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve->add_option("--bank", bank, "item bank manifest")->required();
  serve->add_option("--host", host, "bind address")->capture_default_str();
  serve->add_option("--log-dir", log_dir, "session logs (default: <bank dir>/sessions)");
  serve->add_option("--token", token, "bearer token (default: $FAPFORGE_TOKEN, none if unset)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return run_generate(gen);
    if (*audit) return run_audit(audit_in, heuristic, audit_jobs);
    if (*solve_cmd) return run_solve(solve_in, solve_jobs);
    if (*stats) return run_stats(stats_in);
    if (*serve) return run_serve(port, bank, host, log_dir, token);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fapforge: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
