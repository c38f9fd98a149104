#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fapforge/batch.hpp"
#include "fapforge/dataset.hpp"
#include "fapforge/rng.hpp"

using namespace fapforge;

namespace {

std::string encode(const Dataset& ds) {
  std::ostringstream out;
  write_dataset(out, ds);
  return out.str();
}

Dataset decode(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

std::string replace_first(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fapforge_dataset_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("empty dataset round trip") {
  const Dataset ds{make_header({ProfileId::raven}), {}};
  const std::string text = encode(ds);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  CHECK(decode(text) == ds);
}

TEST_CASE("thousand item round trip across profiles") {
  Dataset ds{make_header({ProfileId::pgm, ProfileId::raven, ProfileId::sandia, ProfileId::hornke}),
             {}};
  for (ProfileId id : {ProfileId::pgm, ProfileId::raven, ProfileId::sandia, ProfileId::hornke}) {
    auto batch = generate_batch(default_profile(id), 250, 17);
    ds.records.insert(ds.records.end(), batch.begin(), batch.end());
  }
  ds.records[253].item = derive_nonharmonic(ds.records[253].item, 2, 1);
  const std::string text = encode(ds);
  const Dataset back = decode(text);
  CHECK(back == ds);
  CHECK(encode(back) == text);
}

TEST_CASE("seeds above 2^53 survive") {
  auto records = generate_batch(default_profile(ProfileId::raven), 3, 0xfedcba9876543210ull);
  for (const auto& r : records) CHECK(r.item.seed > (1ull << 53));
  const Dataset ds{make_header({ProfileId::raven}), records};
  CHECK(decode(encode(ds)) == ds);
}

TEST_CASE("manifest schema errors name the line") {
  const Dataset ds{make_header({ProfileId::raven}),
                   generate_batch(default_profile(ProfileId::raven), 3, 1)};
  const std::string text = encode(ds);

  CHECK_THROWS_WITH_AS(decode(replace_first(text, "\"version\":1", "\"version\":2")),
                       doctest::Contains("line 1: unsupported manifest version 2"), SchemaError);
  CHECK_THROWS_WITH_AS(decode(""), doctest::Contains("line 1"), SchemaError);

  // Third record (line 4) truncated mid-object.
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 4);
  lines[3].resize(lines[3].size() / 2);
  std::string broken;
  for (const auto& l : lines) broken += l + "\n";
  CHECK_THROWS_WITH_AS(decode(broken), doctest::Contains("line 4:"), SchemaError);

  CHECK_THROWS_WITH_AS(decode(replace_first(text, "\"profile\":\"raven\"", "\"profile\":\"nope\"")),
                       doctest::Contains("line 2:"), SchemaError);
  CHECK_THROWS_WITH_AS(decode(replace_first(text, "\"correct_index\":", "\"correct_index\":9")),
                       doctest::Contains("line 2:"), SchemaError);
  CHECK_THROWS_AS(decode(replace_first(text, "\"schema\":\"fapforge-manifest\"", "\"schema\":\"x\"")),
                  SchemaError);
}

TEST_CASE("file writes are atomic") {
  const auto file = scratch("atomic.jsonl");
  const Dataset ds{make_header({ProfileId::sandia}),
                   generate_batch(default_profile(ProfileId::sandia), 5, 3)};
  write_dataset(file, ds);
  CHECK_FALSE(std::filesystem::exists(file.string() + ".tmp"));
  CHECK(read_dataset(file) == ds);
  CHECK_THROWS_AS(write_dataset(scratch("missing") / "sub" / "x.jsonl", ds), Error);
  CHECK_THROWS_AS(read_dataset(scratch("absent.jsonl")), Error);
  std::filesystem::remove_all(file.parent_path());
}

TEST_CASE("item ids and seeds") {
  CHECK(item_id(ProfileId::pgm_shape, 42) == "pgm-shape-000042");
  const auto records = generate_batch(default_profile(ProfileId::pgm), 4, 99, 0, 10);
  CHECK(records[0].id == "pgm-000010");
  CHECK(records[0].item.seed == derive_seed(99, 10));
  CHECK(records[3].item.seed == derive_seed(99, 13));
  CHECK(records[2] == generate_batch(default_profile(ProfileId::pgm), 13, 99)[12]);
}

TEST_CASE("parallel kernels match their serial references") {
  for (ProfileId id : {ProfileId::pgm, ProfileId::raven, ProfileId::hornke}) {
    const auto profile = default_profile(id);
    const auto serial = generate_batch_serial(profile, 60, 5);
    for (int jobs : {1, 2, 4}) CHECK(generate_batch(profile, 60, 5, jobs) == serial);

    const auto solved = solve_batch_serial(serial);
    const auto parallel = solve_batch(serial, 3);
    REQUIRE(solved.size() == parallel.size());
    for (std::size_t i = 0; i < solved.size(); ++i) {
      CHECK(solved[i].ok);
      CHECK(parallel[i].ok == solved[i].ok);
      CHECK(parallel[i].solved == solved[i].solved);
    }

    for (Heuristic h : {Heuristic::max_degree, Heuristic::max_similarity}) {
      const auto a = audit_batch_serial(serial, h);
      const auto b = audit_batch(serial, h, 3);
      CHECK(a.accuracy == b.accuracy);
      CHECK(a.ties == b.ties);
      CHECK(a.topology_counts == b.topology_counts);
      CHECK(a.topology_accuracy == b.topology_accuracy);
    }
  }
}

TEST_CASE("batch errors surface the lowest ordinal") {
  auto p = default_profile(ProfileId::pgm_line);
  p.strategy = Strategy::star;
  p.attempt_budget = 5;
  CHECK_THROWS_AS(generate_batch(p, 8, 1, 2), BudgetExhaustedError);
}

TEST_CASE("solve_record flags invalid keys") {
  auto records = generate_batch(default_profile(ProfileId::raven), 2, 8);
  auto& item = records[0].item;
  item.correct_index = (item.correct_index + 1) % 8;
  item.correct = item.answers[static_cast<std::size_t>(item.correct_index)];
  const auto outcome = solve_record(item);
  CHECK_FALSE(outcome.ok);
  CHECK(outcome.error.rfind("invalid:", 0) == 0);
  CHECK(solve_record(records[1].item).ok);
}
