#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "doctest.h"
#include "fapforge/batch.hpp"
#include "fapforge/session.hpp"
#include "httplib.h"

using namespace fapforge;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fapforge_session_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Bank mixed_bank(std::size_t per_profile = 50) {
  std::vector<ProfileId> ids{ProfileId::pgm, ProfileId::raven, ProfileId::sandia, ProfileId::hornke};
  Dataset ds{make_header(ids), {}};
  for (ProfileId id : ids) {
    auto batch = generate_batch(default_profile(id), per_profile, 7);
    ds.records.insert(ds.records.end(), batch.begin(), batch.end());
  }
  // Some nonharmonic items, so every design column varies.
  for (auto& r : ds.records) {
    if (r.item.profile == ProfileId::raven && r.item.seed % 3 == 0) {
      r = make_record(r.id, derive_nonharmonic(r.item, 1, r.item.seed));
    }
  }
  return make_bank("mixed", std::move(ds));
}

int key_of(const SessionService& s, const std::string& item) {
  for (const auto& r : s.bank("mixed").records) {
    if (r.id == item) return r.item.correct_index;
  }
  FAIL("unknown item " << item);
  return -1;
}

int bin_of(const SessionService& s, const std::string& item) {
  const Bank& b = s.bank("mixed");
  for (std::size_t i = 0; i < b.records.size(); ++i) {
    if (b.records[i].id == item) return b.bins[i];
  }
  return -1;
}

std::string item_of(const json& next) { return next.at("item").at("id").get<std::string>(); }

bool mentions_key(const json& j) {
  const std::string text = j.dump();
  return text.find("correct_index") != std::string::npos;
}

}  // namespace

TEST_CASE("difficulty bins are deciles by rank") {
  const Bank b = mixed_bank(25);
  std::vector<int> count(kBinCount, 0);
  for (int bin : b.bins) ++count[static_cast<std::size_t>(bin)];
  for (int c : count) CHECK(c == 10);
  // Rank order follows predicted difficulty.
  const auto& model = default_model();
  for (std::size_t i = 0; i < b.records.size(); ++i) {
    for (std::size_t j = 0; j < b.records.size(); ++j) {
      if (b.bins[i] < b.bins[j]) {
        CHECK(predict(model, b.records[i].features) >= predict(model, b.records[j].features));
      }
    }
  }
}

TEST_CASE("staircase steps") {
  CHECK(next_bin(4, true) == 5);
  CHECK(next_bin(4, false) == 3);
  CHECK(next_bin(0, false) == 0);
  CHECK(next_bin(kBinCount - 1, true) == kBinCount - 1);
  CHECK(parse_choice(json(3)) == 3);
  CHECK(parse_choice(json("dont-know")) == kDontKnow);
  CHECK(parse_choice(json("none-of-the-above")) == kNoneOfTheAbove);
  CHECK_THROWS_AS(parse_choice(json(8)), BadRequestError);
  CHECK_THROWS_AS(parse_choice(json("maybe")), BadRequestError);
}

TEST_CASE("starting sessions") {
  SessionService s({mixed_bank(10)}, fresh_dir("start"));
  const json a = s.start("mixed", {});
  const json b = s.start("", {});
  CHECK(a.at("session") != b.at("session"));
  CHECK(a.at("responses") == 0);
  CHECK(a.at("status") == "active");
  CHECK(fs::exists(s.log_path(a.at("session"))));
  CHECK_THROWS_AS(s.start("nope", {}), NotFoundError);
  CHECK_THROWS_AS(s.next("nope"), NotFoundError);
  CHECK_THROWS_AS(s.report("nope"), NotFoundError);
  SessionConfig zero;
  zero.length = 0;
  CHECK_THROWS_AS(s.start("mixed", zero), BadRequestError);
}

TEST_CASE("adaptive session walks the staircase") {
  SessionService s({mixed_bank()}, fresh_dir("walk"));
  const std::string id = s.start("mixed", {}).at("session");
  json next = s.next(id);
  CHECK(bin_of(s, item_of(next)) == kStartBin);
  // Re-asking returns the pending item.
  CHECK(item_of(s.next(id)) == item_of(next));

  std::vector<bool> pattern{true, true, false, false, false, true, false, true, true, true};
  int expect = kStartBin;
  for (bool right : pattern) {
    const std::string item = item_of(next);
    CHECK(bin_of(s, item) == expect);
    const int key = key_of(s, item);
    const json r = s.respond(id, item, right ? key : (key + 1) % 8, 1200);
    CHECK(r.at("scored") == right);
    expect = next_bin(expect, right);
    next = s.next(id);
    if (next.at("status") == "completed") break;
  }
  CHECK(next.at("status") == "completed");
  CHECK(next.at("item").is_null());
  const json rep = s.report(id);
  CHECK(rep.at("status") == "completed");
  CHECK(rep.at("accuracy").get<double>() == doctest::Approx(0.6));
  CHECK(rep.at("trajectory") == json({5, 6, 7, 6, 5, 4, 5, 4, 5, 6}));
}

TEST_CASE("all-correct session climbs to the top bin") {
  SessionService s({mixed_bank()}, fresh_dir("climb"));
  const std::string id = s.start("mixed", {}).at("session");
  for (json next = s.next(id); next.at("status") == "active"; next = s.next(id)) {
    s.respond(id, item_of(next), key_of(s, item_of(next)), 900);
  }
  const json rep = s.report(id);
  CHECK(rep.at("accuracy") == 1.0);
  CHECK(rep.at("trajectory") == json({5, 6, 7, 8, 9, 9, 9, 9, 9, 9}));
  CHECK(rep.at("ability_estimate") == 9);
  CHECK(rep.at("latency_ms").at("median") == 900);
}

TEST_CASE("responses: meta choices, duplicates and strays") {
  SessionService s({mixed_bank(10)}, fresh_dir("respond"));
  SessionConfig meta;
  meta.meta_options = true;
  const std::string id = s.start("mixed", meta).at("session");
  const std::string first = item_of(s.next(id));
  CHECK(s.respond(id, first, kDontKnow, 5000).at("scored") == false);
  CHECK_THROWS_AS(s.respond(id, first, key_of(s, first), 10), ConflictError);
  CHECK_THROWS_AS(s.respond(id, "pgm-999999", 0, 10), NotFoundError);

  const std::string second = item_of(s.next(id));
  CHECK_THROWS_AS(s.respond(id, second, 0, -1), BadRequestError);
  CHECK(s.respond(id, second, kNoneOfTheAbove, 10).at("scored") == false);

  const json rep = s.report(id);
  CHECK(rep.at("dont_know") == 1);
  CHECK(rep.at("none_of_the_above") == 1);
  CHECK(rep.at("accuracy") == 0.0);
  CHECK(rep.at("log")[0].at("choice") == "dont-know");
  // The first response stands.
  CHECK(rep.at("log")[0].at("latency_ms") == 5000);

  const std::string plain = s.start("mixed", {}).at("session");
  const std::string item = item_of(s.next(plain));
  CHECK_THROWS_AS(s.respond(plain, item, kDontKnow, 10), BadRequestError);
}

TEST_CASE("empty report") {
  SessionService s({mixed_bank(10)}, fresh_dir("empty"));
  const std::string id = s.start("mixed", {}).at("session");
  const json rep = s.report(id);
  CHECK(rep.at("responses") == 0);
  CHECK(rep.at("accuracy_defined") == false);
  CHECK(rep.at("accuracy").is_null());
  CHECK(rep.at("latency_ms").is_null());
  CHECK(rep.at("export").at("rows").empty());
}

TEST_CASE("non-adaptive order is seeded") {
  const Bank bank = mixed_bank(10);
  SessionState a;
  a.config.adaptive = false;
  a.config.seed = 3;
  a.config.length = 40;
  auto b = a;
  b.config.seed = 4;
  std::vector<int> order_a, order_b;
  for (int k = 0; k < 40; ++k) {
    order_a.push_back(*select_next(bank, a));
    order_b.push_back(*select_next(bank, b));
    a.administered.push_back(order_a.back());
    b.administered.push_back(order_b.back());
  }
  CHECK_FALSE(select_next(bank, a));
  CHECK(order_a != order_b);
  std::vector<int> sorted = order_a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 40; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("log replay reproduces the session") {
  SessionService s({mixed_bank()}, fresh_dir("replay"));
  SessionConfig config;
  config.length = 12;
  const std::string id = s.start("mixed", config).at("session");
  std::mt19937 rng(11);
  for (json next = s.next(id); next.at("status") == "active"; next = s.next(id)) {
    const std::string item = item_of(next);
    const int choice = rng() % 3 == 0 ? static_cast<int>(rng() % 8) : key_of(s, item);
    s.respond(id, item, choice, static_cast<std::int64_t>(rng() % 4000));
  }
  const SessionState replayed = replay_log(s.log_path(id), s.bank("mixed"));
  CHECK(session_report(s.bank("mixed"), replayed) == s.report(id));

  // A log whose administered item departs from the staircase is rejected.
  std::ifstream in(s.log_path(id));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto at = text.find("\"type\":\"administer\"");
  REQUIRE(at != std::string::npos);
  const auto item_at = text.find("\"item\":\"", at) + 8;
  const auto item_end = text.find('"', item_at);
  const std::string first = text.substr(item_at, item_end - item_at);
  const std::string other = s.bank("mixed").records[0].id == first ? s.bank("mixed").records[1].id
                                                                   : s.bank("mixed").records[0].id;
  text.replace(item_at, item_end - item_at, other);
  const auto tampered = s.log_path(id).parent_path() / "tampered.jsonl";
  std::ofstream(tampered) << text;
  CHECK_THROWS_AS(replay_log(tampered, s.bank("mixed")), SchemaError);
}

TEST_CASE("export feeds the difficulty fit") {
  SessionService s({mixed_bank()}, fresh_dir("export"));
  std::vector<Response> all;
  std::mt19937 rng(5);
  for (int k = 0; k < 12; ++k) {
    SessionConfig config;
    config.length = 20;
    config.adaptive = false;
    config.seed = static_cast<std::uint64_t>(k);
    const std::string id = s.start("mixed", config).at("session");
    for (json next = s.next(id); next.at("status") == "active"; next = s.next(id)) {
      const std::string item = item_of(next);
      const int key = key_of(s, item);
      s.respond(id, item, rng() % 3 ? key : (key + 1) % 8, 1000);
    }
    const json rep = s.report(id);
    const auto rs = responses_from_export(rep);
    REQUIRE(rs.size() == 20);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const auto& row = rep.at("export").at("rows")[i];
      CHECK(features_to_json(rs[i].features) == row.at("features"));
      CHECK(rs[i].correct == row.at("correct").get<bool>());
    }
    all.insert(all.end(), rs.begin(), rs.end());
  }
  CHECK(all.size() == 240);
  CHECK_NOTHROW(fit(all));
  CHECK_THROWS_AS(responses_from_export(json{{"format", "other"}}), SchemaError);
}

TEST_CASE("payloads never carry the key") {
  SessionService s({mixed_bank()}, fresh_dir("secrecy"));
  const std::string id = s.start("mixed", {}).at("session");
  for (json next = s.next(id); next.at("status") == "active"; next = s.next(id)) {
    CHECK_FALSE(mentions_key(next));
    const std::string item = item_of(next);
    const json r = s.respond(id, item, 0, 10);
    CHECK_FALSE(mentions_key(r));
    CHECK_FALSE(mentions_key(s.report(id)));
  }
}

TEST_CASE("http api") {
  const auto dir = fresh_dir("http");
  Dataset ds{make_header({ProfileId::raven}), generate_batch(default_profile(ProfileId::raven), 20, 9)};
  render_batch(ds.records, dir, 1);
  write_dataset(dir / "bank.jsonl", ds);
  SessionService service({load_bank(dir / "bank.jsonl")}, dir / "sessions");

  httplib::Server server;
  install_routes(server, service, "");
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto start = client.Post("/sessions", R"({"bank":"bank","length":3})", "application/json");
  REQUIRE(start);
  CHECK(start->status == 201);
  CHECK(start->get_header_value("Access-Control-Allow-Origin") == "*");
  const std::string id = json::parse(start->body).at("session");

  auto next = client.Get("/sessions/" + id + "/next");
  REQUIRE(next);
  CHECK(next->status == 200);
  const json payload = json::parse(next->body);
  CHECK_FALSE(mentions_key(payload));
  const std::string item = payload.at("item").at("id");
  const std::string sheet = payload.at("item").at("sheet");
  CHECK(payload.at("item").at("answers").size() == 8);

  auto image = client.Get(sheet);
  REQUIRE(image);
  CHECK(image->status == 200);
  CHECK(image->get_header_value("Content-Type") == "image/png");
  CHECK(image->body.substr(1, 3) == "PNG");
  CHECK(client.Get("/images/bank.jsonl")->status == 404);
  CHECK(client.Get("/images/..%2Fbank.jsonl")->status == 404);

  const std::string body = json{{"item", item}, {"choice", 0}, {"latency_ms", 800}}.dump();
  auto resp = client.Post("/sessions/" + id + "/responses", body, "application/json");
  REQUIRE(resp);
  CHECK(resp->status == 200);
  CHECK(json::parse(resp->body).contains("scored"));
  CHECK(client.Post("/sessions/" + id + "/responses", body, "application/json")->status == 409);
  CHECK(client.Post("/sessions/" + id + "/responses", "{not json", "application/json")->status == 400);
  CHECK(client.Post("/sessions/" + id + "/responses", R"({"item":"x"})", "application/json")->status == 400);
  CHECK(client.Post("/sessions", R"({"bank":"nope"})", "application/json")->status == 404);
  CHECK(client.Get("/sessions/nope/next")->status == 404);
  CHECK(client.Get("/sessions/nope/report")->status == 404);
  CHECK(client.Get("/health")->status == 404);
  CHECK(client.Get("/sessions")->status == 404);
  CHECK(client.Options("/sessions")->status == 204);

  auto report = client.Get("/sessions/" + id + "/report");
  REQUIRE(report);
  CHECK(report->status == 200);
  CHECK(json::parse(report->body).at("responses") == 1);

  server.stop();
  thread.join();
}

TEST_CASE("http bearer token") {
  SessionService service({mixed_bank(10)}, fresh_dir("token"));
  httplib::Server server;
  install_routes(server, service, "s3cret");
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  CHECK(client.Post("/sessions", "{}", "application/json")->status == 401);
  client.set_bearer_token_auth("wrong");
  CHECK(client.Post("/sessions", "{}", "application/json")->status == 401);
  client.set_bearer_token_auth("s3cret");
  CHECK(client.Post("/sessions", "{}", "application/json")->status == 201);
  // Preflight needs no token.
  httplib::Client anonymous("127.0.0.1", port);
  CHECK(anonymous.Options("/sessions")->status == 204);

  server.stop();
  thread.join();
}
