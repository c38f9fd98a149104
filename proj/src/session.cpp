#include "fapforge/session.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "fapforge/rng.hpp"
#include "httplib.h"

namespace fapforge {

using nlohmann::json;

std::string choice_name(int choice) {
  if (choice == kNoneOfTheAbove) return "none-of-the-above";
  if (choice == kDontKnow) return "dont-know";
  return std::to_string(choice);
}

int parse_choice(const json& j) {
  if (j.is_number_integer()) {
    const int c = j.get<int>();
    if (c < 0 || c > 7) throw BadRequestError("choice " + std::to_string(c) + " outside 0-7");
    return c;
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "none-of-the-above") return kNoneOfTheAbove;
    if (s == "dont-know") return kDontKnow;
  }
  throw BadRequestError("choice must be 0-7, \"none-of-the-above\" or \"dont-know\"");
}

std::vector<int> difficulty_bins(const std::vector<ItemRecord>& records,
                                 const DifficultyModel& model) {
  const std::size_t n = records.size();
  std::vector<double> difficulty(n);
  for (std::size_t i = 0; i < n; ++i) difficulty[i] = 1.0 - predict(model, records[i].features);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return difficulty[a] < difficulty[b]; });
  std::vector<int> bins(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    bins[order[rank]] = static_cast<int>(rank * kBinCount / n);
  }
  return bins;
}

Bank make_bank(std::string id, Dataset dataset, std::filesystem::path image_dir) {
  Bank b;
  b.id = std::move(id);
  b.bins = difficulty_bins(dataset.records, dataset.header.difficulty_model);
  b.records = std::move(dataset.records);
  b.image_dir = std::move(image_dir);
  return b;
}

Bank load_bank(const std::filesystem::path& manifest, std::string id) {
  if (id.empty()) id = manifest.stem().string();
  return make_bank(std::move(id), read_dataset(manifest), manifest.parent_path());
}

int next_bin(int bin, bool correct) {
  return std::clamp(bin + (correct ? 1 : -1), 0, kBinCount - 1);
}

namespace {

int session_length(const Bank& bank, const SessionConfig& config) {
  return std::min(config.length, static_cast<int>(bank.records.size()));
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

int index_of(const Bank& bank, const std::string& item) {
  for (std::size_t i = 0; i < bank.records.size(); ++i) {
    if (bank.records[i].id == item) return static_cast<int>(i);
  }
  return -1;
}

// Meta-options are offered when the session asks for them or the item
// carries them.
bool meta_enabled(const ItemRecord& record, const SessionConfig& config) {
  return config.meta_options || record.item.meta_options;
}

bool scored(const ItemRecord& record, int choice) {
  return choice >= 0 && choice == record.item.correct_index;
}

// Applies a response to the pending item.
void record_response(const Bank& bank, SessionState& state, ResponseEntry entry) {
  const auto& rec = bank.records[static_cast<std::size_t>(state.administered.back())];
  entry.correct = scored(rec, entry.choice);
  state.bin = next_bin(state.trajectory.back(), entry.correct);
  state.responses.push_back(std::move(entry));
}

json config_json(const SessionConfig& c) {
  return json{{"length", c.length},
              {"adaptive", c.adaptive},
              {"meta_options", c.meta_options},
              {"seed", std::to_string(c.seed)}};
}

std::string status(const Bank& bank, const SessionState& state) {
  return static_cast<int>(state.responses.size()) >= session_length(bank, state.config)
             ? "completed"
             : "active";
}

}  // namespace

std::optional<int> select_next(const Bank& bank, const SessionState& state) {
  if (static_cast<int>(state.administered.size()) >= session_length(bank, state.config)) {
    return std::nullopt;
  }
  const std::set<int> used(state.administered.begin(), state.administered.end());
  const int n = static_cast<int>(bank.records.size());
  if (!state.config.adaptive) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(state.config.seed, "order"));
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    for (int i : order) {
      if (!used.contains(i)) return i;
    }
    return std::nullopt;
  }
  // Target bin first, then the nearest non-exhausted bin, lower bin on ties.
  auto first_in = [&](int b) -> std::optional<int> {
    if (b < 0 || b >= kBinCount) return std::nullopt;
    for (int i = 0; i < n; ++i) {
      if (bank.bins[static_cast<std::size_t>(i)] == b && !used.contains(i)) return i;
    }
    return std::nullopt;
  };
  for (int d = 0; d < kBinCount; ++d) {
    if (auto i = first_in(state.bin - d)) return i;
    if (d > 0) {
      if (auto i = first_in(state.bin + d)) return i;
    }
  }
  return std::nullopt;
}

json item_payload(const Bank& bank, const SessionState& state, int index) {
  const auto& rec = bank.records[static_cast<std::size_t>(index)];
  json context = json::array();
  json answers = json::array();
  json sheet = nullptr;
  json sheet_svg = nullptr;
  for (const auto& f : rec.files) {
    const std::string url = "/images/" + f;
    if (f.find("_ctx") != std::string::npos) {
      context.push_back(url);
    } else if (f.find("_ans") != std::string::npos) {
      answers.push_back(url);
    } else if (f.ends_with("_sheet.png")) {
      sheet = url;
    } else if (f.ends_with("_sheet.svg")) {
      sheet_svg = url;
    }
  }
  return json{{"id", rec.id},
              {"position", state.administered.size()},
              {"length", session_length(bank, state.config)},
              {"format", {rec.item.format.rows, rec.item.format.cols}},
              {"choices", rec.item.answers.size()},
              {"meta_options", meta_enabled(rec, state.config)},
              {"sheet", sheet},
              {"sheet_svg", sheet_svg},
              {"context", context},
              {"answers", answers}};
}

json session_report(const Bank& bank, const SessionState& state) {
  const std::size_t n = state.responses.size();
  std::size_t correct = 0, dont_know = 0, none_of_the_above = 0;
  std::map<int, std::pair<int, int>> per_bin;  // bin -> (n, correct)
  json responses = json::array();
  json rows = json::array();
  std::vector<std::int64_t> latencies;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = state.responses[k];
    const int bin = state.trajectory[k];
    const auto& rec = bank.records[static_cast<std::size_t>(state.administered[k])];
    correct += r.correct;
    dont_know += r.choice == kDontKnow;
    none_of_the_above += r.choice == kNoneOfTheAbove;
    auto& cell = per_bin[bin];
    ++cell.first;
    cell.second += r.correct;
    latencies.push_back(r.latency_ms);
    responses.push_back(json{{"item", r.item},
                             {"choice", r.choice >= 0 ? json(r.choice) : json(choice_name(r.choice))},
                             {"correct", r.correct},
                             {"latency_ms", r.latency_ms},
                             {"timestamp_ms", r.timestamp_ms},
                             {"bin", bin}});
    rows.push_back(json{{"item", r.item}, {"features", features_to_json(rec.features)},
                        {"correct", r.correct}});
  }
  json bins = json::array();
  for (const auto& [b, cell] : per_bin) {
    bins.push_back(json{{"bin", b},
                        {"n", cell.first},
                        {"correct", cell.second},
                        {"accuracy", static_cast<double>(cell.second) / cell.first}});
  }
  json latency = nullptr;
  if (!latencies.empty()) {
    std::sort(latencies.begin(), latencies.end());
    const double mean = std::accumulate(latencies.begin(), latencies.end(), 0.0) /
                        static_cast<double>(latencies.size());
    const std::size_t m = latencies.size();
    const double median = m % 2 ? static_cast<double>(latencies[m / 2])
                                : (latencies[m / 2 - 1] + latencies[m / 2]) / 2.0;
    latency = json{{"mean", mean}, {"median", median}, {"min", latencies.front()},
                   {"max", latencies.back()}};
  }
  return json{{"version", kApiVersion},
              {"session", state.id},
              {"bank", state.bank},
              {"status", status(bank, state)},
              {"config", config_json(state.config)},
              {"responses", n},
              {"accuracy_defined", n > 0},
              {"accuracy", n > 0 ? json(static_cast<double>(correct) / static_cast<double>(n)) : json()},
              {"dont_know", dont_know},
              {"none_of_the_above", none_of_the_above},
              {"per_bin", bins},
              {"latency_ms", latency},
              {"trajectory", state.trajectory},
              {"ability_estimate", state.bin},
              {"log", responses},
              {"export", json{{"format", "fapforge-fit-input"},
                              {"version", 1},
                              {"columns", design_columns()},
                              {"rows", rows}}}};
}

std::vector<Response> responses_from_export(const json& report) {
  const json& exp = report.contains("export") ? report.at("export") : report;
  if (exp.value("format", std::string()) != "fapforge-fit-input") {
    throw SchemaError("not a fit-input export");
  }
  std::vector<Response> out;
  for (const auto& row : exp.at("rows")) {
    out.push_back(Response{features_from_json(row.at("features")), row.at("correct").get<bool>()});
  }
  return out;
}

SessionState replay_log(const std::filesystem::path& log, const Bank& bank) {
  std::ifstream in(log);
  if (!in) throw NotFoundError("no session log at " + log.string());
  SessionState state;
  std::string line;
  int number = 0;
  bool started = false;
  auto fail = [&](const std::string& what) {
    throw SchemaError(log.filename().string() + " line " + std::to_string(number) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    json ev;
    try {
      ev = json::parse(line);
    } catch (const json::exception& e) {
      fail(e.what());
    }
    const std::string type = ev.value("type", std::string());
    if (!started) {
      if (type != "start") fail("log must begin with a start event");
      state.id = ev.at("session").get<std::string>();
      state.bank = ev.at("bank").get<std::string>();
      const auto& c = ev.at("config");
      state.config.length = c.at("length").get<int>();
      state.config.adaptive = c.at("adaptive").get<bool>();
      state.config.meta_options = c.at("meta_options").get<bool>();
      state.config.seed = std::stoull(c.at("seed").get<std::string>());
      if (state.bank != bank.id) fail("log is for bank '" + state.bank + "'");
      started = true;
    } else if (type == "administer") {
      if (state.pending()) fail("administer while a response is pending");
      const auto expected = select_next(bank, state);
      const int index = index_of(bank, ev.at("item").get<std::string>());
      if (!expected || *expected != index) fail("administered item differs from the staircase");
      state.administered.push_back(index);
      state.trajectory.push_back(bank.bins[static_cast<std::size_t>(index)]);
    } else if (type == "response") {
      if (!state.pending()) fail("response without a pending item");
      ResponseEntry r;
      r.item = ev.at("item").get<std::string>();
      if (index_of(bank, r.item) != state.administered.back()) fail("response to a non-pending item");
      r.choice = ev.at("choice").is_string() ? parse_choice(ev.at("choice")) : ev.at("choice").get<int>();
      r.latency_ms = ev.at("latency_ms").get<std::int64_t>();
      r.timestamp_ms = ev.at("timestamp_ms").get<std::int64_t>();
      const bool logged = ev.at("correct").get<bool>();
      record_response(bank, state, r);
      if (state.responses.back().correct != logged) fail("logged score differs from the bank key");
    } else {
      fail("unknown event type '" + type + "'");
    }
  }
  if (!started) throw SchemaError(log.filename().string() + ": empty session log");
  return state;
}

// Service ---------------------------------------------------------------------

SessionService::SessionService(std::vector<Bank> banks, std::filesystem::path log_dir)
    : log_dir_(std::move(log_dir)) {
  if (banks.empty()) throw Error("session service needs at least one bank");
  default_bank_ = banks.front().id;
  for (auto& b : banks) {
    for (const auto& rec : b.records) {
      for (const auto& f : rec.files) images_.emplace(f, b.image_dir / f);
    }
    const std::string id = b.id;
    banks_.emplace(id, std::move(b));
  }
  std::filesystem::create_directories(log_dir_);
}

const Bank& SessionService::bank(const std::string& id) const {
  const auto it = banks_.find(id);
  if (it == banks_.end()) throw NotFoundError("unknown bank '" + id + "'");
  return it->second;
}

std::filesystem::path SessionService::log_path(const std::string& session) const {
  return log_dir_ / (session + ".jsonl");
}

SessionService::Entry& SessionService::entry(const std::string& session) {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(session);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session + "'");
  return *it->second;
}

void SessionService::append(const std::string& session, const json& event) {
  const std::string line = event.dump() + "\n";
  const auto path = log_path(session);
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error("cannot open session log " + path.string());
  const auto written = ::write(fd, line.data(), line.size());
  ::close(fd);
  if (written != static_cast<ssize_t>(line.size())) {
    throw Error("short write to session log " + path.string());
  }
}

json SessionService::start(const std::string& bank_id, const SessionConfig& config) {
  const Bank& b = bank(bank_id.empty() ? default_bank_ : bank_id);
  if (config.length < 1) throw BadRequestError("length must be positive");
  if (b.records.empty()) throw BadRequestError("bank '" + b.id + "' is empty");
  auto e = std::make_unique<Entry>();
  std::string id;
  {
    std::random_device rd;
    char buf[20];
    std::lock_guard lock(sessions_mutex_);
    do {
      const std::uint64_t r = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r));
      id = buf;
    } while (sessions_.contains(id) || std::filesystem::exists(log_path(id)));
    e->state.id = id;
    e->state.bank = b.id;
    e->state.config = config;
    append(id, json{{"type", "start"},
                    {"version", kApiVersion},
                    {"session", id},
                    {"bank", b.id},
                    {"config", config_json(config)},
                    {"timestamp_ms", now_ms()}});
    sessions_.emplace(id, std::move(e));
  }
  return json{{"version", kApiVersion},
              {"session", id},
              {"bank", b.id},
              {"length", session_length(b, config)},
              {"responses", 0},
              {"status", "active"}};
}

json SessionService::next(const std::string& session) {
  Entry& e = entry(session);
  std::lock_guard lock(e.mutex);
  const Bank& b = bank(e.state.bank);
  json out{{"version", kApiVersion}, {"session", session}};
  if (e.state.pending()) {
    out["status"] = "active";
    out["item"] = item_payload(b, e.state, e.state.administered.back());
    return out;
  }
  const auto index = select_next(b, e.state);
  if (!index) {
    out["status"] = "completed";
    out["item"] = nullptr;
    return out;
  }
  const auto& rec = b.records[static_cast<std::size_t>(*index)];
  append(session, json{{"type", "administer"},
                       {"item", rec.id},
                       {"bin", b.bins[static_cast<std::size_t>(*index)]},
                       {"timestamp_ms", now_ms()}});
  e.state.administered.push_back(*index);
  e.state.trajectory.push_back(b.bins[static_cast<std::size_t>(*index)]);
  out["status"] = "active";
  out["item"] = item_payload(b, e.state, *index);
  return out;
}

json SessionService::respond(const std::string& session, const std::string& item, int choice,
                             std::int64_t latency_ms) {
  Entry& e = entry(session);
  std::lock_guard lock(e.mutex);
  const Bank& b = bank(e.state.bank);
  const int index = index_of(b, item);
  const auto pos = std::find(e.state.administered.begin(), e.state.administered.end(), index);
  if (index < 0 || pos == e.state.administered.end()) {
    throw NotFoundError("item '" + item + "' was not administered in this session");
  }
  if (!e.state.pending() || index != e.state.administered.back()) {
    throw ConflictError("item '" + item + "' already has a response");
  }
  if (choice < 0 && !meta_enabled(b.records[static_cast<std::size_t>(index)], e.state.config)) {
    throw BadRequestError("meta-options are disabled for this item");
  }
  if (latency_ms < 0) throw BadRequestError("latency_ms must be non-negative");
  ResponseEntry r{item, choice, false, latency_ms, now_ms()};
  r.correct = scored(b.records[static_cast<std::size_t>(index)], choice);
  append(session, json{{"type", "response"},
                       {"item", item},
                       {"choice", choice >= 0 ? json(choice) : json(choice_name(choice))},
                       {"correct", r.correct},
                       {"latency_ms", latency_ms},
                       {"timestamp_ms", r.timestamp_ms}});
  record_response(b, e.state, r);
  return json{{"version", kApiVersion},
              {"session", session},
              {"item", item},
              {"scored", e.state.responses.back().correct},
              {"responses", e.state.responses.size()},
              {"status", status(b, e.state)}};
}

json SessionService::report(const std::string& session) {
  Entry& e = entry(session);
  std::lock_guard lock(e.mutex);
  return session_report(bank(e.state.bank), e.state);
}

std::optional<std::filesystem::path> SessionService::image(const std::string& file) const {
  const auto it = images_.find(file);
  if (it == images_.end()) return std::nullopt;
  return it->second;
}

// HTTP ------------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int code, const json& body) {
  res.status = code;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const NotFoundError& e) {
    send_json(res, 404, json{{"error", e.what()}});
  } catch (const ConflictError& e) {
    send_json(res, 409, json{{"error", e.what()}});
  } catch (const BadRequestError& e) {
    send_json(res, 400, json{{"error", e.what()}});
  } catch (const json::exception& e) {
    send_json(res, 400, json{{"error", std::string("bad request: ") + e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, json{{"error", e.what()}});
  }
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw BadRequestError("request body must be a JSON object");
  return j;
}

std::uint64_t seed_field(const json& j) {
  if (!j.contains("seed")) return 0;
  const auto& s = j.at("seed");
  if (s.is_number_unsigned() || s.is_number_integer()) return s.get<std::uint64_t>();
  try {
    return std::stoull(s.get<std::string>());
  } catch (const std::logic_error&) {
    throw BadRequestError("seed must be a non-negative integer");
  }
}

}  // namespace

void install_routes(httplib::Server& server, SessionService& service, const std::string& token) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.set_pre_routing_handler([token](const httplib::Request& req, httplib::Response& res) {
    if (req.method == "OPTIONS") {
      res.status = 204;
      return httplib::Server::HandlerResponse::Handled;
    }
    if (!token.empty() && req.get_header_value("Authorization") != "Bearer " + token) {
      send_json(res, 401, json{{"error", "missing or wrong bearer token"}});
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  server.Post("/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = body_json(req);
      SessionConfig config;
      config.length = body.value("length", config.length);
      config.adaptive = body.value("adaptive", config.adaptive);
      config.meta_options = body.value("meta_options", config.meta_options);
      config.seed = seed_field(body);
      send_json(res, 201, service.start(body.value("bank", std::string()), config));
    });
  });

  server.Get(R"(/sessions/([^/]+)/next)", [&service](const httplib::Request& req,
                                                     httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, service.next(req.matches[1])); });
  });

  server.Post(R"(/sessions/([^/]+)/responses)", [&service](const httplib::Request& req,
                                                          httplib::Response& res) {
    guarded(res, [&] {
      const json body = body_json(req);
      if (!body.contains("item") || !body.contains("choice")) {
        throw BadRequestError("response needs 'item' and 'choice'");
      }
      send_json(res, 200,
                service.respond(req.matches[1], body.at("item").get<std::string>(),
                                parse_choice(body.at("choice")),
                                body.value("latency_ms", std::int64_t{0})));
    });
  });

  server.Get(R"(/sessions/([^/]+)/report)", [&service](const httplib::Request& req,
                                                       httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, service.report(req.matches[1])); });
  });

  server.Get(R"(/images/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string file = req.matches[1];
      const auto path = service.image(file);
      if (!path) throw NotFoundError("no image '" + file + "'");
      std::ifstream in(*path, std::ios::binary);
      if (!in) throw NotFoundError("image '" + file + "' is missing on disk");
      const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      res.status = 200;
      res.set_content(bytes, file.ends_with(".svg") ? "image/svg+xml" : "image/png");
    });
  });
}

}  // namespace fapforge
