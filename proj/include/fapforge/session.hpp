#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fapforge/dataset.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace fapforge {

inline constexpr int kApiVersion = 1;
inline constexpr int kBinCount = 10;
inline constexpr int kStartBin = kBinCount / 2;

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Submission for an item that is not the pending one, or a second one.
class ConflictError : public Error {
 public:
  using Error::Error;
};

class BadRequestError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kNoneOfTheAbove = -1;
inline constexpr int kDontKnow = -2;

std::string choice_name(int choice);
int parse_choice(const nlohmann::json& j);  // 0-7, "none-of-the-above" or "dont-know"

struct Bank {
  std::string id;
  std::vector<ItemRecord> records;
  std::filesystem::path image_dir;
  std::vector<int> bins;  // difficulty decile per record, 0 = easiest
};

// Predicted difficulty 1 - P(correct) under the manifest's model, binned by
// rank into deciles (ties broken by bank order).
std::vector<int> difficulty_bins(const std::vector<ItemRecord>& records,
                                 const DifficultyModel& model);
Bank load_bank(const std::filesystem::path& manifest, std::string id = {});
Bank make_bank(std::string id, Dataset dataset, std::filesystem::path image_dir = {});

struct SessionConfig {
  int length = 10;
  bool adaptive = true;
  bool meta_options = false;
  std::uint64_t seed = 0;  // order of the non-adaptive mode
};

struct ResponseEntry {
  std::string item;
  int choice = 0;
  bool correct = false;
  std::int64_t latency_ms = 0;
  std::int64_t timestamp_ms = 0;
};

struct SessionState {
  std::string id;
  std::string bank;
  SessionConfig config;
  std::vector<int> administered;  // bank indices in order
  std::vector<int> trajectory;    // bin of each administered item
  std::vector<ResponseEntry> responses;
  int bin = kStartBin;            // staircase state

  bool pending() const { return administered.size() > responses.size(); }
};

// The staircase: bank index of the next item after `state`, or nullopt when
// the session is complete. Pure in (bank, config, administered, responses).
std::optional<int> select_next(const Bank& bank, const SessionState& state);
int next_bin(int bin, bool correct);

nlohmann::json item_payload(const Bank& bank, const SessionState& state, int index);
nlohmann::json session_report(const Bank& bank, const SessionState& state);

// Rebuilds a session from its log, checking that every administered item is
// the one the staircase selects. Throws SchemaError on a mismatch.
SessionState replay_log(const std::filesystem::path& log, const Bank& bank);

// Responses of a report's export, as difficulty.fit input.
std::vector<Response> responses_from_export(const nlohmann::json& report);

class SessionService {
 public:
  SessionService(std::vector<Bank> banks, std::filesystem::path log_dir);

  const Bank& bank(const std::string& id) const;
  const std::string& default_bank() const { return default_bank_; }

  nlohmann::json start(const std::string& bank_id, const SessionConfig& config);
  nlohmann::json next(const std::string& session);
  nlohmann::json respond(const std::string& session, const std::string& item, int choice,
                         std::int64_t latency_ms);
  nlohmann::json report(const std::string& session);

  std::filesystem::path log_path(const std::string& session) const;
  // Whether `file` is an image the bank serves.
  std::optional<std::filesystem::path> image(const std::string& file) const;

 private:
  struct Entry {
    std::mutex mutex;
    SessionState state;
  };
  Entry& entry(const std::string& session);
  void append(const std::string& session, const nlohmann::json& event);

  std::map<std::string, Bank> banks_;
  std::map<std::string, std::filesystem::path> images_;  // served file -> path
  std::string default_bank_;
  std::filesystem::path log_dir_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
};

// Installs the HTTP routes. An empty token disables authentication.
void install_routes(httplib::Server& server, SessionService& service, const std::string& token);

}  // namespace fapforge
