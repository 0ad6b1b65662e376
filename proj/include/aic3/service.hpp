#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "aic3/design.hpp"
#include "aic3/records.hpp"
#include "aic3/rng.hpp"

struct sqlite3;

namespace aic3 {

enum class AssignmentState { open, completed, expired };
std::string_view to_string(AssignmentState s);

struct Assignment {
  std::string assignment_id;
  std::string worker_id;
  std::vector<std::string> batch_ids;
  std::vector<std::string> question_order;
  AssignmentState state = AssignmentState::open;
  std::int64_t created_at_ms = 0;
  std::int64_t expires_at_ms = 0;
  // Questions handed out by next_question so far.
  std::size_t served = 0;
};

struct CampaignConfig {
  std::string campaign_id = "default";
  // Target number of workers per batch.
  int batch_quota = 100;
  // Cap on assignments ever opened; 0 means only the batch quotas limit the pool.
  int max_assignments = 0;
  double two_batch_probability = 0.5;
  std::int64_t assignment_ttl_ms = 24LL * 3600 * 1000;
  // Allowance on top of the protocol answer window for network delay.
  std::int64_t transport_slack_ms = 2000;
  // Fixed seed for reproducible assignments (tests); random otherwise.
  std::optional<std::uint64_t> seed;
};

using Clock = std::function<std::int64_t()>;
std::int64_t system_clock_ms();

// Serves batches to workers and persists their responses in SQLite. All public
// operations are atomic with respect to each other.
class StudyService {
 public:
  // `database` may be ":memory:".
  StudyService(DesignIndex design, const std::filesystem::path& database, CampaignConfig config,
               Clock clock = system_clock_ms);
  ~StudyService();
  StudyService(const StudyService&) = delete;
  StudyService& operator=(const StudyService&) = delete;

  // Throws ConflictError if the worker already holds an assignment in this campaign
  // and UnavailableError when the pool is exhausted.
  Assignment open_assignment(const std::string& worker_id);
  Assignment assignment(const std::string& assignment_id);

  struct NextQuestion {
    const TripletQuestion* question;
    std::size_t position;
    std::size_t total;
  };
  // Hands out the next question and advances the cursor; nullopt once all were served.
  std::optional<NextQuestion> next_question(const std::string& assignment_id);

  // worker_id, batch_id and submitted_at are filled in by the service. Throws
  // NotFoundError, ConflictError (duplicate), ExpiredError or InputError.
  void submit_response(const std::string& assignment_id, ResponseRecord record);

  std::vector<ResponseRecord> responses();
  std::string export_csv();
  int batch_usage(const std::string& batch_id);

  const DesignIndex& design() const { return design_; }
  const CampaignConfig& config() const { return config_; }

 private:
  void exec(const char* sql);
  void expire_stale(std::int64_t now);
  std::optional<Assignment> load_assignment(const std::string& assignment_id);
  Assignment require_live(const std::string& assignment_id);

  DesignIndex design_;
  CampaignConfig config_;
  Clock clock_;
  Rng rng_;
  sqlite3* db_ = nullptr;
  std::mutex mutex_;
};

}  // namespace aic3
