#include "aic3/service.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <set>

#include "json.hpp"

#include "aic3/errors.hpp"

namespace aic3 {
namespace {

using nlohmann::json;

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK)
      throw IoError(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  // True while rows are available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT) throw ConflictError(sqlite3_errmsg(db_));
    throw IoError(std::string("sqlite step failed: ") + sqlite3_errmsg(db_));
  }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? reinterpret_cast<const char*>(p) : "";
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

// BEGIN IMMEDIATE ... COMMIT, rolled back on exception.
class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { run("BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    run("COMMIT");
    done_ = true;
  }

 private:
  void run(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "?";
      sqlite3_free(err);
      throw IoError("sqlite: " + msg);
    }
  }
  sqlite3* db_;
  bool done_ = false;
};

AssignmentState parse_state(const std::string& s) {
  if (s == "open") return AssignmentState::open;
  if (s == "completed") return AssignmentState::completed;
  return AssignmentState::expired;
}

}  // namespace

std::string_view to_string(AssignmentState s) {
  switch (s) {
    case AssignmentState::open: return "open";
    case AssignmentState::completed: return "completed";
    case AssignmentState::expired: return "expired";
  }
  return "?";
}

std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

StudyService::StudyService(DesignIndex design, const std::filesystem::path& database, CampaignConfig config,
                           Clock clock)
    : design_(std::move(design)), config_(std::move(config)), clock_(std::move(clock)) {
  if (config_.batch_quota < 1) throw InputError("batch_quota must be positive");
  if (config_.max_assignments < 0) throw InputError("max_assignments must be >= 0");
  if (design_.questions().empty()) throw InputError("study service needs a non-empty design");
  rng_ = config_.seed ? Rng(*config_.seed) : Rng(std::random_device{}());
  if (sqlite3_open(database.c_str(), &db_) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw IoError("cannot open database " + database.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA journal_mode=WAL");
  exec("PRAGMA synchronous=FULL");
  exec(R"(CREATE TABLE IF NOT EXISTS assignments(
            assignment_id TEXT PRIMARY KEY, campaign TEXT NOT NULL, worker_id TEXT NOT NULL,
            batch_ids TEXT NOT NULL, question_order TEXT NOT NULL, state TEXT NOT NULL,
            created_at INTEGER NOT NULL, expires_at INTEGER NOT NULL, served INTEGER NOT NULL DEFAULT 0,
            UNIQUE(campaign, worker_id)))");
  exec(R"(CREATE TABLE IF NOT EXISTS responses(
            assignment_id TEXT NOT NULL, question_id TEXT NOT NULL, worker_id TEXT NOT NULL,
            batch_id TEXT NOT NULL, answer TEXT NOT NULL, response_time_ms INTEGER NOT NULL,
            toggled_count INTEGER NOT NULL, submitted_at INTEGER NOT NULL,
            PRIMARY KEY(assignment_id, question_id), UNIQUE(worker_id, question_id)))");
  exec(R"(CREATE TABLE IF NOT EXISTS batch_usage(
            campaign TEXT NOT NULL, batch_id TEXT NOT NULL, used INTEGER NOT NULL,
            PRIMARY KEY(campaign, batch_id)))");
}

StudyService::~StudyService() { sqlite3_close(db_); }

void StudyService::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "?";
    sqlite3_free(err);
    throw IoError("sqlite: " + msg);
  }
}

// Commits on its own so that a later failure in the caller does not undo the expiry.
void StudyService::expire_stale(std::int64_t now) {
  Transaction tx(db_);
  Statement sel(db_, "SELECT assignment_id, batch_ids FROM assignments WHERE campaign=? AND state='open' AND expires_at<?");
  sel.bind(1, config_.campaign_id).bind(2, now);
  std::vector<std::pair<std::string, std::string>> stale;
  while (sel.step()) stale.emplace_back(sel.text(0), sel.text(1));
  for (const auto& [id, batches] : stale) {
    Statement up(db_, "UPDATE assignments SET state='expired' WHERE assignment_id=?");
    up.bind(1, id).step();
    for (const auto& b : json::parse(batches)) {
      Statement dec(db_, "UPDATE batch_usage SET used=used-1 WHERE campaign=? AND batch_id=? AND used>0");
      dec.bind(1, config_.campaign_id).bind(2, b.get<std::string>()).step();
    }
  }
  tx.commit();
}

std::optional<Assignment> StudyService::load_assignment(const std::string& assignment_id) {
  Statement sel(db_,
                "SELECT worker_id, batch_ids, question_order, state, created_at, expires_at, served "
                "FROM assignments WHERE assignment_id=? AND campaign=?");
  sel.bind(1, assignment_id).bind(2, config_.campaign_id);
  if (!sel.step()) return std::nullopt;
  Assignment a;
  a.assignment_id = assignment_id;
  a.worker_id = sel.text(0);
  a.batch_ids = json::parse(sel.text(1)).get<std::vector<std::string>>();
  a.question_order = json::parse(sel.text(2)).get<std::vector<std::string>>();
  a.state = parse_state(sel.text(3));
  a.created_at_ms = sel.integer(4);
  a.expires_at_ms = sel.integer(5);
  a.served = static_cast<std::size_t>(sel.integer(6));
  return a;
}

Assignment StudyService::require_live(const std::string& assignment_id) {
  auto a = load_assignment(assignment_id);
  if (!a) throw NotFoundError("unknown assignment " + assignment_id);
  if (a->state == AssignmentState::expired) throw ExpiredError("assignment " + assignment_id + " has expired");
  return *a;
}

Assignment StudyService::open_assignment(const std::string& worker_id) {
  if (worker_id.empty()) throw InputError("worker_id must not be empty");
  std::lock_guard lock(mutex_);
  const auto now = clock_();
  expire_stale(now);
  Transaction tx(db_);

  {
    Statement dup(db_, "SELECT 1 FROM assignments WHERE campaign=? AND worker_id=?");
    dup.bind(1, config_.campaign_id).bind(2, worker_id);
    if (dup.step()) throw ConflictError("worker " + worker_id + " already holds an assignment in this campaign");
  }
  std::int64_t live = 0;
  {
    Statement cnt(db_, "SELECT COUNT(*) FROM assignments WHERE campaign=? AND state<>'expired'");
    cnt.bind(1, config_.campaign_id);
    cnt.step();
    live = cnt.integer(0);
  }
  if (config_.max_assignments > 0 && live >= config_.max_assignments)
    throw UnavailableError("campaign capacity of " + std::to_string(config_.max_assignments) + " assignments reached");

  std::vector<std::string> available;
  for (const auto& b : design_.batch_ids()) {
    Statement use(db_, "SELECT used FROM batch_usage WHERE campaign=? AND batch_id=?");
    use.bind(1, config_.campaign_id).bind(2, b);
    const std::int64_t used = use.step() ? use.integer(0) : 0;
    if (used < config_.batch_quota) available.push_back(b);
  }
  if (available.empty()) throw UnavailableError("all batches have reached their quota");

  std::shuffle(available.begin(), available.end(), rng_);
  const bool two = std::bernoulli_distribution(config_.two_batch_probability)(rng_);
  available.resize(std::min<std::size_t>(two ? 2 : 1, available.size()));

  Assignment a;
  a.worker_id = worker_id;
  a.batch_ids = available;
  for (const auto& b : a.batch_ids) {
    auto qs = design_.batch(b);
    std::shuffle(qs.begin(), qs.end(), rng_);
    for (const auto* q : qs) a.question_order.push_back(q->question_id);
  }
  a.created_at_ms = now;
  a.expires_at_ms = now + config_.assignment_ttl_ms;
  {
    Statement total(db_, "SELECT COUNT(*) FROM assignments WHERE campaign=?");
    total.bind(1, config_.campaign_id);
    total.step();
    char id[64];
    std::snprintf(id, sizeof id, "%s-a%06lld", config_.campaign_id.c_str(), static_cast<long long>(total.integer(0) + 1));
    a.assignment_id = id;
  }

  Statement ins(db_,
                "INSERT INTO assignments(assignment_id, campaign, worker_id, batch_ids, question_order, state, "
                "created_at, expires_at, served) VALUES(?,?,?,?,?,'open',?,?,0)");
  ins.bind(1, a.assignment_id)
      .bind(2, config_.campaign_id)
      .bind(3, worker_id)
      .bind(4, json(a.batch_ids).dump())
      .bind(5, json(a.question_order).dump())
      .bind(6, a.created_at_ms)
      .bind(7, a.expires_at_ms);
  ins.step();
  for (const auto& b : a.batch_ids) {
    Statement up(db_,
                 "INSERT INTO batch_usage(campaign, batch_id, used) VALUES(?,?,1) "
                 "ON CONFLICT(campaign, batch_id) DO UPDATE SET used=used+1");
    up.bind(1, config_.campaign_id).bind(2, b).step();
  }
  tx.commit();
  return a;
}

Assignment StudyService::assignment(const std::string& assignment_id) {
  std::lock_guard lock(mutex_);
  expire_stale(clock_());
  auto a = load_assignment(assignment_id);
  if (!a) throw NotFoundError("unknown assignment " + assignment_id);
  return *a;
}

std::optional<StudyService::NextQuestion> StudyService::next_question(const std::string& assignment_id) {
  std::lock_guard lock(mutex_);
  const auto now = clock_();
  expire_stale(now);
  Transaction tx(db_);
  auto a = require_live(assignment_id);
  if (a.served >= a.question_order.size()) {
    Statement done(db_, "UPDATE assignments SET state='completed' WHERE assignment_id=?");
    done.bind(1, assignment_id).step();
    tx.commit();
    return std::nullopt;
  }
  Statement adv(db_, "UPDATE assignments SET served=served+1 WHERE assignment_id=?");
  adv.bind(1, assignment_id).step();
  tx.commit();
  return NextQuestion{&design_.at(a.question_order[a.served]), a.served, a.question_order.size()};
}

void StudyService::submit_response(const std::string& assignment_id, ResponseRecord record) {
  std::lock_guard lock(mutex_);
  const auto now = clock_();
  expire_stale(now);
  Transaction tx(db_);
  auto a = require_live(assignment_id);
  if (std::find(a.question_order.begin(), a.question_order.end(), record.question_id) == a.question_order.end())
    throw NotFoundError("question " + record.question_id + " is not part of assignment " + assignment_id);
  const auto& q = design_.at(record.question_id);
  if (record.response_time_ms < 0 || record.response_time_ms > answer_window_ms(q.protocol) + config_.transport_slack_ms)
    throw InputError("response_time_ms " + std::to_string(record.response_time_ms) + " outside the answer window");
  if (q.protocol == Protocol::ptc && record.toggled_count < 1)
    throw InputError("plain triplet answers require at least one toggle");
  if (record.toggled_count < 0) throw InputError("toggled_count must be >= 0");

  record.worker_id = a.worker_id;
  record.batch_id = q.batch_id;
  record.submitted_at_ms = now;
  {
    Statement dup(db_, "SELECT 1 FROM responses WHERE worker_id=? AND question_id=?");
    dup.bind(1, record.worker_id).bind(2, record.question_id);
    if (dup.step()) throw ConflictError("question " + record.question_id + " was already answered");
  }
  Statement ins(db_,
                "INSERT INTO responses(assignment_id, question_id, worker_id, batch_id, answer, response_time_ms, "
                "toggled_count, submitted_at) VALUES(?,?,?,?,?,?,?,?)");
  ins.bind(1, assignment_id)
      .bind(2, record.question_id)
      .bind(3, record.worker_id)
      .bind(4, record.batch_id)
      .bind(5, std::string(to_string(record.answer)))
      .bind(6, record.response_time_ms)
      .bind(7, static_cast<std::int64_t>(record.toggled_count))
      .bind(8, record.submitted_at_ms);
  ins.step();

  Statement cnt(db_, "SELECT COUNT(*) FROM responses WHERE assignment_id=?");
  cnt.bind(1, assignment_id);
  cnt.step();
  if (static_cast<std::size_t>(cnt.integer(0)) == a.question_order.size()) {
    Statement done(db_, "UPDATE assignments SET state='completed' WHERE assignment_id=?");
    done.bind(1, assignment_id).step();
  }
  tx.commit();
}

std::vector<ResponseRecord> StudyService::responses() {
  std::lock_guard lock(mutex_);
  Statement sel(db_,
                "SELECT r.question_id, r.worker_id, r.batch_id, r.answer, r.response_time_ms, r.toggled_count, "
                "r.submitted_at FROM responses r JOIN assignments a ON a.assignment_id = r.assignment_id "
                "WHERE a.campaign=? ORDER BY r.worker_id, r.submitted_at, r.question_id");
  sel.bind(1, config_.campaign_id);
  std::vector<ResponseRecord> out;
  while (sel.step()) {
    ResponseRecord r;
    r.question_id = sel.text(0);
    r.worker_id = sel.text(1);
    r.batch_id = sel.text(2);
    r.answer = parse_answer(sel.text(3));
    r.response_time_ms = sel.integer(4);
    r.toggled_count = static_cast<int>(sel.integer(5));
    r.submitted_at_ms = sel.integer(6);
    out.push_back(std::move(r));
  }
  return out;
}

std::string StudyService::export_csv() { return export_csv_string(responses(), design_); }

int StudyService::batch_usage(const std::string& batch_id) {
  std::lock_guard lock(mutex_);
  Statement use(db_, "SELECT used FROM batch_usage WHERE campaign=? AND batch_id=?");
  use.bind(1, config_.campaign_id).bind(2, batch_id);
  return use.step() ? static_cast<int>(use.integer(0)) : 0;
}

}  // namespace aic3
