#include "aic3/records.hpp"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <fstream>
#include <sstream>

#include "aic3/errors.hpp"

namespace aic3 {
namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, const char* what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InputError(std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

void check_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") != std::string::npos) throw InputError("CSV field contains a reserved character: " + s);
}

}  // namespace

std::int64_t answer_window_ms(Protocol p) { return p == Protocol::btc ? 11'000 : 30'000; }

std::string format_timestamp(std::int64_t epoch_ms) {
  const std::time_t secs = static_cast<std::time_t>(epoch_ms / 1000);
  const int ms = static_cast<int>(epoch_ms % 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  const auto n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03dZ", ms);
  return buf;
}

std::int64_t parse_timestamp(std::string_view text) {
  std::tm tm{};
  int ms = 0;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                  &tm.tm_min, &tm.tm_sec, &ms) != 7)
    throw InputError("bad timestamp '" + s + "'");
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return static_cast<std::int64_t>(timegm(&tm)) * 1000 + ms;
}

void write_export_csv(std::ostream& out, std::vector<ResponseRecord> records, const DesignIndex& design) {
  std::sort(records.begin(), records.end(), [](const ResponseRecord& a, const ResponseRecord& b) {
    return std::tie(a.worker_id, a.submitted_at_ms, a.question_id) <
           std::tie(b.worker_id, b.submitted_at_ms, b.question_id);
  });
  out << kExportHeader << '\n';
  for (const auto& r : records) {
    const auto& q = design.at(r.question_id);
    check_field(r.worker_id);
    check_field(r.batch_id);
    out << r.question_id << ',' << r.worker_id << ',' << r.batch_id << ',' << to_string(q.protocol) << ','
        << to_string(q.kind) << ',' << q.source_id << ',' << q.left.codec_id << ',' << q.left.level << ','
        << q.right.codec_id << ',' << q.right.level << ',' << to_string(r.answer) << ',' << r.response_time_ms << ','
        << r.toggled_count << ',' << format_timestamp(r.submitted_at_ms) << '\n';
  }
}

std::string export_csv_string(std::vector<ResponseRecord> records, const DesignIndex& design) {
  std::ostringstream ss;
  write_export_csv(ss, std::move(records), design);
  return ss.str();
}

std::vector<ResponseRecord> read_export_csv(std::istream& in, const DesignIndex* design) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty response CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kExportHeader) throw InputError("unexpected response CSV header: " + line);
  std::vector<ResponseRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 14) throw InputError("response CSV line " + std::to_string(lineno) + ": expected 14 columns");
    ResponseRecord r;
    r.question_id = f[0];
    r.worker_id = f[1];
    r.batch_id = f[2];
    r.answer = parse_answer(f[10]);
    r.response_time_ms = parse_number<std::int64_t>(f[11], "response_time_ms");
    r.toggled_count = parse_number<int>(f[12], "toggled_count");
    r.submitted_at_ms = parse_timestamp(f[13]);
    if (design) {
      const auto* q = design->find(r.question_id);
      if (!q) throw InputError("response CSV line " + std::to_string(lineno) + ": unknown question " + r.question_id);
      const bool agrees = to_string(q->protocol) == f[3] && to_string(q->kind) == f[4] && q->source_id == f[5] &&
                          q->left.codec_id == f[6] && std::to_string(q->left.level) == f[7] &&
                          q->right.codec_id == f[8] && std::to_string(q->right.level) == f[9] &&
                          q->batch_id == r.batch_id;
      if (!agrees)
        throw InputError("response CSV line " + std::to_string(lineno) + " disagrees with the design manifest");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResponseRecord> load_export_csv(const std::filesystem::path& path, const DesignIndex* design) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open response CSV " + path.string());
  return read_export_csv(in, design);
}

}  // namespace aic3
