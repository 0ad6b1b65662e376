#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "aic3/design.hpp"
#include "aic3/types.hpp"

namespace aic3 {

struct ResponseRecord {
  std::string question_id;
  std::string worker_id;
  std::string batch_id;
  Answer answer = Answer::not_sure;
  std::int64_t response_time_ms = 0;
  int toggled_count = 0;
  // Milliseconds since the Unix epoch, UTC.
  std::int64_t submitted_at_ms = 0;

  bool operator==(const ResponseRecord&) const = default;
};

inline constexpr std::string_view kExportHeader =
    "question_id,worker_id,batch_id,protocol,kind,source_id,left_codec,left_level,right_codec,right_level,answer,"
    "response_time_ms,toggled_count,submitted_at";

// Answer windows per protocol (display + blank for BTC, toggle window for PTC).
std::int64_t answer_window_ms(Protocol p);

// ISO-8601 UTC with millisecond precision, e.g. 2024-03-01T12:00:00.250Z.
std::string format_timestamp(std::int64_t epoch_ms);
std::int64_t parse_timestamp(std::string_view text);

// Sorts by (worker_id, submitted_at, question_id) and writes the export CSV. Every
// record must join to `design`.
void write_export_csv(std::ostream& out, std::vector<ResponseRecord> records, const DesignIndex& design);
std::string export_csv_string(std::vector<ResponseRecord> records, const DesignIndex& design);

// Parses an export CSV. When `design` is given every row is checked against the
// manifest (protocol, kind and stimuli must agree).
std::vector<ResponseRecord> read_export_csv(std::istream& in, const DesignIndex* design = nullptr);
std::vector<ResponseRecord> load_export_csv(const std::filesystem::path& path, const DesignIndex* design = nullptr);

}  // namespace aic3
