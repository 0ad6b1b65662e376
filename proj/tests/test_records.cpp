#include <set>
#include <sstream>

#include "doctest.h"

#include "aic3/design.hpp"
#include "aic3/errors.hpp"
#include "aic3/records.hpp"
#include "aic3/simulate.hpp"

using namespace aic3;

TEST_CASE("timestamps round trip with millisecond precision") {
  CHECK(format_timestamp(0) == "1970-01-01T00:00:00.000Z");
  CHECK(format_timestamp(1709294400250) == "2024-03-01T12:00:00.250Z");
  for (std::int64_t t : {0LL, 1LL, 999LL, 1709294400250LL, 1700000000123LL}) CHECK(parse_timestamp(format_timestamp(t)) == t);
  CHECK_THROWS_AS(parse_timestamp("2024-03-01 12:00:00"), InputError);
}

TEST_CASE("answer windows") {
  CHECK(answer_window_ms(Protocol::btc) == 11000);
  CHECK(answer_window_ms(Protocol::ptc) == 30000);
}

TEST_CASE("export csv") {
  auto config = DesignConfig::standard();
  const DesignIndex design([&] {
    std::vector<TripletQuestion> qs;
    for (auto& b : generate_design(config, Protocol::ptc))
      for (auto& q : b.questions) qs.push_back(q);
    return qs;
  }());

  SUBCASE("empty export is just the header") {
    CHECK(export_csv_string({}, design) == std::string(kExportHeader) + "\n");
    std::istringstream in(export_csv_string({}, design));
    CHECK(read_export_csv(in, &design).empty());
  }

  SUBCASE("one record fills every column") {
    const auto& q = design.questions().front();
    ResponseRecord r{q.question_id, "w1", q.batch_id, Answer::right, 4321, 3, 1709294400250};
    const auto csv = export_csv_string({r}, design);
    std::istringstream lines(csv);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == kExportHeader);
    std::vector<std::string> fields;
    std::stringstream ss(row);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    REQUIRE(fields.size() == 14);
    for (const auto& f : fields) CHECK(!f.empty());
    CHECK(fields[0] == q.question_id);
    CHECK(fields[3] == "ptc");
    CHECK(fields[10] == "right");
    CHECK(fields[13] == "2024-03-01T12:00:00.250Z");
    std::istringstream in(csv);
    const auto back = read_export_csv(in, &design);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == r);
  }

  SUBCASE("a simulated batch of 360 responses joins the design") {
    auto btc = DesignConfig::standard();
    std::vector<TripletQuestion> qs;
    for (auto& b : generate_design(btc, Protocol::btc))
      for (auto& q : b.questions) qs.push_back(q);
    const DesignIndex index(qs);
    CampaignOptions options;
    options.n_workers = 1;
    options.two_batch_probability = 0.0;
    const auto sim = simulate_campaign(index, GroundTruth::linear(btc, 0.25, {2.0, 0.0}), options);
    CHECK(sim.responses.size() == 360);
    std::istringstream in(export_csv_string(sim.responses, index));
    const auto back = read_export_csv(in, &index);
    CHECK(back.size() == 360);
    std::set<std::string> ids;
    for (const auto& r : back) {
      CHECK(index.find(r.question_id) != nullptr);
      ids.insert(r.question_id);
    }
    CHECK(ids.size() == 360);
  }

  SUBCASE("rows that contradict the design are rejected") {
    const auto& q = design.questions().front();
    ResponseRecord r{q.question_id, "w1", q.batch_id, Answer::left, 100, 1, 0};
    auto csv = export_csv_string({r}, design);
    const auto pos = csv.find(",ptc,");
    csv.replace(pos, 5, ",btc,");
    std::istringstream in(csv);
    CHECK_THROWS_AS(read_export_csv(in, &design), InputError);
    std::istringstream bad_header("question_id,worker_id\n");
    CHECK_THROWS_AS(read_export_csv(bad_header), InputError);
  }
}
