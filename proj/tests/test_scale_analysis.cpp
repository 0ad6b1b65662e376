#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "aic3/errors.hpp"
#include "aic3/report.hpp"
#include "aic3/scale_analysis.hpp"
#include "aic3/simulate.hpp"

using namespace aic3;

namespace {

double median_width(const std::vector<ScaleResult>& rs) {
  std::vector<double> w;
  for (const auto& r : rs)
    if (!r.aligned) w.push_back(r.ci_high - r.ci_low);
  std::sort(w.begin(), w.end());
  return w[w.size() / 2];
}

std::vector<ResponseRecord> campaign(const DesignIndex& design, int workers, std::uint64_t seed) {
  const auto truth = GroundTruth::linear(DesignConfig::standard(), 0.25, {2.0, 0.0});
  CampaignOptions options;
  options.n_workers = workers;
  options.seed = seed;
  return simulate_campaign(design, truth, options).responses;
}

}  // namespace

TEST_CASE("paper-shaped analysis produces raw and aligned rows") {
  const auto design = testing::standard_design({Protocol::btc, Protocol::ptc});
  AnalysisConfig config;
  config.bootstrap_samples = 0;
  const auto result = analyze(campaign(design, 200, 1), design, config);
  int btc = 0, ptc = 0, aligned = 0;
  for (const auto& r : result.results) {
    if (r.aligned) ++aligned;
    else if (r.protocol == Protocol::btc) ++btc;
    else ++ptc;
    CHECK(r.ci_low == r.scale_jnd);
  }
  CHECK(btc == 250);
  CHECK(ptc == 125);
  CHECK(aligned == 250);
  REQUIRE(result.alignment.has_value());
  CHECK(result.candidates.size() == 4);

  const auto csv = scales_csv(result.results);
  CHECK(csv.rfind(kScalesHeader, 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 626);

  config.granularity = Granularity::per_codec;
  CHECK(analyze(campaign(design, 200, 1), design, config).alignment->granularity == Granularity::per_codec);
}

TEST_CASE("unanimous responses give zero-width intervals") {
  const auto design = testing::standard_design({Protocol::ptc});
  std::vector<ResponseRecord> rs;
  for (int w = 0; w < 3; ++w)
    for (const auto& q : design.questions()) {
      Answer a = Answer::left;
      if (q.left.level != q.right.level) a = q.left.level > q.right.level ? Answer::left : Answer::right;
      else if (q.kind != QuestionKind::bias) a = q.left.codec_id < q.right.codec_id ? Answer::left : Answer::right;
      rs.push_back({q.question_id, "w" + std::to_string(w), q.batch_id, a, 100, 1, 0});
    }
  AnalysisConfig config;
  config.bootstrap_samples = 100;
  const auto result = analyze(rs, design, config);
  REQUIRE(result.results.size() == 125);
  for (const auto& r : result.results) {
    CHECK(r.ci_low == r.scale_jnd);
    CHECK(r.ci_high == r.scale_jnd);
  }
}

TEST_CASE("bootstrap output does not depend on thread count") {
  const auto design = testing::standard_design({Protocol::btc, Protocol::ptc});
  const auto rs = campaign(design, 120, 2);
  AnalysisConfig config;
  config.bootstrap_samples = 100;
  config.seed = 77;
  config.threads = 1;
  const auto one = scales_csv(analyze(rs, design, config).results);
  config.threads = 3;
  CHECK(scales_csv(analyze(rs, design, config).results) == one);
  config.seed = 78;
  CHECK(scales_csv(analyze(rs, design, config).results) != one);
}

TEST_CASE("intervals contain the estimate") {
  const auto design = testing::standard_design({Protocol::ptc});
  AnalysisConfig config;
  config.bootstrap_samples = 100;
  const auto result = analyze(campaign(design, 100, 3), design, config);
  CHECK(result.bootstrap.completed == 100);
  CHECK(result.bootstrap.dropped == 0);
  for (const auto& r : result.results) {
    CHECK(r.ci_low <= r.scale_jnd);
    CHECK(r.scale_jnd <= r.ci_high);
    CHECK(r.ci_low < r.ci_high);
  }
}

TEST_CASE("doubling the responses narrows intervals by about 1/sqrt(2)") {
  const auto design = testing::standard_design({Protocol::ptc});
  AnalysisConfig config;
  config.bootstrap_samples = 200;
  const double small = median_width(analyze(campaign(design, 200, 4), design, config).results);
  const double large = median_width(analyze(campaign(design, 400, 5), design, config).results);
  CHECK(large / small == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("bootstrap needs enough replicates") {
  const auto design = testing::standard_design({Protocol::ptc});
  AnalysisConfig config;
  config.bootstrap_samples = 10;
  CHECK_THROWS_AS(analyze(campaign(design, 50, 6), design, config), InputError);
}

TEST_CASE("reports") {
  const auto design = testing::standard_design({Protocol::btc, Protocol::ptc});
  AnalysisConfig config;
  config.bootstrap_samples = 0;
  const auto result = analyze(campaign(design, 100, 7), design, config);
  const auto align = alignment_json(result, "abc");
  CHECK(align.find("\"run_id\": \"abc\"") != std::string::npos);
  CHECK(align.find("\"aic_table\"") != std::string::npos);
  const auto report = report_json(result, "abc");
  for (const char* key : {"\"filter\"", "\"bias\"", "\"psychometric\"", "\"bootstrap\""})
    CHECK(report.find(key) != std::string::npos);
}
