#include <cmath>
#include <map>
#include <set>

#include "doctest.h"

#include "aic3/analysis.hpp"
#include "aic3/design.hpp"
#include "aic3/errors.hpp"
#include "aic3/records.hpp"
#include "aic3/simulate.hpp"
#include "aic3/stats.hpp"

using namespace aic3;

namespace {

TripletQuestion pair_question(double left_jnd, double right_jnd, GroundTruth& truth) {
  const auto left = make_key("s", "c", 2), right = make_key("s", "c", 1);
  truth.scale[make_key("s", "source", 0)] = 0.0;
  truth.scale[left] = left_jnd;
  truth.scale[right] = right_jnd;
  TripletQuestion q;
  q.protocol = Protocol::ptc;
  q.kind = QuestionKind::same_codec;
  q.source_id = "s";
  q.left = left;
  q.right = right;
  q.question_id = question_id_for(q);
  return q;
}

std::map<Answer, double> frequencies(const TripletQuestion& q, const GroundTruth& truth, const ObserverProfile& obs,
                                     int n, std::uint64_t seed) {
  auto rng = rng_stream(seed, 0);
  std::map<Answer, double> f;
  for (int i = 0; i < n; ++i) f[simulate_response(q, truth, obs, rng)] += 1.0 / n;
  return f;
}

}  // namespace

TEST_CASE("one JND difference is chosen 75% of the time") {
  GroundTruth truth;
  const auto q = pair_question(2.0, 1.0, truth);
  auto f = frequencies(q, truth, ObserverProfile{0.0, 0.0, 0.0}, 100000, 1);
  CHECK(f[Answer::left] == doctest::Approx(0.75).epsilon(0.01));
  CHECK(f[Answer::not_sure] == 0.0);
}

TEST_CASE("equal stimuli split evenly") {
  GroundTruth truth;
  const auto q = pair_question(1.0, 1.0, truth);
  auto f = frequencies(q, truth, ObserverProfile{0.0, 0.0, 0.0}, 100000, 2);
  CHECK(std::abs(f[Answer::left] - 0.5) < 0.006);
  CHECK(std::abs(f[Answer::right] - 0.5) < 0.006);
}

TEST_CASE("two JND difference follows the normal cdf") {
  GroundTruth truth;
  const auto q = pair_question(2.5, 0.5, truth);
  const double expected = normal_cdf(2.0 * thurstone_units_per_jnd());
  CHECK(expected == doctest::Approx(0.9115).epsilon(1e-3));
  auto f = frequencies(q, truth, ObserverProfile{0.0, 0.0, 0.0}, 100000, 3);
  CHECK(std::abs(f[Answer::left] - expected) < 0.004);
}

TEST_CASE("not sure band") {
  GroundTruth truth;
  const auto q = pair_question(1.0, 1.0, truth);
  const double band = 0.2;
  const double expected = 2.0 * normal_cdf(band * thurstone_units_per_jnd()) - 1.0;
  auto f = frequencies(q, truth, ObserverProfile{0.0, band, 0.0}, 100000, 4);
  CHECK(std::abs(f[Answer::not_sure] - expected) < 0.005);
}

TEST_CASE("full lapse answers uniformly") {
  GroundTruth truth;
  const auto q = pair_question(5.0, 0.0, truth);
  auto f = frequencies(q, truth, ObserverProfile{1.0, 0.0, 0.0}, 90000, 5);
  for (auto a : {Answer::left, Answer::right, Answer::not_sure}) CHECK(std::abs(f[a] - 1.0 / 3.0) < 0.007);
  const auto biased = frequencies(q, truth, ObserverProfile{1.0, 0.0, 0.5}, 90000, 6);
  CHECK(std::abs(biased.at(Answer::right) - (0.5 + 0.5 / 3.0)) < 0.007);
}

TEST_CASE("boosted latent scale") {
  auto config = DesignConfig::standard();
  auto truth = GroundTruth::linear(config, 0.25, {2.0, 0.1});
  const auto key = make_key("src01", "jpeg", 4);
  CHECK(truth.latent(key, Protocol::ptc) == doctest::Approx(1.0));
  CHECK(truth.latent(key, Protocol::btc) == doctest::Approx(2.1));
  CHECK(truth.latent(make_key("src01", "source", 0), Protocol::btc) == 0.0);
  CHECK_THROWS_AS(truth.latent(make_key("zzz", "jpeg", 1), Protocol::ptc), InputError);
}

TEST_CASE("reliable workers pass traps at the closed-form rate") {
  auto config = DesignConfig::standard();
  std::vector<TripletQuestion> qs;
  for (auto& b : generate_design(config, Protocol::ptc))
    for (auto& q : b.questions) qs.push_back(q);
  const DesignIndex design(qs);
  auto truth = GroundTruth::linear(config, 0.25, {});
  truth.not_sure_band = 0.0;
  CampaignOptions options;
  options.n_workers = 2000;
  options.seed = 9;
  const auto sim = simulate_campaign(design, truth, options);
  int traps = 0, correct = 0;
  for (const auto& r : sim.responses) {
    const auto& q = design.at(r.question_id);
    if (q.kind != QuestionKind::trap) continue;
    ++traps;
    correct += (q.left.level == 10) == (r.answer == Answer::left);
  }
  const double expected = normal_cdf(2.5 * thurstone_units_per_jnd());
  CHECK(expected == doctest::Approx(0.954).epsilon(1e-3));
  CHECK(traps > 25000);
  CHECK(std::abs(double(correct) / traps - expected) < 0.005);
}

TEST_CASE("campaign shape and determinism") {
  auto config = DesignConfig::standard();
  std::vector<TripletQuestion> qs;
  for (auto& b : generate_design(config, Protocol::ptc))
    for (auto& q : b.questions) qs.push_back(q);
  const DesignIndex design(qs);
  const auto truth = GroundTruth::linear(config, 0.25, {});
  CampaignOptions options;
  options.n_workers = 40;
  options.seed = 3;
  options.mix.unreliable_fraction = 0.25;
  const auto a = simulate_campaign(design, truth, options);
  const auto b = simulate_campaign(design, truth, options);
  CHECK(export_csv_string(a.responses, design) == export_csv_string(b.responses, design));
  CHECK(a.unreliable_workers.size() == 10);

  std::map<std::string, std::set<std::string>> batches_per_worker;
  std::map<std::string, int> per_batch_workers;
  for (const auto& r : a.responses) {
    batches_per_worker[r.worker_id].insert(r.batch_id);
    CHECK(r.toggled_count >= 1);
    CHECK(r.response_time_ms <= answer_window_ms(Protocol::ptc));
    CHECK(r.batch_id == design.at(r.question_id).batch_id);
  }
  CHECK(batches_per_worker.size() == 40);
  for (const auto& [w, bs] : batches_per_worker) {
    CHECK(bs.size() >= 1);
    CHECK(bs.size() <= 2);
  }
  options.seed = 4;
  CHECK(export_csv_string(simulate_campaign(design, truth, options).responses, design) !=
        export_csv_string(a.responses, design));
}

TEST_CASE("truth file round trip") {
  auto config = DesignConfig::standard();
  auto truth = GroundTruth::linear(config, 0.3, {1.9, 0.02});
  truth.boost_gain[{"src02", "vvc"}] = {2.2, -0.01};
  truth.lapse_rate = 0.05;
  const auto path = std::filesystem::temp_directory_path() / "aic3-truth-roundtrip.json";
  truth.save(path);
  const auto back = GroundTruth::load(path);
  std::filesystem::remove(path);
  CHECK(back.scale == truth.scale);
  CHECK(back.lapse_rate == truth.lapse_rate);
  CHECK(back.gain_for("src02", "vvc").a == doctest::Approx(2.2));
  CHECK(back.gain_for("src01", "jpeg").b == doctest::Approx(0.02));
}
