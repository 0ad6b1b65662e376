#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"

#include "aic3/design.hpp"
#include "aic3/errors.hpp"

using namespace aic3;

namespace {

std::map<QuestionKind, int> count_kinds(const std::vector<Batch>& batches) {
  std::map<QuestionKind, int> n;
  for (const auto& b : batches)
    for (const auto& q : b.questions) ++n[q.kind];
  return n;
}

}  // namespace

TEST_CASE("same-codec questions cover every ordered pair") {
  auto config = DesignConfig::standard();
  CHECK(generate_same_codec(config, Protocol::btc).size() == 2750);
  CHECK(generate_same_codec(config, Protocol::ptc).size() == 750);

  DesignConfig tiny;
  tiny.sources = {"s"};
  tiny.codecs = {"c"};
  tiny.btc_levels = {0, 1};
  const auto qs = generate_same_codec(tiny, Protocol::btc);
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].left.level != qs[1].left.level);
  CHECK(qs[0].left == qs[1].right);
  CHECK(qs[0].right == qs[1].left);
  CHECK(qs[0].question_id != qs[1].question_id);
}

TEST_CASE("cross-codec questions are 20% and respect the level gap") {
  auto config = DesignConfig::standard();
  for (auto [protocol, expected] : {std::pair{Protocol::btc, 550}, std::pair{Protocol::ptc, 150}}) {
    auto rng = rng_stream(3, 1);
    const auto qs = generate_cross_codec(config, protocol, rng);
    CHECK(qs.size() == static_cast<std::size_t>(expected));
    std::map<std::string, int> per_source;
    std::set<std::string> ids;
    for (const auto& q : qs) {
      CHECK(q.kind == QuestionKind::cross_codec);
      CHECK(std::abs(q.left.level - q.right.level) <= 1);
      CHECK(q.left.codec_id != q.right.codec_id);
      CHECK(q.left.level >= 1);
      CHECK(q.right.level >= 1);
      CHECK(q.left.source_id == q.source_id);
      CHECK(q.right.source_id == q.source_id);
      ++per_source[q.source_id];
      ids.insert(q.question_id);
    }
    CHECK(ids.size() == qs.size());
    for (const auto& [src, n] : per_source) CHECK(n == expected / 5);
  }
}

TEST_CASE("bias and trap questions") {
  auto config = DesignConfig::standard();
  for (auto [protocol, nb, nt] : {std::tuple{Protocol::btc, 100, 200}, std::tuple{Protocol::ptc, 50, 100}}) {
    const auto qs = generate_bias_and_trap(config, protocol);
    int bias = 0, trap = 0, ten_left = 0;
    std::set<std::string> ids;
    std::set<StimulusKey> bias_stimuli;
    for (const auto& q : qs) {
      ids.insert(q.question_id);
      if (q.kind == QuestionKind::bias) {
        ++bias;
        CHECK(q.left == q.right);
        CHECK(q.left.level > 0);
        bias_stimuli.insert(q.left);
      } else {
        REQUIRE(q.kind == QuestionKind::trap);
        ++trap;
        CHECK(q.is_zero_vs(10));
        if (q.left.level == 10) ++ten_left;
      }
    }
    CHECK(bias == nb);
    CHECK(trap == nt);
    CHECK(ten_left * 2 == nt);
    CHECK(ids.size() == qs.size());
    CHECK(bias_stimuli.size() == static_cast<std::size_t>(nb));
  }
}

TEST_CASE("full design splits into ten equal batches") {
  auto config = DesignConfig::standard();
  config.rng_seed = 11;
  for (auto [protocol, total, per] : {std::tuple{Protocol::btc, 3600, 360}, std::tuple{Protocol::ptc, 1050, 105}}) {
    const auto batches = generate_design(config, protocol);
    REQUIRE(batches.size() == 10);
    std::set<std::string> ids;
    std::size_t n = 0;
    for (const auto& b : batches) {
      CHECK(b.questions.size() == static_cast<std::size_t>(per));
      int traps = 0;
      for (const auto& q : b.questions) {
        CHECK(q.batch_id == b.batch_id);
        ids.insert(q.question_id);
        traps += q.kind == QuestionKind::trap;
      }
      CHECK(traps == (protocol == Protocol::btc ? 20 : 10));
      n += b.questions.size();
    }
    CHECK(n == static_cast<std::size_t>(total));
    CHECK(ids.size() == n);
    const auto kinds = count_kinds(batches);
    CHECK(kinds.at(QuestionKind::same_codec) == (protocol == Protocol::btc ? 2750 : 750));
    CHECK(kinds.at(QuestionKind::cross_codec) == (protocol == Protocol::btc ? 550 : 150));
    CHECK(batches.front().batch_id == std::string(to_string(protocol)) + "-b01");
  }
}

TEST_CASE("design generation is deterministic in the seed") {
  auto config = DesignConfig::standard();
  config.rng_seed = 5;
  const auto a = manifest_string(generate_design(config, Protocol::btc));
  CHECK(a == manifest_string(generate_design(config, Protocol::btc)));
  config.rng_seed = 6;
  CHECK(a != manifest_string(generate_design(config, Protocol::btc)));
}

TEST_CASE("question ids do not depend on the seed") {
  auto config = DesignConfig::standard();
  std::set<std::string> a, b;
  for (const auto& q : generate_same_codec(config, Protocol::ptc)) a.insert(q.question_id);
  config.rng_seed = 99;
  for (const auto& q : generate_same_codec(config, Protocol::ptc)) b.insert(q.question_id);
  CHECK(a == b);
}

TEST_CASE("split rejects indivisible or duplicated input") {
  auto config = DesignConfig::standard();
  auto rng = rng_stream(1, 0);
  auto qs = generate_same_codec(config, Protocol::btc);
  auto extra = generate_bias_and_trap(config, Protocol::btc);
  qs.insert(qs.end(), extra.begin(), extra.end());
  auto dup = qs;
  dup.push_back(qs.front());
  CHECK_THROWS_AS(split_into_batches(dup, config, Protocol::btc, rng), DesignError);
  auto short_by_one = qs;
  short_by_one.erase(short_by_one.begin());
  CHECK_THROWS_AS(split_into_batches(short_by_one, config, Protocol::btc, rng), DesignError);
  CHECK_THROWS_AS(split_into_batches(qs, config, Protocol::ptc, rng), DesignError);
  CHECK(split_into_batches(qs, config, Protocol::btc, rng).size() == 10);
}

TEST_CASE("config validation") {
  auto config = DesignConfig::standard();
  config.codecs.push_back("source");
  CHECK_THROWS_AS(config.validate(), InputError);
  config = DesignConfig::standard();
  config.sources.push_back("src01");
  CHECK_THROWS_AS(config.validate(), InputError);
  config = DesignConfig::standard();
  config.codecs = {"jpeg"};
  auto rng = rng_stream(0, 0);
  CHECK_THROWS_AS(generate_cross_codec(config, Protocol::btc, rng), DesignError);
}

TEST_CASE("manifest round trip") {
  auto config = DesignConfig::standard();
  const auto batches = generate_design(config, Protocol::ptc);
  std::istringstream in(manifest_string(batches));
  const auto index = DesignIndex::parse(in);
  CHECK(index.questions().size() == 1050);
  CHECK(index.batch_ids().size() == 10);
  CHECK(index.source_ids() == config.sources);
  for (const auto& b : batches) {
    CHECK(index.batch(b.batch_id).size() == 105);
    for (const auto& q : b.questions) {
      const auto& r = index.at(q.question_id);
      CHECK(r.left == q.left);
      CHECK(r.right == q.right);
      CHECK(r.kind == q.kind);
      CHECK(r.replicate == q.replicate);
      CHECK(r.batch_id == b.batch_id);
    }
  }
  CHECK_THROWS_AS(index.at("nope"), NotFoundError);
  std::istringstream bad("{\"question_id\": 3}\n");
  CHECK_THROWS_AS(DesignIndex::parse(bad), InputError);
}
