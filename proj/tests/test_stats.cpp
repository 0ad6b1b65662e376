#include <cmath>
#include <vector>

#include "doctest.h"

#include "aic3/errors.hpp"
#include "aic3/rng.hpp"
#include "aic3/stats.hpp"
#include "aic3/types.hpp"

using namespace aic3;

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  CHECK(thurstone_units_per_jnd() == doctest::Approx(0.6744897501960817).epsilon(1e-14));
  CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
}

TEST_CASE("percentile uses linear interpolation between order statistics") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(percentile_sorted(v, 0.0) == 1.0);
  CHECK(percentile_sorted(v, 1.0) == 4.0);
  CHECK(percentile_sorted(v, 0.5) == doctest::Approx(2.5));
  // numpy.percentile([1,2,3,4], 2.5) == 1.075
  CHECK(percentile_sorted(v, 0.025) == doctest::Approx(1.075));
}

TEST_CASE("two-sided binomial p-value") {
  CHECK(binomial_two_sided_p(5, 10) == doctest::Approx(1.0));
  // 2 * P(X <= 1 | n=10) = 2 * 11/1024
  CHECK(binomial_two_sided_p(1, 10) == doctest::Approx(22.0 / 1024.0));
  CHECK(binomial_two_sided_p(9, 10) == doctest::Approx(22.0 / 1024.0));
  CHECK(binomial_two_sided_p(0, 0) == doctest::Approx(1.0));
  CHECK(binomial_two_sided_p(100, 100) < 1e-20);
}

TEST_CASE("rng streams are reproducible and distinct") {
  auto a = rng_stream(42, 0), b = rng_stream(42, 0), c = rng_stream(42, 1);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
}

TEST_CASE("enum names round trip") {
  for (auto p : {Protocol::btc, Protocol::ptc}) CHECK(parse_protocol(to_string(p)) == p);
  for (auto k : {QuestionKind::same_codec, QuestionKind::cross_codec, QuestionKind::bias, QuestionKind::trap})
    CHECK(parse_kind(to_string(k)) == k);
  for (auto a : {Answer::left, Answer::right, Answer::not_sure}) CHECK(parse_answer(to_string(a)) == a);
  CHECK_THROWS_AS(parse_answer("LEFT"), InputError);
}

TEST_CASE("level 0 keys collapse onto the source") {
  CHECK(make_key("s", "jpeg", 0) == make_key("s", "source", 0));
  CHECK(make_key("s", "jpeg", 0).codec_id == "source");
  CHECK_THROWS_AS(make_key("s", "source", 3), InputError);
  CHECK_THROWS(make_key("s", "jpeg", 11));
  CHECK(to_string(make_key("s", "vvc", 4)) == "s/vvc/4");
}
