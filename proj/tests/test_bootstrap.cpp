#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "disco/bootstrap.hpp"
#include "disco/errors.hpp"
#include "disco/random.hpp"

using namespace disco;

TEST_CASE("constant sample gives a zero-width interval") {
  const std::vector<double> s(100, 0.5);
  const BootstrapResult r = bootstrap_ci(s, 1000, 0.95, 3);
  CHECK(r.point_estimate == 0.5);
  CHECK(r.lower == 0.5);
  CHECK(r.upper == 0.5);
  CHECK(r.margin_of_error == 0.0);
  CHECK(r.full_width == 0.0);
  CHECK(r.replicates == 1000);
  CHECK(r.confidence == 0.95);
}

TEST_CASE("interval contains the mean; margin is the half-width") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(1 + rng.below(30));
    for (auto& x : s) x = rng.bernoulli(0.3) ? rng.uniform(0.0, 1.0) : 0.0;
    const BootstrapResult r = bootstrap_ci(s, 200, 0.9, static_cast<std::uint64_t>(trial));
    CHECK(r.lower <= r.point_estimate);
    CHECK(r.point_estimate <= r.upper);
    CHECK(r.margin_of_error >= 0.0);
    CHECK(r.margin_of_error == doctest::Approx((r.upper - r.lower) / 2).epsilon(1e-12));
  }
}

TEST_CASE("percentiles of the replicate means") {
  Rng rng(2);
  std::vector<double> s(40);
  for (auto& x : s) x = rng.normal(0.3, 0.1);
  std::vector<double> means = bootstrap_replicate_means(s, 500, 9);
  REQUIRE(means.size() == 500);
  std::sort(means.begin(), means.end());
  const BootstrapResult r = bootstrap_ci(s, 500, 0.95, 9);
  const double mean = [&] {
    double t = 0;
    for (double x : s) t += x;
    return t / static_cast<double>(s.size());
  }();
  CHECK(r.point_estimate == doctest::Approx(mean).epsilon(1e-12));
  CHECK(r.lower == std::min(mean, sorted_quantile(means, 0.025)));
  CHECK(r.upper == std::max(mean, sorted_quantile(means, 0.975)));
}

TEST_CASE("sorted_quantile interpolates linearly") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(sorted_quantile(v, 0.0) == 1.0);
  CHECK(sorted_quantile(v, 1.0) == 4.0);
  CHECK(sorted_quantile(v, 0.5) == 2.5);
  CHECK(sorted_quantile(v, 1.0 / 3.0) == doctest::Approx(2.0));
}

TEST_CASE("reproducible and monotone in confidence") {
  Rng rng(4);
  std::vector<double> s(60);
  for (auto& x : s) x = rng.uniform();
  CHECK(bootstrap_ci(s, 1000, 0.95, 42) == bootstrap_ci(s, 1000, 0.95, 42));
  CHECK_FALSE(bootstrap_ci(s, 1000, 0.95, 42) == bootstrap_ci(s, 1000, 0.95, 43));
  double prev = 0.0;
  for (double c : {0.5, 0.8, 0.9, 0.95, 0.99}) {
    const BootstrapResult r = bootstrap_ci(s, 1000, c, 42);
    CHECK(r.full_width >= prev);
    prev = r.full_width;
  }
}

TEST_CASE("errors") {
  const std::vector<double> empty;
  const std::vector<double> one = {1.0};
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code([&] { bootstrap_ci(empty); }) == ErrorCode::EmptySample);
  CHECK(code([&] { bootstrap_ci(one, 0); }) == ErrorCode::EmptySample);
  CHECK(code([&] { bootstrap_ci(one, 10, 1.0); }) == ErrorCode::InvalidConfig);
  CHECK(code([&] { bootstrap_ci(one, 10, 0.0); }) == ErrorCode::InvalidConfig);
}
