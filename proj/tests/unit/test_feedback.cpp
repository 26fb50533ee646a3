#include <doctest.h>

#include <cmath>
#include <random>

#include "bar/error.hpp"
#include "bar/feedback.hpp"

using namespace bar;

TEST_SUITE("feedback") {

TEST_CASE("maximum likelihood estimate") {
  FeedbackWindow w(4);
  CHECK_FALSE(estimate_mle(w).has_value());
  w.push({100, 80});
  CHECK(*estimate_mle(w) == doctest::Approx(0.2));

  FeedbackWindow all(2);
  all.push({10, 10});
  CHECK(*estimate_mle(all) == 0.0);
  FeedbackWindow none(2);
  none.push({10, 0});
  CHECK(*estimate_mle(none) == 1.0);

  FeedbackWindow mixed(3);
  mixed.push({16, 9});
  mixed.push_lost();
  mixed.push({16, 12});
  CHECK(mixed.received() == 2);
  CHECK(mixed.total_sent() == 32);
  CHECK(mixed.total_received() == 21);
  CHECK(*estimate_mle(mixed) == doctest::Approx(11.0 / 32.0));
}

TEST_CASE("minimax estimate") {
  FeedbackWindow w(4);
  CHECK_FALSE(estimate_minimax(w).has_value());
  w.push({100, 80});
  CHECK(*estimate_minimax(w) == doctest::Approx(25.0 / 110.0));
  FeedbackWindow half(1);
  half.push({4, 2});
  CHECK(*estimate_minimax(half) == doctest::Approx(0.5));
}

TEST_CASE("minimax shrinks toward one half") {
  std::mt19937 gen(1);
  for (int it = 0; it < 500; ++it) {
    FeedbackWindow w(8);
    const int blocks = std::uniform_int_distribution<int>(1, 8)(gen);
    for (int b = 0; b < blocks; ++b) {
      const long n = std::uniform_int_distribution<long>(1, 20)(gen);
      w.push({n, std::uniform_int_distribution<long>(0, n)(gen)});
    }
    const double mle = *estimate_mle(w);
    const double mm = *estimate_minimax(w);
    CHECK(mm >= 0.0);
    CHECK(mm <= 1.0);
    if (mle < 0.5) {
      CHECK(mm > mle);
      CHECK(mm < 0.5);
    } else if (mle > 0.5) {
      CHECK(mm < mle);
      CHECK(mm > 0.5);
    } else {
      CHECK(mm == doctest::Approx(0.5));
    }
  }
}

TEST_CASE("weighted Bayesian estimate") {
  const BayesResult r = estimate_bayes({0.5, 0.5, 1.0}, {10, 7});
  CHECK(r.p_hat == doctest::Approx(3.5 / 11.0));
  CHECK(r.state.a == doctest::Approx(3.5));
  CHECK(r.state.b == doctest::Approx(7.5));

  const BayesResult empty = estimate_bayes({2.0, 6.0, 0.5}, {0, 0});
  CHECK(empty.p_hat == doctest::Approx(0.25));
  CHECK(empty.state.a == doctest::Approx(1.0));
  CHECK(empty.state.b == doctest::Approx(3.0));

  const BayesResult faded = estimate_bayes({3.0, 9.0, 0.0}, {20, 15});
  CHECK(faded.p_hat == doctest::Approx(0.25));

  CHECK(default_gamma(16) == doctest::Approx(std::pow(0.1, 1.0 / 16)));
  CHECK(std::pow(default_gamma(10), 10) == doctest::Approx(0.1));
  CHECK_THROWS_AS(estimate_bayes({-1.0, 0.5, 1.0}, {1, 1}), Error);
  CHECK_THROWS_AS(estimate_bayes({0.5, 0.5, 1.5}, {1, 1}), Error);
  CHECK_THROWS_AS(estimate_bayes({0.5, 0.5, 1.0}, {3, 4}), Error);
  CHECK_THROWS_AS(default_gamma(0), Error);
}

TEST_CASE("Bayes fade converges geometrically to the single-block ratio") {
  const double gamma = 0.8;
  BayesState s{0.5, 0.5, gamma};
  const BlockFeedback obs{16, 10};
  const double target = 6.0 / 16.0;
  double prev_err = 1.0;
  for (int k = 1; k <= 60; ++k) {
    const BayesResult r = estimate_bayes(s, obs);
    s = r.state;
    const double err = std::abs(r.p_hat - target);
    if (k > 3 && prev_err > 1e-12) CHECK(err <= prev_err * (gamma + 1e-3));
    prev_err = err;
  }
  CHECK(prev_err < 1e-5);
}

TEST_CASE("window eviction and lost slots") {
  FeedbackWindow w(3);
  for (long i = 1; i <= 5; ++i) w.push({10, i});
  CHECK(w.slots() == 3);
  CHECK(w.received() == 3);
  CHECK(w.total_received() == 3 + 4 + 5);

  // Lost feedback occupies a slot, so alternation keeps half the frame.
  FeedbackWindow alt(8);
  for (int i = 0; i < 16; ++i) {
    if (i % 2) alt.push({4, 2});
    else alt.push_lost();
  }
  CHECK(alt.slots() == 8);
  CHECK(alt.received() == 4);
  CHECK_THROWS_AS(FeedbackWindow(0), Error);
  CHECK_THROWS_AS(alt.push({2, 3}), Error);
}

TEST_CASE("all-lost frame reuses the previous estimate") {
  for (EstimatorKind kind : {EstimatorKind::mle, EstimatorKind::minimax, EstimatorKind::bayes}) {
    LossRateEstimator est(kind, 4);
    CHECK_FALSE(est.estimate().has_value());
    est.observe(std::nullopt);
    CHECK_FALSE(est.estimate().has_value());
    est.observe(BlockFeedback{16, 9});
    REQUIRE(est.estimate().has_value());
    const double first = *est.estimate();
    for (int i = 0; i < 4; ++i) {
      est.observe(std::nullopt);
      CHECK(*est.estimate() == first);
    }
    FeedbackWindow w(2);
    w.push({8, 4});
    w.set_last_estimate(*estimate_mle(w));
    w.push_lost();
    w.push_lost();
    CHECK(w.received() == 0);
    CHECK(*estimate_mle(w) == doctest::Approx(0.5));
    CHECK(*estimate_minimax(w) == doctest::Approx(0.5));
  }
}

TEST_CASE("estimator object follows the window estimators") {
  LossRateEstimator mle(EstimatorKind::mle, 2);
  mle.observe(BlockFeedback{10, 8});
  mle.observe(BlockFeedback{10, 6});
  CHECK(*mle.estimate() == doctest::Approx(0.3));
  mle.observe(BlockFeedback{10, 10});
  CHECK(*mle.estimate() == doctest::Approx(0.2));

  LossRateEstimator bayes(EstimatorKind::bayes, 16, 1.0);
  bayes.observe(BlockFeedback{10, 7});
  CHECK(*bayes.estimate() == doctest::Approx(3.5 / 11.0));
  bayes.observe(std::nullopt);
  CHECK(*bayes.estimate() == doctest::Approx(3.5 / 11.0));
}

TEST_CASE("estimates stay in the unit interval") {
  std::mt19937 gen(8);
  for (EstimatorKind kind : {EstimatorKind::mle, EstimatorKind::minimax, EstimatorKind::bayes}) {
    LossRateEstimator est(kind, 5);
    for (int i = 0; i < 2000; ++i) {
      if (gen() % 4 == 0) {
        est.observe(std::nullopt);
      } else {
        const long n = std::uniform_int_distribution<long>(0, 12)(gen);
        est.observe(BlockFeedback{n, std::uniform_int_distribution<long>(0, n)(gen)});
      }
      if (est.estimate()) {
        CHECK(*est.estimate() >= 0.0);
        CHECK(*est.estimate() <= 1.0);
      }
    }
  }
}

TEST_CASE("maximum likelihood is consistent under independent loss") {
  const double p = 0.45;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 gen(seed);
    std::binomial_distribution<long> got(16, 1 - p);
    LossRateEstimator est(EstimatorKind::mle, 10000);
    for (int b = 0; b < 10000; ++b) est.observe(BlockFeedback{16, got(gen)});
    within += std::abs(*est.estimate() - p) < 0.01;
  }
  CHECK(within == 20);
}

}  // TEST_SUITE
