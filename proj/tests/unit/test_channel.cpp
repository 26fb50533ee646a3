#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bar/channel.hpp"
#include "bar/error.hpp"

using namespace bar;

TEST_SUITE("channel") {

TEST_CASE("empty batch advances only the counter") {
  Xoshiro256 rng(1);
  const ChannelModel ge = ch2();
  ChannelState s = initial_state(ge, rng);
  const GEState before = s.ge_state;
  CHECK(transmit(ge, s, 0, rng) == 0);
  CHECK(s.batch_counter == 1);
  CHECK(s.ge_state == before);
  const ChannelModel sin = ch3();
  ChannelState t = initial_state(sin, rng);
  CHECK(transmit(sin, t, 0, rng) == 0);
  CHECK(transmit(sin, t, 0, rng) == 0);
  CHECK(t.batch_counter == 2);
}

TEST_CASE("independent loss has the right mean") {
  for (double p : {0.1, 0.45, 0.8}) {
    Xoshiro256 rng(42);
    const ChannelModel ch = IidChannel{p};
    ChannelState s = initial_state(ch, rng);
    const int n = 200000;
    long got = 0;
    for (int i = 0; i < n; ++i) got += transmit(ch, s, 1, rng);
    const double sd = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(got) / n - (1 - p)) < 3 * sd);
  }
}

TEST_CASE("deterministic Gilbert-Elliott path") {
  // Alternating states, no loss in G, certain loss in B.
  const ChannelModel ch = GilbertElliottChannel{{1.0, 1.0, 0.0, 1.0}};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Xoshiro256 rng(seed);
    ChannelState s = initial_state(ch, rng);
    bool good = s.ge_state == GEState::good;
    for (int t : {1, 2, 3, 4, 5, 7, 0, 6}) {
      int expect = 0;
      for (int k = 0; k < t; ++k) {
        expect += good ? 1 : 0;
        good = !good;
      }
      CHECK(transmit(ch, s, t, rng) == expect);
      CHECK((s.ge_state == GEState::good) == good);
    }
  }
  // Absorbing good state receives everything.
  const ChannelModel stay = GilbertElliottChannel{{0.0, 1.0, 0.0, 1.0}};
  Xoshiro256 rng(3);
  ChannelState s = initial_state(stay, rng);
  CHECK(s.ge_state == GEState::good);
  CHECK(transmit(stay, s, 50, rng) == 50);
}

TEST_CASE("Gilbert-Elliott empirical loss matches the stationary rate") {
  const ChannelModel ch = ch2();
  Xoshiro256 rng(2024);
  ChannelState s = initial_state(ch, rng);
  const int batches = 2000, per = 1000;
  double sum = 0.0, sum2 = 0.0;
  for (int b = 0; b < batches; ++b) {
    const double loss = 1.0 - transmit(ch, s, per, rng) / double(per);
    sum += loss;
    sum2 += loss * loss;
  }
  const double mean = sum / batches;
  const double se = std::sqrt((sum2 / batches - mean * mean) / (batches - 1));
  CHECK(std::abs(mean - 0.45) < 3 * se);
}

TEST_CASE("loss rates for the three presets") {
  for (std::uint64_t c : {0ULL, 17ULL, 5000ULL}) CHECK(loss_rate_at(ch1(), c) == 0.45);
  CHECK(loss_rate_at(ch2(), 123) == doctest::Approx(0.45));
  CHECK(loss_rate_at(ch3(), 0) == doctest::Approx(0.45));
  CHECK(loss_rate_at(ch3(), 320) == doctest::Approx(0.75));
  CHECK(loss_rate_at(ch3(), 960) == doctest::Approx(0.15));
  CHECK(loss_rate_at(ch3(), 1280) == doctest::Approx(0.45));
  const ChannelModel clamp = SinusoidalChannel{0.9, 0.3, 100};
  CHECK(loss_rate_at(clamp, 25) == 1.0);
  const ChannelModel low = SinusoidalChannel{0.1, 0.3, 100};
  CHECK(loss_rate_at(low, 75) == 0.0);
}

TEST_CASE("sinusoid follows the batch counter") {
  const ChannelModel ch = ch3();
  Xoshiro256 rng(5);
  ChannelState s = initial_state(ch, rng);
  for (int c = 0; c < 400; ++c) {
    CHECK(current_loss_probability(ch, s) ==
          doctest::Approx(0.45 + 0.3 * std::sin(2 * std::numbers::pi * c / 1280)));
    transmit(ch, s, 1, rng);
  }
}

TEST_CASE("current loss probability tracks the GE state") {
  const ChannelModel ch = ch2();
  ChannelState s;
  s.ge_state = GEState::good;
  CHECK(current_loss_probability(ch, s) == 0.1);
  s.ge_state = GEState::bad;
  CHECK(current_loss_probability(ch, s) == 0.8);
  CHECK(current_loss_probability(IidChannel{0.3}, s) == 0.3);
}

TEST_CASE("seeded runs are reproducible") {
  for (const ChannelModel& ch : {ch1(), ch2(), ch3()}) {
    Xoshiro256 a(77), b(77);
    ChannelState sa = initial_state(ch, a), sb = initial_state(ch, b);
    for (int i = 0; i < 500; ++i)
      CHECK(transmit(ch, sa, i % 9, a) == transmit(ch, sb, i % 9, b));
    CHECK(sa.batch_counter == sb.batch_counter);
  }
}

TEST_CASE("channel validation") {
  CHECK_THROWS_AS(validate(IidChannel{0.0}), Error);
  CHECK_THROWS_AS(validate(IidChannel{1.0}), Error);
  CHECK_THROWS_AS(validate(GilbertElliottChannel{{0.1, 0.1, 0.1, 1.2}}), Error);
  CHECK_THROWS_AS(validate(SinusoidalChannel{0.45, 0.3, 0.0}), Error);
  CHECK_NOTHROW(validate(ch1()));
  CHECK_NOTHROW(validate(ch2()));
  CHECK_NOTHROW(validate(ch3()));
  Xoshiro256 rng(1);
  ChannelState s;
  CHECK_THROWS_AS(transmit(ch1(), s, -1, rng), Error);
}

TEST_CASE("random number streams") {
  Xoshiro256 a = Xoshiro256::stream(9, {2, 0, 1});
  Xoshiro256 b = Xoshiro256::stream(9, {2, 0, 1});
  Xoshiro256 c = Xoshiro256::stream(9, {2, 1, 0});
  bool differ = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a();
    CHECK(x == b());
    differ = differ || x != c();
  }
  CHECK(differ);
  Xoshiro256 u(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(7) < 7);
  }
  CHECK_FALSE(u.bernoulli(0.0));
  CHECK(u.bernoulli(1.0));
}

}  // TEST_SUITE
