#include "bar/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bar/error.hpp"

namespace bar {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};

double sinusoid(const SinusoidalChannel& ch, std::uint64_t c) {
  const double phase =
      2.0 * std::numbers::pi * static_cast<double>(c) / ch.period;
  return std::clamp(ch.base + ch.amplitude * std::sin(phase), 0.0, 1.0);
}

int count_received(double p, int t, Xoshiro256& rng) {
  int received = 0;
  for (int i = 0; i < t; ++i) received += rng.bernoulli(p) ? 0 : 1;
  return received;
}

}  // namespace

void validate(const ChannelModel& channel) {
  std::visit(
      overloaded{
          [](const IidChannel& ch) {
            require(ch.p > 0.0 && ch.p < 1.0, Errc::invalid_argument,
                    "IID channel: p must lie in (0, 1)");
          },
          [](const GilbertElliottChannel& ch) { ch.ge.validate(); },
          [](const SinusoidalChannel& ch) {
            require(ch.period > 0.0, Errc::invalid_argument,
                    "sinusoidal channel: period must be > 0");
          },
      },
      channel);
}

ChannelState initial_state(const ChannelModel& channel, Xoshiro256& rng) {
  ChannelState state;
  if (const auto* g = std::get_if<GilbertElliottChannel>(&channel)) {
    const double s = g->ge.p_gb + g->ge.p_bg;
    const double prob_b = s > 0.0 ? g->ge.p_gb / s : 0.0;
    state.ge_state = rng.bernoulli(prob_b) ? GEState::bad : GEState::good;
  }
  return state;
}

int transmit(const ChannelModel& channel, ChannelState& state, int t,
             Xoshiro256& rng) {
  require(t >= 0, Errc::invalid_argument, "transmit: t must be >= 0");
  const int received = std::visit(
      overloaded{
          [&](const IidChannel& ch) { return count_received(ch.p, t, rng); },
          [&](const GilbertElliottChannel& ch) {
            int got = 0;
            for (int i = 0; i < t; ++i) {
              const bool good = state.ge_state == GEState::good;
              if (!rng.bernoulli(good ? ch.ge.p_g : ch.ge.p_b)) ++got;
              if (rng.bernoulli(good ? ch.ge.p_gb : ch.ge.p_bg))
                state.ge_state = good ? GEState::bad : GEState::good;
            }
            return got;
          },
          [&](const SinusoidalChannel& ch) {
            return count_received(sinusoid(ch, state.batch_counter), t, rng);
          },
      },
      channel);
  ++state.batch_counter;
  return received;
}

double loss_rate_at(const ChannelModel& channel, std::uint64_t c) {
  return std::visit(
      overloaded{
          [](const IidChannel& ch) { return ch.p; },
          [](const GilbertElliottChannel& ch) {
            return stationary_loss_rate(ch.ge);
          },
          [c](const SinusoidalChannel& ch) { return sinusoid(ch, c); },
      },
      channel);
}

double current_loss_probability(const ChannelModel& channel,
                                const ChannelState& state) {
  if (const auto* g = std::get_if<GilbertElliottChannel>(&channel))
    return state.ge_state == GEState::good ? g->ge.p_g : g->ge.p_b;
  return loss_rate_at(channel, state.batch_counter);
}

ChannelModel ch1() { return IidChannel{0.45}; }

ChannelModel ch2() {
  return GilbertElliottChannel{GEParams{0.1, 0.1, 0.1, 0.8}};
}

ChannelModel ch3() { return SinusoidalChannel{}; }

}  // namespace bar
