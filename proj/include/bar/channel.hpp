#pragma once

#include <cstdint>
#include <variant>

#include "bar/rank_math.hpp"
#include "bar/rng.hpp"

namespace bar {

struct IidChannel {
  double p = 0.0;
};

struct GilbertElliottChannel {
  GEParams ge;
};

/// p(c) = base + amplitude * sin(2 pi c / period), clamped to [0, 1], where c
/// counts batches sent on the link.
struct SinusoidalChannel {
  double base = 0.45;
  double amplitude = 0.3;
  double period = 1280.0;
};

using ChannelModel =
    std::variant<IidChannel, GilbertElliottChannel, SinusoidalChannel>;

enum class GEState : std::uint8_t { good, bad };

struct ChannelState {
  GEState ge_state = GEState::good;
  std::uint64_t batch_counter = 0;
};

void validate(const ChannelModel& channel);

/// State at the start of a run. GE draws its state from the stationary law.
ChannelState initial_state(const ChannelModel& channel, Xoshiro256& rng);

/// Sends one batch of t packets and returns how many arrive. Per GE packet
/// the loss is drawn in the current state, then the chain moves. The batch
/// counter advances once per call, also for t = 0.
int transmit(const ChannelModel& channel, ChannelState& state, int t,
             Xoshiro256& rng);

/// Loss rate a node with perfect channel knowledge would plug in for batch c:
/// p for IID, the long-run rate for GE, p(c) for the sinusoid.
double loss_rate_at(const ChannelModel& channel, std::uint64_t c);

/// Loss probability the next packet faces given the state.
double current_loss_probability(const ChannelModel& channel,
                                const ChannelState& state);

ChannelModel ch1();  // IID 0.45
ChannelModel ch2();  // GE 0.1 / 0.1 / 0.1 / 0.8
ChannelModel ch3();  // sinusoid 0.45 +- 0.3, period 1280

}  // namespace bar
