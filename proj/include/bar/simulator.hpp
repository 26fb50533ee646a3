#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "bar/channel.hpp"
#include "bar/dist_solver.hpp"
#include "bar/feedback.hpp"

namespace bar {

// ---------------------------------------------------------------------------
// Recoding policies applied by every intermediate node

/// Same number of packets for every batch.
struct BaselinePolicy {};

/// Greedy solver with the outgoing link's true loss rate for the block.
struct BarKnownP {};

/// Greedy solver with a fixed, possibly wrong, loss rate.
struct BarGuessedP {
  double p = 0.45;
};

enum class GEInitialLaw { stationary, current_state };

/// Greedy over Gilbert-Elliott expected ranks. Needs a GE link.
struct BarGE {
  GEInitialLaw initial = GEInitialLaw::stationary;
};

/// Equal-opportunity approximation; no loss rate needed.
struct BarApprox {};

/// Greedy solver with a loss rate estimated from per-block feedback. Runs
/// the approximation until the first feedback arrives.
struct BarFeedback {
  EstimatorKind estimator = EstimatorKind::mle;
  int window = 16;
  bool lossy = false;
  std::optional<double> gamma;
};

using Policy = std::variant<BaselinePolicy, BarKnownP, BarGuessedP, BarGE,
                            BarApprox, BarFeedback>;

struct SimConfig {
  int hops = 1;
  int M = 4;
  int block_size = 1;
  int t_max = 0;  // 0 selects M * block_size
  int num_blocks = 1;
  int trials = 1;
  int threads = 1;
  std::vector<ChannelModel> channels{IidChannel{0.2}};  // one, or one per link
  Policy policy = BaselinePolicy{};
  std::uint64_t seed = 0;

  void validate() const;
  int budget() const noexcept { return t_max > 0 ? t_max : M * block_size; }
  const ChannelModel& channel(int link) const;
};

/// Ranks of one block as received at `node` (1 = first node after the
/// source). p_used is the loss rate the sending node solved with, NaN when
/// it used none.
struct ThroughputRecord {
  int trial = 0;
  int node = 0;
  int block = 0;
  std::vector<int> ranks;
  double mean_rank = 0.0;
  double normalized_throughput = 0.0;
  double p_used = 0.0;
};

/// One trial of the line network. Records are ordered by block, then node.
std::vector<ThroughputRecord> run_line_network(const SimConfig& config,
                                               std::uint64_t seed,
                                               int trial = 0);

/// All trials of config, fanned out over config.threads. Output order is
/// trial-major and independent of the thread count.
std::vector<ThroughputRecord> simulate(const SimConfig& config);

struct NodeStats {
  int node = 0;
  long blocks = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean normalized throughput per node with the standard error over blocks.
std::vector<NodeStats> summarize(const std::vector<ThroughputRecord>& records,
                                 int hops);

/// Total rank over records divided by (batches * M).
double normalized_throughput(const std::vector<ThroughputRecord>& records,
                             int M);

// ---------------------------------------------------------------------------
// Deterministic rank-distribution evolution (large-block limit)

enum class EvolvePolicy { baseline, bar };

/// Distribution at the next node. BAR solves the distribution problem with
/// budget M per unit mass; baseline sends M per batch. A fractional t_r is
/// the two-point mixture of its neighbouring integers.
RankDistribution evolve_rank_distribution(const RankDistribution& dist,
                                          EvolvePolicy policy, double p,
                                          int M);

RankDistribution evolve_rank_distribution(const RankDistribution& dist,
                                          EvolvePolicy policy,
                                          const BetaTable& table, int M);

/// Entry h is the distribution at node h, h = 0..hops; entry 0 is the
/// source's point mass at M.
std::vector<RankDistribution> evolve_line(int M, double p, int hops,
                                          EvolvePolicy policy);

/// sum_j j h_j / M.
double normalized_throughput(const RankDistribution& dist);

// ---------------------------------------------------------------------------
// Estimator traces on a single link

struct EstimateTrace {
  std::vector<double> truth;     // mean loss rate over each block's batches
  std::vector<double> estimate;  // estimate available when the block is sent
};

/// Sends `blocks` blocks of L batches with M packets each and feeds the
/// per-block (n, x) to the estimator. The per-block packet total is M * L
/// under every policy that spends the full budget, so the trace matches
/// what a feedback-driven node sees.
EstimateTrace estimate_trace(const ChannelModel& channel, EstimatorKind kind,
                             int window, std::optional<double> gamma,
                             bool lossy, int M, int L, int blocks,
                             std::uint64_t seed);

}  // namespace bar
