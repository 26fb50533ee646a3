#pragma once

#include <cstdint>
#include <vector>

#include "bar/rank_math.hpp"

namespace bar {

/// Nonnegative weights w_0..w_M over ranks. Counts or probability masses.
struct RankDistribution {
  std::vector<double> weights;

  int max_rank() const noexcept { return static_cast<int>(weights.size()) - 1; }
  double mass() const noexcept;
  /// sum_r r * w_r
  double rank_mass() const noexcept;
  void validate() const;
};

/// Per-rank packet counts. Every rank has an integral level; at most one
/// rank carries an extra fraction in [0, 1).
struct FractionalAssignment {
  std::vector<int> levels;
  int fractional_rank = -1;  // -1 when every t_r is integral
  double fraction = 0.0;
  double budget = 0.0;

  double t(int r) const noexcept;
  std::vector<double> values() const;
};

/// Stair-by-stair fill for t_max <= sum r w_r. Output has t_r <= r.
FractionalAssignment water_fill(const RankDistribution& dist, double t_max);

/// Optimal per-rank counts for budget t_max (absolute, not per unit mass).
/// Delegates to water_fill when the budget does not exceed sum r w_r;
/// otherwise starts from t_r = r and hands whole levels (w_r packets each)
/// to argmax_r beta(t_r, r), splitting the last level.
FractionalAssignment solve_distribution(const BetaTable& table,
                                        const RankDistribution& dist,
                                        double t_max);

/// sum_r w_r E(r, t_r) with a fractional level interpolated linearly.
double distribution_objective(const BetaTable& table,
                              const RankDistribution& dist,
                              const FractionalAssignment& frac);

/// Rank of each batch when integer weights are expanded in rank order.
std::vector<int> materialize_ranks(const RankDistribution& dist);

enum class RoundingMode { randomized, floor };

/// Per-batch integer counts for the batches of materialize_ranks(dist).
/// randomized: floor every batch, then give one packet each to R batches
/// drawn uniformly from the fractional ones, R = w_f * fraction. The total
/// equals the budget. floor: drop the fraction.
std::vector<int> round_fractional(const FractionalAssignment& frac,
                                  const RankDistribution& dist,
                                  std::uint64_t seed,
                                  RoundingMode mode = RoundingMode::randomized);

}  // namespace bar
