#pragma once

#include <cstdint>
#include <vector>

#include "bar/rank_math.hpp"

namespace bar {

struct Block {
  std::vector<int> ranks;
  std::uint64_t block_id = 0;

  /// Nonempty, every rank in [0, max_r].
  void validate(int max_r) const;
};

struct Assignment {
  std::vector<int> counts;
  int budget = 0;
};

struct SolveReport {
  Assignment assignment;
  double objective = 0.0;
  long iterations = 0;
};

/// Greedy solver: fill t_b = r_b, then hand out the remaining packets one at
/// a time to argmax_b beta(t_b, r_b) via a binary max-heap. Ties go to the
/// lowest batch index. When t_max <= sum r_b the budget is poured into the
/// batches in block order, never exceeding r_b.
///
/// A table that does not cover row t_max is extended into a private copy;
/// the caller's table is never modified.
SolveReport solve_greedy(const BetaTable& table, const Block& block, int t_max);

/// Equal-opportunity approximation. Needs no loss rate. Rank-0 batches get
/// nothing once the budget exceeds sum r_b; the surplus is split evenly over
/// the positive-rank batches and the remainder goes to the highest ranks.
Assignment approx_equal_opportunity(const Block& block, int t_max);

/// Corrector seeded with approx_equal_opportunity: move one packet from
/// argmin_a beta(t_a - 1, r_a) to argmax_b beta(t_b, r_b) while that
/// improves the objective. Keys of the batch leaving the max-heap's
/// counterpart are left stale (two heap updates per step).
SolveReport solve_via_approx(const BetaTable& table, const Block& block,
                             int t_max);

/// Exhaustive search over all compositions of t_max. Limited to
/// |block| <= 4 and t_max <= 16.
SolveReport brute_force_oracle(const BetaTable& table, const Block& block,
                               int t_max);

/// sum_b E(r_b, t_b).
double objective(const BetaTable& table, const Block& block,
                 const Assignment& assignment);

/// No improving single-packet move exists:
/// max_b beta(t_b, r_b) <= min_a beta(t_a - 1, r_a) + tol.
bool is_certified_optimal(const BetaTable& table, const Block& block,
                          const Assignment& assignment, double tol = 0.0);

/// Greedy over arbitrary expected-rank curves e[r][t] (t = 0..t_max): each
/// packet goes to the batch with the largest marginal gain
/// e[r_b][t_b + 1] - e[r_b][t_b]. Used for channels whose E is not given by
/// a beta table (Gilbert-Elliott).
SolveReport solve_greedy_marginal(const std::vector<std::vector<double>>& e,
                                  const Block& block, int t_max);

}  // namespace bar
