#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace bar {

/*
 * Lookup table of the binomial lower tail
 *
 *   beta(t, r) = Pr(Binom(t, 1 - p) < r)     for t >= 0, t >= r
 *   beta(t, r) = 1                           for t <= r - 1 (incl. t = -1)
 *
 * Rows run over t = -1 .. max_t, columns over r = 0 .. max_r. Row -1 is
 * the barrier row used by the approximation-seeded corrector.
 *
 * Rows are generated one at a time from a staged row of binomial pmf
 * values B(t, i): the pmf is first written into the row (position (t, x)
 * holds B(t, x - 1)) and then prefix-summed in place. The pmf of the next
 * row is kept so the table can grow without recomputing old rows.
 *
 * A built table is read-only; grow_to() is the only mutator and must not
 * run concurrently with readers.
 */
class BetaTable {
 public:
  BetaTable(double p, int max_t, int max_r);

  double p() const noexcept { return p_; }
  int max_t() const noexcept { return max_t_; }
  int max_r() const noexcept { return max_r_; }
  bool covers(int t) const noexcept { return t <= max_t_; }

  /// beta(t, r); t in [-1, max_t], r in [0, max_r].
  double operator()(int t, int r) const;

  /// Row t as a span of max_r + 1 values.
  std::span<const double> row(int t) const;

  /// Appends rows until max_t() == new_max_t. No-op if already covered.
  void grow_to(int new_max_t);

 private:
  void append_row();

  double p_;
  int max_t_ = -1;
  int max_r_;
  std::vector<double> values_;  // (max_t + 2) x (max_r + 1), row-major
  std::vector<double> staged_;  // B(max_t + 1, i) for i = 0 .. max_r - 1
};

BetaTable build_beta_table(double p, int max_t, int max_r);

/// Copy of `table` grown to new_max_t. Existing rows are bit-identical.
BetaTable extend_beta_table(const BetaTable& table, int new_max_t);

/// Row count to request when a solver needs row `needed_t`: at least
/// double the current size, amortizing repeated growth.
int growth_target(const BetaTable& table, int needed_t) noexcept;

/// `table` itself if it covers row needed_t, otherwise a copy grown by the
/// growth policy and held in `scratch`.
const BetaTable& ensure_rows(const BetaTable& table, int needed_t,
                             std::optional<BetaTable>& scratch);

/// E(r, t) under i.i.d. loss: (1 - p) * sum_{j < t} beta(j, r).
/// Requires r <= max_r and t <= max_t + 1.
double expected_rank_indep(const BetaTable& table, int r, int t);

/// E(r, t) with the exact rank-transition probabilities of random linear
/// recoding over GF(q). q must be an integer >= 2.
double expected_rank_exact_zeta(int r, int t, double p, std::uint64_t q = 256);

// ---------------------------------------------------------------------------
// Gilbert-Elliott channel

struct GEParams {
  double p_gb = 0.0;  // G -> B transition
  double p_bg = 0.0;  // B -> G transition
  double p_g = 0.0;   // loss probability in G
  double p_b = 0.0;   // loss probability in B

  void validate() const;
};

struct StateDistribution {
  double prob_g = 1.0;
  double prob_b = 0.0;

  void validate() const;
};

StateDistribution stationary_distribution(const GEParams& ge);
double stationary_loss_rate(const GEParams& ge);

/// Joint law f(s, i, t) = Pr(S_t = s, X_t = i) after t packets, i = 0..t.
/// Per packet: the loss event is drawn in the current state, then the
/// chain transitions.
struct GEJoint {
  std::vector<double> good;
  std::vector<double> bad;
};

GEJoint ge_joint_distribution(const GEParams& ge, StateDistribution initial,
                              int t);

double expected_rank_ge(const GEParams& ge, StateDistribution initial, int r,
                        int t);

/// E_GE(r, t) for r = 0..max_r, t = 0..max_t, indexed [r][t]. One forward
/// pass serves every r.
std::vector<std::vector<double>> expected_rank_ge_table(
    const GEParams& ge, StateDistribution initial, int max_r, int max_t);

// ---------------------------------------------------------------------------
// Sensitivity of beta to p

/// Condition number of beta(t, r) with respect to p, via the incomplete
/// beta closed form. Defined for t >= r > 0.
double condition_number(double p, int t, int r);

/// Same quantity from the alternating binomial sums. Independent route.
double condition_number_alternating(double p, int t, int r);

/// beta(t, r) by direct binomial summation, without a table.
double binomial_lower_tail(double p, int t, int r);

}  // namespace bar
