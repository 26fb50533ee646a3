#include "bar/rank_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bar/error.hpp"

namespace bar {

namespace {

double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

BetaTable::BetaTable(double p, int max_t, int max_r) : p_(p), max_r_(max_r) {
  require(p > 0.0 && p < 1.0, Errc::invalid_argument,
          "beta table: p must lie in (0, 1)");
  require(max_r >= 0, Errc::invalid_argument, "beta table: max_r must be >= 0");
  require(max_t >= -1, Errc::invalid_argument,
          "beta table: max_t must be >= -1");

  const auto width = static_cast<std::size_t>(max_r_) + 1;
  values_.reserve(width * static_cast<std::size_t>(max_t + 2));
  values_.assign(width, 1.0);  // barrier row t = -1

  // B(0, i) = [i == 0]
  staged_.assign(static_cast<std::size_t>(max_r_), 0.0);
  if (max_r_ > 0) staged_[0] = 1.0;

  while (max_t_ < max_t) append_row();
}

void BetaTable::append_row() {
  const int t = max_t_ + 1;
  const auto width = static_cast<std::size_t>(max_r_) + 1;
  const std::size_t base = values_.size();
  values_.resize(base + width);
  double* row = values_.data() + base;

  // Stage 1: B(t, x - 1) at column x; columns with t <= x - 1 are 1.
  row[0] = 0.0;
  for (int x = 1; x <= max_r_; ++x)
    row[x] = (x <= t) ? staged_[static_cast<std::size_t>(x - 1)] : 1.0;

  // Stage 2: beta(t, x) = beta(t, x - 1) + B(t, x - 1), in place.
  const int last = std::min(t, max_r_);
  for (int x = 2; x <= last; ++x) row[x] += row[x - 1];

  // Stage the pmf of row t + 1.
  const double q = 1.0 - p_;
  for (int i = max_r_ - 1; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    const double carried = (i > 0) ? staged_[k - 1] : 0.0;
    staged_[k] = q * carried + p_ * staged_[k];
  }
  max_t_ = t;
}

double BetaTable::operator()(int t, int r) const {
  if (t < -1 || t > max_t_ || r < 0 || r > max_r_)
    fail(Errc::out_of_range, "beta table: index (" + std::to_string(t) + ", " +
                                 std::to_string(r) + ") outside table");
  const auto width = static_cast<std::size_t>(max_r_) + 1;
  return values_[static_cast<std::size_t>(t + 1) * width +
                 static_cast<std::size_t>(r)];
}

std::span<const double> BetaTable::row(int t) const {
  if (t < -1 || t > max_t_)
    fail(Errc::out_of_range, "beta table: row outside table");
  const auto width = static_cast<std::size_t>(max_r_) + 1;
  return {values_.data() + static_cast<std::size_t>(t + 1) * width, width};
}

void BetaTable::grow_to(int new_max_t) {
  while (max_t_ < new_max_t) append_row();
}

BetaTable build_beta_table(double p, int max_t, int max_r) {
  return BetaTable(p, max_t, max_r);
}

BetaTable extend_beta_table(const BetaTable& table, int new_max_t) {
  require(new_max_t >= table.max_t(), Errc::invalid_argument,
          "extend: new_max_t smaller than current table");
  BetaTable out = table;
  out.grow_to(new_max_t);
  return out;
}

int growth_target(const BetaTable& table, int needed_t) noexcept {
  return std::max(needed_t, 2 * table.max_t());
}

const BetaTable& ensure_rows(const BetaTable& table, int needed_t,
                             std::optional<BetaTable>& scratch) {
  if (table.covers(needed_t)) return table;
  scratch.emplace(table);
  scratch->grow_to(growth_target(table, needed_t));
  return *scratch;
}

double expected_rank_indep(const BetaTable& table, int r, int t) {
  require(r >= 0 && r <= table.max_r(), Errc::out_of_range,
          "expected rank: r outside table");
  require(t >= 0 && t <= table.max_t() + 1, Errc::out_of_range,
          "expected rank: t outside table");
  double sum = 0.0;
  for (int j = 0; j < t; ++j) sum += table(j, r);
  return (1.0 - table.p()) * sum;
}

double expected_rank_exact_zeta(int r, int t, double p, std::uint64_t q) {
  require(q >= 2, Errc::invalid_argument, "exact expected rank: q must be >= 2");
  require(r >= 0 && t >= 0, Errc::invalid_argument,
          "exact expected rank: r and t must be >= 0");
  require(p >= 0.0 && p <= 1.0, Errc::invalid_argument,
          "exact expected rank: p must lie in [0, 1]");
  if (r == 0) return 0.0;

  const double qd = static_cast<double>(q);
  // zeta_j^m = prod_{k < j} (1 - q^{-(m - k)}); zero-factor terms stop early.
  auto zeta = [qd](int j, int m) {
    double v = 1.0;
    for (int k = 0; k < j; ++k) {
      v *= 1.0 - std::pow(qd, -static_cast<double>(m - k));
      if (v == 0.0) break;
    }
    return v;
  };

  double total = 0.0;
  for (int i = 0; i <= t; ++i) {
    const double pmf = binomial_coefficient(t, i) * std::pow(1.0 - p, i) *
                       std::pow(p, t - i);
    if (pmf == 0.0) continue;
    double inner = 0.0;
    for (int j = 1; j <= std::min(i, r); ++j) {
      const double penalty =
          std::pow(qd, -static_cast<double>((i - j) * (r - j)));
      if (penalty == 0.0) continue;
      inner += j * zeta(j, i) * zeta(j, r) / zeta(j, j) * penalty;
    }
    total += pmf * inner;
  }
  return total;
}

// ---------------------------------------------------------------------------

void GEParams::validate() const {
  for (double v : {p_gb, p_bg, p_g, p_b})
    require(v >= 0.0 && v <= 1.0, Errc::invalid_argument,
            "GE parameters must lie in [0, 1]");
}

void StateDistribution::validate() const {
  require(prob_g >= 0.0 && prob_b >= 0.0, Errc::invalid_argument,
          "state distribution must be nonnegative");
  require(std::abs(prob_g + prob_b - 1.0) <= 1e-12, Errc::invalid_argument,
          "state distribution must sum to 1");
}

StateDistribution stationary_distribution(const GEParams& ge) {
  ge.validate();
  const double s = ge.p_gb + ge.p_bg;
  require(s > 0.0, Errc::invalid_argument,
          "GE chain without transitions has no unique stationary law");
  return {ge.p_bg / s, ge.p_gb / s};
}

double stationary_loss_rate(const GEParams& ge) {
  const StateDistribution pi = stationary_distribution(ge);
  return pi.prob_g * ge.p_g + pi.prob_b * ge.p_b;
}

namespace {

GEJoint ge_step(const GEParams& ge, const GEJoint& f) {
  const std::size_t n = f.good.size();
  GEJoint next{std::vector<double>(n + 1, 0.0), std::vector<double>(n + 1, 0.0)};
  for (std::size_t k = 0; k < n; ++k) {
    // Loss drawn in the current state, then one transition.
    const double g_lost = f.good[k] * ge.p_g;
    const double g_recv = f.good[k] - g_lost;
    const double b_lost = f.bad[k] * ge.p_b;
    const double b_recv = f.bad[k] - b_lost;

    next.good[k] += g_lost * (1.0 - ge.p_gb) + b_lost * ge.p_bg;
    next.bad[k] += g_lost * ge.p_gb + b_lost * (1.0 - ge.p_bg);
    next.good[k + 1] += g_recv * (1.0 - ge.p_gb) + b_recv * ge.p_bg;
    next.bad[k + 1] += g_recv * ge.p_gb + b_recv * (1.0 - ge.p_bg);
  }
  return next;
}

}  // namespace

GEJoint ge_joint_distribution(const GEParams& ge, StateDistribution initial,
                              int t) {
  ge.validate();
  initial.validate();
  require(t >= 0, Errc::invalid_argument, "GE: t must be >= 0");

  GEJoint f{{initial.prob_g}, {initial.prob_b}};

  for (int tau = 0; tau < t; ++tau) f = ge_step(ge, f);
  return f;
}

double expected_rank_ge(const GEParams& ge, StateDistribution initial, int r,
                        int t) {
  require(r >= 0, Errc::invalid_argument, "GE: r must be >= 0");
  const GEJoint f = ge_joint_distribution(ge, initial, t);
  double sum = 0.0;
  for (int i = 0; i <= t; ++i) {
    const auto k = static_cast<std::size_t>(i);
    sum += (f.good[k] + f.bad[k]) * std::min(i, r);
  }
  return sum;
}

std::vector<std::vector<double>> expected_rank_ge_table(
    const GEParams& ge, StateDistribution initial, int max_r, int max_t) {
  ge.validate();
  initial.validate();
  require(max_r >= 0 && max_t >= 0, Errc::invalid_argument,
          "GE table: bounds must be >= 0");

  std::vector<std::vector<double>> table(
      static_cast<std::size_t>(max_r) + 1,
      std::vector<double>(static_cast<std::size_t>(max_t) + 1, 0.0));
  // One forward pass; E is snapshotted for every r after each packet.
  GEJoint f = ge_joint_distribution(ge, initial, 0);
  for (int t = 0;; ++t) {
    for (int r = 0; r <= max_r; ++r) {
      double sum = 0.0;
      for (int i = 0; i <= t; ++i) {
        const auto k = static_cast<std::size_t>(i);
        sum += (f.good[k] + f.bad[k]) * std::min(i, r);
      }
      table[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] = sum;
    }
    if (t == max_t) break;
    f = ge_step(ge, f);
  }
  return table;
}

// ---------------------------------------------------------------------------

double binomial_lower_tail(double p, int t, int r) {
  if (t <= r - 1) return 1.0;
  double sum = 0.0;
  for (int i = 0; i < r; ++i)
    sum += binomial_coefficient(t, i) * std::pow(1.0 - p, i) *
           std::pow(p, t - i);
  return sum;
}

double condition_number(double p, int t, int r) {
  require(p > 0.0 && p < 1.0, Errc::invalid_argument,
          "condition number: p must lie in (0, 1)");
  require(r > 0 && t >= r, Errc::invalid_argument,
          "condition number: requires t >= r > 0");
  // t! / ((t - r)! (r - 1)!) = t * C(t - 1, r - 1)
  const double factorials = t * binomial_coefficient(t - 1, r - 1);
  const double numerator =
      std::pow(p, t - r + 1) * std::pow(1.0 - p, r - 1) * factorials;
  return numerator / binomial_lower_tail(p, t, r);
}

double condition_number_alternating(double p, int t, int r) {
  require(p > 0.0 && p < 1.0, Errc::invalid_argument,
          "condition number: p must lie in (0, 1)");
  require(r > 0 && t >= r, Errc::invalid_argument,
          "condition number: requires t >= r > 0");
  long double num = 0.0L;
  long double den = 0.0L;
  const long double lp = p;
  for (int j = 0; j <= r - 1; ++j) {
    const long double sign = (j % 2 == 0) ? 1.0L : -1.0L;
    const int e = t - r + j + 1;
    const long double term =
        sign * static_cast<long double>(binomial_coefficient(r - 1, j)) *
        std::pow(lp, static_cast<long double>(e));
    num += term;
    den += term / e;
  }
  return static_cast<double>(num / den);
}

}  // namespace bar
