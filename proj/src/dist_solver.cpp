#include "bar/dist_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "bar/error.hpp"
#include "bar/rng.hpp"

namespace bar {

namespace {

double tolerance(double t_max) { return 1e-12 * std::max(1.0, t_max); }

// Turns a residual budget on rank r into a level fraction, absorbing
// values that round to a whole level.
void set_fraction(FractionalAssignment& out, int r, double fraction) {
  const auto k = static_cast<std::size_t>(r);
  if (fraction <= 1e-12) return;
  if (fraction >= 1.0 - 1e-12) {
    ++out.levels[k];
    return;
  }
  out.fractional_rank = r;
  out.fraction = fraction;
}

}  // namespace

double RankDistribution::mass() const noexcept {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double RankDistribution::rank_mass() const noexcept {
  double s = 0.0;
  for (std::size_t r = 0; r < weights.size(); ++r)
    s += static_cast<double>(r) * weights[r];
  return s;
}

void RankDistribution::validate() const {
  require(!weights.empty(), Errc::invalid_argument,
          "rank distribution needs at least one rank");
  bool positive = false;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, Errc::invalid_argument,
            "rank distribution weights must be finite and >= 0");
    positive = positive || w > 0.0;
  }
  require(positive, Errc::invalid_argument,
          "rank distribution has no positive weight");
}

double FractionalAssignment::t(int r) const noexcept {
  const double base = static_cast<double>(levels[static_cast<std::size_t>(r)]);
  return r == fractional_rank ? base + fraction : base;
}

std::vector<double> FractionalAssignment::values() const {
  std::vector<double> out(levels.size());
  for (std::size_t r = 0; r < levels.size(); ++r)
    out[r] = t(static_cast<int>(r));
  return out;
}

FractionalAssignment water_fill(const RankDistribution& dist, double t_max) {
  dist.validate();
  require(t_max >= 0.0, Errc::invalid_argument, "t_max must be >= 0");
  const double eps = tolerance(t_max);
  require(t_max <= dist.rank_mass() + eps, Errc::invalid_argument,
          "water fill: budget exceeds sum r * w_r");

  const int m = dist.max_rank();
  const auto& w = dist.weights;
  FractionalAssignment out;
  out.budget = t_max;
  out.levels.assign(w.size(), 0);

  // Raise every unfilled rank by one level while a full stair fits.
  double t = t_max;
  double stair = std::accumulate(w.begin() + 1, w.end(), 0.0);
  int a = 0;
  for (int i = 1; i <= m; ++i) {
    if (t < stair - eps) break;
    t = std::max(0.0, t - stair);
    stair -= w[static_cast<std::size_t>(i)];
    ++a;
  }
  for (int r = 0; r <= m; ++r)
    out.levels[static_cast<std::size_t>(r)] = std::min(a, r);

  // Partial stair, highest rank first.
  for (int j = m; j > a && t > eps; --j) {
    const double wj = w[static_cast<std::size_t>(j)];
    if (t < wj - eps) {
      set_fraction(out, j, t / wj);
      break;
    }
    ++out.levels[static_cast<std::size_t>(j)];
    t = std::max(0.0, t - wj);
  }
  return out;
}

FractionalAssignment solve_distribution(const BetaTable& table,
                                        const RankDistribution& dist,
                                        double t_max) {
  dist.validate();
  require(t_max >= 0.0, Errc::invalid_argument, "t_max must be >= 0");
  require(dist.max_rank() <= table.max_r(), Errc::out_of_range,
          "distribution: rank exceeds table columns");
  const double eps = tolerance(t_max);
  const double base = dist.rank_mass();
  if (t_max <= base + eps) return water_fill(dist, t_max);

  const int m = dist.max_rank();
  const auto& w = dist.weights;
  FractionalAssignment out;
  out.budget = t_max;
  out.levels.resize(w.size());
  std::iota(out.levels.begin(), out.levels.end(), 0);
  double left = t_max - base;

  const double upper = std::accumulate(w.begin() + 1, w.end(), 0.0);
  if (upper <= 0.0) {
    // Only rank 0 carries weight; any split is optimal.
    const double levels = left / w[0];
    const double whole = std::floor(levels);
    out.levels[0] += static_cast<int>(whole);
    set_fraction(out, 0, levels - whole);
    return out;
  }

  const BetaTable* tab = &table;
  std::optional<BetaTable> scratch;
  auto beta = [&](int t, int r) {
    if (!tab->covers(t)) {
      if (!scratch) scratch.emplace(table);
      scratch->grow_to(growth_target(*scratch, t));
      tab = &*scratch;
    }
    return (*tab)(t, r);
  };

  while (left > eps) {
    int best = 0;
    double best_key = beta(out.levels[0], 0);
    for (int r = 1; r <= m; ++r) {
      const double key = beta(out.levels[static_cast<std::size_t>(r)], r);
      if (key > best_key) {
        best = r;
        best_key = key;
      }
    }
    const double wb = w[static_cast<std::size_t>(best)];
    if (wb > left + eps) {
      set_fraction(out, best, left / wb);
      break;
    }
    ++out.levels[static_cast<std::size_t>(best)];
    left -= wb;
  }
  return out;
}

double distribution_objective(const BetaTable& table,
                              const RankDistribution& dist,
                              const FractionalAssignment& frac) {
  dist.validate();
  require(frac.levels.size() == dist.weights.size(), Errc::invalid_argument,
          "assignment size differs from distribution size");
  int top = 0;
  for (int l : frac.levels) top = std::max(top, l);
  std::optional<BetaTable> scratch;
  const BetaTable& tab = ensure_rows(table, top, scratch);

  double sum = 0.0;
  for (int r = 0; r <= dist.max_rank(); ++r) {
    const double wr = dist.weights[static_cast<std::size_t>(r)];
    if (wr == 0.0) continue;
    const int l = frac.levels[static_cast<std::size_t>(r)];
    double e = expected_rank_indep(tab, r, l);
    if (r == frac.fractional_rank)
      e += frac.fraction * (1.0 - tab.p()) * tab(l, r);
    sum += wr * e;
  }
  return sum;
}

std::vector<int> materialize_ranks(const RankDistribution& dist) {
  dist.validate();
  std::vector<int> ranks;
  for (int r = 0; r <= dist.max_rank(); ++r) {
    const double w = dist.weights[static_cast<std::size_t>(r)];
    const double n = std::round(w);
    require(std::abs(w - n) <= 1e-9, Errc::invalid_argument,
            "materialize: weights must be integers");
    ranks.insert(ranks.end(), static_cast<std::size_t>(n), r);
  }
  return ranks;
}

std::vector<int> round_fractional(const FractionalAssignment& frac,
                                  const RankDistribution& dist,
                                  std::uint64_t seed, RoundingMode mode) {
  require(frac.levels.size() == dist.weights.size(), Errc::invalid_argument,
          "assignment size differs from distribution size");
  const std::vector<int> ranks = materialize_ranks(dist);
  std::vector<int> counts(ranks.size());
  std::vector<std::size_t> partial;
  for (std::size_t b = 0; b < ranks.size(); ++b) {
    counts[b] = frac.levels[static_cast<std::size_t>(ranks[b])];
    if (ranks[b] == frac.fractional_rank) partial.push_back(b);
  }
  if (mode == RoundingMode::floor || partial.empty()) return counts;

  const double extra = frac.fraction * static_cast<double>(partial.size());
  const double whole = std::round(extra);
  require(std::abs(extra - whole) <= 1e-9, Errc::runtime,
          "rounding: fractional packets do not sum to an integer");

  // Partial Fisher-Yates: the first R slots become a uniform R-subset.
  Xoshiro256 rng(seed);
  const auto pick = static_cast<std::size_t>(whole);
  for (std::size_t i = 0; i < pick; ++i) {
    const std::size_t j = i + rng.below(partial.size() - i);
    std::swap(partial[i], partial[j]);
    ++counts[partial[i]];
  }
  return counts;
}

}  // namespace bar
