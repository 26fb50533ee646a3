#include "bar/solver.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <string>

#include "bar/error.hpp"

namespace bar {

namespace {

// Binary heap over batch indices with keys stored alongside. Only the root
// is ever rewritten, so one sift-down restores the heap. Equal keys are
// ordered by batch index, which makes the lowest index win ties.
template <class Better>
class RootHeap {
 public:
  RootHeap(std::vector<double> keys, Better better)
      : keys_(std::move(keys)), heap_(keys_.size()), better_(better) {
    std::iota(heap_.begin(), heap_.end(), std::size_t{0});
    for (std::size_t i = heap_.size() / 2; i-- > 0;) sift_down(i);
  }

  std::size_t top() const { return heap_.front(); }
  double top_key() const { return keys_[heap_.front()]; }

  void replace_top_key(double key) {
    keys_[heap_.front()] = key;
    sift_down(0);
  }

 private:
  bool before(std::size_t a, std::size_t b) const {
    if (better_(keys_[a], keys_[b])) return true;
    if (better_(keys_[b], keys_[a])) return false;
    return a < b;
  }

  void sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    for (;;) {
      std::size_t best = i;
      const std::size_t l = 2 * i + 1;
      const std::size_t r = l + 1;
      if (l < n && before(heap_[l], heap_[best])) best = l;
      if (r < n && before(heap_[r], heap_[best])) best = r;
      if (best == i) return;
      std::swap(heap_[i], heap_[best]);
      i = best;
    }
  }

  std::vector<double> keys_;
  std::vector<std::size_t> heap_;
  Better better_;
};

template <class Better>
RootHeap<Better> make_heap(std::vector<double> keys, Better better) {
  return RootHeap<Better>(std::move(keys), better);
}

void check_budget(int t_max) {
  require(t_max >= 0, Errc::invalid_argument, "t_max must be >= 0");
}

int rank_sum(const Block& block) {
  return std::accumulate(block.ranks.begin(), block.ranks.end(), 0);
}

double sum_expected(const BetaTable& tab, const Block& block,
                    const std::vector<int>& counts) {
  double sum = 0.0;
  for (std::size_t b = 0; b < counts.size(); ++b)
    sum += expected_rank_indep(tab, block.ranks[b], counts[b]);
  return sum;
}

// Block-order fill t_b = min(r_b, remaining). Returns the leftover budget.
int fill_to_rank(const Block& block, int t_max, std::vector<int>& counts) {
  int t = t_max;
  for (std::size_t b = 0; b < block.ranks.size(); ++b) {
    const int r = block.ranks[b];
    if (r >= t) {
      counts[b] = t;
      return 0;
    }
    counts[b] = r;
    t -= r;
  }
  return t;
}

}  // namespace

void Block::validate(int max_r) const {
  require(!ranks.empty(), Errc::invalid_argument, "block must be nonempty");
  for (int r : ranks)
    if (r < 0 || r > max_r)
      fail(Errc::out_of_range, "block: rank " + std::to_string(r) +
                                   " outside [0, " + std::to_string(max_r) +
                                   "]");
}

SolveReport solve_greedy(const BetaTable& table, const Block& block,
                         int t_max) {
  check_budget(t_max);
  block.validate(table.max_r());
  std::optional<BetaTable> scratch;
  const BetaTable& tab = ensure_rows(table, t_max, scratch);

  SolveReport rep;
  rep.assignment.budget = t_max;
  auto& counts = rep.assignment.counts;
  counts.assign(block.ranks.size(), 0);

  int left = fill_to_rank(block, t_max, counts);
  if (left > 0) {
    std::vector<double> keys(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b)
      keys[b] = tab(counts[b], block.ranks[b]);
    auto heap = make_heap(std::move(keys), std::greater<double>());
    for (; left > 0; --left) {
      const std::size_t b = heap.top();
      ++counts[b];
      heap.replace_top_key(tab(counts[b], block.ranks[b]));
      ++rep.iterations;
    }
  }
  rep.objective = sum_expected(tab, block, counts);
  return rep;
}

Assignment approx_equal_opportunity(const Block& block, int t_max) {
  check_budget(t_max);
  require(!block.ranks.empty(), Errc::invalid_argument,
          "block must be nonempty");
  int max_rank = 0;
  for (int r : block.ranks) {
    require(r >= 0, Errc::out_of_range, "block: negative rank");
    max_rank = std::max(max_rank, r);
  }

  Assignment out;
  out.budget = t_max;
  out.counts.assign(block.ranks.size(), 0);
  const int left = fill_to_rank(block, t_max, out.counts);
  if (left == 0) return out;

  // hist[r] = number of batches of rank r
  std::vector<int> hist(static_cast<std::size_t>(max_rank) + 1, 0);
  for (int r : block.ranks) ++hist[static_cast<std::size_t>(r)];
  const int positive = static_cast<int>(block.ranks.size()) - hist[0];
  if (positive == 0) {
    out.counts[0] += left;
    return out;
  }

  const int share = left / positive;
  int extra = left % positive;

  // Smallest rank that still receives an extra packet, and how many batches
  // of exactly that rank do.
  int threshold = max_rank + 1;
  int at_threshold = 0;
  for (int r = max_rank; r >= 1 && extra > 0; --r) {
    const int c = hist[static_cast<std::size_t>(r)];
    if (c >= extra) {
      threshold = r;
      at_threshold = extra;
      break;
    }
    extra -= c;
  }

  for (std::size_t b = 0; b < block.ranks.size(); ++b) {
    const int r = block.ranks[b];
    if (r == 0) continue;
    out.counts[b] += share;
    if (r > threshold) {
      ++out.counts[b];
    } else if (r == threshold && at_threshold > 0) {
      ++out.counts[b];
      --at_threshold;
    }
  }
  return out;
}

SolveReport solve_via_approx(const BetaTable& table, const Block& block,
                             int t_max) {
  check_budget(t_max);
  block.validate(table.max_r());
  std::optional<BetaTable> scratch;
  const BetaTable& tab = ensure_rows(table, t_max, scratch);

  SolveReport rep;
  rep.assignment = approx_equal_opportunity(block, t_max);
  auto& counts = rep.assignment.counts;

  if (t_max > rank_sum(block)) {
    const std::size_t n = counts.size();
    std::vector<double> up(n), down(n);
    for (std::size_t b = 0; b < n; ++b) {
      up[b] = tab(counts[b], block.ranks[b]);
      down[b] = tab(counts[b] - 1, block.ranks[b]);
    }
    auto gain = make_heap(std::move(up), std::greater<double>());
    auto loss = make_heap(std::move(down), std::less<double>());

    while (loss.top_key() < gain.top_key()) {
      const std::size_t a = loss.top();
      const std::size_t b = gain.top();
      if (a == b) break;
      --counts[a];
      ++counts[b];
      gain.replace_top_key(tab(counts[b], block.ranks[b]));
      loss.replace_top_key(tab(counts[a] - 1, block.ranks[a]));
      ++rep.iterations;
    }
  }
  rep.objective = sum_expected(tab, block, counts);
  return rep;
}

SolveReport brute_force_oracle(const BetaTable& table, const Block& block,
                               int t_max) {
  check_budget(t_max);
  block.validate(table.max_r());
  require(block.ranks.size() <= 4 && t_max <= 16, Errc::invalid_argument,
          "brute force limited to |block| <= 4 and t_max <= 16");
  std::optional<BetaTable> scratch;
  const BetaTable& tab = ensure_rows(table, t_max, scratch);

  const std::size_t n = block.ranks.size();
  // e[b][t] = E(r_b, t)
  std::vector<std::vector<double>> e(n);
  for (std::size_t b = 0; b < n; ++b)
    for (int t = 0; t <= t_max; ++t)
      e[b].push_back(expected_rank_indep(tab, block.ranks[b], t));

  SolveReport rep;
  rep.assignment.budget = t_max;
  rep.objective = -1.0;
  std::vector<int> cur(n, 0);

  auto visit = [&](auto&& self, std::size_t b, int left, double acc) -> void {
    if (b + 1 == n) {
      cur[b] = left;
      const double total = acc + e[b][static_cast<std::size_t>(left)];
      ++rep.iterations;
      if (total > rep.objective) {
        rep.objective = total;
        rep.assignment.counts = cur;
      }
      return;
    }
    for (int t = 0; t <= left; ++t) {
      cur[b] = t;
      self(self, b + 1, left - t, acc + e[b][static_cast<std::size_t>(t)]);
    }
  };
  visit(visit, 0, t_max, 0.0);
  return rep;
}

double objective(const BetaTable& table, const Block& block,
                 const Assignment& assignment) {
  block.validate(table.max_r());
  require(assignment.counts.size() == block.ranks.size(),
          Errc::invalid_argument, "assignment size differs from block size");
  long total = 0;
  int max_count = 0;
  for (int t : assignment.counts) {
    require(t >= 0, Errc::invalid_argument, "assignment has negative count");
    total += t;
    max_count = std::max(max_count, t);
  }
  require(total == assignment.budget, Errc::invalid_argument,
          "assignment does not exhaust its budget");
  std::optional<BetaTable> scratch;
  const BetaTable& tab = ensure_rows(table, max_count, scratch);
  return sum_expected(tab, block, assignment.counts);
}

bool is_certified_optimal(const BetaTable& table, const Block& block,
                          const Assignment& assignment, double tol) {
  block.validate(table.max_r());
  require(assignment.counts.size() == block.ranks.size(),
          Errc::invalid_argument, "assignment size differs from block size");
  int max_count = 0;
  for (int t : assignment.counts) max_count = std::max(max_count, t);
  std::optional<BetaTable> scratch;
  const BetaTable& tab = ensure_rows(table, max_count, scratch);

  double best_gain = 0.0;
  double least_loss = 1.0;
  for (std::size_t b = 0; b < block.ranks.size(); ++b) {
    const int r = block.ranks[b];
    const int t = assignment.counts[b];
    best_gain = std::max(best_gain, tab(t, r));
    least_loss = std::min(least_loss, tab(t - 1, r));
  }
  return best_gain <= least_loss + tol;
}

SolveReport solve_greedy_marginal(const std::vector<std::vector<double>>& e,
                                  const Block& block, int t_max) {
  check_budget(t_max);
  require(!e.empty(), Errc::invalid_argument, "empty expected-rank table");
  block.validate(static_cast<int>(e.size()) - 1);
  for (int r : block.ranks)
    require(e[static_cast<std::size_t>(r)].size() >
                static_cast<std::size_t>(t_max),
            Errc::out_of_range, "expected-rank table too short for t_max");

  auto curve = [&](std::size_t b) -> const std::vector<double>& {
    return e[static_cast<std::size_t>(block.ranks[b])];
  };

  SolveReport rep;
  rep.assignment.budget = t_max;
  auto& counts = rep.assignment.counts;
  const std::size_t n = block.ranks.size();
  counts.assign(n, 0);

  if (t_max > 0) {
    std::vector<double> keys(n);
    for (std::size_t b = 0; b < n; ++b) keys[b] = curve(b)[1] - curve(b)[0];
    auto heap = make_heap(std::move(keys), std::greater<double>());
    for (int left = t_max; left > 0; --left) {
      const std::size_t b = heap.top();
      const auto t = static_cast<std::size_t>(++counts[b]);
      const auto& c = curve(b);
      heap.replace_top_key(t < c.size() - 1 ? c[t + 1] - c[t] : 0.0);
      ++rep.iterations;
    }
  }
  for (std::size_t b = 0; b < n; ++b)
    rep.objective += curve(b)[static_cast<std::size_t>(counts[b])];
  return rep;
}

}  // namespace bar
