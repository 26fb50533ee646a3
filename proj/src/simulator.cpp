#include "bar/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>
#include <type_traits>

#include "bar/error.hpp"
#include "bar/solver.hpp"

namespace bar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags keep the data, feedback and setup draws apart.
enum : std::uint64_t { kTagSetup = 1, kTagData = 2, kTagFeedback = 3 };

double clamp_estimate(double p) { return std::clamp(p, 1e-6, 1.0 - 1e-6); }

// Binom(t, 1 - p) pmf by repeated convolution.
std::vector<double> received_pmf(int t, double p) {
  std::vector<double> pmf{1.0};
  for (int i = 0; i < t; ++i) {
    std::vector<double> next(pmf.size() + 1, 0.0);
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      next[k] += pmf[k] * p;
      next[k + 1] += pmf[k] * (1.0 - p);
    }
    pmf = std::move(next);
  }
  return pmf;
}

// One beta table, rebuilt only when the loss rate changes.
class TableCache {
 public:
  TableCache(int max_t, int max_r) : max_t_(max_t), max_r_(max_r) {}

  const BetaTable& get(double p) {
    if (!table_ || table_->p() != p) table_.emplace(p, max_t_, max_r_);
    return *table_;
  }

 private:
  int max_t_;
  int max_r_;
  std::optional<BetaTable> table_;
};

std::vector<int> baseline_counts(std::size_t n, int budget) {
  const int each = budget / static_cast<int>(n);
  int extra = budget % static_cast<int>(n);
  std::vector<int> counts(n, each);
  for (std::size_t b = 0; extra > 0; ++b, --extra) ++counts[b];
  return counts;
}

// Per-node decision state for one trial.
struct NodeState {
  TableCache tables;
  std::optional<LossRateEstimator> estimator;
  std::vector<std::vector<double>> ge_curves;  // stationary E-GE, cached

  NodeState(int max_t, int max_r) : tables(max_t, max_r) {}
};

struct Decision {
  std::vector<int> counts;
  double p_used = kNaN;
};

Decision decide(const SimConfig& cfg, const Policy& policy, NodeState& node,
                const ChannelModel& channel, const ChannelState& link,
                const Block& block) {
  const int budget = cfg.budget();
  auto greedy = [&](double p) {
    const double pc = clamp_estimate(p);
    Decision d;
    d.counts =
        solve_greedy(node.tables.get(pc), block, budget).assignment.counts;
    d.p_used = pc;
    return d;
  };

  return std::visit(
      [&](const auto& pol) -> Decision {
        using P = std::decay_t<decltype(pol)>;
        if constexpr (std::is_same_v<P, BaselinePolicy>) {
          return {baseline_counts(block.ranks.size(), budget), kNaN};
        } else if constexpr (std::is_same_v<P, BarKnownP>) {
          return greedy(loss_rate_at(channel, link.batch_counter));
        } else if constexpr (std::is_same_v<P, BarGuessedP>) {
          return greedy(pol.p);
        } else if constexpr (std::is_same_v<P, BarGE>) {
          const auto& ge = std::get<GilbertElliottChannel>(channel).ge;
          Decision d;
          if (pol.initial == GEInitialLaw::stationary) {
            if (node.ge_curves.empty())
              node.ge_curves = expected_rank_ge_table(
                  ge, stationary_distribution(ge), cfg.M, budget);
            d.counts =
                solve_greedy_marginal(node.ge_curves, block, budget)
                    .assignment.counts;
          } else {
            const StateDistribution now =
                link.ge_state == GEState::good ? StateDistribution{1.0, 0.0}
                                               : StateDistribution{0.0, 1.0};
            d.counts = solve_greedy_marginal(
                           expected_rank_ge_table(ge, now, cfg.M, budget),
                           block, budget)
                           .assignment.counts;
          }
          d.p_used = stationary_loss_rate(ge);
          return d;
        } else if constexpr (std::is_same_v<P, BarApprox>) {
          return {approx_equal_opportunity(block, budget).counts, kNaN};
        } else {
          const auto p = node.estimator->estimate();
          if (!p) return {approx_equal_opportunity(block, budget).counts, kNaN};
          return greedy(*p);
        }
      },
      policy);
}

double mean_of(const std::vector<int>& v) {
  return static_cast<double>(std::accumulate(v.begin(), v.end(), 0L)) /
         static_cast<double>(v.size());
}

}  // namespace

void SimConfig::validate() const {
  require(hops >= 1, Errc::config, "hops must be >= 1");
  require(M >= 1, Errc::config, "M must be >= 1");
  require(block_size >= 1, Errc::config, "block_size must be >= 1");
  require(t_max >= 0, Errc::config, "t_max must be >= 0");
  require(num_blocks >= 1, Errc::config, "num_blocks must be >= 1");
  require(trials >= 1, Errc::config, "trials must be >= 1");
  require(threads >= 1, Errc::config, "threads must be >= 1");
  require(channels.size() == 1 ||
              channels.size() == static_cast<std::size_t>(hops),
          Errc::config, "channels: give one model or one per link");
  for (const auto& ch : channels) bar::validate(ch);

  if (const auto* g = std::get_if<BarGuessedP>(&policy))
    require(g->p > 0.0 && g->p < 1.0, Errc::config,
            "guessed p must lie in (0, 1)");
  if (std::holds_alternative<BarGE>(policy))
    for (const auto& ch : channels)
      require(std::holds_alternative<GilbertElliottChannel>(ch), Errc::config,
              "GE policy requires Gilbert-Elliott links");
  if (const auto* f = std::get_if<BarFeedback>(&policy)) {
    require(f->window >= 1, Errc::config, "feedback window must be >= 1");
    if (f->gamma)
      require(*f->gamma >= 0.0 && *f->gamma <= 1.0, Errc::config,
              "gamma must lie in [0, 1]");
  }
}

const ChannelModel& SimConfig::channel(int link) const {
  return channels.size() == 1 ? channels.front()
                              : channels[static_cast<std::size_t>(link - 1)];
}

std::vector<ThroughputRecord> run_line_network(const SimConfig& cfg,
                                               std::uint64_t seed, int trial) {
  cfg.validate();
  const int L = cfg.block_size;
  const int budget = cfg.budget();
  const auto tr = static_cast<std::uint64_t>(trial);

  std::vector<ChannelState> links(static_cast<std::size_t>(cfg.hops) + 1);
  for (int l = 1; l <= cfg.hops; ++l) {
    auto rng = Xoshiro256::stream(
        seed, {kTagSetup, tr, static_cast<std::uint64_t>(l)});
    links[static_cast<std::size_t>(l)] = initial_state(cfg.channel(l), rng);
  }
  std::vector<NodeState> nodes;
  nodes.reserve(static_cast<std::size_t>(cfg.hops));
  for (int k = 0; k < cfg.hops; ++k) {
    nodes.emplace_back(budget, cfg.M);
    if (const auto* f = std::get_if<BarFeedback>(&cfg.policy))
      nodes.back().estimator.emplace(f->estimator, f->window, f->gamma);
  }
  const auto* feedback = std::get_if<BarFeedback>(&cfg.policy);

  std::vector<ThroughputRecord> out;
  out.reserve(static_cast<std::size_t>(cfg.num_blocks) *
              static_cast<std::size_t>(cfg.hops));
  Block block;
  std::vector<int> received(static_cast<std::size_t>(L));

  for (int blk = 0; blk < cfg.num_blocks; ++blk) {
    block.ranks.assign(static_cast<std::size_t>(L), cfg.M);
    block.block_id = static_cast<std::uint64_t>(blk);

    for (int l = 1; l <= cfg.hops; ++l) {
      const ChannelModel& ch = cfg.channel(l);
      ChannelState& link = links[static_cast<std::size_t>(l)];
      NodeState& node = nodes[static_cast<std::size_t>(l - 1)];

      Decision d;
      if (l == 1) {
        d.counts.assign(static_cast<std::size_t>(L), cfg.M);
      } else {
        d = decide(cfg, cfg.policy, node, ch, link, block);
      }

      long sent = 0;
      long got = 0;
      for (int b = 0; b < L; ++b) {
        const auto bi = static_cast<std::size_t>(b);
        auto rng = Xoshiro256::stream(
            seed, {kTagData, tr, static_cast<std::uint64_t>(l),
                   static_cast<std::uint64_t>(blk),
                   static_cast<std::uint64_t>(b)});
        const int x = transmit(ch, link, d.counts[bi], rng);
        sent += d.counts[bi];
        got += x;
        received[bi] = std::min(x, block.ranks[bi]);
      }

      if (feedback && l > 1) {
        bool lost = false;
        if (feedback->lossy) {
          auto rng = Xoshiro256::stream(
              seed, {kTagFeedback, tr, static_cast<std::uint64_t>(l),
                     static_cast<std::uint64_t>(blk)});
          lost = rng.bernoulli(current_loss_probability(ch, link));
        }
        node.estimator->observe(
            lost ? std::nullopt
                 : std::optional<BlockFeedback>(BlockFeedback{sent, got}));
      }

      block.ranks = received;
      ThroughputRecord rec;
      rec.trial = trial;
      rec.node = l;
      rec.block = blk;
      rec.ranks = block.ranks;
      rec.mean_rank = mean_of(block.ranks);
      rec.normalized_throughput = rec.mean_rank / cfg.M;
      rec.p_used = d.p_used;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<ThroughputRecord> simulate(const SimConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<ThroughputRecord>> per_trial(
      static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (int t; (t = next.fetch_add(1)) < cfg.trials;) {
      if (failed) return;
      try {
        per_trial[static_cast<std::size_t>(t)] =
            run_line_network(cfg, cfg.seed, t);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  const int n = std::min(cfg.threads, cfg.trials);
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  std::vector<ThroughputRecord> out;
  for (auto& v : per_trial) {
    out.insert(out.end(), std::make_move_iterator(v.begin()),
               std::make_move_iterator(v.end()));
  }
  return out;
}

std::vector<NodeStats> summarize(const std::vector<ThroughputRecord>& records,
                                 int hops) {
  require(hops >= 1, Errc::invalid_argument, "hops must be >= 1");
  std::vector<double> sum(static_cast<std::size_t>(hops) + 1, 0.0);
  std::vector<double> sq(sum.size(), 0.0);
  std::vector<long> count(sum.size(), 0);
  for (const auto& r : records) {
    require(r.node >= 1 && r.node <= hops, Errc::out_of_range,
            "record node outside [1, hops]");
    const auto k = static_cast<std::size_t>(r.node);
    sum[k] += r.normalized_throughput;
    sq[k] += r.normalized_throughput * r.normalized_throughput;
    ++count[k];
  }
  std::vector<NodeStats> out;
  for (int k = 1; k <= hops; ++k) {
    const auto i = static_cast<std::size_t>(k);
    NodeStats s;
    s.node = k;
    s.blocks = count[i];
    if (count[i] > 0) {
      const double n = static_cast<double>(count[i]);
      s.mean = sum[i] / n;
      if (count[i] > 1) {
        const double var = std::max(0.0, (sq[i] - n * s.mean * s.mean) / (n - 1));
        s.std_error = std::sqrt(var / n);
      }
    }
    out.push_back(s);
  }
  return out;
}

double normalized_throughput(const std::vector<ThroughputRecord>& records,
                             int M) {
  require(!records.empty(), Errc::invalid_argument, "no records");
  require(M >= 1, Errc::invalid_argument, "M must be >= 1");
  long total = 0;
  long batches = 0;
  for (const auto& r : records) {
    total += std::accumulate(r.ranks.begin(), r.ranks.end(), 0L);
    batches += static_cast<long>(r.ranks.size());
  }
  require(batches > 0, Errc::invalid_argument, "records hold no batches");
  return static_cast<double>(total) /
         (static_cast<double>(batches) * static_cast<double>(M));
}

// ---------------------------------------------------------------------------

RankDistribution evolve_rank_distribution(const RankDistribution& dist,
                                          EvolvePolicy policy, double p,
                                          int M) {
  const BetaTable table(p, 2 * M, M);
  return evolve_rank_distribution(dist, policy, table, M);
}

RankDistribution evolve_rank_distribution(const RankDistribution& dist,
                                          EvolvePolicy policy,
                                          const BetaTable& table, int M) {
  dist.validate();
  require(dist.max_rank() == M, Errc::invalid_argument,
          "evolve: distribution must cover ranks 0..M");
  require(std::abs(dist.mass() - 1.0) <= 1e-9, Errc::invalid_argument,
          "evolve: distribution must have mass 1");

  FractionalAssignment frac;
  if (policy == EvolvePolicy::baseline) {
    frac.levels.assign(static_cast<std::size_t>(M) + 1, M);
    frac.budget = M;
  } else {
    frac = solve_distribution(table, dist, static_cast<double>(M));
  }

  const double p = table.p();
  RankDistribution out;
  out.weights.assign(static_cast<std::size_t>(M) + 1, 0.0);
  auto spread = [&](int r, int t, double mass) {
    if (mass == 0.0) return;
    const std::vector<double> pmf = received_pmf(t, p);
    for (int i = 0; i <= t; ++i)
      out.weights[static_cast<std::size_t>(std::min(i, r))] +=
          mass * pmf[static_cast<std::size_t>(i)];
  };
  for (int r = 0; r <= M; ++r) {
    const double h = dist.weights[static_cast<std::size_t>(r)];
    const int l = frac.levels[static_cast<std::size_t>(r)];
    if (r == frac.fractional_rank) {
      spread(r, l, h * (1.0 - frac.fraction));
      spread(r, l + 1, h * frac.fraction);
    } else {
      spread(r, l, h);
    }
  }
  return out;
}

std::vector<RankDistribution> evolve_line(int M, double p, int hops,
                                          EvolvePolicy policy) {
  require(M >= 1 && hops >= 0, Errc::invalid_argument,
          "evolve: need M >= 1 and hops >= 0");
  const BetaTable table(p, 4 * M, M);
  std::vector<RankDistribution> out;
  RankDistribution cur;
  cur.weights.assign(static_cast<std::size_t>(M) + 1, 0.0);
  cur.weights.back() = 1.0;
  out.push_back(cur);
  for (int h = 1; h <= hops; ++h) {
    // The source holds full-rank batches and always sends M each.
    cur = evolve_rank_distribution(
        cur, h == 1 ? EvolvePolicy::baseline : policy, table, M);
    out.push_back(cur);
  }
  return out;
}

double normalized_throughput(const RankDistribution& dist) {
  dist.validate();
  require(dist.max_rank() >= 1, Errc::invalid_argument,
          "distribution needs M >= 1");
  return dist.rank_mass() / dist.max_rank();
}

// ---------------------------------------------------------------------------

EstimateTrace estimate_trace(const ChannelModel& channel, EstimatorKind kind,
                             int window, std::optional<double> gamma,
                             bool lossy, int M, int L, int blocks,
                             std::uint64_t seed) {
  validate(channel);
  require(M >= 1 && L >= 1 && blocks >= 0, Errc::invalid_argument,
          "estimate trace: need M, L >= 1 and blocks >= 0");
  LossRateEstimator est(kind, window, gamma);
  auto setup = Xoshiro256::stream(seed, {kTagSetup});
  ChannelState state = initial_state(channel, setup);

  EstimateTrace out;
  out.truth.reserve(static_cast<std::size_t>(blocks));
  out.estimate.reserve(static_cast<std::size_t>(blocks));
  for (int blk = 0; blk < blocks; ++blk) {
    out.estimate.push_back(est.estimate().value_or(kNaN));
    double truth = 0.0;
    long got = 0;
    for (int b = 0; b < L; ++b) {
      truth += loss_rate_at(channel, state.batch_counter);
      auto rng = Xoshiro256::stream(
          seed, {kTagData, static_cast<std::uint64_t>(blk),
                 static_cast<std::uint64_t>(b)});
      got += transmit(channel, state, M, rng);
    }
    out.truth.push_back(truth / L);
    bool lost = false;
    if (lossy) {
      auto rng = Xoshiro256::stream(
          seed, {kTagFeedback, static_cast<std::uint64_t>(blk)});
      lost = rng.bernoulli(current_loss_probability(channel, state));
    }
    est.observe(lost ? std::nullopt
                     : std::optional<BlockFeedback>(
                           BlockFeedback{static_cast<long>(M) * L, got}));
  }
  return out;
}

}  // namespace bar
