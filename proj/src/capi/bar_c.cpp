#include "bar/bar.h"

#include <cmath>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "bar/channel.hpp"
#include "bar/dist_solver.hpp"
#include "bar/error.hpp"
#include "bar/feedback.hpp"
#include "bar/rank_math.hpp"
#include "bar/simulator.hpp"
#include "bar/solver.hpp"

struct bar_beta_table {
  bar::BetaTable table;
};

struct bar_estimator {
  bar::LossRateEstimator est;
};

struct bar_sim_result {
  std::vector<bar::ThroughputRecord> records;
  std::vector<bar::NodeStats> stats;
};

namespace {

thread_local std::string g_last_error;

bar_status to_status(bar::Errc code) {
  switch (code) {
    case bar::Errc::invalid_argument:
      return BAR_ERR_INVALID_ARGUMENT;
    case bar::Errc::out_of_range:
      return BAR_ERR_OUT_OF_RANGE;
    case bar::Errc::config:
      return BAR_ERR_CONFIG;
    case bar::Errc::runtime:
      return BAR_ERR_RUNTIME;
  }
  return BAR_ERR_RUNTIME;
}

bar_status set_error(bar_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <class F>
bar_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return BAR_OK;
  } catch (const bar::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(BAR_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return set_error(BAR_ERR_RUNTIME, e.what());
  } catch (...) {
    return set_error(BAR_ERR_RUNTIME, "unknown error");
  }
}

#define BAR_REQUIRE_PTR(ptr)                                               \
  do {                                                                     \
    if ((ptr) == nullptr)                                                  \
      return set_error(BAR_ERR_NULL_POINTER, #ptr " must not be NULL");    \
  } while (0)

bar::GEParams to_ge(const bar_ge_params& g) {
  return bar::GEParams{g.p_gb, g.p_bg, g.p_g, g.p_b};
}

bar::ChannelModel to_channel(const bar_channel& c) {
  switch (c.kind) {
    case BAR_CHANNEL_IID:
      return bar::IidChannel{c.p};
    case BAR_CHANNEL_GE:
      return bar::GilbertElliottChannel{to_ge(c.ge)};
    case BAR_CHANNEL_SINUSOID:
      return bar::SinusoidalChannel{c.base, c.amplitude, c.period};
  }
  bar::fail(bar::Errc::config, "unknown channel kind");
}

bar::EstimatorKind to_kind(bar_estimator_kind k) {
  switch (k) {
    case BAR_EST_MLE:
      return bar::EstimatorKind::mle;
    case BAR_EST_MINIMAX:
      return bar::EstimatorKind::minimax;
    case BAR_EST_BAYES:
      return bar::EstimatorKind::bayes;
  }
  bar::fail(bar::Errc::config, "unknown estimator kind");
}

std::optional<double> to_gamma(double gamma) {
  if (gamma < 0.0) return std::nullopt;
  return gamma;
}

bar::Policy to_policy(const bar_sim_config& c) {
  switch (c.policy) {
    case BAR_POLICY_BASELINE:
      return bar::BaselinePolicy{};
    case BAR_POLICY_KNOWN_P:
      return bar::BarKnownP{};
    case BAR_POLICY_GUESSED_P:
      return bar::BarGuessedP{c.guessed_p};
    case BAR_POLICY_GE:
      return bar::BarGE{c.ge_current_state ? bar::GEInitialLaw::current_state
                                            : bar::GEInitialLaw::stationary};
    case BAR_POLICY_APPROX:
      return bar::BarApprox{};
    case BAR_POLICY_FEEDBACK:
      return bar::BarFeedback{to_kind(c.estimator), c.window,
                              c.feedback_lossy != 0, to_gamma(c.gamma)};
  }
  bar::fail(bar::Errc::config, "unknown policy kind");
}

bar::RankDistribution to_dist(const double* weights, size_t m1) {
  bar::require(m1 >= 1, bar::Errc::invalid_argument,
               "distribution needs at least one rank");
  return bar::RankDistribution{std::vector<double>(weights, weights + m1)};
}

// Rebuilds a FractionalAssignment from per-rank real counts.
bar::FractionalAssignment to_fractional(const double* t, size_t m1,
                                        const bar::RankDistribution& dist) {
  bar::FractionalAssignment frac;
  frac.levels.resize(m1);
  for (size_t r = 0; r < m1; ++r) {
    bar::require(std::isfinite(t[r]) && t[r] >= 0.0,
                 bar::Errc::invalid_argument, "t must be finite and >= 0");
    const double lvl = std::floor(t[r] + 1e-12);
    frac.levels[r] = static_cast<int>(lvl);
    const double f = t[r] - lvl;
    if (f > 1e-12) {
      bar::require(frac.fractional_rank < 0, bar::Errc::invalid_argument,
                   "at most one rank may carry a fractional count");
      frac.fractional_rank = static_cast<int>(r);
      frac.fraction = f;
    }
    frac.budget += dist.weights[r] * t[r];
  }
  return frac;
}

void write_values(const bar::FractionalAssignment& frac, double* t_out) {
  const auto v = frac.values();
  for (size_t r = 0; r < v.size(); ++r) t_out[r] = v[r];
}

}  // namespace

extern "C" {

const char* bar_last_error(void) { return g_last_error.c_str(); }

const char* bar_status_string(bar_status status) {
  switch (status) {
    case BAR_OK:
      return "ok";
    case BAR_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case BAR_ERR_OUT_OF_RANGE:
      return "out of range";
    case BAR_ERR_CONFIG:
      return "configuration error";
    case BAR_ERR_RUNTIME:
      return "runtime error";
    case BAR_ERR_NULL_POINTER:
      return "null pointer";
    case BAR_ERR_BUFFER_TOO_SMALL:
      return "buffer too small";
  }
  return "unknown status";
}

bar_status bar_beta_table_create(double p, int max_t, int max_r,
                                 bar_beta_table** out) {
  BAR_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    *out = new bar_beta_table{bar::build_beta_table(p, max_t, max_r)};
  });
}

void bar_beta_table_destroy(bar_beta_table* table) { delete table; }

bar_status bar_beta_table_extend(bar_beta_table* table, int new_max_t) {
  BAR_REQUIRE_PTR(table);
  return guarded([&] {
    bar::require(new_max_t >= table->table.max_t(),
                 bar::Errc::invalid_argument,
                 "extend: new_max_t smaller than current table");
    table->table.grow_to(new_max_t);
  });
}

bar_status bar_beta_table_dims(const bar_beta_table* table, double* p,
                               int* max_t, int* max_r) {
  BAR_REQUIRE_PTR(table);
  if (p) *p = table->table.p();
  if (max_t) *max_t = table->table.max_t();
  if (max_r) *max_r = table->table.max_r();
  g_last_error.clear();
  return BAR_OK;
}

bar_status bar_beta_value(const bar_beta_table* table, int t, int r,
                          double* out) {
  BAR_REQUIRE_PTR(table);
  BAR_REQUIRE_PTR(out);
  return guarded([&] { *out = table->table(t, r); });
}

bar_status bar_expected_rank_indep(const bar_beta_table* table, int r, int t,
                                   double* out) {
  BAR_REQUIRE_PTR(table);
  BAR_REQUIRE_PTR(out);
  return guarded([&] { *out = bar::expected_rank_indep(table->table, r, t); });
}

bar_status bar_expected_rank_exact_zeta(int r, int t, double p, uint64_t q,
                                        double* out) {
  BAR_REQUIRE_PTR(out);
  return guarded([&] { *out = bar::expected_rank_exact_zeta(r, t, p, q); });
}

bar_status bar_expected_rank_ge(const bar_ge_params* ge, double initial_g,
                                int r, int t, double* out) {
  BAR_REQUIRE_PTR(ge);
  BAR_REQUIRE_PTR(out);
  return guarded([&] {
    const bar::GEParams g = to_ge(*ge);
    const bar::StateDistribution init =
        initial_g < 0.0 ? bar::stationary_distribution(g)
                        : bar::StateDistribution{initial_g, 1.0 - initial_g};
    *out = bar::expected_rank_ge(g, init, r, t);
  });
}

bar_status bar_ge_stationary_loss_rate(const bar_ge_params* ge, double* out) {
  BAR_REQUIRE_PTR(ge);
  BAR_REQUIRE_PTR(out);
  return guarded([&] { *out = bar::stationary_loss_rate(to_ge(*ge)); });
}

bar_status bar_condition_number(double p, int t, int r,
                                bar_condition_form form, double* out) {
  BAR_REQUIRE_PTR(out);
  return guarded([&] {
    *out = form == BAR_COND_ALTERNATING_SUM
               ? bar::condition_number_alternating(p, t, r)
               : bar::condition_number(p, t, r);
  });
}

bar_status bar_solve(const bar_beta_table* table, bar_algo algo,
                     const int* ranks, size_t n, int t_max, int* counts_out,
                     double* objective_out, long* iterations_out) {
  BAR_REQUIRE_PTR(ranks);
  BAR_REQUIRE_PTR(counts_out);
  if (algo != BAR_ALGO_APPROX) BAR_REQUIRE_PTR(table);
  return guarded([&] {
    bar::Block block{std::vector<int>(ranks, ranks + n), 0};
    bar::SolveReport rep;
    switch (algo) {
      case BAR_ALGO_GREEDY:
        rep = bar::solve_greedy(table->table, block, t_max);
        break;
      case BAR_ALGO_VIA_APPROX:
        rep = bar::solve_via_approx(table->table, block, t_max);
        break;
      case BAR_ALGO_BRUTE:
        rep = bar::brute_force_oracle(table->table, block, t_max);
        break;
      case BAR_ALGO_APPROX:
        rep.assignment = bar::approx_equal_opportunity(block, t_max);
        if (table)
          rep.objective = bar::objective(table->table, block, rep.assignment);
        break;
      default:
        bar::fail(bar::Errc::invalid_argument, "unknown algorithm");
    }
    for (size_t b = 0; b < n; ++b) counts_out[b] = rep.assignment.counts[b];
    if (objective_out && (algo != BAR_ALGO_APPROX || table))
      *objective_out = rep.objective;
    if (iterations_out) *iterations_out = rep.iterations;
  });
}

bar_status bar_is_certified_optimal(const bar_beta_table* table,
                                    const int* ranks, const int* counts,
                                    size_t n, int* certified_out) {
  BAR_REQUIRE_PTR(table);
  BAR_REQUIRE_PTR(ranks);
  BAR_REQUIRE_PTR(counts);
  BAR_REQUIRE_PTR(certified_out);
  return guarded([&] {
    bar::Block block{std::vector<int>(ranks, ranks + n), 0};
    bar::Assignment a{std::vector<int>(counts, counts + n), 0};
    *certified_out =
        bar::is_certified_optimal(table->table, block, a) ? 1 : 0;
  });
}

bar_status bar_water_fill(const double* weights, size_t m1, double t_max,
                          double* t_out) {
  BAR_REQUIRE_PTR(weights);
  BAR_REQUIRE_PTR(t_out);
  return guarded([&] {
    write_values(bar::water_fill(to_dist(weights, m1), t_max), t_out);
  });
}

bar_status bar_solve_distribution(const bar_beta_table* table,
                                  const double* weights, size_t m1,
                                  double t_max, double* t_out,
                                  double* objective_out) {
  BAR_REQUIRE_PTR(table);
  BAR_REQUIRE_PTR(weights);
  BAR_REQUIRE_PTR(t_out);
  return guarded([&] {
    const auto dist = to_dist(weights, m1);
    const auto frac = bar::solve_distribution(table->table, dist, t_max);
    write_values(frac, t_out);
    if (objective_out)
      *objective_out = bar::distribution_objective(table->table, dist, frac);
  });
}

bar_status bar_round_fractional(const double* weights, size_t m1,
                                const double* t, bar_rounding mode,
                                uint64_t seed, int* counts_out,
                                size_t counts_len, size_t* batches_out) {
  BAR_REQUIRE_PTR(weights);
  BAR_REQUIRE_PTR(t);
  BAR_REQUIRE_PTR(batches_out);
  bar_status st = guarded([&] {
    const auto dist = to_dist(weights, m1);
    const auto frac = to_fractional(t, m1, dist);
    const auto counts = bar::round_fractional(
        frac, dist, seed,
        mode == BAR_ROUND_FLOOR ? bar::RoundingMode::floor
                                : bar::RoundingMode::randomized);
    *batches_out = counts.size();
    if (counts_out == nullptr || counts_len < counts.size()) return;
    for (size_t b = 0; b < counts.size(); ++b) counts_out[b] = counts[b];
  });
  if (st == BAR_OK && (counts_out == nullptr || counts_len < *batches_out))
    return set_error(BAR_ERR_BUFFER_TOO_SMALL, "counts buffer too small");
  return st;
}

bar_status bar_estimator_create(bar_estimator_kind kind, int window,
                                double gamma, bar_estimator** out) {
  BAR_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    *out = new bar_estimator{
        bar::LossRateEstimator(to_kind(kind), window, to_gamma(gamma))};
  });
}

void bar_estimator_destroy(bar_estimator* est) { delete est; }

bar_status bar_estimator_observe(bar_estimator* est, long n, long x,
                                 int received) {
  BAR_REQUIRE_PTR(est);
  return guarded([&] {
    if (received)
      est->est.observe(bar::BlockFeedback{n, x});
    else
      est->est.observe(std::nullopt);
  });
}

bar_status bar_estimator_estimate(const bar_estimator* est, double* p_out,
                                  int* has_out) {
  BAR_REQUIRE_PTR(est);
  BAR_REQUIRE_PTR(p_out);
  BAR_REQUIRE_PTR(has_out);
  const auto p = est->est.estimate();
  *has_out = p ? 1 : 0;
  *p_out = p.value_or(std::nan(""));
  g_last_error.clear();
  return BAR_OK;
}

bar_status bar_channel_preset(int index, bar_channel* out) {
  BAR_REQUIRE_PTR(out);
  *out = bar_channel{};
  switch (index) {
    case 1:
      out->kind = BAR_CHANNEL_IID;
      out->p = 0.45;
      break;
    case 2:
      out->kind = BAR_CHANNEL_GE;
      out->ge = bar_ge_params{0.1, 0.1, 0.1, 0.8};
      break;
    case 3:
      out->kind = BAR_CHANNEL_SINUSOID;
      out->base = 0.45;
      out->amplitude = 0.3;
      out->period = 1280.0;
      break;
    default:
      return set_error(BAR_ERR_INVALID_ARGUMENT, "channel preset must be 1-3");
  }
  g_last_error.clear();
  return BAR_OK;
}

void bar_sim_config_default(bar_sim_config* cfg) {
  if (cfg == nullptr) return;
  *cfg = bar_sim_config{};
  cfg->hops = 1;
  cfg->M = 4;
  cfg->block_size = 1;
  cfg->t_max = 0;
  cfg->num_blocks = 1;
  cfg->trials = 1;
  cfg->threads = 1;
  cfg->channel.kind = BAR_CHANNEL_IID;
  cfg->channel.p = 0.2;
  cfg->channel.base = 0.45;
  cfg->channel.amplitude = 0.3;
  cfg->channel.period = 1280.0;
  cfg->policy = BAR_POLICY_BASELINE;
  cfg->guessed_p = 0.45;
  cfg->estimator = BAR_EST_MLE;
  cfg->window = 16;
  cfg->gamma = -1.0;
}

bar_status bar_simulate(const bar_sim_config* cfg, bar_sim_result** out) {
  BAR_REQUIRE_PTR(cfg);
  BAR_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    bar::SimConfig sc;
    sc.hops = cfg->hops;
    sc.M = cfg->M;
    sc.block_size = cfg->block_size;
    sc.t_max = cfg->t_max;
    sc.num_blocks = cfg->num_blocks;
    sc.trials = cfg->trials;
    sc.threads = cfg->threads;
    sc.channels = {to_channel(cfg->channel)};
    sc.policy = to_policy(*cfg);
    sc.seed = cfg->seed;
    auto res = std::make_unique<bar_sim_result>();
    res->records = bar::simulate(sc);
    res->stats = bar::summarize(res->records, sc.hops);
    *out = res.release();
  });
}

void bar_sim_result_destroy(bar_sim_result* res) { delete res; }

size_t bar_sim_result_size(const bar_sim_result* res) {
  return res ? res->records.size() : 0;
}

bar_status bar_sim_result_record(const bar_sim_result* res, size_t i,
                                 bar_sim_record* out) {
  BAR_REQUIRE_PTR(res);
  BAR_REQUIRE_PTR(out);
  if (i >= res->records.size())
    return set_error(BAR_ERR_OUT_OF_RANGE, "record index out of range");
  const auto& r = res->records[i];
  *out = bar_sim_record{r.trial, r.node, r.block, r.mean_rank,
                        r.normalized_throughput, r.p_used};
  g_last_error.clear();
  return BAR_OK;
}

bar_status bar_sim_result_node_stats(const bar_sim_result* res, int node,
                                     bar_node_stats* out) {
  BAR_REQUIRE_PTR(res);
  BAR_REQUIRE_PTR(out);
  if (node < 1 || static_cast<size_t>(node) > res->stats.size())
    return set_error(BAR_ERR_OUT_OF_RANGE, "node outside [1, hops]");
  const auto& s = res->stats[static_cast<size_t>(node - 1)];
  *out = bar_node_stats{s.node, s.blocks, s.mean, s.std_error};
  g_last_error.clear();
  return BAR_OK;
}

bar_status bar_evolve_step(const double* dist, size_t m1,
                           bar_evolve_policy policy, double p,
                           double* dist_out) {
  BAR_REQUIRE_PTR(dist);
  BAR_REQUIRE_PTR(dist_out);
  return guarded([&] {
    bar::require(m1 >= 2, bar::Errc::invalid_argument,
                 "evolve: need M >= 1");
    const auto next = bar::evolve_rank_distribution(
        to_dist(dist, m1),
        policy == BAR_EVOLVE_BAR ? bar::EvolvePolicy::bar
                                 : bar::EvolvePolicy::baseline,
        p, static_cast<int>(m1) - 1);
    for (size_t r = 0; r < m1; ++r) dist_out[r] = next.weights[r];
  });
}

bar_status bar_evolve_line(int M, double p, int hops,
                           bar_evolve_policy policy, double* masses_out,
                           double* throughput_out) {
  return guarded([&] {
    const auto line = bar::evolve_line(
        M, p, hops,
        policy == BAR_EVOLVE_BAR ? bar::EvolvePolicy::bar
                                 : bar::EvolvePolicy::baseline);
    const auto width = static_cast<size_t>(M) + 1;
    for (size_t h = 0; h < line.size(); ++h) {
      if (masses_out)
        for (size_t r = 0; r < width; ++r)
          masses_out[h * width + r] = line[h].weights[r];
      if (throughput_out) throughput_out[h] = bar::normalized_throughput(line[h]);
    }
  });
}

bar_status bar_normalized_throughput(const double* dist, size_t m1,
                                     double* out) {
  BAR_REQUIRE_PTR(dist);
  BAR_REQUIRE_PTR(out);
  return guarded(
      [&] { *out = bar::normalized_throughput(to_dist(dist, m1)); });
}

bar_status bar_estimate_trace(const bar_channel* channel,
                              bar_estimator_kind kind, int window,
                              double gamma, int lossy, int M, int L,
                              int blocks, uint64_t seed, double* truth_out,
                              double* estimate_out) {
  BAR_REQUIRE_PTR(channel);
  return guarded([&] {
    const auto trace =
        bar::estimate_trace(to_channel(*channel), to_kind(kind), window,
                            to_gamma(gamma), lossy != 0, M, L, blocks, seed);
    for (size_t k = 0; k < trace.truth.size(); ++k) {
      if (truth_out) truth_out[k] = trace.truth[k];
      if (estimate_out) estimate_out[k] = trace.estimate[k];
    }
  });
}

}  // extern "C"
