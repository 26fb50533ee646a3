#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "bar/bar.h"
#include "oracles.hpp"

TEST_SUITE("capi") {

TEST_CASE("beta table handle") {
  bar_beta_table* t = nullptr;
  REQUIRE(bar_beta_table_create(0.1, 7, 4, &t) == BAR_OK);
  CHECK(std::string(bar_last_error()).empty());
  double v = 0.0;
  CHECK(bar_beta_value(t, 2, 2, &v) == BAR_OK);
  CHECK(v == doctest::Approx(0.19));
  CHECK(bar_beta_value(t, 9, 2, &v) == BAR_ERR_OUT_OF_RANGE);
  CHECK_FALSE(std::string(bar_last_error()).empty());
  CHECK(bar_beta_table_extend(t, 20) == BAR_OK);
  double p = 0.0;
  int mt = 0, mr = 0;
  CHECK(bar_beta_table_dims(t, &p, &mt, &mr) == BAR_OK);
  CHECK(p == 0.1);
  CHECK(mt == 20);
  CHECK(mr == 4);
  CHECK(bar_beta_value(t, 15, 3, &v) == BAR_OK);
  CHECK(v == doctest::Approx(oracle::beta(0.1, 15, 3)).epsilon(1e-12));
  CHECK(bar_expected_rank_indep(t, 2, 3, &v) == BAR_OK);
  CHECK(v == doctest::Approx(oracle::expected_rank(0.1, 2, 3)));
  bar_beta_table_destroy(t);
  bar_beta_table_destroy(nullptr);

  CHECK(bar_beta_table_create(1.5, 3, 2, &t) == BAR_ERR_INVALID_ARGUMENT);
  CHECK(bar_beta_table_create(0.5, 3, 2, nullptr) == BAR_ERR_NULL_POINTER);
}

TEST_CASE("status strings") {
  for (int s = 0; s <= 6; ++s)
    CHECK(std::strlen(bar_status_string(static_cast<bar_status>(s))) > 0);
}

TEST_CASE("expected ranks and condition numbers") {
  double v = 0.0;
  CHECK(bar_expected_rank_exact_zeta(1, 1, 0.0, 2, &v) == BAR_OK);
  CHECK(v == doctest::Approx(0.5));
  const bar_ge_params ge{0.1, 0.1, 0.1, 0.8};
  CHECK(bar_ge_stationary_loss_rate(&ge, &v) == BAR_OK);
  CHECK(v == doctest::Approx(0.45));
  double st = 0.0, half = 0.0;
  CHECK(bar_expected_rank_ge(&ge, -1.0, 4, 8, &st) == BAR_OK);
  CHECK(bar_expected_rank_ge(&ge, 0.5, 4, 8, &half) == BAR_OK);
  CHECK(st == doctest::Approx(half));
  CHECK(bar_expected_rank_ge(&ge, 2.0, 4, 8, &v) == BAR_ERR_INVALID_ARGUMENT);
  double a = 0.0, b = 0.0;
  CHECK(bar_condition_number(0.45, 4, 4, BAR_COND_INCOMPLETE_BETA, &a) == BAR_OK);
  CHECK(bar_condition_number(0.45, 4, 4, BAR_COND_ALTERNATING_SUM, &b) == BAR_OK);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
  CHECK(bar_condition_number(0.45, 2, 4, BAR_COND_INCOMPLETE_BETA, &a) != BAR_OK);
}

TEST_CASE("block solvers") {
  bar_beta_table* t = nullptr;
  REQUIRE(bar_beta_table_create(0.2, 4, 4, &t) == BAR_OK);
  const int ranks[] = {1, 2};
  int counts[2] = {0, 0};
  double obj = 0.0;
  long iters = -1;
  for (bar_algo algo : {BAR_ALGO_GREEDY, BAR_ALGO_VIA_APPROX, BAR_ALGO_BRUTE}) {
    CHECK(bar_solve(t, algo, ranks, 2, 4, counts, &obj, &iters) == BAR_OK);
    CHECK(obj == doctest::Approx(2.688));
    CHECK(counts[0] + counts[1] == 4);
  }
  int cert = 0;
  CHECK(bar_is_certified_optimal(t, ranks, counts, 2, &cert) == BAR_OK);
  CHECK(cert == 1);

  const int r2[] = {2, 3};
  obj = -7.0;
  CHECK(bar_solve(nullptr, BAR_ALGO_APPROX, r2, 2, 9, counts, &obj, nullptr) == BAR_OK);
  CHECK(counts[0] == 4);
  CHECK(counts[1] == 5);
  CHECK(obj == -7.0);
  CHECK(bar_solve(nullptr, BAR_ALGO_GREEDY, r2, 2, 9, counts, &obj, nullptr) ==
        BAR_ERR_NULL_POINTER);
  CHECK(bar_solve(t, BAR_ALGO_GREEDY, r2, 2, -1, counts, &obj, nullptr) ==
        BAR_ERR_INVALID_ARGUMENT);
  bar_beta_table_destroy(t);
}

TEST_CASE("distribution solver and rounding") {
  bar_beta_table* t = nullptr;
  REQUIRE(bar_beta_table_create(0.2, 8, 4, &t) == BAR_OK);
  const double w[] = {0, 0, 2, 0, 0};
  double tv[5];
  double obj = 0.0;
  CHECK(bar_solve_distribution(t, w, 5, 5, tv, &obj) == BAR_OK);
  CHECK(tv[2] == doctest::Approx(2.5));
  CHECK(bar_water_fill(w, 5, 3, tv) == BAR_OK);
  CHECK(tv[2] == doctest::Approx(1.5));

  const double frac[] = {0, 1, 2.5, 3, 4};
  std::size_t n = 0;
  CHECK(bar_round_fractional(w, 5, frac, BAR_ROUND_RANDOM, 1, nullptr, 0, &n) ==
        BAR_ERR_BUFFER_TOO_SMALL);
  CHECK(n == 2);
  int counts[2];
  CHECK(bar_round_fractional(w, 5, frac, BAR_ROUND_RANDOM, 1, counts, 2, &n) == BAR_OK);
  CHECK(counts[0] + counts[1] == 5);
  CHECK(bar_round_fractional(w, 5, frac, BAR_ROUND_FLOOR, 1, counts, 2, &n) == BAR_OK);
  CHECK(counts[0] + counts[1] == 4);
  bar_beta_table_destroy(t);
}

TEST_CASE("estimator handle") {
  bar_estimator* e = nullptr;
  REQUIRE(bar_estimator_create(BAR_EST_MLE, 4, -1.0, &e) == BAR_OK);
  double p = 0.0;
  int has = 1;
  CHECK(bar_estimator_estimate(e, &p, &has) == BAR_OK);
  CHECK(has == 0);
  CHECK(bar_estimator_observe(e, 100, 80, 1) == BAR_OK);
  CHECK(bar_estimator_estimate(e, &p, &has) == BAR_OK);
  CHECK(has == 1);
  CHECK(p == doctest::Approx(0.2));
  CHECK(bar_estimator_observe(e, 0, 0, 0) == BAR_OK);
  CHECK(bar_estimator_observe(e, 3, 5, 1) == BAR_ERR_INVALID_ARGUMENT);
  bar_estimator_destroy(e);
  CHECK(bar_estimator_create(BAR_EST_BAYES, 0, -1.0, &e) == BAR_ERR_INVALID_ARGUMENT);
}

TEST_CASE("simulation handle") {
  bar_sim_config cfg;
  bar_sim_config_default(&cfg);
  cfg.hops = 3;
  cfg.block_size = 2;
  cfg.num_blocks = 10;
  cfg.trials = 2;
  cfg.policy = BAR_POLICY_KNOWN_P;
  bar_sim_result* res = nullptr;
  REQUIRE(bar_simulate(&cfg, &res) == BAR_OK);
  CHECK(bar_sim_result_size(res) == 60);
  bar_sim_record r;
  CHECK(bar_sim_result_record(res, 59, &r) == BAR_OK);
  CHECK(r.trial == 1);
  CHECK(r.node == 3);
  CHECK(r.block == 9);
  CHECK(bar_sim_result_record(res, 60, &r) == BAR_ERR_OUT_OF_RANGE);
  bar_node_stats s;
  CHECK(bar_sim_result_node_stats(res, 2, &s) == BAR_OK);
  CHECK(s.blocks == 20);
  CHECK(bar_sim_result_node_stats(res, 4, &s) == BAR_ERR_OUT_OF_RANGE);
  bar_sim_result_destroy(res);

  cfg.hops = 0;
  CHECK(bar_simulate(&cfg, &res) == BAR_ERR_CONFIG);
  cfg.hops = 2;
  cfg.policy = BAR_POLICY_GE;
  CHECK(bar_simulate(&cfg, &res) == BAR_ERR_CONFIG);
  REQUIRE(bar_channel_preset(2, &cfg.channel) == BAR_OK);
  CHECK(bar_simulate(&cfg, &res) == BAR_OK);
  bar_sim_result_destroy(res);
  CHECK(bar_channel_preset(4, &cfg.channel) == BAR_ERR_INVALID_ARGUMENT);
}

TEST_CASE("evolution and traces") {
  std::vector<double> masses(3 * 3), thr(3);
  CHECK(bar_evolve_line(2, 0.2, 2, BAR_EVOLVE_BASELINE, masses.data(), thr.data()) == BAR_OK);
  CHECK(masses[3] == doctest::Approx(0.04));
  CHECK(masses[5] == doctest::Approx(0.64));
  CHECK(thr[1] == doctest::Approx(0.8));
  const double d[] = {0, 0, 1};
  double out[3];
  CHECK(bar_evolve_step(d, 3, BAR_EVOLVE_BASELINE, 0.2, out) == BAR_OK);
  CHECK(out[1] == doctest::Approx(0.32));
  double nt = 0.0;
  CHECK(bar_normalized_throughput(out, 3, &nt) == BAR_OK);
  CHECK(nt == doctest::Approx(0.8));

  bar_channel ch;
  REQUIRE(bar_channel_preset(3, &ch) == BAR_OK);
  std::vector<double> truth(20), est(20);
  CHECK(bar_estimate_trace(&ch, BAR_EST_BAYES, 16, -1.0, 0, 4, 4, 20, 1, truth.data(),
                           est.data()) == BAR_OK);
  CHECK(std::isnan(est[0]));
  CHECK_FALSE(std::isnan(est[19]));
}

}  // TEST_SUITE
