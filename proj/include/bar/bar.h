#ifndef BAR_BAR_H
#define BAR_BAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BAR_BUILDING_LIBRARY)
#    define BAR_API __declspec(dllexport)
#  else
#    define BAR_API __declspec(dllimport)
#  endif
#else
#  define BAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bar_status {
  BAR_OK = 0,
  BAR_ERR_INVALID_ARGUMENT = 1,
  BAR_ERR_OUT_OF_RANGE = 2,
  BAR_ERR_CONFIG = 3,
  BAR_ERR_RUNTIME = 4,
  BAR_ERR_NULL_POINTER = 5,
  BAR_ERR_BUFFER_TOO_SMALL = 6
} bar_status;

/* Message of the last failed call on this thread; "" after success. */
BAR_API const char* bar_last_error(void);
BAR_API const char* bar_status_string(bar_status status);

/* ------------------------------------------------------------------------ */
/* Beta tables and expected ranks                                            */

typedef struct bar_beta_table bar_beta_table;

BAR_API bar_status bar_beta_table_create(double p, int max_t, int max_r,
                                         bar_beta_table** out);
BAR_API void bar_beta_table_destroy(bar_beta_table* table);
/* Grows the table in place; existing rows are unchanged. */
BAR_API bar_status bar_beta_table_extend(bar_beta_table* table, int new_max_t);
BAR_API bar_status bar_beta_table_dims(const bar_beta_table* table,
                                       double* p, int* max_t, int* max_r);
/* beta(t, r), t in [-1, max_t]. */
BAR_API bar_status bar_beta_value(const bar_beta_table* table, int t, int r,
                                  double* out);

BAR_API bar_status bar_expected_rank_indep(const bar_beta_table* table, int r,
                                           int t, double* out);
BAR_API bar_status bar_expected_rank_exact_zeta(int r, int t, double p,
                                                uint64_t q, double* out);

typedef struct bar_ge_params {
  double p_gb;
  double p_bg;
  double p_g;
  double p_b;
} bar_ge_params;

/* initial_g is Pr(S_0 = G); pass a negative value for the stationary law. */
BAR_API bar_status bar_expected_rank_ge(const bar_ge_params* ge,
                                        double initial_g, int r, int t,
                                        double* out);
BAR_API bar_status bar_ge_stationary_loss_rate(const bar_ge_params* ge,
                                               double* out);

typedef enum bar_condition_form {
  BAR_COND_INCOMPLETE_BETA = 0,
  BAR_COND_ALTERNATING_SUM = 1
} bar_condition_form;

BAR_API bar_status bar_condition_number(double p, int t, int r,
                                        bar_condition_form form, double* out);

/* ------------------------------------------------------------------------ */
/* Block solvers                                                             */

typedef enum bar_algo {
  BAR_ALGO_GREEDY = 0,
  BAR_ALGO_APPROX = 1,
  BAR_ALGO_VIA_APPROX = 2,
  BAR_ALGO_BRUTE = 3
} bar_algo;

/* counts_out has n entries. The table may be NULL for BAR_ALGO_APPROX, in
 * which case objective_out is left untouched. iterations_out may be NULL. */
BAR_API bar_status bar_solve(const bar_beta_table* table, bar_algo algo,
                             const int* ranks, size_t n, int t_max,
                             int* counts_out, double* objective_out,
                             long* iterations_out);

/* *certified_out = 1 when no single-packet move improves the objective. */
BAR_API bar_status bar_is_certified_optimal(const bar_beta_table* table,
                                            const int* ranks,
                                            const int* counts, size_t n,
                                            int* certified_out);

/* ------------------------------------------------------------------------ */
/* Rank-distribution solver. weights and t_out have m1 = M + 1 entries.      */

BAR_API bar_status bar_water_fill(const double* weights, size_t m1,
                                  double t_max, double* t_out);
BAR_API bar_status bar_solve_distribution(const bar_beta_table* table,
                                          const double* weights, size_t m1,
                                          double t_max, double* t_out,
                                          double* objective_out);

typedef enum bar_rounding {
  BAR_ROUND_RANDOM = 0,
  BAR_ROUND_FLOOR = 1
} bar_rounding;

/* Per-batch counts for integer weights expanded in rank order. counts_len
 * must be at least the number of batches; *batches_out receives it. */
BAR_API bar_status bar_round_fractional(const double* weights, size_t m1,
                                        const double* t, bar_rounding mode,
                                        uint64_t seed, int* counts_out,
                                        size_t counts_len,
                                        size_t* batches_out);

/* ------------------------------------------------------------------------ */
/* Loss-rate estimators                                                      */

typedef enum bar_estimator_kind {
  BAR_EST_MLE = 0,
  BAR_EST_MINIMAX = 1,
  BAR_EST_BAYES = 2
} bar_estimator_kind;

typedef struct bar_estimator bar_estimator;

/* gamma < 0 selects 0.1^(1/window). */
BAR_API bar_status bar_estimator_create(bar_estimator_kind kind, int window,
                                        double gamma, bar_estimator** out);
BAR_API void bar_estimator_destroy(bar_estimator* est);
/* received = 0 records a lost feedback; n and x are then ignored. */
BAR_API bar_status bar_estimator_observe(bar_estimator* est, long n, long x,
                                         int received);
/* *has_out = 0 while no estimate exists yet. */
BAR_API bar_status bar_estimator_estimate(const bar_estimator* est,
                                          double* p_out, int* has_out);

/* ------------------------------------------------------------------------ */
/* Line-network simulation                                                   */

typedef enum bar_channel_kind {
  BAR_CHANNEL_IID = 0,
  BAR_CHANNEL_GE = 1,
  BAR_CHANNEL_SINUSOID = 2
} bar_channel_kind;

typedef struct bar_channel {
  bar_channel_kind kind;
  double p;               /* IID */
  bar_ge_params ge;       /* GE */
  double base;            /* sinusoid */
  double amplitude;
  double period;
} bar_channel;

/* Fills ch1, ch2 or ch3 for index 1, 2, 3. */
BAR_API bar_status bar_channel_preset(int index, bar_channel* out);

typedef enum bar_policy_kind {
  BAR_POLICY_BASELINE = 0,
  BAR_POLICY_KNOWN_P = 1,
  BAR_POLICY_GUESSED_P = 2,
  BAR_POLICY_GE = 3,
  BAR_POLICY_APPROX = 4,
  BAR_POLICY_FEEDBACK = 5
} bar_policy_kind;

typedef struct bar_sim_config {
  int hops;
  int M;
  int block_size;
  int t_max;            /* 0 selects M * block_size */
  int num_blocks;
  int trials;
  int threads;
  bar_channel channel;  /* same model on every link */
  bar_policy_kind policy;
  double guessed_p;     /* BAR_POLICY_GUESSED_P */
  int ge_current_state; /* BAR_POLICY_GE: seed E-GE with the link's state */
  bar_estimator_kind estimator; /* BAR_POLICY_FEEDBACK */
  int window;
  int feedback_lossy;
  double gamma;         /* < 0 selects 0.1^(1/window) */
  uint64_t seed;
} bar_sim_config;

BAR_API void bar_sim_config_default(bar_sim_config* cfg);

typedef struct bar_sim_result bar_sim_result;

typedef struct bar_sim_record {
  int trial;
  int node;
  int block;
  double mean_rank;
  double normalized_throughput;
  double p_used;        /* NaN when the sender used no loss rate */
} bar_sim_record;

typedef struct bar_node_stats {
  int node;
  long blocks;
  double mean;
  double std_error;
} bar_node_stats;

BAR_API bar_status bar_simulate(const bar_sim_config* cfg,
                                bar_sim_result** out);
BAR_API void bar_sim_result_destroy(bar_sim_result* res);
BAR_API size_t bar_sim_result_size(const bar_sim_result* res);
BAR_API bar_status bar_sim_result_record(const bar_sim_result* res, size_t i,
                                         bar_sim_record* out);
/* Mean normalized throughput at node (1..hops). */
BAR_API bar_status bar_sim_result_node_stats(const bar_sim_result* res,
                                             int node, bar_node_stats* out);

/* ------------------------------------------------------------------------ */
/* Deterministic rank-distribution evolution                                 */

typedef enum bar_evolve_policy {
  BAR_EVOLVE_BASELINE = 0,
  BAR_EVOLVE_BAR = 1
} bar_evolve_policy;

/* One hop: dist_out (m1 entries) from dist (mass 1). */
BAR_API bar_status bar_evolve_step(const double* dist, size_t m1,
                                   bar_evolve_policy policy, double p,
                                   double* dist_out);
/* masses_out: (hops + 1) * (M + 1) entries, row h = node h.
 * throughput_out: hops + 1 entries. Either may be NULL. */
BAR_API bar_status bar_evolve_line(int M, double p, int hops,
                                   bar_evolve_policy policy,
                                   double* masses_out, double* throughput_out);
BAR_API bar_status bar_normalized_throughput(const double* dist, size_t m1,
                                             double* out);

/* ------------------------------------------------------------------------ */
/* Estimator trace on one link (M packets per batch, L batches per block)    */

/* truth_out and estimate_out have `blocks` entries; estimate is NaN until
 * the first feedback. */
BAR_API bar_status bar_estimate_trace(const bar_channel* channel,
                                      bar_estimator_kind kind, int window,
                                      double gamma, int lossy, int M, int L,
                                      int blocks, uint64_t seed,
                                      double* truth_out, double* estimate_out);

#ifdef __cplusplus
}
#endif

#endif /* BAR_BAR_H */
