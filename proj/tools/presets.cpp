#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>

#include "cli.hpp"

namespace barcli {

namespace {

using PresetFn = std::function<void(const PresetOptions&, std::ostream&)>;

struct Preset {
  std::string name;
  PresetFn run;
};

using TablePtr = std::unique_ptr<bar_beta_table, void (*)(bar_beta_table*)>;
using ResultPtr = std::unique_ptr<bar_sim_result, void (*)(bar_sim_result*)>;

TablePtr make_table(double p, int max_t, int max_r) {
  bar_beta_table* t = nullptr;
  check(bar_beta_table_create(p, max_t, max_r, &t));
  return TablePtr(t, bar_beta_table_destroy);
}

ResultPtr simulate(const bar_sim_config& cfg) {
  bar_sim_result* r = nullptr;
  check(bar_simulate(&cfg, &r));
  return ResultPtr(r, bar_sim_result_destroy);
}

bar_channel channel_preset(int i) {
  bar_channel ch{};
  check(bar_channel_preset(i, &ch));
  return ch;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Linear interpolation between order statistics.
double percentile(std::vector<double> v, double q) {
  v.erase(std::remove_if(v.begin(), v.end(),
                         [](double x) { return std::isnan(x); }),
          v.end());
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void beta_dump(double p, std::ostream& out) {
  auto tab = make_table(p, 7, 4);
  CsvWriter csv(out);
  csv.header({"t", "r", "beta"});
  for (int t = 1; t <= 7; ++t)
    for (int r = 1; r <= 4; ++r) {
      double v = 0.0;
      check(bar_beta_value(tab.get(), t, r, &v));
      csv.row({std::to_string(t), std::to_string(r), format_real(v)});
    }
}

void condition_dump(double p, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"t", "r", "condition_number"});
  for (int t = 1; t <= 7; ++t)
    for (int r = 1; r <= std::min(t, 4); ++r) {
      double v = 0.0;
      check(bar_condition_number(p, t, r, BAR_COND_ALTERNATING_SUM, &v));
      csv.row({std::to_string(t), std::to_string(r), format_real(v)});
    }
}

void table1(std::ostream& out) {
  const double p = 0.2;
  auto tab = make_table(p, 8, 8);
  CsvWriter csv(out);
  csv.header({"r", "t", "e_indep", "e_exact", "percent_error"});
  for (int r = 1; r <= 8; ++r)
    for (int t = 1; t <= 8; ++t) {
      double ei = 0.0, ex = 0.0;
      check(bar_expected_rank_indep(tab.get(), r, t, &ei));
      check(bar_expected_rank_exact_zeta(r, t, p, 256, &ex));
      csv.row({std::to_string(r), std::to_string(t), format_real(ei),
               format_real(ex), format_real(std::abs(ei - ex) / ex * 100.0)});
    }
}

void gains(double p, std::ostream& out) {
  const int M = 4, hops = 40;
  std::vector<double> base(hops + 1), bar(hops + 1);
  check(bar_evolve_line(M, p, hops, BAR_EVOLVE_BASELINE, nullptr, base.data()));
  check(bar_evolve_line(M, p, hops, BAR_EVOLVE_BAR, nullptr, bar.data()));
  CsvWriter csv(out);
  csv.header({"hop", "baseline", "bar", "gain_percent"});
  for (int h = 0; h <= hops; ++h) {
    const auto i = static_cast<std::size_t>(h);
    csv.row({std::to_string(h), format_real(base[i]), format_real(bar[i]),
             format_real((bar[i] / base[i] - 1.0) * 100.0)});
  }
}

void blocksize(const PresetOptions& opt, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"p", "block_size", "node", "blocks", "mean", "std_error"});
  for (double p : {0.2, 0.3})
    for (int L : {1, 2, 4, 8, 16}) {
      bar_sim_config cfg;
      bar_sim_config_default(&cfg);
      cfg.hops = 20;
      cfg.M = 8;
      cfg.block_size = L;
      cfg.channel.kind = BAR_CHANNEL_IID;
      cfg.channel.p = p;
      cfg.policy = BAR_POLICY_KNOWN_P;
      // Equal batch count per setting.
      cfg.num_blocks = std::max(1, opt.blocks.value_or(16384) / L);
      cfg.trials = 1;
      cfg.threads = opt.threads;
      cfg.seed = opt.seed;
      auto res = simulate(cfg);
      for (int node = 1; node <= cfg.hops; ++node) {
        bar_node_stats s;
        check(bar_sim_result_node_stats(res.get(), node, &s));
        csv.row({format_real(p), std::to_string(L), std::to_string(node),
                 std::to_string(s.blocks), format_real(s.mean),
                 format_real(s.std_error)});
      }
    }
}

struct InaccurateRun {
  std::string label;
  bar_policy_kind policy;
  double guess;
};

void inaccurate(int channel, const PresetOptions& opt, std::ostream& out) {
  std::vector<InaccurateRun> runs{{"bar_known_p", BAR_POLICY_KNOWN_P, 0.0},
                                  {"bar_p_0.25", BAR_POLICY_GUESSED_P, 0.25},
                                  {"bar_p_0.65", BAR_POLICY_GUESSED_P, 0.65},
                                  {"baseline", BAR_POLICY_BASELINE, 0.0}};
  if (channel == 2) runs.push_back({"bar_ge", BAR_POLICY_GE, 0.0});

  const int hops = 4, blocks = 80;
  CsvWriter csv(out);
  csv.header({"policy", "block", "mean_throughput"});
  for (const auto& run : runs) {
    bar_sim_config cfg;
    bar_sim_config_default(&cfg);
    cfg.hops = hops;
    cfg.M = 4;
    cfg.block_size = 4;
    cfg.num_blocks = blocks;
    cfg.trials = opt.blocks.value_or(1000);
    cfg.threads = opt.threads;
    cfg.channel = channel_preset(channel);
    cfg.policy = run.policy;
    cfg.guessed_p = run.guess;
    cfg.seed = opt.seed;
    auto res = simulate(cfg);
    std::vector<double> sum(blocks, 0.0);
    std::vector<int> n(blocks, 0);
    const std::size_t size = bar_sim_result_size(res.get());
    for (std::size_t i = 0; i < size; ++i) {
      bar_sim_record r;
      check(bar_sim_result_record(res.get(), i, &r));
      if (r.node != hops) continue;
      sum[static_cast<std::size_t>(r.block)] += r.normalized_throughput;
      ++n[static_cast<std::size_t>(r.block)];
    }
    for (int b = 0; b < blocks; ++b) {
      const auto i = static_cast<std::size_t>(b);
      csv.row({run.label, std::to_string(b),
               format_real(n[i] ? sum[i] / n[i] : std::nan(""))});
    }
  }
}

void feedback(const PresetOptions& opt, std::ostream& out) {
  const int W = 16, M = 4, L = 4, blocks = 640;
  const int runs = opt.blocks.value_or(200);
  static const std::pair<const char*, bar_estimator_kind> kinds[] = {
      {"mle", BAR_EST_MLE}, {"minimax", BAR_EST_MINIMAX}, {"bayes", BAR_EST_BAYES}};
  CsvWriter csv(out);
  csv.header({"channel", "estimator", "lossy", "block", "truth", "p25",
              "median", "p75"});
  for (int ch = 1; ch <= 3; ++ch) {
    const bar_channel channel = channel_preset(ch);
    for (const auto& [name, kind] : kinds)
      for (int lossy = 0; lossy <= 1; ++lossy) {
        std::vector<std::vector<double>> est(
            blocks, std::vector<double>(static_cast<std::size_t>(runs)));
        std::vector<double> truth(blocks), e(blocks);
        for (int k = 0; k < runs; ++k) {
          check(bar_estimate_trace(&channel, kind, W, -1.0, lossy, M, L,
                                   blocks,
                                   mix_seed(opt.seed,
                                            static_cast<std::uint64_t>(k)),
                                   truth.data(), e.data()));
          for (int b = 0; b < blocks; ++b)
            est[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] =
                e[static_cast<std::size_t>(b)];
        }
        for (int b = 0; b < blocks; ++b) {
          const auto& v = est[static_cast<std::size_t>(b)];
          csv.row({"ch" + std::to_string(ch), name, std::to_string(lossy),
                   std::to_string(b),
                   format_real(truth[static_cast<std::size_t>(b)]),
                   format_real(percentile(v, 0.25)),
                   format_real(percentile(v, 0.5)),
                   format_real(percentile(v, 0.75))});
        }
      }
  }
}

const std::vector<Preset>& registry() {
  static const std::vector<Preset> presets = [] {
    std::vector<Preset> v;
    const std::pair<const char*, double> fig7[] = {
        {"fig7a", 0.1},  {"fig7b", 0.101},  {"fig7c", 0.099},
        {"fig7d", 0.45}, {"fig7e", 0.4545}, {"fig7f", 0.4455}};
    for (const auto& [name, p] : fig7) {
      const double q = p;
      v.push_back({name, [q](const PresetOptions&, std::ostream& o) {
                     beta_dump(q, o);
                   }});
    }
    v.push_back({"fig8a", [](const PresetOptions&, std::ostream& o) {
                   condition_dump(0.1, o);
                 }});
    v.push_back({"fig8b", [](const PresetOptions&, std::ostream& o) {
                   condition_dump(0.45, o);
                 }});
    v.push_back(
        {"table1", [](const PresetOptions&, std::ostream& o) { table1(o); }});
    v.push_back({"gains-p02", [](const PresetOptions&, std::ostream& o) {
                   gains(0.2, o);
                 }});
    v.push_back({"gains-p03", [](const PresetOptions&, std::ostream& o) {
                   gains(0.3, o);
                 }});
    v.push_back({"blocksize", blocksize});
    for (int ch = 1; ch <= 3; ++ch)
      v.push_back({"inaccurate-ch" + std::to_string(ch),
                   [ch](const PresetOptions& opt, std::ostream& o) {
                     inaccurate(ch, opt, o);
                   }});
    v.push_back({"feedback", feedback});
    return v;
  }();
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : registry()) names.push_back(p.name);
  return names;
}

void run_preset(const std::string& name, const PresetOptions& opt,
                std::ostream& out) {
  for (const auto& p : registry())
    if (p.name == name) {
      p.run(opt, out);
      return;
    }
  throw ConfigError("unknown preset '" + name + "' (see preset --list)");
}

}  // namespace barcli
