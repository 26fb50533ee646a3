#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

namespace barcli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// Destination of a subcommand's CSV: the given path or the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback)
      : path_(path), fallback_(fallback) {}

  std::ostream& stream() { return path_.empty() ? fallback_ : buffer_; }

  void finish() {
    if (path_.empty()) return;
    std::ofstream f(path_, std::ios::binary | std::ios::trunc);
    if (!f) throw RuntimeError("cannot open output file '" + path_ + "'");
    f << buffer_.str();
    if (!f) throw RuntimeError("failed writing output file '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buffer_;
};

struct TableHandle {
  bar_beta_table* ptr = nullptr;
  explicit TableHandle(double p, int max_t, int max_r) {
    check(bar_beta_table_create(p, max_t, max_r, &ptr));
  }
  ~TableHandle() { bar_beta_table_destroy(ptr); }
  TableHandle(const TableHandle&) = delete;
  TableHandle& operator=(const TableHandle&) = delete;
};

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError(what + ": expected a boolean, got '" + s + "'");
}

bar_estimator_kind parse_estimator(const std::string& s) {
  if (s == "mle") return BAR_EST_MLE;
  if (s == "minimax") return BAR_EST_MINIMAX;
  if (s == "bayes") return BAR_EST_BAYES;
  throw ConfigError("estimator: expected mle|minimax|bayes, got '" + s + "'");
}

// ---------------------------------------------------------------------------

void cmd_table(double p, int max_t, int max_r, std::ostream& out) {
  TableHandle tab(p, max_t, max_r);
  CsvWriter csv(out);
  csv.header({"t", "r", "beta"});
  for (int t = -1; t <= max_t; ++t)
    for (int r = 0; r <= max_r; ++r) {
      double v = 0.0;
      check(bar_beta_value(tab.ptr, t, r, &v));
      csv.row({std::to_string(t), std::to_string(r), format_real(v)});
    }
}

void cmd_solve(double p, const std::string& ranks_s, int t_max,
               const std::string& algo_s, std::ostream& out) {
  bar_algo algo;
  if (algo_s == "greedy")
    algo = BAR_ALGO_GREEDY;
  else if (algo_s == "approx")
    algo = BAR_ALGO_APPROX;
  else if (algo_s == "via-approx")
    algo = BAR_ALGO_VIA_APPROX;
  else if (algo_s == "brute")
    algo = BAR_ALGO_BRUTE;
  else
    throw ConfigError("--algo: expected greedy|approx|via-approx|brute, got '" +
                      algo_s + "'");
  const std::vector<int> ranks = parse_int_list(ranks_s, "--ranks");
  if (ranks.empty()) throw ConfigError("--ranks: need at least one rank");
  int max_r = 0;
  for (int r : ranks) max_r = std::max(max_r, r);
  TableHandle tab(p, std::max(t_max, 0), max_r);

  std::vector<int> counts(ranks.size());
  double obj = 0.0;
  check(bar_solve(tab.ptr, algo, ranks.data(), ranks.size(), t_max,
                  counts.data(), &obj, nullptr));
  CsvWriter csv(out);
  csv.header({"batch_index", "rank", "t"});
  for (std::size_t b = 0; b < ranks.size(); ++b)
    csv.row({std::to_string(b), std::to_string(ranks[b]),
             std::to_string(counts[b])});
  csv.row({"objective", format_real(obj)});
}

void cmd_solve_dist(double p, const std::string& weights_s, double t_max,
                    const std::string& round_s, std::ostream& out) {
  const std::vector<double> w = parse_real_list(weights_s, "--weights");
  if (w.empty()) throw ConfigError("--weights: need at least one weight");
  const int m = static_cast<int>(w.size()) - 1;
  TableHandle tab(p, 2 * m + 2, m);
  std::vector<double> t(w.size());
  double obj = 0.0;
  check(bar_solve_distribution(tab.ptr, w.data(), w.size(), t_max, t.data(),
                               &obj));

  std::optional<bar_rounding> mode;
  std::uint64_t seed = 0;
  if (round_s == "floor") {
    mode = BAR_ROUND_FLOOR;
  } else if (round_s.rfind("random:", 0) == 0) {
    mode = BAR_ROUND_RANDOM;
    const long s = parse_int(round_s.substr(7), "--round seed");
    if (s < 0) throw ConfigError("--round seed must be >= 0");
    seed = static_cast<std::uint64_t>(s);
  } else if (round_s != "none") {
    throw ConfigError("--round: expected none|floor|random:<seed>, got '" +
                      round_s + "'");
  }

  CsvWriter csv(out);
  csv.header({"rank", "weight", "t"});
  for (std::size_t r = 0; r < w.size(); ++r)
    csv.row({std::to_string(r), format_real(w[r]), format_real(t[r])});
  if (!mode) return;

  std::size_t n = 0;
  bar_status st = bar_round_fractional(w.data(), w.size(), t.data(), *mode,
                                       seed, nullptr, 0, &n);
  if (st != BAR_ERR_BUFFER_TOO_SMALL) check(st);
  std::vector<int> counts(n);
  check(bar_round_fractional(w.data(), w.size(), t.data(), *mode, seed,
                             counts.data(), counts.size(), &n));
  std::vector<int> ranks;
  for (std::size_t r = 0; r < w.size(); ++r)
    ranks.insert(ranks.end(), static_cast<std::size_t>(std::llround(w[r])),
                 static_cast<int>(r));
  csv.blank_line();
  csv.header({"batch_index", "rank", "t"});
  for (std::size_t b = 0; b < counts.size(); ++b)
    csv.row({std::to_string(b), std::to_string(ranks[b]),
             std::to_string(counts[b])});
}

void cmd_evolve(double p, int M, int hops, const std::string& policy_s,
                std::ostream& out) {
  bar_evolve_policy policy;
  if (policy_s == "baseline")
    policy = BAR_EVOLVE_BASELINE;
  else if (policy_s == "bar")
    policy = BAR_EVOLVE_BAR;
  else
    throw ConfigError("--policy: expected baseline|bar, got '" + policy_s +
                      "'");
  if (M < 1 || hops < 0) throw ConfigError("evolve: need --M >= 1, --hops >= 0");
  const auto width = static_cast<std::size_t>(M) + 1;
  std::vector<double> masses(width * (static_cast<std::size_t>(hops) + 1));
  std::vector<double> thr(static_cast<std::size_t>(hops) + 1);
  check(bar_evolve_line(M, p, hops, policy, masses.data(), thr.data()));

  CsvWriter csv(out);
  csv.header({"hop", "rank", "mass"});
  for (int h = 0; h <= hops; ++h)
    for (std::size_t r = 0; r < width; ++r)
      csv.row({std::to_string(h), std::to_string(r),
               format_real(masses[static_cast<std::size_t>(h) * width + r])});
  csv.blank_line();
  csv.header({"hop", "throughput"});
  for (int h = 0; h <= hops; ++h)
    csv.row({std::to_string(h),
             format_real(thr[static_cast<std::size_t>(h)])});
}

void cmd_estimate(const std::string& path, const std::string& est_s,
                  int window, double gamma, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--trace: cannot open '" + path + "'");
  bar_estimator* est = nullptr;
  check(bar_estimator_create(parse_estimator(est_s), window, gamma, &est));
  std::unique_ptr<bar_estimator, void (*)(bar_estimator*)> guard(
      est, bar_estimator_destroy);

  CsvWriter csv(out);
  csv.header({"block", "p_hat"});
  std::string line;
  int lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const std::string where = path + ":" + std::to_string(lineno);
    if (!seen_header) {
      if (f != std::vector<std::string>{"block", "n", "x", "received_flag"})
        throw ConfigError(where +
                          ": expected header block,n,x,received_flag");
      seen_header = true;
      continue;
    }
    if (f.size() != 4)
      throw ConfigError(where + ": expected 4 fields, got " +
                        std::to_string(f.size()));
    const long n = parse_int(f[1], where + ": n");
    const long x = parse_int(f[2], where + ": x");
    const bool received = parse_bool(f[3], where + ": received_flag");
    if (received && (n < 0 || x < 0 || x > n))
      throw ConfigError(where + ": need 0 <= x <= n");
    check(bar_estimator_observe(est, n, x, received ? 1 : 0));
    double p = 0.0;
    int has = 0;
    check(bar_estimator_estimate(est, &p, &has));
    csv.row({f[0], format_real(has ? p : std::nan(""))});
  }
  if (!seen_header) throw ConfigError(path + ": empty trace");
}

}  // namespace

// ---------------------------------------------------------------------------

void check(bar_status status) {
  if (status == BAR_OK) return;
  std::string msg = bar_last_error();
  if (msg.empty()) msg = bar_status_string(status);
  switch (status) {
    case BAR_ERR_INVALID_ARGUMENT:
    case BAR_ERR_OUT_OF_RANGE:
    case BAR_ERR_CONFIG:
      throw ConfigError(msg);
    default:
      throw RuntimeError(msg);
  }
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::header(const std::vector<std::string>& names) { row(names); }

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << '\n';
}

void CsvWriter::blank_line() { out_ << '\n'; }

std::map<std::string, std::string> parse_key_value(
    std::istream& in, const std::string& source,
    const std::set<std::string>& allowed) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!allowed.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
    if (out.count(key))
      throw ConfigError(where + ": duplicate key '" + key + "'");
    if (value.empty())
      throw ConfigError(where + ": key '" + key + "' has no value");
    out[key] = value;
  }
  return out;
}

long parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": expected an integer, got '" + s + "'");
}

double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": expected a number, got '" + s + "'");
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const auto& f : split(s, ','))
    out.push_back(static_cast<int>(parse_int(f, what)));
  return out;
}

std::vector<double> parse_real_list(const std::string& s,
                                    const std::string& what) {
  std::vector<double> out;
  for (const auto& f : split(s, ',')) out.push_back(parse_real(f, what));
  return out;
}

bar_channel parse_channel(const std::string& s) {
  bar_channel ch{};
  if (s == "ch1" || s == "ch2" || s == "ch3") {
    check(bar_channel_preset(s[2] - '0', &ch));
    return ch;
  }
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::vector<double> v =
      colon == std::string::npos
          ? std::vector<double>{}
          : parse_real_list(s.substr(colon + 1), "channel");
  if (kind == "iid" && v.size() == 1) {
    ch.kind = BAR_CHANNEL_IID;
    ch.p = v[0];
  } else if (kind == "ge" && v.size() == 4) {
    ch.kind = BAR_CHANNEL_GE;
    ch.ge = bar_ge_params{v[0], v[1], v[2], v[3]};
  } else if (kind == "sin" && v.size() == 3) {
    ch.kind = BAR_CHANNEL_SINUSOID;
    ch.base = v[0];
    ch.amplitude = v[1];
    ch.period = v[2];
  } else {
    throw ConfigError(
        "channel: expected ch1|ch2|ch3|iid:<p>|ge:<p_gb>,<p_bg>,<p_g>,<p_b>|"
        "sin:<base>,<amplitude>,<period>, got '" +
        s + "'");
  }
  return ch;
}

const std::set<std::string>& sim_config_keys() {
  static const std::set<std::string> keys{
      "hops",     "M",         "block_size", "t_max",  "blocks",
      "trials",   "threads",   "channel",    "policy", "p_guess",
      "ge_init",  "estimator", "window",     "gamma",  "feedback_lossy",
      "seed"};
  return keys;
}

bar_sim_config build_sim_config(const std::map<std::string, std::string>& kv) {
  bar_sim_config cfg;
  bar_sim_config_default(&cfg);
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto get_int = [&](const char* key, int& dst) {
    if (const auto* v = get(key)) dst = static_cast<int>(parse_int(*v, key));
  };
  for (const auto& [k, v] : kv)
    if (!sim_config_keys().count(k))
      throw ConfigError("unknown key '" + k + "'");

  get_int("hops", cfg.hops);
  get_int("M", cfg.M);
  get_int("block_size", cfg.block_size);
  get_int("t_max", cfg.t_max);
  get_int("blocks", cfg.num_blocks);
  get_int("trials", cfg.trials);
  get_int("threads", cfg.threads);
  get_int("window", cfg.window);
  if (const auto* v = get("channel")) cfg.channel = parse_channel(*v);
  if (const auto* v = get("p_guess")) cfg.guessed_p = parse_real(*v, "p_guess");
  if (const auto* v = get("gamma")) cfg.gamma = parse_real(*v, "gamma");
  if (const auto* v = get("estimator")) cfg.estimator = parse_estimator(*v);
  if (const auto* v = get("feedback_lossy"))
    cfg.feedback_lossy = parse_bool(*v, "feedback_lossy") ? 1 : 0;
  if (const auto* v = get("ge_init")) {
    if (*v == "stationary")
      cfg.ge_current_state = 0;
    else if (*v == "current")
      cfg.ge_current_state = 1;
    else
      throw ConfigError("ge_init: expected stationary|current, got '" + *v +
                        "'");
  }
  if (const auto* v = get("seed")) {
    const long s = parse_int(*v, "seed");
    if (s < 0) throw ConfigError("seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (const auto* v = get("policy")) {
    static const std::map<std::string, bar_policy_kind> names{
        {"baseline", BAR_POLICY_BASELINE}, {"bar", BAR_POLICY_KNOWN_P},
        {"guessed", BAR_POLICY_GUESSED_P}, {"ge", BAR_POLICY_GE},
        {"approx", BAR_POLICY_APPROX},     {"feedback", BAR_POLICY_FEEDBACK}};
    const auto it = names.find(*v);
    if (it == names.end())
      throw ConfigError(
          "policy: expected baseline|bar|guessed|ge|approx|feedback, got '" +
          *v + "'");
    cfg.policy = it->second;
  }
  return cfg;
}

void write_sim_records(const bar_sim_result* res, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"trial", "node", "block", "mean_rank", "normalized_throughput"});
  const std::size_t n = bar_sim_result_size(res);
  for (std::size_t i = 0; i < n; ++i) {
    bar_sim_record r;
    check(bar_sim_result_record(res, i, &r));
    csv.row({std::to_string(r.trial), std::to_string(r.node),
             std::to_string(r.block), format_real(r.mean_rank),
             format_real(r.normalized_throughput)});
  }
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Blockwise adaptive recoding toolkit", "bar"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string out_path;

  // table
  auto* table = app.add_subcommand("table", "Dump a beta table as t,r,beta");
  double table_p = 0.0;
  int table_t = 7, table_r = 4;
  table->add_option("--p", table_p, "Loss rate in (0, 1)")->required();
  table->add_option("--max-t", table_t, "Largest row")->capture_default_str();
  table->add_option("--max-r", table_r, "Largest rank")->capture_default_str();
  table->add_option("--out", out_path, "Output file (default stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one block");
  double solve_p = 0.0;
  std::string solve_ranks, solve_algo = "greedy";
  int solve_tmax = 0;
  solve->add_option("--p", solve_p, "Loss rate in (0, 1)")->required();
  solve->add_option("--ranks", solve_ranks, "Comma-separated batch ranks")
      ->required();
  solve->add_option("--tmax", solve_tmax, "Packet budget")->required();
  solve->add_option("--algo", solve_algo, "greedy|approx|via-approx|brute")
      ->capture_default_str();
  solve->add_option("--out", out_path, "Output file (default stdout)");

  // solve-dist
  auto* sdist =
      app.add_subcommand("solve-dist", "Solve for a rank distribution");
  double sdist_p = 0.0, sdist_tmax = 0.0;
  std::string sdist_w, sdist_round = "none";
  sdist->add_option("--p", sdist_p, "Loss rate in (0, 1)")->required();
  sdist->add_option("--weights", sdist_w, "Comma-separated w_0..w_M")
      ->required();
  sdist->add_option("--tmax", sdist_tmax, "Packet budget")->required();
  sdist->add_option("--round", sdist_round, "none|floor|random:<seed>")
      ->capture_default_str();
  sdist->add_option("--out", out_path, "Output file (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo line network");
  std::string sim_config;
  std::map<std::string, std::string> flag_kv;
  sim->add_option("--config", sim_config, "key = value configuration file");
  struct SimFlag {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const SimFlag sim_flags[] = {
      {"--hops", "hops", "Number of links"},
      {"--M", "M", "Batch size"},
      {"--block-size", "block_size", "Batches per block"},
      {"--tmax", "t_max", "Packets per block (default M * block size)"},
      {"--blocks", "blocks", "Blocks per trial"},
      {"--trials", "trials", "Independent trials"},
      {"--threads", "threads", "Worker threads"},
      {"--channel", "channel",
       "ch1|ch2|ch3|iid:<p>|ge:<a>,<b>,<c>,<d>|sin:<base>,<amp>,<period>"},
      {"--policy", "policy", "baseline|bar|guessed|ge|approx|feedback"},
      {"--p-guess", "p_guess", "Loss rate for the guessed policy"},
      {"--ge-init", "ge_init", "stationary|current"},
      {"--estimator", "estimator", "mle|minimax|bayes"},
      {"--window", "window", "Feedback time frame in blocks"},
      {"--gamma", "gamma", "Bayes fading factor"},
      {"--lossy", "feedback_lossy", "Feedback lost like data packets (0|1)"},
      {"--seed", "seed", "Base seed"},
  };
  std::map<std::string, std::string> sim_flag_values;
  for (const auto& f : sim_flags)
    sim->add_option(f.flag, sim_flag_values[f.key], f.help);
  sim->add_option("--out", out_path, "Output file (default stdout)");

  // evolve
  auto* evolve =
      app.add_subcommand("evolve", "Deterministic rank-distribution evolution");
  double evo_p = 0.0;
  int evo_M = 4, evo_hops = 40;
  std::string evo_policy = "bar";
  evolve->add_option("--p", evo_p, "Loss rate in (0, 1)")->required();
  evolve->add_option("--M", evo_M, "Batch size")->capture_default_str();
  evolve->add_option("--hops", evo_hops, "Number of links")
      ->capture_default_str();
  evolve->add_option("--policy", evo_policy, "baseline|bar")
      ->capture_default_str();
  evolve->add_option("--out", out_path, "Output file (default stdout)");

  // estimate
  auto* estimate = app.add_subcommand(
      "estimate", "Replay a block,n,x,received_flag trace through an estimator");
  std::string est_trace, est_kind = "mle";
  int est_window = 16;
  double est_gamma = -1.0;
  estimate->add_option("--trace", est_trace, "Trace CSV")->required();
  estimate->add_option("--estimator", est_kind, "mle|minimax|bayes")
      ->capture_default_str();
  estimate->add_option("--window", est_window, "Time frame in blocks")
      ->capture_default_str();
  estimate->add_option("--gamma", est_gamma,
                       "Bayes fading factor (default 0.1^(1/W))");
  estimate->add_option("--out", out_path, "Output file (default stdout)");

  // preset
  auto* preset = app.add_subcommand("preset", "Run a named experiment");
  std::string preset_name;
  bool preset_list = false;
  long preset_seed = -1;
  int preset_blocks = 0, preset_threads = 1;
  preset->add_option("name,--name", preset_name, "Preset name");
  preset->add_flag("--list", preset_list, "List preset names");
  preset->add_option("--seed", preset_seed, "Seed (default 1, or BAR_SEED)");
  preset->add_option("--blocks", preset_blocks,
                     "Override the Monte-Carlo trial count");
  preset->add_option("--threads", preset_threads, "Worker threads")
      ->capture_default_str();
  preset->add_option("--out", out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const char* env_seed = std::getenv("BAR_SEED");
  try {
    Sink sink(out_path, out);
    std::ostream& os = sink.stream();
    if (*table) {
      cmd_table(table_p, table_t, table_r, os);
    } else if (*solve) {
      cmd_solve(solve_p, solve_ranks, solve_tmax, solve_algo, os);
    } else if (*sdist) {
      cmd_solve_dist(sdist_p, sdist_w, sdist_tmax, sdist_round, os);
    } else if (*sim) {
      std::map<std::string, std::string> kv;
      if (!sim_config.empty()) {
        std::ifstream in(sim_config);
        if (!in) throw ConfigError("--config: cannot open '" + sim_config + "'");
        kv = parse_key_value(in, sim_config, sim_config_keys());
      }
      if (env_seed) kv["seed"] = env_seed;
      for (const auto& f : sim_flags)
        if (sim->count(f.flag) > 0) kv[f.key] = sim_flag_values[f.key];
      const bar_sim_config cfg = build_sim_config(kv);
      bar_sim_result* res = nullptr;
      check(bar_simulate(&cfg, &res));
      std::unique_ptr<bar_sim_result, void (*)(bar_sim_result*)> guard(
          res, bar_sim_result_destroy);
      write_sim_records(res, os);
    } else if (*evolve) {
      cmd_evolve(evo_p, evo_M, evo_hops, evo_policy, os);
    } else if (*estimate) {
      cmd_estimate(est_trace, est_kind, est_window, est_gamma, os);
    } else if (*preset) {
      if (preset_list) {
        for (const auto& n : preset_names()) os << n << '\n';
      } else {
        if (preset_name.empty())
          throw ConfigError("preset: missing preset name (see --list)");
        PresetOptions opt;
        if (env_seed) opt.seed = static_cast<std::uint64_t>(
                          parse_int(env_seed, "BAR_SEED"));
        if (preset_seed >= 0) opt.seed = static_cast<std::uint64_t>(preset_seed);
        if (preset_blocks > 0) opt.blocks = preset_blocks;
        opt.threads = preset_threads;
        run_preset(preset_name, opt, os);
      }
    }
    sink.finish();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace barcli
