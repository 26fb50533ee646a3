#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bar/bar.h"

namespace barcli {

enum ExitCode { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2 };

/// Bad user input: unknown keys, malformed values, missing flags.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while running a valid request.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ConfigError or RuntimeError for a failed C API call.
void check(bar_status status);

/// 17 significant digits, "nan" for NaN.
std::string format_real(double v);

/// RFC 4180 field quoting when needed.
std::string csv_field(const std::string& s);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);
  void blank_line();

 private:
  std::ostream& out_;
};

/// Flat `key = value` text. '#' starts a comment. Keys outside `allowed`
/// and repeated keys raise ConfigError naming the source line and key.
std::map<std::string, std::string> parse_key_value(
    std::istream& in, const std::string& source,
    const std::set<std::string>& allowed);

std::vector<int> parse_int_list(const std::string& s, const std::string& what);
std::vector<double> parse_real_list(const std::string& s,
                                    const std::string& what);
double parse_real(const std::string& s, const std::string& what);
long parse_int(const std::string& s, const std::string& what);

/// ch1 | ch2 | ch3 | iid:<p> | ge:<p_gb>,<p_bg>,<p_g>,<p_b> |
/// sin:<base>,<amplitude>,<period>
bar_channel parse_channel(const std::string& s);

/// Resolves key-value simulation settings into a C config.
bar_sim_config build_sim_config(const std::map<std::string, std::string>& kv);

const std::set<std::string>& sim_config_keys();

/// Writes the simulate CSV for a finished run.
void write_sim_records(const bar_sim_result* res, std::ostream& out);

// Presets -------------------------------------------------------------------

struct PresetOptions {
  std::uint64_t seed = 1;
  std::optional<int> blocks;  // Monte-Carlo presets: blocks or trials scale
  int threads = 1;
};

std::vector<std::string> preset_names();

/// Runs a named preset into `out`. Throws ConfigError for unknown names.
void run_preset(const std::string& name, const PresetOptions& opt,
                std::ostream& out);

// Entry point ---------------------------------------------------------------

/// Full command line handling; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace barcli
