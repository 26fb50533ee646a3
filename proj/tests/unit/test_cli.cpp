#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bar");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = barcli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / ("bar_cli_" + name);
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help lists every subcommand") {
  const Outcome o = run_cli({"--help"});
  CHECK(o.code == 0);
  for (const char* sub : {"table", "solve", "solve-dist", "simulate", "evolve", "estimate", "preset"})
    CHECK(o.out.find(sub) != std::string::npos);
}

TEST_CASE("missing flag names the flag") {
  const Outcome o = run_cli({"solve", "--ranks", "1,2", "--tmax", "4"});
  CHECK(o.code == 2);
  CHECK(o.err.find("--p") != std::string::npos);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
}

TEST_CASE("solve prints assignment and objective") {
  const Outcome o = run_cli({"solve", "--p", "0.2", "--ranks", "1,2", "--tmax", "4"});
  REQUIRE(o.code == 0);
  const auto l = lines(o.out);
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "batch_index,rank,t");
  CHECK(l[1] == "0,1,1");
  CHECK(l[2] == "1,2,3");
  CHECK(l[3].rfind("objective,2.68800000000000", 0) == 0);
  for (const char* algo : {"approx", "via-approx", "brute"})
    CHECK(run_cli({"solve", "--p", "0.2", "--ranks", "1,2", "--tmax", "4", "--algo", algo}).code == 0);
  CHECK(run_cli({"solve", "--p", "0.2", "--ranks", "1,2", "--tmax", "4", "--algo", "magic"}).code == 2);
  CHECK(run_cli({"solve", "--p", "1.5", "--ranks", "1,2", "--tmax", "4"}).code == 2);
  CHECK(run_cli({"solve", "--p", "0.2", "--ranks", "1,x", "--tmax", "4"}).code == 2);
}

TEST_CASE("table dump uses 17 significant digits") {
  const Outcome o = run_cli({"table", "--p", "0.1", "--max-t", "2", "--max-r", "1"});
  REQUIRE(o.code == 0);
  const auto l = lines(o.out);
  CHECK(l[0] == "t,r,beta");
  CHECK(l.size() == 1 + 4 * 2);
  CHECK(l[1] == "-1,0,1");
  CHECK(l[4] == "0,1,1");
  CHECK(l[6] == "1,1,0.10000000000000001");
}

TEST_CASE("solve-dist with and without rounding") {
  Outcome o = run_cli({"solve-dist", "--p", "0.2", "--weights", "0,0,2,0,0", "--tmax", "5"});
  REQUIRE(o.code == 0);
  auto l = lines(o.out);
  CHECK(l[0] == "rank,weight,t");
  CHECK(l[3] == "2,2,2.5");
  o = run_cli({"solve-dist", "--p", "0.2", "--weights", "0,0,2,0,0", "--tmax", "5", "--round", "random:4"});
  REQUIRE(o.code == 0);
  l = lines(o.out);
  REQUIRE(l.size() == 6 + 1 + 3);
  CHECK(l[6].empty());
  CHECK(l[7] == "batch_index,rank,t");
  o = run_cli({"solve-dist", "--p", "0.2", "--weights", "0,0,2,0,0", "--tmax", "5", "--round", "floor"});
  REQUIRE(o.code == 0);
  l = lines(o.out);
  CHECK(l[8] == "0,2,2");
  CHECK(l[9] == "1,2,2");
  CHECK(run_cli({"solve-dist", "--p", "0.2", "--weights", "0,1", "--tmax", "1", "--round", "up"}).code == 2);
}

TEST_CASE("evolve output sections") {
  const Outcome o = run_cli({"evolve", "--p", "0.2", "--M", "2", "--hops", "1", "--policy", "baseline"});
  REQUIRE(o.code == 0);
  const auto l = lines(o.out);
  CHECK(l[0] == "hop,rank,mass");
  CHECK(l[7].empty());
  CHECK(l[8] == "hop,throughput");
  CHECK(l[10].rfind("1,0.8", 0) == 0);
}

TEST_CASE("simulate from config, flags and environment") {
  const fs::path cfg = temp_file("sim.cfg",
                                 "# small run\nhops = 2\nM = 4\nblock_size = 2\nblocks = 3\n"
                                 "channel = iid:0.3\npolicy = bar\nseed = 5\n");
  Outcome a = run_cli({"simulate", "--config", cfg.string()});
  REQUIRE(a.code == 0);
  const auto l = lines(a.out);
  CHECK(l[0] == "trial,node,block,mean_rank,normalized_throughput");
  CHECK(l.size() == 1 + 2 * 3);
  CHECK(run_cli({"simulate", "--config", cfg.string()}).out == a.out);

  const Outcome b = run_cli({"simulate", "--config", cfg.string(), "--seed", "6"});
  CHECK(b.code == 0);
  ::setenv("BAR_SEED", "6", 1);
  const Outcome env = run_cli({"simulate", "--config", cfg.string()});
  const Outcome flag = run_cli({"simulate", "--config", cfg.string(), "--seed", "5"});
  ::unsetenv("BAR_SEED");
  CHECK(env.out == b.out);
  CHECK(flag.out == a.out);

  const Outcome h = run_cli({"simulate", "--config", cfg.string(), "--hops", "1"});
  CHECK(lines(h.out).size() == 1 + 3);
}

TEST_CASE("config diagnostics name the line and key") {
  const fs::path bad = temp_file("bad.cfg", "hops = 2\nwarp = 9\n");
  Outcome o = run_cli({"simulate", "--config", bad.string()});
  CHECK(o.code == 2);
  CHECK(o.err.find(":2") != std::string::npos);
  CHECK(o.err.find("warp") != std::string::npos);
  const fs::path dup = temp_file("dup.cfg", "hops = 2\nhops = 3\n");
  o = run_cli({"simulate", "--config", dup.string()});
  CHECK(o.code == 2);
  CHECK(o.err.find("duplicate") != std::string::npos);
  const fs::path val = temp_file("val.cfg", "hops = two\n");
  CHECK(run_cli({"simulate", "--config", val.string()}).code == 2);
  const fs::path ge = temp_file("ge.cfg", "policy = ge\nchannel = ch1\n");
  CHECK(run_cli({"simulate", "--config", ge.string()}).code == 2);
  CHECK(run_cli({"simulate", "--config", "/nonexistent/x.cfg"}).code == 2);
}

TEST_CASE("estimate replays a trace") {
  const fs::path tr = temp_file("trace.csv",
                                "block,n,x,received_flag\n0,100,80,1\n1,0,0,0\n2,100,60,1\n");
  Outcome o = run_cli({"estimate", "--trace", tr.string(), "--window", "4"});
  REQUIRE(o.code == 0);
  auto l = lines(o.out);
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "block,p_hat");
  CHECK(l[1].rfind("0,0.2", 0) == 0);
  CHECK(l[2] == l[1].replace(0, 1, "1"));
  CHECK(std::stod(l[3].substr(2)) == doctest::Approx(0.3));

  const fs::path lost = temp_file("lost.csv", "block,n,x,received_flag\n0,0,0,0\n");
  o = run_cli({"estimate", "--trace", lost.string()});
  CHECK(lines(o.out)[1] == "0,nan");

  const fs::path empty = temp_file("empty.csv", "block,n,x,received_flag\n");
  o = run_cli({"estimate", "--trace", empty.string()});
  CHECK(o.code == 0);
  CHECK(o.out == "block,p_hat\n");

  const fs::path broken = temp_file("broken.csv", "block,n,x,received_flag\n0,5,9,1\n");
  o = run_cli({"estimate", "--trace", broken.string()});
  CHECK(o.code == 2);
  CHECK(o.err.find(":2") != std::string::npos);
}

TEST_CASE("presets") {
  const Outcome list = run_cli({"preset", "--list"});
  CHECK(list.code == 0);
  const auto names = lines(list.out);
  CHECK(names == barcli::preset_names());
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());

  const Outcome f = run_cli({"preset", "fig7a"});
  REQUIRE(f.code == 0);
  const auto l = lines(f.out);
  CHECK(l[0] == "t,r,beta");
  CHECK(l.size() == 1 + 28);
  CHECK(run_cli({"preset", "--name", "fig7a"}).out == f.out);

  const Outcome g = run_cli({"preset", "gains-p02"});
  CHECK(lines(g.out)[0] == "hop,baseline,bar,gain_percent");
  CHECK(run_cli({"preset", "nope"}).code == 2);
  CHECK(run_cli({"preset"}).code == 2);
}

TEST_CASE("output files") {
  const fs::path out = fs::temp_directory_path() / "bar_cli_out.csv";
  fs::remove(out);
  const Outcome o = run_cli({"preset", "fig8a", "--out", out.string()});
  CHECK(o.code == 0);
  CHECK(o.out.empty());
  std::ifstream in(out);
  std::string first;
  std::getline(in, first);
  CHECK(first == "t,r,condition_number");
  CHECK(run_cli({"preset", "fig8a", "--out", "/nonexistent/dir/x.csv"}).code == 1);
}

TEST_CASE("csv helpers") {
  CHECK(barcli::csv_field("plain") == "plain");
  CHECK(barcli::csv_field("a,b") == "\"a,b\"");
  CHECK(barcli::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(barcli::format_real(0.1) == "0.10000000000000001");
  CHECK(barcli::format_real(std::nan("")) == "nan");
  std::ostringstream s;
  barcli::CsvWriter w(s);
  w.header({"a", "b"});
  CHECK(s.str() == "a,b\n");
  CHECK(barcli::parse_channel("ge:0.1,0.2,0.3,0.4").kind == BAR_CHANNEL_GE);
  CHECK(barcli::parse_channel("sin:0.4,0.1,100").period == 100);
  CHECK_THROWS_AS(barcli::parse_channel("iid"), barcli::ConfigError);
}

}  // TEST_SUITE
