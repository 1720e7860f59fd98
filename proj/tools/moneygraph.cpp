#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "moneygraph/pegsim.hpp"
#include "moneygraph/scenario.hpp"
#include "moneygraph/service.hpp"

namespace fs = std::filesystem;
namespace mg = moneygraph;

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  return out && (out << content);
}

struct RunArgs {
  std::string file;
  std::string trace;
  std::string csv;
  std::string dot;
  std::string snapshot;
  std::string out_dir = ".";
  bool quiet = false;
};

int cmd_run(const RunArgs& a) {
  auto text = read_file(a.file);
  if (!text) {
    std::cerr << "moneygraph: " << a.file << ": no such file\n";
    return 1;
  }
  mg::Scenario scenario;
  try {
    scenario = mg::parse_scenario(*text);
  } catch (const mg::ParseError& e) {
    std::cerr << a.file << ":" << e.line() << ":" << e.column() << ": ErrParse: " << e.detail() << "\n";
    return 1;
  }
  mg::RunOptions options;
  options.base_dir = a.out_dir;
  auto trace = mg::run_scenario(scenario, options);

  bool io_ok = true;
  auto emit = [&](const std::string& path, const std::string& content) {
    if (!path.empty() && !write_file(path, content)) {
      std::cerr << "moneygraph: cannot write " << path << "\n";
      io_ok = false;
    }
  };
  emit(a.trace, trace.to_jsonl());
  emit(a.csv, trace.to_csv());
  emit(a.snapshot, trace.final_snapshot);
  if (!a.dot.empty()) emit(a.dot, mg::export_dot(mg::load_snapshot(trace.final_snapshot)));

  if (!trace.ok) {
    std::cerr << a.file << ":" << trace.failure_line << ": " << trace.failure_code << ": " << trace.failure_message
              << "\n";
    return 1;
  }
  if (!a.quiet) {
    std::cout << "ok " << a.file << ": " << trace.steps.size() << " statements, " << trace.log.size()
              << " operations\n";
  }
  return io_ok ? 0 : 1;
}

struct PegArgs {
  std::int64_t reserves = 0;
  std::string rate = "1";
  std::string deltas = "+1:1/2,-1:1/2";
  std::uint64_t horizon = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  bool oracle = false;
  std::string csv;
};

int cmd_pegsim(const PegArgs& a) {
  try {
    mg::PegConfig peg{"DOM", "RES", mg::Rational::parse(a.rate), a.reserves};
    mg::DemandProcess demand{mg::parse_deltas(a.deltas), a.horizon, a.trials, a.seed};
    auto outcome = mg::simulate(peg, demand);
    auto j = nlohmann::ordered_json::parse(outcome.to_json());
    if (a.oracle) {
      mg::Rational p;
      std::string method = "enumeration";
      try {
        p = mg::absorption_oracle(a.reserves, demand.steps, a.horizon);
      } catch (const mg::Error& e) {
        if (e.code() != mg::ErrorCode::TooLarge) throw;
        method = "dp";
        p = mg::absorption_dp(a.reserves, demand.steps, a.horizon);
      }
      double pd = p.to_double();
      double freq = outcome.frequency.to_double();
      double sigma = std::sqrt(pd * (1 - pd) / static_cast<double>(outcome.trials));
      nlohmann::ordered_json o;
      o["method"] = method;
      o["probability"] = p.str();
      o["probability_decimal"] = pd;
      o["deviation"] = std::abs(freq - pd);
      o["sigma"] = sigma;
      o["within_3_sigma"] = std::abs(freq - pd) <= 3 * sigma;
      j["oracle"] = o;
    }
    std::cout << j.dump() << "\n";
    if (!a.csv.empty() && !write_file(a.csv, outcome.to_csv())) {
      std::cerr << "moneygraph: cannot write " << a.csv << "\n";
      return 1;
    }
    return 0;
  } catch (const mg::Error& e) {
    std::cerr << "moneygraph pegsim: " << e.name() << ": " << e.what() << "\n";
    return 2;
  }
}

int cmd_fmt(const std::string& file) {
  auto text = read_file(file);
  if (!text) {
    std::cerr << "moneygraph: " << file << ": no such file\n";
    return 1;
  }
  try {
    std::cout << mg::print_scenario(mg::parse_scenario(*text));
    return 0;
  } catch (const mg::ParseError& e) {
    std::cerr << file << ":" << e.line() << ":" << e.column() << ": ErrParse: " << e.detail() << "\n";
    return 1;
  }
}

int cmd_check(const std::string& file) {
  auto text = read_file(file);
  if (!text) {
    std::cerr << "moneygraph: " << file << ": no such file\n";
    return 1;
  }
  try {
    auto violations = mg::check_invariants(mg::load_snapshot(*text));
    for (const auto& v : violations) {
      std::cout << v.code << " " << (v.unit.empty() ? "-" : v.unit) << " " << (v.subject.empty() ? "-" : v.subject)
                << ": " << v.message << "\n";
    }
    if (violations.empty()) std::cout << "ok\n";
    return violations.empty() ? 0 : 1;
  } catch (const mg::Error& e) {
    std::cerr << file << ": " << e.name() << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moneygraph: balance-sheet money simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "execute a .mgs scenario");
  run_cmd->add_option("file", run.file, "scenario file")->required();
  run_cmd->add_option("--trace", run.trace, "write JSONL trace");
  run_cmd->add_option("--csv", run.csv, "write measure time series");
  run_cmd->add_option("--dot", run.dot, "write final graph as DOT");
  run_cmd->add_option("--snapshot", run.snapshot, "write final snapshot");
  run_cmd->add_option("--out-dir", run.out_dir, "directory for snapshot/dot statements");
  run_cmd->add_flag("-q,--quiet", run.quiet, "no summary line on success");

  PegArgs peg;
  auto* peg_cmd = app.add_subcommand("pegsim", "Monte Carlo peg depletion");
  peg_cmd->add_option("--reserves", peg.reserves, "initial reserves")->required();
  peg_cmd->add_option("--rate", peg.rate, "reserve units per domestic unit (p/q)");
  peg_cmd->add_option("--deltas", peg.deltas, "demand distribution, e.g. +1:1/2,-1:1/2");
  peg_cmd->add_option("--horizon", peg.horizon, "steps per trial")->required();
  peg_cmd->add_option("--trials", peg.trials, "number of walks")->required();
  peg_cmd->add_option("--seed", peg.seed, "PRNG seed (default 0)");
  peg_cmd->add_flag("--oracle", peg.oracle, "also compute the exact probability");
  peg_cmd->add_option("--csv", peg.csv, "write per-trial depletion steps");

  std::optional<int> port;
  std::string host = "127.0.0.1";
  auto* serve_cmd = app.add_subcommand("serve", "run the session API");
  serve_cmd->add_option("--port", port, "listen port (default $MONEYGRAPH_PORT or 8080)");
  serve_cmd->add_option("--host", host, "bind address (default 127.0.0.1)");

  std::string fmt_file;
  auto* fmt_cmd = app.add_subcommand("fmt", "print a scenario in canonical form");
  fmt_cmd->add_option("file", fmt_file)->required();

  std::string check_file;
  auto* check_cmd = app.add_subcommand("check", "check invariants of a snapshot");
  check_cmd->add_option("file", check_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*run_cmd) return cmd_run(run);
  if (*peg_cmd) return cmd_pegsim(peg);
  if (*fmt_cmd) return cmd_fmt(fmt_file);
  if (*check_cmd) return cmd_check(check_file);
  if (*serve_cmd) {
    int p = mg::resolve_port(port);
    std::cerr << "moneygraph: serving on http://" << host << ":" << p << "\n";
    if (!mg::serve(host, p)) {
      std::cerr << "moneygraph: cannot listen on " << host << ":" << p << "\n";
      return 1;
    }
    return 0;
  }
  return 2;
}
