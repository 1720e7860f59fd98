#include <fstream>

#include "json.hpp"
#include "moneygraph/scenario.hpp"

namespace moneygraph {
namespace {

using nlohmann::ordered_json;

struct Abort {
  std::string code;
  std::string message;
};

Params to_params(const KeyValues& kv) { return Params(kv.begin(), kv.end()); }

UnitId default_unit(const BalanceGraph& g, const std::optional<UnitId>& unit) {
  if (unit) return *unit;
  if (g.currencies().size() != 1) {
    throw Error(ErrorCode::BadParameter, "measure needs an explicit currency when " +
                                             std::to_string(g.currencies().size()) + " are declared");
  }
  return *g.currencies().begin();
}

std::int64_t evaluate(const BalanceGraph& g, const AssertStmt& a) {
  auto unit = default_unit(g, a.unit);
  switch (a.measure) {
    case Measure::broad_money:
      return broad_money(g, unit);
    case Measure::base_money:
      return base_money(g, unit);
    case Measure::net_money:
      return net_money(g, unit);
    case Measure::net_worth:
      return balance_sheet(g, a.agent, unit).net_worth;
  }
  return 0;
}

bool compare(std::int64_t actual, Comparison cmp, std::int64_t expected) {
  switch (cmp) {
    case Comparison::eq:
      return actual == expected;
    case Comparison::ge:
      return actual >= expected;
    case Comparison::le:
      return actual <= expected;
  }
  return false;
}

void write_file(const RunOptions& options, const std::string& path, const std::string& content) {
  if (!options.write_files) return;
  auto full = options.base_dir / path;
  std::error_code ec;
  if (full.has_parent_path()) std::filesystem::create_directories(full.parent_path(), ec);
  std::ofstream out(full, std::ios::binary);
  if (!out || !(out << content)) throw Abort{"ErrIo", "cannot write " + full.string()};
}

struct Runner {
  const RunOptions& options;
  RunTrace trace;
  BalanceGraph g = new_graph(Regime::fiat());
  std::uint64_t ops = 0;

  void apply(const std::string& name, const Params& params) {
    auto record = apply_op(g, name, params);
    record.seq = trace.log.size() + 1;
    trace.log.push_back(std::move(record));
  }

  void after_op(StepOutcome& step) {
    ++ops;
    step.measures = measure_all(g);
    for (const auto& r : step.measures) trace.series.push_back({ops, r});
  }

  void execute(const Statement& st, StepOutcome& step) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, RegimeStmt>) {
            g = new_graph(s.regime);
          } else if constexpr (std::is_same_v<T, UnitStmt>) {
            apply(s.commodity ? "declare_commodity" : "declare_currency", {{"id", s.id}});
          } else if constexpr (std::is_same_v<T, ConfigStmt>) {
            apply("set_config", to_params(s.flags));
          } else if constexpr (std::is_same_v<T, AgentStmt>) {
            Params p{{"name", s.name}, {"kind", std::string(to_string(s.kind))}};
            if (s.issues) p["issues"] = *s.issues;
            if (s.currency) p["currency"] = *s.currency;
            apply("add_agent", p);
          } else if constexpr (std::is_same_v<T, OpStmt>) {
            apply(s.op, to_params(s.params));
            after_op(step);
          } else if constexpr (std::is_same_v<T, AssertStmt>) {
            auto actual = evaluate(g, s);
            if (!compare(actual, s.cmp, s.value)) {
              throw Abort{"ErrAssertFailed", "expected " + std::to_string(s.value) + ", got " + std::to_string(actual)};
            }
          } else if constexpr (std::is_same_v<T, ExpectErrorStmt>) {
            try {
              apply(s.op.op, to_params(s.op.params));
            } catch (const Error& e) {
              if (e.code() != s.error) {
                throw Abort{"ErrUnexpected", "expected " + std::string(error_name(s.error)) + ", got " +
                                                 std::string(e.name()) + ": " + e.what()};
              }
              step.status = "error";
              step.code = std::string(e.name());
              step.message = e.what();
              return;
            }
            after_op(step);
            throw Abort{"ErrNoError", "expected " + std::string(error_name(s.error)) + ", operation succeeded"};
          } else {
            write_file(options, s.path, s.dot ? export_dot(g) : snapshot(g));
          }
        },
        st.body);
  }
};

}  // namespace

RunTrace run_scenario(const Scenario& scenario, const RunOptions& options) {
  Runner r{options, {}};
  for (const auto& st : scenario.statements) {
    StepOutcome step;
    step.line = st.line;
    step.statement = print_statement(st);
    step.status = "ok";
    std::optional<Abort> abort;
    try {
      r.execute(st, step);
    } catch (const Abort& a) {
      abort = a;
    } catch (const Error& e) {
      abort = Abort{"ErrUnexpected", std::string(e.name()) + ": " + e.what()};
    }
    if (abort) {
      step.status = "failed";
      step.code = abort->code;
      step.message = abort->message;
      r.trace.ok = false;
      r.trace.failure_code = abort->code;
      r.trace.failure_line = st.line;
      r.trace.failure_message = abort->message;
      r.trace.steps.push_back(std::move(step));
      break;
    }
    r.trace.steps.push_back(std::move(step));
  }
  r.trace.final_snapshot = snapshot(r.g);
  return std::move(r.trace);
}

std::string RunTrace::to_jsonl() const {
  std::string out;
  for (const auto& s : steps) {
    ordered_json j;
    j["line"] = s.line;
    j["statement"] = s.statement;
    j["status"] = s.status;
    if (!s.code.empty()) j["code"] = s.code;
    if (!s.message.empty()) j["message"] = s.message;
    if (!s.measures.empty()) {
      j["measures"] = ordered_json::array();
      for (const auto& m : s.measures) j["measures"].push_back(ordered_json::parse(m.to_json()));
    }
    out += j.dump() + "\n";
  }
  ordered_json result;
  result["result"] = ok ? "pass" : "fail";
  if (!ok) {
    result["code"] = failure_code;
    result["line"] = failure_line;
    result["message"] = failure_message;
  }
  result["ops"] = log.size();
  result["state_hash"] = state_hash(load_snapshot(final_snapshot));
  out += result.dump() + "\n";
  return out;
}

std::string RunTrace::to_csv() const {
  std::string out = "step,currency,base,broad,net\n";
  for (const auto& p : series) {
    out += std::to_string(p.step) + "," + p.report.currency + "," + std::to_string(p.report.base_money) + "," +
           std::to_string(p.report.broad_money) + "," + std::to_string(p.report.net_money) + "\n";
  }
  return out;
}

}  // namespace moneygraph
