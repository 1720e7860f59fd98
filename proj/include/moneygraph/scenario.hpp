#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "moneygraph/ledger.hpp"
#include "moneygraph/measures.hpp"
#include "moneygraph/operations.hpp"

namespace moneygraph {

// Line-oriented scenario language (.mgs). One statement per line, '#' starts
// a comment, blank lines are ignored:
//
//   regime <fiat|commodity|convertible> [full_backing]
//   currency <ID>            commodity <ID>
//   config <flag>=<true|false> ...
//   agent <name> kind=<kind> [issues=<CUR>] [currency=<CUR>]
//   op <opname> key=value ...
//   assert <measure> <==|>=|<=> <int>
//   expect_error <opname> key=value ... error=<ErrCode>
//   snapshot <path>          dot <path>
//
// Measures: broad_money, base_money, net_money, net_worth(<agent>), each with
// an optional explicit unit: broad_money(DOM), net_worth(h1,GOLD).

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct RegimeStmt {
  Regime regime;
  friend bool operator==(const RegimeStmt&, const RegimeStmt&) = default;
};
struct UnitStmt {
  bool commodity = false;
  UnitId id;
  friend bool operator==(const UnitStmt&, const UnitStmt&) = default;
};
struct ConfigStmt {
  KeyValues flags;
  friend bool operator==(const ConfigStmt&, const ConfigStmt&) = default;
};
struct AgentStmt {
  AgentId name;
  AgentKind kind = AgentKind::nonbank;
  std::optional<UnitId> issues;
  std::optional<UnitId> currency;
  friend bool operator==(const AgentStmt&, const AgentStmt&) = default;
};
struct OpStmt {
  std::string op;
  KeyValues params;
  friend bool operator==(const OpStmt&, const OpStmt&) = default;
};

enum class Measure { broad_money, base_money, net_money, net_worth };
enum class Comparison { eq, ge, le };

struct AssertStmt {
  Measure measure = Measure::broad_money;
  AgentId agent;  // net_worth only
  std::optional<UnitId> unit;
  Comparison cmp = Comparison::eq;
  std::int64_t value = 0;
  friend bool operator==(const AssertStmt&, const AssertStmt&) = default;
};
struct ExpectErrorStmt {
  OpStmt op;
  ErrorCode error = ErrorCode::BadParameter;
  friend bool operator==(const ExpectErrorStmt&, const ExpectErrorStmt&) = default;
};
struct OutputStmt {
  bool dot = false;  // false: snapshot
  std::string path;
  friend bool operator==(const OutputStmt&, const OutputStmt&) = default;
};

using StatementBody =
    std::variant<RegimeStmt, UnitStmt, ConfigStmt, AgentStmt, OpStmt, AssertStmt, ExpectErrorStmt, OutputStmt>;

struct Statement {
  int line = 0;
  StatementBody body;

  // Structural equality; source line numbers do not take part.
  friend bool operator==(const Statement& a, const Statement& b) { return a.body == b.body; }
};

struct Scenario {
  std::vector<Statement> statements;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ParseError at the first malformed line.
Scenario parse_scenario(std::string_view text);

/// Canonical text: one statement per line, single spaces, no comments.
std::string print_scenario(const Scenario& scenario);
std::string print_statement(const Statement& statement);

// ---------------------------------------------------------------------------
// runner

struct StepOutcome {
  int line = 0;
  std::string statement;
  std::string status;  // "ok", "error" (op failed), "failed" (run aborted here)
  std::string code;
  std::string message;
  std::vector<MeasureReport> measures;  // after each op
};

struct MeasurePoint {
  std::uint64_t step = 0;
  MeasureReport report;
};

struct RunTrace {
  bool ok = true;
  std::string failure_code;  // ErrAssertFailed, ErrUnexpected, ErrNoError, ErrIo
  int failure_line = 0;
  std::string failure_message;
  std::vector<StepOutcome> steps;
  std::vector<MeasurePoint> series;
  std::vector<OpRecord> log;
  std::string final_snapshot;

  std::string to_jsonl() const;
  /// "step,currency,base,broad,net" rows, one per op and currency.
  std::string to_csv() const;
};

struct RunOptions {
  std::filesystem::path base_dir = ".";  // snapshot/dot paths resolve here
  bool write_files = true;
};

/// Executes the statements in order on a fresh graph. Aborts at the first
/// failed assertion or unexpected error; the trace records where.
RunTrace run_scenario(const Scenario& scenario, const RunOptions& options = {});

}  // namespace moneygraph
