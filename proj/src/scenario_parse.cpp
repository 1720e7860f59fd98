#include <algorithm>
#include <charconv>
#include <set>

#include "moneygraph/scenario.hpp"

namespace moneygraph {
namespace {

struct Token {
  std::string_view text;
  int column = 0;
};

struct Parser {
  std::set<AgentId> agents;
  std::set<UnitId> units;
  bool regime_seen = false;
  bool body_started = false;
};

[[noreturn]] void fail(int line, int column, const std::string& message) {
  throw ParseError(line, column, message);
}

std::vector<Token> tokenize(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    unsigned char c = static_cast<unsigned char>(line[i]);
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    std::size_t start = i;
    while (i < line.size()) {
      unsigned char d = static_cast<unsigned char>(line[i]);
      if (d == ' ' || d == '\t' || d == '\r') break;
      if (d < 0x21 || d > 0x7e) fail(line_no, static_cast<int>(i) + 1, "unexpected character");
      ++i;
    }
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

std::pair<std::string_view, std::string_view> split_kv(const Token& t, int line) {
  auto eq = t.text.find('=');
  if (eq == std::string_view::npos || eq == 0) fail(line, t.column, "expected key=value, got '" + std::string(t.text) + "'");
  return {t.text.substr(0, eq), t.text.substr(eq + 1)};
}

void expect_count(const std::vector<Token>& toks, std::size_t n, int line, const char* usage) {
  if (toks.size() != n) {
    int col = toks.size() > n ? toks[n].column : toks.back().column;
    fail(line, col, std::string("usage: ") + usage);
  }
}

UnitId unit_token(const Token& t, int line) {
  if (!is_unit_identifier(t.text)) fail(line, t.column, "expected uppercase identifier, got '" + std::string(t.text) + "'");
  return std::string(t.text);
}

bool value_matches(ParamType type, std::string_view v) {
  switch (type) {
    case ParamType::agent:
      return is_agent_identifier(v);
    case ParamType::unit:
      return is_unit_identifier(v);
    case ParamType::amount:
      return !v.empty() && v.size() <= 19 && std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; });
    case ParamType::rational:
      try {
        Rational::parse(v);
        return true;
      } catch (const Error&) {
        return false;
      }
    case ParamType::agent_kind:
      return parse_agent_kind(v).has_value();
    case ParamType::instrument:
      try {
        InstrumentKey::parse(v);
        return true;
      } catch (const Error&) {
        return false;
      }
    case ParamType::flag:
      return v == "true" || v == "false";
  }
  return false;
}

// error= is only accepted when `error_token` is given (expect_error).
OpStmt parse_op(const std::vector<Token>& toks, std::size_t first, int line, Parser& p,
                std::optional<Token>* error_token) {
  if (toks.size() <= first) fail(line, toks.back().column, "missing operation name");
  const auto& name = toks[first];
  const auto* spec = find_op(name.text);
  if (!spec) fail(line, name.column, "unknown operation '" + std::string(name.text) + "'");
  OpStmt op{spec->name, {}};
  std::set<std::string_view> seen;
  for (std::size_t i = first + 1; i < toks.size(); ++i) {
    auto [key, value] = split_kv(toks[i], line);
    if (key == "error" && error_token != nullptr) {
      if (error_token->has_value()) fail(line, toks[i].column, "duplicate error=");
      *error_token = toks[i];
      continue;
    }
    auto it = std::find_if(spec->params.begin(), spec->params.end(), [&](const ParamSpec& s) { return s.key == key; });
    if (it == spec->params.end()) {
      fail(line, toks[i].column, spec->name + " takes no parameter '" + std::string(key) + "'");
    }
    if (!seen.insert(key).second) fail(line, toks[i].column, "duplicate parameter '" + std::string(key) + "'");
    if (!value_matches(it->type, value)) {
      fail(line, toks[i].column + static_cast<int>(key.size()) + 1, "bad value '" + std::string(value) + "' for " + std::string(key));
    }
    bool introduces = spec->name == "add_agent" && key == "name";
    if (it->type == ParamType::agent && !introduces && error_token == nullptr &&
        !p.agents.contains(std::string(value))) {
      fail(line, toks[i].column + static_cast<int>(key.size()) + 1, "agent '" + std::string(value) + "' not declared");
    }
    op.params.emplace_back(std::string(key), std::string(value));
  }
  for (const auto& s : spec->params) {
    if (s.required && !seen.contains(s.key)) fail(line, name.column, spec->name + " requires " + s.key + "=");
  }
  return op;
}

void note_new_agents(const OpStmt& op, Parser& p) {
  if (op.op == "aggregate_sector") {
    for (const auto& [k, v] : op.params) {
      if (k == "kind") p.agents.insert(sector_agent_id(*parse_agent_kind(v)));
    }
  } else if (op.op == "add_agent") {
    for (const auto& [k, v] : op.params) {
      if (k == "name") p.agents.insert(v);
    }
  }
}

AssertStmt parse_assert(const std::vector<Token>& toks, int line) {
  expect_count(toks, 4, line, "assert <measure> <==|>=|<=> <int>");
  AssertStmt a;
  const auto& m = toks[1];
  std::string_view head = m.text;
  std::vector<std::string_view> args;
  if (auto open = head.find('('); open != std::string_view::npos) {
    if (head.back() != ')') fail(line, m.column, "unterminated measure argument");
    auto inner = head.substr(open + 1, head.size() - open - 2);
    head = head.substr(0, open);
    while (true) {
      auto comma = inner.find(',');
      args.push_back(inner.substr(0, comma));
      if (comma == std::string_view::npos) break;
      inner.remove_prefix(comma + 1);
    }
  }
  if (head == "broad_money" || head == "base_money" || head == "net_money") {
    a.measure = head == "broad_money" ? Measure::broad_money
                : head == "base_money" ? Measure::base_money
                                       : Measure::net_money;
    if (args.size() > 1) fail(line, m.column, "measure takes at most one currency");
    if (args.size() == 1) {
      if (!is_unit_identifier(args[0])) fail(line, m.column, "expected currency in measure argument");
      a.unit = std::string(args[0]);
    }
  } else if (head == "net_worth") {
    a.measure = Measure::net_worth;
    if (args.empty() || args.size() > 2) fail(line, m.column, "usage: net_worth(<agent>[,<UNIT>])");
    if (!is_agent_identifier(args[0])) fail(line, m.column, "expected agent in net_worth()");
    a.agent = std::string(args[0]);
    if (args.size() == 2) {
      if (!is_unit_identifier(args[1])) fail(line, m.column, "expected unit in net_worth()");
      a.unit = std::string(args[1]);
    }
  } else {
    fail(line, m.column, "unknown measure '" + std::string(head) + "'");
  }

  const auto& c = toks[2];
  if (c.text == "==") {
    a.cmp = Comparison::eq;
  } else if (c.text == ">=") {
    a.cmp = Comparison::ge;
  } else if (c.text == "<=") {
    a.cmp = Comparison::le;
  } else {
    fail(line, c.column, "expected ==, >= or <=");
  }

  const auto& v = toks[3];
  auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), a.value);
  if (ec != std::errc() || ptr != v.text.data() + v.text.size()) fail(line, v.column, "expected integer");
  return a;
}

}  // namespace

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("ErrParse: line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                         message),
      line_(line),
      column_(column),
      detail_(message) {}

Scenario parse_scenario(std::string_view text) {
  Scenario scenario;
  Parser p;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    auto toks = tokenize(raw, line_no);
    if (toks.empty()) continue;
    const auto& kw = toks[0];
    Statement st{line_no, {}};

    if (kw.text == "regime") {
      if (p.regime_seen) fail(line_no, kw.column, "regime declared twice");
      if (p.body_started) fail(line_no, kw.column, "regime must precede agents and operations");
      if (toks.size() < 2 || toks.size() > 3) fail(line_no, kw.column, "usage: regime <fiat|commodity|convertible> [full_backing]");
      Regime r;
      if (toks[1].text == "fiat") {
        r = Regime::fiat();
      } else if (toks[1].text == "commodity") {
        r = Regime::pure_commodity();
      } else if (toks[1].text == "convertible") {
        r = Regime::convertible(false);
      } else {
        fail(line_no, toks[1].column, "unknown regime '" + std::string(toks[1].text) + "'");
      }
      if (toks.size() == 3) {
        if (toks[2].text != "full_backing" || r.kind != Regime::Kind::convertible) {
          fail(line_no, toks[2].column, "full_backing applies to the convertible regime only");
        }
        r.full_backing = true;
      }
      p.regime_seen = true;
      st.body = RegimeStmt{r};
    } else if (kw.text == "currency" || kw.text == "commodity") {
      expect_count(toks, 2, line_no, "currency <ID> | commodity <ID>");
      auto id = unit_token(toks[1], line_no);
      if (!p.units.insert(id).second) fail(line_no, toks[1].column, "unit " + id + " declared twice");
      st.body = UnitStmt{kw.text == "commodity", id};
    } else if (kw.text == "config") {
      if (toks.size() < 2) fail(line_no, kw.column, "usage: config <flag>=<true|false> ...");
      ConfigStmt c;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        auto [key, value] = split_kv(toks[i], line_no);
        if (key != "cb_intraday_credit" && key != "treasury_overdraft") {
          fail(line_no, toks[i].column, "unknown config flag '" + std::string(key) + "'");
        }
        if (value != "true" && value != "false") fail(line_no, toks[i].column, "flags are true or false");
        c.flags.emplace_back(std::string(key), std::string(value));
      }
      st.body = std::move(c);
    } else if (kw.text == "agent") {
      if (toks.size() < 3) fail(line_no, kw.column, "usage: agent <name> kind=<kind> [issues=<CUR>] [currency=<CUR>]");
      AgentStmt a;
      if (!is_agent_identifier(toks[1].text)) fail(line_no, toks[1].column, "bad agent name '" + std::string(toks[1].text) + "'");
      a.name = std::string(toks[1].text);
      if (p.agents.contains(a.name)) fail(line_no, toks[1].column, "agent '" + a.name + "' declared twice");
      bool kind_seen = false;
      for (std::size_t i = 2; i < toks.size(); ++i) {
        auto [key, value] = split_kv(toks[i], line_no);
        if (key == "kind" && !kind_seen) {
          auto k = parse_agent_kind(value);
          if (!k) fail(line_no, toks[i].column + 5, "unknown kind '" + std::string(value) + "'");
          a.kind = *k;
          kind_seen = true;
        } else if (key == "issues" && !a.issues) {
          if (!is_unit_identifier(value)) fail(line_no, toks[i].column + 7, "expected currency id");
          a.issues = std::string(value);
        } else if (key == "currency" && !a.currency) {
          if (!is_unit_identifier(value)) fail(line_no, toks[i].column + 9, "expected currency id");
          a.currency = std::string(value);
        } else {
          fail(line_no, toks[i].column, "unexpected '" + std::string(key) + "='");
        }
      }
      if (!kind_seen) fail(line_no, kw.column, "agent requires kind=");
      if (a.issues && a.kind != AgentKind::central_bank) fail(line_no, kw.column, "only central banks take issues=");
      if (!a.issues && a.kind == AgentKind::central_bank) fail(line_no, kw.column, "central bank requires issues=");
      if (a.currency && a.kind != AgentKind::treasury) fail(line_no, kw.column, "only treasuries take currency=");
      if (a.issues) p.units.insert(*a.issues);
      p.agents.insert(a.name);
      st.body = std::move(a);
    } else if (kw.text == "op") {
      auto op = parse_op(toks, 1, line_no, p, nullptr);
      note_new_agents(op, p);
      st.body = std::move(op);
    } else if (kw.text == "assert") {
      auto a = parse_assert(toks, line_no);
      if (a.measure == Measure::net_worth && !p.agents.contains(a.agent)) {
        fail(line_no, toks[1].column, "agent '" + a.agent + "' not declared");
      }
      st.body = a;
    } else if (kw.text == "expect_error") {
      std::optional<Token> error_token;
      auto op = parse_op(toks, 1, line_no, p, &error_token);
      if (!error_token) fail(line_no, kw.column, "expect_error requires error=<ErrCode>");
      auto value = split_kv(*error_token, line_no).second;
      auto code = parse_error_name(value);
      if (!code) fail(line_no, error_token->column + 6, "unknown error code '" + std::string(value) + "'");
      st.body = ExpectErrorStmt{std::move(op), *code};
    } else if (kw.text == "snapshot" || kw.text == "dot") {
      expect_count(toks, 2, line_no, "snapshot <path> | dot <path>");
      st.body = OutputStmt{kw.text == "dot", std::string(toks[1].text)};
    } else {
      fail(line_no, kw.column, "unknown statement '" + std::string(kw.text) + "'");
    }

    if (!std::holds_alternative<RegimeStmt>(st.body)) p.body_started = true;
    scenario.statements.push_back(std::move(st));
  }
  return scenario;
}

// ---------------------------------------------------------------------------
// printing

namespace {

std::string join_params(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += " " + k + "=" + v;
  return out;
}

std::string measure_text(const AssertStmt& a) {
  std::string out;
  switch (a.measure) {
    case Measure::broad_money:
      out = "broad_money";
      break;
    case Measure::base_money:
      out = "base_money";
      break;
    case Measure::net_money:
      out = "net_money";
      break;
    case Measure::net_worth:
      out = "net_worth(" + a.agent + (a.unit ? "," + *a.unit : "") + ")";
      return out;
  }
  if (a.unit) out += "(" + *a.unit + ")";
  return out;
}

}  // namespace

std::string print_statement(const Statement& statement) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RegimeStmt>) {
          switch (s.regime.kind) {
            case Regime::Kind::pure_commodity:
              return "regime commodity";
            case Regime::Kind::convertible:
              return s.regime.full_backing ? "regime convertible full_backing" : "regime convertible";
            case Regime::Kind::fiat:
              break;
          }
          return "regime fiat";
        } else if constexpr (std::is_same_v<T, UnitStmt>) {
          return (s.commodity ? "commodity " : "currency ") + s.id;
        } else if constexpr (std::is_same_v<T, ConfigStmt>) {
          return "config" + join_params(s.flags);
        } else if constexpr (std::is_same_v<T, AgentStmt>) {
          std::string out = "agent " + s.name + " kind=" + std::string(to_string(s.kind));
          if (s.issues) out += " issues=" + *s.issues;
          if (s.currency) out += " currency=" + *s.currency;
          return out;
        } else if constexpr (std::is_same_v<T, OpStmt>) {
          return "op " + s.op + join_params(s.params);
        } else if constexpr (std::is_same_v<T, AssertStmt>) {
          const char* cmp = s.cmp == Comparison::eq ? "==" : s.cmp == Comparison::ge ? ">=" : "<=";
          return "assert " + measure_text(s) + " " + cmp + " " + std::to_string(s.value);
        } else if constexpr (std::is_same_v<T, ExpectErrorStmt>) {
          return "expect_error " + s.op.op + join_params(s.op.params) + " error=" + std::string(error_name(s.error));
        } else {
          return (s.dot ? "dot " : "snapshot ") + s.path;
        }
      },
      statement.body);
}

std::string print_scenario(const Scenario& scenario) {
  std::string out;
  for (const auto& st : scenario.statements) out += print_statement(st) + "\n";
  return out;
}

}  // namespace moneygraph
