#include <charconv>

#include "json.hpp"
#include "moneygraph/operations.hpp"
#include "moneygraph/pegsim.hpp"

namespace moneygraph {
namespace {

using P = ParamType;

std::vector<OpSpec> build_catalog() {
  return {
      {"add_agent", {{"name", P::agent, true}, {"kind", P::agent_kind, true}, {"issues", P::unit, false}, {"currency", P::unit, false}}, true},
      {"declare_currency", {{"id", P::unit, true}}, true},
      {"declare_commodity", {{"id", P::unit, true}}, true},
      {"set_config", {{"cb_intraday_credit", P::flag, false}, {"treasury_overdraft", P::flag, false}}, true},
      {"mint_commodity", {{"agent", P::agent, true}, {"commodity", P::unit, true}, {"qty", P::amount, true}}, false},
      {"transfer_commodity", {{"from", P::agent, true}, {"to", P::agent, true}, {"commodity", P::unit, true}, {"qty", P::amount, true}}, false},
      {"issue_convertible_note", {{"issuer", P::agent, true}, {"holder", P::agent, true}, {"amount", P::amount, true}, {"backing", P::unit, true}, {"rate", P::rational, true}, {"currency", P::unit, false}}, false},
      {"create_loan", {{"bank", P::agent, true}, {"borrower", P::agent, true}, {"amount", P::amount, true}, {"currency", P::unit, false}}, false},
      {"repay_loan", {{"bank", P::agent, false}, {"borrower", P::agent, false}, {"loan", P::instrument, false}, {"amount", P::amount, true}, {"currency", P::unit, false}}, false},
      {"pay_deposit", {{"payer", P::agent, true}, {"payee", P::agent, true}, {"amount", P::amount, true}, {"currency", P::unit, false}, {"payer_bank", P::agent, false}, {"payee_bank", P::agent, false}}, false},
      {"withdraw_cash", {{"holder", P::agent, true}, {"amount", P::amount, true}, {"bank", P::agent, false}, {"currency", P::unit, false}}, false},
      {"deposit_cash", {{"holder", P::agent, true}, {"amount", P::amount, true}, {"bank", P::agent, false}, {"currency", P::unit, false}}, false},
      {"cb_open_market_purchase", {{"cb", P::agent, true}, {"bank", P::agent, true}, {"amount", P::amount, true}, {"bond", P::instrument, false}, {"treasury", P::agent, false}}, false},
      {"treasury_issue_bond", {{"treasury", P::agent, true}, {"bank", P::agent, true}, {"amount", P::amount, true}}, false},
      {"treasury_spend", {{"treasury", P::agent, true}, {"recipient", P::agent, true}, {"amount", P::amount, true}, {"bank", P::agent, false}}, false},
      {"tax", {{"treasury", P::agent, true}, {"payer", P::agent, true}, {"amount", P::amount, true}, {"bank", P::agent, false}}, false},
      {"redeem", {{"holder", P::agent, true}, {"amount", P::amount, true}, {"reserve", P::unit, true}, {"rate", P::rational, true}, {"currency", P::unit, false}, {"issuer", P::agent, false}}, false},
      {"consolidate", {{"cb", P::agent, true}, {"treasury", P::agent, true}}, true},
      {"aggregate_sector", {{"kind", P::agent_kind, true}}, true},
  };
}

Error bad_param(const std::string& what) { return Error(ErrorCode::BadParameter, what); }

bool param_ok(ParamType type, const std::string& value) {
  switch (type) {
    case P::agent:
      return is_agent_identifier(value);
    case P::unit:
      return is_unit_identifier(value);
    case P::amount:
      return !value.empty() && value.size() <= 19 &&
             std::all_of(value.begin(), value.end(), [](char c) { return c >= '0' && c <= '9'; });
    case P::rational:
      try {
        Rational::parse(value);
        return true;
      } catch (const Error&) {
        return false;
      }
    case P::agent_kind:
      return parse_agent_kind(value).has_value();
    case P::instrument:
      try {
        InstrumentKey::parse(value);
        return true;
      } catch (const Error&) {
        return false;
      }
    case P::flag:
      return value == "true" || value == "false";
  }
  return false;
}

class Args {
 public:
  Args(const BalanceGraph& g, const Params& p) : g_(g), p_(p) {}

  const std::string& text(const std::string& key) const {
    auto it = p_.find(key);
    if (it == p_.end()) throw bad_param("missing parameter '" + key + "'");
    return it->second;
  }
  std::optional<std::string> optional(const std::string& key) const {
    auto it = p_.find(key);
    if (it == p_.end()) return std::nullopt;
    return it->second;
  }
  Amount amount(const std::string& key) const {
    const auto& s = text(key);
    Amount v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw Error(ErrorCode::Overflow, key + " out of range");
    return v;
  }
  Rational rational(const std::string& key) const { return Rational::parse(text(key)); }
  bool flag(const std::string& key, bool fallback) const {
    auto v = optional(key);
    return v ? *v == "true" : fallback;
  }
  UnitId currency() const {
    if (auto c = optional("currency")) return *c;
    if (g_.currencies().size() == 1) return *g_.currencies().begin();
    throw bad_param("parameter 'currency' required when the graph has several currencies");
  }

 private:
  const BalanceGraph& g_;
  const Params& p_;
};

std::vector<Delta> compile(const BalanceGraph& g, const std::string& name, const Args& a) {
  if (name == "mint_commodity") return plan_mint_commodity(g, a.text("agent"), a.text("commodity"), a.amount("qty"));
  if (name == "transfer_commodity") {
    return plan_transfer_commodity(g, a.text("from"), a.text("to"), a.text("commodity"), a.amount("qty"));
  }
  if (name == "issue_convertible_note") {
    return plan_issue_convertible_note(g, a.text("issuer"), a.text("holder"), a.amount("amount"),
                                       a.text("backing"), a.rational("rate"), a.optional("currency"));
  }
  if (name == "create_loan") {
    return plan_create_loan(g, a.text("bank"), a.text("borrower"), a.amount("amount"), a.currency());
  }
  if (name == "repay_loan") {
    auto key = a.optional("loan") ? InstrumentKey::parse(a.text("loan"))
                                  : loan_key(a.text("bank"), a.text("borrower"), a.currency());
    return plan_repay_loan(g, key, a.amount("amount"));
  }
  if (name == "pay_deposit") {
    return plan_pay_deposit(g, a.text("payer"), a.text("payee"), a.amount("amount"), a.currency(),
                            BankChoice{a.optional("payer_bank"), a.optional("payee_bank")});
  }
  if (name == "withdraw_cash") {
    return plan_withdraw_cash(g, a.text("holder"), a.amount("amount"), a.currency(), a.optional("bank"));
  }
  if (name == "deposit_cash") {
    return plan_deposit_cash(g, a.text("holder"), a.amount("amount"), a.currency(), a.optional("bank"));
  }
  if (name == "cb_open_market_purchase") {
    const auto& cb = a.text("cb");
    InstrumentKey bond;
    if (auto id = a.optional("bond")) {
      bond = InstrumentKey::parse(*id);
    } else {
      const auto& central = g.agent(cb);
      if (!central.issues) throw Error(ErrorCode::KindMismatch, "'" + cb + "' is not a central bank");
      auto treasury = a.optional("treasury");
      if (!treasury) treasury = g.treasury_of(*central.issues);
      if (!treasury) throw Error(ErrorCode::MissingAgent, "no treasury for " + *central.issues);
      bond = bond_key(*treasury, a.text("bank"), *central.issues);
    }
    return plan_cb_open_market_purchase(g, cb, a.text("bank"), bond, a.amount("amount"));
  }
  if (name == "treasury_issue_bond") return plan_treasury_issue_bond(g, a.text("treasury"), a.text("bank"), a.amount("amount"));
  if (name == "treasury_spend") {
    return plan_treasury_spend(g, a.text("treasury"), a.text("recipient"), a.amount("amount"), a.optional("bank"));
  }
  if (name == "tax") return plan_tax(g, a.text("treasury"), a.text("payer"), a.amount("amount"), a.optional("bank"));
  if (name == "redeem") {
    PegConfig peg{a.currency(), a.text("reserve"), a.rational("rate"), 0};
    return plan_redeem(g, a.text("holder"), a.amount("amount"), peg, a.optional("issuer"));
  }
  throw Error(ErrorCode::UnknownOperation, "unknown operation '" + name + "'");
}

void apply_structural(BalanceGraph& g, const std::string& name, const Args& a) {
  if (name == "add_agent") {
    g.add_agent(a.text("name"), *parse_agent_kind(a.text("kind")), a.optional("issues"), a.optional("currency"));
  } else if (name == "declare_currency") {
    g.declare_currency(a.text("id"));
  } else if (name == "declare_commodity") {
    g.declare_commodity(a.text("id"));
  } else if (name == "set_config") {
    GraphConfig c = g.config();
    c.cb_intraday_credit = a.flag("cb_intraday_credit", c.cb_intraday_credit);
    c.treasury_overdraft = a.flag("treasury_overdraft", c.treasury_overdraft);
    g.set_config(c);
  } else if (name == "consolidate") {
    g = consolidate(g, a.text("cb"), a.text("treasury"));
  } else if (name == "aggregate_sector") {
    g = aggregate_sector(g, *parse_agent_kind(a.text("kind")));
  }
}

std::int64_t parse_signed(const nlohmann::json& j) {
  if (!j.is_string()) throw Error(ErrorCode::BadParameter, "delta amounts are decimal strings");
  const auto& s = j.get_ref<const std::string&>();
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error(ErrorCode::BadParameter, "bad delta amount");
  return v;
}

}  // namespace

const std::vector<OpSpec>& op_catalog() {
  static const std::vector<OpSpec> catalog = build_catalog();
  return catalog;
}

const OpSpec* find_op(std::string_view name) {
  for (const auto& spec : op_catalog()) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

OpRecord apply_op(BalanceGraph& g, std::string_view name, const Params& params) {
  const auto* spec = find_op(name);
  if (!spec) throw Error(ErrorCode::UnknownOperation, "unknown operation '" + std::string(name) + "'");
  for (const auto& [key, value] : params) {
    auto it = std::find_if(spec->params.begin(), spec->params.end(), [&](const ParamSpec& p) { return p.key == key; });
    if (it == spec->params.end()) throw bad_param(spec->name + " takes no parameter '" + key + "'");
    if (!param_ok(it->type, value)) throw bad_param("bad value '" + value + "' for " + key);
  }
  for (const auto& p : spec->params) {
    if (p.required && !params.contains(p.key)) throw bad_param(spec->name + " requires '" + p.key + "'");
  }

  OpRecord record{0, spec->name, params, {}};
  Args args(g, params);
  if (spec->structural) {
    apply_structural(g, spec->name, args);
  } else {
    record.deltas = compile(g, spec->name, args);
    g.post(record.deltas);
  }
  return record;
}

void replay(BalanceGraph& g, const OpRecord& record) {
  const auto* spec = find_op(record.name);
  if (!spec) throw Error(ErrorCode::UnknownOperation, "unknown operation '" + record.name + "'");
  if (spec->structural) {
    apply_op(g, record.name, record.params);
  } else {
    g.post(record.deltas);
  }
}

std::string OpRecord::to_json_line() const {
  nlohmann::ordered_json j;
  j["seq"] = seq;
  j["name"] = name;
  j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : params) j["params"][k] = v;
  j["deltas"] = nlohmann::ordered_json::array();
  for (const auto& d : deltas) {
    nlohmann::ordered_json e;
    if (const auto* edge = std::get_if<EdgeDelta>(&d)) {
      e["type"] = "edge";
      e["id"] = edge->key.id();
      e["change"] = std::to_string(edge->change);
    } else if (const auto* c = std::get_if<CommodityDelta>(&d)) {
      e["type"] = "commodity";
      e["agent"] = c->agent;
      e["commodity"] = c->commodity;
      e["change"] = std::to_string(c->change);
    } else {
      const auto& m = std::get<MintDelta>(d);
      e["type"] = "mint";
      e["agent"] = m.agent;
      e["commodity"] = m.commodity;
      e["quantity"] = std::to_string(m.quantity);
    }
    j["deltas"].push_back(std::move(e));
  }
  return j.dump();
}

OpRecord OpRecord::from_json_line(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    OpRecord r;
    r.seq = j.at("seq").get<std::uint64_t>();
    r.name = j.at("name").get<std::string>();
    for (const auto& [k, v] : j.at("params").items()) r.params[k] = v.get<std::string>();
    for (const auto& e : j.at("deltas")) {
      auto type = e.at("type").get<std::string>();
      if (type == "edge") {
        r.deltas.push_back(EdgeDelta{InstrumentKey::parse(e.at("id").get<std::string>()), parse_signed(e.at("change"))});
      } else if (type == "commodity") {
        r.deltas.push_back(CommodityDelta{e.at("agent").get<std::string>(), e.at("commodity").get<std::string>(),
                                          parse_signed(e.at("change"))});
      } else if (type == "mint") {
        r.deltas.push_back(MintDelta{e.at("agent").get<std::string>(), e.at("commodity").get<std::string>(),
                                     parse_signed(e.at("quantity"))});
      } else {
        throw Error(ErrorCode::BadParameter, "unknown delta type '" + type + "'");
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadParameter, std::string("malformed op record: ") + e.what());
  }
}

}  // namespace moneygraph
