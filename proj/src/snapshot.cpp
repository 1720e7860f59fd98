#include <charconv>
#include <cstdio>

#include "json.hpp"
#include "moneygraph/ledger.hpp"

namespace moneygraph {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string amount_text(Amount v) { return std::to_string(v); }

Error bad(const std::string& what) { return Error(ErrorCode::Snapshot, "snapshot: " + what); }

Amount parse_amount(const nlohmann::json& j, const char* field) {
  if (!j.is_string()) throw bad(std::string(field) + " must be a decimal string");
  const auto& s = j.get_ref<const std::string&>();
  Amount value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw bad(std::string(field) + " is not an integer: '" + s + "'");
  }
  return value;
}

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw bad(std::string("missing field '") + name + "'");
  return j.at(name);
}

std::string text_field(const nlohmann::json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_string()) throw bad(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

// Field order is fixed: regime, config, currencies, commodities, agents,
// instruments. Agents and instruments are sorted by id; amounts are decimal
// strings.
std::string snapshot(const BalanceGraph& g) {
  ordered_json root;
  root["regime"] = {{"kind", g.regime().kind == Regime::Kind::fiat             ? "fiat"
                             : g.regime().kind == Regime::Kind::convertible ? "convertible"
                                                                            : "pure_commodity"},
                    {"full_backing", g.regime().full_backing}};
  root["config"] = {{"cb_intraday_credit", g.config().cb_intraday_credit},
                    {"treasury_overdraft", g.config().treasury_overdraft}};
  root["currencies"] = ordered_json::array();
  for (const auto& c : g.currencies()) root["currencies"].push_back(c);
  root["commodities"] = ordered_json::array();
  for (const auto& [id, supply] : g.commodity_supply()) {
    root["commodities"].push_back({{"id", id}, {"supply", amount_text(supply)}});
  }

  root["agents"] = ordered_json::array();
  for (const auto& [id, agent] : g.agents()) {
    ordered_json a;
    a["id"] = id;
    a["kind"] = to_string(agent.kind);
    if (agent.issues) a["issues"] = *agent.issues;
    if (agent.currency) a["currency"] = *agent.currency;
    a["holdings"] = ordered_json::object();
    for (const auto& [commodity, qty] : agent.commodities) a["holdings"][commodity] = amount_text(qty);
    a["positions"] = ordered_json::object();
    for (const auto& [currency, pos] : g.positions(id)) {
      a["positions"][currency] = {{"assets", amount_text(pos.assets)},
                                  {"liabilities", amount_text(pos.liabilities)}};
    }
    root["agents"].push_back(std::move(a));
  }

  root["instruments"] = ordered_json::array();
  for (const auto& [id, inst] : g.instruments()) {
    ordered_json e;
    e["id"] = id;
    e["kind"] = to_string(inst.key.kind);
    e["debtor"] = inst.key.debtor;
    e["creditor"] = inst.key.creditor;
    e["currency"] = inst.key.currency;
    e["amount"] = amount_text(inst.amount);
    if (inst.key.redemption) {
      e["redemption"] = {{"target", inst.key.redemption->target},
                         {"rate", inst.key.redemption->rate.str()}};
    }
    root["instruments"].push_back(std::move(e));
  }
  return root.dump(2) + "\n";
}

// Restores state verbatim, including cached positions, so a corrupted
// snapshot loads and is then caught by check_invariants().
BalanceGraph load_snapshot(std::string_view text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw bad(std::string("malformed JSON: ") + e.what());
  }

  try {
    const auto& regime = field(root, "regime");
    auto kind = text_field(regime, "kind");
    const auto& full = field(regime, "full_backing");
    if (!full.is_boolean()) throw bad("full_backing must be a boolean");
    Regime r;
    if (kind == "fiat") {
      r = Regime::fiat();
    } else if (kind == "pure_commodity") {
      r = Regime::pure_commodity();
    } else if (kind == "convertible") {
      r = Regime::convertible(full.get<bool>());
    } else {
      throw bad("unknown regime '" + kind + "'");
    }

    GraphConfig config;
    const auto& cfg = field(root, "config");
    for (auto [name, slot] : {std::pair{"cb_intraday_credit", &config.cb_intraday_credit},
                              std::pair{"treasury_overdraft", &config.treasury_overdraft}}) {
      const auto& v = field(cfg, name);
      if (!v.is_boolean()) throw bad(std::string(name) + " must be a boolean");
      *slot = v.get<bool>();
    }

    BalanceGraph g(r, config);
    const auto& currencies = field(root, "currencies");
    if (!currencies.is_array()) throw bad("currencies must be an array");
    for (const auto& c : currencies) {
      if (!c.is_string()) throw bad("currency ids are strings");
      g.declare_currency(c.get<std::string>());
    }
    const auto& commodities = field(root, "commodities");
    if (!commodities.is_array()) throw bad("commodities must be an array");
    for (const auto& c : commodities) {
      auto id = text_field(c, "id");
      g.declare_commodity(id);
      g.commodity_supply_[id] = parse_amount(field(c, "supply"), "supply");
    }

    const auto& agents = field(root, "agents");
    if (!agents.is_array()) throw bad("agents must be an array");
    for (const auto& a : agents) {
      Agent agent;
      agent.id = text_field(a, "id");
      if (!is_agent_identifier(agent.id)) throw bad("bad agent id '" + agent.id + "'");
      if (g.agents_.contains(agent.id)) throw bad("duplicate agent '" + agent.id + "'");
      auto k = parse_agent_kind(text_field(a, "kind"));
      if (!k) throw bad("unknown agent kind");
      agent.kind = *k;
      if (a.contains("issues")) agent.issues = text_field(a, "issues");
      if (a.contains("currency")) agent.currency = text_field(a, "currency");
      const auto& holdings = field(a, "holdings");
      if (!holdings.is_object()) throw bad("holdings must be an object");
      for (const auto& [commodity, qty] : holdings.items()) {
        agent.commodities[commodity] = parse_amount(qty, "holding");
      }
      const auto& positions = field(a, "positions");
      if (!positions.is_object()) throw bad("positions must be an object");
      for (const auto& [currency, pos] : positions.items()) {
        g.positions_[agent.id][currency] =
            Position{parse_amount(field(pos, "assets"), "assets"),
                     parse_amount(field(pos, "liabilities"), "liabilities")};
      }
      g.agents_.emplace(agent.id, std::move(agent));
    }

    const auto& instruments = field(root, "instruments");
    if (!instruments.is_array()) throw bad("instruments must be an array");
    for (const auto& e : instruments) {
      InstrumentKey key;
      auto k = parse_instrument_kind(text_field(e, "kind"));
      if (!k) throw bad("unknown instrument kind");
      key.kind = *k;
      key.debtor = text_field(e, "debtor");
      key.creditor = text_field(e, "creditor");
      key.currency = text_field(e, "currency");
      if (e.contains("redemption")) {
        const auto& red = e.at("redemption");
        key.redemption = Redemption{text_field(red, "target"), Rational::parse(text_field(red, "rate"))};
      }
      auto id = text_field(e, "id");
      if (g.instruments_.contains(id)) throw bad("duplicate instrument '" + id + "'");
      g.adjacency_[key.debtor].insert(id);
      g.adjacency_[key.creditor].insert(id);
      g.instruments_.emplace(id, Instrument{std::move(key), parse_amount(field(e, "amount"), "amount")});
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Snapshot) throw;
    throw bad(e.what());
  }
}

std::string state_hash(const BalanceGraph& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : snapshot(g)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace moneygraph
