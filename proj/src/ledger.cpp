#include "moneygraph/ledger.hpp"

#include <algorithm>
#include <array>

#include "ledger_rules.hpp"

namespace moneygraph {
namespace {

constexpr std::array<std::string_view, 5> kAgentKindNames{"central_bank", "treasury", "bank",
                                                          "nonbank", "foreign"};
constexpr std::array<std::string_view, 6> kInstrumentKindNames{
    "note", "reserve", "deposit", "loan", "bond", "convertible_note"};

const std::set<std::string> kNoEdges;
const std::map<UnitId, Position> kNoPositions;

Error unknown_agent(const AgentId& id) {
  return Error(ErrorCode::UnknownAgent, "unknown agent '" + id + "'");
}

}  // namespace

std::string_view to_string(AgentKind kind) { return kAgentKindNames[static_cast<int>(kind)]; }
std::string_view to_string(InstrumentKind kind) {
  return kInstrumentKindNames[static_cast<int>(kind)];
}

std::optional<AgentKind> parse_agent_kind(std::string_view text) {
  for (std::size_t i = 0; i < kAgentKindNames.size(); ++i) {
    if (kAgentKindNames[i] == text) return static_cast<AgentKind>(i);
  }
  return std::nullopt;
}

std::optional<InstrumentKind> parse_instrument_kind(std::string_view text) {
  for (std::size_t i = 0; i < kInstrumentKindNames.size(); ++i) {
    if (kInstrumentKindNames[i] == text) return static_cast<InstrumentKind>(i);
  }
  return std::nullopt;
}

bool is_agent_identifier(std::string_view text) {
  if (text.empty() || text.size() > 64) return false;
  auto head = text.front();
  if (!((head >= 'a' && head <= 'z') || head == '_')) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

bool is_unit_identifier(std::string_view text) {
  if (text.empty() || text.size() > 32) return false;
  if (!(text.front() >= 'A' && text.front() <= 'Z')) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

bool is_government_kind(AgentKind kind) {
  return kind == AgentKind::central_bank || kind == AgentKind::treasury;
}

std::string Regime::name() const {
  switch (kind) {
    case Kind::pure_commodity:
      return "pure_commodity";
    case Kind::convertible:
      return full_backing ? "convertible(full_backing)" : "convertible";
    case Kind::fiat:
      break;
  }
  return "fiat";
}

// ---------------------------------------------------------------------------
// InstrumentKey

std::string InstrumentKey::id() const {
  std::string out;
  out.reserve(debtor.size() + creditor.size() + currency.size() + 24);
  out.append(to_string(kind)).append(":").append(debtor).append("->").append(creditor);
  out.append(":").append(currency);
  if (redemption) out.append(":").append(redemption->target).append("@").append(redemption->rate.str());
  return out;
}

bool InstrumentKey::has_id(std::string_view text) const {
  auto take = [&](std::string_view part) {
    if (!text.starts_with(part)) return false;
    text.remove_prefix(part.size());
    return true;
  };
  if (!(take(to_string(kind)) && take(":") && take(debtor) && take("->") && take(creditor) && take(":") &&
        take(currency))) {
    return false;
  }
  if (redemption) return take(":") && take(redemption->target) && take("@") && text == redemption->rate.str();
  return text.empty();
}

InstrumentKey InstrumentKey::parse(std::string_view id) {
  auto fail = [&] {
    return Error(ErrorCode::BadParameter, "malformed instrument id '" + std::string(id) + "'");
  };
  std::vector<std::string_view> parts;
  std::string_view rest = id;
  while (true) {
    auto colon = rest.find(':');
    parts.push_back(rest.substr(0, colon));
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  if (parts.size() != 3 && parts.size() != 4) throw fail();
  InstrumentKey key;
  auto kind = parse_instrument_kind(parts[0]);
  if (!kind) throw fail();
  key.kind = *kind;
  auto arrow = parts[1].find("->");
  if (arrow == std::string_view::npos) throw fail();
  key.debtor = std::string(parts[1].substr(0, arrow));
  key.creditor = std::string(parts[1].substr(arrow + 2));
  key.currency = std::string(parts[2]);
  if (!is_agent_identifier(key.debtor) || !is_agent_identifier(key.creditor) ||
      !is_unit_identifier(key.currency)) {
    throw fail();
  }
  if (parts.size() == 4) {
    auto at = parts[3].find('@');
    if (at == std::string_view::npos) throw fail();
    std::string target(parts[3].substr(0, at));
    if (!is_unit_identifier(target)) throw fail();
    key.redemption = Redemption{target, Rational::parse(parts[3].substr(at + 1))};
  }
  if (key.redemption.has_value() != (key.kind == InstrumentKind::convertible_note)) throw fail();
  return key;
}

// ---------------------------------------------------------------------------
// rules shared by post() and check_invariants()

namespace detail {

std::optional<RuleBreach> kind_rule_breach(const Agent& debtor, const Agent& creditor,
                                           const InstrumentKey& key) {
  auto kinds = [&](std::string what) {
    return RuleBreach{ErrorCode::KindMismatch, std::string(to_string(key.kind)) + " " + what};
  };
  const bool debtor_cb = debtor.kind == AgentKind::central_bank;
  switch (key.kind) {
    case InstrumentKind::note:
      if (!debtor_cb) return kinds("debtor must be a central bank");
      break;
    case InstrumentKind::reserve:
      if (!debtor_cb) return kinds("debtor must be a central bank");
      if (creditor.kind != AgentKind::bank) return kinds("creditor must be a bank");
      break;
    case InstrumentKind::deposit:
      if (!debtor_cb && debtor.kind != AgentKind::bank) {
        return kinds("debtor must be a bank or central bank");
      }
      break;
    case InstrumentKind::loan:
      if (creditor.kind != AgentKind::bank && creditor.kind != AgentKind::central_bank) {
        return kinds("creditor must be a bank or central bank");
      }
      break;
    case InstrumentKind::bond:
      break;
    case InstrumentKind::convertible_note:
      if (!debtor_cb && debtor.kind != AgentKind::bank) {
        return kinds("issuer must be a bank or central bank");
      }
      break;
  }
  if (key.redemption.has_value() != (key.kind == InstrumentKind::convertible_note)) {
    return RuleBreach{ErrorCode::BadParameter, "redemption terms belong to convertible notes only"};
  }
  if (key.redemption) {
    if (!key.redemption->rate.is_positive()) {
      return RuleBreach{ErrorCode::BadParameter, "redemption rate must be positive"};
    }
    if (key.redemption->target == key.currency) {
      return RuleBreach{ErrorCode::BadParameter, "note redeemable into its own currency"};
    }
  }
  if (debtor_cb && key.kind != InstrumentKind::bond && key.kind != InstrumentKind::loan &&
      debtor.issues != key.currency) {
    return RuleBreach{ErrorCode::CurrencyMismatch,
                      "central bank '" + debtor.id + "' owes only in its own currency"};
  }
  return std::nullopt;
}

bool regime_admits(const Regime& regime, InstrumentKind kind) {
  switch (regime.kind) {
    case Regime::Kind::pure_commodity:
      return false;
    case Regime::Kind::fiat:
      return kind != InstrumentKind::convertible_note;
    case Regime::Kind::convertible:
      return !(regime.full_backing && kind == InstrumentKind::loan);
  }
  return false;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorCode::Overflow, "amount overflow");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// BalanceGraph

BalanceGraph::BalanceGraph(Regime regime, GraphConfig config)
    : regime_(regime), config_(config) {}

BalanceGraph new_graph(Regime regime) { return BalanceGraph(regime); }

void BalanceGraph::declare_currency(const UnitId& id) {
  if (!is_unit_identifier(id)) throw Error(ErrorCode::InvalidIdentifier, "bad currency id '" + id + "'");
  if (has_commodity(id)) throw Error(ErrorCode::BadParameter, "'" + id + "' is already a commodity");
  currencies_.insert(id);
}

void BalanceGraph::declare_commodity(const UnitId& id) {
  if (!is_unit_identifier(id)) throw Error(ErrorCode::InvalidIdentifier, "bad commodity id '" + id + "'");
  if (has_currency(id)) throw Error(ErrorCode::BadParameter, "'" + id + "' is already a currency");
  commodity_supply_.try_emplace(id, 0);
}

const AgentId& BalanceGraph::add_agent(const AgentId& id, AgentKind kind,
                                       std::optional<UnitId> issues,
                                       std::optional<UnitId> currency) {
  if (!is_agent_identifier(id)) throw Error(ErrorCode::InvalidIdentifier, "bad agent id '" + id + "'");
  if (agents_.contains(id)) throw Error(ErrorCode::DuplicateAgent, "agent '" + id + "' exists");

  Agent agent{id, kind, std::nullopt, std::nullopt, {}};
  if (kind == AgentKind::central_bank) {
    if (!issues) throw Error(ErrorCode::IssuerRequired, "central bank must issue a currency");
    if (issuer_of(*issues)) {
      throw Error(ErrorCode::DuplicateCentralBank, "currency " + *issues + " already has an issuer");
    }
    declare_currency(*issues);
    agent.issues = issues;
  } else if (issues) {
    throw Error(ErrorCode::BadParameter, "only central banks issue currency");
  }

  if (kind == AgentKind::treasury) {
    if (!currency) {
      if (currencies_.size() != 1) {
        throw Error(ErrorCode::IssuerRequired, "treasury needs an explicit currency");
      }
      currency = *currencies_.begin();
    }
    if (!has_currency(*currency)) throw Error(ErrorCode::UnknownCurrency, "unknown currency " + *currency);
    if (treasury_of(*currency)) {
      throw Error(ErrorCode::DuplicateTreasury, "currency " + *currency + " already has a treasury");
    }
    agent.currency = currency;
  } else if (currency) {
    throw Error(ErrorCode::BadParameter, "only treasuries administer a currency");
  }

  return agents_.emplace(id, std::move(agent)).first->first;
}

const Agent* BalanceGraph::find_agent(const AgentId& id) const {
  auto it = agents_.find(id);
  return it == agents_.end() ? nullptr : &it->second;
}

const Agent& BalanceGraph::agent(const AgentId& id) const {
  if (const auto* a = find_agent(id)) return *a;
  throw unknown_agent(id);
}

const Instrument* BalanceGraph::find_instrument(const std::string& id) const {
  auto it = instruments_.find(id);
  return it == instruments_.end() ? nullptr : &it->second;
}

Amount BalanceGraph::amount(const InstrumentKey& key) const {
  const auto* inst = find_instrument(key.id());
  return inst ? inst->amount : 0;
}

Amount BalanceGraph::commodity_holding(const AgentId& agent, const UnitId& commodity) const {
  const auto* a = find_agent(agent);
  if (!a) return 0;
  auto it = a->commodities.find(commodity);
  return it == a->commodities.end() ? 0 : it->second;
}

const std::set<std::string>& BalanceGraph::edges_of(const AgentId& agent) const {
  auto it = adjacency_.find(agent);
  return it == adjacency_.end() ? kNoEdges : it->second;
}

const std::map<UnitId, Position>& BalanceGraph::positions(const AgentId& agent) const {
  auto it = positions_.find(agent);
  return it == positions_.end() ? kNoPositions : it->second;
}

std::optional<AgentId> BalanceGraph::issuer_of(const UnitId& currency) const {
  for (const auto& [id, a] : agents_) {
    if (a.kind == AgentKind::central_bank && a.issues == currency) return id;
  }
  return std::nullopt;
}

std::optional<AgentId> BalanceGraph::treasury_of(const UnitId& currency) const {
  for (const auto& [id, a] : agents_) {
    if (a.kind == AgentKind::treasury && a.currency == currency) return id;
  }
  return std::nullopt;
}

Amount BalanceGraph::backing_holdings(const AgentId& agent, const UnitId& target) const {
  if (has_commodity(target)) return commodity_holding(agent, target);
  Amount total = 0;
  for (const auto& id : edges_of(agent)) {
    const auto& inst = instruments_.at(id);
    if (inst.key.creditor == agent && inst.key.kind == InstrumentKind::deposit &&
        inst.key.currency == target) {
      total = detail::checked_add(total, inst.amount);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// post

struct BalanceGraph::Staged {
  struct Edge {
    InstrumentKey key;
    Amount before = 0;
    Amount after = 0;
  };
  std::map<std::string, Edge> edges;
  std::map<std::pair<AgentId, UnitId>, Amount> holdings;
  std::map<UnitId, Amount> supply;
  std::map<std::pair<AgentId, UnitId>, Position> positions;
  std::set<AgentId> touched;
};

void BalanceGraph::validate_edge(const EdgeDelta& delta) const {
  const auto& key = delta.key;
  const auto* debtor = find_agent(key.debtor);
  if (!debtor) throw unknown_agent(key.debtor);
  const auto* creditor = find_agent(key.creditor);
  if (!creditor) throw unknown_agent(key.creditor);
  if (key.debtor == key.creditor) {
    throw Error(ErrorCode::SelfClaim, "agent '" + key.debtor + "' cannot hold a claim on itself");
  }
  if (!has_currency(key.currency)) throw Error(ErrorCode::UnknownCurrency, "unknown currency " + key.currency);
  if (key.redemption && !has_unit(key.redemption->target)) {
    throw Error(ErrorCode::UnknownCurrency, "unknown redemption target " + key.redemption->target);
  }
  if (auto breach = detail::kind_rule_breach(*debtor, *creditor, key)) {
    throw Error(breach->code, breach->message);
  }
}

void BalanceGraph::post(std::span<const Delta> deltas) {
  Staged st;
  std::map<UnitId, std::int64_t> moved;

  auto stage_position = [&](const AgentId& agent, const UnitId& currency) -> Position& {
    auto [it, fresh] = st.positions.try_emplace({agent, currency});
    if (fresh) {
      const auto& current = positions(agent);
      if (auto p = current.find(currency); p != current.end()) it->second = p->second;
    }
    return it->second;
  };
  auto stage_holding = [&](const AgentId& agent, const UnitId& commodity) -> Amount& {
    auto [it, fresh] = st.holdings.try_emplace({agent, commodity});
    if (fresh) it->second = commodity_holding(agent, commodity);
    return it->second;
  };
  auto require_commodity = [&](const AgentId& agent, const UnitId& commodity) {
    if (!find_agent(agent)) throw unknown_agent(agent);
    if (!has_commodity(commodity)) {
      throw Error(ErrorCode::UnknownCurrency, "unknown commodity " + commodity);
    }
  };

  for (const auto& delta : deltas) {
    if (const auto* e = std::get_if<EdgeDelta>(&delta)) {
      validate_edge(*e);
      auto id = e->key.id();
      auto [it, fresh] = st.edges.try_emplace(id);
      if (fresh) {
        it->second.key = e->key;
        it->second.before = it->second.after = amount(e->key);
      }
      auto& edge = it->second;
      edge.after = detail::checked_add(edge.after, e->change);
      if (edge.after < 0) {
        throw Error(ErrorCode::NegativeAmount, id + " would become negative");
      }
      auto& owed = stage_position(e->key.debtor, e->key.currency);
      owed.liabilities = detail::checked_add(owed.liabilities, e->change);
      auto& held = stage_position(e->key.creditor, e->key.currency);
      held.assets = detail::checked_add(held.assets, e->change);
      st.touched.insert(e->key.debtor);
      st.touched.insert(e->key.creditor);
    } else if (const auto* c = std::get_if<CommodityDelta>(&delta)) {
      require_commodity(c->agent, c->commodity);
      auto& held = stage_holding(c->agent, c->commodity);
      held = detail::checked_add(held, c->change);
      if (held < 0) {
        throw Error(ErrorCode::NegativeAmount, c->agent + " holding of " + c->commodity + " would become negative");
      }
      moved[c->commodity] = detail::checked_add(moved[c->commodity], c->change);
      st.touched.insert(c->agent);
    } else {
      const auto& m = std::get<MintDelta>(delta);
      require_commodity(m.agent, m.commodity);
      if (m.quantity <= 0) throw Error(ErrorCode::ZeroAmount, "mint quantity must be positive");
      auto& held = stage_holding(m.agent, m.commodity);
      held = detail::checked_add(held, m.quantity);
      auto [sit, fresh] = st.supply.try_emplace(m.commodity, commodity_supply_.at(m.commodity));
      sit->second = detail::checked_add(sit->second, m.quantity);
      st.touched.insert(m.agent);
    }
  }

  for (const auto& [commodity, net] : moved) {
    if (net != 0) {
      throw Error(ErrorCode::RegimeViolation,
                  "commodity " + commodity + " is created only by mint_commodity");
    }
  }

  check_regime(st);
  commit(st);
}

void BalanceGraph::check_regime(const Staged& st) const {
  for (const auto& [id, edge] : st.edges) {
    if (edge.after > edge.before && !detail::regime_admits(regime_, edge.key.kind)) {
      throw Error(ErrorCode::RegimeViolation,
                  std::string(to_string(edge.key.kind)) + " not permitted under regime " + regime_.name());
    }
  }
  if (regime_.kind == Regime::Kind::convertible && regime_.full_backing) {
    for (const auto& agent : st.touched) check_backing(st, agent);
  }
}

void BalanceGraph::check_backing(const Staged& st, const AgentId& agent) const {
  // Post-state view of the agent's edges: committed ones overlaid by staged.
  std::map<std::string, std::pair<const InstrumentKey*, Amount>> view;
  for (const auto& id : edges_of(agent)) {
    const auto& inst = instruments_.at(id);
    view[id] = {&inst.key, inst.amount};
  }
  for (const auto& [id, edge] : st.edges) {
    if (edge.key.debtor == agent || edge.key.creditor == agent) view[id] = {&edge.key, edge.after};
  }

  std::map<UnitId, Rational> encumbered;
  std::map<UnitId, Amount> currency_backing;
  for (const auto& [id, entry] : view) {
    const auto& [key, amount] = entry;
    if (amount == 0) continue;
    if (key->kind == InstrumentKind::convertible_note && key->debtor == agent) {
      encumbered[key->redemption->target] += Rational(amount) * key->redemption->rate;
    } else if (key->kind == InstrumentKind::deposit && key->creditor == agent) {
      currency_backing[key->currency] = detail::checked_add(currency_backing[key->currency], amount);
    }
  }
  for (const auto& [target, owed] : encumbered) {
    Amount held = 0;
    if (has_commodity(target)) {
      auto it = st.holdings.find({agent, target});
      held = it != st.holdings.end() ? it->second : commodity_holding(agent, target);
    } else {
      held = currency_backing[target];
    }
    if (owed > Rational(held)) {
      throw Error(ErrorCode::RegimeViolation,
                  "convertible liabilities of '" + agent + "' exceed its " + target + " backing");
    }
  }
}

void BalanceGraph::commit(const Staged& st) {
  for (const auto& [id, edge] : st.edges) {
    if (edge.after == 0) {
      instruments_.erase(id);
      for (const auto* who : {&edge.key.debtor, &edge.key.creditor}) {
        auto it = adjacency_.find(*who);
        if (it == adjacency_.end()) continue;
        it->second.erase(id);
        if (it->second.empty()) adjacency_.erase(it);
      }
    } else {
      instruments_.insert_or_assign(id, Instrument{edge.key, edge.after});
      adjacency_[edge.key.debtor].insert(id);
      adjacency_[edge.key.creditor].insert(id);
    }
  }
  for (const auto& [slot, held] : st.holdings) {
    auto& holdings = agents_.at(slot.first).commodities;
    if (held == 0) {
      holdings.erase(slot.second);
    } else {
      holdings[slot.second] = held;
    }
  }
  for (const auto& [commodity, total] : st.supply) commodity_supply_[commodity] = total;
  for (const auto& [slot, pos] : st.positions) {
    if (pos == Position{}) {
      auto it = positions_.find(slot.first);
      if (it == positions_.end()) continue;
      it->second.erase(slot.second);
      if (it->second.empty()) positions_.erase(it);
    } else {
      positions_[slot.first][slot.second] = pos;
    }
  }
}

}  // namespace moneygraph
