#include <map>
#include <string_view>
#include <unordered_map>

#include "moneygraph/ledger.hpp"
#include "ledger_rules.hpp"

namespace moneygraph {
namespace {

// Wide accumulators: a corrupted snapshot may carry values that would
// overflow 64-bit sums.
using Wide = __int128;

struct ViewPairHash {
  std::size_t operator()(const std::pair<std::string_view, std::string_view>& p) const noexcept {
    auto h = std::hash<std::string_view>{};
    return h(p.first) * 31 + h(p.second);
  }
};

struct WidePosition {
  Wide assets = 0;
  Wide liabilities = 0;
};

}  // namespace

std::vector<Violation> check_invariants(const BalanceGraph& g) {
  std::vector<Violation> out;
  auto report = [&](std::string code, std::string unit, std::string subject, std::string message) {
    out.push_back({std::move(code), std::move(unit), std::move(subject), std::move(message)});
  };
  const auto& regime = g.regime();

  // Edges: structure, kinds, regime, and positions re-derived from scratch.
  std::unordered_map<std::pair<std::string_view, std::string_view>, WidePosition, ViewPairHash> derived;
  derived.reserve(2 * g.instruments().size());
  std::map<AgentId, std::map<UnitId, Rational>> encumbered;
  std::set<UnitId> used_currencies;
  std::unordered_map<std::string_view, const Agent*> agents;
  agents.reserve(g.agents().size());
  for (const auto& [id, agent] : g.agents()) agents.emplace(id, &agent);
  auto lookup = [&](const AgentId& id) -> const Agent* {
    auto it = agents.find(id);
    return it == agents.end() ? nullptr : it->second;
  };
  const UnitId* last_currency = nullptr;
  for (const auto& [id, inst] : g.instruments()) {
    const auto& key = inst.key;
    if (!key.has_id(id)) report("instrument_id", key.currency, id, "stored id differs from key " + key.id());
    if (inst.amount <= 0) report("nonpositive_amount", key.currency, id, "instrument amount must be > 0");
    const auto* debtor = lookup(key.debtor);
    const auto* creditor = lookup(key.creditor);
    if (!debtor || !creditor) {
      report("unknown_agent", key.currency, id, "edge endpoint is not an agent");
    } else if (auto breach = detail::kind_rule_breach(*debtor, *creditor, key)) {
      report("kind_rule", key.currency, id, breach->message);
    }
    if (key.debtor == key.creditor) report("self_claim", key.currency, id, "claim on oneself");
    bool same_currency = last_currency && *last_currency == key.currency;
    if (!same_currency && !g.has_currency(key.currency)) {
      report("unknown_currency", key.currency, id, "undeclared currency");
    }
    if (!detail::regime_admits(regime, key.kind)) {
      report("regime", key.currency, id,
             std::string(to_string(key.kind)) + " cannot exist under " + regime.name());
    }
    if (!same_currency) {
      used_currencies.insert(key.currency);
      last_currency = &key.currency;
    }

    derived[{key.debtor, key.currency}].liabilities += inst.amount;
    derived[{key.creditor, key.currency}].assets += inst.amount;
    if (key.redemption) {
      encumbered[key.debtor][key.redemption->target] += Rational(inst.amount) * key.redemption->rate;
    }
  }

  // Zero-sum per currency: cached positions must match the edges and must
  // net to zero across all agents.
  std::map<UnitId, Wide> net_by_currency;
  const auto& cached = g.all_positions();
  for (const auto& [agent, by_currency] : cached) {
    for (const auto& [currency, pos] : by_currency) {
      net_by_currency[currency] += Wide(pos.assets) - Wide(pos.liabilities);
      WidePosition expect;
      if (auto d = derived.find({agent, currency}); d != derived.end()) expect = d->second;
      if (expect.assets != pos.assets || expect.liabilities != pos.liabilities) {
        report("position_mismatch", currency, agent, "recorded position disagrees with edges");
      }
    }
  }
  for (const auto& [where, pos] : derived) {
    const auto& [agent, currency] = where;
    auto a = cached.find(AgentId(agent));
    bool present = a != cached.end() && a->second.contains(UnitId(currency));
    if (!present && (pos.assets != 0 || pos.liabilities != 0)) {
      report("position_mismatch", std::string(currency), std::string(agent), "edges without a recorded position");
    }
  }
  for (const auto& [currency, net] : net_by_currency) {
    if (net != 0) report("zero_sum", currency, "", "financial assets and liabilities do not cancel");
  }

  // Commodities: non-negative holdings, totals equal to minted supply.
  std::map<UnitId, Wide> held;
  for (const auto& [id, agent] : g.agents()) {
    for (const auto& [commodity, qty] : agent.commodities) {
      if (qty < 0) report("negative_holding", commodity, id, "commodity holding below zero");
      if (!g.has_commodity(commodity)) report("unknown_commodity", commodity, id, "undeclared commodity");
      held[commodity] += qty;
    }
  }
  for (const auto& [commodity, supply] : g.commodity_supply()) {
    if (held[commodity] != supply) {
      report("commodity_conservation", commodity, "", "holdings do not add up to minted supply");
    }
  }

  // Issuers and treasuries.
  std::map<UnitId, int> issuers;
  std::map<UnitId, int> treasuries;
  for (const auto& [id, agent] : g.agents()) {
    bool is_cb = agent.kind == AgentKind::central_bank;
    if (is_cb != agent.issues.has_value()) report("issuer", "", id, "issues must be set iff central bank");
    if (agent.issues) ++issuers[*agent.issues];
    if (agent.kind == AgentKind::treasury) {
      if (!agent.currency) {
        report("treasury_currency", "", id, "treasury without a currency");
      } else {
        ++treasuries[*agent.currency];
      }
    }
  }
  for (const auto& [currency, n] : issuers) {
    if (n > 1) report("duplicate_central_bank", currency, "", "currency has several issuers");
  }
  for (const auto& [currency, n] : treasuries) {
    if (n > 1) report("duplicate_treasury", currency, "", "currency has several treasuries");
  }
  if (regime.kind != Regime::Kind::pure_commodity) {
    for (const auto& currency : used_currencies) {
      if (!issuers.contains(currency)) report("missing_issuer", currency, "", "currency in use without issuer");
    }
  }

  // Full backing of convertible liabilities.
  if (regime.kind == Regime::Kind::convertible && regime.full_backing) {
    for (const auto& [agent, by_target] : encumbered) {
      for (const auto& [target, owed] : by_target) {
        Wide backing = 0;
        if (g.has_commodity(target)) {
          backing = g.commodity_holding(agent, target);
        } else {
          for (const auto& [id, inst] : g.instruments()) {
            if (inst.key.creditor == agent && inst.key.kind == InstrumentKind::deposit &&
                inst.key.currency == target) {
              backing += inst.amount;
            }
          }
        }
        if (owed > Rational(static_cast<std::int64_t>(backing))) {
          report("backing", target, agent, "convertible liabilities exceed backing");
        }
      }
    }
  }
  return out;
}

}  // namespace moneygraph
