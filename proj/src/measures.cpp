#include "moneygraph/measures.hpp"

#include <sstream>

#include "json.hpp"
#include "ledger_rules.hpp"

namespace moneygraph {
namespace {

void require_currency(const BalanceGraph& g, const UnitId& currency) {
  if (!g.has_currency(currency)) throw Error(ErrorCode::UnknownCurrency, "unknown currency " + currency);
}

bool is_government_of(const Agent& a, const UnitId& currency) {
  return (a.kind == AgentKind::central_bank && a.issues == currency) ||
         (a.kind == AgentKind::treasury && a.currency == currency);
}

bool is_non_government(const Agent& a) {
  return a.kind == AgentKind::bank || a.kind == AgentKind::nonbank || a.kind == AgentKind::foreign;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Amount base_money(const BalanceGraph& g, const UnitId& currency) {
  require_currency(g, currency);
  Amount total = 0;
  for (const auto& [id, inst] : g.instruments()) {
    const auto& key = inst.key;
    if (key.currency != currency) continue;
    if (key.kind != InstrumentKind::note && key.kind != InstrumentKind::reserve) continue;
    const auto& debtor = g.agent(key.debtor);
    if (debtor.kind == AgentKind::central_bank && is_non_government(g.agent(key.creditor))) {
      total = detail::checked_add(total, inst.amount);
    }
  }
  return total;
}

Amount broad_money(const BalanceGraph& g, const UnitId& currency) {
  require_currency(g, currency);
  Amount total = 0;
  for (const auto& [id, inst] : g.instruments()) {
    const auto& key = inst.key;
    if (key.currency != currency) continue;
    if (key.kind != InstrumentKind::note && key.kind != InstrumentKind::deposit) continue;
    if (g.agent(key.creditor).kind == AgentKind::nonbank) total = detail::checked_add(total, inst.amount);
  }
  return total;
}

std::int64_t net_money(const BalanceGraph& g, const UnitId& currency) {
  require_currency(g, currency);
  std::int64_t total = 0;
  for (const auto& [id, inst] : g.instruments()) {
    const auto& key = inst.key;
    if (key.currency != currency) continue;
    const auto& debtor = g.agent(key.debtor);
    const auto& creditor = g.agent(key.creditor);
    if (is_non_government(creditor) && is_government_of(debtor, currency)) {
      total = detail::checked_add(total, inst.amount);
    } else if (is_non_government(debtor) && is_government_of(creditor, currency)) {
      total = detail::checked_add(total, -inst.amount);
    }
  }
  return total;
}

MeasureReport measure(const BalanceGraph& g, const UnitId& currency) {
  MeasureReport r{currency, base_money(g, currency), broad_money(g, currency), net_money(g, currency), {}};
  for (const auto& [id, agent] : g.agents()) {
    auto& slot = r.sectors[std::string(to_string(agent.kind))];
    const auto& positions = g.positions(id);
    if (auto it = positions.find(currency); it != positions.end()) {
      slot = detail::checked_add(slot, it->second.assets - it->second.liabilities);
    }
  }
  return r;
}

std::vector<MeasureReport> measure_all(const BalanceGraph& g) {
  std::vector<MeasureReport> out;
  for (const auto& c : g.currencies()) out.push_back(measure(g, c));
  return out;
}

std::string MeasureReport::to_json() const {
  nlohmann::ordered_json j;
  j["currency"] = currency;
  j["base_money"] = std::to_string(base_money);
  j["broad_money"] = std::to_string(broad_money);
  j["net_money"] = std::to_string(net_money);
  j["sectors"] = nlohmann::ordered_json::object();
  for (const auto& [kind, v] : sectors) j["sectors"][kind] = std::to_string(v);
  return j.dump();
}

std::string export_dot(const BalanceGraph& g) {
  std::ostringstream out;
  out << "digraph G {\n";
  if (!g.agents().empty()) out << "  rankdir=LR;\n  node [shape=box];\n";
  for (const auto& [id, agent] : g.agents()) {
    std::string label = id + "\\n" + std::string(to_string(agent.kind));
    for (const auto& [currency, pos] : g.positions(id)) {
      label += "\\n" + currency + " " + std::to_string(pos.assets - pos.liabilities);
    }
    for (const auto& [commodity, qty] : agent.commodities) {
      label += "\\n" + commodity + " " + std::to_string(qty);
    }
    out << "  " << dot_quote(id) << " [label=\"" << label << "\"];\n";
  }
  for (const auto& [id, inst] : g.instruments()) {
    out << "  " << dot_quote(inst.key.debtor) << " -> " << dot_quote(inst.key.creditor)
        << " [label=" << dot_quote(std::string(to_string(inst.key.kind)) + ":" + std::to_string(inst.amount) +
                                    " " + inst.key.currency)
        << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace moneygraph
