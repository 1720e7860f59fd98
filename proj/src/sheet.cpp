#include "json.hpp"

#include "moneygraph/ledger.hpp"
#include "ledger_rules.hpp"

namespace moneygraph {

BalanceSheet balance_sheet(const BalanceGraph& g, const AgentId& agent, const UnitId& unit) {
  const auto& who = g.agent(agent);
  if (!g.has_unit(unit)) throw Error(ErrorCode::UnknownCurrency, "unknown unit " + unit);

  std::map<std::string, Amount> assets;
  std::map<std::string, Amount> liabilities;
  for (const auto& id : g.edges_of(agent)) {
    const auto& inst = *g.find_instrument(id);
    if (inst.key.currency != unit) continue;
    auto source = std::string(to_string(inst.key.kind));
    auto& side = inst.key.creditor == agent ? assets : liabilities;
    side[source] = detail::checked_add(side[source], inst.amount);
  }
  if (auto it = who.commodities.find(unit); it != who.commodities.end()) {
    assets[unit] = detail::checked_add(assets[unit], it->second);
  }

  BalanceSheet sheet{agent, unit, {}, {}, 0};
  for (const auto& [source, amount] : assets) {
    sheet.assets.push_back({source, amount});
    sheet.net_worth = detail::checked_add(sheet.net_worth, amount);
  }
  for (const auto& [source, amount] : liabilities) {
    sheet.liabilities.push_back({source, amount});
    sheet.net_worth = detail::checked_add(sheet.net_worth, -amount);
  }
  return sheet;
}

std::string BalanceSheet::to_json() const {
  auto lines = [](const std::vector<SheetLine>& side) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& line : side) {
      out.push_back({{"source", line.source}, {"amount", std::to_string(line.amount)}});
    }
    return out;
  };
  nlohmann::ordered_json j;
  j["agent"] = agent;
  j["unit"] = unit;
  j["assets"] = lines(assets);
  j["liabilities"] = lines(liabilities);
  j["net_worth"] = std::to_string(net_worth);
  return j.dump();
}

}  // namespace moneygraph
