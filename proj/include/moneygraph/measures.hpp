#pragma once

#include <map>
#include <string>
#include <vector>

#include "moneygraph/ledger.hpp"

namespace moneygraph {

// Monetary aggregates per currency. "Government" is the currency's issuing
// central bank plus its treasury; the non-government sector is every bank,
// nonbank and foreign agent.

/// Notes and reserves owed by the issuer to non-government holders.
Amount base_money(const BalanceGraph& g, const UnitId& currency);

/// Deposits and notes held by nonbank agents (foreign holders excluded).
Amount broad_money(const BalanceGraph& g, const UnitId& currency);

/// Non-government claims on the government minus non-government debts to
/// it: the consolidated government's net liability to everyone else.
std::int64_t net_money(const BalanceGraph& g, const UnitId& currency);

struct MeasureReport {
  UnitId currency;
  Amount base_money = 0;
  Amount broad_money = 0;
  std::int64_t net_money = 0;
  std::map<std::string, std::int64_t> sectors;  // agent kind -> net financial position

  std::string to_json() const;
  friend bool operator==(const MeasureReport&, const MeasureReport&) = default;
};

MeasureReport measure(const BalanceGraph& g, const UnitId& currency);
std::vector<MeasureReport> measure_all(const BalanceGraph& g);

/// Deterministic Graphviz digraph: agents sorted by id, arrows debtor ->
/// creditor labelled kind:amount.
std::string export_dot(const BalanceGraph& g);

}  // namespace moneygraph
