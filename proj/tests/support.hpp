#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "moneygraph/ledger.hpp"
#include "moneygraph/operations.hpp"

namespace mgtest {

using namespace moneygraph;

struct World {
  BalanceGraph g;
  UnitId currency = "DOM";
  AgentId cb = "cb";
  AgentId treasury = "tr";
  std::vector<AgentId> banks;
  std::vector<AgentId> nonbanks;
  std::vector<AgentId> foreigners;
};

/// cb + tr + banks b0.. + households h0.. + foreigners f0.. in DOM.
World fiat_world(int banks, int nonbanks, int foreigners, GraphConfig config = {true, true});

enum class Family { create_loan, repay_loan, pay_deposit, withdraw_cash, deposit_cash, open_market_purchase,
                    issue_bond, treasury_spend, tax };
inline constexpr Family all_families[] = {Family::create_loan,   Family::repay_loan,   Family::pay_deposit,
                                          Family::withdraw_cash, Family::deposit_cash, Family::open_market_purchase,
                                          Family::issue_bond,    Family::treasury_spend, Family::tax};

struct Proposal {
  Family family;
  std::string name;
  Params params;
  Amount amount = 0;
};

/// A plausible operation given the current state. `households_only` keeps
/// every non-bank party a nonbank agent (the setting of the delta-law table).
/// Returns nullopt when the family has nothing to act on yet.
std::optional<Proposal> propose(const World& w, Family family, std::mt19937_64& rng, bool households_only = false);

/// Random family, retried until a proposal exists.
Proposal propose_any(const World& w, std::mt19937_64& rng);

// Independent re-computations over raw instruments, sharing no code with
// the measures module.
struct RawMeasures {
  std::int64_t broad = 0;
  std::int64_t net = 0;
  std::int64_t base = 0;
};
RawMeasures raw_measures(const BalanceGraph& g, const UnitId& currency);

/// Σ (assets − liabilities) per currency from edges, plus the per-agent
/// sums compared with the cached positions. Empty string when healthy,
/// otherwise a description of the first discrepancy.
std::string raw_conservation(const BalanceGraph& g);

/// Random fiat graph built from `ops` successful random operations.
World random_world(std::mt19937_64& rng, int ops);

}  // namespace mgtest
