#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moneygraph/ledger.hpp"

namespace moneygraph {

// Composite monetary operations. Each plan_* function checks preconditions
// against the current graph and compiles the operation into one delta list;
// the matching mutating function posts that list atomically, so a failed
// precondition never changes the graph.
//
// Edge direction is debtor -> creditor throughout: a loan from b1 to h1 is
// loan:h1->b1 and the deposit it creates is deposit:b1->h1.

std::vector<Delta> plan_mint_commodity(const BalanceGraph& g, const AgentId& agent,
                                       const UnitId& commodity, Amount quantity);
void mint_commodity(BalanceGraph& g, const AgentId& agent, const UnitId& commodity, Amount quantity);

std::vector<Delta> plan_transfer_commodity(const BalanceGraph& g, const AgentId& from,
                                           const AgentId& to, const UnitId& commodity,
                                           Amount quantity);
void transfer_commodity(BalanceGraph& g, const AgentId& from, const AgentId& to,
                        const UnitId& commodity, Amount quantity);

/// Claims of `issuer` already promised against `backing`, in backing units.
Rational encumbered_backing(const BalanceGraph& g, const AgentId& issuer, const UnitId& backing);

/// `currency` defaults to the issuer's own currency for central banks.
std::vector<Delta> plan_issue_convertible_note(const BalanceGraph& g, const AgentId& issuer,
                                               const AgentId& holder, Amount amount,
                                               const UnitId& backing, const Rational& rate,
                                               std::optional<UnitId> currency = std::nullopt);
InstrumentKey issue_convertible_note(BalanceGraph& g, const AgentId& issuer, const AgentId& holder,
                                     Amount amount, const UnitId& backing, const Rational& rate,
                                     std::optional<UnitId> currency = std::nullopt);

struct LoanPair {
  InstrumentKey loan;
  InstrumentKey deposit;
};

InstrumentKey loan_key(const AgentId& bank, const AgentId& borrower, const UnitId& currency);
InstrumentKey deposit_key(const AgentId& bank, const AgentId& holder, const UnitId& currency);
InstrumentKey reserve_key(const AgentId& cb, const AgentId& bank, const UnitId& currency);
InstrumentKey note_key(const AgentId& cb, const AgentId& holder, const UnitId& currency);
InstrumentKey bond_key(const AgentId& treasury, const AgentId& holder, const UnitId& currency);

std::vector<Delta> plan_create_loan(const BalanceGraph& g, const AgentId& bank,
                                    const AgentId& borrower, Amount amount, const UnitId& currency);
LoanPair create_loan(BalanceGraph& g, const AgentId& bank, const AgentId& borrower, Amount amount,
                     const UnitId& currency);

/// The borrower settles with its claim on the lender: a deposit, or reserves
/// when a bank repays the central bank.
std::vector<Delta> plan_repay_loan(const BalanceGraph& g, const InstrumentKey& loan, Amount amount);
void repay_loan(BalanceGraph& g, const InstrumentKey& loan, Amount amount);

/// Banks used for a payment. Unset entries are inferred: the payer's first
/// bank (by id) holding enough, the payee's first bank holding any deposit,
/// falling back to the payer's bank.
struct BankChoice {
  std::optional<AgentId> payer_bank;
  std::optional<AgentId> payee_bank;
};

std::vector<Delta> plan_pay_deposit(const BalanceGraph& g, const AgentId& payer, const AgentId& payee,
                                    Amount amount, const UnitId& currency, const BankChoice& banks = {});
void pay_deposit(BalanceGraph& g, const AgentId& payer, const AgentId& payee, Amount amount,
                 const UnitId& currency, const BankChoice& banks = {});

std::vector<Delta> plan_withdraw_cash(const BalanceGraph& g, const AgentId& holder, Amount amount,
                                      const UnitId& currency, std::optional<AgentId> bank = std::nullopt);
void withdraw_cash(BalanceGraph& g, const AgentId& holder, Amount amount, const UnitId& currency,
                   std::optional<AgentId> bank = std::nullopt);

std::vector<Delta> plan_deposit_cash(const BalanceGraph& g, const AgentId& holder, Amount amount,
                                     const UnitId& currency, std::optional<AgentId> bank = std::nullopt);
void deposit_cash(BalanceGraph& g, const AgentId& holder, Amount amount, const UnitId& currency,
                  std::optional<AgentId> bank = std::nullopt);

std::vector<Delta> plan_cb_open_market_purchase(const BalanceGraph& g, const AgentId& cb,
                                                const AgentId& bank, const InstrumentKey& bond,
                                                Amount amount);
void cb_open_market_purchase(BalanceGraph& g, const AgentId& cb, const AgentId& bank,
                             const InstrumentKey& bond, Amount amount);

std::vector<Delta> plan_treasury_issue_bond(const BalanceGraph& g, const AgentId& treasury,
                                            const AgentId& bank, Amount amount);
InstrumentKey treasury_issue_bond(BalanceGraph& g, const AgentId& treasury, const AgentId& bank,
                                  Amount amount);

std::vector<Delta> plan_treasury_spend(const BalanceGraph& g, const AgentId& treasury,
                                       const AgentId& recipient, Amount amount,
                                       std::optional<AgentId> bank = std::nullopt);
void treasury_spend(BalanceGraph& g, const AgentId& treasury, const AgentId& recipient, Amount amount,
                    std::optional<AgentId> bank = std::nullopt);

std::vector<Delta> plan_tax(const BalanceGraph& g, const AgentId& treasury, const AgentId& payer,
                            Amount amount, std::optional<AgentId> bank = std::nullopt);
void tax(BalanceGraph& g, const AgentId& treasury, const AgentId& payer, Amount amount,
         std::optional<AgentId> bank = std::nullopt);

/// New graph in which the treasury is folded into the central bank (the
/// merged node keeps the central bank's id). Claims between the two vanish.
BalanceGraph consolidate(const BalanceGraph& g, const AgentId& cb, const AgentId& treasury);

/// New graph with every agent of `kind` merged into one node named
/// "sector_<kind>"; intra-sector claims cancel.
BalanceGraph aggregate_sector(const BalanceGraph& g, AgentKind kind);
std::string sector_agent_id(AgentKind kind);

// ---------------------------------------------------------------------------
// Named operations: a single dispatch surface shared by the scenario runner,
// the session service and replay.

using Params = std::map<std::string, std::string>;

enum class ParamType { agent, unit, amount, rational, agent_kind, instrument, flag };

struct ParamSpec {
  std::string key;
  ParamType type;
  bool required;
};

struct OpSpec {
  std::string name;
  std::vector<ParamSpec> params;
  bool structural;  // replaces or extends the graph rather than posting deltas
};

const std::vector<OpSpec>& op_catalog();
const OpSpec* find_op(std::string_view name);

struct OpRecord {
  std::uint64_t seq = 0;
  std::string name;
  Params params;
  std::vector<Delta> deltas;

  std::string to_json_line() const;
  static OpRecord from_json_line(std::string_view line);
};

/// Validates parameters against the catalog and applies the operation.
/// Optional `currency` parameters default to the graph's only currency.
OpRecord apply_op(BalanceGraph& g, std::string_view name, const Params& params);

/// Reproduces a recorded operation on its pre-state.
void replay(BalanceGraph& g, const OpRecord& record);

}  // namespace moneygraph
