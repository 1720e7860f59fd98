#include "moneygraph/operations.hpp"

#include "ledger_rules.hpp"

namespace moneygraph {
namespace {

void require_positive(Amount amount) {
  if (amount <= 0) throw Error(ErrorCode::ZeroAmount, "amount must be positive");
}

const Agent& require_kind(const BalanceGraph& g, const AgentId& id, AgentKind kind) {
  const auto& a = g.agent(id);
  if (a.kind != kind) {
    throw Error(ErrorCode::KindMismatch,
                "'" + id + "' is a " + std::string(to_string(a.kind)) + ", expected " +
                    std::string(to_string(kind)));
  }
  return a;
}

AgentId issuer(const BalanceGraph& g, const UnitId& currency) {
  if (!g.has_currency(currency)) throw Error(ErrorCode::UnknownCurrency, "unknown currency " + currency);
  auto cb = g.issuer_of(currency);
  if (!cb) throw Error(ErrorCode::MissingAgent, "currency " + currency + " has no central bank");
  return *cb;
}

const UnitId& treasury_currency(const BalanceGraph& g, const AgentId& treasury) {
  const auto& t = require_kind(g, treasury, AgentKind::treasury);
  return *t.currency;
}

// First bank (by id) where `holder` keeps a deposit of at least `minimum`.
std::optional<AgentId> bank_holding(const BalanceGraph& g, const AgentId& holder,
                                    const UnitId& currency, Amount minimum) {
  for (const auto& id : g.edges_of(holder)) {
    const auto& inst = *g.find_instrument(id);
    const auto& key = inst.key;
    if (key.kind != InstrumentKind::deposit || key.creditor != holder || key.currency != currency) continue;
    const auto* bank = g.find_agent(key.debtor);
    if (bank && bank->kind == AgentKind::bank && inst.amount >= minimum) return key.debtor;
  }
  return std::nullopt;
}

// Bank to debit: explicit choice or the first one covering the amount.
AgentId debit_bank(const BalanceGraph& g, const AgentId& holder, Amount amount,
                   const UnitId& currency, const std::optional<AgentId>& chosen) {
  if (chosen) {
    require_kind(g, *chosen, AgentKind::bank);
    if (g.amount(deposit_key(*chosen, holder, currency)) < amount) {
      throw Error(ErrorCode::InsufficientDeposit, "'" + holder + "' holds less than " +
                                                      std::to_string(amount) + " at " + *chosen);
    }
    return *chosen;
  }
  auto bank = bank_holding(g, holder, currency, amount);
  if (!bank) {
    throw Error(ErrorCode::InsufficientDeposit,
                "'" + holder + "' has no deposit of " + std::to_string(amount) + " " + currency);
  }
  return *bank;
}

// Bank to credit: explicit choice, the holder's first bank, or `fallback`.
AgentId credit_bank(const BalanceGraph& g, const AgentId& holder, const UnitId& currency,
                    const std::optional<AgentId>& chosen, const std::optional<AgentId>& fallback) {
  if (chosen) {
    require_kind(g, *chosen, AgentKind::bank);
    return *chosen;
  }
  if (auto bank = bank_holding(g, holder, currency, 1)) return *bank;
  if (fallback) return *fallback;
  throw Error(ErrorCode::MissingAgent, "no bank known for '" + holder + "'; name one");
}

Amount reserves_of(const BalanceGraph& g, const AgentId& cb, const AgentId& bank, const UnitId& currency) {
  return g.amount(reserve_key(cb, bank, currency));
}

void require_reserves(const BalanceGraph& g, const AgentId& cb, const AgentId& bank,
                      const UnitId& currency, Amount amount) {
  if (reserves_of(g, cb, bank, currency) < amount) {
    throw Error(ErrorCode::InsufficientReserves,
                "bank '" + bank + "' holds less than " + std::to_string(amount) + " in reserves");
  }
}

bool is_bank(const BalanceGraph& g, const AgentId& id) { return g.agent(id).kind == AgentKind::bank; }

}  // namespace

InstrumentKey loan_key(const AgentId& bank, const AgentId& borrower, const UnitId& currency) {
  return {InstrumentKind::loan, borrower, bank, currency, std::nullopt};
}
InstrumentKey deposit_key(const AgentId& bank, const AgentId& holder, const UnitId& currency) {
  return {InstrumentKind::deposit, bank, holder, currency, std::nullopt};
}
InstrumentKey reserve_key(const AgentId& cb, const AgentId& bank, const UnitId& currency) {
  return {InstrumentKind::reserve, cb, bank, currency, std::nullopt};
}
InstrumentKey note_key(const AgentId& cb, const AgentId& holder, const UnitId& currency) {
  return {InstrumentKind::note, cb, holder, currency, std::nullopt};
}
InstrumentKey bond_key(const AgentId& treasury, const AgentId& holder, const UnitId& currency) {
  return {InstrumentKind::bond, treasury, holder, currency, std::nullopt};
}

// ---------------------------------------------------------------------------
// commodities

std::vector<Delta> plan_mint_commodity(const BalanceGraph& g, const AgentId& agent,
                                       const UnitId& commodity, Amount quantity) {
  require_positive(quantity);
  g.agent(agent);
  if (!g.has_commodity(commodity)) throw Error(ErrorCode::UnknownCurrency, "unknown commodity " + commodity);
  return {MintDelta{agent, commodity, quantity}};
}

void mint_commodity(BalanceGraph& g, const AgentId& agent, const UnitId& commodity, Amount quantity) {
  g.post(plan_mint_commodity(g, agent, commodity, quantity));
}

std::vector<Delta> plan_transfer_commodity(const BalanceGraph& g, const AgentId& from,
                                           const AgentId& to, const UnitId& commodity,
                                           Amount quantity) {
  require_positive(quantity);
  g.agent(from);
  g.agent(to);
  if (!g.has_commodity(commodity)) throw Error(ErrorCode::UnknownCurrency, "unknown commodity " + commodity);
  if (from == to) throw Error(ErrorCode::BadParameter, "transfer to oneself");
  if (g.commodity_holding(from, commodity) < quantity) {
    throw Error(ErrorCode::InsufficientCommodity,
                "'" + from + "' holds less than " + std::to_string(quantity) + " " + commodity);
  }
  return {CommodityDelta{from, commodity, -quantity}, CommodityDelta{to, commodity, quantity}};
}

void transfer_commodity(BalanceGraph& g, const AgentId& from, const AgentId& to,
                        const UnitId& commodity, Amount quantity) {
  g.post(plan_transfer_commodity(g, from, to, commodity, quantity));
}

// ---------------------------------------------------------------------------
// convertible notes

Rational encumbered_backing(const BalanceGraph& g, const AgentId& issuer, const UnitId& backing) {
  Rational total;
  for (const auto& id : g.edges_of(issuer)) {
    const auto& inst = *g.find_instrument(id);
    const auto& key = inst.key;
    if (key.kind == InstrumentKind::convertible_note && key.debtor == issuer &&
        key.redemption->target == backing) {
      total += Rational(inst.amount) * key.redemption->rate;
    }
  }
  return total;
}

std::vector<Delta> plan_issue_convertible_note(const BalanceGraph& g, const AgentId& issuer,
                                               const AgentId& holder, Amount amount,
                                               const UnitId& backing, const Rational& rate,
                                               std::optional<UnitId> currency) {
  if (g.regime().kind != Regime::Kind::convertible) {
    throw Error(ErrorCode::RegimeViolation, "convertible notes exist only under a convertible regime");
  }
  require_positive(amount);
  const auto& who = g.agent(issuer);
  g.agent(holder);
  if (!rate.is_positive()) throw Error(ErrorCode::BadParameter, "rate must be positive");
  if (!g.has_unit(backing)) throw Error(ErrorCode::UnknownCurrency, "unknown backing asset " + backing);
  if (!currency) {
    if (!who.issues) throw Error(ErrorCode::BadParameter, "currency required for a non-issuing note issuer");
    currency = who.issues;
  }
  if (g.regime().full_backing) {
    auto free = Rational(g.backing_holdings(issuer, backing)) - encumbered_backing(g, issuer, backing);
    if (Rational(amount) * rate > free) {
      throw Error(ErrorCode::InsufficientBacking, "'" + issuer + "' lacks free " + backing + " backing");
    }
  }
  InstrumentKey key{InstrumentKind::convertible_note, issuer, holder, *currency, Redemption{backing, rate}};
  return {EdgeDelta{std::move(key), amount}};
}

InstrumentKey issue_convertible_note(BalanceGraph& g, const AgentId& issuer, const AgentId& holder,
                                     Amount amount, const UnitId& backing, const Rational& rate,
                                     std::optional<UnitId> currency) {
  auto deltas = plan_issue_convertible_note(g, issuer, holder, amount, backing, rate, currency);
  auto key = std::get<EdgeDelta>(deltas.front()).key;
  g.post(deltas);
  return key;
}

// ---------------------------------------------------------------------------
// bank credit

std::vector<Delta> plan_create_loan(const BalanceGraph& g, const AgentId& bank,
                                    const AgentId& borrower, Amount amount, const UnitId& currency) {
  if (!g.regime().allows_credit()) {
    throw Error(ErrorCode::RegimeViolation, "bank credit is impossible under " + g.regime().name());
  }
  require_positive(amount);
  require_kind(g, bank, AgentKind::bank);
  g.agent(borrower);
  if (!g.has_currency(currency)) throw Error(ErrorCode::UnknownCurrency, "unknown currency " + currency);
  return {EdgeDelta{loan_key(bank, borrower, currency), amount},
          EdgeDelta{deposit_key(bank, borrower, currency), amount}};
}

LoanPair create_loan(BalanceGraph& g, const AgentId& bank, const AgentId& borrower, Amount amount,
                     const UnitId& currency) {
  g.post(plan_create_loan(g, bank, borrower, amount, currency));
  return {loan_key(bank, borrower, currency), deposit_key(bank, borrower, currency)};
}

std::vector<Delta> plan_repay_loan(const BalanceGraph& g, const InstrumentKey& loan, Amount amount) {
  require_positive(amount);
  if (loan.kind != InstrumentKind::loan) throw Error(ErrorCode::BadParameter, loan.id() + " is not a loan");
  const auto* inst = g.find_instrument(loan.id());
  if (!inst) throw Error(ErrorCode::UnknownInstrument, "no loan " + loan.id());
  if (inst->amount < amount) {
    throw Error(ErrorCode::ExceedsLoan, "repayment exceeds outstanding " + std::to_string(inst->amount));
  }
  const auto& lender = g.agent(loan.creditor);
  const auto& borrower = g.agent(loan.debtor);
  auto settlement = lender.kind == AgentKind::central_bank && borrower.kind == AgentKind::bank
                        ? reserve_key(lender.id, borrower.id, loan.currency)
                        : deposit_key(lender.id, borrower.id, loan.currency);
  if (g.amount(settlement) < amount) {
    throw Error(ErrorCode::InsufficientDeposit,
                "'" + borrower.id + "' holds less than " + std::to_string(amount) + " at " + lender.id);
  }
  return {EdgeDelta{loan, -amount}, EdgeDelta{settlement, -amount}};
}

void repay_loan(BalanceGraph& g, const InstrumentKey& loan, Amount amount) {
  g.post(plan_repay_loan(g, loan, amount));
}

// ---------------------------------------------------------------------------
// payments and cash

std::vector<Delta> plan_pay_deposit(const BalanceGraph& g, const AgentId& payer, const AgentId& payee,
                                    Amount amount, const UnitId& currency, const BankChoice& banks) {
  require_positive(amount);
  g.agent(payer);
  g.agent(payee);
  if (payer == payee) throw Error(ErrorCode::BadParameter, "payment to oneself");
  if (!g.has_currency(currency)) throw Error(ErrorCode::UnknownCurrency, "unknown currency " + currency);
  auto from = debit_bank(g, payer, amount, currency, banks.payer_bank);
  auto to = credit_bank(g, payee, currency, banks.payee_bank, from);

  std::vector<Delta> deltas{EdgeDelta{deposit_key(from, payer, currency), -amount},
                            EdgeDelta{deposit_key(to, payee, currency), amount}};
  if (from == to) return deltas;

  auto cb = issuer(g, currency);
  auto held = reserves_of(g, cb, from, currency);
  Amount borrowed = 0;
  if (held < amount) {
    if (!g.config().cb_intraday_credit) {
      throw Error(ErrorCode::InsufficientReserves,
                  "bank '" + from + "' cannot settle " + std::to_string(amount) + " with reserves " +
                      std::to_string(held));
    }
    borrowed = amount - held;
    deltas.push_back(EdgeDelta{loan_key(cb, from, currency), borrowed});
  }
  deltas.push_back(EdgeDelta{reserve_key(cb, from, currency), borrowed - amount});
  deltas.push_back(EdgeDelta{reserve_key(cb, to, currency), amount});
  return deltas;
}

void pay_deposit(BalanceGraph& g, const AgentId& payer, const AgentId& payee, Amount amount,
                 const UnitId& currency, const BankChoice& banks) {
  g.post(plan_pay_deposit(g, payer, payee, amount, currency, banks));
}

std::vector<Delta> plan_withdraw_cash(const BalanceGraph& g, const AgentId& holder, Amount amount,
                                      const UnitId& currency, std::optional<AgentId> bank) {
  require_positive(amount);
  g.agent(holder);
  auto cb = issuer(g, currency);
  auto at = debit_bank(g, holder, amount, currency, bank);
  require_reserves(g, cb, at, currency, amount);
  return {EdgeDelta{deposit_key(at, holder, currency), -amount},
          EdgeDelta{reserve_key(cb, at, currency), -amount},
          EdgeDelta{note_key(cb, holder, currency), amount}};
}

void withdraw_cash(BalanceGraph& g, const AgentId& holder, Amount amount, const UnitId& currency,
                   std::optional<AgentId> bank) {
  g.post(plan_withdraw_cash(g, holder, amount, currency, std::move(bank)));
}

std::vector<Delta> plan_deposit_cash(const BalanceGraph& g, const AgentId& holder, Amount amount,
                                     const UnitId& currency, std::optional<AgentId> bank) {
  require_positive(amount);
  g.agent(holder);
  auto cb = issuer(g, currency);
  if (g.amount(note_key(cb, holder, currency)) < amount) {
    throw Error(ErrorCode::InsufficientNotes, "'" + holder + "' holds fewer than " + std::to_string(amount) + " notes");
  }
  auto at = credit_bank(g, holder, currency, bank, std::nullopt);
  return {EdgeDelta{note_key(cb, holder, currency), -amount},
          EdgeDelta{deposit_key(at, holder, currency), amount},
          EdgeDelta{reserve_key(cb, at, currency), amount}};
}

void deposit_cash(BalanceGraph& g, const AgentId& holder, Amount amount, const UnitId& currency,
                  std::optional<AgentId> bank) {
  g.post(plan_deposit_cash(g, holder, amount, currency, std::move(bank)));
}

// ---------------------------------------------------------------------------
// government

std::vector<Delta> plan_cb_open_market_purchase(const BalanceGraph& g, const AgentId& cb,
                                                const AgentId& bank, const InstrumentKey& bond,
                                                Amount amount) {
  require_positive(amount);
  const auto& central = require_kind(g, cb, AgentKind::central_bank);
  require_kind(g, bank, AgentKind::bank);
  if (bond.kind != InstrumentKind::bond) throw Error(ErrorCode::BadParameter, bond.id() + " is not a bond");
  if (bond.currency != central.issues) {
    throw Error(ErrorCode::CurrencyMismatch, "central bank '" + cb + "' buys only " + *central.issues + " bonds");
  }
  const auto* held = g.find_instrument(bond.id());
  if (bond.creditor != bank || !held || held->amount < amount) {
    throw Error(ErrorCode::InsufficientBond, "'" + bank + "' holds less than " + std::to_string(amount) + " of " + bond.id());
  }
  return {EdgeDelta{bond, -amount},
          EdgeDelta{bond_key(bond.debtor, cb, bond.currency), amount},
          EdgeDelta{reserve_key(cb, bank, bond.currency), amount}};
}

void cb_open_market_purchase(BalanceGraph& g, const AgentId& cb, const AgentId& bank,
                             const InstrumentKey& bond, Amount amount) {
  g.post(plan_cb_open_market_purchase(g, cb, bank, bond, amount));
}

// Receipts pay down an outstanding overdraft before they build a balance, so
// the account never shows a deposit and an overdraft at once.
static void credit_treasury(const BalanceGraph& g, const AgentId& cb, const AgentId& treasury, const UnitId& currency,
                     Amount amount, std::vector<Delta>& deltas) {
  auto repaid = std::min(amount, g.amount(loan_key(cb, treasury, currency)));
  if (repaid > 0) deltas.push_back(EdgeDelta{loan_key(cb, treasury, currency), -repaid});
  if (amount > repaid) deltas.push_back(EdgeDelta{deposit_key(cb, treasury, currency), amount - repaid});
}

std::vector<Delta> plan_treasury_issue_bond(const BalanceGraph& g, const AgentId& treasury,
                                            const AgentId& bank, Amount amount) {
  require_positive(amount);
  const auto& currency = treasury_currency(g, treasury);
  require_kind(g, bank, AgentKind::bank);
  auto cb = issuer(g, currency);
  require_reserves(g, cb, bank, currency, amount);
  std::vector<Delta> deltas{EdgeDelta{bond_key(treasury, bank, currency), amount},
                            EdgeDelta{reserve_key(cb, bank, currency), -amount}};
  credit_treasury(g, cb, treasury, currency, amount, deltas);
  return deltas;
}

InstrumentKey treasury_issue_bond(BalanceGraph& g, const AgentId& treasury, const AgentId& bank,
                                  Amount amount) {
  g.post(plan_treasury_issue_bond(g, treasury, bank, amount));
  return bond_key(treasury, bank, *g.agent(treasury).currency);
}

std::vector<Delta> plan_treasury_spend(const BalanceGraph& g, const AgentId& treasury,
                                       const AgentId& recipient, Amount amount,
                                       std::optional<AgentId> bank) {
  require_positive(amount);
  const auto& currency = treasury_currency(g, treasury);
  auto cb = issuer(g, currency);
  if (is_government_kind(g.agent(recipient).kind)) {
    throw Error(ErrorCode::KindMismatch, "spending goes to the non-government sector");
  }

  std::vector<Delta> deltas;
  auto balance = g.amount(deposit_key(cb, treasury, currency));
  Amount overdraft = 0;
  if (balance < amount) {
    if (!g.config().treasury_overdraft) {
      throw Error(ErrorCode::InsufficientTreasuryBalance,
                  "treasury account holds " + std::to_string(balance));
    }
    overdraft = amount - balance;
    deltas.push_back(EdgeDelta{loan_key(cb, treasury, currency), overdraft});
  }
  deltas.push_back(EdgeDelta{deposit_key(cb, treasury, currency), overdraft - amount});
  if (is_bank(g, recipient)) {
    deltas.push_back(EdgeDelta{reserve_key(cb, recipient, currency), amount});
    return deltas;
  }
  auto at = credit_bank(g, recipient, currency, bank, std::nullopt);
  deltas.push_back(EdgeDelta{reserve_key(cb, at, currency), amount});
  deltas.push_back(EdgeDelta{deposit_key(at, recipient, currency), amount});
  return deltas;
}

void treasury_spend(BalanceGraph& g, const AgentId& treasury, const AgentId& recipient, Amount amount,
                    std::optional<AgentId> bank) {
  g.post(plan_treasury_spend(g, treasury, recipient, amount, std::move(bank)));
}

std::vector<Delta> plan_tax(const BalanceGraph& g, const AgentId& treasury, const AgentId& payer,
                            Amount amount, std::optional<AgentId> bank) {
  require_positive(amount);
  const auto& currency = treasury_currency(g, treasury);
  auto cb = issuer(g, currency);
  if (is_government_kind(g.agent(payer).kind)) {
    throw Error(ErrorCode::KindMismatch, "taxes are levied on the non-government sector");
  }
  if (is_bank(g, payer)) {
    require_reserves(g, cb, payer, currency, amount);
    std::vector<Delta> deltas{EdgeDelta{reserve_key(cb, payer, currency), -amount}};
    credit_treasury(g, cb, treasury, currency, amount, deltas);
    return deltas;
  }
  auto at = debit_bank(g, payer, amount, currency, bank);
  require_reserves(g, cb, at, currency, amount);
  std::vector<Delta> deltas{EdgeDelta{deposit_key(at, payer, currency), -amount},
                            EdgeDelta{reserve_key(cb, at, currency), -amount}};
  credit_treasury(g, cb, treasury, currency, amount, deltas);
  return deltas;
}

void tax(BalanceGraph& g, const AgentId& treasury, const AgentId& payer, Amount amount,
         std::optional<AgentId> bank) {
  g.post(plan_tax(g, treasury, payer, amount, std::move(bank)));
}

// ---------------------------------------------------------------------------
// merging views

namespace {

// Rebuilds `g` with every agent in `group` replaced by `merged`. Edges inside
// the group are dropped; all other edges and holdings are re-pointed.
BalanceGraph merge_agents(const BalanceGraph& g, const std::set<AgentId>& group, const Agent& merged) {
  BalanceGraph out(g.regime(), g.config());
  for (const auto& c : g.currencies()) out.declare_currency(c);
  for (const auto& [c, supply] : g.commodity_supply()) out.declare_commodity(c);

  auto mapped = [&](const AgentId& id) -> const AgentId& { return group.contains(id) ? merged.id : id; };

  bool merged_added = false;
  for (const auto& [id, agent] : g.agents()) {
    if (group.contains(id)) {
      if (!merged_added) {
        out.add_agent(merged.id, merged.kind, merged.issues, merged.currency);
        merged_added = true;
      }
      continue;
    }
    if (id == merged.id) throw Error(ErrorCode::DuplicateAgent, "agent '" + id + "' exists");
    out.add_agent(id, agent.kind, agent.issues, agent.currency);
  }

  std::vector<Delta> deltas;
  for (const auto& [id, agent] : g.agents()) {
    for (const auto& [commodity, qty] : agent.commodities) {
      deltas.push_back(MintDelta{mapped(id), commodity, qty});
    }
  }
  for (const auto& [id, inst] : g.instruments()) {
    auto key = inst.key;
    key.debtor = mapped(key.debtor);
    key.creditor = mapped(key.creditor);
    if (key.debtor == key.creditor) continue;
    deltas.push_back(EdgeDelta{std::move(key), inst.amount});
  }
  out.post(deltas);
  return out;
}

}  // namespace

BalanceGraph consolidate(const BalanceGraph& g, const AgentId& cb, const AgentId& treasury) {
  const auto* central = g.find_agent(cb);
  if (!central || central->kind != AgentKind::central_bank) {
    throw Error(ErrorCode::MissingAgent, "no central bank '" + cb + "'");
  }
  const auto* fiscal = g.find_agent(treasury);
  if (!fiscal || fiscal->kind != AgentKind::treasury) {
    throw Error(ErrorCode::MissingAgent, "no treasury '" + treasury + "'");
  }
  if (central->issues != fiscal->currency) {
    throw Error(ErrorCode::CurrencyMismatch, "'" + cb + "' and '" + treasury + "' serve different currencies");
  }
  Agent merged{cb, AgentKind::central_bank, central->issues, std::nullopt, {}};
  return merge_agents(g, {cb, treasury}, merged);
}

std::string sector_agent_id(AgentKind kind) { return "sector_" + std::string(to_string(kind)); }

BalanceGraph aggregate_sector(const BalanceGraph& g, AgentKind kind) {
  std::set<AgentId> group;
  const Agent* sample = nullptr;
  for (const auto& [id, agent] : g.agents()) {
    if (agent.kind != kind) continue;
    group.insert(id);
    sample = &agent;
  }
  if (group.empty()) {
    throw Error(ErrorCode::MissingAgent, "no agent of kind " + std::string(to_string(kind)));
  }
  if ((kind == AgentKind::central_bank || kind == AgentKind::treasury) && group.size() > 1) {
    throw Error(ErrorCode::CurrencyMismatch, "cannot merge authorities of different currencies");
  }
  Agent merged{sector_agent_id(kind), kind, sample->issues, sample->currency, {}};
  return merge_agents(g, group, merged);
}

}  // namespace moneygraph
