#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "moneygraph/errors.hpp"
#include "moneygraph/rational.hpp"

namespace moneygraph {

// Agent ids are lowercase identifiers ([a-z_][a-z0-9_]*); currency and
// commodity ids are uppercase ([A-Z][A-Z0-9_]*).
using AgentId = std::string;
using UnitId = std::string;

// Minor units of a currency or quantity units of a commodity. Ledger state
// never holds a negative Amount; signed values appear only as deltas and
// net worth.
using Amount = std::int64_t;

enum class AgentKind { central_bank, treasury, bank, nonbank, foreign };

enum class InstrumentKind { note, reserve, deposit, loan, bond, convertible_note };

std::string_view to_string(AgentKind kind);
std::string_view to_string(InstrumentKind kind);
std::optional<AgentKind> parse_agent_kind(std::string_view text);
std::optional<InstrumentKind> parse_instrument_kind(std::string_view text);

bool is_agent_identifier(std::string_view text);
bool is_unit_identifier(std::string_view text);

/// Government of a currency is its issuing central bank plus its treasury.
bool is_government_kind(AgentKind kind);

struct Redemption {
  UnitId target;  // commodity or foreign currency
  Rational rate;  // target units per domestic minor unit

  friend bool operator==(const Redemption&, const Redemption&) = default;
};

/// Structural identity of an edge. Two claims of the same kind between the
/// same pair in the same unit (and same redemption terms) are one edge.
struct InstrumentKey {
  InstrumentKind kind = InstrumentKind::deposit;
  AgentId debtor;
  AgentId creditor;
  UnitId currency;
  std::optional<Redemption> redemption;

  /// Canonical id: "kind:debtor->creditor:CUR" with ":TARGET@p/q" appended
  /// for convertible notes.
  std::string id() const;
  /// Same as id() == text, without building the string.
  bool has_id(std::string_view text) const;
  static InstrumentKey parse(std::string_view id);

  friend bool operator==(const InstrumentKey&, const InstrumentKey&) = default;
};

struct Instrument {
  InstrumentKey key;
  Amount amount = 0;

  friend bool operator==(const Instrument&, const Instrument&) = default;
};

struct Agent {
  AgentId id;
  AgentKind kind = AgentKind::nonbank;
  std::optional<UnitId> issues;    // central banks only
  std::optional<UnitId> currency;  // treasuries only: the currency they administer
  std::map<UnitId, Amount> commodities;

  friend bool operator==(const Agent&, const Agent&) = default;
};

struct Regime {
  enum class Kind { pure_commodity, convertible, fiat };
  Kind kind = Kind::fiat;
  bool full_backing = false;

  static Regime fiat() { return {Kind::fiat, false}; }
  static Regime pure_commodity() { return {Kind::pure_commodity, false}; }
  static Regime convertible(bool full_backing) { return {Kind::convertible, full_backing}; }

  bool allows_credit() const {
    return kind == Kind::fiat || (kind == Kind::convertible && !full_backing);
  }
  std::string name() const;

  friend bool operator==(const Regime&, const Regime&) = default;
};

struct GraphConfig {
  bool cb_intraday_credit = false;
  bool treasury_overdraft = false;

  friend bool operator==(const GraphConfig&, const GraphConfig&) = default;
};

// Deltas are the only way ledger state changes.
struct EdgeDelta {
  InstrumentKey key;
  std::int64_t change = 0;
};
struct CommodityDelta {  // moves existing commodity; must net to zero per commodity
  AgentId agent;
  UnitId commodity;
  std::int64_t change = 0;
};
struct MintDelta {  // the only delta that changes total commodity supply
  AgentId agent;
  UnitId commodity;
  Amount quantity = 0;
};
using Delta = std::variant<EdgeDelta, CommodityDelta, MintDelta>;

/// Cached per-agent, per-currency financial totals. Maintained incrementally
/// by post() and re-derived from edges by check_invariants().
struct Position {
  Amount assets = 0;
  Amount liabilities = 0;

  friend bool operator==(const Position&, const Position&) = default;
};

class BalanceGraph {
 public:
  explicit BalanceGraph(Regime regime = Regime::fiat(), GraphConfig config = {});

  const Regime& regime() const { return regime_; }
  const GraphConfig& config() const { return config_; }
  void set_config(const GraphConfig& config) { config_ = config; }

  void declare_currency(const UnitId& id);
  void declare_commodity(const UnitId& id);
  bool has_currency(const UnitId& id) const { return currencies_.contains(id); }
  bool has_commodity(const UnitId& id) const { return commodity_supply_.contains(id); }
  bool has_unit(const UnitId& id) const { return has_currency(id) || has_commodity(id); }
  const std::set<UnitId>& currencies() const { return currencies_; }
  const std::map<UnitId, Amount>& commodity_supply() const { return commodity_supply_; }

  /// Central banks declare the currency they issue. A treasury administers
  /// `currency`; when omitted it defaults to the only declared currency.
  const AgentId& add_agent(const AgentId& id, AgentKind kind,
                           std::optional<UnitId> issues = std::nullopt,
                           std::optional<UnitId> currency = std::nullopt);

  /// Atomic rewrite: either every delta applies or the graph is untouched.
  void post(std::span<const Delta> deltas);
  void post(std::initializer_list<Delta> deltas) {
    post(std::span<const Delta>(deltas.begin(), deltas.size()));
  }

  const std::map<AgentId, Agent>& agents() const { return agents_; }
  const std::map<std::string, Instrument>& instruments() const { return instruments_; }
  const Agent* find_agent(const AgentId& id) const;
  const Agent& agent(const AgentId& id) const;  // throws UnknownAgent
  const Instrument* find_instrument(const std::string& id) const;
  Amount amount(const InstrumentKey& key) const;
  Amount commodity_holding(const AgentId& agent, const UnitId& commodity) const;

  /// Instrument ids where the agent is debtor or creditor, sorted.
  const std::set<std::string>& edges_of(const AgentId& agent) const;

  const std::map<UnitId, Position>& positions(const AgentId& agent) const;
  const std::map<AgentId, std::map<UnitId, Position>>& all_positions() const { return positions_; }
  std::optional<AgentId> issuer_of(const UnitId& currency) const;
  std::optional<AgentId> treasury_of(const UnitId& currency) const;

  /// Reserve-asset holdings backing convertible liabilities: commodity
  /// holdings for a commodity, deposit claims for a currency.
  Amount backing_holdings(const AgentId& agent, const UnitId& target) const;

  friend bool operator==(const BalanceGraph&, const BalanceGraph&) = default;

 private:
  friend BalanceGraph load_snapshot(std::string_view text);

  struct Staged;
  void validate_edge(const EdgeDelta& delta) const;
  void check_regime(const Staged& staged) const;
  void check_backing(const Staged& staged, const AgentId& agent) const;
  void commit(const Staged& staged);

  Regime regime_;
  GraphConfig config_;
  std::set<UnitId> currencies_;
  std::map<UnitId, Amount> commodity_supply_;
  std::map<AgentId, Agent> agents_;
  std::map<std::string, Instrument> instruments_;
  std::map<AgentId, std::map<UnitId, Position>> positions_;
  std::map<AgentId, std::set<std::string>> adjacency_;
};

BalanceGraph new_graph(Regime regime);

struct SheetLine {
  std::string source;  // instrument kind, or commodity id for real holdings
  Amount amount = 0;

  friend bool operator==(const SheetLine&, const SheetLine&) = default;
};

/// Derived per-agent view in one unit. Lines are aggregated by source so the
/// sheet does not depend on counterparty identity.
struct BalanceSheet {
  AgentId agent;
  UnitId unit;
  std::vector<SheetLine> assets;
  std::vector<SheetLine> liabilities;
  std::int64_t net_worth = 0;

  std::string to_json() const;
  friend bool operator==(const BalanceSheet&, const BalanceSheet&) = default;
};

BalanceSheet balance_sheet(const BalanceGraph& g, const AgentId& agent, const UnitId& unit);

struct Violation {
  std::string code;
  std::string unit;   // currency or commodity concerned, may be empty
  std::string subject;  // agent or instrument id, may be empty
  std::string message;
};

/// Re-derives every conservation law and regime constraint from raw state.
std::vector<Violation> check_invariants(const BalanceGraph& g);

/// Canonical JSON snapshot; equal graphs give byte-equal text.
std::string snapshot(const BalanceGraph& g);
BalanceGraph load_snapshot(std::string_view text);

/// 64-bit FNV-1a of the snapshot text, hex encoded.
std::string state_hash(const BalanceGraph& g);

}  // namespace moneygraph
