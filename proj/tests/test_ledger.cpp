#include "doctest.h"
#include "json.hpp"
#include "moneygraph/ledger.hpp"
#include "moneygraph/operations.hpp"
#include "support.hpp"

using namespace moneygraph;

namespace {

BalanceGraph three_agents(Regime regime = Regime::fiat()) {
  auto g = new_graph(regime);
  g.add_agent("cb", AgentKind::central_bank, "DOM");
  g.add_agent("b1", AgentKind::bank);
  g.add_agent("h1", AgentKind::nonbank);
  return g;
}

InstrumentKey dep(const char* bank, const char* holder) { return {InstrumentKind::deposit, bank, holder, "DOM", {}}; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::BadParameter;
}

}  // namespace

TEST_CASE("new graphs are empty in every regime") {
  for (auto r : {Regime::fiat(), Regime::pure_commodity(), Regime::convertible(true), Regime::convertible(false)}) {
    auto g = new_graph(r);
    CHECK(g.agents().empty());
    CHECK(g.instruments().empty());
    CHECK(check_invariants(g).empty());
    CHECK(g.regime() == r);
  }
}

TEST_CASE("deposit posted on a pure commodity graph is rejected") {
  auto g = three_agents(Regime::pure_commodity());
  auto before = snapshot(g);
  CHECK(code_of([&] { g.post({EdgeDelta{dep("b1", "h1"), 50}}); }) == ErrorCode::RegimeViolation);
  CHECK(snapshot(g) == before);
}

TEST_CASE("add_agent") {
  auto g = new_graph(Regime::fiat());
  CHECK(g.add_agent("cb", AgentKind::central_bank, "DOM") == "cb");
  CHECK(g.agent("cb").issues == "DOM");
  CHECK(g.has_currency("DOM"));
  CHECK(g.issuer_of("DOM") == "cb");

  SUBCASE("second issuer of the same currency") {
    CHECK(code_of([&] { g.add_agent("cb2", AgentKind::central_bank, "DOM"); }) == ErrorCode::DuplicateCentralBank);
  }
  SUBCASE("central bank without a currency") {
    CHECK(code_of([&] { g.add_agent("cb2", AgentKind::central_bank); }) == ErrorCode::IssuerRequired);
  }
  SUBCASE("household") {
    g.add_agent("h1", AgentKind::nonbank);
    CHECK(g.agent("h1").kind == AgentKind::nonbank);
    CHECK(g.agent("h1").commodities.empty());
    CHECK(code_of([&] { g.add_agent("h1", AgentKind::nonbank); }) == ErrorCode::DuplicateAgent);
  }
  SUBCASE("one treasury per currency") {
    g.add_agent("tr", AgentKind::treasury);
    CHECK(g.treasury_of("DOM") == "tr");
    CHECK(code_of([&] { g.add_agent("tr2", AgentKind::treasury, std::nullopt, "DOM"); }) ==
          ErrorCode::DuplicateTreasury);
  }
  SUBCASE("issues is only for central banks") {
    CHECK(code_of([&] { g.add_agent("b1", AgentKind::bank, "DOM"); }) == ErrorCode::BadParameter);
  }
  SUBCASE("identifiers") {
    CHECK(code_of([&] { g.add_agent("Bad", AgentKind::bank); }) == ErrorCode::InvalidIdentifier);
    CHECK(code_of([&] { g.add_agent("cbx", AgentKind::central_bank, "dom"); }) == ErrorCode::InvalidIdentifier);
  }
}

TEST_CASE("post applies atomically") {
  auto g = three_agents();
  g.post({EdgeDelta{dep("b1", "h1"), 100}});
  CHECK(g.amount(dep("b1", "h1")) == 100);
  auto before = snapshot(g);

  CHECK(code_of([&] { g.post({EdgeDelta{dep("b1", "h1"), -200}}); }) == ErrorCode::NegativeAmount);
  CHECK(snapshot(g) == before);

  // first delta is fine, second is not: nothing applies
  CHECK(code_of([&] {
          g.post({EdgeDelta{dep("b1", "h1"), 10}, EdgeDelta{{InstrumentKind::loan, "h1", "nobody", "DOM", {}}, 5}});
        }) == ErrorCode::UnknownAgent);
  CHECK(snapshot(g) == before);

  CHECK(code_of([&] { g.post({EdgeDelta{{InstrumentKind::deposit, "b1", "b1", "DOM", {}}, 5}}); }) ==
        ErrorCode::SelfClaim);
  CHECK(code_of([&] { g.post({EdgeDelta{{InstrumentKind::reserve, "b1", "h1", "DOM", {}}, 5}}); }) ==
        ErrorCode::KindMismatch);
  CHECK(code_of([&] { g.post({EdgeDelta{{InstrumentKind::deposit, "b1", "h1", "XYZ", {}}, 5}}); }) ==
        ErrorCode::UnknownCurrency);
  CHECK(snapshot(g) == before);
}

TEST_CASE("zero edges are deleted eagerly") {
  auto g = three_agents();
  auto empty = snapshot(g);
  g.post({EdgeDelta{dep("b1", "h1"), 100}});
  g.post({EdgeDelta{dep("b1", "h1"), -100}});
  CHECK(g.instruments().empty());
  CHECK(snapshot(g) == empty);
}

TEST_CASE("commodity deltas must conserve supply") {
  auto g = three_agents();
  g.declare_commodity("GOLD");
  g.post({MintDelta{"h1", "GOLD", 10}});
  CHECK(g.commodity_holding("h1", "GOLD") == 10);
  CHECK(g.commodity_supply().at("GOLD") == 10);
  CHECK(code_of([&] { g.post({CommodityDelta{"h1", "GOLD", -3}}); }) == ErrorCode::RegimeViolation);
  g.post({CommodityDelta{"h1", "GOLD", -3}, CommodityDelta{"b1", "GOLD", 3}});
  CHECK(g.commodity_holding("b1", "GOLD") == 3);
  CHECK(g.commodity_supply().at("GOLD") == 10);
  CHECK(code_of([&] { g.post({MintDelta{"h1", "GOLD", 0}}); }) == ErrorCode::ZeroAmount);
}

TEST_CASE("balance sheets after a loan") {
  auto g = three_agents();
  create_loan(g, "b1", "h1", 100, "DOM");

  auto h = balance_sheet(g, "h1", "DOM");
  REQUIRE(h.assets.size() == 1);
  CHECK(h.assets[0] == SheetLine{"deposit", 100});
  REQUIRE(h.liabilities.size() == 1);
  CHECK(h.liabilities[0] == SheetLine{"loan", 100});
  CHECK(h.net_worth == 0);

  // recompute the bank's sheet from raw edges
  std::int64_t assets = 0, liabilities = 0;
  for (const auto& [id, inst] : g.instruments()) {
    if (inst.key.creditor == "b1" && inst.key.currency == "DOM") assets += inst.amount;
    if (inst.key.debtor == "b1" && inst.key.currency == "DOM") liabilities += inst.amount;
  }
  auto b = balance_sheet(g, "b1", "DOM");
  CHECK(assets == 100);
  CHECK(liabilities == 100);
  CHECK(b.net_worth == assets - liabilities);
  CHECK(b.assets[0] == SheetLine{"loan", 100});
  CHECK(b.liabilities[0] == SheetLine{"deposit", 100});

  CHECK(balance_sheet(g, "cb", "DOM").net_worth == 0);
  CHECK(balance_sheet(g, "cb", "DOM").assets.empty());
  CHECK(balance_sheet(g, "h1", "DOM").to_json() == h.to_json());
  CHECK(code_of([&] { balance_sheet(g, "nobody", "DOM"); }) == ErrorCode::UnknownAgent);
}

TEST_CASE("commodity sheets value holdings at one") {
  auto g = three_agents();
  g.declare_commodity("GOLD");
  mint_commodity(g, "h1", "GOLD", 10);
  auto s = balance_sheet(g, "h1", "GOLD");
  CHECK(s.net_worth == 10);
  CHECK(s.assets[0] == SheetLine{"GOLD", 10});
}

TEST_CASE("check_invariants on healthy graphs") {
  CHECK(check_invariants(new_graph(Regime::fiat())).empty());
  std::mt19937_64 rng(7);
  auto w = mgtest::random_world(rng, 300);
  CHECK(check_invariants(w.g).empty());
  CHECK(mgtest::raw_conservation(w.g).empty());
}

TEST_CASE("a hand-corrupted snapshot is reported with its currency") {
  auto g = three_agents();
  g.add_agent("h2", AgentKind::nonbank);
  create_loan(g, "b1", "h1", 100, "DOM");
  create_loan(g, "b1", "h2", 40, "DOM");
  auto golden = snapshot(g);

  auto j = nlohmann::ordered_json::parse(golden);
  bool edited = false;
  for (auto& inst : j["instruments"]) {
    if (inst["id"] == "deposit:b1->h1:DOM") {
      inst["amount"] = "101";
      edited = true;
    }
  }
  REQUIRE(edited);
  auto corrupted = load_snapshot(j.dump(2) + "\n");
  auto report = check_invariants(corrupted);
  REQUIRE_FALSE(report.empty());
  bool names_currency = false;
  for (const auto& v : report) {
    if (v.code == "zero_sum" || v.code == "position_mismatch") names_currency = names_currency || v.unit == "DOM";
  }
  CHECK(names_currency);
  CHECK_FALSE(mgtest::raw_conservation(corrupted).empty());
}

TEST_CASE("a negative edge in a snapshot is reported") {
  auto g = three_agents();
  create_loan(g, "b1", "h1", 100, "DOM");
  auto j = nlohmann::ordered_json::parse(snapshot(g));
  j["instruments"][0]["amount"] = "0";
  auto report = check_invariants(load_snapshot(j.dump()));
  CHECK_FALSE(report.empty());
}

TEST_CASE("snapshot round trip is byte-exact") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    auto w = mgtest::random_world(rng, 50 + i * 10);
    auto text = snapshot(w.g);
    auto back = load_snapshot(text);
    CHECK(snapshot(back) == text);
    CHECK(back == w.g);
    CHECK(state_hash(back) == state_hash(w.g));
  }
}

TEST_CASE("malformed snapshots raise ErrSnapshot") {
  CHECK(code_of([] { load_snapshot("not json"); }) == ErrorCode::Snapshot);
  CHECK(code_of([] { load_snapshot("{}"); }) == ErrorCode::Snapshot);
  CHECK(code_of([] { load_snapshot(R"({"regime":{"kind":"weird","full_backing":false}})"); }) ==
        ErrorCode::Snapshot);
}

TEST_CASE("instrument ids round trip") {
  InstrumentKey plain{InstrumentKind::loan, "h1", "b1", "DOM", {}};
  CHECK(plain.id() == "loan:h1->b1:DOM");
  CHECK(InstrumentKey::parse(plain.id()) == plain);
  InstrumentKey conv{InstrumentKind::convertible_note, "b1", "h1", "DOM", Redemption{"GOLD", Rational(1, 3)}};
  CHECK(conv.id() == "convertible_note:b1->h1:DOM:GOLD@1/3");
  CHECK(InstrumentKey::parse(conv.id()) == conv);
  CHECK(code_of([] { InstrumentKey::parse("loan:h1:DOM"); }) == ErrorCode::BadParameter);
}

TEST_CASE("sum of net worths is zero per currency") {
  std::mt19937_64 rng(3);
  auto w = mgtest::random_world(rng, 500);
  std::int64_t total = 0;
  for (const auto& [id, a] : w.g.agents()) total += balance_sheet(w.g, id, "DOM").net_worth;
  CHECK(total == 0);
}
