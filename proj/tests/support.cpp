#include "support.hpp"

#include <algorithm>
#include <unordered_map>

namespace mgtest {
namespace {

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

Amount draw(std::mt19937_64& rng, Amount hi) { return std::uniform_int_distribution<Amount>(1, hi)(rng); }

struct ViewPairHash {
  std::size_t operator()(const std::pair<std::string_view, std::string_view>& p) const noexcept {
    auto h = std::hash<std::string_view>{};
    return h(p.first) * 31 + h(p.second);
  }
};

struct Holding {
  AgentId debtor;
  AgentId creditor;
  Amount amount;
};

std::vector<Holding> edges(const BalanceGraph& g, InstrumentKind kind, const UnitId& currency) {
  std::vector<Holding> out;
  for (const auto& [id, inst] : g.instruments()) {
    if (inst.key.kind == kind && inst.key.currency == currency) {
      out.push_back({inst.key.debtor, inst.key.creditor, inst.amount});
    }
  }
  return out;
}

bool is_household(const BalanceGraph& g, const AgentId& id) { return g.agent(id).kind == AgentKind::nonbank; }

}  // namespace

World fiat_world(int banks, int nonbanks, int foreigners, GraphConfig config) {
  World w;
  w.g = new_graph(Regime::fiat());
  w.g.set_config(config);
  w.g.add_agent(w.cb, AgentKind::central_bank, w.currency);
  w.g.add_agent(w.treasury, AgentKind::treasury, std::nullopt, w.currency);
  for (int i = 0; i < banks; ++i) w.banks.push_back(w.g.add_agent("b" + std::to_string(i), AgentKind::bank));
  for (int i = 0; i < nonbanks; ++i) w.nonbanks.push_back(w.g.add_agent("h" + std::to_string(i), AgentKind::nonbank));
  for (int i = 0; i < foreigners; ++i) {
    w.foreigners.push_back(w.g.add_agent("f" + std::to_string(i), AgentKind::foreign));
  }
  return w;
}

std::optional<Proposal> propose(const World& w, Family family, std::mt19937_64& rng, bool households_only) {
  const auto& g = w.g;
  auto cur = w.currency;
  std::vector<AgentId> parties = w.nonbanks;
  if (!households_only) parties.insert(parties.end(), w.foreigners.begin(), w.foreigners.end());
  auto party_ok = [&](const AgentId& id) {
    return households_only ? is_household(g, id) : g.agent(id).kind != AgentKind::bank;
  };

  Proposal p{family, "", {}, 0};
  switch (family) {
    case Family::create_loan: {
      p.name = "create_loan";
      p.amount = draw(rng, 1000);
      p.params = {{"bank", pick(w.banks, rng)}, {"borrower", pick(parties, rng)}, {"amount", std::to_string(p.amount)}};
      return p;
    }
    case Family::repay_loan: {
      std::vector<Holding> loans;
      for (const auto& l : edges(g, InstrumentKind::loan, cur)) {
        if (g.agent(l.creditor).kind != AgentKind::bank || !party_ok(l.debtor)) continue;
        Amount dep = g.amount(deposit_key(l.creditor, l.debtor, cur));
        if (dep > 0) loans.push_back({l.debtor, l.creditor, std::min(dep, l.amount)});
      }
      if (loans.empty()) return std::nullopt;
      const auto& l = pick(loans, rng);
      p.name = "repay_loan";
      p.amount = draw(rng, l.amount);
      p.params = {{"bank", l.creditor}, {"borrower", l.debtor}, {"amount", std::to_string(p.amount)}};
      return p;
    }
    case Family::pay_deposit: {
      std::vector<Holding> deps;
      for (const auto& d : edges(g, InstrumentKind::deposit, cur)) {
        if (g.agent(d.debtor).kind == AgentKind::bank && party_ok(d.creditor)) deps.push_back(d);
      }
      if (deps.empty() || parties.size() < 2) return std::nullopt;
      const auto& d = pick(deps, rng);
      AgentId payee;
      do {
        payee = pick(parties, rng);
      } while (payee == d.creditor);
      p.name = "pay_deposit";
      p.amount = draw(rng, d.amount);
      p.params = {{"payer", d.creditor},
                  {"payee", payee},
                  {"amount", std::to_string(p.amount)},
                  {"payer_bank", d.debtor},
                  {"payee_bank", pick(w.banks, rng)}};
      return p;
    }
    case Family::withdraw_cash: {
      std::vector<Holding> deps;
      for (const auto& d : edges(g, InstrumentKind::deposit, cur)) {
        if (g.agent(d.debtor).kind != AgentKind::bank || !party_ok(d.creditor)) continue;
        Amount reserves = g.amount(reserve_key(w.cb, d.debtor, cur));
        if (reserves > 0) deps.push_back({d.debtor, d.creditor, std::min(reserves, d.amount)});
      }
      if (deps.empty()) return std::nullopt;
      const auto& d = pick(deps, rng);
      p.name = "withdraw_cash";
      p.amount = draw(rng, d.amount);
      p.params = {{"holder", d.creditor}, {"amount", std::to_string(p.amount)}, {"bank", d.debtor}};
      return p;
    }
    case Family::deposit_cash: {
      std::vector<Holding> notes;
      for (const auto& n : edges(g, InstrumentKind::note, cur)) {
        if (party_ok(n.creditor)) notes.push_back(n);
      }
      if (notes.empty()) return std::nullopt;
      const auto& n = pick(notes, rng);
      p.name = "deposit_cash";
      p.amount = draw(rng, n.amount);
      p.params = {{"holder", n.creditor}, {"amount", std::to_string(p.amount)}, {"bank", pick(w.banks, rng)}};
      return p;
    }
    case Family::open_market_purchase: {
      std::vector<Holding> bonds;
      for (const auto& b : edges(g, InstrumentKind::bond, cur)) {
        if (g.agent(b.creditor).kind == AgentKind::bank) bonds.push_back(b);
      }
      if (bonds.empty()) return std::nullopt;
      const auto& b = pick(bonds, rng);
      p.name = "cb_open_market_purchase";
      p.amount = draw(rng, b.amount);
      p.params = {{"cb", w.cb}, {"bank", b.creditor}, {"treasury", b.debtor}, {"amount", std::to_string(p.amount)}};
      return p;
    }
    case Family::issue_bond: {
      std::vector<Holding> reserves;
      for (const auto& r : edges(g, InstrumentKind::reserve, cur)) reserves.push_back(r);
      if (reserves.empty()) return std::nullopt;
      const auto& r = pick(reserves, rng);
      p.name = "treasury_issue_bond";
      p.amount = draw(rng, r.amount);
      p.params = {{"treasury", w.treasury}, {"bank", r.creditor}, {"amount", std::to_string(p.amount)}};
      return p;
    }
    case Family::treasury_spend: {
      p.name = "treasury_spend";
      p.amount = draw(rng, 500);
      p.params = {{"treasury", w.treasury},
                  {"recipient", pick(w.nonbanks, rng)},
                  {"amount", std::to_string(p.amount)},
                  {"bank", pick(w.banks, rng)}};
      return p;
    }
    case Family::tax: {
      std::vector<Holding> deps;
      for (const auto& d : edges(g, InstrumentKind::deposit, cur)) {
        if (g.agent(d.debtor).kind != AgentKind::bank || !is_household(g, d.creditor)) continue;
        deps.push_back(d);
      }
      if (deps.empty()) return std::nullopt;
      const auto& d = pick(deps, rng);
      p.name = "tax";
      p.amount = draw(rng, d.amount);
      p.params = {{"treasury", w.treasury}, {"payer", d.creditor}, {"amount", std::to_string(p.amount)}, {"bank", d.debtor}};
      return p;
    }
  }
  return std::nullopt;
}

Proposal propose_any(const World& w, std::mt19937_64& rng) {
  while (true) {
    auto f = pick(std::vector<Family>(std::begin(all_families), std::end(all_families)), rng);
    if (auto p = propose(w, f, rng)) return *p;
  }
}

RawMeasures raw_measures(const BalanceGraph& g, const UnitId& currency) {
  RawMeasures m;
  auto government = [&](const Agent& a) {
    return (a.kind == AgentKind::central_bank && a.issues == currency) ||
           (a.kind == AgentKind::treasury && a.currency == currency);
  };
  auto outside = [&](const Agent& a) {
    return a.kind == AgentKind::bank || a.kind == AgentKind::nonbank || a.kind == AgentKind::foreign;
  };
  for (const auto& [id, inst] : g.instruments()) {
    if (inst.key.currency != currency) continue;
    const auto& d = g.agents().at(inst.key.debtor);
    const auto& c = g.agents().at(inst.key.creditor);
    auto k = inst.key.kind;
    if ((k == InstrumentKind::deposit || k == InstrumentKind::note) && c.kind == AgentKind::nonbank) m.broad += inst.amount;
    if ((k == InstrumentKind::note || k == InstrumentKind::reserve) && d.kind == AgentKind::central_bank && outside(c)) {
      m.base += inst.amount;
    }
    if (government(d) && outside(c)) m.net += inst.amount;
    if (government(c) && outside(d)) m.net -= inst.amount;
  }
  return m;
}

std::string raw_conservation(const BalanceGraph& g) {
  std::map<UnitId, __int128> total;
  std::unordered_map<std::pair<std::string_view, std::string_view>, std::pair<__int128, __int128>, ViewPairHash>
      per_agent;
  for (const auto& [id, inst] : g.instruments()) {
    if (inst.amount <= 0) return "nonpositive edge " + id;
    per_agent[{inst.key.creditor, inst.key.currency}].first += inst.amount;
    per_agent[{inst.key.debtor, inst.key.currency}].second += inst.amount;
  }
  for (const auto& [agent, by_unit] : g.all_positions()) {
    for (const auto& [unit, pos] : by_unit) {
      auto it = per_agent.find({std::string_view(agent), std::string_view(unit)});
      __int128 a = it == per_agent.end() ? 0 : it->second.first;
      __int128 l = it == per_agent.end() ? 0 : it->second.second;
      if (a != pos.assets || l != pos.liabilities) return "cached position of " + agent + " in " + unit + " drifted";
      total[unit] += pos.assets - pos.liabilities;
    }
  }
  for (const auto& [key, al] : per_agent) {
    const auto& pos = g.positions(AgentId(key.first));
    if (!pos.contains(UnitId(key.second))) return "missing cached position for " + AgentId(key.first);
  }
  for (const auto& [unit, t] : total) {
    if (t != 0) return "zero-sum broken in " + unit;
  }
  return "";
}

World random_world(std::mt19937_64& rng, int ops) {
  std::uniform_int_distribution<int> nb(1, 4), nh(1, 6), nf(0, 2);
  auto w = fiat_world(nb(rng), nh(rng), nf(rng));
  int done = 0;
  int attempts = 0;
  while (done < ops && attempts < ops * 20) {
    ++attempts;
    auto p = propose_any(w, rng);
    try {
      apply_op(w.g, p.name, p.params);
      ++done;
    } catch (const Error&) {
    }
  }
  return w;
}

}  // namespace mgtest
