#include "moneygraph/pegsim.hpp"

#include <charconv>
#include <functional>
#include <limits>

#include "json.hpp"
#include "ledger_rules.hpp"
#include "moneygraph/operations.hpp"

namespace moneygraph {
namespace {

constexpr std::uint64_t kMaxEnumeratedPaths = 10'000'000;

Error bad_distribution(const std::string& why) { return Error(ErrorCode::BadDistribution, why); }

BigInt common_denominator(std::span<const DemandStep> steps) {
  BigInt d = 1;
  for (const auto& s : steps) d = boost::multiprecision::lcm(d, s.probability.denominator());
  return d;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// redemption

Amount peg_reserves(const BalanceGraph& g, const AgentId& issuer, const UnitId& reserve_asset) {
  return g.backing_holdings(issuer, reserve_asset);
}

std::vector<Delta> plan_redeem(const BalanceGraph& g, const AgentId& holder, Amount amount,
                               const PegConfig& peg, std::optional<AgentId> issuer) {
  if (amount <= 0) throw Error(ErrorCode::ZeroAmount, "amount must be positive");
  if (!peg.rate.is_positive()) throw Error(ErrorCode::BadParameter, "peg rate must be positive");
  g.agent(holder);
  if (!g.has_currency(peg.domestic)) throw Error(ErrorCode::UnknownCurrency, "unknown currency " + peg.domestic);
  if (!g.has_unit(peg.reserve_asset)) {
    throw Error(ErrorCode::UnknownCurrency, "unknown reserve asset " + peg.reserve_asset);
  }
  if (!issuer) issuer = g.issuer_of(peg.domestic);
  if (!issuer) throw Error(ErrorCode::MissingAgent, "currency " + peg.domestic + " has no issuer");
  g.agent(*issuer);

  const Amount reserves = peg_reserves(g, *issuer, peg.reserve_asset);
  if (reserves == 0) {
    throw Error(ErrorCode::ReservesDepleted, "'" + *issuer + "' has no " + peg.reserve_asset + " left");
  }
  const Rational converted = Rational(amount) * peg.rate;
  if (!converted.is_integer()) {
    throw Error(ErrorCode::Indivisible, std::to_string(amount) + " at rate " + peg.rate.str() +
                                            " is not a whole number of " + peg.reserve_asset);
  }
  if (converted > Rational(reserves)) {
    throw Error(ErrorCode::ReservesDepleted, "redemption needs " + converted.str() + " " +
                                                 peg.reserve_asset + ", reserves are " + std::to_string(reserves));
  }
  const auto payout = static_cast<Amount>(converted.numerator());

  InstrumentKey claim{InstrumentKind::convertible_note, *issuer, holder, peg.domestic,
                      Redemption{peg.reserve_asset, peg.rate}};
  if (g.amount(claim) < amount) {
    throw Error(ErrorCode::InsufficientClaim, "'" + holder + "' holds less than " +
                                                  std::to_string(amount) + " of " + claim.id());
  }

  std::vector<Delta> deltas{EdgeDelta{claim, -amount}};
  if (g.has_commodity(peg.reserve_asset)) {
    deltas.push_back(CommodityDelta{*issuer, peg.reserve_asset, -payout});
    deltas.push_back(CommodityDelta{holder, peg.reserve_asset, payout});
    return deltas;
  }
  // Foreign-currency reserves: hand over deposit claims, first debtor first.
  Amount left = payout;
  for (const auto& id : g.edges_of(*issuer)) {
    if (left == 0) break;
    const auto& inst = *g.find_instrument(id);
    const auto& key = inst.key;
    if (key.kind != InstrumentKind::deposit || key.creditor != *issuer || key.currency != peg.reserve_asset) {
      continue;
    }
    Amount take = std::min(left, inst.amount);
    deltas.push_back(EdgeDelta{key, -take});
    if (key.debtor != holder) deltas.push_back(EdgeDelta{deposit_key(key.debtor, holder, key.currency), take});
    left -= take;
  }
  return deltas;
}

void redeem(BalanceGraph& g, const AgentId& holder, Amount amount, const PegConfig& peg,
            std::optional<AgentId> issuer) {
  g.post(plan_redeem(g, holder, amount, peg, std::move(issuer)));
}

// ---------------------------------------------------------------------------
// demand processes

std::vector<DemandStep> parse_deltas(std::string_view text) {
  std::vector<DemandStep> out;
  while (true) {
    auto comma = text.find(',');
    auto item = trim(text.substr(0, comma));
    auto colon = item.find(':');
    if (colon == std::string_view::npos) throw bad_distribution("expected delta:probability, got '" + std::string(item) + "'");
    auto delta_text = trim(item.substr(0, colon));
    if (!delta_text.empty() && delta_text.front() == '+') delta_text.remove_prefix(1);
    std::int64_t delta = 0;
    auto [ptr, ec] = std::from_chars(delta_text.data(), delta_text.data() + delta_text.size(), delta);
    if (ec != std::errc() || ptr != delta_text.data() + delta_text.size() || delta_text.empty()) {
      throw bad_distribution("bad delta '" + std::string(delta_text) + "'");
    }
    try {
      out.push_back({delta, Rational::parse(trim(item.substr(colon + 1)))});
    } catch (const Error&) {
      throw bad_distribution("bad probability in '" + std::string(item) + "'");
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

void validate_distribution(std::span<const DemandStep> steps) {
  if (steps.empty()) throw bad_distribution("empty demand distribution");
  Rational total;
  for (const auto& s : steps) {
    if (!s.probability.is_positive()) throw bad_distribution("probabilities must be positive");
    total += s.probability;
  }
  if (total != Rational(1)) throw bad_distribution("probabilities sum to " + total.str() + ", not 1");
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RunOutcome simulate(const PegConfig& peg, const DemandProcess& demand) {
  validate_distribution(demand.steps);
  if (demand.trials == 0) throw bad_distribution("trials must be positive");
  if (demand.horizon == 0) throw bad_distribution("horizon must be positive");
  if (peg.initial_reserves < 0) throw bad_distribution("initial reserves must be >= 0");
  if (!peg.rate.is_positive()) throw bad_distribution("rate must be positive");

  const BigInt big_d = common_denominator(demand.steps);
  if (big_d > BigInt(std::numeric_limits<std::uint64_t>::max())) {
    throw bad_distribution("probability denominators too large for exact sampling");
  }
  const auto d = static_cast<std::uint64_t>(big_d);
  std::vector<std::uint64_t> cumulative;
  std::uint64_t acc = 0;
  for (const auto& s : demand.steps) {
    acc += static_cast<std::uint64_t>(s.probability.numerator() * (big_d / s.probability.denominator()));
    cumulative.push_back(acc);
  }
  // 2^64 mod d; words at or above 2^64 - rem are redrawn.
  const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % d + 1) % d;
  const std::uint64_t reject_from = rem == 0 ? 0 : std::uint64_t(0) - rem;

  RunOutcome out;
  out.trials = demand.trials;
  out.depletion_step.reserve(demand.trials);
  BigInt survival_total = 0;
  for (std::uint64_t t = 0; t < demand.trials; ++t) {
    SplitMix64 rng(demand.seed ^ t);
    std::int64_t reserves = peg.initial_reserves;
    std::optional<std::uint64_t> hit;
    if (reserves <= 0) hit = 0;
    for (std::uint64_t step = 1; !hit && step <= demand.horizon; ++step) {
      std::uint64_t word = rng.next();
      while (rem != 0 && word >= reject_from) word = rng.next();
      const std::uint64_t k = word % d;
      std::size_t pick = 0;
      while (cumulative[pick] <= k) ++pick;
      reserves = detail::checked_add(reserves, -demand.steps[pick].delta);
      if (reserves <= 0) hit = step;
    }
    if (hit) ++out.depleted;
    survival_total += hit ? *hit : demand.horizon;
    out.depletion_step.push_back(hit);
  }
  out.frequency = Rational(BigInt(out.depleted), BigInt(out.trials));
  out.mean_survival = Rational(survival_total, BigInt(out.trials));
  return out;
}

std::string RunOutcome::to_json() const {
  nlohmann::ordered_json j;
  j["depleted"] = depleted;
  j["trials"] = trials;
  j["frequency"] = std::to_string(depleted) + "/" + std::to_string(trials);
  j["mean_survival"] = mean_survival.str();
  return j.dump();
}

std::string RunOutcome::to_csv() const {
  std::string out = "trial,depletion_step\n";
  for (std::size_t i = 0; i < depletion_step.size(); ++i) {
    out += std::to_string(i) + ",";
    if (depletion_step[i]) out += std::to_string(*depletion_step[i]);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// exact oracles

Rational absorption_oracle(Amount initial_reserves, std::span<const DemandStep> steps,
                           std::uint64_t horizon) {
  validate_distribution(steps);
  if (initial_reserves <= 0) return Rational(1);
  std::uint64_t paths = 1;
  for (std::uint64_t i = 0; i < horizon; ++i) {
    if (paths > kMaxEnumeratedPaths / steps.size()) {
      throw Error(ErrorCode::TooLarge, "more than 10^7 demand paths; use the recurrence oracle");
    }
    paths *= steps.size();
  }

  Rational absorbed;
  std::function<void(std::int64_t, std::uint64_t, const Rational&)> walk =
      [&](std::int64_t level, std::uint64_t depth, const Rational& mass) {
        for (const auto& s : steps) {
          const std::int64_t next = level - s.delta;
          const Rational p = mass * s.probability;
          if (next <= 0) {
            absorbed += p;
          } else if (depth + 1 < horizon) {
            walk(next, depth + 1, p);
          }
        }
      };
  if (horizon > 0) walk(initial_reserves, 0, Rational(1));
  return absorbed;
}

Rational absorption_dp(Amount initial_reserves, std::span<const DemandStep> steps,
                       std::uint64_t horizon) {
  validate_distribution(steps);
  if (initial_reserves <= 0) return Rational(1);

  // Integer weights over a common denominator D: after t steps every mass
  // is a numerator over D^t, so no gcd work inside the loop.
  const BigInt d = common_denominator(steps);
  std::vector<BigInt> weight;
  std::int64_t max_inflow = 0;
  for (const auto& s : steps) {
    weight.push_back(s.probability.numerator() * (d / s.probability.denominator()));
    max_inflow = std::max<std::int64_t>(max_inflow, -s.delta);
  }
  // Levels 1..top are alive; index = level.
  const auto top = static_cast<std::size_t>(initial_reserves) + static_cast<std::size_t>(max_inflow) * horizon;
  std::vector<BigInt> mass(top + 1), next(top + 1);
  mass[static_cast<std::size_t>(initial_reserves)] = 1;
  BigInt absorbed = 0;
  std::size_t hi = static_cast<std::size_t>(initial_reserves);

  for (std::uint64_t t = 0; t < horizon; ++t) {
    absorbed *= d;
    for (std::size_t level = 1; level <= std::min(top, hi + static_cast<std::size_t>(max_inflow)); ++level) {
      next[level] = 0;
    }
    for (std::size_t level = 1; level <= hi; ++level) {
      if (mass[level] == 0) continue;
      for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::int64_t to = static_cast<std::int64_t>(level) - steps[i].delta;
        if (to <= 0) {
          absorbed += mass[level] * weight[i];
        } else {
          next[static_cast<std::size_t>(to)] += mass[level] * weight[i];
        }
      }
    }
    hi = std::min(top, hi + static_cast<std::size_t>(max_inflow));
    std::swap(mass, next);
  }
  return Rational(absorbed, boost::multiprecision::pow(d, static_cast<unsigned>(horizon)));
}

}  // namespace moneygraph
