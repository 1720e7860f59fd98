#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moneygraph/ledger.hpp"
#include "moneygraph/rational.hpp"

namespace moneygraph {

// Convertibility and pegs share one code path: the reserve asset is either a
// commodity (gold standard) or a foreign currency (peg).
struct PegConfig {
  UnitId domestic;
  UnitId reserve_asset;
  Rational rate{1};  // reserve units per domestic minor unit
  Amount initial_reserves = 0;
};

/// Redeems `amount` of the holder's convertible claims on the domestic
/// issuer. Commodity reserves move to the holder; foreign-currency reserves
/// (deposits held by the issuer) are re-pointed to the holder.
/// `issuer` defaults to the domestic central bank.
std::vector<Delta> plan_redeem(const BalanceGraph& g, const AgentId& holder, Amount amount,
                               const PegConfig& peg, std::optional<AgentId> issuer = std::nullopt);
void redeem(BalanceGraph& g, const AgentId& holder, Amount amount, const PegConfig& peg,
            std::optional<AgentId> issuer = std::nullopt);

/// Reserve-asset units the issuer can still pay out.
Amount peg_reserves(const BalanceGraph& g, const AgentId& issuer, const UnitId& reserve_asset);

// ---------------------------------------------------------------------------
// stochastic redemption demand

/// One step of net redemption demand: positive deltas drain reserves.
struct DemandStep {
  std::int64_t delta = 0;
  Rational probability;
};

struct DemandProcess {
  std::vector<DemandStep> steps;
  std::uint64_t horizon = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

struct RunOutcome {
  std::vector<std::optional<std::uint64_t>> depletion_step;  // 1-based; nullopt = survived
  std::uint64_t depleted = 0;
  std::uint64_t trials = 0;
  Rational frequency;      // depleted / trials
  Rational mean_survival;  // mean of min(depletion step, horizon)

  /// {"depleted":n,"trials":N,"frequency":"n/N","mean_survival":"..."}
  std::string to_json() const;
  /// "trial,depletion_step" rows; survivors have an empty step.
  std::string to_csv() const;
};

/// Parses "+1:1/2,-1:1/2".
std::vector<DemandStep> parse_deltas(std::string_view text);

/// Throws BadDistribution unless probabilities are positive, sum to exactly
/// one, and some delta is positive.
void validate_distribution(std::span<const DemandStep> steps);

/// Reference generator: state starts at the seed, each draw adds the golden
/// gamma and applies the splitmix64 finalizer.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

/// Each trial t uses SplitMix64(seed ^ t). A step draws 64-bit words until
/// one is below the largest multiple of D (the common denominator), reduces
/// it modulo D and picks the first outcome whose cumulative weight exceeds
/// it. Trials are independent, so the outcome does not depend on how they
/// are scheduled.
RunOutcome simulate(const PegConfig& peg, const DemandProcess& demand);

/// Exact depletion probability by enumerating every demand path (pruned at
/// absorption). Refuses more than 10^7 full-length paths.
Rational absorption_oracle(Amount initial_reserves, std::span<const DemandStep> steps,
                           std::uint64_t horizon);

/// Exact depletion probability by dynamic programming over reserve levels.
/// Handles long horizons that enumeration cannot.
Rational absorption_dp(Amount initial_reserves, std::span<const DemandStep> steps,
                       std::uint64_t horizon);

}  // namespace moneygraph
