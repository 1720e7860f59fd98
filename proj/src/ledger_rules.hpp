#pragma once

#include <optional>
#include <string>

#include "moneygraph/ledger.hpp"

namespace moneygraph::detail {

struct RuleBreach {
  ErrorCode code;
  std::string message;
};

/// Debtor/creditor kind constraints and issuer-currency consistency for one
/// edge. Assumes both agents exist.
std::optional<RuleBreach> kind_rule_breach(const Agent& debtor, const Agent& creditor,
                                           const InstrumentKey& key);

/// Whether the regime admits a positive edge of this kind.
bool regime_admits(const Regime& regime, InstrumentKind kind);

std::int64_t checked_add(std::int64_t a, std::int64_t b);

}  // namespace moneygraph::detail
