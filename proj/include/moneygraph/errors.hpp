#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace moneygraph {

// Engine error codes. Each maps to a stable external name ("ErrRegimeViolation")
// used by scenarios, traces and the HTTP API.
enum class ErrorCode {
  DuplicateCentralBank,
  DuplicateTreasury,
  DuplicateAgent,
  IssuerRequired,
  InvalidIdentifier,
  NegativeAmount,
  ZeroAmount,
  Overflow,
  RegimeViolation,
  KindMismatch,
  SelfClaim,
  UnknownAgent,
  UnknownInstrument,
  UnknownCurrency,
  UnknownOperation,
  BadParameter,
  InsufficientCommodity,
  InsufficientBacking,
  InsufficientDeposit,
  ExceedsLoan,
  InsufficientReserves,
  InsufficientNotes,
  InsufficientBond,
  InsufficientTreasuryBalance,
  MissingAgent,
  CurrencyMismatch,
  ReservesDepleted,
  Indivisible,
  InsufficientClaim,
  BadDistribution,
  TooLarge,
  Snapshot,
};

std::string_view error_name(ErrorCode code);
std::optional<ErrorCode> parse_error_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace moneygraph
