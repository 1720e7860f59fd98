#include "moneygraph/errors.hpp"

#include <array>
#include <utility>

namespace moneygraph {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 32> kNames{{
    {ErrorCode::DuplicateCentralBank, "ErrDuplicateCentralBank"},
    {ErrorCode::DuplicateTreasury, "ErrDuplicateTreasury"},
    {ErrorCode::DuplicateAgent, "ErrDuplicateAgent"},
    {ErrorCode::IssuerRequired, "ErrIssuerRequired"},
    {ErrorCode::InvalidIdentifier, "ErrInvalidIdentifier"},
    {ErrorCode::NegativeAmount, "ErrNegativeAmount"},
    {ErrorCode::ZeroAmount, "ErrZeroAmount"},
    {ErrorCode::Overflow, "ErrOverflow"},
    {ErrorCode::RegimeViolation, "ErrRegimeViolation"},
    {ErrorCode::KindMismatch, "ErrKindMismatch"},
    {ErrorCode::SelfClaim, "ErrSelfClaim"},
    {ErrorCode::UnknownAgent, "ErrUnknownAgent"},
    {ErrorCode::UnknownInstrument, "ErrUnknownInstrument"},
    {ErrorCode::UnknownCurrency, "ErrUnknownCurrency"},
    {ErrorCode::UnknownOperation, "ErrUnknownOperation"},
    {ErrorCode::BadParameter, "ErrBadParameter"},
    {ErrorCode::InsufficientCommodity, "ErrInsufficientCommodity"},
    {ErrorCode::InsufficientBacking, "ErrInsufficientBacking"},
    {ErrorCode::InsufficientDeposit, "ErrInsufficientDeposit"},
    {ErrorCode::ExceedsLoan, "ErrExceedsLoan"},
    {ErrorCode::InsufficientReserves, "ErrInsufficientReserves"},
    {ErrorCode::InsufficientNotes, "ErrInsufficientNotes"},
    {ErrorCode::InsufficientBond, "ErrInsufficientBond"},
    {ErrorCode::InsufficientTreasuryBalance, "ErrInsufficientTreasuryBalance"},
    {ErrorCode::MissingAgent, "ErrMissingAgent"},
    {ErrorCode::CurrencyMismatch, "ErrCurrencyMismatch"},
    {ErrorCode::ReservesDepleted, "ErrReservesDepleted"},
    {ErrorCode::Indivisible, "ErrIndivisible"},
    {ErrorCode::InsufficientClaim, "ErrInsufficientClaim"},
    {ErrorCode::BadDistribution, "ErrBadDistribution"},
    {ErrorCode::TooLarge, "ErrTooLarge"},
    {ErrorCode::Snapshot, "ErrSnapshot"},
}};

}  // namespace

std::string_view error_name(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "ErrUnknown";
}

std::optional<ErrorCode> parse_error_name(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

}  // namespace moneygraph
