#pragma once

#include <stdexcept>
#include <string>

namespace wctsv {

enum class ErrorKind {
    InvalidProfile,
    NonNegativeRequiresPositiveMean,
    EmptyUncertaintySet,
    InvalidArgument,
    InfeasibleSupport,
    NoKnownWitness,
    InfeasibleConstraints,
    BudgetExhausted,
    NotPositiveDefinite,
    DegenerateMeans,
    InfeasibleBudget,
    NonConvergence,
    ParseError,
    NonPositivePrice,
    UnsortedDates,
    TooFewRows,
    WindowTooLarge,
    IoError,
};

const char* to_string(ErrorKind kind);

/// Every library failure is reported through this type; `kind()` tells the
/// caller which contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for failures that describe the model (empty set, infeasible
    /// budget, singular covariance) rather than malformed input.
    bool is_domain_error() const noexcept;

private:
    ErrorKind kind_;
};

}  // namespace wctsv
