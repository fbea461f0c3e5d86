#include "wctsv/error.hpp"

namespace wctsv {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidProfile: return "InvalidProfile";
        case ErrorKind::NonNegativeRequiresPositiveMean: return "NonNegativeRequiresPositiveMean";
        case ErrorKind::EmptyUncertaintySet: return "EmptyUncertaintySet";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InfeasibleSupport: return "InfeasibleSupport";
        case ErrorKind::NoKnownWitness: return "NoKnownWitness";
        case ErrorKind::InfeasibleConstraints: return "InfeasibleConstraints";
        case ErrorKind::BudgetExhausted: return "BudgetExhausted";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::DegenerateMeans: return "DegenerateMeans";
        case ErrorKind::InfeasibleBudget: return "InfeasibleBudget";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::NonPositivePrice: return "NonPositivePrice";
        case ErrorKind::UnsortedDates: return "UnsortedDates";
        case ErrorKind::TooFewRows: return "TooFewRows";
        case ErrorKind::WindowTooLarge: return "WindowTooLarge";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

bool Error::is_domain_error() const noexcept {
    switch (kind_) {
        case ErrorKind::EmptyUncertaintySet:
        case ErrorKind::InfeasibleSupport:
        case ErrorKind::NoKnownWitness:
        case ErrorKind::InfeasibleConstraints:
        case ErrorKind::BudgetExhausted:
        case ErrorKind::NotPositiveDefinite:
        case ErrorKind::DegenerateMeans:
        case ErrorKind::InfeasibleBudget:
        case ErrorKind::NonConvergence:
        case ErrorKind::TooFewRows:
        case ErrorKind::WindowTooLarge:
            return true;
        default:
            return false;
    }
}

}  // namespace wctsv
