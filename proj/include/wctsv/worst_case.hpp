#pragma once

// Closed-form worst-case upper partial moments of a loss X over moment-based
// uncertainty sets: all distributions with mean mu and standard deviation
// sigma, optionally restricted to symmetric or non-negative X, and optionally
// to E[(X - t)_-] <= lambda (expected excess profit at most lambda).
//
// All functions are pure.

#include <limits>
#include <optional>
#include <string>

namespace wctsv {

struct MomentProfile {
    double mu = 0.0;
    double sigma = 1.0;
};

enum class DistributionFamily { Arbitrary, Symmetric, NonNegative };

const char* to_string(DistributionFamily family);
/// Accepts "arbitrary", "symmetric", "nonnegative" (case-insensitive).
std::optional<DistributionFamily> parse_family(const std::string& name);

/// Upper bound on the expected excess profit E[(X - t)_-]. An absent value
/// means the constraint is dropped.
class RegretBudget {
public:
    RegretBudget() = default;
    static RegretBudget unconstrained() { return {}; }
    /// Throws InvalidArgument unless lambda > 0 (infinity maps to unconstrained).
    static RegretBudget at_most(double lambda);

    bool is_finite() const noexcept { return lambda_.has_value(); }
    double lambda() const noexcept {
        return lambda_.value_or(std::numeric_limits<double>::infinity());
    }

private:
    std::optional<double> lambda_;
};

struct WorstCaseValue {
    double value = 0.0;
    std::string regime;  // which piecewise branch produced the value
};

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }
inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

/// Throws InvalidProfile for sigma <= 0 or non-finite inputs.
void validate_profile(const MomentProfile& p);

/// sup E[(X - t)_+] over the family.
WorstCaseValue wc_expected_regret(const MomentProfile& p, double t, DistributionFamily fam);

/// sup E[(X - t)_+^2] over the family.
WorstCaseValue wc_target_semivariance(const MomentProfile& p, double t, DistributionFamily fam);

/// sup E[(X - t)_+^2] over the family intersected with E[(X - t)_-] <= lambda.
/// Throws EmptyUncertaintySet when that intersection is empty.
WorstCaseValue wc_target_semivariance_constrained(const MomentProfile& p, double t,
                                                  const RegretBudget& b, DistributionFamily fam);

bool set_nonempty(const MomentProfile& p, double t, const RegretBudget& b, DistributionFamily fam);

/// The excess-regret cap m = lambda + mu - t: E[(X-t)_-] <= lambda holds exactly
/// when E[(X-t)_+] <= m.
inline double regret_cap(double mu, double t, double lambda) { return lambda + mu - t; }

struct ReflectComplementBounds {
    double sup_plus1 = 0.0;   // sup E[(X-t)_+]
    double inf_plus1 = 0.0;   // inf E[(X-t)_+]
    double sup_plus2 = 0.0;   // sup E[(X-t)_+^2]
    double inf_plus2 = 0.0;   // inf E[(X-t)_+^2]
    double sup_minus2 = 0.0;  // sup E[(X-t)_-^2]
    double inf_minus2 = 0.0;  // inf E[(X-t)_-^2]
};

/// Six bounds for Arbitrary or Symmetric families derived from the suprema via
/// reflection X -> -X and the complement (x)_+^2 + (x)_-^2 = x^2.
ReflectComplementBounds reflect_complement_bounds(const MomentProfile& p, double t,
                                                  DistributionFamily fam);

}  // namespace wctsv
