#pragma once

// Brute-force counterpart of the closed forms in worst_case.hpp.
//
// The search never calls the closed forms: it maximizes E[(X-t)_+^2] directly
// over small families of discrete distributions that are known to contain
// (near-)worst cases, so any disagreement with worst_case.hpp points at a
// wrong formula or a wrong branch.

#include <cstdint>
#include <optional>

#include "wctsv/discrete_distribution.hpp"
#include "wctsv/error.hpp"
#include "wctsv/worst_case.hpp"

namespace wctsv::oracle {

struct OracleReport {
    double best_value = 0.0;
    DiscreteDistribution witness;
    std::size_t evaluations = 0;
    std::uint64_t seed = 0;
};

/// Thrown when fewer than 10% of the multi-starts reached a feasible point
/// within their share of the evaluation budget. Carries the best feasible point found so far.
class BudgetExhausted : public Error {
public:
    BudgetExhausted(const std::string& message, OracleReport best)
        : Error(ErrorKind::BudgetExhausted, message), best_(std::move(best)) {}
    const OracleReport& best_so_far() const noexcept { return best_; }

private:
    OracleReport best_;
};

struct MembershipTolerance {
    double mean = 1e-9;            // absolute, in units of max(1, sigma)
    double variance_rel = 1e-9;
    double budget = 1e-9;
    double symmetry = 1e-9;
};

/// Whether d lies in the family's uncertainty set within tolerance.
bool is_member(const DiscreteDistribution& d, const MomentProfile& p, double t,
               const RegretBudget& b, DistributionFamily fam, const MembershipTolerance& tol = {});

/// Two-point distribution with the given mean and standard deviation and
/// support inside [lower, upper] (either bound may be infinite). For finite
/// bounds the endpoints' mass split is kept and both atoms are pulled inward
/// until the variance drops to sigma^2.
/// Throws InfeasibleSupport when sigma^2 > (mu - lower)(upper - mu).
DiscreteDistribution two_point_match(double mu, double sigma, double lower, double upper);

/// Explicit (near-)worst-case distribution for the active regime:
///   - symmetric pair [mu - sigma, mu + sigma] where it attains the bound,
///   - the symmetric three-point family with outer mass eps (t > mu),
///   - the two-point family with upper mass eps (arbitrary / non-negative),
///   - the four-atom symmetric law on which the regret budget binds.
/// Throws NoKnownWitness when no construction applies (e.g. eps too large for
/// the budget), EmptyUncertaintySet when the set is empty.
DiscreteDistribution witness_family(const MomentProfile& p, double t, const RegretBudget& b,
                                    DistributionFamily fam, double eps);

/// Seeded multi-start random search with adaptive coordinate refinement over
/// k-point distributions of the family:
///   Symmetric: k = 5 (atoms mu, mu +- y1, mu +- y2) or k = 6 (mu +- y1..y3);
///   Arbitrary / NonNegative: k = 2 or 3 (non-negative support enforced).
/// Mean and variance hold by construction; the regret budget is enforced by
/// rejection. budget counts candidate evaluations and must be >= 10^4.
OracleReport brute_force_worst_case(const MomentProfile& p, double t, const RegretBudget& b,
                                    DistributionFamily fam, int k, std::size_t budget,
                                    std::uint64_t seed);

/// k used by the verification driver: 5 / 6 for symmetric without / with a
/// budget, 3 otherwise.
int default_atom_count(DistributionFamily fam, const RegretBudget& b);

struct VerifyRow {
    MomentProfile profile;
    double t = 0.0;
    double lambda = 0.0;  // +inf when unconstrained
    double closed_form = 0.0;
    double oracle_value = 0.0;
    std::optional<double> witness_value;
    double gap = 0.0;    // closed_form - oracle_value
    double scale = 0.0;  // sigma^2 + (t - mu)^2
    bool sound = true;   // oracle and witness values <= closed_form + 1e-6 * scale
    bool within_slack = true;
    std::size_t evaluations = 0;
};

struct VerifyOptions {
    std::size_t budget = 100000;
    std::uint64_t seed = 1;
    double lower_slack = 5e-3;  // relative to scale
    double witness_eps = 1e-5;
    /// Multiplies the closed form before comparison. Only used to check that
    /// the driver detects a wrong formula.
    double closed_form_factor = 1.0;
};

VerifyRow verify_tuple(const MomentProfile& p, double t, const RegretBudget& b,
                       DistributionFamily fam, const VerifyOptions& opts);

}  // namespace wctsv::oracle
