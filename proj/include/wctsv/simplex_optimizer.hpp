#pragma once

// Long-only portfolios (w >= 0, sum w = 1) minimizing the worst-case target
// semivariance over loss distributions whose expected excess profit
// E[(X - t)_-] is at most lambda.

#include <cstdint>

#include <Eigen/Dense>

#include "wctsv/frontier.hpp"

namespace wctsv {

struct SimplexSolverConfig {
    int max_iterations = 20000;
    double step_init = 0.0;    // <= 0 picks 1 / (Lipschitz bound of the smooth part)
    double step_shrink = 0.5;
    double tolerance = 1e-10;  // gradient-mapping norm (infinity norm)
    int multistart_count = 16;
    std::uint64_t seed = 1;
};

/// Throws InvalidArgument unless tolerance > 0, multistart_count >= 1 and
/// step_shrink in (0, 1).
void validate_config(const SimplexSolverConfig& cfg);

/// Some long-only portfolio keeps the set non-empty: (min_i mu_i - t)_- <= lambda.
bool check_regret_feasibility(const MarketModel& m, double t, double lambda);

/// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Worst-case semivariance of w over all distributions (first model) or
/// symmetric distributions (second model) with the budget; +inf where the
/// portfolio's set is empty.
double eep_tsv_objective(const MarketModel& m, const Eigen::VectorXd& w, double t, double lambda);
double eep_tsv_s_objective(const MarketModel& m, const Eigen::VectorXd& w, double t, double lambda);

/// Accelerated projected gradient on w'cov w + (w'mu - t)_+^2.
/// Throws InfeasibleBudget, NonConvergence.
Portfolio eep_tsv_portfolio(const MarketModel& m, double t, double lambda,
                            const SimplexSolverConfig& cfg = {});

/// Multi-start projected subgradient descent; starts are all vertices, the
/// barycenter and the best of 4096 seeded random simplex points. The
/// objective is piecewise smooth and need not be convex, so the result is
/// the best local solution found. Throws InfeasibleBudget.
Portfolio eep_tsv_s_portfolio(const MarketModel& m, double t, double lambda,
                              const SimplexSolverConfig& cfg = {});

}  // namespace wctsv
