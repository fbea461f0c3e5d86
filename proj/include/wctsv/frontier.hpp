#pragma once

// Mean-variance frontier with short selling allowed (weights only need to sum
// to one) and the portfolio models that reduce to a search along it.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wctsv {

struct MarketModel {
    std::vector<std::string> assets;
    Eigen::VectorXd mu;   // expected loss per asset
    Eigen::MatrixXd cov;  // loss covariance
};

/// Checks sizes, symmetry (1e-10) and positive definiteness.
/// Throws InvalidArgument or NotPositiveDefinite.
void validate_market(const MarketModel& m);

struct FrontierParams {
    double u = 0.0;
    double v0 = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;
    Eigen::VectorXd sinv_mu;  // cov^{-1} mu
    Eigen::VectorXd sinv_e;   // cov^{-1} e

    /// Minimum portfolio variance at expected loss xi.
    double variance_at(double xi) const { return v0 * xi * xi - 2.0 * v1 * xi + v2; }
    double min_variance_loss() const { return v1 / v0; }
};

struct Portfolio {
    Eigen::VectorXd weights;
    double expected_loss = 0.0;  // w'mu
    double stdev = 0.0;          // sqrt(w'cov w)
    double objective = 0.0;
    std::string regime;
};

/// Throws NotPositiveDefinite, DegenerateMeans (mu parallel to e).
FrontierParams frontier_params(const MarketModel& m);

/// Minimum-variance portfolio with expected loss xi; objective is its variance.
Portfolio min_variance_portfolio(const FrontierParams& fp, const MarketModel& m, double xi);

/// Minimum variance subject to w'mu <= nu.
Portfolio classical_mv(const FrontierParams& fp, const MarketModel& m, double nu);

/// Minimum of w'cov w + (w'mu - t)_+^2, the worst-case target semivariance
/// over all loss distributions with the portfolio's mean and covariance.
Portfolio tsv_portfolio(const FrontierParams& fp, const MarketModel& m, double t);

/// Minimum worst-case target semivariance over symmetric loss distributions,
/// subject to w'mu <= nu. Regime tag is "(i)", "(ii)" or "(iii)".
Portfolio m_tsv_s_portfolio(const FrontierParams& fp, const MarketModel& m, double nu, double t);

}  // namespace wctsv
