#include "wctsv/frontier.hpp"

#include <cmath>

#include "wctsv/error.hpp"
#include "wctsv/worst_case.hpp"

namespace wctsv {

void validate_market(const MarketModel& m) {
    const Eigen::Index d = m.mu.size();
    if (d < 1 || m.cov.rows() != d || m.cov.cols() != d) {
        throw Error(ErrorKind::InvalidArgument, "mean vector and covariance sizes differ");
    }
    if (!m.assets.empty() && static_cast<Eigen::Index>(m.assets.size()) != d) {
        throw Error(ErrorKind::InvalidArgument, "asset names do not match the mean vector");
    }
    if (!m.mu.allFinite() || !m.cov.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "market inputs must be finite");
    }
    const double scale = std::max(1.0, m.cov.cwiseAbs().maxCoeff());
    if ((m.cov - m.cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw Error(ErrorKind::NotPositiveDefinite, "covariance is not symmetric");
    }
    // Exactly singular inputs can leave a rounding-sized positive pivot, so
    // pivots are also compared with the largest diagonal entry.
    Eigen::LLT<Eigen::MatrixXd> llt(m.cov);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NotPositiveDefinite, "covariance is not positive definite");
    }
    const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal();
    const double min_pivot = pivots.minCoeff();
    if (!(min_pivot * min_pivot > 1e-14 * m.cov.diagonal().maxCoeff())) {
        throw Error(ErrorKind::NotPositiveDefinite, "covariance is numerically singular");
    }
}

FrontierParams frontier_params(const MarketModel& m) {
    validate_market(m);
    Eigen::LLT<Eigen::MatrixXd> llt(m.cov);
    const Eigen::VectorXd e = Eigen::VectorXd::Ones(m.mu.size());

    FrontierParams fp;
    fp.sinv_mu = llt.solve(m.mu);
    fp.sinv_e = llt.solve(e);
    const double a = e.dot(fp.sinv_e);      // e' S^-1 e
    const double b = e.dot(fp.sinv_mu);     // e' S^-1 mu
    const double c = m.mu.dot(fp.sinv_mu);  // mu' S^-1 mu
    fp.u = a * c - b * b;
    if (!(fp.u > 1e-12 * a * c)) {
        throw Error(ErrorKind::DegenerateMeans, "mean vector is proportional to the ones vector");
    }
    fp.v0 = a / fp.u;
    fp.v1 = b / fp.u;
    fp.v2 = c / fp.u;
    return fp;
}

namespace {

Portfolio on_frontier(const FrontierParams& fp, const MarketModel& m, double xi) {
    Portfolio p;
    p.weights = fp.sinv_mu * (fp.v0 * xi - fp.v1) + fp.sinv_e * (fp.v2 - fp.v1 * xi);
    p.expected_loss = p.weights.dot(m.mu);
    p.stdev = std::sqrt(std::max(0.0, p.weights.dot(m.cov * p.weights)));
    return p;
}

}  // namespace

Portfolio min_variance_portfolio(const FrontierParams& fp, const MarketModel& m, double xi) {
    Portfolio p = on_frontier(fp, m, xi);
    p.objective = p.stdev * p.stdev;
    p.regime = "frontier";
    return p;
}

Portfolio classical_mv(const FrontierParams& fp, const MarketModel& m, double nu) {
    const double xi = std::min(fp.min_variance_loss(), nu);
    Portfolio p = min_variance_portfolio(fp, m, xi);
    p.regime = xi < fp.min_variance_loss() ? "mv:nu-binding" : "mv:global-minimum";
    return p;
}

Portfolio tsv_portfolio(const FrontierParams& fp, const MarketModel& m, double t) {
    const double vertex = fp.min_variance_loss();
    const bool below = vertex <= t;
    const double xi = below ? vertex : (fp.v1 + t) / (fp.v0 + 1.0);
    Portfolio p = on_frontier(fp, m, xi);
    const double excess = pos_part(p.expected_loss - t);
    p.objective = p.stdev * p.stdev + excess * excess;
    p.regime = below ? "tsv:global-minimum" : "tsv:xi>t";
    return p;
}

namespace {

double symmetric_tsv_on_frontier(const FrontierParams& fp, double xi, double t) {
    const double sigma = std::sqrt(std::max(0.0, fp.variance_at(xi)));
    const double s = xi - t;
    if (s >= sigma) return sigma * sigma + s * s;
    if (s >= 0.0) return 0.5 * (s + sigma) * (s + sigma);
    return 0.5 * sigma * sigma;
}

// Minimizer of the worst-case symmetric semivariance over xi in [lo, hi]:
// grid scan, then golden-section refinement around the best grid point.
// The smallest xi within 1e-12 of the minimum wins.
double search_interval(const FrontierParams& fp, double lo, double hi, double t) {
    constexpr int kGrid = 2048;
    const double h = (hi - lo) / (kGrid - 1);
    auto f = [&](double xi) { return symmetric_tsv_on_frontier(fp, xi, t); };

    int best = 0;
    double best_val = f(lo);
    for (int i = 1; i < kGrid; ++i) {
        const double xi = i == kGrid - 1 ? hi : lo + i * h;
        const double v = f(xi);
        if (v < best_val - 1e-12) {
            best = i;
            best_val = v;
        }
    }
    double best_xi = best == kGrid - 1 ? hi : lo + best * h;

    double a = std::max(lo, best_xi - h);
    double b = std::min(hi, best_xi + h);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    const double refined = fc <= fd ? c : d;
    const double refined_val = std::min(fc, fd);
    if (refined_val < best_val - 1e-12 || (refined_val <= best_val + 1e-12 && refined < best_xi)) {
        best_xi = refined;
    }
    return best_xi;
}

}  // namespace

Portfolio m_tsv_s_portfolio(const FrontierParams& fp, const MarketModel& m, double nu, double t) {
    if (t >= nu) {
        Portfolio p = classical_mv(fp, m, nu);
        p.objective = wc_target_semivariance({p.expected_loss, p.stdev}, t, DistributionFamily::Symmetric).value;
        p.regime = "(i)";
        return p;
    }
    // Below t the worst case is half the variance, minimized at the frontier
    // vertex clipped to t; on [t, nu] a one-dimensional search is needed.
    const double xi1 = std::min(fp.min_variance_loss(), t);
    const double h1 = symmetric_tsv_on_frontier(fp, xi1, t);
    const double xi2 = search_interval(fp, t, nu, t);
    const double h2 = symmetric_tsv_on_frontier(fp, xi2, t);

    const bool first = h1 <= h2;
    Portfolio p = on_frontier(fp, m, first ? xi1 : xi2);
    p.objective = wc_target_semivariance({p.expected_loss, p.stdev}, t, DistributionFamily::Symmetric).value;
    p.regime = first ? "(ii)" : "(iii)";
    return p;
}

}  // namespace wctsv
