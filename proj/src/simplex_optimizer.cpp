#include "wctsv/simplex_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "wctsv/error.hpp"
#include "wctsv/worst_case.hpp"

namespace wctsv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaFloor = 1e-12;
constexpr int kProbeCount = 4096;

}  // namespace

void validate_config(const SimplexSolverConfig& cfg) {
    if (!(cfg.tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be > 0");
    if (cfg.multistart_count < 1) throw Error(ErrorKind::InvalidArgument, "multistart_count must be >= 1");
    if (!(cfg.step_shrink > 0.0 && cfg.step_shrink < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "step_shrink must lie in (0, 1)");
    }
    if (cfg.max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
}

bool check_regret_feasibility(const MarketModel& m, double t, double lambda) {
    if (std::isnan(lambda) || !(lambda > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "lambda must be > 0");
    }
    return neg_part(m.mu.minCoeff() - t) <= lambda;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index d = v.size();
    if (d == 0) throw Error(ErrorKind::InvalidArgument, "cannot project an empty vector");
    if (!v.allFinite()) throw Error(ErrorKind::InvalidArgument, "projection input must be finite");
    if (v.minCoeff() >= 0.0 && std::abs(v.sum() - 1.0) <= 4.0 * d * std::numeric_limits<double>::epsilon()) {
        return v;
    }
    std::vector<double> u(v.data(), v.data() + d);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        cumulative += u[j];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) theta = candidate;
    }
    return (v.array() - theta).max(0.0).matrix();
}

namespace {

struct Moments {
    double xi;
    double sigma;
    Eigen::VectorXd cov_w;
};

Moments moments_of(const MarketModel& m, const Eigen::VectorXd& w) {
    Moments mo;
    mo.cov_w = m.cov * w;
    mo.xi = w.dot(m.mu);
    mo.sigma = std::sqrt(std::max(0.0, w.dot(mo.cov_w)));
    return mo;
}

// Symmetric worst case with budget in terms of (xi, sigma), with partial
// derivatives. Mirrors wc_target_semivariance_constrained operation for
// operation so that both agree bit for bit.
double symmetric_value(double xi, double sigma, double t, double lambda, double* dxi, double* dsigma) {
    const double floor = neg_part(xi - t);
    *dxi = 0.0;
    *dsigma = 0.0;
    if (lambda < floor) return kInf;
    if (!(lambda > floor)) return sigma <= t - xi ? 0.0 : kInf;

    const double s = xi - t;
    if (s < 0.0) {
        *dsigma = sigma;
        return 0.5 * sigma * sigma;
    }
    if (s >= sigma) {
        *dxi = 2.0 * s;
        *dsigma = 2.0 * sigma;
        return sigma * sigma + s * s;
    }
    const double m = regret_cap(xi, t, lambda);
    if (s >= 2.0 * m - sigma) {
        *dxi = 2.0 * lambda + 3.0 * s;
        *dsigma = sigma;
        return 0.5 * sigma * sigma + 2.0 * m * s - 0.5 * s * s;
    }
    *dxi = s + sigma;
    *dsigma = s + sigma;
    return 0.5 * (s + sigma) * (s + sigma);
}

double smooth_value(const Moments& mo, double t) {
    const double excess = pos_part(mo.xi - t);
    return mo.sigma * mo.sigma + excess * excess;
}

double lipschitz_bound(const MarketModel& m) {
    const double cov_norm = m.cov.cwiseAbs().rowwise().sum().maxCoeff();
    return 2.0 * (cov_norm + m.mu.squaredNorm());
}

void require_feasible(const MarketModel& m, double t, double lambda) {
    if (!check_regret_feasibility(m, t, lambda)) {
        throw Error(ErrorKind::InfeasibleBudget,
                    "every long-only portfolio violates the excess-profit budget: min expected loss "
                    "is below t - lambda");
    }
}

Eigen::Index min_mean_asset(const MarketModel& m) {
    Eigen::Index idx = 0;
    m.mu.minCoeff(&idx);
    return idx;
}

Portfolio make_portfolio(const MarketModel& m, const Eigen::VectorXd& w, double objective,
                         std::string regime) {
    Portfolio p;
    p.weights = w;
    const Moments mo = moments_of(m, w);
    p.expected_loss = mo.xi;
    p.stdev = mo.sigma;
    p.objective = objective;
    p.regime = std::move(regime);
    return p;
}

}  // namespace

double eep_tsv_objective(const MarketModel& m, const Eigen::VectorXd& w, double t, double lambda) {
    const Moments mo = moments_of(m, w);
    const double floor = neg_part(mo.xi - t);
    if (lambda < floor) return kInf;
    if (!(lambda > floor)) return 0.0;
    return smooth_value(mo, t);
}

double eep_tsv_s_objective(const MarketModel& m, const Eigen::VectorXd& w, double t, double lambda) {
    const Moments mo = moments_of(m, w);
    double dxi = 0.0;
    double dsigma = 0.0;
    return symmetric_value(mo.xi, mo.sigma, t, lambda, &dxi, &dsigma);
}

Portfolio eep_tsv_portfolio(const MarketModel& m, double t, double lambda, const SimplexSolverConfig& cfg) {
    validate_market(m);
    validate_config(cfg);
    require_feasible(m, t, lambda);
    const Eigen::Index d = m.mu.size();

    // Budget exactly tight: only portfolios concentrated on the lowest-mean
    // asset keep the set non-empty, and there the worst case is 0.
    const Eigen::Index lo = min_mean_asset(m);
    if (lambda == neg_part(m.mu[lo] - t) && lambda > 0.0) {
        return make_portfolio(m, Eigen::VectorXd::Unit(d, lo), 0.0, "eep-tsv:tight-vertex");
    }

    auto value = [&](const Eigen::VectorXd& w) { return smooth_value(moments_of(m, w), t); };
    auto gradient = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
        const Moments mo = moments_of(m, w);
        return 2.0 * mo.cov_w + 2.0 * pos_part(mo.xi - t) * m.mu;
    };

    // 1 / L always satisfies the descent condition, so backtracking never
    // goes below it; otherwise rounding near the optimum collapses the step.
    const double safe_step = 1.0 / lipschitz_bound(m);
    double eta = cfg.step_init > 0.0 ? cfg.step_init : safe_step;
    Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
    Eigen::VectorXd y = x;
    double fx = value(x);
    double tk = 1.0;
    double mapping = kInf;

    for (int it = 0; it < cfg.max_iterations; ++it) {
        const Eigen::VectorXd gx = gradient(x);
        mapping = ((x - project_to_simplex(x - eta * gx)) / eta).cwiseAbs().maxCoeff();
        if (mapping <= cfg.tolerance) break;

        const Eigen::VectorXd gy = gradient(y);
        const double fy = value(y);
        Eigen::VectorXd next;
        double fnext = 0.0;
        for (;;) {
            next = project_to_simplex(y - eta * gy);
            fnext = value(next);
            const Eigen::VectorXd diff = next - y;
            if (eta <= safe_step) break;
            if (fnext <= fy + gy.dot(diff) + diff.squaredNorm() / (2.0 * eta) + 1e-15 * std::abs(fy)) break;
            eta = std::max(eta * cfg.step_shrink, safe_step);
        }
        if (fnext > fx && tk > 1.0) {
            // Momentum overshoot: restart from the last iterate.
            y = x;
            tk = 1.0;
            continue;
        }
        const double tnext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        y = next + ((tk - 1.0) / tnext) * (next - x);
        x = std::move(next);
        fx = fnext;
        tk = tnext;
    }
    if (!(mapping <= cfg.tolerance)) {
        throw Error(ErrorKind::NonConvergence, "projected gradient did not reach the tolerance");
    }
    const Moments mo = moments_of(m, x);
    return make_portfolio(m, x, smooth_value(mo, t), mo.xi > t ? "eep-tsv:xi>t" : "eep-tsv:xi<=t");
}

namespace {

struct Local {
    Eigen::VectorXd w;
    double value = kInf;
};

Local descend(const MarketModel& m, double t, double lambda, const SimplexSolverConfig& cfg,
              Eigen::VectorXd w, double eta0) {
    Local best;
    Moments mo = moments_of(m, w);
    double dxi = 0.0;
    double dsigma = 0.0;
    double f = symmetric_value(mo.xi, mo.sigma, t, lambda, &dxi, &dsigma);
    if (!std::isfinite(f)) return best;

    double eta = eta0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const Eigen::VectorXd g = dxi * m.mu + (dsigma / std::max(mo.sigma, kSigmaFloor)) * mo.cov_w;
        const Eigen::VectorXd next = project_to_simplex(w - eta * g);
        const Eigen::VectorXd step = w - next;
        if (step.cwiseAbs().maxCoeff() / eta <= cfg.tolerance) break;

        const Moments mn = moments_of(m, next);
        double nxi = 0.0;
        double nsigma = 0.0;
        const double fn = symmetric_value(mn.xi, mn.sigma, t, lambda, &nxi, &nsigma);
        if (fn < f - 1e-4 * g.dot(step)) {
            w = next;
            mo = mn;
            f = fn;
            dxi = nxi;
            dsigma = nsigma;
            eta = std::min(eta / cfg.step_shrink, 1e6 * eta0);
        } else {
            eta *= cfg.step_shrink;
            if (eta < 1e-14 * eta0) break;
        }
    }
    best.w = std::move(w);
    best.value = f;
    return best;
}

}  // namespace

Portfolio eep_tsv_s_portfolio(const MarketModel& m, double t, double lambda, const SimplexSolverConfig& cfg) {
    validate_market(m);
    validate_config(cfg);
    require_feasible(m, t, lambda);
    const Eigen::Index d = m.mu.size();
    const double eta0 = cfg.step_init > 0.0 ? cfg.step_init : 1.0 / lipschitz_bound(m);

    auto objective = [&](const Eigen::VectorXd& w) { return eep_tsv_s_objective(m, w, t, lambda); };

    std::vector<Eigen::VectorXd> fixed;
    for (Eigen::Index i = 0; i < d; ++i) fixed.push_back(Eigen::VectorXd::Unit(d, i));
    fixed.push_back(Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d)));

    std::mt19937_64 rng(cfg.seed);
    std::exponential_distribution<double> expo(1.0);
    std::vector<std::pair<double, Eigen::VectorXd>> probes;
    probes.reserve(kProbeCount);
    for (int i = 0; i < kProbeCount; ++i) {
        Eigen::VectorXd w(d);
        for (Eigen::Index j = 0; j < d; ++j) w[j] = expo(rng);
        w /= w.sum();
        probes.emplace_back(objective(w), std::move(w));
    }
    std::stable_sort(probes.begin(), probes.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    Local best;
    auto consider = [&](const Eigen::VectorXd& w, double v) {
        if (v < best.value) {
            best.value = v;
            best.w = w;
        }
    };
    for (const auto& w : fixed) consider(w, objective(w));
    for (const auto& [v, w] : probes) consider(w, v);

    std::vector<Eigen::VectorXd> starts = fixed;
    const int extra = std::min<int>(cfg.multistart_count, kProbeCount);
    for (int i = 0; i < extra && std::isfinite(probes[i].first); ++i) starts.push_back(probes[i].second);
    for (const auto& w0 : starts) {
        const Local loc = descend(m, t, lambda, cfg, w0, eta0);
        if (std::isfinite(loc.value)) consider(loc.w, loc.value);
    }
    if (!std::isfinite(best.value)) {
        throw Error(ErrorKind::InfeasibleBudget, "no long-only portfolio keeps the uncertainty set non-empty");
    }
    const Moments mo = moments_of(m, best.w);
    std::string regime = "eep-tsv-s";
    try {
        regime = wc_target_semivariance_constrained({mo.xi, std::max(mo.sigma, kSigmaFloor)}, t,
                                                    RegretBudget::at_most(lambda), DistributionFamily::Symmetric)
                     .regime;
    } catch (const Error&) {
    }
    return make_portfolio(m, best.w, best.value, regime);
}

}  // namespace wctsv
