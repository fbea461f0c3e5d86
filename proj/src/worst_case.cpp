#include "wctsv/worst_case.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "wctsv/error.hpp"

namespace wctsv {

const char* to_string(DistributionFamily family) {
    switch (family) {
        case DistributionFamily::Arbitrary: return "arbitrary";
        case DistributionFamily::Symmetric: return "symmetric";
        case DistributionFamily::NonNegative: return "nonnegative";
    }
    return "unknown";
}

std::optional<DistributionFamily> parse_family(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "arbitrary") return DistributionFamily::Arbitrary;
    if (lower == "symmetric") return DistributionFamily::Symmetric;
    if (lower == "nonnegative" || lower == "non-negative") return DistributionFamily::NonNegative;
    return std::nullopt;
}

RegretBudget RegretBudget::at_most(double lambda) {
    if (std::isnan(lambda) || !(lambda > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "regret budget lambda must be > 0");
    }
    RegretBudget b;
    if (std::isfinite(lambda)) b.lambda_ = lambda;
    return b;
}

void validate_profile(const MomentProfile& p) {
    if (!std::isfinite(p.mu) || !std::isfinite(p.sigma)) {
        throw Error(ErrorKind::InvalidProfile, "mu and sigma must be finite");
    }
    if (!(p.sigma > 0.0)) {
        throw Error(ErrorKind::InvalidProfile, "sigma must be > 0");
    }
}

namespace {

void validate_inputs(const MomentProfile& p, double t, DistributionFamily fam) {
    validate_profile(p);
    if (!std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "t must be finite");
    if (fam == DistributionFamily::NonNegative && !(p.mu > 0.0)) {
        throw Error(ErrorKind::NonNegativeRequiresPositiveMean,
                    "non-negative family requires mu > 0");
    }
}

// 0.5 * (d + sqrt(sigma^2 + d^2)) without cancellation for d << 0.
double arbitrary_regret(double d, double sigma) {
    const double r = std::hypot(sigma, d);
    if (d >= 0.0) return 0.5 * (d + r);
    return 0.5 * sigma * sigma / (r - d);
}

}  // namespace

WorstCaseValue wc_expected_regret(const MomentProfile& p, double t, DistributionFamily fam) {
    validate_inputs(p, t, fam);
    const double mu = p.mu;
    const double sigma = p.sigma;
    const double d = mu - t;

    switch (fam) {
        case DistributionFamily::Arbitrary:
            return {arbitrary_regret(d, sigma), "arbitrary"};

        case DistributionFamily::Symmetric:
            if (d > 0.5 * sigma) {
                return {d + sigma * sigma / (8.0 * d), "symmetric:t<mu-sigma/2"};
            }
            if (d > -0.5 * sigma) {
                return {0.5 * (d + sigma), "symmetric:|t-mu|<=sigma/2"};
            }
            return {sigma * sigma / (8.0 * (t - mu)), "symmetric:t>=mu+sigma/2"};

        case DistributionFamily::NonNegative: {
            const double second = sigma * sigma + mu * mu;
            if (t < 0.0) return {mu - t, "nonnegative:t<0"};
            if (t < second / (2.0 * mu)) {
                return {mu - mu * mu * t / second, "nonnegative:0<=t<(sigma^2+mu^2)/(2mu)"};
            }
            return {arbitrary_regret(d, sigma), "nonnegative:t>=(sigma^2+mu^2)/(2mu)"};
        }
    }
    throw Error(ErrorKind::InvalidArgument, "unknown family");
}

namespace {

WorstCaseValue symmetric_semivariance(double mu, double sigma, double t) {
    const double s = mu - t;
    if (s >= sigma) return {sigma * sigma + s * s, "symmetric:t<=mu-sigma"};
    if (s >= 0.0) return {0.5 * (s + sigma) * (s + sigma), "symmetric:mu-sigma<t<=mu"};
    return {0.5 * sigma * sigma, "symmetric:t>mu"};
}

}  // namespace

WorstCaseValue wc_target_semivariance(const MomentProfile& p, double t, DistributionFamily fam) {
    validate_inputs(p, t, fam);
    const double excess = pos_part(p.mu - t);
    switch (fam) {
        case DistributionFamily::Arbitrary:
            return {p.sigma * p.sigma + excess * excess, "arbitrary"};
        case DistributionFamily::NonNegative:
            return {p.sigma * p.sigma + excess * excess, "nonnegative"};
        case DistributionFamily::Symmetric:
            return symmetric_semivariance(p.mu, p.sigma, t);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown family");
}

bool set_nonempty(const MomentProfile& p, double t, const RegretBudget& b, DistributionFamily fam) {
    validate_profile(p);
    if (fam == DistributionFamily::NonNegative && !(p.mu > 0.0)) return false;
    if (!b.is_finite()) return true;

    const double lambda = b.lambda();
    const double floor = neg_part(p.mu - t);  // Jensen: E[(X-t)_-] >= (mu-t)_-
    if (lambda > floor) return true;
    if (lambda < floor) return false;

    // lambda == (mu - t)_- > 0 forces X <= t almost surely.
    switch (fam) {
        case DistributionFamily::Arbitrary:
            return true;
        case DistributionFamily::NonNegative:
            return p.sigma * p.sigma <= p.mu * (t - p.mu);
        case DistributionFamily::Symmetric:
            // Support inside [2mu - t, t] caps the variance at (t - mu)^2.
            return p.sigma <= t - p.mu;
    }
    return false;
}

WorstCaseValue wc_target_semivariance_constrained(const MomentProfile& p, double t,
                                                  const RegretBudget& b, DistributionFamily fam) {
    validate_inputs(p, t, fam);
    if (!b.is_finite()) return wc_target_semivariance(p, t, fam);

    if (!set_nonempty(p, t, b, fam)) {
        throw Error(ErrorKind::EmptyUncertaintySet, "empty uncertainty set");
    }

    const double mu = p.mu;
    const double sigma = p.sigma;
    const double lambda = b.lambda();
    const bool boundary = !(lambda > neg_part(mu - t));

    if (fam != DistributionFamily::Symmetric) {
        const char* tag = fam == DistributionFamily::Arbitrary ? "arbitrary" : "nonnegative";
        if (boundary) return {0.0, std::string(tag) + "-lambda:lambda=(mu-t)_-"};
        const double excess = pos_part(mu - t);
        return {sigma * sigma + excess * excess, std::string(tag) + "-lambda:lambda>(mu-t)_-"};
    }

    if (boundary) return {0.0, "symmetric-lambda:lambda=(mu-t)_-"};

    const double m = regret_cap(mu, t, lambda);
    const char* band = sigma <= m ? "(a)" : (sigma <= 2.0 * m ? "(b)" : "(c)");
    const std::string prefix = std::string("symmetric-lambda") + band;

    const double s = mu - t;
    if (s < 0.0) return {0.5 * sigma * sigma, prefix + ":t>mu"};
    if (s >= sigma) return {sigma * sigma + s * s, prefix + ":t<=mu-sigma"};
    if (s >= 2.0 * m - sigma) {
        // Budget binds: two inner atoms at mu +- s and two outer atoms carrying
        // E[(X-t)_+] = m exactly.
        return {0.5 * sigma * sigma + 2.0 * m * s - 0.5 * s * s, prefix + ":t<=mu+sigma-2m"};
    }
    return {0.5 * (s + sigma) * (s + sigma), prefix + ":mu+sigma-2m<t<=mu"};
}

ReflectComplementBounds reflect_complement_bounds(const MomentProfile& p, double t,
                                                  DistributionFamily fam) {
    validate_profile(p);
    if (fam == DistributionFamily::NonNegative) {
        throw Error(ErrorKind::InvalidArgument,
                    "reflection bounds are defined for arbitrary and symmetric families only");
    }
    const double total = p.sigma * p.sigma + (t - p.mu) * (t - p.mu);
    const MomentProfile reflected{-p.mu, p.sigma};

    ReflectComplementBounds out;
    out.sup_plus1 = wc_expected_regret(p, t, fam).value;
    out.inf_plus1 = pos_part(p.mu - t);
    out.sup_plus2 = wc_target_semivariance(p, t, fam).value;
    out.sup_minus2 = wc_target_semivariance(reflected, -t, fam).value;
    out.inf_plus2 = total - out.sup_minus2;
    out.inf_minus2 = total - out.sup_plus2;
    return out;
}

}  // namespace wctsv
