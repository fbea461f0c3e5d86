#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "wctsv/error.hpp"
#include "wctsv/worst_case.hpp"

using namespace wctsv;
using Fam = DistributionFamily;

namespace {

constexpr Fam kAll[] = {Fam::Arbitrary, Fam::Symmetric, Fam::NonNegative};

double tsv(double mu, double sigma, double t, Fam f) {
    return wc_target_semivariance({mu, sigma}, t, f).value;
}
double ctsv(double mu, double sigma, double t, double lambda, Fam f) {
    return wc_target_semivariance_constrained({mu, sigma}, t, RegretBudget::at_most(lambda), f).value;
}
double regret(double mu, double sigma, double t, Fam f) {
    return wc_expected_regret({mu, sigma}, t, f).value;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("expected regret branches") {
    CHECK(regret(0, 1, 0, Fam::Arbitrary) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(regret(0, 1, 1, Fam::Symmetric) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(regret(1, 1, 0, Fam::NonNegative) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wc_expected_regret({0, 1}, 1, Fam::Symmetric).regime == "symmetric:t>=mu+sigma/2");

    // Far below the mean the regret approaches mu - t.
    for (Fam f : {Fam::Arbitrary, Fam::Symmetric}) {
        CHECK(std::abs(regret(0, 1, -1e6, f) - 1e6) < 1e-6);
    }
    CHECK(regret(1, 1, -1e6, Fam::NonNegative) == doctest::Approx(1e6 + 1));
    // Stable form far above the mean.
    CHECK(regret(0, 1, 1e8, Fam::Arbitrary) == doctest::Approx(0.25e-8).epsilon(1e-10));
}

TEST_CASE("target semivariance examples") {
    CHECK(tsv(1, 2, 0, Fam::Arbitrary) == 5.0);
    CHECK(tsv(0, 1, 0.5, Fam::Symmetric) == 0.5);
    CHECK(tsv(0, 1, -0.5, Fam::Symmetric) == 1.125);
    CHECK(tsv(0, 1, -2, Fam::Symmetric) == 5.0);
    CHECK(tsv(2, 1, 0, Fam::NonNegative) == 5.0);
}

TEST_CASE("constrained target semivariance examples") {
    CHECK(ctsv(0, 1, 0, 0.5, Fam::Arbitrary) == 1.0);
    CHECK(ctsv(0, 1, 1, 1, Fam::Arbitrary) == 0.0);
    CHECK(ctsv(0, 0.4, 0.5, 1, Fam::Symmetric) == doctest::Approx(0.08).epsilon(1e-14));
    CHECK(ctsv(0, 2.5, -0.8, 1, Fam::Symmetric) == doctest::Approx(5.445).epsilon(1e-14));
    CHECK(ctsv(0, 2.5, -0.4, 1, Fam::Symmetric) == doctest::Approx(4.165).epsilon(1e-14));
    // sigma > 2m with t <= mu: the budget still binds, so the value is the
    // binding expression rather than the unconstrained middle branch 2.42.
    CHECK(ctsv(0, 2, -0.2, 0.5, Fam::Symmetric) == doctest::Approx(2.26).epsilon(1e-14));

    const auto v = wc_target_semivariance_constrained({0, 2.5}, -0.4, RegretBudget::at_most(1),
                                                      Fam::Symmetric);
    CHECK(v.regime == "symmetric-lambda(b):t<=mu+sigma-2m");
}

TEST_CASE("uncertainty set emptiness") {
    CHECK(set_nonempty({1, 0.5}, 2, RegretBudget::at_most(1), Fam::NonNegative));
    CHECK_FALSE(set_nonempty({1, 2}, 2, RegretBudget::at_most(1), Fam::NonNegative));
    // The pair [-1, 1] lies below t = 1 and has variance 1, so the set is not
    // empty when sigma equals t - mu.
    CHECK(set_nonempty({0, 1}, 1, RegretBudget::at_most(1), Fam::Symmetric));
    CHECK_FALSE(set_nonempty({0, 1.5}, 1, RegretBudget::at_most(1), Fam::Symmetric));
    CHECK_FALSE(set_nonempty({0, 1}, 1, RegretBudget::at_most(0.5), Fam::Arbitrary));
    CHECK(set_nonempty({0, 1}, 1, RegretBudget::unconstrained(), Fam::Arbitrary));

    CHECK(kind_of([] { ctsv(0, 1, 1, 0.5, Fam::Arbitrary); }) == ErrorKind::EmptyUncertaintySet);
    CHECK(kind_of([] { ctsv(0, 1.5, 1, 1, Fam::Symmetric); }) == ErrorKind::EmptyUncertaintySet);
}

TEST_CASE("input validation") {
    CHECK(kind_of([] { tsv(0, 0, 0, Fam::Arbitrary); }) == ErrorKind::InvalidProfile);
    CHECK(kind_of([] { tsv(0, -1, 0, Fam::Arbitrary); }) == ErrorKind::InvalidProfile);
    CHECK(kind_of([] { regret(0, 1, 0, Fam::NonNegative); }) ==
          ErrorKind::NonNegativeRequiresPositiveMean);
    CHECK(kind_of([] { RegretBudget::at_most(0.0); }) == ErrorKind::InvalidArgument);
    CHECK_FALSE(RegretBudget::at_most(INFINITY).is_finite());
    CHECK(parse_family("Symmetric") == Fam::Symmetric);
    CHECK_FALSE(parse_family("gaussian").has_value());
}

TEST_CASE("reflection and complement bounds") {
    const auto a = reflect_complement_bounds({0, 1}, 1, Fam::Arbitrary);
    CHECK(a.sup_minus2 == 2.0);
    const auto b = reflect_complement_bounds({0, 1}, 0, Fam::Arbitrary);
    CHECK(b.inf_plus2 == 0.0);
    const auto c = reflect_complement_bounds({0, 1}, -0.5, Fam::Symmetric);
    // Reflection evaluates the symmetric bound at -t = 0.5, the t > mu branch.
    CHECK(c.sup_minus2 == 0.5);
    CHECK(c.inf_plus2 == 0.75);
    CHECK(kind_of([] { reflect_complement_bounds({1, 1}, 0, Fam::NonNegative); }) ==
          ErrorKind::InvalidArgument);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-3, 3), S(0.1, 3);
    for (int i = 0; i < 1000; ++i) {
        const double mu = U(rng), sigma = S(rng), t = U(rng);
        for (Fam f : {Fam::Arbitrary, Fam::Symmetric}) {
            const auto r = reflect_complement_bounds({mu, sigma}, t, f);
            const double total = sigma * sigma + (t - mu) * (t - mu);
            CHECK(std::abs(r.sup_plus2 + r.inf_minus2 - total) <= 1e-12 * total);
            CHECK(std::abs(r.inf_plus2 + r.sup_minus2 - total) <= 1e-12 * total);
            CHECK(r.inf_plus2 >= -1e-12 * total);
        }
        const auto r = reflect_complement_bounds({mu, sigma}, t, Fam::Arbitrary);
        CHECK(std::abs(r.inf_plus2 - pos_part(mu - t) * pos_part(mu - t)) <= 1e-12 * (1 + mu * mu + t * t));
    }
}

TEST_CASE("translation invariance and homogeneity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2, 2), S(0.2, 3), L(0.05, 4), C(0.1, 10);
    for (int i = 0; i < 2000; ++i) {
        const double mu = U(rng), sigma = S(rng), tz = U(rng), c = C(rng);
        const double t = mu + tz * sigma;
        for (Fam f : {Fam::Arbitrary, Fam::Symmetric}) {
            const double v = tsv(mu, sigma, t, f);
            CHECK(std::abs(v - tsv(0, sigma, t - mu, f)) <= 1e-12 * std::max(1.0, v) * 16);
            CHECK(std::abs(tsv(c * mu, c * sigma, c * t, f) - c * c * v) <= 1e-12 * c * c * v * 16);
            const double r = regret(mu, sigma, t, f);
            CHECK(std::abs(r - regret(0, sigma, t - mu, f)) <= 1e-12 * std::max(1.0, r) * 16);
            CHECK(std::abs(regret(c * mu, c * sigma, c * t, f) - c * r) <= 1e-12 * c * r * 16);

            const double lambda = neg_part(mu - t) + L(rng);
            const double cv = ctsv(mu, sigma, t, lambda, f);
            CHECK(std::abs(cv - ctsv(0, sigma, t - mu, lambda, f)) <= 1e-12 * std::max(1.0, cv) * 16);
            CHECK(std::abs(ctsv(c * mu, c * sigma, c * t, c * lambda, f) - c * c * cv) <=
                  1e-12 * c * c * cv * 16);
        }
    }
}

TEST_CASE("family and budget monotonicity") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-2, 2), S(0.2, 3), L(0.01, 5);
    for (int i = 0; i < 2000; ++i) {
        const double mu = U(rng), sigma = S(rng), t = mu + U(rng) * sigma;
        const double scale = sigma * sigma + (t - mu) * (t - mu);
        CHECK(tsv(mu, sigma, t, Fam::Symmetric) <= tsv(mu, sigma, t, Fam::Arbitrary) + 1e-12 * scale);
        CHECK(regret(mu, sigma, t, Fam::Symmetric) <= regret(mu, sigma, t, Fam::Arbitrary) + 1e-12 * scale);
        if (mu > 0) {
            CHECK(regret(mu, sigma, t, Fam::NonNegative) <= regret(mu, sigma, t, Fam::Arbitrary) + 1e-12 * scale);
        }
        double lam1 = neg_part(mu - t) + L(rng), lam2 = neg_part(mu - t) + L(rng);
        if (lam1 > lam2) std::swap(lam1, lam2);
        for (Fam f : {Fam::Arbitrary, Fam::Symmetric}) {
            const double lo = ctsv(mu, sigma, t, lam1, f);
            const double hi = ctsv(mu, sigma, t, lam2, f);
            CHECK(lo <= hi + 1e-12 * scale);
            CHECK(hi <= tsv(mu, sigma, t, f) + 1e-12 * scale);
            CHECK(lo >= 0.0);
        }
    }
}

TEST_CASE("large budget recovers the unconstrained value") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-2, 2), S(0.2, 3);
    for (int i = 0; i < 1000; ++i) {
        const double sigma = S(rng);
        const double mu = std::abs(U(rng)) + 0.1;
        const double t = mu + U(rng) * sigma;
        for (Fam f : kAll) {
            const double u = tsv(mu, sigma, t, f);
            const double c = ctsv(mu, sigma, t, 1e6 * sigma, f);
            CHECK(std::abs(u - c) <= 1e-9 * u);
        }
    }
}

TEST_CASE("branch continuity") {
    for (double sigma : {0.3, 1.0, 2.7}) {
        const double mu = 0.4;
        const double below = std::nextafter(mu - sigma, -INFINITY);
        CHECK(tsv(mu, sigma, mu - sigma, Fam::Symmetric) == doctest::Approx(2 * sigma * sigma));
        CHECK(tsv(mu, sigma, below, Fam::Symmetric) == doctest::Approx(2 * sigma * sigma));
        CHECK(tsv(mu, sigma, mu, Fam::Symmetric) == doctest::Approx(0.5 * sigma * sigma));
        CHECK(tsv(mu, sigma, std::nextafter(mu, INFINITY), Fam::Symmetric) ==
              doctest::Approx(0.5 * sigma * sigma));
    }
    // Budget-binding boundary t = mu + sigma - 2m(t): with mu = 0 and
    // m = lambda - t this is t = 2 lambda - sigma, where both values are 2m^2.
    for (double lambda : {0.2, 0.5, 1.0}) {
        const double sigma = 3.0 * lambda;
        const double t = 2 * lambda - sigma;
        const double m = lambda - t;
        CHECK(ctsv(0, sigma, t, lambda, Fam::Symmetric) == doctest::Approx(2 * m * m).epsilon(1e-12));
        const double h = 1e-7;
        CHECK(std::abs(ctsv(0, sigma, t - h, lambda, Fam::Symmetric) -
                       ctsv(0, sigma, t + h, lambda, Fam::Symmetric)) < 1e-5);
    }
    // Grid continuity in t.
    for (double lambda : {0.1, 0.6, 2.0}) {
        double prev = ctsv(0, 1.3, -3.0, lambda, Fam::Symmetric);
        for (int i = 1; -3.0 + i * 1e-4 < lambda; ++i) {
            const double t = -3.0 + i * 1e-4;
            const double v = ctsv(0, 1.3, t, lambda, Fam::Symmetric);
            CHECK(std::abs(v - prev) < 1e-3);
            prev = v;
        }
    }
}

TEST_CASE("boundary budget gives zero") {
    CHECK(ctsv(0, 1, 2, 2, Fam::Arbitrary) == 0.0);
    CHECK(ctsv(1, 0.5, 2, 1, Fam::NonNegative) == 0.0);
    CHECK(ctsv(0, 1, 2, 2, Fam::Symmetric) == 0.0);
}
