#include "wctsv/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

namespace wctsv::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_member_profile(const MomentProfile& p, double t, DistributionFamily fam) {
    validate_profile(p);
    if (!std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "t must be finite");
    if (fam == DistributionFamily::NonNegative && !(p.mu > 0.0)) {
        throw Error(ErrorKind::NonNegativeRequiresPositiveMean, "non-negative family requires mu > 0");
    }
}

}  // namespace

bool is_member(const DiscreteDistribution& d, const MomentProfile& p, double t,
               const RegretBudget& b, DistributionFamily fam, const MembershipTolerance& tol) {
    const PartialMoments pm = partial_moments(d, t);
    if (std::abs(pm.mean - p.mu) > tol.mean * std::max(1.0, p.sigma)) return false;
    const double var = p.sigma * p.sigma;
    if (std::abs(pm.variance - var) > tol.variance_rel * var) return false;
    if (b.is_finite() && pm.lpm1 > b.lambda() + tol.budget) return false;
    switch (fam) {
        case DistributionFamily::Arbitrary: return true;
        case DistributionFamily::NonNegative: return d.min_support() >= 0.0;
        case DistributionFamily::Symmetric: return d.is_symmetric_about(p.mu, tol.symmetry);
    }
    return false;
}

DiscreteDistribution two_point_match(double mu, double sigma, double lower, double upper) {
    validate_profile({mu, sigma});
    if (std::isnan(lower) || std::isnan(upper) || !(lower < mu && mu < upper)) {
        throw Error(ErrorKind::InvalidArgument, "two_point_match requires lower < mu < upper");
    }
    const bool lo_inf = std::isinf(lower);
    const bool hi_inf = std::isinf(upper);

    if (lo_inf && hi_inf) return DiscreteDistribution({{mu - sigma, 0.5}, {mu + sigma, 0.5}});

    if (!lo_inf && !hi_inf) {
        const double cap = (mu - lower) * (upper - mu);
        if (sigma * sigma > cap) {
            throw Error(ErrorKind::InfeasibleSupport, "variance exceeds (mu - lower)(upper - mu)");
        }
        if (std::abs((mu - lower) - (upper - mu)) <= 1e-12 * std::max(1.0, upper - lower)) {
            return DiscreteDistribution({{mu - sigma, 0.5}, {mu + sigma, 0.5}});
        }
        // Endpoint split keeps the mean; shrinking both atoms toward mu by the
        // same fraction keeps the split and scales the variance.
        const double span = upper - lower;
        const double p_lo = (upper - mu) / span;
        const double p_hi = 1.0 - p_lo;
        const double eps = span - sigma / std::sqrt(p_lo * p_hi);
        return DiscreteDistribution({{lower + eps * p_hi, p_lo}, {upper - eps * p_lo, p_hi}});
    }

    // One-sided support: the symmetric pair when it fits, otherwise the
    // two-point law with its lower atom on the bound.
    if (lo_inf) {
        if (mu + sigma <= upper) return DiscreteDistribution({{mu - sigma, 0.5}, {mu + sigma, 0.5}});
        const double gap = upper - mu;
        const double q = gap * gap / (sigma * sigma + gap * gap);  // mass below
        return DiscreteDistribution({{mu - sigma * sigma / gap, q}, {upper, 1.0 - q}});
    }
    if (mu - sigma >= lower) return DiscreteDistribution({{mu - sigma, 0.5}, {mu + sigma, 0.5}});
    const double gap = mu - lower;
    const double q = gap * gap / (sigma * sigma + gap * gap);  // mass above
    return DiscreteDistribution({{lower, 1.0 - q}, {mu + sigma * sigma / gap, q}});
}

namespace {

DiscreteDistribution symmetric_pair(const MomentProfile& p) {
    return DiscreteDistribution({{p.mu - p.sigma, 0.5}, {p.mu + p.sigma, 0.5}});
}

DiscreteDistribution checked(DiscreteDistribution d, const MomentProfile& p, double t,
                             const RegretBudget& b, DistributionFamily fam, const char* what) {
    if (!is_member(d, p, t, b, fam)) {
        throw Error(ErrorKind::NoKnownWitness, std::string(what) + " violates the uncertainty set");
    }
    return d;
}

// [mu - e, 1 - delta; mu + M, delta] with e = sigma sqrt(delta/(1-delta)),
// M = sigma sqrt((1-delta)/delta).
DiscreteDistribution upper_tail_pair(const MomentProfile& p, double delta) {
    const double e = p.sigma * std::sqrt(delta / (1.0 - delta));
    const double big = p.sigma * std::sqrt((1.0 - delta) / delta);
    return DiscreteDistribution({{p.mu - e, 1.0 - delta}, {p.mu + big, delta}});
}

DiscreteDistribution lower_tail_pair(const MomentProfile& p, double delta) {
    const double e = p.sigma * std::sqrt(delta / (1.0 - delta));
    const double big = p.sigma * std::sqrt((1.0 - delta) / delta);
    return DiscreteDistribution({{p.mu - big, delta}, {p.mu + e, 1.0 - delta}});
}

}  // namespace

DiscreteDistribution witness_family(const MomentProfile& p, double t, const RegretBudget& b,
                                    DistributionFamily fam, double eps) {
    require_member_profile(p, t, fam);
    if (!(eps > 0.0 && eps < 0.25)) throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, 1/4)");
    if (!set_nonempty(p, t, b, fam)) throw Error(ErrorKind::EmptyUncertaintySet, "empty uncertainty set");

    const double mu = p.mu;
    const double sigma = p.sigma;
    const bool boundary = b.is_finite() && !(b.lambda() > neg_part(mu - t));

    if (fam == DistributionFamily::Symmetric) {
        if (boundary) return checked(symmetric_pair(p), p, t, b, fam, "symmetric pair");
        const double s = mu - t;
        if (s < 0.0) {
            const double r = std::sqrt(sigma * sigma / (2.0 * eps));
            return checked(DiscreteDistribution({{mu - r, eps}, {mu, 1.0 - 2.0 * eps}, {mu + r, eps}}),
                           p, t, b, fam, "three-point family");
        }
        if (!b.is_finite() || s >= sigma) return symmetric_pair(p);
        const double lambda = b.lambda();
        const double m = regret_cap(mu, t, lambda);
        if (s < 2.0 * m - sigma) return symmetric_pair(p);
        // Budget binds: inner atoms at t and 2mu - t, outer atoms placed so
        // that E[(X - t)_+] = m exactly.
        const double q = 2.0 * lambda * lambda / (sigma * sigma - s * s - 4.0 * s * lambda);
        if (!(q > 0.0 && q <= 0.5)) {
            throw Error(ErrorKind::NoKnownWitness, "four-atom construction outside its regime");
        }
        const double out = s + lambda / q;
        return checked(DiscreteDistribution({{mu - out, q},
                                             {mu - s, 0.5 - q},
                                             {mu + s, 0.5 - q},
                                             {mu + out, q}}),
                       p, t, b, fam, "four-atom law");
    }

    if (boundary) {
        if (fam == DistributionFamily::NonNegative) {
            return checked(two_point_match(mu, sigma, 0.0, t), p, t, b, fam, "bounded pair");
        }
        return checked(lower_tail_pair(p, eps), p, t, b, fam, "reflected two-point family");
    }
    return checked(upper_tail_pair(p, eps), p, t, b, fam, "two-point family");
}

int default_atom_count(DistributionFamily fam, const RegretBudget& b) {
    if (fam == DistributionFamily::Symmetric) return b.is_finite() ? 6 : 5;
    return 3;
}

namespace {

// The search runs on the standardized variable Y = (X - mu)/sigma with
// threshold tau = (t - mu)/sigma and budget lambda/sigma, so mean 0 and
// variance 1 are the moment targets.
struct Problem {
    DistributionFamily fam;
    int k;
    double tau;
    double lambda;  // standardized, +inf when unconstrained
    double lower;   // support bound for NonNegative, -inf otherwise
};

struct Candidate {
    std::vector<Atom> atoms;  // standardized
    double value = -kInf;     // E[(Y - tau)_+^2]; -inf when infeasible
};

int dimension(const Problem& pr) {
    if (pr.fam == DistributionFamily::Symmetric) return pr.k == 5 ? 3 : 4;
    return pr.k == 2 ? 1 : 3;
}

double clamp_exp(double z) { return std::exp(std::clamp(z, -60.0, 60.0)); }

// Softmax over (z..., 0).
std::vector<double> simplex_weights(const double* z, int n) {
    std::vector<double> w(static_cast<std::size_t>(n) + 1);
    double hi = 0.0;
    for (int i = 0; i < n; ++i) hi = std::max(hi, z[i]);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += w[i] = std::exp(z[i] - hi);
    total += w[n] = std::exp(-hi);
    for (double& x : w) x /= total;
    return w;
}

bool decode(const Problem& pr, const std::vector<double>& z, std::vector<Atom>& atoms) {
    atoms.clear();
    if (pr.fam == DistributionFamily::Symmetric) {
        if (pr.k == 5) {
            // atoms 0, +-y1, +-y2; y2 solved from the variance.
            const double y1 = clamp_exp(z[0]);
            const auto q = simplex_weights(&z[1], 2);
            const double p1 = 0.5 * q[1];
            const double p2 = 0.5 * q[2];
            const double rest = 0.5 - p1 * y1 * y1;
            if (!(rest > 0.0) || !(p2 > 0.0)) return false;
            const double y2 = std::sqrt(rest / p2);
            atoms = {{-y2, p2}, {-y1, p1}, {0.0, q[0]}, {y1, p1}, {y2, p2}};
        } else {
            const double y1 = clamp_exp(z[0]);
            const double y2 = clamp_exp(z[1]);
            const auto q = simplex_weights(&z[2], 2);
            const double p1 = 0.5 * q[0];
            const double p2 = 0.5 * q[1];
            const double p3 = 0.5 * q[2];
            const double rest = 0.5 - p1 * y1 * y1 - p2 * y2 * y2;
            if (!(rest > 0.0) || !(p3 > 0.0)) return false;
            const double y3 = std::sqrt(rest / p3);
            atoms = {{-y3, p3}, {-y2, p2}, {-y1, p1}, {y1, p1}, {y2, p2}, {y3, p3}};
        }
        return true;
    }

    auto place = [&](double zi) {
        return std::isfinite(pr.lower) ? pr.lower + clamp_exp(zi) : zi;
    };

    if (pr.k == 2) {
        // Lower atom free, the rest follows from mean 0 and variance 1.
        const double y1 = std::isfinite(pr.lower) ? pr.lower + clamp_exp(z[0]) : -clamp_exp(z[0]);
        if (!(y1 < 0.0)) return false;
        const double sq = y1 * y1;
        atoms = {{y1, 1.0 / (1.0 + sq)}, {-1.0 / y1, sq / (1.0 + sq)}};
        return true;
    }

    // Atoms y1, y2 and mass p1 free; (y3, p3) solved, p2 = 1 - p1 - p3.
    const double y1 = place(z[0]);
    const double y2 = place(z[1]);
    const double p1 = 1.0 / (1.0 + std::exp(-std::clamp(z[2], -60.0, 60.0)));
    const double r = 1.0 - p1;
    const double a = -p1 * y1 - r * y2;
    const double bq = 1.0 - p1 * y1 * y1 - r * y2 * y2;
    if (a == 0.0) return false;
    const double y3 = bq / a - y2;
    if (!std::isfinite(y3) || y3 == y2) return false;
    const double p3 = a / (y3 - y2);
    if (!(p3 > 0.0 && p3 <= r)) return false;
    if (std::isfinite(pr.lower) && y3 < pr.lower) return false;
    atoms = {{y1, p1}, {y2, r - p3}, {y3, p3}};
    return true;
}

// The closed-form solve for the last atoms can lose all precision when a
// tiny mass sits far out, so every candidate's moments are re-checked.
constexpr double kMomentCheck = 1e-10;

// Candidates with wrong moments are discarded; among the rest, budget
// violators rank below feasible points and are ordered by violation.
struct Score {
    bool moments_ok = false;
    double violation = kInf;
    double value = -kInf;

    bool feasible() const { return moments_ok && violation == 0.0; }
    bool better_than(const Score& o) const {
        if (moments_ok != o.moments_ok) return moments_ok;
        if (feasible() != o.feasible()) return feasible();
        return feasible() ? value > o.value : violation < o.violation;
    }
};

Score evaluate(const Problem& pr, const std::vector<double>& z, std::vector<Atom>& scratch) {
    Score sc;
    if (!decode(pr, z, scratch)) return sc;
    double mass = 0.0;
    double mean = 0.0;
    double second = 0.0;
    double upm2 = 0.0;
    double lpm1 = 0.0;
    for (const Atom& a : scratch) {
        mass += a.p;
        mean += a.p * a.x;
        second += a.p * a.x * a.x;
        const double e = a.x - pr.tau;
        if (e > 0.0) upm2 += a.p * e * e;
        else lpm1 -= a.p * e;
    }
    if (!std::isfinite(upm2) || !std::isfinite(second)) return sc;
    if (std::abs(mass - 1.0) > kMomentCheck || std::abs(mean) > kMomentCheck ||
        std::abs(second - mean * mean - 1.0) > kMomentCheck) {
        return sc;
    }
    sc.moments_ok = true;
    sc.violation = lpm1 > pr.lambda ? lpm1 - pr.lambda : 0.0;
    sc.value = upm2;
    return sc;
}

void draw(const Problem& pr, std::mt19937_64& rng, std::vector<double>& z) {
    std::uniform_real_distribution<double> log_scale(-4.0, 3.0);
    std::uniform_real_distribution<double> logit(-10.0, 4.0);
    std::uniform_real_distribution<double> raw(-4.0, 4.0);
    const int n = dimension(pr);
    z.assign(static_cast<std::size_t>(n), 0.0);
    if (pr.fam == DistributionFamily::Symmetric) {
        const int scales = pr.k == 5 ? 1 : 2;
        for (int i = 0; i < n; ++i) z[i] = i < scales ? log_scale(rng) : logit(rng);
        return;
    }
    const bool bounded = std::isfinite(pr.lower);
    if (pr.k == 2) {
        z[0] = log_scale(rng);
        return;
    }
    z[0] = bounded ? log_scale(rng) : raw(rng);
    z[1] = bounded ? log_scale(rng) : raw(rng);
    z[2] = logit(rng);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct StartResult {
    Candidate best;
    std::size_t evaluations = 0;
    bool feasible = false;
};

StartResult run_start(const Problem& pr, std::uint64_t sub_seed, std::size_t slice) {
    constexpr int kSweeps = 40;
    StartResult out;
    std::mt19937_64 rng(sub_seed);
    std::vector<Atom> scratch;
    std::vector<double> z;
    Score score;

    const std::size_t draw_cap = std::max<std::size_t>(1, slice / 2);
    while (out.evaluations < draw_cap && !score.moments_ok) {
        draw(pr, rng, z);
        ++out.evaluations;
        score = evaluate(pr, z, scratch);
    }
    if (!score.moments_ok) return out;

    // Cyclic coordinate search with per-coordinate steps: a successful move
    // doubles that coordinate's step, a failed pair of probes halves it.
    // While the budget is violated the search descends on the violation; the
    // sweep count restarts once a feasible point is reached.
    const int n = static_cast<int>(z.size());
    std::vector<double> step(z.size(), 0.5);
    bool was_feasible = score.feasible();
    for (int sweep = 0; sweep < kSweeps && out.evaluations < slice; ++sweep) {
        for (int j = 0; j < n && out.evaluations < slice; ++j) {
            bool moved = false;
            for (double dir : {1.0, -1.0}) {
                if (out.evaluations >= slice) break;
                std::vector<double> trial = z;
                trial[j] += dir * step[j];
                ++out.evaluations;
                const Score sc = evaluate(pr, trial, scratch);
                if (sc.better_than(score)) {
                    z = std::move(trial);
                    score = sc;
                    moved = true;
                    break;
                }
            }
            step[j] = moved ? std::min(step[j] * 2.0, 16.0) : step[j] * 0.5;
        }
        if (!was_feasible && score.feasible()) {
            was_feasible = true;
            sweep = -1;
            std::fill(step.begin(), step.end(), 0.5);
        }
    }
    if (!score.feasible()) return out;

    out.feasible = true;
    decode(pr, z, out.best.atoms);
    out.best.value = score.value;
    return out;
}

DiscreteDistribution to_distribution(const std::vector<Atom>& standardized, const MomentProfile& p) {
    std::vector<Atom> atoms;
    atoms.reserve(standardized.size());
    double total = 0.0;
    for (const Atom& a : standardized) total += a.p;
    for (const Atom& a : standardized) atoms.push_back({p.mu + p.sigma * a.x, a.p / total});
    return DiscreteDistribution(std::move(atoms));
}

}  // namespace

OracleReport brute_force_worst_case(const MomentProfile& p, double t, const RegretBudget& b,
                                    DistributionFamily fam, int k, std::size_t budget,
                                    std::uint64_t seed) {
    require_member_profile(p, t, fam);
    if (budget < 10000) throw Error(ErrorKind::InvalidArgument, "oracle budget must be >= 10^4");
    const bool symmetric = fam == DistributionFamily::Symmetric;
    if (symmetric ? (k != 5 && k != 6) : (k != 2 && k != 3)) {
        throw Error(ErrorKind::InvalidArgument, "atom count k inconsistent with the family");
    }
    if (!set_nonempty(p, t, b, fam)) {
        throw Error(ErrorKind::InfeasibleConstraints, "moment and budget conditions are incompatible");
    }

    Problem pr;
    pr.fam = fam;
    pr.k = k;
    pr.tau = (t - p.mu) / p.sigma;
    pr.lambda = b.is_finite() ? b.lambda() / p.sigma : kInf;
    pr.lower = fam == DistributionFamily::NonNegative ? -p.mu / p.sigma : -kInf;

    const std::size_t starts = std::max<std::size_t>(1, budget / 500);
    const std::size_t slice = budget / starts;
    std::vector<StartResult> results(starts);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < starts; i = next++) {
            results[i] = run_start(pr, splitmix64(seed ^ splitmix64(i + 1)), slice);
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                             static_cast<unsigned>(starts)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    OracleReport report;
    report.seed = seed;
    std::size_t feasible = 0;
    const StartResult* best = nullptr;
    for (const StartResult& r : results) {
        report.evaluations += r.evaluations;
        if (!r.feasible) continue;
        ++feasible;
        if (best == nullptr || r.best.value > best->best.value) best = &r;
    }
    if (best == nullptr) {
        throw Error(ErrorKind::InfeasibleConstraints, "no feasible k-point distribution found");
    }
    report.best_value = best->best.value * p.sigma * p.sigma;
    report.witness = to_distribution(best->best.atoms, p);
    if (10 * feasible < starts) {
        throw BudgetExhausted("fewer than 10% of the starts reached a feasible point", report);
    }
    return report;
}

VerifyRow verify_tuple(const MomentProfile& p, double t, const RegretBudget& b,
                       DistributionFamily fam, const VerifyOptions& opts) {
    VerifyRow row;
    row.profile = p;
    row.t = t;
    row.lambda = b.lambda();
    row.scale = p.sigma * p.sigma + (t - p.mu) * (t - p.mu);
    row.closed_form =
        wc_target_semivariance_constrained(p, t, b, fam).value * opts.closed_form_factor;

    const OracleReport rep =
        brute_force_worst_case(p, t, b, fam, default_atom_count(fam, b), opts.budget, opts.seed);
    row.oracle_value = rep.best_value;
    row.evaluations = rep.evaluations;

    try {
        row.witness_value = partial_moments(witness_family(p, t, b, fam, opts.witness_eps), t).upm2;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoKnownWitness) throw;
    }

    row.gap = row.closed_form - row.oracle_value;
    const double upper = row.closed_form + 1e-6 * row.scale;
    row.sound = row.oracle_value <= upper && (!row.witness_value || *row.witness_value <= upper);
    row.within_slack = row.oracle_value >= row.closed_form - opts.lower_slack * row.scale;
    return row;
}

}  // namespace wctsv::oracle
