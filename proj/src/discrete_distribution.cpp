#include "wctsv/discrete_distribution.hpp"

#include <algorithm>
#include <cmath>

#include "wctsv/error.hpp"

namespace wctsv {

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms) {
    double total = 0.0;
    for (const Atom& a : atoms) {
        if (!std::isfinite(a.x) || !std::isfinite(a.p)) {
            throw Error(ErrorKind::InvalidArgument, "atoms must be finite");
        }
        if (a.p < 0.0) throw Error(ErrorKind::InvalidArgument, "negative atom mass");
        total += a.p;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw Error(ErrorKind::InvalidArgument, "atom masses do not sum to one");
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
    for (const Atom& a : atoms) {
        if (a.p == 0.0) continue;
        if (!atoms_.empty() && a.x - atoms_.back().x <= kMergeTolerance) {
            atoms_.back().p += a.p;
        } else {
            atoms_.push_back(a);
        }
    }
    if (atoms_.empty()) throw Error(ErrorKind::InvalidArgument, "distribution has no mass");
}

double DiscreteDistribution::mean() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.p * a.x;
    return m;
}

double DiscreteDistribution::variance() const {
    const double m = mean();
    double v = 0.0;
    for (const Atom& a : atoms_) v += a.p * (a.x - m) * (a.x - m);
    return v;
}

bool DiscreteDistribution::is_symmetric_about(double center, double tol) const {
    const std::size_t n = atoms_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Atom& lo = atoms_[i];
        const Atom& hi = atoms_[n - 1 - i];
        const double scale = std::max(1.0, std::abs(lo.x - center));
        if (std::abs((lo.x - center) + (hi.x - center)) > tol * scale) return false;
        if (std::abs(lo.p - hi.p) > tol) return false;
    }
    return true;
}

PartialMoments partial_moments(const DiscreteDistribution& d, double t) {
    PartialMoments pm;
    pm.mean = d.mean();
    pm.variance = d.variance();
    for (const Atom& a : d.atoms()) {
        const double e = a.x - t;
        if (e > 0.0) {
            pm.upm1 += a.p * e;
            pm.upm2 += a.p * e * e;
        } else if (e < 0.0) {
            pm.lpm1 -= a.p * e;
            pm.lpm2 += a.p * e * e;
        }
    }
    return pm;
}

}  // namespace wctsv
