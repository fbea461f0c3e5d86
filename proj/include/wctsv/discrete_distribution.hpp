#pragma once

#include <span>
#include <vector>

namespace wctsv {

struct Atom {
    double x = 0.0;
    double p = 0.0;
};

/// Finite distribution with strictly increasing atom locations.
///
/// Construction sorts the atoms, merges locations closer than 1e-12, drops
/// zero-mass atoms, and rejects negative masses or a total mass differing
/// from one by more than 1e-12.
class DiscreteDistribution {
public:
    static constexpr double kMergeTolerance = 1e-12;
    static constexpr double kMassTolerance = 1e-12;

    /// Point mass at 0.
    DiscreteDistribution() : atoms_{{0.0, 1.0}} {}
    explicit DiscreteDistribution(std::vector<Atom> atoms);

    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    double mean() const;
    double variance() const;
    double min_support() const { return atoms_.front().x; }
    double max_support() const { return atoms_.back().x; }

    /// Invariance of locations and masses under x -> 2*center - x.
    bool is_symmetric_about(double center, double tol = 1e-12) const;

private:
    std::vector<Atom> atoms_;
};

struct PartialMoments {
    double mean = 0.0;
    double variance = 0.0;
    double upm1 = 0.0;  // E[(X-t)_+]
    double upm2 = 0.0;  // E[(X-t)_+^2]
    double lpm1 = 0.0;  // E[(X-t)_-]
    double lpm2 = 0.0;  // E[(X-t)_-^2]
};

PartialMoments partial_moments(const DiscreteDistribution& d, double t);

}  // namespace wctsv
