#pragma once

// Command-line front end. Everything the `wctsv` executable does lives here so
// that tests can drive it in process.
//
// Exit codes: 0 success, 1 domain error (empty set, infeasible budget,
// singular covariance, failed verification), 2 usage, parse or I/O error.

#include <iosfwd>
#include <string>
#include <vector>

#include "wctsv/worst_case.hpp"

namespace wctsv::cli {

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct GridTuple {
    MomentProfile profile;
    double t = 0.0;
    double lambda = 0.0;  // +inf: unconstrained
};

/// `key=lo:hi:n` terms separated by ';' (a single value is also accepted).
/// Keys: mu, sigma, then t or tz (t = mu + tz * sigma), then optionally
/// lambda (absolute, "inf" for none) or lz (lambda = (mu - t)_- + lz * sigma).
/// Tuples come out with mu varying slowest. Throws ParseError.
std::vector<GridTuple> parse_grid_spec(const std::string& spec);

/// Default verification grid for a family: 225 unconstrained tuples with
/// mu in [-2, 2], sigma in [0.2, 3], t in [mu - 2 sigma, mu + 2 sigma].
std::string default_grid_spec();

}  // namespace wctsv::cli
