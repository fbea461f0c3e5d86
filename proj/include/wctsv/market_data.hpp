#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wctsv/frontier.hpp"

namespace wctsv {

/// Close prices, one row per trading day (ISO dates, strictly increasing).
struct PricePanel {
    std::vector<std::string> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd close;  // dates x tickers
};

/// Daily percentage losses -(V_{k+1} - V_k) / V_k, labelled with the date
/// on which the loss is realized (the later of the two price dates).
struct LossPanel {
    std::vector<std::string> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd losses;  // dates x tickers
};

/// CSV with header `date,T1,T2,...`. A repeated ticker column is dropped
/// (the first occurrence is kept). Any malformed row is rejected.
/// Throws IoError, ParseError, NonPositivePrice, UnsortedDates; messages
/// carry the 1-based line number.
PricePanel load_price_panel(const std::string& path);
PricePanel parse_price_panel(std::istream& in);

/// Throws TooFewRows with fewer than two dates.
LossPanel compute_losses(const PricePanel& p);

/// 1e-8 * trace(cov) / d.
double auto_ridge(const Eigen::MatrixXd& cov);

/// Sample mean and covariance (divisor window - 1) of rows
/// [end_index - window + 1, end_index], plus ridge * I.
/// Throws InvalidArgument (window < 2, ridge < 0), WindowTooLarge,
/// NotPositiveDefinite, DegenerateMeans.
MarketModel estimate_moments(const LossPanel& l, int window, int end_index, double ridge);
/// Same with ridge = auto_ridge(sample covariance).
MarketModel estimate_moments(const LossPanel& l, int window, int end_index);

}  // namespace wctsv
