#pragma once

// Rolling-window, daily-rebalanced comparison of the portfolio models.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wctsv/market_data.hpp"
#include "wctsv/simplex_optimizer.hpp"

namespace wctsv {

enum class ModelKind { TSV, M_TSV_S, EEP_TSV, EEP_TSV_S, MV };

const char* to_string(ModelKind k);
/// Accepts the enum names, case-insensitive, with '-' or '_'.
std::optional<ModelKind> parse_model(const std::string& name);
/// Long-only models (w >= 0).
bool is_simplex_model(ModelKind k);

struct BacktestConfig {
    int window = 252;
    std::vector<ModelKind> models = {ModelKind::TSV, ModelKind::M_TSV_S, ModelKind::EEP_TSV,
                                     ModelKind::EEP_TSV_S, ModelKind::MV};
    double t = -0.003;
    double lambda = 0.015;
    double nu = -0.001;
    std::optional<double> ridge;  // absent: auto_ridge
    std::uint64_t seed = 1;
    SimplexSolverConfig solver;
};

/// Throws InvalidArgument when window < 2, lambda <= 0 or models is empty.
void validate_config(const BacktestConfig& cfg);

/// `key = value` lines; '#' starts a comment. Keys: window, models
/// (comma-separated), t, lambda, nu, ridge (number or "auto"), seed.
/// Unset keys keep their defaults. Throws ParseError (with line number).
BacktestConfig parse_backtest_config(std::istream& in);
BacktestConfig load_backtest_config(const std::string& path);

struct ModelPath {
    ModelKind model;
    std::vector<Eigen::VectorXd> weights;  // one per out-of-sample day
    std::vector<double> returns;           // -w'l on that day
    std::vector<double> wealth;            // starts at 1; one more entry than returns
};

struct BacktestResult {
    BacktestConfig config;
    std::vector<std::string> dates;  // out-of-sample days
    int first_index = 0;             // loss-panel row of the first out-of-sample day
    std::vector<ModelPath> paths;    // in config.models order
};

/// For each loss row k >= window: estimate on rows [k - window, k - 1],
/// solve, realize -w'l_k and compound. Throws TooFewRows when no
/// out-of-sample day exists; solver and estimation failures are rethrown
/// with the model and date prepended.
BacktestResult run_backtest(const LossPanel& l, const BacktestConfig& cfg);

/// Weights for one model on one out-of-sample row k (no compounding).
Eigen::VectorXd solve_day(const LossPanel& l, const BacktestConfig& cfg, ModelKind model, int k);

struct ModelSummary {
    std::string model;
    std::size_t days = 0;
    double final_wealth = 1.0;
    double ann_return = 0.0;  // 252 * mean daily return
    double ann_vol = 0.0;     // sqrt(252) * sample stdev; 0 when undefined
    bool vol_defined = true;  // false with a single day
    double max_drawdown = 0.0;
};

std::vector<ModelSummary> summarize(const BacktestResult& r);

/// `date,model,wealth`, one row per out-of-sample day and model.
void write_wealth_csv(std::ostream& out, const BacktestResult& r);
/// JSON array of {model, final_wealth, ann_return, ann_vol, max_drawdown,
/// days, vol_defined}.
void write_summary_json(std::ostream& out, const std::vector<ModelSummary>& s);

}  // namespace wctsv
