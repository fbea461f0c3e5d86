#include "wctsv/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "wctsv/backtest.hpp"
#include "wctsv/error.hpp"
#include "wctsv/frontier.hpp"
#include "wctsv/market_data.hpp"
#include "wctsv/oracle.hpp"
#include "wctsv/simplex_optimizer.hpp"

namespace wctsv::cli {

namespace {

using json = nlohmann::ordered_json;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest decimal that reads back to the same double.
std::string num(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); }

double parse_real(const std::string& s, const std::string& what) {
    if (s == "inf" || s == "+inf" || s == "Inf") return kInf;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || std::isnan(v)) {
        throw Error(ErrorKind::ParseError, what + ": '" + s + "' is not a number");
    }
    return v;
}

std::uint64_t effective_seed(std::uint64_t flag) {
    const char* env = std::getenv("WCTSV_SEED");
    if (!env || !*env) return flag;
    std::uint64_t v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(ErrorKind::ParseError, "WCTSV_SEED must be a non-negative integer");
    }
    return v;
}

DistributionFamily family_of(const std::string& name) {
    const auto f = parse_family(name);
    if (!f) usage("unknown family '" + name + "' (arbitrary, symmetric, nonnegative)");
    return *f;
}

// --- market inputs ---------------------------------------------------------

struct MarketInputs {
    std::string market_path;
    std::string prices_path;
    int window = 0;  // 0: min(252, available rows)
    std::string ridge = "auto";
};

void add_market_options(CLI::App* cmd, MarketInputs& in) {
    cmd->add_option("--market", in.market_path, "JSON file with assets, mu and cov");
    cmd->add_option("--prices", in.prices_path, "price CSV (date,<TICKER>,...)");
    cmd->add_option("--window", in.window, "estimation window in trading days (prices only)");
    cmd->add_option("--ridge", in.ridge, "covariance ridge, a number or 'auto' (prices only)");
}

MarketModel market_from_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::IoError, "cannot open market file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    MarketModel m;
    try {
        const auto mu = j.at("mu").get<std::vector<double>>();
        const auto cov = j.at("cov").get<std::vector<std::vector<double>>>();
        const Eigen::Index d = static_cast<Eigen::Index>(mu.size());
        m.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), d);
        m.cov.resize(d, static_cast<Eigen::Index>(cov.size()));
        if (static_cast<Eigen::Index>(cov.size()) != d) throw Error(ErrorKind::ParseError, "cov must be d x d");
        for (Eigen::Index i = 0; i < d; ++i) {
            if (static_cast<Eigen::Index>(cov[i].size()) != d) throw Error(ErrorKind::ParseError, "cov must be d x d");
            for (Eigen::Index k = 0; k < d; ++k) m.cov(i, k) = cov[i][k];
        }
        if (j.contains("assets")) {
            m.assets = j.at("assets").get<std::vector<std::string>>();
        } else {
            for (Eigen::Index i = 0; i < d; ++i) m.assets.push_back("asset" + std::to_string(i + 1));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    if (m.assets.size() != static_cast<std::size_t>(m.mu.size())) {
        throw Error(ErrorKind::ParseError, path + ": assets and mu differ in length");
    }
    validate_market(m);
    return m;
}

std::optional<double> ridge_of(const std::string& s) {
    if (s == "auto") return std::nullopt;
    const double r = parse_real(s, "--ridge");
    if (!(r >= 0.0) || std::isinf(r)) usage("--ridge must be a finite number >= 0 or 'auto'");
    return r;
}

MarketModel load_market(const MarketInputs& in) {
    if (in.market_path.empty() == in.prices_path.empty()) usage("give exactly one of --market or --prices");
    if (!in.market_path.empty()) return market_from_json(in.market_path);
    const LossPanel l = compute_losses(load_price_panel(in.prices_path));
    const int rows = static_cast<int>(l.losses.rows());
    const int window = in.window > 0 ? in.window : std::min(252, rows);
    const int end = rows - 1;
    const auto ridge = ridge_of(in.ridge);
    return ridge ? estimate_moments(l, window, end, *ridge) : estimate_moments(l, window, end);
}

json portfolio_json(const MarketModel& m, const Portfolio& p) {
    json w = json::object();
    for (std::size_t i = 0; i < m.assets.size(); ++i) w[m.assets[i]] = p.weights[static_cast<Eigen::Index>(i)];
    return json{{"weights", w},
                {"expected_loss", p.expected_loss},
                {"stdev", p.stdev},
                {"objective", p.objective},
                {"regime", p.regime}};
}

// --- wc ----------------------------------------------------------------------

struct WcArgs {
    double mu = 0.0, sigma = 1.0, t = 0.0;
    std::string lambda;
    std::string family = "arbitrary";
    std::string measure = "tsv";
    bool json = false;
};

int cmd_wc(const WcArgs& a, std::ostream& out) {
    const MomentProfile p{a.mu, a.sigma};
    const DistributionFamily fam = family_of(a.family);
    std::optional<double> lambda;
    if (!a.lambda.empty()) lambda = parse_real(a.lambda, "--lambda");

    WorstCaseValue v;
    if (a.measure == "regret") {
        if (lambda && std::isfinite(*lambda)) usage("--measure regret does not take --lambda");
        v = wc_expected_regret(p, a.t, fam);
    } else if (a.measure == "tsv") {
        v = lambda ? wc_target_semivariance_constrained(p, a.t, RegretBudget::at_most(*lambda), fam)
                   : wc_target_semivariance(p, a.t, fam);
    } else {
        usage("--measure must be 'regret' or 'tsv'");
    }

    if (a.json) {
        json inputs{{"mu", a.mu}, {"sigma", a.sigma}, {"t", a.t}};
        if (lambda && std::isfinite(*lambda)) inputs["lambda"] = *lambda;
        else inputs["lambda"] = nullptr;
        inputs["family"] = to_string(fam);
        inputs["measure"] = a.measure;
        out << json{{"value", v.value}, {"regime", v.regime}, {"inputs", inputs}}.dump(2) << '\n';
    } else {
        out << num(v.value) << '\n' << "regime: " << v.regime << '\n';
    }
    return 0;
}

// --- verify ------------------------------------------------------------------

struct VerifyArgs {
    std::string grid = default_grid_spec();
    std::string family = "symmetric";
    long long budget = 100000;
    std::uint64_t seed = 1;
    std::string out_path;
    double slack = 5e-3;
    double corrupt = 1.0;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
    if (a.budget < 10000) usage("--budget must be at least 10000 evaluations");
    if (!(a.slack >= 0.0)) usage("--slack must be >= 0");
    const DistributionFamily fam = family_of(a.family);
    const auto grid = parse_grid_spec(a.grid);

    oracle::VerifyOptions opts;
    opts.budget = static_cast<std::size_t>(a.budget);
    opts.seed = effective_seed(a.seed);
    opts.lower_slack = a.slack;
    opts.closed_form_factor = a.corrupt;

    std::ofstream file;
    if (!a.out_path.empty()) {
        file.open(a.out_path);
        if (!file) throw Error(ErrorKind::IoError, "cannot write '" + a.out_path + "'");
    }
    std::ostream& csv = a.out_path.empty() ? out : file;
    std::ostream& log = a.out_path.empty() ? err : out;

    csv << "mu,sigma,t,lambda,family,closed_form,oracle_value,witness_value,gap,scale,sound,within_slack,"
           "evaluations,status\n";
    std::size_t failures = 0, empty = 0;
    double worst_rel_gap = 0.0;
    for (const GridTuple& g : grid) {
        const RegretBudget b = std::isinf(g.lambda) ? RegretBudget::unconstrained()
                                                    : RegretBudget::at_most(g.lambda);
        csv << num(g.profile.mu) << ',' << num(g.profile.sigma) << ',' << num(g.t) << ',' << num(g.lambda)
            << ',' << to_string(fam) << ',';
        if (!set_nonempty(g.profile, g.t, b, fam)) {
            ++empty;
            csv << ",,,,,,,,empty\n";
            continue;
        }
        try {
            const auto row = oracle::verify_tuple(g.profile, g.t, b, fam, opts);
            const bool ok = row.sound && row.within_slack;
            failures += ok ? 0 : 1;
            worst_rel_gap = std::max(worst_rel_gap, std::abs(row.gap) / row.scale);
            csv << num(row.closed_form) << ',' << num(row.oracle_value) << ','
                << (row.witness_value ? num(*row.witness_value) : "") << ',' << num(row.gap) << ','
                << num(row.scale) << ',' << (row.sound ? 1 : 0) << ',' << (row.within_slack ? 1 : 0) << ','
                << row.evaluations << ',' << (ok ? "ok" : "violation") << '\n';
        } catch (const Error& e) {
            ++failures;
            csv << ",,,,,,," << ',' << "oracle_error\n";
            log << "tuple (" << num(g.profile.mu) << ", " << num(g.profile.sigma) << ", " << num(g.t)
                << "): " << e.what() << '\n';
        }
        csv.flush();
    }
    log << grid.size() << " tuples, " << empty << " empty, " << failures
        << " violations, max |gap|/scale " << num(worst_rel_gap) << '\n';
    return failures == 0 ? 0 : 1;
}

// --- frontier / optimize / backtest -----------------------------------------

struct FrontierArgs {
    MarketInputs market;
    std::string xi;
};

int cmd_frontier(const FrontierArgs& a, std::ostream& out) {
    const MarketModel m = load_market(a.market);
    const FrontierParams fp = frontier_params(m);
    json j{{"assets", m.assets},
           {"u", fp.u},
           {"v0", fp.v0},
           {"v1", fp.v1},
           {"v2", fp.v2},
           {"min_variance_loss", fp.min_variance_loss()},
           {"min_variance", fp.variance_at(fp.min_variance_loss())}};
    if (!a.xi.empty()) {
        const double xi = parse_real(a.xi, "--xi");
        j["xi"] = xi;
        j["portfolio"] = portfolio_json(m, min_variance_portfolio(fp, m, xi));
    }
    out << j.dump(2) << '\n';
    return 0;
}

struct OptimizeArgs {
    MarketInputs market;
    std::string model;
    std::string config;
    double t = 0.0, lambda = 0.0, nu = 0.0;
    std::uint64_t seed = 1;
    CLI::Option* t_opt = nullptr;
    CLI::Option* lambda_opt = nullptr;
    CLI::Option* nu_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* window_opt = nullptr;
    CLI::Option* ridge_opt = nullptr;
};

int cmd_optimize(OptimizeArgs& a, std::ostream& out) {
    const auto kind = parse_model(a.model);
    if (!kind) usage("unknown model '" + a.model + "' (TSV, M_TSV_S, EEP_TSV, EEP_TSV_S, MV)");
    BacktestConfig cfg = a.config.empty() ? BacktestConfig{} : load_backtest_config(a.config);
    if (*a.t_opt) cfg.t = a.t;
    if (*a.lambda_opt) cfg.lambda = a.lambda;
    if (*a.nu_opt) cfg.nu = a.nu;
    cfg.seed = effective_seed(*a.seed_opt ? a.seed : cfg.seed);
    if (!a.config.empty()) {
        if (!*a.window_opt) a.market.window = cfg.window;
        if (!*a.ridge_opt && cfg.ridge) a.market.ridge = num(*cfg.ridge);
    }

    const MarketModel m = load_market(a.market);
    Portfolio p;
    switch (*kind) {
        case ModelKind::MV: p = classical_mv(frontier_params(m), m, cfg.nu); break;
        case ModelKind::TSV: p = tsv_portfolio(frontier_params(m), m, cfg.t); break;
        case ModelKind::M_TSV_S: p = m_tsv_s_portfolio(frontier_params(m), m, cfg.nu, cfg.t); break;
        case ModelKind::EEP_TSV: p = eep_tsv_portfolio(m, cfg.t, cfg.lambda, cfg.solver); break;
        case ModelKind::EEP_TSV_S: {
            SimplexSolverConfig solver = cfg.solver;
            solver.seed = cfg.seed;
            p = eep_tsv_s_portfolio(m, cfg.t, cfg.lambda, solver);
            break;
        }
    }
    json j{{"model", to_string(*kind)}};
    j.update(portfolio_json(m, p));
    j["inputs"] = json{{"t", cfg.t}, {"lambda", cfg.lambda}, {"nu", cfg.nu}, {"seed", cfg.seed}};
    out << j.dump(2) << '\n';
    return 0;
}

struct BacktestArgs {
    std::string prices;
    std::string config;
    std::string out_dir;
    std::string models;
    std::uint64_t seed = 1;
    CLI::Option* seed_opt = nullptr;
};

int cmd_backtest(const BacktestArgs& a, std::ostream& out) {
    BacktestConfig cfg = a.config.empty() ? BacktestConfig{} : load_backtest_config(a.config);
    if (!a.models.empty()) {
        std::istringstream in("models = " + a.models);
        cfg.models = parse_backtest_config(in).models;
    }
    cfg.seed = effective_seed(*a.seed_opt ? a.seed : cfg.seed);

    const LossPanel l = compute_losses(load_price_panel(a.prices));
    const BacktestResult r = run_backtest(l, cfg);

    std::error_code ec;
    std::filesystem::create_directories(a.out_dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create '" + a.out_dir + "': " + ec.message());
    const auto wealth_path = std::filesystem::path(a.out_dir) / "wealth.csv";
    const auto summary_path = std::filesystem::path(a.out_dir) / "summary.json";
    std::ofstream wealth(wealth_path);
    std::ofstream summary(summary_path);
    if (!wealth || !summary) throw Error(ErrorKind::IoError, "cannot write into '" + a.out_dir + "'");
    write_wealth_csv(wealth, r);
    const auto s = summarize(r);
    write_summary_json(summary, s);

    out << r.dates.size() << " out-of-sample days (" << r.dates.front() << " to " << r.dates.back()
        << "), window " << cfg.window << '\n';
    for (const auto& m : s) {
        out << m.model << ": final wealth " << num(m.final_wealth) << ", max drawdown " << num(m.max_drawdown)
            << '\n';
    }
    out << "wrote " << wealth_path.string() << " and " << summary_path.string() << '\n';
    return 0;
}

void hint(const Error& e, std::ostream& err) {
    switch (e.kind()) {
        case ErrorKind::NotPositiveDefinite:
            err << "hint: drop collinear tickers or raise --ridge (or 'ridge' in the config)\n";
            break;
        case ErrorKind::InfeasibleBudget:
            err << "hint: raise lambda or t so that some asset's mean loss is at least t - lambda\n";
            break;
        case ErrorKind::WindowTooLarge:
        case ErrorKind::TooFewRows:
            err << "hint: shorten the window or supply more price history\n";
            break;
        default: break;
    }
}

}  // namespace

std::string default_grid_spec() { return "mu=-2:2:5;sigma=0.2:3:5;tz=-2:2:9;lambda=inf"; }

std::vector<GridTuple> parse_grid_spec(const std::string& spec) {
    struct Axis {
        std::vector<double> values;
        bool set = false;
    };
    Axis mu, sigma, t, tz, lambda, lz;
    std::istringstream ss(spec);
    std::string term;
    while (std::getline(ss, term, ';')) {
        if (term.empty()) continue;
        const auto eq = term.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "grid term '" + term + "' lacks '='");
        const std::string key = term.substr(0, eq);
        const std::string val = term.substr(eq + 1);
        Axis* axis = key == "mu"       ? &mu
                     : key == "sigma"  ? &sigma
                     : key == "t"      ? &t
                     : key == "tz"     ? &tz
                     : key == "lambda" ? &lambda
                     : key == "lz"     ? &lz
                                       : nullptr;
        if (!axis) throw Error(ErrorKind::ParseError, "unknown grid key '" + key + "'");
        if (axis->set) throw Error(ErrorKind::ParseError, "grid key '" + key + "' given twice");
        axis->set = true;

        std::vector<std::string> parts;
        std::istringstream vs(val);
        std::string part;
        while (std::getline(vs, part, ':')) parts.push_back(part);
        if (parts.size() == 1) {
            axis->values = {parse_real(parts[0], "grid " + key)};
        } else if (parts.size() == 3) {
            const double lo = parse_real(parts[0], "grid " + key);
            const double hi = parse_real(parts[1], "grid " + key);
            int n = 0;
            const auto res = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), n);
            if (res.ec != std::errc() || res.ptr != parts[2].data() + parts[2].size() || n < 1) {
                throw Error(ErrorKind::ParseError, "grid " + key + ": count must be a positive integer");
            }
            if (!std::isfinite(lo) || !std::isfinite(hi)) {
                throw Error(ErrorKind::ParseError, "grid " + key + ": range ends must be finite");
            }
            for (int i = 0; i < n; ++i) axis->values.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        } else {
            throw Error(ErrorKind::ParseError, "grid " + key + ": expected value or lo:hi:n");
        }
    }
    if (!mu.set || !sigma.set) throw Error(ErrorKind::ParseError, "grid needs mu and sigma");
    if (t.set == tz.set) throw Error(ErrorKind::ParseError, "grid needs exactly one of t or tz");
    if (lambda.set && lz.set) throw Error(ErrorKind::ParseError, "grid takes lambda or lz, not both");
    const Axis& t_axis = t.set ? t : tz;
    const Axis none{{kInf}, true};
    const Axis& l_axis = lz.set ? lz : lambda.set ? lambda : none;

    std::vector<GridTuple> out;
    for (double m : mu.values) {
        for (double s : sigma.values) {
            for (double tv : t_axis.values) {
                for (double lv : l_axis.values) {
                    GridTuple g;
                    g.profile = {m, s};
                    g.t = t.set ? tv : m + tv * s;
                    g.lambda = lz.set ? neg_part(m - g.t) + lv * s : lv;
                    if (!(g.lambda > 0.0)) throw Error(ErrorKind::ParseError, "grid lambda values must be > 0");
                    out.push_back(g);
                }
            }
        }
    }
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Worst-case target semivariance: evaluation, verification, portfolios, backtests", "wctsv"};
    app.require_subcommand(1);

    WcArgs wc;
    auto* wc_cmd = app.add_subcommand("wc", "worst-case expected regret or target semivariance");
    wc_cmd->add_option("--mu", wc.mu, "mean loss")->required();
    wc_cmd->add_option("--sigma", wc.sigma, "standard deviation of the loss")->required();
    wc_cmd->add_option("--t", wc.t, "threshold loss")->required();
    wc_cmd->add_option("--lambda", wc.lambda, "excess-profit budget ('inf' for none)");
    wc_cmd->add_option("--family", wc.family, "arbitrary, symmetric or nonnegative");
    wc_cmd->add_option("--measure", wc.measure, "regret or tsv");
    wc_cmd->add_flag("--json", wc.json, "print JSON");

    VerifyArgs vf;
    auto* vf_cmd = app.add_subcommand("verify", "compare closed forms with the brute-force oracle");
    vf_cmd->add_option("--grid-spec", vf.grid, "e.g. mu=-2:2:5;sigma=0.2:3:5;tz=-2:2:9;lambda=inf");
    vf_cmd->add_option("--family", vf.family, "arbitrary, symmetric or nonnegative");
    vf_cmd->add_option("--budget", vf.budget, "oracle evaluations per tuple (>= 10000)");
    vf_cmd->add_option("--seed", vf.seed, "oracle seed (WCTSV_SEED overrides)");
    vf_cmd->add_option("--out", vf.out_path, "CSV report path (stdout if omitted)");
    vf_cmd->add_option("--slack", vf.slack, "allowed oracle shortfall, relative to sigma^2 + (t - mu)^2");
    vf_cmd->add_option("--corrupt-closed-form", vf.corrupt)->group("");

    FrontierArgs fr;
    auto* fr_cmd = app.add_subcommand("frontier", "mean-variance frontier parameters");
    add_market_options(fr_cmd, fr.market);
    fr_cmd->add_option("--xi", fr.xi, "also print the minimum-variance portfolio at this expected loss");

    OptimizeArgs op;
    BacktestConfig defaults;
    op.t = defaults.t;
    op.lambda = defaults.lambda;
    op.nu = defaults.nu;
    auto* op_cmd = app.add_subcommand("optimize", "solve one portfolio model");
    add_market_options(op_cmd, op.market);
    op.window_opt = op_cmd->get_option("--window");
    op.ridge_opt = op_cmd->get_option("--ridge");
    op_cmd->add_option("--model", op.model, "TSV, M_TSV_S, EEP_TSV, EEP_TSV_S or MV")->required();
    op_cmd->add_option("--config", op.config, "backtest config supplying t, lambda, nu, window, ridge, seed");
    op.t_opt = op_cmd->add_option("--t", op.t, "threshold loss");
    op.lambda_opt = op_cmd->add_option("--lambda", op.lambda, "excess-profit budget");
    op.nu_opt = op_cmd->add_option("--nu", op.nu, "expected-loss cap");
    op.seed_opt = op_cmd->add_option("--seed", op.seed, "solver seed (WCTSV_SEED overrides)");

    BacktestArgs bt;
    auto* bt_cmd = app.add_subcommand("backtest", "rolling-window backtest of the portfolio models");
    bt_cmd->add_option("--prices", bt.prices, "price CSV")->required();
    bt_cmd->add_option("--config", bt.config, "key = value config file");
    bt_cmd->add_option("--out", bt.out_dir, "output directory")->required();
    bt_cmd->add_option("--models", bt.models, "comma-separated subset, overrides the config");
    bt.seed_opt = bt_cmd->add_option("--seed", bt.seed, "seed (WCTSV_SEED overrides)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*wc_cmd) return cmd_wc(wc, out);
        if (*vf_cmd) return cmd_verify(vf, out, err);
        if (*fr_cmd) return cmd_frontier(fr, out);
        if (*op_cmd) return cmd_optimize(op, out);
        if (*bt_cmd) return cmd_backtest(bt, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        hint(e, err);
        return e.is_domain_error() ? 1 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace wctsv::cli
