#include "wctsv/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "wctsv/error.hpp"
#include "wctsv/frontier.hpp"

namespace wctsv {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::TSV: return "TSV";
        case ModelKind::M_TSV_S: return "M_TSV_S";
        case ModelKind::EEP_TSV: return "EEP_TSV";
        case ModelKind::EEP_TSV_S: return "EEP_TSV_S";
        case ModelKind::MV: return "MV";
    }
    return "unknown";
}

std::optional<ModelKind> parse_model(const std::string& name) {
    std::string key;
    for (char c : name) key.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    for (ModelKind k : {ModelKind::TSV, ModelKind::M_TSV_S, ModelKind::EEP_TSV, ModelKind::EEP_TSV_S, ModelKind::MV}) {
        if (key == to_string(k)) return k;
    }
    return std::nullopt;
}

bool is_simplex_model(ModelKind k) { return k == ModelKind::EEP_TSV || k == ModelKind::EEP_TSV_S; }

void validate_config(const BacktestConfig& cfg) {
    if (cfg.window < 2) throw Error(ErrorKind::InvalidArgument, "window must be >= 2");
    if (!(cfg.lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be > 0");
    if (cfg.models.empty()) throw Error(ErrorKind::InvalidArgument, "at least one model is required");
    if (!std::isfinite(cfg.t) || !std::isfinite(cfg.nu)) {
        throw Error(ErrorKind::InvalidArgument, "t and nu must be finite");
    }
    if (cfg.ridge && !(*cfg.ridge >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ridge must be >= 0");
    validate_config(cfg.solver);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(std::size_t line, const std::string& msg) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& v, std::size_t line, const std::string& key) {
    double out = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(out)) {
        config_error(line, "'" + key + "' expects a number, got '" + v + "'");
    }
    return out;
}

template <typename Int>
Int parse_integer(const std::string& v, std::size_t line, const std::string& key) {
    Int out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        config_error(line, "'" + key + "' expects an integer, got '" + v + "'");
    }
    return out;
}

}  // namespace

BacktestConfig parse_backtest_config(std::istream& in) {
    BacktestConfig cfg;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) config_error(line, "expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (value.empty()) config_error(line, "missing value for '" + key + "'");

        if (key == "window") {
            cfg.window = parse_integer<int>(value, line, key);
        } else if (key == "models") {
            cfg.models.clear();
            std::istringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto k = parse_model(trim(item));
                if (!k) config_error(line, "unknown model '" + trim(item) + "'");
                if (std::find(cfg.models.begin(), cfg.models.end(), *k) == cfg.models.end()) {
                    cfg.models.push_back(*k);
                }
            }
        } else if (key == "t") {
            cfg.t = parse_number(value, line, key);
        } else if (key == "lambda") {
            cfg.lambda = parse_number(value, line, key);
        } else if (key == "nu") {
            cfg.nu = parse_number(value, line, key);
        } else if (key == "ridge") {
            if (value == "auto") cfg.ridge.reset();
            else cfg.ridge = parse_number(value, line, key);
        } else if (key == "seed") {
            cfg.seed = parse_integer<std::uint64_t>(value, line, key);
        } else {
            config_error(line, "unknown key '" + key + "'");
        }
    }
    try {
        validate_config(cfg);
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, std::string("invalid config: ") + e.what());
    }
    return cfg;
}

BacktestConfig load_backtest_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config file '" + path + "'");
    return parse_backtest_config(in);
}

namespace {

std::uint64_t day_seed(std::uint64_t seed, int k) {
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(k) + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

Eigen::VectorXd solve_day(const LossPanel& l, const BacktestConfig& cfg, ModelKind model, int k) {
    const MarketModel m = cfg.ridge ? estimate_moments(l, cfg.window, k - 1, *cfg.ridge)
                                    : estimate_moments(l, cfg.window, k - 1);
    switch (model) {
        case ModelKind::MV: return classical_mv(frontier_params(m), m, cfg.nu).weights;
        case ModelKind::TSV: return tsv_portfolio(frontier_params(m), m, cfg.t).weights;
        case ModelKind::M_TSV_S: return m_tsv_s_portfolio(frontier_params(m), m, cfg.nu, cfg.t).weights;
        case ModelKind::EEP_TSV: return eep_tsv_portfolio(m, cfg.t, cfg.lambda, cfg.solver).weights;
        case ModelKind::EEP_TSV_S: {
            SimplexSolverConfig solver = cfg.solver;
            solver.seed = day_seed(cfg.seed, k);
            return eep_tsv_s_portfolio(m, cfg.t, cfg.lambda, solver).weights;
        }
    }
    throw Error(ErrorKind::InvalidArgument, "unknown model");
}

BacktestResult run_backtest(const LossPanel& l, const BacktestConfig& cfg) {
    validate_config(cfg);
    const int n = static_cast<int>(l.losses.rows());
    if (n <= cfg.window) {
        throw Error(ErrorKind::TooFewRows, "loss panel has " + std::to_string(n) +
                                               " rows; more than the window of " +
                                               std::to_string(cfg.window) + " are needed");
    }
    BacktestResult r;
    r.config = cfg;
    r.first_index = cfg.window;
    r.dates.assign(l.dates.begin() + cfg.window, l.dates.end());
    const int days = n - cfg.window;

    for (ModelKind model : cfg.models) {
        // Days are solved independently (in parallel), then compounded in order.
        std::vector<Eigen::VectorXd> weights(days);
        std::vector<std::optional<Error>> failures(days);
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int i = next++; i < days; i = next++) {
                try {
                    weights[i] = solve_day(l, cfg, model, cfg.window + i);
                } catch (const Error& e) {
                    failures[i] = e;
                }
            }
        };
        const unsigned threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                                 static_cast<unsigned>(days)));
        std::vector<std::thread> pool;
        for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();

        for (int i = 0; i < days; ++i) {
            if (failures[i]) {
                const std::string prefix = std::string(to_string(failures[i]->kind())) + ": ";
                std::string detail = failures[i]->what();
                if (detail.rfind(prefix, 0) == 0) detail.erase(0, prefix.size());
                throw Error(failures[i]->kind(),
                            std::string(to_string(model)) + " on " + r.dates[i] + ": " + detail);
            }
        }

        ModelPath path;
        path.model = model;
        path.wealth.reserve(days + 1);
        path.wealth.push_back(1.0);
        for (int i = 0; i < days; ++i) {
            const double ret = -weights[i].dot(l.losses.row(cfg.window + i).transpose());
            path.returns.push_back(ret);
            path.wealth.push_back(path.wealth.back() * (1.0 + ret));
        }
        path.weights = std::move(weights);
        r.paths.push_back(std::move(path));
    }
    return r;
}

std::vector<ModelSummary> summarize(const BacktestResult& r) {
    std::vector<ModelSummary> out;
    for (const ModelPath& p : r.paths) {
        ModelSummary s;
        s.model = to_string(p.model);
        s.days = p.returns.size();
        if (s.days == 0) throw Error(ErrorKind::InvalidArgument, "empty backtest result");
        s.final_wealth = p.wealth.back();

        double mean = 0.0;
        for (double x : p.returns) mean += x;
        mean /= static_cast<double>(s.days);
        s.ann_return = 252.0 * mean;
        if (s.days > 1) {
            double ss = 0.0;
            for (double x : p.returns) ss += (x - mean) * (x - mean);
            s.ann_vol = std::sqrt(252.0 * ss / static_cast<double>(s.days - 1));
        } else {
            s.ann_vol = 0.0;
            s.vol_defined = false;
        }
        double peak = p.wealth.front();
        for (double w : p.wealth) {
            peak = std::max(peak, w);
            s.max_drawdown = std::max(s.max_drawdown, (peak - w) / peak);
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_wealth_csv(std::ostream& out, const BacktestResult& r) {
    out << "date,model,wealth\n";
    std::ostringstream line;
    line << std::setprecision(17);
    for (const ModelPath& p : r.paths) {
        for (std::size_t i = 0; i < r.dates.size(); ++i) {
            line.str("");
            line << r.dates[i] << ',' << to_string(p.model) << ',' << p.wealth[i + 1] << '\n';
            out << line.str();
        }
    }
}

void write_summary_json(std::ostream& out, const std::vector<ModelSummary>& s) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const ModelSummary& m : s) {
        arr.push_back({{"model", m.model},
                       {"final_wealth", m.final_wealth},
                       {"ann_return", m.ann_return},
                       {"ann_vol", m.ann_vol},
                       {"max_drawdown", m.max_drawdown},
                       {"days", m.days},
                       {"vol_defined", m.vol_defined}});
    }
    out << arr.dump(2) << '\n';
}

}  // namespace wctsv
