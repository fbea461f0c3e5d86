#include "wctsv/market_data.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "wctsv/error.hpp"

namespace wctsv {

namespace {

std::string at_line(std::size_t line, const std::string& msg) {
    return "line " + std::to_string(line) + ": " + msg;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

}  // namespace

PricePanel parse_price_panel(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, at_line(1, "missing header"));
    ++lineno;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split_csv(trim(line));
    if (header.size() < 2 || trim(header[0]) != "date") {
        throw Error(ErrorKind::ParseError, at_line(lineno, "header must be date,<TICKER>,..."));
    }
    PricePanel panel;
    std::vector<int> keep;  // column index per kept ticker
    std::unordered_set<std::string> seen;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (name.empty()) throw Error(ErrorKind::ParseError, at_line(lineno, "empty ticker name"));
        if (!seen.insert(name).second) continue;
        panel.tickers.push_back(name);
        keep.push_back(static_cast<int>(c));
    }

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string row = trim(line);
        if (row.empty()) continue;
        const auto cells = split_csv(row);
        if (cells.size() != header.size()) {
            throw Error(ErrorKind::ParseError,
                        at_line(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                            std::to_string(cells.size())));
        }
        const std::string date = trim(cells[0]);
        if (!is_iso_date(date)) throw Error(ErrorKind::ParseError, at_line(lineno, "bad date '" + date + "'"));
        if (!panel.dates.empty() && !(panel.dates.back() < date)) {
            throw Error(ErrorKind::UnsortedDates,
                        at_line(lineno, "date " + date + " does not follow " + panel.dates.back()));
        }
        std::vector<double> values;
        values.reserve(keep.size());
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const std::string cell = trim(cells[keep[k]]);
            double v = 0.0;
            if (!parse_double(cell, v) || !std::isfinite(v)) {
                throw Error(ErrorKind::ParseError,
                            at_line(lineno, "missing or malformed price for " + panel.tickers[k]));
            }
            if (!(v > 0.0)) {
                throw Error(ErrorKind::NonPositivePrice,
                            at_line(lineno, "non-positive price for " + panel.tickers[k]));
            }
            values.push_back(v);
        }
        panel.dates.push_back(date);
        rows.push_back(std::move(values));
    }

    panel.close.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < keep.size(); ++c) panel.close(r, c) = rows[r][c];
    }
    return panel;
}

PricePanel load_price_panel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open price file '" + path + "'");
    return parse_price_panel(in);
}

LossPanel compute_losses(const PricePanel& p) {
    const Eigen::Index n = p.close.rows();
    if (n < 2) throw Error(ErrorKind::TooFewRows, "at least two price rows are needed");
    LossPanel l;
    l.tickers = p.tickers;
    l.dates.assign(p.dates.begin() + 1, p.dates.end());
    const auto& v = p.close;
    l.losses = -((v.bottomRows(n - 1) - v.topRows(n - 1)).array() / v.topRows(n - 1).array()).matrix();
    return l;
}

double auto_ridge(const Eigen::MatrixXd& cov) {
    return 1e-8 * cov.trace() / static_cast<double>(cov.rows());
}

namespace {

MarketModel sample_moments(const LossPanel& l, int window, int end_index) {
    if (window < 2) throw Error(ErrorKind::InvalidArgument, "window must be >= 2");
    const int n = static_cast<int>(l.losses.rows());
    if (end_index < 0 || end_index >= n) {
        throw Error(ErrorKind::InvalidArgument, "end_index outside the loss panel");
    }
    if (window > end_index + 1) {
        throw Error(ErrorKind::WindowTooLarge, "window of " + std::to_string(window) +
                                                   " rows exceeds the " + std::to_string(end_index + 1) +
                                                   " rows available");
    }
    // A private copy keeps SIMD alignment, and so rounding, independent of
    // how many rows surround the window.
    const Eigen::MatrixXd block = l.losses.middleRows(end_index - window + 1, window);
    MarketModel m;
    m.assets = l.tickers;
    m.mu = block.colwise().mean().transpose();
    const Eigen::MatrixXd centered = block.rowwise() - m.mu.transpose();
    m.cov = (centered.transpose() * centered) / static_cast<double>(window - 1);
    m.cov = 0.5 * (m.cov + m.cov.transpose());
    return m;
}

MarketModel finish(MarketModel m, double ridge) {
    if (!(ridge >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ridge must be >= 0");
    m.cov.diagonal().array() += ridge;
    frontier_params(m);  // positive definiteness and non-degenerate means
    return m;
}

}  // namespace

MarketModel estimate_moments(const LossPanel& l, int window, int end_index, double ridge) {
    return finish(sample_moments(l, window, end_index), ridge);
}

MarketModel estimate_moments(const LossPanel& l, int window, int end_index) {
    MarketModel m = sample_moments(l, window, end_index);
    const double ridge = auto_ridge(m.cov);
    return finish(std::move(m), ridge);
}

}  // namespace wctsv
