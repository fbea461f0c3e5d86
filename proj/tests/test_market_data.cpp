#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "wctsv/error.hpp"
#include "wctsv/market_data.hpp"

using namespace wctsv;

namespace {

PricePanel parse(const std::string& text) {
    std::istringstream in(text);
    return parse_price_panel(in);
}

ErrorKind kind_of(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

LossPanel panel_from(const Eigen::MatrixXd& losses) {
    LossPanel l;
    l.losses = losses;
    for (Eigen::Index i = 0; i < losses.cols(); ++i) l.tickers.push_back("A" + std::to_string(i));
    for (Eigen::Index i = 0; i < losses.rows(); ++i) l.dates.push_back("d" + std::to_string(i));
    return l;
}

PricePanel random_prices(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0, 0.02);
    PricePanel p;
    p.close.resize(rows, cols);
    for (int j = 0; j < cols; ++j) {
        p.tickers.push_back("T" + std::to_string(j));
        double v = 50 + 10 * j;
        for (int i = 0; i < rows; ++i) {
            p.close(i, j) = v;
            v *= std::exp(N(rng));
        }
    }
    for (int i = 0; i < rows; ++i) p.dates.push_back(std::to_string(2000 + i) + "-01-01");
    return p;
}

}  // namespace

TEST_CASE("loader examples") {
    const auto p = parse("date,A\n2020-01-02,100\n2020-01-03,110\n");
    REQUIRE(p.close.rows() == 2);
    CHECK(p.close(0, 0) == 100.0);
    CHECK(p.close(1, 0) == 110.0);
    CHECK(p.dates[1] == "2020-01-03");

    CHECK(kind_of("date,A\n2020-01-03,100\n2020-01-02,110\n") == ErrorKind::UnsortedDates);
    CHECK(kind_of("date,A\n2020-01-02,100\n2020-01-02,110\n") == ErrorKind::UnsortedDates);
    CHECK(kind_of("date,A\n2020-01-02,100\n2020-01-03,0\n") == ErrorKind::NonPositivePrice);
    CHECK(kind_of("date,A\n2020-01-02,-5\n") == ErrorKind::NonPositivePrice);
}

TEST_CASE("loader rejects malformed rows with line numbers") {
    CHECK(kind_of("") == ErrorKind::ParseError);
    CHECK(kind_of("day,A\n") == ErrorKind::ParseError);
    CHECK(kind_of("date,A,B\n2020-01-02,1\n") == ErrorKind::ParseError);
    CHECK(kind_of("date,A,B\n2020-01-02,1,\n") == ErrorKind::ParseError);
    CHECK(kind_of("date,A\n2020-13-02,1\n") == ErrorKind::ParseError);
    CHECK(kind_of("date,A\n2020-01-02,1.2.3\n") == ErrorKind::ParseError);
    CHECK(kind_of("date,A\n2020-01-02,nan\n") == ErrorKind::ParseError);
    try {
        parse("date,A\n2020-01-02,1\n\n2020-01-03,abc\n");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("loader details") {
    // BOM, CRLF, duplicate ticker keeps the first column.
    const auto p = parse("\xEF\xBB\xBF" "date,A,B,A\r\n2020-01-02,1,2,3\r\n2020-01-03,4,5,6\r\n");
    REQUIRE(p.tickers == std::vector<std::string>{"A", "B"});
    CHECK(p.close(1, 0) == 4.0);
    CHECK(p.close(1, 1) == 5.0);

    try {
        load_price_panel("/nonexistent/prices.csv");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IoError);
    }
}

TEST_CASE("loss examples") {
    auto l = compute_losses(parse("date,A,B,C\n2020-01-02,100,100,7\n2020-01-03,110,90,7\n"));
    REQUIRE(l.losses.rows() == 1);
    CHECK(l.losses(0, 0) == doctest::Approx(-0.10).epsilon(1e-15));
    CHECK(l.losses(0, 1) == doctest::Approx(0.10).epsilon(1e-15));
    CHECK(l.losses(0, 2) == 0.0);
    CHECK(l.dates == std::vector<std::string>{"2020-01-03"});

    try {
        compute_losses(parse("date,A\n2020-01-02,100\n"));
        FAIL("expected TooFewRows");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewRows);
    }
}

TEST_CASE("losses back-compound to the final price") {
    const auto p = random_prices(500, 4, 3);
    const auto l = compute_losses(p);
    for (int j = 0; j < 4; ++j) {
        double v = p.close(0, j);
        for (Eigen::Index i = 0; i < l.losses.rows(); ++i) {
            CHECK(l.losses(i, j) == -(p.close(i + 1, j) - p.close(i, j)) / p.close(i, j));
            v *= 1 - l.losses(i, j);
        }
        CHECK(std::abs(v - p.close(499, j)) <= 1e-12 * p.close(499, j));
    }
}

TEST_CASE("two-sample moments") {
    Eigen::MatrixXd x(3, 2);
    x << 9, 9, 0.01, -0.02, 0.03, 0.05;
    // Two rows give a rank-one covariance; the ridge only touches the diagonal.
    const double ridge = 1e-3;
    const auto m = estimate_moments(panel_from(x), 2, 2, ridge);
    CHECK(m.mu[0] == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(m.mu[1] == doctest::Approx(0.015).epsilon(1e-14));
    CHECK(m.cov(0, 0) - ridge == doctest::Approx(0.02 * 0.02 / 2).epsilon(1e-10));
    CHECK(m.cov(1, 1) - ridge == doctest::Approx(0.07 * 0.07 / 2).epsilon(1e-10));
    CHECK(m.cov(0, 1) == doctest::Approx(0.02 * 0.07 / 2).epsilon(1e-12));
}

TEST_CASE("ridge and rank deficiency") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0.001, 0.01);
    Eigen::MatrixXd x(30, 3);
    for (int i = 0; i < 30; ++i) {
        x(i, 0) = N(rng);
        x(i, 1) = x(i, 0);
        x(i, 2) = N(rng);
    }
    const auto l = panel_from(x);
    try {
        estimate_moments(l, 30, 29, 0.0);
        FAIL("expected NotPositiveDefinite");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
    }
    const auto m = estimate_moments(l, 30, 29, 1e-6);
    CHECK(m.cov.llt().info() == Eigen::Success);
    // Auto ridge also makes the identical columns usable.
    CHECK_NOTHROW(estimate_moments(l, 30, 29));
}

TEST_CASE("moment argument errors") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
    const auto l = panel_from(x);
    auto kind = [&](int window, int end, double ridge) {
        try {
            estimate_moments(l, window, end, ridge);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::IoError;
    };
    CHECK(kind(11, 9, 0) == ErrorKind::WindowTooLarge);
    CHECK(kind(5, 3, 0) == ErrorKind::WindowTooLarge);
    CHECK(kind(1, 9, 0) == ErrorKind::InvalidArgument);
    CHECK(kind(5, 10, 0) == ErrorKind::InvalidArgument);
    CHECK(kind(5, 9, -1) == ErrorKind::InvalidArgument);

    // Both columns average 0.2.
    Eigen::MatrixXd equal_means(6, 2);
    equal_means << 0.1, 0.3, 0.2, 0.1, 0.4, 0.2, 0.3, 0.3, 0.1, 0.0, 0.1, 0.3;
    try {
        estimate_moments(panel_from(equal_means), 6, 5, 0.0);
        FAIL("expected DegenerateMeans");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateMeans);
    }
}

TEST_CASE("shifted windows match running sums") {
    const auto l = compute_losses(random_prices(300, 5, 8));
    const int window = 60;
    Eigen::VectorXd s = l.losses.topRows(window).colwise().sum().transpose();
    Eigen::MatrixXd ss = l.losses.topRows(window).transpose() * l.losses.topRows(window);
    for (int end = window - 1; end < l.losses.rows(); ++end) {
        if (end >= window) {
            const Eigen::VectorXd in = l.losses.row(end).transpose();
            const Eigen::VectorXd out = l.losses.row(end - window).transpose();
            s += in - out;
            ss += in * in.transpose() - out * out.transpose();
        }
        const auto m = estimate_moments(l, window, end, 0.0);
        const Eigen::VectorXd mean = s / window;
        const Eigen::MatrixXd cov = (ss - window * mean * mean.transpose()) / (window - 1);
        CHECK((m.mu - mean).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((m.cov - cov).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(m.cov == m.cov.transpose());
    }
}
