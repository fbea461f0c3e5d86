#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "wctsv/backtest.hpp"
#include "wctsv/cli.hpp"
#include "wctsv/frontier.hpp"
#include "wctsv/market_data.hpp"
#include "wctsv/worst_case.hpp"

using namespace wctsv;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = cli::run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string data(const std::string& name) { return std::string(WCTSV_SOURCE_DIR) + "/data/" + name; }

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "wctsv_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("wc examples") {
    auto r = run({"wc", "--mu", "0", "--sigma", "1", "--t", "0.5", "--family", "symmetric", "--measure", "tsv"});
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == 0.5);

    r = run({"wc", "--mu", "0", "--sigma", "1", "--t", "1", "--lambda", "1", "--family", "arbitrary", "--measure", "tsv"});
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == 0.0);

    r = run({"wc", "--mu", "0", "--sigma", "1", "--t", "1", "--lambda", "0.5", "--family", "arbitrary", "--measure", "tsv"});
    CHECK(r.code == 1);
    CHECK(r.err.find("empty uncertainty set") != std::string::npos);

    r = run({"wc", "--mu", "0", "--sigma", "1", "--t", "1", "--family", "symmetric", "--measure", "regret"});
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == 0.125);
}

TEST_CASE("printed values equal library values bit for bit") {
    const double v = wc_target_semivariance_constrained({0.3, 2.5}, -0.1, RegretBudget::at_most(0.9),
                                                        DistributionFamily::Symmetric)
                         .value;
    auto r = run({"wc", "--mu", "0.3", "--sigma", "2.5", "--t", "-0.1", "--lambda", "0.9", "--family", "symmetric"});
    REQUIRE(r.code == 0);
    CHECK(std::stod(r.out) == v);

    r = run({"wc", "--mu", "0.3", "--sigma", "2.5", "--t", "-0.1", "--lambda", "0.9", "--family", "symmetric", "--json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("value").get<double>() == v);
    CHECK(j.at("regime").is_string());
    CHECK(j.at("inputs").at("lambda").get<double>() == 0.9);
    CHECK(j.at("inputs").at("family") == "symmetric");
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"nope"}).code == 2);
    CHECK(run({"wc", "--mu", "0"}).code == 2);
    CHECK(run({"wc", "--mu", "0", "--sigma", "0", "--t", "0"}).code == 2);
    CHECK(run({"wc", "--mu", "0", "--sigma", "1", "--t", "0", "--family", "weird"}).code == 2);
    CHECK(run({"wc", "--mu", "0", "--sigma", "1", "--t", "0", "--measure", "regret", "--lambda", "1"}).code == 2);
    CHECK(run({"verify", "--budget", "0"}).code == 2);
    CHECK(run({"verify", "--grid-spec", "mu=0;sigma=1"}).code == 2);
    CHECK(run({"optimize", "--prices", "/nonexistent/prices.csv", "--model", "MV"}).code == 2);
    CHECK(run({"backtest", "--prices", "/nonexistent/prices.csv", "--out", scratch("none").string()}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("grid spec") {
    const auto g = cli::parse_grid_spec(cli::default_grid_spec());
    CHECK(g.size() >= 200);
    for (const auto& x : g) {
        CHECK(x.profile.mu >= -2);
        CHECK(x.profile.mu <= 2);
        CHECK(x.profile.sigma >= 0.2);
        CHECK(x.profile.sigma <= 3);
        CHECK(x.t >= x.profile.mu - 2 * x.profile.sigma - 1e-12);
        CHECK(x.t <= x.profile.mu + 2 * x.profile.sigma + 1e-12);
        CHECK(std::isinf(x.lambda));
    }
    const auto c = cli::parse_grid_spec("mu=1;sigma=2;t=0:1:3;lz=0.5");
    REQUIRE(c.size() == 3);
    CHECK(c[0].lambda == 1.0);
    CHECK(c[2].lambda == 1.0);
    CHECK(c[1].t == 0.5);
    CHECK_THROWS(cli::parse_grid_spec("mu=0;sigma=1;t=0;tz=0"));
    CHECK_THROWS(cli::parse_grid_spec("mu=0;sigma=1;t=0;lambda=0"));
    CHECK_THROWS(cli::parse_grid_spec("mu=0:1;sigma=1;t=0"));
}

TEST_CASE("verify passes and catches a corrupted closed form") {
    const auto csv = scratch("verify.csv");
    auto r = run({"verify", "--budget", "20000", "--out", csv.string()});
    CHECK(r.code == 0);
    CHECK(count_lines(csv) == 1 + cli::parse_grid_spec(cli::default_grid_spec()).size());

    const auto bad = scratch("verify_bad.csv");
    r = run({"verify", "--budget", "20000", "--grid-spec", "mu=0;sigma=1;tz=-1:1:3", "--corrupt-closed-form", "0.9",
             "--out", bad.string()});
    CHECK(r.code == 1);
    CHECK(count_lines(bad) == 4);
    std::ifstream in(bad);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("violation") != std::string::npos);
}

TEST_CASE("optimize matches the frontier example") {
    auto r = run({"optimize", "--market", data("toy_market.json"), "--model", "MV", "--nu", "0.3"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("weights").at("A").get<double>() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(j.at("weights").at("B").get<double>() == doctest::Approx(0.3).epsilon(1e-12));

    // Same problem scaled by 1/100 and written as prices: the weights do not change.
    const double a = std::sqrt(0.75), c = 0.01;
    const double losses[4][2] = {{a * c, c + a * c}, {a * c, c - a * c}, {-a * c, c + a * c}, {-a * c, c - a * c}};
    const auto csv = scratch("toy_prices.csv");
    {
        std::ofstream f(csv);
        f << std::setprecision(17) << "date,A,B\n";
        double va = 100, vb = 100;
        f << "2020-01-01," << va << ',' << vb << '\n';
        for (int i = 0; i < 4; ++i) {
            va *= 1 - losses[i][0];
            vb *= 1 - losses[i][1];
            f << "2020-01-0" << i + 2 << ',' << va << ',' << vb << '\n';
        }
    }
    r = run({"optimize", "--prices", csv.string(), "--model", "mv", "--nu", "0.003", "--ridge", "0"});
    REQUIRE(r.code == 0);
    j = nlohmann::json::parse(r.out);
    CHECK(j.at("weights").at("A").get<double>() == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(j.at("weights").at("B").get<double>() == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("optimize reports domain errors with exit 1") {
    // Every asset's mean loss is below t - lambda.
    auto r = run({"optimize", "--market", data("toy_market.json"), "--model", "EEP_TSV", "--t", "2", "--lambda", "1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("InfeasibleBudget") != std::string::npos);
    CHECK(r.err.find("hint:") != std::string::npos);

    const auto singular = scratch("singular.json");
    std::ofstream(singular) << R"({"mu": [0, 1], "cov": [[1, 1], [1, 1]]})";
    r = run({"frontier", "--market", singular.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("NotPositiveDefinite") != std::string::npos);
}

TEST_CASE("frontier output") {
    const auto r = run({"frontier", "--market", data("toy_market.json"), "--xi", "0.3"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("u").get<double>() == doctest::Approx(1.0));
    CHECK(j.at("v0").get<double>() == doctest::Approx(2.0));
    CHECK(j.at("portfolio").at("objective").get<double>() == doctest::Approx(0.58));
}

TEST_CASE("seed environment variable overrides the flag") {
    setenv("WCTSV_SEED", "77", 1);
    auto r = run({"optimize", "--market", data("toy_market.json"), "--model", "EEP_TSV_S", "--t", "-0.4", "--lambda",
                  "1", "--seed", "5"});
    unsetenv("WCTSV_SEED");
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out).at("inputs").at("seed") == 77);

    r = run({"optimize", "--market", data("toy_market.json"), "--model", "EEP_TSV_S", "--t", "-0.4", "--lambda", "1",
             "--seed", "5"});
    CHECK(nlohmann::json::parse(r.out).at("inputs").at("seed") == 5);
}

TEST_CASE("backtest on the bundled sample") {
    const auto dir = scratch("bt");
    fs::remove_all(dir);
    const auto r = run({"backtest", "--prices", data("sample_prices.csv"), "--config", data("backtest_default.conf"),
                        "--out", dir.string()});
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(dir / "wealth.csv"));
    REQUIRE(fs::exists(dir / "summary.json"));

    const auto l = compute_losses(load_price_panel(data("sample_prices.csv")));
    const std::size_t days = static_cast<std::size_t>(l.losses.rows()) - 252;
    CHECK(count_lines(dir / "wealth.csv") == 1 + 5 * days);

    std::ifstream in(dir / "summary.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j.size() == 5);
}
