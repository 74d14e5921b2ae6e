#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "cli.hpp"
#include "json.hpp"
#include "cover/pricing.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cover::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cover_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

bool flat(const json& j) {
    for (const auto& [k, v] : j.items())
        if (v.is_structured()) return false;
    return true;
}

}  // namespace

TEST_CASE("price emits a flat JSON quote") {
    const Run r = call({"price", "--mode", "levered", "--sigma", "0.2", "--r", "0.03", "--s0", "100", "--s", "105", "--t", "0.5", "--T", "1"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(flat(j));
    const cover::Market m(cover::MarketSpec::single(0.03, 0.2, 0.03, 100.0));
    CHECK(j["price"].get<double>() == cover::price_levered(m, cover::Vector::Constant(1, 105.0), 0.5, 1.0).price);
    CHECK(j["universality_factor"].get<double>() == doctest::Approx(std::sqrt(2.0)));

    const Run u = call({"price", "--mode", "unlevered", "--sigma", "0.2", "--r", "0.03", "--s0", "100", "--s", "105", "--t", "0.5", "--T", "1"});
    REQUIRE(u.code == 0);
    CHECK(json::parse(u.out)["price"].get<double>() < j["price"].get<double>());

    const Run multi = call({"price", "--sigma", "0.2,0.3", "--corr", "1,0.4;0.4,1", "--s", "1.1,0.9", "--t", "1", "--T", "3"});
    REQUIRE(multi.code == 0);
    CHECK(json::parse(multi.out)["universality_factor"].get<double>() == doctest::Approx(3.0));
}

TEST_CASE("iv") {
    SUBCASE("round trip") {
        const Run r = call({"iv", "--price", "1.5", "--s", "105", "--s0", "100", "--t", "0.5", "--T", "1", "--r", "0.03"});
        REQUIRE(r.code == 0);
        const json j = json::parse(r.out);
        REQUIRE(j["n_roots"].get<int>() == 2);
        for (const char* k : {"sigma_1", "sigma_2"}) {
            const cover::Market m(cover::MarketSpec::single(0.03, j[k].get<double>(), 0.03, 100.0));
            CHECK(cover::price_levered(m, cover::Vector::Constant(1, 105.0), 0.5, 1.0).price == doctest::Approx(1.5).epsilon(1e-9));
        }
    }
    SUBCASE("below the minimum rational price") {
        const Run r = call({"iv", "--price", "1.2", "--s", "105", "--s0", "100", "--t", "0.5", "--T", "1", "--r", "0.03"});
        CHECK(r.code == 3);
        CHECK(r.err.find("sqrt(T/t) e^{rt}") != std::string::npos);
        CHECK(r.out.empty());
    }
}

TEST_CASE("greeks") {
    const Run r = call({"greeks", "--sigma", "0.3", "--r", "0.02", "--s", "1.2", "--t", "1", "--T", "2"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["delta"].get<double>() * 1.2 / j["price"].get<double>() == doctest::Approx(j["b"].get<double>()));
    CHECK(call({"greeks", "--sigma", "0.3,0.2", "--t", "1", "--T", "2"}).code == 3);
}

TEST_CASE("exit codes") {
    CHECK(call({}).code == 2);
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"price", "--bogus"}).code == 2);
    CHECK(call({"price", "--sigma", "abc", "--t", "1", "--T", "2"}).code == 2);
    CHECK(call({"price", "--sigma", "0.2", "--t", "0", "--T", "2"}).code == 3);
    CHECK(call({"price", "--sigma", "0.2", "--t", "3", "--T", "2"}).code == 3);
    CHECK(call({"price", "--sigma", "-0.2", "--t", "1", "--T", "2"}).code == 3);
    CHECK(call({"price", "--sigma", "0.2", "--t", "1", "--T", "2", "--mode", "margin"}).code == 2);
    CHECK(call({"backtest", "--prices", "/nonexistent/p.csv"}).code == 4);
    CHECK(call({"price", "--config", "/nonexistent/m.cfg", "--t", "1", "--T", "2"}).code == 4);
    CHECK(call({"simulate", "sim4"}).code == 2);
    CHECK(call({"lattice"}).code == 2);
}

TEST_CASE("config file with flag overrides") {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "m.cfg");
        f << "n = 1\nsigma = 0.3\nrate = 0.05\ns0 = 2\n";
    }
    const Run from_file = call({"price", "--config", (dir / "m.cfg").string(), "--s", "2.2", "--t", "1", "--T", "2"});
    const Run overridden = call({"price", "--config", (dir / "m.cfg").string(), "--sigma", "0.2", "--s", "2.2", "--t", "1", "--T", "2"});
    REQUIRE(from_file.code == 0);
    REQUIRE(overridden.code == 0);
    const cover::Vector s = cover::Vector::Constant(1, 2.2);
    CHECK(json::parse(from_file.out)["price"].get<double>() ==
          cover::price_levered(cover::Market(cover::MarketSpec::single(0.05, 0.3, 0.05, 2.0)), s, 1.0, 2.0).price);
    CHECK(json::parse(overridden.out)["price"].get<double>() ==
          cover::price_levered(cover::Market(cover::MarketSpec::single(0.05, 0.2, 0.05, 2.0)), s, 1.0, 2.0).price);
    fs::remove_all(dir);
}

TEST_CASE("manifests replay to identical artifacts") {
    const fs::path first = scratch("first"), second = scratch("second"), cfg = scratch("cfg");
    fs::create_directories(cfg);
    {
        std::ofstream f(cfg / "m.cfg");
        f << "n = 2\nsigma = 0.3 0.2\ncorr = 1 0.1\ncorr = 0.1 1\nrate = 0.01\n";
    }
    const std::vector<std::vector<std::string>> runs = {
        {"simulate", "sim1", "--T", "20", "--paths", "3", "--seed", "5"},
        {"hedge", "--config", (cfg / "m.cfg").string(), "--t0", "1", "--T", "2", "--steps", "200", "--seed", "9"},
        {"lattice", "demon", "--N", "60", "--seed", "4"},
        {"verify", "--n", "2", "--states", "2", "--paths", "2000", "--seed", "3"},
    };
    for (const auto& base : runs) {
        fs::remove_all(first);
        fs::remove_all(second);
        auto args = base;
        args.push_back("--out");
        args.push_back(first.string());
        const Run a = call(args);
        REQUIRE(a.code == 0);
        const json manifest = json::parse(slurp(first / "manifest.json"));
        CHECK(flat(manifest["params"]));
        CHECK(manifest["version"].is_string());
        CHECK(!manifest["params"].contains("config"));
        const Run b = call({"replay", "--manifest", (first / "manifest.json").string(), "--out", second.string()});
        REQUIRE(b.code == 0);
        for (const auto& name : manifest["outputs"]) CHECK(slurp(first / name.get<std::string>()) == slurp(second / name.get<std::string>()));
        CHECK(slurp(first / "manifest.json") == slurp(second / "manifest.json"));
    }
    fs::remove_all(first);
    fs::remove_all(second);
    fs::remove_all(cfg);
}

TEST_CASE("verify table agrees within four standard errors") {
    const Run r = call({"verify", "--n", "2", "--states", "4", "--paths", "100000", "--seed", "7"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "state,n,mode,t,T,closed,mc,std_error,z,estimator,within_4se");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.back() == '1');
    }
    CHECK(rows == 4);
}

TEST_CASE("figure tables") {
    const Run payoff = call({"payoff", "--sigmas", "0.2,0.4", "--points", "11"});
    REQUIRE(payoff.code == 0);
    CHECK(payoff.out.rfind("sigma,s,b,payoff\n", 0) == 0);
    CHECK(std::count(payoff.out.begin(), payoff.out.end(), '\n') == 23);

    const Run regret = call({"regret", "--sigmas", "0.7", "--T-min", "5", "--T-max", "6", "--points", "2"});
    REQUIRE(regret.code == 0);
    CHECK(regret.out.find("0.7,5,") != std::string::npos);

    const Run demon = call({"lattice", "demon", "--N", "10", "--seed", "2"});
    REQUIRE(demon.code == 0);
    CHECK(demon.out.rfind("step,upticks,stock,wealth\n0,0,1,1\n", 0) == 0);

    const Run lp = call({"lattice", "price", "--N", "1", "--mode", "levered"});
    REQUIRE(lp.code == 0);
    CHECK(json::parse(lp.out)["price"].get<double>() == doctest::Approx(2.0));

    const Run curve = call({"vol-curve", "--points", "5"});
    REQUIRE(curve.code == 0);
    CHECK(curve.out.rfind("sigma,price,z\n", 0) == 0);

    const fs::path dir = scratch("plot");
    const Run plotted = call({"payoff", "--sigmas", "0.2", "--points", "3", "--plot", "gnuplot", "--out", dir.string()});
    REQUIRE(plotted.code == 0);
    CHECK(slurp(dir / "plot.gp").find("'payoff.csv'") != std::string::npos);
    CHECK(call({"payoff", "--plot", "matplotlib"}).code == 2);
}

TEST_CASE("backtest from CSV") {
    const fs::path dir = scratch("backtest");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "p.csv");
        f << "date,x\n2000-01-01,100\n2001-01-01,200\n2002-01-01,100\n";
    }
    const Run r = call({"backtest", "--prices", (dir / "p.csv").string(), "--b", "0.5"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["final_wealth"].get<double>() == doctest::Approx(1.125));
    {
        std::ofstream f(dir / "bad.csv");
        f << "date,x\n2000-01-01,100\n2001-01-01,oops\n";
    }
    const Run bad = call({"backtest", "--prices", (dir / "bad.csv").string()});
    CHECK(bad.code == 4);
    CHECK(bad.err.find("line 3, column 12") != std::string::npos);
    fs::remove_all(dir);
}
