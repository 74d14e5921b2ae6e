#include "cli.hpp"

#include <charconv>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "cover/errors.hpp"
#include "cover/io.hpp"
#include "cover/lattice.hpp"
#include "cover/mc_oracle.hpp"
#include "cover/pricing.hpp"
#include "cover/replication.hpp"

namespace cover::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Artifact {
    std::string name;
    std::string content;
};

struct Command;
using Handler = std::function<std::vector<Artifact>(Command&)>;

// Every option is captured as text so the resolved set can be written to the
// manifest and fed back verbatim on replay.
struct Command {
    std::string path;  // e.g. "lattice demon"
    CLI::App* app = nullptr;
    std::map<std::string, std::string> values;
    std::string out_dir;
    Handler handler;

    void option(const std::string& name, const std::string& fallback, const std::string& help) {
        values[name] = fallback;
        app->add_option("--" + name, values[name], help)->capture_default_str();
    }

    bool has(const std::string& name) const {
        const auto it = values.find(name);
        return it != values.end() && !it->second.empty();
    }

    const std::string& text(const std::string& name) const { return values.at(name); }

    double number(const std::string& name) const { return parse_number(name, text(name)); }

    long integer(const std::string& name) const {
        const std::string& s = text(name);
        long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("--" + name + " expects an integer, got '" + s + "'");
        return v;
    }

    std::size_t count(const std::string& name) const {
        const long v = integer(name);
        if (v < 0) throw std::invalid_argument("--" + name + " must be non-negative");
        return static_cast<std::size_t>(v);
    }

    std::uint64_t seed() const {
        const std::string& s = text("seed");
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("--seed expects an unsigned integer, got '" + s + "'");
        return v;
    }

    std::vector<double> list(const std::string& name) const {
        std::vector<double> out;
        std::stringstream ss(text(name));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_number(name, item));
        if (out.empty()) throw std::invalid_argument("--" + name + " expects a comma-separated list of numbers");
        return out;
    }

    static double parse_number(const std::string& name, std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        double v = 0.0;
        const char* begin = s.data() + (!s.empty() && s[0] == '+');
        const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
            throw std::invalid_argument("--" + name + " expects a number, got '" + s + "'");
        return v;
    }
};

std::string join(const Vector& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::string join_rows(const Matrix& m) {
    std::string s;
    for (Eigen::Index r = 0; r < m.rows(); ++r) s += (r ? ";" : "") + join(m.row(r).transpose());
    return s;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Market flags. Flags override the config file; the resolved market replaces
// both in the manifest.
void add_market_options(Command& c) {
    c.option("config", "", "market config file (n, mu, sigma, corr, rate, s0)");
    c.option("sigma", "", "volatilities, comma-separated");
    c.option("mu", "", "drifts, comma-separated (default: the rate)");
    c.option("corr", "", "correlation rows separated by ';' (default: identity)");
    c.option("r", "", "continuously compounded risk-free rate (default 0)");
    c.option("s0", "", "initial prices, comma-separated (default 1)");
}

MarketSpec resolve_market(Command& c) {
    MarketSpec spec;
    bool from_config = false;
    if (c.has("config")) {
        spec = read_market_config_file(c.text("config"));
        from_config = true;
    }
    if (c.has("sigma")) spec.sigma = to_vector(c.list("sigma"));
    if (spec.sigma.size() == 0) throw std::invalid_argument("market needs --sigma or --config");
    const Eigen::Index n = spec.sigma.size();
    if (c.has("r")) spec.rate = c.number("r");
    else if (!from_config) spec.rate = 0.0;
    if (c.has("mu")) spec.mu = to_vector(c.list("mu"));
    else if (spec.mu.size() != n) spec.mu = Vector::Constant(n, spec.rate);
    if (c.has("s0")) spec.s0 = to_vector(c.list("s0"));
    else if (spec.s0.size() != n) spec.s0 = Vector::Ones(n);
    if (c.has("corr")) {
        std::stringstream ss(c.text("corr"));
        std::string row;
        std::vector<std::vector<double>> rows;
        while (std::getline(ss, row, ';')) {
            Command tmp;
            tmp.values["corr"] = row;
            rows.push_back(tmp.list("corr"));
        }
        if (static_cast<Eigen::Index>(rows.size()) != n) throw std::invalid_argument("--corr needs one row per asset");
        spec.corr.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
                throw std::invalid_argument("--corr rows need one entry per asset");
            for (Eigen::Index j = 0; j < n; ++j) spec.corr(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    } else if (spec.corr.rows() != n) {
        spec.corr = Matrix::Identity(n, n);
    }
    if (spec.mu.size() != n || spec.s0.size() != n) throw std::invalid_argument("--mu and --s0 need one entry per --sigma entry");
    spec = validate_market(spec);

    c.values["config"] = "";
    c.values["sigma"] = join(spec.sigma);
    c.values["mu"] = join(spec.mu);
    c.values["corr"] = join_rows(spec.corr);
    c.values["r"] = format_double(spec.rate);
    c.values["s0"] = join(spec.s0);
    return spec;
}

void add_state_options(Command& c) {
    c.option("s", "", "current prices, comma-separated (default: s0)");
    c.option("t", "", "elapsed time in years");
    c.option("T", "", "expiry in years");
}

struct State {
    Vector s;
    double t = 0.0;
    double T = 0.0;
};

State resolve_state(Command& c, const MarketSpec& spec) {
    if (!c.has("t") || !c.has("T")) throw std::invalid_argument("--t and --T are required");
    State st;
    st.s = c.has("s") ? to_vector(c.list("s")) : spec.s0;
    if (st.s.size() != spec.size()) throw std::invalid_argument("--s needs one price per asset");
    st.t = c.number("t");
    st.T = c.number("T");
    c.values["s"] = join(st.s);
    return st;
}

Mode mode_of(const Command& c) { return parse_mode(c.text("mode")); }

void add_vector(json& j, const std::string& prefix, const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) j[prefix + "_" + std::to_string(i + 1)] = v[i];
}

// Generic gnuplot stub for a CSV artifact: column `y` against column `x`,
// one curve per distinct value of column `group` when given.
std::vector<Artifact> with_plot(Command& c, std::vector<Artifact> artifacts, int x, int y, int group, bool logscale) {
    if (!c.has("plot")) return artifacts;
    if (c.text("plot") != "gnuplot") throw std::invalid_argument("--plot supports only 'gnuplot'");
    const std::string& data = artifacts.front().name;
    std::ostringstream gp;
    gp << "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n";
    gp << "set output '" << data.substr(0, data.rfind('.')) << ".png'\n";
    if (logscale) gp << "set logscale y\n";
    if (group > 0)
        gp << "plot for [g in system(\"tail -n +2 " << data << " | cut -d, -f" << group << " | uniq\")] '" << data << "' using (strcol("
           << group << ") eq g ? $" << x << " : NaN):" << y << " with lines title g\n";
    else
        gp << "plot '" << data << "' using " << x << ':' << y << " with lines\n";
    artifacts.push_back({"plot.gp", gp.str()});
    return artifacts;
}

// ---- commands ---------------------------------------------------------------

std::vector<Artifact> cmd_price(Command& c) {
    const MarketSpec spec = resolve_market(c);
    const Market market(spec);
    const State st = resolve_state(c, spec);
    const Mode mode = mode_of(c);
    const Quote q = mode == Mode::levered ? price_levered(market, st.s, st.t, st.T) : price_unlevered(market, st.s, st.t, st.T);
    json j;
    j["mode"] = to_string(mode);
    j["n"] = spec.size();
    j["t"] = st.t;
    j["T"] = st.T;
    j["price"] = q.price;
    j["log_price"] = q.log_price;
    j["intrinsic"] = q.intrinsic;
    j["universality_factor"] = q.universality_factor;
    if (st.t < st.T && mode == Mode::levered) j["excess_growth_bound"] = excess_growth_bound(market, st.s, st.t, st.T);
    add_vector(j, "z", z_score(market, st.s, st.t).z);
    add_vector(j, "b", best_rule(market, st.s, st.t, mode).b);
    if (mode == Mode::levered && st.t < st.T) add_vector(j, "delta", multi_delta(market, st.s, st.t, st.T));
    return {{"quote.json", dump(j)}};
}

std::vector<Artifact> cmd_greeks(Command& c) {
    const MarketSpec spec = resolve_market(c);
    if (spec.size() != 1) throw DomainError("greeks are single-asset; use price for multi-asset deltas");
    const Market market(spec);
    const State st = resolve_state(c, spec);
    const GreeksReport g = greeks(market, st.s[0], st.t, st.T);
    json j;
    j["price"] = price_levered(market, st.s, st.t, st.T).price;
    j["delta"] = g.delta;
    j["gamma"] = g.gamma;
    j["theta"] = g.theta;
    j["vega"] = g.vega;
    j["rho"] = g.rho;
    j["b"] = best_rule(market, st.s, st.t, Mode::levered).b[0];
    return {{"greeks.json", dump(j)}};
}

std::vector<Artifact> cmd_iv(Command& c) {
    for (const char* k : {"price", "s", "t", "T"})
        if (!c.has(k)) throw std::invalid_argument(std::string("--") + k + " is required");
    const double observed = c.number("price"), s = c.number("s"), s0 = c.number("s0");
    const double t = c.number("t"), T = c.number("T"), r = c.number("r");
    const ImpliedVolRoots roots = implied_vols(observed, s, s0, t, T, r);
    if (roots.status == ImpliedVolStatus::below_minimum)
        throw DomainError("observed price " + format_double(observed) + " is below the minimum rational price sqrt(T/t) e^{rt} = " +
                          format_double(roots.minimum_price));
    if (roots.status == ImpliedVolStatus::no_real_root)
        throw DomainError("no volatility reproduces price " + format_double(observed) + " at this state");
    json j;
    j["observed"] = observed;
    j["minimum_price"] = roots.minimum_price;
    j["n_roots"] = roots.roots.size();
    for (std::size_t i = 0; i < roots.roots.size(); ++i) j["sigma_" + std::to_string(i + 1)] = roots.roots[i];
    return {{"iv.json", dump(j)}};
}

std::vector<Artifact> cmd_vol_curve(Command& c) {
    const double s = c.number("s"), s0 = c.number("s0"), t = c.number("t"), T = c.number("T"), r = c.number("r");
    const double lo = c.number("sigma-min"), hi = c.number("sigma-max");
    const std::size_t points = c.count("points");
    if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("need 0 < --sigma-min < --sigma-max and --points >= 2");
    std::ostringstream csv;
    csv << "sigma,price,z\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double sigma = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const Market m(MarketSpec::single(r, sigma, r, s0));
        const Vector sv = Vector::Constant(1, s);
        csv << format_double(sigma) << ',' << format_double(price_levered(m, sv, t, T).price) << ','
            << format_double(z_score(m, sv, t).z[0]) << '\n';
    }
    return with_plot(c, {{"vol_curve.csv", csv.str()}}, 1, 2, 0, false);
}

std::vector<Artifact> cmd_payoff(Command& c) {
    const std::vector<double> sigmas = c.list("sigmas");
    const double T = c.number("T"), s0 = c.number("s0"), r = c.number("r");
    const double lo = c.number("s-min"), hi = c.number("s-max");
    const std::size_t points = c.count("points");
    const Mode mode = mode_of(c);
    if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("need 0 < --s-min < --s-max and --points >= 2");
    const bool with_price = c.has("t");
    const double t = with_price ? c.number("t") : T;
    std::ostringstream csv;
    csv << "sigma,s,b,payoff" << (with_price ? ",price" : "") << '\n';
    for (double sigma : sigmas) {
        const Market m(MarketSpec::single(r, sigma, r, s0));
        for (std::size_t i = 0; i < points; ++i) {
            const double s = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
            const Vector sv = Vector::Constant(1, s);
            csv << format_double(sigma) << ',' << format_double(s) << ',' << format_double(best_rule(m, sv, T, mode).b[0]) << ','
                << format_double(intrinsic_value(m, sv, T, mode));
            if (with_price) {
                const double p = mode == Mode::levered ? price_levered(m, sv, t, T).price : price_unlevered(m, sv, t, T).price;
                csv << ',' << format_double(p);
            }
            csv << '\n';
        }
    }
    return with_plot(c, {{"payoff.csv", csv.str()}}, 2, 4, 1, false);
}

std::vector<Artifact> cmd_regret(Command& c) {
    const std::vector<double> sigmas = c.list("sigmas");
    const double lo = c.number("T-min"), hi = c.number("T-max");
    const std::size_t points = c.count("points");
    if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("need 0 < --T-min < --T-max and --points >= 2");
    std::ostringstream csv;
    csv << "sigma,T,time0_price,excess_growth\n";
    for (double sigma : sigmas)
        for (std::size_t i = 0; i < points; ++i) {
            const double T = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
            csv << format_double(sigma) << ',' << format_double(T) << ',' << format_double(price_time0_unlevered(sigma, T)) << ','
                << format_double(excess_growth_bound_time0_unlevered(sigma, T)) << '\n';
        }
    return with_plot(c, {{"regret.csv", csv.str()}}, 2, 4, 1, false);
}

void add_lattice_options(Command& c) {
    c.option("u", "2", "up factor");
    c.option("d", "0.5", "down factor");
    c.option("r-per", "0", "cash return per period");
    c.option("N", "10", "number of periods");
    c.option("sigma", "", "calibrate u, d, R by Cox-Ross-Rubinstein from this volatility");
    c.option("T", "1", "horizon in years for the calibration");
    c.option("r", "0", "annual rate for the calibration");
}

LatticeSpec resolve_lattice(Command& c) {
    LatticeSpec spec;
    spec.N = c.integer("N");
    if (c.has("sigma")) {
        spec = LatticeSpec::crr(c.number("sigma"), c.number("T"), c.number("r"), spec.N);
        c.values["u"] = format_double(spec.u);
        c.values["d"] = format_double(spec.d);
        c.values["r-per"] = format_double(spec.r_per);
        c.values["sigma"] = "";
    } else {
        spec.u = c.number("u");
        spec.d = c.number("d");
        spec.r_per = c.number("r-per");
    }
    return validate_lattice(spec);
}

std::vector<Artifact> cmd_lattice_price(Command& c) {
    const LatticeSpec spec = resolve_lattice(c);
    const Mode mode = mode_of(c);
    const LatticeState state{c.integer("k"), c.integer("n")};
    json j;
    j["mode"] = to_string(mode);
    j["u"] = spec.u;
    j["d"] = spec.d;
    j["R"] = spec.gross_rate();
    j["q"] = spec.q();
    j["N"] = spec.N;
    j["k"] = state.k;
    j["n"] = state.n;
    j["price"] = lattice_price(state, spec, mode);
    j["log_price"] = lattice_log_price(state, spec, mode);
    if (state.n < spec.N) {
        const double stock = std::pow(spec.u, static_cast<double>(state.k)) * std::pow(spec.d, static_cast<double>(state.n - state.k));
        j["stock"] = stock;
        j["delta"] = lattice_delta(state, stock, spec, mode);
        j["stock_fraction"] = lattice_delta(state, stock, spec, mode) * stock / lattice_price(state, spec, mode);
    }
    j["all_stock_threshold"] = lattice_all_stock_threshold(spec);
    if (state.n == 0 && mode == Mode::unlevered) j["time0_three_sum"] = lattice_price_time0_unlevered(spec);
    return {{"lattice_price.json", dump(j)}};
}

std::vector<Artifact> cmd_lattice_payoff(Command& c) {
    const LatticeSpec spec = resolve_lattice(c);
    std::ostringstream csv;
    csv << "j,stock,b,payoff_levered,payoff_unlevered\n";
    for (long j = 0; j <= spec.N; ++j) {
        const double stock = std::pow(spec.u, static_cast<double>(j)) * std::pow(spec.d, static_cast<double>(spec.N - j));
        csv << j << ',' << format_double(stock) << ',' << format_double(lattice_best_rule(j, spec)) << ','
            << format_double(lattice_payoff(j, spec, Mode::levered)) << ',' << format_double(lattice_payoff(j, spec, Mode::unlevered)) << '\n';
    }
    return {{"lattice_payoff.csv", csv.str()}};
}

std::vector<Artifact> cmd_lattice_demon(Command& c) {
    const long N = c.integer("N");
    const auto rows = demon_simulation(N, c.number("p"), c.seed(), mode_of(c));
    std::ostringstream csv;
    write_demon_csv(csv, rows);
    json j;
    j["N"] = N;
    j["p"] = c.number("p");
    j["seed"] = c.seed();
    j["upticks"] = rows.back().upticks;
    j["terminal_stock"] = rows.back().stock;
    j["terminal_wealth"] = rows.back().wealth;
    return with_plot(c, {{"demon.csv", csv.str()}, {"demon.json", dump(j)}}, 1, 4, 0, true);
}

std::vector<Artifact> cmd_simulate(Command& c) {
    const Scenario scenario = parse_scenario(c.text("scenario"));
    SimulationConfig config;
    if (scenario == Scenario::custom) {
        config.spec = resolve_market(c);
        config.scenario = Scenario::custom;
    } else {
        for (const char* k : {"config", "sigma", "mu", "corr", "r", "s0"})
            if (c.has(k)) throw std::invalid_argument(std::string("--") + k + " applies to the custom scenario only");
        config = SimulationConfig::paper(scenario);
    }
    config.T = c.number("T");
    config.warmup = c.number("warmup");
    config.steps_per_year = c.count("steps-per-year");
    config.n_paths = c.count("paths");
    config.seed = c.seed();
    const SimulationReport report = run_paper_simulation(config);

    json j;
    j["scenario"] = to_string(scenario);
    j["T"] = config.T;
    j["warmup"] = config.warmup;
    j["steps_per_year"] = config.steps_per_year;
    j["paths"] = config.n_paths;
    j["seed"] = config.seed;
    j["kelly_growth_rate"] = report.kelly.growth_rate;
    add_vector(j, "kelly_b", report.kelly.rule.b);
    j["mean_growth_rate"] = report.mean_growth_rate;
    j["mean_hedged_growth_rate"] = report.mean_hedged_growth_rate;
    j["mean_stock_growth_rate"] = report.mean_stock_growth_rate;
    j["path0_terminal_wealth"] = report.paths[0].terminal_wealth;
    j["path0_hedged_terminal_wealth"] = report.paths[0].hedged_terminal_wealth;
    add_vector(j, "path0_terminal_price", report.ledger.prices.row(report.ledger.prices.rows() - 1).transpose());

    std::ostringstream ledger;
    write_ledger_csv(ledger, report.ledger);
    std::ostringstream tracked;
    tracked << "time,tracked_wealth\n";
    for (std::size_t k = 0; k < report.tracked_wealth.size(); ++k)
        tracked << format_double(report.ledger.times[k]) << ',' << format_double(report.tracked_wealth[k]) << '\n';
    std::ostringstream paths;
    paths << "path,terminal_wealth,hedged_terminal_wealth,growth_rate,hedged_growth_rate,stock_growth_rate,max_exposure\n";
    for (std::size_t p = 0; p < report.paths.size(); ++p) {
        const PathSummary& s = report.paths[p];
        paths << p << ',' << format_double(s.terminal_wealth) << ',' << format_double(s.hedged_terminal_wealth) << ','
              << format_double(s.growth_rate) << ',' << format_double(s.hedged_growth_rate) << ',' << format_double(s.stock_growth_rate)
              << ',' << format_double(s.max_exposure) << '\n';
    }
    return {{"simulation.json", dump(j)}, {"ledger.csv", ledger.str()}, {"tracked.csv", tracked.str()}, {"paths.csv", paths.str()}};
}

std::vector<Artifact> cmd_hedge(Command& c) {
    const MarketSpec spec = resolve_market(c);
    const Market market(spec);
    const Mode mode = mode_of(c);
    const double t0 = c.number("t0"), T = c.number("T");
    const std::size_t steps = c.count("steps");
    if (steps < 1) throw std::invalid_argument("--steps must be at least 1");
    const std::string& measure_name = c.text("measure");
    Measure measure;
    if (measure_name == "physical") measure = Measure::physical;
    else if (measure_name == "risk-neutral") measure = Measure::risk_neutral;
    else throw std::invalid_argument("--measure must be physical or risk-neutral");

    const PricePath path = simulate_path(market, T, steps, measure, c.seed(), c.count("path"));
    const HedgeLedger ledger = hedge_path(market, path, t0, T, mode);
    auto price = [&](const Vector& s, double t) {
        return mode == Mode::levered ? price_levered(market, s, t, T).price : price_unlevered(market, s, t, T).price;
    };
    const double target = price(ledger.prices.row(ledger.prices.rows() - 1).transpose(), T) / price(ledger.prices.row(0).transpose(), t0);

    json j;
    j["mode"] = to_string(mode);
    j["t0"] = t0;
    j["T"] = T;
    j["rebalances"] = ledger.size() - 1;
    j["terminal_wealth"] = ledger.wealth.back();
    j["target"] = target;
    j["relative_error"] = ledger.wealth.back() / target - 1.0;
    j["self_financing_residual"] = self_financing_residual(ledger, spec.rate);
    std::ostringstream csv;
    write_ledger_csv(csv, ledger);
    return {{"hedge.json", dump(j)}, {"ledger.csv", csv.str()}};
}

std::vector<Artifact> cmd_backtest(Command& c) {
    if (!c.has("prices")) throw std::invalid_argument("--prices is required");
    const PriceTable table = read_price_table_file(c.text("prices"));
    const Eigen::Index n = static_cast<Eigen::Index>(table.assets.size());
    const Vector b = c.has("b") ? to_vector(c.list("b")) : Vector::Constant(n, 1.0 / static_cast<double>(n));
    c.values["b"] = join(b);
    const BacktestResult result = discrete_backtest(table, b, c.count("interval"), c.number("period-rate"));
    json j;
    j["assets"] = table.assets.size();
    add_vector(j, "b", b);
    j["rebalances"] = result.wealth.size() - 1;
    j["elapsed_years"] = result.elapsed_years;
    j["final_wealth"] = result.wealth.back();
    j["cagr"] = result.cagr;
    j["ruined"] = result.ruined;
    if (result.ruined) j["ruin_label"] = table.labels[result.ruin_index];
    std::ostringstream csv;
    write_backtest_csv(csv, result);
    return {{"backtest.json", dump(j)}, {"backtest.csv", csv.str()}};
}

std::vector<Artifact> cmd_verify(Command& c) {
    const auto n = static_cast<Eigen::Index>(c.count("n"));
    if (n < 1) throw std::invalid_argument("--n must be at least 1");
    const std::size_t states = c.count("states"), paths = c.count("paths");
    const std::uint64_t seed = c.seed();
    std::mt19937_64 gen(derive_stream_seed(seed, 0));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> normal;

    std::ostringstream csv;
    csv << "state,n,mode,t,T,closed,mc,std_error,z,estimator,within_4se\n";
    for (std::size_t i = 0; i < states; ++i) {
        MarketSpec spec;
        spec.sigma.resize(n);
        spec.mu = Vector::Zero(n);
        spec.s0 = Vector::Ones(n);
        for (Eigen::Index k = 0; k < n; ++k) spec.sigma[k] = 0.1 + 0.5 * u(gen);
        Matrix a(n, n + 2);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index k = 0; k < n + 2; ++k) a(r, k) = normal(gen);
        const Matrix cov = a * a.transpose();
        const Vector inv = cov.diagonal().cwiseSqrt().cwiseInverse();
        spec.corr = inv.asDiagonal() * cov * inv.asDiagonal();
        spec.corr = (0.5 * (spec.corr + spec.corr.transpose())).eval();
        spec.corr.diagonal().setOnes();
        spec.rate = 0.05 * u(gen);
        const Market market(spec);
        const double T = 1.0 + 4.0 * u(gen);
        const double t = T * (0.1 + 0.8 * u(gen));
        Vector s(n);
        for (Eigen::Index k = 0; k < n; ++k) s[k] = std::exp(0.4 * (2.0 * u(gen) - 1.0));

        std::vector<Mode> modes{Mode::levered};
        if (n == 1) modes.push_back(Mode::unlevered);
        for (Mode mode : modes) {
            const double closed = mode == Mode::levered ? price_levered(market, s, t, T).price : price_unlevered(market, s, t, T).price;
            const McEstimate e = mc_price(market, s, t, T, mode, paths, derive_stream_seed(seed, 1 + 2 * i + (mode == Mode::unlevered)));
            const double z = (e.mean - closed) / e.std_error;
            csv << i << ',' << n << ',' << to_string(mode) << ',' << format_double(t) << ',' << format_double(T) << ','
                << format_double(closed) << ',' << format_double(e.mean) << ',' << format_double(e.std_error) << ',' << format_double(z) << ','
                << (e.estimator == McEstimator::plain ? "plain" : "bridged") << ',' << (std::abs(z) < 4.0 ? 1 : 0) << '\n';
        }
    }
    return {{"verify.csv", csv.str()}};
}

// ---- driver -----------------------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw IoError("failed writing '" + path.string() + "'");
}

void emit(Command& c, const std::vector<Artifact>& artifacts, std::ostream& out) {
    if (c.out_dir.empty()) {
        out << artifacts.front().content;
        return;
    }
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + c.out_dir + "': " + ec.message());
    json manifest;
    manifest["command"] = c.path;
    json params = json::object();
    for (const auto& [k, v] : c.values)
        if (!v.empty()) params[k] = v;
    manifest["params"] = params;
    manifest["seed"] = c.values.count("seed") ? json(c.seed()) : json(nullptr);
    json outputs = json::array();
    for (const Artifact& a : artifacts) {
        write_file(fs::path(c.out_dir) / a.name, a.content);
        outputs.push_back(a.name);
    }
    manifest["outputs"] = outputs;
    manifest["version"] = COVER_VERSION;
    const std::string text = dump(manifest);
    write_file(fs::path(c.out_dir) / "manifest.json", text);
    out << text;
}

std::vector<std::string> replay_args(const std::string& manifest_path, const std::string& out_dir) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest '" + manifest_path + "'");
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("manifest '" + manifest_path + "' is not valid JSON: " + e.what());
    }
    if (!manifest.contains("command") || !manifest["command"].is_string() || !manifest.contains("params") || !manifest["params"].is_object())
        throw IoError("manifest '" + manifest_path + "' needs a command string and a params object");
    std::vector<std::string> args;
    std::stringstream words(manifest["command"].get<std::string>());
    std::string w;
    while (words >> w) args.push_back(w);
    for (const auto& [k, v] : manifest["params"].items()) {
        if (!v.is_string()) throw IoError("manifest parameter '" + k + "' must be a string");
        args.push_back("--" + k);
        args.push_back(v.get<std::string>());
    }
    args.push_back("--out");
    args.push_back(out_dir);
    return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prices and replicates the claim paying the wealth of the best constant-rebalanced portfolio in hindsight.", "cover"};
    app.require_subcommand(1);
    app.set_version_flag("--version", COVER_VERSION);

    std::deque<Command> commands;
    auto make = [&](CLI::App* parent, const std::string& name, const std::string& help, const std::string& path, Handler handler) -> Command& {
        Command& c = commands.emplace_back();
        c.path = path;
        c.app = parent->add_subcommand(name, help);
        c.handler = std::move(handler);
        c.option("seed", "1", "random seed");
        c.app->add_option("--out", c.out_dir, "write artifacts and a manifest into this directory");
        return c;
    };

    {
        Command& c = make(&app, "price", "price the claim (levered or unlevered, one or more assets)", "price", cmd_price);
        add_market_options(c);
        add_state_options(c);
        c.option("mode", "levered", "levered or unlevered");
    }
    {
        Command& c = make(&app, "greeks", "delta, gamma, theta, vega, rho of the levered claim on one asset", "greeks", cmd_greeks);
        add_market_options(c);
        add_state_options(c);
    }
    {
        Command& c = make(&app, "iv", "implied volatilities from an observed levered price", "iv", cmd_iv);
        c.option("price", "", "observed price per $1 of notional");
        c.option("s", "", "current stock price");
        c.option("s0", "1", "initial stock price");
        c.option("t", "", "elapsed time");
        c.option("T", "", "expiry");
        c.option("r", "0", "risk-free rate");
    }
    {
        Command& c = make(&app, "vol-curve", "levered price against volatility at a fixed state", "vol-curve", cmd_vol_curve);
        c.option("s", "105", "current stock price");
        c.option("s0", "100", "initial stock price");
        c.option("t", "0.5", "elapsed time");
        c.option("T", "1", "expiry");
        c.option("r", "0.03", "risk-free rate");
        c.option("sigma-min", "0.01", "smallest volatility");
        c.option("sigma-max", "1", "largest volatility");
        c.option("points", "100", "grid size");
        c.option("plot", "", "also write a plot script (gnuplot)");
    }
    {
        Command& c = make(&app, "payoff", "payoff of the claim at expiry over a price grid, one block per volatility", "payoff", cmd_payoff);
        c.option("sigmas", "0.1,0.2,0.3,0.4", "volatilities, comma-separated");
        c.option("T", "5", "expiry");
        c.option("s0", "100", "initial stock price");
        c.option("r", "0", "risk-free rate");
        c.option("s-min", "10", "lowest terminal price");
        c.option("s-max", "400", "highest terminal price");
        c.option("points", "200", "grid size");
        c.option("mode", "levered", "levered or unlevered");
        c.option("t", "", "also price the claim at this time");
        c.option("plot", "", "also write a plot script (gnuplot)");
    }
    {
        Command& c = make(&app, "regret", "excess growth rate of the best unlevered rule over the replicating strategy", "regret", cmd_regret);
        c.option("sigmas", "0.1,0.2,0.3,0.5,0.7", "volatilities, comma-separated");
        c.option("T-min", "1", "shortest horizon");
        c.option("T-max", "100", "longest horizon");
        c.option("points", "100", "grid size");
        c.option("plot", "", "also write a plot script (gnuplot)");
    }
    {
        CLI::App* lattice = app.add_subcommand("lattice", "binomial lattice: price, payoff or demon");
        lattice->require_subcommand(1);
        Command& p = make(lattice, "price", "closed-form price, delta and thresholds at a node", "lattice price", cmd_lattice_price);
        add_lattice_options(p);
        p.option("k", "0", "upticks so far");
        p.option("n", "0", "steps elapsed");
        p.option("mode", "levered", "levered or unlevered");
        Command& y = make(lattice, "payoff", "terminal payoff table over the uptick count", "lattice payoff", cmd_lattice_payoff);
        add_lattice_options(y);
        Command& d = make(lattice, "demon", "replicate the claim on the double-or-half coin", "lattice demon", cmd_lattice_demon);
        d.option("N", "300", "number of tosses");
        d.option("p", "0.5", "probability of doubling");
        d.option("mode", "levered", "levered or unlevered");
        d.option("plot", "", "also write a plot script (gnuplot)");
    }
    {
        Command& c = make(&app, "simulate", "long-horizon replication experiment", "simulate", cmd_simulate);
        c.values["scenario"] = "sim1";
        c.app->add_option("scenario,--scenario", c.values["scenario"], "sim1, sim2, sim3 or custom")->capture_default_str();
        add_market_options(c);
        c.option("T", "200", "horizon in years");
        c.option("warmup", "5", "buy-and-hold years before replication starts");
        c.option("steps-per-year", "52", "rebalances per year");
        c.option("paths", "1", "number of sample paths");
    }
    {
        Command& c = make(&app, "hedge", "delta-hedge the claim along one simulated path", "hedge", cmd_hedge);
        add_market_options(c);
        c.option("t0", "1", "hedge start (a grid point)");
        c.option("T", "2", "expiry");
        c.option("steps", "1000", "grid intervals over [0, T]");
        c.option("mode", "levered", "levered or unlevered");
        c.option("measure", "risk-neutral", "physical or risk-neutral");
        c.option("path", "0", "path index within the seed");
    }
    {
        Command& c = make(&app, "backtest", "fixed-fraction rebalancing on a CSV price history", "backtest", cmd_backtest);
        c.option("prices", "", "CSV file: date or time column, then one price column per asset");
        c.option("b", "", "fractions per asset, comma-separated (default: equal split)");
        c.option("interval", "1", "rows between rebalances");
        c.option("period-rate", "0", "simple cash return per rebalancing period");
    }
    {
        Command& c = make(&app, "verify", "closed forms against the Monte Carlo oracle on random states", "verify", cmd_verify);
        c.option("n", "1", "number of assets");
        c.option("states", "10", "number of random states");
        c.option("paths", "100000", "Monte Carlo paths per state");
    }
    std::string manifest_path, replay_out;
    CLI::App* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    replay->add_option("--manifest", manifest_path, "manifest.json from an earlier run")->required();
    replay->add_option("--out", replay_out, "directory for the regenerated artifacts")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (replay->parsed()) return run(replay_args(manifest_path, replay_out), out, err);
        for (Command& c : commands) {
            if (!c.app->parsed()) continue;
            emit(c, c.handler(c), out);
            return kExitOk;
        }
        err << "cover: no command given\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "cover: " << e.what() << '\n';
        return kExitDomain;
    } catch (const IoError& e) {
        err << "cover: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "cover: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "cover: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "cover: internal error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace cover::cli
