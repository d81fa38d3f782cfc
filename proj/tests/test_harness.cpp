#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "subpath/harness.hpp"
#include "subpath/json_io.hpp"
#include "subpath/malliavin.hpp"
#include "subpath/shift_space.hpp"
#include "subpath/subordinator.hpp"

using namespace subpath;
using nlohmann::json;

namespace {

ShiftFunction compact_shift() {
    Eigen::MatrixXd d(1, 3);
    d << 1.0, -0.5, -0.25;
    return ShiftFunction({0.5, 1.5, 3.0}, d);
}

CylinderFunction tanh_pair() {
    Eigen::MatrixXd a(1, 2);
    a << 0.8, -0.6;
    return CylinderFunction::tanh_affine({0.4, 0.9}, a, 0.3);
}

CylinderFunction bump_pair() {
    Eigen::MatrixXd c(1, 2);
    c << 0.2, -0.1;
    return CylinderFunction::gaussian_bump({0.4, 0.9}, c, 1.5);
}

TailTable gamma_unit_table() {
    std::vector<double> ts, ps;
    for (int k = 0; k <= 200; ++k) {
        const double t = 1e-3 * std::pow(10.0, 5.0 * k / 200.0);
        ts.push_back(t);
        ps.push_back(std::exp(-t));
    }
    return TailTable(std::move(ts), std::move(ps), TailContinuation::log_linear);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const std::string& out, const std::string& err) {
    const std::string cmd =
        std::string(SUBPATH_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("worker resolution honours the environment cap") {
    unsetenv("SUBPATH_THREADS");
    CHECK(resolve_workers(4) == 4);
    CHECK(resolve_workers(0) >= 1);
    setenv("SUBPATH_THREADS", "2", 1);
    CHECK(resolve_workers(8) == 2);
    CHECK(resolve_workers(1) == 1);
    setenv("SUBPATH_THREADS", "garbage", 1);
    CHECK(resolve_workers(8) == 8);
    setenv("SUBPATH_THREADS", "0", 1);
    CHECK(resolve_workers(8) == 8);
    unsetenv("SUBPATH_THREADS");
}

TEST_CASE("block averaging is exact and independent of the worker count") {
    const auto fn = [](std::uint64_t r, SplitMix64&, double* out) {
        out[0] = static_cast<double>(r);
        out[1] = 1.0;
    };
    const std::uint64_t n = 10000;
    const auto one = mc_vector_mean(n, 0, 1, 0, 1, 2, fn);
    const auto many = mc_vector_mean(n, 0, 1, 0, 7, 2, fn);
    REQUIRE(one.size() == 2);
    // bit-for-bit: the reduction order is fixed by block index, not scheduling
    CHECK(one[0].mean == many[0].mean);
    CHECK(one[0].se == many[0].se);
    CHECK(one[1].mean == many[1].mean);
    CHECK(one[0].mean == doctest::Approx(4999.5).epsilon(1e-12));
    // sample variance of 0..n-1 is n(n+1)/12
    const double var = n * (n + 1.0) / 12.0;
    CHECK(one[0].se == doctest::Approx(std::sqrt(var / n)).epsilon(1e-12));
    CHECK(one[1].mean == 1.0);
    CHECK(one[1].se == 0.0);
}

TEST_CASE("replica streams make the estimator reproducible, offset changes it") {
    const auto fn = [](std::uint64_t, SplitMix64& gen, double* out) {
        out[0] = uniform01(gen);
    };
    const auto a = mc_vector_mean(5000, 0, 42, 7, 3, 1, fn);
    const auto b = mc_vector_mean(5000, 0, 42, 7, 1, 1, fn);
    const auto shifted = mc_vector_mean(5000, 5000, 42, 7, 3, 1, fn);
    CHECK(a[0].mean == b[0].mean);
    CHECK(a[0].mean != shifted[0].mean);
}

TEST_CASE("change-of-measure verdict holds on the deterministic clock") {
    const auto model = SubordinatorModel::deterministic(1.0, 1.0);
    const WeightedSpace space{TailTable::flat_until(1.0), 0.0};
    MCOptions opts;
    opts.n = 5000;
    opts.seed = 17;
    const QiReport rep = verify_qi(model, compact_shift(), space, tanh_pair(), opts);
    CHECK(rep.pass);
    CHECK(rep.delta.pass);
    CHECK(rep.mass.pass);
    CHECK(rep.delta.target == 0.0);
    CHECK(rep.mass.target == 1.0);
    CHECK(std::abs(rep.mass.estimate - 1.0) < 0.1);
}

TEST_CASE("change-of-measure refuses shifts outside the energy space") {
    const auto model = SubordinatorModel::deterministic(1.0, 1.0);
    const WeightedSpace space{TailTable::flat_until(1.0), 0.0};
    const auto h = ShiftFunction::constant_slope(Eigen::VectorXd::Ones(1));
    MCOptions opts;
    opts.n = 1000;
    CHECK_THROWS_AS(verify_qi(model, h, space, tanh_pair(), opts), ArgumentError);
}

TEST_CASE("integration-by-parts verdict holds on the gamma clock") {
    const auto model = SubordinatorModel::gamma(1.0, 1.0, 1.0);
    const WeightedSpace space{gamma_unit_table(), 0.0};
    MCOptions opts;
    opts.n = 8000;
    opts.seed = 23;
    const IbpReport rep = verify_ibp(model, compact_shift(), space, tanh_pair(),
                                     bump_pair(), opts);
    CHECK(rep.pass);
    CHECK(rep.delta.target == 0.0);
}

TEST_CASE("integration-by-parts needs matching observation grids") {
    const auto model = SubordinatorModel::gamma(1.0, 1.0, 1.0);
    const WeightedSpace space{gamma_unit_table(), 0.0};
    Eigen::MatrixXd a(1, 1);
    a << 1.0;
    const auto g_other = CylinderFunction::tanh_affine({0.7}, a, 0.0);
    MCOptions opts;
    opts.n = 1000;
    CHECK_THROWS_AS(verify_ibp(model, compact_shift(), space, tanh_pair(), g_other, opts),
                    ArgumentError);
}

TEST_CASE("exchange identity matches the first-moment example") {
    // flat slopes, kappa = 1: the weight power drops out on the left, which
    // becomes E S_T, and the right side integrates the survival function,
    // which equals the mean T phi'(0+) = 1
    const auto model = SubordinatorModel::gamma(1.0, 1.0, 1.0);
    const WeightedSpace space{gamma_unit_table(), 1.0};
    const auto h = ShiftFunction::constant_slope(Eigen::VectorXd::Ones(1));
    MCOptions opts;
    opts.n = 20000;
    opts.seed = 31;
    const MCResult res = identity_result(h, h, space, model, opts);
    CHECK(res.pass);
    CHECK(std::abs(res.target - 1.0) < 5e-3);
    CHECK(std::abs(res.estimate - 1.0) < 0.05);
}

TEST_CASE("energy estimator routes around failed preconditions") {
    MCOptions opts;
    opts.n = 4000;
    opts.seed = 5;
    Eigen::MatrixXd a(1, 1);
    a << 1.0;
    const auto f = CylinderFunction::tanh_affine({1.0}, a, 0.0);

    SUBCASE("deterministic clock runs both estimators and they agree") {
        const auto model = SubordinatorModel::deterministic(1.0, 1.0);
        const WeightedSpace space{TailTable::flat_until(1.0), 0.0};
        const EnergyReport rep = energy_estimate(model, f, space, opts);
        REQUIRE(rep.classical.has_value());
        REQUIRE(rep.weighted.has_value());
        CHECK(rep.pre.classical_ok);
        CHECK(rep.pre.weighted_ok);
        CHECK(rep.classical->estimate == doctest::Approx(rep.weighted->estimate));
        CHECK(rep.pass);
    }

    SUBCASE("heavy-tail clock with deep negative weight skips the flat estimator") {
        const auto model = SubordinatorModel::stable(0.5, 1.0);
        std::vector<double> ts, ps;
        for (int k = 0; k <= 120; ++k) {
            const double t = 1e-3 * std::pow(10.0, 6.0 * k / 120.0);
            ts.push_back(t);
            ps.push_back(std::erf(1.0 / (2.0 * std::sqrt(t))));
        }
        const TailTable table(ts, ps, TailContinuation::power_law, 0.5);
        const EnergyReport rep = energy_estimate(model, f, {table, -1.2}, opts);
        CHECK_FALSE(rep.pre.classical_ok);
        CHECK(rep.pre.weighted_ok);
        CHECK_FALSE(rep.classical.has_value());
        REQUIRE(rep.weighted.has_value());
        CHECK(std::isfinite(rep.weighted->estimate));

        // a weight above the admissible ceiling leaves nothing to run
        CHECK_THROWS_AS(energy_estimate(model, f, {table, 0.5}, opts), ArgumentError);
        const EnergyReport forced = energy_estimate(model, f, {table, 0.5}, opts, true);
        CHECK(forced.overridden);
        CHECK(forced.classical.has_value());
        CHECK(forced.weighted.has_value());
    }
}

TEST_CASE("tail check accepts the gamma clock and reports a slope") {
    const auto model = SubordinatorModel::gamma(1.0, 1.0, 1.0);
    MCOptions opts;
    opts.n = 20000;
    opts.seed = 13;
    const auto rep = tail_check(model, {0.5, 1.0, 2.0, 4.0}, opts,
                                std::make_pair(0.5, 4.0), std::nullopt);
    CHECK(rep.pass);
    CHECK(rep.rows.size() == 4);
    for (const auto& row : rep.rows) {
        CHECK(row.pass);
        CHECK(row.empirical <= row.bound + 3.0 * row.se + 1e-12);
    }
    CHECK(rep.slope.has_value());
    CHECK_THROWS_AS(
        tail_check(model, {1.0}, opts, std::nullopt, std::make_pair(-1.0, 0.0)),
        ArgumentError);
}

TEST_CASE("config parsing names the offending field") {
    CHECK_THROWS_WITH_AS(parse_config(json{{"alpha", 0.5}}),
                         "config is missing required field \"family\"", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(json{{"family", "weibull"}}),
                         "config field \"family\" must be one of deterministic, gamma, "
                         "stable, compound_poisson, log",
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(json{{"family", "gamma"}, {"n", 10}}),
                         "config field \"n\" must be at least 1000", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(json{{"family", "gamma"}, {"T", -1.0}}),
                         "config field \"T\" must be positive", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(json::array()), "config root must be a JSON object",
                         ConfigError);

    const auto cfg = parse_config(json{{"family", "stable"}});
    CHECK_THROWS_WITH_AS(config_model(cfg), "config field \"alpha\" is required",
                         ConfigError);
    const auto cp = parse_config(json{{"family", "compound_poisson"}});
    CHECK_THROWS_AS(config_bernstein(cp), ConfigError);
    const auto logcfg = parse_config(json{{"family", "log"}});
    CHECK_THROWS_AS(config_model(logcfg), ConfigError);   // no sampler
    CHECK_NOTHROW(config_bernstein(logcfg));              // but a Bernstein function
}

TEST_CASE("config builders reproduce the analytic survival tables") {
    SUBCASE("gamma with unit product is tabulated exactly") {
        const auto cfg = parse_config(
            json{{"family", "gamma"}, {"a", 1.0}, {"rate", 1.0}, {"T", 1.0}});
        const TailTable table = config_table(cfg);
        CHECK(table.survival(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        CHECK(table.survival(7.3) == doctest::Approx(std::exp(-7.3)).epsilon(1e-12));
        // log-linear continuation keeps the exact rate past the last knot
        CHECK(table.survival(900.0) ==
              doctest::Approx(std::exp(-900.0)).epsilon(1e-6));
    }
    SUBCASE("gamma away from unit product refuses the closed form") {
        const auto cfg = parse_config(json{{"family", "gamma"}, {"a", 2.0}});
        CHECK_THROWS_AS(config_table(cfg), ConfigError);
    }
    SUBCASE("stable half uses the error-function survival") {
        const auto cfg = parse_config(json{{"family", "stable"}, {"alpha", 0.5}});
        const TailTable table = config_table(cfg);
        CHECK(table.survival(1.0) == doctest::Approx(std::erf(0.5)).epsilon(1e-12));
        CHECK(table.continuation() == TailContinuation::power_law);
        CHECK(table.power_exponent() == 0.5);
    }
    SUBCASE("deterministic clock gets the flat table") {
        const auto cfg = parse_config(json{{"family", "deterministic"}, {"c", 2.0}});
        const TailTable table = config_table(cfg);
        CHECK(table.survival(1.9) == 1.0);
        CHECK(table.survival(2.1) == 0.0);
    }
    SUBCASE("families without a closed form need the Monte Carlo fit") {
        const json atoms = json::array({json::array({1.0, 0.7})});
        const auto bare = parse_config(json{{"family", "compound_poisson"}, {"atoms", atoms}});
        CHECK_THROWS_AS(config_table(bare), ConfigError);
        const auto mc = parse_config(json{{"family", "compound_poisson"},
                                          {"atoms", atoms},
                                          {"seed", 3},
                                          {"tail_table",
                                           json{{"kind", "mc"},
                                                {"n", 4000},
                                                {"knots", json::array({0.5, 1.0, 5.0, 40.0})}}}});
        const TailTable table = config_table(mc);
        // the far knot is unreachable at this sample size and gets dropped
        CHECK(table.knots().size() < 4);
        CHECK(table.survival(0.5) ==
              doctest::Approx(1.0 - std::exp(-0.7)).epsilon(0.05));
    }
}

TEST_CASE("config builders parse shifts and cylinder functions") {
    const json doc{{"family", "gamma"},
                   {"shift", json{{"breakpoints", json::array({0.5, 1.5, "inf"})},
                                  {"derivatives", json::array({1.0, -0.5, 0.25})}}},
                   {"cylinder", json{{"kernel", "tanh"},
                                     {"times", json::array({0.4, 0.9})},
                                     {"a", json::array({0.8, -0.6})},
                                     {"beta", 0.3}}}};
    const auto cfg = parse_config(doc);
    const ShiftFunction h = config_shift(cfg);
    CHECK(h.dim() == 1);
    CHECK(h.cells() == 3);
    CHECK(h.breakpoints().back() == kInf);
    CHECK(h.derivative_at(10.0)(0) == 0.25);
    const CylinderFunction f = config_cylinder(cfg);
    CHECK(f.dim() == 1);
    CHECK(f.observations() == 2);
    CHECK(f.kind() == KernelKind::tanh_affine);

    const auto slope_cfg = parse_config(
        json{{"family", "gamma"},
             {"shift", json{{"slope", json::array({1.0, 2.0})}, {"until", 3.0}}}});
    const ShiftFunction s = config_shift(slope_cfg);
    CHECK(s.dim() == 2);
    CHECK(s.derivative_at(2.0)(1) == 2.0);
    CHECK(s.derivative_at(4.0)(1) == 0.0);

    const auto bad = parse_config(
        json{{"family", "gamma"},
             {"cylinder", json{{"kernel", "bump"}, {"times", json::array({1.0})}}}});
    CHECK_THROWS_WITH_AS(config_cylinder(bad),
                         "config field \"cylinder.center\" is required for the bump kernel",
                         ConfigError);
    CHECK_THROWS_WITH_AS(config_shift(cfg, "shift_g"),
                         "config field \"shift_g\" is required for this subcommand",
                         ConfigError);
}

TEST_CASE("report serialization keeps special values readable") {
    CHECK(json_number(1.5) == json(1.5));
    CHECK(json_number(kInf) == json("inf"));
    CHECK(json_number(-kInf) == json("-inf"));
    CHECK(json_number(std::nan("")) == json("nan"));
    for (double x : {0.1, -2.5e-308, 1e300, 4999.5}) {
        CHECK(std::strtod(csv_number(x).c_str(), nullptr) == x);
    }
    MCResult r;
    r.name = "demo";
    r.estimate = 0.5;
    r.se = 0.01;
    r.target = 0.0;
    r.n = 1000;
    const json j = to_json(r);
    CHECK(j.at("name") == "demo");
    CHECK(j.at("pass") == false);
}

TEST_CASE("command line runs experiments from config files") {
    const std::string dir = "/tmp/subpath_harness_cli";
    REQUIRE(std::system(("mkdir -p " + dir).c_str()) == 0);

    SUBCASE("index reports the stability exponent") {
        write_text_file(dir + "/stable.json", R"({"family":"stable","alpha":0.5})");
        const int rc = run_cli("index --config " + dir + "/stable.json",
                               dir + "/out.json", dir + "/err.txt");
        CHECK(rc == 0);
        const json rep = json::parse(slurp(dir + "/out.json"));
        for (const char* key : {"experiment", "estimate", "se", "n", "pass"})
            CHECK(rep.contains(key));
        CHECK(rep.at("experiment") == "index");
        CHECK(std::abs(rep.at("estimate").get<double>() - 0.5) < 0.05);
    }

    SUBCASE("missing family exits one and names the field") {
        write_text_file(dir + "/nofam.json", R"({"alpha":0.5})");
        const int rc = run_cli("index --config " + dir + "/nofam.json", dir + "/out.json",
                               dir + "/err.txt");
        CHECK(rc == 1);
        CHECK(slurp(dir + "/err.txt").find("\"family\"") != std::string::npos);
    }

    SUBCASE("verdict reports are byte-identical across worker counts") {
        write_text_file(dir + "/qi.json", R"({
            "family": "gamma", "a": 1.0, "rate": 1.0, "T": 1.0,
            "n": 2000, "seed": 9, "workers": 8,
            "shift": {"breakpoints": [0.5, 1.5], "derivatives": [1.0, -0.5]},
            "cylinder": {"kernel": "tanh", "times": [0.4, 0.9],
                          "a": [0.8, -0.6], "beta": 0.3}})");
        const int r1 = run_cli("verify-qi --config " + dir + "/qi.json",
                               dir + "/w1.json", dir + "/err1.txt");
        setenv("SUBPATH_THREADS", "1", 1);
        const int r2 = run_cli("verify-qi --config " + dir + "/qi.json",
                               dir + "/w1b.json", dir + "/err2.txt");
        unsetenv("SUBPATH_THREADS");
        CHECK(r1 == 0);
        CHECK(r2 == 0);
        CHECK(slurp(dir + "/w1.json") == slurp(dir + "/w1b.json"));
        CHECK(!slurp(dir + "/w1.json").empty());
    }

    SUBCASE("the out option duplicates stdout to a file") {
        write_text_file(dir + "/det.json", R"({"family":"deterministic","c":1.0})");
        const int rc = run_cli("phi --config " + dir + "/det.json --out " + dir +
                                   "/copy.json",
                               dir + "/out.json", dir + "/err.txt");
        CHECK(rc == 0);
        CHECK(slurp(dir + "/out.json") == slurp(dir + "/copy.json"));
    }
}

}  // TEST_SUITE
