// Command-line front end: every subcommand loads a JSON config, runs one
// experiment from the library, prints a JSON report to stdout and exits
// 0 (pass), 2 (a statistical gate failed) or 1 (bad input / numeric error).
#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "subpath/bernstein.hpp"
#include "subpath/harness.hpp"
#include "subpath/json_io.hpp"
#include "subpath/malliavin.hpp"
#include "subpath/path_sim.hpp"
#include "subpath/shift_space.hpp"
#include "subpath/subordinator.hpp"

namespace {

using nlohmann::json;
using namespace subpath;

constexpr std::uint64_t kPurposeSimulate = 0x73696d75ull;

struct CliOverrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> n;
    std::optional<int> workers;
    std::optional<double> gate;
    std::optional<std::string> out;
    std::optional<std::string> csv;
    bool override_preconditions = false;
};

ExperimentConfig load_with_overrides(const CliOverrides& o) {
    ExperimentConfig cfg = load_config_file(o.config);
    if (o.seed) cfg.mc.seed = *o.seed;
    if (o.n) cfg.mc.n = *o.n;
    if (o.workers) cfg.mc.workers = *o.workers;
    if (o.gate) cfg.mc.gate = *o.gate;
    if (o.out) cfg.out_path = *o.out;
    if (o.csv) cfg.csv_path = *o.csv;
    if (o.override_preconditions) cfg.override_preconditions = true;
    if (cfg.mc.n < 1000) throw ConfigError("config field \"n\" must be at least 1000");
    if (!(cfg.mc.gate > 0)) throw ConfigError("config field \"gate\" must be positive");
    return cfg;
}

json envelope(const char* experiment, const ExperimentConfig& cfg, double estimate,
              double se, std::uint64_t n, bool pass, json detail) {
    return json{{"experiment", experiment},
                {"family", cfg.family},
                {"seed", cfg.mc.seed},
                {"estimate", json_number(estimate)},
                {"se", json_number(se)},
                {"n", n},
                {"pass", pass},
                {"detail", std::move(detail)}};
}

int emit(const json& report, const ExperimentConfig& cfg, bool pass) {
    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (cfg.out_path) write_text_file(*cfg.out_path, text);
    return pass ? 0 : 2;
}

std::optional<std::pair<double, double>> pair_field(const ExperimentConfig& cfg,
                                                   const char* key) {
    if (!config_has(cfg, key)) return std::nullopt;
    const json& j = cfg.raw.at(key);
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(std::string("config field \"") + key +
                          "\" must be an array of two numbers");
    return std::make_pair(j[0].get<double>(), j[1].get<double>());
}

int run_phi(const ExperimentConfig& cfg) {
    const BernsteinFunction bf = config_bernstein(cfg);
    std::vector<double> grid;
    for (int k = 0; k <= 16; ++k) grid.push_back(std::pow(10.0, -4.0 + 0.5 * k));
    grid = config_grid(cfg, "u_grid", grid);
    json rows = json::array();
    bool agree = true;
    for (double u : grid) {
        const double closed = phi_eval(bf, u);
        const double quad = phi_eval_quadrature(bf, u);
        const double gap = std::abs(closed - quad) / std::max(1e-300, std::abs(closed));
        if (gap > 5e-3) agree = false;
        rows.push_back(json{{"u", json_number(u)},
                            {"phi", json_number(closed)},
                            {"quadrature", json_number(quad)},
                            {"rel_gap", json_number(gap)}});
    }
    const json report = envelope("phi", cfg, phi_eval(bf, 1.0), 0.0, 0, agree,
                                 json{{"rows", rows}, {"label", bf.label}});
    return emit(report, cfg, agree);
}

int run_index(const ExperimentConfig& cfg) {
    const BernsteinFunction bf = config_bernstein(cfg);
    IndexGrid grid;
    grid.u_min = config_number(cfg, "u_min", grid.u_min);
    grid.u_max = config_number(cfg, "u_max", grid.u_max);
    grid.points = config_int(cfg, "grid_points", grid.points);
    grid.bisect_tol = config_number(cfg, "bisect_tol", grid.bisect_tol);
    const IndexReport rep = index_sigma0(bf, grid);
    const double sigma0 = rep.moment_indeterminate ? rep.sigma0_limit : rep.sigma0_moment;
    json detail = to_json(rep);
    detail["sigma0"] = json_number(sigma0);
    const json report = envelope("index", cfg, sigma0, 0.0, 0, true, std::move(detail));
    return emit(report, cfg, true);
}

int run_hp_check(const ExperimentConfig& cfg) {
    const BernsteinFunction bf = config_bernstein(cfg);
    const double p = config_number(cfg, "p", 2.0);
    const HpReport rep = hp_check(bf, p);
    const double estimate = rep.moment ? *rep.moment
                            : rep.status == HpStatus::fails
                                ? kInf
                                : std::numeric_limits<double>::quiet_NaN();
    const bool pass = rep.status != HpStatus::indeterminate;
    json detail = to_json(rep);
    detail["p"] = json_number(p);
    const json report = envelope("hp-check", cfg, estimate, 0.0, 0, pass, std::move(detail));
    return emit(report, cfg, pass);
}

int run_tail(const ExperimentConfig& cfg) {
    const SubordinatorModel model = config_model(cfg);
    const std::vector<double> ts =
        config_grid(cfg, "t_grid", {1.0, 10.0, 100.0, 1000.0});
    const auto window = pair_field(cfg, "slope_window");
    const auto range = pair_field(cfg, "slope_range");
    const TailCheckReport rep = tail_check(model, ts, cfg.mc, window, range);
    const json report = envelope("tail", cfg, rep.rows.back().empirical,
                                 rep.rows.back().se, rep.n, rep.pass, to_json(rep));
    return emit(report, cfg, rep.pass);
}

int run_simulate(const ExperimentConfig& cfg) {
    const SubordinatorModel model = config_model(cfg);
    const std::vector<double> times =
        config_grid(cfg, "times", {0.25, 0.5, 0.75, 1.0});
    const ShiftFunction h =
        config_has(cfg, "shift")
            ? config_shift(cfg)
            : ShiftFunction::constant_slope(
                  Eigen::VectorXd::Zero(config_int(cfg, "d", 1)));
    const int k = static_cast<int>(times.size());
    const int d = h.dim();

    std::ofstream csv;
    if (cfg.csv_path) {
        csv.open(*cfg.csv_path, std::ios::binary);
        if (!csv) throw ConfigError("cannot open for writing: " + *cfg.csv_path);
        std::vector<std::string> header{"replica"};
        for (int j = 0; j < k; ++j) header.push_back("ell_" + std::to_string(j + 1));
        header.push_back("ell_T");
        for (int r = 0; r < d; ++r)
            for (int j = 0; j < k; ++j)
                header.push_back("w_" + std::to_string(r + 1) + "_" + std::to_string(j + 1));
        header.push_back("I");
        header.push_back("Q");
        header.push_back("log_z");
        csv << csv_join(header);
    }

    double sum = 0.0, sumsq = 0.0;
    const std::uint64_t n = cfg.mc.n;
    for (std::uint64_t r = 0; r < n; ++r) {
        auto gen = replica_stream(cfg.mc.seed, r, kPurposeSimulate);
        const PathSample s = sample_joint(model, times, h, gen);
        const DensityValue dv = density(s);
        sum += s.ell_T;
        sumsq += s.ell_T * s.ell_T;
        if (csv.is_open()) {
            std::vector<std::string> cells{std::to_string(r)};
            for (double e : s.ell) cells.push_back(csv_number(e));
            cells.push_back(csv_number(s.ell_T));
            for (int row = 0; row < d; ++row)
                for (int j = 0; j < k; ++j) cells.push_back(csv_number(s.w_obs(row, j)));
            cells.push_back(csv_number(s.wiener));
            cells.push_back(csv_number(s.energy));
            cells.push_back(csv_number(dv.log_z));
            csv << csv_join(cells);
        }
    }
    if (csv.is_open() && !csv) throw ConfigError("write failed: " + *cfg.csv_path);
    const double mean = sum / static_cast<double>(n);
    const double var =
        std::max(0.0, (sumsq - static_cast<double>(n) * mean * mean) /
                          static_cast<double>(n - 1));
    const double se = std::sqrt(var / static_cast<double>(n));
    json detail{{"dim", d},
                {"observations", k},
                {"mean_clock_T", json_number(mean)},
                {"csv", cfg.csv_path ? json(*cfg.csv_path) : json(nullptr)}};
    const json report = envelope("simulate", cfg, mean, se, n, true, std::move(detail));
    return emit(report, cfg, true);
}

int run_verify_qi(const ExperimentConfig& cfg) {
    const SubordinatorModel model = config_model(cfg);
    const WeightedSpace space = config_space(cfg);
    const ShiftFunction h = config_shift(cfg);
    const CylinderFunction f = config_cylinder(cfg);
    const QiReport rep = verify_qi(model, h, space, f, cfg.mc);
    const json report = envelope("verify-qi", cfg, rep.delta.estimate, rep.delta.se,
                                 rep.delta.n, rep.pass, to_json(rep));
    return emit(report, cfg, rep.pass);
}

int run_verify_ibp(const ExperimentConfig& cfg) {
    const SubordinatorModel model = config_model(cfg);
    const WeightedSpace space = config_space(cfg);
    const ShiftFunction h = config_shift(cfg);
    const CylinderFunction f = config_cylinder(cfg, "cylinder");
    const CylinderFunction g = config_cylinder(cfg, "cylinder_g");
    const IbpReport rep = verify_ibp(model, h, space, f, g, cfg.mc);
    const json report = envelope("verify-ibp", cfg, rep.delta.estimate, rep.delta.se,
                                 rep.delta.n, rep.pass, to_json(rep));
    return emit(report, cfg, rep.pass);
}

int run_verify_identity(const ExperimentConfig& cfg) {
    const SubordinatorModel model = config_model(cfg);
    const WeightedSpace space = config_space(cfg);
    const ShiftFunction g = config_shift(cfg, "shift");
    const ShiftFunction h =
        config_has(cfg, "shift_g") ? config_shift(cfg, "shift_g") : g;
    const double upper = config_number(cfg, "upper", kInf);
    const MCResult res = identity_result(g, h, space, model, cfg.mc, upper);
    const json report = envelope("verify-identity", cfg, res.estimate, res.se, res.n,
                                 res.pass, to_json(res));
    return emit(report, cfg, res.pass);
}

int run_energy(const ExperimentConfig& cfg) {
    const SubordinatorModel model = config_model(cfg);
    const WeightedSpace space = config_space(cfg);
    const CylinderFunction f = config_cylinder(cfg);
    const EnergyReport rep =
        energy_estimate(model, f, space, cfg.mc, cfg.override_preconditions);
    const MCResult& head = rep.weighted ? *rep.weighted : *rep.classical;
    const json report =
        envelope("energy", cfg, head.estimate, head.se, head.n, rep.pass, to_json(rep));
    return emit(report, cfg, rep.pass);
}

int run_ggvv(const ExperimentConfig& cfg) {
    const TailTable table = config_table(cfg);
    const double kappa_lo = config_number(cfg, "kappa_lo", 1.0);
    const double kappa_hi = config_number(cfg, "kappa_hi", kappa_lo + 1.0);
    const int max_blocks = config_int(cfg, "max_blocks", 40);
    const SeparationReport rep =
        ggvv_construct(WeightedSpace{table, kappa_lo}, kappa_hi, max_blocks);
    double sum_m = 0.0;
    for (const auto& b : rep.blocks)
        if (b.contributing) sum_m += static_cast<double>(b.m);
    const double lo_total = rep.partial_lo.empty() ? 0.0 : rep.partial_lo.back();
    const bool lo_exact = std::abs(lo_total - sum_m) <= 1e-9 * std::max(1.0, sum_m);
    const bool hi_ok = rep.energy_hi_total <= rep.energy_hi_ceiling + 1e-9;
    const bool pass = lo_exact && hi_ok && rep.separates && rep.bounded_above;
    json detail = to_json(rep);
    detail["sum_m"] = json_number(sum_m);
    detail["lo_exact"] = lo_exact;
    detail["hi_ok"] = hi_ok;
    const json report = envelope("ggvv", cfg, lo_total, 0.0, rep.blocks.size(), pass,
                                 std::move(detail));
    return emit(report, cfg, pass);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"subordinate-path quasi-invariance verification toolkit"};
    app.require_subcommand(1);

    CliOverrides o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON experiment config")->required();
        sub->add_option("--seed", o.seed, "override the RNG seed");
        sub->add_option("--n", o.n, "override the replica count");
        sub->add_option("--workers", o.workers, "override the worker cap");
        sub->add_option("--gate", o.gate, "override the standard-error gate multiple");
        sub->add_option("--out", o.out, "also write the JSON report to this path");
        sub->add_option("--csv", o.csv, "CSV output path (simulate)");
        sub->add_flag("--override-preconditions", o.override_preconditions,
                      "run estimators even when their preconditions fail");
    };

    CLI::App* phi = app.add_subcommand("phi", "evaluate the Bernstein function on a grid");
    CLI::App* index = app.add_subcommand("index", "estimate the lower index sigma0");
    CLI::App* hp = app.add_subcommand("hp-check", "test the jump-moment condition");
    CLI::App* tail =
        app.add_subcommand("tail", "compare empirical clock survival with its bound");
    CLI::App* simulate =
        app.add_subcommand("simulate", "draw joint clock/path replicas, optionally to CSV");
    CLI::App* qi = app.add_subcommand("verify-qi", "verify the change-of-measure identity");
    CLI::App* ibp = app.add_subcommand("verify-ibp", "verify the integration-by-parts pairing");
    CLI::App* ident =
        app.add_subcommand("verify-identity", "verify the clock-time/path-time exchange identity");
    CLI::App* energy = app.add_subcommand("energy", "estimate gradient energies");
    CLI::App* ggvv = app.add_subcommand("ggvv", "build the weight-separating shift");
    for (CLI::App* sub : {phi, index, hp, tail, simulate, qi, ibp, ident, energy, ggvv})
        add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        const ExperimentConfig cfg = load_with_overrides(o);
        if (phi->parsed()) return run_phi(cfg);
        if (index->parsed()) return run_index(cfg);
        if (hp->parsed()) return run_hp_check(cfg);
        if (tail->parsed()) return run_tail(cfg);
        if (simulate->parsed()) return run_simulate(cfg);
        if (qi->parsed()) return run_verify_qi(cfg);
        if (ibp->parsed()) return run_verify_ibp(cfg);
        if (ident->parsed()) return run_verify_identity(cfg);
        if (energy->parsed()) return run_energy(cfg);
        if (ggvv->parsed()) return run_ggvv(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand selected\n";
    return 1;
}
