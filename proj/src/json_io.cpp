#include "subpath/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace subpath {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

const json* find(const json& doc, const std::string& key) {
    if (!doc.is_object()) return nullptr;
    const auto it = doc.find(key);
    return it == doc.end() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& display) {
    if (!j.is_number()) fail("config field \"" + display + "\" must be a number");
    return j.get<double>();
}

double number_field(const json& doc, const std::string& key, const std::string& display,
                    std::optional<double> fallback) {
    const json* j = find(doc, key);
    if (!j) {
        if (fallback) return *fallback;
        fail("config field \"" + display + "\" is required");
    }
    const double v = as_number(*j, display);
    if (!std::isfinite(v)) fail("config field \"" + display + "\" must be finite");
    return v;
}

bool bool_field(const json& doc, const std::string& key, const std::string& display,
                bool fallback) {
    const json* j = find(doc, key);
    if (!j) return fallback;
    if (!j->is_boolean()) fail("config field \"" + display + "\" must be a boolean");
    return j->get<bool>();
}

std::uint64_t uint_field(const json& doc, const std::string& key, const std::string& display,
                         std::uint64_t fallback) {
    const json* j = find(doc, key);
    if (!j) return fallback;
    if (!j->is_number()) fail("config field \"" + display + "\" must be a non-negative integer");
    const double v = j->get<double>();
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e18)
        fail("config field \"" + display + "\" must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

std::string string_field(const json& doc, const std::string& key, const std::string& display,
                         std::optional<std::string> fallback) {
    const json* j = find(doc, key);
    if (!j) {
        if (fallback) return *fallback;
        fail("config field \"" + display + "\" is required");
    }
    if (!j->is_string()) fail("config field \"" + display + "\" must be a string");
    return j->get<std::string>();
}

std::vector<double> number_array(const json& j, const std::string& display) {
    if (!j.is_array() || j.empty())
        fail("config field \"" + display + "\" must be a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(as_number(e, display));
    return out;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) out.push_back(lo * std::exp(step * i));
    out.back() = hi;
    return out;
}

// flat array -> one row; array of arrays -> one row per inner array
Eigen::MatrixXd matrix_field(const json& j, const std::string& display, int cols) {
    if (!j.is_array() || j.empty())
        fail("config field \"" + display + "\" must be a non-empty array");
    if (j.front().is_array()) {
        const int rows = static_cast<int>(j.size());
        Eigen::MatrixXd out(rows, cols);
        for (int r = 0; r < rows; ++r) {
            const json& row = j[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<int>(row.size()) != cols)
                fail("config field \"" + display + "\" rows must each hold " +
                     std::to_string(cols) + " numbers");
            for (int c = 0; c < cols; ++c)
                out(r, c) = as_number(row[static_cast<std::size_t>(c)], display);
        }
        return out;
    }
    if (static_cast<int>(j.size()) != cols)
        fail("config field \"" + display + "\" must hold " + std::to_string(cols) +
             " numbers (one per observation time)");
    Eigen::MatrixXd out(1, cols);
    for (int c = 0; c < cols; ++c) out(0, c) = as_number(j[static_cast<std::size_t>(c)], display);
    return out;
}

// one entry per cell; each entry a number (dimension one) or an array of
// per-coordinate components
Eigen::MatrixXd cells_matrix(const json& j, const std::string& display, std::size_t cells) {
    if (!j.is_array() || j.size() != cells)
        fail("config field \"" + display + "\" must hold one entry per breakpoint cell (" +
             std::to_string(cells) + ")");
    const int dim = j.front().is_array() ? static_cast<int>(j.front().size()) : 1;
    if (dim < 1) fail("config field \"" + display + "\" entries must not be empty");
    Eigen::MatrixXd out(dim, static_cast<int>(cells));
    for (std::size_t c = 0; c < cells; ++c) {
        const json& cell = j[c];
        if (dim == 1 && cell.is_number()) {
            out(0, static_cast<int>(c)) = cell.get<double>();
            continue;
        }
        if (!cell.is_array() || static_cast<int>(cell.size()) != dim)
            fail("config field \"" + display + "\" entries must all have " +
                 std::to_string(dim) + " components");
        for (int r = 0; r < dim; ++r)
            out(r, static_cast<int>(c)) = as_number(cell[static_cast<std::size_t>(r)], display);
    }
    return out;
}

const char* hp_status_name(HpStatus s) {
    switch (s) {
        case HpStatus::holds: return "holds";
        case HpStatus::fails: return "fails";
        default: return "indeterminate";
    }
}

const char* verdict_name(MembershipVerdict v) {
    switch (v) {
        case MembershipVerdict::member: return "member";
        case MembershipVerdict::not_member: return "not-member";
        default: return "indeterminate";
    }
}

TailContinuation parse_continuation(const std::string& s, const std::string& display) {
    if (s == "power" || s == "power_law") return TailContinuation::power_law;
    if (s == "log-linear" || s == "log_linear") return TailContinuation::log_linear;
    if (s == "cutoff") return TailContinuation::cutoff;
    fail("config field \"" + display + "\" must be one of power, log-linear, cutoff");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) fail("config root must be a JSON object");
    ExperimentConfig cfg;
    cfg.raw = doc;
    const json* fam = find(doc, "family");
    if (!fam) fail("config is missing required field \"family\"");
    if (!fam->is_string()) fail("config field \"family\" must be a string");
    cfg.family = fam->get<std::string>();
    if (cfg.family != "deterministic" && cfg.family != "gamma" && cfg.family != "stable" &&
        cfg.family != "compound_poisson" && cfg.family != "log")
        fail("config field \"family\" must be one of deterministic, gamma, stable, "
             "compound_poisson, log");
    cfg.T = number_field(doc, "T", "T", 1.0);
    if (!(cfg.T > 0)) fail("config field \"T\" must be positive");
    cfg.kappa = number_field(doc, "kappa", "kappa", 0.0);
    cfg.mc.n = uint_field(doc, "n", "n", 100000);
    if (cfg.mc.n < 1000) fail("config field \"n\" must be at least 1000");
    cfg.mc.seed = uint_field(doc, "seed", "seed", 1);
    cfg.mc.gate = number_field(doc, "gate", "gate", 3.0);
    if (!(cfg.mc.gate > 0)) fail("config field \"gate\" must be positive");
    cfg.mc.retry_doubled = bool_field(doc, "retry", "retry", true);
    cfg.mc.workers = static_cast<int>(uint_field(doc, "workers", "workers", 0));
    cfg.override_preconditions =
        bool_field(doc, "override_preconditions", "override_preconditions", false);
    if (const json* out = find(doc, "out")) {
        if (!out->is_string()) fail("config field \"out\" must be a string path");
        cfg.out_path = out->get<std::string>();
    }
    if (const json* csv = find(doc, "csv")) {
        if (!csv->is_string()) fail("config field \"csv\" must be a string path");
        cfg.csv_path = csv->get<std::string>();
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        fail("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

BernsteinFunction config_bernstein(const ExperimentConfig& cfg) {
    const json& doc = cfg.raw;
    if (cfg.family == "deterministic") {
        const double c = number_field(doc, "c", "c", 1.0);
        if (!(c > 0)) fail("config field \"c\" must be positive");
        return BernsteinFunction::drift_only(c);
    }
    if (cfg.family == "gamma") {
        const double a = number_field(doc, "a", "a", 1.0);
        const double rate = number_field(doc, "rate", "rate", 1.0);
        if (!(a > 0)) fail("config field \"a\" must be positive");
        if (!(rate > 0)) fail("config field \"rate\" must be positive");
        return BernsteinFunction::gamma(a, rate);
    }
    if (cfg.family == "stable") {
        const double alpha = number_field(doc, "alpha", "alpha", std::nullopt);
        if (!(alpha > 0.0 && alpha < 1.0)) fail("config field \"alpha\" must lie in (0, 1)");
        return BernsteinFunction::stable(alpha);
    }
    if (cfg.family == "log") return BernsteinFunction::log_form();
    const json* atoms = find(doc, "atoms");
    if (!atoms) fail("config field \"atoms\" is required for the compound_poisson family");
    if (!atoms->is_array() || atoms->empty())
        fail("config field \"atoms\" must be a non-empty array of [position, weight] pairs");
    std::vector<std::pair<double, double>> pairs;
    for (const auto& e : *atoms) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            fail("config field \"atoms\" must be a non-empty array of [position, weight] pairs");
        pairs.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    const double drift = number_field(doc, "drift", "drift", 0.0);
    return BernsteinFunction::compound_poisson(std::move(pairs), drift);
}

SubordinatorModel config_model(const ExperimentConfig& cfg) {
    const json& doc = cfg.raw;
    if (cfg.family == "log")
        fail("config field \"family\": \"log\" defines a Bernstein function only and has "
             "no exact sampler; use it with phi, index or hp-check");
    if (cfg.family == "deterministic") {
        const double c = number_field(doc, "c", "c", 1.0);
        if (!(c > 0)) fail("config field \"c\" must be positive");
        return SubordinatorModel::deterministic(c, cfg.T);
    }
    if (cfg.family == "gamma") {
        const double a = number_field(doc, "a", "a", 1.0);
        const double rate = number_field(doc, "rate", "rate", 1.0);
        if (!(a > 0)) fail("config field \"a\" must be positive");
        if (!(rate > 0)) fail("config field \"rate\" must be positive");
        return SubordinatorModel::gamma(a, rate, cfg.T);
    }
    if (cfg.family == "stable") {
        const double alpha = number_field(doc, "alpha", "alpha", std::nullopt);
        if (!(alpha > 0.0 && alpha < 1.0)) fail("config field \"alpha\" must lie in (0, 1)");
        return SubordinatorModel::stable(alpha, cfg.T);
    }
    // compound_poisson: reuse the Bernstein parser for the atoms, then rebuild
    const BernsteinFunction bf = config_bernstein(cfg);
    return SubordinatorModel::compound_poisson(bf.jumps.atoms, bf.drift, cfg.T);
}

TailTable config_table(const ExperimentConfig& cfg) {
    const json* tt = find(cfg.raw, "tail_table");
    if (tt && !tt->is_object()) fail("config field \"tail_table\" must be an object");
    const json block = tt ? *tt : json::object();
    const std::string kind = string_field(block, "kind", "tail_table.kind", std::string("analytic"));
    if (kind != "analytic" && kind != "mc")
        fail("config field \"tail_table.kind\" must be \"analytic\" or \"mc\"");

    const SubordinatorModel model = config_model(cfg);

    std::string cont_default = cfg.family == "stable" ? "power" : "log-linear";
    const double exp_default = cfg.family == "stable" ? model.alpha : 1.0;
    const TailContinuation cont = parse_continuation(
        string_field(block, "continuation", "tail_table.continuation", cont_default),
        "tail_table.continuation");
    const double exponent =
        number_field(block, "exponent", "tail_table.exponent", exp_default);

    if (kind == "analytic") {
        if (cfg.family == "deterministic") return TailTable::flat_until(model.c * model.T);
        const std::vector<double> knots =
            find(block, "knots") ? number_array(*find(block, "knots"), "tail_table.knots")
                                : log_spaced(1e-3, 1e3, 241);
        // tabulate, stopping before the survival underflows to the denormal
        // range where its powers stop being usable
        const auto build = [&knots](const std::function<double(double)>& surv,
                                    TailContinuation c, double e) {
            std::vector<double> ts, ps;
            for (double t : knots) {
                const double p = surv(t);
                if (!(p >= 1e-300)) break;
                ts.push_back(t);
                ps.push_back(std::min(1.0, p));
            }
            if (ts.empty())
                fail("config field \"tail_table.knots\": the survival function underflows "
                     "at every knot; move the knots toward zero");
            return TailTable(std::move(ts), std::move(ps), c, e);
        };
        if (cfg.family == "gamma") {
            if (std::abs(model.a * model.T - 1.0) > 1e-12)
                fail("config field \"tail_table.kind\": the gamma family has a closed-form "
                     "survival only when a*T = 1; set kind to \"mc\"");
            const double rate = model.rate;
            return build([rate](double t) { return std::exp(-rate * t); },
                         TailContinuation::log_linear, 1.0);
        }
        if (cfg.family == "stable") {
            if (std::abs(model.alpha - 0.5) > 1e-12)
                fail("config field \"tail_table.kind\": the stable family has a closed-form "
                     "survival only at alpha = 0.5; set kind to \"mc\"");
            const double T = model.T;
            return build([T](double t) { return std::erf(T / (2.0 * std::sqrt(t))); },
                         TailContinuation::power_law, 0.5);
        }
        fail("config field \"tail_table.kind\": the " + cfg.family +
             " family has no closed-form survival; set kind to \"mc\"");
    }

    // Monte Carlo fit with monotone pooling, truncated at the first knot the
    // sample never reached
    std::vector<double> knots =
        find(block, "knots") ? number_array(*find(block, "knots"), "tail_table.knots")
                            : log_spaced(1e-2, 1e3, 51);
    const std::uint64_t n = uint_field(block, "n", "tail_table.n", 100000);
    if (n < 1000) fail("config field \"tail_table.n\" must be at least 1000");
    const std::uint64_t seed = mix64(cfg.mc.seed ^ 0x7461626cull);
    const TailEstimate est = tail_estimate(model, knots, n, seed);
    std::vector<double> ts, ps;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!(est.survival[i] > 0.0)) break;
        ts.push_back(knots[i]);
        ps.push_back(est.survival[i]);
    }
    if (ts.empty())
        fail("config field \"tail_table.knots\": the Monte Carlo fit found no mass at any "
             "knot; move the knots toward zero");
    return TailTable(std::move(ts), std::move(ps), cont, exponent, /*monotonize=*/true);
}

WeightedSpace config_space(const ExperimentConfig& cfg) {
    return WeightedSpace{config_table(cfg), cfg.kappa};
}

bool config_has(const ExperimentConfig& cfg, const char* key) {
    return find(cfg.raw, key) != nullptr;
}

ShiftFunction config_shift(const ExperimentConfig& cfg, const char* key) {
    const json* s = find(cfg.raw, key);
    if (!s) fail(std::string("config field \"") + key + "\" is required for this subcommand");
    if (!s->is_object()) fail(std::string("config field \"") + key + "\" must be an object");
    const std::string display(key);

    if (find(*s, "slope")) {
        const json& sl = *find(*s, "slope");
        Eigen::VectorXd v;
        if (sl.is_number()) {
            v.resize(1);
            v(0) = sl.get<double>();
        } else {
            const std::vector<double> comps = number_array(sl, display + ".slope");
            v.resize(static_cast<int>(comps.size()));
            for (std::size_t i = 0; i < comps.size(); ++i) v(static_cast<int>(i)) = comps[i];
        }
        const double until = number_field(*s, "until", display + ".until", kInf);
        if (!(until > 0)) fail("config field \"" + display + ".until\" must be positive");
        return ShiftFunction::constant_slope(v, until);
    }

    const json* bp = find(*s, "breakpoints");
    if (!bp) fail("config field \"" + display + ".breakpoints\" is required");
    if (!bp->is_array() || bp->empty())
        fail("config field \"" + display + ".breakpoints\" must be a non-empty array");
    std::vector<double> breakpoints;
    for (std::size_t i = 0; i < bp->size(); ++i) {
        const json& e = (*bp)[i];
        if (e.is_string() && e.get<std::string>() == "inf" && i + 1 == bp->size()) {
            breakpoints.push_back(kInf);
        } else {
            breakpoints.push_back(as_number(e, display + ".breakpoints"));
        }
    }
    const json* dv = find(*s, "derivatives");
    if (!dv) fail("config field \"" + display + ".derivatives\" is required");
    Eigen::MatrixXd m = cells_matrix(*dv, display + ".derivatives", breakpoints.size());
    if (const json* d = find(*s, "d")) {
        if (!d->is_number() || d->get<double>() != static_cast<double>(m.rows()))
            fail("config field \"" + display + ".d\" disagrees with the derivative entries");
    }
    return ShiftFunction(std::move(breakpoints), std::move(m));
}

CylinderFunction config_cylinder(const ExperimentConfig& cfg, const char* key) {
    const json* c = find(cfg.raw, key);
    if (!c) fail(std::string("config field \"") + key + "\" is required for this subcommand");
    if (!c->is_object()) fail(std::string("config field \"") + key + "\" must be an object");
    const std::string display(key);
    const std::string kernel =
        string_field(*c, "kernel", display + ".kernel", std::nullopt);
    const json* times_j = find(*c, "times");
    if (!times_j) fail("config field \"" + display + ".times\" is required");
    std::vector<double> times = number_array(*times_j, display + ".times");
    const int cols = static_cast<int>(times.size());

    if (kernel == "tanh") {
        const json* a = find(*c, "a");
        if (!a) fail("config field \"" + display + ".a\" is required for the tanh kernel");
        Eigen::MatrixXd coeff = matrix_field(*a, display + ".a", cols);
        const double beta = number_field(*c, "beta", display + ".beta", 0.0);
        return CylinderFunction::tanh_affine(std::move(times), std::move(coeff), beta);
    }
    if (kernel == "cosine") {
        const json* a = find(*c, "a");
        if (!a) fail("config field \"" + display + ".a\" is required for the cosine kernel");
        Eigen::MatrixXd coeff = matrix_field(*a, display + ".a", cols);
        const double beta = number_field(*c, "beta", display + ".beta", 0.0);
        return CylinderFunction::cosine(std::move(times), std::move(coeff), beta);
    }
    if (kernel == "bump") {
        const json* x0 = find(*c, "center");
        if (!x0) fail("config field \"" + display + ".center\" is required for the bump kernel");
        Eigen::MatrixXd centers = matrix_field(*x0, display + ".center", cols);
        const double width = number_field(*c, "width", display + ".width", 1.0);
        if (!(width > 0)) fail("config field \"" + display + ".width\" must be positive");
        return CylinderFunction::gaussian_bump(std::move(times), std::move(centers), width);
    }
    fail("config field \"" + display + ".kernel\" must be one of tanh, bump, cosine");
}

std::vector<double> config_grid(const ExperimentConfig& cfg, const char* key,
                                std::vector<double> fallback) {
    const json* g = find(cfg.raw, key);
    if (!g) return fallback;
    std::vector<double> out = number_array(*g, key);
    for (double v : out)
        if (!(v > 0) || !std::isfinite(v))
            fail(std::string("config field \"") + key + "\" entries must be positive numbers");
    return out;
}

double config_number(const ExperimentConfig& cfg, const char* key, double fallback) {
    return number_field(cfg.raw, key, key, fallback);
}

int config_int(const ExperimentConfig& cfg, const char* key, int fallback) {
    return static_cast<int>(
        uint_field(cfg.raw, key, key, static_cast<std::uint64_t>(fallback)));
}

json json_number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

json to_json(const MCResult& r) {
    return json{{"name", r.name},         {"estimate", json_number(r.estimate)},
                {"se", json_number(r.se)}, {"target", json_number(r.target)},
                {"n", r.n},               {"gate", r.gate},
                {"pass", r.pass},         {"retried", r.retried}};
}

json to_json(const MembershipReport& r) {
    json trace = json::array();
    for (const auto& [t, v] : r.doubling_trace) trace.push_back({json_number(t), json_number(v)});
    return json{{"verdict", verdict_name(r.verdict)},
                {"energy", json_number(r.energy)},
                {"borderline", r.borderline},
                {"doubling_trace", trace}};
}

json to_json(const QiReport& r) {
    return json{{"delta", to_json(r.delta)},
                {"mass", to_json(r.mass)},
                {"membership", to_json(r.membership)},
                {"pass", r.pass}};
}

json to_json(const IbpReport& r) {
    return json{{"delta", to_json(r.delta)},
                {"membership", to_json(r.membership)},
                {"pass", r.pass}};
}

json to_json(const HpReport& r) {
    json partials = json::array();
    for (double p : r.partials) partials.push_back(json_number(p));
    return json{{"status", hp_status_name(r.status)},
                {"moment", r.moment ? json_number(*r.moment) : json(nullptr)},
                {"closed_form_decision", r.closed_form_decision},
                {"partials", partials}};
}

json to_json(const IndexReport& r) {
    json trace = json::array();
    for (const auto& [rho, status] : r.moment_trace)
        trace.push_back({json_number(rho), hp_status_name(status)});
    return json{{"sigma0_limit", json_number(r.sigma0_limit)},
                {"sigma0_moment", json_number(r.sigma0_moment)},
                {"agreement_gap", json_number(r.agreement_gap)},
                {"moment_indeterminate", r.moment_indeterminate},
                {"slope_points", r.slope_pairs.size()},
                {"moment_trace", trace}};
}

json to_json(const EnergyReport& r) {
    json pre{{"hp2", to_json(r.pre.hp2)},
             {"sigma0", json_number(r.pre.sigma0)},
             {"sigma0_limit", json_number(r.pre.sigma0_limit)},
             {"sigma0_moment", json_number(r.pre.sigma0_moment)},
             {"kappa_ceiling", json_number(r.pre.kappa_ceiling)},
             {"classical_ok", r.pre.classical_ok},
             {"weighted_ok", r.pre.weighted_ok}};
    return json{{"preconditions", pre},
                {"overridden", r.overridden},
                {"classical", r.classical ? to_json(*r.classical) : json(nullptr)},
                {"weighted", r.weighted ? to_json(*r.weighted) : json(nullptr)},
                {"pass", r.pass}};
}

json to_json(const TailCheckReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back(json{{"t", json_number(row.t)},
                            {"empirical", json_number(row.empirical)},
                            {"se", json_number(row.se)},
                            {"bound", json_number(row.bound)},
                            {"pass", row.pass}});
    json slope_ts = json::array();
    for (double t : r.slope_ts) slope_ts.push_back(json_number(t));
    return json{{"rows", rows},
                {"slope", r.slope ? json_number(*r.slope) : json(nullptr)},
                {"slope_ts", slope_ts},
                {"n", r.n},
                {"retried", r.retried},
                {"rows_pass", r.rows_pass},
                {"slope_pass", r.slope_pass},
                {"pass", r.pass}};
}

json to_json(const SeparationReport& r) {
    json blocks = json::array();
    for (const auto& b : r.blocks)
        blocks.push_back(json{{"m", b.m},
                              {"t_lo", json_number(b.t_lo)},
                              {"t_hi", json_number(b.t_hi)},
                              {"energy_lo", json_number(b.energy_lo)},
                              {"energy_hi", json_number(b.energy_hi)},
                              {"slope", json_number(b.slope)},
                              {"contrib_lo", json_number(b.contrib_lo)},
                              {"contrib_hi", json_number(b.contrib_hi)},
                              {"contributing", b.contributing}});
    json partial = json::array();
    for (double p : r.partial_lo) partial.push_back(json_number(p));
    json bp = json::array();
    for (double t : r.shift.breakpoints()) bp.push_back(json_number(t));
    json dv = json::array();
    for (int c = 0; c < r.shift.cells(); ++c) {
        json cell = json::array();
        for (int d = 0; d < r.shift.dim(); ++d) cell.push_back(json_number(r.shift.derivatives()(d, c)));
        dv.push_back(cell);
    }
    return json{{"kappa_lo", json_number(r.kappa_lo)},
                {"kappa_hi", json_number(r.kappa_hi)},
                {"blocks", blocks},
                {"partial_lo", partial},
                {"energy_hi_total", json_number(r.energy_hi_total)},
                {"energy_hi_ceiling", json_number(r.energy_hi_ceiling)},
                {"separates", r.separates},
                {"bounded_above", r.bounded_above},
                {"shift", json{{"breakpoints", bp}, {"derivatives", dv}}}};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string csv_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    line += '\n';
    return line;
}

}  // namespace subpath
