#pragma once

// Bernstein functions phi(u) = b u + integral_(0,inf) (1 - e^{-ux}) nu(dx)
// of a driftless-or-not subordinator, their jump measures, the moment
// conditions integral_1^inf x^{p/2} nu(dx) < inf, and the lower index
//
//   sigma0 = sup{ a >= 0 : phi(u)/u^a -> 0 as u -> 0 },
//
// estimated two independent ways (log-log slope near zero, and the
// largest finite jump moment) so the two can be cross-checked.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subpath/common.hpp"
#include "subpath/quadrature.hpp"

namespace subpath {

enum class MeasureKind { none, power_law, gamma_like, atoms, density };

// Jump measure nu on (0, inf). Kept as a plain tagged struct: only the
// fields of the active kind are meaningful, factories validate the
// integrability condition integral (x ^ 1) nu(dx) < inf on construction.
struct LevyMeasure {
    MeasureKind kind = MeasureKind::none;

    // power_law: nu(dx) = coeff * x^{-1-alpha} dx, alpha in (0,1)
    double alpha = 0.0;
    double coeff = 0.0;

    // gamma_like: nu(dx) = a * x^{-1} e^{-rate x} dx
    double a = 1.0;
    double rate = 1.0;

    // atoms: finitely many (position, weight), positions > 0, weights >= 0
    std::vector<std::pair<double, double>> atoms;

    // density: callable on (0, x_max]; x_max may be kInf. tail_order, when
    // known, states nu(x) ~ C x^{-1-tail_order} as x -> inf and unlocks
    // closed-form moment decisions.
    std::function<double(double)> density;
    double x_max = kInf;
    std::optional<double> tail_order;

    static LevyMeasure none();
    static LevyMeasure power_law_jumps(double coeff, double alpha);
    // normalised so that the resulting phi is exactly u^alpha: coeff =
    // alpha / Gamma(1 - alpha)
    static LevyMeasure stable_jumps(double alpha);
    static LevyMeasure gamma_jumps(double a = 1.0, double rate = 1.0);
    static LevyMeasure finite_atoms(std::vector<std::pair<double, double>> atoms);
    static LevyMeasure from_density(std::function<double(double)> density, double x_max = kInf,
                                    std::optional<double> tail_order = std::nullopt);
    // jump density of u log(1 + 1/u): (1 - (1+x)e^{-x}) / x^2 on (0, inf),
    // tail order 1
    static LevyMeasure log_bernstein_jumps();

    bool is_zero() const { return kind == MeasureKind::none; }
};

struct BernsteinFunction {
    double drift = 0.0;  // b >= 0
    LevyMeasure jumps;
    // exact phi when the family has one; quadrature stays available for
    // cross-checks either way
    std::function<double(double)> closed_form;
    std::string label;

    static BernsteinFunction stable(double alpha);
    static BernsteinFunction gamma(double a = 1.0, double rate = 1.0);
    static BernsteinFunction drift_only(double b);
    static BernsteinFunction compound_poisson(std::vector<std::pair<double, double>> atoms,
                                              double drift = 0.0);
    static BernsteinFunction log_form();  // u log(1 + 1/u)
    static BernsteinFunction from_parts(double drift, LevyMeasure jumps,
                                        std::function<double(double)> closed_form = nullptr,
                                        std::string label = "custom");
};

// phi(u) for u >= 0 (phi(0) = 0). Uses the closed form when present.
double phi_eval(const BernsteinFunction& bf, double u);

// Always evaluates b u + integral (1-e^{-ux}) nu(dx) by quadrature/summation,
// even when a closed form exists. Throws NumericError when the integral
// cannot be pinned down.
double phi_eval_quadrature(const BernsteinFunction& bf, double u);

enum class HpStatus { holds, fails, indeterminate };

struct HpReport {
    HpStatus status = HpStatus::indeterminate;
    std::optional<double> moment;  // integral_1^inf x^{p/2} nu(dx) when finite
    bool closed_form_decision = false;
    std::vector<double> partials;  // doubling-interval partial sums (quadrature path)
};

// Moment condition: integral_1^inf x^{p/2} nu(dx) < inf. Trivially holds
// for p <= 0.
HpReport hp_check(const BernsteinFunction& bf, double p);

// phi'(0+) = b + integral x nu(dx); +inf when the first moment diverges
// (that is exactly hp_check at p = 2).
double phi_prime_at_zero(const BernsteinFunction& bf);

struct IndexGrid {
    double u_min = 1e-8;
    double u_max = 1e-2;
    int points = 50;
    double bisect_tol = 1e-3;
};

struct IndexReport {
    double sigma0_limit = 0.0;   // log-log least-squares slope, clamped to [0,1]
    double sigma0_moment = 0.0;  // sup{rho in [0,1] : hp_check(2 rho) holds}
    double agreement_gap = 0.0;
    bool moment_indeterminate = false;
    std::vector<std::pair<double, double>> slope_pairs;    // (u, phi(u))
    std::vector<std::pair<double, HpStatus>> moment_trace; // probed (rho, verdict)
};

IndexReport index_sigma0(const BernsteinFunction& bf, const IndexGrid& grid = {});

}  // namespace subpath
