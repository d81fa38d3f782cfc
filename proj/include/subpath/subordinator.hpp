// Non-decreasing Levy processes driven by the Bernstein-function families,
// terminal-time sampling, survival tables for P(S_T >= t), and the
// Laplace-transform upper bound on that survival function.
#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "subpath/bernstein.hpp"
#include "subpath/common.hpp"
#include "subpath/rng.hpp"

namespace subpath {

enum class SubKind { stable, gamma_like, compound_poisson, deterministic };

// A time-changed clock S with E exp(-u S_t) = exp(-t phi(u)), frozen at a
// fixed horizon T.  Each factory pairs the exact transition law used for
// sampling with the matching Bernstein function used for analytic bounds.
struct SubordinatorModel {
    SubKind kind = SubKind::deterministic;
    BernsteinFunction bf = BernsteinFunction::drift_only(1.0);
    double T = 1.0;

    double alpha = 0.0;                            // stable
    double a = 0.0, rate = 0.0;                    // gamma_like
    std::vector<std::pair<double, double>> atoms;  // compound_poisson (x, weight)
    double drift = 0.0;                            // compound_poisson
    double c = 1.0;                                // deterministic slope

    static SubordinatorModel stable(double alpha, double T);
    static SubordinatorModel gamma(double a, double rate, double T);
    static SubordinatorModel compound_poisson(std::vector<std::pair<double, double>> atoms,
                                              double drift, double T);
    static SubordinatorModel deterministic(double c, double T);
};

// Essential supremum of S_T: c*T for the deterministic clock, infinite for
// every genuinely random family here.
double ess_sup_time(const SubordinatorModel& model);

// One exact draw of an increment S_{t+dt} - S_t (stationary, independent).
double sample_increment(const SubordinatorModel& model, double dt, SplitMix64& gen);

// One exact draw of S_T.
double sample_terminal(const SubordinatorModel& model, SplitMix64& gen);

// How survival is continued past the last tabulated knot.
enum class TailContinuation { power_law, log_linear, cutoff };

// Piecewise description of t -> P(S_T >= t): exact log-linear interpolation
// between knots, a configurable continuation beyond the last knot, and exact
// closed-form integrals of integer or fractional powers of the table.
class TailTable {
  public:
    // knots: strictly increasing positive times; values: survival there,
    // in (0, 1], non-increasing (enforced by a pool-adjacent-violators pass
    // when `monotonize` is set).
    TailTable(std::vector<double> knots, std::vector<double> values,
              TailContinuation continuation, double power_exponent = 1.0,
              bool monotonize = false);

    // An exactly flat table equal to one on [0, end], zero after: the
    // deterministic clock.
    static TailTable flat_until(double end);

    // Tabulate an analytic survival function on the given knots.
    static TailTable from_survival(const std::function<double(double)>& surv,
                                   const std::vector<double>& knots,
                                   TailContinuation continuation,
                                   double power_exponent = 1.0);

    double survival(double t) const;

    // [survival(t)]^kappa with the convention 0^0 = 1.
    double weight(double t, double kappa) const;

    // Exact integral of [survival]^kappa over [t0, t1]; t1 may be infinite.
    // Returns +infinity when the continuation makes the integral diverge.
    // Throws DegenerateWeightError when kappa < 0 and the range crosses a
    // region of zero survival.
    double weight_integral(double t0, double t1, double kappa) const;

    // Smallest t with survival(t) <= q, for q in (0, 1]; +infinity when the
    // continuation never reaches q.
    double inverse_survival(double q) const;

    double support_end() const { return support_end_; }
    double power_exponent() const { return power_exponent_; }
    TailContinuation continuation() const { return continuation_; }
    const std::vector<double>& knots() const { return ts_; }
    const std::vector<double>& values() const { return ps_; }

  private:
    std::vector<double> ts_;
    std::vector<double> ps_;
    TailContinuation continuation_;
    double power_exponent_;
    double support_end_ = kInf;  // finite only in cutoff mode
    double tail_slope_ = 0.0;    // log-linear continuation rate (<= 0)
};

// Monte Carlo survival estimates over a grid of times.
struct TailEstimate {
    std::vector<double> ts;
    std::vector<double> survival;  // count / n
    std::vector<double> se;        // binomial standard error
    std::size_t n = 0;
};

TailEstimate tail_estimate(const SubordinatorModel& model, const std::vector<double>& ts,
                           std::size_t n, std::uint64_t seed);

// min(1, 2T * integral_0^inf phi(u/t) e^{-u} du): a distribution-free bound
// on P(S_T >= t).  Computed by adaptive quadrature and cross-checked against
// a fixed Gauss-Laguerre rule; a gross disagreement throws NumericError.
double tail_upper_bound(const BernsteinFunction& bf, double T, double t);

}  // namespace subpath
