#pragma once

// Quadrature toolbox: one Gauss-Kronrod 7/15 panel, a globally adaptive
// driver for finite intervals, dyadic drivers for the improper ends
// (0, x] and [x, inf) with geometric tail extrapolation and an explicit
// divergence verdict, and 64-node Gauss-Laguerre built at startup via
// Golub-Welsch.
//
// The dyadic drivers assume a nonnegative integrand. That covers every
// use in this project ((1-e^{-ux}) against a Levy density, survival
// powers, moment tails) and is what makes the growth test meaningful:
// contributions over [2^k x, 2^{k+1} x] that refuse to decay can only
// mean divergence.

#include <functional>
#include <vector>

#include "subpath/common.hpp"

namespace subpath::quad {

enum class QuadStatus { converged, divergent, indeterminate };

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;  // absolute error estimate
    QuadStatus status = QuadStatus::converged;
    // running partial sums, one entry per dyadic panel (improper drivers)
    std::vector<double> partials;
};

using Integrand = std::function<double(double)>;

struct PanelResult {
    double value;
    double error;
};

PanelResult gk15(const Integrand& f, double a, double b);

// Globally adaptive over [a, b]; splits the worst panel until the summed
// error estimate meets max(abs_tol, rel_tol * |I|). Throws NumericError
// when the panel budget runs out first.
double integrate_adaptive(const Integrand& f, double a, double b,
                          double rel_tol = 1e-12, double abs_tol = 0.0,
                          int max_panels = 4000);

// integral over (0, x_hi] for f >= 0 with an integrable (or not)
// singularity at zero; dyadic panels [x_hi 2^{-k-1}, x_hi 2^{-k}].
IntegralResult integrate_down_to_zero(const Integrand& f, double x_hi,
                                      double rel_tol = 1e-12);

// integral over [x_lo, inf) for f >= 0; dyadic panels [x_lo 2^k, x_lo 2^{k+1}].
// status: divergent when panel contributions fail to decay (relative 1e-6)
// over eight consecutive doublings, indeterminate when the panel budget is
// exhausted with the tail still undecided.
IntegralResult integrate_to_infinity(const Integrand& f, double x_lo,
                                     double rel_tol = 1e-12);

// nodes/weights for integral_0^inf f(u) e^{-u} du ~= sum_i w_i f(x_i)
const std::vector<double>& laguerre_nodes();
const std::vector<double>& laguerre_weights();
double gauss_laguerre(const Integrand& f);

// least-squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace subpath::quad
