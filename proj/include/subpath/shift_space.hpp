// Piecewise-linear shift directions, the survival-weighted energy spaces
// they live in, an exchange identity linking path-time and clock-time
// energies, and a block construction separating neighbouring weights.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "subpath/common.hpp"
#include "subpath/subordinator.hpp"

namespace subpath {

// A function [0, inf) -> R^dim that starts at zero and has a constant
// derivative on each cell of a breakpoint grid; the derivative is zero past
// the last breakpoint unless that breakpoint is infinite.
class ShiftFunction {
  public:
    // breakpoints: strictly increasing, positive; the last entry may be
    // +infinity.  derivatives: one column per cell, dim rows.
    ShiftFunction(std::vector<double> breakpoints, Eigen::MatrixXd derivatives);

    static ShiftFunction constant_slope(const Eigen::VectorXd& slope,
                                        double until = kInf);

    int dim() const { return static_cast<int>(derivatives_.rows()); }
    int cells() const { return static_cast<int>(derivatives_.cols()); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const Eigen::MatrixXd& derivatives() const { return derivatives_; }

    Eigen::VectorXd derivative_at(double t) const;
    Eigen::VectorXd value_at(double t) const;

    // componentwise integral of the derivative and of its square over [a, b]
    Eigen::VectorXd derivative_integral(double a, double b) const;
    Eigen::VectorXd derivative_sq_integral(double a, double b) const;

  private:
    std::vector<double> breakpoints_;
    Eigen::MatrixXd derivatives_;
};

// The energy space indexed by kappa: derivatives are square-integrated
// against [survival]^kappa.
struct WeightedSpace {
    TailTable table;
    double kappa = 0.0;
};

// integral over [0, upper) of <g'(t), h'(t)> [survival(t)]^kappa dt, exact
// piecewise; +/-infinity when a divergent piece carries a signed coefficient.
double inner_product(const ShiftFunction& g, const ShiftFunction& h,
                     const WeightedSpace& space, double upper = kInf);
double norm_sq(const ShiftFunction& h, const WeightedSpace& space,
               double upper = kInf);

enum class MembershipVerdict { member, not_member, indeterminate };

struct MembershipReport {
    MembershipVerdict verdict = MembershipVerdict::indeterminate;
    double energy = kInf;  // squared norm; +infinity when divergent
    bool borderline = false;
    // cumulative energy at doubling upper limits, for the report
    std::vector<std::pair<double, double>> doubling_trace;
};

MembershipReport membership(const ShiftFunction& h, const WeightedSpace& space);

// Checks E integral_0^{S_T /\ upper} <g', h'> w^{kappa-1} dt
//      = integral_0^{upper} <g', h'> w^{kappa} dt
// by Monte Carlo on the left and exact integration on the right.
struct IdentityReport {
    double lhs_estimate = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    std::size_t n = 0;
    double z = 4.0;
    bool pass = false;
};

IdentityReport expectation_identity_check(const ShiftFunction& g, const ShiftFunction& h,
                                          const WeightedSpace& space,
                                          const SubordinatorModel& model, std::size_t n,
                                          std::uint64_t seed, double upper = kInf,
                                          double z = 4.0);

// One cell of the separating construction: on each block the
// (kappa2 - kappa1)-power of survival falls between 1/(m+1)^3 and 1/m^3 and
// the slope is sized so the kappa1 energy of the block is exactly m while
// the kappa2 energy stays below 1/m^2.
struct SeparationBlock {
    int m = 0;
    double t_lo = 0.0, t_hi = 0.0;
    double energy_lo = 0.0;  // kappa1-weight mass of the block
    double energy_hi = 0.0;  // kappa2-weight mass of the block
    double slope = 0.0;
    double contrib_lo = 0.0;  // kappa1 energy contribution (= m when contributing)
    double contrib_hi = 0.0;  // kappa2 energy contribution (<= 1/m^2)
    bool contributing = false;
};

struct SeparationReport {
    double kappa_lo = 0.0, kappa_hi = 0.0;
    std::vector<SeparationBlock> blocks;
    std::vector<double> partial_lo;  // running kappa1 energy after each block
    double energy_hi_total = 0.0;
    double energy_hi_ceiling = 0.0;  // pi^2/6
    // limit verdicts for the untruncated construction
    bool separates = false;     // every block contributed its full weight
    bool bounded_above = true;  // each contribution <= 1/m^2
    ShiftFunction shift{{kInf}, Eigen::MatrixXd::Zero(1, 1)};
};

SeparationReport ggvv_construct(const WeightedSpace& lower_space, double kappa_hi,
                                int max_blocks);

}  // namespace subpath
