// Exact joint sampling of the time-changed Brownian observations together
// with the Wiener integral and energy of a shift direction, the shift
// density, and the shifted observation vector.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "subpath/rng.hpp"
#include "subpath/shift_space.hpp"
#include "subpath/subordinator.hpp"

namespace subpath {

// One replica of the observed system.  The Brownian motion is read at the
// clock values ell_i = S_{t_i}; the stochastic integral I runs over the full
// clock range [0, S_T].
struct PathSample {
    std::vector<double> obs_times;  // observation grid on the outer time axis
    std::vector<double> ell;        // clock values at the observations
    double ell_T = 0.0;             // clock value at the horizon
    Eigen::MatrixXd w_obs;          // dim x k, Brownian values at ell
    double wiener = 0.0;            // I = integral <h', dW> over [0, S_T]
    double energy = 0.0;            // Q = integral |h'|^2 dt over [0, S_T]
};

// Draws (S, W, I) exactly: clock increments from the model's transition law,
// then per interval and coordinate the pair (Brownian increment, integral
// increment) from its joint Gaussian law, conditioning I on the observed W.
PathSample sample_joint(const SubordinatorModel& model,
                        const std::vector<double>& obs_times, const ShiftFunction& h,
                        SplitMix64& gen);

struct DensityValue {
    double log_z = 0.0;
    double z = 1.0;
    bool overflowed = false;  // exp hit the double range; z clamped
};

// Z = exp(I - Q/2), the change-of-measure factor attached to the shift.
DensityValue density(const PathSample& sample);

// Observations of the shifted path: column i gains h(ell_i).
Eigen::MatrixXd shifted_observations(const PathSample& sample, const ShiftFunction& h);

}  // namespace subpath
