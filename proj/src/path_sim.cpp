#include "subpath/path_sim.hpp"

#include <cmath>

namespace subpath {

PathSample sample_joint(const SubordinatorModel& model,
                        const std::vector<double>& obs_times, const ShiftFunction& h,
                        SplitMix64& gen) {
    if (obs_times.empty())
        throw ArgumentError("sample_joint: need at least one observation time");
    for (std::size_t i = 0; i < obs_times.size(); ++i) {
        if (!(obs_times[i] > 0) || (i > 0 && !(obs_times[i] > obs_times[i - 1])))
            throw ArgumentError("sample_joint: observation times must be increasing and positive");
    }
    if (!(obs_times.back() <= model.T))
        throw ArgumentError("sample_joint: observations must not pass the horizon");

    const int d = h.dim();
    const std::size_t k = obs_times.size();
    PathSample out;
    out.obs_times = obs_times;
    out.ell.resize(k);
    out.w_obs = Eigen::MatrixXd::Zero(d, k);

    // clock first: independent increments over the observation grid
    double t_prev = 0.0, s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        s += sample_increment(model, obs_times[i] - t_prev, gen);
        out.ell[i] = s;
        t_prev = obs_times[i];
    }
    out.ell_T = s + sample_increment(model, model.T - t_prev, gen);

    // then, interval by interval, the Brownian increment and the integral
    // increment from their exact joint Gaussian law
    double lo = 0.0;
    Eigen::VectorXd w_prev = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i <= k; ++i) {
        const double hi = i < k ? out.ell[i] : out.ell_T;
        const double delta = hi - lo;
        const Eigen::VectorXd mean_cross = h.derivative_integral(lo, hi);
        const Eigen::VectorXd var_int = h.derivative_sq_integral(lo, hi);
        for (int c = 0; c < d; ++c) {
            double dw = 0.0, di = 0.0;
            if (delta > 0) {
                dw = std::sqrt(delta) * normal_draw(gen);
                double cond_var = var_int(c) - mean_cross(c) * mean_cross(c) / delta;
                if (cond_var < 0) {
                    // exact cancellation up to rounding when h' is constant
                    // on the interval; anything worse is a real error
                    if (cond_var < -1e-12 * std::max(1.0, var_int(c)))
                        throw NumericError("sample_joint: negative conditional variance",
                                           -cond_var);
                    cond_var = 0.0;
                }
                di = mean_cross(c) / delta * dw +
                     std::sqrt(cond_var) * normal_draw(gen);
            }
            out.wiener += di;
            if (i < k) out.w_obs(c, i) = w_prev(c) + dw;
            if (i < k) w_prev(c) = out.w_obs(c, i);
        }
        out.energy += var_int.sum();
        lo = hi;
    }
    return out;
}

DensityValue density(const PathSample& sample) {
    DensityValue out;
    out.log_z = sample.wiener - 0.5 * sample.energy;
    out.z = std::exp(out.log_z);
    if (!std::isfinite(out.z)) {
        out.overflowed = true;
        out.z = kInf;
    }
    return out;
}

Eigen::MatrixXd shifted_observations(const PathSample& sample, const ShiftFunction& h) {
    Eigen::MatrixXd out = sample.w_obs;
    for (std::size_t i = 0; i < sample.ell.size(); ++i)
        out.col(i) += h.value_at(sample.ell[i]);
    return out;
}

}  // namespace subpath
