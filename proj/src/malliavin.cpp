#include "subpath/malliavin.hpp"

#include <cmath>

namespace subpath {

CylinderFunction::CylinderFunction(KernelKind kind, std::vector<double> obs_times,
                                   Eigen::MatrixXd par, double scalar)
    : kind_(kind), obs_times_(std::move(obs_times)), par_(std::move(par)), scalar_(scalar) {
    if (obs_times_.empty() ||
        static_cast<std::size_t>(par_.cols()) != obs_times_.size() || par_.rows() < 1)
        throw ArgumentError("CylinderFunction: need one parameter column per observation");
    for (std::size_t i = 0; i < obs_times_.size(); ++i)
        if (!(obs_times_[i] > 0) || (i > 0 && !(obs_times_[i] > obs_times_[i - 1])))
            throw ArgumentError("CylinderFunction: observation times must be increasing");
    if (kind_ == KernelKind::gaussian_bump && !(scalar_ > 0))
        throw ArgumentError("CylinderFunction: bump width must be positive");
}

CylinderFunction CylinderFunction::tanh_affine(std::vector<double> obs_times,
                                               Eigen::MatrixXd coeff, double offset) {
    return CylinderFunction(KernelKind::tanh_affine, std::move(obs_times),
                            std::move(coeff), offset);
}

CylinderFunction CylinderFunction::gaussian_bump(std::vector<double> obs_times,
                                                 Eigen::MatrixXd centers, double width) {
    return CylinderFunction(KernelKind::gaussian_bump, std::move(obs_times),
                            std::move(centers), width);
}

CylinderFunction CylinderFunction::cosine(std::vector<double> obs_times,
                                          Eigen::MatrixXd coeff, double offset) {
    return CylinderFunction(KernelKind::cosine, std::move(obs_times), std::move(coeff),
                            offset);
}

namespace {

void check_shape(const CylinderFunction& f, const Eigen::MatrixXd& w) {
    if (w.rows() != f.dim() || w.cols() != f.observations())
        throw ArgumentError("CylinderFunction: observation matrix has the wrong shape");
}

}  // namespace

double CylinderFunction::eval(const Eigen::MatrixXd& w) const {
    check_shape(*this, w);
    switch (kind_) {
        case KernelKind::tanh_affine:
            return std::tanh(par_.cwiseProduct(w).sum() + scalar_);
        case KernelKind::gaussian_bump:
            return std::exp(-(w - par_).squaredNorm() / (2.0 * scalar_ * scalar_));
        case KernelKind::cosine:
            return std::cos(par_.cwiseProduct(w).sum() + scalar_);
    }
    throw ArgumentError("CylinderFunction: unknown kernel");
}

Eigen::MatrixXd CylinderFunction::grad(const Eigen::MatrixXd& w) const {
    check_shape(*this, w);
    switch (kind_) {
        case KernelKind::tanh_affine: {
            const double t = std::tanh(par_.cwiseProduct(w).sum() + scalar_);
            return par_ * (1.0 - t * t);
        }
        case KernelKind::gaussian_bump: {
            const double v =
                std::exp(-(w - par_).squaredNorm() / (2.0 * scalar_ * scalar_));
            return (par_ - w) * (v / (scalar_ * scalar_));
        }
        case KernelKind::cosine: {
            const double s = std::sin(par_.cwiseProduct(w).sum() + scalar_);
            return par_ * (-s);
        }
    }
    throw ArgumentError("CylinderFunction: unknown kernel");
}

Eigen::VectorXd CylinderFunction::grad_sup_bounds() const {
    Eigen::VectorXd out(observations());
    switch (kind_) {
        case KernelKind::tanh_affine:
        case KernelKind::cosine:
            for (int i = 0; i < observations(); ++i) out(i) = par_.col(i).norm();
            return out;
        case KernelKind::gaussian_bump:
            // sup_y |y| exp(-y^2 / (2 s^2)) / s^2 = exp(-1/2) / s
            out.setConstant(std::exp(-0.5) / scalar_);
            return out;
    }
    throw ArgumentError("CylinderFunction: unknown kernel");
}

namespace {

void check_sample(const CylinderFunction& f, const PathSample& sample) {
    if (sample.obs_times != f.obs_times())
        throw ArgumentError("CylinderFunction: sample was drawn on a different grid");
}

}  // namespace

double directional_derivative(const CylinderFunction& f, const PathSample& sample,
                              const ShiftFunction& h) {
    check_sample(f, sample);
    if (h.dim() != f.dim())
        throw ArgumentError("directional_derivative: dimension mismatch");
    const Eigen::MatrixXd g = f.grad(sample.w_obs);
    double acc = 0.0;
    for (std::size_t i = 0; i < sample.ell.size(); ++i)
        acc += g.col(i).dot(h.value_at(sample.ell[i]));
    return acc;
}

GradientElement gradient(const CylinderFunction& f, const PathSample& sample,
                         double kappa) {
    check_sample(f, sample);
    GradientElement out;
    out.kappa = kappa;
    out.ell = sample.ell;
    out.gammas = f.grad(sample.w_obs);
    return out;
}

double pairing(const GradientElement& g, const ShiftFunction& h) {
    if (h.dim() != g.gammas.rows())
        throw ArgumentError("pairing: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < g.ell.size(); ++i)
        acc += g.gammas.col(i).dot(h.value_at(g.ell[i]));
    return acc;
}

double pairing_expanded(const GradientElement& g, const ShiftFunction& h) {
    if (h.dim() != g.gammas.rows())
        throw ArgumentError("pairing_expanded: dimension mismatch");
    // integrate (sum_{i: ell_i > t} gamma_i) . h'(t) piece by piece over the
    // refinement of the clock values and the shift cells
    std::vector<double> bs{0.0};
    for (double e : g.ell) bs.push_back(e);
    for (double b : h.breakpoints())
        if (std::isfinite(b) && (g.ell.empty() || b < g.ell.back())) bs.push_back(b);
    std::sort(bs.begin(), bs.end());
    bs.erase(std::unique(bs.begin(), bs.end()), bs.end());

    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < bs.size(); ++s) {
        const double a = bs[s], b = bs[s + 1];
        if (!(b > a)) continue;
        const double probe = 0.5 * (a + b);
        Eigen::VectorXd active = Eigen::VectorXd::Zero(g.gammas.rows());
        for (std::size_t i = 0; i < g.ell.size(); ++i)
            if (g.ell[i] > probe) active += g.gammas.col(i);
        acc += active.dot(h.derivative_at(probe)) * (b - a);
    }
    return acc;
}

double grad_norm_sq(const GradientElement& g, const TailTable& table) {
    const std::size_t k = g.ell.size();
    // A(x) = integral_0^x [survival]^{-kappa}; throws past the support for
    // kappa > 0, which is exactly the degenerate case
    std::vector<double> big_a(k);
    for (std::size_t i = 0; i < k; ++i)
        big_a[i] = table.weight_integral(0.0, g.ell[i], -g.kappa);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            acc += g.gammas.col(i).dot(g.gammas.col(j)) * big_a[std::min(i, j)];
    return acc;
}

double grad_norm_sq_increments(const GradientElement& g) {
    if (g.kappa != 0.0)
        throw ArgumentError("grad_norm_sq_increments: only defined for the flat weight");
    double acc = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < g.ell.size(); ++i) {
        Eigen::VectorXd tail_sum = Eigen::VectorXd::Zero(g.gammas.rows());
        for (std::size_t j = i; j < g.ell.size(); ++j) tail_sum += g.gammas.col(j);
        acc += (g.ell[i] - prev) * tail_sum.squaredNorm();
        prev = g.ell[i];
    }
    return acc;
}

double adjoint_apply(const CylinderFunction& g, const PathSample& sample,
                     const ShiftFunction& h) {
    return -directional_derivative(g, sample, h) + g.eval(sample.w_obs) * sample.wiener;
}

}  // namespace subpath
