// Cylinder test functions of the observed path, their directional
// derivatives along shift directions, the weighted-space gradient
// representative, and the adjoint used by the integration-by-parts pairing.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "subpath/path_sim.hpp"
#include "subpath/shift_space.hpp"

namespace subpath {

enum class KernelKind { tanh_affine, gaussian_bump, cosine };

// F = f(W at the observation clock values) for a smooth bounded f with
// bounded first derivatives; the three kernels below cover a sign-varying
// saturating family, a localized bump, and an oscillating family whose
// zero-coefficient member is the constant function.
class CylinderFunction {
  public:
    static CylinderFunction tanh_affine(std::vector<double> obs_times,
                                        Eigen::MatrixXd coeff, double offset);
    static CylinderFunction gaussian_bump(std::vector<double> obs_times,
                                          Eigen::MatrixXd centers, double width);
    static CylinderFunction cosine(std::vector<double> obs_times, Eigen::MatrixXd coeff,
                                   double offset);

    double eval(const Eigen::MatrixXd& w) const;
    // same layout as w: column i holds the partial gradient at observation i
    Eigen::MatrixXd grad(const Eigen::MatrixXd& w) const;
    // per-observation uniform bound on the partial gradient norm
    Eigen::VectorXd grad_sup_bounds() const;

    KernelKind kind() const { return kind_; }
    const std::vector<double>& obs_times() const { return obs_times_; }
    int dim() const { return static_cast<int>(par_.rows()); }
    int observations() const { return static_cast<int>(par_.cols()); }

  private:
    CylinderFunction(KernelKind kind, std::vector<double> obs_times, Eigen::MatrixXd par,
                     double scalar);
    KernelKind kind_;
    std::vector<double> obs_times_;
    Eigen::MatrixXd par_;  // coefficients or centers, dim x k
    double scalar_;        // offset or width
};

// d/de F(W + e * h at the clock values) at e = 0, evaluated on one sample.
double directional_derivative(const CylinderFunction& f, const PathSample& sample,
                              const ShiftFunction& h);

// The gradient of F at a sample, represented by the partial gradients pinned
// at the sampled clock values; kappa selects which weighted geometry the
// norm below refers to.
struct GradientElement {
    double kappa = 0.0;
    std::vector<double> ell;
    Eigen::MatrixXd gammas;  // dim x k
};

GradientElement gradient(const CylinderFunction& f, const PathSample& sample,
                         double kappa);

// <grad F, h> in the weighted geometry; the weight powers cancel, leaving
// the telescoped sum of <gamma_i, h(ell_i)>.
double pairing(const GradientElement& g, const ShiftFunction& h);

// the same pairing evaluated segment by segment without telescoping,
// as an independent arithmetic route
double pairing_expanded(const GradientElement& g, const ShiftFunction& h);

// |grad F|^2 in the kappa geometry: sum_ij <gamma_i, gamma_j> A(ell_min)
// with A(x) the integral of [survival]^{-kappa} up to x.  Throws
// DegenerateWeightError when an observation sits past the survival support
// and kappa > 0.
double grad_norm_sq(const GradientElement& g, const TailTable& table);

// the unweighted (kappa = 0) norm through forward increments, an
// independent route that must agree with grad_norm_sq on a flat-weight table
double grad_norm_sq_increments(const GradientElement& g);

// Per-sample adjoint value: -D_h G + G * I, where I is the Wiener integral
// carried by the sample.  The sample must have been drawn with the same h
// for the pairing E[G D_h F] = E[F adjoint] to hold.
double adjoint_apply(const CylinderFunction& g, const PathSample& sample,
                     const ShiftFunction& h);

}  // namespace subpath
