#include "subpath/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <queue>

namespace subpath::quad {

namespace {

// Kronrod-15 abscissae/weights on [-1,1] plus the embedded Gauss-7 weights
// (QUADPACK's qk15 constants). Even-indexed Kronrod nodes are the Gauss
// nodes.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

}  // namespace

PanelResult gk15(const Integrand& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double fsum = f(c - x) + f(c + x);
        kron += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    return {kron, std::abs(kron - gauss)};
}

double integrate_adaptive(const Integrand& f, double a, double b,
                          double rel_tol, double abs_tol, int max_panels) {
    if (!(b >= a)) throw ArgumentError("integrate_adaptive: b < a");
    if (a == b) return 0.0;

    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    std::priority_queue<Panel> heap;
    PanelResult first = gk15(f, a, b);
    heap.push({a, b, first.value, first.error});
    double total = first.value;
    double total_err = first.error;
    int panels = 1;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (panels >= max_panels)
            throw NumericError("integrate_adaptive: panel budget exhausted", total_err);
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b)
            throw NumericError("integrate_adaptive: interval collapsed below machine resolution",
                               total_err);
        PanelResult left = gk15(f, worst.a, mid);
        PanelResult right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.value, left.error});
        heap.push({mid, worst.b, right.value, right.error});
        ++panels;
    }
    return total;
}

namespace {

// Shared body of the two dyadic drivers. Panel widths double (or halve)
// geometrically, so a power-law integrand produces exactly geometric panel
// sums. Fast-decaying tails (ratio <= 0.9) are summed out directly; slow
// power decay is resummed geometrically, but only once the ratio has been
// steady to 1e-8 over six panels -- for a pure power that happens almost
// immediately and the resummation is then exact, for anything murkier we
// refuse to guess and report indeterminate.
IntegralResult run_dyadic(const Integrand& f,
                          const std::function<std::pair<double, double>(int)>& panel_of,
                          int max_panels, double rel_tol) {
    IntegralResult out;
    double prev = -1.0, prev_ratio = -1.0;
    int flat_streak = 0;     // consecutive non-decaying panels
    int tiny_streak = 0;     // consecutive negligible panels
    int stable_streak = 0;   // consecutive panels with a steady decay ratio
    double last_ratio = 0.0;
    for (int k = 0; k < max_panels; ++k) {
        auto [a, b] = panel_of(k);
        if (!(b > a) || !std::isfinite(b)) break;
        double v;
        try {
            v = integrate_adaptive(f, a, b, 1e-13, 0.0, 400);
        } catch (const NumericError&) {
            // fall back to the raw panel estimate; the driver-level checks
            // below still bound the damage
            v = gk15(f, a, b).value;
        }
        out.value += v;
        out.partials.push_back(out.value);

        const double scale = std::max(out.value, 1e-300);
        if (v <= rel_tol * 1e-2 * scale && (out.value > 0.0 || k >= 40)) {
            if (++tiny_streak >= 2) {
                // residual tail is at most a small multiple of the last panel
                out.error = 10.0 * v + rel_tol * scale;
                out.status = QuadStatus::converged;
                return out;
            }
        } else {
            tiny_streak = 0;
        }

        if (prev > 0.0 && v > 0.0) {
            const double ratio = v / prev;
            if (ratio >= 1.0 - 1e-6) {
                if (++flat_streak >= 8) {
                    out.status = QuadStatus::divergent;
                    out.value = kInf;
                    return out;
                }
            } else {
                flat_streak = 0;
            }
            if (ratio > 0.9 && ratio < 1.0 - 1e-6) {
                if (prev_ratio > 0.0 && std::abs(ratio - prev_ratio) <= 1e-8 * ratio)
                    ++stable_streak;
                else
                    stable_streak = 0;
                if (stable_streak >= 6) {
                    const double tail = v * ratio / (1.0 - ratio);
                    out.value += tail;
                    out.error = tail * 1e-7 / (1.0 - ratio) + v * 1e-10;
                    out.status = QuadStatus::converged;
                    return out;
                }
            } else {
                stable_streak = 0;
            }
            prev_ratio = ratio;
            last_ratio = ratio;
        }
        prev = v;
    }
    out.status = QuadStatus::indeterminate;
    out.error = std::abs(prev) / std::max(1e-12, 1.0 - std::min(last_ratio, 0.999999));
    return out;
}

}  // namespace

IntegralResult integrate_down_to_zero(const Integrand& f, double x_hi, double rel_tol) {
    if (!(x_hi > 0)) throw ArgumentError("integrate_down_to_zero: x_hi must be > 0");
    // 1100 halvings put the panel edge below the smallest subnormal; an
    // integrand that still contributes there is divergent at zero.
    return run_dyadic(
        f,
        [x_hi](int k) {
            return std::pair<double, double>(x_hi * std::exp2(-(k + 1)), x_hi * std::exp2(-k));
        },
        1100, rel_tol);
}

IntegralResult integrate_to_infinity(const Integrand& f, double x_lo, double rel_tol) {
    if (!(x_lo > 0)) throw ArgumentError("integrate_to_infinity: x_lo must be > 0");
    return run_dyadic(
        f,
        [x_lo](int k) {
            return std::pair<double, double>(x_lo * std::exp2(k), x_lo * std::exp2(k + 1));
        },
        900, rel_tol);
}

namespace {

struct Laguerre {
    std::vector<double> nodes, weights;
};

// Golub-Welsch for the weight e^{-x} on (0, inf): monic recurrence has
// a_k = 2k+1 and b_k = k^2, so the Jacobi matrix is tridiagonal with
// diagonal a_k and off-diagonal k. Eigenvalues are the nodes; the squared
// first eigenvector components (times mu_0 = 1) are the weights.
Laguerre build_laguerre(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        J(k, k) = 2.0 * k + 1.0;
        if (k + 1 < n) {
            J(k, k + 1) = k + 1.0;
            J(k + 1, k) = k + 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Laguerre out;
    out.nodes.resize(n);
    out.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        out.nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        out.weights[k] = v0 * v0;
    }
    return out;
}

const Laguerre& laguerre64() {
    static const Laguerre table = build_laguerre(64);
    return table;
}

}  // namespace

const std::vector<double>& laguerre_nodes() { return laguerre64().nodes; }
const std::vector<double>& laguerre_weights() { return laguerre64().weights; }

double gauss_laguerre(const Integrand& f) {
    const Laguerre& t = laguerre64();
    double acc = 0.0;
    for (size_t i = 0; i < t.nodes.size(); ++i) acc += t.weights[i] * f(t.nodes[i]);
    return acc;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ArgumentError("ls_slope: need two same-length vectors");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw ArgumentError("ls_slope: degenerate abscissae");
    return sxy / sxx;
}

}  // namespace subpath::quad
