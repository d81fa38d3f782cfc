#include "subpath/subordinator.hpp"

#include <algorithm>
#include <cmath>

#include "subpath/quadrature.hpp"

namespace subpath {

namespace {

constexpr std::uint64_t kPurposeTailMc = 0x7461696cull;

using quad::QuadStatus;

}  // namespace

SubordinatorModel SubordinatorModel::stable(double alpha, double T) {
    if (!(T > 0)) throw ArgumentError("SubordinatorModel: T must be positive");
    SubordinatorModel m;
    m.kind = SubKind::stable;
    m.bf = BernsteinFunction::stable(alpha);  // validates alpha
    m.T = T;
    m.alpha = alpha;
    return m;
}

SubordinatorModel SubordinatorModel::gamma(double a, double rate, double T) {
    if (!(T > 0)) throw ArgumentError("SubordinatorModel: T must be positive");
    SubordinatorModel m;
    m.kind = SubKind::gamma_like;
    m.bf = BernsteinFunction::gamma(a, rate);
    m.T = T;
    m.a = a;
    m.rate = rate;
    return m;
}

SubordinatorModel SubordinatorModel::compound_poisson(
    std::vector<std::pair<double, double>> atoms, double drift, double T) {
    if (!(T > 0)) throw ArgumentError("SubordinatorModel: T must be positive");
    SubordinatorModel m;
    m.kind = SubKind::compound_poisson;
    m.bf = BernsteinFunction::compound_poisson(atoms, drift);
    m.T = T;
    m.atoms = std::move(atoms);
    m.drift = drift;
    return m;
}

SubordinatorModel SubordinatorModel::deterministic(double c, double T) {
    if (!(T > 0)) throw ArgumentError("SubordinatorModel: T must be positive");
    SubordinatorModel m;
    m.kind = SubKind::deterministic;
    m.bf = BernsteinFunction::drift_only(c);  // validates c > 0
    m.T = T;
    m.c = c;
    return m;
}

double ess_sup_time(const SubordinatorModel& model) {
    return model.kind == SubKind::deterministic ? model.c * model.T : kInf;
}

double sample_increment(const SubordinatorModel& model, double dt, SplitMix64& gen) {
    if (!(dt >= 0)) throw ArgumentError("sample_increment: dt must be >= 0");
    if (dt == 0) return 0.0;
    switch (model.kind) {
        case SubKind::stable:
            // self-similarity: the increment has the law of dt^{1/alpha} S_1
            return std::pow(dt, 1.0 / model.alpha) *
                   positive_stable_draw(gen, model.alpha);
        case SubKind::gamma_like:
            return gamma_draw(gen, model.a * dt, 1.0 / model.rate);
        case SubKind::compound_poisson: {
            double s = model.drift * dt;
            for (auto& [x, w] : model.atoms)
                s += x * static_cast<double>(poisson_draw(gen, w * dt));
            return s;
        }
        case SubKind::deterministic:
            return model.c * dt;
    }
    throw ArgumentError("sample_increment: unknown model kind");
}

double sample_terminal(const SubordinatorModel& model, SplitMix64& gen) {
    return sample_increment(model, model.T, gen);
}

TailTable::TailTable(std::vector<double> knots, std::vector<double> values,
                     TailContinuation continuation, double power_exponent,
                     bool monotonize)
    : ts_(std::move(knots)),
      ps_(std::move(values)),
      continuation_(continuation),
      power_exponent_(power_exponent) {
    if (ts_.empty() || ts_.size() != ps_.size())
        throw ArgumentError("TailTable: need matching non-empty knot/value arrays");
    for (std::size_t i = 0; i < ts_.size(); ++i) {
        if (!(ts_[i] > 0) || (i > 0 && !(ts_[i] > ts_[i - 1])))
            throw ArgumentError("TailTable: knots must be positive and strictly increasing");
        if (!(ps_[i] > 0) || ps_[i] > 1.0)
            throw ArgumentError("TailTable: survival values must lie in (0, 1]");
    }
    if (monotonize) {
        // pool adjacent violators: the closest non-increasing sequence
        std::vector<double> sum, cnt;
        for (double v : ps_) {
            sum.push_back(v);
            cnt.push_back(1.0);
            while (sum.size() > 1 &&
                   sum[sum.size() - 2] / cnt[cnt.size() - 2] < sum.back() / cnt.back()) {
                sum[sum.size() - 2] += sum.back();
                cnt[cnt.size() - 2] += cnt.back();
                sum.pop_back();
                cnt.pop_back();
            }
        }
        std::size_t k = 0;
        for (std::size_t b = 0; b < sum.size(); ++b)
            for (double j = 0; j < cnt[b]; ++j) ps_[k++] = sum[b] / cnt[b];
    } else {
        for (std::size_t i = 1; i < ps_.size(); ++i)
            if (ps_[i] > ps_[i - 1] * (1.0 + 1e-12))
                throw ArgumentError("TailTable: survival values must be non-increasing");
    }
    switch (continuation_) {
        case TailContinuation::cutoff:
            support_end_ = ts_.back();
            break;
        case TailContinuation::power_law:
            if (!(power_exponent_ > 0))
                throw ArgumentError("TailTable: power continuation needs a positive exponent");
            break;
        case TailContinuation::log_linear: {
            const std::size_t n = ts_.size();
            const double t_prev = n >= 2 ? ts_[n - 2] : 0.0;
            const double p_prev = n >= 2 ? ps_[n - 2] : 1.0;
            tail_slope_ = std::log(ps_.back() / p_prev) / (ts_.back() - t_prev);
            break;
        }
    }
}

TailTable TailTable::flat_until(double end) {
    if (!(end > 0)) throw ArgumentError("TailTable: support end must be positive");
    return TailTable({end}, {1.0}, TailContinuation::cutoff);
}

TailTable TailTable::from_survival(const std::function<double(double)>& surv,
                                   const std::vector<double>& knots,
                                   TailContinuation continuation, double power_exponent) {
    std::vector<double> vals(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) vals[i] = surv(knots[i]);
    return TailTable(knots, std::move(vals), continuation, power_exponent);
}

double TailTable::survival(double t) const {
    if (t <= 0) return 1.0;
    if (t <= ts_.front()) {
        // exact when the first tabulated value is one
        return std::exp(std::log(ps_.front()) * t / ts_.front());
    }
    if (t <= ts_.back()) {
        const auto it = std::lower_bound(ts_.begin(), ts_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - ts_.begin());
        const double s = std::log(ps_[i] / ps_[i - 1]) / (ts_[i] - ts_[i - 1]);
        return ps_[i - 1] * std::exp(s * (t - ts_[i - 1]));
    }
    switch (continuation_) {
        case TailContinuation::cutoff:
            return 0.0;
        case TailContinuation::power_law:
            return ps_.back() * std::pow(t / ts_.back(), -power_exponent_);
        case TailContinuation::log_linear:
            return ps_.back() * std::exp(tail_slope_ * (t - ts_.back()));
    }
    return 0.0;
}

double TailTable::weight(double t, double kappa) const {
    if (kappa == 0.0) return 1.0;  // 0^0 = 1 by convention
    const double s = survival(t);
    if (s == 0.0) {
        if (kappa < 0)
            throw DegenerateWeightError("TailTable: negative power of zero survival");
        return 0.0;
    }
    return std::pow(s, kappa);
}

namespace {

// integral of p0^kappa e^{kappa s (t - t0)} over [lo, hi] inside one
// log-linear piece anchored at (t0, p0)
double exp_piece_integral(double p0, double s, double t0, double lo, double hi,
                          double kappa) {
    const double w0 = std::pow(p0, kappa);
    if (s == 0.0) return w0 * (hi - lo);
    const double ks = kappa * s;
    return w0 * (std::exp(ks * (hi - t0)) - std::exp(ks * (lo - t0))) / ks;
}

}  // namespace

double TailTable::weight_integral(double t0, double t1, double kappa) const {
    if (!(t0 >= 0) || !(t1 >= t0))
        throw ArgumentError("TailTable: weight integral needs 0 <= t0 <= t1");
    if (t0 == t1) return 0.0;
    if (kappa == 0.0) return std::isfinite(t1) ? t1 - t0 : kInf;

    double acc = 0.0;
    // leading piece from (0, 1) to the first knot
    {
        const double lo = t0, hi = std::min(t1, ts_.front());
        if (hi > lo) {
            const double s = std::log(ps_.front()) / ts_.front();
            acc += exp_piece_integral(1.0, s, 0.0, lo, hi, kappa);
        }
    }
    for (std::size_t i = 0; i + 1 < ts_.size(); ++i) {
        const double lo = std::max(t0, ts_[i]), hi = std::min(t1, ts_[i + 1]);
        if (hi > lo) {
            const double s = std::log(ps_[i + 1] / ps_[i]) / (ts_[i + 1] - ts_[i]);
            acc += exp_piece_integral(ps_[i], s, ts_[i], lo, hi, kappa);
        }
    }
    const double lo = std::max(t0, ts_.back());
    if (!(t1 > lo)) return acc;
    switch (continuation_) {
        case TailContinuation::cutoff:
            if (kappa < 0)
                throw DegenerateWeightError(
                    "TailTable: negative power of zero survival in integral");
            return acc;  // zero weight past the support
        case TailContinuation::log_linear: {
            if (std::isfinite(t1))
                return acc + exp_piece_integral(ps_.back(), tail_slope_, ts_.back(), lo,
                                                t1, kappa);
            const double ks = kappa * tail_slope_;
            if (!(ks < 0)) return kInf;
            const double w_lo =
                std::pow(ps_.back(), kappa) * std::exp(ks * (lo - ts_.back()));
            return acc - w_lo / ks;
        }
        case TailContinuation::power_law: {
            // [survival]^kappa = p_n^kappa (t / t_n)^{-beta}
            const double beta = kappa * power_exponent_;
            const double wn = std::pow(ps_.back(), kappa);
            const double tn = ts_.back();
            if (!std::isfinite(t1)) {
                if (beta <= 1.0) return kInf;
                return acc + wn * tn * std::pow(lo / tn, 1.0 - beta) / (beta - 1.0);
            }
            if (beta == 1.0) return acc + wn * tn * std::log(t1 / lo);
            return acc + wn * tn *
                             (std::pow(t1 / tn, 1.0 - beta) - std::pow(lo / tn, 1.0 - beta)) /
                             (1.0 - beta);
        }
    }
    return acc;
}

double TailTable::inverse_survival(double q) const {
    if (!(q > 0) || q > 1.0)
        throw ArgumentError("TailTable: inverse survival needs q in (0, 1]");
    if (q >= 1.0) return 0.0;
    if (q >= ps_.front()) {
        // inside the leading piece from (0, 1) down to the first knot
        const double s = std::log(ps_.front()) / ts_.front();
        return s == 0.0 ? ts_.front() : std::log(q) / s;
    }
    for (std::size_t i = 0; i + 1 < ts_.size(); ++i) {
        if (q >= ps_[i + 1]) {
            const double s = std::log(ps_[i + 1] / ps_[i]) / (ts_[i + 1] - ts_[i]);
            return s == 0.0 ? ts_[i + 1] : ts_[i] + std::log(q / ps_[i]) / s;
        }
    }
    switch (continuation_) {
        case TailContinuation::cutoff:
            return support_end_;
        case TailContinuation::power_law:
            return ts_.back() * std::pow(ps_.back() / q, 1.0 / power_exponent_);
        case TailContinuation::log_linear:
            if (!(tail_slope_ < 0)) return kInf;
            return ts_.back() + std::log(q / ps_.back()) / tail_slope_;
    }
    return kInf;
}

TailEstimate tail_estimate(const SubordinatorModel& model, const std::vector<double>& ts,
                           std::size_t n, std::uint64_t seed) {
    if (ts.empty() || n == 0)
        throw ArgumentError("tail_estimate: need a non-empty grid and n > 0");
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (!(ts[i] >= 0) || (i > 0 && !(ts[i] > ts[i - 1])))
            throw ArgumentError("tail_estimate: grid must be non-negative and increasing");
    std::vector<std::size_t> counts(ts.size(), 0);
    for (std::size_t r = 0; r < n; ++r) {
        auto gen = replica_stream(seed, r, kPurposeTailMc);
        const double s = sample_terminal(model, gen);
        for (std::size_t i = 0; i < ts.size(); ++i)
            if (s >= ts[i]) ++counts[i];
    }
    TailEstimate out;
    out.ts = ts;
    out.n = n;
    out.survival.resize(ts.size());
    out.se.resize(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double p = static_cast<double>(counts[i]) / static_cast<double>(n);
        out.survival[i] = p;
        out.se[i] = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    }
    return out;
}

double tail_upper_bound(const BernsteinFunction& bf, double T, double t) {
    if (!(T > 0) || !(t > 0))
        throw ArgumentError("tail_upper_bound: T and t must be positive");
    auto g = [&](double u) { return phi_eval(bf, u / t) * std::exp(-u); };
    auto low = quad::integrate_down_to_zero(g, 1.0);
    if (low.status != QuadStatus::converged)
        throw NumericError("tail_upper_bound: inner integral did not converge", low.error);
    auto high = quad::integrate_to_infinity(g, 1.0);
    if (high.status != QuadStatus::converged)
        throw NumericError("tail_upper_bound: tail integral did not converge", high.error);
    const double laplace = low.value + high.value;

    // independent sanity check with a fixed-node rule
    double gl = 0.0;
    const auto& nodes = quad::laguerre_nodes();
    const auto& weights = quad::laguerre_weights();
    for (std::size_t i = 0; i < nodes.size(); ++i)
        gl += weights[i] * phi_eval(bf, nodes[i] / t);
    // the fixed rule converges only algebraically for fractional powers, so
    // this guards against gross errors, not the last digits
    if (std::abs(gl - laplace) > 5e-3 * (1.0 + std::abs(laplace)))
        throw NumericError("tail_upper_bound: quadrature cross-check disagrees",
                           std::abs(gl - laplace));

    return std::min(1.0, 2.0 * T * laplace);
}

}  // namespace subpath
