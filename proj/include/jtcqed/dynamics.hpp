#pragma once

// Lindblad dynamics: Liouvillian construction, propagation, steady state and
// two-time correlations through the quantum regression rule.
//
// Vectorisation is column-major, vec(A X B) = (B^T kron A) vec(X), so the dense
// superoperator of
//     L(X) = K X + X K^dagger + sum_c c X c^dagger,   K = -iH - 1/2 sum_c c^dagger c
// is  I kron K + conj(K) kron I + sum_c conj(c) kron c.
// Time stepping works on X directly and never forms that matrix; it is built on
// demand for the steady-state solve and the exponential path only.

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jtcqed/errors.hpp"
#include "jtcqed/expm.hpp"
#include "jtcqed/hilbert.hpp"

namespace jtcqed {

/// Rates in units of the mode-1 frequency. Defaults are the balanced-dissipation point.
struct DissipationParams {
    double kappa1 = 0.001;
    double kappa2 = 0.001;
    double gamma = 0.001;
    double gamma_phi = 0.01;
    double n_th = 0.15;

    void validate() const {
        for (double v : {kappa1, kappa2, gamma, gamma_phi, n_th}) {
            if (!std::isfinite(v)) throw ArgumentError("dissipation parameters must be finite");
            if (v < 0.0) throw ArgumentError("dissipation rates and n_th must be nonnegative");
        }
    }
};

struct Tolerances {
    double rtol = 1e-8;
    double atol = 1e-10;
};

namespace detail {

/// Plain complex product; the library operator routes through a NaN-recovering
/// runtime call that dominates the jump-term loop.
inline Complex mul(Complex a, Complex b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace detail

class Liouvillian {
public:
    Liouvillian(QOperator hamiltonian, std::vector<QOperator> collapse)
        : space_(hamiltonian.space()), h_(std::move(hamiltonian)), collapse_(std::move(collapse)) {
        if (!h_.hermitian()) throw ValidationError("Liouvillian needs a Hermitian Hamiltonian");
        k_ = -kI * h_.matrix();
        for (const QOperator& c : collapse_) {
            require_same_space(space_, c.space());
            k_ -= 0.5 * (c.matrix().adjoint() * c.matrix());
            jumps_.push_back(make_jump(c.matrix()));
        }
        k_adj_ = k_.adjoint();
    }

    const SpaceSpec& space() const noexcept { return space_; }
    const QOperator& hamiltonian() const noexcept { return h_; }
    const std::vector<QOperator>& collapse_operators() const noexcept { return collapse_; }
    Index dim() const noexcept { return space_.total_dim(); }

    /// Rates this Liouvillian was built from, when it came from build_liouvillian.
    const std::optional<DissipationParams>& dissipation() const noexcept { return dissipation_; }
    void set_dissipation(const DissipationParams& d) { dissipation_ = d; }

    /// L(X) for an arbitrary square X (not necessarily a state).
    template <class Derived>
    void apply(const Eigen::MatrixBase<Derived>& x, Eigen::Ref<Matrix> out, Matrix& scratch) const {
        out.noalias() = k_ * x;
        out.noalias() += x * k_adj_;
        for (const Jump& jump : jumps_) {
            if (jump.monomial) {
                // At most one entry per row and column: c X c^dagger touches nnz^2 elements.
                for (const Entry& q : jump.entries) {
                    const Complex cq = std::conj(q.value);
                    for (const Entry& p : jump.entries)
                        out(p.row, q.row) += detail::mul(detail::mul(p.value, cq), x(p.col, q.col));
                }
            } else {
                scratch.noalias() = jump.dense * x;
                out.noalias() += scratch * jump.dense.adjoint();
            }
        }
    }

    Matrix apply(const Matrix& x) const {
        Matrix out(x.rows(), x.cols()), scratch(x.rows(), x.cols());
        apply(x, out, scratch);
        return out;
    }

    /// Dense superoperator of side dim()^2 acting on column-major vec(X).
    Matrix superoperator() const {
        const Index n = dim();
        const Matrix kc = k_.conjugate();
        Matrix s = Matrix::Zero(n * n, n * n);
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k)
                for (Index i = 0; i < n; ++i) s(i + n * j, k + n * j) += k_(i, k);
        for (Index j = 0; j < n; ++j)
            for (Index l = 0; l < n; ++l)
                for (Index i = 0; i < n; ++i) s(i + n * j, i + n * l) += kc(j, l);
        for (const Jump& jump : jumps_)
            for (const Entry& b : jump.entries)
                for (const Entry& a : jump.entries)
                    s(a.row + n * b.row, a.col + n * b.col) += std::conj(b.value) * a.value;
        return s;
    }

private:
    struct Entry {
        Index row, col;
        Complex value;
    };
    struct Jump {
        std::vector<Entry> entries;
        bool monomial = true;
        Matrix dense;
    };

    static Jump make_jump(const Matrix& c) {
        Jump j;
        const Index n = c.rows();
        std::vector<int> per_row(n, 0);
        for (Index col = 0; col < n; ++col) {
            int in_col = 0;
            for (Index row = 0; row < n; ++row)
                if (c(row, col) != Complex{}) {
                    j.entries.push_back({row, col, c(row, col)});
                    if (++in_col > 1 || ++per_row[row] > 1) j.monomial = false;
                }
        }
        if (!j.monomial) j.dense = c;
        return j;
    }

    SpaceSpec space_;
    QOperator h_;
    std::vector<QOperator> collapse_;
    std::vector<Jump> jumps_;
    Matrix k_;
    Matrix k_adj_;
    std::optional<DissipationParams> dissipation_{};
};

/// Thermal cavity channels on every mode, qubit decay and dephasing on the qubit
/// when one is present. Modes beyond the second reuse kappa2.
inline Liouvillian build_liouvillian(const QOperator& h, const DissipationParams& d) {
    d.validate();
    const SpaceSpec& s = h.space();
    if (s.mode_count() > 2 || s.qubit_count() > 1)
        throw ArgumentError("Liouvillian supports up to two modes and one qubit, got " + s.describe());
    if (!h.hermitian()) throw ValidationError("Liouvillian needs a Hermitian Hamiltonian");

    std::vector<QOperator> cs;
    for (int m = 0; m < s.mode_count(); ++m) {
        const double kappa = m == 0 ? d.kappa1 : d.kappa2;
        const QOperator a = annihilation(s, m);
        if ((1.0 + d.n_th) * kappa > 0.0) cs.push_back(std::sqrt((1.0 + d.n_th) * kappa) * a);
        if (d.n_th * kappa > 0.0) cs.push_back(std::sqrt(d.n_th * kappa) * a.adjoint());
    }
    if (s.qubit_count() == 1) {
        if (d.gamma > 0.0) cs.push_back(std::sqrt(d.gamma) * qubit_lowering(s, 0));
        if (d.gamma_phi > 0.0) cs.push_back(std::sqrt(d.gamma_phi / 2.0) * pauli(s, Axis::z, 0));
    }
    Liouvillian L(h, std::move(cs));
    L.set_dissipation(d);
    return L;
}

/// Called once per requested output time with the propagated matrix.
using PropagationObserver = std::function<void(std::size_t index, double t, const Matrix& x)>;

namespace detail {

inline void require_time_grid(const std::vector<double>& times) {
    if (times.empty()) throw ArgumentError("time grid is empty");
    if (!std::isfinite(times.front()) || times.front() < 0.0) throw ArgumentError("times must start at t >= 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]) || !std::isfinite(times[i]))
            throw ArgumentError("times must be finite and strictly increasing");
}

}  // namespace detail

/// Adaptive Runge-Kutta-Fehlberg 7(8) on X(t), starting at t = 0.
inline void propagate_adaptive(const Liouvillian& L, const Matrix& x0, const std::vector<double>& times,
                               const PropagationObserver& observe, const Tolerances& tol = {}) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<Complex>;

    detail::require_time_grid(times);
    const Index n = L.dim();
    if (x0.rows() != n || x0.cols() != n) throw ArgumentError("initial matrix does not match Liouvillian");

    Matrix scratch(n, n);
    auto rhs = [&](const State& x, State& dxdt, double) {
        dxdt.resize(x.size());
        Eigen::Map<const Matrix> xm(x.data(), n, n);
        Eigen::Map<Matrix> dm(dxdt.data(), n, n);
        L.apply(xm, dm, scratch);
    };

    auto stepper = odeint::make_controlled(tol.atol, tol.rtol, odeint::runge_kutta_fehlberg78<State>());
    State x(x0.data(), x0.data() + x0.size());
    double t = 0.0;
    double dt = std::min(0.05, times.back() > 0.0 ? times.back() : 0.05);
    Matrix out(n, n);

    for (std::size_t idx = 0; idx < times.size(); ++idx) {
        const double target = times[idx];
        while (t < target) {
            const double remaining = target - t;
            const bool clamped = dt >= remaining;
            const double natural = dt;
            double step = clamped ? remaining : dt;
            const double t_before = t;
            if (stepper.try_step(rhs, x, t, step) == odeint::success) {
                if (clamped) {
                    t = target;  // absorb rounding in t_before + remaining
                    dt = natural;
                } else {
                    dt = step;
                }
            } else {
                dt = step;
                if (dt < 1e-12 * std::max(1.0, std::abs(t_before))) {
                    char msg[160];
                    std::snprintf(msg, sizeof msg,
                                  "adaptive step size collapsed to %.3g at t = %.6g; use the exponential propagation path",
                                  dt, t_before);
                    throw StiffnessError(msg);
                }
            }
        }
        out = Eigen::Map<const Matrix>(x.data(), n, n);
        observe(idx, target, out);
    }
}

namespace detail {

/// Restores tr(E x) = tr(x) on a propagator of side n^2. The Pade step leaves
/// the unit eigenvalue of the trace direction about one ulp off, and squaring
/// raises that error to the power 2^s; pinned at every stage it stays at rounding.
inline void pin_trace(Matrix& e, Index n) {
    for (Index j = 0; j < e.cols(); ++j) {
        Complex sum = 0.0;
        for (Index i = 0; i < n; ++i) sum += e(i * (n + 1), j);
        const Complex deficit = ((j % (n + 1) == 0) ? 1.0 : 0.0) - sum;
        for (Index i = 0; i < n; ++i) e(i * (n + 1), j) += deficit / static_cast<double>(n);
    }
}

}  // namespace detail

/// Exact propagation by the dense superoperator exponential. One exponential is
/// computed per distinct interval length, so uniform grids cost a single expm.
inline void propagate_exact(const Liouvillian& L, const Matrix& x0, const std::vector<double>& times,
                            const PropagationObserver& observe) {
    detail::require_time_grid(times);
    const Index n = L.dim();
    if (x0.rows() != n || x0.cols() != n) throw ArgumentError("initial matrix does not match Liouvillian");

    const Matrix s = L.superoperator();
    std::map<double, Matrix> cache;
    Vector v = Eigen::Map<const Vector>(x0.data(), n * n);
    double t = 0.0;
    Matrix out(n, n);
    for (std::size_t idx = 0; idx < times.size(); ++idx) {
        const double h = times[idx] - t;
        if (h > 0.0) {
            auto it = cache.find(h);
            if (it == cache.end()) it = cache.emplace(h, expm(s * h, [n](Matrix& e) { detail::pin_trace(e, n); })).first;
            v = it->second * v;
        }
        t = times[idx];
        out = Eigen::Map<const Matrix>(v.data(), n, n);
        observe(idx, t, out);
    }
}

enum class PropagationMethod { adaptive, exact };

struct EvolveOptions {
    PropagationMethod method = PropagationMethod::adaptive;
    Tolerances tolerances{};
    std::vector<QOperator> observables{};  ///< expectation values recorded at every time
    bool keep_states = true;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;                ///< empty unless keep_states
    std::vector<std::vector<Complex>> expectations;   ///< [observable][time]
    double max_trace_drift = 0.0;
};

inline void propagate(const Liouvillian& L, const Matrix& x0, const std::vector<double>& times,
                      const PropagationObserver& observe, PropagationMethod method, const Tolerances& tol) {
    if (method == PropagationMethod::exact)
        propagate_exact(L, x0, times, observe);
    else
        propagate_adaptive(L, x0, times, observe, tol);
}

/// rho(t) at each requested time. States are Hermitised before validation; the
/// trace is left untouched so drift stays observable.
inline Trajectory evolve(const Liouvillian& L, const DensityMatrix& rho0, const std::vector<double>& times,
                         const EvolveOptions& opt = {}) {
    require_same_space(L.space(), rho0.space());
    for (const QOperator& o : opt.observables) require_same_space(L.space(), o.space());

    Trajectory tr;
    tr.times = times;
    tr.expectations.assign(opt.observables.size(), std::vector<Complex>(times.size()));
    if (opt.keep_states) tr.states.reserve(times.size());

    propagate(
        L, rho0.matrix(), times,
        [&](std::size_t idx, double, const Matrix& x) {
            const Matrix herm = 0.5 * (x + x.adjoint());
            tr.max_trace_drift = std::max(tr.max_trace_drift, std::abs(herm.trace() - 1.0));
            for (std::size_t o = 0; o < opt.observables.size(); ++o)
                tr.expectations[o][idx] = trace_product(opt.observables[o].matrix(), herm);
            if (opt.keep_states) tr.states.push_back(DensityMatrix::propagated(L.space(), herm));
        },
        opt.method, opt.tolerances);
    return tr;
}

/// Unique stationary state from the trace-row-replaced kernel equation.
inline DensityMatrix steady_state(const Liouvillian& L) {
    const Index n = L.dim();
    const Index n2 = n * n;
    Matrix s = L.superoperator();
    s.row(0).setZero();
    for (Index i = 0; i < n; ++i) s(0, i * (n + 1)) = 1.0;
    Vector rhs = Vector::Zero(n2);
    rhs(0) = 1.0;

    Eigen::PartialPivLU<Matrix> lu(s);
    const double rcond = lu.rcond();
    if (!(rcond >= 1e-13))
        throw DegenerateSteadyStateError("Liouvillian kernel is not one-dimensional (reciprocal condition " +
                                         std::to_string(rcond) + ")");
    Vector v = lu.solve(rhs);
    v += lu.solve(rhs - s * v);

    Matrix rho = Eigen::Map<const Matrix>(v.data(), n, n);
    rho = 0.5 * (rho + rho.adjoint());
    const double residual = max_abs(L.apply(rho));
    if (residual > 1e-10)
        throw DegenerateSteadyStateError("steady-state residual " + std::to_string(residual) + " exceeds 1e-10");
    return {L.space(), rho};
}

/// Values over ascending delays with free-form provenance notes.
template <class T>
struct CorrelationSeries {
    std::vector<double> taus;
    std::vector<T> values;
    std::map<std::string, std::string> metadata;
};

struct CorrelationOptions {
    PropagationMethod method = PropagationMethod::adaptive;
    Tolerances tolerances{};
};

/// <A(tau) B(0)> in the stationary state, tr[A e^{L tau}(B rho_ss)].
inline CorrelationSeries<Complex> correlation(const Liouvillian& L, const DensityMatrix& rho_ss, const QOperator& a,
                                              const QOperator& b, const std::vector<double>& taus,
                                              const CorrelationOptions& opt = {}) {
    require_same_space(L.space(), rho_ss.space());
    require_same_space(L.space(), a.space());
    require_same_space(L.space(), b.space());
    detail::require_time_grid(taus);
    if (taus.front() != 0.0) throw ArgumentError("correlation delays must start at tau = 0");
    const double residual = max_abs(L.apply(rho_ss.matrix()));
    if (residual > 1e-8)
        throw PreconditionError("state is not stationary for this Liouvillian (residual " + std::to_string(residual) +
                                ")");

    CorrelationSeries<Complex> out;
    out.taus = taus;
    out.values.resize(taus.size());
    const Matrix x0 = b.matrix() * rho_ss.matrix();
    const Matrix& am = a.matrix();
    propagate(
        L, x0, taus, [&](std::size_t idx, double, const Matrix& x) { out.values[idx] = trace_product(am, x); },
        opt.method, opt.tolerances);
    out.values[0] = trace_product(am, x0);
    return out;
}

}  // namespace jtcqed
