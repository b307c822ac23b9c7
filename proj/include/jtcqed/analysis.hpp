#pragma once

// Observables: eigenvalue scans over the mode mismatch, stationary power
// spectra, second-order coherence and the photon population imbalance.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jtcqed/dynamics.hpp"
#include "jtcqed/errors.hpp"
#include "jtcqed/hilbert.hpp"
#include "jtcqed/model.hpp"
#include "jtcqed/parallel.hpp"

namespace jtcqed {

namespace detail {

inline std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------- eigen scan

struct EigenScanOptions {
    bool include_quadratic = true;
    std::optional<double> j_override{};
    unsigned workers = 1;
};

struct EigenScan {
    std::vector<double> deltas;
    std::vector<std::vector<double>> levels;  ///< levels[row][i], ascending within a row
};

inline EigenScan eigen_scan(double k, const std::vector<double>& delta_grid, int count, const SpaceSpec& space,
                            const EigenScanOptions& opt = {}) {
    if (delta_grid.empty()) throw ArgumentError("delta grid is empty");
    for (double d : delta_grid)
        if (!std::isfinite(d)) throw ArgumentError("delta grid contains a non-finite value");
    if (count < 1 || count > space.total_dim())
        throw ArgumentError("eigenvalue count must lie in [1, " + std::to_string(space.total_dim()) + "]");

    EigenScan scan;
    scan.deltas = delta_grid;
    scan.levels.resize(delta_grid.size());
    parallel_for(delta_grid.size(), opt.workers, [&](std::size_t i) {
        const QOperator h =
            build_dimensionless_hamiltonian(space, k, delta_grid[i], opt.include_quadratic, opt.j_override);
        scan.levels[i] = eigen_lowest(h, count);
    });
    return scan;
}

// ------------------------------------------------------------------ spectrum

enum class SpectrumMode { privileged, disadvantaged };
enum class CorrelationOrdering { emission, as_printed };

struct SpectrumOptions {
    SpectrumMode mode = SpectrumMode::privileged;
    CorrelationOrdering ordering = CorrelationOrdering::emission;
    CorrelationOptions propagation{};
    std::map<std::string, std::string> metadata{};  ///< caller parameters echoed into the result
};

struct SpectrumSeries {
    std::vector<double> omegas;  ///< uniform, ascending
    std::vector<double> values;
    double resolution = 0.0;     ///< 2 pi / tau_max
    Complex c0{};                ///< C(0)
    double decay_ratio = 0.0;    ///< |C(tau_max) - <A><B>| / |C(0)|
    std::optional<std::string> warning{};
    std::map<std::string, std::string> metadata{};
};

/// P(omega) = 2 Re int_0^tau_max C(tau) e^{-i omega tau} d tau on n_samples points
/// tau_n = n tau_max / n_samples, with the tau = 0 sample weighted by 1/2.
/// Frequencies are 2 pi m / tau_max for m in [-N/2, N/2). The FFT sees the
/// connected correlation C - <A><B>; the elastic part is added at omega = 0.
inline SpectrumSeries power_spectrum(const Liouvillian& L, const DensityMatrix& rho_ss, double tau_max,
                                     std::size_t n_samples, const SpectrumOptions& opt = {}) {
    if (!(tau_max > 0.0) || !std::isfinite(tau_max)) throw ArgumentError("tau_max must be positive");
    if (n_samples < 2 || (n_samples & (n_samples - 1)) != 0)
        throw ArgumentError("n_samples must be a power of two >= 2");
    const SpaceSpec& space = L.space();
    const int mode_index = opt.mode == SpectrumMode::privileged ? 0 : 1;
    if (mode_index >= space.mode_count()) throw ArgumentError("space has no disadvantaged mode");

    const QOperator a = annihilation(space, mode_index);
    const QOperator lhs = opt.ordering == CorrelationOrdering::emission ? a.adjoint() : a;
    const QOperator& rhs = a;

    const double dt = tau_max / static_cast<double>(n_samples);
    std::vector<double> taus(n_samples + 1);
    for (std::size_t i = 0; i <= n_samples; ++i) taus[i] = dt * static_cast<double>(i);
    const CorrelationSeries<Complex> corr = correlation(L, rho_ss, lhs, rhs, taus, opt.propagation);

    SpectrumSeries out;
    out.resolution = 2.0 * std::numbers::pi / tau_max;
    out.c0 = corr.values.front();
    const Complex disconnected = rho_ss.expectation(lhs) * rho_ss.expectation(rhs);
    const double c0_abs = std::abs(out.c0);
    out.decay_ratio = c0_abs > 0.0 ? std::abs(corr.values.back() - disconnected) / c0_abs : 0.0;
    if (out.decay_ratio > 1e-6) {
        out.warning = "correlation not decayed at tau_max: |C(tau_max) - <A><B>| / |C(0)| = " +
                      detail::format_number(out.decay_ratio) + " > 1e-6; consider a longer tau_max or a window";
    }

    const std::size_t n = n_samples;
    fftw_complex* buf = fftw_alloc_complex(n);
    {
        // Planner calls are not thread-safe; execution is.
        static std::mutex planner;
        fftw_plan plan;
        {
            std::lock_guard<std::mutex> lock(planner);
            plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Complex c = (corr.values[i] - disconnected) * (i == 0 ? 0.5 : 1.0);
            buf[i][0] = c.real();
            buf[i][1] = c.imag();
        }
        fftw_execute(plan);
        std::lock_guard<std::mutex> lock(planner);
        fftw_destroy_plan(plan);
    }

    out.omegas.resize(n);
    out.values.resize(n);
    const std::size_t half = n / 2;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t bin = (j + half) % n;  // fftshift
        const double m = static_cast<double>(j) - static_cast<double>(half);
        out.omegas[j] = m * out.resolution;
        out.values[j] = 2.0 * dt * buf[bin][0];
    }
    fftw_free(buf);
    // The constant <A><B> tail is the elastic line: all of its weight sits in the
    // zero-frequency bin instead of leaving a -dt <A><B> floor under every bin.
    out.values[half] += disconnected.real() * tau_max;

    out.metadata = opt.metadata;
    out.metadata["mode"] = opt.mode == SpectrumMode::privileged ? "privileged" : "disadvantaged";
    out.metadata["correlation_ordering"] = opt.ordering == CorrelationOrdering::emission ? "emission" : "as_printed";
    out.metadata["tau_max"] = detail::format_number(tau_max);
    out.metadata["n_samples"] = std::to_string(n_samples);
    out.metadata["resolution"] = detail::format_number(out.resolution);
    out.metadata["decay_ratio"] = detail::format_number(out.decay_ratio);
    out.metadata["elastic_weight"] = detail::format_number(disconnected.real());
    return out;
}

/// Trapezoid rule over the emitted frequency grid.
inline double integrate_spectrum(const SpectrumSeries& s) {
    double acc = 0.0;
    for (std::size_t i = 1; i < s.omegas.size(); ++i)
        acc += 0.5 * (s.values[i] + s.values[i - 1]) * (s.omegas[i] - s.omegas[i - 1]);
    return acc;
}

// --------------------------------------------------------------------- peaks

struct Peak {
    double omega = 0.0;
    double power = 0.0;
    double prominence = 0.0;
};

/// Local maxima at bin resolution. A flat top counts once, at its left edge.
/// Prominence is the height above the higher of the two lowest points reached
/// before a taller sample (or the grid edge) on either side.
inline std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ArgumentError("peak search needs matching grids");
    std::vector<Peak> peaks;
    const std::size_t n = y.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1])) continue;
        std::size_t j = i;
        while (j + 1 < n && y[j + 1] == y[i]) ++j;
        if (j + 1 >= n || !(y[j + 1] < y[i])) continue;

        double left_min = y[i];
        for (std::size_t l = i; l-- > 0;) {
            if (y[l] > y[i]) break;
            left_min = std::min(left_min, y[l]);
        }
        double right_min = y[i];
        for (std::size_t r = j + 1; r < n; ++r) {
            if (y[r] > y[i]) break;
            right_min = std::min(right_min, y[r]);
        }
        peaks.push_back({x[i], y[i], y[i] - std::max(left_min, right_min)});
        i = j;
    }
    return peaks;
}

inline std::vector<Peak> find_peaks(const SpectrumSeries& s) { return find_peaks(s.omegas, s.values); }

inline double max_power(const SpectrumSeries& s) {
    return s.values.empty() ? 0.0 : *std::max_element(s.values.begin(), s.values.end());
}

/// Peaks whose prominence is at least `fraction` of the largest spectral value.
inline std::vector<Peak> dominant_peaks(const SpectrumSeries& s, double fraction = 0.4) {
    const double top = max_power(s);
    std::vector<Peak> out;
    for (const Peak& p : find_peaks(s))
        if (p.prominence >= fraction * top) out.push_back(p);
    return out;
}

/// Peaks whose height is at least `fraction` of the largest spectral value.
inline std::vector<Peak> significant_peaks(const SpectrumSeries& s, double fraction = 0.01) {
    const double top = max_power(s);
    std::vector<Peak> out;
    for (const Peak& p : find_peaks(s))
        if (p.power >= fraction * top) out.push_back(p);
    return out;
}

// ------------------------------------------------------------------------ g2

enum class G2Target { resonator, qubit };
enum class G2Normalization { standard, verbatim };

/// Where the two-time clock starts. `settled` searches for the first time the
/// state stops moving; `explicit_time` takes t* as given.
struct ReferenceTime {
    enum class Kind { settled, explicit_time } kind = Kind::settled;
    double t = 0.0;            ///< used when kind == explicit_time
    double step = 1.0;         ///< coarse step delta of the settling search
    double threshold = 1e-6;   ///< trace-norm change per step
    std::optional<double> cap{};  ///< defaults to 50 / (smallest positive cavity rate)

    static ReferenceTime settled_default() { return {}; }
    static ReferenceTime at(double t) {
        ReferenceTime r;
        r.kind = Kind::explicit_time;
        r.t = t;
        return r;
    }
};

struct ReferenceState {
    double t_star = 0.0;
    Matrix rho;
    bool settled = true;
};

namespace detail {

inline double trace_norm_hermitian(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

inline double settle_cap(const Liouvillian& L, const ReferenceTime& ref) {
    if (ref.cap) return *ref.cap;
    double kappa = 0.0;
    if (const auto& d = L.dissipation()) {
        for (double k : {d->kappa1, L.space().mode_count() > 1 ? d->kappa2 : 0.0})
            if (k > 0.0) kappa = kappa > 0.0 ? std::min(kappa, k) : k;
    }
    if (!(kappa > 0.0)) throw ArgumentError("settled reference time needs a positive cavity rate or an explicit cap");
    return 50.0 / kappa;
}

}  // namespace detail

/// Evolves rho0 to the reference time t*.
inline ReferenceState reference_state(const Liouvillian& L, const DensityMatrix& rho0, const ReferenceTime& ref,
                                      const Tolerances& tol = {}) {
    require_same_space(L.space(), rho0.space());
    ReferenceState out;
    if (ref.kind == ReferenceTime::Kind::explicit_time) {
        if (!(ref.t >= 0.0) || !std::isfinite(ref.t)) throw ArgumentError("reference time must be >= 0");
        out.t_star = ref.t;
        out.rho = rho0.matrix();
        if (ref.t > 0.0)
            propagate_adaptive(L, rho0.matrix(), {ref.t}, [&](std::size_t, double, const Matrix& x) { out.rho = x; },
                               tol);
        return out;
    }

    if (!(ref.step > 0.0) || !(ref.threshold > 0.0)) throw ArgumentError("settling step and threshold must be > 0");
    const double cap = detail::settle_cap(L, ref);
    constexpr std::size_t chunk = 32;
    std::vector<double> grid(chunk);
    for (std::size_t i = 0; i < chunk; ++i) grid[i] = ref.step * static_cast<double>(i + 1);

    Matrix previous = rho0.matrix();
    double t = 0.0;
    bool found = false;
    while (!found) {
        const Matrix start = previous;
        propagate_adaptive(
            L, start, grid,
            [&](std::size_t, double, const Matrix& x) {
                if (found) return;
                if (detail::trace_norm_hermitian(x - previous) < ref.threshold) {
                    found = true;
                    return;
                }
                previous = x;
                t += ref.step;
                if (t >= cap) {
                    found = true;
                    out.settled = false;
                }
            },
            tol);
    }
    out.t_star = t;
    out.rho = previous;
    return out;
}

struct G2Options {
    G2Normalization normalization = G2Normalization::standard;
    ReferenceTime reference{};
    PropagationMethod method = PropagationMethod::adaptive;
    Tolerances tolerances{};
};

inline QOperator g2_operator(const SpaceSpec& space, G2Target target) {
    if (target == G2Target::resonator) return annihilation(space, 0);
    if (space.qubit_count() < 1) throw ArgumentError("qubit coherence needs a qubit");
    return qubit_lowering(space, 0);
}

/// g2(tau) from an already evolved reference state rho(t*):
///   numerator   tr[O^dag O e^{L tau}(O rho O^dag)]
///   standard    / (n(t*) n(t*+tau)),  n(t) = tr[O^dag O rho(t)]
///   verbatim    / n(t*)
inline CorrelationSeries<double> g2_from_reference(const Liouvillian& L, const ReferenceState& ref, G2Target target,
                                                   const std::vector<double>& taus, const G2Options& opt = {}) {
    detail::require_time_grid(taus);
    if (taus.front() != 0.0) throw ArgumentError("g2 delays must start at tau = 0");
    const QOperator o = g2_operator(L.space(), target);
    const Matrix& om = o.matrix();
    const Matrix num_op = om.adjoint() * om;

    std::vector<double> numer(taus.size()), occ(taus.size());
    const Matrix lifted = om * ref.rho * om.adjoint();
    propagate(
        L, lifted, taus, [&](std::size_t i, double, const Matrix& x) { numer[i] = trace_product(num_op, x).real(); },
        opt.method, opt.tolerances);
    numer[0] = trace_product(num_op, lifted).real();
    if (opt.normalization == G2Normalization::standard) {
        propagate(
            L, ref.rho, taus, [&](std::size_t i, double, const Matrix& x) { occ[i] = trace_product(num_op, x).real(); },
            opt.method, opt.tolerances);
    }
    const double n0 = trace_product(num_op, ref.rho).real();

    CorrelationSeries<double> out;
    out.taus = taus;
    out.values.resize(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double denom = opt.normalization == G2Normalization::standard ? n0 * (i == 0 ? n0 : occ[i]) : n0;
        if (!(denom >= 1e-12))
            throw UndefinedCoherenceError("g2 denominator " + detail::format_number(denom) + " below 1e-12 at tau = " +
                                              detail::format_number(taus[i]),
                                          taus[i]);
        out.values[i] = numer[i] / denom;
    }
    out.metadata["target"] = target == G2Target::resonator ? "resonator" : "qubit";
    out.metadata["normalization"] = opt.normalization == G2Normalization::standard ? "standard" : "verbatim";
    out.metadata["t_star"] = detail::format_number(ref.t_star);
    out.metadata["reference"] =
        opt.reference.kind == ReferenceTime::Kind::settled ? (ref.settled ? "settled" : "settle_cap_reached")
                                                           : "explicit";
    return out;
}

inline CorrelationSeries<double> g2(const Liouvillian& L, const DensityMatrix& rho0, G2Target target,
                                    const std::vector<double>& taus, const G2Options& opt = {}) {
    const ReferenceState ref = reference_state(L, rho0, opt.reference, opt.tolerances);
    return g2_from_reference(L, ref, target, taus, opt);
}

// ----------------------------------------------------------------- imbalance

struct ImbalanceSeries {
    std::vector<double> times;
    std::vector<double> n1, n2, n_total;
    std::vector<std::optional<double>> z;  ///< empty where n1 + n2 <= 1e-12
};

inline ImbalanceSeries imbalance(const Liouvillian& L, const DensityMatrix& rho0, const std::vector<double>& times,
                                 const EvolveOptions& base = {}) {
    const SpaceSpec& s = L.space();
    if (s.mode_count() != 2) throw ArgumentError("population imbalance needs two modes");
    EvolveOptions opt = base;
    opt.observables = {number(s, 0), number(s, 1)};
    opt.keep_states = false;
    const Trajectory tr = evolve(L, rho0, times, opt);

    ImbalanceSeries out;
    out.times = times;
    const std::size_t n = times.size();
    out.n1.resize(n);
    out.n2.resize(n);
    out.n_total.resize(n);
    out.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = tr.expectations[0][i].real(), b = tr.expectations[1][i].real();
        out.n1[i] = a;
        out.n2[i] = b;
        out.n_total[i] = a + b;
        if (a + b > 1e-12) out.z[i] = std::clamp((a - b) / (a + b), -1.0, 1.0);
    }
    return out;
}

}  // namespace jtcqed
