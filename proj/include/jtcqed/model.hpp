#pragma once

// Hamiltonians of the two-resonator Jahn-Teller circuit.
//
// Three builders are provided:
//   raw            (w/2) sz + sum_i w_i n_i + lambda_i x_i sx + g_i x_i^2 sx
//   effective      privileged/disadvantaged-mode form with derived w_eff, k_eff, w', c2
//   dimensionless  unit-frequency form in (k, delta); the one every figure pipeline uses
// where x_i = a_i + a_i^dagger. Energies are in units of the mode-1 frequency.

#include <cmath>
#include <optional>
#include <string>

#include "jtcqed/errors.hpp"
#include "jtcqed/hilbert.hpp"

namespace jtcqed {

struct ModelParams {
    double omega_q = 1.0;  ///< qubit splitting
    double omega_1 = 1.0;
    double omega_2 = 1.0;
    double k1 = 0.0;  ///< dimensionless JT scaling factors
    double k2 = 0.0;
    double lambda_1 = 0.0;  ///< linear couplings
    double lambda_2 = 0.0;
    double g1 = 0.0;  ///< quadratic couplings
    double g2 = 0.0;
    double j_hop = 0.0;
    double k = 0.0;  ///< single scaling factor of the dimensionless model

    /// Frequency mismatch; derived so it can never disagree with the mode frequencies.
    double delta() const { return omega_1 - omega_2; }

    void validate() const {
        for (double v : {omega_q, omega_1, omega_2, k1, k2, lambda_1, lambda_2, g1, g2, j_hop, k})
            if (!std::isfinite(v)) throw ArgumentError("model parameters must be finite");
        if (k1 < 0.0 || k2 < 0.0) throw ArgumentError("JT scaling factors must be nonnegative");
    }
};

/// Symmetric JT scaling k1 = k2 = k with the linear couplings and hopping this implies.
inline ModelParams symmetric_coupling(double omega_1, double omega_2, double k) {
    ModelParams p;
    p.omega_1 = omega_1;
    p.omega_2 = omega_2;
    p.k1 = p.k2 = p.k = k;
    p.lambda_1 = (omega_1 + omega_2) * k / std::sqrt(2.0);
    p.lambda_2 = (omega_1 - omega_2) * k / std::sqrt(2.0);
    p.j_hop = (omega_1 - omega_2) / 2.0;
    return p;
}

struct EffectiveParams {
    double omega_eff = 0.0;
    double k_eff = 0.0;
    double omega_prime = 0.0;
    double c2 = 0.0;
};

/// How w_eff and w' are normalised. `as_printed` divides by k_eff;
/// `squared` divides by k_eff^2, which makes both weighted frequency averages.
enum class EffectiveNormalization { as_printed, squared };

inline EffectiveParams derive_effective(const ModelParams& p,
                                        EffectiveNormalization norm = EffectiveNormalization::as_printed) {
    p.validate();
    const double k1s = p.k1 * p.k1, k2s = p.k2 * p.k2;
    const double k_eff_sq = k1s + k2s;
    if (k_eff_sq <= 0.0) throw DegenerateModelError("k1 = k2 = 0: effective mode undefined");
    const double k_eff = std::sqrt(k_eff_sq);
    const double denom = norm == EffectiveNormalization::as_printed ? k_eff : k_eff_sq;

    EffectiveParams e;
    e.k_eff = k_eff;
    e.omega_eff = (p.omega_1 * k1s + p.omega_2 * k2s) / denom;
    e.omega_prime = (p.omega_1 * k2s + p.omega_2 * k1s) / denom;
    e.c2 = p.delta() * p.k1 * p.k2 / k_eff_sq;
    return e;
}

namespace detail {

inline void require_model_space(const SpaceSpec& space) {
    if (space.mode_count() != 2 || space.qubit_count() != 1)
        throw ArgumentError("model Hamiltonians need two Fock modes and one qubit, got " + space.describe());
}

struct ModelOperators {
    explicit ModelOperators(const SpaceSpec& s)
        : a1(annihilation(s, 0)),
          a2(annihilation(s, 1)),
          n1(a1.adjoint() * a1),
          n2(a2.adjoint() * a2),
          x1(a1 + a1.adjoint()),
          x2(a2 + a2.adjoint()),
          sx(pauli(s, Axis::x, 0)),
          sz(pauli(s, Axis::z, 0)) {}
    QOperator a1, a2, n1, n2, x1, x2, sx, sz;
};

}  // namespace detail

inline QOperator build_raw_hamiltonian(const SpaceSpec& space, const ModelParams& p) {
    detail::require_model_space(space);
    p.validate();
    const detail::ModelOperators o(space);
    QOperator h = (p.omega_q / 2.0) * o.sz + p.omega_1 * o.n1 + p.omega_2 * o.n2;
    h += (p.lambda_1 * o.x1 + p.lambda_2 * o.x2) * o.sx;
    h += (p.g1 * (o.x1 * o.x1) + p.g2 * (o.x2 * o.x2)) * o.sx;
    return h;
}

/// Linear part H_JT of the privileged (alpha_1) / disadvantaged (alpha_2) form.
/// The JT terms couple through sigma_z here.
inline QOperator build_effective_jt(const SpaceSpec& space, const ModelParams& p,
                                    EffectiveNormalization norm = EffectiveNormalization::as_printed) {
    detail::require_model_space(space);
    const EffectiveParams e = derive_effective(p, norm);
    const detail::ModelOperators o(space);
    const QOperator hop = o.a1.adjoint() * o.a2 + o.a2.adjoint() * o.a1;

    QOperator h = (p.omega_q / 2.0) * o.sz + e.omega_prime * o.n2 + p.j_hop * hop;
    h += e.omega_eff * (o.n1 + e.k_eff * (o.x1 * o.sz));
    h += e.c2 * ((o.a1.adjoint() * o.a2 + o.a1 * o.a2.adjoint()) + e.k_eff * (o.x2 * o.sz));
    return h;
}

/// Quadratic part H_NL, coupled through sigma_x.
inline QOperator build_effective_nl(const SpaceSpec& space, const ModelParams& p,
                                    EffectiveNormalization norm = EffectiveNormalization::as_printed) {
    detail::require_model_space(space);
    const EffectiveParams e = derive_effective(p, norm);
    const detail::ModelOperators o(space);
    return (e.omega_eff * (o.x1 * o.x1) + e.omega_prime * (o.x2 * o.x2) + p.j_hop * (o.x1 * o.x2)) * o.sx;
}

inline QOperator build_effective_hamiltonian(const SpaceSpec& space, const ModelParams& p,
                                             EffectiveNormalization norm = EffectiveNormalization::as_printed) {
    return build_effective_jt(space, p, norm) + build_effective_nl(space, p, norm);
}

/// Unit-frequency model in (k, delta). The hopping coefficient is delta/2 unless
/// `j_override` is given; `include_quadratic = false` drops the squared terms.
inline QOperator build_dimensionless_hamiltonian(const SpaceSpec& space, double k, double delta,
                                                 bool include_quadratic = true,
                                                 std::optional<double> j_override = std::nullopt) {
    detail::require_model_space(space);
    if (!std::isfinite(k) || !std::isfinite(delta) || (j_override && !std::isfinite(*j_override)))
        throw ArgumentError("dimensionless model parameters must be finite");
    const detail::ModelOperators o(space);
    const double hop = j_override.value_or(delta / 2.0);

    QOperator h = o.n1 + o.n2 + 0.5 * o.sz + hop * (o.a1.adjoint() * o.a2 + o.a2.adjoint() * o.a1);
    QOperator mode1 = o.x1;
    QOperator mode2 = o.x2;
    if (include_quadratic) {
        mode1 += o.x1 * o.x1;
        mode2 += o.x2 * o.x2;
    }
    h += (std::sqrt(2.0) * k) * ((mode1 + (delta / 2.0) * mode2) * o.sx);
    return h;
}

}  // namespace jtcqed
