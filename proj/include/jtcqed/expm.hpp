#pragma once

// Dense matrix exponential by scaling and squaring with a degree-13 Pade
// approximant (Higham 2005, without the backward-error refinements of later
// variants). Used for the exact propagation path on small superoperators.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

#include "jtcqed/hilbert.hpp"

namespace jtcqed {

namespace detail {

inline double one_norm(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace detail

/// `fix` is applied to the Pade approximant and after every squaring; it lets
/// callers pin an invariant that squaring would otherwise amplify.
template <class Fix>
Matrix expm(const Matrix& a, Fix&& fix) {
    if (a.rows() != a.cols()) throw ArgumentError("expm needs a square matrix");
    const Index n = a.rows();
    if (n == 0) return a;

    constexpr double theta13 = 5.371920351148152;
    constexpr std::array<double, 14> b = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};

    const double norm = detail::one_norm(a);
    if (!std::isfinite(norm)) throw ArgumentError("expm input is not finite");
    int s = 0;
    if (norm > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    const Matrix x = a / std::ldexp(1.0, s);

    const Matrix id = Matrix::Identity(n, n);
    const Matrix x2 = x * x;
    const Matrix x4 = x2 * x2;
    const Matrix x6 = x4 * x2;

    Matrix inner = b[13] * x6 + b[11] * x4 + b[9] * x2;
    Matrix u = x6 * inner;
    u += b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id;
    u = x * u;

    inner = b[12] * x6 + b[10] * x4 + b[8] * x2;
    Matrix v = x6 * inner;
    v += b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;

    Matrix r = (v - u).partialPivLu().solve(v + u);
    fix(r);
    for (int i = 0; i < s; ++i) {
        r = r * r;
        fix(r);
    }
    return r;
}

inline Matrix expm(const Matrix& a) {
    return expm(a, [](Matrix&) {});
}

}  // namespace jtcqed
