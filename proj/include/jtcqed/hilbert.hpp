#pragma once

// Operator algebra on the composite space Fock(mode 1) x Fock(mode 2) x qubit.
//
// Basis ordering is fixed: modes first in declaration order, qubits last.
// The qubit basis is (|e>, |g>) so that sigma_z = diag(+1, -1) and the
// lowering operator sigma = |g><e| has its single entry at (1, 0).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jtcqed/errors.hpp"

namespace jtcqed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

class SpaceSpec {
public:
    explicit SpaceSpec(std::vector<int> fock_dims, int qubit_count = 1)
        : fock_dims_(std::move(fock_dims)), qubit_count_(qubit_count) {
        if (qubit_count_ < 0) throw ArgumentError("qubit_count must be nonnegative");
        if (fock_dims_.empty() && qubit_count_ == 0)
            throw ArgumentError("space must contain at least one factor");
        for (int d : fock_dims_)
            if (d < 2) throw ArgumentError("Fock truncation must be >= 2, got " + std::to_string(d));
    }

    /// The paper's layout: two resonator modes and one qubit.
    static SpaceSpec two_mode(int d1, int d2) { return SpaceSpec({d1, d2}, 1); }

    const std::vector<int>& fock_dims() const noexcept { return fock_dims_; }
    int mode_count() const noexcept { return static_cast<int>(fock_dims_.size()); }
    int qubit_count() const noexcept { return qubit_count_; }
    int factor_count() const noexcept { return mode_count() + qubit_count_; }

    Index factor_dim(int factor) const {
        if (factor < 0 || factor >= factor_count())
            throw ArgumentError("factor index " + std::to_string(factor) + " out of range");
        return factor < mode_count() ? fock_dims_[factor] : 2;
    }

    Index total_dim() const noexcept {
        Index n = Index{1} << qubit_count_;
        for (int d : fock_dims_) n *= d;
        return n;
    }

    /// Linear index of |n_1, ..., n_m> (x) |q_1, ...>, with q = 0 excited, 1 ground.
    Index index(std::span<const int> occupations, std::span<const int> qubit_levels = {}) const {
        if (static_cast<int>(occupations.size()) != mode_count())
            throw ArgumentError("occupation list does not match the number of modes");
        if (!qubit_levels.empty() && static_cast<int>(qubit_levels.size()) != qubit_count_)
            throw ArgumentError("qubit level list does not match the number of qubits");
        Index idx = 0;
        for (int m = 0; m < mode_count(); ++m) {
            if (occupations[m] < 0 || occupations[m] >= fock_dims_[m])
                throw ArgumentError("occupation outside truncation");
            idx = idx * fock_dims_[m] + occupations[m];
        }
        for (int q = 0; q < qubit_count_; ++q) {
            int level = qubit_levels.empty() ? 1 : qubit_levels[q];
            if (level != 0 && level != 1) throw ArgumentError("qubit level must be 0 (e) or 1 (g)");
            idx = idx * 2 + level;
        }
        return idx;
    }

    std::string describe() const {
        std::string s = "fock[";
        for (std::size_t i = 0; i < fock_dims_.size(); ++i)
            s += (i ? "," : "") + std::to_string(fock_dims_[i]);
        return s + "]+" + std::to_string(qubit_count_) + "q";
    }

    bool operator==(const SpaceSpec&) const = default;

private:
    std::vector<int> fock_dims_;
    int qubit_count_;
};

inline void require_same_space(const SpaceSpec& a, const SpaceSpec& b) {
    if (!(a == b)) throw ArgumentError("space mismatch: " + a.describe() + " vs " + b.describe());
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Dense operator tagged with the space it acts on.
class QOperator {
public:
    QOperator(SpaceSpec space, Matrix matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
        const Index n = space_.total_dim();
        if (matrix_.rows() != n || matrix_.cols() != n)
            throw ArgumentError("operator side " + std::to_string(matrix_.rows()) + "x" +
                                std::to_string(matrix_.cols()) + " does not match space dimension " +
                                std::to_string(n));
    }

    static QOperator identity(const SpaceSpec& s) {
        return {s, Matrix::Identity(s.total_dim(), s.total_dim())};
    }
    static QOperator zero(const SpaceSpec& s) { return {s, Matrix::Zero(s.total_dim(), s.total_dim())}; }

    const SpaceSpec& space() const noexcept { return space_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    Index dim() const noexcept { return matrix_.rows(); }

    QOperator adjoint() const { return {space_, matrix_.adjoint()}; }
    Complex trace() const { return matrix_.trace(); }

    bool hermitian() const {
        const double scale = max_abs(matrix_);
        if (scale == 0.0) return true;
        return max_abs(matrix_ - matrix_.adjoint()) <= 1e-12 * scale;
    }

    QOperator& operator+=(const QOperator& o) {
        require_same_space(space_, o.space_);
        matrix_ += o.matrix_;
        return *this;
    }
    QOperator& operator-=(const QOperator& o) {
        require_same_space(space_, o.space_);
        matrix_ -= o.matrix_;
        return *this;
    }
    QOperator& operator*=(Complex c) {
        matrix_ *= c;
        return *this;
    }

    friend QOperator operator+(QOperator a, const QOperator& b) { return a += b; }
    friend QOperator operator-(QOperator a, const QOperator& b) { return a -= b; }
    friend QOperator operator*(Complex c, QOperator a) { return a *= c; }
    friend QOperator operator*(QOperator a, Complex c) { return a *= c; }
    friend QOperator operator*(double c, QOperator a) { return a *= Complex(c); }
    friend QOperator operator*(const QOperator& a, const QOperator& b) {
        require_same_space(a.space_, b.space_);
        return {a.space_, a.matrix_ * b.matrix_};
    }

private:
    SpaceSpec space_;
    Matrix matrix_;
};

/// I (x) local (x) I, with `local` placed on tensor factor `factor`.
inline QOperator embed(const SpaceSpec& space, int factor, const Matrix& local) {
    const Index d = space.factor_dim(factor);
    if (local.rows() != d || local.cols() != d)
        throw ArgumentError("local operator does not match factor dimension");
    Index left = 1, right = 1;
    for (int f = 0; f < factor; ++f) left *= space.factor_dim(f);
    for (int f = factor + 1; f < space.factor_count(); ++f) right *= space.factor_dim(f);

    const Index n = space.total_dim();
    Matrix m = Matrix::Zero(n, n);
    for (Index l = 0; l < left; ++l)
        for (Index a = 0; a < d; ++a)
            for (Index b = 0; b < d; ++b) {
                const Complex v = local(a, b);
                if (v == Complex{}) continue;
                const Index row0 = (l * d + a) * right, col0 = (l * d + b) * right;
                for (Index r = 0; r < right; ++r) m(row0 + r, col0 + r) = v;
            }
    return {space, std::move(m)};
}

inline QOperator annihilation(const SpaceSpec& space, int mode_index) {
    if (mode_index < 0 || mode_index >= space.mode_count())
        throw ArgumentError("mode index " + std::to_string(mode_index) + " out of range");
    const int d = space.fock_dims()[mode_index];
    Matrix a = Matrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return embed(space, mode_index, a);
}

inline QOperator creation(const SpaceSpec& space, int mode_index) {
    return annihilation(space, mode_index).adjoint();
}

inline QOperator number(const SpaceSpec& space, int mode_index) {
    const QOperator a = annihilation(space, mode_index);
    return a.adjoint() * a;
}

/// a + a^dagger
inline QOperator quadrature(const SpaceSpec& space, int mode_index) {
    const QOperator a = annihilation(space, mode_index);
    return a + a.adjoint();
}

enum class Axis { x, y, z };

inline QOperator pauli(const SpaceSpec& space, Axis axis, int qubit_index) {
    if (qubit_index < 0 || qubit_index >= space.qubit_count())
        throw ArgumentError("qubit index " + std::to_string(qubit_index) + " out of range");
    Matrix p = Matrix::Zero(2, 2);
    switch (axis) {
        case Axis::x: p << 0, 1, 1, 0; break;
        case Axis::y: p << 0, -kI, kI, 0; break;
        case Axis::z: p << 1, 0, 0, -1; break;
    }
    return embed(space, space.mode_count() + qubit_index, p);
}

/// sigma = (sigma_x - i sigma_y) / 2 = |g><e|
inline QOperator qubit_lowering(const SpaceSpec& space, int qubit_index) {
    return 0.5 * (pauli(space, Axis::x, qubit_index) - kI * pauli(space, Axis::y, qubit_index));
}

inline QOperator commutator(const QOperator& a, const QOperator& b) { return a * b - b * a; }

/// Lowest `count` eigenvalues in ascending order, degeneracies repeated.
inline std::vector<double> eigen_lowest(const QOperator& op, int count) {
    if (count < 0 || count > op.dim())
        throw ArgumentError("requested " + std::to_string(count) + " eigenvalues of a " +
                            std::to_string(op.dim()) + "-dimensional operator");
    if (!op.hermitian()) throw ValidationError("eigen_lowest requires a Hermitian operator");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(op.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ValidationError("eigensolver did not converge");
    const Eigen::VectorXd& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + count};
}

/// Normalised, Hermitian, positive semidefinite state.
class DensityMatrix {
public:
    static constexpr double kTraceTol = 1e-9;
    static constexpr double kHermitianTol = 1e-10;
    static constexpr double kPositivityTol = 1e-8;

    /// Bounds for states produced by propagation, which carry integrator error.
    static constexpr double kPropagatedTraceTol = 1e-8;
    static constexpr double kPropagatedPositivityTol = 1e-7;

    DensityMatrix(SpaceSpec space, Matrix matrix)
        : DensityMatrix(std::move(space), std::move(matrix), kTraceTol, kPositivityTol) {}

    static DensityMatrix propagated(SpaceSpec space, Matrix matrix) {
        return {std::move(space), std::move(matrix), kPropagatedTraceTol, kPropagatedPositivityTol};
    }

    static DensityMatrix pure(const SpaceSpec& space, const Vector& psi) {
        const double norm = psi.norm();
        if (psi.size() != space.total_dim() || norm == 0.0)
            throw ArgumentError("state vector has wrong size or zero norm");
        const Vector u = psi / norm;
        return {space, u * u.adjoint()};
    }

    /// |n_1, n_2, ...> (x) |q> with qubit level 0 = excited, 1 = ground.
    static DensityMatrix basis(const SpaceSpec& space, std::span<const int> occupations,
                               std::span<const int> qubit_levels = {}) {
        Vector psi = Vector::Zero(space.total_dim());
        psi(space.index(occupations, qubit_levels)) = 1.0;
        return pure(space, psi);
    }

    const SpaceSpec& space() const noexcept { return space_; }
    const Matrix& matrix() const noexcept { return matrix_; }

    Complex trace() const { return matrix_.trace(); }
    double purity() const { return (matrix_ * matrix_).trace().real(); }
    double min_eigenvalue() const {
        const Matrix h = 0.5 * (matrix_ + matrix_.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
        return solver.eigenvalues()(0);
    }
    Complex expectation(const QOperator& op) const {
        require_same_space(space_, op.space());
        // tr(A rho) without forming the product
        return (op.matrix().transpose().cwiseProduct(matrix_)).sum();
    }

private:
    DensityMatrix(SpaceSpec space, Matrix matrix, double trace_tol, double positivity_tol)
        : space_(std::move(space)), matrix_(std::move(matrix)) {
        const Index n = space_.total_dim();
        if (matrix_.rows() != n || matrix_.cols() != n)
            throw ArgumentError("density matrix does not match space dimension");
        const Complex tr = matrix_.trace();
        if (std::abs(tr - 1.0) > trace_tol)
            throw ValidationError("density matrix trace deviates from 1 by " + short_number(std::abs(tr - 1.0)));
        if (max_abs(matrix_ - matrix_.adjoint()) > kHermitianTol)
            throw ValidationError("density matrix is not Hermitian");
        if (const double m = min_eigenvalue(); m < -positivity_tol)
            throw ValidationError("density matrix has eigenvalue " + short_number(m));
    }

    static std::string short_number(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return buf;
    }

    SpaceSpec space_;
    Matrix matrix_;
};

/// tr(A X) for arbitrary square X.
inline Complex trace_product(const Matrix& a, const Matrix& x) { return a.transpose().cwiseProduct(x).sum(); }

}  // namespace jtcqed
