#include <catch_amalgamated.hpp>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include "jtcqed/dynamics.hpp"
#include "jtcqed/model.hpp"

using namespace jtcqed;

namespace {

Matrix random_matrix(Index n, std::mt19937& rng) {
    std::normal_distribution<double> g;
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
    return m;
}

DensityMatrix random_state(const SpaceSpec& s, std::mt19937& rng) {
    const Matrix a = random_matrix(s.total_dim(), rng);
    Matrix rho = a * a.adjoint();
    rho /= rho.trace();
    return {s, 0.5 * (rho + rho.adjoint())};
}

// Column-stacking superoperator assembled from Kronecker products.
Matrix kron_superoperator(const Liouvillian& L) {
    const Index n = L.dim();
    const Matrix id = Matrix::Identity(n, n);
    Matrix k = -kI * L.hamiltonian().matrix();
    for (const auto& c : L.collapse_operators()) k -= 0.5 * c.matrix().adjoint() * c.matrix();
    Matrix s = Eigen::kroneckerProduct(id, k).eval() + Eigen::kroneckerProduct(k.conjugate(), id).eval();
    for (const auto& c : L.collapse_operators())
        s += Eigen::kroneckerProduct(c.matrix().conjugate(), c.matrix()).eval();
    return s;
}

Matrix unvec(const Vector& v, Index n) { return Eigen::Map<const Matrix>(v.data(), n, n); }

double thermal_mean(int d, double n_th) {
    const double r = n_th / (1.0 + n_th);
    double z = 0.0, m = 0.0;
    for (int n = 0; n < d; ++n) {
        z += std::pow(r, n);
        m += n * std::pow(r, n);
    }
    return m / z;
}

Liouvillian default_jt(double k, double delta, int d = 2) {
    return build_liouvillian(build_dimensionless_hamiltonian(SpaceSpec::two_mode(d, d), k, delta), {});
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST_CASE("collapse operators follow the dissipation parameters", "[dynamics]") {
    const auto s = SpaceSpec::two_mode(3, 2);
    const QOperator h = build_dimensionless_hamiltonian(s, 0.1, 0.2);
    CHECK(build_liouvillian(h, {}).collapse_operators().size() == 6);
    DissipationParams cold;
    cold.n_th = 0.0;
    cold.gamma_phi = 0.0;
    CHECK(build_liouvillian(h, cold).collapse_operators().size() == 3);
    DissipationParams none{0, 0, 0, 0, 0};
    CHECK(build_liouvillian(h, none).collapse_operators().empty());
    DissipationParams bad;
    bad.kappa1 = -1e-3;
    CHECK_THROWS_AS(build_liouvillian(h, bad), ArgumentError);
    CHECK_THROWS_AS(build_liouvillian(h + kI * number(s, 0), {}), ValidationError);
    CHECK_THROWS_AS(build_liouvillian(QOperator::identity(SpaceSpec({2, 2, 2}, 1)), {}), ArgumentError);
}

TEST_CASE("matrix action agrees with the Kronecker superoperator", "[dynamics]") {
    std::mt19937 rng(3);
    const Liouvillian L = default_jt(0.3, 0.1, 3);
    const Index n = L.dim();
    const Matrix oracle = kron_superoperator(L);
    CHECK(max_abs(L.superoperator() - oracle) <= 1e-14);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix x = random_matrix(n, rng);
        const Vector vx = Eigen::Map<const Vector>(x.data(), n * n);
        CHECK(max_abs(L.apply(x) - unvec(oracle * vx, n)) <= 1e-12);
    }
}

TEST_CASE("generator preserves trace and Hermiticity", "[dynamics][property]") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Liouvillian L = default_jt(0.5 * trial / 10.0, 0.1 * trial, 3);
        const Matrix x = random_matrix(L.dim(), rng);
        const Matrix lx = L.apply(x);
        CHECK(std::abs(lx.trace()) <= 1e-12 * max_abs(x) * L.dim());
        CHECK(max_abs(L.apply(x.adjoint()) - lx.adjoint()) <= 1e-12);
    }
}

TEST_CASE("superoperator spectrum lies in the closed left half-plane", "[dynamics][property]") {
    for (double k : {0.0, 0.1, 0.7}) {
        const Liouvillian L = default_jt(k, 0.3);
        Eigen::ComplexEigenSolver<Matrix> es(L.superoperator(), false);
        CHECK(es.eigenvalues().real().maxCoeff() <= 1e-10);
    }
    const QOperator h = build_dimensionless_hamiltonian(SpaceSpec::two_mode(2, 2), 0.2, 0.1);
    const Liouvillian unitary = build_liouvillian(h, {0, 0, 0, 0, 0});
    Eigen::ComplexEigenSolver<Matrix> es(unitary.superoperator(), false);
    CHECK(es.eigenvalues().real().cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Pade exponential matches Eigen's matrix exponential", "[dynamics]") {
    std::mt19937 rng(17);
    for (double scale : {1e-3, 0.5, 3.0, 40.0}) {
        const Matrix a = scale * random_matrix(6, rng) / 6.0;
        const Matrix ref = a.exp();
        CHECK(max_abs(expm(a) - ref) <= 1e-12 * std::max(1.0, max_abs(ref)));
    }
    CHECK(max_abs(expm(Matrix::Zero(4, 4)) - Matrix::Identity(4, 4)) <= 1e-15);
}

TEST_CASE("steady state of a damped cold cavity is the vacuum", "[dynamics]") {
    const SpaceSpec s({4}, 0);
    DissipationParams d{0.05, 0.0, 0.0, 0.0, 0.0};
    const DensityMatrix rho = steady_state(build_liouvillian(QOperator::zero(s), d));
    Matrix vac = Matrix::Zero(4, 4);
    vac(0, 0) = 1.0;
    CHECK(max_abs(rho.matrix() - vac) <= 1e-12);
}

TEST_CASE("thermal cavity occupation matches the truncated Bose oracle", "[dynamics]") {
    const SpaceSpec s({5}, 0);
    DissipationParams d{0.01, 0.0, 0.0, 0.0, 0.15};
    const DensityMatrix rho = steady_state(build_liouvillian(number(s, 0), d));
    const double nbar = rho.expectation(number(s, 0)).real();
    CHECK(std::abs(nbar - thermal_mean(5, 0.15)) <= 1e-9);
    CHECK(std::abs(nbar - 0.1498112210810895) <= 1e-12);
}

TEST_CASE("closed system has no unique steady state", "[dynamics]") {
    const QOperator h = build_dimensionless_hamiltonian(SpaceSpec::two_mode(2, 2), 0.1, 0.0);
    CHECK_THROWS_AS(steady_state(build_liouvillian(h, {0, 0, 0, 0, 0})), DegenerateSteadyStateError);
}

TEST_CASE("steady state is a valid stationary density matrix", "[dynamics][property]") {
    for (double k : {0.02, 0.3}) {
        const Liouvillian L = default_jt(k, 0.4, 3);
        const DensityMatrix rho = steady_state(L);
        CHECK(max_abs(L.apply(rho.matrix())) <= 1e-10);
        CHECK(std::abs(rho.trace() - 1.0) <= 1e-12);
        CHECK(rho.min_eigenvalue() >= -1e-10);
    }
}

TEST_CASE("unitary evolution keeps the purity", "[dynamics]") {
    const auto s = SpaceSpec::two_mode(3, 3);
    const Liouvillian L = build_liouvillian(build_dimensionless_hamiltonian(s, 0.3, 0.2), {0, 0, 0, 0, 0});
    const int occ[2] = {1, 0};
    const int lv[1] = {0};
    const Trajectory tr = evolve(L, DensityMatrix::basis(s, occ, lv), linspace(0.0, 30.0, 31));
    for (const auto& rho : tr.states) CHECK(std::abs(rho.purity() - 1.0) <= 1e-8);
    CHECK(tr.max_trace_drift <= 1e-8);
}

TEST_CASE("adaptive and exponential propagation agree", "[dynamics]") {
    std::mt19937 rng(23);
    const Liouvillian L = default_jt(0.2, 0.1);
    const DensityMatrix rho0 = random_state(L.space(), rng);
    const auto times = linspace(0.0, 100.0, 21);
    EvolveOptions exact;
    exact.method = PropagationMethod::exact;
    const Trajectory a = evolve(L, rho0, times);
    const Trajectory b = evolve(L, rho0, times, exact);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        worst = std::max(worst, max_abs(a.states[i].matrix() - b.states[i].matrix()));
    CHECK(worst <= 1e-7);

    // Independent oracle: Eigen exponential of the Kronecker superoperator.
    const Matrix s = kron_superoperator(L);
    const Vector v0 = Eigen::Map<const Vector>(rho0.matrix().data(), rho0.matrix().size());
    const Vector v = (s * 100.0).exp() * v0;
    CHECK(max_abs(a.states.back().matrix() - unvec(v, L.dim())) <= 1e-7);
}

TEST_CASE("evolution records expectations and honours keep_states", "[dynamics]") {
    const auto s = SpaceSpec::two_mode(2, 2);
    const Liouvillian L = build_liouvillian(build_dimensionless_hamiltonian(s, 0.0, 0.0), {});
    const int occ[2] = {1, 0};
    const int lv[1] = {1};
    EvolveOptions opt;
    opt.observables = {number(s, 0)};
    opt.keep_states = false;
    const Trajectory tr = evolve(L, DensityMatrix::basis(s, occ, lv), {0.0, 1.0, 2.0}, opt);
    CHECK(tr.states.empty());
    REQUIRE(tr.expectations.size() == 1);
    CHECK(std::abs(tr.expectations[0][0] - 1.0) <= 1e-14);
    CHECK(tr.expectations[0][2].real() < 1.0);
    CHECK(tr.expectations[0][2].real() > 0.99);
}

TEST_CASE("time grids are validated", "[dynamics]") {
    const Liouvillian L = default_jt(0.1, 0.0);
    const DensityMatrix rho = DensityMatrix::pure(L.space(), Vector::Ones(L.dim()));
    CHECK_THROWS_AS(evolve(L, rho, {}), ArgumentError);
    CHECK_THROWS_AS(evolve(L, rho, {1.0, 1.0}), ArgumentError);
    CHECK_THROWS_AS(evolve(L, rho, {-1.0, 1.0}), ArgumentError);
}

TEST_CASE("stiff generator reports a collapsed step size", "[dynamics]") {
    const SpaceSpec s({2}, 0);
    const Liouvillian L(QOperator::zero(s), {1e6 * annihilation(s, 0)});
    const int occ[1] = {1};
    CHECK_THROWS_AS(evolve(L, DensityMatrix::basis(s, occ), {0.0, 1.0}), StiffnessError);
    EvolveOptions exact;
    exact.method = PropagationMethod::exact;
    const Trajectory tr = evolve(L, DensityMatrix::basis(s, occ), {0.0, 1.0}, exact);
    CHECK(std::abs(tr.states.back().matrix()(0, 0) - 1.0) <= 1e-12);
    CHECK(tr.max_trace_drift <= 1e-12);
}

TEST_CASE("identity correlation stays at one", "[dynamics]") {
    const Liouvillian L = default_jt(0.1, 0.2);
    const DensityMatrix rho = steady_state(L);
    const QOperator id = QOperator::identity(L.space());
    const auto c = correlation(L, rho, id, id, linspace(0.0, 50.0, 11));
    for (const Complex v : c.values) CHECK(std::abs(v - 1.0) <= 1e-9);
    const auto single = correlation(L, rho, id, id, {0.0});
    CHECK(single.values.size() == 1);
    CHECK(single.values[0] == rho.trace());
}

TEST_CASE("correlation is linear in both operators", "[dynamics][property]") {
    std::mt19937 rng(41);
    const Liouvillian L = default_jt(0.15, 0.1);
    const DensityMatrix rho = steady_state(L);
    const auto& s = L.space();
    const Index n = L.dim();
    const auto taus = linspace(0.0, 20.0, 11);
    const Complex alpha(0.7, -0.4), beta(-1.3, 0.2);
    // Exact propagation is linear up to rounding; the adaptive controller picks
    // steps from the initial matrix, so it is linear only to its tolerance.
    for (auto [method, tol] : {std::pair{PropagationMethod::exact, 1e-10}, std::pair{PropagationMethod::adaptive, 1e-8}}) {
        for (int trial = 0; trial < 3; ++trial) {
            const QOperator a1(s, random_matrix(n, rng)), a2(s, random_matrix(n, rng));
            const QOperator b1(s, random_matrix(n, rng)), b2(s, random_matrix(n, rng));
            const CorrelationOptions opt{method, {}};
            const auto left = correlation(L, rho, alpha * a1 + a2, b1 + beta * b2, taus, opt);
            const auto p = correlation(L, rho, a1, b1, taus, opt);
            const auto q = correlation(L, rho, a1, b2, taus, opt);
            const auto r = correlation(L, rho, a2, b1, taus, opt);
            const auto t = correlation(L, rho, a2, b2, taus, opt);
            for (std::size_t i = 0; i < taus.size(); ++i) {
                const Complex sum = alpha * p.values[i] + alpha * beta * q.values[i] + r.values[i] + beta * t.values[i];
                CHECK(std::abs(left.values[i] - sum) <= tol * std::max(1.0, std::abs(sum)));
            }
        }
    }
}

TEST_CASE("thermal field correlation decays as a damped phasor", "[dynamics]") {
    const int d = 30;
    const SpaceSpec s({d}, 0);
    const double omega = 1.0, kappa = 0.1, n_th = 0.15;
    const Liouvillian L = build_liouvillian(omega * number(s, 0), {kappa, 0.0, 0.0, 0.0, n_th});
    const DensityMatrix rho = steady_state(L);
    const double nbar = thermal_mean(d, n_th);
    const QOperator a = annihilation(s, 0);
    const auto taus = linspace(0.0, 40.0, 41);
    const auto c = correlation(L, rho, a.adjoint(), a, taus);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const Complex expect = nbar * std::exp(Complex(-kappa / 2.0, omega) * taus[i]);
        CHECK(std::abs(c.values[i] - expect) <= 1e-6);
    }
}

TEST_CASE("correlation needs a stationary state", "[dynamics]") {
    const Liouvillian L = default_jt(0.1, 0.2);
    const int occ[2] = {1, 0};
    const int lv[1] = {0};
    const DensityMatrix rho = DensityMatrix::basis(L.space(), occ, lv);
    const QOperator id = QOperator::identity(L.space());
    CHECK_THROWS_AS(correlation(L, rho, id, id, {0.0, 1.0}), PreconditionError);
    CHECK_THROWS_AS(correlation(L, steady_state(L), id, id, {1.0, 2.0}), ArgumentError);
}
