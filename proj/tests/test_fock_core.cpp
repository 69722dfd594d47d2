// test_fock_core.cpp — parameters, operator tables, drive term, SI conversion.

#include "duffing/errors.hpp"
#include "duffing/operators.hpp"
#include "duffing/params.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace duffing;

namespace {

OscillatorParams harmonic(int n = 30) {
    OscillatorParams p;
    p.gamma_tilde = 0.0;
    p.kappa = 0.0;
    p.n_basis = n;
    return p;
}

// Lowest eigenvalues of -1/2 d^2/dx^2 + V(x) on [-L, L] with Dirichlet walls,
// second-order finite differences extrapolated from h and h/2.
std::vector<double> grid_levels(double quartic, double quadratic, double L, int count) {
    auto solve = [&](int points) {
        const double h = 2.0 * L / (points + 1);
        Eigen::VectorXd diag(points), sub(points - 1);
        for (int k = 0; k < points; ++k) {
            const double x = -L + (k + 1) * h;
            diag(k) = 1.0 / (h * h) + 0.5 * x * x + quadratic * x * x - quartic * std::pow(x, 4);
        }
        sub.setConstant(-0.5 / (h * h));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    };
    const Eigen::VectorXd coarse = solve(2000);
    const Eigen::VectorXd fine = solve(4001);
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back((4.0 * fine(k) - coarse(k)) / 3.0);
    return out;
}

} // namespace

TEST_CASE("harmonic limit gives the unit ladder and ground variance 1/2") {
    const OperatorTable ops = build_operator_table(harmonic());
    for (int n = 0; n < 20; ++n) CHECK(ops.eigvals(n) - ops.eigvals(0) == doctest::Approx(n).epsilon(1e-12));
    CHECK((ops.x * ops.x)(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("canonical commutator holds away from the truncation edge") {
    const OperatorTable ops = build_operator_table(OscillatorParams{});
    const ComplexMatrix c = ops.x * ops.p - ops.p * ops.x;
    const int m = ops.dim - 1;
    const ComplexMatrix target = std::complex<double>(0, 1) * ComplexMatrix::Identity(m, m);
    CHECK((c.topLeftCorner(m, m) - target).cwiseAbs().maxCoeff() < 1e-12);
    const ComplexMatrix ladder = ops.a * ops.a_dag - ops.a_dag * ops.a;
    CHECK((ladder.topLeftCorner(m, m) - ComplexMatrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("operators are Hermitian and the eigen-decomposition is exact") {
    const OperatorTable ops = build_operator_table(OscillatorParams{});
    CHECK((ops.x - ops.x.adjoint()).norm() < 1e-13);
    CHECK((ops.p - ops.p.adjoint()).norm() < 1e-13);
    CHECK((ops.h_static - ops.h_static.adjoint()).norm() < 1e-13);
    const RealMatrix& u = ops.eigvecs;
    CHECK((u.transpose() * u - RealMatrix::Identity(ops.dim, ops.dim)).norm() < 1e-12);
    const RealMatrix h = ops.h_static.real();
    const double rel = (h * u - u * ops.eigvals.asDiagonal()).norm() / h.norm();
    CHECK(rel < 1e-10);
    for (int k = 1; k < ops.dim; ++k) CHECK(ops.eigvals(k) >= ops.eigvals(k - 1));
}

TEST_CASE("x^2 and x^4 blocks are exact matrix elements at the truncation edge") {
    const int n = 12;
    const RealMatrix x2 = position_power(n, 2);
    const RealMatrix x4 = position_power(n, 4);
    // <k|x^2|k> = k + 1/2 and <k|x^4|k> = (6k^2 + 6k + 3)/4 for every k in the block
    for (int k = 0; k < n; ++k) {
        CHECK(x2(k, k) == doctest::Approx(k + 0.5).epsilon(1e-13));
        CHECK(x4(k, k) == doctest::Approx((6.0 * k * k + 6.0 * k + 3.0) / 4.0).epsilon(1e-13));
    }
}

TEST_CASE("low levels match a finite-difference Schroedinger oracle and lie below the barrier") {
    const OscillatorParams p; // aleph 12, gamma_tilde 1/24, kappa 0.01, omega_c 10
    const OperatorTable ops = build_operator_table(p);
    const auto grid = grid_levels(p.quartic(), p.counterterm(), p.barrier_position(), 6);
    for (int k = 0; k < 6; ++k) {
        CAPTURE(k);
        CHECK(ops.eigvals(k) == doctest::Approx(grid[k]).epsilon(1e-6));
        CHECK(ops.eigvals(k) < p.bound_state_estimate());
    }
}

TEST_CASE("bound-state estimate and truncation guard") {
    OscillatorParams p;
    CHECK(p.bound_state_estimate() == doctest::Approx(18.0));
    p.n_basis = 26;
    CHECK_THROWS_AS(build_operator_table(p), TruncationError);
    p.n_basis = 27;
    CHECK_NOTHROW(build_operator_table(p));
}

TEST_CASE("parameter validation") {
    auto bad = [](auto mutate) {
        OscillatorParams p;
        mutate(p);
        return p;
    };
    CHECK_THROWS_AS(validate(bad([](auto& p) { p.aleph = 0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& p) { p.delta = 1.0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& p) { p.delta = 0.0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& p) { p.f0 = -1.0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& p) { p.kappa = -1.0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& p) { p.theta = -1.0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& p) { p.omega_c = 1.0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto& p) { p.n_basis = 1; })), ConfigError);
    CHECK_NOTHROW(validate(harmonic()));
}

TEST_CASE("drive term") {
    OscillatorParams p;
    p.f0 = 0.05;
    const OperatorTable ops = build_operator_table(p);
    CHECK((drive_term(ops, p, 0.0) - 2.0 * p.f0 * ops.x).norm() < 1e-14);
    CHECK((drive_term(ops, p, std::numbers::pi / p.nu()) + 2.0 * p.f0 * ops.x).norm() < 1e-13);
    p.f0 = 0.0;
    CHECK(drive_term(ops, p, 1.3).norm() == 0.0);
}

TEST_CASE("SI conversion of the reference junction") {
    const OscillatorParams p = dimensionless_from_si(39e-9, 0.91e-12, 0.01, 10.0, 0.05);
    CHECK(p.aleph == doctest::Approx(10.7).epsilon(0.01));
    CHECK(p.gamma_tilde == doctest::Approx(1.0 / 24.0));
    CHECK(p.theta == doctest::Approx(0.57).epsilon(0.02));
    CHECK(plasma_temperature(39e-9, 0.91e-12) == doctest::Approx(0.087).epsilon(0.01));
    // Omega = sqrt(2 e I_c / (hbar C))
    const double omega = std::sqrt(2.0 * 1.602176634e-19 * 39e-9 / (1.054571817e-34 * 0.91e-12));
    CHECK(omega == doctest::Approx(1.14e10).epsilon(0.01));
    CHECK(dimensionless_from_si(39e-9, 0.91e-12, 0.01, 10.0, 0.0).theta == 0.0);
    CHECK(reference_theta(0.005) == doctest::Approx(0.0574).epsilon(0.01));
}

TEST_CASE("preset") {
    const OscillatorParams p = paper_mesoscopic();
    CHECK(p.aleph == 12.0);
    CHECK(p.gamma_tilde == doctest::Approx(1.0 / 24.0));
    CHECK(p.delta == 0.06);
    CHECK(p.kappa == 0.01);
    CHECK(p.omega_c == 10.0);
    CHECK(p.n_basis == 40);
    CHECK(p.nu() == doctest::Approx(0.94));
}
