#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spinmix/bloch.hpp"
#include "spinmix/noise.hpp"
#include "spinmix/trajectory.hpp"

using namespace spinmix;

TEST_CASE("drift matrix")
{
    const Eigen::Matrix3d a = bloch_drift_matrix(Interaction::antiferromagnetic, 0.5);
    const double c = 4.0 * std::numbers::sqrt2;
    Eigen::Matrix3d expected;
    expected << -1.0, -2.0, 0.0, 2.0, -1.0, -c, 0.0, c, 0.0;
    CHECK((a - expected).cwiseAbs().maxCoeff() < 1e-15);
    const Eigen::Matrix3d f = bloch_drift_matrix(Interaction::ferromagnetic, 0.0);
    CHECK(f(0, 1) == 2.0);
    CHECK(f(2, 1) == -c);
}

TEST_CASE("Bloch vector of basis states")
{
    const auto basis = build_sector(2, 0);
    const auto one = bloch_from_state(StateVector::fock(basis, 0));
    CHECK(one.vec() == Eigen::Vector3d(0.0, 0.0, 1.0));
    const auto two = bloch_from_state(StateVector::fock(basis, 1));
    CHECK(two.vec() == Eigen::Vector3d(0.0, 0.0, -1.0));
    const StateVector plus(basis, Eigen::Vector2cd(1.0, Complex(0.0, 1.0)));
    CHECK((bloch_from_state(plus).vec() - Eigen::Vector3d(0.0, 1.0, 0.0)).norm() < 1e-15);
    CHECK_THROWS_AS(bloch_from_state(StateVector::fock(build_sector(4, 0), 0)), std::invalid_argument);
}

TEST_CASE("free precession agrees with exact unitary evolution")
{
    const auto basis = build_sector(2, 0);
    const auto h = build_hamiltonian(basis, Interaction::antiferromagnetic, 0.0);
    const auto psi0 = StateVector::fock(basis, 0);
    const BlochIntegrator integ(Interaction::antiferromagnetic, 0.0, 1e-2);
    BlochState s = bloch_from_state(psi0);
    for (int i = 1; i <= 500; ++i) {
        s = integ.step(s, 0.123);  // ignored when xi = 0
        const Eigen::VectorXcd exact = oracle::evolve_pure(h.dense(), psi0.amplitudes(), 0.01 * i);
        const BlochState ref = bloch_from_state(StateVector(basis, exact));
        CHECK((s.vec() - ref.vec()).norm() < 1e-10);
    }
    // N0 / N = (1 + S_z) / 2 oscillates at the gap 6
    CHECK(std::abs((1.0 + s.s_z) / 2.0 - (1.0 + bloch_from_state(psi0).s_z) / 2.0) < 1.0);
}

TEST_CASE("noise-free SSE and Bloch integrator agree")
{
    const auto r = bloch_vs_sse_check(0.0, 5.0, 1, 1, 1e-3);
    CHECK(r.max_deviation < 1e-6);
}

TEST_CASE("sign of the interaction mirrors S_y")
{
    const BlochIntegrator afm(Interaction::antiferromagnetic, 0.3, 1e-3);
    const BlochIntegrator fm(Interaction::ferromagnetic, 0.3, 1e-3);
    BlochState a{0.2, 0.3, 0.5}, f{0.2, -0.3, 0.5};
    NoiseStream noise(6, 0);
    for (int i = 0; i < 3000; ++i) {
        const double dW = noise.wiener_increment(1e-3);
        a = afm.step(a, dW);
        f = fm.step(f, dW);
    }
    CHECK(std::abs(a.s_x - f.s_x) < 1e-12);
    CHECK(std::abs(a.s_y + f.s_y) < 1e-12);
    CHECK(std::abs(a.s_z - f.s_z) < 1e-12);
}

TEST_CASE("measured pure two-atom states stay on the sphere")
{
    const BlochIntegrator integ(Interaction::antiferromagnetic, 0.5, 1e-4);
    BlochState s{0.0, 0.0, 1.0};
    NoiseStream noise(12, 0);
    for (int i = 0; i < 50000; ++i) s = integ.step(s, noise.wiener_increment(1e-4));
    CHECK(std::abs(s.norm() - 1.0) < 0.02);
}

TEST_CASE("unconditional dynamics relax to the origin")
{
    const BlochIntegrator integ(Interaction::antiferromagnetic, 0.5, 1e-2);
    NoiseStream noise(99, 0);
    for (int start = 0; start < 20; ++start) {
        Eigen::Vector3d v(noise.standard_normal(), noise.standard_normal(), noise.standard_normal());
        v /= v.norm();
        BlochState s = BlochState::from(v);
        for (int i = 0; i < 5000; ++i) s = integ.drift_step(s);
        CHECK(s.norm() < 1e-3);
    }
}
