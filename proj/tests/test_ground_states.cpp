#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spinmix/ground_states.hpp"

using namespace spinmix;

TEST_CASE("two-atom eigensystem")
{
    const auto sp = spectrum(build_sector(2, 0), Interaction::antiferromagnetic, 0.0);
    CHECK(std::abs(sp.eigenvalues(0) + 4.0) < 1e-12);
    CHECK(std::abs(sp.eigenvalues(1) - 2.0) < 1e-12);
    // |b> = sqrt(1/3)|1> - sqrt(2/3)|2>, |a> = sqrt(2/3)|1> + sqrt(1/3)|2>
    const Eigen::VectorXcd b = sp.state(0).amplitudes();
    const Eigen::VectorXcd a = sp.state(1).amplitudes();
    CHECK(std::abs(b(0).real() - std::sqrt(1.0 / 3.0)) < 1e-12);
    CHECK(std::abs(b(1).real() + std::sqrt(2.0 / 3.0)) < 1e-12);
    CHECK(std::abs(a(0).real() - std::sqrt(2.0 / 3.0)) < 1e-12);
    CHECK(std::abs(a(1).real() - std::sqrt(1.0 / 3.0)) < 1e-12);
    CHECK(sp.gap() == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("spectrum matches dense diagonalization of the ladder construction")
{
    for (int n : {1, 2, 3, 7, 12, 17}) {
        for (int m : {0, 1, -2}) {
            if (std::abs(m) > n) continue;
            const auto basis = build_sector(n, m);
            const auto sp = spectrum(basis, Interaction::antiferromagnetic, 0.4);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::hamiltonian(*basis, 1.0, 0.4));
            CHECK((sp.eigenvalues - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9);
            const Eigen::MatrixXd h = oracle::hamiltonian(*basis, 1.0, 0.4);
            for (Eigen::Index j = 0; j < sp.eigenvalues.size(); ++j) {
                const Eigen::VectorXd v = sp.eigenvectors.col(j);
                CHECK((h * v - sp.eigenvalues(j) * v).norm() < 1e-9);
                CHECK(std::abs(v.norm() - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("closed-form spectrum in the M = 0 sector")
{
    for (int n = 1; n <= 20; ++n) {
        for (int s : {1, -1}) {
            const auto sp = spectrum(build_sector(n, 0), interaction_from_sign(s), 0.0);
            const auto ref = oracle::closed_form_spectrum(n, s);
            REQUIRE(static_cast<std::size_t>(sp.eigenvalues.size()) == ref.size());
            for (std::size_t i = 0; i < ref.size(); ++i) {
                CHECK(std::abs(sp.eigenvalues(static_cast<Eigen::Index>(i)) - ref[i]) < 1e-8);
            }
        }
    }
}

TEST_CASE("gap laws")
{
    for (int n = 2; n <= 200; n += 2) {
        const auto afm = spectrum(build_sector(n, 0), Interaction::antiferromagnetic, 0.0);
        const auto fm = spectrum(build_sector(n, 0), Interaction::ferromagnetic, 0.0);
        CHECK(std::abs(afm.gap() - 6.0) < 1e-8);
        CHECK(std::abs(fm.gap() - (4.0 * n - 2.0)) < 1e-8 * n);
    }
    const auto fm100 = spectrum(build_sector(100, 0), Interaction::ferromagnetic, 0.0);
    CHECK(fm100.gap() == doctest::Approx(398.0));
    CHECK(fm100.max_level_spacing() == doctest::Approx(398.0));
}

TEST_CASE("AFM recursion reproduces the diagonalized ground state")
{
    for (int n = 2; n <= 200; n += 2) {
        const StateVector rec = afm_ground_state(n);
        const auto sp = spectrum(build_sector(n, 0), Interaction::antiferromagnetic, 0.0);
        const double overlap = std::norm(rec.amplitudes().dot(sp.state(0).amplitudes()));
        CHECK(overlap > 1.0 - 1e-8);
        const Eigen::VectorXd n0 = n0_diagonal(rec.basis());
        CHECK(std::abs(expectation(rec, n0) - n / 3.0) < 1e-8);
        if (n >= 10) {
            const double var = std::pow(n0_fluctuation(rec), 2);
            CHECK(var > expectation(rec, n0));
        }
    }
    CHECK_THROWS_AS(afm_ground_state(3), std::invalid_argument);
    CHECK_THROWS_AS(afm_ground_state(0), std::invalid_argument);
}

TEST_CASE("ferromagnetic ground manifold")
{
    for (int n : {4, 10, 30}) {
        const double e0 = -(static_cast<double>(n) * (n + 1) - 2.0 * n);
        for (int m = -n; m <= n; ++m) {
            const StateVector psi = fm_ground_manifold(n, m);
            CHECK(psi.basis().magnetization() == -m);
            const auto h = build_hamiltonian(psi.basis_ptr(), Interaction::ferromagnetic, 0.0);
            const double e = expectation(psi, h.dense().cast<Complex>().eval());
            CHECK(std::abs(e - e0) < 1e-8 * n * n);
        }
        const StateVector m0 = fm_ground_manifold(n, 0);
        const Eigen::VectorXd n0 = n0_diagonal(m0.basis());
        const double var = std::pow(n0_fluctuation(m0), 2);
        CHECK(var < expectation(m0, n0));
    }
    CHECK_THROWS(fm_ground_manifold(4, 5));
}
