#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spinmix/fock.hpp"

using namespace spinmix;

TEST_CASE("sector dimension and ordering")
{
    for (int n = 1; n <= 30; ++n) {
        for (int m = -n; m <= n; ++m) {
            const SectorBasis b(n, m);
            CHECK(b.dimension() == static_cast<std::size_t>((n - std::abs(m)) / 2 + 1));
            CHECK(b.dimension() == oracle::enumerate(n, m).size());
            for (std::size_t k = 0; k < b.dimension(); ++k) {
                const auto& o = b[k];
                CHECK(o.n_plus + o.n_zero + o.n_minus == n);
                CHECK(o.n_plus - o.n_minus == m);
                CHECK(o.n_zero >= 0);
                CHECK(b.index_of(o) == k);
                if (k > 0) CHECK(o.n_plus == b[k - 1].n_plus + 1);
            }
        }
    }
}

TEST_CASE("small sectors")
{
    const SectorBasis two(2, 0);
    REQUIRE(two.dimension() == 2);
    CHECK(two[0] == Occupation{0, 2, 0});
    CHECK(two[1] == Occupation{1, 0, 1});

    const SectorBasis odd(3, 1);
    REQUIRE(odd.dimension() == 2);
    CHECK(odd[0] == Occupation{1, 2, 0});
    CHECK(odd[1] == Occupation{2, 0, 1});

    CHECK_FALSE(two.index_of({2, 0, 0}).has_value());
    CHECK_FALSE(two.index_of({-1, 4, -1}).has_value());
}

TEST_CASE("sector rejects invalid quantum numbers")
{
    CHECK_THROWS_AS(SectorBasis(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(SectorBasis(-2, 0), std::invalid_argument);
    CHECK_THROWS_AS(SectorBasis(3, 4), std::invalid_argument);
    CHECK_THROWS_AS(SectorBasis(3, -4), std::invalid_argument);
    CHECK_THROWS_AS(interaction_from_sign(0), std::invalid_argument);
}

TEST_CASE("two-atom Hamiltonian")
{
    const auto h = build_hamiltonian(build_sector(2, 0), Interaction::antiferromagnetic, 0.0);
    Eigen::Matrix2d expected;
    expected << 0.0, 2.0 * std::numbers::sqrt2, 2.0 * std::numbers::sqrt2, -2.0;
    CHECK((h.dense() - expected).cwiseAbs().maxCoeff() < 1e-14);

    const auto hf = build_hamiltonian(build_sector(2, 0), Interaction::ferromagnetic, 0.0);
    CHECK((hf.dense() + expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Hamiltonian matches the ladder-operator construction")
{
    for (int n = 1; n <= 14; ++n) {
        for (int m = -n; m <= n; ++m) {
            for (double sigma : {1.0, -1.0}) {
                for (double q : {0.0, 0.7, -3.0}) {
                    const auto basis = build_sector(n, m);
                    const auto h = build_hamiltonian(basis, interaction_from_sign(static_cast<int>(sigma)), q);
                    const Eigen::MatrixXd ref = oracle::hamiltonian(*basis, sigma, q);
                    const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
                    CHECK((h.dense() - ref).cwiseAbs().maxCoeff() <= 1e-12 * scale);
                }
            }
        }
    }
}

TEST_CASE("Hamiltonian is real symmetric and apply agrees with dense")
{
    const auto h = build_hamiltonian(build_sector(40, 2), Interaction::ferromagnetic, 1.3);
    const Eigen::MatrixXd d = h.dense();
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::VectorXcd v = Eigen::VectorXcd::Random(d.rows());
    CHECK((h.apply(v) - d.cast<Complex>() * v).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THROWS_AS(h.apply(Eigen::VectorXcd::Zero(3)), std::invalid_argument);
}

TEST_CASE("state vectors")
{
    const auto basis = build_sector(6, 0);
    Eigen::VectorXcd a(4);
    a << 1.0, Complex(0.0, 2.0), 0.0, -2.0;
    const StateVector psi(basis, a);
    CHECK(psi.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(psi.populations().sum() == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(StateVector(basis, Eigen::VectorXcd::Zero(4)), std::invalid_argument);
    CHECK_THROWS_AS(StateVector(basis, Eigen::VectorXcd::Ones(3)), std::invalid_argument);
    CHECK_THROWS_AS(StateVector::fock(basis, 4), std::invalid_argument);

    const auto f = StateVector::fock(basis, 0);
    const Eigen::VectorXd n0 = n0_diagonal(*basis);
    CHECK(expectation(f, n0) == 6.0);
    CHECK(n0_fluctuation(f) == 0.0);
}

TEST_CASE("density matrices")
{
    const auto basis = build_sector(2, 0);
    Eigen::Matrix2cd rho;
    rho << 2.0, 0.0, 0.0, 2.0;
    const DensityMatrix mixed(basis, rho);
    CHECK(mixed.entries().trace().real() == doctest::Approx(1.0));
    CHECK(mixed.purity() == doctest::Approx(0.5));

    Eigen::Matrix2cd bad;
    bad << 0.5, 0.1, 0.3, 0.5;
    CHECK_THROWS_AS(DensityMatrix(basis, bad), std::invalid_argument);
    Eigen::Matrix2cd negative;
    negative << 1.2, 0.0, 0.0, -0.2;
    CHECK_THROWS_AS(DensityMatrix(basis, negative), std::invalid_argument);
    CHECK_NOTHROW(DensityMatrix(basis, Eigen::Matrix2cd{{1.0 + 1e-7, 0.0}, {0.0, -1e-7}}, 1e-6));

    const auto psi = StateVector::fock(basis, 1);
    const auto pure = DensityMatrix::pure(psi);
    CHECK(pure.purity() == doctest::Approx(1.0));
    CHECK(expectation(pure, n0_diagonal(*basis)) == 0.0);

    Eigen::Matrix2cd nonhermitian;
    nonhermitian << 0.0, 1.0, 0.0, 0.0;
    const StateVector sup(basis, Eigen::Vector2cd(1.0, Complex(0.0, 1.0)));
    CHECK_THROWS_AS(expectation(sup, Eigen::MatrixXcd(nonhermitian)), std::invalid_argument);
    CHECK_THROWS_AS(expectation(DensityMatrix::pure(sup), Eigen::MatrixXcd(nonhermitian)),
                    std::invalid_argument);
    CHECK_THROWS_AS(expectation(psi, Eigen::VectorXd(Eigen::VectorXd::Ones(3))), std::invalid_argument);
}
