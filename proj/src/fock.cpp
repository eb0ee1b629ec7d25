#include "spinmix/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace spinmix {

Interaction interaction_from_sign(int sigma)
{
    if (sigma == 1) return Interaction::antiferromagnetic;
    if (sigma == -1) return Interaction::ferromagnetic;
    throw std::invalid_argument("sigma must be +1 or -1, got " + std::to_string(sigma));
}

std::string to_string(Interaction s)
{
    return s == Interaction::antiferromagnetic ? "+1" : "-1";
}

//---------------------------------------------------------------------------//
// SectorBasis
//---------------------------------------------------------------------------//

SectorBasis::SectorBasis(int n_total, int magnetization)
    : n_total_(n_total), magnetization_(magnetization)
{
    if (n_total <= 0) {
        throw std::invalid_argument("sector requires a positive atom number");
    }
    if (std::abs(magnetization) > n_total) {
        throw std::invalid_argument("|M| = " + std::to_string(std::abs(magnetization)) +
                                    " exceeds N = " + std::to_string(n_total));
    }
    const int first = std::max(magnetization, 0);
    const int last = (n_total + magnetization) / 2;  // both nonnegative here
    states_.reserve(static_cast<std::size_t>(last - first + 1));
    for (int np = first; np <= last; ++np) {
        const int nm = np - magnetization;
        states_.push_back({np, n_total - np - nm, nm});
    }
}

std::optional<std::size_t> SectorBasis::index_of(const Occupation& occ) const
{
    if (occ.n_plus < 0 || occ.n_zero < 0 || occ.n_minus < 0) return std::nullopt;
    if (occ.n_plus + occ.n_zero + occ.n_minus != n_total_) return std::nullopt;
    if (occ.n_plus - occ.n_minus != magnetization_) return std::nullopt;
    const auto k = static_cast<std::size_t>(occ.n_plus - std::max(magnetization_, 0));
    if (k >= states_.size()) return std::nullopt;
    return k;
}

BasisPtr build_sector(int n_total, int magnetization)
{
    return std::make_shared<const SectorBasis>(n_total, magnetization);
}

//---------------------------------------------------------------------------//
// Hamiltonian
//---------------------------------------------------------------------------//

HamiltonianMatrix::HamiltonianMatrix(BasisPtr basis, Interaction sigma, double q_prime,
                                     Eigen::VectorXd diagonal, Eigen::VectorXd off_diagonal)
    : basis_(std::move(basis)),
      sigma_(sigma),
      q_prime_(q_prime),
      diag_(std::move(diagonal)),
      off_(std::move(off_diagonal))
{
    if (!basis_) throw std::invalid_argument("Hamiltonian requires a basis");
    const auto dim = static_cast<Eigen::Index>(basis_->dimension());
    if (diag_.size() != dim || off_.size() != std::max<Eigen::Index>(dim - 1, 0)) {
        throw std::invalid_argument("tridiagonal storage does not match the basis dimension");
    }
}

Eigen::MatrixXd HamiltonianMatrix::dense() const
{
    const auto dim = diag_.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    h.diagonal() = diag_;
    for (Eigen::Index i = 0; i + 1 < dim; ++i) {
        h(i, i + 1) = off_(i);
        h(i + 1, i) = off_(i);
    }
    return h;
}

Eigen::VectorXcd HamiltonianMatrix::apply(const Eigen::VectorXcd& v) const
{
    if (v.size() != diag_.size()) throw std::invalid_argument("dimension mismatch in H|v>");
    Eigen::VectorXcd out = diag_.cwiseProduct(v);
    for (Eigen::Index i = 0; i + 1 < v.size(); ++i) {
        out(i) += off_(i) * v(i + 1);
        out(i + 1) += off_(i) * v(i);
    }
    return out;
}

HamiltonianMatrix build_hamiltonian(BasisPtr basis, Interaction sigma, double q_prime)
{
    if (!basis) throw std::invalid_argument("Hamiltonian requires a basis");
    const double s = sign_of(sigma);
    const auto dim = static_cast<Eigen::Index>(basis->dimension());
    const double m = basis->magnetization();

    Eigen::VectorXd diag(dim);
    Eigen::VectorXd off(std::max<Eigen::Index>(dim - 1, 0));
    for (Eigen::Index k = 0; k < dim; ++k) {
        const auto& occ = (*basis)[static_cast<std::size_t>(k)];
        const double np = occ.n_plus, n0 = occ.n_zero, nm = occ.n_minus;
        diag(k) = s * (m * m + (2.0 * n0 - 1.0) * (np + nm)) - q_prime * n0;
        if (k + 1 < dim) {
            // <k+1| 2 c+^dag c-^dag c0 c0 |k>
            off(k) = s * 2.0 * std::sqrt((np + 1.0) * (nm + 1.0) * n0 * (n0 - 1.0));
        }
    }
    return HamiltonianMatrix(std::move(basis), sigma, q_prime, std::move(diag), std::move(off));
}

Eigen::VectorXd n0_diagonal(const SectorBasis& basis)
{
    Eigen::VectorXd n0(static_cast<Eigen::Index>(basis.dimension()));
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        n0(static_cast<Eigen::Index>(i)) = basis[i].n_zero;
    }
    return n0;
}

//---------------------------------------------------------------------------//
// States
//---------------------------------------------------------------------------//

StateVector::StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes)
    : basis_(std::move(basis)), amps_(std::move(amplitudes))
{
    if (!basis_) throw std::invalid_argument("state requires a basis");
    if (static_cast<std::size_t>(amps_.size()) != basis_->dimension()) {
        throw std::invalid_argument("amplitude count does not match the sector dimension");
    }
    const double norm = amps_.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw std::invalid_argument("state vector has zero or non-finite norm");
    }
    amps_ /= norm;
}

StateVector StateVector::fock(BasisPtr basis, std::size_t index)
{
    if (!basis || index >= basis->dimension()) {
        throw std::invalid_argument("Fock index outside the sector");
    }
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dimension()));
    amps(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(basis), std::move(amps));
}

DensityMatrix::DensityMatrix(BasisPtr basis, Eigen::MatrixXcd entries, double positivity_tolerance)
    : basis_(std::move(basis)), rho_(std::move(entries))
{
    if (!basis_) throw std::invalid_argument("density matrix requires a basis");
    const auto dim = static_cast<Eigen::Index>(basis_->dimension());
    if (rho_.rows() != dim || rho_.cols() != dim) {
        throw std::invalid_argument("density matrix shape does not match the sector dimension");
    }
    const double scale = std::max(1.0, rho_.cwiseAbs().maxCoeff());
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
    const double tr = rho_.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
        throw std::invalid_argument("density matrix has non-positive trace");
    }
    rho_ /= tr;
    if (min_eigenvalue() < -positivity_tolerance) {
        throw std::invalid_argument("density matrix has a negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi)
{
    return DensityMatrix(psi.basis_ptr(), psi.amplitudes() * psi.amplitudes().adjoint());
}

double DensityMatrix::purity() const
{
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return rho_.cwiseAbs2().sum();
}

double DensityMatrix::min_eigenvalue() const
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

//---------------------------------------------------------------------------//
// Expectations
//---------------------------------------------------------------------------//

namespace {

double checked_real(Complex value, double scale)
{
    if (std::abs(value.imag()) > 1e-10 * std::max(1.0, scale)) {
        throw std::invalid_argument("expectation of a non-Hermitian observable");
    }
    return value.real();
}

void require_dimension(Eigen::Index a, Eigen::Index b)
{
    if (a != b) throw std::invalid_argument("observable dimension does not match the state");
}

}  // namespace

double expectation(const StateVector& psi, const Eigen::VectorXd& diagonal_observable)
{
    require_dimension(psi.amplitudes().size(), diagonal_observable.size());
    return psi.amplitudes().cwiseAbs2().dot(diagonal_observable);
}

double expectation(const StateVector& psi, const Eigen::MatrixXcd& observable)
{
    require_dimension(psi.amplitudes().size(), observable.rows());
    require_dimension(observable.rows(), observable.cols());
    const Complex v = psi.amplitudes().dot(observable * psi.amplitudes());
    return checked_real(v, observable.cwiseAbs().maxCoeff());
}

double expectation(const DensityMatrix& rho, const Eigen::VectorXd& diagonal_observable)
{
    require_dimension(rho.entries().rows(), diagonal_observable.size());
    return rho.entries().diagonal().real().dot(diagonal_observable);
}

double expectation(const DensityMatrix& rho, const Eigen::MatrixXcd& observable)
{
    require_dimension(rho.entries().rows(), observable.rows());
    require_dimension(observable.rows(), observable.cols());
    const Complex v = (rho.entries() * observable).trace();
    return checked_real(v, observable.cwiseAbs().maxCoeff());
}

double n0_fluctuation(const StateVector& psi)
{
    const Eigen::VectorXd n0 = n0_diagonal(psi.basis());
    const double mean = expectation(psi, n0);
    const double second = expectation(psi, n0.cwiseAbs2().eval());
    return std::sqrt(std::max(0.0, second - mean * mean));
}

double n0_fluctuation(const DensityMatrix& rho)
{
    const Eigen::VectorXd n0 = n0_diagonal(rho.basis());
    const double mean = expectation(rho, n0);
    const double second = expectation(rho, n0.cwiseAbs2().eval());
    return std::sqrt(std::max(0.0, second - mean * mean));
}

}  // namespace spinmix
