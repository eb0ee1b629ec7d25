#include "spinmix/ground_states.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace spinmix {

double SpectrumResult::gap(std::size_t level) const
{
    if (level >= static_cast<std::size_t>(eigenvalues.size())) {
        throw std::out_of_range("spectrum has no level " + std::to_string(level));
    }
    return eigenvalues(static_cast<Eigen::Index>(level)) - eigenvalues(0);
}

double SpectrumResult::max_level_spacing() const
{
    double widest = 0.0;
    for (Eigen::Index i = 0; i + 1 < eigenvalues.size(); ++i) {
        widest = std::max(widest, eigenvalues(i + 1) - eigenvalues(i));
    }
    return widest;
}

StateVector SpectrumResult::state(std::size_t level) const
{
    if (level >= static_cast<std::size_t>(eigenvectors.cols())) {
        throw std::out_of_range("spectrum has no level " + std::to_string(level));
    }
    return StateVector(basis, eigenvectors.col(static_cast<Eigen::Index>(level)).cast<Complex>());
}

SpectrumResult spectrum(const HamiltonianMatrix& h)
{
    SpectrumResult result;
    result.basis = h.basis_ptr();
    const auto dim = static_cast<Eigen::Index>(h.dimension());
    if (dim == 1) {
        result.eigenvalues = h.diagonal();
        result.eigenvectors = Eigen::MatrixXd::Ones(1, 1);
        return result;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(h.diagonal(), h.off_diagonal(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("tridiagonal eigensolver did not converge");
    }
    result.eigenvalues = solver.eigenvalues();
    result.eigenvectors = solver.eigenvectors();
    for (Eigen::Index j = 0; j < dim; ++j) {
        auto v = result.eigenvectors.col(j);
        const double cut = 1e-8 * v.cwiseAbs().maxCoeff();
        Eigen::Index first = 0;
        while (std::abs(v(first)) <= cut) ++first;
        if (v(first) < 0.0) v *= -1.0;
    }
    return result;
}

SpectrumResult spectrum(BasisPtr basis, Interaction sigma, double q_prime)
{
    return spectrum(build_hamiltonian(std::move(basis), sigma, q_prime));
}

StateVector afm_ground_state(int n_total)
{
    if (n_total <= 0 || n_total % 2 != 0) {
        throw std::invalid_argument("antiferromagnetic recursion needs an even, positive N");
    }
    auto basis = build_sector(n_total, 0);
    const auto dim = static_cast<Eigen::Index>(basis->dimension());
    Eigen::VectorXd amps(dim);
    amps(0) = 1.0;
    const double n = n_total;
    for (Eigen::Index k = 1; k < dim; ++k) {
        const double two_k = 2.0 * static_cast<double>(k);
        amps(k) = -std::sqrt((n - two_k + 2.0) / (n - two_k + 1.0)) * amps(k - 1);
    }
    return StateVector(std::move(basis), amps.cast<Complex>());
}

StateVector fm_ground_manifold(int n_total, int m_index)
{
    if (n_total <= 0 || std::abs(m_index) > n_total) {
        throw std::invalid_argument("ferromagnetic manifold index |m| must not exceed N");
    }
    auto result = spectrum(build_sector(n_total, -m_index), Interaction::ferromagnetic, 0.0);
    return result.state(0);
}

}  // namespace spinmix
