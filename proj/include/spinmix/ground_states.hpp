#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "spinmix/fock.hpp"

namespace spinmix {

/// Full eigensystem of H' in one sector.
struct SpectrumResult {
    BasisPtr basis;
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // column j pairs with eigenvalues(j)

    /// E_level - E_0.
    double gap(std::size_t level = 1) const;
    /// Largest spacing between neighbouring eigenvalues.
    double max_level_spacing() const;
    StateVector state(std::size_t level) const;
};

/// Diagonalizes the tridiagonal H'. Each eigenvector is signed so that its
/// first non-negligible amplitude is positive.
SpectrumResult spectrum(const HamiltonianMatrix& h);
SpectrumResult spectrum(BasisPtr basis, Interaction sigma, double q_prime);

/// Antiferromagnetic (q' = 0) ground state in the M = 0 sector, built from
/// the pair-amplitude recursion with A_0 > 0. Requires even N.
StateVector afm_ground_state(int n_total);

/// Ferromagnetic (q' = 0) ground state |psi_m> of the sector M = -m.
StateVector fm_ground_manifold(int n_total, int m_index);

}  // namespace spinmix
