// Fixed-(N, M) Fock sectors of a spin-1 condensate in the single-mode
// approximation, the measured observable N0, and the dimensionless
// spin-mixing Hamiltonian
//
//   H' = sigma [ (N+ - N-)^2 + (2 N0 - 1)(N+ + N-)
//                + 2 c0^dag c0^dag c+ c- + 2 c+^dag c-^dag c0 c0 ] - q' N0
//
// in units of |lambda|, with sigma = lambda / |lambda|.
#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spinmix {

using Complex = std::complex<double>;

/// Sign of the spin-dependent collision coefficient.
enum class Interaction : int { antiferromagnetic = 1, ferromagnetic = -1 };

inline double sign_of(Interaction s) { return static_cast<int>(s); }
Interaction interaction_from_sign(int sigma);
std::string to_string(Interaction s);

/// Raised when an integrator or eigen-solve leaves its region of validity.
class NumericalFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Occupation {
    int n_plus = 0;
    int n_zero = 0;
    int n_minus = 0;

    friend bool operator==(const Occupation&, const Occupation&) = default;
};

/// Fock states |N+, N0, N-> with fixed N and M = N+ - N-, ordered by
/// increasing N+ (equivalently by the pair index k).
class SectorBasis {
  public:
    SectorBasis(int n_total, int magnetization);

    int n_total() const { return n_total_; }
    int magnetization() const { return magnetization_; }
    std::size_t dimension() const { return states_.size(); }

    const Occupation& operator[](std::size_t i) const { return states_[i]; }
    const std::vector<Occupation>& states() const { return states_; }

    std::optional<std::size_t> index_of(const Occupation& occ) const;

  private:
    int n_total_;
    int magnetization_;
    std::vector<Occupation> states_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

BasisPtr build_sector(int n_total, int magnetization);

/// Real symmetric tridiagonal H' in the k-ordered basis.
class HamiltonianMatrix {
  public:
    HamiltonianMatrix(BasisPtr basis, Interaction sigma, double q_prime,
                      Eigen::VectorXd diagonal, Eigen::VectorXd off_diagonal);

    const SectorBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    Interaction sigma() const { return sigma_; }
    double q_prime() const { return q_prime_; }
    std::size_t dimension() const { return static_cast<std::size_t>(diag_.size()); }

    const Eigen::VectorXd& diagonal() const { return diag_; }
    // Entry i couples basis states i and i + 1.
    const Eigen::VectorXd& off_diagonal() const { return off_; }

    Eigen::MatrixXd dense() const;
    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

  private:
    BasisPtr basis_;
    Interaction sigma_;
    double q_prime_;
    Eigen::VectorXd diag_;
    Eigen::VectorXd off_;
};

HamiltonianMatrix build_hamiltonian(BasisPtr basis, Interaction sigma, double q_prime);

/// N0 eigenvalue of each basis state.
Eigen::VectorXd n0_diagonal(const SectorBasis& basis);

/// Normalized pure state over a sector.
class StateVector {
  public:
    // Normalizes the amplitudes; throws on dimension mismatch or zero norm.
    StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes);

    static StateVector fock(BasisPtr basis, std::size_t index);

    const SectorBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    std::size_t dimension() const { return static_cast<std::size_t>(amps_.size()); }

    Eigen::VectorXd populations() const { return amps_.cwiseAbs2(); }

  private:
    BasisPtr basis_;
    Eigen::VectorXcd amps_;
};

/// Hermitian, unit-trace, positive semidefinite matrix over a sector.
class DensityMatrix {
  public:
    static constexpr double default_positivity_tolerance = 1e-10;

    // Validates Hermiticity (to 1e-10 relative), rescales the trace to one and
    // rejects eigenvalues below -positivity_tolerance.
    DensityMatrix(BasisPtr basis, Eigen::MatrixXcd entries,
                  double positivity_tolerance = default_positivity_tolerance);

    static DensityMatrix pure(const StateVector& psi);

    const SectorBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    const Eigen::MatrixXcd& entries() const { return rho_; }
    std::size_t dimension() const { return static_cast<std::size_t>(rho_.rows()); }

    double purity() const;
    double min_eigenvalue() const;

  private:
    BasisPtr basis_;
    Eigen::MatrixXcd rho_;
};

double expectation(const StateVector& psi, const Eigen::VectorXd& diagonal_observable);
double expectation(const StateVector& psi, const Eigen::MatrixXcd& observable);
double expectation(const DensityMatrix& rho, const Eigen::VectorXd& diagonal_observable);
double expectation(const DensityMatrix& rho, const Eigen::MatrixXcd& observable);

/// Number fluctuation sqrt(<N0^2> - <N0>^2).
double n0_fluctuation(const StateVector& psi);
double n0_fluctuation(const DensityMatrix& rho);

}  // namespace spinmix
