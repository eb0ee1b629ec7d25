// Conditional evolution under continuous homodyne measurement of N0.
//
// Pure states follow the Ito stochastic Schroedinger equation
//   d|psi> = [-i H' - xi^2 (N0 - <N0>)^2] |psi> dtau + sqrt(2) xi (N0 - <N0>) |psi> dW
// and density matrices the stochastic master equation
//   drho = -i[H', rho] dtau + 2 xi^2 L[N0] rho dtau + sqrt(2) xi H[N0] rho dW,
// with the scaled photocurrent I' = 2 sqrt(2) xi <N0> + dW/dtau sharing the
// same increments.
//
// One SSE step = deterministic drift (classical RK4, <N0> re-evaluated at
// every stage), then a strong order-1 derivative-free Milstein kick for the
// noise, then renormalization.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spinmix/fock.hpp"
#include "spinmix/noise.hpp"

namespace spinmix {

enum class DriftScheme {
    // RK4 on the full drift with H' shifted by <H'> of the initial state;
    // requires dt * (widest level spacing) < 0.1, and dt * |E - <H'>| < 2.75
    // over the whole spectrum for stability.
    rk4,
    // Exact propagator exp(-i H' dt) followed by RK4 on the measurement drift;
    // requires dt * 2 xi^2 (N0 range)^2 < 0.1. Used for long holds where the
    // full spectral width of H' would otherwise be under-resolved.
    split_exact,
};

struct IntegratorConfig {
    double dt = 1e-4;
    double t_final = 1.0;
    double xi = 0.0;
    std::size_t record_stride = 1;
    DriftScheme scheme = DriftScheme::rk4;
    // Keep the full amplitude vector at every sample.
    bool record_states = false;
    // Time-average |<k|psi>|^2 over samples with tau >= this value.
    std::optional<double> population_window_start;

    static constexpr double max_phase_per_step = 0.1;
    // Explicit RK4 on i H' is stable for phases per step below 2 sqrt(2).
    static constexpr double max_rk4_phase = 2.75;

    void validate() const;
    void validate(const HamiltonianMatrix& h) const;
    // Adds the RK4 stability check, which depends on the energy shift.
    void validate(const HamiltonianMatrix& h, const StateVector& initial) const;

    std::size_t steps() const;
    double sample_interval() const { return dt * static_cast<double>(record_stride); }
};

/// Energy offset removed from H' before RK4 stepping (a global phase).
double rk4_energy_shift(const StateVector& state, const HamiltonianMatrix& h);

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> n0_mean;
    // Number fluctuation sqrt(<N0^2> - <N0>^2).
    std::vector<double> n0_var;
    std::vector<double> current;
    // Sum of dW over the bin ending at each sample; zero at tau = 0.
    std::vector<double> wiener;

    std::uint64_t seed = 0;
    std::uint64_t trajectory_index = 0;
    double xi = 0.0;
    double dt = 0.0;
    int n_total = 0;
    int magnetization = 0;
    Interaction sigma = Interaction::antiferromagnetic;
    double q_prime = 0.0;

    Eigen::VectorXcd final_amplitudes;
    std::vector<Eigen::VectorXcd> states;
    Eigen::VectorXd mean_populations;
    std::size_t population_samples = 0;

    std::size_t size() const { return times.size(); }
};

/// Reusable workspace for repeated SSE steps on one sector.
class SseStepper {
  public:
    SseStepper(const HamiltonianMatrix& h, double xi, double dt,
               DriftScheme scheme = DriftScheme::rk4, double energy_shift = 0.0);
    SseStepper(const HamiltonianMatrix& h, Eigen::VectorXd n0, double xi, double dt,
               DriftScheme scheme = DriftScheme::rk4, double energy_shift = 0.0);

    void load(const Eigen::VectorXcd& amplitudes);
    Eigen::VectorXcd amplitudes() const;

    // Advances one step with Wiener increment dW. Returns the squared norm
    // reached before renormalization.
    double step(double dW);

    double n0_mean() const;
    double n0_fluctuation() const;
    double energy() const;  // <H'> without the internal shift
    void accumulate_populations(Eigen::VectorXd& sums) const;

  private:
    void drift(const Eigen::VectorXd& re, const Eigen::VectorXd& im, Eigen::VectorXd& out_re,
               Eigen::VectorXd& out_im) const;
    void noise_coefficient(const Eigen::VectorXd& re, const Eigen::VectorXd& im,
                           Eigen::VectorXd& out_re, Eigen::VectorXd& out_im) const;
    void apply_hamiltonian(const Eigen::VectorXd& v, Eigen::VectorXd& out) const;
    double mean_of(const Eigen::VectorXd& re, const Eigen::VectorXd& im) const;

    Eigen::VectorXd n0_;
    Eigen::VectorXd diag_;
    Eigen::VectorXd off_;
    double xi_;
    double dt_;
    double shift_;
    DriftScheme scheme_;
    Eigen::MatrixXd prop_re_;
    Eigen::MatrixXd prop_im_;

    Eigen::VectorXd re_, im_;
    Eigen::VectorXd k_re_[4], k_im_[4];
    Eigen::VectorXd tmp_re_, tmp_im_, b_re_, b_im_, c_re_, c_im_;
};

/// Reusable workspace for repeated SME steps on one sector.
class SmeStepper {
  public:
    SmeStepper(const HamiltonianMatrix& h, double xi, double dt);
    SmeStepper(const HamiltonianMatrix& h, Eigen::VectorXd n0, double xi, double dt);

    void load(const Eigen::MatrixXcd& rho);
    const Eigen::MatrixXcd& entries() const { return rho_; }

    // Advances one step; dW = 0 gives the unconditional (ensemble) step, RK4
    // on the Lindblad generator. Conditional steps use the exact unitary
    // followed by a Kraus-form measurement update, which keeps rho positive.
    // Returns the trace reached before renormalization.
    double step(double dW);
    double min_eigenvalue() const;

  private:
    Eigen::MatrixXcd drift(const Eigen::MatrixXcd& rho) const;

    Eigen::MatrixXd h_;
    Eigen::VectorXd n0_;
    Eigen::MatrixXd dephasing_;
    Eigen::MatrixXcd unitary_;
    double xi_;
    double dt_;
    Eigen::MatrixXcd rho_;
};

StateVector sse_step(const StateVector& state, const HamiltonianMatrix& h, const Eigen::VectorXd& n0,
                     double xi, double dt, double dW);

DensityMatrix sme_step(const DensityMatrix& rho, const HamiltonianMatrix& h,
                       const Eigen::VectorXd& n0, double xi, double dt, double dW);

/// Integrates one conditional pure-state trajectory. The noise stream is
/// advanced in place, so a second call continues the same record.
TrajectoryRecord run_trajectory(const StateVector& initial, const HamiltonianMatrix& h,
                                const IntegratorConfig& config, NoiseStream& noise);

struct DensityRecord {
    std::vector<double> times;
    std::vector<double> n0_mean;
    std::vector<double> n0_var;
    std::vector<double> purity;
    std::vector<Eigen::MatrixXcd> states;
};

/// Integrates the SME. With noise == nullptr the stochastic term is dropped
/// and the result is the unconditional (deterministic) dynamics.
DensityRecord run_sme(const DensityMatrix& initial, const HamiltonianMatrix& h,
                      const IntegratorConfig& config, NoiseStream* noise = nullptr);

}  // namespace spinmix
