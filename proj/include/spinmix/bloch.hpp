// Closed two-atom model: (<S_x>, <S_y>, <S_z>) with S_z = N0 - 1 in the
// basis |1> = |0,2,0>, |2> = |1,0,1>, obeying
//
//   dS = A S dtau - 2 sqrt(2) xi (S_x S_z, S_y S_z, S_z^2 - 1)^T dW,
//
//   A = [[-4 xi^2, -2 s, 0], [2 s, -4 xi^2, -4 sqrt(2) s], [0, 4 sqrt(2) s, 0]]
//
// with s = sigma. Kept independent of the Fock-space integrators so that it
// can cross-check them.
#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "spinmix/fock.hpp"

namespace spinmix {

struct BlochState {
    double s_x = 0.0;
    double s_y = 0.0;
    double s_z = 0.0;

    Eigen::Vector3d vec() const { return {s_x, s_y, s_z}; }
    static BlochState from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
    double norm() const { return vec().norm(); }
};

Eigen::Matrix3d bloch_drift_matrix(Interaction sigma, double xi);

/// Expectations of S_x, S_y, S_z in an N = 2, M = 0 state.
BlochState bloch_from_state(const StateVector& psi);

/// Fixed-step integrator: exact propagator for the linear drift, derivative
/// Milstein term for the multiplicative noise.
class BlochIntegrator {
  public:
    BlochIntegrator(Interaction sigma, double xi, double dt);

    BlochState step(const BlochState& s, double dW) const;
    // Unconditional evolution (noise term switched off).
    BlochState drift_step(const BlochState& s) const;
    const Eigen::Matrix3d& propagator() const { return propagator_; }

  private:
    double xi_;
    double dt_;
    Eigen::Matrix3d propagator_;
};

BlochState bloch_step(const BlochState& state, Interaction sigma, double xi, double dt, double dW);

struct BlochCheckReport {
    double dt = 0.0;
    std::size_t trajectories = 0;
    // Largest |S_bloch - S_sse| over all samples of all trajectories.
    double max_deviation = 0.0;
    // Mean over trajectories of the per-trajectory maximum.
    double mean_max_deviation = 0.0;
};

/// Drives the N = 2 SSE and the Bloch integrator from |1> with identical
/// increments. Each dW is the sum of noise_substeps draws at dt/noise_substeps,
/// so a run at (dt, 2) and one at (dt/2, 1) follow the same Brownian path.
BlochCheckReport bloch_vs_sse_check(double xi, double t_final, std::size_t n_traj, std::uint64_t seed,
                                    double dt, Interaction sigma = Interaction::antiferromagnetic,
                                    std::size_t noise_substeps = 1);

}  // namespace spinmix
