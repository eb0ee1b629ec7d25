#include "spinmix/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "spinmix/noise.hpp"
#include "spinmix/trajectory.hpp"

namespace spinmix {

namespace {

Eigen::Vector3d noise_vector(const Eigen::Vector3d& s, double xi)
{
    const double g = -2.0 * std::numbers::sqrt2 * xi;
    return g * Eigen::Vector3d(s.x() * s.z(), s.y() * s.z(), s.z() * s.z() - 1.0);
}

// (grad b) b for the noise vector above
Eigen::Vector3d noise_derivative_product(const Eigen::Vector3d& s, double xi)
{
    const double c = 8.0 * xi * xi;
    const double zz = s.z() * s.z();
    return c * Eigen::Vector3d(s.x() * (2.0 * zz - 1.0), s.y() * (2.0 * zz - 1.0),
                               2.0 * s.z() * (zz - 1.0));
}

}  // namespace

Eigen::Matrix3d bloch_drift_matrix(Interaction sigma, double xi)
{
    const double s = sign_of(sigma);
    const double damp = -4.0 * xi * xi;
    const double c = 4.0 * std::numbers::sqrt2 * s;
    Eigen::Matrix3d a;
    a << damp, -2.0 * s, 0.0,
         2.0 * s, damp, -c,
         0.0, c, 0.0;
    return a;
}

BlochState bloch_from_state(const StateVector& psi)
{
    const auto& b = psi.basis();
    if (b.n_total() != 2 || b.magnetization() != 0) {
        throw std::invalid_argument("Bloch variables are defined for N = 2, M = 0 only");
    }
    const Complex a1 = psi.amplitudes()(0);
    const Complex a2 = psi.amplitudes()(1);
    const Complex cross = std::conj(a1) * a2;
    return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(a1) - std::norm(a2)};
}

BlochIntegrator::BlochIntegrator(Interaction sigma, double xi, double dt)
    : xi_(xi), dt_(dt), propagator_((bloch_drift_matrix(sigma, xi) * dt).exp())
{
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
}

BlochState BlochIntegrator::step(const BlochState& state, double dW) const
{
    Eigen::Vector3d s = state.vec();
    if (xi_ != 0.0) {
        s += noise_vector(s, xi_) * dW + 0.5 * noise_derivative_product(s, xi_) * (dW * dW - dt_);
    }
    return BlochState::from(propagator_ * s);
}

BlochState BlochIntegrator::drift_step(const BlochState& state) const
{
    return BlochState::from(propagator_ * state.vec());
}

BlochState bloch_step(const BlochState& state, Interaction sigma, double xi, double dt, double dW)
{
    return BlochIntegrator(sigma, xi, dt).step(state, dW);
}

BlochCheckReport bloch_vs_sse_check(double xi, double t_final, std::size_t n_traj, std::uint64_t seed,
                                    double dt, Interaction sigma, std::size_t noise_substeps)
{
    if (n_traj == 0 || noise_substeps == 0) throw std::invalid_argument("empty Bloch check");
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_final = t_final;
    cfg.xi = xi;
    auto basis = build_sector(2, 0);
    const auto h = build_hamiltonian(basis, sigma, 0.0);
    cfg.validate(h);

    const BlochIntegrator bloch(sigma, xi, dt);
    const StateVector initial = StateVector::fock(basis, 0);
    const std::size_t n_steps = cfg.steps();
    const double sub_dt = dt / static_cast<double>(noise_substeps);

    BlochCheckReport report;
    report.dt = dt;
    report.trajectories = n_traj;
    double sum_of_max = 0.0;
    for (std::size_t t = 0; t < n_traj; ++t) {
        NoiseStream noise(seed, t);
        SseStepper sse(h, xi, dt);
        sse.load(initial.amplitudes());
        BlochState s = bloch_from_state(initial);
        double worst = 0.0;
        for (std::size_t step = 0; step < n_steps; ++step) {
            double dW = 0.0;
            for (std::size_t j = 0; j < noise_substeps; ++j) dW += noise.wiener_increment(sub_dt);
            sse.step(dW);
            s = bloch.step(s, dW);
            const BlochState reference = bloch_from_state(StateVector(basis, sse.amplitudes()));
            worst = std::max(worst, (s.vec() - reference.vec()).norm());
        }
        report.max_deviation = std::max(report.max_deviation, worst);
        sum_of_max += worst;
    }
    report.mean_max_deviation = sum_of_max / static_cast<double>(n_traj);
    return report;
}

}  // namespace spinmix
