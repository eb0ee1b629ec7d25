#include "spinmix/trajectory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spinmix/ground_states.hpp"

namespace spinmix {

namespace {

constexpr double kNormFloor = 1e-6;
constexpr double kPositivityFloor = 1e-6;

void require_finite_positive(double value, const char* what)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

double n0_range(const Eigen::VectorXd& n0)
{
    return n0.size() == 0 ? 0.0 : n0.maxCoeff() - n0.minCoeff();
}

}  // namespace

//---------------------------------------------------------------------------//
// IntegratorConfig
//---------------------------------------------------------------------------//

void IntegratorConfig::validate() const
{
    require_finite_positive(dt, "dt");
    require_finite_positive(t_final, "t_final");
    if (!(xi >= 0.0) || !std::isfinite(xi)) {
        throw std::invalid_argument("xi must be nonnegative and finite");
    }
    if (record_stride == 0) throw std::invalid_argument("record_stride must be at least 1");
    const double ratio = t_final / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
        throw std::invalid_argument("t_final must be an integer multiple of dt");
    }
    if (steps() % record_stride != 0) {
        throw std::invalid_argument("step count must be a multiple of record_stride");
    }
}

void IntegratorConfig::validate(const HamiltonianMatrix& h) const
{
    validate();
    if (scheme == DriftScheme::rk4) {
        const double spacing = spectrum(h).max_level_spacing();
        if (dt * spacing >= max_phase_per_step) {
            throw std::invalid_argument("dt = " + std::to_string(dt) +
                                        " does not resolve the level spacing " +
                                        std::to_string(spacing) + " (need dt * spacing < 0.1)");
        }
    } else {
        const double range = n0_range(n0_diagonal(h.basis()));
        if (dt * 2.0 * xi * xi * range * range >= max_phase_per_step) {
            throw std::invalid_argument("dt does not resolve the measurement dephasing rate");
        }
    }
}

void IntegratorConfig::validate(const HamiltonianMatrix& h, const StateVector& initial) const
{
    validate(h);
    if (scheme != DriftScheme::rk4) return;
    const auto e = spectrum(h).eigenvalues;
    const double shift = rk4_energy_shift(initial, h);
    const double radius = std::max(std::abs(e(0) - shift), std::abs(e(e.size() - 1) - shift));
    if (dt * radius >= max_rk4_phase) {
        throw std::invalid_argument("dt = " + std::to_string(dt) + " is outside the RK4 stability region: "
                                    "eigenvalues lie up to " + std::to_string(radius) +
                                    " from <H'> (need dt * distance < 2.75, or use split_exact)");
    }
}

double rk4_energy_shift(const StateVector& state, const HamiltonianMatrix& h)
{
    return state.amplitudes().dot(h.apply(state.amplitudes())).real();
}

std::size_t IntegratorConfig::steps() const
{
    return static_cast<std::size_t>(std::llround(t_final / dt));
}

//---------------------------------------------------------------------------//
// SseStepper
//---------------------------------------------------------------------------//

SseStepper::SseStepper(const HamiltonianMatrix& h, double xi, double dt, DriftScheme scheme,
                       double energy_shift)
    : SseStepper(h, n0_diagonal(h.basis()), xi, dt, scheme, energy_shift)
{
}

SseStepper::SseStepper(const HamiltonianMatrix& h, Eigen::VectorXd n0, double xi, double dt,
                       DriftScheme scheme, double energy_shift)
    : n0_(std::move(n0)),
      diag_(h.diagonal().array() - energy_shift),
      off_(h.off_diagonal()),
      xi_(xi),
      dt_(dt),
      shift_(energy_shift),
      scheme_(scheme)
{
    const auto dim = static_cast<Eigen::Index>(h.dimension());
    if (n0_.size() != dim) throw std::invalid_argument("N0 diagonal does not match H'");
    if (scheme_ == DriftScheme::split_exact) {
        const auto eig = spectrum(h);
        const Eigen::ArrayXd phase = (eig.eigenvalues.array() - energy_shift) * dt;
        const Eigen::MatrixXd& v = eig.eigenvectors;
        prop_re_ = v * phase.cos().matrix().asDiagonal() * v.transpose();
        prop_im_ = -(v * phase.sin().matrix().asDiagonal() * v.transpose());
    }
    re_ = im_ = tmp_re_ = tmp_im_ = b_re_ = b_im_ = c_re_ = c_im_ = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < 4; ++i) k_re_[i] = k_im_[i] = Eigen::VectorXd::Zero(dim);
}

void SseStepper::load(const Eigen::VectorXcd& amplitudes)
{
    if (amplitudes.size() != re_.size()) throw std::invalid_argument("state dimension mismatch");
    re_ = amplitudes.real();
    im_ = amplitudes.imag();
    const double norm = std::sqrt(re_.squaredNorm() + im_.squaredNorm());
    re_ /= norm;
    im_ /= norm;
}

Eigen::VectorXcd SseStepper::amplitudes() const
{
    Eigen::VectorXcd out(re_.size());
    out.real() = re_;
    out.imag() = im_;
    return out;
}

double SseStepper::mean_of(const Eigen::VectorXd& re, const Eigen::VectorXd& im) const
{
    const double norm2 = re.squaredNorm() + im.squaredNorm();
    return (re.cwiseAbs2() + im.cwiseAbs2()).dot(n0_) / norm2;
}

void SseStepper::apply_hamiltonian(const Eigen::VectorXd& v, Eigen::VectorXd& out) const
{
    const Eigen::Index n = v.size();
    out = diag_.cwiseProduct(v);
    if (n > 1) {
        out.head(n - 1) += off_.cwiseProduct(v.tail(n - 1));
        out.tail(n - 1) += off_.cwiseProduct(v.head(n - 1));
    }
}

void SseStepper::drift(const Eigen::VectorXd& re, const Eigen::VectorXd& im,
                       Eigen::VectorXd& out_re, Eigen::VectorXd& out_im) const
{
    const double mu = mean_of(re, im);
    const Eigen::ArrayXd damping = xi_ * xi_ * (n0_.array() - mu).square();
    if (scheme_ == DriftScheme::rk4) {
        // -i H psi: real part H im, imaginary part -H re
        apply_hamiltonian(im, out_re);
        apply_hamiltonian(re, out_im);
        out_re.array() -= damping * re.array();
        out_im.array() = -out_im.array() - damping * im.array();
    } else {
        out_re.array() = -damping * re.array();
        out_im.array() = -damping * im.array();
    }
}

void SseStepper::noise_coefficient(const Eigen::VectorXd& re, const Eigen::VectorXd& im,
                                   Eigen::VectorXd& out_re, Eigen::VectorXd& out_im) const
{
    const double mu = mean_of(re, im);
    const Eigen::ArrayXd factor = std::numbers::sqrt2 * xi_ * (n0_.array() - mu);
    out_re.array() = factor * re.array();
    out_im.array() = factor * im.array();
}

double SseStepper::step(double dW)
{
    if (scheme_ == DriftScheme::split_exact) {
        tmp_re_.noalias() = prop_re_ * re_;
        tmp_re_.noalias() -= prop_im_ * im_;
        tmp_im_.noalias() = prop_im_ * re_;
        tmp_im_.noalias() += prop_re_ * im_;
        re_.swap(tmp_re_);
        im_.swap(tmp_im_);
    }

    const bool measuring = xi_ > 0.0;
    if (scheme_ == DriftScheme::rk4 || measuring) {
        const double h = dt_;
        drift(re_, im_, k_re_[0], k_im_[0]);
        tmp_re_ = re_ + 0.5 * h * k_re_[0];
        tmp_im_ = im_ + 0.5 * h * k_im_[0];
        drift(tmp_re_, tmp_im_, k_re_[1], k_im_[1]);
        tmp_re_ = re_ + 0.5 * h * k_re_[1];
        tmp_im_ = im_ + 0.5 * h * k_im_[1];
        drift(tmp_re_, tmp_im_, k_re_[2], k_im_[2]);
        tmp_re_ = re_ + h * k_re_[2];
        tmp_im_ = im_ + h * k_im_[2];
        drift(tmp_re_, tmp_im_, k_re_[3], k_im_[3]);
        re_ += (h / 6.0) * (k_re_[0] + 2.0 * k_re_[1] + 2.0 * k_re_[2] + k_re_[3]);
        im_ += (h / 6.0) * (k_im_[0] + 2.0 * k_im_[1] + 2.0 * k_im_[2] + k_im_[3]);
    }

    if (measuring) {
        // Derivative-free Milstein: support value psi + b sqrt(dt)
        const double sqrt_dt = std::sqrt(dt_);
        noise_coefficient(re_, im_, b_re_, b_im_);
        tmp_re_ = re_ + sqrt_dt * b_re_;
        tmp_im_ = im_ + sqrt_dt * b_im_;
        noise_coefficient(tmp_re_, tmp_im_, c_re_, c_im_);
        const double corr = (dW * dW - dt_) / (2.0 * sqrt_dt);
        re_ += dW * b_re_ + corr * (c_re_ - b_re_);
        im_ += dW * b_im_ + corr * (c_im_ - b_im_);
    }

    const double norm2 = re_.squaredNorm() + im_.squaredNorm();
    if (!std::isfinite(norm2) || norm2 < kNormFloor * kNormFloor) {
        throw NumericalFailure("state norm collapsed to " + std::to_string(std::sqrt(norm2)) +
                               " before renormalization; reduce dt");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    re_ *= inv;
    im_ *= inv;
    return norm2;
}

double SseStepper::n0_mean() const { return mean_of(re_, im_); }

double SseStepper::n0_fluctuation() const
{
    const Eigen::VectorXd p = re_.cwiseAbs2() + im_.cwiseAbs2();
    const double mean = p.dot(n0_);
    const double second = p.dot(n0_.cwiseAbs2());
    return std::sqrt(std::max(0.0, second - mean * mean));
}

double SseStepper::energy() const
{
    Eigen::VectorXd hre, him;
    apply_hamiltonian(re_, hre);
    apply_hamiltonian(im_, him);
    return re_.dot(hre) + im_.dot(him) + shift_;
}

void SseStepper::accumulate_populations(Eigen::VectorXd& sums) const
{
    sums += re_.cwiseAbs2() + im_.cwiseAbs2();
}

//---------------------------------------------------------------------------//
// SmeStepper
//---------------------------------------------------------------------------//

SmeStepper::SmeStepper(const HamiltonianMatrix& h, double xi, double dt)
    : SmeStepper(h, n0_diagonal(h.basis()), xi, dt)
{
}

SmeStepper::SmeStepper(const HamiltonianMatrix& h, Eigen::VectorXd n0, double xi, double dt)
    : h_(h.dense()), n0_(std::move(n0)), xi_(xi), dt_(dt)
{
    const auto dim = h_.rows();
    if (n0_.size() != dim) throw std::invalid_argument("N0 diagonal does not match H'");
    // 2 xi^2 L[N0] acts elementwise: rho_ij -> -xi^2 (n_i - n_j)^2 rho_ij
    dephasing_.resize(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double d = n0_(i) - n0_(j);
            dephasing_(i, j) = -xi * xi * d * d;
        }
    }
    if (xi > 0.0) {
        const auto eig = spectrum(h);
        const Eigen::ArrayXd phase = eig.eigenvalues.array() * dt;
        const Eigen::MatrixXcd v = eig.eigenvectors.cast<Complex>();
        Eigen::VectorXcd rot(dim);
        for (Eigen::Index k = 0; k < dim; ++k) rot(k) = std::polar(1.0, -phase(k));
        unitary_ = v * rot.asDiagonal() * v.adjoint();
    }
    rho_ = Eigen::MatrixXcd::Zero(dim, dim);
}

void SmeStepper::load(const Eigen::MatrixXcd& rho)
{
    if (rho.rows() != h_.rows() || rho.cols() != h_.cols()) {
        throw std::invalid_argument("density matrix dimension mismatch");
    }
    rho_ = rho;
}

Eigen::MatrixXcd SmeStepper::drift(const Eigen::MatrixXcd& rho) const
{
    const Complex minus_i(0.0, -1.0);
    Eigen::MatrixXcd out = minus_i * (h_ * rho - rho * h_);
    out.array() += dephasing_.array() * rho.array();
    return out;
}

double SmeStepper::step(double dW)
{
    if (xi_ > 0.0 && dW != 0.0) {
        // exp(-i H' dt), then the measurement operator
        //   M = 1 - xi^2 N0^2 dt + sqrt(2) xi N0 dY + xi^2 N0^2 (dY^2 - dt)
        // with dY = dW + 2 sqrt(2) xi <N0> dt, applied as M rho M.
        rho_ = (unitary_ * rho_ * unitary_.adjoint()).eval();
        const double mean = rho_.diagonal().real().dot(n0_) / rho_.trace().real();
        const double g = std::numbers::sqrt2 * xi_;
        const double dY = dW + 2.0 * g * mean * dt_;
        const Eigen::ArrayXd n2 = n0_.array().square();
        const Eigen::VectorXd m =
            (1.0 - xi_ * xi_ * n2 * dt_ + g * n0_.array() * dY + xi_ * xi_ * n2 * (dY * dY - dt_)).matrix();
        rho_ = (m.asDiagonal() * rho_ * m.asDiagonal()).eval();
    } else {
        const double h = dt_;
        const Eigen::MatrixXcd k1 = drift(rho_);
        const Eigen::MatrixXcd k2 = drift(rho_ + 0.5 * h * k1);
        const Eigen::MatrixXcd k3 = drift(rho_ + 0.5 * h * k2);
        const Eigen::MatrixXcd k4 = drift(rho_ + h * k3);
        rho_ += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
    const double tr = rho_.trace().real();
    if (!std::isfinite(tr) || tr < kNormFloor) {
        throw NumericalFailure("density matrix trace collapsed; reduce dt");
    }
    rho_ /= tr;
    return tr;
}

double SmeStepper::min_eigenvalue() const
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

//---------------------------------------------------------------------------//
// Single steps
//---------------------------------------------------------------------------//

StateVector sse_step(const StateVector& state, const HamiltonianMatrix& h, const Eigen::VectorXd& n0,
                     double xi, double dt, double dW)
{
    if (state.dimension() != h.dimension()) throw std::invalid_argument("state/H' dimension mismatch");
    SseStepper stepper(h, n0, xi, dt, DriftScheme::rk4, rk4_energy_shift(state, h));
    stepper.load(state.amplitudes());
    stepper.step(dW);
    return StateVector(state.basis_ptr(), stepper.amplitudes());
}

DensityMatrix sme_step(const DensityMatrix& rho, const HamiltonianMatrix& h,
                       const Eigen::VectorXd& n0, double xi, double dt, double dW)
{
    if (rho.dimension() != h.dimension()) throw std::invalid_argument("rho/H' dimension mismatch");
    SmeStepper stepper(h, n0, xi, dt);
    stepper.load(rho.entries());
    stepper.step(dW);
    if (stepper.min_eigenvalue() < -kPositivityFloor) {
        throw NumericalFailure("density matrix lost positivity; reduce dt");
    }
    return DensityMatrix(rho.basis_ptr(), stepper.entries(), kPositivityFloor);
}

//---------------------------------------------------------------------------//
// Trajectories
//---------------------------------------------------------------------------//

TrajectoryRecord run_trajectory(const StateVector& initial, const HamiltonianMatrix& h,
                                const IntegratorConfig& config, NoiseStream& noise)
{
    if (initial.dimension() != h.dimension()) {
        throw std::invalid_argument("initial state does not live in the Hamiltonian's sector");
    }
    config.validate(h, initial);

    SseStepper stepper(h, config.xi, config.dt, config.scheme, rk4_energy_shift(initial, h));
    stepper.load(initial.amplitudes());

    TrajectoryRecord rec;
    rec.seed = noise.seed();
    rec.trajectory_index = noise.trajectory_index();
    rec.xi = config.xi;
    rec.dt = config.dt;
    rec.n_total = h.basis().n_total();
    rec.magnetization = h.basis().magnetization();
    rec.sigma = h.sigma();
    rec.q_prime = h.q_prime();

    const std::size_t n_steps = config.steps();
    const std::size_t n_samples = n_steps / config.record_stride + 1;
    rec.times.reserve(n_samples);
    rec.n0_mean.reserve(n_samples);
    rec.n0_var.reserve(n_samples);
    rec.current.reserve(n_samples);
    rec.wiener.reserve(n_samples);
    if (config.population_window_start) {
        rec.mean_populations = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(h.dimension()));
    }

    const double signal_gain = 2.0 * std::numbers::sqrt2 * config.xi;
    const double bin = config.sample_interval();
    auto record = [&](double tau, double bin_dW, double width) {
        const double mean = stepper.n0_mean();
        rec.times.push_back(tau);
        rec.n0_mean.push_back(mean);
        rec.n0_var.push_back(stepper.n0_fluctuation());
        rec.wiener.push_back(bin_dW);
        rec.current.push_back(width > 0.0 ? signal_gain * mean + bin_dW / width : signal_gain * mean);
        if (config.record_states) rec.states.push_back(stepper.amplitudes());
        if (config.population_window_start && tau >= *config.population_window_start) {
            stepper.accumulate_populations(rec.mean_populations);
            ++rec.population_samples;
        }
    };

    record(0.0, 0.0, 0.0);
    double bin_dW = 0.0;
    for (std::size_t s = 1; s <= n_steps; ++s) {
        const double dW = noise.wiener_increment(config.dt);
        stepper.step(dW);
        bin_dW += dW;
        if (s % config.record_stride == 0) {
            record(static_cast<double>(s) * config.dt, bin_dW, bin);
            bin_dW = 0.0;
        }
    }
    if (rec.population_samples > 0) {
        rec.mean_populations /= static_cast<double>(rec.population_samples);
    }
    rec.final_amplitudes = stepper.amplitudes();
    return rec;
}

DensityRecord run_sme(const DensityMatrix& initial, const HamiltonianMatrix& h,
                      const IntegratorConfig& config, NoiseStream* noise)
{
    if (initial.dimension() != h.dimension()) {
        throw std::invalid_argument("initial density matrix does not match H'");
    }
    if (config.scheme != DriftScheme::rk4) {
        throw std::invalid_argument("the density-matrix integrator supports the rk4 scheme only");
    }
    config.validate(h);

    const Eigen::VectorXd n0 = n0_diagonal(h.basis());
    SmeStepper stepper(h, n0, config.xi, config.dt);
    stepper.load(initial.entries());

    DensityRecord rec;
    auto record = [&](double tau) {
        if (stepper.min_eigenvalue() < -kPositivityFloor) {
            throw NumericalFailure("density matrix lost positivity at tau = " +
                                   std::to_string(tau) + "; reduce dt");
        }
        const Eigen::MatrixXcd& rho = stepper.entries();
        const Eigen::VectorXd p = rho.diagonal().real();
        const double mean = p.dot(n0);
        rec.times.push_back(tau);
        rec.n0_mean.push_back(mean);
        rec.n0_var.push_back(std::sqrt(std::max(0.0, p.dot(n0.cwiseAbs2()) - mean * mean)));
        rec.purity.push_back(rho.cwiseAbs2().sum());
        if (config.record_states) rec.states.push_back(rho);
    };

    record(0.0);
    const std::size_t n_steps = config.steps();
    for (std::size_t s = 1; s <= n_steps; ++s) {
        const double dW = noise ? noise->wiener_increment(config.dt) : 0.0;
        stepper.step(dW);
        if (s % config.record_stride == 0) record(static_cast<double>(s) * config.dt);
    }
    return rec;
}

}  // namespace spinmix
