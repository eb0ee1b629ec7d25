#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spinmix/fock.hpp"
#include "spinmix/trajectory.hpp"

namespace spinmix {

//---------------------------------------------------------------------------//
// Physical -> dimensionless parameters
//---------------------------------------------------------------------------//

/// Cavity and atom parameters as ordinary frequencies in Hz (the value X in
/// "2 pi x X Hz"); converted to angular frequencies internally.
struct PhysicalParams {
    double kappa_hz = 0.0;     // cavity field decay rate
    double g0_hz = 0.0;        // atom-cavity coupling
    double lambda_hz = 0.0;    // spin-dependent collision coefficient (signed)
    double eta_hz = 0.0;       // probe drive amplitude
    double delta_pa_hz = 0.0;  // probe-atom detuning omega_p - omega_a
    double q_hz = 0.0;         // quadratic Zeeman shift
};

struct DimensionlessParams {
    double xi = 0.0;        // |U0| eta / sqrt(kappa^3 |lambda|)
    double q_prime = 0.0;   // (q + U0 alpha^2) / |lambda|
    double alpha = 0.0;     // eta / kappa
    double u0 = 0.0;        // g0^2 / delta_pa, rad/s
    Interaction sigma = Interaction::antiferromagnetic;
    // kappa >> |lambda| and kappa >> |U0| alpha^2, with >> read as a factor of
    // regime_margin.
    bool fast_cavity = false;
    bool weak_light_shift = false;
    bool regime_ok() const { return fast_cavity && weak_light_shift; }

    static constexpr double regime_margin = 10.0;
};

DimensionlessParams derive_dimensionless(const PhysicalParams& p);

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//

struct EnsembleOptions {
    // 0 selects std::thread::hardware_concurrency().
    std::size_t workers = 0;
    std::size_t chunk_size = 64;
    // Called for every completed trajectory in increasing index order.
    std::function<void(std::size_t, const TrajectoryRecord&)> sink;
};

struct EnsembleResult {
    std::vector<double> times;
    std::vector<double> mean_n0;      // <<N0>>
    std::vector<double> std_n0;       // spread of <N0> across runs
    std::vector<double> mean_n0_sq;   // <<N0^2>>
    std::vector<double> mean_current;

    std::size_t requested_runs = 0;
    std::size_t run_count = 0;  // completed
    std::vector<std::pair<std::size_t, std::string>> failed;

    std::uint64_t master_seed = 0;
    IntegratorConfig config;
    int n_total = 0;
    int magnetization = 0;
    Interaction sigma = Interaction::antiferromagnetic;
    double q_prime = 0.0;

    bool partial_failure() const { return !failed.empty(); }
};

/// Trajectory i is driven by NoiseStream(master_seed, i). Statistics are
/// reduced in index order, so the result does not depend on the worker count.
EnsembleResult run_ensemble(const StateVector& initial, const HamiltonianMatrix& h,
                            const IntegratorConfig& config, std::size_t run_count,
                            std::uint64_t master_seed, const EnsembleOptions& options = {});

struct SteadyStateResult {
    Eigen::VectorXd probabilities;
    Eigen::VectorXd standard_errors;
    // Against the uniform distribution 1/dim; absent when some standard error
    // vanishes.
    std::optional<double> chi_square;
    std::size_t degrees_of_freedom = 0;
    std::optional<double> p_value;
    // Hotelling T^2 against uniform using the across-run covariance of the
    // first dim - 1 populations, with its F-distribution p-value. Neighbouring
    // k are strongly correlated within a run, which the diagonal chi-square
    // ignores. Absent unless run_count > dim and the covariance is regular.
    std::optional<double> hotelling_t2;
    std::optional<double> hotelling_p_value;
    // Largest |difference| between the two half-ensembles in combined sigmas.
    double half_ensemble_max_sigma = 0.0;
    bool converged = true;
    std::size_t run_count = 0;
    std::vector<std::pair<std::size_t, std::string>> failed;
};

/// Holds each trajectory for t_hold and time-averages |<k|psi>|^2 over the
/// last late_fraction of the hold, then averages over runs.
SteadyStateResult steady_state_distribution(const StateVector& initial, const HamiltonianMatrix& h,
                                            IntegratorConfig config, std::size_t run_count,
                                            double t_hold, std::uint64_t master_seed,
                                            double late_fraction = 0.5,
                                            const EnsembleOptions& options = {});

//---------------------------------------------------------------------------//
// Photocurrent averaging
//---------------------------------------------------------------------------//

struct AveragedCurrent {
    std::vector<double> times;    // bin end points
    std::vector<double> current;  // run-averaged I' per bin
    std::vector<double> signal;   // run-averaged 2 sqrt(2) xi <N0> per bin
    double bin_width = 0.0;
    std::size_t run_count = 0;

    // Standard deviation of the white-noise residual per bin, 1/sqrt(R dtau).
    double expected_noise_std() const;
};

/// Streaming form of average_currents for ensembles too large to hold.
class CurrentAverager {
  public:
    explicit CurrentAverager(double bin_width);

    void add(const TrajectoryRecord& record);
    AveragedCurrent result() const;

  private:
    double bin_width_;
    std::size_t per_bin_ = 0;
    std::size_t runs_ = 0;
    std::vector<double> reference_times_;
    std::vector<double> sum_current_;
    std::vector<double> sum_signal_;
    std::vector<double> times_;
};

AveragedCurrent average_currents(std::span<const TrajectoryRecord> records, double bin_width);

}  // namespace spinmix
