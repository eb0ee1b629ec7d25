#include "spinmix/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

namespace spinmix {

//---------------------------------------------------------------------------//
// Parameters
//---------------------------------------------------------------------------//

DimensionlessParams derive_dimensionless(const PhysicalParams& p)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const double kappa = two_pi * p.kappa_hz;
    const double g0 = two_pi * p.g0_hz;
    const double lambda = two_pi * p.lambda_hz;
    const double eta = two_pi * p.eta_hz;
    const double delta = two_pi * p.delta_pa_hz;
    const double q = two_pi * p.q_hz;

    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("kappa must be positive and finite");
    }
    if (!(std::abs(lambda) > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be nonzero and finite");
    }
    if (!std::isfinite(g0) || !std::isfinite(eta) || !std::isfinite(q) || !std::isfinite(delta)) {
        throw std::invalid_argument("physical parameters must be finite");
    }

    DimensionlessParams out;
    out.alpha = eta / kappa;
    if (g0 != 0.0 && delta == 0.0) {
        throw std::invalid_argument("zero probe-atom detuning gives an unbounded light shift");
    }
    out.u0 = g0 == 0.0 ? 0.0 : g0 * g0 / delta;
    const double abs_lambda = std::abs(lambda);
    out.xi = std::abs(out.u0) * std::abs(eta) / std::sqrt(kappa * kappa * kappa * abs_lambda);
    out.q_prime = (q + out.u0 * out.alpha * out.alpha) / abs_lambda;
    out.sigma = lambda > 0.0 ? Interaction::antiferromagnetic : Interaction::ferromagnetic;
    if (!std::isfinite(out.xi) || !std::isfinite(out.q_prime)) {
        throw std::invalid_argument("derived parameters are not finite");
    }
    const double m = DimensionlessParams::regime_margin;
    out.fast_cavity = kappa >= m * abs_lambda;
    out.weak_light_shift = kappa >= m * std::abs(out.u0) * out.alpha * out.alpha;
    return out;
}

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//

namespace {

struct Outcome {
    std::optional<TrajectoryRecord> record;
    std::string error;
};

// Welford accumulation over runs, one slot per sample.
class SampleStats {
  public:
    void add(const TrajectoryRecord& rec)
    {
        if (count_ == 0) {
            times_ = rec.times;
            const auto n = rec.size();
            mean_.assign(n, 0.0);
            m2_.assign(n, 0.0);
            sq_.assign(n, 0.0);
            current_.assign(n, 0.0);
        } else if (rec.size() != times_.size()) {
            throw std::logic_error("trajectories of one ensemble disagree on the sample grid");
        }
        ++count_;
        const double inv = 1.0 / static_cast<double>(count_);
        for (std::size_t i = 0; i < times_.size(); ++i) {
            const double x = rec.n0_mean[i];
            const double delta = x - mean_[i];
            mean_[i] += delta * inv;
            m2_[i] += delta * (x - mean_[i]);
            const double second = rec.n0_var[i] * rec.n0_var[i] + x * x;
            sq_[i] += (second - sq_[i]) * inv;
            current_[i] += (rec.current[i] - current_[i]) * inv;
        }
    }

    void finish(EnsembleResult& out) const
    {
        out.run_count = count_;
        out.times = times_;
        out.mean_n0 = mean_;
        out.mean_n0_sq = sq_;
        out.mean_current = current_;
        out.std_n0.assign(times_.size(), 0.0);
        if (count_ > 1) {
            const double denom = static_cast<double>(count_ - 1);
            for (std::size_t i = 0; i < times_.size(); ++i) {
                out.std_n0[i] = std::sqrt(std::max(0.0, m2_[i] / denom));
            }
        }
    }

  private:
    std::size_t count_ = 0;
    std::vector<double> times_, mean_, m2_, sq_, current_;
};

std::size_t resolve_workers(std::size_t requested)
{
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

Outcome run_one(const StateVector& initial, const HamiltonianMatrix& h,
                const IntegratorConfig& config, std::uint64_t seed, std::size_t index)
{
    Outcome out;
    try {
        NoiseStream noise(seed, index);
        out.record = run_trajectory(initial, h, config, noise);
    } catch (const NumericalFailure& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace

EnsembleResult run_ensemble(const StateVector& initial, const HamiltonianMatrix& h,
                            const IntegratorConfig& config, std::size_t run_count,
                            std::uint64_t master_seed, const EnsembleOptions& options)
{
    if (run_count < 1) throw std::invalid_argument("an ensemble needs at least one run");
    if (initial.dimension() != h.dimension()) {
        throw std::invalid_argument("initial state does not live in the Hamiltonian's sector");
    }
    config.validate(h, initial);

    EnsembleResult result;
    result.requested_runs = run_count;
    result.master_seed = master_seed;
    result.config = config;
    result.n_total = h.basis().n_total();
    result.magnetization = h.basis().magnetization();
    result.sigma = h.sigma();
    result.q_prime = h.q_prime();

    const std::size_t workers = std::min(resolve_workers(options.workers), run_count);
    const std::size_t chunk = std::max<std::size_t>(options.chunk_size, workers);
    std::vector<Outcome> outcomes;
    SampleStats stats;

    for (std::size_t begin = 0; begin < run_count; begin += chunk) {
        const std::size_t end = std::min(run_count, begin + chunk);
        outcomes.assign(end - begin, Outcome{});

        if (workers == 1) {
            for (std::size_t i = begin; i < end; ++i) {
                outcomes[i - begin] = run_one(initial, h, config, master_seed, i);
            }
        } else {
            std::atomic<std::size_t> next{begin};
            std::exception_ptr first_error;
            std::atomic<bool> errored{false};
            {
                std::vector<std::jthread> pool;
                pool.reserve(workers);
                for (std::size_t w = 0; w < workers; ++w) {
                    pool.emplace_back([&] {
                        for (;;) {
                            const std::size_t i = next.fetch_add(1);
                            if (i >= end) return;
                            try {
                                outcomes[i - begin] = run_one(initial, h, config, master_seed, i);
                            } catch (...) {
                                if (!errored.exchange(true)) first_error = std::current_exception();
                                next.store(end);
                                return;
                            }
                        }
                    });
                }
            }
            if (first_error) std::rethrow_exception(first_error);
        }

        for (std::size_t i = begin; i < end; ++i) {
            auto& out = outcomes[i - begin];
            if (!out.record) {
                result.failed.emplace_back(i, out.error);
                continue;
            }
            stats.add(*out.record);
            if (options.sink) options.sink(i, *out.record);
        }
    }

    stats.finish(result);
    return result;
}

SteadyStateResult steady_state_distribution(const StateVector& initial, const HamiltonianMatrix& h,
                                            IntegratorConfig config, std::size_t run_count,
                                            double t_hold, std::uint64_t master_seed,
                                            double late_fraction, const EnsembleOptions& options)
{
    if (!(t_hold > 0.0)) throw std::invalid_argument("t_hold must be positive");
    if (!(late_fraction > 0.0 && late_fraction <= 1.0)) {
        throw std::invalid_argument("late_fraction must lie in (0, 1]");
    }
    if (run_count < 2) throw std::invalid_argument("a steady-state estimate needs at least two runs");
    config.t_final = t_hold;
    config.population_window_start = t_hold * (1.0 - late_fraction);
    config.record_states = false;

    const auto dim = static_cast<Eigen::Index>(h.dimension());
    std::vector<Eigen::VectorXd> per_run;
    per_run.reserve(run_count);

    EnsembleOptions opts = options;
    opts.sink = [&](std::size_t index, const TrajectoryRecord& rec) {
        per_run.push_back(rec.mean_populations);
        if (options.sink) options.sink(index, rec);
    };
    const EnsembleResult ens = run_ensemble(initial, h, config, run_count, master_seed, opts);

    SteadyStateResult out;
    out.failed = ens.failed;
    out.run_count = per_run.size();
    out.degrees_of_freedom = static_cast<std::size_t>(dim) - 1;
    out.probabilities = Eigen::VectorXd::Zero(dim);
    out.standard_errors = Eigen::VectorXd::Zero(dim);
    if (per_run.size() < 2) {
        out.converged = false;
        return out;
    }

    auto moments = [&](std::size_t from, std::size_t to, Eigen::VectorXd& mean, Eigen::VectorXd& se) {
        const double n = static_cast<double>(to - from);
        mean = Eigen::VectorXd::Zero(dim);
        for (std::size_t r = from; r < to; ++r) mean += per_run[r];
        mean /= n;
        Eigen::VectorXd ss = Eigen::VectorXd::Zero(dim);
        for (std::size_t r = from; r < to; ++r) ss += (per_run[r] - mean).cwiseAbs2();
        se = (ss / (n - 1.0) / n).cwiseSqrt();
    };

    moments(0, per_run.size(), out.probabilities, out.standard_errors);

    if (dim > 1 && out.standard_errors.minCoeff() > 0.0) {
        const double target = 1.0 / static_cast<double>(dim);
        const double chi2 =
            ((out.probabilities.array() - target) / out.standard_errors.array()).square().sum();
        out.chi_square = chi2;
        boost::math::chi_squared dist(static_cast<double>(out.degrees_of_freedom));
        out.p_value = boost::math::cdf(boost::math::complement(dist, chi2));
    }

    const Eigen::Index p = dim - 1;
    const auto runs = static_cast<Eigen::Index>(per_run.size());
    if (p >= 1 && runs > p + 1) {
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(dim));
        const Eigen::VectorXd mean = out.probabilities.head(p);
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
        for (const auto& v : per_run) {
            const Eigen::VectorXd d = v.head(p) - mean;
            cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
        }
        cov = cov.selfadjointView<Eigen::Lower>();
        cov /= static_cast<double>(runs - 1);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
        const Eigen::VectorXd diff = mean - u;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
            ldlt.vectorD().minCoeff() > 1e-12 * ldlt.vectorD().maxCoeff()) {
            const double n = static_cast<double>(runs), q = static_cast<double>(p);
            const double t2 = n * diff.dot(ldlt.solve(diff));
            out.hotelling_t2 = t2;
            boost::math::fisher_f dist(q, n - q);
            out.hotelling_p_value = boost::math::cdf(boost::math::complement(dist, (n - q) / (q * (n - 1.0)) * t2));
        }
    }

    const std::size_t half = per_run.size() / 2;
    if (half >= 2 && per_run.size() - half >= 2) {
        Eigen::VectorXd m1, s1, m2, s2;
        moments(0, half, m1, s1);
        moments(half, per_run.size(), m2, s2);
        double worst = 0.0;
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double sigma = std::sqrt(s1(k) * s1(k) + s2(k) * s2(k));
            const double diff = std::abs(m1(k) - m2(k));
            if (sigma > 0.0) {
                worst = std::max(worst, diff / sigma);
            } else if (diff > 0.0) {
                worst = std::numeric_limits<double>::infinity();
            }
        }
        out.half_ensemble_max_sigma = worst;
        out.converged = worst <= 3.0;
    }
    return out;
}

//---------------------------------------------------------------------------//
// Currents
//---------------------------------------------------------------------------//

double AveragedCurrent::expected_noise_std() const
{
    if (run_count == 0 || !(bin_width > 0.0)) return 0.0;
    return 1.0 / std::sqrt(static_cast<double>(run_count) * bin_width);
}

CurrentAverager::CurrentAverager(double bin_width) : bin_width_(bin_width)
{
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
        throw std::invalid_argument("bin width must be positive");
    }
}

void CurrentAverager::add(const TrajectoryRecord& rec)
{
    if (rec.size() < 2) throw std::invalid_argument("record has no completed bins");
    if (runs_ == 0) {
        const double delta = rec.times[1] - rec.times[0];
        const double ratio = bin_width_ / delta;
        const double rounded = std::round(ratio);
        if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
            throw std::invalid_argument("bin width must be a positive multiple of the sample interval");
        }
        per_bin_ = static_cast<std::size_t>(rounded);
        const std::size_t bins = (rec.size() - 1) / per_bin_;
        if (bins == 0) throw std::invalid_argument("bin width exceeds the record length");
        reference_times_ = rec.times;
        sum_current_.assign(bins, 0.0);
        sum_signal_.assign(bins, 0.0);
        times_.resize(bins);
        for (std::size_t b = 0; b < bins; ++b) times_[b] = rec.times[(b + 1) * per_bin_];
    } else if (rec.times != reference_times_) {
        throw std::invalid_argument("records do not share a time grid");
    }

    const double gain = 2.0 * std::numbers::sqrt2 * rec.xi;
    const double delta = rec.times[1] - rec.times[0];
    for (std::size_t b = 0; b < sum_current_.size(); ++b) {
        double signal = 0.0, wiener = 0.0;
        for (std::size_t j = b * per_bin_ + 1; j <= (b + 1) * per_bin_; ++j) {
            signal += gain * rec.n0_mean[j] * delta;
            wiener += rec.wiener[j];
        }
        const double width = delta * static_cast<double>(per_bin_);
        sum_signal_[b] += signal / width;
        sum_current_[b] += (signal + wiener) / width;
    }
    ++runs_;
}

AveragedCurrent CurrentAverager::result() const
{
    AveragedCurrent out;
    out.run_count = runs_;
    out.times = times_;
    out.bin_width = runs_ > 0 ? (reference_times_[1] - reference_times_[0]) *
                                    static_cast<double>(per_bin_)
                              : bin_width_;
    out.current = sum_current_;
    out.signal = sum_signal_;
    if (runs_ > 0) {
        const double inv = 1.0 / static_cast<double>(runs_);
        for (auto& v : out.current) v *= inv;
        for (auto& v : out.signal) v *= inv;
    }
    return out;
}

AveragedCurrent average_currents(std::span<const TrajectoryRecord> records, double bin_width)
{
    if (records.empty()) throw std::invalid_argument("no records to average");
    CurrentAverager avg(bin_width);
    for (const auto& rec : records) avg.add(rec);
    return avg.result();
}

}  // namespace spinmix
