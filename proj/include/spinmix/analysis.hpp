// Post-processing of trajectory and ensemble series: spectra, fluctuation
// traces, collapse/revival metrics and photocurrent smoothing. Frequencies are
// angular, in units of |lambda|.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spinmix/ensemble.hpp"
#include "spinmix/trajectory.hpp"

namespace spinmix {

enum class Window { none, hann };

struct SpectrumPeak {
    double frequency = 0.0;
    double magnitude = 0.0;
};

struct SpectrumTrace {
    std::vector<double> frequencies;  // 0, d_omega, ..., Nyquist
    std::vector<double> magnitudes;   // one-sided amplitude spectrum
    std::vector<SpectrumPeak> peaks;  // strongest first
    double resolution = 0.0;          // d_omega = 2 pi / (n dtau)
    // Mean square of the (mean-subtracted, windowed) series that was
    // transformed; equals integrated_power() by Parseval.
    double variance = 0.0;
    std::size_t sample_count = 0;

    double integrated_power() const;
    std::optional<SpectrumPeak> dominant() const;
};

SpectrumTrace fourier_spectrum(std::span<const double> times, std::span<const double> values,
                               Window window = Window::none);

/// sqrt(<N0^2> - <N0>^2) per sample.
std::vector<double> variance_trace(const TrajectoryRecord& record);
std::vector<double> variance_trace(const EnsembleResult& ensemble);
std::vector<double> variance_trace(const DensityRecord& record);

/// |analytic signal| of the mean-subtracted series, evenly extended at both
/// ends before the transform.
std::vector<double> envelope(std::span<const double> values);

struct CollapseRevivalMetrics {
    std::vector<double> envelope;  // of mean_n0 / N
    double initial_amplitude = 0.0;
    // First time the envelope drops below initial_amplitude / e.
    std::optional<double> tau_c;
    // Mean of <N0>/N over the first sub-threshold stretch after tau_c.
    std::optional<double> plateau_level;
    std::optional<double> revival_period;
    std::vector<double> revival_times;
    std::vector<double> revival_amplitudes;  // envelope at revival_times
};

CollapseRevivalMetrics collapse_revival_metrics(std::span<const double> times,
                                                std::span<const double> mean_n0, int n_total);

/// Centered moving average over window_width followed by a linear-phase
/// low-pass at angular cutoff (cutoff <= 0 skips the low-pass).
std::vector<double> smooth_current(std::span<const double> times, std::span<const double> values,
                                   double window_width, double cutoff);

struct SignalTest {
    double chi_square = 0.0;
    std::size_t degrees_of_freedom = 0;
    double p_value = 1.0;
    bool detected = false;
};

/// Chi-square test of the series against a constant (its weighted mean),
/// with known per-point standard deviations. Detected means p < alpha.
SignalTest detect_signal(std::span<const double> values, std::span<const double> sigmas,
                         double alpha = 0.05);

}  // namespace spinmix
