#include "spinmix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <fftw3.h>

namespace spinmix {

namespace {

// Plan creation in FFTW is not thread-safe; execution is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * std::max<std::size_t>(n, 1))))
    {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    fftw_complex* data;
};

// In-place complex transform; sign is FFTW_FORWARD or FFTW_BACKWARD.
void transform(std::vector<std::complex<double>>& v, int sign)
{
    const int n = static_cast<int>(v.size());
    FftwBuffer buf(v.size());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, buf.data, buf.data, sign, FFTW_ESTIMATE);
    }
    for (int i = 0; i < n; ++i) {
        buf.data[i][0] = v[static_cast<std::size_t>(i)].real();
        buf.data[i][1] = v[static_cast<std::size_t>(i)].imag();
    }
    fftw_execute(plan);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = {buf.data[i][0], buf.data[i][1]};
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
}

double uniform_step(std::span<const double> times, std::size_t n_values)
{
    if (times.size() != n_values) throw std::invalid_argument("times and values differ in length");
    if (times.size() < 2) throw std::invalid_argument("series needs at least two samples");
    const double step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(step > 0.0)) throw std::invalid_argument("time grid must be increasing");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - times[i - 1] - step) > 1e-6 * step) {
            throw std::invalid_argument("time grid is not uniform");
        }
    }
    return step;
}

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

std::size_t reflect(std::ptrdiff_t i, std::size_t n)
{
    const auto m = static_cast<std::ptrdiff_t>(n);
    if (m == 1) return 0;
    const std::ptrdiff_t period = 2 * (m - 1);
    i %= period;
    if (i < 0) i += period;
    return static_cast<std::size_t>(i < m ? i : period - i);
}

}  // namespace

//---------------------------------------------------------------------------//
// Spectra
//---------------------------------------------------------------------------//

double SpectrumTrace::integrated_power() const
{
    // One-sided amplitudes: interior bins carry half their squared amplitude.
    const std::size_t m = magnitudes.size();
    if (m == 0) return 0.0;
    const bool nyquist = sample_count % 2 == 0;
    double p = magnitudes[0] * magnitudes[0];
    for (std::size_t k = 1; k < m; ++k) {
        const double a2 = magnitudes[k] * magnitudes[k];
        p += (k == m - 1 && nyquist) ? a2 : 0.5 * a2;
    }
    return p;
}

std::optional<SpectrumPeak> SpectrumTrace::dominant() const
{
    if (peaks.empty()) return std::nullopt;
    return peaks.front();
}

SpectrumTrace fourier_spectrum(std::span<const double> times, std::span<const double> values,
                               Window window)
{
    const double step = uniform_step(times, values.size());
    const std::size_t n = values.size();

    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (window == Window::hann) {
            w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(n - 1));
        }
        x[i] = (values[i] - mean) * w;
    }

    SpectrumTrace out;
    for (const auto& v : x) out.variance += std::norm(v);
    out.variance /= static_cast<double>(n);

    transform(x, FFTW_FORWARD);
    const std::size_t bins = n / 2 + 1;
    out.resolution = 2.0 * std::numbers::pi / (static_cast<double>(n) * step);
    out.sample_count = n;
    out.frequencies.resize(bins);
    out.magnitudes.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        out.frequencies[k] = out.resolution * static_cast<double>(k);
        const bool single = k == 0 || (n % 2 == 0 && k == n / 2);
        out.magnitudes[k] = (single ? 1.0 : 2.0) * std::abs(x[k]) / static_cast<double>(n);
    }

    const double threshold =
        5.0 * median(std::vector<double>(out.magnitudes.begin() + 1, out.magnitudes.end()));
    for (std::size_t k = 1; k + 1 < bins; ++k) {
        const double m = out.magnitudes[k];
        if (m > out.magnitudes[k - 1] && m >= out.magnitudes[k + 1] && m > threshold) {
            out.peaks.push_back({out.frequencies[k], m});
        }
    }
    std::stable_sort(out.peaks.begin(), out.peaks.end(),
                     [](const SpectrumPeak& a, const SpectrumPeak& b) { return a.magnitude > b.magnitude; });
    return out;
}

//---------------------------------------------------------------------------//
// Fluctuations
//---------------------------------------------------------------------------//

std::vector<double> variance_trace(const TrajectoryRecord& record) { return record.n0_var; }

std::vector<double> variance_trace(const DensityRecord& record) { return record.n0_var; }

std::vector<double> variance_trace(const EnsembleResult& ensemble)
{
    std::vector<double> out(ensemble.mean_n0.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double m = ensemble.mean_n0[i];
        out[i] = std::sqrt(std::max(0.0, ensemble.mean_n0_sq[i] - m * m));
    }
    return out;
}

//---------------------------------------------------------------------------//
// Collapse and revival
//---------------------------------------------------------------------------//

std::vector<double> envelope(std::span<const double> values)
{
    const std::size_t n = values.size();
    if (n == 0) return {};
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);

    // [reversed | series | reversed] keeps the ends free of wrap-around jumps
    const std::size_t m = 3 * n;
    std::vector<std::complex<double>> z(m);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = values[i] - mean;
        z[n + i] = y;
        z[n - 1 - i] = y;
        z[3 * n - 1 - i] = y;
    }
    transform(z, FFTW_FORWARD);
    for (std::size_t k = 1; k < m; ++k) {
        if (2 * k < m) {
            z[k] *= 2.0;
        } else if (2 * k > m) {
            z[k] = 0.0;
        }
    }
    transform(z, FFTW_BACKWARD);

    std::vector<double> env(n);
    for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(z[n + i]) / static_cast<double>(m);
    return env;
}

namespace {

// Autocorrelation normalized by the overlap length, C(0) = 1.
std::vector<double> unbiased_autocorrelation(std::span<const double> y)
{
    const std::size_t n = y.size();
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    std::vector<std::complex<double>> z(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i] = y[i];
    transform(z, FFTW_FORWARD);
    for (auto& v : z) v = std::norm(v);
    transform(z, FFTW_BACKWARD);
    std::vector<double> c(n);
    const double c0 = z[0].real() / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        c[k] = c0 > 0.0 ? z[k].real() / static_cast<double>(n - k) / c0 : 0.0;
    }
    return c;
}

}  // namespace

CollapseRevivalMetrics collapse_revival_metrics(std::span<const double> times,
                                                std::span<const double> mean_n0, int n_total)
{
    if (n_total <= 0) throw std::invalid_argument("n_total must be positive");
    const double step = uniform_step(times, mean_n0.size());
    const std::size_t n = mean_n0.size();

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = mean_n0[i] / n_total;

    CollapseRevivalMetrics out;
    out.envelope = envelope(x);
    out.initial_amplitude = out.envelope.front();
    if (!(out.initial_amplitude > 1e-12)) return out;

    const double threshold = out.initial_amplitude / std::numbers::e;
    std::size_t below = 0;
    while (below < n && out.envelope[below] >= threshold) ++below;
    if (below == n) return out;

    const double e0 = out.envelope[below - 1], e1 = out.envelope[below];
    out.tau_c = times[below - 1] + step * (e0 - threshold) / (e0 - e1);

    std::size_t end = below;
    while (end < n && out.envelope[end] < threshold) ++end;
    out.plateau_level =
        std::accumulate(x.begin() + static_cast<std::ptrdiff_t>(below),
                        x.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
        static_cast<double>(end - below);

    // Revival period: first strong autocorrelation maximum beyond the collapse.
    std::vector<double> y(n);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - mean;
    const std::vector<double> c = unbiased_autocorrelation(y);
    const auto lo = static_cast<std::size_t>(std::ceil(2.0 * *out.tau_c / step)) + 1;
    const std::size_t hi = n / 2;
    if (lo + 2 >= hi) return out;
    const double c_max = *std::max_element(c.begin() + static_cast<std::ptrdiff_t>(lo),
                                           c.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    if (c_max < 0.5) return out;

    std::optional<std::size_t> lag;
    for (std::size_t k = lo; k <= hi && !lag; ++k) {
        if (c[k] >= 0.9 * c_max && c[k] >= c[k - 1] && (k + 1 >= n || c[k] >= c[k + 1])) lag = k;
    }
    if (!lag) return out;
    double shift = 0.0;
    if (*lag + 1 < n) {
        const double a = c[*lag - 1], b = c[*lag], d = c[*lag + 1];
        const double denom = a - 2.0 * b + d;
        if (denom < 0.0) shift = 0.5 * (a - d) / denom;
    }
    const double period = (static_cast<double>(*lag) + shift) * step;
    out.revival_period = period;

    const double t_end = times.back();
    for (int k = 1; times.front() + k * period + period / 8.0 <= t_end + 1e-12; ++k) {
        const double center = times.front() + k * period;
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(times[i] - center) > period / 8.0) continue;
            if (best == n || out.envelope[i] > out.envelope[best]) best = i;
        }
        if (best == n) break;
        out.revival_times.push_back(times[best]);
        out.revival_amplitudes.push_back(out.envelope[best]);
    }
    return out;
}

//---------------------------------------------------------------------------//
// Smoothing
//---------------------------------------------------------------------------//

std::vector<double> smooth_current(std::span<const double> times, std::span<const double> values,
                                   double window_width, double cutoff)
{
    const double step = uniform_step(times, values.size());
    const std::size_t n = values.size();
    if (!(window_width >= 0.0)) throw std::invalid_argument("window width must be nonnegative");

    const auto half = static_cast<std::size_t>(std::llround(window_width / (2.0 * step)));
    if (2 * half + 1 > n) throw std::invalid_argument("smoothing window is longer than the series");

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
    std::vector<double> avg(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t h = std::min({half, i, n - 1 - i});
        avg[i] = (prefix[i + h + 1] - prefix[i - h]) / static_cast<double>(2 * h + 1);
    }

    // cycles per sample
    const double fc = cutoff * step / (2.0 * std::numbers::pi);
    if (!(cutoff > 0.0) || fc >= 0.5) return avg;

    const auto taps_half = std::min<std::size_t>(
        static_cast<std::size_t>(std::ceil(4.0 / fc)), n > 1 ? n - 1 : 0);
    std::vector<double> kernel(2 * taps_half + 1);
    const double span = static_cast<double>(taps_half + 1);
    for (std::size_t j = 0; j < kernel.size(); ++j) {
        const double t = static_cast<double>(j) - static_cast<double>(taps_half);
        const double sinc = t == 0.0 ? 2.0 * fc
                                     : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
        // Blackman taper
        const double u = std::numbers::pi * t / span;
        const double w = 0.42 + 0.5 * std::cos(u) + 0.08 * std::cos(2.0 * u);
        kernel[j] = sinc * w;
    }
    const double dc = std::accumulate(kernel.begin(), kernel.end(), 0.0);
    for (auto& k : kernel) k /= dc;

    std::vector<double> out(n, 0.0);
    const auto th = static_cast<std::ptrdiff_t>(taps_half);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t j = -th; j <= th; ++j) {
            acc += kernel[static_cast<std::size_t>(j + th)] *
                   avg[reflect(static_cast<std::ptrdiff_t>(i) + j, n)];
        }
        out[i] = acc;
    }
    return out;
}

SignalTest detect_signal(std::span<const double> values, std::span<const double> sigmas, double alpha)
{
    if (values.size() != sigmas.size()) throw std::invalid_argument("values and sigmas differ in length");
    if (values.size() < 2) throw std::invalid_argument("signal test needs at least two points");
    double wsum = 0.0, wx = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(sigmas[i] > 0.0)) throw std::invalid_argument("standard deviations must be positive");
        const double w = 1.0 / (sigmas[i] * sigmas[i]);
        wsum += w;
        wx += w * values[i];
    }
    const double mu = wx / wsum;
    SignalTest out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double r = (values[i] - mu) / sigmas[i];
        out.chi_square += r * r;
    }
    out.degrees_of_freedom = values.size() - 1;
    boost::math::chi_squared dist(static_cast<double>(out.degrees_of_freedom));
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.chi_square));
    out.detected = out.p_value < alpha;
    return out;
}

}  // namespace spinmix
