#include <doctest.h>

#include <cmath>
#include <vector>

#include "spinmix/analysis.hpp"
#include "spinmix/ground_states.hpp"
#include "spinmix/trajectory.hpp"

using namespace spinmix;

namespace {

TrajectoryRecord free_run(int n, double q_prime, double dt, double t_final, std::size_t stride)
{
    const auto h = build_hamiltonian(build_sector(n, 0), Interaction::antiferromagnetic, q_prime);
    IntegratorConfig c;
    c.dt = dt;
    c.t_final = t_final;
    c.record_stride = stride;
    NoiseStream noise(3, 0);
    return run_trajectory(StateVector::fock(h.basis_ptr(), 0), h, c, noise);
}

}  // namespace

TEST_CASE("unmeasured spectral peaks sit on eigenvalue differences")
{
    const int n = 10;
    const auto rec = free_run(n, 0.0, 1e-3, 50.0, 10);
    const auto sp = fourier_spectrum(rec.times, rec.n0_mean);
    const auto levels = spectrum(build_sector(n, 0), Interaction::antiferromagnetic, 0.0).eigenvalues;
    REQUIRE(!sp.peaks.empty());
    for (const auto& p : sp.peaks) {
        double nearest = 1e300;
        for (Eigen::Index i = 0; i < levels.size(); ++i) {
            for (Eigen::Index j = 0; j < i; ++j) {
                nearest = std::min(nearest, std::abs(levels(i) - levels(j) - p.frequency));
            }
        }
        CHECK(nearest <= sp.resolution);
    }
}

TEST_CASE("collapse time scales as N^-1/2")
{
    const auto r100 = free_run(100, 0.0, 2.5e-4, 2.0, 4);
    const auto r400 = free_run(400, 0.0, 1.5625e-5, 2.0, 64);
    const auto m100 = collapse_revival_metrics(r100.times, r100.n0_mean, 100);
    const auto m400 = collapse_revival_metrics(r400.times, r400.n0_mean, 400);
    REQUIRE(m100.tau_c);
    REQUIRE(m400.tau_c);
    const double ratio = *m400.tau_c / *m100.tau_c;
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
}

TEST_CASE("a large quadratic Zeeman shift suppresses N0 fluctuations")
{
    const auto low = free_run(100, 0.0, 2.5e-4, 3.0, 4);
    const auto high = free_run(100, 10.0, 2.5e-4, 3.0, 4);
    const auto vl = variance_trace(low), vh = variance_trace(high);
    CHECK(vl.front() == 0.0);
    CHECK(vh.front() == 0.0);
    double sl = 0.0, sh = 0.0;
    for (std::size_t i = vl.size() / 4; i < vl.size(); ++i) {
        sl += vl[i];
        sh += vh[i];
    }
    CHECK(sl > 2.0 * sh);
}
