// Independent reference implementations used only by the tests.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinmix/fock.hpp"

namespace oracle {

using Fock = std::array<int, 3>;  // (n+, n0, n-)
using Ket = std::map<Fock, double>;

enum Mode { plus = 0, zero = 1, minus = 2 };

inline Ket annihilate(const Ket& in, int mode)
{
    Ket out;
    for (const auto& [f, a] : in) {
        if (f[mode] == 0) continue;
        Fock g = f;
        g[mode] -= 1;
        out[g] += a * std::sqrt(static_cast<double>(f[mode]));
    }
    return out;
}

inline Ket create(const Ket& in, int mode)
{
    Ket out;
    for (const auto& [f, a] : in) {
        Fock g = f;
        g[mode] += 1;
        out[g] += a * std::sqrt(static_cast<double>(g[mode]));
    }
    return out;
}

inline Ket number(const Ket& in, int mode)
{
    return create(annihilate(in, mode), mode);
}

inline void add(Ket& acc, const Ket& term, double scale)
{
    for (const auto& [f, a] : term) acc[f] += scale * a;
}

/// Every (n+, n0, n-) with the given N and M, in no particular order.
inline std::vector<Fock> enumerate(int n, int m)
{
    std::vector<Fock> out;
    for (int np = n; np >= 0; --np) {
        for (int nm = 0; np + nm <= n; ++nm) {
            if (np - nm == m) out.push_back({np, n - np - nm, nm});
        }
    }
    return out;
}

/// H' built from ladder operators, returned in the ordering of `basis`.
inline Eigen::MatrixXd hamiltonian(const spinmix::SectorBasis& basis, double sigma, double q_prime)
{
    const auto states = enumerate(basis.n_total(), basis.magnetization());
    const auto dim = static_cast<Eigen::Index>(states.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    auto index = [&](const Fock& f) -> Eigen::Index {
        const auto k = basis.index_of({f[0], f[1], f[2]});
        return k ? static_cast<Eigen::Index>(*k) : -1;
    };
    for (const auto& f : states) {
        const Ket ket{{f, 1.0}};
        Ket out;
        const Ket np = number(ket, plus), nm = number(ket, minus), n0 = number(ket, zero);
        // (N+ - N-)^2
        Ket diff = np;
        add(diff, nm, -1.0);
        add(out, number(diff, plus), sigma);
        add(out, number(diff, minus), -sigma);
        // (2 N0 - 1)(N+ + N-)
        Ket sum = np;
        add(sum, nm, 1.0);
        add(out, number(sum, zero), 2.0 * sigma);
        add(out, sum, -sigma);
        // 2 c0^dag c0^dag c+ c- + h.c.
        add(out, create(create(annihilate(annihilate(ket, minus), plus), zero), zero), 2.0 * sigma);
        add(out, create(create(annihilate(annihilate(ket, zero), zero), minus), plus), 2.0 * sigma);
        add(out, n0, -q_prime);
        const Eigen::Index col = index(f);
        for (const auto& [g, a] : out) {
            if (a == 0.0) continue;
            h(index(g), col) += a;
        }
    }
    return h;
}

/// sigma (J (J + 1) - 2 N) over even J = 0..N, ascending.
inline std::vector<double> closed_form_spectrum(int n, double sigma)
{
    std::vector<double> e;
    for (int j = n % 2; j <= n; j += 2) {
        e.push_back(sigma * (static_cast<double>(j) * (j + 1) - 2.0 * n));
    }
    std::sort(e.begin(), e.end());
    return e;
}

/// Generator of drho/dtau = -i[H, rho] + 2 xi^2 (N rho N - {N^2, rho}/2)
/// acting on column-stacked rho.
inline Eigen::MatrixXcd lindbladian(const Eigen::MatrixXd& h, const Eigen::VectorXd& n0, double xi)
{
    using Eigen::MatrixXcd;
    const auto d = h.rows();
    const MatrixXcd id = MatrixXcd::Identity(d, d);
    const MatrixXcd hc = h.cast<std::complex<double>>();
    const MatrixXcd nn = n0.asDiagonal().toDenseMatrix().cast<std::complex<double>>();
    auto kron = [](const MatrixXcd& a, const MatrixXcd& b) {
        MatrixXcd k(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return k;
    };
    // vec(A X B) = (B^T kron A) vec(X)
    const std::complex<double> i1(0.0, 1.0);
    MatrixXcd l = -i1 * (kron(id, hc) - kron(hc.transpose(), id));
    const MatrixXcd n2 = nn * nn;
    l += 2.0 * xi * xi * (kron(nn.transpose(), nn) - 0.5 * kron(id, n2) - 0.5 * kron(n2.transpose(), id));
    return l;
}

inline Eigen::MatrixXcd evolve_unconditional(const Eigen::MatrixXd& h, const Eigen::VectorXd& n0, double xi,
                                             const Eigen::MatrixXcd& rho0, double tau)
{
    const auto d = h.rows();
    const Eigen::MatrixXcd prop = (lindbladian(h, n0, xi) * tau).exp();
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
    Eigen::VectorXcd w = prop * v;
    return Eigen::Map<Eigen::MatrixXcd>(w.data(), d, d);
}

/// exp(-i H tau) psi via dense diagonalization.
inline Eigen::VectorXcd evolve_pure(const Eigen::MatrixXd& h, const Eigen::VectorXcd& psi, double tau)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::MatrixXcd v = es.eigenvectors().cast<std::complex<double>>();
    Eigen::VectorXcd c = v.adjoint() * psi;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(std::complex<double>(0.0, -es.eigenvalues()(k) * tau));
    return v * c;
}

}  // namespace oracle
