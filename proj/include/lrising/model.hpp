// Long-range transverse-field Ising chain
//
//   H = - sum_{i<j} J_ij sx_i sx_j - B sum_i sy_i,   J_ij = J0 / |i-j|^alpha
//
// on an open chain, with its Z2 parity P = prod_i sy_i, parity-resolved
// spectrum and Gibbs states. Units: hbar = k_B = 1.
#pragma once

#include "lrising/qcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrising {

struct SpinChainParams {
    int n_sites = 7;
    double j0 = 1.0;
    double alpha = 1.0;
    double b_field = 1.0;

    void validate() const {
        detail::require(n_sites >= 1, "n_sites must be >= 1");
        detail::require(n_sites <= kMaxSites, "n_sites exceeds the dense cap of " + std::to_string(kMaxSites));
        detail::require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive");
        detail::require(std::isfinite(j0) && std::isfinite(b_field), "couplings must be finite");
    }
};

inline double coupling(int i, int j, double j0, double alpha) {
    detail::require(i != j, "coupling needs distinct sites");
    return j0 / std::pow(std::abs(static_cast<double>(i - j)), alpha);
}

// Dense Hamiltonian built by direct bit manipulation: sx_i sx_j flips bits
// i and j; sy_i flips bit i with phase +i (from |0>) or -i (from |1>).
inline Matrix build_hamiltonian(const SpinChainParams& p) {
    p.validate();
    const int n = p.n_sites;
    const std::size_t dim = detail::dim_of(n);
    Matrix h = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            const double jij = coupling(i, j, p.j0, p.alpha);
            const std::size_t flip = detail::site_mask(i, n) | detail::site_mask(j, n);
            for (std::size_t col = 0; col < dim; ++col) h(col ^ flip, col) -= jij;
        }
        const std::size_t m = detail::site_mask(i, n);
        for (std::size_t col = 0; col < dim; ++col) h(col ^ m, col) -= p.b_field * ((col & m) ? -kI : kI);
    }
    return h;
}

// P = sy (x) sy (x) ... : P|x> = i^{#0(x)} (-i)^{#1(x)} |~x>.
inline Matrix parity_operator(int n_sites) {
    const std::size_t dim = detail::dim_of(n_sites);
    const std::size_t all = dim - 1;
    Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    static const Complex powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (std::size_t col = 0; col < dim; ++col) {
        const int ones = std::popcount(col);
        const int zeros = n_sites - ones;
        // i^zeros * (-i)^ones = i^(zeros - ones)
        const int k = (((zeros - ones) % 4) + 4) % 4;
        p(col ^ all, col) = powers[k];
    }
    return p;
}

struct ModelSpectrum {
    SpinChainParams params;
    SpectralDecomposition decomposition;
    RealVector parity_values;
    double degeneracy_tol = 0.0;

    int n_sites() const noexcept { return params.n_sites; }
    const RealVector& energies() const noexcept { return decomposition.eigenvalues; }
    const Matrix& eigenvectors() const noexcept { return decomposition.eigenvectors; }
};

inline constexpr double kParityTol = 1e-8;

// Eigenpairs of H with every near-degenerate cluster re-diagonalized in P.
// degeneracy_tol <= 0 selects 1e-8 x spectral width.
inline ModelSpectrum spectrum(const SpinChainParams& params, double degeneracy_tol = -1.0) {
    const Matrix h = build_hamiltonian(params);
    const Matrix p = parity_operator(params.n_sites);
    {
        const double comm = detail::max_abs(h * p - p * h);
        if (!(comm < 1e-10 * std::max(1.0, detail::max_abs(h))))
            throw std::runtime_error("Hamiltonian does not commute with parity: " + std::to_string(comm));
    }

    ModelSpectrum out;
    out.params = params;
    out.decomposition = hermitian_eig(h);
    RealVector& e = out.decomposition.eigenvalues;
    Matrix& v = out.decomposition.eigenvectors;
    const Eigen::Index dim = e.size();
    const double width = e[dim - 1] - e[0];
    out.degeneracy_tol = degeneracy_tol > 0.0 ? degeneracy_tol : 1e-8 * std::max(width, 1e-300);

    Eigen::Index start = 0;
    while (start < dim) {
        Eigen::Index stop = start + 1;
        while (stop < dim && e[stop] - e[start] < out.degeneracy_tol) ++stop;
        const Eigen::Index k = stop - start;
        if (k > 1) {
            const Matrix block = v.middleCols(start, k);
            const Matrix reduced = block.adjoint() * p * block;
            const SpectralDecomposition pe = hermitian_eig(0.5 * (reduced + reduced.adjoint()), 1e-8);
            // P eigenvalues ascending: -1 sector first
            Matrix rotated = block * pe.eigenvectors;
            const SpectralDecomposition fixed = [&] {
                // restore the deterministic phase convention on the new vectors
                SpectralDecomposition tmp{RealVector(k), rotated};
                for (Eigen::Index c = 0; c < k; ++c) {
                    Eigen::Index best;
                    rotated.col(c).cwiseAbs().maxCoeff(&best);
                    const Complex ph = rotated(best, c) / std::abs(rotated(best, c));
                    tmp.eigenvectors.col(c) = rotated.col(c) * std::conj(ph);
                    tmp.eigenvectors(best, c) = std::abs(rotated(best, c));
                    tmp.eigenvalues[c] = (tmp.eigenvectors.col(c).adjoint() * h * tmp.eigenvectors.col(c))(0, 0).real();
                }
                return tmp;
            }();
            // order inside the cluster by energy, keeping the P order on ties
            std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](Eigen::Index l, Eigen::Index r) { return fixed.eigenvalues[l] < fixed.eigenvalues[r]; });
            for (Eigen::Index c = 0; c < k; ++c) {
                v.col(start + c) = fixed.eigenvectors.col(order[static_cast<std::size_t>(c)]);
                e[start + c] = fixed.eigenvalues[order[static_cast<std::size_t>(c)]];
            }
        }
        start = stop;
    }
    // Rayleigh quotients can reorder neighbours across cluster edges by ~ulp
    for (Eigen::Index i = 1; i < dim; ++i) e[i] = std::max(e[i], e[i - 1]);

    out.parity_values.resize(dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        const Complex pv = (v.col(c).adjoint() * p * v.col(c))(0, 0);
        if (!(std::abs(std::abs(pv.real()) - 1.0) < kParityTol && std::abs(pv.imag()) < kParityTol))
            throw std::runtime_error("eigenstate " + std::to_string(c) + " has no definite parity");
        out.parity_values[c] = pv.real() > 0 ? 1.0 : -1.0;
    }
    return out;
}

inline double energy_gap(const ModelSpectrum& spec) {
    detail::require(spec.energies().size() >= 2, "energy_gap needs at least two levels");
    return std::max(0.0, spec.energies()[1] - spec.energies()[0]);
}

inline Eigen::Index ground_index(const ModelSpectrum& spec) {
    const RealVector& e = spec.energies();
    if (e.size() >= 2 && e[1] - e[0] < spec.degeneracy_tol && spec.parity_values[0] < 0 && spec.parity_values[1] > 0)
        return 1;
    return 0;
}

// Lowest eigenstate; among a quasi-degenerate lowest pair, the parity +1 member.
inline PureState ground_state(const ModelSpectrum& spec) {
    return PureState::normalized(spec.eigenvectors().col(ground_index(spec)));
}

// exp(-beta H)/Z in the eigenbasis, energies shifted by E0.
inline DensityMatrix thermal_state(const ModelSpectrum& spec, double beta) {
    detail::require(beta >= 0.0, "beta must be non-negative");
    const RealVector& e = spec.energies();
    RealVector w(e.size());
    if (std::isinf(beta)) {
        w.setZero();
        w[ground_index(spec)] = 1.0;
    } else {
        for (Eigen::Index k = 0; k < e.size(); ++k) w[k] = std::exp(-beta * (e[k] - e[0]));
        w /= w.sum();
    }
    const Matrix& v = spec.eigenvectors();
    Matrix rho = v * w.cast<Complex>().asDiagonal() * v.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix::trusted(std::move(rho), spec.n_sites());
}

// <sy> of one site in a pure state.
inline double site_magnetization_y(const PureState& psi, int site) {
    const Matrix2 r = partial_trace_keep_site(psi.projector(), site);
    return (r * pauli::y()).trace().real();
}

}  // namespace lrising
