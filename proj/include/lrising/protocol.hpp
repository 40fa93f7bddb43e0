// Local detection of spin-rest quantum correlations.
//
// A single site is dephased in a qubit basis, the full chain re-evolves under
// H, and the site's reduced state is compared with the undisturbed marginal.
// Every trace distance seen on the site lower-bounds the global distance
// between the state and its dephased counterpart.
#pragma once

#include "lrising/model.hpp"
#include "lrising/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace lrising {

inline constexpr double kDefaultTimeWindow = 2.0 * M_PI * 10.0;
inline constexpr int kDefaultTimeSteps = 200;

struct TimeGrid {
    double t_max = kDefaultTimeWindow;
    int n_steps = kDefaultTimeSteps;
    std::vector<double> times;  // n_steps + 1 points, both ends included
};

inline TimeGrid make_time_grid(double t_max = kDefaultTimeWindow, int n_steps = kDefaultTimeSteps) {
    detail::require(n_steps >= 1, "time grid needs at least one step");
    detail::require(t_max >= 0.0 && std::isfinite(t_max), "t_max must be finite and non-negative");
    TimeGrid g{t_max, n_steps, std::vector<double>(static_cast<std::size_t>(n_steps) + 1)};
    for (int k = 0; k <= n_steps; ++k) g.times[static_cast<std::size_t>(k)] = t_max * k / n_steps;
    g.times.back() = t_max;
    return g;
}

// sum_i (Pi_i (x) I) rho (Pi_i (x) I) with Pi_i projecting `site` onto basis vector i.
inline Matrix dephase(const Matrix& rho, int site, const QubitBasis& basis) {
    const int n = detail::sites_of(rho.rows());
    detail::check_site(site, n);
    const Matrix2 p0 = basis.projector(0), p1 = basis.projector(1);
    const std::size_t rest_dim = std::size_t{1} << (n - 1);
    Matrix out(rho.rows(), rho.cols());
    // For each pair of rest indices, the 2x2 site block transforms as
    // B -> P0 B P0 + P1 B P1.
    for (std::size_t c = 0; c < rest_dim; ++c) {
        const std::size_t c0 = detail::insert_bit(c, site, n, 0), c1 = detail::insert_bit(c, site, n, 1);
        for (std::size_t r = 0; r < rest_dim; ++r) {
            const std::size_t r0 = detail::insert_bit(r, site, n, 0), r1 = detail::insert_bit(r, site, n, 1);
            Matrix2 block;
            block << rho(r0, c0), rho(r0, c1), rho(r1, c0), rho(r1, c1);
            const Matrix2 res = p0 * block * p0 + p1 * block * p1;
            out(r0, c0) = res(0, 0);
            out(r0, c1) = res(0, 1);
            out(r1, c0) = res(1, 0);
            out(r1, c1) = res(1, 1);
        }
    }
    return out;
}

inline DensityMatrix dephase(const DensityMatrix& rho, int site, const QubitBasis& basis) {
    return DensityMatrix::trusted(dephase(rho.matrix(), site, basis), rho.n_sites());
}

inline DensityMatrix dephase(const PureState& psi, int site, const QubitBasis& basis) {
    return dephase(DensityMatrix(psi), site, basis);
}

struct DephasingBasis {
    QubitBasis basis;
    bool degenerate = false;  // balanced Schmidt coefficients; basis fixed by convention only
};

inline constexpr double kSchmidtDegeneracyTol = 1e-8;

// Local Schmidt basis of `psi` at `site`, i.e. the eigenbasis of its marginal.
inline DephasingBasis schmidt_dephasing_basis(const PureState& psi, int site) {
    const SchmidtData sd = schmidt_qubit(psi, site);
    return {sd.local_basis, sd.lambda0 - sd.lambda1 < kSchmidtDegeneracyTol};
}

// Eigenbasis of a single-site marginal, larger eigenvalue first.
inline DephasingBasis marginal_eigenbasis(const Matrix2& marginal) {
    const SpectralDecomposition eig = hermitian_eig(marginal);
    return {QubitBasis(eig.eigenvectors.col(1), eig.eigenvectors.col(0)),
            eig.eigenvalues[1] - eig.eigenvalues[0] < kSchmidtDegeneracyTol};
}

namespace detail {
// e^{-i (E_k - E_0) t}
inline Vector propagator_phases(const RealVector& energies, double t) {
    Vector ph(energies.size());
    for (Eigen::Index k = 0; k < energies.size(); ++k) ph[k] = std::polar(1.0, -(energies[k] - energies[0]) * t);
    return ph;
}

inline void check_dims(const Matrix& rho, const ModelSpectrum& spec) {
    require(rho.rows() == spec.eigenvectors().rows() && rho.cols() == rho.rows(),
            "state dimension does not match the spectrum");
}
}  // namespace detail

// U(t) rho U(t)^dagger with U(t) = V exp(-i Lambda t) V^dagger.
inline Matrix evolve(const Matrix& rho, const ModelSpectrum& spec, double t) {
    detail::check_dims(rho, spec);
    detail::require(t >= 0.0, "evolution time must be non-negative");
    if (t == 0.0) return rho;
    const Matrix& v = spec.eigenvectors();
    const Vector ph = detail::propagator_phases(spec.energies(), t);
    const Matrix u = v * ph.asDiagonal() * v.adjoint();
    return u * rho * u.adjoint();
}

inline DensityMatrix evolve(const DensityMatrix& rho, const ModelSpectrum& spec, double t) {
    return DensityMatrix::trusted(evolve(rho.matrix(), spec, t), rho.n_sites());
}

// Single-site marginal of exp(-iHt) rho exp(iHt), evaluated in the energy
// basis: rho_S(t)_ab = sum_kl e^{-i(E_k-E_l)t} rhot_kl Xt^{ab}_lk with
// rhot = V^dag rho V and Xt^{ab} = V^dag (|b><a| (x) I) V. The marginal
// operators depend only on the spectrum and site, so they are built once.
class LocalDynamics {
public:
    LocalDynamics(const ModelSpectrum& spec, int site) : spec_(&spec), site_(site) {
        detail::check_site(site, spec.n_sites());
        const Matrix& v = spec.eigenvectors();
        for (int k = 0; k < 3; ++k) {
            const auto [a, b] = kEntries[k];
            Matrix2 unit = Matrix2::Zero();
            unit(b, a) = 1.0;
            marginal_ops_[k] = (v.adjoint() * embed_site_operator(unit, site, spec.n_sites()) * v).transpose();
        }
    }

    const ModelSpectrum& spectrum() const noexcept { return *spec_; }
    int site() const noexcept { return site_; }

    // Per-state kernel; the marginal at any time is then a bilinear form.
    class Kernel {
    public:
        Matrix2 at(double t) const {
            const Vector cph = detail::propagator_phases(owner_->spec_->energies(), t).conjugate();
            Matrix2 out;
            const Complex v00 = cph.dot(weighted_[0] * cph);
            const Complex v11 = cph.dot(weighted_[1] * cph);
            const Complex v01 = cph.dot(weighted_[2] * cph);
            out << Complex(v00.real(), 0.0), v01, std::conj(v01), Complex(v11.real(), 0.0);
            return out;
        }

    private:
        friend class LocalDynamics;
        const LocalDynamics* owner_ = nullptr;
        Matrix weighted_[3];
    };

    Kernel kernel(const Matrix& rho0) const {
        detail::check_dims(rho0, *spec_);
        const Matrix& v = spec_->eigenvectors();
        const Matrix rot = v.adjoint() * rho0 * v;
        Kernel k;
        k.owner_ = this;
        for (int i = 0; i < 3; ++i) k.weighted_[i] = rot.cwiseProduct(marginal_ops_[i]);
        return k;
    }

private:
    static constexpr std::pair<int, int> kEntries[3] = {{0, 0}, {1, 1}, {0, 1}};
    const ModelSpectrum* spec_;
    int site_;
    Matrix marginal_ops_[3];
};

// Reduced state of `site` at each grid time after evolving rho0.
inline std::vector<Matrix2> local_trajectory(const Matrix& rho0, const LocalDynamics& dyn, const TimeGrid& grid) {
    const auto kernel = dyn.kernel(rho0);
    std::vector<Matrix2> out;
    out.reserve(grid.times.size());
    for (double t : grid.times) out.push_back(kernel.at(t));
    return out;
}

inline std::vector<Matrix2> local_trajectory(const DensityMatrix& rho0, const ModelSpectrum& spec, int site,
                                             const TimeGrid& grid) {
    return local_trajectory(rho0.matrix(), LocalDynamics(spec, site), grid);
}

// Reference path: one full conjugation per grid point.
inline std::vector<Matrix2> local_trajectory_by_conjugation(const Matrix& rho0, const ModelSpectrum& spec, int site,
                                                            const TimeGrid& grid) {
    std::vector<Matrix2> out;
    out.reserve(grid.times.size());
    for (double t : grid.times) out.push_back(partial_trace_keep_site(evolve(rho0, spec, t), site));
    return out;
}

// (||rho^Gamma||_1 - 1) / 2 across the cut {site} | rest.
inline double negativity(const Matrix& rho, int site) {
    detail::require(detail::sites_of(rho.rows()) >= 2, "negativity needs at least two sites");
    return std::max(0.0, 0.5 * (trace_norm(partial_transpose_site(rho, site)) - 1.0));
}

inline double negativity(const DensityMatrix& rho, int site) { return negativity(rho.matrix(), site); }
inline double negativity(const PureState& psi, int site) { return negativity(psi.projector(), site); }

// D_Pi(rho) = 1/2 || rho - Phi_Pi(rho) ||_1
inline double global_D(const Matrix& rho, int site, const QubitBasis& basis) {
    return trace_distance(rho, dephase(rho, site, basis));
}

inline double global_D(const DensityMatrix& rho, int site, const QubitBasis& basis) {
    return global_D(rho.matrix(), site, basis);
}

struct BasisMinimum {
    double value = 0.0;
    QubitBasis basis;
    std::size_t index = 0;
};

// Minimum of D_Pi over a finite list of bases (an upper bound on D_min).
inline BasisMinimum global_Dmin(const Matrix& rho, int site, const std::vector<QubitBasis>& bases) {
    detail::require(!bases.empty(), "global_Dmin needs at least one basis");
    BasisMinimum best{std::numeric_limits<double>::infinity(), bases.front(), 0};
    for (std::size_t i = 0; i < bases.size(); ++i) {
        const double d = global_D(rho, site, bases[i]);
        if (d < best.value) best = {d, bases[i], i};
    }
    return best;
}

inline BasisMinimum global_Dmin(const DensityMatrix& rho, int site, const std::vector<QubitBasis>& bases) {
    return global_Dmin(rho.matrix(), site, bases);
}

// `n_sampled` uniformly drawn bases followed by the eigenbasis of the marginal.
inline std::vector<QubitBasis> dephasing_candidates(const Matrix& rho, int site, std::mt19937_64& rng, int n_sampled) {
    std::vector<QubitBasis> out = sample_qubit_bases(rng, n_sampled);
    out.push_back(marginal_eigenbasis(partial_trace_keep_site(rho, site)).basis);
    return out;
}

struct WitnessTrace {
    TimeGrid grid;
    std::vector<double> m_y;  // Tr(rho_S(t) sy)
    std::vector<double> d;    // 1/2 ||rho_S(t) - rho_S(0)||
    double d_extremum = 0.0;
    double t_at_extremum = 0.0;
    QubitBasis basis;
    bool degenerate_schmidt = false;
    bool reference_stationary = true;
    double max_y_coherence = 0.0;  // largest |off-diagonal| of rho_S(t) in the sy basis
};

namespace detail {
inline double y_coherence(const Matrix2& r) {
    Matrix2 u;
    u.col(0) = up_y();
    u.col(1) = down_y();
    return std::abs((u.adjoint() * r * u)(0, 1));
}

inline double stationarity_residual(const PureState& psi, const ModelSpectrum& spec) {
    const Matrix& v = spec.eigenvectors();
    const Vector c = v.adjoint() * psi.amplitudes();
    const double e = (c.cwiseAbs2().transpose() * spec.energies())(0, 0);
    const Vector hc = spec.energies().cast<Complex>().cwiseProduct(c) - e * c;
    return hc.norm();
}

inline std::pair<double, double> arg_max(const std::vector<double>& values, const std::vector<double>& times) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] > values[best]) best = k;
    return {values[best], times[best]};
}
}  // namespace detail

// Pure-state protocol: dephase `psi` at `site` in its local Schmidt basis and
// follow the site's trajectory.
inline WitnessTrace witness_trace(const PureState& psi, const LocalDynamics& dyn, const TimeGrid& grid) {
    const ModelSpectrum& spec = dyn.spectrum();
    const int site = dyn.site();
    detail::require(psi.n_sites() == spec.n_sites(), "state and spectrum disagree on n_sites");
    const DephasingBasis db = schmidt_dephasing_basis(psi, site);
    const Matrix rho = psi.projector();
    const Matrix2 reference = partial_trace_keep_site(rho, site);
    const auto traj = local_trajectory(dephase(rho, site, db.basis), dyn, grid);

    WitnessTrace out{grid, {}, {}, 0.0, 0.0, db.basis, db.degenerate, true, 0.0};
    const double scale = std::max(1.0, spec.energies().cwiseAbs().maxCoeff());
    out.reference_stationary = detail::stationarity_residual(psi, spec) < 1e-8 * scale;
    out.m_y.reserve(traj.size());
    out.d.reserve(traj.size());
    for (const Matrix2& r : traj) {
        out.m_y.push_back((r * pauli::y()).trace().real());
        out.d.push_back(trace_distance(r, reference));
        out.max_y_coherence = std::max(out.max_y_coherence, detail::y_coherence(r));
    }
    std::tie(out.d_extremum, out.t_at_extremum) = detail::arg_max(out.d, grid.times);
    return out;
}

inline WitnessTrace witness_trace(const PureState& psi, const ModelSpectrum& spec, int site, const TimeGrid& grid) {
    return witness_trace(psi, LocalDynamics(spec, site), grid);
}

struct BasisTrace {
    QubitBasis basis;
    double global_D = 0.0;  // D_Pi
    std::vector<double> d;  // d_Pi(t)
};

struct WitnessReport {
    TimeGrid grid;
    double d_max = 0.0;  // max_t d(t), or max_t min_Pi d_Pi(t) for the minimal witness
    double t_at_extremum = 0.0;
    double global_D = 0.0;  // D at basis_used; for the minimal witness, the sampled D_min
    double negativity = 0.0;
    QubitBasis basis_used;
    bool degenerate_schmidt = false;
    std::vector<double> pointwise_min;  // min_Pi d_Pi(t)
    std::vector<BasisTrace> per_basis;
};

inline constexpr double kBoundSlack = 1e-9;

// Pure-state protocol with its global counterparts.
inline WitnessReport ground_witness(const PureState& psi, const LocalDynamics& dyn, const TimeGrid& grid) {
    const WitnessTrace tr = witness_trace(psi, dyn, grid);
    const Matrix rho = psi.projector();
    WitnessReport rep{grid, tr.d_extremum, tr.t_at_extremum, global_D(rho, dyn.site(), tr.basis),
                      negativity(rho, dyn.site()), tr.basis, tr.degenerate_schmidt, tr.d, {}};
    rep.per_basis.push_back({tr.basis, rep.global_D, tr.d});
    return rep;
}

// Minimal local witness for a stationary (thermal or eigen-) state:
// d_min = max_t min_Pi d_Pi(t) over the supplied bases, next to
// min_Pi D_Pi over the same bases.
inline WitnessReport witness_dmin(const Matrix& rho, const LocalDynamics& dyn, const std::vector<QubitBasis>& bases,
                                  const TimeGrid& grid) {
    detail::require(!bases.empty(), "witness_dmin needs at least one basis");
    const int site = dyn.site();
    const Matrix2 reference = partial_trace_keep_site(rho, site);

    WitnessReport rep;
    rep.grid = grid;
    rep.negativity = negativity(rho, site);
    rep.pointwise_min.assign(grid.times.size(), std::numeric_limits<double>::infinity());
    rep.global_D = std::numeric_limits<double>::infinity();
    rep.per_basis.reserve(bases.size());
    for (const QubitBasis& basis : bases) {
        const Matrix dephased = dephase(rho, site, basis);
        BasisTrace bt{basis, trace_distance(rho, dephased), {}};
        const auto traj = local_trajectory(dephased, dyn, grid);
        bt.d.reserve(traj.size());
        for (std::size_t k = 0; k < traj.size(); ++k) {
            bt.d.push_back(trace_distance(traj[k], reference));
            rep.pointwise_min[k] = std::min(rep.pointwise_min[k], bt.d.back());
        }
        if (bt.global_D < rep.global_D) {
            rep.global_D = bt.global_D;
            rep.basis_used = basis;
        }
        rep.per_basis.push_back(std::move(bt));
    }
    std::tie(rep.d_max, rep.t_at_extremum) = detail::arg_max(rep.pointwise_min, grid.times);
    rep.degenerate_schmidt = marginal_eigenbasis(reference).degenerate;
    return rep;
}

inline WitnessReport witness_dmin(const DensityMatrix& rho, const ModelSpectrum& spec, int site,
                                  const std::vector<QubitBasis>& bases, const TimeGrid& grid) {
    return witness_dmin(rho.matrix(), LocalDynamics(spec, site), bases, grid);
}

}  // namespace lrising
