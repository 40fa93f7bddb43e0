// Dense N-qubit linear algebra: states, partial traces, norms, eigensolving.
//
// Site convention: sites are numbered 1..N from the left. Site 1 is the most
// significant bit of the computational index, so for N = 3 the basis index
// 0b100 has site 1 in |1> and sites 2, 3 in |0>. |0>, |1> are sigma_z
// eigenstates with eigenvalues +1, -1.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lrising {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2cd;
using Vector2 = Eigen::Vector2cd;

inline constexpr int kMaxSites = 14;
inline constexpr Complex kI{0.0, 1.0};

namespace pauli {
inline Matrix2 identity() { return Matrix2::Identity(); }
inline Matrix2 x() {
    Matrix2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}
inline Matrix2 y() {
    Matrix2 m;
    m << 0.0, -kI, kI, 0.0;
    return m;
}
inline Matrix2 z() {
    Matrix2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}
}  // namespace pauli

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

inline std::size_t dim_of(int n_sites) {
    require(n_sites >= 1 && n_sites <= kMaxSites,
            "n_sites must lie in [1, " + std::to_string(kMaxSites) + "], got " + std::to_string(n_sites));
    return std::size_t{1} << n_sites;
}

inline int sites_of(Eigen::Index dim) {
    require(dim >= 2 && (dim & (dim - 1)) == 0, "dimension is not a power of two >= 2");
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    require(n <= kMaxSites, "dimension exceeds the dense cap");
    return n;
}

inline void check_site(int site, int n_sites) {
    require(site >= 1 && site <= n_sites,
            "site " + std::to_string(site) + " outside [1, " + std::to_string(n_sites) + "]");
}

// Bit mask of `site` inside a computational index.
inline std::size_t site_mask(int site, int n_sites) { return std::size_t{1} << (n_sites - site); }

// Inserts bit `b` at the position of `site` into a rest-index of N-1 bits.
inline std::size_t insert_bit(std::size_t rest, int site, int n_sites, std::size_t b) {
    const int pos = n_sites - site;
    const std::size_t low = rest & ((std::size_t{1} << pos) - 1);
    const std::size_t high = (rest >> pos) << (pos + 1);
    return high | (b << pos) | low;
}

inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace detail

// Normalized state vector of N qubits.
class PureState {
public:
    static constexpr double kNormTol = 1e-12;

    PureState(Vector amplitudes, int n_sites) : amps_(std::move(amplitudes)), n_sites_(n_sites) {
        detail::require(static_cast<std::size_t>(amps_.size()) == detail::dim_of(n_sites_),
                        "state length must be 2^n_sites");
        detail::require(std::abs(amps_.norm() - 1.0) < kNormTol, "state is not normalized");
    }

    // Rescales to unit norm before validating.
    static PureState normalized(Vector amplitudes) {
        const double nrm = amplitudes.norm();
        detail::require(nrm > 0.0, "cannot normalize the zero vector");
        const int n = detail::sites_of(amplitudes.size());
        return PureState(amplitudes / nrm, n);
    }

    const Vector& amplitudes() const noexcept { return amps_; }
    int n_sites() const noexcept { return n_sites_; }
    Eigen::Index dim() const noexcept { return amps_.size(); }
    Matrix projector() const { return amps_ * amps_.adjoint(); }

private:
    Vector amps_;
    int n_sites_;
};

// Hermitian, unit-trace, positive semidefinite matrix over N qubits.
class DensityMatrix {
public:
    static constexpr double kTol = 1e-10;

    DensityMatrix(Matrix entries, int n_sites) : m_(std::move(entries)), n_sites_(n_sites) {
        detail::require(static_cast<std::size_t>(m_.rows()) == detail::dim_of(n_sites_) && m_.rows() == m_.cols(),
                        "density matrix must be 2^n_sites square");
        const std::string problem = violation(m_);
        detail::require(problem.empty(), "invalid density matrix: " + problem);
    }

    explicit DensityMatrix(const PureState& psi) : m_(psi.projector()), n_sites_(psi.n_sites()) {}

    // Skips the O(dim^3) PSD check; for results of maps known to preserve it.
    static DensityMatrix trusted(Matrix entries, int n_sites) { return DensityMatrix(std::move(entries), n_sites, 0); }

    // Empty string when `m` satisfies the invariants, otherwise a description.
    static std::string violation(const Matrix& m) {
        if (m.rows() != m.cols()) return "not square";
        const double herm = detail::max_abs(m - m.adjoint());
        if (!(herm < kTol)) return "not Hermitian (" + std::to_string(herm) + ")";
        const double tr = m.trace().real();
        if (!(std::abs(tr - 1.0) < kTol)) return "trace " + std::to_string(tr);
        const Matrix sym = 0.5 * (m + m.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) return "eigensolver failed";
        if (!(es.eigenvalues().minCoeff() >= -kTol)) return "negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff());
        return {};
    }

    void validate() const {
        const std::string problem = violation(m_);
        detail::require(problem.empty(), "invalid density matrix: " + problem);
    }

    const Matrix& matrix() const noexcept { return m_; }
    int n_sites() const noexcept { return n_sites_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

private:
    DensityMatrix(Matrix entries, int n_sites, int) : m_(std::move(entries)), n_sites_(n_sites) {}

    Matrix m_;
    int n_sites_;
};

struct SpectralDecomposition {
    RealVector eigenvalues;  // ascending
    Matrix eigenvectors;     // column k belongs to eigenvalue k
};

// Orthonormal single-qubit basis {vec0, vec1}, defining projectors Pi_i = |vec_i><vec_i|.
class QubitBasis {
public:
    static constexpr double kTol = 1e-12;

    // computational (sz) basis
    QubitBasis() : v0_(1.0, 0.0), v1_(0.0, 1.0) {}

    QubitBasis(Vector2 v0, Vector2 v1) : v0_(std::move(v0)), v1_(std::move(v1)) {
        detail::require(std::abs(v0_.squaredNorm() - 1.0) < kTol && std::abs(v1_.squaredNorm() - 1.0) < kTol,
                        "basis vectors must be normalized");
        detail::require(std::abs(v0_.dot(v1_)) < kTol, "basis vectors must be orthogonal");
    }

    // Eigenbasis of n.sigma for a unit axis n; vec0 belongs to eigenvalue +1.
    static QubitBasis from_axis(double nx, double ny, double nz) {
        const double r = std::sqrt(nx * nx + ny * ny + nz * nz);
        detail::require(r > 0.0, "axis must be nonzero");
        const double theta = std::acos(std::clamp(nz / r, -1.0, 1.0));
        const double phi = std::atan2(ny, nx);
        return from_angles(theta, phi);
    }

    static QubitBasis from_angles(double theta, double phi) {
        const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
        const Complex e = std::polar(1.0, phi);
        return QubitBasis(Vector2(c, e * s), Vector2(-std::conj(e) * s, c));
    }

    const Vector2& vec0() const noexcept { return v0_; }
    const Vector2& vec1() const noexcept { return v1_; }
    const Vector2& vec(int i) const noexcept { return i == 0 ? v0_ : v1_; }
    Matrix2 projector(int i) const { return vec(i) * vec(i).adjoint(); }

    // Bloch vector of vec0.
    Eigen::Vector3d axis() const {
        const Matrix2 p = projector(0);
        return {(p * pauli::x()).trace().real(), (p * pauli::y()).trace().real(), (p * pauli::z()).trace().real()};
    }

private:
    Vector2 v0_;
    Vector2 v1_;
};

struct SchmidtData {
    double lambda0 = 1.0;
    double lambda1 = 0.0;
    QubitBasis local_basis;
    Vector rest0;
    Vector rest1;
};

// I (x) ... (x) op (x) ... (x) I with `op` at `site`.
inline Matrix embed_site_operator(const Matrix2& op, int site, int n_sites) {
    const std::size_t dim = detail::dim_of(n_sites);
    detail::check_site(site, n_sites);
    const std::size_t mask = detail::site_mask(site, n_sites);
    Matrix out = Matrix::Zero(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        const std::size_t b = (col & mask) ? 1 : 0;
        for (std::size_t a = 0; a < 2; ++a) {
            const Complex v = op(a, b);
            if (v == Complex{}) continue;
            const std::size_t row = a ? (col | mask) : (col & ~mask);
            out(row, col) = v;
        }
    }
    return out;
}

// Single-site marginal; works on any square 2^N matrix.
inline Matrix2 partial_trace_keep_site(const Matrix& m, int site) {
    const int n = detail::sites_of(m.rows());
    detail::check_site(site, n);
    const std::size_t rest_dim = std::size_t{1} << (n - 1);
    Matrix2 out = Matrix2::Zero();
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            Complex acc{};
            for (std::size_t r = 0; r < rest_dim; ++r)
                acc += m(detail::insert_bit(r, site, n, a), detail::insert_bit(r, site, n, b));
            out(a, b) = acc;
        }
    return out;
}

inline DensityMatrix partial_trace_keep_site(const DensityMatrix& rho, int site) {
    return DensityMatrix::trusted(partial_trace_keep_site(rho.matrix(), site), 1);
}

// Marginal of everything except `site`, as a 2^(N-1) matrix.
inline Matrix partial_trace_drop_site(const Matrix& m, int site) {
    const int n = detail::sites_of(m.rows());
    detail::check_site(site, n);
    const std::size_t rest_dim = std::size_t{1} << (n - 1);
    Matrix out = Matrix::Zero(rest_dim, rest_dim);
    for (std::size_t r = 0; r < rest_dim; ++r)
        for (std::size_t c = 0; c < rest_dim; ++c)
            for (std::size_t a = 0; a < 2; ++a)
                out(r, c) += m(detail::insert_bit(r, site, n, a), detail::insert_bit(c, site, n, a));
    return out;
}

// Transposes the indices of one site. Involution.
inline Matrix partial_transpose_site(const Matrix& m, int site) {
    const int n = detail::sites_of(m.rows());
    detail::check_site(site, n);
    const std::size_t mask = detail::site_mask(site, n);
    const auto dim = static_cast<std::size_t>(m.rows());
    Matrix out(m.rows(), m.cols());
    for (std::size_t col = 0; col < dim; ++col)
        for (std::size_t row = 0; row < dim; ++row) {
            const std::size_t a = row & mask, b = col & mask;
            out((row & ~mask) | b, (col & ~mask) | a) = m(row, col);
        }
    return out;
}

inline Matrix partial_transpose_site(const DensityMatrix& rho, int site) {
    return partial_transpose_site(rho.matrix(), site);
}

namespace detail {
inline bool is_hermitian(const Matrix& a, double tol) { return a.rows() == a.cols() && max_abs(a - a.adjoint()) < tol; }
}  // namespace detail

// Sum of singular values. Hermitian input takes the eigenvalue route.
inline double trace_norm(const Matrix& a) {
    detail::require(a.rows() == a.cols(), "trace_norm needs a square matrix");
    if (a.rows() == 0) return 0.0;
    if (detail::is_hermitian(a, 1e-13 * std::max(1.0, detail::max_abs(a)))) {
        if (a.rows() == 2) {
            // eigenvalues are tr/2 +- sqrt((d/2)^2 + |o|^2)
            const double p = 0.5 * (a(0, 0).real() + a(1, 1).real());
            const double q = std::hypot(0.5 * (a(0, 0).real() - a(1, 1).real()), std::abs(a(0, 1)));
            return std::abs(p + q) + std::abs(p - q);
        }
        const Matrix sym = 0.5 * (a + a.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw std::runtime_error("trace_norm: eigensolver failed");
        return es.eigenvalues().cwiseAbs().sum();
    }
    Eigen::BDCSVD<Matrix> svd(a);
    return svd.singularValues().sum();
}

inline double trace_distance(const Matrix& rho, const Matrix& sigma) {
    detail::require(rho.rows() == sigma.rows() && rho.cols() == sigma.cols(), "trace_distance: dimension mismatch");
    return 0.5 * trace_norm(rho - sigma);
}

inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return trace_distance(rho.matrix(), sigma.matrix());
}

// Ascending eigenpairs. Each eigenvector has its largest-magnitude component
// real and positive (first such component on ties); exactly equal eigenvalues
// are ordered by that component's index.
inline SpectralDecomposition hermitian_eig(const Matrix& a, double herm_tol = 1e-10) {
    detail::require(a.rows() == a.cols() && a.rows() > 0, "hermitian_eig needs a non-empty square matrix");
    const double herm = detail::max_abs(a - a.adjoint());
    detail::require(herm < herm_tol, "hermitian_eig: input not Hermitian (" + std::to_string(herm) + ")");
    const Matrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: eigensolver failed");

    const Eigen::Index n = a.rows();
    Matrix vecs = es.eigenvectors();
    std::vector<Eigen::Index> lead(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = std::abs(vecs(i, k));
            if (v > best_abs * (1.0 + 1e-12)) {
                best_abs = v;
                best = i;
            }
        }
        lead[k] = best;
        const Complex phase = vecs(best, k) / std::abs(vecs(best, k));
        vecs.col(k) *= std::conj(phase);
        vecs(best, k) = Complex(std::abs(vecs(best, k)), 0.0);
    }

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const RealVector& vals = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index l, Eigen::Index r) {
        if (vals[l] != vals[r]) return vals[l] < vals[r];
        return lead[l] < lead[r];
    });

    SpectralDecomposition out{RealVector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues[k] = vals[order[k]];
        out.eigenvectors.col(k) = vecs.col(order[k]);
    }
    return out;
}

// Two-term Schmidt decomposition across the cut {site} | rest.
inline SchmidtData schmidt_qubit(const PureState& psi, int site) {
    const int n = psi.n_sites();
    detail::require(n >= 2, "schmidt_qubit needs at least two sites");
    detail::check_site(site, n);
    const std::size_t rest_dim = std::size_t{1} << (n - 1);
    // coefficient matrix: row = site bit, column = rest index
    Eigen::MatrixXcd coeff(2, rest_dim);
    for (std::size_t r = 0; r < rest_dim; ++r)
        for (std::size_t a = 0; a < 2; ++a) coeff(a, r) = psi.amplitudes()(detail::insert_bit(r, site, n, a));

    const Matrix reduced = coeff * coeff.adjoint();
    const SpectralDecomposition eig = hermitian_eig(reduced);
    // hermitian_eig is ascending; Schmidt order is descending
    const Vector2 phi0 = eig.eigenvectors.col(1);
    const Vector2 phi1 = eig.eigenvectors.col(0);

    SchmidtData out;
    out.lambda0 = std::sqrt(std::max(0.0, eig.eigenvalues[1]));
    out.lambda1 = std::sqrt(std::max(0.0, eig.eigenvalues[0]));
    const double s = std::hypot(out.lambda0, out.lambda1);
    out.lambda0 /= s;
    out.lambda1 /= s;
    out.local_basis = QubitBasis(phi0, phi1);

    // chi_i = (phi_i^dagger coeff)^T / lambda_i
    Vector chi0 = (phi0.adjoint() * coeff).transpose();
    Vector chi1 = (phi1.adjoint() * coeff).transpose();
    chi0.normalize();
    const double n1 = chi1.norm();
    if (n1 > 1e-8) {
        chi1 -= chi0 * chi0.dot(chi1);
        chi1.normalize();
    } else {
        // lambda1 ~ 0: any unit vector orthogonal to chi0
        for (std::size_t r = 0; r < rest_dim; ++r) {
            Vector e = Vector::Unit(static_cast<Eigen::Index>(rest_dim), static_cast<Eigen::Index>(r));
            e -= chi0 * chi0.dot(e);
            if (e.norm() > 0.5) {
                chi1 = e.normalized();
                break;
            }
        }
    }
    out.rest0 = std::move(chi0);
    out.rest1 = std::move(chi1);
    return out;
}

// sum_i lambda_i |phi_i> (x) |chi_i>
inline Vector schmidt_reconstruct(const SchmidtData& sd, int site, int n_sites) {
    const std::size_t rest_dim = std::size_t{1} << (n_sites - 1);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(detail::dim_of(n_sites)));
    for (std::size_t r = 0; r < rest_dim; ++r)
        for (std::size_t a = 0; a < 2; ++a)
            out(detail::insert_bit(r, site, n_sites, a)) =
                sd.lambda0 * sd.local_basis.vec0()(a) * sd.rest0(r) + sd.lambda1 * sd.local_basis.vec1()(a) * sd.rest1(r);
    return out;
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Eigenbasis of n.sigma with n uniform on the unit sphere.
inline QubitBasis sample_qubit_basis(std::mt19937_64& rng) {
    const double cos_theta = 2.0 * uniform01(rng) - 1.0;
    const double phi = 2.0 * M_PI * uniform01(rng);
    return QubitBasis::from_angles(std::acos(std::clamp(cos_theta, -1.0, 1.0)), phi);
}

inline std::vector<QubitBasis> sample_qubit_bases(std::mt19937_64& rng, int count) {
    std::vector<QubitBasis> out;
    out.reserve(static_cast<std::size_t>(std::max(0, count)));
    for (int k = 0; k < count; ++k) out.push_back(sample_qubit_basis(rng));
    return out;
}

// Haar-random pure state from normalized complex Gaussians.
inline PureState random_pure_state(int n_sites, std::mt19937_64& rng) {
    const std::size_t dim = detail::dim_of(n_sites);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(static_cast<Eigen::Index>(dim));
    for (auto& c : v) {
        const double re = g(rng);
        c = Complex(re, g(rng));
    }
    return PureState::normalized(std::move(v));
}

// sigma_x eigenstates, the ferromagnetic "up"/"down" spins.
inline Vector2 up_x() { return Vector2(M_SQRT1_2, M_SQRT1_2); }
inline Vector2 down_x() { return Vector2(M_SQRT1_2, -M_SQRT1_2); }
inline Vector2 up_y() { return Vector2(M_SQRT1_2, kI * M_SQRT1_2); }
inline Vector2 down_y() { return Vector2(M_SQRT1_2, -kI * M_SQRT1_2); }

// |v> (x) |v> (x) ... N times.
inline Vector product_state(const Vector2& v, int n_sites) {
    const std::size_t dim = detail::dim_of(n_sites);
    Vector out(static_cast<Eigen::Index>(dim));
    for (std::size_t idx = 0; idx < dim; ++idx) {
        Complex amp{1.0, 0.0};
        for (int s = 1; s <= n_sites; ++s) amp *= v((idx & detail::site_mask(s, n_sites)) ? 1 : 0);
        out(static_cast<Eigen::Index>(idx)) = amp;
    }
    return out;
}

// (|up up ...> + e^{i phase}|down down ...>)/sqrt(2), up/down along x.
inline PureState make_ghz(int n_sites, double phase) {
    detail::require(n_sites >= 2, "make_ghz needs at least two sites");
    Vector v = (product_state(up_x(), n_sites) + std::polar(1.0, phase) * product_state(down_x(), n_sites)) * M_SQRT1_2;
    return PureState::normalized(std::move(v));
}

}  // namespace lrising
