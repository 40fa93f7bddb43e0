// Parameter sweeps over B/J0 and temperature with CSV emission.
//
// Points are evaluated independently (optionally on several threads) and
// collected by index, so output order and content never depend on the
// schedule. Random bases for sweep point k come from a stream seeded with
// seed ^ k.
#pragma once

#include "lrising/model.hpp"
#include "lrising/protocol.hpp"
#include "lrising/qcore.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lrising {

// A computed row broke one of the protocol's bounds.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<double> linspace(double lo, double hi, int count) {
    detail::require(count >= 1, "grid needs at least one point");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
    if (count > 1) out.back() = hi;
    return out;
}

inline std::vector<double> logspace(double lo, double hi, int count) {
    detail::require(lo > 0.0 && hi > 0.0, "log grid needs positive bounds");
    std::vector<double> out = linspace(std::log(lo), std::log(hi), count);
    for (double& v : out) v = std::exp(v);
    out.front() = lo;
    if (count > 1) out.back() = hi;
    return out;
}

inline std::vector<double> default_b_grid() { return logspace(0.05, 20.0, 50); }

// "x" or "min:max:count[:log|:lin]"
inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        detail::require(used == s.size() && !s.empty(), "bad number '" + s + "' in grid '" + text + "'");
        return v;
    };
    if (parts.size() == 1) return {number(parts[0])};
    detail::require(parts.size() == 3 || parts.size() == 4, "grid must be 'x' or 'min:max:count[:log|:lin]'");
    const double lo = number(parts[0]), hi = number(parts[1]);
    const double count = number(parts[2]);
    detail::require(count >= 1 && count == std::floor(count), "grid count must be a positive integer");
    const std::string mode = parts.size() == 4 ? parts[3] : "lin";
    detail::require(mode == "log" || mode == "lin", "grid spacing must be 'log' or 'lin'");
    return mode == "log" ? logspace(lo, hi, static_cast<int>(count)) : linspace(lo, hi, static_cast<int>(count));
}

struct SweepConfig {
    int n_sites = 7;
    double alpha = 1.0;
    int j0_sign = +1;
    std::vector<double> b_over_j0 = default_b_grid();
    std::vector<double> kt_over_j0{1e-5, 0.1, 1.0};
    double t_max = kDefaultTimeWindow;
    int n_steps = kDefaultTimeSteps;
    int n_bases = 20;
    std::uint64_t seed = 0;
    int site = 1;
    int threads = 1;

    void validate() const {
        detail::require(n_sites >= 2, "the protocol needs at least two spins");
        detail::require(n_sites <= kMaxSites, "n_sites exceeds the dense cap of " + std::to_string(kMaxSites));
        detail::require(alpha > 0.0, "alpha must be positive");
        detail::require(j0_sign == 1 || j0_sign == -1, "j0_sign must be +1 or -1");
        detail::require(!b_over_j0.empty(), "B/J0 grid is empty");
        for (double b : b_over_j0) detail::require(b > 0.0 && std::isfinite(b), "B/J0 values must be positive");
        detail::require(!kt_over_j0.empty(), "kT/J0 list is empty");
        for (double kt : kt_over_j0) detail::require(kt > 0.0 && std::isfinite(kt), "kT/J0 values must be positive");
        detail::require(t_max > 0.0 && std::isfinite(t_max), "t_max must be positive");
        detail::require(n_steps >= 1, "steps must be positive");
        detail::require(n_bases >= 0, "number of bases must be non-negative");
        detail::require(site >= 1 && site <= n_sites, "measured site outside the chain");
        detail::require(threads >= 1, "threads must be positive");
    }

    SpinChainParams params_at(double b) const { return {n_sites, static_cast<double>(j0_sign), alpha, b}; }
    TimeGrid grid() const { return make_time_grid(t_max, n_steps); }
};

struct ThermalColumns {
    double kt_over_j0 = 0.0;
    double sampled_Dmin = 0.0;
    double d_min = 0.0;
};

struct SweepRow {
    double b_over_j0 = 0.0;
    double gap = 0.0;
    double negativity = 0.0;
    double global_D = 0.0;
    double d_max = 0.0;
    double t_at_dmax = 0.0;
    bool degenerate_schmidt = false;
    std::optional<ThermalColumns> thermal;
};

inline void check_row(const SweepRow& row) {
    if (!(row.d_max <= row.global_D + kBoundSlack)) {
        std::ostringstream os;
        os.precision(17);
        os << "d_max " << row.d_max << " exceeds D " << row.global_D << " at B/J0 = " << row.b_over_j0;
        throw InvariantViolation(os.str());
    }
    if (row.thermal && !(row.thermal->d_min <= row.thermal->sampled_Dmin + kBoundSlack)) {
        std::ostringstream os;
        os.precision(17);
        os << "d_min " << row.thermal->d_min << " exceeds sampled D_min " << row.thermal->sampled_Dmin
           << " at B/J0 = " << row.b_over_j0 << ", kT/J0 = " << row.thermal->kt_over_j0;
        throw InvariantViolation(os.str());
    }
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
// exception (lowest index) is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count);
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace detail {
inline SweepRow ground_row(double b, const ModelSpectrum& spec, const LocalDynamics& dyn, const TimeGrid& grid) {
    const WitnessReport rep = ground_witness(ground_state(spec), dyn, grid);
    return {b, energy_gap(spec), rep.negativity, rep.global_D, rep.d_max, rep.t_at_extremum, rep.degenerate_schmidt, {}};
}

inline std::vector<double> sorted_unique_check(std::vector<double> v, const char* what) {
    std::sort(v.begin(), v.end());
    require(std::adjacent_find(v.begin(), v.end()) == v.end(), std::string("duplicate values in ") + what);
    return v;
}
}  // namespace detail

// One row per B/J0 point, ascending in B/J0.
inline std::vector<SweepRow> run_ground_sweep(const SweepConfig& config) {
    config.validate();
    const std::vector<double> bs = detail::sorted_unique_check(config.b_over_j0, "B/J0 grid");
    const TimeGrid grid = config.grid();
    std::vector<SweepRow> rows(bs.size());
    parallel_for(bs.size(), config.threads, [&](std::size_t k) {
        const ModelSpectrum spec = spectrum(config.params_at(bs[k]));
        const LocalDynamics dyn(spec, config.site);
        rows[k] = detail::ground_row(bs[k], spec, dyn, grid);
    });
    for (const SweepRow& r : rows) check_row(r);
    return rows;
}

// Random dephasing bases for sweep point k.
inline std::vector<QubitBasis> sweep_bases(const SweepConfig& config, std::size_t k) {
    std::mt19937_64 rng(config.seed ^ static_cast<std::uint64_t>(k));
    return sample_qubit_bases(rng, config.n_bases);
}

// Rows per (B/J0, kT/J0), ascending in both. Each row carries the pure
// ground-state columns next to the thermal ones.
inline std::vector<SweepRow> run_thermal_sweep(const SweepConfig& config) {
    config.validate();
    const std::vector<double> bs = detail::sorted_unique_check(config.b_over_j0, "B/J0 grid");
    const std::vector<double> kts = detail::sorted_unique_check(config.kt_over_j0, "kT/J0 list");
    const TimeGrid grid = config.grid();
    std::vector<SweepRow> rows(bs.size() * kts.size());
    parallel_for(bs.size(), config.threads, [&](std::size_t k) {
        const ModelSpectrum spec = spectrum(config.params_at(bs[k]));
        const LocalDynamics dyn(spec, config.site);
        const SweepRow ground = detail::ground_row(bs[k], spec, dyn, grid);
        const std::vector<QubitBasis> sampled = sweep_bases(config, k);
        for (std::size_t j = 0; j < kts.size(); ++j) {
            const DensityMatrix rho = thermal_state(spec, 1.0 / kts[j]);
            std::vector<QubitBasis> bases = sampled;
            bases.push_back(marginal_eigenbasis(partial_trace_keep_site(rho.matrix(), config.site)).basis);
            const WitnessReport rep = witness_dmin(rho.matrix(), dyn, bases, grid);
            SweepRow row = ground;
            row.thermal = ThermalColumns{kts[j], rep.global_D, rep.d_max};
            rows[k * kts.size() + j] = row;
        }
    });
    for (const SweepRow& r : rows) check_row(r);
    return rows;
}

// Pure-state witness time series at a single parameter point.
inline WitnessTrace run_witness_trace(const SpinChainParams& params, const TimeGrid& grid, int site = 1) {
    const ModelSpectrum spec = spectrum(params);
    return witness_trace(ground_state(spec), spec, site, grid);
}

// ---- CSV ----

// 12 significant digits, C locale.
inline std::string format_real(double v) {
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline constexpr const char* kGroundHeader = "b_over_j0,gap,negativity,global_D,d_max,t_at_dmax,degenerate_schmidt";
inline constexpr const char* kThermalHeader =
    "b_over_j0,gap,negativity,global_D,d_max,t_at_dmax,degenerate_schmidt,kt_over_j0,sampled_Dmin,d_min";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    const bool thermal = !rows.empty() && rows.front().thermal.has_value();
    os << (thermal ? kThermalHeader : kGroundHeader) << '\n';
    for (const SweepRow& r : rows) {
        check_row(r);
        os << format_real(r.b_over_j0) << ',' << format_real(r.gap) << ',' << format_real(r.negativity) << ','
           << format_real(r.global_D) << ',' << format_real(r.d_max) << ',' << format_real(r.t_at_dmax) << ','
           << (r.degenerate_schmidt ? 1 : 0);
        if (thermal) {
            detail::require(r.thermal.has_value(), "mixed ground and thermal rows");
            os << ',' << format_real(r.thermal->kt_over_j0) << ',' << format_real(r.thermal->sampled_Dmin) << ','
               << format_real(r.thermal->d_min);
        }
        os << '\n';
    }
}

inline void write_trace_csv(std::ostream& os, const WitnessTrace& tr) {
    os << "t,m_y,d\n";
    for (std::size_t k = 0; k < tr.d.size(); ++k)
        os << format_real(tr.grid.times[k]) << ',' << format_real(tr.m_y[k]) << ',' << format_real(tr.d[k]) << '\n';
}

inline void write_spectrum_csv(std::ostream& os, const ModelSpectrum& spec) {
    os << "index,energy,parity\n";
    for (Eigen::Index k = 0; k < spec.energies().size(); ++k)
        os << k << ',' << format_real(spec.energies()[k]) << ',' << (spec.parity_values[k] > 0 ? "1" : "-1") << '\n';
}

// Writes through `emit` to `path`, or to stdout for "" and "-".
template <class Emit>
void write_output(const std::string& path, Emit&& emit) {
    if (path.empty() || path == "-") {
        emit(std::cout);
        std::cout.flush();
        return;
    }
    std::ostringstream buffer;
    emit(buffer);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << buffer.str();
    if (!out.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace lrising
