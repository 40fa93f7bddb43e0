// Acceptance suite: one PASS/FAIL line per criterion.
//
//   lrising_acceptance [--only K] [--cli PATH]
//
// Exit status is nonzero when any selected criterion fails.
#include "lrising/sweep.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

using namespace lrising;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void note(Outcome& o, bool ok, const std::string& what) {
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += (ok ? "" : "FAILED ") + what;
}

SweepConfig reference_config() {
    SweepConfig c;
    c.n_sites = 7;
    c.alpha = 1.0;
    c.b_over_j0 = default_b_grid();
    c.kt_over_j0 = {1e-5, 0.1, 1.0};
    c.n_bases = 20;
    c.seed = 0;
    return c;
}

// Sweeps are shared between criteria when several run in one process.
struct SweepCache {
    std::optional<std::vector<SweepRow>> ground;
    double ground_seconds = 0.0;
    std::optional<std::vector<SweepRow>> thermal;

    const std::vector<SweepRow>& ground_rows() {
        if (!ground) {
            Clock clock;
            ground = run_ground_sweep(reference_config());
            ground_seconds = clock.seconds();
        }
        return *ground;
    }
    const std::vector<SweepRow>& thermal_rows() {
        if (!thermal) thermal = run_thermal_sweep(reference_config());
        return *thermal;
    }
};

// ---- 1: Schmidt-basis disturbance equals negativity for pure states ----
Outcome criterion1(SweepCache&) {
    Outcome o;
    Clock clock;
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int n = 2; n <= 6; ++n)
        for (int trial = 0; trial < 100; ++trial) {
            const PureState psi = random_pure_state(n, rng);
            const QubitBasis basis = schmidt_dephasing_basis(psi, 1).basis;
            const Matrix rho = psi.projector();
            worst = std::max(worst, std::abs(global_D(rho, 1, basis) - negativity(rho, 1)));
        }
    const double secs = clock.seconds();
    note(o, worst < 1e-8, "max |D - N| = " + fmt("%.3g", worst) + " over 500 states (tol 1e-8)");
    note(o, secs < 30.0, "runtime " + fmt("%.2f", secs) + " s (limit 30 s)");
    return o;
}

// ---- 2: local trace distance never exceeds the global disturbance ----
Outcome criterion2(SweepCache& cache) {
    Outcome o;
    std::mt19937_64 rng(2);
    double worst_excess = -1.0;
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 3 + trial % 5;
        const SpinChainParams p{n, uniform01(rng) < 0.2 ? -1.0 : 1.0, 0.5 + 2.5 * uniform01(rng),
                                0.05 * std::pow(100.0, uniform01(rng))};
        const ModelSpectrum spec = spectrum(p);
        const Eigen::Index dim = spec.energies().size();
        // random mixture of up to four eigenstates: stationary by construction
        const int terms = 1 + static_cast<int>(uniform01(rng) * 4);
        Matrix rho = Matrix::Zero(dim, dim);
        double total = 0.0;
        for (int k = 0; k < terms; ++k) {
            const auto idx = std::min<Eigen::Index>(dim - 1, static_cast<Eigen::Index>(uniform01(rng) * dim));
            const double w = 0.05 + uniform01(rng);
            rho += w * spec.eigenvectors().col(idx) * spec.eigenvectors().col(idx).adjoint();
            total += w;
        }
        rho /= total;
        const int site = 1 + static_cast<int>(uniform01(rng) * n) % n;
        const QubitBasis basis = sample_qubit_basis(rng);
        const double t = kDefaultTimeWindow * uniform01(rng);

        const double big_d = global_D(rho, site, basis);
        const Matrix2 ref = partial_trace_keep_site(evolve(rho, spec, t), site);
        const Matrix2 moved = partial_trace_keep_site(evolve(dephase(rho, site, basis), spec, t), site);
        worst_excess = std::max(worst_excess, trace_distance(moved, ref) - big_d);
        ++checked;
    }
    note(o, worst_excess <= 1e-9,
         std::to_string(checked) + " triples, max d - D = " + fmt("%.3g", worst_excess) + " (tol 1e-9)");

    double row_excess = -1.0;
    for (const SweepRow& r : cache.ground_rows()) row_excess = std::max(row_excess, r.d_max - r.global_D);
    for (const SweepRow& r : cache.thermal_rows()) {
        row_excess = std::max(row_excess, r.d_max - r.global_D);
        row_excess = std::max(row_excess, r.thermal->d_min - r.thermal->sampled_Dmin);
    }
    note(o, row_excess <= 1e-9, "sweep rows: max (d_max - D, d_min - sampled_Dmin) = " + fmt("%.3g", row_excess));
    return o;
}

// ---- 3: ground-state sweep shape ----
Outcome criterion3(SweepCache& cache) {
    Outcome o;
    const auto& rows = cache.ground_rows();
    const SweepRow& first = rows.front();
    const SweepRow& last = rows.back();
    note(o, first.global_D >= 0.45 && first.global_D <= 0.5,
         "D(B/J0=" + fmt("%.3g", first.b_over_j0) + ") = " + fmt("%.4f", first.global_D) + " in [0.45, 0.5]");
    note(o, last.global_D < 0.05, "D(B/J0=" + fmt("%.3g", last.b_over_j0) + ") = " + fmt("%.4f", last.global_D) + " < 0.05");

    std::size_t best = 0;
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (rows[k].d_max > rows[best].d_max) best = k;
    bool unique = true;
    for (std::size_t k = 0; k < rows.size(); ++k)
        if (k != best && rows[k].d_max >= rows[best].d_max) unique = false;
    const bool interior = best != 0 && best + 1 != rows.size();
    note(o, unique && interior,
         "d_max peak " + fmt("%.4f", rows[best].d_max) + " at B/J0 = " + fmt("%.4g", rows[best].b_over_j0) +
             (interior ? " (interior" : " (endpoint") + (unique ? ", unique)" : ", not unique)"));
    note(o, first.d_max < 0.05 && last.d_max < 0.05,
         "d_max at ends " + fmt("%.4f", first.d_max) + ", " + fmt("%.4f", last.d_max) + " (< 0.05)");
    note(o, cache.ground_seconds < 60.0, "sweep runtime " + fmt("%.1f", cache.ground_seconds) + " s (limit 60 s)");
    return o;
}

// ---- 4: thermal behaviour of the minimal disturbance and witness ----
Outcome criterion4(SweepCache& cache) {
    Outcome o;
    std::map<double, std::map<double, const SweepRow*>> by_kt;
    for (const SweepRow& r : cache.thermal_rows()) by_kt[r.thermal->kt_over_j0][r.b_over_j0] = &r;

    // (a) hot: small sampled D_min wherever the gap is below kT
    {
        const double kt = 1.0;
        double worst = 0.0, worst_b = 0.0;
        int count = 0;
        for (const auto& [b, r] : by_kt.at(kt))
            if (r->gap < kt) {
                ++count;
                if (r->thermal->sampled_Dmin > worst) worst = r->thermal->sampled_Dmin, worst_b = b;
            }
        note(o, worst < 0.05,
             "kT/J0=1: max sampled_Dmin over " + std::to_string(count) + " points with gap < kT is " + fmt("%.4f", worst) +
                 " at B/J0=" + fmt("%.3g", worst_b) + " (< 0.05)");
    }
    // (b) cold: sampled D_min tracks the pure-state D where the gap is large
    {
        const double kt = 1e-5;
        double worst = 0.0, worst_b = 0.0;
        int count = 0;
        for (const auto& [b, r] : by_kt.at(kt))
            if (r->gap > 100.0 * kt) {
                ++count;
                const double dev = std::abs(r->thermal->sampled_Dmin - r->global_D);
                if (dev > worst) worst = dev, worst_b = b;
            }
        note(o, worst <= 0.02,
             "kT/J0=1e-5: max |sampled_Dmin - D| over " + std::to_string(count) + " points is " + fmt("%.4f", worst) +
                 " at B/J0=" + fmt("%.3g", worst_b) + " (<= 0.02)");
    }
    // (c) d_min barely moves between kT/J0 = 1e-5 and 0.1
    {
        double worst = 0.0, worst_b = 0.0;
        for (const auto& [b, r] : by_kt.at(1e-5)) {
            const double dev = std::abs(r->thermal->d_min - by_kt.at(0.1).at(b)->thermal->d_min);
            if (dev > worst) worst = dev, worst_b = b;
        }
        note(o, worst <= 0.05,
             "max |d_min(1e-5) - d_min(0.1)| = " + fmt("%.4f", worst) + " at B/J0=" + fmt("%.3g", worst_b) + " (<= 0.05)");
    }
    return o;
}

// ---- 5: agreement with independent oracles ----
Outcome criterion5(SweepCache&) {
    Outcome o;
    // N = 2 closed forms, J0 = 1, B = 0.5: R = sqrt(J^2 + 4B^2)
    const double j = 1.0, b = 0.5, r = std::sqrt(j * j + 4 * b * b);
    const ModelSpectrum spec = spectrum({2, j, 1.0, b});
    const Eigen::Vector4d expected(-r, -j, j, r);
    const double spec_err = (spec.energies() - expected).cwiseAbs().maxCoeff();
    note(o, spec_err < 1e-9, "N=2 spectrum err " + fmt("%.2g", spec_err));

    const PureState g = ground_state(spec);
    const oracle::M h = oracle::hamiltonian(2, j, 1.0, b);
    const oracle::M psi = g.amplitudes();
    const oracle::M xx = oracle::kron(oracle::sx(), oracle::sx());
    const double gs_err = std::max({(h * psi + r * psi).norm(),
                                    std::abs((psi.adjoint() * oracle::embed(oracle::sy(), 1, 2) * psi)(0, 0) - 2 * b / r),
                                    std::abs((psi.adjoint() * xx * psi)(0, 0) - j / r)});
    note(o, gs_err < 1e-9, "N=2 ground state err " + fmt("%.2g", gs_err));

    const oracle::M rho = g.projector();
    const oracle::M rho_s_expected = 0.5 * (oracle::M::Identity(2, 2) + (2 * b / r) * oracle::sy());
    const double rs_err = std::max((partial_trace_keep_site(rho, 1) - rho_s_expected).cwiseAbs().maxCoeff(),
                                   (oracle::partial_trace_keep(rho, 1, 2) - rho_s_expected).cwiseAbs().maxCoeff());
    note(o, rs_err < 1e-9, "N=2 rho_S err " + fmt("%.2g", rs_err));

    const double neg_err = std::abs(negativity(g, 1) - j / (2 * r));
    note(o, neg_err < 1e-9, "N=2 negativity err " + fmt("%.2g", neg_err));

    const QubitBasis basis = schmidt_dephasing_basis(g, 1).basis;
    const oracle::M rho_d = oracle::dephase(rho, 1, 2, basis.vec0(), basis.vec1());
    const LocalDynamics dyn(spec, 1);
    const auto kernel = dyn.kernel(dephase(rho, 1, basis));
    double evo_err = 0.0;
    for (double t : {0.0, 0.37, 1.9, 7.25, 41.0}) {
        const oracle::M u = oracle::expm_series(h, t);
        const oracle::M marg = oracle::partial_trace_keep(u * rho_d * u.adjoint(), 1, 2);
        evo_err = std::max(evo_err, (kernel.at(t) - marg).cwiseAbs().maxCoeff());
    }
    note(o, evo_err < 1e-9, "N=2 dephased evolution err " + fmt("%.2g", evo_err) + " at 5 times");

    // N = 3 trajectory against a fourth-order short-step propagator
    const ModelSpectrum spec3 = spectrum({3, 1.0, 1.0, 0.7});
    const PureState g3 = ground_state(spec3);
    const QubitBasis b3 = schmidt_dephasing_basis(g3, 1).basis;
    const oracle::M rho3 = oracle::dephase(g3.projector(), 1, 3, b3.vec0(), b3.vec1());
    const TimeGrid grid = make_time_grid();
    const auto traj = local_trajectory(dephase(g3.projector(), 1, b3), LocalDynamics(spec3, 1), grid);
    const long substeps = 100;
    std::vector<long> marks;
    for (int k = 0; k <= grid.n_steps; k += 10) marks.push_back(k * substeps);
    const auto ref = oracle::short_step_trajectory(oracle::hamiltonian(3, 1.0, 1.0, 0.7), rho3,
                                                   grid.t_max / (grid.n_steps * substeps), marks);
    double traj_err = 0.0;
    for (std::size_t m = 0; m < marks.size(); ++m)
        traj_err = std::max(traj_err, (traj[m * 10] - oracle::partial_trace_keep(ref[m], 1, 3)).cwiseAbs().maxCoeff());
    note(o, traj_err < 1e-7, "N=3 trajectory err " + fmt("%.2g", traj_err) + " (tol 1e-7)");
    return o;
}

// ---- 6: parity symmetry and sigma_y-diagonal reduced dynamics ----
Outcome criterion6(SweepCache&) {
    Outcome o;
    std::mt19937_64 rng(6);
    double comm = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        const int n = 2 + draw % 6;
        const SpinChainParams p{n, (uniform01(rng) - 0.5) * 4.0, 3.0 * uniform01(rng), 5.0 * uniform01(rng)};
        const Matrix h = build_hamiltonian(p), par = parity_operator(n);
        comm = std::max(comm, detail::max_abs(h * par - par * h));
    }
    note(o, comm < 1e-10, "max |[H,P]| = " + fmt("%.2g", comm) + " over 20 draws");

    const SweepConfig c = reference_config();
    const TimeGrid grid = c.grid();
    double coherence = 0.0, relation = 0.0;
    for (double b : c.b_over_j0) {
        const WitnessTrace tr = run_witness_trace(c.params_at(b), grid);
        coherence = std::max(coherence, tr.max_y_coherence);
        for (std::size_t k = 0; k < tr.d.size(); ++k)
            relation = std::max(relation, std::abs(tr.d[k] - 0.5 * std::abs(tr.m_y[k] - tr.m_y[0])));
    }
    note(o, coherence < 1e-8, "max sigma_y off-diagonal " + fmt("%.2g", coherence) + " over the default sweep");
    note(o, relation < 1e-8, "max |d - |m_y(t) - m_y(0)|/2| = " + fmt("%.2g", relation));
    return o;
}

// ---- 7: byte-identical CSV across thread counts ----
std::string cli_path_arg;

std::string run_and_read(const std::string& args, const std::filesystem::path& out, int& status) {
    std::filesystem::remove(out);
    const std::string cmd = cli_path_arg + " " + args + " --out " + out.string();
    status = std::system(cmd.c_str());
    std::ifstream in(out, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome criterion7(SweepCache&) {
    Outcome o;
    if (cli_path_arg.empty()) {
        note(o, false, "no --cli path given");
        return o;
    }
    const auto dir = std::filesystem::temp_directory_path() / "lrising_acceptance";
    std::filesystem::create_directories(dir);
    const std::string common = "--n-spins 6 --b-over-j0 0.05:20:8:log --seed 11";
    const std::pair<const char*, std::string> runs[] = {
        {"ground-sweep", common},
        {"thermal-sweep", common + " --num-bases 6 --kt-over-j0 1e-5 --kt-over-j0 0.1 --kt-over-j0 1"},
    };
    for (const auto& [sub, args] : runs) {
        std::string reference;
        bool same = true, ok = true;
        for (int threads : {1, 3, 1, 8}) {
            int status = 0;
            const std::string text = run_and_read(std::string(sub) + " " + args + " --threads " + std::to_string(threads),
                                                  dir / (std::string(sub) + ".csv"), status);
            ok = ok && status == 0 && !text.empty();
            if (reference.empty()) reference = text;
            same = same && text == reference;
        }
        note(o, ok && same,
             std::string(sub) + ": 4 runs (threads 1,3,1,8) " + (same ? "byte-identical" : "differ") + ", " +
                 std::to_string(std::count(reference.begin(), reference.end(), '\n')) + " lines");
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--only", only, "run a single criterion (1-7)")->check(CLI::Range(1, 7));
    app.add_option("--cli", cli_path_arg, "path to the lrising executable");
    CLI11_PARSE(app, argc, argv);

    const std::function<Outcome(SweepCache&)> criteria[] = {criterion1, criterion2, criterion3, criterion4,
                                                            criterion5, criterion6, criterion7};
    SweepCache cache;
    bool all = true;
    for (int k = 1; k <= 7; ++k) {
        if (only != 0 && only != k) continue;
        Outcome res;
        Clock clock;
        try {
            res = criteria[k - 1](cache);
        } catch (const std::exception& e) {
            res = {false, std::string("exception: ") + e.what()};
        }
        all = all && res.pass;
        std::cout << (res.pass ? "PASS" : "FAIL") << " criterion " << k << " [" << fmt("%.1f", clock.seconds())
                  << " s]: " << res.detail << std::endl;
    }
    return all ? 0 : 1;
}
