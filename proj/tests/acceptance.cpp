// Acceptance battery for the identification pipeline: every criterion prints
// one PASS/FAIL line with its measured numbers; the exit status is the number
// of failures. Heavy stages share one desk-scale simulation.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chemid/experiment.hpp"
#include "support/dense.hpp"

using namespace chemid;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void gate(bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PiecewiseLinear1D logistic(int n) {
    return sample_function(n, [](double r) { return r * (1.0 - r); });
}

PiecewiseLinear1D identity(int n) {
    return sample_function(n, [](double r) { return r; });
}

ModelConfig desk_model() {
    ModelConfig m;
    m.dt = 0.05;
    return m;
}

double relative_mass_drift(const TriMesh& mesh, const TimeSeriesField& rho) {
    const double m0 = total_mass(mesh, rho.fields.front());
    double drift = 0.0;
    for (const NodalField& slice : rho.fields)
        drift = std::max(drift, std::fabs(total_mass(mesh, slice) - m0));
    return drift / std::fabs(m0);
}

double overshoot(const RangeInfo& r) {
    return std::max(0.0, -r.min) + std::max(0.0, r.max - 1.0);
}

// Direction changes of f with a magnitude filter; an interior maximum is a
// rise followed by a fall.
int interior_maxima(const std::vector<double>& v, double tol) {
    int count = 0;
    int last_dir = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double d = v[i] - v[i - 1];
        if (std::fabs(d) <= tol) continue;
        const int dir = d > 0 ? 1 : -1;
        if (last_dir == 1 && dir == -1) ++count;
        last_dir = dir;
    }
    return count;
}

double max_interior_error(const PiecewiseLinear1D& a, const PiecewiseLinear1D& b,
                          double lo, double hi) {
    double e = 0.0;
    for (int j = 0; j < a.n_nodes(); ++j) {
        const double r = a.grid_point(j);
        if (r < lo - 1e-12 || r > hi + 1e-12) continue;
        e = std::max(e, std::fabs(a.values[j] - b.values[j]));
    }
    return e;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    const int n_param = 1000;
    const PiecewiseLinear1D f0 = logistic(n_param);
    const PiecewiseLinear1D g = identity(n_param);
    const Gram1D gram = h1_gram(n_param);
    const ModelConfig desk = desk_model();
    const TriMesh mesh4 = build_disk_mesh(4);
    const NodalField rho0 = initial_density(mesh4);

    // ---- 1. forward solver: conservation and speed at desk scale ----
    auto t0 = std::chrono::steady_clock::now();
    const SimulationResult sim4 = simulate(mesh4, desk, f0, g, rho0);
    const double sim_seconds = seconds_since(t0);
    const double drift = relative_mass_drift(mesh4, sim4.rho);
    gate(drift <= 1e-8 && sim_seconds < 60.0, "mass conservation",
         "relative drift " + fmt(drift) + " (limit 1e-08), " + fmt(sim_seconds) +
             " s (limit 60)");

    // ---- 2. invariant region, overshoot under refinement ----
    {
        const RangeInfo r4 = range_monitor(sim4.rho);
        ModelConfig fine = desk;
        fine.dt = 0.025;
        const TriMesh mesh5 = build_disk_mesh(5);
        const SimulationResult sim5 =
            simulate(mesh5, fine, f0, g, initial_density(mesh5));
        const RangeInfo r5 = range_monitor(sim5.rho);
        const double o4 = overshoot(r4);
        const double o5 = overshoot(r5);
        const bool in_box = r4.min >= -0.02 && r4.max <= 1.02;
        gate(in_box && o5 <= o4 + 1e-12, "invariant region",
             "desk range [" + fmt(r4.min) + ", " + fmt(r4.max) + "], overshoot " +
                 fmt(o4) + " -> " + fmt(o5) + " under refinement");
    }

    // ---- 3. adjoint identity on two mesh levels ----
    {
        std::mt19937_64 rng(2026);
        auto draw = [&rng](double lo, double hi) {
            return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
        };
        double worst = 0.0;
        for (int level : {2, 3}) {
            const TriMesh mesh = build_disk_mesh(level);
            // Mass-dominated elliptic balance: the CG floor sits orders of
            // magnitude below the 1e-10 bound for every solve involved.
            ModelConfig cfg;
            cfg.D_c = 0.01;
            cfg.A_c = 1.0;
            cfg.dt = 0.05;
            cfg.t_end = 0.5;
            cfg.cg_tol = 1e-13;
            TimeSeriesField observed;
            observed.dt = cfg.dt;
            for (int n = 0; n <= cfg.n_steps(); ++n) {
                std::vector<double> v(mesh.vertices.size());
                for (double& x : v) x = draw(0.05, 0.95);
                observed.fields.push_back(make_field(mesh, std::move(v)));
            }
            const AffineOperator op(mesh, cfg, identity(60), observed.fields[0],
                                    observed, 60);
            for (int pair = 0; pair < 10; ++pair) {
                PiecewiseLinear1D f;
                f.values.resize(60);
                for (double& x : f.values) x = draw(-1.0, 1.0);
                TimeSeriesField y;
                y.dt = cfg.dt;
                for (int n = 0; n <= cfg.n_steps(); ++n) {
                    std::vector<double> v(mesh.vertices.size());
                    for (double& x : v) x = draw(-1.0, 1.0);
                    y.fields.push_back(make_field(mesh, std::move(v)));
                }
                const TimeSeriesField af = op.apply_linear(f);
                const PiecewiseLinear1D aty = op.apply_adjoint(y);
                double fdot = 0.0;
                for (int j = 0; j < 60; ++j) fdot += f.values[j] * aty.values[j];
                const double defect = std::fabs(st_inner(mesh, af, y) - fdot) /
                                      (st_norm(mesh, af) * st_norm(mesh, y));
                worst = std::max(worst, defect);
            }
        }
        gate(worst < 1e-10, "adjoint identity",
             "max relative defect " + fmt(worst) +
                 " over 20 pairs on two mesh levels (limit 1e-10)");
    }

    // ---- 4. noiseless consistency of the perturbed operator ----
    {
        const AffineOperator op(mesh4, desk, g, rho0, sim4.rho, n_param);
        const double gap = st_norm(mesh4, op.apply_full(f0), sim4.rho);
        const double bound = 10.0 * desk.cg_tol * st_norm(mesh4, sim4.rho);
        gate(gap <= bound, "noiseless consistency",
             "st-norm gap " + fmt(gap) + " (limit " + fmt(bound) + ")");
    }

    // ---- 5. reconstructions at moderate and heavy noise ----
    // The Gram preconditioner clusters the normal-equation spectrum around
    // alpha; measured 25-70x fewer iterations at this scale with identical
    // minimizers (stopping is on the true residual either way). Without it
    // the scans below do not fit a serial time budget.
    CgneOptions cgne;
    cgne.tol = 1e-8;
    cgne.max_iter = 2000;
    cgne.precondition = true;
    {
        const ObservedData data = add_noise(mesh4, sim4.rho, 0.05, 42);
        const AffineOperator op(mesh4, desk, g, rho0, data.rho, n_param);
        const DiscrepancyResult sel = discrepancy_select(op, data, gram, {}, cgne);
        const double err_h1 = h1_error(sel.best.f_rec, f0, gram);
        const double err_max = max_interior_error(sel.best.f_rec, f0, 0.1, 0.9);
        gate(err_h1 <= 0.15 && err_max <= 0.05, "reconstruction at delta = 5e-2",
             "H1 error " + fmt(err_h1) + " (limit 0.15), max error on [0.1, 0.9] " +
                 fmt(err_max) + " (limit 0.05), alpha " + fmt(sel.best.alpha));

        // Semi-convergence guard: the discrepancy choice must sit within a
        // factor 10 of the error-minimizing alpha on the scan.
        double best_err = 1e300, best_alpha = 0.0;
        for (const TikhonovResult& s : sel.scan) {
            const double e = h1_error(s.f_rec, f0, gram);
            if (e < best_err) {
                best_err = e;
                best_alpha = s.alpha;
            }
        }
        const double ratio = sel.best.alpha > best_alpha
                                 ? sel.best.alpha / best_alpha
                                 : best_alpha / sel.best.alpha;
        gate(ratio <= 10.0, "semi-convergence guard",
             "selected alpha " + fmt(sel.best.alpha) + " vs error-optimal " +
                 fmt(best_alpha) + " (ratio " + fmt(ratio) + ", limit 10)");
    }
    {
        const ObservedData data = add_noise(mesh4, sim4.rho, 0.5, 42);
        const AffineOperator op(mesh4, desk, g, rho0, data.rho, n_param);
        const DiscrepancyResult sel = discrepancy_select(op, data, gram, {}, cgne);
        const std::vector<double>& v = sel.best.f_rec.values;
        double peak = 0.0;
        for (double x : v) peak = std::max(peak, std::fabs(x));
        const int maxima = interior_maxima(v, 1e-6 * std::max(peak, 1e-30));
        const double e0 = std::fabs(v.front());
        const double e1 = std::fabs(v.back());
        gate(maxima == 1 && e0 <= 0.15 && e1 <= 0.15, "reconstruction at delta = 5e-1",
             std::to_string(maxima) + " interior maximum(s), endpoints " + fmt(e0) +
                 " / " + fmt(e1) + " (limit 0.15)");
    }

    // ---- 6. discrepancy rates over four decades of noise ----
    {
        // The trajectory's density range tops out near 0.997 at this scale,
        // so parameter nodes above it are data-blind; on a fine grid the
        // unconstrained H1 completion of that tail puts a ~5e-2 floor under
        // the reconstruction error and flattens the fitted slope. A 30-node
        // grid keeps the experiment overdetermined, floor well below the
        // smallest-delta error.
        const int n_rate = 30;
        const PiecewiseLinear1D f_rate = logistic(n_rate);
        const PiecewiseLinear1D g_rate = identity(n_rate);
        const Gram1D gram_rate = h1_gram(n_rate);
        const SimulationResult sim_rate = simulate(mesh4, desk, f_rate, g_rate, rho0);
        t0 = std::chrono::steady_clock::now();
        const std::vector<double> deltas = default_rate_deltas(false);
        std::vector<std::uint64_t> seeds(deltas.size());
        for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = 42 + i;
        const RateStudy study = rate_study(mesh4, desk, f_rate, g_rate, rho0,
                                           sim_rate.rho, gram_rate, deltas, seeds,
                                           {}, cgne, NoiseKind::gaussian, 1);
        const double rate_seconds = seconds_since(t0);
        bool all_ok = true;
        for (const RateRow& row : study.rows) all_ok = all_ok && row.ok;
        const bool slopes_ok = study.slopes_defined && study.alpha_slope >= 0.7 &&
                               study.alpha_slope <= 1.3 && study.error_slope >= 0.3 &&
                               study.error_slope <= 0.7;
        gate(all_ok && slopes_ok && rate_seconds < 1800.0, "rate study",
             "alpha slope " + fmt(study.alpha_slope) + " (limits [0.7, 1.3]), error slope " +
                 fmt(study.error_slope) + " (limits [0.3, 0.7]), " + fmt(rate_seconds) +
                 " s (limit 1800)");
    }

    // ---- 7. dense-oracle equivalence on a 25-vertex mesh ----
    {
        const TriMesh mesh = build_disk_mesh(1);
        ModelConfig cfg;
        cfg.dt = 0.1;
        cfg.t_end = 0.5;
        cfg.cg_tol = 1e-12;
        const int n = mesh.n_vertices();
        const PiecewiseLinear1D fs = logistic(12);
        const PiecewiseLinear1D gs = identity(12);
        const NodalField r0 = initial_density(mesh);
        const testsupport::DenseMatrix m = testsupport::to_dense(assemble_mass(mesh));
        const testsupport::DenseMatrix k =
            testsupport::to_dense(assemble_stiffness(mesh));

        // Elliptic solve against dense LU.
        testsupport::DenseMatrix ell(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                ell.at(i, j) = cfg.D_c * k.at(i, j) + cfg.A_c * m.at(i, j);
        const NodalField grho = compose_nodal(gs, r0);
        const std::vector<double> c_want =
            testsupport::lu_solve(ell, testsupport::apply(m, grho.values));
        const NodalField c_got = elliptic_solve(mesh, cfg, gs, r0);
        double ell_err = 0.0, ell_scale = 0.0;
        for (int i = 0; i < n; ++i) {
            ell_err = std::max(ell_err, std::fabs(c_got.values[i] - c_want[i]));
            ell_scale = std::max(ell_scale, std::fabs(c_want[i]));
        }
        const double ell_rel = ell_err / ell_scale;

        // One parabolic step against dense LU.
        testsupport::DenseMatrix s(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s.at(i, j) = m.at(i, j) + cfg.dt * cfg.D_rho * k.at(i, j);
        const NodalField w = compose_nodal(fs, r0);
        std::vector<double> rhs = testsupport::apply(m, r0.values);
        const std::vector<double> flux = assemble_weighted_flux_load(mesh, w, c_got);
        for (int i = 0; i < n; ++i) rhs[i] += cfg.dt * flux[i];
        const std::vector<double> step_want = testsupport::lu_solve(s, rhs);
        const NodalField step_got = parabolic_step(mesh, cfg, fs, r0, c_got);
        double par_err = 0.0, par_scale = 0.0;
        for (int i = 0; i < n; ++i) {
            par_err = std::max(par_err, std::fabs(step_got.values[i] - step_want[i]));
            par_scale = std::max(par_scale, std::fabs(step_want[i]));
        }
        const double par_rel = par_err / par_scale;

        // Tikhonov solve against dense normal equations.
        const SimulationResult sim = simulate(mesh, cfg, fs, gs, r0);
        const ObservedData data = add_noise(mesh, sim.rho, 0.02, 3);
        const AffineOperator op(mesh, cfg, gs, r0, data.rho, 12);
        const Gram1D gram12 = h1_gram(12);
        const double alpha = 1e-3;
        const std::vector<TimeSeriesField> cols = op.basis_images();
        const TimeSeriesField diff = series_diff(data.rho, op.offset());
        testsupport::DenseMatrix nmat(12);
        std::vector<double> nrhs(12);
        const testsupport::DenseMatrix gd = testsupport::to_dense(gram12.combined);
        for (int j = 0; j < 12; ++j) {
            for (int kk = 0; kk <= j; ++kk) {
                const double val =
                    st_inner(mesh, cols[j], cols[kk]) + alpha * gd.at(j, kk);
                nmat.at(j, kk) = val;
                nmat.at(kk, j) = val;
            }
            nrhs[j] = st_inner(mesh, cols[j], diff);
        }
        const std::vector<double> tik_want = testsupport::lu_solve(nmat, nrhs);
        const TikhonovResult tik =
            solve_tikhonov(op, data, gram12, alpha, CgneOptions{1e-11, 20000, false});
        double tik_err = 0.0, tik_scale = 0.0;
        for (int j = 0; j < 12; ++j) {
            tik_err = std::max(tik_err, std::fabs(tik.f_rec.values[j] - tik_want[j]));
            tik_scale = std::max(tik_scale, std::fabs(tik_want[j]));
        }
        const double tik_rel = tik_err / tik_scale;

        gate(ell_rel <= 1e-8 && par_rel <= 1e-8 && tik_rel <= 1e-8,
             "dense-oracle equivalence",
             "elliptic " + fmt(ell_rel) + ", parabolic " + fmt(par_rel) +
                 ", tikhonov " + fmt(tik_rel) + " (limits 1e-08)");
    }

    // ---- 8. byte-level reproducibility of the inversion harness ----
    {
        const fs::path base = fs::temp_directory_path() /
                              ("chemid_accept_" + std::to_string(::getpid()));
        fs::remove_all(base);
        ExperimentConfig cfg;
        cfg.refinement = 2;
        cfg.model.dt = 0.1;
        cfg.model.t_end = 1.0;
        cfg.parameter_grid = 100;
        cfg.noise_delta = 0.05;
        cfg.noise_seed = 42;
        std::ostringstream sink;
        std::streambuf* cout_buf = std::cout.rdbuf(sink.rdbuf());
        cfg.output_dir = (base / "a").string();
        const int rc1 = cmd_invert(cfg);
        cfg.output_dir = (base / "b").string();
        const int rc2 = cmd_invert(cfg);
        std::cout.rdbuf(cout_buf);
        bool identical = rc1 == 0 && rc2 == 0;
        for (const char* name :
             {"f_rec.csv", "alpha_scan.csv", "reconstruction_vs_truth.csv"}) {
            identical = identical && !slurp(base / "a" / "invert" / name).empty() &&
                        slurp(base / "a" / "invert" / name) ==
                            slurp(base / "b" / "invert" / name);
        }
        fs::remove_all(base);
        gate(identical, "reproducible outputs",
             std::string("two identical-config inversions: exit codes ") +
                 std::to_string(rc1) + "/" + std::to_string(rc2) +
                 (identical ? ", CSVs byte-identical" : ", CSVs differ"));
    }

    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return g_failures > 0 ? 1 : 0;
}
