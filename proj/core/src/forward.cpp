#include "chemid/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chemid {

int ModelConfig::n_steps() const { return static_cast<int>(std::lround(t_end / dt)); }

void ModelConfig::validate() const {
    if (D_rho <= 0 || D_c <= 0 || A_c <= 0 || dt <= 0 || t_end <= 0 || cg_tol <= 0)
        throw std::invalid_argument("ModelConfig: all parameters must be positive");
    const double steps = t_end / dt;
    if (std::abs(steps - std::lround(steps)) > 0.5)
        throw std::invalid_argument("ModelConfig: t_end/dt must be near an integer");
    if (std::lround(steps) < 1)
        throw std::invalid_argument("ModelConfig: need at least one time step");
}

namespace {

// a*M + b*K, assembled jointly per triangle in one pass.
SparseOperator combine(double a, double b, const TriMesh& mesh) {
    std::vector<SparseOperator::Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const TriGeometry g = tri_geometry(mesh, t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double m = (i == j ? g.area / 6.0 : g.area / 12.0);
                const double k = g.area * (g.gx[i] * g.gx[j] + g.gy[i] * g.gy[j]);
                trips.push_back({tri[i], tri[j], a * m + b * k});
            }
    }
    return SparseOperator::from_triplets(mesh.n_vertices(), std::move(trips), true);
}

}  // namespace

ForwardWorkspace::ForwardWorkspace(const TriMesh& mesh_, const ModelConfig& cfg_)
    : mesh(mesh_),
      cfg(cfg_),
      mass(assemble_mass(mesh_)),
      stiffness(assemble_stiffness(mesh_)),
      elliptic_system(combine(cfg_.A_c, cfg_.D_c, mesh_)),
      parabolic_system(combine(1.0, cfg_.dt * cfg_.D_rho, mesh_)),
      lumped_mass(mass.row_sums()) {
    cfg.validate();
}

NodalField ForwardWorkspace::solve_elliptic(const PiecewiseLinear1D& g,
                                            const NodalField& rho,
                                            const NodalField* guess) const {
    require_same_mesh(mesh, rho);
    const NodalField grho = compose_nodal(g, rho);
    const std::vector<double> rhs = mass.apply(grho.values);
    CgOptions opts{cfg.cg_tol, 100000, false};
    CgResult sol = guess ? cg_solve(elliptic_system, rhs, guess->values, opts)
                         : cg_solve(elliptic_system, rhs, opts);
    return NodalField{std::move(sol.x), mesh.id};
}

NodalField ForwardWorkspace::step_parabolic(const PiecewiseLinear1D& f,
                                            const NodalField& rho_n,
                                            const NodalField& c_next) const {
    return step_parabolic_with(compose_nodal(f, rho_n), rho_n, c_next);
}

NodalField ForwardWorkspace::step_parabolic_with(const NodalField& w,
                                                 const NodalField& rho_n,
                                                 const NodalField& c_next) const {
    require_same_mesh(mesh, rho_n);
    require_same_mesh(mesh, c_next);
    const std::vector<double> flux = assemble_weighted_flux_load(mesh, w, c_next);
    std::vector<double> rhs = mass.apply(rho_n.values);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += cfg.dt * flux[i];
    // Warm start from rho_n: a stationary state is reproduced exactly.
    CgResult sol =
        cg_solve(parabolic_system, rhs, rho_n.values, CgOptions{cfg.cg_tol, 100000, false});
    return NodalField{std::move(sol.x), mesh.id};
}

NodalField initial_density(const TriMesh& mesh) {
    std::vector<double> v(mesh.n_vertices());
    for (int i = 0; i < mesh.n_vertices(); ++i) {
        const double x1 = mesh.vertices[i][0];
        const double x2 = mesh.vertices[i][1];
        const double q = (10.0 * x1 - 3.0) * (10.0 * x1 - 3.0) + 225.0 * x2 * x2;
        v[i] = 0.45 * std::exp(-q / 20.0);
    }
    return NodalField{std::move(v), mesh.id};
}

NodalField elliptic_solve(const TriMesh& mesh, const ModelConfig& cfg,
                          const PiecewiseLinear1D& g, const NodalField& rho) {
    return ForwardWorkspace(mesh, cfg).solve_elliptic(g, rho);
}

NodalField parabolic_step(const TriMesh& mesh, const ModelConfig& cfg,
                          const PiecewiseLinear1D& f, const NodalField& rho_n,
                          const NodalField& c_next) {
    return ForwardWorkspace(mesh, cfg).step_parabolic(f, rho_n, c_next);
}

SimulationResult simulate(const TriMesh& mesh, const ModelConfig& cfg,
                          const PiecewiseLinear1D& f, const PiecewiseLinear1D& g,
                          const NodalField& rho0) {
    cfg.validate();
    require_same_mesh(mesh, rho0);
    const ForwardWorkspace ws(mesh, cfg);
    const int N = cfg.n_steps();

    SimulationResult out;
    out.rho.dt = cfg.dt;
    out.c.dt = cfg.dt;
    out.rho.fields.reserve(N + 1);
    out.c.fields.reserve(N + 1);
    out.rho.fields.push_back(rho0);

    try {
        out.c.fields.push_back(ws.solve_elliptic(g, rho0));
        for (int n = 0; n < N; ++n) {
            const NodalField& rho_n = out.rho.fields[n];
            // c is quasi-static; the first in-loop solve reproduces c^0.
            NodalField c_next = ws.solve_elliptic(g, rho_n, &out.c.fields.back());
            NodalField rho_next = ws.step_parabolic(f, rho_n, c_next);
            out.c.fields.push_back(std::move(c_next));
            out.rho.fields.push_back(std::move(rho_next));
        }
    } catch (const SolverError& err) {
        throw std::runtime_error("simulate: solver failure at step " +
                                 std::to_string(out.rho.fields.size()) + ": " +
                                 err.what());
    }
    return out;
}

double total_mass(const TriMesh& mesh, const NodalField& rho) {
    require_same_mesh(mesh, rho);
    // 1^T M rho = row sums of M dotted with rho.
    const std::vector<double> lumped = assemble_mass(mesh).row_sums();
    double s = 0.0;
    for (int i = 0; i < mesh.n_vertices(); ++i) s += lumped[i] * rho.values[i];
    return s;
}

RangeInfo range_monitor(const TimeSeriesField& series) {
    if (series.fields.empty())
        throw std::invalid_argument("range_monitor: empty series");
    RangeInfo r;
    r.min = r.max = series.fields[0].values[0];
    r.argmin_vertex = r.argmax_vertex = 0;
    r.argmin_step = r.argmax_step = 0;
    for (int n = 0; n < static_cast<int>(series.fields.size()); ++n) {
        const auto& vals = series.fields[n].values;
        for (int v = 0; v < static_cast<int>(vals.size()); ++v) {
            if (vals[v] < r.min) {
                r.min = vals[v];
                r.argmin_vertex = v;
                r.argmin_step = n;
            }
            if (vals[v] > r.max) {
                r.max = vals[v];
                r.argmax_vertex = v;
                r.argmax_step = n;
            }
        }
    }
    return r;
}

}  // namespace chemid
