#pragma once

#include <vector>

#include "chemid/fem.hpp"
#include "chemid/param1d.hpp"

namespace chemid {

/// Coefficients and discretization parameters of the coupled system
///   d/dt rho = div(D_rho grad rho - f(rho) grad c)
///   -D_c lap c + A_c c = g(rho)
/// with no-flux boundary conditions on the unit disk.
struct ModelConfig {
    double D_rho = 0.05;
    double D_c = 0.1;
    double A_c = 0.01;
    double dt = 0.025;
    double t_end = 5.0;
    double cg_tol = 1e-10;

    int n_steps() const;          // round(t_end / dt)
    void validate() const;        // throws std::invalid_argument
};

/// Fields on a uniform time grid; index n corresponds to time n * dt,
/// including n = 0.
struct TimeSeriesField {
    double dt = 0.0;
    std::vector<NodalField> fields;

    int n_steps() const { return static_cast<int>(fields.size()) - 1; }
};

/// Pre-assembled operators for one (mesh, config) pair. Reused across the
/// time loop and by the perturbed-operator module.
struct ForwardWorkspace {
    ForwardWorkspace(const TriMesh& mesh, const ModelConfig& cfg);

    const TriMesh& mesh;
    ModelConfig cfg;
    SparseOperator mass;
    SparseOperator stiffness;
    SparseOperator elliptic_system;   // D_c K + A_c M
    SparseOperator parabolic_system;  // M + dt D_rho K
    std::vector<double> lumped_mass;  // row sums of M

    NodalField solve_elliptic(const PiecewiseLinear1D& g, const NodalField& rho,
                              const NodalField* guess = nullptr) const;
    NodalField step_parabolic(const PiecewiseLinear1D& f, const NodalField& rho_n,
                              const NodalField& c_next) const;
    /// Same step with the composed coefficient w = f(rho_n) supplied directly.
    /// The perturbed operator freezes w at observed states and goes through
    /// this entry point, so both share one code path.
    NodalField step_parabolic_with(const NodalField& w, const NodalField& rho_n,
                                   const NodalField& c_next) const;
};

/// Nodal interpolation of the bump 0.45 exp(-((10 x1 - 3)^2 + 225 x2^2)/20).
NodalField initial_density(const TriMesh& mesh);

/// Solves (D_c K + A_c M) c = M g(rho).
NodalField elliptic_solve(const TriMesh& mesh, const ModelConfig& cfg,
                          const PiecewiseLinear1D& g, const NodalField& rho);

/// One implicit Euler step: (M + dt D_rho K) rho_next =
/// M rho_n + dt * flux_load(f(rho_n), c_next). Diffusion implicit,
/// chemotaxis frozen at rho_n against the new c.
NodalField parabolic_step(const TriMesh& mesh, const ModelConfig& cfg,
                          const PiecewiseLinear1D& f, const NodalField& rho_n,
                          const NodalField& c_next);

struct SimulationResult {
    TimeSeriesField rho;
    TimeSeriesField c;
};

/// Full time loop: c^{n+1} from rho^n via the elliptic solve, then rho^{n+1}
/// via the parabolic step. Both trajectories include the initial slice
/// (c^0 is computed from rho^0). A solver failure aborts with the step
/// index in the message.
SimulationResult simulate(const TriMesh& mesh, const ModelConfig& cfg,
                          const PiecewiseLinear1D& f, const PiecewiseLinear1D& g,
                          const NodalField& rho0);

/// 1^T M rho; conserved along the evolution by the no-flux structure.
double total_mass(const TriMesh& mesh, const NodalField& rho);

struct RangeInfo {
    double min = 0.0;
    double max = 0.0;
    int argmin_vertex = -1, argmin_step = -1;
    int argmax_vertex = -1, argmax_step = -1;
};

/// Global extrema over all vertices and time steps.
RangeInfo range_monitor(const TimeSeriesField& series);

}  // namespace chemid
