#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "chemid/fem.hpp"

namespace chemid {

/// Continuous piecewise-linear function on [0,1] with values at the uniform
/// grid rho_j = j/(n-1). Arguments outside [0,1] evaluate to the boundary
/// value (constant extension).
struct PiecewiseLinear1D {
    std::vector<double> values;

    int n_nodes() const { return static_cast<int>(values.size()); }
    double grid_point(int j) const { return static_cast<double>(j) / (n_nodes() - 1); }
};

PiecewiseLinear1D sample_function(int n_nodes, const std::function<double(double)>& f);

/// Interpolation weights of `rho` (clamped to [0,1]) on the n-node grid:
/// value = (1-t) * v[j] + t * v[j+1]. Shared by evaluation, composition,
/// and the adjoint scatter so the three stay exact transposes.
struct HatWeights {
    int j;
    double t;
};
HatWeights hat_weights(int n_nodes, double rho);

double evaluate(const PiecewiseLinear1D& f, double rho);

/// Entrywise f(rho_v); linear in f's coefficient vector.
NodalField compose_nodal(const PiecewiseLinear1D& f, const NodalField& rho);

/// Symmetric tridiagonal matrix (diag + one off-diagonal band).
struct Tridiag {
    std::vector<double> diag;
    std::vector<double> off;  // size n-1

    int dim() const { return static_cast<int>(diag.size()); }
    std::vector<double> apply(std::span<const double> x) const;
    double quadratic(std::span<const double> x) const;  // x^T A x
};

/// 1D P1 mass and stiffness matrices on [0,1]; combined = mass + stiffness,
/// so x^T combined x equals the squared H1(0,1) norm exactly for
/// piecewise-linear functions.
struct Gram1D {
    Tridiag mass;
    Tridiag stiffness;
    Tridiag combined;

    int dim() const { return combined.dim(); }
};

Gram1D h1_gram(int n_nodes);

double h1_norm(const PiecewiseLinear1D& f, const Gram1D& gram);

/// Diagnostic flags for the modeling assumptions on f and g; used to warn,
/// never to abort.
struct AssumptionReport {
    bool f_vanishes_at_endpoints = false;  // |f(0)|, |f(1)| <= 1e-12
    bool f_positive_interior = false;      // f > 0 at all interior nodes
    bool g_slopes_nonzero = false;         // g' != 0 on every cell

    bool all_pass() const {
        return f_vanishes_at_endpoints && f_positive_interior && g_slopes_nonzero;
    }
};

AssumptionReport validate_assumptions(const PiecewiseLinear1D& f,
                                      const PiecewiseLinear1D& g);

/// CSV format: header "rho,value", LF line endings, 17 significant digits.
void write_param_csv(const std::filesystem::path& path, const PiecewiseLinear1D& f);
PiecewiseLinear1D read_param_csv(const std::filesystem::path& path);

}  // namespace chemid
