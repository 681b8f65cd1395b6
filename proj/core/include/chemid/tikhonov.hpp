#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chemid/inverse.hpp"

namespace chemid {

/// Conjugate-gradient settings for the normal equations
/// (A^T A + alpha G) f = A^T (rho^delta - b).
/// `precondition` switches on the exact tridiagonal G-preconditioner;
/// the default runs plain CG, with conditioning controlled by alpha G.
/// Convergence is always measured on the true residual, so both paths
/// satisfy the same optimality bound.
struct CgneOptions {
    double tol = 1e-8;  // relative: ||normal residual|| <= tol * ||rhs||
    int max_iter = 2000;
    bool precondition = false;
};

struct TikhonovResult {
    PiecewiseLinear1D f_rec;
    double alpha = 0.0;
    double residual = 0.0;       // st_norm(T f_rec - rho^delta), recomputed from scratch
    double gradient_norm = 0.0;  // final relative normal-equation residual
    int cgne_iterations = 0;
    bool converged = false;
};

/// Minimizer of  1/2 ||T f - rho^delta||_st^2 + alpha/2 ||f||_{H1}^2  via CG
/// on the normal equations; matrix-free in A and A^T, explicit tridiagonal G.
/// Non-convergence returns the best iterate with converged = false rather
/// than throwing. `warm` seeds the iteration (used along alpha scans).
TikhonovResult solve_tikhonov(const AffineOperator& op, const ObservedData& data,
                              const Gram1D& gram, double alpha,
                              const CgneOptions& opts = {},
                              const PiecewiseLinear1D* warm = nullptr);

struct DiscrepancyOptions {
    double tau = 1.03;
    double alpha0 = 1.0;
    double q = 0.5;
    int max_steps = 60;
};

/// `scan` lists every Tikhonov solve in evaluation order: the geometric
/// sweep alpha0 * q^k down to the first hit, then the refinement pass
/// between the bracketing pair. best == scan[best_index].
struct DiscrepancyResult {
    TikhonovResult best;
    int best_index = -1;
    std::vector<TikhonovResult> scan;
};

/// Largest alpha on the scan alpha_k = alpha0 * q^k whose recomputed
/// residual is <= tau * delta, sharpened by one geometric refinement pass
/// with ratio q^{1/4} between the bracketing pair. Each solve warm-starts
/// from the previous minimizer. Throws std::runtime_error listing the
/// residual curve when no scanned alpha satisfies the bound.
DiscrepancyResult discrepancy_select(const AffineOperator& op, const ObservedData& data,
                                     const Gram1D& gram,
                                     const DiscrepancyOptions& dopts = {},
                                     const CgneOptions& sopts = {});

/// sqrt((a - b)^T G (a - b)); grids must match.
double h1_error(const PiecewiseLinear1D& a, const PiecewiseLinear1D& b,
                const Gram1D& gram);

struct RateRow {
    double delta = 0.0;
    double alpha = 0.0;
    double residual = 0.0;
    double h1_error = 0.0;
    int cgne_iterations = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string message;  // failure description when !ok
};

struct RateStudy {
    std::vector<RateRow> rows;  // one per delta, input order
    bool slopes_defined = false;
    double alpha_slope = 0.0;  // least-squares slope of log alpha vs log delta
    double error_slope = 0.0;  // least-squares slope of log h1_error vs log delta
};

/// One full inversion per (delta, seed) pair: noise generation, operator
/// build, discrepancy selection, error against f_true. Failures are recorded
/// in the row and the study continues. Rows run concurrently on up to
/// max_threads workers (values < 1 mean one per row); output order is the
/// input order regardless of scheduling.
RateStudy rate_study(const TriMesh& mesh, const ModelConfig& cfg,
                     const PiecewiseLinear1D& f_true, const PiecewiseLinear1D& g,
                     const NodalField& rho0, const TimeSeriesField& truth_rho,
                     const Gram1D& gram, std::span<const double> deltas,
                     std::span<const std::uint64_t> seeds,
                     const DiscrepancyOptions& dopts = {},
                     const CgneOptions& sopts = {},
                     NoiseKind kind = NoiseKind::gaussian, int max_threads = 0);

}  // namespace chemid
