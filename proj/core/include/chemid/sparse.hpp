#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemid {

/// Sparse symmetric linear operator in compressed sparse row layout.
///
/// Assembled from (row, col, value) triplets; duplicate entries are summed
/// in (row, col, insertion) order so that assembly is deterministic for a
/// fixed triplet sequence.
class SparseOperator {
public:
    struct Triplet {
        int row;
        int col;
        double value;
    };

    SparseOperator() = default;

    static SparseOperator from_triplets(int dim, std::vector<Triplet> triplets,
                                        bool symmetric);

    /// y = A x
    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(const std::vector<double>& x) const;

    int dim() const { return dim_; }
    bool symmetric() const { return symmetric_; }
    std::size_t nnz() const { return values_.size(); }

    /// Stored value at (i, j); zero if the entry is not present.
    double entry(int i, int j) const;

    /// Per-row sums; for a mass matrix these are the lumped masses.
    std::vector<double> row_sums() const;

    /// Sum of all stored entries.
    double total() const;

    std::vector<double> diagonal() const;

private:
    int dim_ = 0;
    bool symmetric_ = false;
    std::vector<int> row_ptr_;
    std::vector<int> cols_;
    std::vector<double> values_;
};

/// Thrown when an iterative solve fails to reach its tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), final_residual(residual), iterations(iterations) {}

    double final_residual;
    int iterations;
};

struct CgOptions {
    double tol = 1e-10;   // relative residual ||Ax-b|| / ||b||
    int max_iter = 10000;
    bool jacobi = false;  // diagonal preconditioning
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Conjugate gradients for symmetric positive definite A, zero initial guess.
/// Throws SolverError if the relative residual does not reach opts.tol.
CgResult cg_solve(const SparseOperator& A, std::span<const double> b,
                  const CgOptions& opts = {});

/// Same, starting from an explicit initial guess (used by time-stepping
/// loops to warm-start from the previous level).
CgResult cg_solve(const SparseOperator& A, std::span<const double> b,
                  std::span<const double> x0, const CgOptions& opts = {});

}  // namespace chemid
