#include "chemid/sparse.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace chemid {

SparseOperator SparseOperator::from_triplets(int dim, std::vector<Triplet> triplets,
                                             bool symmetric) {
    if (dim < 0) throw std::invalid_argument("SparseOperator: negative dimension");
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= dim || t.col < 0 || t.col >= dim)
            throw std::invalid_argument("SparseOperator: triplet index out of range");
    }
    // Stable sort keeps insertion order among duplicates, so the per-entry
    // summation order is a deterministic function of the triplet sequence.
    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Triplet& a, const Triplet& b) {
                         return a.row != b.row ? a.row < b.row : a.col < b.col;
                     });

    SparseOperator op;
    op.dim_ = dim;
    op.symmetric_ = symmetric;
    op.row_ptr_.assign(static_cast<std::size_t>(dim) + 1, 0);

    std::size_t i = 0;
    while (i < triplets.size()) {
        const int r = triplets[i].row;
        const int c = triplets[i].col;
        double v = 0.0;
        while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
            v += triplets[i].value;
            ++i;
        }
        op.cols_.push_back(c);
        op.values_.push_back(v);
        op.row_ptr_[static_cast<std::size_t>(r) + 1] = static_cast<int>(op.cols_.size());
    }
    // Fill gaps for empty rows.
    for (std::size_t r = 1; r < op.row_ptr_.size(); ++r)
        op.row_ptr_[r] = std::max(op.row_ptr_[r], op.row_ptr_[r - 1]);
    return op;
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != dim_ || static_cast<int>(y.size()) != dim_)
        throw std::invalid_argument("SparseOperator::apply: size mismatch");
    for (int r = 0; r < dim_; ++r) {
        double s = 0.0;
        for (int k = row_ptr_[r]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
            s += values_[k] * x[cols_[k]];
        y[r] = s;
    }
}

std::vector<double> SparseOperator::apply(const std::vector<double>& x) const {
    std::vector<double> y(x.size());
    apply(x, y);
    return y;
}

double SparseOperator::entry(int i, int j) const {
    if (i < 0 || i >= dim_ || j < 0 || j >= dim_)
        throw std::invalid_argument("SparseOperator::entry: index out of range");
    for (int k = row_ptr_[i]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
        if (cols_[k] == j) return values_[k];
    return 0.0;
}

std::vector<double> SparseOperator::row_sums() const {
    std::vector<double> s(dim_, 0.0);
    for (int r = 0; r < dim_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
            s[r] += values_[k];
    return s;
}

double SparseOperator::total() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

std::vector<double> SparseOperator::diagonal() const {
    std::vector<double> d(dim_, 0.0);
    for (int r = 0; r < dim_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
            if (cols_[k] == r) d[r] = values_[k];
    return d;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

CgResult cg_solve(const SparseOperator& A, std::span<const double> b,
                  std::span<const double> x0, const CgOptions& opts) {
    const int n = A.dim();
    if (static_cast<int>(b.size()) != n || static_cast<int>(x0.size()) != n)
        throw std::invalid_argument("cg_solve: size mismatch");

    CgResult res;
    res.x.assign(x0.begin(), x0.end());

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }

    std::vector<double> r(n), p(n), q(n), z;
    A.apply(res.x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];

    std::vector<double> inv_diag;
    if (opts.jacobi) {
        inv_diag = A.diagonal();
        for (double& d : inv_diag) d = 1.0 / d;
        z.resize(n);
    }

    double rnorm = norm2(r);
    if (rnorm / bnorm <= opts.tol) {
        res.relative_residual = rnorm / bnorm;
        return res;
    }

    auto precond = [&](const std::vector<double>& v) -> const std::vector<double>& {
        if (!opts.jacobi) return v;
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * v[i];
        return z;
    };

    const std::vector<double>& z0 = precond(r);
    p.assign(z0.begin(), z0.end());
    double rho = dot(r, z0);

    for (int k = 1; k <= opts.max_iter; ++k) {
        A.apply(p, q);
        const double pq = dot(p, q);
        if (pq <= 0.0)
            throw SolverError("cg_solve: operator is not positive definite", rnorm / bnorm, k);
        const double alpha = rho / pq;
        for (int i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = norm2(r);
        res.iterations = k;
        res.relative_residual = rnorm / bnorm;
        if (res.relative_residual <= opts.tol) return res;

        const std::vector<double>& zk = precond(r);
        const double rho_next = dot(r, zk);
        const double beta = rho_next / rho;
        rho = rho_next;
        for (int i = 0; i < n; ++i) p[i] = zk[i] + beta * p[i];
    }
    throw SolverError("cg_solve: no convergence within max_iter (relative residual " +
                          std::to_string(res.relative_residual) + ")",
                      res.relative_residual, res.iterations);
}

CgResult cg_solve(const SparseOperator& A, std::span<const double> b,
                  const CgOptions& opts) {
    std::vector<double> zero(A.dim(), 0.0);
    return cg_solve(A, b, zero, opts);
}

}  // namespace chemid
