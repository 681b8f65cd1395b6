#include "chemid/tikhonov.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace chemid {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// LDL^T factorization of an SPD tridiagonal; solve() applies the exact
/// inverse, which is the G-preconditioner.
struct TridiagFactor {
    std::vector<double> d;
    std::vector<double> l;

    explicit TridiagFactor(const Tridiag& t) {
        const int n = t.dim();
        d.resize(n);
        if (n > 0) {
            l.resize(n - 1);
            d[0] = t.diag[0];
            for (int i = 1; i < n; ++i) {
                l[i - 1] = t.off[i - 1] / d[i - 1];
                d[i] = t.diag[i] - l[i - 1] * t.off[i - 1];
            }
        }
    }

    std::vector<double> solve(const std::vector<double>& r) const {
        const int n = static_cast<int>(d.size());
        std::vector<double> z(r);
        for (int i = 1; i < n; ++i) z[i] -= l[i - 1] * z[i - 1];
        for (int i = 0; i < n; ++i) z[i] /= d[i];
        for (int i = n - 2; i >= 0; --i) z[i] -= l[i] * z[i + 1];
        return z;
    }
};

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

}  // namespace

TikhonovResult solve_tikhonov(const AffineOperator& op, const ObservedData& data,
                              const Gram1D& gram, double alpha,
                              const CgneOptions& opts, const PiecewiseLinear1D* warm) {
    if (!(alpha > 0)) throw std::invalid_argument("solve_tikhonov: alpha must be > 0");
    const int n = op.n_param();
    if (gram.dim() != n)
        throw std::invalid_argument("solve_tikhonov: Gram dimension mismatch");
    if (warm && warm->n_nodes() != n)
        throw std::invalid_argument("solve_tikhonov: warm start dimension mismatch");

    auto normal_apply = [&](const std::vector<double>& p) {
        std::vector<double> out = op.apply_adjoint(op.apply_linear(PiecewiseLinear1D{p})).values;
        const std::vector<double> gp = gram.combined.apply(p);
        for (int i = 0; i < n; ++i) out[i] += alpha * gp[i];
        return out;
    };

    const std::vector<double> rhs =
        op.apply_adjoint(series_diff(data.rho, op.offset())).values;
    const double rhs_norm = std::sqrt(dot(rhs, rhs));

    TikhonovResult res;
    res.alpha = alpha;
    if (rhs_norm == 0.0) {
        res.f_rec.values.assign(n, 0.0);
        res.converged = true;
        res.residual = op.residual_norm(res.f_rec, data.rho);
        return res;
    }

    std::vector<double> x = warm ? warm->values : std::vector<double>(n, 0.0);
    std::vector<double> r = rhs;
    if (warm) {
        const std::vector<double> nx = normal_apply(x);
        for (int i = 0; i < n; ++i) r[i] -= nx[i];
    }

    std::optional<TridiagFactor> factor;
    if (opts.precondition) factor.emplace(gram.combined);
    auto precond = [&](const std::vector<double>& rr) {
        return factor ? factor->solve(rr) : rr;
    };

    const double stop = opts.tol * rhs_norm;
    double rnorm = std::sqrt(dot(r, r));
    bool converged = rnorm <= stop;
    int it = 0;
    if (!converged) {
        std::vector<double> z = precond(r);
        std::vector<double> p = z;
        double rz = dot(r, z);
        while (it < opts.max_iter) {
            const std::vector<double> np = normal_apply(p);
            const double pnp = dot(p, np);
            if (!(pnp > 0)) break;  // positivity lost; keep the best iterate
            const double gamma = rz / pnp;
            for (int i = 0; i < n; ++i) x[i] += gamma * p[i];
            for (int i = 0; i < n; ++i) r[i] -= gamma * np[i];
            ++it;
            rnorm = std::sqrt(dot(r, r));
            if (rnorm <= stop) {
                converged = true;
                break;
            }
            z = precond(r);
            const double rz_next = dot(r, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
    }

    res.f_rec.values = std::move(x);
    res.cgne_iterations = it;
    res.converged = converged;
    res.gradient_norm = rnorm / rhs_norm;
    res.residual = op.residual_norm(res.f_rec, data.rho);
    return res;
}

DiscrepancyResult discrepancy_select(const AffineOperator& op, const ObservedData& data,
                                     const Gram1D& gram, const DiscrepancyOptions& dopts,
                                     const CgneOptions& sopts) {
    if (!(dopts.tau > 1)) throw std::invalid_argument("discrepancy_select: tau must exceed 1");
    if (!(data.delta > 0))
        throw std::invalid_argument("discrepancy_select: needs a positive noise level");
    if (!(dopts.alpha0 > 0) || !(dopts.q > 0) || !(dopts.q < 1) || dopts.max_steps < 1)
        throw std::invalid_argument("discrepancy_select: bad scan parameters");

    const double bound = dopts.tau * data.delta;
    DiscrepancyResult out;
    int hit = -1;
    for (int k = 0; k < dopts.max_steps; ++k) {
        const double alpha = dopts.alpha0 * std::pow(dopts.q, k);
        const PiecewiseLinear1D* warm =
            out.scan.empty() ? nullptr : &out.scan.back().f_rec;
        out.scan.push_back(solve_tikhonov(op, data, gram, alpha, sopts, warm));
        if (out.scan.back().residual <= bound) {
            hit = k;
            break;
        }
    }
    if (hit < 0) {
        std::ostringstream msg;
        msg << "discrepancy_select: no alpha down to " << out.scan.back().alpha
            << " reached tau*delta = " << bound << "; residual curve:";
        for (const auto& s : out.scan)
            msg << "\n  alpha=" << s.alpha << " residual=" << s.residual;
        throw std::runtime_error(msg.str());
    }

    out.best = out.scan.back();
    out.best_index = static_cast<int>(out.scan.size()) - 1;
    if (hit > 0) {
        // The bound fails at alpha_{hit-1} and holds at alpha_hit; probe the
        // gap from above with ratio q^{1/4}.
        const double alpha_hi = dopts.alpha0 * std::pow(dopts.q, hit - 1);
        const double ratio = std::pow(dopts.q, 0.25);
        for (int m = 1; m <= 3; ++m) {
            const double alpha = alpha_hi * std::pow(ratio, m);
            out.scan.push_back(solve_tikhonov(op, data, gram, alpha, sopts, &out.best.f_rec));
            if (out.scan.back().residual <= bound) {
                out.best = out.scan.back();
                out.best_index = static_cast<int>(out.scan.size()) - 1;
                break;
            }
        }
    }
    return out;
}

double h1_error(const PiecewiseLinear1D& a, const PiecewiseLinear1D& b,
                const Gram1D& gram) {
    if (a.n_nodes() != b.n_nodes() || a.n_nodes() != gram.dim())
        throw std::invalid_argument("h1_error: grid mismatch");
    std::vector<double> d(a.values.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.values[i] - b.values[i];
    return std::sqrt(gram.combined.quadratic(d));
}

RateStudy rate_study(const TriMesh& mesh, const ModelConfig& cfg,
                     const PiecewiseLinear1D& f_true, const PiecewiseLinear1D& g,
                     const NodalField& rho0, const TimeSeriesField& truth_rho,
                     const Gram1D& gram, std::span<const double> deltas,
                     std::span<const std::uint64_t> seeds,
                     const DiscrepancyOptions& dopts, const CgneOptions& sopts,
                     NoiseKind kind, int max_threads) {
    if (deltas.size() != seeds.size())
        throw std::invalid_argument("rate_study: deltas and seeds must pair up");
    if (deltas.empty()) throw std::invalid_argument("rate_study: empty delta list");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0))
            throw std::invalid_argument("rate_study: noise levels must be positive");
        if (i > 0 && deltas[i] > deltas[i - 1])
            throw std::invalid_argument("rate_study: noise levels must be descending");
    }

    const int n = static_cast<int>(deltas.size());
    RateStudy study;
    study.rows.resize(n);

    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            RateRow row;
            row.delta = deltas[i];
            row.seed = seeds[i];
            try {
                const ObservedData data =
                    add_noise(mesh, truth_rho, deltas[i], seeds[i], kind);
                const AffineOperator opr(mesh, cfg, g, rho0, data.rho, f_true.n_nodes());
                const DiscrepancyResult sel =
                    discrepancy_select(opr, data, gram, dopts, sopts);
                row.alpha = sel.best.alpha;
                row.residual = sel.best.residual;
                row.h1_error = h1_error(f_true, sel.best.f_rec, gram);
                row.cgne_iterations = sel.best.cgne_iterations;
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.message = e.what();
            }
            study.rows[i] = std::move(row);
        }
    };

    int workers = max_threads < 1 ? n : std::min(max_threads, n);
    workers = std::min(workers, n);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    std::vector<double> lx, la, le;
    for (const RateRow& row : study.rows) {
        if (!row.ok || !(row.alpha > 0) || !(row.h1_error > 0)) continue;
        lx.push_back(std::log(row.delta));
        la.push_back(std::log(row.alpha));
        le.push_back(std::log(row.h1_error));
    }
    const bool two_deltas =
        lx.size() >= 2 && *std::max_element(lx.begin(), lx.end()) >
                              *std::min_element(lx.begin(), lx.end());
    if (two_deltas) {
        study.slopes_defined = true;
        study.alpha_slope = ls_slope(lx, la);
        study.error_slope = ls_slope(lx, le);
    }
    return study;
}

}  // namespace chemid
