#include "chemid/inverse.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace chemid {

namespace {

void check_series_pair(const TimeSeriesField& a, const TimeSeriesField& b,
                       const char* who) {
    if (a.fields.size() != b.fields.size())
        throw std::invalid_argument(std::string(who) + ": series length mismatch");
    if (a.dt != b.dt)
        throw std::invalid_argument(std::string(who) + ": series dt mismatch");
}

}  // namespace

double st_inner(const TriMesh& mesh, const TimeSeriesField& u, const TimeSeriesField& v) {
    check_series_pair(u, v, "st_inner");
    if (u.fields.size() < 2 || u.dt <= 0)
        throw std::invalid_argument("st_inner: need dt > 0 and at least two slices");
    const int N = u.n_steps();
    double s = 0.0;
    for (int n = 0; n <= N; ++n) {
        const double w = (n == 0 || n == N) ? 0.5 * u.dt : u.dt;
        s += w * l2_inner(mesh, u.fields[n], v.fields[n]);
    }
    return s;
}

double st_norm(const TriMesh& mesh, const TimeSeriesField& u) {
    return std::sqrt(st_inner(mesh, u, u));
}

double st_norm(const TriMesh& mesh, const TimeSeriesField& a, const TimeSeriesField& b) {
    check_series_pair(a, b, "st_norm");
    if (a.fields.size() < 2 || a.dt <= 0)
        throw std::invalid_argument("st_norm: need dt > 0 and at least two slices");
    const int N = a.n_steps();
    NodalField d;
    double s = 0.0;
    for (int n = 0; n <= N; ++n) {
        const auto& fa = a.fields[n];
        const auto& fb = b.fields[n];
        if (fa.mesh_id != fb.mesh_id || fa.values.size() != fb.values.size())
            throw std::invalid_argument("st_norm: slice mesh mismatch");
        d.mesh_id = fa.mesh_id;
        d.values.resize(fa.values.size());
        for (std::size_t i = 0; i < fa.values.size(); ++i)
            d.values[i] = fa.values[i] - fb.values[i];
        const double w = (n == 0 || n == N) ? 0.5 * a.dt : a.dt;
        s += w * l2_inner(mesh, d, d);
    }
    return std::sqrt(s);
}

TimeSeriesField series_diff(const TimeSeriesField& a, const TimeSeriesField& b) {
    check_series_pair(a, b, "series_diff");
    TimeSeriesField d;
    d.dt = a.dt;
    d.fields.reserve(a.fields.size());
    for (std::size_t n = 0; n < a.fields.size(); ++n) {
        const auto& fa = a.fields[n];
        const auto& fb = b.fields[n];
        if (fa.mesh_id != fb.mesh_id || fa.values.size() != fb.values.size())
            throw std::invalid_argument("series_diff: slice mesh mismatch");
        NodalField f;
        f.mesh_id = fa.mesh_id;
        f.values.resize(fa.values.size());
        for (std::size_t i = 0; i < fa.values.size(); ++i)
            f.values[i] = fa.values[i] - fb.values[i];
        d.fields.push_back(std::move(f));
    }
    return d;
}

ObservedData add_noise(const TriMesh& mesh, const TimeSeriesField& truth,
                       double delta, std::uint64_t seed, NoiseKind kind) {
    if (delta < 0) throw std::invalid_argument("add_noise: delta must be >= 0");
    if (truth.fields.size() < 2)
        throw std::invalid_argument("add_noise: need at least two slices");
    for (const auto& f : truth.fields) require_same_mesh(mesh, f);

    ObservedData out;
    out.rho = truth;
    out.delta = delta;
    out.seed = seed;
    if (delta == 0.0) return out;

    std::mt19937_64 rng(seed);
    auto unit = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };  // [0, 1)

    TimeSeriesField e;
    e.dt = truth.dt;
    e.fields.resize(truth.fields.size());
    bool have_spare = false;
    double spare = 0.0;
    for (std::size_t n = 0; n < e.fields.size(); ++n) {
        e.fields[n].mesh_id = mesh.id;
        e.fields[n].values.resize(mesh.n_vertices());
        for (double& v : e.fields[n].values) {
            if (kind == NoiseKind::uniform) {
                v = 2.0 * unit() - 1.0;
            } else if (have_spare) {
                v = spare;
                have_spare = false;
            } else {
                const double r = std::sqrt(-2.0 * std::log(1.0 - unit()));
                const double phi = 2.0 * 3.14159265358979323846 * unit();
                v = r * std::cos(phi);
                spare = r * std::sin(phi);
                have_spare = true;
            }
        }
    }

    const double scale = delta / st_norm(mesh, e);
    for (std::size_t n = 0; n < e.fields.size(); ++n)
        for (int i = 0; i < mesh.n_vertices(); ++i)
            out.rho.fields[n].values[i] += scale * e.fields[n].values[i];
    return out;
}

AffineOperator::AffineOperator(const TriMesh& mesh, const ModelConfig& cfg,
                               const PiecewiseLinear1D& g, const NodalField& rho0,
                               const TimeSeriesField& observed_rho, int n_param)
    : mesh_(mesh), ws_(mesh, cfg), n_param_(n_param), rho0_(rho0) {
    if (n_param < 2) throw std::invalid_argument("AffineOperator: need n_param >= 2");
    require_same_mesh(mesh, rho0);
    const int N = cfg.n_steps();
    if (static_cast<int>(observed_rho.fields.size()) != N + 1)
        throw std::invalid_argument("AffineOperator: observed trajectory has " +
                                    std::to_string(observed_rho.fields.size()) +
                                    " slices, config asks for " + std::to_string(N + 1));
    for (const auto& f : observed_rho.fields) require_same_mesh(mesh, f);

    // Chemoattractant chain with the same warm-start sequence as simulate():
    // the zero-guess solve at the data's initial state seeds the chain but is
    // itself never used as a level.
    c_levels_.reserve(N);
    NodalField seed_c = ws_.solve_elliptic(g, observed_rho.fields[0]);
    const NodalField* prev = &seed_c;
    for (int n = 0; n < N; ++n) {
        c_levels_.push_back(ws_.solve_elliptic(g, observed_rho.fields[n], prev));
        prev = &c_levels_.back();
    }

    weights_.resize(N);
    for (int n = 0; n < N; ++n) {
        weights_[n].resize(mesh.n_vertices());
        for (int i = 0; i < mesh.n_vertices(); ++i)
            weights_[n][i] = hat_weights(n_param, observed_rho.fields[n].values[i]);
    }

    PiecewiseLinear1D zero;
    zero.values.assign(n_param, 0.0);
    offset_ = apply_full(zero);
}

NodalField AffineOperator::compose_frozen(int n, const PiecewiseLinear1D& f) const {
    NodalField w;
    w.mesh_id = mesh_.id;
    w.values.resize(mesh_.n_vertices());
    for (int i = 0; i < mesh_.n_vertices(); ++i) {
        const HatWeights& hw = weights_[n][i];
        // Same expression as evaluate(); keeps T identical to the simulation
        // on noiseless data.
        w.values[i] = (1.0 - hw.t) * f.values[hw.j] + hw.t * f.values[hw.j + 1];
    }
    return w;
}

TimeSeriesField AffineOperator::apply_full(const PiecewiseLinear1D& f) const {
    if (f.n_nodes() != n_param_)
        throw std::invalid_argument("apply_full: parameter node count mismatch");
    const int N = n_time_steps();
    TimeSeriesField out;
    out.dt = ws_.cfg.dt;
    out.fields.reserve(N + 1);
    out.fields.push_back(rho0_);
    for (int n = 0; n < N; ++n)
        out.fields.push_back(
            ws_.step_parabolic_with(compose_frozen(n, f), out.fields[n], c_levels_[n]));
    return out;
}

TimeSeriesField AffineOperator::apply_linear(const PiecewiseLinear1D& f) const {
    if (f.n_nodes() != n_param_)
        throw std::invalid_argument("apply_linear: parameter node count mismatch");
    const int N = n_time_steps();
    TimeSeriesField out;
    out.dt = ws_.cfg.dt;
    out.fields.reserve(N + 1);
    NodalField zero;
    zero.mesh_id = mesh_.id;
    zero.values.assign(mesh_.n_vertices(), 0.0);
    out.fields.push_back(std::move(zero));
    for (int n = 0; n < N; ++n)
        out.fields.push_back(
            ws_.step_parabolic_with(compose_frozen(n, f), out.fields[n], c_levels_[n]));
    return out;
}

PiecewiseLinear1D AffineOperator::apply_adjoint(const TimeSeriesField& y) const {
    const int N = n_time_steps();
    if (static_cast<int>(y.fields.size()) != N + 1)
        throw std::invalid_argument("apply_adjoint: series length mismatch");
    for (const auto& f : y.fields) require_same_mesh(mesh_, f);

    const double dt = ws_.cfg.dt;
    const CgOptions opts{ws_.cfg.cg_tol, 100000, false};
    const int V = mesh_.n_vertices();

    PiecewiseLinear1D out;
    out.values.assign(n_param_, 0.0);

    // Backward substitution through the trapezoidal pairing:
    //   lambda_n = w_n M y_n + M S^{-1} lambda_{n+1},
    //   (A^T y) += dt C_{n-1}^T B_n^T S^{-1} lambda_n.
    std::vector<double> lambda(V, 0.0);
    std::vector<double> mu;
    for (int n = N; n >= 1; --n) {
        const double wn = (n == N) ? 0.5 * dt : dt;
        const std::vector<double> My = ws_.mass.apply(y.fields[n].values);
        for (int i = 0; i < V; ++i) lambda[i] += wn * My[i];

        CgResult sol = mu.empty() ? cg_solve(ws_.parabolic_system, lambda, opts)
                                  : cg_solve(ws_.parabolic_system, lambda, mu, opts);
        mu = std::move(sol.x);

        // B_n^T mu: each triangle contributes area/3 * sum_i (grad c . grad
        // phi_i) mu_i to all three of its vertices (transpose of the flux
        // load's mean-value pattern).
        const NodalField& c = c_levels_[n - 1];
        std::vector<double> s(V, 0.0);
        for (int t = 0; t < mesh_.n_triangles(); ++t) {
            const auto& tri = mesh_.triangles[t];
            const TriGeometry g = tri_geometry(mesh_, t);
            double cx = 0.0, cy = 0.0;
            for (int i = 0; i < 3; ++i) {
                cx += c.values[tri[i]] * g.gx[i];
                cy += c.values[tri[i]] * g.gy[i];
            }
            double acc = 0.0;
            for (int i = 0; i < 3; ++i)
                acc += (cx * g.gx[i] + cy * g.gy[i]) * mu[tri[i]];
            const double sT = g.area / 3.0 * acc;
            for (int i = 0; i < 3; ++i) s[tri[i]] += sT;
        }

        // C_{n-1}^T: scatter through the frozen interpolation weights.
        const auto& wts = weights_[n - 1];
        for (int i = 0; i < V; ++i) {
            out.values[wts[i].j] += dt * (1.0 - wts[i].t) * s[i];
            out.values[wts[i].j + 1] += dt * wts[i].t * s[i];
        }

        lambda = ws_.mass.apply(mu);
    }
    return out;
}

double AffineOperator::residual_norm(const PiecewiseLinear1D& f,
                                     const TimeSeriesField& target) const {
    return st_norm(mesh_, apply_full(f), target);
}

std::vector<TimeSeriesField> AffineOperator::basis_images() const {
    std::vector<TimeSeriesField> cols;
    cols.reserve(n_param_);
    PiecewiseLinear1D e;
    e.values.assign(n_param_, 0.0);
    for (int j = 0; j < n_param_; ++j) {
        e.values[j] = 1.0;
        cols.push_back(apply_linear(e));
        e.values[j] = 0.0;
    }
    return cols;
}

double perturbation_gap(const TriMesh& mesh, const ModelConfig& cfg,
                        const PiecewiseLinear1D& f, const PiecewiseLinear1D& g,
                        const NodalField& rho0, const TimeSeriesField& truth_rho,
                        const ObservedData& data) {
    const AffineOperator perturbed(mesh, cfg, g, rho0, data.rho, f.n_nodes());
    const AffineOperator unperturbed(mesh, cfg, g, rho0, truth_rho, f.n_nodes());
    return st_norm(mesh, perturbed.apply_full(f), unperturbed.apply_full(f));
}

}  // namespace chemid
