#include "chemid/param1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chemid {

PiecewiseLinear1D sample_function(int n_nodes, const std::function<double(double)>& f) {
    if (n_nodes < 2) throw std::invalid_argument("sample_function: need n_nodes >= 2");
    PiecewiseLinear1D p;
    p.values.resize(n_nodes);
    for (int j = 0; j < n_nodes; ++j)
        p.values[j] = f(static_cast<double>(j) / (n_nodes - 1));
    return p;
}

HatWeights hat_weights(int n_nodes, double rho) {
    const double x = std::clamp(rho, 0.0, 1.0);
    const double s = x * (n_nodes - 1);
    int j = std::min(static_cast<int>(s), n_nodes - 2);
    double t = s - j;
    // Snap to the nearest node so grid points evaluate exactly despite
    // rounding in x*(n-1).
    if (t < 1e-12) {
        t = 0.0;
    } else if (t > 1.0 - 1e-12) {
        ++j;
        t = 0.0;
        if (j > n_nodes - 2) j = n_nodes - 2, t = 1.0;
    }
    return {j, t};
}

double evaluate(const PiecewiseLinear1D& f, double rho) {
    const auto [j, t] = hat_weights(f.n_nodes(), rho);
    return (1.0 - t) * f.values[j] + t * f.values[j + 1];
}

NodalField compose_nodal(const PiecewiseLinear1D& f, const NodalField& rho) {
    NodalField out;
    out.mesh_id = rho.mesh_id;
    out.values.resize(rho.values.size());
    for (std::size_t v = 0; v < rho.values.size(); ++v)
        out.values[v] = evaluate(f, rho.values[v]);
    return out;
}

std::vector<double> Tridiag::apply(std::span<const double> x) const {
    const int n = dim();
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += off[i - 1] * x[i - 1];
        if (i < n - 1) s += off[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

double Tridiag::quadratic(std::span<const double> x) const {
    // Row-wise x . (A x): cancellations between diag and off entries happen
    // at row magnitude, not across the whole accumulated sum. For matrices
    // mixing scales h and 1/h this is orders of magnitude more accurate than
    // summing the diagonal and off-diagonal blocks separately.
    const int n = dim();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = diag[i] * x[i];
        if (i > 0) row += off[i - 1] * x[i - 1];
        if (i < n - 1) row += off[i] * x[i + 1];
        s += x[i] * row;
    }
    return s;
}

Gram1D h1_gram(int n_nodes) {
    if (n_nodes < 2) throw std::invalid_argument("h1_gram: need n_nodes >= 2");
    const int n = n_nodes;
    const double h = 1.0 / (n - 1);

    Gram1D g;
    g.mass.diag.assign(n, 2.0 * h / 3.0);
    g.mass.diag.front() = h / 3.0;
    g.mass.diag.back() = h / 3.0;
    g.mass.off.assign(n - 1, h / 6.0);

    g.stiffness.diag.assign(n, 2.0 / h);
    g.stiffness.diag.front() = 1.0 / h;
    g.stiffness.diag.back() = 1.0 / h;
    g.stiffness.off.assign(n - 1, -1.0 / h);

    g.combined.diag.resize(n);
    g.combined.off.resize(n - 1);
    for (int i = 0; i < n; ++i)
        g.combined.diag[i] = g.mass.diag[i] + g.stiffness.diag[i];
    for (int i = 0; i + 1 < n; ++i)
        g.combined.off[i] = g.mass.off[i] + g.stiffness.off[i];
    return g;
}

double h1_norm(const PiecewiseLinear1D& f, const Gram1D& gram) {
    if (f.n_nodes() != gram.dim())
        throw std::invalid_argument("h1_norm: grid mismatch");
    return std::sqrt(gram.combined.quadratic(f.values));
}

AssumptionReport validate_assumptions(const PiecewiseLinear1D& f,
                                      const PiecewiseLinear1D& g) {
    AssumptionReport r;
    r.f_vanishes_at_endpoints =
        std::abs(f.values.front()) <= 1e-12 && std::abs(f.values.back()) <= 1e-12;

    r.f_positive_interior = true;
    for (int j = 1; j + 1 < f.n_nodes(); ++j)
        if (f.values[j] <= 0.0) {
            r.f_positive_interior = false;
            break;
        }

    r.g_slopes_nonzero = true;
    for (int j = 0; j + 1 < g.n_nodes(); ++j)
        if (g.values[j + 1] == g.values[j]) {
            r.g_slopes_nonzero = false;
            break;
        }
    return r;
}

void write_param_csv(const std::filesystem::path& path, const PiecewiseLinear1D& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_param_csv: cannot open " + path.string());
    out << "rho,value\n";
    char buf[64];
    for (int j = 0; j < f.n_nodes(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", f.grid_point(j));
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", f.values[j]);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("write_param_csv: write failed for " + path.string());
}

PiecewiseLinear1D read_param_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_param_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("rho,value", 0) != 0)
        throw std::runtime_error("read_param_csv: missing 'rho,value' header in " +
                                 path.string());
    PiecewiseLinear1D f;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("read_param_csv: malformed line in " + path.string());
        f.values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (f.n_nodes() < 2)
        throw std::runtime_error("read_param_csv: need at least two rows in " +
                                 path.string());
    return f;
}

}  // namespace chemid
