#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "chemid/mesh.hpp"
#include "chemid/param1d.hpp"
#include "support/dense.hpp"
#include "support/testutil.hpp"

using namespace chemid;
using testsupport::random_field;
using testsupport::random_param;
using testsupport::random_vector;

namespace {

PiecewiseLinear1D logistic(int n) {
    return sample_function(n, [](double r) { return r * (1.0 - r); });
}

PiecewiseLinear1D identity(int n) {
    return sample_function(n, [](double r) { return r; });
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("evaluate interpolates the logistic samples") {
    PiecewiseLinear1D f = logistic(1000);
    CHECK(std::fabs(evaluate(f, 0.5) - 0.25) < 1e-6);
    CHECK(std::fabs(evaluate(f, 0.2) - 0.16) < 1e-6);
}

TEST_CASE("evaluate is exact at grid nodes") {
    std::mt19937_64 rng(71);
    PiecewiseLinear1D f = random_param(17, rng);
    for (int j = 0; j < f.n_nodes(); ++j)
        CHECK(evaluate(f, f.grid_point(j)) == f.values[j]);
}

TEST_CASE("evaluate clamps to the boundary values") {
    std::mt19937_64 rng(73);
    PiecewiseLinear1D f = random_param(9, rng);
    CHECK(evaluate(f, -0.1) == f.values.front());
    CHECK(evaluate(f, 1.1) == f.values.back());
}

TEST_CASE("hat weights stay in range and reproduce evaluate") {
    std::mt19937_64 rng(79);
    PiecewiseLinear1D f = random_param(33, rng);
    for (int trial = 0; trial < 200; ++trial) {
        const double rho = -0.2 + 1.4 * testsupport::unit(rng);
        const HatWeights hw = hat_weights(f.n_nodes(), rho);
        CHECK(hw.j >= 0);
        CHECK(hw.j + 1 < f.n_nodes());
        CHECK(hw.t >= 0.0);
        CHECK(hw.t <= 1.0);
        const double via_weights = (1.0 - hw.t) * f.values[hw.j] + hw.t * f.values[hw.j + 1];
        CHECK(via_weights == evaluate(f, rho));
    }
}

TEST_CASE("compose_nodal identity returns the clamped density") {
    TriMesh mesh = build_disk_mesh(1);
    std::vector<double> vals(mesh.n_vertices());
    for (int i = 0; i < mesh.n_vertices(); ++i) vals[i] = -0.5 + 2.0 * i / (mesh.n_vertices() - 1.0);
    NodalField rho = make_field(mesh, vals);
    NodalField out = compose_nodal(identity(501), rho);
    for (int i = 0; i < mesh.n_vertices(); ++i) {
        const double want = std::min(1.0, std::max(0.0, vals[i]));
        CHECK(out.values[i] == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("compose_nodal of the zero parameter is the zero field") {
    TriMesh mesh = build_disk_mesh(1);
    std::mt19937_64 rng(83);
    NodalField rho = random_field(mesh, rng, 0.0, 1.0);
    PiecewiseLinear1D zero;
    zero.values.assign(12, 0.0);
    NodalField out = compose_nodal(zero, rho);
    for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("compose_nodal is linear in the parameter") {
    TriMesh mesh = build_disk_mesh(2);
    std::mt19937_64 rng(89);
    NodalField rho = random_field(mesh, rng, -0.1, 1.1);
    PiecewiseLinear1D f1 = random_param(40, rng);
    PiecewiseLinear1D f2 = random_param(40, rng);
    PiecewiseLinear1D sum;
    sum.values.resize(40);
    for (int j = 0; j < 40; ++j) sum.values[j] = f1.values[j] + f2.values[j];

    NodalField a = compose_nodal(sum, rho);
    NodalField b1 = compose_nodal(f1, rho);
    NodalField b2 = compose_nodal(f2, rho);
    for (int i = 0; i < mesh.n_vertices(); ++i)
        CHECK(std::fabs(a.values[i] - b1.values[i] - b2.values[i]) < 1e-14);
}

TEST_CASE("composition is Lipschitz in the density") {
    TriMesh mesh = build_disk_mesh(2);
    std::mt19937_64 rng(97);
    PiecewiseLinear1D f = random_param(25, rng);
    double lip = 0.0;
    const double h = 1.0 / (f.n_nodes() - 1);
    for (int j = 0; j + 1 < f.n_nodes(); ++j)
        lip = std::max(lip, std::fabs(f.values[j + 1] - f.values[j]) / h);

    NodalField rho = random_field(mesh, rng, 0.0, 1.0);
    const double eps = 1e-4;
    NodalField shifted = make_field(mesh, rho.values);
    for (double& v : shifted.values) v += eps;
    NodalField a = compose_nodal(f, rho);
    NodalField b = compose_nodal(f, shifted);
    for (int i = 0; i < mesh.n_vertices(); ++i)
        CHECK(std::fabs(a.values[i] - b.values[i]) <= lip * eps + 1e-12);
}

TEST_CASE("h1 gram closed forms") {
    Gram1D gram = h1_gram(200);
    PiecewiseLinear1D ones;
    ones.values.assign(200, 1.0);
    // The combined matrix mixes entry scales h and 1/h, so its quadratic
    // form on constants is exact only up to the entry rounding ~ n ulp(1/h).
    CHECK(gram.combined.quadratic(ones.values) == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(h1_norm(ones, gram) == doctest::Approx(1.0).epsilon(1e-11));

    PiecewiseLinear1D id = identity(200);
    CHECK(gram.combined.quadratic(id.values) == doctest::Approx(4.0 / 3.0).epsilon(1e-11));

    std::vector<double> st = gram.stiffness.apply(ones.values);
    CHECK(testsupport::max_abs(st) < 1e-13);
}

TEST_CASE("1d mass and stiffness have the textbook patterns") {
    const int n = 6;
    const double h = 1.0 / (n - 1);
    Gram1D gram = h1_gram(n);
    for (int i = 0; i < n; ++i) {
        const bool interior = i > 0 && i + 1 < n;
        CHECK(gram.mass.diag[i] ==
              doctest::Approx(interior ? 4.0 * h / 6.0 : 2.0 * h / 6.0).epsilon(1e-15));
        CHECK(gram.stiffness.diag[i] ==
              doctest::Approx((interior ? 2.0 : 1.0) / h).epsilon(1e-15));
    }
    for (int i = 0; i + 1 < n; ++i) {
        CHECK(gram.mass.off[i] == doctest::Approx(h / 6.0).epsilon(1e-15));
        CHECK(gram.stiffness.off[i] == doctest::Approx(-1.0 / h).epsilon(1e-15));
        CHECK(gram.combined.off[i] ==
              doctest::Approx(h / 6.0 - 1.0 / h).epsilon(1e-15));
    }
}

TEST_CASE("gram spectral floor: lambda_min(G) >= lambda_min(mass) > 0") {
    Gram1D gram = h1_gram(24);
    const double lg = testsupport::smallest_eigenvalue(testsupport::to_dense(gram.combined));
    const double lm = testsupport::smallest_eigenvalue(testsupport::to_dense(gram.mass));
    CHECK(lm > 0.0);
    CHECK(lg >= lm * (1.0 - 1e-10));
}

TEST_CASE("assumption diagnostics on the paper parameters") {
    AssumptionReport r = validate_assumptions(logistic(1000), identity(1000));
    CHECK(r.f_vanishes_at_endpoints);
    CHECK(r.f_positive_interior);
    CHECK(r.g_slopes_nonzero);
    CHECK(r.all_pass());
}

TEST_CASE("assumption diagnostics flag violations") {
    PiecewiseLinear1D zero;
    zero.values.assign(50, 0.0);
    AssumptionReport r1 = validate_assumptions(zero, identity(50));
    CHECK_FALSE(r1.f_positive_interior);
    CHECK(r1.f_vanishes_at_endpoints);

    PiecewiseLinear1D flat;
    flat.values.assign(50, 0.3);
    AssumptionReport r2 = validate_assumptions(logistic(50), flat);
    CHECK_FALSE(r2.g_slopes_nonzero);
}

TEST_CASE("parameter CSV round trip is bitwise") {
    std::mt19937_64 rng(101);
    PiecewiseLinear1D f = random_param(137, rng, -3.0, 3.0);
    const auto path = temp_file("chemid_param_roundtrip.csv");
    write_param_csv(path, f);
    PiecewiseLinear1D g = read_param_csv(path);
    REQUIRE(g.n_nodes() == f.n_nodes());
    for (int j = 0; j < f.n_nodes(); ++j) CHECK(g.values[j] == f.values[j]);
    std::filesystem::remove(path);
}

TEST_CASE("parameter CSV uses the documented format") {
    PiecewiseLinear1D f = logistic(3);
    const auto path = temp_file("chemid_param_format.csv");
    write_param_csv(path, f);
    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(text.rfind("rho,value\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    std::filesystem::remove(path);
}
