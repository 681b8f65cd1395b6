#include "chemid/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace chemid {

NodalField make_field(const TriMesh& mesh, std::vector<double> values) {
    if (static_cast<int>(values.size()) != mesh.n_vertices())
        throw std::invalid_argument("make_field: value count != vertex count");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("make_field: non-finite entry");
    return NodalField{std::move(values), mesh.id};
}

void require_same_mesh(const TriMesh& mesh, const NodalField& field) {
    if (field.mesh_id != mesh.id ||
        static_cast<int>(field.values.size()) != mesh.n_vertices())
        throw std::invalid_argument("field does not belong to this mesh");
}

TriGeometry tri_geometry(const TriMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];

    TriGeometry g;
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    g.area = 0.5 * det;
    // grad phi_i = (y_j - y_k, x_k - x_j) / det, indices cyclic.
    g.gx[0] = (p1[1] - p2[1]) / det;
    g.gy[0] = (p2[0] - p1[0]) / det;
    g.gx[1] = (p2[1] - p0[1]) / det;
    g.gy[1] = (p0[0] - p2[0]) / det;
    g.gx[2] = (p0[1] - p1[1]) / det;
    g.gy[2] = (p1[0] - p0[0]) / det;
    return g;
}

SparseOperator assemble_mass(const TriMesh& mesh) {
    std::vector<SparseOperator::Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double a = triangle_area(mesh, t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.push_back({tri[i], tri[j], (i == j ? a / 6.0 : a / 12.0)});
    }
    return SparseOperator::from_triplets(mesh.n_vertices(), std::move(trips), true);
}

SparseOperator assemble_stiffness(const TriMesh& mesh) {
    std::vector<SparseOperator::Triplet> trips;
    trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const TriGeometry g = tri_geometry(mesh, t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.push_back({tri[i], tri[j],
                                 g.area * (g.gx[i] * g.gx[j] + g.gy[i] * g.gy[j])});
    }
    return SparseOperator::from_triplets(mesh.n_vertices(), std::move(trips), true);
}

std::vector<double> assemble_weighted_flux_load(const TriMesh& mesh,
                                                const NodalField& w,
                                                const NodalField& c) {
    require_same_mesh(mesh, w);
    require_same_mesh(mesh, c);

    std::vector<double> b(mesh.n_vertices(), 0.0);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const TriGeometry g = tri_geometry(mesh, t);

        double cx = 0.0, cy = 0.0;  // grad c_h, constant on the triangle
        for (int i = 0; i < 3; ++i) {
            cx += c.values[tri[i]] * g.gx[i];
            cy += c.values[tri[i]] * g.gy[i];
        }
        // \int_T w_h dx = area * mean of vertex values (exact for linear w_h).
        const double wbar =
            (w.values[tri[0]] + w.values[tri[1]] + w.values[tri[2]]) / 3.0;
        for (int i = 0; i < 3; ++i)
            b[tri[i]] += g.area * wbar * (cx * g.gx[i] + cy * g.gy[i]);
    }
    return b;
}

double l2_inner(const TriMesh& mesh, const NodalField& u, const NodalField& v) {
    require_same_mesh(mesh, u);
    require_same_mesh(mesh, v);
    // u^T M v accumulated per triangle; avoids materializing M.
    double s = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double a = triangle_area(mesh, t);
        const double u0 = u.values[tri[0]], u1 = u.values[tri[1]], u2 = u.values[tri[2]];
        const double v0 = v.values[tri[0]], v1 = v.values[tri[1]], v2 = v.values[tri[2]];
        s += a / 12.0 *
             (2.0 * (u0 * v0 + u1 * v1 + u2 * v2) + u0 * v1 + u0 * v2 + u1 * v0 +
              u1 * v2 + u2 * v0 + u2 * v1);
    }
    return s;
}

}  // namespace chemid
