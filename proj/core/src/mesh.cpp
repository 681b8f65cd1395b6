#include "chemid/mesh.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

namespace chemid {

namespace {

double signed_area(const std::array<double, 2>& a, const std::array<double, 2>& b,
                   const std::array<double, 2>& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

// Edge -> incident triangle count.
std::map<std::pair<int, int>, int> edge_counts(const TriMesh& mesh) {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ++edges[{a, b}];
        }
    }
    return edges;
}

std::set<int> boundary_vertex_set(const TriMesh& mesh) {
    std::set<int> bnd;
    for (const auto& [edge, count] : edge_counts(mesh)) {
        if (count == 1) {
            bnd.insert(edge.first);
            bnd.insert(edge.second);
        }
    }
    return bnd;
}

TriMesh refine(const TriMesh& coarse) {
    TriMesh fine;
    fine.vertices = coarse.vertices;

    const auto edges = edge_counts(coarse);
    std::map<std::pair<int, int>, int> midpoint;
    for (const auto& [edge, count] : edges) {
        const auto& a = coarse.vertices[edge.first];
        const auto& b = coarse.vertices[edge.second];
        std::array<double, 2> m = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
        if (count == 1) {
            // Boundary edge: project the new vertex radially onto the circle.
            const double r = std::hypot(m[0], m[1]);
            m[0] /= r;
            m[1] /= r;
        }
        midpoint[edge] = static_cast<int>(fine.vertices.size());
        fine.vertices.push_back(m);
    }

    auto mid = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        return midpoint.at({a, b});
    };

    for (const auto& t : coarse.triangles) {
        const int m01 = mid(t[0], t[1]);
        const int m12 = mid(t[1], t[2]);
        const int m20 = mid(t[2], t[0]);
        fine.triangles.push_back({t[0], m01, m20});
        fine.triangles.push_back({t[1], m12, m01});
        fine.triangles.push_back({t[2], m20, m12});
        fine.triangles.push_back({m01, m12, m20});
    }

    const auto bnd = boundary_vertex_set(fine);
    fine.boundary_vertices.assign(bnd.begin(), bnd.end());
    return fine;
}

}  // namespace

TriMesh build_disk_mesh(int refinement_level) {
    if (refinement_level < 0)
        throw std::invalid_argument("build_disk_mesh: refinement_level must be >= 0");

    TriMesh mesh;
    const int n = 8;
    mesh.vertices.push_back({0.0, 0.0});
    for (int k = 0; k < n; ++k) {
        const double phi = 2.0 * M_PI * k / n;
        mesh.vertices.push_back({std::cos(phi), std::sin(phi)});
        mesh.boundary_vertices.push_back(k + 1);
    }
    for (int k = 0; k < n; ++k)
        mesh.triangles.push_back({0, k + 1, (k + 1) % n + 1});

    for (int level = 0; level < refinement_level; ++level) mesh = refine(mesh);

    mesh.id = mesh_checksum(mesh);
    return mesh;
}

double triangle_area(const TriMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    return signed_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                       mesh.vertices[tri[2]]);
}

double mesh_area(const TriMesh& mesh) {
    double area = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) area += triangle_area(mesh, t);
    return area;
}

int count_edges(const TriMesh& mesh) {
    return static_cast<int>(edge_counts(mesh).size());
}

void validate_topology(const TriMesh& mesh) {
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int v : tri)
            if (v < 0 || v >= mesh.n_vertices())
                throw std::runtime_error("mesh: triangle vertex index out of range");
        if (triangle_area(mesh, t) <= 0.0)
            throw std::runtime_error("mesh: triangle with non-positive signed area");
    }
    for (const auto& [edge, count] : edge_counts(mesh)) {
        (void)edge;
        if (count != 1 && count != 2)
            throw std::runtime_error("mesh: non-conforming edge (hanging node)");
    }
    const auto bnd = boundary_vertex_set(mesh);
    if (std::set<int>(mesh.boundary_vertices.begin(), mesh.boundary_vertices.end()) != bnd)
        throw std::runtime_error("mesh: boundary vertex list inconsistent with edges");
}

void validate_disk_mesh(const TriMesh& mesh) {
    validate_topology(mesh);
    for (int v : mesh.boundary_vertices) {
        const double r = std::hypot(mesh.vertices[v][0], mesh.vertices[v][1]);
        if (std::abs(r - 1.0) > 1e-12)
            throw std::runtime_error("mesh: boundary vertex off the unit circle");
    }
}

std::uint64_t mesh_checksum(const TriMesh& mesh) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& v : mesh.vertices) mix(v.data(), sizeof(double) * 2);
    for (const auto& t : mesh.triangles) mix(t.data(), sizeof(int) * 3);
    return h;
}

}  // namespace chemid
