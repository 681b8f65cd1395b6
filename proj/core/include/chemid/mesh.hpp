#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace chemid {

/// Conforming triangulation of the unit disk with counterclockwise triangles.
struct TriMesh {
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> boundary_vertices;  // sorted, ascending
    std::uint64_t id = 0;                // geometry checksum, set by build_disk_mesh

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
};

/// Unit-disk mesh: a fan of 8 triangles around the origin, uniformly
/// red-refined `refinement_level` times. Midpoints of boundary edges are
/// projected radially onto the unit circle, so every level triangulates the
/// inscribed regular polygon with 8 * 2^level sides. Vertex counts per
/// level: 9, 25, 81, 289, 1089, 4225, ... (roughly 4x per level; memory
/// grows accordingly).
TriMesh build_disk_mesh(int refinement_level);

double triangle_area(const TriMesh& mesh, int t);

/// Sum of triangle areas; approaches pi at O(h^2).
double mesh_area(const TriMesh& mesh);

/// Number of distinct edges.
int count_edges(const TriMesh& mesh);

/// Checks positive triangle areas, conformity (each interior edge shared by
/// exactly two triangles, boundary edges by one), and consistency of the
/// boundary vertex list. Throws std::runtime_error on violation.
void validate_topology(const TriMesh& mesh);

/// Additionally checks that all boundary vertices lie on the unit circle
/// to within 1e-12 of radius 1.
void validate_disk_mesh(const TriMesh& mesh);

/// FNV-1a hash over vertex coordinates and triangle indices; used as the
/// mesh id and as the checksum in trajectory manifests.
std::uint64_t mesh_checksum(const TriMesh& mesh);

}  // namespace chemid
