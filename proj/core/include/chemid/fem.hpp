#pragma once

#include <cstdint>
#include <vector>

#include "chemid/mesh.hpp"
#include "chemid/sparse.hpp"

namespace chemid {

/// P1 finite-element coefficient vector, one value per mesh vertex.
struct NodalField {
    std::vector<double> values;
    std::uint64_t mesh_id = 0;
};

/// Builds a NodalField on `mesh`, checking length and finiteness.
NodalField make_field(const TriMesh& mesh, std::vector<double> values);

/// Throws std::invalid_argument unless `field` belongs to `mesh`.
void require_same_mesh(const TriMesh& mesh, const NodalField& field);

/// Area and constant nodal basis gradients of one triangle.
struct TriGeometry {
    double area;
    double gx[3];
    double gy[3];
};
TriGeometry tri_geometry(const TriMesh& mesh, int t);

/// M_ij = \int phi_i phi_j dx, exact per-triangle formula (A/12 pattern).
SparseOperator assemble_mass(const TriMesh& mesh);

/// K_ij = \int grad phi_i . grad phi_j dx; Neumann conditions are natural,
/// no boundary rows are modified.
SparseOperator assemble_stiffness(const TriMesh& mesh);

/// b_i = \int w_h grad c_h . grad phi_i dx with w_h piecewise linear and
/// grad c_h constant per triangle (edge-midpoint quadrature, exact for this
/// integrand class); linear in both w and c.
std::vector<double> assemble_weighted_flux_load(const TriMesh& mesh,
                                                const NodalField& w,
                                                const NodalField& c);

/// (u, v)_Omega = u^T M v.
double l2_inner(const TriMesh& mesh, const NodalField& u, const NodalField& v);

}  // namespace chemid
