#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "chemid/forward.hpp"
#include "chemid/inverse.hpp"

namespace chemid {

/// One legacy ASCII VTK file (DATASET UNSTRUCTURED_GRID): POINTS, CELLS with
/// type 5 (triangle), and one POINT_DATA scalar per entry of `fields`. All
/// numbers use 17 significant digits, so a write/read cycle is bit-exact.
void write_vtk(const std::filesystem::path& path, const TriMesh& mesh,
               const std::vector<std::pair<std::string, const NodalField*>>& fields);

/// Reads the point scalars back, in file order. Vertex and cell counts must
/// match `mesh`; field values become fields on it.
std::vector<std::pair<std::string, NodalField>> read_vtk(
    const std::filesystem::path& path, const TriMesh& mesh);

struct ManifestEntry {
    int step = 0;
    std::string file;
};

/// Sidecar for a directory of snapshot files. `mesh_checksum` ties the data
/// to the exact mesh geometry; loaders refuse mismatches. Noise metadata is
/// present only for observed (perturbed) trajectories.
struct TrajectoryManifest {
    double dt = 0.0;
    double t_end = 0.0;
    std::uint64_t mesh_checksum = 0;
    std::vector<ManifestEntry> entries;
    bool has_noise = false;
    double delta = 0.0;
    std::uint64_t seed = 0;
};

void write_manifest(const std::filesystem::path& path, const TrajectoryManifest& m);
TrajectoryManifest read_manifest(const std::filesystem::path& path);

/// Writes every stride-th step (always including step 0) of the coupled
/// trajectory as <prefix>_NNNN.vtk files with scalars "rho" and "c", plus
/// manifest.json, into `dir` (created if missing).
void save_trajectory(const std::filesystem::path& dir, const TriMesh& mesh,
                     const SimulationResult& sim, int stride = 1,
                     const std::string& prefix = "snapshot");

/// Inverse of save_trajectory with stride 1; throws if the manifest's mesh
/// checksum differs from `mesh` or if any step 0..N is missing.
SimulationResult load_trajectory(const std::filesystem::path& dir, const TriMesh& mesh);

/// Observed densities: same layout with a single "rho" scalar per file and
/// {delta, seed} recorded in the manifest.
void save_observed(const std::filesystem::path& dir, const TriMesh& mesh,
                   const ObservedData& data, const std::string& prefix = "observed");
ObservedData load_observed(const std::filesystem::path& dir, const TriMesh& mesh);

}  // namespace chemid
