#include "chemid/vtk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace chemid {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void fail(const std::filesystem::path& p, const std::string& what) {
    throw std::runtime_error(p.string() + ": " + what);
}

}  // namespace

void write_vtk(const std::filesystem::path& path, const TriMesh& mesh,
               const std::vector<std::pair<std::string, const NodalField*>>& fields) {
    if (fields.empty()) throw std::invalid_argument("write_vtk: no fields");
    for (const auto& [name, f] : fields) {
        if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos)
            throw std::invalid_argument("write_vtk: field name must be a single token");
        require_same_mesh(mesh, *f);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << "# vtk DataFile Version 3.0\n";
    out << "chemid snapshot\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_vertices() << " double\n";
    for (const auto& v : mesh.vertices)
        out << fmt(v[0]) << ' ' << fmt(v[1]) << " 0\n";
    out << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << "\n";
    for (const auto& t : mesh.triangles)
        out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
    out << "CELL_TYPES " << mesh.n_triangles() << "\n";
    for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
    out << "POINT_DATA " << mesh.n_vertices() << "\n";
    for (const auto& [name, f] : fields) {
        out << "SCALARS " << name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (double v : f->values) out << fmt(v) << "\n";
    }
    out.flush();
    if (!out) fail(path, "write failure");
}

std::vector<std::pair<std::string, NodalField>> read_vtk(
    const std::filesystem::path& path, const TriMesh& mesh) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");

    std::string line;
    if (!std::getline(in, line) || line.rfind("# vtk DataFile", 0) != 0)
        fail(path, "missing legacy VTK header");
    std::getline(in, line);  // title, ignored

    std::string tok;
    in >> tok;
    if (tok != "ASCII") fail(path, "expected ASCII data");
    std::string kw;
    in >> tok >> kw;
    if (tok != "DATASET" || kw != "UNSTRUCTURED_GRID")
        fail(path, "expected DATASET UNSTRUCTURED_GRID");

    int n = 0;
    in >> tok >> n >> kw;
    if (tok != "POINTS" || n != mesh.n_vertices())
        fail(path, "point count does not match the mesh");
    for (int i = 0; i < 3 * n; ++i) {
        double x;
        in >> x;
    }

    int m = 0, sz = 0;
    in >> tok >> m >> sz;
    if (tok != "CELLS" || m != mesh.n_triangles() || sz != 4 * m)
        fail(path, "cell table does not match the mesh");
    for (int i = 0; i < sz; ++i) {
        int x;
        in >> x;
    }
    in >> tok >> m;
    if (tok != "CELL_TYPES" || m != mesh.n_triangles()) fail(path, "bad CELL_TYPES");
    for (int i = 0; i < m; ++i) {
        int t;
        in >> t;
        if (t != 5) fail(path, "non-triangle cell type");
    }

    in >> tok >> n;
    if (tok != "POINT_DATA" || n != mesh.n_vertices()) fail(path, "bad POINT_DATA");
    if (!in) fail(path, "truncated file");

    std::vector<std::pair<std::string, NodalField>> fields;
    while (in >> tok) {
        if (tok != "SCALARS") fail(path, "expected SCALARS, got '" + tok + "'");
        std::string name, type;
        in >> name >> type;
        in >> tok;  // component count (optional in the format) or LOOKUP_TABLE
        if (tok != "LOOKUP_TABLE") {
            if (tok != "1") fail(path, "only single-component scalars supported");
            in >> tok;
        }
        if (tok != "LOOKUP_TABLE") fail(path, "expected LOOKUP_TABLE");
        in >> tok;  // table name
        std::vector<double> values(n);
        for (int i = 0; i < n; ++i) in >> values[i];
        if (!in) fail(path, "truncated scalar block '" + name + "'");
        fields.emplace_back(name, make_field(mesh, std::move(values)));
    }
    if (fields.empty()) fail(path, "no point scalars found");
    return fields;
}

void write_manifest(const std::filesystem::path& path, const TrajectoryManifest& m) {
    nlohmann::json j;
    j["dt"] = m.dt;
    j["t_end"] = m.t_end;
    j["mesh_checksum"] = m.mesh_checksum;
    auto arr = nlohmann::json::array();
    for (const auto& e : m.entries)
        arr.push_back({{"step", e.step}, {"file", e.file}});
    j["fields"] = arr;
    if (m.has_noise) {
        j["delta"] = m.delta;
        j["seed"] = m.seed;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out << j.dump(2) << "\n";
    out.flush();
    if (!out) fail(path, "write failure");
}

TrajectoryManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        TrajectoryManifest m;
        m.dt = j.at("dt").get<double>();
        m.t_end = j.at("t_end").get<double>();
        m.mesh_checksum = j.at("mesh_checksum").get<std::uint64_t>();
        for (const auto& e : j.at("fields"))
            m.entries.push_back({e.at("step").get<int>(), e.at("file").get<std::string>()});
        if (j.contains("delta") || j.contains("seed")) {
            m.has_noise = true;
            m.delta = j.at("delta").get<double>();
            m.seed = j.at("seed").get<std::uint64_t>();
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(path, std::string("manifest error: ") + e.what());
    }
}

namespace {

std::string snapshot_name(const std::string& prefix, int step) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04d.vtk", prefix.c_str(), step);
    return buf;
}

}  // namespace

void save_trajectory(const std::filesystem::path& dir, const TriMesh& mesh,
                     const SimulationResult& sim, int stride, const std::string& prefix) {
    if (stride < 1) throw std::invalid_argument("save_trajectory: stride must be >= 1");
    if (sim.rho.fields.empty() || sim.rho.fields.size() != sim.c.fields.size())
        throw std::invalid_argument("save_trajectory: rho and c series must align");
    if (!(sim.rho.dt > 0)) throw std::invalid_argument("save_trajectory: dt must be > 0");

    std::filesystem::create_directories(dir);
    TrajectoryManifest m;
    m.dt = sim.rho.dt;
    m.t_end = sim.rho.dt * sim.rho.n_steps();
    m.mesh_checksum = mesh.id;
    for (int n = 0; n < static_cast<int>(sim.rho.fields.size()); n += stride) {
        const std::string name = snapshot_name(prefix, n);
        write_vtk(dir / name, mesh,
                  {{"rho", &sim.rho.fields[n]}, {"c", &sim.c.fields[n]}});
        m.entries.push_back({n, name});
    }
    write_manifest(dir / "manifest.json", m);
}

namespace {

// Sorted entry list covering exactly steps 0..N.
std::vector<ManifestEntry> complete_entries(const std::filesystem::path& dir,
                                            const TrajectoryManifest& m,
                                            const TriMesh& mesh, int N) {
    if (m.mesh_checksum != mesh.id)
        fail(dir, "manifest mesh checksum does not match the given mesh");
    std::vector<ManifestEntry> entries = m.entries;
    std::sort(entries.begin(), entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.step < b.step; });
    if (static_cast<int>(entries.size()) != N + 1)
        fail(dir, "trajectory is not complete (expected " + std::to_string(N + 1) +
                      " steps, manifest lists " + std::to_string(entries.size()) + ")");
    for (int n = 0; n <= N; ++n)
        if (entries[n].step != n) fail(dir, "trajectory has gaps or duplicate steps");
    return entries;
}

}  // namespace

SimulationResult load_trajectory(const std::filesystem::path& dir, const TriMesh& mesh) {
    const TrajectoryManifest m = read_manifest(dir / "manifest.json");
    if (!(m.dt > 0)) fail(dir, "manifest dt must be positive");
    const int N = static_cast<int>(std::lround(m.t_end / m.dt));
    const auto entries = complete_entries(dir, m, mesh, N);

    SimulationResult sim;
    sim.rho.dt = sim.c.dt = m.dt;
    for (const auto& e : entries) {
        auto fields = read_vtk(dir / e.file, mesh);
        const NodalField* rho = nullptr;
        const NodalField* c = nullptr;
        for (const auto& [name, f] : fields) {
            if (name == "rho") rho = &f;
            if (name == "c") c = &f;
        }
        if (!rho || !c) fail(dir / e.file, "needs both 'rho' and 'c' scalars");
        sim.rho.fields.push_back(*rho);
        sim.c.fields.push_back(*c);
    }
    return sim;
}

void save_observed(const std::filesystem::path& dir, const TriMesh& mesh,
                   const ObservedData& data, const std::string& prefix) {
    if (data.rho.fields.empty())
        throw std::invalid_argument("save_observed: empty trajectory");
    if (!(data.rho.dt > 0)) throw std::invalid_argument("save_observed: dt must be > 0");

    std::filesystem::create_directories(dir);
    TrajectoryManifest m;
    m.dt = data.rho.dt;
    m.t_end = data.rho.dt * data.rho.n_steps();
    m.mesh_checksum = mesh.id;
    m.has_noise = true;
    m.delta = data.delta;
    m.seed = data.seed;
    for (int n = 0; n < static_cast<int>(data.rho.fields.size()); ++n) {
        const std::string name = snapshot_name(prefix, n);
        write_vtk(dir / name, mesh, {{"rho", &data.rho.fields[n]}});
        m.entries.push_back({n, name});
    }
    write_manifest(dir / "manifest.json", m);
}

ObservedData load_observed(const std::filesystem::path& dir, const TriMesh& mesh) {
    const TrajectoryManifest m = read_manifest(dir / "manifest.json");
    if (!(m.dt > 0)) fail(dir, "manifest dt must be positive");
    if (!m.has_noise) fail(dir, "manifest lacks noise metadata (delta, seed)");
    const int N = static_cast<int>(std::lround(m.t_end / m.dt));
    const auto entries = complete_entries(dir, m, mesh, N);

    ObservedData data;
    data.delta = m.delta;
    data.seed = m.seed;
    data.rho.dt = m.dt;
    for (const auto& e : entries) {
        auto fields = read_vtk(dir / e.file, mesh);
        const NodalField* rho = nullptr;
        for (const auto& [name, f] : fields)
            if (name == "rho") rho = &f;
        if (!rho) fail(dir / e.file, "needs a 'rho' scalar");
        data.rho.fields.push_back(*rho);
    }
    return data;
}

}  // namespace chemid
