// Mesh input in the Gmsh MSH 2.2 ASCII subset ($Nodes/$Elements, element
// type 4) and legacy-VTK output of solution fields.

#pragma once

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "elastweak/mesh.hpp"

namespace elastweak {

/// Read a tetrahedral mesh from a Gmsh 2.2 ASCII file.  Elements other than
/// 4-node tetrahedra are skipped, vertices referenced by no tetrahedron are
/// dropped; both produce a warning on `warn` when given.
inline TetMesh read_msh(const std::string& path, std::ostream* warn = &std::cerr)
{
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file: " + path);

    std::string line;
    std::map<long, int> node_remap;
    std::vector<Vec3d> nodes;
    std::vector<std::array<long, 4>> raw_tets;
    int skipped_elements = 0;

    auto read_until = [&](const std::string& tag) {
        while (std::getline(in, line)) {
            if (line.rfind(tag, 0) == 0) return true;
        }
        return false;
    };

    if (!read_until("$Nodes")) throw MeshError(path + ": no $Nodes section");
    long n_nodes = 0;
    if (!(in >> n_nodes) || n_nodes < 0) throw MeshError(path + ": malformed node count");
    for (long i = 0; i < n_nodes; ++i) {
        long id;
        double x, y, z;
        if (!(in >> id >> x >> y >> z)) throw MeshError(path + ": malformed node line");
        node_remap[id] = static_cast<int>(nodes.size());
        nodes.push_back({x, y, z});
    }

    if (!read_until("$Elements")) throw MeshError(path + ": no $Elements section");
    long n_elems = 0;
    if (!(in >> n_elems) || n_elems < 0) throw MeshError(path + ": malformed element count");
    std::getline(in, line);
    for (long i = 0; i < n_elems; ++i) {
        if (!std::getline(in, line)) throw MeshError(path + ": truncated $Elements section");
        std::istringstream ls(line);
        long id, type, ntags;
        if (!(ls >> id >> type >> ntags)) throw MeshError(path + ": malformed element line");
        long tag;
        for (long t = 0; t < ntags; ++t)
            if (!(ls >> tag)) throw MeshError(path + ": malformed element tags");
        if (type != 4) {
            ++skipped_elements;
            continue;
        }
        std::array<long, 4> tv;
        for (int v = 0; v < 4; ++v)
            if (!(ls >> tv[v])) throw MeshError(path + ": tetrahedron with missing vertices");
        raw_tets.push_back(tv);
    }
    if (skipped_elements && warn)
        *warn << "read_msh: skipped " << skipped_elements << " non-tetrahedral element(s)\n";

    // map to local ids, mark used vertices
    std::vector<std::array<int, 4>> tets;
    std::vector<uint8_t> used(nodes.size(), 0);
    tets.reserve(raw_tets.size());
    for (const auto& rt : raw_tets) {
        std::array<int, 4> t;
        for (int v = 0; v < 4; ++v) {
            auto it = node_remap.find(rt[v]);
            if (it == node_remap.end())
                throw MeshError(path + ": element references unknown node " + std::to_string(rt[v]));
            t[v] = it->second;
            used[t[v]] = 1;
        }
        tets.push_back(t);
    }

    // reject inverted or degenerate tets as given in the file
    for (size_t t = 0; t < tets.size(); ++t) {
        const auto& tv = tets[t];
        Vec3d a = nodes[tv[1]] - nodes[tv[0]];
        Vec3d b = nodes[tv[2]] - nodes[tv[0]];
        Vec3d c = nodes[tv[3]] - nodes[tv[0]];
        double vol6 = dot(a, cross(b, c));
        if (vol6 == 0.0) throw MeshError(path + ": degenerate tet " + std::to_string(t));
        if (vol6 < 0.0) throw MeshError(path + ": inverted tet " + std::to_string(t));
    }

    // drop dangling vertices
    int n_dangling = 0;
    std::vector<int> remap(nodes.size(), -1);
    std::vector<Vec3d> kept;
    for (size_t v = 0; v < nodes.size(); ++v) {
        if (used[v]) {
            remap[v] = static_cast<int>(kept.size());
            kept.push_back(nodes[v]);
        } else
            ++n_dangling;
    }
    if (n_dangling && warn) *warn << "read_msh: dropped " << n_dangling << " dangling vertex/vertices\n";
    for (auto& t : tets)
        for (int v = 0; v < 4; ++v) t[v] = remap[t[v]];

    if (tets.empty()) throw MeshError(path + ": no tetrahedra found");
    return finalize_mesh(std::move(kept), tets);
}

inline void write_msh(const std::string& path, const TetMesh& m)
{
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write mesh file: " + path);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << m.n_vertices() << "\n";
    for (int v = 0; v < m.n_vertices(); ++v)
        out << v + 1 << " " << m.vertices[v][0] << " " << m.vertices[v][1] << " "
            << m.vertices[v][2] << "\n";
    out << "$EndNodes\n$Elements\n" << m.n_tets() << "\n";
    for (int t = 0; t < m.n_tets(); ++t) {
        auto tv = m.tets[t];
        if (m.tet_parity[t] < 0) std::swap(tv[2], tv[3]); // write positively oriented
        out << t + 1 << " 4 2 0 1";
        for (int v : tv) out << " " << v + 1;
        out << "\n";
    }
    out << "$EndElements\n";
}

/// Legacy-VTK unstructured grid with per-cell displacement/rotation vectors
/// and the three stress rows sampled at mesh points.
inline void write_vtk(const std::string& path, const TetMesh& m,
                      const std::function<Vec3d(int)>& cell_displacement,
                      const std::function<Vec3d(int)>& cell_rotation,
                      const std::function<Mat3d(int, const Vec3d&)>& stress_at)
{
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write VTK file: " + path);
    out << "# vtk DataFile Version 3.0\nelastweak solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << m.n_vertices() << " double\n";
    for (const auto& v : m.vertices) out << v[0] << " " << v[1] << " " << v[2] << "\n";
    out << "CELLS " << m.n_tets() << " " << 5 * m.n_tets() << "\n";
    for (const auto& t : m.tets) out << "4 " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
    out << "CELL_TYPES " << m.n_tets() << "\n";
    for (int t = 0; t < m.n_tets(); ++t) out << "10\n";

    out << "CELL_DATA " << m.n_tets() << "\n";
    out << "VECTORS displacement double\n";
    for (int t = 0; t < m.n_tets(); ++t) {
        auto u = cell_displacement(t);
        out << u[0] << " " << u[1] << " " << u[2] << "\n";
    }
    out << "VECTORS rotation double\n";
    for (int t = 0; t < m.n_tets(); ++t) {
        auto p = cell_rotation(t);
        out << p[0] << " " << p[1] << " " << p[2] << "\n";
    }

    // stress rows at vertices, sampled from the first incident tet
    std::vector<int> vertex_tet(m.n_vertices(), -1);
    for (int t = 0; t < m.n_tets(); ++t)
        for (int v : m.tets[t])
            if (vertex_tet[v] < 0) vertex_tet[v] = t;
    out << "POINT_DATA " << m.n_vertices() << "\n";
    for (int row = 0; row < 3; ++row) {
        out << "VECTORS stress_row" << row << " double\n";
        for (int v = 0; v < m.n_vertices(); ++v) {
            Mat3d s = stress_at(vertex_tet[v], m.vertices[v]);
            out << s(row, 0) << " " << s(row, 1) << " " << s(row, 2) << "\n";
        }
    }
}

} // namespace elastweak
