// Conforming tetrahedral meshes with globally oriented entities.
//
// Convention: every tet stores its vertices in ascending global order, and
// every derived edge/face is the ascending tuple of its vertices.  Charts of
// entities (for degrees of freedom and traces) always follow that order, so
// the same functional is obtained from every element touching the entity.
// The parity of the as-given vertex order relative to the sorted one is kept
// per tet; metric quantities use absolute Jacobians throughout.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "elastweak/smallmat.hpp"

namespace elastweak {

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TetMesh {
    std::vector<Vec3d> vertices;
    std::vector<std::array<int, 4>> tets; // ascending vertex ids
    std::vector<int8_t> tet_parity;       // +1: ascending order is positively oriented

    // derived entities (ascending vertex tuples, sorted lexicographically)
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 3>> faces;
    std::vector<std::array<int, 6>> tet_edges;
    std::vector<std::array<int, 4>> tet_faces;
    std::vector<std::array<int8_t, 4>> tet_face_outward; // +1 when the global face normal points out of the tet
    std::vector<std::array<int, 2>> face_tets;           // incident tets, -1 when absent
    std::vector<uint8_t> face_boundary;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }
    int n_faces() const { return static_cast<int>(faces.size()); }
    int n_tets() const { return static_cast<int>(tets.size()); }

    int n_entities(int dim) const
    {
        switch (dim) {
            case 0: return n_vertices();
            case 1: return n_edges();
            case 2: return n_faces();
            case 3: return n_tets();
        }
        return 0;
    }

    std::array<Vec3d, 4> tet_coords(int t) const
    {
        return {vertices[tets[t][0]], vertices[tets[t][1]], vertices[tets[t][2]],
                vertices[tets[t][3]]};
    }

    // entity vertex ids of local entity `e` of dimension `dim` in tet `t`
    std::vector<int> entity_vertices(int t, int dim, int e) const
    {
        static const int edge_v[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
        static const int face_v[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
        const auto& tv = tets[t];
        switch (dim) {
            case 0: return {tv[e]};
            case 1: return {tv[edge_v[e][0]], tv[edge_v[e][1]]};
            case 2: return {tv[face_v[e][0]], tv[face_v[e][1]], tv[face_v[e][2]]};
            case 3: return {tv[0], tv[1], tv[2], tv[3]};
        }
        throw std::invalid_argument("entity dimension out of range");
    }

    int entity_index(int t, int dim, int e) const
    {
        switch (dim) {
            case 0: return tets[t][e];
            case 1: return tet_edges[t][e];
            case 2: return tet_faces[t][e];
            case 3: return t;
        }
        throw std::invalid_argument("entity dimension out of range");
    }

    static int n_local_entities(int dim)
    {
        static const int counts[4] = {4, 6, 4, 1};
        return counts[dim];
    }

    double tet_volume(int t) const
    {
        auto c = tet_coords(t);
        auto a = c[1] - c[0], b = c[2] - c[0], d = c[3] - c[0];
        return std::abs(dot(a, cross(b, d))) / 6.0;
    }

    double signed_volume_sorted(int t) const
    {
        auto c = tet_coords(t);
        auto a = c[1] - c[0], b = c[2] - c[0], d = c[3] - c[0];
        return dot(a, cross(b, d)) / 6.0;
    }

    // longest edge over the mesh
    double mesh_size() const
    {
        double h = 0;
        for (const auto& e : edges) {
            auto d = vertices[e[1]] - vertices[e[0]];
            h = std::max(h, std::sqrt(dot(d, d)));
        }
        return h;
    }

    Vec3d barycenter(int t) const
    {
        auto c = tet_coords(t);
        Vec3d b = (c[0] + c[1] + c[2] + c[3]) * 0.25;
        return b;
    }
};


// Relative orientation sign of each entity of a tet given in an arbitrary
// vertex order: the parity of the permutation that sorts the entity's
// vertices as they are induced by the tet tuple.  Used by the orientation
// tests; the assembled code paths only ever see sorted tuples.
inline int entity_order_sign(const std::vector<int>& induced)
{
    int inv = 0;
    const int n = static_cast<int>(induced.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (induced[i] > induced[j]) ++inv;
    return inv % 2 == 0 ? 1 : -1;
}

inline void derive_entities(TetMesh& m)
{
    std::map<std::array<int, 2>, int> edge_id;
    std::map<std::array<int, 3>, int> face_id;
    m.edges.clear();
    m.faces.clear();
    m.tet_edges.assign(m.tets.size(), {});
    m.tet_faces.assign(m.tets.size(), {});

    static const int edge_v[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    static const int face_v[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};

    for (size_t t = 0; t < m.tets.size(); ++t) {
        const auto& tv = m.tets[t];
        for (int e = 0; e < 6; ++e) {
            std::array<int, 2> key{tv[edge_v[e][0]], tv[edge_v[e][1]]};
            auto [it, inserted] = edge_id.try_emplace(key, static_cast<int>(m.edges.size()));
            if (inserted) m.edges.push_back(key);
            m.tet_edges[t][e] = it->second;
        }
        for (int f = 0; f < 4; ++f) {
            std::array<int, 3> key{tv[face_v[f][0]], tv[face_v[f][1]], tv[face_v[f][2]]};
            auto [it, inserted] = face_id.try_emplace(key, static_cast<int>(m.faces.size()));
            if (inserted) m.faces.push_back(key);
            m.tet_faces[t][f] = it->second;
        }
    }

    m.face_tets.assign(m.faces.size(), {-1, -1});
    for (size_t t = 0; t < m.tets.size(); ++t)
        for (int f = 0; f < 4; ++f) {
            int gf = m.tet_faces[t][f];
            if (m.face_tets[gf][0] < 0)
                m.face_tets[gf][0] = static_cast<int>(t);
            else if (m.face_tets[gf][1] < 0)
                m.face_tets[gf][1] = static_cast<int>(t);
            else
                throw MeshError("non-conforming mesh: face shared by more than two tets (face " +
                                std::to_string(gf) + ")");
        }
    m.face_boundary.assign(m.faces.size(), 0);
    for (size_t f = 0; f < m.faces.size(); ++f)
        m.face_boundary[f] = m.face_tets[f][1] < 0 ? 1 : 0;

    // outward-normal indicator per tet face
    m.tet_face_outward.assign(m.tets.size(), {});
    for (size_t t = 0; t < m.tets.size(); ++t) {
        auto c = m.tet_coords(static_cast<int>(t));
        Vec3d bary = m.barycenter(static_cast<int>(t));
        for (int f = 0; f < 4; ++f) {
            const auto& gfv = m.faces[m.tet_faces[t][f]];
            Vec3d p0 = m.vertices[gfv[0]];
            Vec3d n = cross(m.vertices[gfv[1]] - p0, m.vertices[gfv[2]] - p0);
            m.tet_face_outward[t][f] = dot(n, p0 - bary) > 0 ? 1 : -1;
        }
        (void)c;
    }
}

inline void validate(const TetMesh& m)
{
    for (size_t t = 0; t < m.tets.size(); ++t) {
        auto tv = m.tets[t];
        if (!std::is_sorted(tv.begin(), tv.end()))
            throw MeshError("internal: tet " + std::to_string(t) + " not in ascending order");
        if (m.tet_volume(static_cast<int>(t)) <= 0.0)
            throw MeshError("degenerate tet " + std::to_string(t) + " (zero volume)");
    }
    for (size_t f = 0; f < m.faces.size(); ++f)
        if (m.face_tets[f][0] < 0) throw MeshError("orphan face");
}

// Finalize a mesh given as (vertices, arbitrary-order positive tets):
// sort the tuples, keep parity, derive entities, validate.
inline TetMesh finalize_mesh(std::vector<Vec3d> vertices,
                             const std::vector<std::array<int, 4>>& raw_tets)
{
    TetMesh m;
    m.vertices = std::move(vertices);
    m.tets.reserve(raw_tets.size());
    m.tet_parity.reserve(raw_tets.size());
    for (const auto& rt : raw_tets) {
        std::array<int, 4> s = rt;
        std::sort(s.begin(), s.end());
        if (s[0] == s[1] || s[1] == s[2] || s[2] == s[3])
            throw MeshError("tet with repeated vertex");
        Vec3d a = m.vertices[s[1]] - m.vertices[s[0]];
        Vec3d b = m.vertices[s[2]] - m.vertices[s[0]];
        Vec3d c = m.vertices[s[3]] - m.vertices[s[0]];
        m.tets.push_back(s);
        m.tet_parity.push_back(dot(a, cross(b, c)) > 0 ? 1 : -1);
    }
    derive_entities(m);
    validate(m);
    return m;
}

/// Uniform mesh of the unit cube: n^3 subcubes, each split into the six
/// tetrahedra around its main diagonal.  Mesh size is sqrt(3)/n.
inline TetMesh build_box_mesh(int n)
{
    if (n < 1) throw MeshError("box mesh needs n >= 1");
    std::vector<Vec3d> verts;
    verts.reserve(static_cast<size_t>(n + 1) * (n + 1) * (n + 1));
    auto vid = [n](int i, int j, int k) { return (i * (n + 1) + j) * (n + 1) + k; };
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            for (int k = 0; k <= n; ++k)
                verts.push_back({double(i) / n, double(j) / n, double(k) / n});

    // the six permutations of (x,y,z) step order, each a positively oriented tet
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::vector<std::array<int, 4>> tets;
    tets.reserve(static_cast<size_t>(n) * n * n * 6);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (auto& p : perms) {
                    std::array<int, 3> c{i, j, k};
                    std::array<int, 4> tet;
                    tet[0] = vid(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; ++s) {
                        c[p[s]] += 1;
                        tet[s + 1] = vid(c[0], c[1], c[2]);
                    }
                    tets.push_back(tet);
                }
    return finalize_mesh(std::move(verts), tets);
}

} // namespace elastweak
