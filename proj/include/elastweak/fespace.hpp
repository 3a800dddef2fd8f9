// Finite element spaces of polynomial differential forms on tetrahedral
// meshes: the full family P_r Lambda^k, the augmented family
// P_r^+ Lambda^k = P_r Lambda^k + kappa P_r Lambda^{k+1}, and the two reduced
// lowest-order spaces with 48 (one-form) and 24 (two-form) degrees of
// freedom per tet.
//
// Local bases are constructed per element by a duality solve in exact
// rational arithmetic against the moment degrees of freedom
//
//   full family:       int_f w ^ z,  z in P^+_{r-d-1+k} Lambda^{d-k}(f)
//   augmented family:  int_f w ^ z,  z in P_{r-d+k}    Lambda^{d-k}(f)
//
// over the mesh entities f of dimension d.  Every chart follows the
// ascending-global-vertex convention of the mesh, which makes shared-entity
// functionals identical from all incident elements; no orientation signs are
// needed anywhere.  Results are cached by translation-congruence class.

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>

#include "elastweak/algebra.hpp"
#include "elastweak/exactlinalg.hpp"
#include "elastweak/mesh.hpp"
#include "elastweak/quadrature.hpp"

namespace elastweak {

enum class Family : uint8_t {
    P,          // full polynomial family
    PPlus,      // augmented (Koszul-enriched) family
    ReducedOne, // 48-dof reduced vector-valued 1-form space (fixed degree 1)
    ReducedTwo, // 24-dof reduced vector-valued 2-form space (fixed degree 1)
};

struct SpaceSpec {
    Family family = Family::P;
    int degree = 0; // r
    int form_degree = 0;
    Values values = Values::scalar;

    bool operator<(const SpaceSpec& o) const
    {
        return std::tie(family, degree, form_degree, values) <
               std::tie(o.family, o.degree, o.form_degree, o.values);
    }
    bool operator==(const SpaceSpec& o) const
    {
        return family == o.family && degree == o.degree && form_degree == o.form_degree &&
               values == o.values;
    }

    std::string name() const
    {
        std::ostringstream os;
        switch (family) {
            case Family::P: os << "P" << degree; break;
            case Family::PPlus: os << "P" << degree << "+"; break;
            case Family::ReducedOne: os << "P1+red"; break;
            case Family::ReducedTwo: os << "P1red"; break;
        }
        os << "L" << form_degree;
        switch (values) {
            case Values::scalar: break;
            case Values::vector: os << "(V)"; break;
            case Values::skew: os << "(K)"; break;
            case Values::matrix: os << "(M)"; break;
        }
        return os.str();
    }
};

inline void validate_spec(const SpaceSpec& s)
{
    if (s.form_degree < 0 || s.form_degree > 3)
        throw std::invalid_argument("space spec: form degree out of range");
    if (s.family == Family::P || s.family == Family::PPlus) {
        if (s.degree < 0) throw std::invalid_argument("space spec: degree must be >= 0");
    } else if (s.family == Family::ReducedOne) {
        if (s.degree != 1 || s.form_degree != 1 || s.values != Values::vector)
            throw std::invalid_argument("reduced 1-form space is only defined at (1,1,V)");
    } else if (s.family == Family::ReducedTwo) {
        if (s.degree != 1 || s.form_degree != 2 || s.values != Values::vector)
            throw std::invalid_argument("reduced 2-form space is only defined at (1,2,V)");
    }
}

/// Dimension of the local space on one tetrahedron.
inline int local_dimension(const SpaceSpec& s)
{
    validate_spec(s);
    const int vd = value_dim(s.values);
    const int r = s.degree, k = s.form_degree;
    switch (s.family) {
        case Family::P: return binom(r + 3, 3) * binom(3, k) * vd;
        case Family::PPlus: return binom(r + k, k) * binom(r + 4, 3 - k) * vd;
        case Family::ReducedOne: return 48;
        case Family::ReducedTwo: return 24;
    }
    return 0;
}

/// Where d sends this space within the configured sequences.
inline SpaceSpec d_target(const SpaceSpec& s)
{
    validate_spec(s);
    if (s.form_degree >= 3) throw std::invalid_argument("d_target: top-degree space");
    switch (s.family) {
        case Family::PPlus: return {Family::PPlus, s.degree, s.form_degree + 1, s.values};
        case Family::P: return {Family::P, std::max(s.degree - 1, 0), s.form_degree + 1, s.values};
        case Family::ReducedOne: return {Family::ReducedTwo, 1, 2, Values::vector};
        case Family::ReducedTwo: return {Family::P, 0, 3, Values::vector};
    }
    return s;
}

// ---------------------------------------------------------------------------
// Reference test spaces on the unit simplex of dimension d (cached, scalar
// valued; value components are tensored on afterwards).

namespace detail {

template <class T>
std::vector<PolyForm<T>> monomial_span(int dim, int r, int k, Values v)
{
    std::vector<PolyForm<T>> out;
    if (r < 0) return out;
    const int vd = value_dim(v);
    for (int alt = 0; alt < n_alt(dim, k); ++alt)
        for (int c = 0; c < vd; ++c)
            for (int d0 = 0; d0 <= r; ++d0)
                for (int d1 = 0; d1 <= (dim > 1 ? r - d0 : 0); ++d1)
                    for (int d2 = 0; d2 <= (dim > 2 ? r - d0 - d1 : 0); ++d2) {
                        PolyForm<T> w(dim, k, v);
                        Monomial m;
                        m.e = {uint8_t(d0), uint8_t(d1), uint8_t(d2)};
                        w.at(alt, c).add_term(m, T(1));
                        out.push_back(std::move(w));
                    }
    return out;
}

template <class T>
std::vector<PolyForm<T>> family_span(Family fam, int dim, int r, int k, Values v)
{
    auto out = monomial_span<T>(dim, r, k, v);
    if (fam == Family::PPlus && k + 1 <= dim && r >= 0)
        for (auto& w : monomial_span<T>(dim, r, k + 1, v)) out.push_back(koszul(w));
    return out;
}

// Index map over the (alt, comp, monomial) keys appearing in a set of forms.
template <class T>
struct CoeffIndexer {
    std::map<std::tuple<int, int, Monomial>, int> index;

    explicit CoeffIndexer(const std::vector<PolyForm<T>>& forms)
    {
        for (const auto& w : forms)
            for (int alt = 0; alt < n_alt(w.dim, w.deg); ++alt)
                for (int c = 0; c < value_dim(w.values); ++c)
                    for (auto& [m, coef] : w.at(alt, c).terms())
                        index.try_emplace({alt, c, m}, static_cast<int>(index.size()));
    }

    std::vector<T> vectorize(const PolyForm<T>& w) const
    {
        std::vector<T> v(index.size(), T(0));
        for (int alt = 0; alt < n_alt(w.dim, w.deg); ++alt)
            for (int c = 0; c < value_dim(w.values); ++c)
                for (auto& [m, coef] : w.at(alt, c).terms()) {
                    auto it = index.find({alt, c, m});
                    if (it == index.end()) throw std::logic_error("vectorize: key outside span");
                    v[it->second] += coef;
                }
        return v;
    }
};

// Reduce a spanning set to a linearly independent subset (exact arithmetic).
template <class T>
std::vector<PolyForm<T>> echelon_subset(const std::vector<PolyForm<T>>& span)
{
    CoeffIndexer<T> ix(span);
    const int ncols = static_cast<int>(ix.index.size());
    std::vector<std::pair<int, std::vector<T>>> rows;
    std::vector<PolyForm<T>> keep;
    for (const auto& w : span) {
        auto vec = ix.vectorize(w);
        for (auto& [piv, rv] : rows) {
            if (vec[piv] == T(0)) continue;
            T f = vec[piv] / rv[piv];
            for (int j = 0; j < ncols; ++j) vec[j] -= f * rv[j];
        }
        int piv = -1;
        for (int j = 0; j < ncols; ++j)
            if (!(vec[j] == T(0))) {
                piv = j;
                break;
            }
        if (piv >= 0) {
            rows.emplace_back(piv, std::move(vec));
            keep.push_back(w);
        }
    }
    return keep;
}

// Reference test-space bases, cached: unit simplex of dimension d.  The
// augmented 0-form chain is the plain Lagrange chain shifted by one degree,
// which also covers the degree -1 member (constants) used by the interior
// functionals of the lowest-order top-degree spaces.
inline const std::vector<PolyForm<Rational>>& test_space(Family fam, int dim, int r, int k,
                                                         Values v)
{
    if (fam == Family::PPlus && k == 0) {
        fam = Family::P;
        r = r + 1;
    }
    using Key = std::tuple<Family, int, int, int, Values>;
    static std::map<Key, std::vector<PolyForm<Rational>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto [it, inserted] = cache.try_emplace(Key{fam, dim, r, k, v});
    if (inserted && r >= 0) it->second = echelon_subset(family_span<Rational>(fam, dim, r, k, v));
    return it->second;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Local basis on one element

struct DofKey {
    int dim;          // entity dimension
    int local_entity; // index among the tet's entities of that dimension
    int on_entity;    // index within the entity block
};

// One moment functional: trace onto the entity chart, wedge with the test
// form, integrate over the unit simplex.  Vertex functionals are point
// evaluations (test keeps the value component).
template <class T>
struct DofFunctional {
    DofKey key;
    Vec3<T> origin;            // chart origin, in the element's centered frame
    std::vector<Vec3<T>> cols; // chart directions (ascending vertices)
    PolyForm<T> test;          // on the unit simplex of dimension key.dim
    int point_comp = -1;       // >= 0: vertex evaluation of that component

    T apply(const PolyForm<T>& w_centered) const
    {
        if (point_comp >= 0) return w_centered.at(0, point_comp).evaluate(origin.v);
        auto tr = pullback(w_centered, origin, cols);
        return integrate_top(wedge(tr, test));
    }
};

template <class T>
struct LocalBasis {
    SpaceSpec spec;
    Vec3<T> center; // barycenter of the element; shapes live in y = x - center
    std::vector<PolyForm<T>> shapes;
    std::vector<DofFunctional<T>> dofs;
    std::array<int, 4> per_entity{0, 0, 0, 0};

    int size() const { return static_cast<int>(shapes.size()); }
};

namespace detail {

template <class T>
Vec3<T> vcast(const Vec3d& v)
{
    return {from_double<T>(v[0]), from_double<T>(v[1]), from_double<T>(v[2])};
}

// Entity chart (centered frame) of local entity (dim, e) of tet t.
template <class T>
void entity_chart(const TetMesh& mesh, int t, int dim, int e, const Vec3<T>& center,
                  Vec3<T>& origin, std::vector<Vec3<T>>& cols)
{
    auto vids = mesh.entity_vertices(t, dim, e);
    origin = vcast<T>(mesh.vertices[vids[0]]) - center;
    cols.clear();
    for (int j = 1; j < static_cast<int>(vids.size()); ++j)
        cols.push_back(vcast<T>(mesh.vertices[vids[j]]) - vcast<T>(mesh.vertices[vids[0]]));
}

// Moment functionals of the two standard families.
template <class T>
std::vector<DofFunctional<T>> standard_dofs(const TetMesh& mesh, int t, const SpaceSpec& spec,
                                            const Vec3<T>& center)
{
    std::vector<DofFunctional<T>> out;
    const int r = spec.degree, k = spec.form_degree;
    const int vd = value_dim(spec.values);
    for (int dim = std::max(k, 0); dim <= 3; ++dim) {
        if (k > dim) continue;
        const int tdeg = spec.family == Family::P ? r - dim - 1 + k : r - dim + k;
        const Family tfam = spec.family == Family::P ? Family::PPlus : Family::P;
        for (int e = 0; e < TetMesh::n_local_entities(dim); ++e) {
            if (dim == 0) {
                if (k != 0 || tdeg < 0) continue;
                for (int c = 0; c < vd; ++c) {
                    DofFunctional<T> f;
                    f.key = {0, e, c};
                    entity_chart(mesh, t, 0, e, center, f.origin, f.cols);
                    f.point_comp = c;
                    out.push_back(std::move(f));
                }
                continue;
            }
            const auto& tests = test_space(tfam, dim, tdeg, dim - k, spec.values);
            if (tests.empty()) continue;
            int on = 0;
            for (const auto& z : tests) {
                DofFunctional<T> f;
                f.key = {dim, e, on++};
                entity_chart(mesh, t, dim, e, center, f.origin, f.cols);
                if constexpr (std::is_same_v<T, double>)
                    f.test = z.template cast<double>();
                else
                    f.test = z;
                out.push_back(std::move(f));
            }
        }
    }
    return out;
}

// Face frame with rational entries: unnormalized tangent, conormal and
// normal built from the ascending vertices.  Spans of the test spaces below
// are invariant under the (irrational) normalizations, so scaled vectors are
// used throughout; scalings are constant per global face, which keeps the
// functionals single valued across elements.
template <class T>
struct FaceFrame {
    Vec3<T> t, s, n;
};

template <class T>
FaceFrame<T> face_frame(const TetMesh& mesh, int t, int lf)
{
    auto vids = mesh.entity_vertices(t, 2, lf);
    Vec3<T> v0 = vcast<T>(mesh.vertices[vids[0]]);
    Vec3<T> v1 = vcast<T>(mesh.vertices[vids[1]]);
    Vec3<T> v2 = vcast<T>(mesh.vertices[vids[2]]);
    FaceFrame<T> f;
    f.t = v1 - v0;
    f.n = cross(v1 - v0, v2 - v0);
    f.s = cross(f.n, f.t);
    return f;
}

// A constant V-valued 1-form on the face chart given by q -> M q.
template <class T>
PolyForm<T> face_oneform_from_matrix(const Mat3<T>& M, const std::vector<Vec3<T>>& cols)
{
    PolyForm<T> w(2, 1, Values::vector);
    for (int j = 0; j < 2; ++j) {
        Vec3<T> Mq = M * cols[j];
        for (int c = 0; c < 3; ++c)
            if (!(Mq[c] == T(0))) w.at(alt_index(2, 1, {j, -1, -1}), c).add_term(Monomial{}, Mq[c]);
    }
    return w;
}

// (x . dir) as a polynomial on the face chart, with x relative to the chart
// origin: x(u) = sum_j cols[j] u_j.
template <class T>
Poly<T> face_dot(const Vec3<T>& dir, const std::vector<Vec3<T>>& cols)
{
    Poly<T> p;
    for (int j = 0; j < 2; ++j) {
        T c = dot(cols[j], dir);
        if (!(c == T(0))) p += Poly<T>::monomial(j, c);
    }
    return p;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Local basis construction

template <class T>
LocalBasis<T> build_local_basis(const TetMesh& mesh, int t, const SpaceSpec& spec);

namespace detail {

template <class T>
LocalBasis<T> build_standard_basis(const TetMesh& mesh, int t, const SpaceSpec& spec)
{
    LocalBasis<T> lb;
    lb.spec = spec;
    lb.center = vcast<T>(mesh.barycenter(t));

    auto span = family_span<T>(spec.family, 3, spec.degree, spec.form_degree, spec.values);
    std::vector<PolyForm<T>> basis =
        spec.family == Family::P ? std::move(span) : echelon_subset(span);
    const int n = static_cast<int>(basis.size());
    if (n != local_dimension(spec))
        throw std::logic_error("local span rank does not match the dimension formula for " +
                               spec.name());

    lb.dofs = standard_dofs<T>(mesh, t, spec, lb.center);
    if (static_cast<int>(lb.dofs.size()) != n)
        throw std::logic_error("degree-of-freedom count mismatch for " + spec.name());

    DenseMat<T> V(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) V(i, j) = lb.dofs[i].apply(basis[j]);
    DenseMat<T> W = invert(V); // throws on singular: signals a wrong dof set

    lb.shapes.assign(n, PolyForm<T>(3, spec.form_degree, spec.values));
    for (int j = 0; j < n; ++j) {
        PolyForm<T> s(3, spec.form_degree, spec.values);
        for (int m = 0; m < n; ++m)
            if (!(W(m, j) == T(0))) s += basis[m] * W(m, j);
        lb.shapes[j] = std::move(s);
    }
    for (const auto& f : lb.dofs)
        if (f.key.on_entity + 1 > lb.per_entity[f.key.dim])
            lb.per_entity[f.key.dim] = f.key.on_entity + 1;
    return lb;
}

// The twelve face-attached one-form bubbles of the augmented degree-1 space
// that annihilate the symmetric face moments; the building block of both
// reduced spaces.
template <class T>
std::vector<PolyForm<T>> reduced_bubbles(const TetMesh& mesh, int t)
{
    SpaceSpec full{Family::PPlus, 1, 1, Values::vector};
    LocalBasis<T> fb = build_standard_basis<T>(mesh, t, full);

    // face-attached shapes have vanishing edge moments: the complement of the
    // degree-1 projection
    std::vector<PolyForm<T>> bubbles;
    std::vector<int> bubble_face;
    for (int j = 0; j < fb.size(); ++j)
        if (fb.dofs[j].key.dim == 2) {
            bubbles.push_back(fb.shapes[j]);
            bubble_face.push_back(fb.dofs[j].key.local_entity);
        }
    if (bubbles.size() != 24) throw std::logic_error("expected 24 face bubbles");

    // constraints: zero moments against the symmetric face test forms
    std::vector<DofFunctional<T>> cons;
    for (int lf = 0; lf < 4; ++lf) {
        auto fr = face_frame<T>(mesh, t, lf);
        DofFunctional<T> proto;
        proto.key = {2, lf, 0};
        entity_chart(mesh, t, 2, lf, vcast<T>(mesh.barycenter(t)), proto.origin, proto.cols);
        for (const Mat3<T>& M :
             {outer(fr.t, fr.t), outer(fr.s, fr.s), outer(fr.t, fr.s) + outer(fr.s, fr.t)}) {
            DofFunctional<T> f = proto;
            f.test = face_oneform_from_matrix(M, f.cols);
            cons.push_back(std::move(f));
        }
    }

    DenseMat<T> C(static_cast<int>(cons.size()), static_cast<int>(bubbles.size()));
    for (int i = 0; i < C.rows(); ++i)
        for (int j = 0; j < C.cols(); ++j) C(i, j) = cons[i].apply(bubbles[j]);
    DenseMat<T> ker = nullspace(C);
    if (ker.cols() != 12) throw std::logic_error("reduced bubble space is not 12-dimensional");

    std::vector<PolyForm<T>> out;
    for (int c = 0; c < ker.cols(); ++c) {
        PolyForm<T> w(3, 1, Values::vector);
        for (int j = 0; j < ker.rows(); ++j)
            if (!(ker(j, c) == T(0))) w += bubbles[j] * ker(j, c);
        out.push_back(std::move(w));
    }
    return out;
}

// Degrees of freedom of the reduced one-form space: full edge moments plus
// the three skew face moments q -> e_c x q.
template <class T>
std::vector<DofFunctional<T>> reduced_one_dofs(const TetMesh& mesh, int t, const Vec3<T>& center)
{
    SpaceSpec p1{Family::P, 1, 1, Values::vector};
    auto out = standard_dofs<T>(mesh, t, p1, center); // 36 edge moments
    for (int lf = 0; lf < 4; ++lf) {
        for (int c = 0; c < 3; ++c) {
            DofFunctional<T> f;
            f.key = {2, lf, c};
            entity_chart(mesh, t, 2, lf, center, f.origin, f.cols);
            f.test = face_oneform_from_matrix(cross_matrix(Vec3<T>::unit(c)), f.cols);
            out.push_back(std::move(f));
        }
    }
    return out;
}

// Degrees of freedom of the reduced two-form space: per face, moments against
// the six test functions  e_c,  (x.t)n,  (x.s)n,  (x.t)s - (x.s)t.
template <class T>
std::vector<DofFunctional<T>> reduced_two_dofs(const TetMesh& mesh, int t, const Vec3<T>& center)
{
    std::vector<DofFunctional<T>> out;
    for (int lf = 0; lf < 4; ++lf) {
        auto fr = face_frame<T>(mesh, t, lf);
        DofFunctional<T> proto;
        entity_chart(mesh, t, 2, lf, center, proto.origin, proto.cols);
        int on = 0;
        auto push = [&](PolyForm<T> test) {
            DofFunctional<T> f = proto;
            f.key = {2, lf, on++};
            f.test = std::move(test);
            out.push_back(std::move(f));
        };
        for (int c = 0; c < 3; ++c) {
            PolyForm<T> z(2, 0, Values::vector);
            z.at(0, c) = Poly<T>(T(1));
            push(std::move(z));
        }
        for (const Vec3<T>& dir : {fr.t, fr.s}) {
            PolyForm<T> z(2, 0, Values::vector);
            Poly<T> xd = face_dot(dir, proto.cols);
            for (int c = 0; c < 3; ++c) z.at(0, c) = xd * fr.n[c];
            push(std::move(z));
        }
        {
            PolyForm<T> z(2, 0, Values::vector);
            Poly<T> xt = face_dot(fr.t, proto.cols);
            Poly<T> xs = face_dot(fr.s, proto.cols);
            for (int c = 0; c < 3; ++c) z.at(0, c) = xt * fr.s[c] - xs * fr.t[c];
            push(std::move(z));
        }
    }
    return out;
}

template <class T>
LocalBasis<T> build_reduced_basis(const TetMesh& mesh, int t, const SpaceSpec& spec)
{
    LocalBasis<T> lb;
    lb.spec = spec;
    lb.center = vcast<T>(mesh.barycenter(t));
    auto bubbles = reduced_bubbles<T>(mesh, t);

    std::vector<PolyForm<T>> span;
    if (spec.family == Family::ReducedOne) {
        span = family_span<T>(Family::P, 3, 1, 1, Values::vector);
        for (auto& b : bubbles) span.push_back(b);
        lb.dofs = reduced_one_dofs<T>(mesh, t, lb.center);
    } else {
        span = family_span<T>(Family::PPlus, 3, 0, 2, Values::vector);
        for (auto& b : bubbles) span.push_back(ext_d(b));
        lb.dofs = reduced_two_dofs<T>(mesh, t, lb.center);
    }
    auto basis = echelon_subset(span);
    const int n = static_cast<int>(basis.size());
    if (n != local_dimension(spec) || static_cast<int>(lb.dofs.size()) != n)
        throw std::logic_error("reduced space has unexpected dimension");

    DenseMat<T> V(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) V(i, j) = lb.dofs[i].apply(basis[j]);
    DenseMat<T> W = invert(V);

    lb.shapes.assign(n, PolyForm<T>(3, spec.form_degree, spec.values));
    for (int j = 0; j < n; ++j) {
        PolyForm<T> s(3, spec.form_degree, spec.values);
        for (int m = 0; m < n; ++m)
            if (!(W(m, j) == T(0))) s += basis[m] * W(m, j);
        lb.shapes[j] = std::move(s);
    }
    for (const auto& f : lb.dofs)
        if (f.key.on_entity + 1 > lb.per_entity[f.key.dim])
            lb.per_entity[f.key.dim] = f.key.on_entity + 1;
    return lb;
}

} // namespace detail

namespace detail {

inline LocalBasis<double> cast_basis(const LocalBasis<Rational>& lb)
{
    LocalBasis<double> out;
    out.spec = lb.spec;
    out.center = {to_double(lb.center[0]), to_double(lb.center[1]), to_double(lb.center[2])};
    out.per_entity = lb.per_entity;
    out.shapes.reserve(lb.shapes.size());
    for (auto& s : lb.shapes) out.shapes.push_back(s.cast<double>());
    out.dofs.reserve(lb.dofs.size());
    for (auto& f : lb.dofs) {
        DofFunctional<double> g;
        g.key = f.key;
        g.origin = {to_double(f.origin[0]), to_double(f.origin[1]), to_double(f.origin[2])};
        for (auto& c : f.cols) g.cols.push_back({to_double(c[0]), to_double(c[1]), to_double(c[2])});
        if (f.point_comp < 0) g.test = f.test.cast<double>();
        g.point_comp = f.point_comp;
        out.dofs.push_back(std::move(g));
    }
    return out;
}

} // namespace detail

// Construction always runs in exact arithmetic (element coordinates are
// promoted to rationals, which is lossless); double-precision bases are casts
// of the exact result.
template <class T>
LocalBasis<T> build_local_basis(const TetMesh& mesh, int t, const SpaceSpec& spec)
{
    validate_spec(spec);
    LocalBasis<Rational> exact =
        (spec.family == Family::ReducedOne || spec.family == Family::ReducedTwo)
            ? detail::build_reduced_basis<Rational>(mesh, t, spec)
            : detail::build_standard_basis<Rational>(mesh, t, spec);
    if constexpr (std::is_same_v<T, Rational>)
        return exact;
    else
        return detail::cast_basis(exact);
}

// ---------------------------------------------------------------------------
// Global space: numbering, interpolation, evaluation, derivative matrix

struct DofMap {
    std::array<int, 4> per_entity{0, 0, 0, 0};
    std::array<int, 4> offset{0, 0, 0, 0};
    int total = 0;

    void build(const TetMesh& mesh, const std::array<int, 4>& per)
    {
        per_entity = per;
        int cur = 0;
        for (int d = 0; d < 4; ++d) {
            offset[d] = cur;
            cur += per_entity[d] * mesh.n_entities(d);
        }
        total = cur;
    }

    int global_index(const TetMesh& mesh, int t, const DofKey& k) const
    {
        return offset[k.dim] + mesh.entity_index(t, k.dim, k.local_entity) * per_entity[k.dim] +
               k.on_entity;
    }
};

template <class T>
class FESpace {
public:
    FESpace(const TetMesh& mesh, const SpaceSpec& spec) : mesh_(&mesh), spec_(spec)
    {
        validate_spec(spec);
        cell_basis_.resize(mesh.n_tets());
        std::map<std::string, std::shared_ptr<const LocalBasis<T>>> cache;
        for (int t = 0; t < mesh.n_tets(); ++t) {
            std::string key = congruence_key(t);
            auto it = cache.find(key);
            if (it == cache.end()) {
                auto lb = std::make_shared<LocalBasis<T>>(build_local_basis<T>(mesh, t, spec));
                it = cache.emplace(key, std::move(lb)).first;
            }
            cell_basis_[t] = it->second;
        }
        dofmap_.build(mesh, cell_basis_[0]->per_entity);
    }

    const TetMesh& mesh() const { return *mesh_; }
    const SpaceSpec& spec() const { return spec_; }
    int ndofs() const { return dofmap_.total; }
    const DofMap& dofmap() const { return dofmap_; }
    const LocalBasis<T>& basis(int t) const { return *cell_basis_[t]; }

    /// Barycenter of cell t: the origin of the frame in which the cell's
    /// (possibly shared) local basis is expressed.
    Vec3<T> cell_center(int t) const { return detail::vcast<T>(mesh_->barycenter(t)); }

    std::vector<int> cell_dofs(int t) const
    {
        const auto& lb = basis(t);
        std::vector<int> out(lb.size());
        for (int i = 0; i < lb.size(); ++i) out[i] = dofmap_.global_index(*mesh_, t, lb.dofs[i].key);
        return out;
    }

    /// Canonical interpolation of an exact polynomial form given in global
    /// coordinates.
    std::vector<T> interpolate(const PolyForm<T>& w_global) const
    {
        if (w_global.deg != spec_.form_degree || w_global.values != spec_.values)
            throw std::invalid_argument("interpolate: form shape mismatch");
        std::vector<T> coeffs(ndofs(), T(0));
        std::vector<uint8_t> done(ndofs(), 0);
        for (int t = 0; t < mesh_->n_tets(); ++t) {
            const auto& lb = basis(t);
            // shift to this element's frame once (the element's own barycenter;
            // cached bases carry the frame of their congruence representative)
            PolyForm<T> w_local = shift_to_center(w_global, cell_center(t));
            for (int i = 0; i < lb.size(); ++i) {
                int g = dofmap_.global_index(*mesh_, t, lb.dofs[i].key);
                if (done[g]) continue;
                coeffs[g] = lb.dofs[i].apply(w_local);
                done[g] = 1;
            }
        }
        return coeffs;
    }

    /// Interpolation of a smooth form given as a point evaluator
    /// (x, tangent vectors) -> value components; moments by quadrature.
    std::vector<double> interpolate_smooth(
        const std::function<std::vector<double>(const Vec3d&, const std::vector<Vec3d>&)>& w,
        int quad_degree) const
    {
        static_assert(std::is_same_v<T, double> || std::is_same_v<T, Rational>);
        std::vector<double> coeffs(ndofs(), 0.0);
        std::vector<uint8_t> done(ndofs(), 0);
        for (int t = 0; t < mesh_->n_tets(); ++t) {
            const auto& lb = basis(t);
            for (int i = 0; i < lb.size(); ++i) {
                int g = dofmap_.global_index(*mesh_, t, lb.dofs[i].key);
                if (done[g]) continue;
                coeffs[g] = smooth_moment(lb.dofs[i], cell_center(t), w, quad_degree);
                done[g] = 1;
            }
        }
        return coeffs;
    }

    /// Evaluate the discrete field at x inside tet t; returns value
    /// components of the form evaluated on the given vectors.
    template <class Coeffs>
    std::vector<T> evaluate_form(const Coeffs& coeffs, int t, const Vec3<T>& x,
                                 const std::vector<Vec3<T>>& vecs, bool check_inside = true) const
    {
        if (check_inside && !contains(t, x)) throw std::invalid_argument("point outside tet");
        const auto& lb = basis(t);
        Vec3<T> y = x - cell_center(t);
        std::vector<T> out(value_dim(spec_.values), T(0));
        auto gd = cell_dofs(t);
        for (int i = 0; i < lb.size(); ++i) {
            T c = T(coeffs[gd[i]]);
            if (c == T(0)) continue;
            auto v = evaluate(lb.shapes[i], y, vecs);
            for (size_t k = 0; k < out.size(); ++k) out[k] += v[k] * c;
        }
        return out;
    }

    bool contains(int t, const Vec3<T>& x) const
    {
        auto c = mesh_->tet_coords(t);
        // barycentric coordinates via Cramer
        Vec3d xd{to_double(x[0]), to_double(x[1]), to_double(x[2])};
        Vec3d a = c[1] - c[0], b = c[2] - c[0], d = c[3] - c[0];
        double det = dot(a, cross(b, d));
        Vec3d rhs = xd - c[0];
        double l1 = dot(rhs, cross(b, d)) / det;
        double l2 = dot(a, cross(rhs, d)) / det;
        double l3 = dot(a, cross(b, rhs)) / det;
        const double tol = 1e-10;
        return l1 > -tol && l2 > -tol && l3 > -tol && (l1 + l2 + l3) < 1 + tol;
    }

    /// Matrix of the exterior derivative into the target space, as triplets.
    /// Requires d to map this space into `target` (true for the configured
    /// sequences); shared target dofs are single valued and assigned once.
    std::vector<std::tuple<int, int, T>> derivative_matrix(const FESpace& target) const
    {
        if (target.spec_.form_degree != spec_.form_degree + 1 || target.spec_.values != spec_.values)
            throw std::invalid_argument("derivative_matrix: incompatible target");
        return operator_matrix(target, [](const PolyForm<T>& w) { return ext_d(w); });
    }

    /// Matrix of (interpolation into `target`) composed with a translation
    /// invariant operator on forms whose image has single-valued target dofs.
    std::vector<std::tuple<int, int, T>>
    operator_matrix(const FESpace& target,
                    const std::function<PolyForm<T>(const PolyForm<T>&)>& op) const
    {
        std::vector<std::tuple<int, int, T>> trip;
        std::vector<uint8_t> assigned(target.ndofs(), 0);
        for (int t = 0; t < mesh_->n_tets(); ++t) {
            const auto& slb = basis(t);
            const auto& tlb = target.basis(t);
            auto sdofs = cell_dofs(t);
            auto tdofs = target.cell_dofs(t);
            std::vector<PolyForm<T>> oshapes(slb.size());
            for (int i = 0; i < slb.size(); ++i) oshapes[i] = op(slb.shapes[i]);
            for (int j = 0; j < tlb.size(); ++j) {
                if (assigned[tdofs[j]]) continue; // shared dofs are single valued
                assigned[tdofs[j]] = 1;
                for (int i = 0; i < slb.size(); ++i) {
                    T v = tlb.dofs[j].apply(oshapes[i]);
                    if (!(v == T(0))) trip.emplace_back(tdofs[j], sdofs[i], v);
                }
            }
        }
        return trip;
    }

    static PolyForm<T> shift_to_center(const PolyForm<T>& w_global, const Vec3<T>& center)
    {
        std::vector<Vec3<T>> id_cols{Vec3<T>::unit(0), Vec3<T>::unit(1), Vec3<T>::unit(2)};
        return pullback(w_global, center, id_cols);
    }

private:
    double smooth_moment(const DofFunctional<T>& f, const Vec3<T>& center,
                         const std::function<std::vector<double>(const Vec3d&, const std::vector<Vec3d>&)>& w,
                         int quad_degree) const
    {
        Vec3d origin{to_double(f.origin[0]) + to_double(center[0]),
                     to_double(f.origin[1]) + to_double(center[1]),
                     to_double(f.origin[2]) + to_double(center[2])};
        std::vector<Vec3d> cols;
        for (auto& cq : f.cols) cols.push_back({to_double(cq[0]), to_double(cq[1]), to_double(cq[2])});
        if (f.point_comp >= 0) return w(origin, {})[f.point_comp];

        const int d = static_cast<int>(cols.size());
        const int k = spec_.form_degree;
        PolyForm<double> test = [&] {
            if constexpr (std::is_same_v<T, double>)
                return f.test;
            else
                return f.test.template cast<double>();
        }();
        auto rule = simplex_quadrature(d, quad_degree);
        const auto& wt = alt_tuples(d, k);
        const auto& zt = alt_tuples(d, d - k);
        double acc = 0;
        for (size_t q = 0; q < rule.size(); ++q) {
            Vec3d u = rule.points[q];
            Vec3d x = origin;
            for (int j = 0; j < d; ++j) x = x + cols[j] * u[j];
            // (trace w ^ test)(e_0..e_{d-1}) expanded over index splits
            double val = 0;
            for (int ia = 0; ia < static_cast<int>(wt.size()); ++ia) {
                std::vector<Vec3d> tang;
                for (int j = 0; j < k; ++j) tang.push_back(cols[wt[ia][j]]);
                auto wv = w(x, tang);
                // complementary tuple and permutation sign
                for (int ib = 0; ib < static_cast<int>(zt.size()); ++ib) {
                    std::array<int, 3> merged;
                    int s = merge_sign(k, wt[ia], d - k, zt[ib], merged);
                    if (s == 0) continue;
                    const int vd = value_dim(spec_.values);
                    for (int c = 0; c < vd; ++c) {
                        double zc = test.at(ib, c).evaluate(u.v);
                        if (zc != 0.0) val += s * wv[c] * zc * value_metric<double>(spec_.values, c);
                    }
                }
            }
            acc += val * rule.weights[q];
        }
        return acc;
    }

    std::string congruence_key(int t) const
    {
        auto c = mesh_->tet_coords(t);
        Vec3d b = mesh_->barycenter(t);
        std::ostringstream os;
        for (int v = 0; v < 4; ++v)
            for (int i = 0; i < 3; ++i) {
                double d = c[v][i] - b[i];
                os.write(reinterpret_cast<const char*>(&d), sizeof(double));
            }
        return os.str();
    }

    const TetMesh* mesh_;
    SpaceSpec spec_;
    std::vector<std::shared_ptr<const LocalBasis<T>>> cell_basis_;
    DofMap dofmap_;
};

} // namespace elastweak
