// Assembly of the weak-symmetry saddle-point system
//
//   [ A   B^T  C^T ] [ sigma ]   [ g ]
//   [ B   0    0   ] [   u   ] = [ f ]
//   [ C   0    0   ] [   p   ]   [ 0 ]
//
// with A the compliance form (A sigma : tau), B the divergence coupling
// (div sigma . v) and C the skew coupling (sigma : q).  Stress shapes are
// vector-valued 2-forms; integrands are formed through their matrix proxies.
// Entries of B, C and the mass/divergence Gram matrices are polynomial and
// can be assembled exactly over the rationals; the double path uses
// quadrature that is exact at the configured degrees.

#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <thread>

#include "elastweak/fespace.hpp"

namespace elastweak {

struct Material {
    double lambda = 1.0;
    double mu = 1.0;
    // optional general compliance A(x) sigma; must be symmetric positive definite
    std::function<Mat3d(const Vec3d&, const Mat3d&)> general;

    Mat3d apply(const Vec3d& x, const Mat3d& s) const
    {
        if (general) return general(x, s);
        double tr = trace(s);
        Mat3d r = s * (1.0 / (2.0 * mu));
        double c = lambda / ((2.0 * mu) * (2.0 * mu + 3.0 * lambda));
        for (int i = 0; i < 3; ++i) r(i, i) -= c * tr;
        return r;
    }
};

inline void validate_material(const Material& m)
{
    if (!m.general) {
        if (!(m.mu > 0.0)) throw std::invalid_argument("material: mu must be positive");
        if (!(m.lambda >= 0.0)) throw std::invalid_argument("material: lambda must be nonnegative");
        return;
    }
    // general compliance: check symmetry and positive definiteness of the
    // 9x9 representation at a few sample points
    for (Vec3d x : {Vec3d{0.2, 0.3, 0.4}, Vec3d{0.8, 0.1, 0.6}, Vec3d{0.5, 0.5, 0.5}}) {
        Eigen::Matrix<double, 9, 9> rep;
        for (int j = 0; j < 9; ++j) {
            Mat3d e;
            e.m[j] = 1.0;
            Mat3d col = m.general(x, e);
            for (int i = 0; i < 9; ++i) rep(i, j) = col.m[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> es(0.5 * (rep + rep.transpose()));
        if ((rep - rep.transpose()).norm() > 1e-10 * rep.norm() || es.eigenvalues().minCoeff() <= 0.0)
            throw std::invalid_argument("material: general compliance is not symmetric positive definite");
    }
}

struct BlockSystem {
    Eigen::SparseMatrix<double> mat;
    Eigen::VectorXd rhs;
    int n_sigma = 0, n_u = 0, n_p = 0;

    int size() const { return n_sigma + n_u + n_p; }
};

namespace detail {

// Polynomial proxies of the shape functions of one local basis.
template <class T>
struct CellProxies {
    std::vector<MatField<T>> sigma;  // 2-form shapes as matrix fields
    std::vector<VecField<T>> dsigma; // exact divergence of the above
    std::vector<VecField<T>> vec;    // 3-form shapes as vector fields
    std::vector<VecField<T>> skw_ax; // K-valued 3-form shapes as axial fields
};

template <class T>
const CellProxies<T>& cell_proxies(const LocalBasis<T>& lb, std::map<const void*, CellProxies<T>>& cache)
{
    auto it = cache.find(&lb);
    if (it != cache.end()) return it->second;
    CellProxies<T> p;
    if (lb.spec.form_degree == 2 && lb.spec.values == Values::vector) {
        for (auto& s : lb.shapes) {
            p.sigma.push_back(twoform_to_matrix(s));
            p.dsigma.push_back(threeform_to_vector(ext_d(s)));
        }
    } else if (lb.spec.form_degree == 3 && lb.spec.values == Values::vector) {
        for (auto& s : lb.shapes) p.vec.push_back(threeform_to_vector(s));
    } else if (lb.spec.form_degree == 3 && lb.spec.values == Values::skew) {
        for (auto& s : lb.shapes) {
            VecField<T> ax;
            for (int c = 0; c < 3; ++c) ax[c] = s.at(0, c);
            p.skw_ax.push_back(std::move(ax));
        }
    } else {
        throw std::invalid_argument("cell_proxies: unsupported space " + lb.spec.name());
    }
    return cache.emplace(&lb, std::move(p)).first->second;
}

// Exact integral over tet t of a polynomial given in the element's centered
// coordinates.
template <class T>
T integrate_cell(const TetMesh& mesh, int t, const Poly<T>& p_centered)
{
    auto c = mesh.tet_coords(t);
    Vec3<T> center = vcast<T>(mesh.barycenter(t));
    Vec3<T> origin = vcast<T>(c[0]) - center;
    std::vector<Vec3<T>> cols{vcast<T>(c[1]) - vcast<T>(c[0]), vcast<T>(c[2]) - vcast<T>(c[0]),
                              vcast<T>(c[3]) - vcast<T>(c[0])};
    T det = dot(cols[0], cross(cols[1], cols[2]));
    if (det < T(0)) det = -det;
    return integrate_unit_simplex(p_centered.substitute_affine(origin, cols), 3) * det;
}

} // namespace detail

template <class T>
using Triplets = std::vector<std::tuple<int, int, T>>;

/// Divergence coupling B: entries (div sigma_i . v_a), exact.
template <class T>
Triplets<T> assemble_div_block(const FESpace<T>& sigma, const FESpace<T>& vh)
{
    Triplets<T> trip;
    std::map<const void*, detail::CellProxies<T>> cache;
    const TetMesh& mesh = sigma.mesh();
    for (int t = 0; t < mesh.n_tets(); ++t) {
        const auto& sp = detail::cell_proxies(sigma.basis(t), cache);
        const auto& vp = detail::cell_proxies(vh.basis(t), cache);
        auto sdofs = sigma.cell_dofs(t);
        auto vdofs = vh.cell_dofs(t);
        for (size_t a = 0; a < vp.vec.size(); ++a)
            for (size_t i = 0; i < sp.sigma.size(); ++i) {
                Poly<T> integrand;
                for (int c = 0; c < 3; ++c) integrand += sp.dsigma[i][c] * vp.vec[a][c];
                T v = detail::integrate_cell(mesh, t, integrand);
                if (!(v == T(0))) trip.emplace_back(vdofs[a], sdofs[i], v);
            }
    }
    return trip;
}

/// Skew coupling C: entries (sigma_i : q_b), exact.
template <class T>
Triplets<T> assemble_skw_block(const FESpace<T>& sigma, const FESpace<T>& qh)
{
    Triplets<T> trip;
    std::map<const void*, detail::CellProxies<T>> cache;
    const TetMesh& mesh = sigma.mesh();
    for (int t = 0; t < mesh.n_tets(); ++t) {
        const auto& sp = detail::cell_proxies(sigma.basis(t), cache);
        const auto& qp = detail::cell_proxies(qh.basis(t), cache);
        auto sdofs = sigma.cell_dofs(t);
        auto qdofs = qh.cell_dofs(t);
        for (size_t b = 0; b < qp.skw_ax.size(); ++b)
            for (size_t i = 0; i < sp.sigma.size(); ++i) {
                // F : cross_matrix(w) = 2 axial(skw F) . w
                Poly<T> integrand;
                const auto& F = sp.sigma[i];
                const auto& w = qp.skw_ax[b];
                integrand += (F(2, 1) - F(1, 2)) * w[0];
                integrand += (F(0, 2) - F(2, 0)) * w[1];
                integrand += (F(1, 0) - F(0, 1)) * w[2];
                T v = detail::integrate_cell(mesh, t, integrand);
                if (!(v == T(0))) trip.emplace_back(qdofs[b], sdofs[i], v);
            }
    }
    return trip;
}

/// L2 mass matrix of a discontinuous vector- or skew-valued volume space, or
/// of the stress space (Frobenius pairing through the matrix proxies); exact.
template <class T>
Triplets<T> assemble_mass_block(const FESpace<T>& space)
{
    Triplets<T> trip;
    std::map<const void*, detail::CellProxies<T>> cache;
    const TetMesh& mesh = space.mesh();
    for (int t = 0; t < mesh.n_tets(); ++t) {
        const auto& pr = detail::cell_proxies(space.basis(t), cache);
        auto dofs = space.cell_dofs(t);
        auto pair_fields = [&](auto& fields, auto dotfun) {
            for (size_t a = 0; a < fields.size(); ++a)
                for (size_t b = a; b < fields.size(); ++b) {
                    T v = detail::integrate_cell(mesh, t, dotfun(fields[a], fields[b]));
                    if (v == T(0)) continue;
                    trip.emplace_back(dofs[a], dofs[b], v);
                    if (a != b) trip.emplace_back(dofs[b], dofs[a], v);
                }
        };
        if (!pr.sigma.empty())
            pair_fields(pr.sigma, [](const MatField<T>& x, const MatField<T>& y) {
                Poly<T> s;
                for (int i = 0; i < 9; ++i) s += x.entry[i] * y.entry[i];
                return s;
            });
        else if (!pr.vec.empty())
            pair_fields(pr.vec, [](const VecField<T>& x, const VecField<T>& y) {
                Poly<T> s;
                for (int c = 0; c < 3; ++c) s += x[c] * y[c];
                return s;
            });
        else
            pair_fields(pr.skw_ax, [](const VecField<T>& x, const VecField<T>& y) {
                Poly<T> s; // Frobenius product of skew matrices with axial vectors x,y
                for (int c = 0; c < 3; ++c) s += x[c] * y[c] * T(2);
                return s;
            });
    }
    return trip;
}

/// Gram matrix of the divergences (div sigma_i . div sigma_j); exact.
template <class T>
Triplets<T> assemble_divdiv_block(const FESpace<T>& sigma)
{
    Triplets<T> trip;
    std::map<const void*, detail::CellProxies<T>> cache;
    const TetMesh& mesh = sigma.mesh();
    for (int t = 0; t < mesh.n_tets(); ++t) {
        const auto& sp = detail::cell_proxies(sigma.basis(t), cache);
        auto dofs = sigma.cell_dofs(t);
        for (size_t a = 0; a < sp.dsigma.size(); ++a)
            for (size_t b = a; b < sp.dsigma.size(); ++b) {
                Poly<T> s;
                for (int c = 0; c < 3; ++c) s += sp.dsigma[a][c] * sp.dsigma[b][c];
                T v = detail::integrate_cell(mesh, t, s);
                if (v == T(0)) continue;
                trip.emplace_back(dofs[a], dofs[b], v);
                if (a != b) trip.emplace_back(dofs[b], dofs[a], v);
            }
    }
    return trip;
}

/// Compliance block (A sigma_i : sigma_j) by quadrature (exact for the
/// isotropic law at the default degree).
inline Triplets<double> assemble_compliance_block(const FESpace<double>& sigma, const Material& mat,
                                                  int quad_degree)
{
    validate_material(mat);
    Triplets<double> trip;
    const TetMesh& mesh = sigma.mesh();
    auto rule = simplex_quadrature(3, quad_degree);

    // tabulation of proxy values at the reference points, shared by congruent cells
    struct Tab {
        std::vector<std::vector<Mat3d>> F; // [qpt][shape]
    };
    std::map<const void*, Tab> tabs;

    for (int t = 0; t < mesh.n_tets(); ++t) {
        const auto& lb = sigma.basis(t);
        auto c = mesh.tet_coords(t);
        Vec3d center = mesh.barycenter(t);
        Vec3d origin = c[0] - center;
        std::vector<Vec3d> cols{c[1] - c[0], c[2] - c[0], c[3] - c[0]};
        double det = std::abs(dot(cols[0], cross(cols[1], cols[2])));

        auto it = tabs.find(&lb);
        if (it == tabs.end()) {
            Tab tab;
            tab.F.resize(rule.size());
            std::vector<MatField<double>> proxies;
            for (auto& s : lb.shapes) proxies.push_back(twoform_to_matrix(s));
            for (size_t q = 0; q < rule.size(); ++q) {
                Vec3d y = origin;
                for (int j = 0; j < 3; ++j) y = y + cols[j] * rule.points[q][j];
                tab.F[q].reserve(proxies.size());
                for (auto& p : proxies) tab.F[q].push_back(p.evaluate(y));
            }
            it = tabs.emplace(&lb, std::move(tab)).first;
        }
        const Tab& tab = it->second;

        auto dofs = sigma.cell_dofs(t);
        const int n = lb.size();
        std::vector<double> local(static_cast<size_t>(n) * n, 0.0);
        std::vector<Mat3d> AF(n);
        for (size_t q = 0; q < rule.size(); ++q) {
            Vec3d y0 = origin;
            for (int j = 0; j < 3; ++j) y0 = y0 + cols[j] * rule.points[q][j];
            Vec3d x = center + y0;
            double w = rule.weights[q] * det;
            for (int i = 0; i < n; ++i) AF[i] = mat.apply(x, tab.F[q][i]);
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) local[i * n + j] += w * ddot(AF[i], tab.F[q][j]);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double v = local[i * n + j];
                if (v == 0.0) continue;
                trip.emplace_back(dofs[i], dofs[j], v);
                if (i != j) trip.emplace_back(dofs[j], dofs[i], v);
            }
    }
    return trip;
}

/// Load moments (f . v_a) by quadrature.
inline Eigen::VectorXd assemble_load(const FESpace<double>& vh,
                                     const std::function<Vec3d(const Vec3d&)>& f, int quad_degree)
{
    const TetMesh& mesh = vh.mesh();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(vh.ndofs());
    auto rule = simplex_quadrature(3, quad_degree);
    std::map<const void*, detail::CellProxies<double>> cache;
    for (int t = 0; t < mesh.n_tets(); ++t) {
        const auto& lb = vh.basis(t);
        const auto& pr = detail::cell_proxies(lb, cache);
        auto c = mesh.tet_coords(t);
        Vec3d center = mesh.barycenter(t);
        Vec3d origin = c[0] - center;
        std::vector<Vec3d> cols{c[1] - c[0], c[2] - c[0], c[3] - c[0]};
        double det = std::abs(dot(cols[0], cross(cols[1], cols[2])));
        auto dofs = vh.cell_dofs(t);
        for (size_t q = 0; q < rule.size(); ++q) {
            Vec3d y = origin;
            for (int j = 0; j < 3; ++j) y = y + cols[j] * rule.points[q][j];
            Vec3d fx = f(y + center);
            double w = rule.weights[q] * det;
            for (size_t a = 0; a < pr.vec.size(); ++a) {
                double val = 0;
                for (int cc = 0; cc < 3; ++cc) val += fx[cc] * pr.vec[a][cc].evaluate(y.v);
                rhs[dofs[a]] += w * val;
            }
        }
    }
    return rhs;
}

/// Boundary displacement moments int_bnd (sigma_i n) . g ds, the natural
/// right-hand side of the first equation for inhomogeneous displacement data.
inline Eigen::VectorXd assemble_boundary_displacement(const FESpace<double>& sigma,
                                                      const std::function<Vec3d(const Vec3d&)>& g,
                                                      int quad_degree)
{
    const TetMesh& mesh = sigma.mesh();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sigma.ndofs());
    auto rule = simplex_quadrature(2, quad_degree);
    for (int f = 0; f < mesh.n_faces(); ++f) {
        if (!mesh.face_boundary[f]) continue;
        int t = mesh.face_tets[f][0];
        const auto& lb = sigma.basis(t);
        const auto& fv = mesh.faces[f];
        std::vector<Vec3d> verts{mesh.vertices[fv[0]], mesh.vertices[fv[1]], mesh.vertices[fv[2]]};
        // outward unit normal
        Vec3d n = cross(verts[1] - verts[0], verts[2] - verts[0]);
        double nn = std::sqrt(dot(n, n));
        int lf = -1;
        for (int k = 0; k < 4; ++k)
            if (mesh.tet_faces[t][k] == f) lf = k;
        Vec3d nu = n * ((mesh.tet_face_outward[t][lf] > 0 ? 1.0 : -1.0) / nn);

        auto mq = map_quadrature(rule, verts);
        std::vector<MatField<double>> proxies;
        for (auto& s : lb.shapes) proxies.push_back(twoform_to_matrix(s));
        auto dofs = sigma.cell_dofs(t);
        Vec3d center = mesh.barycenter(t);
        for (size_t q = 0; q < mq.points.size(); ++q) {
            Vec3d x = mq.points[q];
            Vec3d y = x - center;
            Vec3d gx = g(x);
            for (size_t i = 0; i < proxies.size(); ++i) {
                Mat3d F = proxies[i].evaluate(y);
                rhs[dofs[i]] += mq.weights[q] * dot(F * nu, gx);
            }
        }
    }
    return rhs;
}

namespace detail {

inline void append_block(std::vector<Eigen::Triplet<double>>& out, const Triplets<double>& in,
                         int row0, int col0, bool also_transposed)
{
    for (auto& [r, c, v] : in) {
        out.emplace_back(row0 + r, col0 + c, v);
        if (also_transposed) out.emplace_back(col0 + c, row0 + r, v);
    }
}

} // namespace detail

struct SystemSpaces {
    const FESpace<double>& sigma;
    const FESpace<double>& u;
    const FESpace<double>& p;
};

/// Assemble the full symmetric block system.  `f` is the body load; `g`, when
/// given, supplies inhomogeneous displacement boundary data through the
/// natural boundary term (zero for the clamped problem).
inline BlockSystem assemble_system(const SystemSpaces& spaces, const Material& mat,
                                   const std::function<Vec3d(const Vec3d&)>& f,
                                   const std::function<Vec3d(const Vec3d&)>& g = nullptr,
                                   int compliance_degree = -1, int load_degree = -1)
{
    validate_material(mat);
    const int r = spaces.u.spec().degree;
    if (compliance_degree < 0) compliance_degree = 2 * (r + 1) + 2;
    if (load_degree < 0) load_degree = r + 3;

    BlockSystem sys;
    sys.n_sigma = spaces.sigma.ndofs();
    sys.n_u = spaces.u.ndofs();
    sys.n_p = spaces.p.ndofs();
    const int n = sys.size();

    auto a_block = assemble_compliance_block(spaces.sigma, mat, compliance_degree);
    auto b_block = assemble_div_block(spaces.sigma, spaces.u);
    auto c_block = assemble_skw_block(spaces.sigma, spaces.p);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(a_block.size() + 2 * b_block.size() + 2 * c_block.size());
    detail::append_block(trip, a_block, 0, 0, false);
    detail::append_block(trip, b_block, sys.n_sigma, 0, true);
    detail::append_block(trip, c_block, sys.n_sigma + sys.n_u, 0, true);

    sys.mat.resize(n, n);
    sys.mat.setFromTriplets(trip.begin(), trip.end());

    sys.rhs = Eigen::VectorXd::Zero(n);
    if (f) sys.rhs.segment(sys.n_sigma, sys.n_u) = assemble_load(spaces.u, f, load_degree);
    if (g)
        sys.rhs.head(sys.n_sigma) =
            assemble_boundary_displacement(spaces.sigma, g, compliance_degree);
    return sys;
}

/// Sparse matrix from exact or floating triplets.
template <class T>
Eigen::SparseMatrix<double> to_sparse(const Triplets<T>& trip, int rows, int cols)
{
    std::vector<Eigen::Triplet<double>> t2;
    t2.reserve(trip.size());
    for (auto& [r, c, v] : trip) t2.emplace_back(r, c, to_double(v));
    Eigen::SparseMatrix<double> m(rows, cols);
    m.setFromTriplets(t2.begin(), t2.end());
    return m;
}

template <class T>
Eigen::MatrixXd to_dense(const Triplets<T>& trip, int rows, int cols)
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    for (auto& [r, c, v] : trip) m(r, c) += to_double(v);
    return m;
}

template <class T>
MatQ to_ratmat(const Triplets<T>& trip, int rows, int cols)
{
    MatQ m(rows, cols);
    for (auto& [r, c, v] : trip) m(r, c) += Rational(v);
    return m;
}

} // namespace elastweak
