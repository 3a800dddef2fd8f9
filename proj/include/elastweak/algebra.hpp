// The algebraic operators tying matrix fields to vector- and skew-valued
// differential forms: axial vectors, the trace-reversal automorphism of M,
// the position-skew pairing and the induced coupling maps between V-valued
// and K-valued forms, the matrix/form identification maps, and the
// second-order curl-based operator of the elasticity sequence.

#pragma once

#include <array>
#include <stdexcept>

#include "elastweak/forms.hpp"

namespace elastweak {

// cross_matrix(v) w = v x w; the inverse of the axial-vector map.
template <class T>
inline Mat3<T> cross_matrix(const Vec3<T>& v)
{
    Mat3<T> m;
    m(0, 1) = -v[2];
    m(0, 2) = v[1];
    m(1, 0) = v[2];
    m(1, 2) = -v[0];
    m(2, 0) = -v[1];
    m(2, 1) = v[0];
    return m;
}

template <class T>
inline bool is_skew(const Mat3<T>& m)
{
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j)
            if (!(m(i, j) + m(j, i) == T(0))) return false;
    return true;
}

template <class T>
inline Vec3<T> axial(const Mat3<T>& m)
{
    if (!is_skew(m)) throw std::invalid_argument("axial: matrix is not skew");
    return {m(2, 1), m(0, 2), m(1, 0)};
}

// trace_reversal(m) = m^T - tr(m) I, with inverse m^T - tr(m)/2 I.
template <class T>
inline Mat3<T> trace_reversal(const Mat3<T>& m)
{
    Mat3<T> r = transpose(m);
    T t = trace(m);
    for (int i = 0; i < 3; ++i) r(i, i) -= t;
    return r;
}

template <class T>
inline Mat3<T> trace_reversal_inv(const Mat3<T>& m)
{
    Mat3<T> r = transpose(m);
    T t = trace(m) / T(2);
    for (int i = 0; i < 3; ++i) r(i, i) -= t;
    return r;
}

// skew_pair(x, v) = 2 skw(x v^T); axial(skew_pair(e_i, e_j)) = -(e_i x e_j).
template <class T>
inline Mat3<T> skew_pair(const Vec3<T>& x, const Vec3<T>& v)
{
    return outer(x, v) - outer(v, x);
}

// ---------------------------------------------------------------------------
// Pointwise lift of skew_pair to forms: V-valued k-form -> K-valued k-form,
// multiplying by the chart position (polynomial degree +1).
template <class T>
PolyForm<T> position_skew(const PolyForm<T>& w)
{
    if (w.values != Values::vector) throw std::invalid_argument("position_skew: needs V values");
    PolyForm<T> r(w.dim, w.deg, Values::skew);
    // axial coords of skew_pair(x, e_a) = -(x cross e_a):
    //   -(x x e_a) = e_a x x  -> component c: (e_a x e_i)_c x_i
    for (int alt = 0; alt < n_alt(w.dim, w.deg); ++alt)
        for (int a = 0; a < 3; ++a) {
            const Poly<T>& f = w.at(alt, a);
            if (f.is_zero()) continue;
            for (int i = 0; i < w.dim; ++i) {
                Vec3<T> cr = cross(Vec3<T>::unit(a), Vec3<T>::unit(i));
                for (int c = 0; c < 3; ++c)
                    if (!(cr[c] == T(0)))
                        r.at(alt, c) += (f * Poly<T>::monomial(i)) * cr[c];
            }
        }
    return r;
}

// Adjoint lift: K-valued k-form -> V-valued k-form, (w -> -2 w(...) x), i.e.
// value -2 cross_matrix(axial value) * x.
template <class T>
PolyForm<T> position_skew_adj(const PolyForm<T>& w)
{
    if (w.values != Values::skew) throw std::invalid_argument("position_skew_adj: needs K values");
    PolyForm<T> r(w.dim, w.deg, Values::vector);
    // -2 (a x x) with a = axial value: component c: -2 (e_a x e_i)_c f x_i
    for (int alt = 0; alt < n_alt(w.dim, w.deg); ++alt)
        for (int a = 0; a < 3; ++a) {
            const Poly<T>& f = w.at(alt, a);
            if (f.is_zero()) continue;
            for (int i = 0; i < w.dim; ++i) {
                Vec3<T> cr = cross(Vec3<T>::unit(a), Vec3<T>::unit(i));
                for (int c = 0; c < 3; ++c)
                    if (!(cr[c] == T(0)))
                        r.at(alt, c) += (f * Poly<T>::monomial(i)) * (cr[c] * T(-2));
            }
        }
    return r;
}

// ---------------------------------------------------------------------------
// The purely algebraic coupling S_k : V-valued k-forms -> K-valued (k+1)-forms,
//   (S w)(v_1..v_{k+1}) = sum_j (-1)^{j+1} skew_pair(v_j, w(..v_j dropped..)),
// which satisfies d S = -S d, and its adjoint S'_k and the inverse of S_1.

template <class T>
PolyForm<T> skew_coupling(const PolyForm<T>& w)
{
    if (w.values != Values::vector) throw std::invalid_argument("skew_coupling: needs V values");
    if (w.deg >= 3) throw std::invalid_argument("skew_coupling: form degree must be <= 2");
    PolyForm<T> r(w.dim, w.deg + 1, Values::skew);
    const auto& out_t = alt_tuples(w.dim, w.deg + 1);
    for (int b = 0; b < static_cast<int>(out_t.size()); ++b)
        for (int j = 0; j <= w.deg; ++j) {
            std::array<int, 3> red{-1, -1, -1};
            int n = 0;
            for (int t = 0; t <= w.deg; ++t)
                if (t != j) red[n++] = out_t[b][t];
            int ra = alt_index(w.dim, w.deg, red);
            T sgn = (j % 2 == 0) ? T(1) : T(-1);
            for (int a = 0; a < 3; ++a) {
                const Poly<T>& f = w.at(ra, a);
                if (f.is_zero()) continue;
                // axial(skew_pair(e_{P_j}, e_a)) = -(e_{P_j} x e_a)
                Vec3<T> cr = cross(Vec3<T>::unit(out_t[b][j]), Vec3<T>::unit(a));
                for (int c = 0; c < 3; ++c)
                    if (!(cr[c] == T(0))) r.at(b, c) += f * (sgn * T(-1) * cr[c]);
            }
        }
    return r;
}

template <class T>
PolyForm<T> skew_coupling_adj(const PolyForm<T>& w)
{
    if (w.values != Values::skew) throw std::invalid_argument("skew_coupling_adj: needs K values");
    if (w.deg >= 3) throw std::invalid_argument("skew_coupling_adj: form degree must be <= 2");
    PolyForm<T> r(w.dim, w.deg + 1, Values::vector);
    const auto& out_t = alt_tuples(w.dim, w.deg + 1);
    for (int b = 0; b < static_cast<int>(out_t.size()); ++b)
        for (int j = 0; j <= w.deg; ++j) {
            std::array<int, 3> red{-1, -1, -1};
            int n = 0;
            for (int t = 0; t <= w.deg; ++t)
                if (t != j) red[n++] = out_t[b][t];
            int ra = alt_index(w.dim, w.deg, red);
            T sgn = (j % 2 == 0) ? T(-2) : T(2);
            for (int a = 0; a < 3; ++a) {
                const Poly<T>& f = w.at(ra, a);
                if (f.is_zero()) continue;
                // value -2 * (axial value) x e_{P_j}
                Vec3<T> cr = cross(Vec3<T>::unit(a), Vec3<T>::unit(out_t[b][j]));
                for (int c = 0; c < 3; ++c)
                    if (!(cr[c] == T(0))) r.at(b, c) += f * (sgn * cr[c]);
            }
        }
    return r;
}

namespace detail {
// 9x9 coordinate matrix of S_1 (V-valued 1-forms -> K-valued 2-forms) and its
// exact inverse, built once over the rationals.
inline const std::array<std::array<Rational, 9>, 9>& s1_inverse_matrix()
{
    static std::array<std::array<Rational, 9>, 9> inv = [] {
        // forward matrix: columns indexed by (alt i, value a), rows by (alt2 b, value c)
        std::array<std::array<Rational, 9>, 9> fwd{};
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < 3; ++a) {
                PolyForm<Rational> w(3, 1, Values::vector);
                w.at(i, a) = Poly<Rational>(Rational(1));
                PolyForm<Rational> s = skew_coupling(w);
                for (int b = 0; b < 3; ++b)
                    for (int c = 0; c < 3; ++c) {
                        Rational v(0);
                        if (!s.at(b, c).is_zero()) v = s.at(b, c).terms().begin()->second;
                        fwd[3 * b + c][3 * i + a] = v;
                    }
            }
        // Gauss-Jordan inverse
        std::array<std::array<Rational, 9>, 9> id{};
        for (int i = 0; i < 9; ++i) id[i][i] = 1;
        for (int col = 0; col < 9; ++col) {
            int piv = -1;
            for (int r = col; r < 9; ++r)
                if (fwd[r][col] != 0) {
                    piv = r;
                    break;
                }
            if (piv < 0) throw std::logic_error("S_1 coordinate matrix is singular");
            std::swap(fwd[piv], fwd[col]);
            std::swap(id[piv], id[col]);
            Rational p = fwd[col][col];
            for (int j = 0; j < 9; ++j) {
                fwd[col][j] /= p;
                id[col][j] /= p;
            }
            for (int r = 0; r < 9; ++r) {
                if (r == col || fwd[r][col] == 0) continue;
                Rational f = fwd[r][col];
                for (int j = 0; j < 9; ++j) {
                    fwd[r][j] -= f * fwd[col][j];
                    id[r][j] -= f * id[col][j];
                }
            }
        }
        return id;
    }();
    return inv;
}
} // namespace detail

// Inverse of S_1, applied coefficientwise (S_1 is algebraic and bijective on
// constant forms, hence on polynomial forms of any degree).
template <class T>
PolyForm<T> skew_coupling_inv(const PolyForm<T>& w)
{
    if (w.deg != 2 || w.values != Values::skew)
        throw std::invalid_argument("skew_coupling_inv: needs a K-valued 2-form");
    const auto& inv = detail::s1_inverse_matrix();
    PolyForm<T> r(w.dim, 1, Values::vector);
    for (int i = 0; i < 3; ++i)
        for (int a = 0; a < 3; ++a) {
            Poly<T> acc;
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c) {
                    const Rational& q = inv[3 * i + a][3 * b + c];
                    if (q == 0) continue;
                    if constexpr (std::is_same_v<T, double>)
                        acc += w.at(b, c) * to_double(q);
                    else
                        acc += w.at(b, c) * T(q);
                }
            r.at(i, a) = acc;
        }
    return r;
}

// ---------------------------------------------------------------------------
// Polynomial matrix fields (3x3 entries) and the row-wise vector calculus.

template <class T>
struct MatField {
    std::array<Poly<T>, 9> entry;

    Poly<T>&       operator()(int i, int j) { return entry[3 * i + j]; }
    const Poly<T>& operator()(int i, int j) const { return entry[3 * i + j]; }

    bool is_zero() const
    {
        for (auto& p : entry)
            if (!p.is_zero()) return false;
        return true;
    }
    double max_abs_coeff() const
    {
        double m = 0;
        for (auto& p : entry) m = std::max(m, p.max_abs_coeff());
        return m;
    }
    Mat3<T> evaluate(const Vec3<T>& x) const
    {
        Mat3<T> r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(i, j).evaluate(x.v);
        return r;
    }
    MatField operator-(const MatField& o) const
    {
        MatField r;
        for (int i = 0; i < 9; ++i) r.entry[i] = entry[i] - o.entry[i];
        return r;
    }
};

template <class T>
using VecField = std::array<Poly<T>, 3>;

template <class T>
MatField<T> grad_field(const VecField<T>& u)
{
    MatField<T> g;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g(i, j) = u[i].derivative(j);
    return g;
}

template <class T>
MatField<T> sym_field(const MatField<T>& f)
{
    MatField<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = (f(i, j) + f(j, i)) * (T(1) / T(2));
    return r;
}

template <class T>
MatField<T> skw_field(const MatField<T>& f)
{
    MatField<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = (f(i, j) - f(j, i)) * (T(1) / T(2));
    return r;
}

template <class T>
MatField<T> curl_rows(const MatField<T>& f)
{
    MatField<T> r;
    for (int i = 0; i < 3; ++i) {
        r(i, 0) = f(i, 2).derivative(1) - f(i, 1).derivative(2);
        r(i, 1) = f(i, 0).derivative(2) - f(i, 2).derivative(0);
        r(i, 2) = f(i, 1).derivative(0) - f(i, 0).derivative(1);
    }
    return r;
}

template <class T>
VecField<T> div_rows(const MatField<T>& f)
{
    VecField<T> r;
    for (int i = 0; i < 3; ++i)
        r[i] = f(i, 0).derivative(0) + f(i, 1).derivative(1) + f(i, 2).derivative(2);
    return r;
}

template <class T>
MatField<T> trace_reversal_inv(const MatField<T>& f)
{
    MatField<T> r;
    Poly<T> t = (f(0, 0) + f(1, 1) + f(2, 2)) * (T(1) / T(2));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            r(i, j) = f(j, i);
            if (i == j) r(i, j) -= t;
        }
    return r;
}

// The second-order operator of the weak-symmetry elasticity sequence:
// row-wise curl, trace-reversal inverse, row-wise curl again.  It kills
// symmetrized gradients and skew fields, and its image is divergence free.
template <class T>
MatField<T> curl_curl(const MatField<T>& f)
{
    return curl_rows(trace_reversal_inv(curl_rows(f)));
}

// ---------------------------------------------------------------------------
// Identification of matrix fields with forms.

// F -> V-valued 1-form, w(v) = F v.
template <class T>
PolyForm<T> as_oneform(const MatField<T>& f)
{
    PolyForm<T> r(3, 1, Values::vector);
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) r.at(i, c) = f(c, i);
    return r;
}

template <class T>
MatField<T> oneform_to_matrix(const PolyForm<T>& w)
{
    if (w.deg != 1 || w.values != Values::vector)
        throw std::invalid_argument("oneform_to_matrix: needs V-valued 1-form");
    MatField<T> f;
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) f(c, i) = w.at(i, c);
    return f;
}

// F -> K-valued 1-form, w(v) = cross_matrix^{-1}... i.e. axial coords F v.
template <class T>
PolyForm<T> as_oneform_axial(const MatField<T>& f)
{
    PolyForm<T> r(3, 1, Values::skew);
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) r.at(i, c) = f(c, i);
    return r;
}

template <class T>
MatField<T> oneform_axial_to_matrix(const PolyForm<T>& w)
{
    if (w.deg != 1 || w.values != Values::skew)
        throw std::invalid_argument("oneform_axial_to_matrix: needs K-valued 1-form");
    MatField<T> f;
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) f(c, i) = w.at(i, c);
    return f;
}

// F -> V-valued 2-form, mu(v1,v2) = F (v1 x v2).  With the sorted 2-tuples
// (01, 02, 12): mu(e0,e1) = F e2, mu(e0,e2) = -F e1, mu(e1,e2) = F e0.
template <class T>
PolyForm<T> as_twoform(const MatField<T>& f)
{
    PolyForm<T> r(3, 2, Values::vector);
    for (int c = 0; c < 3; ++c) {
        r.at(0, c) = f(c, 2);
        r.at(1, c) = -f(c, 1);
        r.at(2, c) = f(c, 0);
    }
    return r;
}

template <class T>
MatField<T> twoform_to_matrix(const PolyForm<T>& w)
{
    if (w.deg != 2 || w.values != Values::vector)
        throw std::invalid_argument("twoform_to_matrix: needs V-valued 2-form");
    MatField<T> f;
    for (int c = 0; c < 3; ++c) {
        f(c, 2) = w.at(0, c);
        f(c, 1) = -w.at(1, c);
        f(c, 0) = w.at(2, c);
    }
    return f;
}

// F -> K-valued 2-form, mu(v1,v2) with axial coords F (v1 x v2).
template <class T>
PolyForm<T> as_twoform_axial(const MatField<T>& f)
{
    PolyForm<T> r(3, 2, Values::skew);
    for (int c = 0; c < 3; ++c) {
        r.at(0, c) = f(c, 2);
        r.at(1, c) = -f(c, 1);
        r.at(2, c) = f(c, 0);
    }
    return r;
}

template <class T>
MatField<T> twoform_axial_to_matrix(const PolyForm<T>& w)
{
    if (w.deg != 2 || w.values != Values::skew)
        throw std::invalid_argument("twoform_axial_to_matrix: needs K-valued 2-form");
    MatField<T> f;
    for (int c = 0; c < 3; ++c) {
        f(c, 2) = w.at(0, c);
        f(c, 1) = -w.at(1, c);
        f(c, 0) = w.at(2, c);
    }
    return f;
}

// V-valued 3-form <-> vector field (mu(v1,v2,v3) = u (v1 x v2 . v3)).
template <class T>
VecField<T> threeform_to_vector(const PolyForm<T>& w)
{
    if (w.deg != 3 || w.values != Values::vector)
        throw std::invalid_argument("threeform_to_vector: needs V-valued 3-form");
    VecField<T> u;
    for (int c = 0; c < 3; ++c) u[c] = w.at(0, c);
    return u;
}

} // namespace elastweak
