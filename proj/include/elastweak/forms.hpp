// Polynomial differential forms on R^d (d <= 3) with values in R, R^3,
// the skew 3x3 matrices, or the full 3x3 matrices.
//
// Coefficients are stored against the canonical alternating basis
// {dx_{i1} ^ ... ^ dx_{ik}} with sorted index tuples, tensored with the
// value-space basis.  The skew value space uses the basis
// F_c = cross_matrix(e_c), so that the axial-vector map is the literal
// coordinate map and F_c : F_c' = 2 delta_{cc'}.

#pragma once

#include <cassert>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "elastweak/polynomial.hpp"

namespace elastweak {

enum class Values : uint8_t { scalar, vector, skew, matrix };

inline int value_dim(Values v)
{
    switch (v) {
        case Values::scalar: return 1;
        case Values::vector: return 3;
        case Values::skew: return 3;
        case Values::matrix: return 9;
    }
    return 0;
}

// Frobenius norm squared of the c-th value basis element (K basis elements
// have norm^2 = 2, the others are orthonormal).
template <class T>
inline T value_metric(Values v, int /*c*/)
{
    return v == Values::skew ? T(2) : T(1);
}

inline int binom(int n, int k)
{
    if (k < 0 || k > n) return 0;
    int r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

// ---------------------------------------------------------------------------
// Alternating index bookkeeping

inline int n_alt(int dim, int k) { return binom(dim, k); }

// Sorted k-tuples out of {0..dim-1}, lexicographic.  k <= 3.
inline const std::vector<std::array<int, 3>>& alt_tuples(int dim, int k)
{
    static std::vector<std::array<int, 3>> tables[4][4];
    static bool built = false;
    if (!built) {
        for (int d = 0; d <= 3; ++d)
            for (int kk = 0; kk <= d; ++kk) {
                auto& tab = tables[d][kk];
                std::array<int, 3> idx{-1, -1, -1};
                // enumerate combinations
                std::vector<int> c(kk);
                for (int i = 0; i < kk; ++i) c[i] = i;
                while (true) {
                    idx = {-1, -1, -1};
                    for (int i = 0; i < kk; ++i) idx[i] = c[i];
                    tab.push_back(idx);
                    int i = kk - 1;
                    while (i >= 0 && c[i] == d - kk + i) --i;
                    if (i < 0) break;
                    ++c[i];
                    for (int j = i + 1; j < kk; ++j) c[j] = c[j - 1] + 1;
                }
                if (kk == 0) tab.resize(1);
            }
        built = true;
    }
    return tables[dim][k];
}

inline int alt_index(int dim, int k, const std::array<int, 3>& t)
{
    const auto& tab = alt_tuples(dim, k);
    for (int i = 0; i < static_cast<int>(tab.size()); ++i)
        if (tab[i] == t) return i;
    throw std::logic_error("alt_index: tuple not found");
}

// Sign of the permutation sorting the concatenation (I, J); 0 on collision.
// On success writes the sorted union into `out`.
inline int merge_sign(int ki, const std::array<int, 3>& I, int kj, const std::array<int, 3>& J,
                      std::array<int, 3>& out)
{
    std::array<int, 6> buf;
    int n = 0;
    for (int i = 0; i < ki; ++i) buf[n++] = I[i];
    for (int j = 0; j < kj; ++j) buf[n++] = J[j];
    int inv = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (buf[a] == buf[b]) return 0;
            if (buf[a] > buf[b]) ++inv;
        }
    std::array<int, 6> s = buf;
    std::sort(s.begin(), s.begin() + n);
    out = {-1, -1, -1};
    for (int i = 0; i < n; ++i) out[i] = s[i];
    return (inv % 2 == 0) ? 1 : -1;
}

// ---------------------------------------------------------------------------

template <class T>
struct PolyForm {
    int dim = 3;     // ambient dimension of the chart
    int deg = 0;     // form degree k
    Values values = Values::scalar;
    std::vector<Poly<T>> comp; // size n_alt(dim,deg) * value_dim(values)

    PolyForm() = default;
    PolyForm(int dim_, int deg_, Values v) : dim(dim_), deg(deg_), values(v)
    {
        if (deg < 0 || deg > dim) throw std::invalid_argument("form degree out of range");
        comp.resize(static_cast<size_t>(n_alt(dim, deg)) * value_dim(values));
    }

    Poly<T>&       at(int alt, int c) { return comp[static_cast<size_t>(alt) * value_dim(values) + c]; }
    const Poly<T>& at(int alt, int c) const
    {
        return comp[static_cast<size_t>(alt) * value_dim(values) + c];
    }

    bool is_zero() const
    {
        for (auto& p : comp)
            if (!p.is_zero()) return false;
        return true;
    }

    int poly_degree() const
    {
        int d = -1;
        for (auto& p : comp) d = std::max(d, p.degree());
        return d;
    }

    double max_abs_coeff() const
    {
        double m = 0;
        for (auto& p : comp) m = std::max(m, p.max_abs_coeff());
        return m;
    }

    PolyForm operator+(const PolyForm& o) const
    {
        check_same(o);
        PolyForm r = *this;
        for (size_t i = 0; i < comp.size(); ++i) r.comp[i] += o.comp[i];
        return r;
    }
    PolyForm operator-(const PolyForm& o) const
    {
        check_same(o);
        PolyForm r = *this;
        for (size_t i = 0; i < comp.size(); ++i) r.comp[i] -= o.comp[i];
        return r;
    }
    PolyForm& operator+=(const PolyForm& o)
    {
        check_same(o);
        for (size_t i = 0; i < comp.size(); ++i) comp[i] += o.comp[i];
        return *this;
    }
    PolyForm operator*(const T& s) const
    {
        PolyForm r = *this;
        for (auto& p : r.comp) p = p * s;
        return r;
    }
    PolyForm operator-() const { return *this * T(-1); }

    template <class U>
    PolyForm<U> cast() const
    {
        PolyForm<U> r(dim, deg, values);
        for (size_t i = 0; i < comp.size(); ++i) r.comp[i] = comp[i].template cast<U>();
        return r;
    }

private:
    void check_same(const PolyForm& o) const
    {
        if (dim != o.dim || deg != o.deg || values != o.values)
            throw std::invalid_argument("form shape mismatch");
    }
};

// ---------------------------------------------------------------------------
// Exterior derivative, Koszul differential, wedge products

template <class T>
PolyForm<T> ext_d(const PolyForm<T>& w)
{
    if (w.deg >= w.dim) throw std::invalid_argument("ext_d: form degree already maximal");
    PolyForm<T> r(w.dim, w.deg + 1, w.values);
    const auto& in_t = alt_tuples(w.dim, w.deg);
    const int vd = value_dim(w.values);
    for (int a = 0; a < static_cast<int>(in_t.size()); ++a)
        for (int c = 0; c < vd; ++c) {
            const Poly<T>& f = w.at(a, c);
            if (f.is_zero()) continue;
            for (int i = 0; i < w.dim; ++i) {
                Poly<T> df = f.derivative(i);
                if (df.is_zero()) continue;
                std::array<int, 3> out;
                int s = merge_sign(1, {i, -1, -1}, w.deg, in_t[a], out);
                if (s == 0) continue;
                r.at(alt_index(w.dim, w.deg + 1, out), c) += df * T(s);
            }
        }
    return r;
}

// (kappa w)_u(v1,...,v_{k-1}) = w_u(u, v1, ..., v_{k-1}), taken about the
// origin of the current chart.
template <class T>
PolyForm<T> koszul(const PolyForm<T>& w)
{
    if (w.deg < 1) throw std::invalid_argument("koszul: needs form degree >= 1");
    PolyForm<T> r(w.dim, w.deg - 1, w.values);
    const auto& in_t = alt_tuples(w.dim, w.deg);
    const int vd = value_dim(w.values);
    for (int a = 0; a < static_cast<int>(in_t.size()); ++a)
        for (int c = 0; c < vd; ++c) {
            const Poly<T>& f = w.at(a, c);
            if (f.is_zero()) continue;
            for (int j = 0; j < w.deg; ++j) {
                std::array<int, 3> red{-1, -1, -1};
                int n = 0;
                for (int t = 0; t < w.deg; ++t)
                    if (t != j) red[n++] = in_t[a][t];
                T sgn = (j % 2 == 0) ? T(1) : T(-1);
                r.at(alt_index(w.dim, w.deg - 1, red), c) +=
                    (f * Poly<T>::monomial(in_t[a][j])) * sgn;
            }
        }
    return r;
}

namespace detail {
template <class T>
void wedge_accumulate(PolyForm<T>& r, int ka, const std::array<int, 3>& I, int kb,
                      const std::array<int, 3>& J, int c, const Poly<T>& f, const Poly<T>& g,
                      const T& metric)
{
    std::array<int, 3> out;
    int s = merge_sign(ka, I, kb, J, out);
    if (s == 0) return;
    r.at(alt_index(r.dim, ka + kb, out), c) += (f * g) * (metric * T(s));
}
} // namespace detail

// Wedge product.  Pairing of values:
//   scalar x X  -> X
//   X x scalar  -> X
//   X x X       -> scalar, via the inner product on X
template <class T>
PolyForm<T> wedge(const PolyForm<T>& a, const PolyForm<T>& b)
{
    if (a.dim != b.dim) throw std::invalid_argument("wedge: chart mismatch");
    if (a.deg + b.deg > a.dim) throw std::invalid_argument("wedge: degree overflow");
    const auto& ta = alt_tuples(a.dim, a.deg);
    const auto& tb = alt_tuples(b.dim, b.deg);

    Values out_values;
    if (a.values == Values::scalar)
        out_values = b.values;
    else if (b.values == Values::scalar)
        out_values = a.values;
    else if (a.values == b.values)
        out_values = Values::scalar;
    else
        throw std::invalid_argument("wedge: incompatible value spaces");

    PolyForm<T> r(a.dim, a.deg + b.deg, out_values);
    for (int ia = 0; ia < static_cast<int>(ta.size()); ++ia)
        for (int ib = 0; ib < static_cast<int>(tb.size()); ++ib) {
            if (a.values == Values::scalar && b.values != Values::scalar) {
                for (int c = 0; c < value_dim(b.values); ++c)
                    detail::wedge_accumulate(r, a.deg, ta[ia], b.deg, tb[ib], c, a.at(ia, 0),
                                             b.at(ib, c), T(1));
            } else if (b.values == Values::scalar && a.values != Values::scalar) {
                for (int c = 0; c < value_dim(a.values); ++c)
                    detail::wedge_accumulate(r, a.deg, ta[ia], b.deg, tb[ib], c, a.at(ia, c),
                                             b.at(ib, 0), T(1));
            } else if (a.values == Values::scalar) { // both scalar
                detail::wedge_accumulate(r, a.deg, ta[ia], b.deg, tb[ib], 0, a.at(ia, 0),
                                         b.at(ib, 0), T(1));
            } else { // inner-product pairing
                for (int c = 0; c < value_dim(a.values); ++c)
                    detail::wedge_accumulate(r, a.deg, ta[ia], b.deg, tb[ib], 0, a.at(ia, c),
                                             b.at(ib, c), value_metric<T>(a.values, c));
            }
        }
    return r;
}

// ---------------------------------------------------------------------------
// Pullback under the affine map  x = origin + E u,  E given by its columns.
// (F* w)_u(v1..vk) = w_{x(u)}(E v1, ..., E vk); values are untouched.

template <class T>
PolyForm<T> pullback(const PolyForm<T>& w, const Vec3<T>& origin, const std::vector<Vec3<T>>& cols)
{
    const int nd = static_cast<int>(cols.size());
    if (w.deg > nd) {
        // a k-form pulls back to zero when the target chart has fewer directions
        return PolyForm<T>(nd, 0, w.values); // caller should not rely on this
    }
    PolyForm<T> r(nd, w.deg, w.values);
    const auto& in_t = alt_tuples(w.dim, w.deg);
    const auto& out_t = alt_tuples(nd, w.deg);
    const int vd = value_dim(w.values);

    for (int a = 0; a < static_cast<int>(in_t.size()); ++a) {
        // minor determinants det(E[I, J]) for all output tuples J
        std::vector<T> minors(out_t.size(), T(0));
        for (int b = 0; b < static_cast<int>(out_t.size()); ++b) {
            const int k = w.deg;
            if (k == 0) {
                minors[b] = T(1);
            } else if (k == 1) {
                minors[b] = cols[out_t[b][0]][in_t[a][0]];
            } else if (k == 2) {
                const auto& I = in_t[a];
                const auto& J = out_t[b];
                minors[b] = cols[J[0]][I[0]] * cols[J[1]][I[1]] -
                            cols[J[1]][I[0]] * cols[J[0]][I[1]];
            } else { // k == 3
                const auto& I = in_t[a];
                const auto& J = out_t[b];
                Vec3<T> c0{cols[J[0]][I[0]], cols[J[0]][I[1]], cols[J[0]][I[2]]};
                Vec3<T> c1{cols[J[1]][I[0]], cols[J[1]][I[1]], cols[J[1]][I[2]]};
                Vec3<T> c2{cols[J[2]][I[0]], cols[J[2]][I[1]], cols[J[2]][I[2]]};
                minors[b] = dot(c0, cross(c1, c2));
            }
        }
        for (int c = 0; c < vd; ++c) {
            const Poly<T>& f = w.at(a, c);
            if (f.is_zero()) continue;
            Poly<T> fu = f.substitute_affine(origin, cols);
            for (int b = 0; b < static_cast<int>(out_t.size()); ++b)
                if (!(minors[b] == T(0))) r.at(b, c) += fu * minors[b];
        }
    }
    return r;
}

// Evaluate the form at point x on form-degree many vectors; returns the value
// components (length value_dim).
template <class T>
std::vector<T> evaluate(const PolyForm<T>& w, const Vec3<T>& x, const std::vector<Vec3<T>>& vecs)
{
    if (static_cast<int>(vecs.size()) != w.deg)
        throw std::invalid_argument("evaluate: wrong number of vectors");
    const auto& tt = alt_tuples(w.dim, w.deg);
    const int vd = value_dim(w.values);
    std::vector<T> out(vd, T(0));
    for (int a = 0; a < static_cast<int>(tt.size()); ++a) {
        // det of rows I of the matrix whose columns are the vectors
        T det(0);
        const int k = w.deg;
        const auto& I = tt[a];
        if (k == 0)
            det = T(1);
        else if (k == 1)
            det = vecs[0][I[0]];
        else if (k == 2)
            det = vecs[0][I[0]] * vecs[1][I[1]] - vecs[1][I[0]] * vecs[0][I[1]];
        else {
            Vec3<T> a0{vecs[0][I[0]], vecs[0][I[1]], vecs[0][I[2]]};
            Vec3<T> a1{vecs[1][I[0]], vecs[1][I[1]], vecs[1][I[2]]};
            Vec3<T> a2{vecs[2][I[0]], vecs[2][I[1]], vecs[2][I[2]]};
            det = dot(a0, cross(a1, a2));
        }
        if (det == T(0)) continue;
        for (int c = 0; c < vd; ++c) {
            const Poly<T>& f = w.at(a, c);
            if (!f.is_zero()) out[c] += f.evaluate(x.v) * det;
        }
    }
    return out;
}

// Integral of a top-degree scalar form over the unit simplex of its chart.
template <class T>
T integrate_top(const PolyForm<T>& w)
{
    if (w.deg != w.dim || w.values != Values::scalar)
        throw std::invalid_argument("integrate_top: need scalar top-degree form");
    return integrate_unit_simplex(w.comp[0], w.dim);
}

// Random form with small integer coefficients, for the property suites.
template <class T>
PolyForm<T> random_form(std::mt19937_64& rng, int dim, int k, Values v, int poly_deg)
{
    PolyForm<T> r(dim, k, v);
    std::uniform_int_distribution<int> coef(-9, 9);
    const int vd = value_dim(v);
    for (int a = 0; a < n_alt(dim, k); ++a)
        for (int c = 0; c < vd; ++c) {
            Poly<T> p;
            for (int d0 = 0; d0 <= poly_deg; ++d0)
                for (int d1 = 0; d1 + d0 <= poly_deg; ++d1)
                    for (int d2 = 0; d2 + d1 + d0 <= poly_deg; ++d2) {
                        if (d0 + (dim < 2 ? d1 : 0) + (dim < 3 ? d2 : 0) > poly_deg) continue;
                        if (dim < 2 && d1 > 0) continue;
                        if (dim < 3 && d2 > 0) continue;
                        Monomial m;
                        m.e = {uint8_t(d0), uint8_t(d1), uint8_t(d2)};
                        p.add_term(m, T(coef(rng)));
                    }
            r.at(a, c) = p;
        }
    return r;
}

} // namespace elastweak
