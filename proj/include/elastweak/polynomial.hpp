// Sparse polynomials in up to three variables, exact over any scalar field.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "elastweak/scalar.hpp"
#include "elastweak/smallmat.hpp"

namespace elastweak {

struct Monomial {
    std::array<uint8_t, 3> e{0, 0, 0};

    int total() const { return e[0] + e[1] + e[2]; }
    bool operator<(const Monomial& o) const { return e < o.e; }
    bool operator==(const Monomial& o) const { return e == o.e; }
};

inline Monomial mono_mul(const Monomial& a, const Monomial& b)
{
    Monomial r;
    for (int i = 0; i < 3; ++i) r.e[i] = static_cast<uint8_t>(a.e[i] + b.e[i]);
    return r;
}

template <class T>
class Poly {
public:
    Poly() = default;
    explicit Poly(T c)
    {
        if (!(c == T(0))) terms_[Monomial{}] = std::move(c);
    }

    static Poly monomial(int i, T c = T(1))
    {
        Poly p;
        Monomial m;
        m.e[i] = 1;
        if (!(c == T(0))) p.terms_[m] = std::move(c);
        return p;
    }

    bool is_zero() const { return terms_.empty(); }
    int degree() const
    {
        int d = -1;
        for (auto& [m, c] : terms_) d = std::max(d, m.total());
        return d;
    }

    void add_term(const Monomial& m, const T& c)
    {
        if (c == T(0)) return;
        auto it = terms_.find(m);
        if (it == terms_.end())
            terms_.emplace(m, c);
        else {
            it->second += c;
            if (it->second == T(0)) terms_.erase(it);
        }
    }

    Poly operator+(const Poly& o) const
    {
        Poly r = *this;
        for (auto& [m, c] : o.terms_) r.add_term(m, c);
        return r;
    }
    Poly operator-(const Poly& o) const
    {
        Poly r = *this;
        for (auto& [m, c] : o.terms_) r.add_term(m, -c);
        return r;
    }
    Poly& operator+=(const Poly& o)
    {
        for (auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o)
    {
        for (auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    Poly operator*(const Poly& o) const
    {
        Poly r;
        for (auto& [m1, c1] : terms_)
            for (auto& [m2, c2] : o.terms_) r.add_term(mono_mul(m1, m2), c1 * c2);
        return r;
    }
    Poly operator*(const T& s) const
    {
        Poly r;
        if (s == T(0)) return r;
        for (auto& [m, c] : terms_) r.terms_[m] = c * s;
        return r;
    }
    Poly operator-() const { return *this * T(-1); }

    bool operator==(const Poly& o) const { return terms_ == o.terms_; }

    Poly derivative(int i) const
    {
        Poly r;
        for (auto& [m, c] : terms_) {
            if (m.e[i] == 0) continue;
            Monomial d = m;
            d.e[i] -= 1;
            r.add_term(d, c * T(int(m.e[i])));
        }
        return r;
    }

    template <class Pt>
    T evaluate(const Pt& x) const
    {
        T s(0);
        for (auto& [m, c] : terms_) {
            T v = c;
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < m.e[i]; ++k) v *= x[i];
            s += v;
        }
        return s;
    }

    // Substitute x_i = origin[i] + sum_j cols[j][i] * u_j (new variables u_0..u_{nvars-1}).
    Poly substitute_affine(const Vec3<T>& origin, const std::vector<Vec3<T>>& cols) const
    {
        const int nvars = static_cast<int>(cols.size());
        std::array<Poly, 3> xin;
        for (int i = 0; i < 3; ++i) {
            Poly p(origin[i]);
            for (int j = 0; j < nvars; ++j) p += Poly::monomial(j, cols[j][i]);
            xin[i] = p;
        }
        Poly r;
        for (auto& [m, c] : terms_) {
            Poly t{c};
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < m.e[i]; ++k) t = t * xin[i];
            r += t;
        }
        return r;
    }

    double max_abs_coeff() const
    {
        double m = 0;
        for (auto& [mo, c] : terms_) m = std::max(m, abs_value(c));
        return m;
    }

    const std::map<Monomial, T>& terms() const { return terms_; }

    template <class U>
    Poly<U> cast() const
    {
        Poly<U> r;
        for (auto& [m, c] : terms_) r.add_term(m, static_cast<U>(to_double(c)));
        return r;
    }

private:
    std::map<Monomial, T> terms_;
};

namespace detail {
inline Rational factorial_q(int n)
{
    Rational r(1);
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}
} // namespace detail

// Exact integral of a monomial u^a over the unit simplex in `dim` variables:
//   \int u1^a1...ud^ad du = a1!...ad! / (a1+...+ad+d)!
template <class T>
T simplex_monomial_integral(const Monomial& m, int dim)
{
    Rational num(1);
    for (int i = 0; i < dim; ++i) num *= detail::factorial_q(m.e[i]);
    for (int i = dim; i < 3; ++i)
        if (m.e[i] != 0) throw std::logic_error("monomial uses variable beyond chart dimension");
    Rational val = num / detail::factorial_q(m.total() + dim);
    if constexpr (std::is_same_v<T, double>)
        return to_double(val);
    else
        return T(val);
}

template <class T>
T integrate_unit_simplex(const Poly<T>& p, int dim)
{
    T s(0);
    for (auto& [m, c] : p.terms()) s += c * simplex_monomial_integral<T>(m, dim);
    return s;
}

using Polyd = Poly<double>;
using Polyq = Poly<Rational>;

} // namespace elastweak
