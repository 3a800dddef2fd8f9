// Fixed-size 3-vectors and 3x3 matrices over an arbitrary scalar field.
// Eigen is used for floating point linear algebra elsewhere; these tiny
// types exist so the exact-rational kernel has no dependency on it.

#pragma once

#include <array>
#include <initializer_list>
#include <stdexcept>

#include "elastweak/scalar.hpp"

namespace elastweak {

template <class T>
struct Vec3 {
    std::array<T, 3> v{};

    Vec3() = default;
    Vec3(T a, T b, T c) : v{std::move(a), std::move(b), std::move(c)} {}

    T&       operator[](int i) { return v[i]; }
    const T& operator[](int i) const { return v[i]; }

    Vec3 operator+(const Vec3& o) const { return {v[0] + o.v[0], v[1] + o.v[1], v[2] + o.v[2]}; }
    Vec3 operator-(const Vec3& o) const { return {v[0] - o.v[0], v[1] - o.v[1], v[2] - o.v[2]}; }
    Vec3 operator*(const T& s) const { return {v[0] * s, v[1] * s, v[2] * s}; }
    Vec3 operator-() const { return {-v[0], -v[1], -v[2]}; }

    static Vec3 unit(int i)
    {
        Vec3 e;
        e.v = {T(0), T(0), T(0)};
        e.v[i] = T(1);
        return e;
    }
    static Vec3 zero() { return {T(0), T(0), T(0)}; }
};

template <class T>
inline T dot(const Vec3<T>& a, const Vec3<T>& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
inline Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b)
{
    return {a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

// Row-major 3x3 matrix.
template <class T>
struct Mat3 {
    std::array<T, 9> m{};

    T&       operator()(int i, int j) { return m[3 * i + j]; }
    const T& operator()(int i, int j) const { return m[3 * i + j]; }

    Mat3 operator+(const Mat3& o) const
    {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const
    {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat3 operator*(const T& s) const
    {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] * s;
        return r;
    }
    Mat3 operator-() const
    {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = -m[i];
        return r;
    }

    Vec3<T> operator*(const Vec3<T>& x) const
    {
        Vec3<T> r;
        for (int i = 0; i < 3; ++i)
            r[i] = (*this)(i, 0) * x[0] + (*this)(i, 1) * x[1] + (*this)(i, 2) * x[2];
        return r;
    }

    static Mat3 identity()
    {
        Mat3 r;
        r(0, 0) = r(1, 1) = r(2, 2) = T(1);
        return r;
    }
    static Mat3 zero() { return Mat3{}; }
};

template <class T>
inline Mat3<T> transpose(const Mat3<T>& a)
{
    Mat3<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
    return r;
}

template <class T>
inline T trace(const Mat3<T>& a)
{
    return a(0, 0) + a(1, 1) + a(2, 2);
}

template <class T>
inline Mat3<T> outer(const Vec3<T>& a, const Vec3<T>& b)
{
    Mat3<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

// Frobenius pairing a : b.
template <class T>
inline T ddot(const Mat3<T>& a, const Mat3<T>& b)
{
    T s(0);
    for (int i = 0; i < 9; ++i) s += a.m[i] * b.m[i];
    return s;
}

template <class T>
inline Mat3<T> sym_part(const Mat3<T>& a)
{
    Mat3<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = (a(i, j) + a(j, i)) / T(2);
    return r;
}

template <class T>
inline Mat3<T> skw_part(const Mat3<T>& a)
{
    Mat3<T> r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = (a(i, j) - a(j, i)) / T(2);
    return r;
}

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using Vec3q = Vec3<Rational>;
using Mat3q = Mat3<Rational>;

} // namespace elastweak
