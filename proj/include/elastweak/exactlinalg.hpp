// Dense exact linear algebra over the rationals: Gauss solves for the dual
// basis construction, fraction-free Bareiss elimination for ranks, and
// nullspace extraction for the constrained reduced spaces.

#pragma once

#include <stdexcept>
#include <vector>

#include "elastweak/scalar.hpp"

namespace elastweak {

template <class T>
class DenseMat {
public:
    DenseMat() = default;
    DenseMat(int rows, int cols) : r_(rows), c_(cols), a_(size_t(rows) * cols, T(0)) {}

    int rows() const { return r_; }
    int cols() const { return c_; }
    T&       operator()(int i, int j) { return a_[size_t(i) * c_ + j]; }
    const T& operator()(int i, int j) const { return a_[size_t(i) * c_ + j]; }

private:
    int r_ = 0, c_ = 0;
    std::vector<T> a_;
};

using MatQ = DenseMat<Rational>;

// Row-echelon rank by plain Gaussian elimination (exact field arithmetic).
template <class T>
int echelon_rank(DenseMat<T> m)
{
    int rank = 0;
    for (int col = 0; col < m.cols() && rank < m.rows(); ++col) {
        int piv = -1;
        for (int r = rank; r < m.rows(); ++r)
            if (!(m(r, col) == T(0))) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        if (piv != rank)
            for (int j = col; j < m.cols(); ++j) std::swap(m(piv, j), m(rank, j));
        for (int r = rank + 1; r < m.rows(); ++r) {
            if (m(r, col) == T(0)) continue;
            T f = m(r, col) / m(rank, col);
            for (int j = col; j < m.cols(); ++j) m(r, j) -= f * m(rank, j);
        }
        ++rank;
    }
    return rank;
}

// Solve A X = I for square exact A; throws if singular.
template <class T>
DenseMat<T> invert(DenseMat<T> a)
{
    if (a.rows() != a.cols()) throw std::invalid_argument("invert: not square");
    const int n = a.rows();
    DenseMat<T> inv(n, n);
    for (int i = 0; i < n; ++i) inv(i, i) = T(1);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!(a(r, col) == T(0))) {
                piv = r;
                break;
            }
        if (piv < 0) throw std::runtime_error("invert: singular matrix");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        T p = a(col, col);
        for (int j = 0; j < n; ++j) {
            a(col, j) /= p;
            inv(col, j) /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || a(r, col) == T(0)) continue;
            T f = a(r, col);
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

// Basis of the (right) nullspace, one column per kernel vector.
template <class T>
DenseMat<T> nullspace(DenseMat<T> m)
{
    const int rows = m.rows(), cols = m.cols();
    std::vector<int> pivot_col;
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int piv = -1;
        for (int r = rank; r < rows; ++r)
            if (!(m(r, col) == T(0))) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        if (piv != rank)
            for (int j = 0; j < cols; ++j) std::swap(m(piv, j), m(rank, j));
        T p = m(rank, col);
        for (int j = 0; j < cols; ++j) m(rank, j) /= p;
        for (int r = 0; r < rows; ++r) {
            if (r == rank || m(r, col) == T(0)) continue;
            T f = m(r, col);
            for (int j = 0; j < cols; ++j) m(r, j) -= f * m(rank, j);
        }
        pivot_col.push_back(col);
        ++rank;
    }
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivot_col) is_pivot[c] = true;

    DenseMat<T> ker(cols, cols - rank);
    int kcol = 0;
    for (int free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        ker(free, kcol) = T(1);
        for (int r = 0; r < rank; ++r) ker(pivot_col[r], kcol) = -m(r, free);
        ++kcol;
    }
    return ker;
}

// Fraction-free Bareiss rank over the integers; rows are pre-scaled by the
// lcm of denominators so pivots stay integral.
inline int bareiss_rank(const MatQ& mq)
{
    const int rows = mq.rows(), cols = mq.cols();
    std::vector<std::vector<BigInt>> a(rows, std::vector<BigInt>(cols));
    for (int i = 0; i < rows; ++i) {
        BigInt l(1);
        for (int j = 0; j < cols; ++j) l = boost::multiprecision::lcm(l, denominator(mq(i, j)));
        for (int j = 0; j < cols; ++j)
            a[i][j] = numerator(mq(i, j)) * (l / denominator(mq(i, j)));
    }
    int rank = 0;
    BigInt prev(1);
    for (int col = 0; col < cols && rank < rows; ++col) {
        int piv = -1;
        for (int r = rank; r < rows; ++r)
            if (a[r][col] != 0) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        if (piv != rank) std::swap(a[piv], a[rank]);
        for (int r = rank + 1; r < rows; ++r) {
            for (int j = col + 1; j < cols; ++j)
                a[r][j] = (a[rank][col] * a[r][j] - a[r][col] * a[rank][j]) / prev;
            a[r][col] = 0;
        }
        prev = a[rank][col];
        ++rank;
    }
    return rank;
}

} // namespace elastweak
