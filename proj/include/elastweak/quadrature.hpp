// Positive-weight quadrature on reference simplices (interval, triangle,
// tetrahedron) by conical products of Gauss-Jacobi rules.  A rule built for
// polynomial degree p integrates every polynomial of total degree <= p
// exactly; weights sum to the simplex volume 1/d!.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "elastweak/smallmat.hpp"

namespace elastweak {

struct QuadratureRule {
    std::vector<Vec3d> points; // chart coordinates; unused components zero
    std::vector<double> weights;
    int dim = 0;
    int degree = 0;

    size_t size() const { return points.size(); }
};

namespace detail {

// Gauss-Jacobi nodes/weights on [0,1] for the weight (1-x)^alpha, beta = 0.
inline void gauss_jacobi01(int n, int alpha, std::vector<double>& x, std::vector<double>& w)
{
    const double a = alpha, b = 0.0, ab = a + b;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        double diag;
        if (k == 0)
            diag = (b - a) / (ab + 2.0);
        else
            diag = (b * b - a * a) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0));
        J(k, k) = diag;
        if (k >= 1) {
            double num = 4.0 * k * (k + a) * (k + b) * (k + ab);
            double den = std::pow(2.0 * k + ab, 2) * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0);
            double off = std::sqrt(num / den);
            J(k, k - 1) = J(k - 1, k) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
                       std::tgamma(ab + 2.0);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double xi = es.eigenvalues()(i);       // node in [-1,1]
        double v0 = es.eigenvectors()(0, i);   // first eigenvector component
        x[i] = 0.5 * (xi + 1.0);
        // transport the weight function (1-x)^alpha from [-1,1] to [0,1]
        w[i] = mu0 * v0 * v0 / std::pow(2.0, ab + 1.0);
    }
}

} // namespace detail

/// Rule on the unit simplex of dimension `dim` exact for total degree `degree`.
inline QuadratureRule simplex_quadrature(int dim, int degree)
{
    if (dim < 1 || dim > 3) throw std::invalid_argument("simplex_quadrature: dim must be 1..3");
    if (degree < 0 || degree > 10)
        throw std::invalid_argument("simplex_quadrature: unsupported degree " + std::to_string(degree));
    const int n = degree / 2 + 1; // Gauss rule with n points is exact through 2n-1

    std::vector<std::vector<double>> xs(dim), ws(dim);
    for (int d = 0; d < dim; ++d)
        detail::gauss_jacobi01(n, dim - 1 - d, xs[d], ws[d]);

    QuadratureRule rule;
    rule.dim = dim;
    rule.degree = degree;

    // collapsed coordinates: x_d = xi_d * prod_{e<d} (1 - xi_e)
    std::vector<int> idx(dim, 0);
    while (true) {
        Vec3d p = Vec3d::zero();
        double w = 1.0, shrink = 1.0;
        for (int d = 0; d < dim; ++d) {
            double xi = xs[d][idx[d]];
            p[d] = xi * shrink;
            shrink *= (1.0 - xi);
            w *= ws[d][idx[d]];
        }
        rule.points.push_back(p);
        rule.weights.push_back(w);
        int d = dim - 1;
        while (d >= 0 && ++idx[d] == n) idx[d--] = 0;
        if (d < 0) break;
    }
    return rule;
}

/// Quadrature mapped to the physical simplex spanned by `verts` (dim+1 points);
/// weights carry the absolute Jacobian (volume factor).
struct MappedQuadrature {
    std::vector<Vec3d> points;
    std::vector<double> weights;
};

inline MappedQuadrature map_quadrature(const QuadratureRule& rule, const std::vector<Vec3d>& verts)
{
    const int d = rule.dim;
    if (static_cast<int>(verts.size()) != d + 1)
        throw std::invalid_argument("map_quadrature: vertex count mismatch");
    std::vector<Vec3d> cols(d);
    for (int j = 0; j < d; ++j) cols[j] = verts[j + 1] - verts[0];
    double jac;
    if (d == 1)
        jac = std::sqrt(dot(cols[0], cols[0]));
    else if (d == 2) {
        auto c = cross(cols[0], cols[1]);
        jac = std::sqrt(dot(c, c));
    } else
        jac = std::abs(dot(cols[0], cross(cols[1], cols[2])));

    MappedQuadrature mq;
    mq.points.reserve(rule.size());
    mq.weights.reserve(rule.size());
    for (size_t q = 0; q < rule.size(); ++q) {
        Vec3d p = verts[0];
        for (int j = 0; j < d; ++j) p = p + cols[j] * rule.points[q][j];
        mq.points.push_back(p);
        mq.weights.push_back(rule.weights[q] * jac);
    }
    return mq;
}

} // namespace elastweak
