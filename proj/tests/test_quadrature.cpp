#include <catch2/catch_amalgamated.hpp>

#include "elastweak/quadrature.hpp"
#include "elastweak/polynomial.hpp"

#include <random>

using namespace elastweak;

TEST_CASE("simplex quadrature integrates monomial oracles", "[quadrature]")
{
    // reference tet: volume 1/6 and first moment 1/24
    auto r2 = simplex_quadrature(3, 2);
    double vol = 0, mx = 0;
    for (size_t q = 0; q < r2.size(); ++q) {
        vol += r2.weights[q];
        mx += r2.weights[q] * r2.points[q][0];
    }
    CHECK(vol == Catch::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(mx == Catch::Approx(1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("weights positive, rejection of unsupported degree", "[quadrature]")
{
    for (int dim = 1; dim <= 3; ++dim)
        for (int deg = 0; deg <= 10; ++deg) {
            auto r = simplex_quadrature(dim, deg);
            for (double w : r.weights) CHECK(w > 0);
        }
    CHECK_THROWS(simplex_quadrature(3, 11));
    CHECK_THROWS(simplex_quadrature(0, 2));
}

TEST_CASE("random polynomials against the exact rational integral", "[quadrature]")
{
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> coef(-9, 9);
    for (int dim = 1; dim <= 3; ++dim)
        for (int deg = 0; deg <= 10; ++deg) {
            Poly<Rational> p;
            for (int a = 0; a <= deg; ++a)
                for (int b = 0; b + a <= (dim > 1 ? deg : 0); ++b)
                    for (int c = 0; c + b + a <= (dim > 2 ? deg : 0); ++c) {
                        if (dim < 2 && b > 0) continue;
                        if (dim < 3 && c > 0) continue;
                        if (a + b + c > deg) continue;
                        Monomial m;
                        m.e = {uint8_t(a), uint8_t(b), uint8_t(c)};
                        p.add_term(m, Rational(coef(rng)));
                    }
            Rational exact = integrate_unit_simplex(p, dim);
            auto pd = p.cast<double>();
            auto rule = simplex_quadrature(dim, deg);
            double num = 0;
            for (size_t q = 0; q < rule.size(); ++q)
                num += rule.weights[q] * pd.evaluate(rule.points[q].v);
            CHECK(num == Catch::Approx(to_double(exact)).margin(1e-14));
        }
}

TEST_CASE("mapped quadrature carries the Jacobian", "[quadrature]")
{
    auto rule = simplex_quadrature(2, 2);
    // a triangle of area 3 in a tilted plane
    std::vector<Vec3d> tri{{0, 0, 0}, {3, 0, 0}, {0, 2, 2}};
    auto mq = map_quadrature(rule, tri);
    double area = 0;
    for (double w : mq.weights) area += w;
    CHECK(area == Catch::Approx(0.5 * 3.0 * std::sqrt(8.0)));
}
