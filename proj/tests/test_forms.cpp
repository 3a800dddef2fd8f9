#include <catch2/catch_amalgamated.hpp>

#include "elastweak/forms.hpp"

using namespace elastweak;

namespace {

PolyForm<Rational> basis_form(int dim, int k, int alt)
{
    PolyForm<Rational> w(dim, k, Values::scalar);
    w.at(alt, 0) = Poly<Rational>(Rational(1));
    return w;
}

} // namespace

TEST_CASE("wedge of coordinate one-forms", "[forms]")
{
    // dx ^ dy evaluated on (e1, e2) is 1
    auto dx = basis_form(3, 1, 0);
    auto dy = basis_form(3, 1, 1);
    auto w = wedge(dx, dy);
    auto val = evaluate(w, Vec3q::zero(), {Vec3q::unit(0), Vec3q::unit(1)});
    CHECK(val[0] == 1);

    // dx ^ dx = 0
    CHECK(wedge(dx, dx).is_zero());

    // degree overflow rejected
    auto vol = basis_form(3, 3, 0);
    CHECK_THROWS(wedge(vol, dx));
}

TEST_CASE("wedge graded anticommutativity for scalar forms", "[forms]")
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto w = random_form<Rational>(rng, 3, 1, Values::scalar, 3);
        auto m = random_form<Rational>(rng, 3, 1, Values::scalar, 3);
        auto lhs = wedge(w, m);
        auto rhs = wedge(m, w);
        CHECK((lhs + rhs).is_zero()); // k = l = 1: w^m = -m^w
    }
}

TEST_CASE("wedge bilinearity", "[forms]")
{
    std::mt19937_64 rng(77);
    auto a = random_form<Rational>(rng, 3, 1, Values::scalar, 2);
    auto b = random_form<Rational>(rng, 3, 1, Values::scalar, 2);
    auto m = random_form<Rational>(rng, 3, 2, Values::scalar, 2);
    auto lhs = wedge(a + b, m);
    auto rhs = wedge(a, m) + wedge(b, m);
    CHECK((lhs - rhs).is_zero());
}

TEST_CASE("koszul differential on basis forms", "[forms]")
{
    // kappa(dx^dy) = x dy - y dx
    auto w = koszul(basis_form(3, 2, 0));
    PolyForm<Rational> want(3, 1, Values::scalar);
    want.at(1, 0) = Poly<Rational>::monomial(0);            // x dy
    want.at(0, 0) = Poly<Rational>::monomial(1) * Rational(-1); // -y dx
    CHECK((w - want).is_zero());

    // kappa(dx) = x
    auto k1 = koszul(basis_form(3, 1, 0));
    CHECK(k1.at(0, 0) == Poly<Rational>::monomial(0));

    // kappa on 0-forms rejected
    CHECK_THROWS(koszul(basis_form(3, 0, 0)));
}

TEST_CASE("koszul composes to zero", "[forms]")
{
    // kappa(kappa(dx^dy^dz)) = 0, and exhaustively over random forms
    CHECK(koszul(koszul(basis_form(3, 3, 0))).is_zero());
    std::mt19937_64 rng(5);
    for (int k = 2; k <= 3; ++k)
        for (int trial = 0; trial < 10; ++trial) {
            auto w = random_form<Rational>(rng, 3, k, Values::vector, 4);
            CHECK(koszul(koszul(w)).is_zero());
        }
}

TEST_CASE("exterior derivative basics", "[forms]")
{
    // d(x^2) = 2x dx
    PolyForm<Rational> f(3, 0, Values::scalar);
    Monomial x2;
    x2.e = {2, 0, 0};
    f.at(0, 0).add_term(x2, Rational(1));
    auto df = ext_d(f);
    PolyForm<Rational> want(3, 1, Values::scalar);
    want.at(0, 0) = Poly<Rational>::monomial(0) * Rational(2);
    CHECK((df - want).is_zero());

    // d on 3-forms rejected
    CHECK_THROWS(ext_d(basis_form(3, 3, 0)));
}

TEST_CASE("d compose d vanishes", "[forms]")
{
    std::mt19937_64 rng(11);
    for (int k = 0; k <= 1; ++k)
        for (int trial = 0; trial < 10; ++trial) {
            auto w = random_form<Rational>(rng, 3, k, Values::skew, 4);
            CHECK(ext_d(ext_d(w)).is_zero());
        }
}

TEST_CASE("d and koszul over the full monomial basis up to degree 6", "[forms]")
{
    // exhaustive d.d = 0 and kappa.kappa = 0 on scalar monomial basis forms
    for (int k = 0; k <= 3; ++k)
        for (int alt = 0; alt < n_alt(3, k); ++alt)
            for (int a = 0; a <= 6; ++a)
                for (int b = 0; a + b <= 6; ++b)
                    for (int c = 0; a + b + c <= 6; ++c) {
                        PolyForm<Rational> w(3, k, Values::scalar);
                        Monomial m;
                        m.e = {uint8_t(a), uint8_t(b), uint8_t(c)};
                        w.at(alt, 0).add_term(m, Rational(1));
                        if (k <= 1) CHECK(ext_d(ext_d(w)).is_zero());
                        if (k >= 2) CHECK(koszul(koszul(w)).is_zero());
                    }
}

TEST_CASE("Leibniz rule", "[forms]")
{
    std::mt19937_64 rng(13);
    for (auto [k, l] : {std::pair{0, 1}, {1, 1}, {0, 2}, {2, 0}}) {
        for (int trial = 0; trial < 8; ++trial) {
            auto w = random_form<Rational>(rng, 3, k, Values::scalar, 3);
            auto m = random_form<Rational>(rng, 3, l, Values::scalar, 3);
            auto lhs = ext_d(wedge(w, m));
            auto rhs = wedge(ext_d(w), m) + wedge(w, ext_d(m)) * Rational(k % 2 == 0 ? 1 : -1);
            CHECK((lhs - rhs).is_zero());
        }
    }
}

TEST_CASE("homotopy formula of the Koszul complex", "[forms]")
{
    // (d kappa + kappa d) w = (r + k) w on homogeneous degree-r k-forms
    for (int k = 1; k <= 2; ++k) {
        PolyForm<Rational> w(3, k, Values::scalar);
        Monomial m;
        m.e = {1, 2, 0}; // degree 3
        w.at(0, 0).add_term(m, Rational(1));
        auto lhs = ext_d(koszul(w)) + koszul(ext_d(w));
        CHECK((lhs - w * Rational(3 + k)).is_zero());
    }
}

TEST_CASE("pullback respects composition and degree", "[forms]")
{
    std::mt19937_64 rng(17);
    auto w = random_form<Rational>(rng, 3, 2, Values::vector, 3);

    // restriction to a plane chart u -> v0 + u0 a + u1 b
    Vec3q v0{Rational(1), Rational(0), Rational(2)};
    std::vector<Vec3q> cols{{Rational(1), Rational(1), Rational(0)}, {Rational(0), Rational(2), Rational(1)}};
    auto tr = pullback(w, v0, cols);
    REQUIRE(tr.dim == 2);
    REQUIRE(tr.deg == 2);

    // evaluation compatibility: tr_u(e0, e1) = w_{x(u)}(a, b)
    Vec3q u{Rational(1, 3), Rational(1, 5), Rational(0)};
    Vec3q x = v0 + cols[0] * u[0] + cols[1] * u[1];
    auto lhs = evaluate(tr, u, {Vec3q::unit(0), Vec3q::unit(1)});
    auto rhs = evaluate(w, x, {cols[0], cols[1]});
    for (int c = 0; c < 3; ++c) CHECK(lhs[c] == rhs[c]);
}

TEST_CASE("pullback commutes with d", "[forms]")
{
    std::mt19937_64 rng(19);
    Vec3q v0{Rational(1, 2), Rational(-1), Rational(0)};
    std::vector<Vec3q> cols{{Rational(2), Rational(0), Rational(1)},
                            {Rational(0), Rational(1), Rational(1)},
                            {Rational(1), Rational(1), Rational(0)}};
    for (int k = 0; k <= 2; ++k) {
        auto w = random_form<Rational>(rng, 3, k, Values::scalar, 3);
        auto lhs = ext_d(pullback(w, v0, cols));
        auto rhs = pullback(ext_d(w), v0, cols);
        CHECK((lhs - rhs).is_zero());
    }
}

TEST_CASE("exact simplex integration", "[forms]")
{
    // volume of reference tet and the first moment
    Monomial one{}; // 1
    CHECK(simplex_monomial_integral<Rational>(one, 3) == Rational(1, 6));
    Monomial mx;
    mx.e = {1, 0, 0};
    CHECK(simplex_monomial_integral<Rational>(mx, 3) == Rational(1, 24));
    // triangle area
    CHECK(simplex_monomial_integral<Rational>(one, 2) == Rational(1, 2));
}
