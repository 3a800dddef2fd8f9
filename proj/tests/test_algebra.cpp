#include <catch2/catch_amalgamated.hpp>

#include "elastweak/algebra.hpp"

using namespace elastweak;

namespace {

Mat3q random_mat(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> d(-9, 9);
    Mat3q m;
    for (int i = 0; i < 9; ++i) m.m[i] = Rational(d(rng));
    return m;
}

Vec3q random_vec(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> d(-9, 9);
    return {Rational(d(rng)), Rational(d(rng)), Rational(d(rng))};
}

VecField<Rational> random_vecfield(std::mt19937_64& rng, int deg)
{
    auto w = random_form<Rational>(rng, 3, 0, Values::vector, deg);
    return {w.at(0, 0), w.at(0, 1), w.at(0, 2)};
}

MatField<Rational> random_matfield(std::mt19937_64& rng, int deg)
{
    std::uniform_int_distribution<int> coef(-5, 5);
    MatField<Rational> f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Poly<Rational> p;
            for (int a = 0; a <= deg; ++a)
                for (int b = 0; a + b <= deg; ++b)
                    for (int c = 0; a + b + c <= deg; ++c) {
                        Monomial m;
                        m.e = {uint8_t(a), uint8_t(b), uint8_t(c)};
                        p.add_term(m, Rational(coef(rng)));
                    }
            f(i, j) = p;
        }
    return f;
}

} // namespace

TEST_CASE("axial vector of the displayed skew matrix", "[algebra]")
{
    Mat3q m;
    // [[0,-3,2],[3,0,-1],[-2,1,0]] has axial vector (1,2,3)
    m(0, 1) = -3; m(0, 2) = 2;
    m(1, 0) = 3;  m(1, 2) = -1;
    m(2, 0) = -2; m(2, 1) = 1;
    auto v = axial(m);
    CHECK(v[0] == 1);
    CHECK(v[1] == 2);
    CHECK(v[2] == 3);
}

TEST_CASE("axial and cross_matrix are mutually inverse", "[algebra]")
{
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        auto v = random_vec(rng);
        auto back = axial(cross_matrix(v));
        for (int i = 0; i < 3; ++i) CHECK(back[i] == v[i]);
        // cross_matrix(v) w = v x w
        auto w = random_vec(rng);
        auto lhs = cross_matrix(v) * w;
        auto rhs = cross(v, w);
        for (int i = 0; i < 3; ++i) CHECK(lhs[i] == rhs[i]);
    }
    // cross_matrix(e3) e1 = e2
    auto r = cross_matrix(Vec3q::unit(2)) * Vec3q::unit(0);
    CHECK(r[1] == 1);

    Mat3q not_skew;
    not_skew(0, 0) = 1;
    CHECK_THROWS(axial(not_skew));
}

TEST_CASE("trace reversal pair", "[algebra]")
{
    std::mt19937_64 rng(3);
    // identity matrix maps to -2 identity
    auto r = trace_reversal(Mat3q::identity());
    CHECK((r - Mat3q::identity() * Rational(-2)).m == Mat3q::zero().m);
    for (int t = 0; t < 100; ++t) {
        auto m = random_mat(rng);
        auto a = trace_reversal_inv(trace_reversal(m));
        auto b = trace_reversal(trace_reversal_inv(m));
        CHECK(a.m == m.m);
        CHECK(b.m == m.m);
    }
}

TEST_CASE("trace reversal against cross products", "[algebra]")
{
    // trace_reversal(F)(v1 x v2) = v2 x F v1 - v1 x F v2
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        auto f = random_mat(rng);
        auto v1 = random_vec(rng), v2 = random_vec(rng);
        auto lhs = trace_reversal(f) * cross(v1, v2);
        auto rhs = cross(v2, f * v1) - cross(v1, f * v2);
        for (int i = 0; i < 3; ++i) CHECK(lhs[i] == rhs[i]);
    }
}

TEST_CASE("cross product as skew part", "[algebra]")
{
    // a x b = -2 axial(skw(a b^T))
    auto both = [](const Vec3q& a, const Vec3q& b) {
        auto lhs = cross(a, b);
        auto rhs = axial(skw_part(outer(a, b))) * Rational(-2);
        return std::pair{lhs, rhs};
    };
    auto [l1, r1] = both(Vec3q::unit(0), Vec3q::unit(1));
    CHECK(l1[2] == 1);
    CHECK(r1[2] == 1);
    auto [l2, r2] = both({Rational(2), Rational(1), Rational(5)}, {Rational(2), Rational(1), Rational(5)});
    for (int i = 0; i < 3; ++i) {
        CHECK(l2[i] == 0);
        CHECK(r2[i] == 0);
    }
    std::mt19937_64 rng(6);
    for (int t = 0; t < 100; ++t) {
        auto a = random_vec(rng), b = random_vec(rng);
        auto [l, r] = both(a, b);
        for (int i = 0; i < 3; ++i) CHECK(l[i] == r[i]);
    }
}

TEST_CASE("position_skew at a point", "[algebra]")
{
    // applying at x = e1 to the constant 0-form e2 gives 2 skw(e1 e2^T)
    PolyForm<Rational> w(3, 0, Values::vector);
    w.at(0, 1) = Poly<Rational>(Rational(1)); // constant e2
    auto kw = position_skew(w);
    auto val = evaluate(kw, Vec3q::unit(0), {});
    Vec3q got{val[0], val[1], val[2]};
    auto want = axial(skew_pair(Vec3q::unit(0), Vec3q::unit(1)));
    for (int i = 0; i < 3; ++i) CHECK(got[i] == want[i]);

    // linear in the argument: zero maps to zero
    PolyForm<Rational> z(3, 0, Values::vector);
    CHECK(position_skew(z).is_zero());

    CHECK_THROWS(position_skew(PolyForm<Rational>(3, 0, Values::skew)));
}

TEST_CASE("coupling as commutator of d and position_skew", "[algebra]")
{
    // on a constant V-valued 0-form v:  (dK - Kd) v = S0 v with (S0 v)(v1) = skew_pair(v1, v)
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        auto v = random_vec(rng);
        PolyForm<Rational> w(3, 0, Values::vector);
        for (int c = 0; c < 3; ++c) w.at(0, c) = Poly<Rational>(v[c]);
        auto lhs = ext_d(position_skew(w)); // K d w = 0 for constants
        auto s0 = skew_coupling(w);
        CHECK((lhs - s0).is_zero());
        for (int i = 0; i < 3; ++i) {
            auto val = evaluate(s0, Vec3q::zero(), {Vec3q::unit(i)});
            auto want = axial(skew_pair(Vec3q::unit(i), v));
            for (int c = 0; c < 3; ++c) CHECK(val[c] == want[c]);
        }
    }
    // and on general polynomial forms S = dK - Kd
    for (int k = 0; k <= 1; ++k)
        for (int t = 0; t < 10; ++t) {
            auto w = random_form<Rational>(rng, 3, k, Values::vector, 3);
            auto lhs = ext_d(position_skew(w)) - position_skew(ext_d(w));
            CHECK((lhs - skew_coupling(w)).is_zero());
        }
}

TEST_CASE("coupling anticommutes with d", "[algebra]")
{
    std::mt19937_64 rng(9);
    for (int k = 0; k <= 1; ++k)
        for (int t = 0; t < 20; ++t) {
            auto w = random_form<Rational>(rng, 3, k, Values::vector, 4);
            auto lhs = ext_d(skew_coupling(w)) + skew_coupling(ext_d(w));
            CHECK(lhs.is_zero());
        }
    // adjoint variant
    for (int k = 0; k <= 1; ++k)
        for (int t = 0; t < 20; ++t) {
            auto w = random_form<Rational>(rng, 3, k, Values::skew, 4);
            auto lhs = ext_d(skew_coupling_adj(w)) + skew_coupling_adj(ext_d(w));
            CHECK(lhs.is_zero());
        }
}

TEST_CASE("adjoint pairing identity", "[algebra]")
{
    // (S w) ^ m = (-1)^k w ^ (S' m)
    std::mt19937_64 rng(10);
    for (auto [k, l] : {std::pair{0, 1}, {1, 1}, {0, 2}, {1, 0}, {2, 0}, {0, 0}}) {
        for (int t = 0; t < 10; ++t) {
            auto w = random_form<Rational>(rng, 3, k, Values::vector, 3);
            auto m = random_form<Rational>(rng, 3, l, Values::skew, 3);
            auto lhs = wedge(skew_coupling(w), m);
            auto rhs = wedge(w, skew_coupling_adj(m)) * Rational(k % 2 == 0 ? 1 : -1);
            CHECK((lhs - rhs).is_zero());
        }
    }
}

TEST_CASE("adjoint pairing holds pointwise on random vector triples", "[algebra]")
{
    std::mt19937_64 rng(42);
    for (int t = 0; t < 30; ++t) {
        auto w = random_form<Rational>(rng, 3, 1, Values::vector, 2);
        auto m = random_form<Rational>(rng, 3, 1, Values::skew, 2);
        auto lhs = wedge(skew_coupling(w), m);
        auto rhs = wedge(w, skew_coupling_adj(m)) * Rational(-1);
        auto x = random_vec(rng);
        std::vector<Vec3q> vs{random_vec(rng), random_vec(rng), random_vec(rng)};
        auto lv = evaluate(lhs, x, vs);
        auto rv = evaluate(rhs, x, vs);
        CHECK(lv[0] == rv[0]);
    }
}

TEST_CASE("degree-one coupling inverse", "[algebra]")
{
    std::mt19937_64 rng(12);
    for (int t = 0; t < 100; ++t) {
        auto w = random_form<Rational>(rng, 3, 1, Values::vector, 3);
        auto back = skew_coupling_inv(skew_coupling(w));
        CHECK((back - w).is_zero());
    }
    // displayed inverse formula:
    // (S1^{-1} om)(v1) x v2 . v3
    //   = 1/2 [ axial(om(v2,v3)).v1 - axial(om(v1,v2)).v3 + axial(om(v1,v3)).v2 ]
    for (int t = 0; t < 30; ++t) {
        auto om = random_form<Rational>(rng, 3, 2, Values::skew, 2);
        auto inv = skew_coupling_inv(om);
        auto x = random_vec(rng);
        auto v1 = random_vec(rng), v2 = random_vec(rng), v3 = random_vec(rng);
        auto iv = evaluate(inv, x, {v1});
        Rational lhs = dot(Vec3q{iv[0], iv[1], iv[2]}, cross(v2, v3));
        auto a23 = evaluate(om, x, {v2, v3});
        auto a12 = evaluate(om, x, {v1, v2});
        auto a13 = evaluate(om, x, {v1, v3});
        Rational rhs = (dot(Vec3q{a23[0], a23[1], a23[2]}, v1) - dot(Vec3q{a12[0], a12[1], a12[2]}, v3) +
                        dot(Vec3q{a13[0], a13[1], a13[2]}, v2)) /
                       Rational(2);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("matrix and form identifications", "[algebra]")
{
    std::mt19937_64 rng(14);

    // twoform proxy of the identity: mu(e1, e2) = e3
    MatField<Rational> id;
    for (int i = 0; i < 3; ++i) id(i, i) = Poly<Rational>(Rational(1));
    auto mu = as_twoform(id);
    auto val = evaluate(mu, Vec3q::zero(), {Vec3q::unit(0), Vec3q::unit(1)});
    CHECK(val[0] == 0);
    CHECK(val[1] == 0);
    CHECK(val[2] == 1);

    for (int t = 0; t < 100; ++t) {
        auto f = random_matfield(rng, 2);
        // round trips
        CHECK((oneform_to_matrix(as_oneform(f)) - f).is_zero());
        CHECK((twoform_to_matrix(as_twoform(f)) - f).is_zero());
        CHECK((oneform_axial_to_matrix(as_oneform_axial(f)) - f).is_zero());
        CHECK((twoform_axial_to_matrix(as_twoform_axial(f)) - f).is_zero());
    }

    // the master identification: twoform_axial^{-1} S1 oneform = trace_reversal
    for (int t = 0; t < 100; ++t) {
        auto f = random_matfield(rng, 0);
        auto lhs = twoform_axial_to_matrix(skew_coupling(as_oneform(f)));
        Mat3q fm = f.evaluate(Vec3q::zero());
        auto want = trace_reversal(fm);
        auto got = lhs.evaluate(Vec3q::zero());
        CHECK(got.m == want.m);
    }
}

TEST_CASE("proxy dictionary for d", "[algebra]")
{
    std::mt19937_64 rng(15);
    for (int t = 0; t < 20; ++t) {
        auto f = random_matfield(rng, 3);
        // d on the V-valued 2-form proxy is the row-wise divergence
        auto d2 = ext_d(as_twoform(f));
        auto u = threeform_to_vector(d2);
        auto divf = div_rows(f);
        for (int c = 0; c < 3; ++c) CHECK((u[c] - divf[c]).is_zero());

        // d on the K-valued 0-form (axial vector u) is the row-wise gradient proxy
        auto uf = random_vecfield(rng, 3);
        PolyForm<Rational> p(3, 0, Values::skew);
        for (int c = 0; c < 3; ++c) p.at(0, c) = uf[c];
        auto d0 = ext_d(p); // K-valued 1-form
        auto grad_proxy = oneform_axial_to_matrix(d0);
        auto g = grad_field(uf);
        CHECK((grad_proxy - g).is_zero());
    }
}

TEST_CASE("degree-two coupling is minus twice the skew part", "[algebra]")
{
    std::mt19937_64 rng(16);
    for (int t = 0; t < 20; ++t) {
        auto f = random_matfield(rng, 2);
        auto s2 = skew_coupling(as_twoform(f)); // K-valued 3-form
        // 3-form identification: value p with om(v1,v2,v3) = p (v1 x v2 . v3)
        auto want = skw_field(f);
        for (int c = 0; c < 3; ++c) {
            // axial coords of -2 skw f
            auto ax_c = [&](int cc) {
                if (cc == 0) return want(2, 1) * Rational(-2);
                if (cc == 1) return want(0, 2) * Rational(-2);
                return want(1, 0) * Rational(-2);
            };
            CHECK((s2.at(0, c) - ax_c(c)).is_zero());
        }
    }
}

TEST_CASE("curl-based second order operator annihilates strains", "[algebra]")
{
    std::mt19937_64 rng(18);
    for (int t = 0; t < 20; ++t) {
        auto u = random_vecfield(rng, 4);
        auto eps = sym_field(grad_field(u));
        CHECK(curl_curl(eps).is_zero());
    }
    // divergence free image on symmetric inputs
    for (int t = 0; t < 20; ++t) {
        auto f = sym_field(random_matfield(rng, 4));
        auto j = curl_curl(f);
        auto d = div_rows(j);
        for (int c = 0; c < 3; ++c) CHECK(d[c].is_zero());
    }
    // vanishes on skew fields
    for (int t = 0; t < 10; ++t) {
        auto u = random_vecfield(rng, 4);
        MatField<Rational> skewf;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) skewf(i, j) = Poly<Rational>();
        // cross_matrix with polynomial entries
        skewf(0, 1) = -u[2]; skewf(0, 2) = u[1];
        skewf(1, 0) = u[2];  skewf(1, 2) = -u[0];
        skewf(2, 0) = -u[1]; skewf(2, 1) = u[0];
        CHECK(curl_curl(skewf).is_zero());
    }
}
