#include <catch2/catch_amalgamated.hpp>

#include "elastweak/assembly.hpp"
#include "elastweak/solver.hpp"

using namespace elastweak;

namespace {

TetMesh reference_tet()
{
    return finalize_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{{0, 1, 2, 3}}});
}

} // namespace

TEST_CASE("isotropic compliance basics", "[assembly]")
{
    // lambda = 0, mu = 1/2 makes the compliance the identity on M
    Material m{0.0, 0.5, nullptr};
    Mat3d s;
    for (int i = 0; i < 9; ++i) s.m[i] = double(i) - 4.0;
    auto r = m.apply({0, 0, 0}, s);
    for (int i = 0; i < 9; ++i) CHECK(r.m[i] == Catch::Approx(s.m[i]));

    // large-lambda limit stays bounded on the identity:
    // A(delta) = 1/(2mu) (1 - 3 lambda/(2mu+3lambda)) delta = 1/(2mu+3lambda) delta
    Material big{1e6, 1.0, nullptr};
    auto rid = big.apply({0, 0, 0}, Mat3d::identity());
    CHECK(rid(0, 0) == Catch::Approx(1.0 / (2.0 + 3e6)).epsilon(1e-8));
    CHECK(rid(0, 1) == 0.0);
    Material huge{1e12, 1.0, nullptr};
    CHECK(std::abs(huge.apply({0, 0, 0}, Mat3d::identity())(0, 0)) < 1e-11);

    CHECK_THROWS_AS(validate_material(Material{1.0, 0.0, nullptr}), std::invalid_argument);
    CHECK_THROWS_AS(validate_material(Material{-1.0, 1.0, nullptr}), std::invalid_argument);

    // general compliance path: SPD check rejects a non-symmetric map
    Material bad;
    bad.general = [](const Vec3d&, const Mat3d& x) {
        Mat3d r = x;
        r(0, 1) += 2.0 * x(1, 0);
        return r;
    };
    CHECK_THROWS_AS(validate_material(bad), std::invalid_argument);
}

TEST_CASE("compliance block equals the stress mass for unit compliance", "[assembly]")
{
    auto mesh = reference_tet();
    FESpace<double> sigma(mesh, {Family::P, 1, 2, Values::vector});
    auto a = assemble_compliance_block(sigma, Material{0.0, 0.5, nullptr}, 4);
    auto mass = assemble_mass_block(FESpace<Rational>(mesh, {Family::P, 1, 2, Values::vector}));
    auto A = to_dense(a, sigma.ndofs(), sigma.ndofs());
    auto M = to_dense(mass, sigma.ndofs(), sigma.ndofs());
    CHECK((A - M).cwiseAbs().maxCoeff() < 1e-13 * M.cwiseAbs().maxCoeff());

    // SPD: 36x36 with positive eigenvalues
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("divergence block", "[assembly]")
{
    auto mesh = build_box_mesh(1);
    FESpace<Rational> sigma(mesh, {Family::P, 1, 2, Values::vector});
    FESpace<Rational> vh(mesh, {Family::P, 0, 3, Values::vector});
    auto b = assemble_div_block(sigma, vh);

    // a divergence-free member (constant 2-form) is in the kernel of B
    PolyForm<Rational> w(3, 2, Values::vector);
    for (int alt = 0; alt < 3; ++alt)
        for (int c = 0; c < 3; ++c) w.at(alt, c) = Poly<Rational>(Rational(alt - c));
    auto coeffs = sigma.interpolate(w);
    std::vector<Rational> Bx(vh.ndofs(), Rational(0));
    for (auto& [r, c, v] : b) Bx[r] += v * coeffs[c];
    for (auto& x : Bx) CHECK(x == 0);

    // full row rank: the divergence is onto the displacement space
    CHECK(matrix_rank(to_ratmat(b, vh.ndofs(), sigma.ndofs())) == vh.ndofs());
    CHECK(vh.ndofs() == 18);
}

TEST_CASE("skew block", "[assembly]")
{
    auto mesh = reference_tet();
    FESpace<Rational> sigma(mesh, {Family::P, 1, 2, Values::vector});
    FESpace<Rational> qh(mesh, {Family::P, 0, 3, Values::skew});
    auto cblk = assemble_skw_block(sigma, qh);

    // symmetric constant stress pairs to zero with every multiplier
    MatField<Rational> sym;
    sym(0, 0) = Poly<Rational>(Rational(2));
    sym(0, 1) = sym(1, 0) = Poly<Rational>(Rational(1));
    sym(2, 2) = Poly<Rational>(Rational(-3));
    auto cs = sigma.interpolate(as_twoform(sym));
    std::vector<Rational> Cx(qh.ndofs(), Rational(0));
    for (auto& [r, c, v] : cblk) Cx[r] += v * cs[c];
    for (auto& x : Cx) CHECK(x == 0);

    // skew constant field against the matching multiplier: 2 |T|
    MatField<Rational> skw;
    skw(0, 1) = Poly<Rational>(Rational(-1));
    skw(1, 0) = Poly<Rational>(Rational(1)); // cross_matrix(e3)
    auto xs = sigma.interpolate(as_twoform(skw));
    PolyForm<Rational> qf(3, 3, Values::skew);
    qf.at(0, 2) = Poly<Rational>(Rational(1)); // axial e3 constant
    auto yq = qh.interpolate(qf);
    Rational pairing(0);
    for (auto& [r, c, v] : cblk) pairing += yq[r] * v * xs[c];
    CHECK(pairing == Rational(2) / Rational(6)); // 2 |T|, |T| = 1/6
}

TEST_CASE("stacked coupling has full row rank", "[assembly]")
{
    auto mesh = build_box_mesh(1);
    FESpace<Rational> sigma(mesh, {Family::P, 1, 2, Values::vector});
    FESpace<Rational> vh(mesh, {Family::P, 0, 3, Values::vector});
    FESpace<Rational> qh(mesh, {Family::P, 0, 3, Values::skew});
    auto b = assemble_div_block(sigma, vh);
    auto c = assemble_skw_block(sigma, qh);
    MatQ G(vh.ndofs() + qh.ndofs(), sigma.ndofs());
    for (auto& [r, cc, v] : b) G(r, cc) += v;
    for (auto& [r, cc, v] : c) G(vh.ndofs() + r, cc) += v;
    CHECK(matrix_rank(G) == 36);
}

TEST_CASE("load moments", "[assembly]")
{
    auto mesh = build_box_mesh(2);
    FESpace<double> vh(mesh, {Family::P, 0, 3, Values::vector});

    auto zero = assemble_load(vh, [](const Vec3d&) { return Vec3d{0, 0, 0}; }, 3);
    CHECK(zero.norm() == 0.0);

    // pairing with the coefficients of the constant field e1 integrates f . e1
    auto rhs = assemble_load(vh, [](const Vec3d&) { return Vec3d{1, 0, 0}; }, 3);
    PolyForm<Rational> e1(3, 3, Values::vector);
    e1.at(0, 0) = Poly<Rational>(Rational(1));
    auto cf = FESpace<Rational>(mesh, {Family::P, 0, 3, Values::vector}).interpolate(e1);
    double total = 0;
    for (int i = 0; i < vh.ndofs(); ++i) total += to_double(cf[i]) * rhs[i];
    CHECK(total == Catch::Approx(1.0)); // volume of the unit cube
}

TEST_CASE("boundary displacement moments", "[assembly]")
{
    auto mesh = build_box_mesh(1);
    FESpace<double> sigma(mesh, {Family::P, 1, 2, Values::vector});
    FESpace<Rational> sigq(mesh, {Family::P, 1, 2, Values::vector});

    // constant stress proxy
    MatField<Rational> f0;
    f0(0, 0) = Poly<Rational>(Rational(1));
    f0(1, 2) = Poly<Rational>(Rational(3));
    f0(2, 2) = Poly<Rational>(Rational(-2));
    auto x0 = sigq.interpolate(as_twoform(f0));

    // constant g: the closed-surface normal integral vanishes
    auto rc = assemble_boundary_displacement(sigma, [](const Vec3d&) { return Vec3d{1, 2, 3}; }, 4);
    double v0 = 0;
    for (int i = 0; i < sigma.ndofs(); ++i) v0 += to_double(x0[i]) * rc[i];
    CHECK(v0 == Catch::Approx(0.0).margin(1e-12));

    // g = x: the divergence theorem gives tr(F0) |Omega|
    auto rx = assemble_boundary_displacement(sigma, [](const Vec3d& x) { return x; }, 4);
    double v1 = 0;
    for (int i = 0; i < sigma.ndofs(); ++i) v1 += to_double(x0[i]) * rx[i];
    CHECK(v1 == Catch::Approx(-1.0)); // tr(F0) = 1 + 0 - 2
}

TEST_CASE("assembled system symmetry and zero blocks", "[assembly]")
{
    auto mesh = build_box_mesh(1);
    FESpace<double> sh(mesh, {Family::P, 1, 2, Values::vector});
    FESpace<double> vh(mesh, {Family::P, 0, 3, Values::vector});
    FESpace<double> qh(mesh, {Family::P, 0, 3, Values::skew});
    auto sys = assemble_system({sh, vh, qh}, Material{1.0, 1.0, nullptr},
                               [](const Vec3d&) { return Vec3d{0, 0, 1}; });
    Eigen::MatrixXd M(sys.mat);
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // lower-right 2x2 block panel is exactly zero
    CHECK(M.block(sys.n_sigma, sys.n_sigma, sys.n_u + sys.n_p, sys.n_u + sys.n_p).cwiseAbs().maxCoeff() == 0.0);
    // rhs zero in first and third blocks
    CHECK(sys.rhs.head(sys.n_sigma).norm() == 0.0);
    CHECK(sys.rhs.tail(sys.n_p).norm() == 0.0);
    CHECK(sys.rhs.segment(sys.n_sigma, sys.n_u).norm() > 0.0);
}
