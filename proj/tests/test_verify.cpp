#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "elastweak/verify.hpp"

using namespace elastweak;

TEST_CASE("identity suite passes and is deterministic", "[verify]")
{
    auto rep = run_identity_suite(7, 10);
    for (auto& c : rep.checks) {
        INFO(c.name);
        CHECK(c.pass);
        CHECK(c.deviation == 0.0);
    }
    CHECK(rep.all_pass());
    CHECK(rep.checks.size() >= 12);
}

TEST_CASE("injected sign error is caught and named", "[verify]")
{
    auto rep = run_identity_suite(7, 5, true);
    CHECK(!rep.all_pass());
    for (auto& c : rep.checks) {
        if (c.name == "identity.cross_skew")
            CHECK(!c.pass);
        else
            CHECK(c.pass);
    }
}

TEST_CASE("trig case is consistent with finite differences", "[verify]")
{
    Material mat{1.3, 0.7, nullptr};
    auto mc = manufactured_case("trig", mat);
    const double eps = 1e-6;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.1, 0.9);
    for (int t = 0; t < 10; ++t) {
        Vec3d x{uni(rng), uni(rng), uni(rng)};
        // gradient of u by central differences
        Mat3d g;
        for (int j = 0; j < 3; ++j) {
            Vec3d xp = x, xm = x;
            xp[j] += eps;
            xm[j] -= eps;
            Vec3d up = mc.u(xp), um = mc.u(xm);
            for (int i = 0; i < 3; ++i) g(i, j) = (up[i] - um[i]) / (2 * eps);
        }
        Mat3d epsu = sym_part(g);
        Mat3d sig = epsu * (2 * mat.mu);
        double tr = trace(epsu);
        for (int i = 0; i < 3; ++i) sig(i, i) += mat.lambda * tr;
        Mat3d sref = mc.stress(x);
        Mat3d rref = mc.rotation(x);
        Mat3d rskw = skw_part(g);
        for (int i = 0; i < 9; ++i) {
            CHECK(sig.m[i] == Catch::Approx(sref.m[i]).margin(5e-6));
            CHECK(rskw.m[i] == Catch::Approx(rref.m[i]).margin(5e-6));
        }
        // f = div sigma by central differences of the analytic stress
        Vec3d divs = Vec3d::zero();
        for (int j = 0; j < 3; ++j) {
            Vec3d xp = x, xm = x;
            xp[j] += eps;
            xm[j] -= eps;
            Mat3d sp = mc.stress(xp), sm = mc.stress(xm);
            for (int i = 0; i < 3; ++i) divs[i] += (sp(i, j) - sm(i, j)) / (2 * eps);
        }
        Vec3d f = mc.f(x);
        for (int i = 0; i < 3; ++i) CHECK(f[i] == Catch::Approx(divs[i]).margin(2e-4));
    }
}

TEST_CASE("manufactured boundary values", "[verify]")
{
    Material mat{1.0, 1.0, nullptr};
    for (auto id : {"trig", "poly-quadratic"}) {
        auto mc = manufactured_case(id, mat);
        CHECK(mc.zero_boundary);
        for (Vec3d x : {Vec3d{0, 0.3, 0.7}, Vec3d{1, 0.2, 0.9}, Vec3d{0.5, 0, 0.1},
                        Vec3d{0.4, 1, 0.8}, Vec3d{0.6, 0.2, 0}, Vec3d{0.3, 0.8, 1}}) {
            Vec3d u = mc.u(x);
            for (int i = 0; i < 3; ++i) CHECK(u[i] == Catch::Approx(0.0).margin(1e-14));
        }
    }

    auto lin = manufactured_case("poly-linear", mat);
    CHECK(!lin.zero_boundary);
    // stress linear: second difference along any direction vanishes
    Vec3d a{0.1, 0.2, 0.3}, d{0.25, -0.125, 0.5};
    Mat3d s0 = lin.stress(a), s1 = lin.stress(a + d), s2 = lin.stress(a + d * 2.0);
    for (int i = 0; i < 9; ++i) CHECK(s0.m[i] - 2 * s1.m[i] + s2.m[i] == Catch::Approx(0.0).margin(1e-13));
    // rotation constant
    Mat3d r0 = lin.rotation(a), r1 = lin.rotation(a + d);
    for (int i = 0; i < 9; ++i) CHECK(r0.m[i] == Catch::Approx(r1.m[i]).margin(1e-14));

    CHECK_THROWS(manufactured_case("nope", mat));
}

TEST_CASE("commuting suite on the coarse box", "[verify]")
{
    auto mesh = build_box_mesh(1);
    auto rep = run_commuting_suite(mesh, 0, 11, 5);
    for (auto& c : rep.checks) {
        INFO(c.name);
        CHECK(c.pass);
    }
    CHECK(rep.checks.size() == 5);
}

TEST_CASE("exactness suite on the coarse box", "[verify]")
{
    auto mesh = build_box_mesh(1);
    auto rep = run_exactness_suite(mesh, 0);
    for (auto& c : rep.checks) {
        INFO(c.name);
        CHECK(c.pass);
    }
}

TEST_CASE("patch test: linear stress is reproduced exactly", "[verify]")
{
    Material mat{1.0, 1.0, nullptr};
    auto mc = manufactured_case("poly-linear", mat);
    auto d = make_discretization(build_box_mesh(2), 0);
    auto e = solve_manufactured(mc, d, mat);
    CHECK(e.err_sigma <= 1e-9);
    CHECK(e.weak_symmetry <= 1e-8);
    // the rotation is constant, so it is reproduced too
    CHECK(e.err_p <= 1e-9);
}

TEST_CASE("zero data gives zero errors", "[verify]")
{
    Material mat{1.0, 1.0, nullptr};
    ManufacturedCase zero;
    zero.id = "zero";
    zero.zero_boundary = true;
    zero.u = [](const Vec3d&) { return Vec3d::zero(); };
    zero.f = [](const Vec3d&) { return Vec3d::zero(); };
    zero.stress = [](const Vec3d&) { return Mat3d::zero(); };
    zero.rotation = [](const Vec3d&) { return Mat3d::zero(); };
    auto d = make_discretization(build_box_mesh(1), 0);
    auto e = solve_manufactured(zero, d, mat);
    CHECK(e.err_sigma == 0.0);
    CHECK(e.err_div == 0.0);
    CHECK(e.err_u == 0.0);
    CHECK(e.err_p == 0.0);
}

TEST_CASE("errors decrease under refinement", "[verify]")
{
    Material mat{1.0, 1.0, nullptr};
    auto mc = manufactured_case("trig", mat);
    auto d1 = make_discretization(build_box_mesh(1), 0);
    auto d2 = make_discretization(build_box_mesh(2), 0);
    auto e1 = solve_manufactured(mc, d1, mat);
    auto e2 = solve_manufactured(mc, d2, mat);
    CHECK(e2.err_sigma < e1.err_sigma);
    CHECK(e2.err_u < e1.err_u);
    CHECK(e2.err_div < e1.err_div);
}

TEST_CASE("convergence table format", "[verify]")
{
    ConvergenceTable t;
    t.rows.push_back({1, 1.0, 10, 5, 5, 0.5, 0.4, 0.3, 0.2, 0, 0});
    t.rows.push_back({2, 0.5, 40, 20, 20, 0.25, 0.2, 0.15, 0.1, 0, 0});
    t.finalize();
    CHECK(t.rate_sigma == Catch::Approx(1.0));
    std::ostringstream os;
    t.write_csv(os);
    std::string s = os.str();
    CHECK(s.rfind("level,h,dof_sigma,dof_u,dof_p,err_sigma,err_div,err_u,err_p,"
                  "rate_sigma,rate_div,rate_u,rate_p\n", 0) == 0);
    // first row has empty rate cells
    auto line1 = s.substr(s.find('\n') + 1);
    line1 = line1.substr(0, line1.find('\n'));
    CHECK(line1.substr(line1.size() - 4) == ",,,,");

    CHECK_THROWS(convergence_study("trig", 0, {1, 2}, Material{1, 1, nullptr}));
}

TEST_CASE("stability study produces positive constants", "[verify]")
{
    auto rows = stability_study({1, 2}, 0);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].beta > 1e-3);
    CHECK(rows[1].beta > 1e-3);
    // the two coarse levels already agree to within a modest factor
    CHECK(std::abs(rows[0].beta - rows[1].beta) / rows[0].beta < 0.5);

    std::ostringstream os;
    write_stability_csv(os, rows);
    CHECK(os.str().rfind("level,h,beta\n", 0) == 0);
}
