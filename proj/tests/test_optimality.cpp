#include <doctest.h>

#include <cmath>

#include "parocs/experiments.hpp"
#include "parocs/optimality.hpp"

using namespace parocs;

namespace {

NegCurvatureConfig small_config() {
    NegCurvatureConfig cfg;
    cfg.nx = 16;
    cfg.nt = 16;
    cfg.samples = 40;
    return cfg;
}

}  // namespace

TEST_CASE("projection clamps, is idempotent and 1-Lipschitz") {
    NegCurvatureConfig cfg = small_config();
    ProblemSpec ps = build_neg_curvature(cfg);
    Rng rng(3);
    Field f = Field::interval(ps.grid());
    for (auto& v : f.values()) v = 3.0 * rng.normal();
    Field pf = project_admissible(ps, f);
    CHECK(is_feasible(ps, pf));
    Field ppf = project_admissible(ps, pf);
    CHECK(norm(ppf - pf, NormKind::Linf) == 0.0);

    Field above = Field::constant(ps.grid(), Role::interval, 2.0);
    CHECK(norm(project_admissible(ps, above) - ps.upper(), NormKind::Linf) == 0.0);

    for (auto p : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
        Field h = Field::interval(ps.grid());
        for (auto& v : h.values()) v = 3.0 * rng.normal();
        Field ph = project_admissible(ps, h);
        CHECK(norm(pf - ph, p) <= norm(f - h, p) * (1 + 1e-12));
    }
}

TEST_CASE("vi_gap closed forms") {
    NegCurvatureConfig cfg = small_config();
    ProblemSpec ps = build_neg_curvature(cfg);
    const Grid& g = ps.grid();
    Field zero_rho = Field::interval(g);

    Field d1 = Field::constant(g, Role::interval, 1.0);
    Field u_b = ps.upper();
    CHECK(vi_gap(ps, d1, zero_rho, u_b) ==
          doctest::Approx((cfg.u_hi - cfg.u_lo) * g.measure()));

    Field u_a = ps.lower();
    CHECK(vi_gap(ps, d1, zero_rho, u_a) == 0.0);

    Rng rng(8);
    for (int s = 0; s < 5; ++s) {
        Field d = Field::interval(g);
        for (auto& v : d.values()) v = rng.normal();
        Field u = Field::interval(g);
        for (auto& v : u.values()) v = rng.uniform();
        CHECK(vi_gap(ps, d, zero_rho, u) >= 0.0);
    }

    Field infeasible = Field::constant(g, Role::interval, 5.0);
    CHECK_THROWS_AS(vi_gap(ps, d1, zero_rho, infeasible), ConfigError);
}

TEST_CASE("phi_residual vanishes on a solved point and grows linearly off it") {
    NegCurvatureConfig cfg = small_config();
    ProblemSpec ps = build_neg_curvature(cfg);
    SolveOpts opts;
    OcpResult sol = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              ps.midpoint_control(), opts);
    REQUIRE(sol.converged);
    PhiResidual r0 = phi_residual(ps, sol.psi);
    CHECK(norm(r0.xi_res, NormKind::Linf) <= 1e-10);
    CHECK(norm(r0.eta_res, NormKind::Linf) <= 1e-10);
    CHECK(r0.gap <= 1e-10);

    Field bump = Field::sample(ps.grid(), Role::nodal, [](SpacePoint x, double t) {
        return std::sin(3.14159 * x[0]) * t;
    });
    Triple p1{sol.psi.y + 0.1 * bump, sol.psi.p, sol.psi.u};
    Triple p2{sol.psi.y + 0.2 * bump, sol.psi.p, sol.psi.u};
    const double n1 = norm(phi_residual(ps, p1).xi_res, NormKind::L2);
    const double n2 = norm(phi_residual(ps, p2).xi_res, NormKind::L2);
    CHECK(n1 > 0.0);
    // the state equation residual is affine in y up to the f-nonlinearity
    CHECK(n2 / n1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("metrics: symmetry, identity, triangle inequality") {
    Grid g = make_grid(1, 8, 8, 1.0, 1.0);
    Rng rng(12);
    auto random_triple = [&] {
        Triple t{Field::nodal(g), Field::nodal(g), Field::interval(g)};
        for (auto& v : t.y.values()) v = rng.normal();
        for (auto& v : t.p.values()) v = rng.normal();
        for (auto& v : t.u.values()) v = rng.normal();
        return t;
    };
    Triple a = random_triple(), b = random_triple(), c = random_triple();
    CHECK(metric_dY(a, a) == 0.0);
    CHECK(metric_dY(a, b) == metric_dY(b, a));
    CHECK(metric_dY(a, c) <= metric_dY(a, b) + metric_dY(b, c) + 1e-12);

    Perturbation za, zb;
    za.xi = Field::interval(g);
    zb.xi = Field::interval(g);
    for (auto& v : za.xi->values()) v = rng.normal();
    for (auto& v : zb.xi->values()) v = rng.normal();
    za.rho = Field::interval(g);
    zb.rho = Field::interval(g);
    for (auto& v : za.rho->values()) v = rng.normal();
    CHECK(metric_dZ(za, za) == 0.0);
    CHECK(metric_dZ(za, zb) == metric_dZ(zb, za));
}

TEST_CASE("conditional gradient reaches the bang-bang optimum") {
    NegCurvatureConfig cfg = small_config();
    ProblemSpec ps = build_neg_curvature(cfg);
    SolveOpts opts;
    opts.tol = 1e-10;
    opts.max_iters = 50;
    OcpResult res = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              ps.midpoint_control(), opts);
    CHECK(res.converged);
    CHECK(norm(res.psi.u - ps.lower(), NormKind::L1) <= 1e-8);
    CHECK(res.gap <= 1e-10);
    // objective decreases monotonically along the log
    for (std::size_t i = 1; i < res.log.size(); ++i)
        CHECK(res.log[i].J <= res.log[i - 1].J + 1e-12);

    CHECK_THROWS_AS(solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              Field::constant(ps.grid(), Role::interval, 7.0), opts),
                    ConfigError);
}

TEST_CASE("projected gradient decreases the objective monotonically") {
    NegCurvatureConfig cfg = small_config();
    ProblemSpec ps = build_neg_curvature(cfg);
    SolveOpts opts;
    opts.tol = 1e-8;
    opts.max_iters = 100;
    OcpResult res = solve_ocp(ps, nullptr, OcpMethod::projected_gradient,
                              ps.midpoint_control(), opts);
    CHECK(res.converged);
    CHECK(norm(res.psi.u - ps.lower(), NormKind::L1) <= 1e-6);
    for (std::size_t i = 1; i < res.log.size(); ++i)
        CHECK(res.log[i].J <= res.log[i - 1].J + 1e-12);
}

TEST_CASE("tikhonov fixed point with a dominant regularizer projects zero") {
    Grid g = make_grid(1, 8, 8, 1.0, 1.0);
    std::vector<double> y0(g.n_space(), 0.0);
    auto zero = [](SpacePoint, double, double) { return 0.0; };
    ProblemSpec ps(g, 1.0, zero, zero, zero,
                   [](SpacePoint, double, double y) { return y; },
                   [](SpacePoint, double, double) { return 1.0; }, zero, 0.0,
                   Field::interval(g), y0, Field::constant(g, Role::interval, -1.0),
                   Field::constant(g, Role::interval, 1.0));
    SolveOpts opts;
    opts.tikhonov_lambda = 1e6;
    opts.tol = 1e-12;
    opts.max_iters = 200;
    OcpResult res = solve_ocp(ps, nullptr, OcpMethod::tikhonov_fixed_point,
                              ps.midpoint_control(), opts);
    CHECK(res.converged);
    CHECK(norm(res.psi.u, NormKind::Linf) <= 1e-5);

    SolveOpts bad;
    bad.tikhonov_lambda = 0.0;
    CHECK_THROWS_AS(solve_ocp(ps, nullptr, OcpMethod::tikhonov_fixed_point,
                              ps.midpoint_control(), bad),
                    ConfigError);
}

TEST_CASE("cone membership honors sign, support and growth conditions") {
    NegCurvatureConfig cfg = small_config();
    ProblemSpec ps = build_neg_curvature(cfg);
    SolveOpts opts;
    OcpResult sol = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              ps.midpoint_control(), opts);
    PointData ubar = prepare_point(ps, sol.psi.u);

    Field zero = Field::interval(ps.grid());
    for (ConeKind kind : {ConeKind::D, ConeKind::G, ConeKind::E, ConeKind::C})
        CHECK(cone_membership(ps, ubar, zero, {0.5, kind}).member);

    // ubar is the lower bound; negative directions violate the sign condition
    Field neg = Field::constant(ps.grid(), Role::interval, -1.0);
    ConeResult r = cone_membership(ps, ubar, neg, {0.5, ConeKind::D});
    CHECK_FALSE(r.member);
    CHECK(r.violated.find("sign") != std::string::npos);

    // a nonnegative direction supported on {|d| <= tau} is in D^tau
    const double tau = 0.5;
    Rng rng(77);
    Field good = Field::interval(ps.grid());
    for (std::size_t i = 0; i < good.values().size(); ++i)
        good.values()[i] = std::abs(ubar.d.values()[i]) <= tau ? rng.uniform() : 0.0;
    CHECK(cone_membership(ps, ubar, good, {tau, ConeKind::D}).member);

    // membership is invariant under positive scaling
    for (double s : {0.25, 4.0}) {
        Field sv = s * good;
        CHECK(cone_membership(ps, ubar, sv, {tau, ConeKind::D}).member);
        CHECK(cone_membership(ps, ubar, sv, {tau, ConeKind::G}).member ==
              cone_membership(ps, ubar, good, {tau, ConeKind::G}).member);
        CHECK(cone_membership(ps, ubar, sv, {tau, ConeKind::E}).member ==
              cone_membership(ps, ubar, good, {tau, ConeKind::E}).member);
    }
}

TEST_CASE("check_struct closed forms") {
    Grid g = make_grid(1, 64, 16, 1.0, 1.0);
    std::vector<double> eps_grid;
    for (int i = 0; i <= 120; ++i)
        eps_grid.push_back(std::pow(10.0, -4.0 + 3.0 * i / 120.0));

    Field xf = Field::sample(g, Role::interval,
                             [](SpacePoint x, double) { return x[0]; });
    CheckReport on_x = check_struct(xf, eps_grid);
    CHECK(on_x.constant_hat >= 0.9);
    CHECK(on_x.constant_hat <= 1.0 + 1e-12);
    CHECK_FALSE(on_x.flag);

    Field one = Field::constant(g, Role::interval, 1.0);
    CheckReport on_one = check_struct(one, eps_grid);
    CHECK(on_one.constant_hat == 0.0);

    Field zero = Field::interval(g);
    CheckReport on_zero = check_struct(zero, eps_grid);
    CHECK(on_zero.flag);
}

TEST_CASE("one-cell bump ratio matches the closed form") {
    NegCurvatureConfig cfg = small_config();
    ProblemSpec ps = build_neg_curvature(cfg);
    SolveOpts opts;
    OcpResult sol = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              ps.midpoint_control(), opts);
    PointData ubar = prepare_point(ps, sol.psi.u);
    const Grid& g = ps.grid();
    const double w = g.weight();
    const int k = 5, j = 7;
    const double h = 0.75;
    Field u = ubar.u;
    u.at(k, j) += h;
    Field v = u - ubar.u;
    const double ratio = ubar.j1(v) / std::pow(norm(v, NormKind::L1), 2);
    CHECK(ratio == doctest::Approx(ubar.d.at(k, j) / (h * w)).epsilon(1e-12));
}

TEST_CASE("growth and A_k checkers are positive on the monotone example") {
    NegCurvatureConfig cfg = small_config();
    ProblemSpec ps = build_neg_curvature(cfg);
    SolveOpts opts;
    OcpResult sol = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              ps.midpoint_control(), opts);
    PointData ubar = prepare_point(ps, sol.psi.u);
    SamplerSpec sampler{60, 99, SampleFamily::mixed};

    CheckReport growth = check_growth_first(ps, ubar, sampler);
    CHECK(growth.admitted > 0);
    CHECK(growth.constant_hat > 0.0);

    CheckReport a1 = check_Ak(ps, ubar, 1, ProximityMode::A, 0.2, sampler);
    CHECK(a1.admitted > 0);
    CHECK(a1.constant_hat > 0.0);

    CheckReport b1 = check_Ak(ps, ubar, 1, ProximityMode::B, 0.1, sampler);
    CHECK(b1.admitted > 0);
    CHECK(b1.constant_hat > 0.0);

    CheckReport q1 = quadratic_growth_check(ps, ubar, 1, ProximityMode::A, 0.2, sampler);
    CHECK(q1.admitted > 0);
    CHECK(q1.constant_hat > 0.0);
}

TEST_CASE("quadratic growth constant of the exact tracking toy is one half") {
    // linear state, L0 = (y - y_d)^2/2 with y_d the state of the reference:
    // J(u) - J(ubar) = ||y_u - ybar||^2/2 exactly, so the k = 2 ratio is 1/2
    LqToy toy = build_lq_toy(12, 12);
    Field ubar_ctl = toy.u_dagger;
    PointData ubar = prepare_point(toy.ps, ubar_ctl);
    SamplerSpec sampler{40, 5, SampleFamily::mixed};
    CheckReport q2 = quadratic_growth_check(toy.ps, ubar, 2, ProximityMode::A, 1e9, sampler);
    CHECK(q2.admitted > 0);
    CHECK(q2.min_ratio == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(q2.max_ratio == doctest::Approx(0.5).epsilon(1e-10));
}
