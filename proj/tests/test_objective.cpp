#include <doctest.h>

#include <cmath>

#include "parocs/objective.hpp"
#include "parocs/rng.hpp"

using namespace parocs;

namespace {

ProblemSpec exp_problem(int nx, int nt, double m = 0.0) {
    Grid g = make_grid(1, nx, nt, 1.0, 1.0);
    std::vector<double> y0(g.n_space(), 0.0);
    auto e = [](SpacePoint, double, double y) { return std::exp(y); };
    Field gf = Field::sample(g, Role::interval,
                             [](SpacePoint x, double) { return x[0]; });
    return ProblemSpec(g, 1.0, e, e, e, [](SpacePoint, double, double y) { return y; },
                       [](SpacePoint, double, double) { return 1.0; },
                       [](SpacePoint, double, double) { return 0.0; }, m, gf, y0,
                       Field::constant(g, Role::interval, 0.0),
                       Field::constant(g, Role::interval, 1.0));
}

Field random_direction(const Grid& g, std::uint64_t seed) {
    Rng rng(seed);
    Field v = Field::interval(g);
    for (auto& x : v.values()) x = rng.normal();
    return v;
}

}  // namespace

TEST_CASE("objective vanishes when the integrand does") {
    Grid g = make_grid(1, 8, 8, 1.0, 1.0);
    std::vector<double> y0(g.n_space(), 0.0);
    auto zero = [](SpacePoint, double, double) { return 0.0; };
    ProblemSpec ps(g, 1.0, zero, zero, zero, zero, zero, zero, 0.0, Field::interval(g),
                   y0, Field::constant(g, Role::interval, -1.0),
                   Field::constant(g, Role::interval, 1.0));
    CHECK(eval_J(ps, random_direction(g, 1)) == 0.0);
}

TEST_CASE("lower bound is optimal for the monotone problem") {
    ProblemSpec ps = exp_problem(16, 16);
    const double J_lo = eval_J(ps, ps.lower());
    Rng rng(2);
    for (int s = 0; s < 5; ++s) {
        Field u = Field::interval(ps.grid());
        for (auto& x : u.values()) x = rng.uniform();
        CHECK(J_lo <= eval_J(ps, u) + 1e-14);
    }
}

TEST_CASE("adjoint with zero source is zero, nonnegative source nonnegative") {
    Grid g = make_grid(1, 8, 8, 1.0, 1.0);
    std::vector<double> y0(g.n_space(), 0.0);
    auto zero = [](SpacePoint, double, double) { return 0.0; };
    ProblemSpec ps(g, 1.0, zero, zero, zero, zero, zero, zero, 0.0, Field::interval(g),
                   y0, Field::constant(g, Role::interval, 0.0),
                   Field::constant(g, Role::interval, 1.0));
    Field u = ps.midpoint_control();
    Field y = solve_state(ps, u);
    AdjointState adj = solve_adjoint(ps, u, y);
    CHECK(norm(adj.p, NormKind::Linf) == 0.0);
    for (int k = 0; k < g.n_space(); ++k) CHECK(adj.p.at(k, g.nt) == 0.0);

    ProblemSpec pos = exp_problem(8, 8);
    Field yp = solve_state(pos, pos.lower());
    AdjointState adjp = solve_adjoint(pos, pos.lower(), yp);
    for (double v : adjp.p.values()) CHECK(v >= 0.0);
}

TEST_CASE("adjoint duality against the linearized state") {
    ProblemSpec ps = exp_problem(16, 16);
    Field u = ps.midpoint_control();
    Field y = solve_state(ps, u);
    AdjointState adj = solve_adjoint(ps, u, y);
    // source of the adjoint as an interval field: L0_y + m u = 1
    Field rhs = Field::constant(ps.grid(), Role::nodal, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Field v = random_direction(ps.grid(), 100 + trial);
        Field z = solve_linearized(ps, y, v);
        const double lhs = inner(state_on_intervals(z), state_on_intervals(rhs));
        const double rho = inner(v, adjoint_on_intervals(adj.p));
        CHECK(std::abs(lhs - rho) <= 1e-12 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("hamiltonian derivative assembles p + m y + g") {
    ProblemSpec ps0 = exp_problem(8, 8);
    Field u = ps0.lower();
    Field y = solve_state(ps0, u);
    AdjointState adj = solve_adjoint(ps0, u, y);
    Field d = hamiltonian_du(ps0, y, adj.p);
    // m = 0: d == p + g at the adjoint's interval values
    for (int j = 0; j < ps0.grid().nt; ++j)
        for (int k = 0; k < ps0.grid().n_space(); ++k)
            CHECK(d.at(k, j) ==
                  doctest::Approx(adj.p.at(k, j) + ps0.g().at(k, j)).epsilon(1e-15));
    // the example's multiplier is strictly positive
    for (double v : d.values()) CHECK(v > 0.0);

    ProblemSpec ps1 = exp_problem(8, 8, 1.0);
    Field y1 = solve_state(ps1, ps1.lower());
    Field ones = Field::constant(ps1.grid(), Role::nodal, 1.0);
    Field zerop = Field::nodal(ps1.grid());
    Field d1 = hamiltonian_du(ps1, ones, zerop);
    for (int j = 0; j < ps1.grid().nt; ++j)
        for (int k = 0; k < ps1.grid().n_space(); ++k)
            CHECK(d1.at(k, j) == doctest::Approx(1.0 + ps1.g().at(k, j)));
}

TEST_CASE("the two first-variation representations agree to machine precision") {
    for (double m : {0.0, 0.7}) {
        ProblemSpec ps = exp_problem(16, 16, m);
        Rng rng(7);
        for (int trial = 0; trial < 5; ++trial) {
            Field u = Field::interval(ps.grid());
            for (auto& x : u.values()) x = rng.uniform();
            Field v = random_direction(ps.grid(), rng.next_u64());
            const double a = directional_J1(ps, u, v, J1Mode::adjoint);
            const double b = directional_J1(ps, u, v, J1Mode::linearized);
            CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a)));
        }
    }
}

TEST_CASE("first variation matches central differences") {
    ProblemSpec ps = exp_problem(24, 24, 0.5);
    Field u = ps.midpoint_control();
    Field v = random_direction(ps.grid(), 71);
    const double ref = directional_J1(ps, u, v, J1Mode::adjoint);
    double best = 1e9;
    for (double t : {1e-2, 1e-3, 1e-4}) {
        const double fd = (eval_J(ps, u + t * v) - eval_J(ps, u + (-t) * v)) / (2 * t);
        best = std::min(best, std::abs(fd - ref) / (1.0 + std::abs(ref)));
    }
    CHECK(best <= 1e-5);
}

TEST_CASE("second variation is symmetric and matches differences of J'") {
    ProblemSpec ps = exp_problem(24, 24, 0.5);
    Field u = ps.midpoint_control();
    Field v1 = random_direction(ps.grid(), 81);
    Field v2 = random_direction(ps.grid(), 82);
    const double a = second_variation(ps, u, v1, v2);
    const double b = second_variation(ps, u, v2, v1);
    CHECK(a == doctest::Approx(b).epsilon(1e-14));

    const double ref = second_variation(ps, u, v1, v1);
    double best = 1e9;
    for (double t : {1e-2, 1e-3, 1e-4}) {
        const double fd = (directional_J1(ps, u + t * v1, v1, J1Mode::adjoint) -
                           directional_J1(ps, u + (-t) * v1, v1, J1Mode::adjoint)) /
                          (2 * t);
        best = std::min(best, std::abs(fd - ref) / (1.0 + std::abs(ref)));
    }
    CHECK(best <= 1e-4);
}

TEST_CASE("second variation vanishes for an affine problem") {
    Grid g = make_grid(1, 8, 8, 1.0, 1.0);
    std::vector<double> y0(g.n_space(), 0.0);
    auto zero = [](SpacePoint, double, double) { return 0.0; };
    // f, L0 linear in y and m = 0
    ProblemSpec ps(g, 1.0, [](SpacePoint, double, double y) { return y; },
                   [](SpacePoint, double, double) { return 1.0; }, zero,
                   [](SpacePoint, double, double y) { return 2.0 * y; },
                   [](SpacePoint, double, double) { return 2.0; }, zero, 0.0,
                   Field::interval(g), y0, Field::constant(g, Role::interval, -1.0),
                   Field::constant(g, Role::interval, 1.0));
    Field v = random_direction(g, 91);
    CHECK(second_variation(ps, ps.midpoint_control(), v, v) == 0.0);
}

TEST_CASE("perturbation terms enter the objective and the adjoint") {
    ProblemSpec ps = exp_problem(12, 12);
    Field u = ps.midpoint_control();

    Perturbation z;
    z.rho = Field::constant(ps.grid(), Role::interval, 0.25);
    const double J0 = eval_J(ps, u);
    const double Jr = eval_J(ps, u, &z);
    CHECK(Jr == doctest::Approx(J0 - 0.25 * inner(Field::constant(ps.grid(), Role::interval, 1.0), u)));

    Perturbation ze;
    ze.eta_field = Field::constant(ps.grid(), Role::nodal, 0.5);
    Field y = solve_state(ps, u);
    const double Je = eval_J(ps, u, &ze);
    CHECK(Je == doctest::Approx(J0 + 0.5 * inner(Field::constant(ps.grid(), Role::nodal, 1.0), y)));

    AdjointState adj0 = solve_adjoint(ps, u, y);
    AdjointState adje = solve_adjoint(ps, u, y, &ze);
    CHECK(norm(adje.p - adj0.p, NormKind::Linf) > 0.0);
    CHECK(adje.eta_used);
}
