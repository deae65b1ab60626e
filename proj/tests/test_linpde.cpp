#include <doctest.h>

#include <cmath>

#include "parocs/linpde.hpp"
#include "parocs/rng.hpp"

using namespace parocs;

namespace {

constexpr double kPi = 3.14159265358979323846;

Field random_interval(const Grid& g, Rng& rng) {
    Field f = Field::interval(g);
    for (auto& v : f.values()) v = rng.normal();
    return f;
}

Field random_nodal(const Grid& g, Rng& rng) {
    Field f = Field::nodal(g);
    for (auto& v : f.values()) v = rng.normal();
    return f;
}

}  // namespace

TEST_CASE("assembled stencil rows for unit coefficient") {
    Grid g = make_grid(1, 4, 2, 1.0, 1.0);
    EllipticOperator op = assemble_operator(g, 1.0);
    std::vector<double> e1 = {0.0, 1.0, 0.0};
    std::vector<double> r = op.apply(e1);
    CHECK(r[0] == doctest::Approx(-16.0));
    CHECK(r[1] == doctest::Approx(32.0));
    CHECK(r[2] == doctest::Approx(-16.0));
}

TEST_CASE("operator rejects nonpositive coefficients") {
    Grid g = make_grid(1, 4, 2, 1.0, 1.0);
    CHECK_THROWS_AS(assemble_operator(g, 0.0), ConfigError);
    CHECK_THROWS_AS(
        assemble_operator(g, Coefficient([](SpacePoint x) { return x[0] - 0.4; })),
        ConfigError);
}

TEST_CASE("discrete Laplacian approximates pi^2 sin on refinement") {
    double prev_err = 0.0;
    for (int nx : {16, 32}) {
        Grid g = make_grid(1, nx, 1, 1.0, 1.0);
        EllipticOperator op = assemble_operator(g, 1.0);
        std::vector<double> y(g.n_space());
        for (int k = 0; k < g.n_space(); ++k) y[k] = std::sin(kPi * g.point(k)[0]);
        std::vector<double> ay = op.apply(y);
        double err = 0.0;
        for (int k = 0; k < g.n_space(); ++k)
            err = std::max(err, std::abs(ay[k] - kPi * kPi * y[k]));
        if (prev_err > 0) CHECK(prev_err / err > 3.5);  // order 2
        prev_err = err;
    }
}

TEST_CASE("constant field feels the operator only near the boundary") {
    Grid g = make_grid(1, 8, 1, 1.0, 1.0);
    EllipticOperator op = assemble_operator(g, 1.0);
    std::vector<double> c(g.n_space(), 3.0);
    std::vector<double> r = op.apply(c);
    for (int k = 1; k + 1 < g.n_space(); ++k) CHECK(r[k] == doctest::Approx(0.0));
    CHECK(r[0] > 0.0);
    CHECK(r[g.n_space() - 1] > 0.0);
}

TEST_CASE("zero data gives the zero solution") {
    Grid g = make_grid(1, 8, 8, 1.0, 1.0);
    EllipticOperator op = assemble_operator(g, 1.0);
    Field alpha = Field::nodal(g);
    std::vector<double> y0(g.n_space(), 0.0);
    Field y = solve_linear_forward(op, alpha, Field::interval(g), y0);
    CHECK(norm(y, NormKind::Linf) == 0.0);
    Field p = solve_linear_backward(op, alpha, Field::nodal(g));
    CHECK(norm(p, NormKind::Linf) == 0.0);
}

TEST_CASE("forward/backward duality is exact") {
    Grid g = make_grid(1, 8, 8, 1.0, 1.0);
    EllipticOperator op = assemble_operator(g, 1.0);
    Rng rng(2024);
    std::vector<double> y0(g.n_space(), 0.0);
    for (int trial = 0; trial < 5; ++trial) {
        Field alpha = Field::nodal(g);
        for (auto& a : alpha.values()) a = rng.uniform(0.0, 5.0);
        Field u = random_interval(g, rng);
        Field r = random_nodal(g, rng);
        Field y = solve_linear_forward(op, alpha, u, y0);
        Field p = solve_linear_backward(op, alpha, r);
        const double lhs = inner(state_on_intervals(y), state_on_intervals(r));
        const double rhs = inner(u, adjoint_on_intervals(p));
        const double scale = norm(u, NormKind::L2) * norm(r, NormKind::L2);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + scale));
    }
}

TEST_CASE("backward solver vanishes at the terminal level exactly") {
    Grid g = make_grid(1, 8, 8, 1.0, 1.0);
    EllipticOperator op = assemble_operator(g, 1.0);
    Rng rng(5);
    Field r = random_nodal(g, rng);
    Field p = solve_linear_backward(op, Field::nodal(g), r);
    for (int k = 0; k < g.n_space(); ++k) CHECK(p.at(k, g.nt) == 0.0);
}

TEST_CASE("comparison principle: nonnegative data give nonnegative solutions") {
    Grid g = make_grid(1, 16, 16, 1.0, 1.0);
    EllipticOperator op = assemble_operator(g, 1.0);
    Rng rng(11);
    Field alpha = Field::nodal(g);
    for (auto& a : alpha.values()) a = rng.uniform(0.0, 10.0);
    Field u = random_interval(g, rng);
    for (auto& v : u.values()) v = std::abs(v);
    std::vector<double> y0(g.n_space());
    for (auto& v : y0) v = rng.uniform(0.0, 1.0);
    Field y = solve_linear_forward(op, alpha, u, y0);
    for (double v : y.values()) CHECK(v >= 0.0);

    Field r = random_nodal(g, rng);
    for (auto& v : r.values()) v = std::abs(v);
    Field p = solve_linear_backward(op, alpha, r);
    for (double v : p.values()) CHECK(v >= 0.0);
}

TEST_CASE("increasing alpha does not increase a nonnegative solution") {
    Grid g = make_grid(1, 16, 16, 1.0, 1.0);
    EllipticOperator op = assemble_operator(g, 1.0);
    Rng rng(13);
    Field u = random_interval(g, rng);
    for (auto& v : u.values()) v = std::abs(v);
    std::vector<double> y0(g.n_space(), 0.0);
    Field alpha1 = Field::nodal(g);
    for (auto& a : alpha1.values()) a = rng.uniform(0.0, 3.0);
    Field alpha2 = 10.0 * alpha1;
    Field y1 = solve_linear_forward(op, alpha1, u, y0);
    Field y2 = solve_linear_forward(op, alpha2, u, y0);
    for (std::size_t i = 0; i < y1.values().size(); ++i)
        CHECK(y2.values()[i] <= y1.values()[i] + 1e-14);
}

TEST_CASE("manufactured solution t*sin(pi x) leaves only the spatial error") {
    // y* = t sin(pi x), a = 1, alpha = 0, forcing sin(pi x)(1 + pi^2 t)
    // read at the implicit level; y* is linear in t
    for (int nx : {32, 64}) {
        Grid g = make_grid(1, nx, 16, 1.0, 1.0);
        EllipticOperator op = assemble_operator(g, 1.0);
        Field rhs = Field::sample(g, Role::interval, [&](SpacePoint x, double t) {
            return std::sin(kPi * x[0]) * (1.0 + kPi * kPi * t);
        });
        std::vector<double> y0(g.n_space(), 0.0);
        Field y = solve_linear_forward(op, Field::nodal(g), rhs, y0);
        double err = 0.0;
        for (int j = 1; j <= g.nt; ++j)
            for (int k = 0; k < g.n_space(); ++k)
                err = std::max(err, std::abs(y.at(k, j) -
                                             j * g.dt * std::sin(kPi * g.point(k)[0])));
        CHECK(err < 4.0 / (nx * nx));
    }
}

TEST_CASE("bound ratio sweep is stable under refinement") {
    BoundRatioReport coarse = bound_ratio_sweep(make_grid(1, 32, 32, 1.0, 1.0), 100, 42);
    BoundRatioReport fine = bound_ratio_sweep(make_grid(1, 64, 64, 1.0, 1.0), 100, 42);
    CHECK(coarse.samples == 100);
    CHECK(coarse.degenerate == 0);
    CHECK(coarse.max_l2_ratio > 0.0);
    CHECK(fine.max_l2_ratio / coarse.max_l2_ratio < 2.0);
    CHECK(coarse.max_l2_ratio / fine.max_l2_ratio < 2.0);
    CHECK(fine.max_smoothing_ratio / coarse.max_smoothing_ratio < 2.0);
    CHECK(coarse.max_smoothing_ratio / fine.max_smoothing_ratio < 2.0);
}

TEST_CASE("2D duality and positivity") {
    Grid g = make_grid(2, 8, 6, 1.0, 1.0);
    EllipticOperator op = assemble_operator(g, 1.0);
    Rng rng(17);
    Field alpha = Field::nodal(g);
    for (auto& a : alpha.values()) a = rng.uniform(0.0, 5.0);
    Field u = random_interval(g, rng);
    Field r = random_nodal(g, rng);
    std::vector<double> y0(g.n_space(), 0.0);
    Field y = solve_linear_forward(op, alpha, u, y0);
    Field p = solve_linear_backward(op, alpha, r);
    const double lhs = inner(state_on_intervals(y), state_on_intervals(r));
    const double rhs = inner(u, adjoint_on_intervals(p));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));

    for (auto& v : u.values()) v = std::abs(v);
    Field ypos = solve_linear_forward(op, alpha, u, y0);
    for (double v : ypos.values()) CHECK(v >= 0.0);
}

TEST_CASE("2D manufactured solution t*sin(pi x)sin(pi x2)") {
    Grid g = make_grid(2, 12, 12, 1.0, 1.0);
    EllipticOperator op = assemble_operator(g, 1.0);
    Field rhs = Field::sample(g, Role::interval, [&](SpacePoint x, double t) {
        const double s = std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
        return s * (1.0 + 2.0 * kPi * kPi * t);
    });
    std::vector<double> y0(g.n_space(), 0.0);
    Field y = solve_linear_forward(op, Field::nodal(g), rhs, y0);
    double err = 0.0;
    for (int j = 1; j <= g.nt; ++j)
        for (int k = 0; k < g.n_space(); ++k) {
            const SpacePoint x = g.point(k);
            err = std::max(err, std::abs(y.at(k, j) - j * g.dt * std::sin(kPi * x[0]) *
                                                          std::sin(kPi * x[1])));
        }
    CHECK(err < 6.0 / (12 * 12));
}
