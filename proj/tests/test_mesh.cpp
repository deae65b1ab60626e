#include <doctest.h>

#include <cmath>

#include "parocs/mesh.hpp"
#include "parocs/rng.hpp"

using namespace parocs;

TEST_CASE("make_grid derives spacings") {
    Grid g = make_grid(1, 4, 2, 1.0, 1.0);
    CHECK(g.dx == doctest::Approx(0.25));
    CHECK(g.dt == doctest::Approx(0.5));
    CHECK(g.n_space() == 3);

    Grid fine = make_grid(1, 64, 128, 1.0, 1.0);
    CHECK(fine.dx == doctest::Approx(1.0 / 64));
    CHECK(fine.dt == doctest::Approx(1.0 / 128));

    Grid minimal = make_grid(1, 2, 1, 1.0, 1.0);
    CHECK(minimal.n_space() == 1);
    CHECK(minimal.nt == 1);
}

TEST_CASE("make_grid rejects bad input") {
    CHECK_THROWS_AS(make_grid(3, 4, 2, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(1, 1, 2, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(1, 4, 0, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(1, 4, 2, -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(1, 4, 2, 1.0, 0.0), ConfigError);
}

TEST_CASE("norms of simple fields") {
    Grid g = make_grid(1, 8, 4, 1.0, 1.0);

    Field zero = Field::interval(g);
    CHECK(norm(zero, NormKind::L1) == 0.0);
    CHECK(norm(zero, NormKind::L2) == 0.0);
    CHECK(norm(zero, NormKind::Linf) == 0.0);

    // constant field: L1 equals |c| times the summed weights
    const double c = -2.0;
    Field cf = Field::constant(g, Role::interval, c);
    double wsum = 0.0;
    for (int j = 0; j < g.nt; ++j)
        for (int k = 0; k < g.n_space(); ++k) wsum += g.weight();
    CHECK(norm(cf, NormKind::L1) == doctest::Approx(std::abs(c) * wsum).epsilon(1e-14));
    CHECK(wsum == doctest::Approx((g.nx - 1) * g.dx * g.horizon));

    Field spike = Field::interval(g);
    spike.at(2, 1) = 5.0;
    CHECK(norm(spike, NormKind::Linf) == 5.0);
}

TEST_CASE("nodal norms skip the initial level") {
    Grid g = make_grid(1, 4, 3, 1.0, 1.0);
    Field f = Field::nodal(g);
    for (int k = 0; k < g.n_space(); ++k) f.at(k, 0) = 100.0;
    CHECK(norm(f, NormKind::Linf) == 0.0);
    CHECK(norm(f, NormKind::L1) == 0.0);
}

TEST_CASE("inner product matches hand computation and the L2 norm") {
    Grid g = make_grid(1, 2, 3, 1.0, 1.0);
    Field f = Field::interval(g), h = Field::interval(g);
    f.at(0, 0) = 1;
    f.at(0, 1) = 2;
    f.at(0, 2) = 3;
    h.at(0, 0) = 4;
    h.at(0, 1) = 5;
    h.at(0, 2) = 6;
    const double w = g.dx * g.dt;
    CHECK(inner(f, h) == doctest::Approx(w * (4 + 10 + 18)).epsilon(1e-15));
    CHECK(inner(f, Field::interval(g)) == 0.0);
    CHECK(inner(f, f) == norm(f, NormKind::L2) * norm(f, NormKind::L2));

    Field nodal = Field::nodal(g);
    CHECK_THROWS_AS(inner(f, nodal), ConfigError);
}

TEST_CASE("measure_below counts whole cells") {
    Grid g = make_grid(1, 8, 4, 1.0, 1.0);
    Field one = Field::constant(g, Role::interval, 1.0);
    CHECK(measure_below(one, 0.5) == 0.0);

    Field zero = Field::interval(g);
    CHECK(measure_below(zero, 0.0) == doctest::Approx(g.measure()));

    // f(x,t) = x on (0,1)x(0,1): nodes below 0.25 are {1/8, 2/8}
    Field xf = Field::sample(g, Role::interval,
                             [](SpacePoint x, double) { return x[0]; });
    double expected = 0.0;
    for (int j = 0; j < g.nt; ++j)
        for (int k = 0; k < g.n_space(); ++k)
            if (g.point(k)[0] <= 0.25) expected += g.weight();
    CHECK(measure_below(xf, 0.25) == doctest::Approx(expected));
    CHECK(expected == doctest::Approx(0.25 * g.horizon));
}

TEST_CASE("measure_below is monotone and bounded") {
    Grid g = make_grid(1, 16, 8, 2.0, 1.5);
    Rng rng(99);
    Field f = Field::interval(g);
    for (auto& v : f.values()) v = rng.normal();
    double prev = 0.0;
    for (double eps : {0.0, 0.1, 0.5, 1.0, 2.0, 10.0}) {
        const double m = measure_below(f, eps);
        CHECK(m >= prev);
        CHECK(m <= g.measure() + 1e-15);
        prev = m;
    }
    CHECK(measure_below(f, 1e9) == doctest::Approx(g.measure()));
}

TEST_CASE("norm homogeneity and Hoelder chain") {
    Grid g = make_grid(1, 16, 8, 1.0, 1.0);
    Rng rng(7);
    Field f = Field::interval(g);
    for (auto& v : f.values()) v = rng.normal();

    // power-of-two scalings commute with rounding, so equality is exact
    for (double c : {2.0, 0.5, -4.0}) {
        CHECK(norm(c * f, NormKind::L1) == std::abs(c) * norm(f, NormKind::L1));
        CHECK(norm(c * f, NormKind::Linf) == std::abs(c) * norm(f, NormKind::Linf));
    }
    const double c = 1.7;
    CHECK(norm(c * f, NormKind::L2) ==
          doctest::Approx(c * norm(f, NormKind::L2)).epsilon(1e-14));

    const double q = g.measure();
    CHECK(norm(f, NormKind::L1) <=
          std::sqrt(q) * norm(f, NormKind::L2) * (1 + 1e-12));
    CHECK(norm(f, NormKind::L2) <=
          std::sqrt(q) * norm(f, NormKind::Linf) * (1 + 1e-12));
    CHECK(norm(f, NormKind::L1) <= q * norm(f, NormKind::Linf) * (1 + 1e-12));
}

TEST_CASE("2D grid bookkeeping") {
    Grid g = make_grid(2, 4, 2, 1.0, 1.0);
    CHECK(g.n_space() == 9);
    CHECK(g.weight() == doctest::Approx(0.25 * 0.25 * 0.5));
    SpacePoint p = g.point(4);  // center node
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    Field f = Field::constant(g, Role::interval, 1.0);
    CHECK(norm(f, NormKind::L1) == doctest::Approx(9 * 0.0625 * 1.0));
}

TEST_CASE("interval restrictions read the implicit levels") {
    Grid g = make_grid(1, 4, 3, 1.0, 1.0);
    Field y = Field::nodal(g);
    for (int j = 0; j <= g.nt; ++j)
        for (int k = 0; k < g.n_space(); ++k) y.at(k, j) = 10.0 * j + k;
    Field ys = state_on_intervals(y);
    CHECK(ys.at(1, 0) == 11.0);
    CHECK(ys.at(1, 2) == 31.0);
    Field pa = adjoint_on_intervals(y);
    CHECK(pa.at(1, 0) == 1.0);
    CHECK(pa.at(1, 2) == 21.0);
}
