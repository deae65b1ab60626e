#include <doctest.h>

#include <cmath>

#include "parocs/config.hpp"
#include "parocs/expr.hpp"

using namespace parocs;

TEST_CASE("expression parsing and evaluation") {
    Expr e = Expr::parse("exp(y) + 2*x - t/2 + sin(pi*x)");
    const double v = e.eval({0.5, 0.0}, 1.0, 0.0);
    CHECK(v == doctest::Approx(1.0 + 1.0 - 0.5 + 1.0));

    CHECK(Expr::parse("x^2").eval({3.0, 0.0}, 0, 0) == doctest::Approx(9.0));
    CHECK(Expr::parse("-x + 4").eval({1.0, 0.0}, 0, 0) == doctest::Approx(3.0));
    CHECK(Expr::parse("abs(x - 1)").eval({0.25, 0.0}, 0, 0) == doctest::Approx(0.75));
    CHECK(Expr::parse("cos(0)").eval({0, 0}, 0, 0) == doctest::Approx(1.0));
    CHECK(Expr::parse("x2 + x").eval({1.0, 2.0}, 0, 0) == doctest::Approx(3.0));
}

TEST_CASE("malformed expressions carry the position") {
    try {
        Expr::parse("exp(");
        FAIL("expected ExprError");
    } catch (const ExprError& e) {
        CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
    CHECK_THROWS_AS(Expr::parse("2 +"), ExprError);
    CHECK_THROWS_AS(Expr::parse("foo(x)"), ExprError);
    CHECK_THROWS_AS(Expr::parse("x $ y"), ExprError);
    CHECK_THROWS_AS(Expr::parse("(x"), ExprError);
}

TEST_CASE("symbolic y-derivatives") {
    Expr f = Expr::parse("exp(y)*y + sin(y) - x*t");
    Expr fy = f.d_dy();
    Expr fyy = fy.d_dy();
    for (double y : {-1.0, 0.0, 0.7}) {
        const double expect_fy = std::exp(y) * (y + 1) + std::cos(y);
        const double expect_fyy = std::exp(y) * (y + 2) - std::sin(y);
        CHECK(fy.eval({0.3, 0.0}, 0.2, y) == doctest::Approx(expect_fy));
        CHECK(fyy.eval({0.3, 0.0}, 0.2, y) == doctest::Approx(expect_fyy));
    }
    // powers with constant exponents differentiate, y-dependent ones do not
    CHECK(Expr::parse("y^3").d_dy().eval({0, 0}, 0, 2.0) == doctest::Approx(12.0));
    CHECK_THROWS_AS(Expr::parse("2^y").d_dy(), ConfigError);
}

TEST_CASE("config parses presets and builds problems") {
    RunConfig cfg = RunConfig::load("presets/neg_curvature.json");
    CHECK(cfg.name == "neg-curvature");
    CHECK(cfg.grid.nx == 64);
    CHECK(cfg.seed == 42);
    cfg.override_grid(8, 8);
    ProblemSpec ps = cfg.build_problem();
    CHECK(ps.grid().nx == 8);
    CHECK(ps.m() == 0.0);
    CHECK(ps.g().at(0, 0) == doctest::Approx(1.0 / 8));

    RunConfig tracking = RunConfig::load("presets/tracking.json");
    tracking.override_grid(8, 8);
    ProblemSpec tps = tracking.build_problem();
    // tracking target is the state of the zero control: cost at it is zero
    CHECK(eval_J(tps, tps.lower()) == doctest::Approx(0.0));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(RunConfig::load("no_such_preset"), ConfigError);
    json doc;
    doc["problem"] = {{"grid", {{"nx", 8}, {"nt", 8}}}, {"f", "exp("}};
    CHECK_THROWS_AS(RunConfig::from_json(doc), ExprError);
    json doc2;
    CHECK_THROWS_AS(RunConfig::from_json(doc2), ConfigError);
    // division by zero in a coefficient is caught by the evaluation probe
    json doc3;
    doc3["problem"] = {{"grid", {{"nx", 8}, {"nt", 8}}}, {"g", "1/(x - x)"}};
    CHECK_THROWS_AS(RunConfig::from_json(doc3), ConfigError);
}

TEST_CASE("field JSON round trip") {
    Grid g = make_grid(1, 6, 4, 2.0, 1.5);
    Rng rng(5);
    Field f = Field::interval(g);
    for (auto& v : f.values()) v = rng.normal();
    Field back = field_from_json(field_to_json(f));
    CHECK(back.role() == f.role());
    CHECK(norm(back - f, NormKind::Linf) == 0.0);
}

TEST_CASE("format_double round-trips and CSV has the expected header") {
    CHECK(std::stod(format_double(0.1)) == 0.1);
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    Grid g = make_grid(1, 4, 2, 1.0, 1.0);
    Field f = Field::interval(g);
    const std::string csv = field_to_csv(f);
    CHECK(csv.rfind("i,j,x,t,value\n", 0) == 0);
}
