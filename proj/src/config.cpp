#include "parocs/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "parocs/rng.hpp"

namespace parocs {

namespace {

Expr parse_field_expr(const json& problem, const char* key, const char* fallback) {
    if (!problem.contains(key)) return Expr::parse(fallback);
    const auto& v = problem.at(key);
    if (v.is_number()) return Expr::constant(v.get<double>());
    return Expr::parse(v.get<std::string>());
}

ScalarFn fn_of(const Expr& e) {
    return [e](SpacePoint x, double t, double y) { return e.eval(x, t, y); };
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
    RunConfig cfg;
    cfg.raw = doc;
    cfg.name = doc.value("name", "unnamed");
    cfg.seed = doc.value("seed", std::uint64_t{1});
    if (!doc.contains("problem")) throw ConfigError("config: missing \"problem\"");
    const json& p = doc.at("problem");
    const json& jg = p.at("grid");
    cfg.grid = make_grid(jg.value("dim", 1), jg.at("nx"), jg.at("nt"),
                         jg.value("length", 1.0), jg.value("horizon", 1.0));
    cfg.a = parse_field_expr(p, "a", "1");
    cfg.f = parse_field_expr(p, "f", "0");
    cfg.g = parse_field_expr(p, "g", "0");
    cfg.y0 = parse_field_expr(p, "y0", "0");
    cfg.u_a = parse_field_expr(p, "u_a", "0");
    cfg.u_b = parse_field_expr(p, "u_b", "1");
    cfg.m = p.value("m", 0.0);
    if (p.contains("l0") && p.at("l0").is_object()) {
        const json& l0 = p.at("l0");
        if (l0.value("kind", "") != "tracking")
            throw ConfigError("config: unknown l0 object kind");
        cfg.tracking_control = Expr::parse(l0.value("target_control", "0"));
        cfg.tracking_shift = l0.value("shift", 0.0);
    } else {
        cfg.l0_expr = parse_field_expr(p, "l0", "0");
    }
    cfg.validate_expressions();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path_or_name) {
    namespace fs = std::filesystem;
    fs::path path = path_or_name;
    if (!fs::exists(path)) {
        std::vector<fs::path> candidates;
        candidates.push_back(fs::path("presets") / (path_or_name + ".json"));
        if (const char* dir = std::getenv("PAROCS_PRESET_DIR"))
            candidates.push_back(fs::path(dir) / (path_or_name + ".json"));
        auto hit = std::find_if(candidates.begin(), candidates.end(),
                                [](const fs::path& c) { return fs::exists(c); });
        if (hit == candidates.end())
            throw ConfigError("config: cannot find '" + path_or_name + "'");
        path = *hit;
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

void RunConfig::override_grid(int nx, int nt) {
    grid = make_grid(grid.dim, nx, nt, grid.length, grid.horizon);
}

void RunConfig::validate_expressions() const {
    Rng rng(0xc0f1eULL);
    auto probe = [&](const Expr& e, const char* what) {
        for (int i = 0; i < 10; ++i) {
            SpacePoint x = {rng.uniform(0.0, grid.length), 0.0};
            if (grid.dim == 2) x[1] = rng.uniform(0.0, grid.length);
            const double v = e.eval(x, rng.uniform(0.0, grid.horizon),
                                    rng.uniform(-1.0, 1.0));
            if (!std::isfinite(v))
                throw ConfigError(std::string("config: expression for ") + what +
                                  " evaluates to a non-finite value");
        }
    };
    probe(a, "a");
    probe(f, "f");
    probe(g, "g");
    probe(y0, "y0");
    probe(u_a, "u_a");
    probe(u_b, "u_b");
    if (l0_expr) probe(*l0_expr, "l0");
    if (tracking_control) probe(*tracking_control, "target_control");
}

ProblemSpec RunConfig::build_problem() const {
    const Grid& gr = grid;
    Coefficient coeff = [e = a](SpacePoint x) { return e.eval(x, 0.0, 0.0); };
    Field g_field = Field::sample(gr, Role::interval, [e = g](SpacePoint x, double t) {
        return e.eval(x, t, 0.0);
    });
    std::vector<double> y0_vals(gr.n_space());
    for (int k = 0; k < gr.n_space(); ++k) y0_vals[k] = y0.eval(gr.point(k), 0.0, 0.0);
    Field lo = Field::sample(gr, Role::interval, [e = u_a](SpacePoint x, double t) {
        return e.eval(x, t, 0.0);
    });
    Field hi = Field::sample(gr, Role::interval, [e = u_b](SpacePoint x, double t) {
        return e.eval(x, t, 0.0);
    });
    Expr fy = f.d_dy(), fyy = fy.d_dy();

    if (!tracking_control) {
        Expr l0y = l0_expr->d_dy(), l0yy = l0y.d_dy();
        return ProblemSpec(gr, coeff, fn_of(f), fn_of(fy), fn_of(fyy), fn_of(*l0_expr),
                           fn_of(l0y), fn_of(l0yy), m, g_field, y0_vals, lo, hi);
    }

    // tracking cost: first solve the target state with the configured control
    auto zero3 = [](SpacePoint, double, double) { return 0.0; };
    ProblemSpec plain(gr, coeff, fn_of(f), fn_of(fy), fn_of(fyy), zero3, zero3, zero3,
                      0.0, g_field, y0_vals, lo, hi);
    Field u_target = Field::sample(gr, Role::interval,
                                   [e = *tracking_control](SpacePoint x, double t) {
                                       return e.eval(x, t, 0.0);
                                   });
    Field y_d = solve_state(plain, u_target);
    if (tracking_shift != 0.0)
        y_d += Field::constant(gr, Role::nodal, tracking_shift);
    auto index_of = [gr](SpacePoint x, double t) {
        const int k = std::clamp(static_cast<int>(std::lround(x[0] / gr.dx)) - 1, 0,
                                 gr.n_space() - 1);
        const int j = std::clamp(static_cast<int>(std::lround(t / gr.dt)), 0, gr.nt);
        return std::pair<int, int>(k, j);
    };
    auto l0 = [y_d, index_of](SpacePoint x, double t, double y) {
        auto [k, j] = index_of(x, t);
        const double e = y - y_d.at(k, j);
        return 0.5 * e * e;
    };
    auto l0_y = [y_d, index_of](SpacePoint x, double t, double y) {
        auto [k, j] = index_of(x, t);
        return y - y_d.at(k, j);
    };
    auto one3 = [](SpacePoint, double, double) { return 1.0; };
    return ProblemSpec(gr, coeff, fn_of(f), fn_of(fy), fn_of(fyy), l0, l0_y, one3, m,
                       g_field, y0_vals, lo, hi);
}

std::optional<Field> RunConfig::tracking_target() const {
    if (!tracking_control) return std::nullopt;
    auto zero3 = [](SpacePoint, double, double) { return 0.0; };
    Coefficient coeff = [e = a](SpacePoint x) { return e.eval(x, 0.0, 0.0); };
    Field g_field = Field::interval(grid);
    std::vector<double> y0_vals(grid.n_space());
    for (int k = 0; k < grid.n_space(); ++k) y0_vals[k] = y0.eval(grid.point(k), 0.0, 0.0);
    Expr fy = f.d_dy(), fyy = fy.d_dy();
    ProblemSpec plain(grid, coeff, fn_of(f), fn_of(fy), fn_of(fyy), zero3, zero3, zero3,
                      0.0, g_field,
                      y0_vals, Field::sample(grid, Role::interval,
                                             [e = u_a](SpacePoint x, double t) {
                                                 return e.eval(x, t, 0.0);
                                             }),
                      Field::sample(grid, Role::interval, [e = u_b](SpacePoint x, double t) {
                          return e.eval(x, t, 0.0);
                      }));
    Field u_target = Field::sample(grid, Role::interval,
                                   [e = *tracking_control](SpacePoint x, double t) {
                                       return e.eval(x, t, 0.0);
                                   });
    Field y_d = solve_state(plain, u_target);
    if (tracking_shift != 0.0) y_d += Field::constant(grid, Role::nodal, tracking_shift);
    return y_d;
}

}  // namespace parocs
