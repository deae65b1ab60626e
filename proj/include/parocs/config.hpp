#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "parocs/expr.hpp"
#include "parocs/io.hpp"
#include "parocs/problem.hpp"

namespace parocs {

/// Problem description parsed from a JSON config document.  Coefficients are
/// expression strings in x (x2 in 2D), t, y; l0 may instead be the tracking
/// form {"kind": "tracking", "target_control": <expr>, "shift": <num>}.
struct RunConfig {
    json raw;
    std::string name;
    Grid grid;
    std::uint64_t seed = 1;

    Expr a, f, g, y0, u_a, u_b;
    double m = 0.0;
    std::optional<Expr> l0_expr;          // plain running cost
    std::optional<Expr> tracking_control; // tracking form: control generating the target
    double tracking_shift = 0.0;

    static RunConfig from_json(const json& doc);
    /// Load from a path, or resolve a bare name against presets/<name>.json
    /// (also under PAROCS_PRESET_DIR).
    static RunConfig load(const std::string& path_or_name);

    /// Re-grid (e.g. from a --grid NX,NT override).
    void override_grid(int nx, int nt);

    /// Evaluate all expressions at a few points; throws ConfigError with the
    /// position on malformed input.  Called by from_json.
    void validate_expressions() const;

    ProblemSpec build_problem() const;
    /// The tracking target, when the tracking cost form is configured.
    std::optional<Field> tracking_target() const;
};

}  // namespace parocs
