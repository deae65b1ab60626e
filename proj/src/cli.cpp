#include "parocs/cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include <CLI11.hpp>

#include "parocs/config.hpp"
#include "parocs/experiments.hpp"
#include "parocs/io.hpp"

namespace parocs {

namespace {

constexpr const char* kVersion = "0.1.0";

json manifest_base(const RunConfig& cfg) {
    json m;
    m["version"] = kVersion;
    m["timestamp"] = static_cast<long long>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    m["config"] = cfg.raw;
    m["grid"] = {{"dim", cfg.grid.dim},
                 {"nx", cfg.grid.nx},
                 {"nt", cfg.grid.nt},
                 {"length", cfg.grid.length},
                 {"horizon", cfg.grid.horizon}};
    m["seed"] = cfg.seed;
    return m;
}

struct CommonArgs {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;  // 0: keep the config's seed
    std::string grid;        // "NX,NT" override
    double assert_thresh = std::nan("");
};

RunConfig load_config(const CommonArgs& c) {
    RunConfig cfg = RunConfig::load(c.config);
    if (c.seed != 0) cfg.seed = c.seed;
    if (!c.grid.empty()) {
        const auto comma = c.grid.find(',');
        if (comma == std::string::npos)
            throw ConfigError("--grid expects NX,NT");
        cfg.override_grid(std::stoi(c.grid.substr(0, comma)),
                          std::stoi(c.grid.substr(comma + 1)));
    }
    return cfg;
}

Field seeded_direction(const Grid& grid, std::uint64_t seed) {
    Rng rng(seed);
    Field v = Field::interval(grid);
    for (auto& x : v.values()) x = rng.normal();
    double mx = 0.0;
    for (double x : v.values()) mx = std::max(mx, std::abs(x));
    if (mx > 0)
        for (auto& x : v.values()) x /= mx;
    return v;
}

int cmd_solve(const CommonArgs& c) {
    RunConfig cfg = load_config(c);
    ProblemSpec ps = cfg.build_problem();
    SolveOpts opts;
    opts.tol = cfg.raw.value("tol", 1e-10);
    opts.max_iters = cfg.raw.value("max_iters", 200);
    OcpResult res = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              ps.midpoint_control(), opts);
    const std::filesystem::path out = c.out;
    write_file_atomic(out / "y.csv", field_to_csv(res.psi.y));
    write_file_atomic(out / "p.csv", field_to_csv(res.psi.p));
    write_file_atomic(out / "u.csv", field_to_csv(res.psi.u));
    write_file_atomic(out / "trace.csv", iter_log_to_csv(res.log));
    PhiResidual resid = phi_residual(ps, res.psi);
    json m = manifest_base(cfg);
    m["command"] = "solve";
    m["converged"] = res.converged;
    m["iters"] = res.iters;
    m["gap"] = res.gap;
    m["objective"] = res.objective;
    m["residual_xi_l2"] = norm(resid.xi_res, NormKind::L2);
    m["residual_eta_l2"] = norm(resid.eta_res, NormKind::L2);
    m["dist_to_lower_l1"] = norm(res.psi.u - ps.lower(), NormKind::L1);
    write_file_atomic(out / "manifest.json", m.dump(2) + "\n");
    if (!res.converged) {
        std::cerr << "solve: not converged (gap " << res.gap << ")\n";
        return 2;
    }
    std::cout << "solve: converged, J = " << res.objective << ", gap = " << res.gap
              << "\n";
    return 0;
}

int cmd_check(const CommonArgs& c, const std::string& which, int k_order) {
    RunConfig cfg = load_config(c);
    ProblemSpec ps = cfg.build_problem();
    json rep;
    rep["check"] = which;
    bool pass = false;

    if (which == "gradient" || which == "hessian") {
        Field u = ps.midpoint_control();
        Field v = seeded_direction(ps.grid(), cfg.seed + 7);
        double best = std::numeric_limits<double>::infinity();
        for (double t : {1e-2, 1e-3, 1e-4}) {
            double fd, ref;
            if (which == "gradient") {
                fd = (eval_J(ps, u + t * v) - eval_J(ps, u + (-t) * v)) / (2 * t);
                ref = directional_J1(ps, u, v, J1Mode::adjoint);
            } else {
                fd = (directional_J1(ps, u + t * v, v, J1Mode::adjoint) -
                      directional_J1(ps, u + (-t) * v, v, J1Mode::adjoint)) /
                     (2 * t);
                ref = second_variation(ps, u, v, v);
            }
            best = std::min(best, std::abs(fd - ref) / (1.0 + std::abs(ref)));
        }
        rep["rel_error"] = best;
        const double tol = which == "gradient" ? 1e-5 : 1e-4;
        rep["tolerance"] = tol;
        pass = best <= tol;
    } else if (which == "duality") {
        Rng rng(cfg.seed + 11);
        double worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            Field u = seeded_direction(ps.grid(), rng.next_u64());
            Field v = seeded_direction(ps.grid(), rng.next_u64());
            const double a = directional_J1(ps, u, v, J1Mode::adjoint);
            const double b = directional_J1(ps, u, v, J1Mode::linearized);
            worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(a)));
        }
        rep["rel_error"] = worst;
        rep["tolerance"] = 1e-10;
        pass = worst <= 1e-10;
    } else if (which == "taylor") {
        Field ubar = ps.midpoint_control();
        Field v = Field::sample(ps.grid(), Role::interval, [](SpacePoint x, double) {
            return 1.0 + 0.5 * std::sin(3.14159265358979323846 * x[0]);
        });
        Field ybar = solve_state(ps, ubar);
        Field z = solve_linearized(ps, ybar, v);
        Field omega = solve_second_linearized(ps, ybar, z, z);
        std::vector<std::pair<double, double>> first, second;
        for (double t : {0.5, 0.25, 0.125, 0.0625, 0.03125}) {
            Field yt = solve_state(ps, ubar + t * v);
            first.emplace_back(t, norm(yt - ybar - t * z, NormKind::L2));
            second.emplace_back(
                t, norm(yt - ybar - t * z - (0.5 * t * t) * omega, NormKind::L2));
        }
        const double s1 = fit_exponent(first).theta;
        const double s2 = fit_exponent(second).theta;
        rep["first_order_slope"] = s1;
        rep["second_order_slope"] = s2;
        pass = s1 >= 1.9 && s1 <= 2.1 && s2 >= 2.9 && s2 <= 3.1;
    } else if (which == "struct") {
        std::vector<double> eps_grid;
        for (int i = 0; i <= 180; ++i)
            eps_grid.push_back(std::pow(10.0, -4.0 + 3.0 * i / 180.0));
        CheckReport on_g = check_struct(ps.g(), eps_grid);
        rep["kappa_hat_g"] = on_g.constant_hat;
        rep["eps_at_max"] = on_g.extra;
        rep["singular"] = on_g.flag;
        SolveOpts opts;
        OcpResult sol = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                                  ps.midpoint_control(), opts);
        PointData pd = prepare_point(ps, sol.psi.u);
        CheckReport on_d = check_struct(pd.d, eps_grid);
        rep["kappa_hat_dHdu"] = on_d.constant_hat;
        pass = on_g.constant_hat >= 0.9 && on_g.constant_hat <= 1.1 && !on_g.flag;
    } else if (which == "growth" || which == "ak") {
        SolveOpts opts;
        OcpResult sol = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                                  ps.midpoint_control(), opts);
        PointData pd = prepare_point(ps, sol.psi.u);
        SamplerSpec sampler{200, cfg.seed + 17, SampleFamily::mixed};
        CheckReport r = which == "growth"
                            ? check_growth_first(ps, pd, sampler)
                            : check_Ak(ps, pd, k_order, ProximityMode::A, 0.1, sampler);
        rep["report"] = check_report_to_json(r);
        pass = r.constant_hat > 0 && (r.admitted > 0);
    } else if (which == "cones") {
        SolveOpts opts;
        OcpResult sol = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                                  ps.midpoint_control(), opts);
        PointData pd = prepare_point(ps, sol.psi.u);
        const double tau = 0.1;
        bool ok = true;
        Field zero = Field::interval(ps.grid());
        for (ConeKind kind : {ConeKind::D, ConeKind::G, ConeKind::E, ConeKind::C})
            ok = ok && cone_membership(ps, pd, zero, {tau, kind}).member;
        // a direction violating the sign condition on the upper active set
        Field bad = zero;
        bool have_active_hi = false;
        for (std::size_t i = 0; i < bad.values().size(); ++i)
            if (std::abs(pd.u.values()[i] - ps.upper().values()[i]) <= 1e-12) {
                bad.values()[i] = 1.0;
                have_active_hi = true;
            }
        if (have_active_hi)
            ok = ok && !cone_membership(ps, pd, bad, {tau, ConeKind::D}).member;
        // a sign-correct direction supported on {|d| <= tau} belongs to D
        Field good = zero;
        Rng rng(cfg.seed + 23);
        for (std::size_t i = 0; i < good.values().size(); ++i)
            if (std::abs(pd.d.values()[i]) <= tau) {
                const double s = rng.uniform();
                const bool at_lo =
                    std::abs(pd.u.values()[i] - ps.lower().values()[i]) <= 1e-12;
                const bool at_hi =
                    std::abs(pd.u.values()[i] - ps.upper().values()[i]) <= 1e-12;
                good.values()[i] = at_lo ? s : at_hi ? -s : (2 * s - 1);
            }
        ok = ok && cone_membership(ps, pd, good, {tau, ConeKind::D}).member;
        rep["self_tests_pass"] = ok;
        pass = ok;
    } else {
        throw ConfigError("unknown check '" + which + "'");
    }

    rep["pass"] = pass;
    const std::filesystem::path out = c.out;
    write_file_atomic(out / ("check_" + which + ".json"), rep.dump(2) + "\n");
    std::cout << "check " << which << ": " << (pass ? "pass" : "fail") << "\n";
    return pass ? 0 : 2;
}

PerturbationFamily family_from_config(const RunConfig& cfg, const ProblemSpec& ps) {
    PerturbationFamily fam;
    const json& f = cfg.raw.value("family", json::object());
    const std::string kind = f.value("kind", "rho_field");
    fam.magnitudes = f.value("magnitudes",
                             std::vector<double>{1e-1, 2.2e-2, 4.6e-3, 1e-3, 2.2e-4, 1e-4});
    const Grid& g = ps.grid();
    auto expr_field = [&](const char* key, const char* dflt, Role role) {
        Expr e = Expr::parse(f.value(key, dflt));
        return Field::sample(g, role, [e](SpacePoint x, double t) {
            return e.eval(x, t, 0.0);
        });
    };
    if (kind == "rho_field") {
        fam.kind = FamilyKind::rho_field;
        fam.base.rho = expr_field("rho", "1", Role::interval);
    } else if (kind == "xi_only") {
        fam.kind = FamilyKind::xi_only;
        fam.base.xi = expr_field("xi", "sin(pi*x)", Role::interval);
    } else if (kind == "eta_field") {
        fam.kind = FamilyKind::eta_field;
        fam.base.eta_field = expr_field("eta", "sin(pi*x)", Role::nodal);
    } else if (kind == "rho_smooth") {
        fam.kind = FamilyKind::rho_smooth;
        Field rho_nodal = expr_field("rho", "sin(pi*x)*(1-t)", Role::nodal);
        for (int k = 0; k < g.n_space(); ++k) rho_nodal.at(k, g.nt) = 0.0;
        fam.base.rho_smooth =
            RhoSmooth{rho_nodal, apply_backward_operator(ps.op(), rho_nodal)};
    } else {
        throw ConfigError("unknown family kind '" + kind + "'");
    }
    return fam;
}

int cmd_sweep(const CommonArgs& c) {
    RunConfig cfg = load_config(c);
    ProblemSpec ps = cfg.build_problem();
    SolveOpts ref_opts;
    OcpResult ref = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              ps.midpoint_control(), ref_opts);
    if (!ref.converged) {
        std::cerr << "sweep: reference solve did not converge\n";
        return 2;
    }
    PerturbationFamily fam = family_from_config(cfg, ps);
    SolveOpts opts;
    opts.tol = cfg.raw.value("sweep_tol", 1e-10);
    opts.max_iters = cfg.raw.value("sweep_max_iters", 500);
    StabilityReport rep =
        fam.kind == FamilyKind::rho_smooth
            ? perturb_sweep_smooth_rho(ps, ref.psi, fam, opts)
            : perturb_sweep(ps, ref.psi, fam, opts);
    const std::filesystem::path out = c.out;
    write_file_atomic(out / "sweep.csv", sweep_to_csv(rep));
    json m = manifest_base(cfg);
    m["command"] = "sweep";
    m["report"] = stability_report_to_json(rep);
    write_file_atomic(out / "sweep.json", m.dump(2) + "\n");
    if (!rep.fit_u && !rep.fit_yp) {
        std::cerr << "sweep: fit failed: " << rep.no_fit_reason_u << "\n";
        return 3;
    }
    if (rep.fit_u)
        std::cout << "sweep: theta_u = " << rep.fit_u->theta
                  << " (r2 = " << rep.fit_u->r_squared << ")\n";
    if (rep.fit_yp)
        std::cout << "sweep: theta_yp = " << rep.fit_yp->theta
                  << " (r2 = " << rep.fit_yp->r_squared << ")\n";
    if (!std::isnan(c.assert_thresh)) {
        if (!rep.fit_u || rep.fit_u->theta < c.assert_thresh) {
            std::cerr << "sweep: theta_u below asserted threshold\n";
            return 3;
        }
    }
    return 0;
}

int cmd_tikhonov(const CommonArgs& c) {
    RunConfig cfg = load_config(c);
    ProblemSpec ps = cfg.build_problem();
    SolveOpts ref_opts;
    OcpResult ref = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              ps.midpoint_control(), ref_opts);
    if (!ref.converged) {
        std::cerr << "tikhonov: reference solve did not converge\n";
        return 2;
    }
    std::vector<double> lambdas = cfg.raw.value(
        "lambdas", std::vector<double>{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4});
    SolveOpts opts;
    opts.tol = cfg.raw.value("tol", 1e-10);
    opts.max_iters = cfg.raw.value("max_iters", 2000);
    TikhonovPathReport rep = tikhonov_path(ps, ref.psi, lambdas, opts);
    const std::filesystem::path out = c.out;
    write_file_atomic(out / "tikhonov.csv", tikhonov_to_csv(rep));
    json m = manifest_base(cfg);
    m["command"] = "tikhonov";
    m["report"] = tikhonov_report_to_json(rep);
    write_file_atomic(out / "tikhonov.json", m.dump(2) + "\n");
    if (!rep.control_fit) {
        std::cerr << "tikhonov: fit failed: " << rep.no_fit_reason << "\n";
        return 3;
    }
    std::cout << "tikhonov: control slope = " << rep.control_fit->theta << "\n";
    if (!std::isnan(c.assert_thresh) && rep.control_fit->theta < c.assert_thresh)
        return 3;
    return 0;
}

int cmd_example(const CommonArgs& c, const std::string& which) {
    const std::filesystem::path out = c.out;
    if (which == "neg-curvature") {
        NegCurvatureConfig cfg;
        if (!c.grid.empty()) {
            const auto comma = c.grid.find(',');
            cfg.nx = std::stoi(c.grid.substr(0, comma));
            cfg.nt = std::stoi(c.grid.substr(comma + 1));
        }
        if (c.seed != 0) cfg.seed = c.seed;
        NegCurvatureReport rep = example_neg_curvature(cfg);
        json j;
        j["example"] = which;
        j["dist_to_lower_l1"] = rep.dist_to_lower_l1;
        j["gap"] = rep.gap;
        j["iters"] = rep.iters;
        j["struct_g"] = check_report_to_json(rep.struct_g);
        j["struct_dHdu"] = check_report_to_json(rep.struct_d);
        j["j2_samples"] = rep.j2_samples;
        j["j2_negative"] = rep.j2_negative;
        j["j2_max"] = rep.j2_max;
        j["A1"] = check_report_to_json(rep.a1);
        j["growth_first"] = check_report_to_json(rep.growth_first);
        j["ibp_max_rel_err"] = rep.ibp_max_rel_err;
        j["failures"] = rep.failures;
        write_file_atomic(out / "example_neg_curvature.json", j.dump(2) + "\n");
        for (const auto& f : rep.failures) std::cerr << "neg-curvature: " << f << "\n";
        std::cout << "example neg-curvature: "
                  << (rep.all_pass() ? "all checks pass" : "checks FAILED") << "\n";
        return rep.all_pass() ? 0 : 2;
    }
    if (which == "tracking") {
        TrackingConfig cfg;
        if (!c.grid.empty()) {
            const auto comma = c.grid.find(',');
            cfg.nx = std::stoi(c.grid.substr(0, comma));
            cfg.nt = std::stoi(c.grid.substr(comma + 1));
        }
        if (c.seed != 0) cfg.seed = c.seed;
        TrackingReport rep = example_tracking(cfg);
        json j;
        j["example"] = which;
        j["J_at_ubar"] = rep.J_at_ubar;
        j["ubar_gap"] = rep.ubar_gap;
        j["A2"] = check_report_to_json(rep.a2);
        j["min_curvature_factor"] = rep.min_curvature_factor;
        j["smallness_ok"] = rep.smallness_ok;
        j["smooth_rho_sweep"] = stability_report_to_json(rep.smooth_rho_sweep);
        j["failures"] = rep.failures;
        write_file_atomic(out / "example_tracking.json", j.dump(2) + "\n");
        for (const auto& f : rep.failures) std::cerr << "tracking: " << f << "\n";
        std::cout << "example tracking: "
                  << (rep.all_pass() ? "all checks pass" : "checks FAILED") << "\n";
        return rep.all_pass() ? 0 : 2;
    }
    throw ConfigError("unknown example '" + which + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"parocs: parabolic optimal control stability laboratory"};
    app.require_subcommand(1);

    CommonArgs c;
    std::string check_which = "gradient";
    std::string example_which = "neg-curvature";
    int k_order = 1;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* opt = sub->add_option("--config", c.config, "config file or preset name");
        if (need_config) opt->required();
        sub->add_option("--out", c.out, "output directory");
        sub->add_option("--seed", c.seed, "seed override");
        sub->add_option("--grid", c.grid, "grid override NX,NT");
        sub->add_option("--assert", c.assert_thresh, "exit nonzero below this threshold");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the control problem");
    add_common(solve, true);
    CLI::App* check = app.add_subcommand("check", "run a verification check");
    add_common(check, true);
    check->add_option("--which", check_which,
                      "gradient|hessian|duality|taylor|struct|growth|ak|cones")
        ->required();
    check->add_option("--k", k_order, "growth order for the ak check");
    CLI::App* sweep = app.add_subcommand("sweep", "perturbation sweep with exponent fit");
    add_common(sweep, true);
    CLI::App* tikh = app.add_subcommand("tikhonov", "regularization path");
    add_common(tikh, true);
    CLI::App* example = app.add_subcommand("example", "run a packaged example");
    add_common(example, false);
    example->add_option("--which", example_which, "neg-curvature|tracking")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (solve->parsed()) return cmd_solve(c);
        if (check->parsed()) return cmd_check(c, check_which, k_order);
        if (sweep->parsed()) return cmd_sweep(c);
        if (tikh->parsed()) return cmd_tikhonov(c);
        if (example->parsed()) return cmd_example(c, example_which);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return 3;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace parocs
