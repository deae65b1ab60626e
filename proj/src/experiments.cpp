#include "parocs/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>

namespace parocs {

FitResult fit_exponent(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4)
        throw FitError("fit_exponent: need at least 4 points, got " +
                       std::to_string(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!(points[i].first > 0) || !(points[i].second > 0))
            throw FitError("fit_exponent: nonpositive point at index " + std::to_string(i));
    const int n = static_cast<int>(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [dz, dy] : points) {
        const double x = std::log(dz), y = std::log(dy);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) throw FitError("fit_exponent: degenerate abscissae");
    FitResult r;
    r.points = n;
    r.theta = (n * sxy - sx * sy) / det;
    const double intercept = (sy - r.theta * sx) / n;
    r.kappa = std::exp(intercept);
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (auto [dz, dy] : points) {
        const double x = std::log(dz), y = std::log(dy);
        const double yhat = intercept + r.theta * x;
        ss_res += (y - yhat) * (y - yhat);
        ss_tot += (y - ybar) * (y - ybar);
    }
    r.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (n > 2) {
        static const double t975[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                                      2.365,  2.306, 2.262, 2.228, 2.201, 2.179};
        const int df = n - 2;
        const double tq = df <= 12 ? t975[df - 1] : 2.0;
        const double se = std::sqrt(ss_res / df / (sxx - sx * sx / n));
        r.ci_halfwidth = tq * se;
    }
    return r;
}

void PerturbationFamily::validate() const {
    if (magnitudes.size() < 5)
        throw ConfigError("perturbation family: need at least 5 magnitudes");
    for (double m : magnitudes)
        if (!(m > 0)) throw ConfigError("perturbation family: magnitudes must be positive");
    for (std::size_t i = 1; i < magnitudes.size(); ++i)
        if (!(magnitudes[i] < magnitudes[i - 1]))
            throw ConfigError("perturbation family: magnitudes must be sorted descending");
    if (magnitudes.front() / magnitudes.back() < 100.0 * (1.0 - 1e-12))
        throw ConfigError("perturbation family: magnitudes must span at least two decades");
    if (base.empty()) throw ConfigError("perturbation family: base perturbation is zero");
}

namespace {

int worker_count() {
    if (const char* env = std::getenv("PAROCS_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

double dz_of(const Perturbation& z, FamilyKind kind) {
    double dz = 0.0;
    if (z.xi) dz += norm(*z.xi, NormKind::L2);
    if (z.eta_field) dz += norm(*z.eta_field, NormKind::L2);
    if (kind == FamilyKind::rho_smooth) {
        if (z.rho_smooth) dz += norm(z.rho_smooth->lstar_rho, NormKind::L2);
    } else if (auto rho = z.rho_for_vi()) {
        dz += norm(*rho, NormKind::Linf);
    }
    return dz;
}

StabilityReport sweep_impl(const ProblemSpec& ps, const Triple& psibar,
                           const PerturbationFamily& family, const SolveOpts& opts,
                           OcpMethod method, bool smooth_rho_metric) {
    family.validate();
    if (smooth_rho_metric && !family.base.rho_smooth)
        throw ConfigError("perturb_sweep_smooth_rho: family must carry rho_smooth");
    {
        PhiResidual res0 = phi_residual(ps, psibar);
        if (res0.dZ + res0.gap > 1e-6)
            throw ConfigError("perturb_sweep: psibar does not solve the unperturbed system");
    }
    StabilityReport rep;
    rep.dz_metric = smooth_rho_metric ? "||xi||_L2 + ||eta||_L2 + ||L*rho||_L2"
                                      : "||xi||_L2 + ||eta||_L2 + ||rho||_Linf";
    const FamilyKind kind = smooth_rho_metric ? FamilyKind::rho_smooth : family.kind;
    rep.reference_theta_u = ps.grid().dim == 1 ? 1.0 : 0.85;
    rep.reference_theta_yp = rep.reference_theta_u;

    auto solve_one = [&](double s) -> SweepRecord {
        Perturbation z = scaled(family.base, s);
        SweepRecord rec;
        rec.magnitude = s;
        rec.dZ = dz_of(z, kind);
        OcpResult r = solve_ocp(ps, &z, method, psibar.u, opts);
        rec.converged = r.converged;
        rec.iters = r.iters;
        rec.gap = r.gap;
        rec.du_l1 = norm(r.psi.u - psibar.u, NormKind::L1);
        rec.dy_l2 = norm(r.psi.y - psibar.y, NormKind::L2);
        rec.dp_l2 = norm(r.psi.p - psibar.p, NormKind::L2);
        return rec;
    };

    const int threads = worker_count();
    if (threads > 1) {
        rep.run_mode = "concurrent";
        std::vector<std::future<SweepRecord>> futs;
        futs.reserve(family.magnitudes.size());
        for (double s : family.magnitudes)
            futs.push_back(std::async(std::launch::async, solve_one, s));
        for (auto& f : futs) rep.records.push_back(f.get());
    } else {
        rep.run_mode = "sequential";
        for (double s : family.magnitudes) rep.records.push_back(solve_one(s));
    }

    std::vector<std::pair<double, double>> pts_u, pts_yp;
    for (const auto& rec : rep.records) {
        if (!rec.converged) {
            ++rep.dropped_nonconverged;
            continue;
        }
        if (rec.du_l1 > 0 && rec.dZ > 0) pts_u.emplace_back(rec.dZ, rec.du_l1);
        else ++rep.dropped_zero_u;
        const double yp = rec.dy_l2 + rec.dp_l2;
        if (yp > 0 && rec.dZ > 0) pts_yp.emplace_back(rec.dZ, yp);
        else ++rep.dropped_zero_yp;
    }
    try {
        rep.fit_u = fit_exponent(pts_u);
    } catch (const FitError& e) {
        rep.no_fit_reason_u = e.what();
    }
    try {
        rep.fit_yp = fit_exponent(pts_yp);
    } catch (const FitError& e) {
        rep.no_fit_reason_yp = e.what();
    }
    return rep;
}

}  // namespace

StabilityReport perturb_sweep(const ProblemSpec& ps, const Triple& psibar,
                              const PerturbationFamily& family,
                              const SolveOpts& solver_opts, OcpMethod method) {
    return sweep_impl(ps, psibar, family, solver_opts, method, false);
}

StabilityReport perturb_sweep_smooth_rho(const ProblemSpec& ps, const Triple& psibar,
                                         const PerturbationFamily& family,
                                         const SolveOpts& solver_opts, OcpMethod method) {
    return sweep_impl(ps, psibar, family, solver_opts, method, true);
}

NonlinearPerturbResult nonlinear_perturb_solve(const ProblemSpec& ps,
                                               const FunctionalEta& eta, const Field* xi,
                                               const SolveOpts& solver_opts,
                                               OcpMethod method) {
    Perturbation z;
    z.eta_fn = eta;
    if (xi) z.xi = *xi;
    z.validate(ps.grid());
    NonlinearPerturbResult out{
        solve_ocp(ps, &z, method, ps.midpoint_control(), solver_opts), {}};
    const Grid& g = ps.grid();
    const Field& y = out.solution.psi.y;
    out.norms.k_y = 1.1 * norm(y, NormKind::Linf);
    if (xi) out.norms.xi_l2 = norm(*xi, NormKind::L2);
    // sup over the box R = [-K_y, K_y] x [u_a, u_b] on a sample lattice
    const int ns = g.n_space();
    const int ny_pts = 17, nu_pts = 5;
    double sup_eta_u = 0.0;
    double l2_acc = 0.0;
    for (int j = 0; j < g.nt; ++j) {
        const double t = (j + 1) * g.dt;
        for (int k = 0; k < ns; ++k) {
            const SpacePoint x = g.point(k);
            const double lo = ps.lower().at(k, j), hi = ps.upper().at(k, j);
            double sup_y = 0.0;
            for (int iy = 0; iy < ny_pts; ++iy) {
                const double yy =
                    -out.norms.k_y + 2.0 * out.norms.k_y * iy / (ny_pts - 1);
                for (int iu = 0; iu < nu_pts; ++iu) {
                    const double uu = lo + (hi - lo) * iu / (nu_pts - 1);
                    sup_y = std::max(sup_y, std::abs(eta.eta_y(x, t, yy, uu)));
                    sup_eta_u = std::max(sup_eta_u, std::abs(eta.eta_u(x, t, yy, uu)));
                }
            }
            l2_acc += g.weight() * sup_y * sup_y;
        }
    }
    out.norms.eta_y_l2 = std::sqrt(l2_acc);
    out.norms.eta_u_inf = sup_eta_u;
    return out;
}

TikhonovPathReport tikhonov_path(const ProblemSpec& ps, const Triple& psibar,
                                 const std::vector<double>& lambdas,
                                 const SolveOpts& solver_opts) {
    for (double l : lambdas)
        if (!(l > 0)) throw ConfigError("tikhonov_path: lambdas must be positive");
    std::vector<double> ls = lambdas;
    std::sort(ls.begin(), ls.end(), std::greater<>());
    TikhonovPathReport rep;
    Field u_warm = psibar.u;
    for (double lam : ls) {
        SolveOpts o = solver_opts;
        o.tikhonov_lambda = lam;
        TikhonovRecord rec;
        rec.lambda = lam;
        OcpResult r;
        double omega = solver_opts.damping;
        for (int attempt = 0;; ++attempt) {
            o.damping = omega;
            r = solve_ocp(ps, nullptr, OcpMethod::tikhonov_fixed_point, u_warm, o);
            if (r.converged || attempt >= 4) break;
            omega *= 0.5;  // halve the damping on a stall and retry
        }
        rec.damping_used = omega;
        rec.converged = r.converged;
        rec.iters = r.iters;
        rec.gap = r.gap;
        rec.du_l1 = norm(r.psi.u - psibar.u, NormKind::L1);
        rec.dy_l2 = norm(r.psi.y - psibar.y, NormKind::L2);
        rep.records.push_back(rec);
        if (r.converged) u_warm = r.psi.u;
    }
    std::vector<std::pair<double, double>> pts_u, pts_y;
    for (const auto& rec : rep.records) {
        if (!rec.converged) continue;
        if (rec.du_l1 > 0) pts_u.emplace_back(rec.lambda, rec.du_l1);
        else ++rep.dropped_zero;
        if (rec.dy_l2 > 0) pts_y.emplace_back(rec.lambda, rec.dy_l2);
    }
    try {
        rep.control_fit = fit_exponent(pts_u);
    } catch (const FitError& e) {
        rep.no_fit_reason = e.what();
    }
    try {
        rep.state_fit = fit_exponent(pts_y);
    } catch (const FitError& e) {
        if (rep.no_fit_reason.empty()) rep.no_fit_reason = e.what();
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Worked examples
// ---------------------------------------------------------------------------

ProblemSpec build_neg_curvature(const NegCurvatureConfig& cfg) {
    Grid grid = make_grid(1, cfg.nx, cfg.nt, cfg.length, cfg.horizon);
    Field g_field = Field::sample(grid, Role::interval, cfg.g_fn);
    std::vector<double> y0(grid.n_space(), 0.0);
    auto expf = [](SpacePoint, double, double y) { return std::exp(y); };
    return ProblemSpec(
        grid, 1.0, expf, expf, expf,
        [](SpacePoint, double, double y) { return y; },
        [](SpacePoint, double, double) { return 1.0; },
        [](SpacePoint, double, double) { return 0.0; }, 0.0, g_field, y0,
        Field::constant(grid, Role::interval, cfg.u_lo),
        Field::constant(grid, Role::interval, cfg.u_hi));
}

NegCurvatureReport example_neg_curvature(const NegCurvatureConfig& cfg) {
    NegCurvatureReport rep;
    ProblemSpec ps = build_neg_curvature(cfg);
    const Grid& grid = ps.grid();

    SolveOpts opts;
    opts.tol = cfg.solve_tol;
    opts.max_iters = cfg.max_iters;
    OcpResult sol = solve_ocp(ps, nullptr, OcpMethod::conditional_gradient,
                              ps.midpoint_control(), opts);
    rep.solver_converged = sol.converged;
    rep.iters = sol.iters;
    rep.gap = sol.gap;
    rep.dist_to_lower_l1 = norm(sol.psi.u - ps.lower(), NormKind::L1);
    if (!sol.converged) rep.failures.push_back("solver did not converge");
    if (rep.dist_to_lower_l1 > 1e-8)
        rep.failures.push_back("computed control is not the lower bound");

    PointData ubar = prepare_point(ps, sol.psi.u);

    // eps grid, logarithmic over [1e-4, 1e-1]
    std::vector<double> eps_grid;
    for (int i = 0; i <= 180; ++i)
        eps_grid.push_back(std::pow(10.0, -4.0 + 3.0 * i / 180.0));
    rep.struct_g = check_struct(ps.g(), eps_grid);
    rep.struct_d = check_struct(ubar.d, eps_grid);

    Rng rng(cfg.seed);
    double worst_rel = 0.0;
    int neg = 0;
    double j2max = -std::numeric_limits<double>::infinity();
    const Field ones = Field::constant(grid, Role::nodal, 1.0);
    for (int s = 0; s < cfg.samples; ++s) {
        Rng local = rng.fork();
        Field u = sample_control(ps, ubar.u, SampleFamily::mixed, local);
        Field v = u - ubar.u;
        if (norm(v, NormKind::L1) <= 1e-14) continue;
        const double j2 = second_variation_at(ps, ubar, v);
        ++rep.j2_samples;
        if (j2 < 0) ++neg;
        j2max = std::max(j2max, j2);
        // integration-by-parts identity  int p (u - ubar) = int z
        Field z = solve_linearized(ps, ubar.y, v);
        const double lhs = inner(adjoint_on_intervals(ubar.adj.p), v);
        const double rhs = inner(ones, z);
        worst_rel = std::max(worst_rel,
                             std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }
    rep.j2_negative = neg;
    rep.j2_max = j2max;
    rep.ibp_max_rel_err = worst_rel;
    if (neg != rep.j2_samples)
        rep.failures.push_back("second variation not negative on every sample");
    if (worst_rel > 1e-10)
        rep.failures.push_back("integration-by-parts identity beyond tolerance");

    SamplerSpec sampler{cfg.samples, cfg.seed + 1, SampleFamily::mixed};
    rep.a1 = check_Ak(ps, ubar, 1, ProximityMode::A, 0.1, sampler);
    if (!(rep.a1.constant_hat > 0) || rep.a1.admitted == 0)
        rep.failures.push_back("A1 constant not positive");
    rep.growth_first = check_growth_first(ps, ubar, sampler);
    if (!(rep.growth_first.constant_hat > 0))
        rep.failures.push_back("first-order growth constant not positive");
    return rep;
}

TrackingProblem build_tracking(const TrackingConfig& cfg) {
    Grid grid = make_grid(1, cfg.nx, cfg.nt, cfg.length, cfg.horizon);
    std::vector<double> y0(grid.n_space(), 0.0);
    auto expf = [](SpacePoint, double, double y) { return std::exp(y); };
    const Field zero_g = Field::interval(grid);
    const Field lo = Field::constant(grid, Role::interval, cfg.u_lo);
    const Field hi = Field::constant(grid, Role::interval, cfg.u_hi);
    // target: state of the lower-bound control through the same equation
    ProblemSpec plain(grid, 1.0, expf, expf, expf,
                      [](SpacePoint, double, double) { return 0.0; },
                      [](SpacePoint, double, double) { return 0.0; },
                      [](SpacePoint, double, double) { return 0.0; }, 0.0, zero_g, y0,
                      lo, hi);
    Field y_d = solve_state(plain, lo);
    if (cfg.yd_shift != 0.0)
        y_d += Field::constant(grid, Role::nodal, cfg.yd_shift);
    // tracking cost needs the target per (x, t); capture the field and look
    // the sample index up on evaluation (clamped: consistency checks probe
    // off-grid points)
    auto index_of = [grid](SpacePoint x, double t) {
        const int k = std::clamp(static_cast<int>(std::lround(x[0] / grid.dx)) - 1, 0,
                                 grid.n_space() - 1);
        const int j = std::clamp(static_cast<int>(std::lround(t / grid.dt)), 0, grid.nt);
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
    auto l0_yy = [](SpacePoint, double, double) { return 1.0; };
    return TrackingProblem{ProblemSpec(grid, 1.0, expf, expf, expf, l0, l0_y, l0_yy,
                                       0.0, zero_g, y0, lo, hi),
                           y_d};
}

TrackingReport example_tracking(const TrackingConfig& cfg) {
    TrackingReport rep;
    TrackingProblem tp = build_tracking(cfg);
    const ProblemSpec& ps = tp.ps;
    const Grid& grid = ps.grid();

    PointData ubar = prepare_point(ps, ps.lower());
    rep.J_at_ubar = eval_J_with_state(ps, ubar.u, ubar.y);
    rep.ubar_gap = vi_gap(ps, ubar.d, ubar.u);
    if (std::abs(rep.J_at_ubar) > 1e-12)
        rep.failures.push_back("objective at the reference is not zero");
    if (rep.ubar_gap > 1e-12)
        rep.failures.push_back("reference does not satisfy the optimality system");

    SamplerSpec sampler{cfg.samples, cfg.seed, SampleFamily::mixed};
    rep.a2 = check_Ak(ps, ubar, 2, ProximityMode::A, 0.1, sampler);
    if (!(rep.a2.constant_hat > 0) || rep.a2.admitted == 0)
        rep.failures.push_back("A2 constant not positive");

    // curvature factor 1 - p exp(y) on the grid (adjoint read per interval)
    double mincf = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.nt; ++j)
        for (int k = 0; k < grid.n_space(); ++k)
            mincf = std::min(mincf, 1.0 - ubar.adj.p.at(k, j) *
                                              std::exp(ubar.y.at(k, j + 1)));
    rep.min_curvature_factor = mincf;
    rep.smallness_ok = mincf >= 0.5;
    if (!rep.smallness_ok)
        rep.failures.push_back("tracking smallness condition violated on the grid");

    // smooth-rho sweep: rho from a bump vanishing at t = T
    Field rho_nodal = Field::sample(grid, Role::nodal, [&](SpacePoint x, double t) {
        const double s = std::sin(3.14159265358979323846 * x[0] / grid.length);
        const double tt = 1.0 - t / grid.horizon;
        return s * s * tt * tt;
    });
    PerturbationFamily fam;
    fam.kind = FamilyKind::rho_smooth;
    fam.base.rho_smooth =
        RhoSmooth{rho_nodal, apply_backward_operator(ps.op(), rho_nodal)};
    fam.magnitudes = cfg.sweep_magnitudes;
    SolveOpts sweep_opts;
    sweep_opts.tol = cfg.sweep_tol;
    sweep_opts.max_iters = cfg.sweep_max_iters;
    Triple psibar{ubar.y, ubar.adj.p, ubar.u};
    if (rep.ubar_gap <= 1e-10) {
        rep.smooth_rho_sweep = perturb_sweep_smooth_rho(ps, psibar, fam, sweep_opts,
                                                        OcpMethod::projected_gradient);
    } else {
        rep.smooth_rho_sweep.no_fit_reason_u =
            "sweep skipped: reference point is not stationary";
        rep.smooth_rho_sweep.no_fit_reason_yp = rep.smooth_rho_sweep.no_fit_reason_u;
    }
    return rep;
}

LqToy build_lq_toy(int nx, int nt) {
    Grid grid = make_grid(1, nx, nt, 1.0, 1.0);
    std::vector<double> y0(grid.n_space(), 0.0);
    const Field zero_g = Field::interval(grid);
    const Field lo = Field::constant(grid, Role::interval, -1.0);
    const Field hi = Field::constant(grid, Role::interval, 1.0);
    auto zero3 = [](SpacePoint, double, double) { return 0.0; };
    ProblemSpec plain(grid, 1.0, zero3, zero3, zero3, zero3, zero3, zero3, 0.0, zero_g,
                      y0, lo, hi);
    Field u_dag = Field::sample(grid, Role::interval, [](SpacePoint x, double t) {
        return 0.3 * std::sin(3.14159265358979323846 * x[0]) *
               std::sin(3.14159265358979323846 * t);
    });
    Field y_d = solve_state(plain, u_dag);
    auto index_of = [grid](SpacePoint x, double t) {
        const int k = std::clamp(static_cast<int>(std::lround(x[0] / grid.dx)) - 1, 0,
                                 grid.n_space() - 1);
        const int j = std::clamp(static_cast<int>(std::lround(t / grid.dt)), 0, grid.nt);
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
    return LqToy{ProblemSpec(grid, 1.0, zero3, zero3, zero3, l0, l0_y, one3, 0.0,
                             zero_g, y0, lo, hi),
                 y_d, u_dag};
}

}  // namespace parocs
