#include "parocs/optimality.hpp"

#include <algorithm>
#include <cmath>

namespace parocs {

Field project_admissible(const ProblemSpec& ps, const Field& f) {
    if (f.role() != Role::interval || !(f.grid() == ps.grid()))
        throw ConfigError("project_admissible: expected an interval field on the grid");
    Field r = f;
    const auto& lo = ps.lower().values();
    const auto& hi = ps.upper().values();
    for (std::size_t i = 0; i < r.values().size(); ++i)
        r.values()[i] = std::clamp(r.values()[i], lo[i], hi[i]);
    return r;
}

bool is_feasible(const ProblemSpec& ps, const Field& u, double tol) {
    const auto& lo = ps.lower().values();
    const auto& hi = ps.upper().values();
    for (std::size_t i = 0; i < u.values().size(); ++i)
        if (u.values()[i] < lo[i] - tol || u.values()[i] > hi[i] + tol) return false;
    return true;
}

Field bang_bang_selection(const ProblemSpec& ps, const Field& d, const Field& u) {
    Field v = u;
    const auto& lo = ps.lower().values();
    const auto& hi = ps.upper().values();
    for (std::size_t i = 0; i < v.values().size(); ++i) {
        const double di = d.values()[i];
        if (di > 0.0) v.values()[i] = lo[i];
        else if (di < 0.0) v.values()[i] = hi[i];
        // keep the current value on the tie set
    }
    return v;
}

double vi_gap(const ProblemSpec& ps, const Field& d, const Field& rho, const Field& u) {
    if (!is_feasible(ps, u))
        throw ConfigError("vi_gap: u is not feasible");
    Field deff = d - rho;
    Field vstar = bang_bang_selection(ps, deff, u);
    return inner(deff, u - vstar);
}

double vi_gap(const ProblemSpec& ps, const Field& d, const Field& u) {
    return vi_gap(ps, d, Field::interval(ps.grid()), u);
}

PhiResidual phi_residual(const ProblemSpec& ps, const Triple& psi) {
    const Grid& g = ps.grid();
    const int ns = g.n_space();
    PhiResidual r;
    r.xi_res = Field::interval(g);
    r.eta_res = Field::interval(g);
    for (int j = 0; j < g.nt; ++j) {
        const double t = (j + 1) * g.dt;
        std::vector<double> ay = ps.op().apply(psi.y.slice(j + 1));
        std::vector<double> ap = ps.op().apply(psi.p.slice(j));
        for (int k = 0; k < ns; ++k) {
            const SpacePoint x = g.point(k);
            const double yk = psi.y.at(k, j + 1);
            r.xi_res.at(k, j) = (psi.y.at(k, j + 1) - psi.y.at(k, j)) / g.dt + ay[k] +
                                ps.f(x, t, yk) - psi.u.at(k, j);
            r.eta_res.at(k, j) = (psi.p.at(k, j) - psi.p.at(k, j + 1)) / g.dt + ap[k] +
                                 ps.f_y(x, t, yk) * psi.p.at(k, j) -
                                 (ps.l0_y(x, t, yk) + ps.m() * psi.u.at(k, j));
        }
    }
    r.gap = vi_gap(ps, hamiltonian_du(ps, psi.y, psi.p), psi.u);
    r.dZ = norm(r.xi_res, NormKind::L2) + norm(r.eta_res, NormKind::L2);
    return r;
}

double metric_dY(const Triple& a, const Triple& b) {
    return norm(a.y - b.y, NormKind::L2) + norm(a.p - b.p, NormKind::L2) +
           norm(a.u - b.u, NormKind::L1);
}

double metric_dZ(const Perturbation& a, const Perturbation& b) {
    if (a.eta_fn || b.eta_fn)
        throw ConfigError("metric_dZ is defined for field-valued perturbations only");
    auto diff_norm = [](const std::optional<Field>& fa, const std::optional<Field>& fb,
                        NormKind p) {
        if (!fa && !fb) return 0.0;
        if (fa && fb) return norm(*fa - *fb, p);
        return norm(fa ? *fa : *fb, p);
    };
    auto rho_a = a.rho_for_vi();
    auto rho_b = b.rho_for_vi();
    return diff_norm(a.xi, b.xi, NormKind::L2) +
           diff_norm(a.eta_field, b.eta_field, NormKind::L2) +
           diff_norm(rho_a, rho_b, NormKind::Linf);
}

namespace {

// golden-section minimization of J along u + alpha (v - u), alpha in [0, 1];
// the endpoints are always evaluated so exact bang-bang steps stay reachable
double line_search(const ProblemSpec& ps, const Perturbation* zeta, const Field& u,
                   const Field& dir, double lambda, double& J_out) {
    auto phi = [&](double a) {
        Field ua = u + a * dir;
        double v = eval_J(ps, ua, zeta);
        if (lambda > 0) v += 0.5 * lambda * inner(ua, ua);
        return v;
    };
    const double gr = 0.6180339887498948482;
    double lo = 0.0, hi = 1.0;
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = phi(a), fb = phi(b);
    for (int it = 0; it < 25; ++it) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = phi(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = phi(b);
        }
    }
    double best = 0.5 * (lo + hi);
    double fbest = phi(best);
    const double f1 = phi(1.0);
    if (f1 <= fbest) {
        best = 1.0;
        fbest = f1;
    }
    J_out = fbest;
    return best;
}

Field effective_multiplier(const PointData& pd, const Perturbation* zeta,
                           double lambda) {
    Field d = pd.d;
    if (zeta) {
        if (auto rho = zeta->rho_for_vi()) d -= *rho;
    }
    if (lambda > 0) d += lambda * pd.u;
    return d;
}

double objective_value(const ProblemSpec& ps, const PointData& pd,
                       const Perturbation* zeta, double lambda) {
    double J = eval_J_with_state(ps, pd.u, pd.y, zeta);
    if (lambda > 0) J += 0.5 * lambda * inner(pd.u, pd.u);
    return J;
}

}  // namespace

OcpResult solve_ocp(const ProblemSpec& ps, const Perturbation* zeta, OcpMethod method,
                    const Field& u_init, const SolveOpts& opts) {
    if (!is_feasible(ps, u_init))
        throw ConfigError("solve_ocp: u_init is not feasible");
    if (method == OcpMethod::tikhonov_fixed_point && !(opts.tikhonov_lambda > 0))
        throw ConfigError("solve_ocp: tikhonov_fixed_point requires lambda > 0");
    if (zeta) zeta->validate(ps.grid());
    const double lambda =
        method == OcpMethod::tikhonov_fixed_point ? opts.tikhonov_lambda : opts.tikhonov_lambda;

    OcpResult res;
    res.method = method == OcpMethod::conditional_gradient ? "conditional_gradient"
                 : method == OcpMethod::projected_gradient ? "projected_gradient"
                                                           : "tikhonov_fixed_point";
    Field u = project_admissible(ps, u_init);

    double sigma_bb = 1.0;
    Field u_prev = u, g_prev = Field::interval(ps.grid());
    bool have_prev = false;
    double omega = opts.damping;

    double best_gap = std::numeric_limits<double>::infinity();
    Field best_u = u;

    for (int it = 0; it < opts.max_iters; ++it) {
        PointData pd = prepare_point(ps, u, zeta);
        Field deff = effective_multiplier(pd, zeta, lambda);
        Field vstar = bang_bang_selection(ps, deff, u);
        const double gap = inner(deff, u - vstar);
        const double J = objective_value(ps, pd, zeta, lambda);
        res.log.push_back({it, J, gap, 0.0});
        res.iters = it + 1;
        if (gap < best_gap) {
            best_gap = gap;
            best_u = u;
            res.psi = Triple{pd.y, pd.adj.p, u};
        }
        if (gap <= opts.tol) {
            res.converged = true;
            res.gap = gap;
            res.objective = J;
            return res;
        }

        if (method == OcpMethod::conditional_gradient) {
            Field dir = vstar - u;
            double J_new = 0.0;
            const double alpha = line_search(ps, zeta, u, dir, lambda, J_new);
            res.log.back().step = alpha;
            u = project_admissible(ps, u + alpha * dir);
        } else if (method == OcpMethod::projected_gradient) {
            // spectral (Barzilai-Borwein) step seed, monotone Armijo backtracking
            double sigma = sigma_bb;
            if (have_prev) {
                Field du = u - u_prev;
                Field dg = deff - g_prev;
                const double sy = inner(du, dg);
                const double ss = inner(du, du);
                if (sy > 1e-300) sigma = std::clamp(ss / sy, 1e-8, 1e8);
            }
            u_prev = u;
            g_prev = deff;
            have_prev = true;
            double step = sigma;
            for (int bt = 0; bt < 60; ++bt) {
                Field cand = project_admissible(ps, u + (-step) * deff);
                const double pred = inner(deff, cand - u);
                const double J_cand = [&] {
                    PointData c = prepare_point(ps, cand, zeta);
                    return objective_value(ps, c, zeta, lambda);
                }();
                if (J_cand <= J + 1e-4 * pred || pred >= 0) {
                    u = cand;
                    res.log.back().step = step;
                    break;
                }
                step *= 0.5;
            }
            sigma_bb = sigma;
        } else {
            // damped fixed point of u = clamp(-(dH/du - rho)/lambda)
            Field target = pd.d;
            if (zeta) {
                if (auto rho = zeta->rho_for_vi()) target -= *rho;
            }
            target *= -1.0 / lambda;
            target = project_admissible(ps, target);
            Field u_new = u + omega * (target - u);
            const double move = norm(u_new - u, NormKind::Linf);
            res.log.back().step = move;
            u = u_new;
        }
    }
    res.converged = false;
    res.gap = best_gap;
    res.psi.u = best_u;
    {
        PointData pd = prepare_point(ps, best_u, zeta);
        res.psi = Triple{pd.y, pd.adj.p, best_u};
        res.objective = objective_value(ps, pd, zeta, lambda);
    }
    return res;
}

ConeResult cone_membership(const ProblemSpec& ps, const PointData& ubar, const Field& v,
                           const ConeSpec& spec) {
    if (!(spec.tau > 0)) throw ConfigError("cone_membership: tau must be positive");
    const double tol = 1e-12;
    const auto& lo = ps.lower().values();
    const auto& hi = ps.upper().values();
    const auto& ub = ubar.u.values();
    const auto& dv = ubar.d.values();
    const auto& vv = v.values();
    // sign condition on the active sets
    for (std::size_t i = 0; i < vv.size(); ++i) {
        if (std::abs(ub[i] - lo[i]) <= tol && vv[i] < -tol)
            return {false, "sign condition on [u = u_a]"};
        if (std::abs(ub[i] - hi[i]) <= tol && vv[i] > tol)
            return {false, "sign condition on [u = u_b]"};
    }
    const bool need_d = spec.kind == ConeKind::D || spec.kind == ConeKind::C;
    const bool need_g = spec.kind == ConeKind::G || spec.kind == ConeKind::C;
    const bool need_e = spec.kind == ConeKind::E;
    if (need_d) {
        for (std::size_t i = 0; i < vv.size(); ++i)
            if (std::abs(dv[i]) > spec.tau && std::abs(vv[i]) > tol)
                return {false, "v != 0 where |dH/du| > tau"};
    }
    if (need_g || need_e) {
        const double j1 = inner(ubar.d, v);
        Field z = solve_linearized(ps, ubar.y, v);
        const double zn = norm(z, need_g ? NormKind::L1 : NormKind::L2);
        const double slack = 1e-12 * (1.0 + std::abs(j1));
        if (j1 > spec.tau * zn + slack)
            return {false, need_g ? "J'(ubar)(v) > tau ||z||_L1"
                                  : "J'(ubar)(v) > tau ||z||_L2"};
    }
    return {true, ""};
}

CheckReport check_struct(const Field& d, const std::vector<double>& eps_grid) {
    CheckReport rep;
    rep.kind = "struct";
    if (eps_grid.empty()) throw ConfigError("check_struct: empty eps grid");
    for (double e : eps_grid)
        if (!(e > 0)) throw ConfigError("check_struct: eps grid must be positive");
    const double singular = measure_below(d, 0.0);
    rep.flag = singular > 0.0;
    if (rep.flag) rep.note = "measure{d = 0} = " + std::to_string(singular);
    double best = 0.0, best_eps = eps_grid.front();
    for (double e : eps_grid) {
        const double ratio = measure_below(d, e) / e;
        rep.samples += 1;
        if (ratio > best) {
            best = ratio;
            best_eps = e;
        }
    }
    rep.constant_hat = best;
    rep.extra = best_eps;
    rep.min_ratio = rep.max_ratio = best;
    return rep;
}

namespace {

Field smooth_unit_noise(const Grid& g, Rng& rng) {
    Field u = Field::interval(g);
    for (auto& x : u.values()) x = rng.normal();
    const int ns = g.n_space();
    const int m = g.inner_per_axis();
    for (int pass = 0; pass < 3; ++pass) {
        Field s = u;
        for (int j = 0; j < g.nt; ++j)
            for (int k = 0; k < ns; ++k) {
                double acc = 2.0 * s.at(k, j);
                if (g.dim == 1) {
                    acc += (k > 0 ? s.at(k - 1, j) : s.at(k, j)) +
                           (k < ns - 1 ? s.at(k + 1, j) : s.at(k, j));
                } else {
                    acc += (k % m > 0 ? s.at(k - 1, j) : s.at(k, j)) +
                           (k % m < m - 1 ? s.at(k + 1, j) : s.at(k, j));
                }
                acc += (j > 0 ? s.at(k, j - 1) : s.at(k, j)) +
                       (j < g.nt - 1 ? s.at(k, j + 1) : s.at(k, j));
                u.at(k, j) = acc / 6.0;
            }
    }
    double mx = 0.0;
    for (double x : u.values()) mx = std::max(mx, std::abs(x));
    if (mx > 0)
        for (auto& x : u.values()) x /= mx;
    return u;
}

}  // namespace

Field sample_control(const ProblemSpec& ps, const Field& ubar, SampleFamily family,
                     Rng& rng) {
    const Grid& g = ps.grid();
    SampleFamily f = family;
    if (f == SampleFamily::mixed) {
        const int pick = rng.below(3);
        f = pick == 0 ? SampleFamily::bang_bang
            : pick == 1 ? SampleFamily::interior
                        : SampleFamily::bump;
    }
    const auto& lo = ps.lower().values();
    const auto& hi = ps.upper().values();
    if (f == SampleFamily::bang_bang) {
        Field phi = smooth_unit_noise(g, rng);
        const double level = rng.uniform(-0.5, 0.5);
        Field u = Field::interval(g);
        for (std::size_t i = 0; i < u.values().size(); ++i)
            u.values()[i] = phi.values()[i] > level ? hi[i] : lo[i];
        return u;
    }
    if (f == SampleFamily::interior) {
        Field phi = smooth_unit_noise(g, rng);
        Field u = Field::interval(g);
        for (std::size_t i = 0; i < u.values().size(); ++i) {
            const double beta = 0.5 + 0.5 * phi.values()[i];  // in [0, 1]
            u.values()[i] = lo[i] + beta * (hi[i] - lo[i]);
        }
        return u;
    }
    // one-cell bump off ubar
    Field u = ubar;
    const int k = rng.below(g.n_space());
    const int j = rng.below(g.nt);
    const double room_up = hi[static_cast<std::size_t>(j) * g.n_space() + k] - u.at(k, j);
    const double room_dn = u.at(k, j) - lo[static_cast<std::size_t>(j) * g.n_space() + k];
    double h;
    if (room_up >= room_dn) h = rng.uniform(0.25, 1.0) * room_up;
    else h = -rng.uniform(0.25, 1.0) * room_dn;
    u.at(k, j) += h;
    return u;
}

CheckReport check_growth_first(const ProblemSpec& ps, const PointData& ubar,
                               const SamplerSpec& sampler) {
    CheckReport rep;
    rep.kind = "growth_first";
    rep.seed = sampler.seed;
    Rng rng(sampler.seed);
    int worst = -1;
    for (int s = 0; s < sampler.count; ++s) {
        Rng local = rng.fork();
        Field u = sample_control(ps, ubar.u, sampler.family, local);
        Field v = u - ubar.u;
        const double den = norm(v, NormKind::L1);
        rep.samples += 1;
        if (den <= 1e-14) {
            rep.degenerate += 1;
            continue;
        }
        const double ratio = ubar.j1(v) / (den * den);
        rep.admitted += 1;
        if (ratio < rep.min_ratio) {
            rep.min_ratio = ratio;
            worst = s;
        }
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.constant_hat = rep.admitted > 0 ? rep.min_ratio : 0.0;
    rep.extra = worst;
    return rep;
}

namespace {

struct VariationTerms {
    double j1;
    double j2;
    double z_l2;
    double v_l1;
};

VariationTerms variation_terms(const ProblemSpec& ps, const PointData& ubar,
                               const Field& v) {
    VariationTerms t{};
    t.j1 = ubar.j1(v);
    t.j2 = second_variation_at(ps, ubar, v);
    Field z = solve_linearized(ps, ubar.y, v);
    t.z_l2 = norm(z, NormKind::L2);
    t.v_l1 = norm(v, NormKind::L1);
    return t;
}

}  // namespace

CheckReport check_Ak(const ProblemSpec& ps, const PointData& ubar, int k,
                     ProximityMode mode, double radius, const SamplerSpec& sampler) {
    if (k < 0 || k > 2) throw ConfigError("check_Ak: k must be 0, 1 or 2");
    CheckReport rep;
    rep.kind = "A" + std::to_string(k) + (mode == ProximityMode::A ? " (state proximity)"
                                                                   : " (control proximity)");
    rep.seed = sampler.seed;
    Rng rng(sampler.seed);
    for (int s = 0; s < sampler.count; ++s) {
        Rng local = rng.fork();
        Field u = sample_control(ps, ubar.u, sampler.family, local);
        if (mode == ProximityMode::B) {
            // pull the raw draw toward ubar so the control-proximity ball
            // actually gets sampled
            const double d1 = norm(u - ubar.u, NormKind::L1);
            if (d1 > 1e-14) {
                const double target = local.uniform(0.05, 1.2) * radius;
                const double tau = std::min(1.0, target / d1);
                u = ubar.u + tau * (u - ubar.u);
            }
        }
        rep.samples += 1;
        bool admit;
        if (mode == ProximityMode::A) {
            Field y_u = solve_state(ps, u);
            admit = norm(y_u - ubar.y, NormKind::Linf) < radius;
        } else {
            admit = norm(u - ubar.u, NormKind::L1) < radius;
        }
        if (!admit) continue;
        Field v = u - ubar.u;
        VariationTerms t = variation_terms(ps, ubar, v);
        const double den = std::pow(t.z_l2, k) * std::pow(t.v_l1, 2 - k);
        if (den <= 1e-300) {
            rep.degenerate += 1;
            continue;
        }
        rep.admitted += 1;
        const double ratio = (t.j1 + t.j2) / den;
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.constant_hat = rep.admitted > 0 ? rep.min_ratio : 0.0;
    return rep;
}

CheckReport quadratic_growth_check(const ProblemSpec& ps, const PointData& ubar, int k,
                                   ProximityMode mode, double radius,
                                   const SamplerSpec& sampler) {
    if (k < 0 || k > 2) throw ConfigError("quadratic_growth_check: k must be 0, 1 or 2");
    CheckReport rep;
    rep.kind = "quadratic_growth_k" + std::to_string(k);
    rep.seed = sampler.seed;
    Rng rng(sampler.seed);
    const double J_bar = eval_J_with_state(ps, ubar.u, ubar.y);
    for (int s = 0; s < sampler.count; ++s) {
        Rng local = rng.fork();
        Field u = sample_control(ps, ubar.u, sampler.family, local);
        if (mode == ProximityMode::B) {
            const double d1 = norm(u - ubar.u, NormKind::L1);
            if (d1 > 1e-14) {
                const double tau = std::min(1.0, local.uniform(0.05, 1.2) * radius / d1);
                u = ubar.u + tau * (u - ubar.u);
            }
        }
        rep.samples += 1;
        Field y_u = solve_state(ps, u);
        if (mode == ProximityMode::A && !(norm(y_u - ubar.y, NormKind::Linf) < radius))
            continue;
        if (mode == ProximityMode::B && !(norm(u - ubar.u, NormKind::L1) < radius))
            continue;
        const double dy = norm(y_u - ubar.y, NormKind::L2);
        const double du = norm(u - ubar.u, NormKind::L1);
        const double den = std::pow(dy, k) * std::pow(du, 2 - k);
        if (den <= 1e-300) {
            rep.degenerate += 1;
            continue;
        }
        rep.admitted += 1;
        const double ratio = (eval_J_with_state(ps, u, y_u) - J_bar) / den;
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.constant_hat = rep.admitted > 0 ? rep.min_ratio : 0.0;
    return rep;
}

}  // namespace parocs
