#include "parocs/problem.hpp"

#include <cmath>
#include <limits>

#include "parocs/rng.hpp"

namespace parocs {

namespace {

void fd_consistency_check(const ScalarFn& fn, const ScalarFn& dfn, const Grid& g,
                          const char* what) {
    // derivative vs central difference at a handful of fixed sample points
    Rng rng(0x5eedULL);
    const double h = 1e-6;
    for (int s = 0; s < 10; ++s) {
        SpacePoint x = {rng.uniform(0.0, g.length), 0.0};
        if (g.dim == 2) x[1] = rng.uniform(0.0, g.length);
        const double t = rng.uniform(0.0, g.horizon);
        const double y = rng.uniform(-1.0, 1.0);
        const double fd = (fn(x, t, y + h) - fn(x, t, y - h)) / (2 * h);
        const double an = dfn(x, t, y);
        const double scale = 1.0 + std::abs(fn(x, t, y)) + std::abs(an);
        if (std::abs(fd - an) > 1e-5 * scale)
            throw ConfigError(std::string(what) +
                              ": supplied y-derivative disagrees with finite differences");
    }
}

}  // namespace

ProblemSpec::ProblemSpec(Grid grid, Coefficient a, ScalarFn f, ScalarFn f_y,
                         ScalarFn f_yy, ScalarFn l0, ScalarFn l0_y, ScalarFn l0_yy,
                         double m, Field g, std::vector<double> y0, Field u_a,
                         Field u_b)
    : grid_(grid),
      op_(assemble_operator(grid, a)),
      f_(std::move(f)),
      fy_(std::move(f_y)),
      fyy_(std::move(f_yy)),
      l0_(std::move(l0)),
      l0y_(std::move(l0_y)),
      l0yy_(std::move(l0_yy)),
      m_(m),
      g_(std::move(g)),
      y0_(std::move(y0)),
      ua_(std::move(u_a)),
      ub_(std::move(u_b)) {
    if (g_.role() != Role::interval || !(g_.grid() == grid_))
        throw ConfigError("ProblemSpec: g must be an interval field on the grid");
    if (ua_.role() != Role::interval || ub_.role() != Role::interval)
        throw ConfigError("ProblemSpec: control bounds must be interval fields");
    if (static_cast<int>(y0_.size()) != grid_.n_space())
        throw ConfigError("ProblemSpec: y0 has the wrong size");
    for (std::size_t i = 0; i < ua_.values().size(); ++i)
        if (!(ua_.values()[i] < ub_.values()[i]))
            throw ConfigError("ProblemSpec: u_a < u_b must hold at every sample");
    fd_consistency_check(f_, fy_, grid_, "f");
    fd_consistency_check(fy_, fyy_, grid_, "f_y");
    fd_consistency_check(l0_, l0y_, grid_, "L0");
    fd_consistency_check(l0y_, l0yy_, grid_, "L0_y");
}

Field ProblemSpec::midpoint_control() const {
    Field u = Field::interval(grid_);
    for (std::size_t i = 0; i < u.values().size(); ++i)
        u.values()[i] = 0.5 * (ua_.values()[i] + ub_.values()[i]);
    return u;
}

Field ProblemSpec::freeze_fy(const Field& y) const {
    Field alpha = Field::nodal(grid_);
    const int ns = grid_.n_space();
    for (int j = 0; j <= grid_.nt; ++j) {
        const double t = j * grid_.dt;
        for (int k = 0; k < ns; ++k)
            alpha.at(k, j) = f_y(grid_.point(k), t, y.at(k, j));
    }
    return alpha;
}

Field solve_state(const ProblemSpec& ps, const Field& u, const Field* xi) {
    const Grid& g = ps.grid();
    if (u.role() != Role::interval || !(u.grid() == g))
        throw ConfigError("solve_state: u must be an interval field on the grid");
    if (xi && (xi->role() != Role::interval || !(xi->grid() == g)))
        throw ConfigError("solve_state: xi must match the control layout");
    const int ns = g.n_space();
    const double dt = g.dt;
    // roundoff floor of the residual evaluation: the operator application
    // cancels terms of size row_sum * |w|
    const double op_scale = dt * ps.op().row_sum_bound();
    Field y = Field::nodal(g);
    y.set_slice(0, ps.y0());
    std::vector<double> prev = ps.y0();
    std::vector<double> w, resid(ns), fy(ns);
    for (int j = 0; j < g.nt; ++j) {
        const double t = (j + 1) * dt;
        w = prev;  // Newton initial guess: previous time level
        // step equation scaled by dt so the residual is O(|y|):
        //   G(w) = w + dt (A w + f(t,w)) - prev - dt (u + xi)
        double res = 0.0;
        bool done = false;
        for (int it = 0; it < 50; ++it) {
            std::vector<double> aw = ps.op().apply(w);
            res = 0.0;
            double scale = 0.0;  // backward-error scale of the residual evaluation
            for (int k = 0; k < ns; ++k) {
                const double force = u.at(k, j) + (xi ? xi->at(k, j) : 0.0);
                const double fval = ps.f(g.point(k), t, w[k]);
                resid[k] = w[k] + dt * (aw[k] + fval) - prev[k] - dt * force;
                res = std::max(res, std::abs(resid[k]));
                scale = std::max(scale, (1.0 + op_scale) * std::abs(w[k]) +
                                            dt * std::abs(fval) + std::abs(prev[k]) +
                                            dt * std::abs(force));
            }
            if (res <= std::max(1e-12, 64 * std::numeric_limits<double>::epsilon() *
                                           scale)) {
                done = true;
                break;
            }
            for (int k = 0; k < ns; ++k) fy[k] = ps.f_y(g.point(k), t, w[k]);
            // Jacobian = dt * ((1/dt + f_y) I + A)
            BandedMatrix J = ps.op().step_matrix(dt, fy);
            J.factorize();
            std::vector<double> delta = J.solve(resid);
            for (int k = 0; k < ns; ++k) w[k] -= delta[k] / dt;
        }
        if (!done)
            throw SolverFailure("solve_state: Newton did not converge at step " +
                                    std::to_string(j) + " (residual " +
                                    std::to_string(res) + ")",
                                j, res);
        prev = w;
        y.set_slice(j + 1, prev);
    }
    y.check_finite("solve_state");
    return y;
}

Field solve_linearized(const ProblemSpec& ps, const Field& y_u, const Field& v) {
    Field alpha = ps.freeze_fy(y_u);
    std::vector<double> zero(ps.grid().n_space(), 0.0);
    return solve_linear_forward(ps.op(), alpha, v, zero);
}

Field solve_second_linearized(const ProblemSpec& ps, const Field& y_u,
                              const Field& z_v, const Field& z_w) {
    const Grid& g = ps.grid();
    Field alpha = ps.freeze_fy(y_u);
    Field rhs = Field::interval(g);
    const int ns = g.n_space();
    for (int j = 0; j < g.nt; ++j) {
        const double t = (j + 1) * g.dt;
        // the z-product is grouped so the source, and hence omega, is
        // symmetric in (v, w) to the last bit
        for (int k = 0; k < ns; ++k)
            rhs.at(k, j) = -ps.f_yy(g.point(k), t, y_u.at(k, j + 1)) *
                           (z_v.at(k, j + 1) * z_w.at(k, j + 1));
    }
    std::vector<double> zero(ns, 0.0);
    return solve_linear_forward(ps.op(), alpha, rhs, zero);
}

TaylorReport taylor_check(const ProblemSpec& ps, const Field& u_bar, const Field& u) {
    TaylorReport rep;
    Field y_bar = solve_state(ps, u_bar);
    Field y_u = solve_state(ps, u);
    Field z = solve_linearized(ps, y_bar, u - u_bar);
    Field phi = y_u - y_bar - z;
    rep.remainder_linf = norm(phi, NormKind::Linf);
    rep.remainder_l2 = norm(phi, NormKind::L2);
    Field diff = y_u - y_bar;
    // discrete L4 norm for the quadratic-bound ratio
    double l4 = 0.0;
    {
        const double w = ps.grid().weight();
        const int ns = ps.grid().n_space();
        for (int j = 1; j <= ps.grid().nt; ++j)
            for (int k = 0; k < ns; ++k) {
                const double d2 = diff.at(k, j) * diff.at(k, j);
                l4 += w * d2 * d2;
            }
        l4 = std::sqrt(std::sqrt(l4));
    }
    const double dn2 = norm(diff, NormKind::L2);
    const double dninf = norm(diff, NormKind::Linf);
    const double zn2 = norm(z, NormKind::L2);
    const double zninf = norm(z, NormKind::Linf);
    if (dn2 > 0 && zn2 > 0) {
        rep.comparison_defined = true;
        rep.quad_bound_ratio = l4 > 0 ? rep.remainder_linf / (l4 * l4) : 0.0;
        rep.state_over_z_l2 = dn2 / zn2;
        rep.state_over_z_linf = zninf > 0 ? dninf / zninf : 0.0;
    }
    return rep;
}

}  // namespace parocs
