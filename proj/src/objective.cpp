#include "parocs/objective.hpp"

#include <cmath>

namespace parocs {

double eval_J_with_state(const ProblemSpec& ps, const Field& u, const Field& y,
                         const Perturbation* zeta) {
    const Grid& g = ps.grid();
    const double w = g.weight();
    const int ns = g.n_space();
    double acc = 0.0;
    for (int j = 0; j < g.nt; ++j) {
        const double t = (j + 1) * g.dt;
        for (int k = 0; k < ns; ++k) {
            const SpacePoint x = g.point(k);
            const double yk = y.at(k, j + 1);
            const double uk = u.at(k, j);
            double l = ps.l0(x, t, yk) + (ps.m() * yk + ps.g().at(k, j)) * uk;
            if (zeta) {
                if (zeta->eta_field) l += zeta->eta_field->at(k, j + 1) * yk;
                if (zeta->eta_fn) l += zeta->eta_fn->eta(x, t, yk, uk);
            }
            acc += w * l;
        }
    }
    if (zeta) {
        if (auto rho = zeta->rho_for_vi()) acc -= inner(*rho, u);
    }
    return acc;
}

double eval_J(const ProblemSpec& ps, const Field& u, const Perturbation* zeta) {
    const Field* xi = zeta && zeta->xi ? &*zeta->xi : nullptr;
    Field y = solve_state(ps, u, xi);
    return eval_J_with_state(ps, u, y, zeta);
}

AdjointState solve_adjoint(const ProblemSpec& ps, const Field& u, const Field& y_u,
                           const Perturbation* zeta) {
    const Grid& g = ps.grid();
    const int ns = g.n_space();
    Field alpha = ps.freeze_fy(y_u);
    Field rhs = Field::interval(g);
    bool eta_used = false;
    for (int j = 0; j < g.nt; ++j) {
        const double t = (j + 1) * g.dt;
        for (int k = 0; k < ns; ++k) {
            const SpacePoint x = g.point(k);
            const double yk = y_u.at(k, j + 1);
            double r = ps.l0_y(x, t, yk) + ps.m() * u.at(k, j);
            if (zeta) {
                if (zeta->eta_field) {
                    r += zeta->eta_field->at(k, j + 1);
                    eta_used = true;
                }
                if (zeta->eta_fn) {
                    r += zeta->eta_fn->eta_y(x, t, yk, u.at(k, j));
                    eta_used = true;
                }
            }
            rhs.at(k, j) = r;
        }
    }
    AdjointState adj{solve_linear_backward_interval(ps.op(), alpha, rhs), u, eta_used};
    return adj;
}

Field hamiltonian_du(const ProblemSpec& ps, const Field& y, const Field& p) {
    const Grid& g = ps.grid();
    if (y.role() != Role::nodal || p.role() != Role::nodal)
        throw ConfigError("hamiltonian_du: y and p must be nodal fields");
    Field d = Field::interval(g);
    const int ns = g.n_space();
    for (int j = 0; j < g.nt; ++j)
        for (int k = 0; k < ns; ++k)
            d.at(k, j) = p.at(k, j) + ps.m() * y.at(k, j + 1) + ps.g().at(k, j);
    return d;
}

PointData prepare_point(const ProblemSpec& ps, const Field& u,
                        const Perturbation* zeta) {
    const Field* xi = zeta && zeta->xi ? &*zeta->xi : nullptr;
    Field y = solve_state(ps, u, xi);
    AdjointState adj = solve_adjoint(ps, u, y, zeta);
    Field d = hamiltonian_du(ps, y, adj.p);
    if (zeta && zeta->eta_fn) {
        const Grid& g = ps.grid();
        const int ns = g.n_space();
        for (int j = 0; j < g.nt; ++j) {
            const double t = (j + 1) * g.dt;
            for (int k = 0; k < ns; ++k)
                d.at(k, j) += zeta->eta_fn->eta_u(g.point(k), t, y.at(k, j + 1), u.at(k, j));
        }
    }
    return PointData{u, std::move(y), std::move(adj), std::move(d)};
}

double directional_J1(const ProblemSpec& ps, const Field& u, const Field& v,
                      J1Mode mode) {
    const Grid& g = ps.grid();
    Field y = solve_state(ps, u);
    if (mode == J1Mode::adjoint) {
        AdjointState adj = solve_adjoint(ps, u, y);
        return inner(hamiltonian_du(ps, y, adj.p), v);
    }
    Field z = solve_linearized(ps, y, v);
    const double w = g.weight();
    const int ns = g.n_space();
    double acc = 0.0;
    for (int j = 0; j < g.nt; ++j) {
        const double t = (j + 1) * g.dt;
        for (int k = 0; k < ns; ++k) {
            const double yk = y.at(k, j + 1);
            acc += w * ((ps.l0_y(g.point(k), t, yk) + ps.m() * u.at(k, j)) * z.at(k, j + 1) +
                        (ps.m() * yk + ps.g().at(k, j)) * v.at(k, j));
        }
    }
    return acc;
}

namespace {

double second_variation_impl(const ProblemSpec& ps, const Field& y, const Field& p,
                             const Field& z1, const Field& z2, const Field& v1,
                             const Field& v2) {
    const Grid& g = ps.grid();
    const double w = g.weight();
    const int ns = g.n_space();
    double acc = 0.0;
    for (int j = 0; j < g.nt; ++j) {
        const double t = (j + 1) * g.dt;
        for (int k = 0; k < ns; ++k) {
            const SpacePoint x = g.point(k);
            const double yk = y.at(k, j + 1);
            const double curv = ps.l0_yy(x, t, yk) - p.at(k, j) * ps.f_yy(x, t, yk);
            acc += w * (curv * z1.at(k, j + 1) * z2.at(k, j + 1) +
                        ps.m() * (z1.at(k, j + 1) * v2.at(k, j) +
                                  z2.at(k, j + 1) * v1.at(k, j)));
        }
    }
    return acc;
}

}  // namespace

double second_variation(const ProblemSpec& ps, const Field& u, const Field& v1,
                        const Field& v2) {
    Field y = solve_state(ps, u);
    AdjointState adj = solve_adjoint(ps, u, y);
    Field z1 = solve_linearized(ps, y, v1);
    Field z2 = solve_linearized(ps, y, v2);
    return second_variation_impl(ps, y, adj.p, z1, z2, v1, v2);
}

double second_variation_at(const ProblemSpec& ps, const PointData& pd, const Field& v) {
    Field z = solve_linearized(ps, pd.y, v);
    return second_variation_impl(ps, pd.y, pd.adj.p, z, z, v, v);
}

}  // namespace parocs
