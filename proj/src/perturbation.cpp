#include "parocs/perturbation.hpp"

#include "parocs/errors.hpp"
#include "parocs/rng.hpp"

namespace parocs {

std::optional<Field> Perturbation::rho_for_vi() const {
    if (rho) return rho;
    if (rho_smooth) return adjoint_on_intervals(rho_smooth->rho_nodal);
    return std::nullopt;
}

void Perturbation::validate(const Grid& grid) const {
    if (xi && norm(*xi, NormKind::Linf) > c_pe)
        throw AssumptionViolation("perturbation xi exceeds the admissibility bound");
    if (eta_fn) {
        Rng rng(0xe7a5eedULL);
        for (int s = 0; s < 64; ++s) {
            SpacePoint x = {rng.uniform(0.0, grid.length), 0.0};
            if (grid.dim == 2) x[1] = rng.uniform(0.0, grid.length);
            const double t = rng.uniform(0.0, grid.horizon);
            const double y = rng.uniform(-2.0, 2.0);
            const double u = rng.uniform(-2.0, 2.0);
            if (eta_fn->eta_uu(x, t, y, u) < -1e-12)
                throw AssumptionViolation(
                    "functional eta is not convex in u (sampled eta_uu < 0)");
        }
    }
    if (rho_smooth) {
        const Field& r = rho_smooth->rho_nodal;
        if (r.role() != Role::nodal)
            throw ConfigError("rho_smooth.rho_nodal must be a nodal field");
        for (int k = 0; k < r.grid().n_space(); ++k)
            if (r.at(k, r.grid().nt) != 0.0)
                throw AssumptionViolation("rho_smooth must vanish at the terminal level");
    }
}

Perturbation scaled(const Perturbation& base, double s) {
    Perturbation p;
    p.c_pe = base.c_pe;
    if (base.xi) p.xi = s * *base.xi;
    if (base.eta_field) p.eta_field = s * *base.eta_field;
    if (base.rho) p.rho = s * *base.rho;
    if (base.rho_smooth)
        p.rho_smooth = RhoSmooth{s * base.rho_smooth->rho_nodal,
                                 s * base.rho_smooth->lstar_rho};
    if (base.eta_fn) {
        const FunctionalEta fe = *base.eta_fn;
        p.eta_fn = FunctionalEta{
            [fe, s](SpacePoint x, double t, double y, double u) {
                return s * fe.eta(x, t, y, u);
            },
            [fe, s](SpacePoint x, double t, double y, double u) {
                return s * fe.eta_y(x, t, y, u);
            },
            [fe, s](SpacePoint x, double t, double y, double u) {
                return s * fe.eta_u(x, t, y, u);
            },
            [fe, s](SpacePoint x, double t, double y, double u) {
                return s * fe.eta_uu(x, t, y, u);
            }};
    }
    return p;
}

}  // namespace parocs
