#pragma once

#include <functional>
#include <optional>

#include "parocs/mesh.hpp"

namespace parocs {

/// State/control-dependent objective perturbation eta(x,t,y,u) with its
/// partial derivatives; must be convex in u.
struct FunctionalEta {
    std::function<double(SpacePoint, double, double, double)> eta;
    std::function<double(SpacePoint, double, double, double)> eta_y;
    std::function<double(SpacePoint, double, double, double)> eta_u;
    std::function<double(SpacePoint, double, double, double)> eta_uu;
};

/// A rho declared in the domain of the backward operator: given as a nodal
/// field vanishing at t = T, together with the interval field obtained by
/// applying the discrete backward operator to it.
struct RhoSmooth {
    Field rho_nodal;
    Field lstar_rho;
};

/// Perturbation zeta = (xi, eta, rho) of the optimality system:
///   state equation      + xi     (interval field)
///   objective           + int eta*y   or   + int eta(x,t,y,u)
///   inclusion:  rho in dH/du + N_U(u)   (objective - int rho*u)
struct Perturbation {
    std::optional<Field> xi;
    std::optional<Field> eta_field;        // nodal
    std::optional<FunctionalEta> eta_fn;
    std::optional<Field> rho;              // interval
    std::optional<RhoSmooth> rho_smooth;
    double c_pe = 1e3;  // admissibility bound on ||xi||_Linf

    bool empty() const {
        return !xi && !eta_field && !eta_fn && !rho && !rho_smooth;
    }

    /// Interval-role rho for the variational inequality, whichever variant
    /// is present.
    std::optional<Field> rho_for_vi() const;

    /// Checks the admissibility bound on xi and (by sampling) the convexity
    /// of a functional eta.  Throws AssumptionViolation.
    void validate(const Grid& grid) const;
};

Perturbation scaled(const Perturbation& base, double s);

}  // namespace parocs
