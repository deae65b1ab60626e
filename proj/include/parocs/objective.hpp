#pragma once

#include <optional>

#include "parocs/perturbation.hpp"
#include "parocs/problem.hpp"

namespace parocs {

/// Adjoint state for a given control.  The field carries the multiplier of
/// time step j at level j; the terminal level is exactly zero.
struct AdjointState {
    Field p;
    Field source_control;
    bool eta_used = false;
};

/// Objective value: quadrature of L0(x,t,y_u) + (m y_u + g) u over Q with the
/// state at the implicit level paired with the interval control, plus the
/// perturbation terms when zeta is supplied (state solved with xi; objective
/// gains int eta*y - int rho*u, or int eta(x,t,y,u) for a functional eta).
double eval_J(const ProblemSpec& ps, const Field& u,
              const Perturbation* zeta = nullptr);

/// Same, reusing an already computed state for (u, zeta).
double eval_J_with_state(const ProblemSpec& ps, const Field& u, const Field& y,
                         const Perturbation* zeta = nullptr);

/// Backward transpose solve with coefficient f_y(., y_u) and source
/// dL/dy = L0_y(., y_u) + m u (+ eta contribution).
AdjointState solve_adjoint(const ProblemSpec& ps, const Field& u, const Field& y_u,
                           const Perturbation* zeta = nullptr);

/// dH/du as data: the interval field p + m y + g, with the state read at the
/// right endpoint of each interval and the adjoint at the left (where the
/// respective implicit steps land; this pairing is what the discrete chain
/// rule produces).
Field hamiltonian_du(const ProblemSpec& ps, const Field& y, const Field& p);

enum class J1Mode { adjoint, linearized };

/// First variation J'(u)v, either through the adjoint representation
/// inner(dH/du, v) or through the linearized state; the two agree to
/// machine precision by the transpose construction.
double directional_J1(const ProblemSpec& ps, const Field& u, const Field& v,
                      J1Mode mode);

/// Second variation J''(u)(v1, v2): quadrature of
/// (L0_yy - p f_yy) z1 z2 + m (z1 v2 + z2 v1).
double second_variation(const ProblemSpec& ps, const Field& u, const Field& v1,
                        const Field& v2);

/// Precomputed point data for repeated evaluations at a fixed control.
struct PointData {
    Field u;
    Field y;
    AdjointState adj;
    Field d;  // dH/du

    /// J'(u)(v) through the adjoint representation.
    double j1(const Field& v) const { return inner(d, v); }
};

PointData prepare_point(const ProblemSpec& ps, const Field& u,
                        const Perturbation* zeta = nullptr);

/// J''(u)(v,v) given prepared point data (one linearized solve).
double second_variation_at(const ProblemSpec& ps, const PointData& pd, const Field& v);

}  // namespace parocs
