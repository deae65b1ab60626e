#pragma once

#include <functional>
#include <optional>

#include "parocs/linpde.hpp"
#include "parocs/mesh.hpp"

namespace parocs {

/// Scalar coefficient function of (x, t, y).
using ScalarFn = std::function<double(SpacePoint, double, double)>;

/// All data of the control problem on one grid: the state equation
/// dy/dt + A y + f(x,t,y) = u with y(0) = y0, the running cost
/// L0(x,t,y) + (m y + g) u, and the control box [u_a, u_b].
///
/// f_y must be nonnegative wherever it is evaluated; this is checked during
/// every nonlinear solve.  The supplied derivatives are cross-checked against
/// finite differences of f and L0 at construction.
class ProblemSpec {
public:
    ProblemSpec(Grid grid, Coefficient a, ScalarFn f, ScalarFn f_y, ScalarFn f_yy,
                ScalarFn l0, ScalarFn l0_y, ScalarFn l0_yy, double m, Field g,
                std::vector<double> y0, Field u_a, Field u_b);

    const Grid& grid() const { return grid_; }
    const EllipticOperator& op() const { return op_; }
    double m() const { return m_; }
    const Field& g() const { return g_; }
    const std::vector<double>& y0() const { return y0_; }
    const Field& lower() const { return ua_; }
    const Field& upper() const { return ub_; }

    double f(SpacePoint x, double t, double y) const { return f_(x, t, y); }
    double f_yy(SpacePoint x, double t, double y) const { return fyy_(x, t, y); }
    double l0(SpacePoint x, double t, double y) const { return l0_(x, t, y); }
    double l0_y(SpacePoint x, double t, double y) const { return l0y_(x, t, y); }
    double l0_yy(SpacePoint x, double t, double y) const { return l0yy_(x, t, y); }

    /// f_y with the sign assumption enforced.
    double f_y(SpacePoint x, double t, double y) const {
        const double v = fy_(x, t, y);
        if (v < 0)
            throw AssumptionViolation("f_y < 0 sampled at y = " + std::to_string(y));
        return v;
    }

    /// Midpoint control (u_a + u_b)/2, a convenient feasible start.
    Field midpoint_control() const;

    /// f_y frozen along a state, at the implicit level of each time step
    /// (level 0 is padded with the level-0 state and never read by solvers).
    Field freeze_fy(const Field& y) const;

private:
    Grid grid_;
    EllipticOperator op_;
    ScalarFn f_, fy_, fyy_, l0_, l0y_, l0yy_;
    double m_;
    Field g_;
    std::vector<double> y0_;
    Field ua_, ub_;
};

/// Semilinear forward solve by implicit Euler with one Newton loop per step:
///   (y^{j+1}-y^j)/dt + A y^{j+1} + f(x,t_{j+1},y^{j+1}) = u^j (+ xi^j).
/// Throws SolverFailure with the step index when Newton stalls.
Field solve_state(const ProblemSpec& ps, const Field& u,
                  const Field* xi = nullptr);

/// First linearized equation at the state y_u: coefficient f_y(.,y_u),
/// source v, zero initial data.  This is the exact derivative of the discrete
/// control-to-state map.
Field solve_linearized(const ProblemSpec& ps, const Field& y_u, const Field& v);

/// Second linearized equation: source -f_yy(.,y_u) z_v z_w.
Field solve_second_linearized(const ProblemSpec& ps, const Field& y_u,
                              const Field& z_v, const Field& z_w);

struct TaylorReport {
    double remainder_linf = 0.0;       // ||y_u - y_ub - z||_Linf
    double remainder_l2 = 0.0;         // ||y_u - y_ub - z||_L2
    double quad_bound_ratio = 0.0;     // remainder_linf / ||y_u - y_ub||_L4^2
    double state_over_z_l2 = 0.0;      // ||y_u - y_ub||_L2 / ||z||_L2
    double state_over_z_linf = 0.0;
    bool comparison_defined = false;   // false when u == ub
};

/// First-order Taylor remainder of the state map between two controls, plus
/// the two-sided comparison ratios between ||y_u - y_ub|| and ||z||.
TaylorReport taylor_check(const ProblemSpec& ps, const Field& u_bar, const Field& u);

}  // namespace parocs
