#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "parocs/objective.hpp"
#include "parocs/rng.hpp"

namespace parocs {

/// Candidate point psi = (y, p, u) for the optimality mapping.
struct Triple {
    Field y;
    Field p;
    Field u;
};

enum class ConeKind { D, G, E, C };

struct ConeSpec {
    double tau;
    ConeKind kind;
};

/// Summary of a sampled checker run (growth constants, measure bounds, ...).
struct CheckReport {
    std::string kind;
    std::uint64_t seed = 0;
    int samples = 0;     // drawn
    int admitted = 0;    // passed the proximity filter
    int degenerate = 0;  // zero denominators, excluded from ratios
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = -std::numeric_limits<double>::infinity();
    double constant_hat = 0.0;  // the empirical constant the check estimates
    double extra = 0.0;         // check-specific (eps at max, worst index, ...)
    bool flag = false;          // check-specific failure indicator
    std::string note;
};

/// Pointwise clamp to the admissible box [u_a, u_b].
Field project_admissible(const ProblemSpec& ps, const Field& f);

bool is_feasible(const ProblemSpec& ps, const Field& u, double tol = 1e-12);

/// Gap of the (perturbed) variational inequality at u for the multiplier
/// field d:  inner(d - rho, u - v*) with v* the pointwise minimizer of
/// (d - rho) v over the box.  Zero iff u solves the VI exactly on the grid.
double vi_gap(const ProblemSpec& ps, const Field& d, const Field& rho,
              const Field& u);
double vi_gap(const ProblemSpec& ps, const Field& d, const Field& u);

/// Pointwise minimizer of (d) v over the box; keeps u where d vanishes.
Field bang_bang_selection(const ProblemSpec& ps, const Field& d, const Field& u);

struct PhiResidual {
    Field xi_res;   // state-equation step residuals (interval)
    Field eta_res;  // adjoint-equation step residuals (interval)
    double gap = 0.0;
    double dZ = 0.0;  // ||xi||_L2 + ||eta||_L2; the inclusion gap is separate
};

/// Residual triple of the optimality mapping at psi.
PhiResidual phi_residual(const ProblemSpec& ps, const Triple& psi);

/// d_Y = ||y1-y2||_L2 + ||p1-p2||_L2 + ||u1-u2||_L1.
double metric_dY(const Triple& a, const Triple& b);

/// d_Z = ||xi1-xi2||_L2 + ||eta1-eta2||_L2 + ||rho1-rho2||_Linf
/// (field-valued perturbation records only).
double metric_dZ(const Perturbation& a, const Perturbation& b);

enum class OcpMethod { conditional_gradient, projected_gradient, tikhonov_fixed_point };

struct SolveOpts {
    double tol = 1e-10;
    int max_iters = 200;
    double tikhonov_lambda = 0.0;
    double damping = 1.0;  // fixed-point damping omega
};

struct IterRecord {
    int iter;
    double J;
    double gap;
    double step;
};

struct OcpResult {
    Triple psi;
    bool converged = false;
    int iters = 0;
    double gap = std::numeric_limits<double>::infinity();
    double objective = 0.0;
    std::vector<IterRecord> log;
    std::string method;
};

/// Solve the (optionally perturbed) control problem.  conditional_gradient
/// iterates bang-bang subproblem + exact line search; projected_gradient is
/// a spectral projected gradient with monotone Armijo backtracking;
/// tikhonov_fixed_point (lambda > 0) is the damped clamp iteration
/// u <- (1-omega) u + omega clamp(-(dH/du - rho)/lambda).
OcpResult solve_ocp(const ProblemSpec& ps, const Perturbation* zeta, OcpMethod method,
                    const Field& u_init, const SolveOpts& opts);

struct ConeResult {
    bool member = false;
    std::string violated;  // empty when member
};

/// Membership of v in the requested cone at the prepared reference point.
ConeResult cone_membership(const ProblemSpec& ps, const PointData& ubar, const Field& v,
                           const ConeSpec& spec);

/// kappa_hat = max over the eps grid of measure{|d| <= eps} / eps; flags a
/// genuinely singular set when measure{d = 0} > 0.
CheckReport check_struct(const Field& d, const std::vector<double>& eps_grid);

enum class SampleFamily { bang_bang, interior, bump, mixed };

struct SamplerSpec {
    int count = 200;
    std::uint64_t seed = 1;
    SampleFamily family = SampleFamily::mixed;
};

/// Draw a feasible control of the given family (bang-bang on a random smooth
/// level set, smooth interior value, or a one-cell bump off ubar).
Field sample_control(const ProblemSpec& ps, const Field& ubar, SampleFamily family,
                     Rng& rng);

/// kappa_tilde_hat = min over samples of J'(ubar)(u - ubar) / ||u-ubar||_L1^2.
CheckReport check_growth_first(const ProblemSpec& ps, const PointData& ubar,
                               const SamplerSpec& sampler);

enum class ProximityMode { A, B };  // A: state C(Q)-proximity, B: control L1

/// gamma_k_hat = min over admitted samples of
///   [J'(ubar)(u-ubar) + J''(ubar)(u-ubar)^2] / (||z||_L2^k ||u-ubar||_L1^{2-k}).
CheckReport check_Ak(const ProblemSpec& ps, const PointData& ubar, int k,
                     ProximityMode mode, double radius, const SamplerSpec& sampler);

/// Empirical quadratic growth: min of [J(u) - J(ubar)] over the same
/// denominator; a positive value estimates kappa_k / 2.
CheckReport quadratic_growth_check(const ProblemSpec& ps, const PointData& ubar, int k,
                                   ProximityMode mode, double radius,
                                   const SamplerSpec& sampler);

}  // namespace parocs
