#pragma once

#include <optional>

#include "parocs/optimality.hpp"

namespace parocs {

struct FitResult {
    double theta = 0.0;   // fitted exponent (log-log slope)
    double kappa = 0.0;   // exp(intercept)
    double r_squared = 0.0;
    double ci_halfwidth = 0.0;  // 95% half-width on the slope
    int points = 0;
};

/// Least squares of log dY against log dZ.  Throws FitError on fewer than
/// four points or on a nonpositive point (the message names its index).
FitResult fit_exponent(const std::vector<std::pair<double, double>>& points);

enum class FamilyKind { xi_only, eta_field, rho_field, rho_smooth, eta_functional, mixed };

/// A one-parameter family of perturbations s * base over a magnitude list.
struct PerturbationFamily {
    FamilyKind kind = FamilyKind::rho_field;
    Perturbation base;               // unit size
    std::vector<double> magnitudes;  // sorted descending

    void validate() const;  // >= 5 values spanning >= 2 decades, nonzero base
};

struct SweepRecord {
    double magnitude = 0.0;
    double dZ = 0.0;
    double du_l1 = 0.0;
    double dy_l2 = 0.0;
    double dp_l2 = 0.0;
    int iters = 0;
    double gap = 0.0;
    bool converged = false;
};

struct StabilityReport {
    std::vector<SweepRecord> records;
    std::optional<FitResult> fit_u;
    std::optional<FitResult> fit_yp;
    std::string no_fit_reason_u, no_fit_reason_yp;
    int dropped_zero_u = 0;      // converged records with zero control distance
    int dropped_zero_yp = 0;
    int dropped_nonconverged = 0;
    double reference_theta_u = 1.0;   // paper exponent for the configured n
    double reference_theta_yp = 1.0;
    std::string dz_metric;  // which norm combination dZ uses
    std::string run_mode;   // "sequential" or "concurrent"
};

/// Solve the perturbed problem at every magnitude (warm-started at ubar),
/// record d_Y components against d_Z, and fit log-log slopes.  dZ uses
/// ||rho||_Linf for plain rho families.
StabilityReport perturb_sweep(const ProblemSpec& ps, const Triple& psibar,
                              const PerturbationFamily& family,
                              const SolveOpts& solver_opts,
                              OcpMethod method = OcpMethod::conditional_gradient);

/// Variant for rho in the domain of the backward operator: dZ replaces
/// ||rho||_Linf by ||L* rho||_L2.
StabilityReport perturb_sweep_smooth_rho(const ProblemSpec& ps, const Triple& psibar,
                                         const PerturbationFamily& family,
                                         const SolveOpts& solver_opts,
                                         OcpMethod method = OcpMethod::conditional_gradient);

struct NonlinearPerturbNorms {
    double xi_l2 = 0.0;
    double eta_y_l2 = 0.0;   // || sup_{(y,u) in R} |deta/dy| ||_L2(Q)
    double eta_u_inf = 0.0;  // ||deta/du||_Linf(Q x R)
    double k_y = 0.0;        // box half-height used for R
};

struct NonlinearPerturbResult {
    OcpResult solution;
    NonlinearPerturbNorms norms;
};

/// Solve the nonlinearly perturbed problem (objective + int eta(x,t,y,u),
/// state equation + xi) and report the stability-estimate ingredients.
NonlinearPerturbResult nonlinear_perturb_solve(const ProblemSpec& ps,
                                               const FunctionalEta& eta,
                                               const Field* xi,
                                               const SolveOpts& solver_opts,
                                               OcpMethod method = OcpMethod::conditional_gradient);

struct TikhonovRecord {
    double lambda = 0.0;
    double du_l1 = 0.0;
    double dy_l2 = 0.0;
    int iters = 0;
    double gap = 0.0;
    bool converged = false;
    double damping_used = 1.0;
};

struct TikhonovPathReport {
    std::vector<TikhonovRecord> records;
    std::optional<FitResult> control_fit;  // log du vs log lambda
    std::optional<FitResult> state_fit;
    std::string no_fit_reason;
    int dropped_zero = 0;
};

/// Regularization path, warm-started from large lambda to small; the
/// fixed-point damping is halved up to four times on stalls.
TikhonovPathReport tikhonov_path(const ProblemSpec& ps, const Triple& psibar,
                                 const std::vector<double>& lambdas,
                                 const SolveOpts& solver_opts);

// ---------------------------------------------------------------------------
// Worked examples
// ---------------------------------------------------------------------------

/// Exponential reaction with linear cost: f = exp(y), L0 = y, m = 0,
/// g >= 0, box [u_lo, u_hi]; the lower bound is the optimal control.
struct NegCurvatureConfig {
    int nx = 64;
    int nt = 128;
    double length = 1.0;
    double horizon = 1.0;
    double u_lo = 0.0;
    double u_hi = 1.0;
    std::function<double(SpacePoint, double)> g_fn =
        [](SpacePoint x, double) { return x[0]; };
    int samples = 200;
    std::uint64_t seed = 42;
    double solve_tol = 1e-10;
    int max_iters = 50;
};

ProblemSpec build_neg_curvature(const NegCurvatureConfig& cfg);

struct NegCurvatureReport {
    double dist_to_lower_l1 = 0.0;  // ||u - u_a||_L1 of the computed solution
    double gap = 0.0;
    bool solver_converged = false;
    int iters = 0;
    CheckReport struct_g;         // structural check on g itself
    CheckReport struct_d;         // and on dH/du (informational)
    int j2_samples = 0;
    int j2_negative = 0;          // count of samples with J''(u-ubar)^2 < 0
    double j2_max = 0.0;          // largest sampled second variation
    CheckReport a1;
    CheckReport growth_first;
    double ibp_max_rel_err = 0.0;  // | int p (u-ubar) - int z | identity
    std::vector<std::string> failures;
    bool all_pass() const { return failures.empty(); }
};

NegCurvatureReport example_neg_curvature(const NegCurvatureConfig& cfg);

/// Tracking objective L0 = (y - y_d)^2 / 2 with y_d the state of the lower
/// bound control; same PDE as the negative-curvature example.
struct TrackingConfig {
    int nx = 64;
    int nt = 128;
    double length = 1.0;
    double horizon = 1.0;
    double u_lo = 0.0;
    double u_hi = 1.0;
    double yd_shift = 0.0;  // additive distortion of the target
    int samples = 200;
    std::uint64_t seed = 43;
    std::vector<double> sweep_magnitudes = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    double sweep_tol = 1e-9;
    int sweep_max_iters = 4000;
};

/// The built spec together with the target it tracks.
struct TrackingProblem {
    ProblemSpec ps;
    Field y_d;
};

TrackingProblem build_tracking(const TrackingConfig& cfg);

struct TrackingReport {
    double J_at_ubar = 0.0;
    double ubar_gap = 0.0;
    CheckReport a2;
    double min_curvature_factor = 0.0;  // min over Q of 1 - p exp(y)
    bool smallness_ok = false;          // curvature factor >= 1/2 on the grid
    StabilityReport smooth_rho_sweep;
    std::vector<std::string> failures;
    bool all_pass() const { return failures.empty(); }
};

TrackingReport example_tracking(const TrackingConfig& cfg);

/// Linear-quadratic toy: f = 0, tracking cost toward the state of a known
/// control, Tikhonov weight supplied at solve time.  The discrete KKT system
/// is small and dense enough for an independent closed-form oracle.
struct LqToy {
    ProblemSpec ps;
    Field y_d;        // nodal target
    Field u_dagger;   // control generating the target
};

LqToy build_lq_toy(int nx, int nt);

}  // namespace parocs
