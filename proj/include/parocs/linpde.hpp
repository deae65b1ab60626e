#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>

#include "parocs/banded.hpp"
#include "parocs/mesh.hpp"

namespace parocs {

/// Diffusion coefficient: a constant or a function of space, evaluated at
/// edge midpoints during assembly.
using Coefficient = std::variant<double, std::function<double(SpacePoint)>>;

/// Discrete second-order elliptic operator in flux form on interior nodes,
/// homogeneous Dirichlet boundary.  Symmetric positive definite.
class EllipticOperator {
public:
    EllipticOperator(Grid grid, std::vector<double> ax, std::vector<double> ay,
                     double lambda_min);

    const Grid& grid() const { return grid_; }
    int bandwidth() const { return grid_.dim == 1 ? 1 : grid_.inner_per_axis(); }
    double lambda_min() const { return lambda_min_; }

    /// y -> A_h y on a spatial slice (boundary values taken as zero).
    std::vector<double> apply(const std::vector<double>& y) const;

    /// max_i sum_j |A_ij|; bounds the roundoff scale of apply().
    double row_sum_bound() const;

    /// Step matrix  (1/dt + alpha_k) I + A_h  in banded form, unfactored.
    BandedMatrix step_matrix(double dt, const std::vector<double>& alpha) const;

    /// Smallest-eigenvalue estimate by inverse power iteration; used as a
    /// positivity check on small grids at construction.
    double min_eigenvalue_estimate(int iters = 30) const;

private:
    Grid grid_;
    std::vector<double> ax_;  // edge coefficients, x-direction
    std::vector<double> ay_;  // edge coefficients, y-direction (2D only)
    double lambda_min_;
};

EllipticOperator assemble_operator(const Grid& grid, const Coefficient& a);

/// Implicit Euler for  dy/dt + A y + alpha y = rhs,  y(0) = y0, with
/// alpha >= 0 read at the implicit level of each step.  Step matrices are
/// M-matrices, so the discrete maximum principle holds exactly.
Field solve_linear_forward(const EllipticOperator& op, const Field& alpha,
                           const Field& rhs, const std::vector<double>& y0);

/// Exact algebraic transpose of solve_linear_forward (with y0 = 0) as a map
/// from nodal sources to adjoint states:
///   inner(state_on_intervals(forward(u)), r-paired) == sum_j u^j p^j
/// holds to machine precision for shared alpha.  The returned nodal field
/// carries the multiplier of step j at level j and is exactly zero at the
/// terminal level.
Field solve_linear_backward(const EllipticOperator& op, const Field& alpha,
                            const Field& rhs);

/// Backward solver variant taking the source already restricted to
/// intervals (value paired with step j's implicit level).
Field solve_linear_backward_interval(const EllipticOperator& op,
                                     const Field& alpha, const Field& rhs_int);

/// Apply the discrete backward operator -d/dt + A to a nodal field with
/// p(T) = 0; returns the interval field ((p^j - p^{j+1})/dt + A p^j)_j.
Field apply_backward_operator(const EllipticOperator& op, const Field& p);

struct BoundRatioReport {
    double max_l2_ratio = 0.0;   // ||y_u||_L2 / ||u||_L2
    double max_smoothing_ratio = 0.0;  // ||y_u||_L2 / ||u||_L1   (s = 2, 1D)
    int samples = 0;
    int degenerate = 0;  // zero-control draws, excluded from the ratios
    std::uint64_t seed = 0;
};

/// Empirical counterparts of the a-priori constants: max ratios over random
/// (u, alpha >= 0) pairs with alpha uniform in [0, 10] and u smoothed
/// Gaussian noise.
BoundRatioReport bound_ratio_sweep(const Grid& grid, int num_samples,
                                   std::uint64_t seed);

}  // namespace parocs
