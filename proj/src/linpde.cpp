#include "parocs/linpde.hpp"

#include <algorithm>
#include <cmath>

#include "parocs/rng.hpp"

namespace parocs {

namespace {

double eval_coeff(const Coefficient& a, SpacePoint p) {
    if (std::holds_alternative<double>(a)) return std::get<double>(a);
    return std::get<std::function<double(SpacePoint)>>(a)(p);
}

}  // namespace

EllipticOperator::EllipticOperator(Grid grid, std::vector<double> ax,
                                   std::vector<double> ay, double lambda_min)
    : grid_(grid), ax_(std::move(ax)), ay_(std::move(ay)), lambda_min_(lambda_min) {}

EllipticOperator assemble_operator(const Grid& grid, const Coefficient& a) {
    const int m = grid.inner_per_axis();
    const double dx = grid.dx;
    double lambda = std::numeric_limits<double>::infinity();
    std::vector<double> ax, ay;
    if (grid.dim == 1) {
        ax.resize(grid.nx);
        for (int e = 0; e < grid.nx; ++e) {
            ax[e] = eval_coeff(a, {(e + 0.5) * dx, 0.0});
            lambda = std::min(lambda, ax[e]);
        }
    } else {
        // edge (e, row r): between nodes (e, r+1) and (e+1, r+1), and the
        // transposed set for the y-direction
        ax.resize(static_cast<std::size_t>(grid.nx) * m);
        ay.resize(static_cast<std::size_t>(grid.nx) * m);
        for (int r = 0; r < m; ++r)
            for (int e = 0; e < grid.nx; ++e) {
                const double yc = (r + 1) * dx;
                ax[static_cast<std::size_t>(r) * grid.nx + e] =
                    eval_coeff(a, {(e + 0.5) * dx, yc});
                ay[static_cast<std::size_t>(r) * grid.nx + e] =
                    eval_coeff(a, {yc, (e + 0.5) * dx});
                lambda = std::min({lambda, ax[static_cast<std::size_t>(r) * grid.nx + e],
                                   ay[static_cast<std::size_t>(r) * grid.nx + e]});
            }
    }
    if (!(lambda > 0))
        throw ConfigError("assemble_operator: diffusion coefficient must be positive");
    EllipticOperator op(grid, std::move(ax), std::move(ay), lambda);
    if (op.grid().n_space() <= 256) {
        if (!(op.min_eigenvalue_estimate() > 0))
            throw Error("assemble_operator: operator failed the positivity check");
    }
    return op;
}

std::vector<double> EllipticOperator::apply(const std::vector<double>& y) const {
    const int m = grid_.inner_per_axis();
    const double idx2 = 1.0 / (grid_.dx * grid_.dx);
    std::vector<double> r(grid_.n_space(), 0.0);
    if (grid_.dim == 1) {
        for (int i = 0; i < m; ++i) {
            const double yl = i > 0 ? y[i - 1] : 0.0;
            const double yr = i < m - 1 ? y[i + 1] : 0.0;
            r[i] = idx2 * (-ax_[i] * (yl - y[i]) - ax_[i + 1] * (yr - y[i]));
        }
        return r;
    }
    for (int ry = 0; ry < m; ++ry)
        for (int ix = 0; ix < m; ++ix) {
            const int k = ry * m + ix;
            const double yl = ix > 0 ? y[k - 1] : 0.0;
            const double yr = ix < m - 1 ? y[k + 1] : 0.0;
            const double yd = ry > 0 ? y[k - m] : 0.0;
            const double yu = ry < m - 1 ? y[k + m] : 0.0;
            const double axl = ax_[static_cast<std::size_t>(ry) * grid_.nx + ix];
            const double axr = ax_[static_cast<std::size_t>(ry) * grid_.nx + ix + 1];
            const double ayd = ay_[static_cast<std::size_t>(ix) * grid_.nx + ry];
            const double ayu = ay_[static_cast<std::size_t>(ix) * grid_.nx + ry + 1];
            r[k] = idx2 * (-axl * (yl - y[k]) - axr * (yr - y[k]) -
                           ayd * (yd - y[k]) - ayu * (yu - y[k]));
        }
    return r;
}

double EllipticOperator::row_sum_bound() const {
    double amax = 0.0;
    for (double a : ax_) amax = std::max(amax, a);
    for (double a : ay_) amax = std::max(amax, a);
    const double per_dir = 4.0 * amax / (grid_.dx * grid_.dx);
    return grid_.dim == 1 ? per_dir : 2.0 * per_dir;
}

BandedMatrix EllipticOperator::step_matrix(double dt,
                                           const std::vector<double>& alpha) const {
    const int m = grid_.inner_per_axis();
    const int n = grid_.n_space();
    const double idx2 = 1.0 / (grid_.dx * grid_.dx);
    BandedMatrix M(n, bandwidth());
    if (grid_.dim == 1) {
        for (int i = 0; i < n; ++i) {
            M(i, i) = 1.0 / dt + alpha[i] + idx2 * (ax_[i] + ax_[i + 1]);
            if (i > 0) M(i, i - 1) = -idx2 * ax_[i];
            if (i < n - 1) M(i, i + 1) = -idx2 * ax_[i + 1];
        }
        return M;
    }
    for (int ry = 0; ry < m; ++ry)
        for (int ix = 0; ix < m; ++ix) {
            const int k = ry * m + ix;
            const double axl = ax_[static_cast<std::size_t>(ry) * grid_.nx + ix];
            const double axr = ax_[static_cast<std::size_t>(ry) * grid_.nx + ix + 1];
            const double ayd = ay_[static_cast<std::size_t>(ix) * grid_.nx + ry];
            const double ayu = ay_[static_cast<std::size_t>(ix) * grid_.nx + ry + 1];
            M(k, k) = 1.0 / dt + alpha[k] + idx2 * (axl + axr + ayd + ayu);
            if (ix > 0) M(k, k - 1) = -idx2 * axl;
            if (ix < m - 1) M(k, k + 1) = -idx2 * axr;
            if (ry > 0) M(k, k - m) = -idx2 * ayd;
            if (ry < m - 1) M(k, k + m) = -idx2 * ayu;
        }
    return M;
}

double EllipticOperator::min_eigenvalue_estimate(int iters) const {
    const int n = grid_.n_space();
    // inverse power iteration with the shift-free operator: reuse step_matrix
    // with an enormous dt so the 1/dt contribution is negligible
    std::vector<double> zero(n, 0.0);
    BandedMatrix M = step_matrix(1e14, zero);
    M.factorize();
    std::vector<double> v(n, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        std::vector<double> w = M.solve(v);
        double nw = 0.0;
        for (double x : w) nw = std::max(nw, std::abs(x));
        if (nw == 0.0) return 0.0;
        for (auto& x : w) x /= nw;
        lambda = 1.0 / nw;
        v = std::move(w);
    }
    return lambda - 1e-14;
}

Field solve_linear_forward(const EllipticOperator& op, const Field& alpha,
                           const Field& rhs, const std::vector<double>& y0) {
    const Grid& g = op.grid();
    if (!(alpha.grid() == g) || alpha.role() != Role::nodal)
        throw ConfigError("solve_linear_forward: alpha must be nodal on the operator grid");
    if (!(rhs.grid() == g) || rhs.role() != Role::interval)
        throw ConfigError("solve_linear_forward: rhs must be interval on the operator grid");
    for (double a : alpha.values())
        if (a < 0) throw ConfigError("solve_linear_forward: alpha must be nonnegative");
    const int ns = g.n_space();
    Field y = Field::nodal(g);
    y.set_slice(0, y0);
    std::vector<double> prev = y0;
    for (int j = 0; j < g.nt; ++j) {
        BandedMatrix M = op.step_matrix(g.dt, alpha.slice(j + 1));
        M.factorize();
        std::vector<double> b(ns);
        for (int k = 0; k < ns; ++k) b[k] = prev[k] / g.dt + rhs.at(k, j);
        prev = M.solve(b);
        y.set_slice(j + 1, prev);
    }
    y.check_finite("solve_linear_forward");
    return y;
}

Field solve_linear_backward_interval(const EllipticOperator& op, const Field& alpha,
                                     const Field& rhs_int) {
    const Grid& g = op.grid();
    if (!(alpha.grid() == g) || alpha.role() != Role::nodal)
        throw ConfigError("solve_linear_backward: alpha must be nodal on the operator grid");
    if (!(rhs_int.grid() == g) || rhs_int.role() != Role::interval)
        throw ConfigError("solve_linear_backward: rhs must match the operator grid");
    for (double a : alpha.values())
        if (a < 0) throw ConfigError("solve_linear_backward: alpha must be nonnegative");
    const int ns = g.n_space();
    Field p = Field::nodal(g);
    std::vector<double> next(ns, 0.0);  // multiplier past the final step
    for (int j = g.nt - 1; j >= 0; --j) {
        // transpose of step j's matrix (symmetric), source paired with the
        // step's implicit level
        BandedMatrix M = op.step_matrix(g.dt, alpha.slice(j + 1));
        M.factorize();
        std::vector<double> b(ns);
        for (int k = 0; k < ns; ++k) b[k] = next[k] / g.dt + rhs_int.at(k, j);
        next = M.solve(b);
        p.set_slice(j, next);
    }
    // terminal level stays exactly zero
    p.check_finite("solve_linear_backward");
    return p;
}

Field solve_linear_backward(const EllipticOperator& op, const Field& alpha,
                            const Field& rhs) {
    if (rhs.role() != Role::nodal)
        throw ConfigError("solve_linear_backward: rhs must be a nodal field");
    return solve_linear_backward_interval(op, alpha, state_on_intervals(rhs));
}

Field apply_backward_operator(const EllipticOperator& op, const Field& p) {
    const Grid& g = op.grid();
    if (p.role() != Role::nodal)
        throw ConfigError("apply_backward_operator: expected a nodal field");
    Field r = Field::interval(g);
    const int ns = g.n_space();
    for (int j = 0; j < g.nt; ++j) {
        std::vector<double> ap = op.apply(p.slice(j));
        for (int k = 0; k < ns; ++k)
            r.at(k, j) = (p.at(k, j) - p.at(k, j + 1)) / g.dt + ap[k];
    }
    return r;
}

namespace {

Field smoothed_noise(const Grid& g, Rng& rng) {
    Field u = Field::interval(g);
    for (auto& x : u.values()) x = rng.normal();
    // a few diffusion passes in space and time take the roughness off
    const int ns = g.n_space();
    const int m = g.inner_per_axis();
    for (int pass = 0; pass < 2; ++pass) {
        Field s = u;
        for (int j = 0; j < g.nt; ++j)
            for (int k = 0; k < ns; ++k) {
                double acc = 2.0 * s.at(k, j);
                if (g.dim == 1) {
                    acc += (k > 0 ? s.at(k - 1, j) : 0.0) + (k < ns - 1 ? s.at(k + 1, j) : 0.0);
                } else {
                    acc += (k % m > 0 ? s.at(k - 1, j) : 0.0) +
                           (k % m < m - 1 ? s.at(k + 1, j) : 0.0);
                }
                acc += (j > 0 ? s.at(k, j - 1) : s.at(k, j)) +
                       (j < g.nt - 1 ? s.at(k, j + 1) : s.at(k, j));
                u.at(k, j) = acc / 6.0;
            }
    }
    return u;
}

}  // namespace

BoundRatioReport bound_ratio_sweep(const Grid& grid, int num_samples,
                                   std::uint64_t seed) {
    if (num_samples < 1) throw ConfigError("bound_ratio_sweep: need num_samples >= 1");
    BoundRatioReport rep;
    rep.seed = seed;
    Rng rng(seed);
    EllipticOperator op = assemble_operator(grid, 1.0);
    std::vector<double> y0(grid.n_space(), 0.0);
    for (int s = 0; s < num_samples; ++s) {
        Rng local = rng.fork();
        Field u = smoothed_noise(grid, local);
        Field alpha = Field::nodal(grid);
        for (auto& a : alpha.values()) a = local.uniform(0.0, 10.0);
        const double nu2 = norm(u, NormKind::L2);
        const double nu1 = norm(u, NormKind::L1);
        if (nu2 == 0.0 || nu1 == 0.0) {
            ++rep.degenerate;
            continue;
        }
        Field y = solve_linear_forward(op, alpha, u, y0);
        const double ny = norm(y, NormKind::L2);
        rep.max_l2_ratio = std::max(rep.max_l2_ratio, ny / nu2);
        rep.max_smoothing_ratio = std::max(rep.max_smoothing_ratio, ny / nu1);
        ++rep.samples;
    }
    return rep;
}

}  // namespace parocs
