#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "parocs/errors.hpp"

namespace parocs {

/// Spatial point; x[1] is unused for one-dimensional grids.
using SpacePoint = std::array<double, 2>;

/// Uniform lattice on the space-time cylinder (0,L)^dim x (0,T).
/// States live on interior nodes and time levels 0..nt (boundary values are
/// identically zero); controls are constant on each time interval
/// (t_j, t_{j+1}], j = 0..nt-1.
struct Grid {
    int dim = 1;
    int nx = 0;          // spatial cells per axis
    int nt = 0;          // time steps
    double length = 0;   // Omega = (0, length)^dim
    double horizon = 0;  // T
    double dx = 0;
    double dt = 0;

    int inner_per_axis() const { return nx - 1; }
    int n_space() const {
        int m = nx - 1;
        return dim == 1 ? m : m * m;
    }
    /// Quadrature weight of one interior space-time sample.
    double weight() const {
        double w = dx * dt;
        if (dim == 2) w *= dx;
        return w;
    }
    /// Total discrete measure of Q (interior samples only).
    double measure() const { return weight() * n_space() * nt; }

    SpacePoint point(int k) const {
        if (dim == 1) return {(k + 1) * dx, 0.0};
        const int m = nx - 1;
        return {(k % m + 1) * dx, (k / m + 1) * dx};
    }

    bool operator==(const Grid&) const = default;
};

Grid make_grid(int dim, int nx, int nt, double length, double horizon);

enum class Role { nodal, interval };

/// Real-valued grid function.  Nodal fields are indexed by (interior node,
/// time level 0..nt); interval fields by (interior node, interval 0..nt-1).
class Field {
public:
    Field() = default;
    Field(Grid g, Role r) : grid_(g), role_(r), v_(size_of(g, r), 0.0) {}

    static Field nodal(const Grid& g) { return Field(g, Role::nodal); }
    static Field interval(const Grid& g) { return Field(g, Role::interval); }
    static Field constant(const Grid& g, Role r, double c) {
        Field f(g, r);
        for (auto& x : f.v_) x = c;
        return f;
    }
    /// Sample a function of (x, t).  Nodal fields sample at time levels,
    /// interval fields at the right endpoint t_{j+1} of each interval.
    static Field sample(const Grid& g, Role r,
                        const std::function<double(SpacePoint, double)>& fn);

    const Grid& grid() const { return grid_; }
    Role role() const { return role_; }
    int time_count() const { return role_ == Role::nodal ? grid_.nt + 1 : grid_.nt; }
    std::size_t size() const { return v_.size(); }

    double& at(int k, int j) { return v_[idx(k, j)]; }
    double at(int k, int j) const { return v_[idx(k, j)]; }

    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    /// Spatial slice at time index j.
    std::vector<double> slice(int j) const;
    void set_slice(int j, const std::vector<double>& s);

    void check_finite(const char* where) const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double c);

private:
    static std::size_t size_of(const Grid& g, Role r) {
        return static_cast<std::size_t>(g.n_space()) *
               (r == Role::nodal ? g.nt + 1 : g.nt);
    }
    std::size_t idx(int k, int j) const {
        return static_cast<std::size_t>(j) * grid_.n_space() + k;
    }
    Grid grid_{};
    Role role_ = Role::nodal;
    std::vector<double> v_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double c, Field a);

enum class NormKind { L1, L2, Linf };

/// Discrete L^p(Q) norm.  Nodal fields are sampled at time levels 1..nt
/// (the initial level carries no quadrature weight), interval fields on all
/// intervals; every counted sample has weight dx^dim * dt.
double norm(const Field& f, NormKind p);

/// Weighted quadrature pairing; inner(f, f) == norm(f, L2)^2 exactly.
double inner(const Field& f, const Field& g);

/// Discrete measure of the sublevel set { |f| <= eps } in Q.
double measure_below(const Field& f, double eps);

/// Restriction of a forward-state nodal field to intervals: interval j takes
/// the value at level j+1, where the implicit step that consumed the
/// interval's control landed.
Field state_on_intervals(const Field& y);

/// Restriction of an adjoint nodal field to intervals: interval j takes the
/// value at level j, where the backward step over that interval lands.  With
/// state_on_intervals this is what makes the discrete chain rule exact.
Field adjoint_on_intervals(const Field& p);

}  // namespace parocs
