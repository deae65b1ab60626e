#include "parocs/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace parocs {

Grid make_grid(int dim, int nx, int nt, double length, double horizon) {
    if (dim != 1 && dim != 2)
        throw ConfigError("make_grid: dim must be 1 or 2, got " + std::to_string(dim));
    if (nx < 2) throw ConfigError("make_grid: nx must be >= 2, got " + std::to_string(nx));
    if (nt < 1) throw ConfigError("make_grid: nt must be >= 1, got " + std::to_string(nt));
    if (!(length > 0)) throw ConfigError("make_grid: length must be positive");
    if (!(horizon > 0)) throw ConfigError("make_grid: horizon must be positive");
    Grid g;
    g.dim = dim;
    g.nx = nx;
    g.nt = nt;
    g.length = length;
    g.horizon = horizon;
    g.dx = length / nx;
    g.dt = horizon / nt;
    return g;
}

Field Field::sample(const Grid& g, Role r,
                    const std::function<double(SpacePoint, double)>& fn) {
    Field f(g, r);
    const int ns = g.n_space();
    for (int j = 0; j < f.time_count(); ++j) {
        const double t = r == Role::nodal ? j * g.dt : (j + 1) * g.dt;
        for (int k = 0; k < ns; ++k) f.at(k, j) = fn(g.point(k), t);
    }
    f.check_finite("Field::sample");
    return f;
}

std::vector<double> Field::slice(int j) const {
    const int ns = grid_.n_space();
    std::vector<double> s(ns);
    for (int k = 0; k < ns; ++k) s[k] = at(k, j);
    return s;
}

void Field::set_slice(int j, const std::vector<double>& s) {
    const int ns = grid_.n_space();
    for (int k = 0; k < ns; ++k) at(k, j) = s[k];
}

void Field::check_finite(const char* where) const {
    for (double x : v_)
        if (!std::isfinite(x))
            throw Error(std::string(where) + ": field contains a non-finite value");
}

static void require_compatible(const Field& a, const Field& b, const char* op) {
    if (!(a.grid() == b.grid()))
        throw ConfigError(std::string(op) + ": grid mismatch");
    if (a.role() != b.role())
        throw ConfigError(std::string(op) + ": role mismatch");
}

Field& Field::operator+=(const Field& o) {
    require_compatible(*this, o, "Field::operator+=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require_compatible(*this, o, "Field::operator-=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}

Field& Field::operator*=(double c) {
    for (auto& x : v_) x *= c;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double c, Field a) { return a *= c; }

namespace {

// Iterates the weighted samples of a field: nodal levels 1..nt, all intervals.
template <typename F>
void for_each_sample(const Field& f, F&& body) {
    const int ns = f.grid().n_space();
    const int j0 = f.role() == Role::nodal ? 1 : 0;
    for (int j = j0; j < f.time_count(); ++j)
        for (int k = 0; k < ns; ++k) body(f.at(k, j));
}

}  // namespace

double norm(const Field& f, NormKind p) {
    if (p == NormKind::L2) return std::sqrt(inner(f, f));
    const double w = f.grid().weight();
    double acc = 0.0;
    if (p == NormKind::L1) {
        for_each_sample(f, [&](double x) { acc += w * std::abs(x); });
    } else {
        for_each_sample(f, [&](double x) { acc = std::max(acc, std::abs(x)); });
    }
    return acc;
}

double inner(const Field& f, const Field& g) {
    require_compatible(f, g, "inner");
    const double w = f.grid().weight();
    const int ns = f.grid().n_space();
    const int j0 = f.role() == Role::nodal ? 1 : 0;
    double acc = 0.0;
    for (int j = j0; j < f.time_count(); ++j)
        for (int k = 0; k < ns; ++k) acc += w * f.at(k, j) * g.at(k, j);
    return acc;
}

double measure_below(const Field& f, double eps) {
    if (eps < 0) throw ConfigError("measure_below: eps must be >= 0");
    const double w = f.grid().weight();
    double acc = 0.0;
    for_each_sample(f, [&](double x) {
        if (std::abs(x) <= eps) acc += w;
    });
    return acc;
}

Field state_on_intervals(const Field& y) {
    if (y.role() != Role::nodal)
        throw ConfigError("state_on_intervals: expected a nodal field");
    Field r = Field::interval(y.grid());
    const int ns = y.grid().n_space();
    for (int j = 0; j < y.grid().nt; ++j)
        for (int k = 0; k < ns; ++k) r.at(k, j) = y.at(k, j + 1);
    return r;
}

Field adjoint_on_intervals(const Field& p) {
    if (p.role() != Role::nodal)
        throw ConfigError("adjoint_on_intervals: expected a nodal field");
    Field r = Field::interval(p.grid());
    const int ns = p.grid().n_space();
    for (int j = 0; j < p.grid().nt; ++j)
        for (int k = 0; k < ns; ++k) r.at(k, j) = p.at(k, j);
    return r;
}

}  // namespace parocs
