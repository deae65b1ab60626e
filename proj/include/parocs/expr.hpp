#pragma once

#include <memory>
#include <string>

#include "parocs/errors.hpp"
#include "parocs/mesh.hpp"

namespace parocs {

/// Parse error with the offending position in the source string.
class ExprError : public ConfigError {
public:
    ExprError(const std::string& msg, std::size_t pos)
        : ConfigError(msg + " at position " + std::to_string(pos)), pos(pos) {}
    std::size_t pos;
};

/// A parsed arithmetic expression in the variables x, x2, t, y with
/// operators + - * / ^ and the functions exp, sin, cos, abs.
class Expr {
public:
    static Expr parse(const std::string& source);
    static Expr constant(double c);

    double eval(SpacePoint x, double t, double y) const;

    /// Symbolic derivative with respect to y.
    Expr d_dy() const;

    const std::string& source() const { return source_; }
    bool empty() const { return !node_; }

    struct Node;

private:
    std::shared_ptr<const Node> node_;
    std::string source_;
};

}  // namespace parocs
