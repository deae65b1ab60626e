#include "parocs/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace parocs {

namespace {
enum class Kind { num, var_x, var_x2, var_t, var_y, add, sub, mul, div, pow, neg, exp_, sin_, cos_, abs_ };
}

struct Expr::Node {
    Kind kind;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr num(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Kind::num;
    n->value = v;
    return n;
}

bool is_zero(const NodePtr& n) { return n->kind == Kind::num && n->value == 0.0; }
bool is_one(const NodePtr& n) { return n->kind == Kind::num && n->value == 1.0; }

NodePtr add(NodePtr a, NodePtr b) {
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    return make(Kind::add, std::move(a), std::move(b));
}
NodePtr sub(NodePtr a, NodePtr b) {
    if (is_zero(b)) return a;
    return make(Kind::sub, std::move(a), std::move(b));
}
NodePtr mul(NodePtr a, NodePtr b) {
    if (is_zero(a) || is_zero(b)) return num(0.0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    return make(Kind::mul, std::move(a), std::move(b));
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr run() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ < s_.size()) throw ExprError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr expression() {
        NodePtr e = term();
        for (;;) {
            if (eat('+')) e = make(Kind::add, e, term());
            else if (eat('-')) e = make(Kind::sub, e, term());
            else return e;
        }
    }
    NodePtr term() {
        NodePtr e = unary();
        for (;;) {
            if (eat('*')) e = make(Kind::mul, e, unary());
            else if (eat('/')) e = make(Kind::div, e, unary());
            else return e;
        }
    }
    NodePtr unary() {
        if (eat('-')) return make(Kind::neg, unary());
        if (eat('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = atom();
        if (eat('^')) return make(Kind::pow, base, unary());
        return base;
    }
    NodePtr atom() {
        skip_ws();
        if (pos_ >= s_.size()) throw ExprError("unexpected end of expression", pos_);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!eat(')')) throw ExprError("missing ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        throw ExprError(std::string("unexpected character '") + c + "'", pos_);
    }
    NodePtr number() {
        std::size_t end = 0;
        double v;
        try {
            v = std::stod(s_.substr(pos_), &end);
        } catch (const std::exception&) {
            throw ExprError("malformed number", pos_);
        }
        pos_ += end;
        return num(v);
    }
    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        if (name == "x") return make(Kind::var_x);
        if (name == "x2") return make(Kind::var_x2);
        if (name == "t") return make(Kind::var_t);
        if (name == "y") return make(Kind::var_y);
        if (name == "pi") return num(3.14159265358979323846264338327950288);
        Kind fk;
        if (name == "exp") fk = Kind::exp_;
        else if (name == "sin") fk = Kind::sin_;
        else if (name == "cos") fk = Kind::cos_;
        else if (name == "abs") fk = Kind::abs_;
        else throw ExprError("unknown identifier '" + name + "'", start);
        if (!eat('(')) throw ExprError("expected '(' after '" + name + "'", pos_);
        if (peek() == ')' || peek() == '\0')
            throw ExprError("missing argument to '" + name + "'", pos_);
        NodePtr arg = expression();
        if (!eat(')')) throw ExprError("missing ')' after argument of '" + name + "'", pos_);
        return make(fk, arg);
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

double eval_node(const Expr::Node& n, SpacePoint x, double t, double y) {
    switch (n.kind) {
        case Kind::num: return n.value;
        case Kind::var_x: return x[0];
        case Kind::var_x2: return x[1];
        case Kind::var_t: return t;
        case Kind::var_y: return y;
        case Kind::add: return eval_node(*n.a, x, t, y) + eval_node(*n.b, x, t, y);
        case Kind::sub: return eval_node(*n.a, x, t, y) - eval_node(*n.b, x, t, y);
        case Kind::mul: return eval_node(*n.a, x, t, y) * eval_node(*n.b, x, t, y);
        case Kind::div: return eval_node(*n.a, x, t, y) / eval_node(*n.b, x, t, y);
        case Kind::pow: return std::pow(eval_node(*n.a, x, t, y), eval_node(*n.b, x, t, y));
        case Kind::neg: return -eval_node(*n.a, x, t, y);
        case Kind::exp_: return std::exp(eval_node(*n.a, x, t, y));
        case Kind::sin_: return std::sin(eval_node(*n.a, x, t, y));
        case Kind::cos_: return std::cos(eval_node(*n.a, x, t, y));
        case Kind::abs_: return std::abs(eval_node(*n.a, x, t, y));
    }
    return 0.0;
}

bool depends_on_y(const Expr::Node& n) {
    switch (n.kind) {
        case Kind::var_y: return true;
        case Kind::num:
        case Kind::var_x:
        case Kind::var_x2:
        case Kind::var_t: return false;
        default:
            return (n.a && depends_on_y(*n.a)) || (n.b && depends_on_y(*n.b));
    }
}

NodePtr diff_y(const NodePtr& n) {
    switch (n->kind) {
        case Kind::num:
        case Kind::var_x:
        case Kind::var_x2:
        case Kind::var_t: return num(0.0);
        case Kind::var_y: return num(1.0);
        case Kind::add: return add(diff_y(n->a), diff_y(n->b));
        case Kind::sub: return sub(diff_y(n->a), diff_y(n->b));
        case Kind::mul: return add(mul(diff_y(n->a), n->b), mul(n->a, diff_y(n->b)));
        case Kind::div:
            return make(Kind::div,
                        sub(mul(diff_y(n->a), n->b), mul(n->a, diff_y(n->b))),
                        make(Kind::mul, n->b, n->b));
        case Kind::pow: {
            if (!depends_on_y(*n->b)) {
                // d/dy a^c = c * a^(c-1) * a'
                NodePtr cm1 = make(Kind::sub, n->b, num(1.0));
                return mul(mul(n->b, make(Kind::pow, n->a, cm1)), diff_y(n->a));
            }
            // general a^b = exp(b log a); not needed for the coefficient
            // language, so reject rather than silently do the wrong thing
            throw ConfigError("d/dy of a^b with y-dependent exponent is not supported");
        }
        case Kind::neg: return make(Kind::neg, diff_y(n->a));
        case Kind::exp_: return mul(make(Kind::exp_, n->a), diff_y(n->a));
        case Kind::sin_: return mul(make(Kind::cos_, n->a), diff_y(n->a));
        case Kind::cos_: return make(Kind::neg, mul(make(Kind::sin_, n->a), diff_y(n->a)));
        case Kind::abs_:
            if (!depends_on_y(*n->a)) return num(0.0);
            throw ConfigError("d/dy of abs(...) is not defined; use a smooth expression in y");
    }
    return num(0.0);
}

}  // namespace

Expr Expr::parse(const std::string& source) {
    Parser p(source);
    Expr e;
    e.node_ = p.run();
    e.source_ = source;
    return e;
}

Expr Expr::constant(double c) {
    Expr e;
    e.node_ = num(c);
    e.source_ = std::to_string(c);
    return e;
}

double Expr::eval(SpacePoint x, double t, double y) const {
    if (!node_) throw Error("Expr::eval on an empty expression");
    return eval_node(*node_, x, t, y);
}

Expr Expr::d_dy() const {
    if (!node_) throw Error("Expr::d_dy on an empty expression");
    Expr e;
    e.node_ = diff_y(node_);
    e.source_ = "d/dy(" + source_ + ")";
    return e;
}

}  // namespace parocs
