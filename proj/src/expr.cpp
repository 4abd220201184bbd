#include "heatforms/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace heatforms {

// AST with hash-consing-free shared subtrees; `log` is internal only (used by
// the derivative of pow with non-constant exponent) and never parsed.
struct Expression::Node {
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log };
    Kind kind;
    double value = 0;
    int var = 0;
    NodePtr a, b;
};

namespace {

using Node = Expression::Node;
using Kind = Node::Kind;
using NodePtr = std::shared_ptr<const Node>;

NodePtr mk(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr mk_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = v;
    return n;
}

NodePtr mk_var(int i) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->var = i;
    return n;
}

bool is_const(const NodePtr& n, double v) {
    return n->kind == Kind::Const && n->value == v;
}

// Constructors with light constant folding; keeps derivative trees small.
NodePtr add(NodePtr a, NodePtr b) {
    if (a->kind == Kind::Const && b->kind == Kind::Const) return mk_const(a->value + b->value);
    if (is_const(a, 0)) return b;
    if (is_const(b, 0)) return a;
    return mk(Kind::Add, std::move(a), std::move(b));
}
NodePtr sub(NodePtr a, NodePtr b) {
    if (a->kind == Kind::Const && b->kind == Kind::Const) return mk_const(a->value - b->value);
    if (is_const(b, 0)) return a;
    return mk(Kind::Sub, std::move(a), std::move(b));
}
NodePtr neg(NodePtr a) {
    if (a->kind == Kind::Const) return mk_const(-a->value);
    return mk(Kind::Neg, std::move(a));
}
NodePtr mul(NodePtr a, NodePtr b) {
    if (a->kind == Kind::Const && b->kind == Kind::Const) return mk_const(a->value * b->value);
    if (is_const(a, 0) || is_const(b, 0)) return mk_const(0);
    if (is_const(a, 1)) return b;
    if (is_const(b, 1)) return a;
    return mk(Kind::Mul, std::move(a), std::move(b));
}
NodePtr div(NodePtr a, NodePtr b) {
    if (is_const(a, 0)) return mk_const(0);
    if (is_const(b, 1)) return a;
    if (a->kind == Kind::Const && b->kind == Kind::Const && b->value != 0)
        return mk_const(a->value / b->value);
    return mk(Kind::Div, std::move(a), std::move(b));
}
NodePtr pow_node(NodePtr a, NodePtr b) {
    if (is_const(b, 0)) return mk_const(1);
    if (is_const(b, 1)) return a;
    if (a->kind == Kind::Const && b->kind == Kind::Const)
        return mk_const(std::pow(a->value, b->value));
    return mk(Kind::Pow, std::move(a), std::move(b));
}

double eval_node(const Node* n, const std::vector<double>& x) {
    switch (n->kind) {
        case Kind::Const: return n->value;
        case Kind::Var: return x[n->var];
        case Kind::Add: return eval_node(n->a.get(), x) + eval_node(n->b.get(), x);
        case Kind::Sub: return eval_node(n->a.get(), x) - eval_node(n->b.get(), x);
        case Kind::Mul: return eval_node(n->a.get(), x) * eval_node(n->b.get(), x);
        case Kind::Div: return eval_node(n->a.get(), x) / eval_node(n->b.get(), x);
        case Kind::Pow: return std::pow(eval_node(n->a.get(), x), eval_node(n->b.get(), x));
        case Kind::Neg: return -eval_node(n->a.get(), x);
        case Kind::Sin: return std::sin(eval_node(n->a.get(), x));
        case Kind::Cos: return std::cos(eval_node(n->a.get(), x));
        case Kind::Exp: return std::exp(eval_node(n->a.get(), x));
        case Kind::Log: return std::log(eval_node(n->a.get(), x));
    }
    return 0;
}

NodePtr diff(const NodePtr& n, int axis) {
    switch (n->kind) {
        case Kind::Const: return mk_const(0);
        case Kind::Var: return mk_const(n->var == axis ? 1 : 0);
        case Kind::Add: return add(diff(n->a, axis), diff(n->b, axis));
        case Kind::Sub: return sub(diff(n->a, axis), diff(n->b, axis));
        case Kind::Neg: return neg(diff(n->a, axis));
        case Kind::Mul:
            return add(mul(diff(n->a, axis), n->b), mul(n->a, diff(n->b, axis)));
        case Kind::Div:
            return div(sub(mul(diff(n->a, axis), n->b), mul(n->a, diff(n->b, axis))),
                       mul(n->b, n->b));
        case Kind::Sin: return mul(mk(Kind::Cos, n->a), diff(n->a, axis));
        case Kind::Cos: return neg(mul(mk(Kind::Sin, n->a), diff(n->a, axis)));
        case Kind::Exp: return mul(mk(Kind::Exp, n->a), diff(n->a, axis));
        case Kind::Log: return div(diff(n->a, axis), n->a);
        case Kind::Pow: {
            if (n->b->kind == Kind::Const) {
                double p = n->b->value;
                // d(a^p) = p a^{p-1} a'
                return mul(mul(mk_const(p), pow_node(n->a, mk_const(p - 1))), diff(n->a, axis));
            }
            // general: a^b = exp(b log a)
            NodePtr da = diff(n->a, axis), db = diff(n->b, axis);
            NodePtr term = add(mul(db, mk(Kind::Log, n->a)), div(mul(n->b, da), n->a));
            return mul(pow_node(n->a, n->b), term);
        }
    }
    return mk_const(0);
}

void print_node(const Node* n, std::ostringstream& out) {
    switch (n->kind) {
        case Kind::Const: out << n->value; return;
        case Kind::Var: out << "x" << (n->var + 1); return;
        case Kind::Add: out << "("; print_node(n->a.get(), out); out << "+"; print_node(n->b.get(), out); out << ")"; return;
        case Kind::Sub: out << "("; print_node(n->a.get(), out); out << "-"; print_node(n->b.get(), out); out << ")"; return;
        case Kind::Mul: out << "("; print_node(n->a.get(), out); out << "*"; print_node(n->b.get(), out); out << ")"; return;
        case Kind::Div: out << "("; print_node(n->a.get(), out); out << "/"; print_node(n->b.get(), out); out << ")"; return;
        case Kind::Pow: out << "pow("; print_node(n->a.get(), out); out << ","; print_node(n->b.get(), out); out << ")"; return;
        case Kind::Neg: out << "(-"; print_node(n->a.get(), out); out << ")"; return;
        case Kind::Sin: out << "sin("; print_node(n->a.get(), out); out << ")"; return;
        case Kind::Cos: out << "cos("; print_node(n->a.get(), out); out << ")"; return;
        case Kind::Exp: out << "exp("; print_node(n->a.get(), out); out << ")"; return;
        case Kind::Log: out << "log("; print_node(n->a.get(), out); out << ")"; return;
    }
}

// --- recursive-descent parser ---

struct Parser {
    const std::string& s;
    std::size_t pos = 0;
    int dim;

    explicit Parser(const std::string& text, int d) : s(text), dim(d) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
    }
    bool peek(char c) {
        skip_ws();
        return pos < s.size() && s[pos] == c;
    }
    bool accept(char c) {
        if (peek(c)) { ++pos; return true; }
        return false;
    }
    void expect(char c) {
        if (!accept(c))
            throw std::invalid_argument("expression parse error: expected '" + std::string(1, c) +
                                        "' at position " + std::to_string(pos) + " in \"" + s + "\"");
    }

    NodePtr parse_expr() { // + and -
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = add(lhs, parse_term());
            else if (accept('-')) lhs = sub(lhs, parse_term());
            else return lhs;
        }
    }
    NodePtr parse_term() { // * and /
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = mul(lhs, parse_unary());
            else if (accept('/')) lhs = div(lhs, parse_unary());
            else return lhs;
        }
    }
    NodePtr parse_unary() {
        if (accept('-')) return neg(parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }
    NodePtr parse_power() { // right-associative ^
        NodePtr base = parse_atom();
        if (accept('^')) return pow_node(base, parse_unary());
        return base;
    }
    NodePtr parse_atom() {
        skip_ws();
        if (pos >= s.size()) throw std::invalid_argument("expression parse error: unexpected end");
        char c = s[pos];
        if (c == '(') {
            ++pos;
            NodePtr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit((unsigned char)c) || c == '.') return parse_number();
        if (std::isalpha((unsigned char)c)) return parse_ident();
        throw std::invalid_argument("expression parse error: unexpected '" + std::string(1, c) +
                                    "' at position " + std::to_string(pos));
    }
    NodePtr parse_number() {
        std::size_t start = pos;
        while (pos < s.size() &&
               (std::isdigit((unsigned char)s[pos]) || s[pos] == '.' || s[pos] == 'e' ||
                s[pos] == 'E' ||
                ((s[pos] == '+' || s[pos] == '-') && pos > start &&
                 (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
            ++pos;
        return mk_const(std::stod(s.substr(start, pos - start)));
    }
    NodePtr parse_ident() {
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum((unsigned char)s[pos]) || s[pos] == '_')) ++pos;
        std::string name = s.substr(start, pos - start);
        if (name == "pi") return mk_const(M_PI);
        if (name == "sin") return parse_call(Kind::Sin);
        if (name == "cos") return parse_call(Kind::Cos);
        if (name == "exp") return parse_call(Kind::Exp);
        if (name == "pow") {
            expect('(');
            NodePtr a = parse_expr();
            expect(',');
            NodePtr b = parse_expr();
            expect(')');
            return pow_node(a, b);
        }
        if (name.size() >= 2 && name[0] == 'x') {
            int idx = std::stoi(name.substr(1));
            if (idx < 1 || idx > dim)
                throw std::invalid_argument("expression parse error: coordinate " + name +
                                            " out of range for dimension " + std::to_string(dim));
            return mk_var(idx - 1);
        }
        throw std::invalid_argument("expression parse error: unknown identifier '" + name + "'");
    }
    NodePtr parse_call(Kind k) {
        expect('(');
        NodePtr a = parse_expr();
        expect(')');
        return mk(k, a);
    }
};

} // namespace

Expression Expression::parse(const std::string& text, int dim) {
    Parser p(text, dim);
    NodePtr root = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size())
        throw std::invalid_argument("expression parse error: trailing input in \"" + text + "\"");
    return Expression(root);
}

Expression Expression::constant(double v) { return Expression(mk_const(v)); }

double Expression::eval(const std::vector<double>& x) const {
    if (!root_) return 0;
    return eval_node(root_.get(), x);
}

Expression Expression::derivative(int axis) const {
    if (!root_) return constant(0);
    return Expression(diff(root_, axis));
}

bool Expression::is_zero() const {
    return !root_ || (root_->kind == Node::Kind::Const && root_->value == 0);
}

std::string Expression::to_string() const {
    if (!root_) return "0";
    std::ostringstream out;
    print_node(root_.get(), out);
    return out.str();
}

} // namespace heatforms
