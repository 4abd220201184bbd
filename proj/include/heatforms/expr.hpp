#pragma once

#include <memory>
#include <string>
#include <vector>

namespace heatforms {

/// Arithmetic expression in coordinates x1..xn with +, -, *, /, pow (or ^),
/// sin, cos, exp and numeric constants. Supports exact symbolic
/// differentiation of any order, which is what gives analytic metrics their
/// derivative access.
class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& text, int dim);
    static Expression constant(double v);

    double eval(const std::vector<double>& x) const;
    Expression derivative(int axis) const; // d/dx_{axis+1}
    bool is_zero() const;

    std::string to_string() const;

    struct Node; // definition is internal to expr.cpp

private:
    using NodePtr = std::shared_ptr<const Node>;
    explicit Expression(NodePtr root) : root_(std::move(root)) {}
    NodePtr root_;
};

} // namespace heatforms
