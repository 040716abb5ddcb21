#pragma once

#include <carnot/scalar_field.hpp>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace carnot {

/// Immutable expression tree over coordinates x1..xn (x, y, t alias x1, x2, x3 when n = 3) and pi.
class Expression {
public:
    enum class Kind { Number, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };

    struct Node {
        Kind kind = Kind::Number;
        double number = 0.0;
        int variable = 0;  ///< zero-based coordinate index
        std::string name;  ///< identifier as written (variables, functions, pi)
        std::vector<std::shared_ptr<const Node>> args;
    };

    Expression() = default;
    explicit Expression(std::shared_ptr<const Node> root, int dim) : root_(std::move(root)), dim_(dim) {}

    int dim() const noexcept { return dim_; }
    const Node& root() const { return *root_; }

    /// Throws EvaluationError outside the natural domain (log of x <= 0, 0 division, ...).
    double evaluate(const Point& x) const;
    JetScalar evaluate_jet(const Point& x) const;

    /// Canonical text: minimal parentheses, numbers in shortest round-trip form.
    std::string to_string() const;

    ScalarField to_field(const std::string& name = "") const;

private:
    std::shared_ptr<const Node> root_;
    int dim_ = 0;
};

/// ^ is right-associative and binds tighter than unary minus, which binds tighter than * and /.
/// Throws SyntaxError or UnknownSymbol carrying the byte offset.
Expression parse_expression(const std::string& text, int dim = 3);

/// Built-in boundary presets as expression text: linear (a, b, c), aronsson, bumps, cone.
std::vector<std::string> boundary_preset_names();
std::string boundary_preset(const std::string& name, const std::map<std::string, double>& params = {});

}  // namespace carnot
