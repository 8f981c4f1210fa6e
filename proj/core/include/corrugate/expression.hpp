#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>

namespace corrugate {

struct ExpressionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A small arithmetic grammar for analytic plane fields in scene files:
// numbers, + - * / ^, parentheses, sin cos tan asin acos atan exp log sqrt
// abs, the constant pi, and free variables (ambient coordinates x y z w and
// the time s). Parsed once, evaluated per point.
class Expression {
public:
    Expression() = default;
    static Expression parse(const std::string& text);

    double eval(const std::map<std::string, double>& vars) const;
    const std::string& text() const { return text_; }

    struct Node;  // exposed for the parser implementation

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace corrugate
