#include "corrugate/expression.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <vector>

namespace corrugate {

struct Expression::Node {
    enum class Kind { Number, Variable, Unary, Binary, Call };
    Kind kind;
    double value = 0.0;
    std::string name;  // variable or function name
    char op = 0;
    std::vector<std::shared_ptr<const Node>> kids;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr run() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size())
            throw ExpressionError("unexpected character '" +
                                  std::string(1, s_[pos_]) + "' at position " +
                                  std::to_string(pos_));
        return e;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {  // + and -
        NodePtr lhs = term();
        for (;;) {
            if (eat('+'))
                lhs = binary('+', lhs, term());
            else if (eat('-'))
                lhs = binary('-', lhs, term());
            else
                return lhs;
        }
    }
    NodePtr term() {  // * and /
        NodePtr lhs = factor();
        for (;;) {
            if (eat('*'))
                lhs = binary('*', lhs, factor());
            else if (eat('/'))
                lhs = binary('/', lhs, factor());
            else
                return lhs;
        }
    }
    NodePtr factor() {  // unary minus, then ^ (right-associative)
        if (eat('-')) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Unary;
            n->op = '-';
            n->kids.push_back(factor());
            return n;
        }
        NodePtr base = atom();
        if (eat('^')) return binary('^', base, factor());
        return base;
    }
    NodePtr atom() {
        skip();
        if (pos_ >= s_.size()) throw ExpressionError("unexpected end of expression");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!eat(')')) throw ExpressionError("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            double v = std::stod(s_.substr(pos_), &used);
            pos_ += used;
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Number;
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                    s_[pos_] == '_'))
                ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            if (eat('(')) {
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::Call;
                n->name = name;
                n->kids.push_back(expr());
                if (!eat(')')) throw ExpressionError("missing ')' after " + name);
                return n;
            }
            if (name == "pi") {
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::Number;
                n->value = M_PI;
                return n;
            }
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Variable;
            n->name = name;
            return n;
        }
        throw ExpressionError("unexpected character '" + std::string(1, c) +
                              "' at position " + std::to_string(pos_));
    }

    static NodePtr binary(char op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->op = op;
        n->kids = {std::move(a), std::move(b)};
        return n;
    }

    const std::string& s_;
    size_t pos_ = 0;
};

double eval_node(const Node& n, const std::map<std::string, double>& vars) {
    switch (n.kind) {
        case Node::Kind::Number:
            return n.value;
        case Node::Kind::Variable: {
            auto it = vars.find(n.name);
            if (it == vars.end())
                throw ExpressionError("unknown variable '" + n.name + "'");
            return it->second;
        }
        case Node::Kind::Unary:
            return -eval_node(*n.kids[0], vars);
        case Node::Kind::Binary: {
            const double a = eval_node(*n.kids[0], vars);
            const double b = eval_node(*n.kids[1], vars);
            switch (n.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/': return a / b;
                case '^': return std::pow(a, b);
            }
            throw ExpressionError("bad operator");
        }
        case Node::Kind::Call: {
            const double a = eval_node(*n.kids[0], vars);
            static const std::map<std::string, double (*)(double)> fns = {
                {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
                {"asin", std::asin}, {"acos", std::acos}, {"atan", std::atan},
                {"exp", std::exp},   {"log", std::log},   {"sqrt", std::sqrt},
                {"abs", std::fabs}};
            auto it = fns.find(n.name);
            if (it == fns.end())
                throw ExpressionError("unknown function '" + n.name + "'");
            return it->second(a);
        }
    }
    throw ExpressionError("bad node");
}

}  // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.root_ = Parser(text).run();
    e.text_ = text;
    return e;
}

double Expression::eval(const std::map<std::string, double>& vars) const {
    if (!root_) throw ExpressionError("empty expression");
    return eval_node(*root_, vars);
}

}  // namespace corrugate
