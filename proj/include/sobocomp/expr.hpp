#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <string>

#include "sobocomp/errors.hpp"

namespace sobocomp {

// Minimal arithmetic grammar for config-supplied masks, densities and form
// entries: + - * / ^, abs/min/max/sin/cos/exp/sqrt, comparisons (0/1 valued),
// coordinates x1..x3 with aliases x,y,z. Parsed once, evaluated per cell.
class Expr {
    struct Node;
    using NodePtr = std::unique_ptr<Node>;

    enum class Op {
        Const, Coord,
        Add, Sub, Mul, Div, Pow, Neg,
        Lt, Le, Gt, Ge,
        Abs, Sin, Cos, Exp, Sqrt,
        Min, Max,
    };

    struct Node {
        Op op;
        double value = 0;
        int coord = 0;
        NodePtr a, b;
    };

public:
    static Expr parse(const std::string& text) {
        Parser p(text);
        Expr e;
        e.root_ = p.parse_comparison();
        p.skip_ws();
        if (!p.done()) fail_config("expression: trailing input at '" + p.rest() + "'");
        return e;
    }

    double eval(const std::array<double, 3>& x) const {
        if (!root_) fail_config("expression: empty");
        return eval_node(*root_, x);
    }

private:
    NodePtr root_;

    static double eval_node(const Node& n, const std::array<double, 3>& x) {
        switch (n.op) {
            case Op::Const: return n.value;
            case Op::Coord: return x[static_cast<size_t>(n.coord)];
            case Op::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
            case Op::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
            case Op::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
            case Op::Div: return eval_node(*n.a, x) / eval_node(*n.b, x);
            case Op::Pow: return std::pow(eval_node(*n.a, x), eval_node(*n.b, x));
            case Op::Neg: return -eval_node(*n.a, x);
            case Op::Lt: return eval_node(*n.a, x) < eval_node(*n.b, x) ? 1.0 : 0.0;
            case Op::Le: return eval_node(*n.a, x) <= eval_node(*n.b, x) ? 1.0 : 0.0;
            case Op::Gt: return eval_node(*n.a, x) > eval_node(*n.b, x) ? 1.0 : 0.0;
            case Op::Ge: return eval_node(*n.a, x) >= eval_node(*n.b, x) ? 1.0 : 0.0;
            case Op::Abs: return std::fabs(eval_node(*n.a, x));
            case Op::Sin: return std::sin(eval_node(*n.a, x));
            case Op::Cos: return std::cos(eval_node(*n.a, x));
            case Op::Exp: return std::exp(eval_node(*n.a, x));
            case Op::Sqrt: return std::sqrt(eval_node(*n.a, x));
            case Op::Min: return std::min(eval_node(*n.a, x), eval_node(*n.b, x));
            case Op::Max: return std::max(eval_node(*n.a, x), eval_node(*n.b, x));
        }
        fail_invariant("expression: unknown op");
    }

    static NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
        NodePtr n = std::make_unique<Node>();
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    class Parser {
    public:
        explicit Parser(const std::string& s) : s_(s) {}

        NodePtr parse_comparison() {
            NodePtr lhs = parse_sum();
            skip_ws();
            Op op;
            if (try_tok("<=")) op = Op::Le;
            else if (try_tok(">=")) op = Op::Ge;
            else if (try_tok("<")) op = Op::Lt;
            else if (try_tok(">")) op = Op::Gt;
            else return lhs;
            return make_binary(op, std::move(lhs), parse_sum());
        }

        void skip_ws() {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        bool done() const { return pos_ >= s_.size(); }
        std::string rest() const { return s_.substr(pos_); }

    private:
        NodePtr parse_sum() {
            NodePtr lhs = parse_product();
            for (;;) {
                skip_ws();
                if (try_tok("+")) lhs = make_binary(Op::Add, std::move(lhs), parse_product());
                else if (try_tok("-")) lhs = make_binary(Op::Sub, std::move(lhs), parse_product());
                else return lhs;
            }
        }

        NodePtr parse_product() {
            NodePtr lhs = parse_unary();
            for (;;) {
                skip_ws();
                if (try_tok("*")) lhs = make_binary(Op::Mul, std::move(lhs), parse_unary());
                else if (try_tok("/")) lhs = make_binary(Op::Div, std::move(lhs), parse_unary());
                else return lhs;
            }
        }

        NodePtr parse_unary() {
            skip_ws();
            if (try_tok("-")) {
                NodePtr n = std::make_unique<Node>();
                n->op = Op::Neg;
                n->a = parse_unary();
                return n;
            }
            return parse_power();
        }

        NodePtr parse_power() {
            NodePtr base = parse_atom();
            skip_ws();
            if (try_tok("^")) return make_binary(Op::Pow, std::move(base), parse_unary());
            return base;
        }

        NodePtr parse_atom() {
            skip_ws();
            if (done()) fail_config("expression: unexpected end of input");
            char c = s_[pos_];
            if (c == '(') {
                ++pos_;
                NodePtr inner = parse_comparison();
                skip_ws();
                if (!try_tok(")")) fail_config("expression: missing ')'");
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
            fail_config(std::string("expression: unexpected character '") + c + "'");
        }

        NodePtr parse_number() {
            size_t end = pos_;
            while (end < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                    s_[end] == 'e' || s_[end] == 'E' ||
                    ((s_[end] == '+' || s_[end] == '-') && end > pos_ &&
                     (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
                ++end;
            NodePtr n = std::make_unique<Node>();
            n->op = Op::Const;
            try {
                n->value = std::stod(s_.substr(pos_, end - pos_));
            } catch (const std::exception&) {
                fail_config("expression: bad number at '" + s_.substr(pos_) + "'");
            }
            pos_ = end;
            return n;
        }

        NodePtr parse_name() {
            size_t end = pos_;
            while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
            std::string name = s_.substr(pos_, end - pos_);
            pos_ = end;
            if (name == "x" || name == "x1") return coord(0);
            if (name == "y" || name == "x2") return coord(1);
            if (name == "z" || name == "x3") return coord(2);
            if (name == "pi") {
                NodePtr n = std::make_unique<Node>();
                n->op = Op::Const;
                n->value = 3.14159265358979323846;
                return n;
            }
            skip_ws();
            if (!try_tok("(")) fail_config("expression: unknown name '" + name + "'");
            if (name == "abs" || name == "sin" || name == "cos" || name == "exp" || name == "sqrt") {
                NodePtr n = std::make_unique<Node>();
                n->op = name == "abs"   ? Op::Abs
                        : name == "sin" ? Op::Sin
                        : name == "cos" ? Op::Cos
                        : name == "exp" ? Op::Exp
                                        : Op::Sqrt;
                n->a = parse_comparison();
                skip_ws();
                if (!try_tok(")")) fail_config("expression: missing ')' after " + name);
                return n;
            }
            if (name == "min" || name == "max") {
                NodePtr a = parse_comparison();
                skip_ws();
                if (!try_tok(",")) fail_config("expression: expected ',' in " + name);
                NodePtr b = parse_comparison();
                skip_ws();
                if (!try_tok(")")) fail_config("expression: missing ')' after " + name);
                return make_binary(name == "min" ? Op::Min : Op::Max, std::move(a), std::move(b));
            }
            fail_config("expression: unknown function '" + name + "'");
        }

        NodePtr coord(int i) {
            NodePtr n = std::make_unique<Node>();
            n->op = Op::Coord;
            n->coord = i;
            return n;
        }

        bool try_tok(const char* tok) {
            size_t len = std::char_traits<char>::length(tok);
            if (s_.compare(pos_, len, tok) == 0) {
                pos_ += len;
                return true;
            }
            return false;
        }

        const std::string& s_;
        size_t pos_ = 0;
    };
};

}  // namespace sobocomp
