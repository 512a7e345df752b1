#include "confgap/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

namespace confgap {

namespace {

enum class Op { Number, X1, X2, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt };

struct Node {
    Op op;
    double value = 0.0;
    std::unique_ptr<Node> lhs;
    std::unique_ptr<Node> rhs;
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

Jet2 evaluate(const Node& n, const Jet2& x1, const Jet2& x2) {
    switch (n.op) {
        case Op::Number: return Jet2::constant(n.value);
        case Op::X1: return x1;
        case Op::X2: return x2;
        case Op::Add: return evaluate(*n.lhs, x1, x2) + evaluate(*n.rhs, x1, x2);
        case Op::Sub: return evaluate(*n.lhs, x1, x2) - evaluate(*n.rhs, x1, x2);
        case Op::Mul: return evaluate(*n.lhs, x1, x2) * evaluate(*n.rhs, x1, x2);
        case Op::Div: return evaluate(*n.lhs, x1, x2) / evaluate(*n.rhs, x1, x2);
        case Op::Pow: return pow(evaluate(*n.lhs, x1, x2), evaluate(*n.rhs, x1, x2));
        case Op::Neg: return -evaluate(*n.lhs, x1, x2);
        case Op::Exp: return exp(evaluate(*n.lhs, x1, x2));
        case Op::Log: return log(evaluate(*n.lhs, x1, x2));
        case Op::Sqrt: return sqrt(evaluate(*n.lhs, x1, x2));
    }
    return {};
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(normalize(text)) {}

    NodePtr parse() {
        NodePtr root = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected character");
        return root;
    }

private:
    // maps the typographic minus sign to ASCII
    static std::string normalize(std::string_view in) {
        std::string out;
        for (std::size_t i = 0; i < in.size(); ++i) {
            if (i + 2 < in.size() && static_cast<unsigned char>(in[i]) == 0xE2 &&
                static_cast<unsigned char>(in[i + 1]) == 0x88 && static_cast<unsigned char>(in[i + 2]) == 0x92) {
                out.push_back('-');
                i += 2;
            } else {
                out.push_back(in[i]);
            }
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("expression parse error at offset " + std::to_string(pos_) + ": " + why + " in '" +
                         text_ + "'");
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::Add, std::move(lhs), term());
            else if (accept('-')) lhs = make(Op::Sub, std::move(lhs), term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Op::Mul, std::move(lhs), unary());
            else if (accept('/')) lhs = make(Op::Div, std::move(lhs), unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::Pow, std::move(base), unary());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        if (accept('(')) {
            NodePtr inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "x1") return make(Op::X1);
            if (name == "x2") return make(Op::X2);
            if (name == "pi") return literal(std::numbers::pi);
            if (name == "e") return literal(std::numbers::e);
            Op fn;
            if (name == "exp") fn = Op::Exp;
            else if (name == "log") fn = Op::Log;
            else if (name == "sqrt") fn = Op::Sqrt;
            else fail("unknown identifier '" + name + "'");
            if (!accept('(')) fail("expected '(' after " + name);
            NodePtr arg = expr();
            if (!accept(')')) fail("expected ')'");
            return make(fn, std::move(arg));
        }
        fail("unexpected character");
    }

    NodePtr number() {
        double value = 0.0;
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{}) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return literal(value);
    }

    static NodePtr literal(double v) {
        NodePtr n = make(Op::Number);
        n->value = v;
        return n;
    }

    std::string text_;
    std::size_t pos_ = 0;
};

}  // namespace

ScalarField parse_expression(std::string_view text) {
    std::shared_ptr<const Node> root = Parser(text).parse();
    if (root->op == Op::Number) {
        ScalarField c = ScalarField::constant(root->value);
        return c;
    }
    return ScalarField::from_jet([root](const Jet2& x1, const Jet2& x2) { return evaluate(*root, x1, x2); },
                                 std::string(text));
}

}  // namespace confgap
