#include "blowup/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace blowup {

namespace {

using Node = Expr::Node;
using NodePtr = std::unique_ptr<Node>;

NodePtr make_const(double v) {
    auto n = std::make_unique<Node>();
    n->kind = Expr::Kind::constant;
    n->value = v;
    return n;
}

NodePtr make_unary(NodePtr a) {
    auto n = std::make_unique<Node>();
    n->kind = Expr::Kind::negate;
    n->a = std::move(a);
    return n;
}

NodePtr make_binary(Expr::BinOp op, NodePtr a, NodePtr b) {
    auto n = std::make_unique<Node>();
    n->kind = Expr::Kind::binary;
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_call(Expr::Fn fn, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = Expr::Kind::call;
    n->fn = fn;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    Parser(std::string_view text, int dimension, bool scalar_mode)
        : text_(text), dim_(dimension), scalar_(scalar_mode) {}

    NodePtr run() {
        auto e = expression();
        skip_space();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int dim_;
    bool scalar_;

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr expression() {
        auto lhs = term();
        for (;;) {
            if (consume('+'))
                lhs = make_binary(Expr::BinOp::add, std::move(lhs), term());
            else if (consume('-'))
                lhs = make_binary(Expr::BinOp::sub, std::move(lhs), term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        auto lhs = unary();
        for (;;) {
            if (consume('*'))
                lhs = make_binary(Expr::BinOp::mul, std::move(lhs), unary());
            else if (consume('/'))
                lhs = make_binary(Expr::BinOp::div, std::move(lhs), unary());
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (consume('-')) return make_unary(unary());
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (consume('^')) return make_binary(Expr::BinOp::pow, std::move(base), unary());
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        if (c == '(') {
            ++pos_;
            auto e = expression();
            if (!consume(')')) throw ParseError("missing closing parenthesis", pos_);
            return e;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // 'e' belonged to something else; not a valid exponent
            }
        }
        double v = 0.0;
        const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (res.ec != std::errc()) throw ParseError("malformed number", start);
        return make_const(v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);

        if (name == "exp" || name == "sqrt" || name == "abs" || name == "log" ||
            name == "pow") {
            if (!consume('(')) throw ParseError("expected '(' after function name", pos_);
            auto a = expression();
            NodePtr b;
            const bool binary_fn = (name == "pow");
            if (consume(',')) {
                if (!binary_fn) throw ParseError("function takes one argument", start);
                b = expression();
            } else if (binary_fn) {
                throw ParseError("pow takes two arguments", start);
            }
            if (!consume(')')) throw ParseError("missing closing parenthesis", pos_);
            Expr::Fn fn = name == "exp"    ? Expr::Fn::exp
                          : name == "sqrt" ? Expr::Fn::sqrt
                          : name == "abs"  ? Expr::Fn::abs
                          : name == "log"  ? Expr::Fn::log
                                           : Expr::Fn::pow;
            return make_call(fn, std::move(a), std::move(b));
        }

        if (scalar_) {
            if (name == "s" || name == "t" || name == "x1") {
                auto n = std::make_unique<Node>();
                n->kind = Expr::Kind::variable;
                n->index = 0;
                return n;
            }
            throw ParseError("unknown identifier '" + std::string(name) +
                                 "' (argument is s, t or x1)",
                             start);
        }

        if (name == "r") {
            auto n = std::make_unique<Node>();
            n->kind = Expr::Kind::radius;
            return n;
        }
        if (name == "N") {
            auto n = std::make_unique<Node>();
            n->kind = Expr::Kind::dimension;
            return n;
        }
        if (name.size() >= 2 && name[0] == 'x') {
            int idx = 0;
            const auto res =
                std::from_chars(name.data() + 1, name.data() + name.size(), idx);
            if (res.ec == std::errc() && res.ptr == name.data() + name.size()) {
                if (idx < 1 || idx > dim_)
                    throw ParseError("variable index out of range for dimension " +
                                         std::to_string(dim_),
                                     start);
                auto n = std::make_unique<Node>();
                n->kind = Expr::Kind::variable;
                n->index = static_cast<std::size_t>(idx - 1);
                return n;
            }
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }
};

double eval_node(const Node* n, std::span<const double> point, double radius, int dim);

double apply_fn(Expr::Fn fn, double a, double b) {
    switch (fn) {
        case Expr::Fn::exp: return std::exp(a);
        case Expr::Fn::sqrt:
            if (a < 0.0) throw EvalError("sqrt of negative value");
            return std::sqrt(a);
        case Expr::Fn::abs: return std::fabs(a);
        case Expr::Fn::log:
            if (a <= 0.0) throw EvalError("log of nonpositive value");
            return std::log(a);
        case Expr::Fn::pow: return std::pow(a, b);
    }
    return 0.0;
}

double eval_node(const Node* n, std::span<const double> point, double radius, int dim) {
    switch (n->kind) {
        case Expr::Kind::constant: return n->value;
        case Expr::Kind::dimension: return static_cast<double>(dim);
        case Expr::Kind::variable: return point[n->index];
        case Expr::Kind::radius: return radius;
        case Expr::Kind::negate: return -eval_node(n->a.get(), point, radius, dim);
        case Expr::Kind::binary: {
            const double a = eval_node(n->a.get(), point, radius, dim);
            const double b = eval_node(n->b.get(), point, radius, dim);
            switch (n->op) {
                case Expr::BinOp::add: return a + b;
                case Expr::BinOp::sub: return a - b;
                case Expr::BinOp::mul: return a * b;
                case Expr::BinOp::div: return a / b;
                case Expr::BinOp::pow: return std::pow(a, b);
            }
            return 0.0;
        }
        case Expr::Kind::call: {
            const double a = eval_node(n->a.get(), point, radius, dim);
            const double b = n->b ? eval_node(n->b.get(), point, radius, dim) : 0.0;
            return apply_fn(n->fn, a, b);
        }
    }
    return 0.0;
}

int precedence(const Node* n) {
    switch (n->kind) {
        case Expr::Kind::binary:
            switch (n->op) {
                case Expr::BinOp::add:
                case Expr::BinOp::sub: return 1;
                case Expr::BinOp::mul:
                case Expr::BinOp::div: return 2;
                case Expr::BinOp::pow: return 4;
            }
            return 5;
        case Expr::Kind::negate: return 3;
        default: return 5;
    }
}

void print_node(const Node* n, std::string& out);

void print_child(const Node* child, int parent_level, bool is_right, Expr::BinOp parent_op,
                 std::string& out) {
    const int lvl = precedence(child);
    bool parens = lvl < parent_level;
    if (lvl == parent_level) {
        // +, -, * and / associate to the left, so an equal-precedence right
        // child keeps its parentheses: a*(b/c) re-parses as (a*b)/c
        // otherwise, which is a different tree (and a different rounding).
        const bool left_assoc = parent_op != Expr::BinOp::pow;
        if (left_assoc && is_right) parens = true;
        if (parent_op == Expr::BinOp::pow && !is_right) parens = true;
    }
    if (parens) out += '(';
    print_node(child, out);
    if (parens) out += ')';
}

void print_number(double v, std::string& out) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // trim to the shortest round-trip form
    for (int prec = 1; prec < 17; ++prec) {
        char tmp[32];
        std::snprintf(tmp, sizeof tmp, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(tmp, "%lf", &back);
        if (back == v) {
            out += tmp;
            return;
        }
    }
    out += buf;
}

void print_node(const Node* n, std::string& out) {
    switch (n->kind) {
        case Expr::Kind::constant: print_number(n->value, out); return;
        case Expr::Kind::dimension: out += 'N'; return;
        case Expr::Kind::variable:
            out += 'x';
            out += std::to_string(n->index + 1);
            return;
        case Expr::Kind::radius: out += 'r'; return;
        case Expr::Kind::negate:
            out += '-';
            print_child(n->a.get(), 3, false, Expr::BinOp::sub, out);
            return;
        case Expr::Kind::binary: {
            const int lvl = precedence(n);
            const char* sym = n->op == Expr::BinOp::add   ? " + "
                              : n->op == Expr::BinOp::sub ? " - "
                              : n->op == Expr::BinOp::mul ? "*"
                              : n->op == Expr::BinOp::div ? "/"
                                                          : "^";
            print_child(n->a.get(), lvl, false, n->op, out);
            out += sym;
            print_child(n->b.get(), lvl, true, n->op, out);
            return;
        }
        case Expr::Kind::call: {
            const char* name = n->fn == Expr::Fn::exp    ? "exp"
                               : n->fn == Expr::Fn::sqrt ? "sqrt"
                               : n->fn == Expr::Fn::abs  ? "abs"
                               : n->fn == Expr::Fn::log  ? "log"
                                                         : "pow";
            out += name;
            out += '(';
            print_node(n->a.get(), out);
            if (n->b) {
                out += ", ";
                print_node(n->b.get(), out);
            }
            out += ')';
            return;
        }
    }
}

NodePtr clone_node(const Node* n) {
    auto c = std::make_unique<Node>();
    c->kind = n->kind;
    c->value = n->value;
    c->index = n->index;
    c->op = n->op;
    c->fn = n->fn;
    if (n->a) c->a = clone_node(n->a.get());
    if (n->b) c->b = clone_node(n->b.get());
    return c;
}

bool equal_node(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Expr::Kind::constant: return a->value == b->value;
        case Expr::Kind::dimension:
        case Expr::Kind::radius: return true;
        case Expr::Kind::variable: return a->index == b->index;
        case Expr::Kind::negate: return equal_node(a->a.get(), b->a.get());
        case Expr::Kind::binary:
            return a->op == b->op && equal_node(a->a.get(), b->a.get()) &&
                   equal_node(a->b.get(), b->b.get());
        case Expr::Kind::call:
            return a->fn == b->fn && equal_node(a->a.get(), b->a.get()) &&
                   equal_node(a->b.get(), b->b.get());
    }
    return false;
}

}  // namespace

double Expr::eval(std::span<const double> point, double radius_hint) const {
    if (!root_) throw EvalError("empty expression");
    if (static_cast<int>(point.size()) != dimension_)
        throw EvalError("point dimension mismatch");
    double radius = radius_hint;
    if (radius < 0.0) {
        double s = 0.0;
        for (double x : point) s += x * x;
        radius = std::sqrt(s);
    }
    const double v = eval_node(root_.get(), point, radius, dimension_);
    if (!std::isfinite(v)) throw EvalError("non-finite result");
    return v;
}

std::string Expr::str() const {
    std::string out;
    if (root_) print_node(root_.get(), out);
    return out;
}

Expr Expr::clone() const {
    return Expr(root_ ? clone_node(root_.get()) : nullptr, dimension_);
}

bool Expr::equal(const Expr& a, const Expr& b) {
    return a.dimension_ == b.dimension_ && equal_node(a.root_.get(), b.root_.get());
}

Expr parse_expression(std::string_view text, int dimension) {
    if (dimension < 1) throw ParseError("dimension must be positive", 0);
    Parser p(text, dimension, false);
    return Expr(p.run(), dimension);
}

Expr parse_scalar_function(std::string_view text) {
    Parser p(text, 1, true);
    return Expr(p.run(), 1);
}

CompiledExpr::CompiledExpr(const Expr& e) : dimension_(e.dimension()) {
    struct Walker {
        std::vector<Instr>* prog;
        void walk(const Node* n) {
            switch (n->kind) {
                case Expr::Kind::constant:
                    prog->push_back({OpCode::push_const, n->value, 0});
                    return;
                case Expr::Kind::dimension:
                    prog->push_back({OpCode::push_dim, 0.0, 0});
                    return;
                case Expr::Kind::variable:
                    prog->push_back({OpCode::push_var, 0.0, n->index});
                    return;
                case Expr::Kind::radius:
                    prog->push_back({OpCode::push_radius, 0.0, 0});
                    return;
                case Expr::Kind::negate:
                    walk(n->a.get());
                    prog->push_back({OpCode::negate, 0.0, 0});
                    return;
                case Expr::Kind::binary:
                    walk(n->a.get());
                    walk(n->b.get());
                    switch (n->op) {
                        case Expr::BinOp::add: prog->push_back({OpCode::add, 0.0, 0}); break;
                        case Expr::BinOp::sub: prog->push_back({OpCode::sub, 0.0, 0}); break;
                        case Expr::BinOp::mul: prog->push_back({OpCode::mul, 0.0, 0}); break;
                        case Expr::BinOp::div: prog->push_back({OpCode::div, 0.0, 0}); break;
                        case Expr::BinOp::pow:
                            prog->push_back({OpCode::pow_op, 0.0, 0});
                            break;
                    }
                    return;
                case Expr::Kind::call:
                    walk(n->a.get());
                    if (n->b) walk(n->b.get());
                    switch (n->fn) {
                        case Expr::Fn::exp:
                            prog->push_back({OpCode::call_exp, 0.0, 0});
                            break;
                        case Expr::Fn::sqrt:
                            prog->push_back({OpCode::call_sqrt, 0.0, 0});
                            break;
                        case Expr::Fn::abs:
                            prog->push_back({OpCode::call_abs, 0.0, 0});
                            break;
                        case Expr::Fn::log:
                            prog->push_back({OpCode::call_log, 0.0, 0});
                            break;
                        case Expr::Fn::pow:
                            prog->push_back({OpCode::pow_op, 0.0, 0});
                            break;
                    }
                    return;
            }
        }
    };
    if (e.root()) {
        Walker w{&program_};
        w.walk(e.root());
    }
    stack_.resize(program_.size() + 1);
}

double CompiledExpr::eval(std::span<const double> point, double radius_hint) const {
    double radius = radius_hint;
    if (radius < 0.0) {
        double s = 0.0;
        for (double x : point) s += x * x;
        radius = std::sqrt(s);
    }
    std::size_t top = 0;
    double* st = stack_.data();
    for (const Instr& in : program_) {
        switch (in.code) {
            case OpCode::push_const: st[top++] = in.value; break;
            case OpCode::push_var: st[top++] = point[in.index]; break;
            case OpCode::push_radius: st[top++] = radius; break;
            case OpCode::push_dim: st[top++] = static_cast<double>(dimension_); break;
            case OpCode::negate: st[top - 1] = -st[top - 1]; break;
            case OpCode::add: st[top - 2] += st[top - 1]; --top; break;
            case OpCode::sub: st[top - 2] -= st[top - 1]; --top; break;
            case OpCode::mul: st[top - 2] *= st[top - 1]; --top; break;
            case OpCode::div: st[top - 2] /= st[top - 1]; --top; break;
            case OpCode::pow_op:
                st[top - 2] = std::pow(st[top - 2], st[top - 1]);
                --top;
                break;
            case OpCode::call_exp: st[top - 1] = std::exp(st[top - 1]); break;
            case OpCode::call_sqrt:
                if (st[top - 1] < 0.0) throw EvalError("sqrt of negative value");
                st[top - 1] = std::sqrt(st[top - 1]);
                break;
            case OpCode::call_abs: st[top - 1] = std::fabs(st[top - 1]); break;
            case OpCode::call_log:
                if (st[top - 1] <= 0.0) throw EvalError("log of nonpositive value");
                st[top - 1] = std::log(st[top - 1]);
                break;
        }
    }
    const double v = top ? st[0] : 0.0;
    if (!std::isfinite(v)) throw EvalError("non-finite result");
    return v;
}

Derivatives numeric_derivatives(const Expr& e, std::span<const double> point,
                                double step_scale) {
    const int n = e.dimension();
    if (static_cast<int>(point.size()) != n) throw EvalError("point dimension mismatch");
    std::vector<double> x(point.begin(), point.end());
    const double f0 = e.eval(x);

    Derivatives d;
    d.gradient.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        const double h = step_scale * std::max(1.0, std::fabs(xi));
        auto at = [&](double step) {
            x[static_cast<std::size_t>(i)] = xi + step;
            const double v = e.eval(x);
            x[static_cast<std::size_t>(i)] = xi;
            return v;
        };
        const double fp = at(h), fm = at(-h);
        const double fp2 = at(0.5 * h), fm2 = at(-0.5 * h);

        const double d1_h = (fp - fm) / (2.0 * h);
        const double d1_h2 = (fp2 - fm2) / h;
        d.gradient[static_cast<std::size_t>(i)] = (4.0 * d1_h2 - d1_h) / 3.0;

        const double d2_h = (fp - 2.0 * f0 + fm) / (h * h);
        const double d2_h2 = (fp2 - 2.0 * f0 + fm2) / (0.25 * h * h);
        d.laplacian += (4.0 * d2_h2 - d2_h) / 3.0;
    }
    return d;
}

}  // namespace blowup
