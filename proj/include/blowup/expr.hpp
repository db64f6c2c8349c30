#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blowup {

/// Parse failure with the byte offset of the offending token.
struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at offset " + std::to_string(pos) + ")"),
          position(pos) {}
};

/// Evaluation failure: domain violation (sqrt of negative, log of nonpositive)
/// or a non-finite result.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Expression over x1..xN, r = |x|, and the dimension constant N, with
/// + - * / ^, unary minus, and exp/sqrt/abs/log/pow calls.
class Expr {
public:
    enum class Kind { constant, dimension, variable, radius, negate, binary, call };
    enum class BinOp { add, sub, mul, div, pow };
    enum class Fn { exp, sqrt, abs, log, pow };

    struct Node {
        Kind kind;
        double value = 0.0;      // constant
        std::size_t index = 0;   // variable, 0-based
        BinOp op = BinOp::add;   // binary
        Fn fn = Fn::exp;         // call
        std::unique_ptr<Node> a, b;
    };

    Expr() = default;
    Expr(std::unique_ptr<Node> root, int dimension)
        : root_(std::move(root)), dimension_(dimension) {}

    int dimension() const { return dimension_; }
    const Node* root() const { return root_.get(); }
    bool empty() const { return root_ == nullptr; }

    /// IEEE-double evaluation. point.size() must equal dimension().
    /// radius_hint, when nonnegative, is taken as |x| without recomputation.
    double eval(std::span<const double> point, double radius_hint = -1.0) const;

    /// Text form that reparses to a structurally equal tree.
    std::string str() const;

    Expr clone() const;

    static bool equal(const Expr& a, const Expr& b);

private:
    std::unique_ptr<Node> root_;
    int dimension_ = 0;
};

/// Parses `text` against the declared dimension (variable indices are checked
/// at parse time). Throws ParseError.
Expr parse_expression(std::string_view text, int dimension);

/// Parses a one-variable function body (argument spelled s, t or x1),
/// for nonlinearities f(s).
Expr parse_scalar_function(std::string_view text);

/// Flat postfix program for tight sampling loops; semantics identical to
/// Expr::eval including domain checks.
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const Expr& e);

    double eval(std::span<const double> point, double radius_hint = -1.0) const;
    int dimension() const { return dimension_; }

private:
    enum class OpCode : unsigned char {
        push_const, push_var, push_radius, push_dim,
        negate, add, sub, mul, div, pow_op,
        call_exp, call_sqrt, call_abs, call_log
    };
    struct Instr {
        OpCode code;
        double value = 0.0;
        std::size_t index = 0;
    };
    std::vector<Instr> program_;
    int dimension_ = 0;
    mutable std::vector<double> stack_;
};

struct Derivatives {
    std::vector<double> gradient;
    double laplacian = 0.0;
};

/// Gradient and Laplacian by second-order central differences with one
/// Richardson extrapolation step; the step in coordinate i is
/// step_scale * max(1, |point_i|).
Derivatives numeric_derivatives(const Expr& e, std::span<const double> point,
                                double step_scale = 2e-3);

}  // namespace blowup
