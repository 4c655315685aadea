#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace terraverse {

enum class BinaryOp { add, sub, mul, div };
enum class CallFn { min, max, round };

/// Immutable arithmetic expression over the difficulty variable `d`.
/// Copies share the underlying tree.
class Expr {
public:
    struct Node;

    Expr();

    static Expr literal(double value);
    static Expr difficulty();
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
    static Expr call(CallFn fn, std::vector<Expr> args);
    static Expr negate(Expr operand);

    const Node& node() const { return *node_; }

    /// Deterministic evaluation; throws EvalError on division by zero or
    /// when d lies outside [0, 1].
    double eval(double d) const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct LiteralNode {
    double value;
};
struct DifficultyNode {};
struct BinaryNode {
    BinaryOp op;
    Expr lhs;
    Expr rhs;
};
struct CallNode {
    CallFn fn;
    std::vector<Expr> args;
};
struct NegateNode {
    Expr operand;
};

struct Expr::Node {
    std::variant<LiteralNode, DifficultyNode, BinaryNode, CallNode, NegateNode> value;
};

double eval_expr(const Expr& e, double d);

/// Convenience for the `a + b*d` form used by generators.
Expr linear_expr(double base, double slope);

enum class SegmentKind { platform, gap, ramp, stairs, box, beam, poles };

std::string_view kind_name(SegmentKind kind);
std::optional<SegmentKind> kind_from_name(std::string_view name);

/// Required parameters in canonical order (beam's `width` is listed here).
std::span<const std::string_view> required_params(SegmentKind kind);
/// Optional fields accepted on top of the required set.
std::span<const std::string_view> optional_params(SegmentKind kind);

struct Segment {
    SegmentKind kind = SegmentKind::platform;
    /// Required parameters and any optional fields present, keyed by name.
    std::map<std::string, Expr> params;

    const Expr& param(std::string_view name) const;
    std::optional<Expr> maybe_param(std::string_view name) const;

    friend bool operator==(const Segment&, const Segment&) = default;
};

struct GoalExpr {
    Expr x;
    Expr y;
    friend bool operator==(const GoalExpr&, const GoalExpr&) = default;
};

struct GoalSpec {
    bool automatic = true;
    std::vector<GoalExpr> points; // exactly 8 when !automatic

    friend bool operator==(const GoalSpec&, const GoalSpec&) = default;
};

struct TerrainProgram {
    std::string name;
    std::string doc;
    bool declares_param = false;
    std::vector<Segment> segments;
    GoalSpec goals;

    friend bool operator==(const TerrainProgram&, const TerrainProgram&) = default;
};

struct ParseWarning {
    int line;
    int column;
    std::string message;
};

TerrainProgram parse_program(std::string_view text, std::vector<ParseWarning>* warnings = nullptr);

/// Canonical text; parse_program(format_program(p)) == p.
std::string format_program(const TerrainProgram& program);
std::string format_expr(const Expr& e);

/// Checks the structural invariants the parser enforces. Throws the same
/// error types as parse_program (used for programmatically built ASTs).
void validate_program(const TerrainProgram& program);

} // namespace terraverse
