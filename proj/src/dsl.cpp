#include <terraverse/dsl.hpp>
#include <terraverse/error.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

namespace terraverse {

Expr::Expr() : node_(std::make_shared<const Node>(Node{LiteralNode{0.0}})) {}

Expr Expr::literal(double value) { return Expr(std::make_shared<const Node>(Node{LiteralNode{value}})); }

Expr Expr::difficulty() { return Expr(std::make_shared<const Node>(Node{DifficultyNode{}})); }

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs)
{
    return Expr(std::make_shared<const Node>(Node{BinaryNode{op, std::move(lhs), std::move(rhs)}}));
}

Expr Expr::call(CallFn fn, std::vector<Expr> args)
{
    return Expr(std::make_shared<const Node>(Node{CallNode{fn, std::move(args)}}));
}

Expr Expr::negate(Expr operand) { return Expr(std::make_shared<const Node>(Node{NegateNode{std::move(operand)}})); }

namespace {

double eval_node(const Expr::Node& node, double d)
{
    struct Visitor {
        double d;
        double operator()(const LiteralNode& n) const { return n.value; }
        double operator()(const DifficultyNode&) const { return d; }
        double operator()(const NegateNode& n) const { return -eval_node(n.operand.node(), d); }
        double operator()(const BinaryNode& n) const
        {
            const double a = eval_node(n.lhs.node(), d);
            const double b = eval_node(n.rhs.node(), d);
            switch (n.op) {
            case BinaryOp::add: return a + b;
            case BinaryOp::sub: return a - b;
            case BinaryOp::mul: return a * b;
            case BinaryOp::div:
                if (b == 0.0)
                    throw EvalError("division by zero at d=" + std::to_string(d));
                return a / b;
            }
            return 0.0;
        }
        double operator()(const CallNode& n) const
        {
            switch (n.fn) {
            case CallFn::min: return std::min(eval_node(n.args[0].node(), d), eval_node(n.args[1].node(), d));
            case CallFn::max: return std::max(eval_node(n.args[0].node(), d), eval_node(n.args[1].node(), d));
            case CallFn::round: return std::round(eval_node(n.args[0].node(), d));
            }
            return 0.0;
        }
    };
    return std::visit(Visitor{d}, node.value);
}

bool nodes_equal(const Expr::Node& a, const Expr::Node& b);

} // namespace

double Expr::eval(double d) const
{
    if (!(d >= 0.0 && d <= 1.0))
        throw EvalError("difficulty " + std::to_string(d) + " outside [0, 1]");
    const double v = eval_node(*node_, d);
    if (!std::isfinite(v))
        throw EvalError("non-finite expression value at d=" + std::to_string(d));
    return v;
}

double eval_expr(const Expr& e, double d) { return e.eval(d); }

bool operator==(const Expr& a, const Expr& b)
{
    return a.node_ == b.node_ || nodes_equal(*a.node_, *b.node_);
}

namespace {

bool nodes_equal(const Expr::Node& a, const Expr::Node& b)
{
    if (a.value.index() != b.value.index())
        return false;
    if (auto* la = std::get_if<LiteralNode>(&a.value))
        return la->value == std::get<LiteralNode>(b.value).value
            && std::signbit(la->value) == std::signbit(std::get<LiteralNode>(b.value).value);
    if (std::holds_alternative<DifficultyNode>(a.value))
        return true;
    if (auto* na = std::get_if<NegateNode>(&a.value))
        return na->operand == std::get<NegateNode>(b.value).operand;
    if (auto* ba = std::get_if<BinaryNode>(&a.value)) {
        const auto& bb = std::get<BinaryNode>(b.value);
        return ba->op == bb.op && ba->lhs == bb.lhs && ba->rhs == bb.rhs;
    }
    const auto& ca = std::get<CallNode>(a.value);
    const auto& cb = std::get<CallNode>(b.value);
    return ca.fn == cb.fn && ca.args == cb.args;
}

} // namespace

Expr linear_expr(double base, double slope)
{
    if (slope == 0.0)
        return Expr::literal(base);
    auto term = Expr::binary(BinaryOp::mul, Expr::literal(slope), Expr::difficulty());
    if (base == 0.0)
        return term;
    return Expr::binary(BinaryOp::add, Expr::literal(base), std::move(term));
}

// ---------------------------------------------------------------------------
// Segment vocabulary

namespace {

constexpr std::array<std::string_view, 2> platform_params{"length", "height"};
constexpr std::array<std::string_view, 2> gap_params{"length", "depth"};
constexpr std::array<std::string_view, 3> ramp_params{"length", "start_height", "end_height"};
constexpr std::array<std::string_view, 3> stairs_params{"steps", "step_length", "step_height"};
constexpr std::array<std::string_view, 2> box_params{"length", "height"};
constexpr std::array<std::string_view, 3> beam_params{"length", "height", "width"};
constexpr std::array<std::string_view, 3> poles_params{"count", "spacing", "pole_width"};

constexpr std::array<std::string_view, 2> common_optional{"width", "lateral_offset"};
constexpr std::array<std::string_view, 3> ramp_optional{"width", "lateral_offset", "bank"};
constexpr std::array<std::string_view, 1> beam_optional{"lateral_offset"};
constexpr std::array<std::string_view, 3> stairs_optional{"width", "lateral_offset", "base_height"};

constexpr std::array<std::pair<SegmentKind, std::string_view>, 7> kind_names{{
    {SegmentKind::platform, "platform"},
    {SegmentKind::gap, "gap"},
    {SegmentKind::ramp, "ramp"},
    {SegmentKind::stairs, "stairs"},
    {SegmentKind::box, "box"},
    {SegmentKind::beam, "beam"},
    {SegmentKind::poles, "poles"},
}};

} // namespace

std::string_view kind_name(SegmentKind kind)
{
    for (const auto& [k, name] : kind_names)
        if (k == kind)
            return name;
    return "?";
}

std::optional<SegmentKind> kind_from_name(std::string_view name)
{
    for (const auto& [k, n] : kind_names)
        if (n == name)
            return k;
    return std::nullopt;
}

std::span<const std::string_view> required_params(SegmentKind kind)
{
    switch (kind) {
    case SegmentKind::platform: return platform_params;
    case SegmentKind::gap: return gap_params;
    case SegmentKind::ramp: return ramp_params;
    case SegmentKind::stairs: return stairs_params;
    case SegmentKind::box: return box_params;
    case SegmentKind::beam: return beam_params;
    case SegmentKind::poles: return poles_params;
    }
    return {};
}

std::span<const std::string_view> optional_params(SegmentKind kind)
{
    switch (kind) {
    case SegmentKind::ramp: return ramp_optional;
    case SegmentKind::stairs: return stairs_optional;
    case SegmentKind::beam: return beam_optional;
    default: return common_optional;
    }
}

const Expr& Segment::param(std::string_view name) const
{
    auto it = params.find(std::string(name));
    if (it == params.end())
        throw ArityError(std::string(kind_name(kind)) + " has no parameter '" + std::string(name) + "'");
    return it->second;
}

std::optional<Expr> Segment::maybe_param(std::string_view name) const
{
    auto it = params.find(std::string(name));
    if (it == params.end())
        return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
    end,
    ident,
    number,
    string,
    lbrace,
    rbrace,
    lparen,
    rparen,
    lbracket,
    rbracket,
    colon,
    comma,
    dotdot,
    plus,
    minus,
    star,
    slash,
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double number = 0.0;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.line = line_;
            t.column = col_;
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Tok::ident;
                while (pos_ < src_.size()
                       && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    t.text += advance();
            }
            else if (std::isdigit(static_cast<unsigned char>(c))
                     || (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                lex_number(t);
            }
            else if (c == '"') {
                lex_string(t);
            }
            else if (c == '.' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '.') {
                advance();
                advance();
                t.kind = Tok::dotdot;
            }
            else {
                switch (c) {
                case '{': t.kind = Tok::lbrace; break;
                case '}': t.kind = Tok::rbrace; break;
                case '(': t.kind = Tok::lparen; break;
                case ')': t.kind = Tok::rparen; break;
                case '[': t.kind = Tok::lbracket; break;
                case ']': t.kind = Tok::rbracket; break;
                case ':': t.kind = Tok::colon; break;
                case ',': t.kind = Tok::comma; break;
                case '+': t.kind = Tok::plus; break;
                case '-': t.kind = Tok::minus; break;
                case '*': t.kind = Tok::star; break;
                case '/': t.kind = Tok::slash; break;
                default: throw SyntaxError(std::string("unexpected character '") + c + "'", line_, col_);
                }
                advance();
            }
            out.push_back(std::move(t));
        }
    }

private:
    char advance()
    {
        const char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        }
        else {
            ++col_;
        }
        return c;
    }

    void skip_space()
    {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    advance();
            }
            else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            }
            else {
                break;
            }
        }
    }

    void lex_number(Token& t)
    {
        t.kind = Tok::number;
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                advance();
        };
        digits();
        // a '.' only belongs to the number when a digit follows (keeps "0..1" a range)
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            advance();
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-'))
                ++look;
            if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
                while (pos_ < look)
                    advance();
                digits();
            }
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw SyntaxError("malformed number '" + t.text + "'", t.line, t.column);
    }

    void lex_string(Token& t)
    {
        t.kind = Tok::string;
        advance();
        for (;;) {
            if (pos_ >= src_.size())
                throw SyntaxError("unterminated string", t.line, t.column);
            char c = advance();
            if (c == '"')
                return;
            if (c == '\\') {
                if (pos_ >= src_.size())
                    throw SyntaxError("unterminated string", t.line, t.column);
                const char e = advance();
                switch (e) {
                case 'n': t.text += '\n'; break;
                case 't': t.text += '\t'; break;
                case '"': t.text += '"'; break;
                case '\\': t.text += '\\'; break;
                default: throw SyntaxError(std::string("unknown escape '\\") + e + "'", line_, col_);
                }
            }
            else {
                t.text += c;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    Parser(std::vector<Token> tokens, std::vector<ParseWarning>* warnings)
        : toks_(std::move(tokens)), warnings_(warnings) {}

    TerrainProgram program()
    {
        TerrainProgram p;
        expect_keyword("terrain");
        p.name = expect(Tok::string, "terrain name string").text;
        expect(Tok::lbrace, "'{'");
        if (is_keyword("doc")) {
            next();
            p.doc = expect(Tok::string, "doc string").text;
        }
        if (is_keyword("param")) {
            next();
            const Token& var = expect(Tok::ident, "'d'");
            if (var.text != "d")
                throw SyntaxError("only the difficulty variable 'd' can be declared", var.line, var.column);
            expect(Tok::colon, "':'");
            const Token lo = expect(Tok::number, "range start");
            expect(Tok::dotdot, "'..'");
            const Token hi = expect(Tok::number, "range end");
            if (lo.number != 0.0 || hi.number != 1.0)
                throw SyntaxError("difficulty range is always 0..1", lo.line, lo.column);
            p.declares_param = true;
        }
        while (peek().kind == Tok::ident && !is_keyword("goals")) {
            const Token& kind_tok = peek();
            Segment seg = segment();
            if (p.segments.empty() && seg.kind != SegmentKind::platform)
                throw SyntaxError("first segment must be a platform (spawn area)", kind_tok.line, kind_tok.column);
            p.segments.push_back(std::move(seg));
        }
        if (p.segments.empty())
            throw SyntaxError("program needs at least one segment", peek().line, peek().column);
        expect_keyword("goals");
        if (is_keyword("auto")) {
            next();
            p.goals.automatic = true;
        }
        else {
            const Token open = expect(Tok::lbracket, "'auto' or '['");
            p.goals.automatic = false;
            do {
                expect(Tok::lparen, "'('");
                GoalExpr g;
                g.x = expr();
                expect(Tok::comma, "','");
                g.y = expr();
                expect(Tok::rparen, "')'");
                p.goals.points.push_back(std::move(g));
            } while (accept(Tok::comma));
            expect(Tok::rbracket, "']'");
            if (p.goals.points.size() != 8)
                throw ArityError("line " + std::to_string(open.line) + ": expected exactly 8 goals, got "
                                 + std::to_string(p.goals.points.size()));
        }
        expect(Tok::rbrace, "'}'");
        if (peek().kind != Tok::end)
            throw SyntaxError("trailing input after program", peek().line, peek().column);
        return p;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    bool accept(Tok kind)
    {
        if (peek().kind != kind)
            return false;
        ++pos_;
        return true;
    }

    const Token& expect(Tok kind, const char* what)
    {
        if (peek().kind != kind)
            throw SyntaxError(std::string("expected ") + what + describe(peek()), peek().line, peek().column);
        return next();
    }

    bool is_keyword(std::string_view kw) const { return peek().kind == Tok::ident && peek().text == kw; }

    void expect_keyword(std::string_view kw)
    {
        if (!is_keyword(kw))
            throw SyntaxError("expected '" + std::string(kw) + "'" + describe(peek()), peek().line, peek().column);
        next();
    }

    static std::string describe(const Token& t)
    {
        if (t.kind == Tok::end)
            return ", found end of input";
        if (t.kind == Tok::string)
            return ", found string";
        if (!t.text.empty())
            return ", found '" + t.text + "'";
        return "";
    }

    Segment segment()
    {
        const Token kind_tok = next();
        auto kind = kind_from_name(kind_tok.text);
        if (!kind)
            throw UnknownKind("line " + std::to_string(kind_tok.line) + ", column " + std::to_string(kind_tok.column)
                              + ": unknown segment kind '" + kind_tok.text + "'");
        Segment seg;
        seg.kind = *kind;
        expect(Tok::lbrace, "'{'");
        const auto required = required_params(seg.kind);
        const auto optional = optional_params(seg.kind);
        do {
            const Token name = expect(Tok::ident, "field name");
            expect(Tok::colon, "':'");
            Expr value = expr();
            const bool known = std::find(required.begin(), required.end(), name.text) != required.end()
                || std::find(optional.begin(), optional.end(), name.text) != optional.end();
            if (!known)
                throw ArityError("line " + std::to_string(name.line) + ": " + kind_tok.text
                                 + " does not take parameter '" + name.text + "'");
            if (!seg.params.emplace(name.text, std::move(value)).second)
                throw ArityError("line " + std::to_string(name.line) + ": duplicate parameter '" + name.text + "'");
        } while (accept(Tok::comma));
        expect(Tok::rbrace, "'}'");
        for (auto req : required)
            if (!seg.params.contains(std::string(req)))
                throw ArityError("line " + std::to_string(kind_tok.line) + ": " + kind_tok.text
                                 + " is missing parameter '" + std::string(req) + "'");
        return seg;
    }

    Expr expr()
    {
        Expr lhs = term();
        for (;;) {
            if (accept(Tok::plus))
                lhs = Expr::binary(BinaryOp::add, std::move(lhs), term());
            else if (accept(Tok::minus))
                lhs = Expr::binary(BinaryOp::sub, std::move(lhs), term());
            else
                return lhs;
        }
    }

    Expr term()
    {
        Expr lhs = factor();
        for (;;) {
            if (accept(Tok::star)) {
                lhs = Expr::binary(BinaryOp::mul, std::move(lhs), factor());
            }
            else if (peek().kind == Tok::slash) {
                const Token slash = next();
                Expr rhs = factor();
                warn_if_zero_divisor(rhs, slash);
                lhs = Expr::binary(BinaryOp::div, std::move(lhs), std::move(rhs));
            }
            else {
                return lhs;
            }
        }
    }

    Expr factor()
    {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::number:
            next();
            return Expr::literal(t.number);
        case Tok::minus:
            next();
            if (peek().kind == Tok::number)
                return Expr::literal(-next().number);
            return Expr::negate(factor());
        case Tok::lparen: {
            next();
            Expr inner = expr();
            expect(Tok::rparen, "')'");
            return inner;
        }
        case Tok::ident: {
            const Token id = next();
            if (id.text == "d")
                return Expr::difficulty();
            CallFn fn;
            std::size_t arity;
            if (id.text == "min") {
                fn = CallFn::min;
                arity = 2;
            }
            else if (id.text == "max") {
                fn = CallFn::max;
                arity = 2;
            }
            else if (id.text == "round") {
                fn = CallFn::round;
                arity = 1;
            }
            else {
                throw SyntaxError("unknown identifier '" + id.text + "' (only 'd' and min/max/round are allowed)",
                                  id.line, id.column);
            }
            expect(Tok::lparen, "'('");
            std::vector<Expr> args;
            args.push_back(expr());
            if (accept(Tok::comma))
                args.push_back(expr());
            expect(Tok::rparen, "')'");
            if (args.size() != arity)
                throw SyntaxError(id.text + " takes " + std::to_string(arity) + " argument(s)", id.line, id.column);
            return Expr::call(fn, std::move(args));
        }
        default:
            throw SyntaxError("expected expression" + describe(t), t.line, t.column);
        }
    }

    // Zero at a sample point or a sign change between neighbors (a pole in between).
    void warn_if_zero_divisor(const Expr& divisor, const Token& at)
    {
        if (!warnings_)
            return;
        constexpr int samples = 256;
        std::optional<double> prev;
        for (int i = 0; i <= samples; ++i) {
            const double d = static_cast<double>(i) / samples;
            double v;
            try {
                v = divisor.eval(d);
            }
            catch (const EvalError&) {
                prev.reset();
                continue;
            }
            if (v == 0.0 || (prev && std::signbit(*prev) != std::signbit(v))) {
                warnings_->push_back({at.line, at.column, "divisor reaches zero near d=" + std::to_string(d)});
                return;
            }
            prev = v;
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<ParseWarning>* warnings_;
};

} // namespace

TerrainProgram parse_program(std::string_view text, std::vector<ParseWarning>* warnings)
{
    Parser parser(Lexer(text).run(), warnings);
    return parser.program();
}

void validate_program(const TerrainProgram& program)
{
    if (program.segments.empty())
        throw SyntaxError("program needs at least one segment", 0, 0);
    if (program.segments.front().kind != SegmentKind::platform)
        throw SyntaxError("first segment must be a platform (spawn area)", 0, 0);
    for (const auto& seg : program.segments) {
        const auto required = required_params(seg.kind);
        const auto optional = optional_params(seg.kind);
        for (auto req : required)
            if (!seg.params.contains(std::string(req)))
                throw ArityError(std::string(kind_name(seg.kind)) + " is missing parameter '" + std::string(req) + "'");
        for (const auto& [name, _] : seg.params) {
            const bool known = std::find(required.begin(), required.end(), name) != required.end()
                || std::find(optional.begin(), optional.end(), name) != optional.end();
            if (!known)
                throw ArityError(std::string(kind_name(seg.kind)) + " does not take parameter '" + name + "'");
        }
    }
    if (!program.goals.automatic && program.goals.points.size() != 8)
        throw ArityError("expected exactly 8 goals, got " + std::to_string(program.goals.points.size()));
}

// ---------------------------------------------------------------------------
// Formatter

namespace {

std::string format_number(double v)
{
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

int precedence(const Expr& e)
{
    if (auto* b = std::get_if<BinaryNode>(&e.node().value))
        return (b->op == BinaryOp::add || b->op == BinaryOp::sub) ? 1 : 2;
    return 3;
}

void write_expr(std::ostream& os, const Expr& e);

void write_operand(std::ostream& os, const Expr& e, bool parens)
{
    if (parens)
        os << '(';
    write_expr(os, e);
    if (parens)
        os << ')';
}

void write_expr(std::ostream& os, const Expr& e)
{
    const auto& v = e.node().value;
    if (auto* lit = std::get_if<LiteralNode>(&v)) {
        os << format_number(lit->value);
    }
    else if (std::holds_alternative<DifficultyNode>(v)) {
        os << 'd';
    }
    else if (auto* neg = std::get_if<NegateNode>(&v)) {
        os << "-(";
        write_expr(os, neg->operand);
        os << ')';
    }
    else if (auto* bin = std::get_if<BinaryNode>(&v)) {
        const int prec = precedence(e);
        // operators are left-associative, so a same-precedence right child needs parentheses
        write_operand(os, bin->lhs, precedence(bin->lhs) < prec);
        switch (bin->op) {
        case BinaryOp::add: os << " + "; break;
        case BinaryOp::sub: os << " - "; break;
        case BinaryOp::mul: os << " * "; break;
        case BinaryOp::div: os << " / "; break;
        }
        write_operand(os, bin->rhs, precedence(bin->rhs) <= prec);
    }
    else {
        const auto& call = std::get<CallNode>(v);
        os << (call.fn == CallFn::min ? "min(" : call.fn == CallFn::max ? "max(" : "round(");
        for (std::size_t i = 0; i < call.args.size(); ++i) {
            if (i)
                os << ", ";
            write_expr(os, call.args[i]);
        }
        os << ')';
    }
}

std::string quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    out += '"';
    return out;
}

} // namespace

std::string format_expr(const Expr& e)
{
    std::ostringstream os;
    write_expr(os, e);
    return os.str();
}

std::string format_program(const TerrainProgram& p)
{
    std::ostringstream os;
    os << "terrain " << quote(p.name) << " {\n";
    if (!p.doc.empty())
        os << "  doc " << quote(p.doc) << "\n";
    if (p.declares_param)
        os << "  param d: 0..1\n";
    for (const auto& seg : p.segments) {
        os << "  " << kind_name(seg.kind) << " { ";
        bool first = true;
        auto emit = [&](std::string_view name) {
            auto it = seg.params.find(std::string(name));
            if (it == seg.params.end())
                return;
            if (!first)
                os << ", ";
            first = false;
            os << name << ": ";
            write_expr(os, it->second);
        };
        for (auto name : required_params(seg.kind))
            emit(name);
        for (auto name : optional_params(seg.kind))
            emit(name);
        os << " }\n";
    }
    if (p.goals.automatic) {
        os << "  goals auto\n";
    }
    else {
        os << "  goals [";
        for (std::size_t i = 0; i < p.goals.points.size(); ++i) {
            if (i)
                os << ", ";
            os << '(';
            write_expr(os, p.goals.points[i].x);
            os << ", ";
            write_expr(os, p.goals.points[i].y);
            os << ')';
        }
        os << "]\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace terraverse
