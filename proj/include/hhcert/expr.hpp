#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hhcert::expr {

enum class NodeKind { Literal, Variable, Negate, Binary, Call };
enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class Func { Abs, Sqrt, Exp, Log, Min, Max, Pow };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable AST node. Variables carry a 0-based index plus the spelling they
/// were written with ("x" or "x3"); equality ignores the spelling.
struct Expr {
    NodeKind kind;
    double literal = 0.0;
    int var_index = 0;
    std::string var_name;
    BinOp op = BinOp::Add;
    Func func = Func::Abs;
    ExprPtr lhs, rhs;
    std::vector<ExprPtr> args;
};

inline ExprPtr make_literal(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Literal;
    e->literal = v;
    return e;
}

inline ExprPtr make_variable(int index, std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Variable;
    e->var_index = index;
    e->var_name = std::move(name);
    return e;
}

inline ExprPtr make_negate(ExprPtr child) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Negate;
    e->lhs = std::move(child);
    return e;
}

inline ExprPtr make_binary(BinOp op, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Binary;
    e->op = op;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
}

inline ExprPtr make_call(Func f, std::vector<ExprPtr> args) {
    auto e = std::make_shared<Expr>();
    e->kind = NodeKind::Call;
    e->func = f;
    e->args = std::move(args);
    return e;
}

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t position)
        : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

struct EvalEnv {
    int arity = 1;
    std::vector<double> values;
};

class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& subexpression, const std::vector<double>& inputs)
        : std::runtime_error(build(subexpression, inputs)), subexpression_(subexpression),
          inputs_(inputs) {}

    const std::string& subexpression() const { return subexpression_; }
    const std::vector<double>& inputs() const { return inputs_; }

private:
    static std::string build(const std::string& sub, const std::vector<double>& in) {
        std::ostringstream os;
        os << "non-finite value from " << sub << " with inputs (";
        for (std::size_t i = 0; i < in.size(); ++i) os << (i ? ", " : "") << in[i];
        os << ")";
        return os.str();
    }

    std::string subexpression_;
    std::vector<double> inputs_;
};

namespace detail {

inline int func_arity(Func f) {
    switch (f) {
        case Func::Min:
        case Func::Max:
        case Func::Pow: return 2;
        default: return 1;
    }
}

inline const char* func_name(Func f) {
    switch (f) {
        case Func::Abs: return "abs";
        case Func::Sqrt: return "sqrt";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Min: return "min";
        case Func::Max: return "max";
        case Func::Pow: return "pow";
    }
    return "?";
}

struct Token {
    enum Kind { Number, Ident, Op, LParen, RParen, Comma, End } kind = End;
    std::string text;
    double number = 0.0;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        current_ = Token{};
        current_.pos = pos_;
        if (pos_ >= text_.size()) {
            current_.kind = Token::End;
            return;
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t end = pos_;
            while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
            if (end < text_.size() && text_[end] == '.') {
                ++end;
                while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
            }
            if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
                std::size_t exp_end = end + 1;
                if (exp_end < text_.size() && (text_[exp_end] == '+' || text_[exp_end] == '-')) ++exp_end;
                if (exp_end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp_end]))) {
                    ++exp_end;
                    while (exp_end < text_.size() &&
                           std::isdigit(static_cast<unsigned char>(text_[exp_end])))
                        ++exp_end;
                    end = exp_end;
                }
            }
            current_.kind = Token::Number;
            current_.text = std::string(text_.substr(pos_, end - pos_));
            current_.number = std::strtod(current_.text.c_str(), nullptr);
            pos_ = end;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                          text_[end] == '_'))
                ++end;
            current_.kind = Token::Ident;
            current_.text = std::string(text_.substr(pos_, end - pos_));
            pos_ = end;
            return;
        }
        switch (c) {
            case '(': current_.kind = Token::LParen; break;
            case ')': current_.kind = Token::RParen; break;
            case ',': current_.kind = Token::Comma; break;
            case '+':
            case '-':
            case '*':
            case '/':
            case '^': current_.kind = Token::Op; break;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", pos_);
        }
        current_.text = std::string(1, c);
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Token current_;
};

// expr   := term { ("+" | "-") term }
// term   := factor { ("*" | "/") factor }
// factor := unary
// unary  := "-" unary | power
// power  := primary [ "^" unary ]
// primary:= number | ident [ "(" expr { "," expr } ")" ] | "(" expr ")"
//
// "^" binds tighter than unary minus (so "-2^2" is -(2^2)) and is
// right-associative through the unary exponent.
class Parser {
public:
    Parser(std::string_view text, int arity) : lexer_(text), arity_(arity) {}

    ExprPtr parse_all() {
        ExprPtr e = parse_expr();
        const Token& t = lexer_.peek();
        if (t.kind != Token::End) throw ParseError("unexpected trailing input", t.pos);
        return e;
    }

private:
    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        while (lexer_.peek().kind == Token::Op &&
               (lexer_.peek().text == "+" || lexer_.peek().text == "-")) {
            const Token op = lexer_.take();
            e = make_binary(op.text == "+" ? BinOp::Add : BinOp::Sub, e, parse_term());
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_unary();
        while (lexer_.peek().kind == Token::Op &&
               (lexer_.peek().text == "*" || lexer_.peek().text == "/")) {
            const Token op = lexer_.take();
            e = make_binary(op.text == "*" ? BinOp::Mul : BinOp::Div, e, parse_unary());
        }
        return e;
    }

    ExprPtr parse_unary() {
        if (lexer_.peek().kind == Token::Op && lexer_.peek().text == "-") {
            lexer_.take();
            return make_negate(parse_unary());
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        if (lexer_.peek().kind == Token::Op && lexer_.peek().text == "^") {
            lexer_.take();
            return make_binary(BinOp::Pow, base, parse_unary());
        }
        return base;
    }

    ExprPtr parse_primary() {
        const Token t = lexer_.take();
        if (t.kind == Token::Number) return make_literal(t.number);
        if (t.kind == Token::LParen) {
            ExprPtr e = parse_expr();
            expect_rparen(t.pos);
            return e;
        }
        if (t.kind == Token::Ident) {
            if (lexer_.peek().kind == Token::LParen) return parse_call(t);
            return variable(t);
        }
        throw ParseError("expected a number, variable, function call or '('", t.pos);
    }

    ExprPtr parse_call(const Token& name) {
        Func f;
        if (name.text == "abs") f = Func::Abs;
        else if (name.text == "sqrt") f = Func::Sqrt;
        else if (name.text == "exp") f = Func::Exp;
        else if (name.text == "log") f = Func::Log;
        else if (name.text == "min") f = Func::Min;
        else if (name.text == "max") f = Func::Max;
        else if (name.text == "pow") f = Func::Pow;
        else throw ParseError("unknown function '" + name.text + "'", name.pos);
        lexer_.take();  // '('
        std::vector<ExprPtr> args;
        args.push_back(parse_expr());
        while (lexer_.peek().kind == Token::Comma) {
            lexer_.take();
            args.push_back(parse_expr());
        }
        expect_rparen(name.pos);
        if (static_cast<int>(args.size()) != func_arity(f))
            throw ParseError("function '" + name.text + "' expects " +
                                 std::to_string(func_arity(f)) + " argument(s)",
                             name.pos);
        return make_call(f, std::move(args));
    }

    ExprPtr variable(const Token& t) {
        if (t.text == "x") {
            if (arity_ != 1)
                throw ParseError("bare 'x' is only valid at arity 1; use x1..xN", t.pos);
            return make_variable(0, "x");
        }
        if (t.text.size() >= 2 && t.text[0] == 'x') {
            int index = 0;
            const char* first = t.text.data() + 1;
            const char* last = t.text.data() + t.text.size();
            auto [ptr, ec] = std::from_chars(first, last, index);
            if (ec == std::errc() && ptr == last) {
                if (index < 1 || index > arity_)
                    throw ParseError("variable '" + t.text + "' is out of the declared arity " +
                                         std::to_string(arity_),
                                     t.pos);
                return make_variable(index - 1, t.text);
            }
        }
        throw ParseError("unknown identifier '" + t.text + "'", t.pos);
    }

    void expect_rparen(std::size_t open_pos) {
        const Token t = lexer_.take();
        if (t.kind != Token::RParen)
            throw ParseError("missing ')' for group opened earlier", open_pos);
    }

    Lexer lexer_;
    int arity_;
};

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

inline ExprPtr parse(std::string_view text, int arity) {
    if (arity < 1) throw std::domain_error("arity must be >= 1");
    if (text.empty()) throw ParseError("empty expression", 0);
    return detail::Parser(text, arity).parse_all();
}

/// IEEE-style evaluation; may return non-finite values (callers decide how to
/// surface those). Pure in (e, env).
inline double eval(const Expr& e, const EvalEnv& env) {
    switch (e.kind) {
        case NodeKind::Literal: return e.literal;
        case NodeKind::Variable:
            if (e.var_index < 0 || e.var_index >= static_cast<int>(env.values.size()))
                throw std::domain_error("variable index out of range for environment");
            return env.values[static_cast<std::size_t>(e.var_index)];
        case NodeKind::Negate: return -eval(*e.lhs, env);
        case NodeKind::Binary: {
            const double l = eval(*e.lhs, env);
            const double r = eval(*e.rhs, env);
            switch (e.op) {
                case BinOp::Add: return l + r;
                case BinOp::Sub: return l - r;
                case BinOp::Mul: return l * r;
                case BinOp::Div: return l / r;
                case BinOp::Pow: return std::pow(l, r);
            }
            return 0.0;
        }
        case NodeKind::Call: {
            const double a = eval(*e.args[0], env);
            switch (e.func) {
                case Func::Abs: return std::abs(a);
                case Func::Sqrt: return std::sqrt(a);
                case Func::Exp: return std::exp(a);
                case Func::Log: return std::log(a);
                case Func::Min: return std::min(a, eval(*e.args[1], env));
                case Func::Max: return std::max(a, eval(*e.args[1], env));
                case Func::Pow: return std::pow(a, eval(*e.args[1], env));
            }
            return 0.0;
        }
    }
    return 0.0;
}

std::string print(const Expr& e);

/// Like eval, but throws EvalError naming the deepest subexpression that
/// produced a non-finite value.
inline double eval_checked(const Expr& e, const EvalEnv& env) {
    auto walk = [&](auto&& self, const Expr& node) -> double {
        double v = 0.0;
        switch (node.kind) {
            case NodeKind::Literal:
            case NodeKind::Variable: return eval(node, env);
            case NodeKind::Negate: return -self(self, *node.lhs);
            case NodeKind::Binary: {
                const double l = self(self, *node.lhs);
                const double r = self(self, *node.rhs);
                switch (node.op) {
                    case BinOp::Add: v = l + r; break;
                    case BinOp::Sub: v = l - r; break;
                    case BinOp::Mul: v = l * r; break;
                    case BinOp::Div: v = l / r; break;
                    case BinOp::Pow: v = std::pow(l, r); break;
                }
                break;
            }
            case NodeKind::Call: {
                const double a = self(self, *node.args[0]);
                switch (node.func) {
                    case Func::Abs: v = std::abs(a); break;
                    case Func::Sqrt: v = std::sqrt(a); break;
                    case Func::Exp: v = std::exp(a); break;
                    case Func::Log: v = std::log(a); break;
                    case Func::Min: v = std::min(a, self(self, *node.args[1])); break;
                    case Func::Max: v = std::max(a, self(self, *node.args[1])); break;
                    case Func::Pow: v = std::pow(a, self(self, *node.args[1])); break;
                }
                break;
            }
        }
        if (!std::isfinite(v)) throw EvalError(print(node), env.values);
        return v;
    };
    return walk(walk, e);
}

namespace detail {

std::string print_wrapped(const Expr& e);

// Call arguments are already delimited by the call's parentheses, so calls
// appearing as arguments print bare.
inline std::string print_call_body(const Expr& e) {
    std::string out = func_name(e.func);
    out += "(";
    for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ",";
        const Expr& arg = *e.args[i];
        out += arg.kind == NodeKind::Call ? print_call_body(arg) : print_wrapped(arg);
    }
    out += ")";
    return out;
}

inline std::string print_wrapped(const Expr& e) {
    switch (e.kind) {
        case NodeKind::Literal: return format_double(e.literal);
        case NodeKind::Variable: return e.var_name.empty() ? "x" : e.var_name;
        case NodeKind::Negate: return "(-" + print_wrapped(*e.lhs) + ")";
        case NodeKind::Binary: {
            const char* op = "+";
            switch (e.op) {
                case BinOp::Add: op = "+"; break;
                case BinOp::Sub: op = "-"; break;
                case BinOp::Mul: op = "*"; break;
                case BinOp::Div: op = "/"; break;
                case BinOp::Pow: op = "^"; break;
            }
            return "(" + print_wrapped(*e.lhs) + op + print_wrapped(*e.rhs) + ")";
        }
        case NodeKind::Call: return "(" + print_call_body(e) + ")";
    }
    return "";
}

}  // namespace detail

/// Fully parenthesized canonical form; parse(print(e)) is structurally
/// identical to e (for the nonnegative literals the parser produces).
inline std::string print(const Expr& e) { return detail::print_wrapped(e); }

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Literal: return a.literal == b.literal;
        case NodeKind::Variable: return a.var_index == b.var_index;
        case NodeKind::Negate: return structurally_equal(*a.lhs, *b.lhs);
        case NodeKind::Binary:
            return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) &&
                   structurally_equal(*a.rhs, *b.rhs);
        case NodeKind::Call: {
            if (a.func != b.func || a.args.size() != b.args.size()) return false;
            for (std::size_t i = 0; i < a.args.size(); ++i)
                if (!structurally_equal(*a.args[i], *b.args[i])) return false;
            return true;
        }
    }
    return false;
}

}  // namespace hhcert::expr
