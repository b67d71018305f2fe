// Recursive-descent parser for the expression language.
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?          exponent must fold to a constant
//   atom  := number | ident | func '(' args ')' | '(' expr ')'
//   func  := exp | log | sin | cos | tanh | sqrt | if
//   if(cmp, expr, expr)   with   cmp := expr ('<'|'<='|'>'|'>=') expr

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>

#include "obswin/error.hpp"
#include "obswin/expr.hpp"

namespace obswin {
namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Rel, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  double number = 0.0;
  Relation rel = Relation::Less;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= text_.size()) return tok;

    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      return lex_number(tok);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
        ++end;
      tok.type = Tok::Ident;
      tok.text = std::string(text_.substr(pos_, end - pos_));
      advance(end - pos_);
      return tok;
    }

    tok.text = std::string(1, c);
    switch (c) {
      case '+': tok.type = Tok::Plus; break;
      case '-': tok.type = Tok::Minus; break;
      case '*': tok.type = Tok::Star; break;
      case '/': tok.type = Tok::Slash; break;
      case '^': tok.type = Tok::Caret; break;
      case '(': tok.type = Tok::LParen; break;
      case ')': tok.type = Tok::RParen; break;
      case ',': tok.type = Tok::Comma; break;
      case '<':
      case '>': {
        const bool eq = pos_ + 1 < text_.size() && text_[pos_ + 1] == '=';
        tok.type = Tok::Rel;
        if (c == '<')
          tok.rel = eq ? Relation::LessEqual : Relation::Less;
        else
          tok.rel = eq ? Relation::GreaterEqual : Relation::Greater;
        if (eq) {
          tok.text += '=';
          advance(1);
        }
        break;
      }
      default:
        throw ParseError(ParseError::Kind::Syntax, "unexpected character '" + tok.text + "'",
                         tok.line, tok.column);
    }
    advance(1);
    return tok;
  }

 private:
  Token lex_number(Token tok) {
    std::size_t end = pos_;
    auto digits = [&] {
      while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
    };
    digits();
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      digits();
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp_end = end + 1;
      if (exp_end < text_.size() && (text_[exp_end] == '+' || text_[exp_end] == '-')) ++exp_end;
      if (exp_end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp_end]))) {
        end = exp_end;
        digits();
      }
    }
    tok.type = Tok::Number;
    tok.text = std::string(text_.substr(pos_, end - pos_));
    // strtod is locale-sensitive but the C locale is never changed here.
    tok.number = std::strtod(tok.text.c_str(), nullptr);
    if (!std::isfinite(tok.number))
      throw ParseError(ParseError::Kind::Syntax, "number out of range: " + tok.text, tok.line,
                       tok.column);
    advance(end - pos_);
    return tok;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      advance(1);
  }

  void advance(std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

std::optional<UnaryOp> function_named(std::string_view name) {
  if (name == "exp") return UnaryOp::Exp;
  if (name == "log") return UnaryOp::Log;
  if (name == "sin") return UnaryOp::Sin;
  if (name == "cos") return UnaryOp::Cos;
  if (name == "tanh") return UnaryOp::Tanh;
  if (name == "sqrt") return UnaryOp::Sqrt;
  return std::nullopt;
}

std::string describe(const Token& tok) {
  return tok.type == Tok::End ? "end of input" : "'" + tok.text + "'";
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t n, const ParamSet& params)
      : lexer_(text), n_(n), params_(params) {
    current_ = lexer_.next();
  }

  Expr parse() {
    Expr e = expr();
    if (current_.type == Tok::Rel)
      fail(ParseError::Kind::Syntax, "comparison is only allowed as the first argument of if()");
    if (current_.type != Tok::End) fail(ParseError::Kind::Syntax, "unexpected " + describe(current_));
    return e;
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg) const {
    throw ParseError(kind, msg, current_.line, current_.column);
  }

  Token take() {
    Token tok = current_;
    current_ = lexer_.next();
    return tok;
  }

  void expect(Tok type, const char* what) {
    if (current_.type != type)
      fail(ParseError::Kind::Syntax, std::string("expected ") + what + " but found " +
                                         describe(current_));
    take();
  }

  Expr expr() {
    Expr lhs = term();
    while (current_.type == Tok::Plus || current_.type == Tok::Minus) {
      const BinaryOp op = take().type == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      lhs = Expr::make_binary(op, lhs, term());
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (current_.type == Tok::Star || current_.type == Tok::Slash) {
      const BinaryOp op = take().type == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      lhs = Expr::make_binary(op, lhs, unary());
    }
    return lhs;
  }

  Expr unary() {
    if (current_.type == Tok::Minus) {
      take();
      return Expr::make_unary(UnaryOp::Neg, unary());
    }
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (current_.type != Tok::Caret) return base;
    take();
    const Token at = current_;
    const Expr exponent = simplify(unary());
    if (!exponent.is_constant())
      throw ParseError(ParseError::Kind::NonConstantExponent,
                       "exponent must be a numeric constant, got '" + to_string(exponent) + "'",
                       at.line, at.column);
    return Expr::make_power(base, exponent.value());
  }

  Expr atom() {
    switch (current_.type) {
      case Tok::Number: return Expr::constant(take().number);
      case Tok::LParen: {
        take();
        Expr inner = expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: return identifier();
      default: fail(ParseError::Kind::Syntax, "expected an operand but found " + describe(current_));
    }
  }

  Expr identifier() {
    const Token tok = current_;
    const std::string& name = tok.text;
    if (name == "if") {
      take();
      return if_call(tok);
    }
    if (auto op = function_named(name)) {
      take();
      if (current_.type != Tok::LParen)
        fail(ParseError::Kind::Syntax, "expected '(' after function '" + name + "'");
      take();
      Expr arg = expr();
      if (current_.type == Tok::Comma)
        throw ParseError(ParseError::Kind::Arity, "function '" + name + "' takes 1 argument",
                         tok.line, tok.column);
      expect(Tok::RParen, "')'");
      return Expr::make_unary(*op, arg);
    }
    take();
    if (params_.contains(name)) return Expr::parameter(name);
    if (auto index = state_index(name)) {
      if (*index >= 1 && *index <= n_) return Expr::variable(*index - 1);
      throw ParseError(ParseError::Kind::UnknownIdentifier,
                       "'" + name + "' is not a state variable of a system with n = " +
                           std::to_string(n_),
                       tok.line, tok.column);
    }
    throw ParseError(ParseError::Kind::UnknownIdentifier, "unknown identifier '" + name + "'",
                     tok.line, tok.column);
  }

  Expr if_call(const Token& at) {
    expect(Tok::LParen, "'(' after if");
    Expr lhs = expr();
    if (current_.type != Tok::Rel)
      fail(ParseError::Kind::Syntax, "expected a comparison in if() but found " + describe(current_));
    const Relation rel = take().rel;
    Expr rhs = expr();
    Expr branches[2];
    for (Expr& branch : branches) {
      if (current_.type == Tok::RParen)
        throw ParseError(ParseError::Kind::Arity, "if() takes 3 arguments", at.line, at.column);
      expect(Tok::Comma, "','");
      branch = expr();
    }
    if (current_.type == Tok::Comma)
      throw ParseError(ParseError::Kind::Arity, "if() takes 3 arguments", at.line, at.column);
    expect(Tok::RParen, "')'");
    return Expr::make_conditional(lhs, rel, rhs, branches[0], branches[1]);
  }

  static std::optional<std::size_t> state_index(std::string_view name) {
    if (name.size() < 2 || name[0] != 'x') return std::nullopt;
    std::size_t value = 0;
    const auto* first = name.data() + 1;
    const auto* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
  }

  Lexer lexer_;
  Token current_;
  std::size_t n_;
  const ParamSet& params_;
};

}  // namespace

Expr parse_expr(std::string_view text, std::size_t n, const ParamSet& params) {
  if (n == 0) throw PreconditionError("state dimension must be at least 1");
  return Parser(text, n, params).parse();
}

}  // namespace obswin
