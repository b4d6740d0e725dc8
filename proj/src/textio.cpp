#include "ffg/textio.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <set>

namespace ffg {

PositionedError::PositionedError(const std::string& what, int line, int column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

constexpr int kMaxNesting = 200;
constexpr long long kMaxExponent = 1'000'000;

enum class Tok {
  Ident,
  Number,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  Arrow,
  Colon,
  Comma,
  EndOfStatement,  // newline or ';'
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  bool imaginary = false;
  int line = 1;
  int column = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_blanks();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= text_.size()) {
      tok.kind = Tok::End;
      return tok;
    }
    const char c = text_[pos_];
    if (c == '\n' || c == ';') {
      advance();
      tok.kind = Tok::EndOfStatement;
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < text_.size() &&
                                                          std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      return lex_number(tok);
    }
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) advance();
      tok.kind = Tok::Ident;
      tok.text = std::string(text_.substr(start, pos_ - start));
      return tok;
    }
    advance();
    switch (c) {
      case '+': tok.kind = Tok::Plus; return tok;
      case '*': tok.kind = Tok::Star; return tok;
      case '/': tok.kind = Tok::Slash; return tok;
      case '^': tok.kind = Tok::Caret; return tok;
      case '(': tok.kind = Tok::LParen; return tok;
      case ')': tok.kind = Tok::RParen; return tok;
      case ':': tok.kind = Tok::Colon; return tok;
      case ',': tok.kind = Tok::Comma; return tok;
      case '-':
        if (pos_ < text_.size() && text_[pos_] == '>') {
          advance();
          tok.kind = Tok::Arrow;
        } else {
          tok.kind = Tok::Minus;
        }
        return tok;
      default: break;
    }
    const auto byte = static_cast<unsigned char>(c);
    std::string shown = std::isprint(byte) ? std::string(1, c) : "\\x" + hex(byte);
    throw ParseError("unexpected character '" + shown + "'", tok.line, tok.column);
  }

 private:
  static std::string hex(unsigned char b) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", b);
    return buf;
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_blanks() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token lex_number(Token tok) {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      advance();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        while (pos_ < look) advance();
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
      }
    }
    tok.kind = Tok::Number;
    tok.text = std::string(text_.substr(start, pos_ - start));
    const auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
    if (ec != std::errc() || ptr != tok.text.data() + tok.text.size() || !std::isfinite(tok.number)) {
      throw SemanticError("number '" + tok.text + "' is out of range", tok.line, tok.column);
    }
    if (pos_ < text_.size() && text_[pos_] == 'i' &&
        (pos_ + 1 >= text_.size() || !ident_char(text_[pos_ + 1]))) {
      advance();
      tok.imaginary = true;
    }
    return tok;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

std::unique_ptr<Expr> make_number(Complex value, int line, int column) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    throw SemanticError("constant expression is not finite", line, column);
  }
  auto e = std::make_unique<Expr>();
  e->kind = Expr::Kind::Number;
  e->value = value;
  e->line = line;
  e->column = column;
  return e;
}

Complex divide(Complex a, Complex b) {
  if (b.imag() == 0.0) return {a.real() / b.real(), a.imag() / b.real()};
  return a / b;
}

Complex int_power(Complex base, long long k) {
  Complex result = 1.0;
  while (k > 0) {
    if (k & 1) result *= base;
    k >>= 1;
    if (k > 0) base *= base;
  }
  return result;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { shift(); }

  MapDocument parse() {
    MapDocument doc;
    bool have_vars = false;
    bool have_order = false;
    while (!(have_vars && have_order)) {
      skip_statement_ends();
      if (cur_.kind != Tok::Ident) fail("expected header 'vars: ...; order: N'");
      if (cur_.text == "vars" && !have_vars) {
        shift();
        expect(Tok::Colon, "':' after 'vars'");
        parse_variables(doc);
        have_vars = true;
      } else if (cur_.text == "order" && !have_order) {
        shift();
        expect(Tok::Colon, "':' after 'order'");
        if (cur_.kind != Tok::Number || cur_.imaginary) fail("expected integer order");
        const Token order_tok = cur_;
        const double value = cur_.number;
        if (value != std::floor(value) || value < 1 || value > kMaxOrder) {
          throw SemanticError("order must be an integer in [1, " + std::to_string(kMaxOrder) + "]",
                              order_tok.line, order_tok.column);
        }
        doc.order = static_cast<int>(value);
        shift();
        have_order = true;
      } else {
        fail("expected header 'vars: ...; order: N'");
      }
      if (cur_.kind != Tok::EndOfStatement && cur_.kind != Tok::End) fail("expected end of header statement");
    }
    doc.n = static_cast<int>(doc.variables.size());
    variables_ = &doc.variables;

    std::vector<std::optional<Binding>> slots(doc.variables.size());
    while (true) {
      skip_statement_ends();
      if (cur_.kind == Tok::End) break;
      if (cur_.kind != Tok::Ident) fail("expected binding '<variable> -> <expression>'");
      const Token name = cur_;
      const int slot = variable_index(name.text);
      if (slot < 0) throw SemanticError("binding for undeclared variable '" + name.text + "'", name.line, name.column);
      if (slots[static_cast<std::size_t>(slot)]) {
        throw SemanticError("variable '" + name.text + "' is bound twice", name.line, name.column);
      }
      shift();
      expect(Tok::Arrow, "'->'");
      Binding b;
      b.name = name.text;
      b.line = name.line;
      b.expr = parse_expr(0);
      if (cur_.kind != Tok::EndOfStatement && cur_.kind != Tok::End) fail("unexpected token after expression");
      slots[static_cast<std::size_t>(slot)] = std::move(b);
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!slots[i]) {
        throw SemanticError("missing binding for variable '" + doc.variables[i] + "'", cur_.line, cur_.column);
      }
      doc.bindings.push_back(std::move(*slots[i]));
    }
    return doc;
  }

 private:
  static bool reserved(const std::string& name) {
    return name == "i" || name == "pi" || name == "exp" || name == "cos" || name == "sin" ||
           name == "vars" || name == "order";
  }

  void parse_variables(MapDocument& doc) {
    std::set<std::string> seen;
    while (true) {
      if (cur_.kind != Tok::Ident) fail("expected variable name");
      if (reserved(cur_.text)) throw SemanticError("'" + cur_.text + "' is reserved", cur_.line, cur_.column);
      if (!seen.insert(cur_.text).second) {
        throw SemanticError("variable '" + cur_.text + "' declared twice", cur_.line, cur_.column);
      }
      doc.variables.push_back(cur_.text);
      if (static_cast<int>(doc.variables.size()) > kMaxVars) {
        throw SemanticError("too many variables", cur_.line, cur_.column);
      }
      shift();
      if (cur_.kind != Tok::Comma) break;
      shift();
    }
  }

  int variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables_->size(); ++i) {
      if ((*variables_)[i] == name) return static_cast<int>(i);
    }
    return -1;
  }

  void shift() { cur_ = lexer_.next(); }

  void skip_statement_ends() {
    while (cur_.kind == Tok::EndOfStatement) shift();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + (cur_.kind == Tok::End ? " (at end of input)" : ""), cur_.line, cur_.column);
  }

  void expect(Tok kind, const char* what) {
    if (cur_.kind != kind) fail(std::string("expected ") + what);
    shift();
  }

  void enter(int depth) const {
    if (depth > kMaxNesting) throw ParseError("expression nested too deeply", cur_.line, cur_.column);
  }

  // expr := term (('+' | '-') term)*
  std::unique_ptr<Expr> parse_expr(int depth) {
    enter(depth);
    auto lhs = parse_term(depth + 1);
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const Token op = cur_;
      shift();
      auto rhs = parse_term(depth + 1);
      lhs = binary(op.kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub, std::move(lhs), std::move(rhs), op);
    }
    return lhs;
  }

  // term := unary (('*' | '/') unary)*
  std::unique_ptr<Expr> parse_term(int depth) {
    enter(depth);
    auto lhs = parse_unary(depth + 1);
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      const Token op = cur_;
      shift();
      auto rhs = parse_unary(depth + 1);
      lhs = binary(op.kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div, std::move(lhs), std::move(rhs), op);
    }
    return lhs;
  }

  // unary := ('-' | '+') unary | power
  std::unique_ptr<Expr> parse_unary(int depth) {
    enter(depth);
    if (cur_.kind == Tok::Minus || cur_.kind == Tok::Plus) {
      const Token op = cur_;
      shift();
      auto operand = parse_unary(depth + 1);
      if (op.kind == Tok::Plus) return operand;
      if (operand->is_constant()) return make_number(-operand->value, op.line, op.column);
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Negate;
      e->lhs = std::move(operand);
      e->line = op.line;
      e->column = op.column;
      return e;
    }
    return parse_power(depth + 1);
  }

  // power := primary ('^' exponent)?, exponent := INT ('^' exponent)?
  std::unique_ptr<Expr> parse_power(int depth) {
    enter(depth);
    auto base = parse_primary(depth + 1);
    if (cur_.kind != Tok::Caret) return base;
    const Token op = cur_;
    shift();
    const long long k = parse_exponent(depth + 1);
    if (base->is_constant()) return make_number(int_power(base->value, k), op.line, op.column);
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Pow;
    e->exponent = static_cast<int>(k);
    e->lhs = std::move(base);
    e->line = op.line;
    e->column = op.column;
    return e;
  }

  long long parse_exponent(int depth) {
    enter(depth);
    const Token tok = cur_;
    if (tok.kind != Tok::Number) {
      if (tok.kind == Tok::Minus) throw SemanticError("exponent must be a nonnegative integer literal", tok.line, tok.column);
      if (tok.kind == Tok::Ident || tok.kind == Tok::LParen) {
        throw SemanticError("exponent must be a nonnegative integer literal", tok.line, tok.column);
      }
      fail("expected exponent");
    }
    if (tok.imaginary || tok.number != std::floor(tok.number) || tok.number < 0) {
      throw SemanticError("exponent must be a nonnegative integer literal", tok.line, tok.column);
    }
    if (tok.number > static_cast<double>(kMaxExponent)) {
      throw SemanticError("exponent too large", tok.line, tok.column);
    }
    long long k = static_cast<long long>(tok.number);
    shift();
    if (cur_.kind == Tok::Caret) {
      shift();
      const long long inner = parse_exponent(depth + 1);
      long long tower = 1;
      for (long long r = 0; r < inner; ++r) {
        tower *= k;
        if (tower > kMaxExponent) throw SemanticError("exponent too large", tok.line, tok.column);
        if (tower == 0 || tower == 1) break;
      }
      if (inner == 0) tower = 1;
      k = tower;
    }
    return k;
  }

  std::unique_ptr<Expr> parse_primary(int depth) {
    enter(depth);
    const Token tok = cur_;
    switch (tok.kind) {
      case Tok::Number: {
        shift();
        return make_number(tok.imaginary ? Complex(0.0, tok.number) : Complex(tok.number, 0.0), tok.line, tok.column);
      }
      case Tok::LParen: {
        shift();
        auto inner = parse_expr(depth + 1);
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        shift();
        if (tok.text == "i") return make_number(Complex(0.0, 1.0), tok.line, tok.column);
        if (tok.text == "pi") return make_number(std::numbers::pi, tok.line, tok.column);
        if (tok.text == "exp" || tok.text == "cos" || tok.text == "sin") {
          expect(Tok::LParen, "'(' after function name");
          auto arg = parse_expr(depth + 1);
          expect(Tok::RParen, "')'");
          if (!arg->is_constant()) {
            throw SemanticError(tok.text + "() argument must not contain variables", tok.line, tok.column);
          }
          const Complex v = arg->value;
          const Complex r = tok.text == "exp" ? std::exp(v) : tok.text == "cos" ? std::cos(v) : std::sin(v);
          return make_number(r, tok.line, tok.column);
        }
        const int var = variable_index(tok.text);
        if (var < 0) throw SemanticError("undeclared variable '" + tok.text + "'", tok.line, tok.column);
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Variable;
        e->variable = var;
        e->line = tok.line;
        e->column = tok.column;
        return e;
      }
      default: fail("expected a number, variable, function call or '('");
    }
  }

  std::unique_ptr<Expr> binary(Expr::Kind kind, std::unique_ptr<Expr> lhs, std::unique_ptr<Expr> rhs,
                               const Token& op) {
    if (kind == Expr::Kind::Div) {
      if (!rhs->is_constant()) throw SemanticError("divisor must be a constant", op.line, op.column);
      if (rhs->value == Complex{}) throw SemanticError("division by zero", op.line, op.column);
    }
    if (lhs->is_constant() && rhs->is_constant()) {
      const Complex a = lhs->value;
      const Complex b = rhs->value;
      switch (kind) {
        case Expr::Kind::Add: return make_number(a + b, op.line, op.column);
        case Expr::Kind::Sub: return make_number(a - b, op.line, op.column);
        case Expr::Kind::Mul: return make_number(a * b, op.line, op.column);
        case Expr::Kind::Div: return make_number(divide(a, b), op.line, op.column);
        default: break;
      }
    }
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    e->line = op.line;
    e->column = op.column;
    return e;
  }

  Lexer lexer_;
  Token cur_;
  const std::vector<std::string>* variables_ = nullptr;
};

Series expand(const Expr& e, int n, int order) {
  switch (e.kind) {
    case Expr::Kind::Number: return Series::constant(n, order, e.value);
    case Expr::Kind::Variable: return Series::variable(n, order, e.variable);
    case Expr::Kind::Negate: return -expand(*e.lhs, n, order);
    case Expr::Kind::Add: return add(expand(*e.lhs, n, order), expand(*e.rhs, n, order));
    case Expr::Kind::Sub: return sub(expand(*e.lhs, n, order), expand(*e.rhs, n, order));
    case Expr::Kind::Mul: return mul(expand(*e.lhs, n, order), expand(*e.rhs, n, order));
    case Expr::Kind::Div: {
      Series r = expand(*e.lhs, n, order);
      Series out(n, order);
      for (const auto& [exp, c] : r.terms()) out.set_coeff(exp, divide(c, e.rhs->value));
      return out.normalize();
    }
    case Expr::Kind::Pow: return pow(expand(*e.lhs, n, order), e.exponent);
  }
  return Series(n, order);
}

Series expand_binding(const Binding& b, int n, int order) {
  Series s;
  try {
    s = expand(*b.expr, n, order);
  } catch (const PositionedError&) {
    throw;
  } catch (const Error& err) {
    throw SemanticError(err.what(), b.expr->line, b.expr->column);
  }
  const Exponent zero(n);
  if (std::abs(s.coeff(zero)) >= kDefaultZeroTol) {
    throw SemanticError("component '" + b.name + "' has a nonzero constant term", b.line, 1);
  }
  s.set_coeff(zero, 0.0);
  return s;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string variable_name(int n, int i) { return n == 1 ? "z" : "x" + std::to_string(i + 1); }

std::string format_monomial(const Exponent& e) {
  std::string out;
  for (int i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += variable_name(e.size(), i);
    if (e[i] > 1) out += "^" + std::to_string(e[i]);
  }
  return out;
}

std::string format_component(const Series& s) {
  if (s.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [e, c] : s.terms()) {
    bool negative = false;
    std::string coeff;
    if (c.imag() == 0.0) {
      negative = std::signbit(c.real());
      const double mag = std::abs(c.real());
      if (mag != 1.0 || e.degree() == 0) coeff = format_real(mag);
    } else if (c.real() == 0.0) {
      coeff = "(" + format_real(c.imag()) + "i)";
    } else {
      coeff = "(" + format_real(c.real()) + (std::signbit(c.imag()) ? "-" : "+") +
              format_real(std::abs(c.imag())) + "i)";
    }
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    const std::string mono = format_monomial(e);
    if (coeff.empty()) {
      out += mono;
    } else if (mono.empty()) {
      out += coeff;
    } else {
      out += coeff + "*" + mono;
    }
  }
  return out;
}

Json exponent_json(const Exponent& e) { return Json(e.to_vector()); }

Exponent exponent_from_json(const Json& j, int n) {
  const auto entries = j.get<std::vector<int>>();
  if (static_cast<int>(entries.size()) != n) throw InvalidArgument("exponent length differs from n");
  return Exponent(std::span<const int>(entries));
}

}  // namespace

MapDocument parse_map(std::string_view text) {
  Parser parser(text);
  MapDocument doc = parser.parse();
  // Expanding validates the constant-term invariant with source positions.
  for (const auto& b : doc.bindings) (void)expand_binding(b, doc.n, doc.order);
  return doc;
}

Transformation to_transformation(const MapDocument& doc) {
  std::vector<Series> comps;
  for (const auto& b : doc.bindings) comps.push_back(expand_binding(b, doc.n, doc.order));
  return Transformation(std::move(comps));
}

Transformation read_map(std::string_view text) { return to_transformation(parse_map(text)); }

std::string emit_map(const Transformation& u) {
  const int n = u.dim();
  std::string out = "vars: ";
  for (int i = 0; i < n; ++i) {
    if (i > 0) out += ",";
    out += variable_name(n, i);
  }
  out += "; order: " + std::to_string(u.order()) + "\n";
  for (int i = 0; i < n; ++i) out += variable_name(n, i) + " -> " + format_component(u[i]) + "\n";
  return out;
}

Json to_json(Complex c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

Json to_json(const Series& s) {
  Json terms = Json::array();
  for (const auto& [e, c] : s.terms()) {
    terms.push_back(Json{{"exp", exponent_json(e)}, {"re", c.real()}, {"im", c.imag()}});
  }
  return Json{{"n", s.dim()}, {"order", s.order()}, {"terms", terms}};
}

Series series_from_json(const Json& j) {
  try {
    Series s(j.at("n").get<int>(), j.at("order").get<int>());
    for (const auto& t : j.at("terms")) {
      s.set_coeff(exponent_from_json(t.at("exp"), s.dim()), Complex(t.at("re").get<double>(), t.at("im").get<double>()));
    }
    return s.normalize();
  } catch (const Json::exception& err) {
    throw InvalidArgument(std::string("malformed series JSON: ") + err.what());
  }
}

Json to_json(const Transformation& u) {
  Json comps = Json::array();
  for (const auto& c : u.components()) comps.push_back(to_json(c));
  return Json{{"n", u.dim()}, {"order", u.order()}, {"components", comps}};
}

Transformation transformation_from_json(const Json& j) {
  try {
    std::vector<Series> comps;
    for (const auto& c : j.at("components")) comps.push_back(series_from_json(c));
    if (static_cast<int>(comps.size()) != j.at("n").get<int>()) {
      throw InvalidArgument("component count differs from n");
    }
    return Transformation(std::move(comps));
  } catch (const Json::exception& err) {
    throw InvalidArgument(std::string("malformed transformation JSON: ") + err.what());
  }
}

Json to_json(const ResonanceWitness& w) {
  return Json{{"s", w.s + 1},
              {"m", exponent_json(w.m)},
              {"k", w.k},
              {"obstructive", w.obstructive},
              {"residual", w.residual}};
}

Json to_json(const ResonanceReport& report) {
  Json values = Json::array();
  for (const Complex l : report.eigenvalues) values.push_back(to_json(l));
  Json witnesses = Json::array();
  for (const auto& w : report.witnesses) witnesses.push_back(to_json(w));
  return Json{{"eigenvalues", values},
              {"max_degree", report.max_degree},
              {"tol", report.tol},
              {"witnesses", witnesses}};
}

Json to_json(const Obstruction& ob) {
  return Json{{"degree", ob.degree},
              {"component", ob.component + 1},
              {"monomial", exponent_json(ob.monomial)},
              {"divisor", to_json(ob.divisor)},
              {"residual", to_json(ob.residual)},
              {"resonance", ob.witness ? to_json(*ob.witness) : Json(nullptr)}};
}

}  // namespace ffg
