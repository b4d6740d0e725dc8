#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ffg/flows.hpp"
#include "ffg/resonance.hpp"
#include "ffg/series.hpp"
#include "ffg/transform.hpp"

namespace ffg {

using Json = nlohmann::ordered_json;

/// Error with a 1-based source position.
class PositionedError : public Error {
 public:
  PositionedError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Malformed input text.
class ParseError : public PositionedError {
 public:
  using PositionedError::PositionedError;
};

/// Well-formed text that does not describe a map in the monoid of formal maps.
class SemanticError : public PositionedError {
 public:
  using PositionedError::PositionedError;
};

/// Expression tree node. Constant subtrees are folded into Number nodes while
/// parsing, so Call nodes never survive and every tree is a polynomial.
struct Expr {
  enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow };

  Kind kind = Kind::Number;
  Complex value;     // Number
  int variable = 0;  // Variable (0-based)
  int exponent = 0;  // Pow
  std::unique_ptr<Expr> lhs;
  std::unique_ptr<Expr> rhs;
  int line = 0;
  int column = 0;

  bool is_constant() const { return kind == Kind::Number; }
};

struct Binding {
  std::string name;
  std::unique_ptr<Expr> expr;
  int line = 0;
};

/// Parsed map text: "vars: x1,...,xn; order: N" followed by "x<i> -> expr"
/// lines, one per variable, in declaration order.
struct MapDocument {
  int n = 0;
  int order = 0;
  std::vector<std::string> variables;
  std::vector<Binding> bindings;
};

MapDocument parse_map(std::string_view text);
Transformation to_transformation(const MapDocument& doc);
/// parse_map followed by to_transformation.
Transformation read_map(std::string_view text);
/// Canonical text: graded-lex term order, 17 significant digits.
std::string emit_map(const Transformation& u);

Json to_json(const Series& s);
Series series_from_json(const Json& j);
Json to_json(const Transformation& u);
Transformation transformation_from_json(const Json& j);
Json to_json(Complex c);
Json to_json(const ResonanceWitness& w);
Json to_json(const ResonanceReport& report);
Json to_json(const Obstruction& ob);

}  // namespace ffg
