#pragma once

// Problem files: a quadric Q(x) = m, the polynomial f, the exponent r and
// optional auxiliary data, read from JSON.

#include <optional>
#include <string>
#include <string_view>

#include "powerfree/forms.hpp"

namespace powerfree {

struct Problem {
  std::string name;
  std::string source = "<memory>";
  std::string sha256;  // of the raw file contents
  int n = 0;
  std::optional<AffineQuadric> quadric;
  std::optional<IntPolynomial> f;
  std::optional<IntPolynomial> g;
  std::optional<QuadraticPolynomial> q;
  int r = 2;

  /// Throws ValidationError naming the missing field.
  const AffineQuadric& require_quadric() const;
  const IntPolynomial& require_f() const;
};

/// Parses the JSON problem format. Indices in "Q" are 1-based; integers may
/// be JSON numbers or decimal strings. Throws ValidationError on bad input.
Problem parse_problem(std::string_view text, std::string source = "<memory>");
Problem load_problem(const std::string& path);

std::string sha256_hex(std::string_view data);

}  // namespace powerfree
