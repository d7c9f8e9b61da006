#include "powerfree/problem.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "powerfree/errors.hpp"

namespace powerfree {
namespace {

using nlohmann::json;

std::int64_t read_int(const json& v, const char* what) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    try {
      std::size_t pos = 0;
      const long long out = std::stoll(s, &pos);
      if (pos == s.size()) return out;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string(what) + ": not a 64-bit integer: " + s);
  }
  throw ValidationError(std::string(what) + ": integer expected");
}

IntPolynomial read_polynomial(const json& v, int n, const char* what) {
  const json& monos = v.is_object() ? v.at("monomials") : v;
  if (!monos.is_array()) throw ValidationError(std::string(what) + ": monomial list expected");
  IntPolynomial f(n);
  for (const auto& term : monos) {
    if (!term.is_array() || term.size() != 2 || !term[0].is_array()) {
      throw ValidationError(std::string(what) + ": each monomial is [[exponents], coefficient]");
    }
    IntPolynomial::Exponents e;
    for (const auto& x : term[0]) e.push_back(static_cast<int>(read_int(x, what)));
    if (static_cast<int>(e.size()) != n) throw ValidationError(std::string(what) + ": exponent vector length must be " + std::to_string(n));
    f.add_term(e, read_int(term[1], what));
  }
  return f;
}

}  // namespace

const AffineQuadric& Problem::require_quadric() const {
  if (!quadric) throw ValidationError("problem has no quadric (fields Q, m)");
  return *quadric;
}

const IntPolynomial& Problem::require_f() const {
  if (!f) throw ValidationError("problem has no polynomial f");
  return *f;
}

Problem parse_problem(std::string_view text, std::string source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("problem file is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ValidationError("problem file must be a JSON object");

  Problem p;
  p.source = std::move(source);
  p.sha256 = sha256_hex(text);
  try {
    if (doc.contains("name")) p.name = doc.at("name").get<std::string>();
    if (doc.contains("r")) p.r = static_cast<int>(read_int(doc.at("r"), "r"));
    if (p.r < 2) throw ValidationError("r must be at least 2");
    if (doc.contains("n")) {
      p.n = static_cast<int>(read_int(doc.at("n"), "n"));
      if (p.n < 1 || p.n > 12) throw ValidationError("n must lie in [1, 12]");
    }
    if (doc.contains("Q")) {
      if (p.n == 0) throw ValidationError("field n is required with Q");
      const json& qj = doc.at("Q");
      const json& entries = qj.is_object() ? qj.at("a_ij") : qj;
      std::vector<std::tuple<int, int, std::int64_t>> terms;
      for (const auto& t : entries) {
        if (!t.is_array() || t.size() != 3) throw ValidationError("Q entries are [i, j, a_ij] triples");
        const auto i = read_int(t[0], "Q index"), j = read_int(t[1], "Q index");
        if (i < 1 || j < 1 || i > p.n || j > p.n) throw ValidationError("Q index out of range (indices are 1-based)");
        terms.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), read_int(t[2], "Q coefficient"));
      }
      if (!doc.contains("m")) throw ValidationError("field m is required with Q");
      p.quadric = AffineQuadric(QuadraticForm::from_coefficients(p.n, terms), read_int(doc.at("m"), "m"));
    }
    if (doc.contains("f")) {
      if (p.n == 0) throw ValidationError("field n is required with f");
      p.f = read_polynomial(doc.at("f"), p.n, "f");
    }
    if (doc.contains("g")) {
      if (p.n == 0) throw ValidationError("field n is required with g");
      p.g = read_polynomial(doc.at("g"), p.n, "g");
    }
    if (doc.contains("q")) {
      const json& qj = doc.at("q");
      if (!qj.is_object() || !qj.contains("nu")) throw ValidationError("q needs fields nu and monomials");
      const int nu = static_cast<int>(read_int(qj.at("nu"), "q.nu"));
      if (nu < 1 || nu > 12) throw ValidationError("q.nu must lie in [1, 12]");
      const IntPolynomial qp = read_polynomial(qj, nu, "q");
      if (qp.degree() > 2) throw ValidationError("q must have degree at most 2");
      p.q = QuadraticPolynomial::from_polynomial(qp);
    }
  } catch (const json::exception& e) {
    throw ValidationError("malformed problem file: " + std::string(e.what()));
  } catch (const PreconditionError& e) {
    throw ValidationError(e.what());
  } catch (const ArithmeticOverflow& e) {
    throw ValidationError(e.what());
  }
  return p;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), path);
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

}  // namespace powerfree
