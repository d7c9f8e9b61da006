#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "powerfree/arch.hpp"
#include "powerfree/cli.hpp"
#include "powerfree/enumerate.hpp"
#include "powerfree/errors.hpp"
#include "powerfree/euler.hpp"
#include "powerfree/lattice.hpp"
#include "powerfree/localdens.hpp"
#include "powerfree/problem.hpp"
#include "powerfree/sieve.hpp"

namespace py = pybind11;
using namespace powerfree;

namespace {

py::int_ to_py(const BigInt& v) {
  const std::string s = v.str();
  return py::reinterpret_steal<py::int_>(PyLong_FromString(s.c_str(), nullptr, 10));
}

py::object to_fraction(const ExactRational& r) {
  static py::object Fraction = py::module_::import("fractions").attr("Fraction");
  return Fraction(r.to_string());
}

AffineQuadric make_quadric(int n, const std::vector<std::tuple<int, int, std::int64_t>>& a_ij, std::int64_t m) {
  std::vector<std::tuple<int, int, std::int64_t>> terms;
  for (const auto& [i, j, c] : a_ij) {
    if (i < 1 || j < 1 || i > n || j > n) throw ValidationError("Q index out of range (indices are 1-based)");
    terms.emplace_back(i - 1, j - 1, c);
  }
  return AffineQuadric(QuadraticForm::from_coefficients(n, terms), m);
}

IntPolynomial make_polynomial(int n, const std::vector<std::pair<std::vector<int>, std::int64_t>>& monomials) {
  IntPolynomial f(n);
  for (const auto& [e, c] : monomials) {
    if (static_cast<int>(e.size()) != n) throw ValidationError("exponent vector has the wrong length");
    f.add_term(e, c);
  }
  return f;
}

std::vector<std::vector<std::int64_t>> to_rows(const PointList& pts) {
  std::vector<std::vector<std::int64_t>> rows;
  rows.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) rows.emplace_back(pts[i].begin(), pts[i].end());
  return rows;
}

py::dict series_dict(const SeriesEstimate& s) {
  py::dict d;
  d["partial"] = to_fraction(s.partial);
  d["P_max"] = s.P_max;
  d["C_meas"] = static_cast<double>(s.C_meas);
  d["tail_log_bound"] = static_cast<double>(s.tail_log_bound);
  d["positive"] = s.positive;
  d["conditionally_convergent"] = s.conditionally_convergent;
  d["exact"] = s.exact;
  d["zero_at"] = s.zero_at ? py::object(py::int_(*s.zero_at)) : py::none();
  py::list factors;
  for (const auto& f : s.factors) {
    py::dict row;
    row["p"] = f.p;
    row["good"] = f.good;
    row["density"] = to_fraction(f.density);
    row["point_density"] = to_fraction(f.point_density);
    row["status"] = to_string(f.status);
    factors.append(row);
  }
  d["factors"] = factors;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Power-free values of polynomials on affine quadrics";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<ArithmeticOverflow>(m, "ArithmeticOverflow", PyExc_OverflowError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);
  py::register_exception<Cancelled>(m, "Cancelled", PyExc_RuntimeError);

  py::class_<ParallelContext>(m, "Context")
      .def(py::init<unsigned, std::uint64_t>(), py::arg("workers") = 1, py::arg("budget") = kDefaultBudget)
      .def_property_readonly("workers", &ParallelContext::workers)
      .def_property_readonly("budget", &ParallelContext::budget);

  py::class_<IntPolynomial>(m, "Polynomial")
      .def(py::init(&make_polynomial), py::arg("n"), py::arg("monomials"),
           "Monomials are (exponent vector, coefficient) pairs.")
      .def_property_readonly("n", &IntPolynomial::n)
      .def_property_readonly("degree", &IntPolynomial::degree)
      .def("__repr__", [](const IntPolynomial& f) { return "Polynomial(" + f.to_string() + ")"; });

  py::class_<AffineQuadric>(m, "Quadric")
      .def(py::init(&make_quadric), py::arg("n"), py::arg("a_ij"), py::arg("m"),
           "a_ij are 1-based (i, j, coefficient) triples of Q; the quadric is Q(x) = m.")
      .def_static(
          "diagonal", [](std::vector<std::int64_t> d, std::int64_t m) { return AffineQuadric(QuadraticForm::diagonal(d), m); },
          py::arg("diagonal"), py::arg("m"))
      .def_property_readonly("n", &AffineQuadric::n)
      .def_property_readonly("m", &AffineQuadric::m)
      .def_property_readonly("det2B", [](const AffineQuadric& Y) { return to_py(Y.det2B()); })
      .def_property_readonly("signature", &AffineQuadric::signature)
      .def("components", &AffineQuadric::component_count)
      .def("validate",
           [](const AffineQuadric& Y) {
             py::dict out;
             const auto report = Y.validate();
             out["ok"] = report.ok();
             py::list items;
             for (const auto& item : report.items) items.append(py::make_tuple(item.name, item.pass, item.detail));
             out["checks"] = items;
             return out;
           })
      .def("__repr__", [](const AffineQuadric& Y) {
        return "Quadric(" + Y.form().to_string() + " = " + std::to_string(Y.m()) + ")";
      });

  py::class_<Problem>(m, "Problem")
      .def_readonly("name", &Problem::name)
      .def_readonly("sha256", &Problem::sha256)
      .def_readonly("n", &Problem::n)
      .def_readonly("r", &Problem::r)
      .def_property_readonly("quadric", [](const Problem& p) { return p.require_quadric(); })
      .def_property_readonly("f", [](const Problem& p) { return p.require_f(); });
  m.def("load_problem", &load_problem, py::arg("path"));

  const ParallelContext serial;
  m.def(
      "enumerate_points",
      [](const AffineQuadric& Y, std::int64_t H, const ParallelContext& ctx) {
        return to_rows(enumerate_points(Y, H, ctx));
      },
      py::arg("Y"), py::arg("H"), py::arg("ctx") = serial, py::call_guard<py::gil_scoped_release>());
  m.def("count_rfree", &count_rfree_direct, py::arg("Y"), py::arg("f"), py::arg("r"), py::arg("H"),
        py::arg("ctx") = serial, py::call_guard<py::gil_scoped_release>());
  m.def(
      "rho", [](const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t ell, const ParallelContext& ctx) {
        return to_py(rho(Y, f, ell, ctx));
      },
      py::arg("Y"), py::arg("f"), py::arg("ell"), py::arg("ctx") = serial);
  m.def(
      "rho_linear",
      [](const AffineQuadric& Y, const IntPolynomial& f, std::uint64_t ell, std::vector<std::int64_t> c,
         const ParallelContext& ctx) { return to_py(rho_linear_constraint(Y, f, ell, c, ctx)); },
      py::arg("Y"), py::arg("f"), py::arg("ell"), py::arg("c"), py::arg("ctx") = serial);
  m.def(
      "point_density",
      [](const AffineQuadric& Y, std::uint64_t p, const ParallelContext& ctx) {
        return to_fraction(padic_point_density(Y, p, ctx).value);
      },
      py::arg("Y"), py::arg("p"), py::arg("ctx") = serial);
  m.def(
      "is_locally_soluble",
      [](const AffineQuadric& Y, std::uint64_t p, int depth, const ParallelContext& ctx) {
        return to_string(is_locally_soluble(Y, p, depth, ctx));
      },
      py::arg("Y"), py::arg("p"), py::arg("depth") = 4, py::arg("ctx") = serial);
  m.def(
      "singular_series",
      [](const AffineQuadric& Y, const IntPolynomial& f, int r, std::uint64_t P_max, const ParallelContext& ctx) {
        SeriesEstimate s;
        {
          py::gil_scoped_release release;
          s = singular_series(Y, f, r, P_max, ctx);
        }
        return series_dict(s);
      },
      py::arg("Y"), py::arg("f"), py::arg("r"), py::arg("P_max") = 97, py::arg("ctx") = serial);
  m.def(
      "real_density",
      [](const AffineQuadric& Y, std::int64_t H, const std::string& method, std::uint64_t samples, std::uint64_t seed,
         const ParallelContext& ctx) {
        py::gil_scoped_release release;
        const auto est = method == "shell" ? real_density_shell(Y, H, 0.5L, samples, seed, ctx)
                                           : real_density_fiber(Y, H, ctx);
        return std::make_pair(static_cast<double>(est.value), static_cast<double>(est.error));
      },
      py::arg("Y"), py::arg("H"), py::arg("method") = "fiber", py::arg("samples") = 1'000'000,
      py::arg("seed") = 1, py::arg("ctx") = serial, "Returns (value, error estimate).");
  m.def(
      "mobius_sieve",
      [](const AffineQuadric& Y, const IntPolynomial& f, int r, std::int64_t H, double delta,
         const ParallelContext& ctx) {
        SieveBreakdown b;
        {
          py::gil_scoped_release release;
          b = mobius_sieve_count(Y, f, r, H, delta, ctx);
        }
        py::dict d;
        d["N"] = b.N_direct;
        d["N1"] = b.N1;
        d["N2"] = b.N2;
        d["signed_tail"] = b.signed_tail;
        d["k_split"] = b.k_split;
        d["K_total"] = b.K_total;
        d["identity_ok"] = b.identity_ok;
        py::list terms;
        for (const auto& t : b.terms) terms.append(py::make_tuple(t.k, t.mu, t.U));
        d["terms"] = terms;
        return d;
      },
      py::arg("Y"), py::arg("f"), py::arg("r"), py::arg("H"), py::arg("delta"), py::arg("ctx") = serial);
  m.def(
      "compare",
      [](const AffineQuadric& Y, const IntPolynomial& f, int r, std::vector<std::int64_t> H_list, std::uint64_t P_max,
         const ParallelContext& ctx) {
        ExperimentReport rep;
        {
          py::gil_scoped_release release;
          rep = compare_report(Y, f, r, H_list, P_max, ctx);
        }
        py::dict d;
        d["series"] = series_dict(rep.series);
        d["local_global_failure"] = rep.local_global_failure;
        py::list rows;
        for (const auto& row : rep.rows) {
          py::dict e;
          e["H"] = row.H;
          e["points"] = row.points;
          e["N"] = row.N;
          e["mu_inf"] = static_cast<double>(row.mu_inf);
          e["prediction"] = static_cast<double>(row.prediction);
          e["ratio"] = row.ratio ? py::object(py::float_(static_cast<double>(*row.ratio))) : py::none();
          rows.append(e);
        }
        d["rows"] = rows;
        return d;
      },
      py::arg("Y"), py::arg("f"), py::arg("r"), py::arg("H_list"), py::arg("P_max") = 97, py::arg("ctx") = serial);
  m.def(
      "congruence_lattice",
      [](const AffineQuadric& Y, std::vector<std::int64_t> xi, std::uint64_t ell, bool reduced) {
        const auto L = build_congruence_lattice(Y, xi, ell);
        const auto R = reduced ? reduce_basis(L) : L;
        py::dict d;
        d["basis"] = R.basis;
        d["det"] = R.det;
        d["gcd"] = R.gcd;
        d["gradient"] = R.gradient;
        return d;
      },
      py::arg("Y"), py::arg("xi"), py::arg("ell"), py::arg("reduced") = true);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "powerfree");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return cli::main(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command-line tool in-process and returns its exit code.");
}
