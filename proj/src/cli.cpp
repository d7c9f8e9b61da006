#include "powerfree/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <unistd.h>

#include "powerfree/arch.hpp"
#include "powerfree/enumerate.hpp"
#include "powerfree/errors.hpp"
#include "powerfree/euler.hpp"
#include "powerfree/lattice.hpp"
#include "powerfree/localdens.hpp"
#include "powerfree/problem.hpp"
#include "powerfree/sieve.hpp"

namespace powerfree::cli {
namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kToolVersion = "powerfree 0.1.0";

struct Artifact {
  ojson result = ojson::object();
  std::vector<std::string> header;
  std::vector<std::vector<ojson>> rows;
  int status = kOk;
};

ojson real(long double v) {
  const auto d = static_cast<double>(v);
  if (!std::isfinite(d)) return nullptr;
  return d;
}

ojson big(const BigInt& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max()) {
    return static_cast<std::int64_t>(v);
  }
  return v.str();
}

ojson ints(const std::vector<std::int64_t>& v) {
  ojson a = ojson::array();
  for (auto x : v) a.push_back(x);
  return a;
}

std::string cell(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return v.dump();
}

std::uint64_t seed_from_hash(const std::string& hex) {
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

ojson config_json(const RunConfig& c, const Problem& problem, int r, std::uint64_t seed) {
  // The worker count and output path are left out: they must not change the
  // artifact.
  ojson j;
  j["command"] = c.command;
  j["problem"] = c.problem;
  j["problem_sha256"] = problem.sha256;
  if (c.H) j["H"] = *c.H;
  if (!c.H_list.empty()) j["H_list"] = ints(c.H_list);
  j["r"] = r;
  if (c.delta) j["delta"] = real(*c.delta);
  j["pmax"] = c.pmax;
  j["budget"] = c.budget;
  j["seed"] = seed;
  j["format"] = c.format;
  if (c.ell) j["ell"] = *c.ell;
  if (c.p) j["p"] = *c.p;
  if (!c.c.empty()) j["c"] = ints(c.c);
  if (!c.xi.empty()) j["xi"] = ints(c.xi);
  if (c.command == "lattice-diag") {
    j["j"] = c.j;
    j["k_max"] = c.k_max;
  }
  if (c.command == "density-p") j["depth"] = c.depth;
  if (c.command == "density-real") {
    j["method"] = c.method;
    if (c.component) j["component"] = *c.component;
    if (c.method == "shell") {
      j["eps"] = real(c.eps);
      j["samples"] = c.samples;
    }
  }
  if (!c.r_list.empty()) {
    ojson a = ojson::array();
    for (int v : c.r_list) a.push_back(v);
    j["r_list"] = a;
  }
  return j;
}

std::vector<std::int64_t> heights(const RunConfig& c) {
  if (!c.H_list.empty()) return c.H_list;
  if (c.H) return {*c.H};
  throw ValidationError(c.command + ": --H or --H-list is required");
}

std::int64_t height(const RunConfig& c) {
  if (c.H) return *c.H;
  if (c.H_list.size() == 1) return c.H_list.front();
  throw ValidationError(c.command + ": a single --H is required");
}

const AffineQuadric& valid_quadric(const Problem& p) {
  const AffineQuadric& Y = p.require_quadric();
  Y.require_valid();
  return Y;
}

Artifact cmd_validate(const Problem& p) {
  Artifact a;
  const AffineQuadric& Y = p.require_quadric();
  const ValidationReport report = Y.validate();
  a.result["valid"] = report.ok();
  a.result["n"] = Y.n();
  a.result["m"] = Y.m();
  a.result["form"] = Y.form().to_string();
  a.result["det2B"] = big(Y.det2B());
  a.result["signature"] = {Y.signature().first, Y.signature().second};
  a.result["real_components"] = Y.component_count();
  ojson items = ojson::array();
  a.header = {"check", "pass", "detail"};
  for (const auto& item : report.items) {
    items.push_back(ojson{{"check", item.name}, {"pass", item.pass}, {"detail", item.detail}});
    a.rows.push_back(ojson{item.name, item.pass, item.detail});
  }
  a.result["checks"] = items;
  if (p.f) {
    a.result["f"] = {{"polynomial", p.f->to_string()}, {"degree", p.f->degree()}, {"homogeneous", p.f->homogeneous()}};
  }
  if (!report.ok()) a.status = kValidation;
  return a;
}

Artifact cmd_enumerate(const RunConfig& c, const Problem& p, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  const std::int64_t H = height(c);
  const PointList pts = enumerate_points(Y, H, ctx);
  a.result["H"] = H;
  a.result["count"] = pts.size();
  ojson list = ojson::array();
  for (int i = 0; i < Y.n(); ++i) a.header.push_back("x" + std::to_string(i + 1));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::vector<std::int64_t> x(pts[i].begin(), pts[i].end());
    list.push_back(ints(x));
    std::vector<ojson> row;
    for (auto v : x) row.emplace_back(v);
    a.rows.push_back(std::move(row));
  }
  a.result["points"] = list;
  return a;
}

Artifact cmd_count_rfree(const RunConfig& c, const Problem& p, int r, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  const IntPolynomial& f = p.require_f();
  const auto hs = heights(c);
  const PointList pts = enumerate_points(Y, *std::max_element(hs.begin(), hs.end()), ctx);
  const std::vector<BigInt> values = evaluate_on(pts, f);
  a.header = {"H", "points", "N_r"};
  ojson rows = ojson::array();
  for (std::int64_t H : hs) {
    std::uint64_t inside = 0, N = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bool in = true;
      for (auto v : pts[i]) in = in && v <= H && v >= -H;
      if (!in) continue;
      ++inside;
      if (values[i] != 0 && is_r_free(values[i], r)) ++N;
    }
    rows.push_back(ojson{{"H", H}, {"points", inside}, {"N_r", N}});
    a.rows.push_back(ojson{H, inside, N});
  }
  a.result["r"] = r;
  a.result["rows"] = rows;
  return a;
}

Artifact cmd_rho(const RunConfig& c, const Problem& p, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  const IntPolynomial& f = p.require_f();
  if (!c.ell || *c.ell == 0) throw ValidationError("rho: --ell is required");
  const std::uint64_t ell = *c.ell;
  a.result["ell"] = ell;
  a.header = {"modulus", "rho"};
  ojson parts = ojson::array();
  for (const auto& [q, e] : factorize(ell).factors) {
    const BigInt v = rho_prime_power(Y, f, q, e, ctx);
    const std::uint64_t qe = checked_pow(q, e);
    parts.push_back(ojson{{"p", q}, {"e", e}, {"rho", big(v)}});
    a.rows.push_back(ojson{qe, big(v)});
  }
  const BigInt total = c.c.empty() ? rho(Y, f, ell, ctx) : rho_linear_constraint(Y, f, ell, c.c, ctx);
  a.result["rho"] = big(total);
  if (!c.c.empty()) a.result["c"] = ints(c.c);
  a.result["prime_powers"] = parts;
  a.rows.push_back(ojson{ell, big(total)});
  return a;
}

Artifact cmd_density_p(const RunConfig& c, const Problem& p, int r, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  const std::vector<std::uint64_t> primes = c.p ? std::vector<std::uint64_t>{*c.p} : primes_up_to(c.pmax);
  for (auto q : primes) {
    if (!is_prime(q)) throw ValidationError("density-p: " + std::to_string(q) + " is not prime");
  }
  const ParallelContext inner = ctx.serial();
  const auto entries = ctx.map<ojson>(primes.size(), [&](std::size_t i) {
    const std::uint64_t q = primes[i];
    ojson e;
    e["p"] = q;
    const LocalDensityValue point = padic_point_density(Y, q, inner);
    e["point_density"] = point.value.to_string();
    e["status"] = to_string(point.status);
    e["level"] = point.level;
    if (point.status == DensityStatus::capped) e["upper"] = point.upper.to_string();
    e["solubility"] = to_string(is_locally_soluble(Y, q, c.depth, inner));
    if (p.f) {
      const PrimeClass cls = classify_prime(Y, *p.f, q);
      e["good"] = cls.good;
      e["reason"] = cls.reason;
      const LocalDensityValue fd = padic_density_f(Y, *p.f, r, q, inner);
      e["f_density"] = fd.value.to_string();
      e["f_status"] = to_string(fd.status);
      e["r_power_divisor"] = has_r_power_divisor_at(Y, *p.f, q, r, inner);
    }
    return e;
  });
  a.header = {"p", "point_density", "status", "level", "solubility"};
  if (p.f) {
    for (const char* h : {"good", "reason", "f_density", "f_status", "r_power_divisor"}) a.header.emplace_back(h);
  }
  ojson list = ojson::array();
  for (const ojson& e : entries) {
    std::vector<ojson> row;
    for (const auto& h : a.header) row.push_back(e.value(h, ojson()));
    a.rows.push_back(std::move(row));
    list.push_back(e);
  }
  a.result["r"] = r;
  a.result["depth"] = c.depth;
  a.result["primes"] = list;
  return a;
}

Artifact cmd_density_real(const RunConfig& c, const Problem& p, std::uint64_t seed, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  if (c.method != "fiber" && c.method != "shell") throw ValidationError("density-real: --method is fiber or shell");
  if (c.method == "shell" && c.component) throw ValidationError("density-real: --component needs --method fiber");
  a.header = {"H", "method", "value", "error"};
  ojson rows = ojson::array();
  for (std::int64_t H : heights(c)) {
    const RealDensityEstimate est = c.method == "fiber" ? real_density_fiber(Y, H, ctx, c.component)
                                                        : real_density_shell(Y, H, c.eps, c.samples, seed, ctx);
    rows.push_back(ojson{{"H", H}, {"method", est.method}, {"value", real(est.value)}, {"error", real(est.error)}});
    a.rows.push_back(ojson{H, est.method, real(est.value), real(est.error)});
  }
  if (c.component) a.result["component"] = *c.component;
  a.result["rows"] = rows;
  return a;
}

ojson series_json(const SeriesEstimate& s) {
  ojson j;
  j["partial"] = s.partial.to_string();
  j["partial_decimal"] = real(static_cast<long double>(s.partial_real));
  j["P_max"] = s.P_max;
  j["tail_log_bound"] = real(s.tail_log_bound);
  j["tail_heuristic"] = true;
  j["C_meas"] = real(s.C_meas);
  j["positive"] = s.positive;
  j["conditional"] = s.conditionally_convergent;
  j["exact"] = s.exact;
  j["zero_at"] = s.zero_at ? ojson(*s.zero_at) : ojson();
  return j;
}

Artifact cmd_series(const RunConfig& c, const Problem& p, int r, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  const SeriesEstimate s = singular_series(Y, p.require_f(), r, c.pmax, ctx);
  a.result = series_json(s);
  ojson factors = ojson::array();
  a.header = {"p", "good", "density", "point_density", "status"};
  for (const auto& f : s.factors) {
    factors.push_back(ojson{{"p", f.p}, {"good", f.good}, {"density", f.density.to_string()},
                       {"point_density", f.point_density.to_string()}, {"status", to_string(f.status)}});
    a.rows.push_back(ojson{f.p, f.good, f.density.to_string(), f.point_density.to_string(), to_string(f.status)});
  }
  a.result["factors"] = factors;
  return a;
}

Artifact cmd_sieve(const RunConfig& c, const Problem& p, int r, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  const IntPolynomial& f = p.require_f();
  const long double delta = c.delta.value_or(static_cast<long double>(f.degree()) / (2.0L * r));
  const SieveBreakdown s = mobius_sieve_count(Y, f, r, height(c), delta, ctx);
  a.result["H"] = s.H;
  a.result["r"] = s.r;
  a.result["delta"] = real(s.delta);
  a.result["k_split"] = s.k_split;
  a.result["K_total"] = s.K_total;
  a.result["N1"] = s.N1;
  a.result["N2"] = s.N2;
  a.result["signed_tail"] = s.signed_tail;
  a.result["N_direct"] = s.N_direct;
  a.result["identity_ok"] = s.identity_ok;
  a.result["tail_square_bound"] = s.tail_square_bound;
  a.result["tail_dominated"] = s.tail_dominated;
  ojson terms = ojson::array();
  a.header = {"k", "mu", "U"};
  for (const auto& t : s.terms) {
    terms.push_back(ojson{{"k", t.k}, {"mu", t.mu}, {"U", t.U}});
    a.rows.push_back(ojson{t.k, t.mu, t.U});
  }
  a.result["terms"] = terms;
  if (!s.identity_ok) a.status = kInvariant;
  return a;
}

Artifact cmd_compare(const RunConfig& c, const Problem& p, int r, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  const ExperimentReport rep = compare_report(Y, p.require_f(), r, heights(c), c.pmax, ctx);
  a.result["r"] = r;
  a.result["series"] = series_json(rep.series);
  a.result["components"] = rep.components;
  a.result["local_global_failure"] = rep.local_global_failure;
  a.result["near_integer_ratio"] = rep.near_integer_ratio;
  a.header = {"H", "N_r", "prediction", "ratio", "points", "mu_inf"};
  if (rep.components > 1) {
    for (int i = 0; i < rep.components; ++i) a.header.push_back("N_r_component_" + std::to_string(i));
  }
  ojson rows = ojson::array();
  for (const auto& row : rep.rows) {
    const ojson ratio = row.ratio ? real(*row.ratio) : ojson();
    ojson jr{{"H", row.H}, {"N_r", row.N}, {"prediction", real(row.prediction)}, {"ratio", ratio},
             {"points", row.points}, {"mu_inf", real(row.mu_inf)}};
    std::vector<ojson> cells{row.H, row.N, real(row.prediction), ratio, row.points, real(row.mu_inf)};
    if (!row.N_by_component.empty()) {
      ojson comps = ojson::array();
      for (auto v : row.N_by_component) {
        comps.push_back(v);
        cells.emplace_back(v);
      }
      jr["N_r_by_component"] = comps;
    }
    rows.push_back(jr);
    a.rows.push_back(std::move(cells));
  }
  a.result["rows"] = rows;
  return a;
}

Artifact cmd_mq_count(const RunConfig& c, const Problem& p, const ParallelContext& ctx) {
  Artifact a;
  const QuadraticPolynomial q = p.q ? *p.q : QuadraticPolynomial::from_quadric(p.require_quadric());
  a.result["q"] = q.to_polynomial().to_string();
  a.header = {"B", "M", "rank_R", "rank_q0", "hypotheses_hold"};
  ojson rows = ojson::array();
  std::vector<std::pair<long double, long double>> logs;
  for (std::int64_t B : heights(c)) {
    const AffineCount m = count_affine_quadratic(q, B, ctx);
    rows.push_back(ojson{{"B", B}, {"M", m.count}, {"rank_R", m.rank_R}, {"rank_q0", m.rank_q0},
                    {"absolutely_irreducible", m.absolutely_irreducible}, {"hypotheses_hold", m.hypotheses_hold}});
    a.rows.push_back(ojson{B, m.count, m.rank_R, m.rank_q0, m.hypotheses_hold});
    if (B > 0 && m.count > 0) logs.emplace_back(std::log(static_cast<long double>(B)), std::log(static_cast<long double>(m.count)));
  }
  a.result["rows"] = rows;
  if (logs.size() >= 2) {
    long double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : logs) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const auto k = static_cast<long double>(logs.size());
    a.result["slope"] = real((k * sxy - sx * sy) / (k * sxx - sx * sx));
  }
  return a;
}

Artifact cmd_lattice_diag(const RunConfig& c, const Problem& p, int r, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  if (c.ell && !c.xi.empty()) {
    const CongruenceLattice L = build_congruence_lattice(Y, c.xi, *c.ell);
    const CongruenceLattice R = reduce_basis(L);
    ojson hnf = ojson::array(), reduced = ojson::array();
    for (const auto& v : L.basis) hnf.push_back(ints(v));
    for (const auto& v : R.basis) reduced.push_back(ints(v));
    a.result["lattice"] = {{"ell", L.ell},         {"xi", ints(L.xi)},       {"gradient", ints(L.gradient)},
                           {"gcd", L.gcd},         {"det", L.det},           {"hnf_basis", hnf},
                           {"reduced_basis", reduced}, {"sup_norm_product", big(sup_norm_product(R.basis))}};
  }
  if (!p.f) {
    if (!a.result.contains("lattice")) throw ValidationError("lattice-diag: needs f, or --ell with --xi");
    return a;
  }
  const BoundDiagnostics d = bound_diagnostics(Y, *p.f, c.j, r, height(c), c.k_max, ctx);
  a.result["H"] = d.H;
  a.result["j"] = d.j;
  a.result["r"] = d.r;
  a.result["envelope"] = d.envelope;
  a.result["points"] = d.points;
  a.result["worst_constant"] = real(d.worst_U);
  a.result["worst_constant_eps_0.2"] = real(d.worst_U_eps2);
  a.result["worst_constant_V"] = d.worst_V ? real(*d.worst_V) : ojson();
  a.header = {"k", "ell", "measured", "envelope", "constant", "in_range", "V_max", "constant_V"};
  ojson rows = ojson::array();
  for (const auto& row : d.rows) {
    const ojson cv = row.constant_V ? real(*row.constant_V) : ojson();
    rows.push_back(ojson{{"k", row.k}, {"ell", row.ell}, {"measured", row.U}, {"envelope", real(row.envelope_U)},
                    {"constant", real(row.constant_U)}, {"constant_eps_0.2", real(row.constant_U_eps2)},
                    {"in_range", row.in_range}, {"V_max", row.V_max}, {"constant_V", cv}});
    a.rows.push_back(ojson{row.k, row.ell, row.U, real(row.envelope_U), real(row.constant_U), row.in_range, row.V_max, cv});
  }
  a.result["rows"] = rows;
  return a;
}

Artifact cmd_profile(const RunConfig& c, const Problem& p, const ParallelContext& ctx) {
  Artifact a;
  const AffineQuadric& Y = valid_quadric(p);
  std::vector<int> rs = c.r_list;
  if (rs.empty()) rs = {2, 3, 4, 5, 6};
  const DensityProfile d = rfree_density_profile(Y, p.require_f(), height(c), rs, ctx);
  a.result["H"] = d.H;
  a.result["points"] = d.points;
  a.result["smallest_nonzero_r"] = d.smallest_nonzero_r ? ojson(*d.smallest_nonzero_r) : ojson();
  a.result["monotone"] = d.monotone;
  a.header = {"r", "N_r"};
  ojson rows = ojson::array();
  for (const auto& row : d.rows) {
    rows.push_back(ojson{{"r", row.r}, {"N_r", row.N}});
    a.rows.push_back(ojson{row.r, row.N});
  }
  a.result["rows"] = rows;
  return a;
}

Artifact dispatch(const RunConfig& c, const Problem& p, int r, std::uint64_t seed, const ParallelContext& ctx) {
  const std::string& cmd = c.command;
  if (cmd == "validate") return cmd_validate(p);
  if (cmd == "enumerate") return cmd_enumerate(c, p, ctx);
  if (cmd == "count-rfree") return cmd_count_rfree(c, p, r, ctx);
  if (cmd == "rho") return cmd_rho(c, p, ctx);
  if (cmd == "density-p") return cmd_density_p(c, p, r, ctx);
  if (cmd == "density-real") return cmd_density_real(c, p, seed, ctx);
  if (cmd == "series") return cmd_series(c, p, r, ctx);
  if (cmd == "sieve") return cmd_sieve(c, p, r, ctx);
  if (cmd == "compare") return cmd_compare(c, p, r, ctx);
  if (cmd == "mq-count") return cmd_mq_count(c, p, ctx);
  if (cmd == "lattice-diag") return cmd_lattice_diag(c, p, r, ctx);
  if (cmd == "profile") return cmd_profile(c, p, ctx);
  throw ValidationError("unknown subcommand: " + cmd);
}

std::string render_artifact(const RunConfig& c, int* status) {
  if (c.format != "json" && c.format != "csv") throw ValidationError("--format is json or csv");
  if (c.budget == 0) throw ValidationError("--budget must be positive");
  const Problem problem = load_problem(c.problem);
  const int r = c.r.value_or(problem.r);
  const std::uint64_t seed = c.seed.value_or(seed_from_hash(problem.sha256));
  const ParallelContext ctx(c.workers, c.budget);
  Artifact a = dispatch(c, problem, r, seed, ctx);
  if (status) *status = a.status;

  const ojson config = config_json(c, problem, r, seed);
  if (c.format == "json") {
    ojson doc;
    doc["tool"] = kToolVersion;
    doc["config"] = config;
    doc["result"] = a.result;
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# tool=" << kToolVersion << "\n";
  os << "# config=" << config.dump() << "\n";
  os << "# problem_sha256=" << problem.sha256 << "\n";
  for (std::size_t i = 0; i < a.header.size(); ++i) os << (i ? "," : "") << a.header[i];
  os << "\n";
  for (const auto& row : a.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
    os << "\n";
  }
  return os.str();
}

void write_atomically(const std::string& path, const std::string& data) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size()) throw ValidationError("not an integer: " + item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::string render(const RunConfig& config) { return render_artifact(config, nullptr); }

int exit_code_for_current_exception(std::ostream& log) {
  try {
    throw;
  } catch (const ValidationError& e) {
    log << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const PreconditionError& e) {
    log << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const BudgetExceeded& e) {
    log << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const ArithmeticOverflow& e) {
    log << "out of range: " << e.what() << "\n";
    return kBudget;
  } catch (const Cancelled& e) {
    log << "cancelled: " << e.what() << "\n";
    return kBudget;
  } catch (const InvariantViolation& e) {
    log << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << "\n";
    return kInvariant;
  }
}

int run(const RunConfig& config, std::ostream& stdout_sink, std::ostream& log) {
  try {
    int status = kOk;
    const std::string data = render_artifact(config, &status);
    if (config.out.empty()) {
      stdout_sink << data;
    } else {
      write_atomically(config.out, data);
    }
    return status;
  } catch (...) {
    return exit_code_for_current_exception(log);
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Power-free values of polynomials on affine quadrics"};
  app.require_subcommand(1);
  RunConfig c;
  std::string H_list, xi, cvec, r_list;
  std::optional<double> delta, eps;

  for (const std::string& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--problem", c.problem, "problem file (JSON)")->required();
    sub->add_option("--H", c.H, "box size");
    sub->add_option("--H-list", H_list, "comma-separated box sizes");
    sub->add_option("--r", c.r, "exponent r (default: from the problem)");
    sub->add_option("--delta", delta, "sieve split exponent");
    sub->add_option("--pmax", c.pmax, "largest prime in Euler products");
    sub->add_option("--workers", c.workers, "worker threads");
    sub->add_option("--budget", c.budget, "iteration budget");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--out", c.out, "output file (default: stdout)");
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--ell", c.ell, "modulus");
    sub->add_option("--p", c.p, "prime");
    sub->add_option("--c", cvec, "comma-separated linear constraint");
    sub->add_option("--xi", xi, "comma-separated residue class");
    sub->add_option("--j", c.j, "exponent j in l = k^j");
    sub->add_option("--k-max", c.k_max, "largest k in the bound sweep");
    sub->add_option("--depth", c.depth, "Hensel search depth");
    sub->add_option("--method", c.method, "fiber or shell")->check(CLI::IsMember({"fiber", "shell"}));
    sub->add_option("--component", c.component, "real component label");
    sub->add_option("--eps", eps, "shell width");
    sub->add_option("--samples", c.samples, "shell samples");
    sub->add_option("--r-list", r_list, "comma-separated exponents");
    sub->callback([&c, sub] { c.command = sub->get_name(); });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }
  try {
    c.H_list = parse_int_list(H_list);
    c.xi = parse_int_list(xi);
    c.c = parse_int_list(cvec);
    for (auto v : parse_int_list(r_list)) c.r_list.push_back(static_cast<int>(v));
  } catch (...) {
    return exit_code_for_current_exception(std::cerr);
  }
  if (delta) c.delta = *delta;
  if (eps) c.eps = *eps;
  return run(c, std::cout, std::cerr);
}

}  // namespace powerfree::cli
