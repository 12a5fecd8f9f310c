#pragma once

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "svx/bethe.hpp"
#include "svx/closedform.hpp"
#include "svx/funeq.hpp"
#include "svx/hierarchy.hpp"
#include "svx/model.hpp"
#include "svx/oracle.hpp"
#include "svx/polyroots.hpp"
#include "svx/rng.hpp"
#include "svx/types.hpp"

namespace svx {

using Json = nlohmann::json;

inline Json cplx_json(Cplx z) { return Json::array({z.real(), z.imag()}); }

inline Cplx cplx_from_json(const Json& j) {
  if (j.is_number()) return Cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2)
    return Cplx(j.at(0).get<double>(), j.at(1).get<double>());
  throw config_error("expected a number or an [re, im] pair");
}

inline Json cvec_json(const std::vector<Cplx>& v) {
  Json out = Json::array();
  for (const Cplx z : v) out.push_back(cplx_json(z));
  return out;
}

inline Json cvec_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(cplx_json(v(i)));
  return out;
}

inline std::vector<Cplx> cvec_from_json(const Json& j) {
  std::vector<Cplx> out;
  out.reserve(j.size());
  for (const Json& e : j) out.push_back(cplx_from_json(e));
  return out;
}

inline Json params_json(const ModelParams& p) {
  Json out{{"boundary", boundary_name(p.boundary)},
           {"L", p.L},
           {"gamma", cplx_json(p.gamma)},
           {"mu", cvec_json(p.mu)},
           {"q", cplx_json(p.q)},
           {"y", cvec_json(p.y)}};
  if (p.boundary == Boundary::Twisted) {
    out["phi1"] = cplx_json(p.phi1);
    out["phi2"] = cplx_json(p.phi2);
  } else {
    out["h"] = cplx_json(p.h);
    out["hbar"] = cplx_json(p.hbar);
    out["t"] = cplx_json(p.t);
    out["tbar"] = cplx_json(p.tbar);
  }
  return out;
}

inline ModelParams params_from_json(const Json& j) {
  const std::string b = j.at("boundary").get<std::string>();
  const int L = j.at("L").get<int>();
  const Cplx gamma = cplx_from_json(j.at("gamma"));
  const std::vector<Cplx> mu = cvec_from_json(j.at("mu"));
  if (b == "twisted")
    return ModelParams::twisted(L, gamma, mu, cplx_from_json(j.at("phi1")),
                                cplx_from_json(j.at("phi2")));
  if (b == "open")
    return ModelParams::open(L, gamma, mu, cplx_from_json(j.at("h")),
                             cplx_from_json(j.at("hbar")));
  throw config_error("boundary must be 'twisted' or 'open'");
}

// ---------------------------------------------------------------------------
// Job configuration
// ---------------------------------------------------------------------------

struct JobConfig {
  Boundary boundary = Boundary::Twisted;
  int L = 2;
  int n = 1;
  bool random_params = true;
  unsigned long long seed = 7;
  double tol = 1e-8;
  int max_branches = 0;  // 0 keeps all
  Cplx gamma{0.5, 0.35};
  Cplx phi1{1.0, 0.0};
  Cplx phi2{0.65, 0.2};
  Cplx h{0.4, 0.1};
  Cplx hbar{0.25, -0.3};
  std::vector<Cplx> mu;
  std::string out_path;
};

namespace detail {

/// "re" or "re,im".
inline Cplx parse_cplx_text(const std::string& s) {
  std::istringstream in(s);
  double re = 0, im = 0;
  char comma = 0;
  if (!(in >> re)) throw config_error("bad complex literal: " + s);
  if (in >> comma) {
    if (comma != ',' || !(in >> im))
      throw config_error("bad complex literal: " + s);
  }
  return {re, im};
}

/// Semicolon-separated complex list.
inline std::vector<Cplx> parse_cvec_text(const std::string& s) {
  std::vector<Cplx> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ';'))
    if (item.find_first_not_of(" \t") != std::string::npos)
      out.push_back(parse_cplx_text(item));
  return out;
}

inline void config_set(JobConfig& c, const std::string& key,
                       const std::string& value, bool& explicit_params) {
  if (key == "boundary") {
    if (value == "twisted")
      c.boundary = Boundary::Twisted;
    else if (value == "open")
      c.boundary = Boundary::Open;
    else
      throw config_error("boundary must be 'twisted' or 'open'");
  } else if (key == "L") {
    c.L = std::stoi(value);
  } else if (key == "n") {
    c.n = std::stoi(value);
  } else if (key == "seed") {
    c.seed = std::stoull(value);
  } else if (key == "tol") {
    c.tol = std::stod(value);
  } else if (key == "max_branches") {
    c.max_branches = std::stoi(value);
  } else if (key == "mode") {
    if (value == "random-generic")
      c.random_params = true;
    else if (value == "explicit")
      explicit_params = true;
    else
      throw config_error("mode must be 'random-generic' or 'explicit'");
  } else if (key == "gamma") {
    c.gamma = parse_cplx_text(value);
    explicit_params = true;
  } else if (key == "mu") {
    c.mu = parse_cvec_text(value);
    explicit_params = true;
  } else if (key == "phi1") {
    c.phi1 = parse_cplx_text(value);
    explicit_params = true;
  } else if (key == "phi2") {
    c.phi2 = parse_cplx_text(value);
    explicit_params = true;
  } else if (key == "h") {
    c.h = parse_cplx_text(value);
    explicit_params = true;
  } else if (key == "hbar") {
    c.hbar = parse_cplx_text(value);
    explicit_params = true;
  } else if (key == "out") {
    c.out_path = value;
  } else {
    throw config_error("unknown config key: " + key);
  }
}

}  // namespace detail

inline JobConfig config_from_json(const Json& j) {
  JobConfig c;
  bool explicit_params = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "gamma" || key == "phi1" || key == "phi2" || key == "h" ||
        key == "hbar") {
      explicit_params = true;
      const Cplx z = cplx_from_json(value);
      if (key == "gamma")
        c.gamma = z;
      else if (key == "phi1")
        c.phi1 = z;
      else if (key == "phi2")
        c.phi2 = z;
      else if (key == "h")
        c.h = z;
      else
        c.hbar = z;
    } else if (key == "mu") {
      explicit_params = true;
      c.mu = cvec_from_json(value);
    } else if (key == "boundary" || key == "mode" || key == "out") {
      bool dummy = false;
      detail::config_set(c, key, value.get<std::string>(), dummy);
      if (key == "mode" && value.get<std::string>() == "explicit")
        explicit_params = true;
    } else if (key == "L") {
      c.L = value.get<int>();
    } else if (key == "n") {
      c.n = value.get<int>();
    } else if (key == "seed") {
      c.seed = value.get<unsigned long long>();
    } else if (key == "tol") {
      c.tol = value.get<double>();
    } else if (key == "max_branches") {
      c.max_branches = value.get<int>();
    } else {
      throw config_error("unknown config key: " + key);
    }
  }
  c.random_params = !explicit_params;
  return c;
}

/// Accepts either a JSON object or key=value lines ('#' comments).
inline JobConfig parse_config_text(const std::string& text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return config_from_json(Json::parse(text));
  JobConfig c;
  bool explicit_params = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto strip = [](std::string s) {
      const std::size_t a = s.find_first_not_of(" \t\r");
      const std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (!key.empty()) detail::config_set(c, key, value, explicit_params);
  }
  c.random_params = !explicit_params;
  return c;
}

inline ModelParams realize_params(const JobConfig& c) {
  if (c.n < 0 || c.n > c.L)
    throw config_error("config requires 0 <= n <= L");
  if (c.random_params) {
    Rng rng(c.seed);
    return c.boundary == Boundary::Twisted
               ? ModelParams::random_twisted(c.L, rng)
               : ModelParams::random_open(c.L, rng);
  }
  if (static_cast<int>(c.mu.size()) != c.L)
    throw config_error("explicit params need exactly L inhomogeneities");
  ModelParams p =
      c.boundary == Boundary::Twisted
          ? ModelParams::twisted(c.L, c.gamma, c.mu, c.phi1, c.phi2)
          : ModelParams::open(c.L, c.gamma, c.mu, c.h, c.hbar);
  p.validate(/*strict=*/false);
  return p;
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

struct TaskOutcome {
  Json report;
  bool pass = false;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

inline Json task_header(const char* task, const JobConfig& c,
                        const ModelParams& p) {
  return Json{{"task", task},  {"n", c.n},
              {"seed", c.seed}, {"tol", c.tol},
              {"params", params_json(p)}};
}

inline void require_oracle_scale(const JobConfig& c) {
  if (c.L > 6)
    throw config_error("oracle-backed tasks are guarded to L <= 6");
  if (c.n < 1) throw config_error("task needs n >= 1");
}

inline std::vector<BetheRootSet> solve_branches(const ModelParams& p, int n,
                                                const JobConfig& c) {
  SolveOptions opt;
  opt.seed = c.seed + 0x5eed;
  std::vector<BetheRootSet> out = p.boundary == Boundary::Twisted
                                      ? solve_twisted(p, n, opt)
                                      : solve_open(p, n, opt);
  if (c.max_branches > 0 &&
      static_cast<int>(out.size()) > c.max_branches)
    out.resize(c.max_branches);
  return out;
}

}  // namespace detail

inline TaskOutcome task_solve_bethe(const JobConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  if (c.n < 0 || c.n > c.L) throw config_error("config requires 0 <= n <= L");
  const ModelParams p = realize_params(c);
  const std::vector<BetheRootSet> branches =
      detail::solve_branches(p, c.n, c);
  bool ok = !branches.empty() || c.n == 0;
  Json blist = Json::array();
  for (const BetheRootSet& b : branches) {
    Json bj{{"roots", cvec_json(b.roots)},
            {"residual", b.residual},
            {"aggregate", cplx_json(b.aggregate)}};
    if (p.L <= 10) bj["eigencheck"] = eigencheck(p, b.roots);
    ok = ok && b.residual < std::max(c.tol, 1e-9);
    blist.push_back(bj);
  }
  Json rep = detail::task_header("solve-bethe", c, p);
  rep["results"] = Json{{"count", branches.size()}, {"branches", blist}};
  rep["status"] = ok ? "pass" : "fail";
  rep["timing_ms"] = detail::ms_since(t0);
  return {rep, ok};
}

inline TaskOutcome task_verify_annihilation(const JobConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::require_oracle_scale(c);
  const ModelParams p = realize_params(c);
  const std::vector<BetheRootSet> branches =
      detail::solve_branches(p, c.n, c);
  bool ok = !branches.empty();
  Rng rng(c.seed ^ 0xab5eed01ull);
  double overall = 0.0;
  Json blist = Json::array();
  for (const BetheRootSet& b : branches) {
    const OraclePoly op = oracle_polynomial(p, b.roots);
    double worst = 0.0;
    for (int probe = 0; probe < 20; ++probe) {
      const std::vector<Cplx> X =
          generic_samples(p, c.n, 1, b.roots, rng, 2e-2)[0];
      const Cplx x0 = draw_probe(p, X, b.roots, rng);
      const FuneqValue fv = funeq_apply(p, op.poly, x0, X, b.roots);
      worst = std::max(worst,
                       std::abs(fv.value) / std::max(fv.scale, 1e-300));
    }
    overall = std::max(overall, worst);
    ok = ok && worst < c.tol;
    blist.push_back(Json{{"aggregate", cplx_json(b.aggregate)},
                         {"bethe_residual", b.residual},
                         {"oracle_tail", op.tail_rel},
                         {"max_funeq_residual", worst}});
  }
  Json rep = detail::task_header("verify-annihilation", c, p);
  rep["results"] =
      Json{{"branches", blist}, {"max_residual", overall}};
  rep["status"] = ok ? "pass" : "fail";
  rep["timing_ms"] = detail::ms_since(t0);
  return {rep, ok};
}

inline TaskOutcome task_extract_hierarchy(const JobConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::require_oracle_scale(c);
  const ModelParams p = realize_params(c);
  const std::vector<BetheRootSet> branches =
      detail::solve_branches(p, c.n, c);
  bool ok = !branches.empty();
  Json blist = Json::array();
  for (const BetheRootSet& b : branches) {
    HierarchyOptions ho;
    ho.seed = c.seed ^ 0x43adb17aull;
    const Hierarchy h = extract_hierarchy(p, b.roots, ho);
    const OraclePoly op = oracle_polynomial(p, b.roots);
    const double ann = annihilation_residual(h, op.poly);
    const CMatrix closed =
        leading_closed_form(p, h.bethe, h.samples, h.cap);
    const double raw_rel =
        (h.ops.back() - closed).norm() / std::max(closed.norm(), 1e-300);
    const Cplx alpha = closed.conjugate().cwiseProduct(h.ops.back()).sum() /
                       closed.conjugate().cwiseProduct(closed).sum();
    const double aligned_rel =
        (h.ops.back() - alpha * closed).norm() /
        std::max(std::abs(alpha) * closed.norm(), 1e-300);
    ok = ok && h.saturation < 1e-9 && ann < c.tol && aligned_rel < 1e-10;
    blist.push_back(Json{{"aggregate", cplx_json(b.aggregate)},
                         {"operators", h.degree + 1},
                         {"saturation", h.saturation},
                         {"annihilation", ann},
                         {"leading_raw", raw_rel},
                         {"leading_aligned", aligned_rel}});
  }
  Json rep = detail::task_header("extract-hierarchy", c, p);
  rep["results"] = Json{{"branches", blist}};
  rep["status"] = ok ? "pass" : "fail";
  rep["timing_ms"] = detail::ms_since(t0);
  return {rep, ok};
}

inline TaskOutcome task_kernel(const JobConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::require_oracle_scale(c);
  const ModelParams p = realize_params(c);
  const std::vector<BetheRootSet> branches =
      detail::solve_branches(p, c.n, c);
  bool ok = !branches.empty();
  Rng rng(c.seed ^ 0x0ff5e77ull);
  Json blist = Json::array();
  for (const BetheRootSet& b : branches) {
    HierarchyOptions ho;
    ho.seed = c.seed ^ 0x43adb17aull;
    const Hierarchy h = extract_hierarchy(p, b.roots, ho);
    const KernelResult kern = hierarchy_kernel(h);
    const OraclePoly op = oracle_polynomial(p, b.roots);
    const double overlap = normalized_overlap(kern.coeffs, op.poly.coeffs());
    std::vector<Cplx> off = b.roots;
    for (Cplx& r : off)
      r *= 1.0 + std::polar(1e-2, rng.uniform(0.0, 2 * std::numbers::pi));
    const Hierarchy hp = extract_hierarchy(p, off, ho);
    const KernelResult kp = hierarchy_kernel(hp);
    ok = ok && kern.dim == 1 && overlap > 1.0 - 1e-7 &&
         kp.sigma_ratio > 1e-4;
    Json spectrum = Json::array();
    for (Eigen::Index i = 0; i < kern.singular_values.size(); ++i)
      spectrum.push_back(kern.singular_values(i));
    blist.push_back(Json{{"aggregate", cplx_json(b.aggregate)},
                         {"kernel_dim", kern.dim},
                         {"sigma_ratio", kern.sigma_ratio},
                         {"singular_values", spectrum},
                         {"oracle_overlap", overlap},
                         {"offshell_sigma_ratio", kp.sigma_ratio},
                         {"offshell_kernel_dim", kp.dim}});
  }
  Json rep = detail::task_header("kernel", c, p);
  rep["results"] = Json{{"branches", blist}};
  rep["status"] = ok ? "pass" : "fail";
  rep["timing_ms"] = detail::ms_since(t0);
  return {rep, ok};
}

inline TaskOutcome task_constraints(const JobConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  if (c.n != 2)
    throw config_error("constraints task is defined for n = 2");
  if (c.L < 2) throw config_error("constraints task needs L >= 2");
  const ModelParams p = realize_params(c);
  PairConstraintOptions po;
  po.seed = c.seed ^ 0xfacadeull;
  const PairConstraintResult res = pair_constraint_roots(p, po);
  bool ok = true;

  Json fixture;
  const bool tw = p.boundary == Boundary::Twisted;
  bool uniform = true;
  for (const Cplx yv : p.y) uniform = uniform && std::abs(yv - Cplx(1)) < 1e-9;
  if (p.L == 2) {
    const Cplx fx = tw ? pair_fixture_twisted_two_site(p)
                       : pair_fixture_open_two_site(p);
    double best = 1e300;
    for (const Cplx z : res.nontrivial)
      best = std::min(best, std::abs(z - fx) / (1.0 + std::abs(fx)));
    ok = ok && best < std::max(c.tol, 1e-8);
    fixture = Json{{"kind", "linear"},
                   {"value", cplx_json(fx)},
                   {"best_rel_err", best}};
  } else if (p.L == 3 && (tw || uniform)) {
    const std::array<Cplx, 4> cf =
        tw ? pair_fixture_twisted_three_site(p)
           : pair_fixture_open_three_site_uniform(p);
    std::vector<Cplx> fc(cf.begin(), cf.end());
    const std::vector<Cplx> froots = polyroots(fc);
    double worst_root = 0.0;
    for (const Cplx fr : froots) {
      double best = 1e300;
      for (const Cplx z : res.nontrivial)
        best = std::min(best, std::abs(z - fr) / (1.0 + std::abs(fr)));
      worst_root = std::max(worst_root, best);
    }
    double coeff_err = 1e300;
    if (res.nontrivial.size() == froots.size()) {
      const std::vector<Cplx> found = poly_from_roots(res.nontrivial);
      coeff_err = 0.0;
      double scale = 0.0;
      for (const Cplx v : fc) scale = std::max(scale, std::abs(v / cf[3]));
      for (std::size_t k = 0; k < found.size(); ++k)
        coeff_err = std::max(coeff_err,
                             std::abs(found[k] - fc[k] / cf[3]) / scale);
    }
    ok = ok && worst_root < std::max(c.tol, 1e-8) &&
         coeff_err < std::max(c.tol, 1e-8);
    fixture = Json{{"kind", "cubic"},
                   {"coefficients", cvec_json(fc)},
                   {"worst_root_rel_err", worst_root},
                   {"coefficient_rel_err", coeff_err}};
  } else {
    fixture = Json{{"kind", "not-applicable"}};
  }

  Json physical = Json::array();
  if (c.L <= 6) {
    const std::vector<BetheRootSet> branches =
        detail::solve_branches(p, 2, c);
    if (tw) ok = ok && res.nontrivial.size() == branches.size();
    for (const BetheRootSet& b : branches) {
      const Cplx inv = pair_invariant(p, b.roots);
      double best = 1e300;
      for (const Cplx z : res.roots) best = std::min(best, std::abs(z - inv));
      ok = ok && best < 1e-6 * (1.0 + std::abs(inv));
      physical.push_back(Json{{"invariant", cplx_json(inv)},
                              {"nearest_root_dist", best}});
    }
  }

  Json sig = Json::array();
  for (const double s : res.sigma) sig.push_back(s);
  Json rep = detail::task_header("constraints", c, p);
  rep["results"] = Json{{"det_degree", res.det_degree},
                        {"roots", cvec_json(res.roots)},
                        {"sigma", sig},
                        {"trivial", cvec_json(res.trivial)},
                        {"nontrivial", cvec_json(res.nontrivial)},
                        {"trivial_loci", cvec_json(pair_trivial_loci(p))},
                        {"fixture", fixture},
                        {"physical", physical}};
  rep["status"] = ok ? "pass" : "fail";
  rep["timing_ms"] = detail::ms_since(t0);
  return {rep, ok};
}

inline TaskOutcome task_full_report(const JobConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelParams p = realize_params(c);
  Json subs = Json::array();
  bool ok = true;
  const auto add = [&](TaskOutcome sub) {
    subs.push_back(sub.report);
    ok = ok && sub.pass;
  };
  add(task_solve_bethe(c));
  if (c.n >= 1 && c.L <= 6) {
    add(task_verify_annihilation(c));
    add(task_extract_hierarchy(c));
    add(task_kernel(c));
  }
  if (c.n == 2 && c.L >= 2) add(task_constraints(c));
  Json rep = detail::task_header("full-report", c, p);
  rep["subtasks"] = subs;
  rep["status"] = ok ? "pass" : "fail";
  rep["timing_ms"] = detail::ms_since(t0);
  return {rep, ok};
}

// ---------------------------------------------------------------------------
// Operator bundle
// ---------------------------------------------------------------------------

inline Json bundle_json(const Hierarchy& h) {
  Json ops = Json::array();
  for (std::size_t k = 0; k < h.ops.size(); ++k) {
    const CMatrix& m = h.ops[k];
    Json entries = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index col = 0; col < m.cols(); ++col)
        entries.push_back(cplx_json(m(r, col)));
    ops.push_back(Json{{"label", "operator_" + std::to_string(k)},
                       {"shape", Json::array({m.rows(), m.cols()})},
                       {"entries", entries}});
  }
  Json samples = Json::array();
  for (const auto& s : h.samples) samples.push_back(cvec_json(s));
  return Json{{"kind", "operator-bundle"},
              {"params", params_json(h.params)},
              {"n", h.n},
              {"cap", h.cap},
              {"degree", h.degree},
              {"bethe", cvec_json(h.bethe)},
              {"nodes", cvec_json(h.nodes)},
              {"samples", samples},
              {"saturation", h.saturation},
              {"operators", ops}};
}

inline Hierarchy bundle_from_json(const Json& j) {
  if (j.at("kind").get<std::string>() != "operator-bundle")
    throw config_error("not an operator bundle");
  Hierarchy h;
  h.params = params_from_json(j.at("params"));
  h.n = j.at("n").get<int>();
  h.cap = j.at("cap").get<int>();
  h.degree = j.at("degree").get<int>();
  h.bethe = cvec_from_json(j.at("bethe"));
  h.nodes = cvec_from_json(j.at("nodes"));
  h.saturation = j.at("saturation").get<double>();
  for (const Json& s : j.at("samples")) h.samples.push_back(cvec_from_json(s));
  h.eval_basis.resize(static_cast<Eigen::Index>(h.samples.size()),
                      SymPoly<Cplx>::tensor_size(h.n, h.cap));
  for (std::size_t s = 0; s < h.samples.size(); ++s)
    h.eval_basis.row(static_cast<Eigen::Index>(s)) =
        monomial_row(h.n, h.cap, h.samples[s]);
  for (const Json& oj : j.at("operators")) {
    const Eigen::Index r = oj.at("shape").at(0).get<Eigen::Index>();
    const Eigen::Index cc = oj.at("shape").at(1).get<Eigen::Index>();
    CMatrix m(r, cc);
    const Json& entries = oj.at("entries");
    Eigen::Index at = 0;
    for (Eigen::Index rr = 0; rr < r; ++rr)
      for (Eigen::Index col = 0; col < cc; ++col)
        m(rr, col) = cplx_from_json(entries.at(at++));
    h.ops.push_back(std::move(m));
  }
  return h;
}

inline TaskOutcome task_export_bundle(const JobConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::require_oracle_scale(c);
  const ModelParams p = realize_params(c);
  const std::vector<BetheRootSet> branches =
      detail::solve_branches(p, c.n, c);
  if (branches.empty())
    throw numeric_error("export-bundle: no Bethe branch found");
  HierarchyOptions ho;
  ho.seed = c.seed ^ 0x43adb17aull;
  const Hierarchy h = extract_hierarchy(p, branches.front().roots, ho);
  const bool ok = h.saturation < 1e-9;
  Json rep = bundle_json(h);
  rep["status"] = ok ? "pass" : "fail";
  (void)t0;
  return {rep, ok};
}

inline TaskOutcome run_task(const std::string& name, const JobConfig& c) {
  if (name == "solve-bethe") return task_solve_bethe(c);
  if (name == "verify-annihilation") return task_verify_annihilation(c);
  if (name == "extract-hierarchy") return task_extract_hierarchy(c);
  if (name == "kernel") return task_kernel(c);
  if (name == "constraints") return task_constraints(c);
  if (name == "full-report") return task_full_report(c);
  if (name == "export-bundle") return task_export_bundle(c);
  throw config_error("unknown task: " + name);
}

}  // namespace svx
