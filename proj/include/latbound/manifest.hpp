#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "latbound/bounds.hpp"
#include "latbound/enumerate.hpp"
#include "latbound/generators.hpp"
#include "latbound/hypotheses.hpp"
#include "latbound/io.hpp"
#include "latbound/lattice_sum.hpp"
#include "latbound/random.hpp"
#include "latbound/test_functions.hpp"
#include "latbound/verify.hpp"

namespace latbound {

struct Budgets {
  std::uint64_t nodes = kDefaultNodeBudget;
  std::uint64_t grid = kDefaultGridBudget;
  std::uint64_t max_points = 10'000'000;
};

struct CheckSpec {
  std::size_t index = 0;
  std::string name;
  std::string label;
  std::string lattice_ref;
  Json params = Json::object();
  int criterion = 0;
};

struct RunManifest {
  std::string lattice_file;  // default lattice reference
  std::string lattice_dir;   // where relative lattice files are looked up
  std::vector<CheckSpec> checks;
  Budgets budgets;
  std::uint64_t seed = 0;
  std::string output;
};

inline const std::set<std::string>& known_checks() {
  static const std::set<std::string> names = {"theta",    "psf",         "part1",     "tail",
                                              "part3",    "transference", "kissing",   "hypotheses",
                                              "cstar",    "l1_constant", "closed_form"};
  return names;
}

inline bool check_needs_lattice(const std::string& name) {
  return name != "hypotheses" && name != "cstar" && name != "l1_constant" && name != "closed_form";
}

/// Imposed on the sine part of every phased dual sum.
inline constexpr double kImagResidueLimit = 1e-12;
inline constexpr double kClosedFormRelTol = 1e-9;

namespace detail {

inline ParseError field_error(const CheckSpec& c, const std::string& field, const std::string& msg) {
  return ParseError("check " + std::to_string(c.index) + " (" + c.name + "): field '" + field + "': " + msg, field);
}

inline double num_param(const CheckSpec& c, const std::string& key, std::optional<double> def = std::nullopt) {
  if (!c.params.contains(key)) {
    if (def) return *def;
    throw field_error(c, key, "missing");
  }
  const Json& v = c.params.at(key);
  if (!v.is_number()) throw field_error(c, key, "must be a number");
  return v.get<double>();
}

inline std::vector<double> num_list(const CheckSpec& c, const std::string& key) {
  if (!c.params.contains(key)) throw field_error(c, key, "missing");
  const Json& v = c.params.at(key);
  std::vector<double> out;
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw field_error(c, key, "must be a number or a non-empty array");
  for (const auto& x : v) {
    if (!x.is_number()) throw field_error(c, key, "must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::string str_param(const CheckSpec& c, const std::string& key, std::optional<std::string> def = {}) {
  if (!c.params.contains(key)) {
    if (def) return *def;
    throw field_error(c, key, "missing");
  }
  if (!c.params.at(key).is_string()) throw field_error(c, key, "must be a string");
  return c.params.at(key).get<std::string>();
}

inline Family family_param(const CheckSpec& c) {
  const std::string f = str_param(c, "family");
  const auto fam = parse_family(f);
  if (!fam) throw field_error(c, "family", "unknown family '" + f + "'");
  return *fam;
}

inline double supergaussian_p(const CheckSpec& c) {
  const double p = num_param(c, "p");
  if (!(p > 0.0 && p <= 2.0)) throw field_error(c, "p", "supergaussian exponent must lie in (0, 2]");
  return p;
}

inline TestFunctionSpec spec_param(const CheckSpec& c, int n, bool with_table) {
  const Family f = family_param(c);
  if (f != Family::supergaussian) return TestFunctionSpec(f, n);
  const double p = supergaussian_p(c);
  return with_table ? make_supergaussian(n, p) : TestFunctionSpec(f, n, p);
}

inline bool parse_int_suffix(const std::string& s, int& out) {
  if (s.empty() || s.size() > 6) return false;
  for (char ch : s)
    if (ch < '0' || ch > '9') return false;
  out = std::stoi(s);
  return out >= 1;
}

}  // namespace detail

/// "Z<n>", "D4", "random:<n>:<seed>" or a lattice file (relative to the lattice directory).
inline LatticeRecord resolve_lattice(const std::string& ref, const std::string& lattice_dir) {
  int n = 0;
  if (ref.size() > 1 && ref[0] == 'Z' && detail::parse_int_suffix(ref.substr(1), n))
    return {ref, integer_lattice(n).basis()};
  if (ref == "D4") return {ref, checkerboard_d4().basis()};
  if (ref.rfind("random:", 0) == 0) {
    const auto colon = ref.find(':', 7);
    if (colon == std::string::npos || !detail::parse_int_suffix(ref.substr(7, colon - 7), n))
      throw ParseError("malformed lattice reference '" + ref + "' (expected random:<n>:<seed>)", "lattice");
    const std::string seed = ref.substr(colon + 1);
    if (seed.empty() || seed.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError("malformed seed in lattice reference '" + ref + "'", "lattice");
    return {ref, random_unimodular_lattice(n, std::stoull(seed)).basis()};
  }
  const std::string path = (ref.empty() || ref[0] == '/' || lattice_dir.empty()) ? ref : lattice_dir + "/" + ref;
  return read_lattice_file(path);
}

namespace detail {

/// Expands "lattice": [...] and "grid": {key: [values]} into one check per combination.
inline std::vector<CheckSpec> expand_entry(const Json& e, std::size_t pos, const std::string& default_lattice) {
  auto err = [&](const std::string& field, const std::string& msg) {
    return ParseError("checks[" + std::to_string(pos) + "]: field '" + field + "': " + msg, field);
  };
  if (!e.is_object()) throw err("checks", "each check must be an object");
  if (!e.contains("check") || !e.at("check").is_string()) throw err("check", "missing check name");
  CheckSpec base;
  base.name = e.at("check").get<std::string>();
  if (!known_checks().count(base.name)) throw err("check", "unknown check '" + base.name + "'");
  if (e.contains("label")) {
    if (!e.at("label").is_string()) throw err("label", "must be a string");
    base.label = e.at("label").get<std::string>();
  }
  if (e.contains("criterion")) {
    if (!e.at("criterion").is_number_integer()) throw err("criterion", "must be an integer");
    base.criterion = e.at("criterion").get<int>();
  }
  if (e.contains("params")) {
    if (!e.at("params").is_object()) throw err("params", "must be an object");
    base.params = e.at("params");
  }
  std::vector<std::string> lattices;
  if (e.contains("lattice")) {
    const Json& l = e.at("lattice");
    if (l.is_string()) {
      lattices.push_back(l.get<std::string>());
    } else if (l.is_array() && !l.empty()) {
      for (const auto& x : l) {
        if (!x.is_string()) throw err("lattice", "must contain strings");
        lattices.push_back(x.get<std::string>());
      }
    } else {
      throw err("lattice", "must be a string or a non-empty array of strings");
    }
  } else {
    lattices.push_back(default_lattice);
  }
  std::vector<CheckSpec> out;
  for (const auto& lat : lattices) {
    CheckSpec c = base;
    c.lattice_ref = lat;
    out.push_back(c);
  }
  if (e.contains("grid")) {
    const Json& g = e.at("grid");
    if (!g.is_object()) throw err("grid", "must be an object of arrays");
    for (auto it = g.begin(); it != g.end(); ++it) {
      if (!it.value().is_array() || it.value().empty()) throw err("grid." + it.key(), "must be a non-empty array");
      std::vector<CheckSpec> next;
      for (const auto& c : out)
        for (const auto& v : it.value()) {
          CheckSpec d = c;
          d.params[it.key()] = v;
          next.push_back(d);
        }
      out = std::move(next);
    }
  }
  return out;
}

}  // namespace detail

inline RunManifest parse_manifest(const std::string& text, const std::string& source = "manifest") {
  const Json j = parse_json_text(text, source);
  auto err = [&](const std::string& field, const std::string& msg) {
    const int line = detail::line_of_key(text, field);
    return ParseError(source + (line ? ": line " + std::to_string(line) : std::string()) + ": field '" + field +
                          "': " + msg,
                      field, line);
  };
  if (!j.is_object()) throw ParseError(source + ": expected an object", "document", 1);
  RunManifest m;
  if (j.contains("lattice_file")) {
    if (!j.at("lattice_file").is_string()) throw err("lattice_file", "must be a string");
    m.lattice_file = j.at("lattice_file").get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw err("seed", "must be a non-negative integer");
    m.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw err("output", "must be a string");
    m.output = j.at("output").get<std::string>();
  }
  if (j.contains("budgets")) {
    const Json& b = j.at("budgets");
    if (!b.is_object()) throw err("budgets", "must be an object");
    for (auto [key, slot] : {std::pair<const char*, std::uint64_t*>{"nodes", &m.budgets.nodes},
                             {"grid", &m.budgets.grid},
                             {"max_points", &m.budgets.max_points}}) {
      if (!b.contains(key)) continue;
      if (!b.at(key).is_number_unsigned() || b.at(key).get<std::uint64_t>() == 0)
        throw err(key, "must be a positive integer");
      *slot = b.at(key).get<std::uint64_t>();
    }
  }
  if (!j.contains("checks")) throw err("checks", "missing");
  if (!j.at("checks").is_array()) throw err("checks", "must be an array");
  if (j.at("checks").empty()) throw err("checks", "empty checks list");
  std::size_t pos = 0;
  for (const auto& e : j.at("checks")) {
    for (auto& c : detail::expand_entry(e, pos, m.lattice_file)) {
      c.index = m.checks.size();
      m.checks.push_back(std::move(c));
    }
    ++pos;
  }
  return m;
}

inline RunManifest read_manifest(const std::string& path) {
  return parse_manifest(detail::read_file(path), path);
}

namespace detail {

struct Prepared {
  const CheckSpec* spec = nullptr;
  std::shared_ptr<const Lattice> lattice;
  std::string lattice_id;
};

inline Vector vector_param(const CheckSpec& c, int n, std::uint64_t seed) {
  if (!c.params.contains("v")) return Vector::Zero(n);
  const Json& v = c.params.at("v");
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "zero") return Vector::Zero(n);
    if (s == "random") {
      Rng rng(derive_seed(seed, c.index));
      Vector out(n);
      for (int i = 0; i < n; ++i) out(i) = rng.uniform(-0.5, 0.5);
      return out;
    }
    throw field_error(c, "v", "must be an array, \"zero\" or \"random\"");
  }
  if (v.is_number() && n == 1) return Vector::Constant(1, v.get<double>());
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    throw field_error(c, "v", "must have " + std::to_string(n) + " entries");
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    if (!v[i].is_number()) throw field_error(c, "v", "entries must be numbers");
    out(i) = v[i].get<double>();
  }
  return out;
}

/// Validates everything that can be checked without numerical work.
inline void validate_params(const CheckSpec& c, int n, std::uint64_t seed) {
  const std::string& k = c.name;
  auto positive = [&](const std::string& key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw field_error(c, key, "must be positive");
  };
  if (k == "theta" || k == "psf" || k == "part1" || k == "tail" || k == "part3") {
    family_param(c);
    if (family_param(c) == Family::supergaussian) supergaussian_p(c);
    vector_param(c, n, seed);
    if (c.params.contains("tol")) positive("tol", num_param(c, "tol"));
  }
  if (k == "theta" || k == "psf") positive("t", num_param(c, "t", 1.0));
  if (k == "psf" && c.params.contains("max_residual")) positive("max_residual", num_param(c, "max_residual"));
  if (k == "part1" && !(num_param(c, "t", 1.0) >= 1.0)) throw field_error(c, "t", "part 1 requires t >= 1");
  if (k == "tail") {
    const Family f = family_param(c);
    const int given = c.params.contains("radius") + c.params.contains("tau") + c.params.contains("t") +
                      c.params.contains("alpha");
    if (given > 1) throw field_error(c, "radius", "give only one of radius, tau, t, alpha");
    if (c.params.contains("tau")) {
      if (f != Family::gaussian) throw field_error(c, "tau", "tau applies to the gaussian family");
      if (!(num_param(c, "tau") >= 0.5)) throw field_error(c, "tau", "must be >= 1/2");
    }
    if (c.params.contains("t")) {
      if (f != Family::supergaussian) throw field_error(c, "t", "t applies to the supergaussian family");
      if (!(num_param(c, "t") >= 1.0)) throw field_error(c, "t", "must be >= 1");
    }
    if (c.params.contains("alpha")) {
      if (f != Family::inv_cosh_product) throw field_error(c, "alpha", "alpha applies to inv_cosh_product");
      if (!(2.0 * M_PI * num_param(c, "alpha") / std::sqrt(3.0) > 1.0))
        throw field_error(c, "alpha", "must exceed sqrt(3)/(2 pi)");
    }
    if (given == 0 && f != Family::inv_cosh_product)
      throw field_error(c, "radius", "one of radius, tau, t is required");
    if (c.params.contains("radius")) {
      positive("radius", num_param(c, "radius"));
      positive("body_p", num_param(c, "body_p"));
    }
    if (f == Family::sech_product) throw field_error(c, "family", "no certified nu bound for sech_product");
  }
  if (k == "part3") {
    if (family_param(c) == Family::exp_l1)
      throw field_error(c, "family", "exp_l1 dual sums cannot be certified; use psf instead");
    positive("body_p", num_param(c, "body_p"));
    const bool r = c.params.contains("radius"), frac = c.params.contains("radius_sigma");
    if (r == frac) throw field_error(c, "radius", "give exactly one of radius, radius_sigma");
    positive(r ? "radius" : "radius_sigma", num_param(c, r ? "radius" : "radius_sigma"));
    if (frac && !(num_param(c, "radius_sigma") < 1.0))
      throw field_error(c, "radius_sigma", "must be below 1 (the body may not contain lattice vectors)");
  }
  if (k == "transference") {
    const double p = num_param(c, "p");
    if (p != 1.0 && p != 2.0) throw field_error(c, "p", "must be 1 or 2");
    const double res = num_param(c, "resolution", 16.0);
    if (res < 2 || res != std::floor(res)) throw field_error(c, "resolution", "must be an integer >= 2");
    if (c.params.contains("expect_product")) num_param(c, "expect_product");
  }
  if (k == "kissing") {
    const double p = num_param(c, "p", 2.0);
    if (!(p > 0.0 && p <= 2.0)) throw field_error(c, "p", "must lie in (0, 2]");
    if (!(num_param(c, "u", 1.0) >= 1.0)) throw field_error(c, "u", "must be >= 1");
    if (c.params.contains("expected_count") && !c.params.at("expected_count").is_number_unsigned())
      throw field_error(c, "expected_count", "must be a non-negative integer");
  }
  if (k == "hypotheses") {
    family_param(c);
    if (family_param(c) == Family::supergaussian) supergaussian_p(c);
    const double dim = num_param(c, "n");
    if (dim < 1 || dim != std::floor(dim)) throw field_error(c, "n", "must be a positive integer");
    const double s = num_param(c, "samples", 10000.0);
    if (s < 1 || s != std::floor(s)) throw field_error(c, "samples", "must be a positive integer");
  }
  if (k == "closed_form") {
    const Family f = family_param(c);
    for (double d : num_list(c, "n"))
      if (d < 1 || d != std::floor(d)) throw field_error(c, "n", "entries must be positive integers");
    if (f == Family::gaussian) {
      for (double tau : num_list(c, "tau"))
        if (!(tau >= 0.5)) throw field_error(c, "tau", "entries must be >= 1/2");
    } else if (f == Family::supergaussian) {
      for (double p : num_list(c, "p"))
        if (!(p > 0.0 && p <= 2.0)) throw field_error(c, "p", "entries must lie in (0, 2]");
      for (double t : num_list(c, "t"))
        if (!(t >= 1.0)) throw field_error(c, "t", "entries must be >= 1");
    } else {
      throw field_error(c, "family", "closed forms exist for gaussian and supergaussian only");
    }
  }
  if (c.params.contains("scale")) positive("scale", num_param(c, "scale"));
}

inline Json interval_json(const Interval& i) { return Json::array({i.lower, i.upper}); }

inline Json tally_json(const ConditionTally& t) {
  return {{"checked", t.checked},
          {"violations", t.violations},
          {"worst_margin", t.worst_margin},
          {"witness", t.witness}};
}

inline SumOptions sum_options(const CheckSpec& c, const Budgets& b) {
  SumOptions o;
  o.tol = num_param(c, "tol", 1e-10);
  o.node_budget = b.nodes;
  o.max_points = b.max_points;
  return o;
}

inline Json sum_json(const CertifiedSum& s) {
  return {{"partial", s.partial},
          {"remainder_bound", s.remainder_bound},
          {"lower", s.lower()},
          {"upper", s.upper()},
          {"truncation_radius", s.truncation_radius},
          {"norm_p", "inf"},
          {"points", s.points},
          {"certified", s.certified}};
}

inline Json nu_json(const NuBound& nu) {
  return {{"value", nu.value}, {"method", std::string(nu_method_name(nu.method))}, {"u_star", nu.u_star}};
}

inline BodySpec tail_body(const CheckSpec& c, const TestFunctionSpec& spec, int n) {
  if (c.params.contains("tau")) return BodySpec(2.0, gaussian_radius_for_tau(num_param(c, "tau"), n));
  if (c.params.contains("t")) return BodySpec(spec.p, supergaussian_radius_for_t(spec.p, num_param(c, "t"), n));
  if (spec.family == Family::inv_cosh_product && !c.params.contains("radius"))
    return BodySpec(1.0, cosh_body_radius(num_param(c, "alpha", cosh_alpha_default(n)), n));
  return BodySpec(num_param(c, "body_p"), num_param(c, "radius"));
}

inline void set_verdict(Json& rec, Verdict v) { rec["verdict"] = std::string(verdict_name(v)); }

inline void run_body(const Prepared& prep, const RunManifest& m, Json& rec) {
  const CheckSpec& c = *prep.spec;
  const std::string& k = c.name;
  const Lattice* L = prep.lattice.get();
  const int n = L ? L->dim() : 0;
  Json& d = rec["details"];

  if (k == "cstar") {
    const auto cs = cstar_with_argmax();
    d = {{"value", cs.value}, {"z_star", cs.z_star}, {"range", {0.424785, 0.424795}}};
    set_verdict(rec, cs.value >= 0.424785 && cs.value <= 0.424795 ? Verdict::pass : Verdict::fail);
    return;
  }
  if (k == "l1_constant") {
    const double exact = l1_constant_exact();
    d = {{"exact", exact}, {"coefficient", kL1Coefficient}, {"gap", kL1Coefficient - exact}};
    rec["margin"] = kL1Coefficient - exact;
    set_verdict(rec, exact < kL1Coefficient ? Verdict::pass : Verdict::fail);
    return;
  }
  if (k == "closed_form") {
    const Family f = family_param(c);
    double worst = 0.0;
    std::uint64_t points = 0;
    Json worst_at;
    auto record = [&](double cf, double opt, Json at) {
      const double rel = std::abs(cf - opt) / std::abs(cf);
      ++points;
      if (rel >= worst) worst = rel, worst_at = std::move(at);
    };
    for (double nd : num_list(c, "n")) {
      const int dim = static_cast<int>(nd);
      if (f == Family::gaussian) {
        for (double tau : num_list(c, "tau"))
          record(gaussian_nu_closed_form(tau, dim),
                 mu_norm(TestFunctionSpec(f, dim), gaussian_radius_for_tau(tau, dim), dim).value,
                 {{"n", dim}, {"tau", tau}});
      } else {
        for (double p : num_list(c, "p"))
          for (double t : num_list(c, "t")) {
            const double r = supergaussian_radius_for_t(p, t, dim);
            record(supergaussian_mu_closed_form(p, r, dim), mu_norm(TestFunctionSpec(f, dim, p), r, dim).value,
                   {{"n", dim}, {"p", p}, {"t", t}});
          }
      }
    }
    d = {{"points", points}, {"worst_rel_error", worst}, {"worst_at", worst_at}, {"tolerance", kClosedFormRelTol}};
    rec["margin"] = kClosedFormRelTol - worst;
    set_verdict(rec, worst <= kClosedFormRelTol ? Verdict::pass : Verdict::fail);
    return;
  }
  if (k == "hypotheses") {
    const int dim = static_cast<int>(num_param(c, "n"));
    const auto spec = spec_param(c, dim, true);
    const auto samples = static_cast<std::uint64_t>(num_param(c, "samples", 10000.0));
    const auto rep = check_hypotheses(spec, samples, derive_seed(m.seed, c.index));
    d = {{"samples", samples},
         {"fhat_nonnegative", tally_json(rep.fhat_nonnegative)},
         {"ray_monotone", tally_json(rep.ray_monotone)},
         {"ratio_concave", tally_json(rep.ratio_concave)},
         {"margin", kHypothesisMargin}};
    set_verdict(rec, rep.total_violations() == 0 ? Verdict::pass : Verdict::fail);
    return;
  }

  const Vector v = vector_param(c, n, m.seed);
  rec["params"]["v"] = vector_json(v);
  const SumOptions opt = sum_options(c, m.budgets);

  if (k == "theta") {
    const auto s = certified_sum(*L, spec_param(c, n, false), v, num_param(c, "t", 1.0), opt);
    rec["lhs_interval"] = interval_json(interval_of(s));
    d = sum_json(s);
    set_verdict(rec, s.certified ? Verdict::pass : Verdict::inconclusive);
  } else if (k == "psf") {
    const auto spec = spec_param(c, n, true);
    const double max_res = num_param(c, "max_residual", slowly_decaying_transform(spec) ? 1e-6 : 1e-8);
    const auto rep = psf_residual(*L, spec, v, num_param(c, "t", 1.0), opt.tol, opt);
    rec["lhs_interval"] = interval_json(interval_of(rep.lhs));
    rec["rhs_interval"] = interval_json(rep.rhs_interval);
    rec["margin"] = max_res - rep.residual;
    d = {{"residual", rep.residual},
         {"max_residual", max_res},
         {"imag_residue", rep.imag_residue},
         {"lhs", rep.lhs_value},
         {"rhs", rep.rhs_value},
         {"certified", rep.certified}};
    set_verdict(rec, rep.residual <= max_res && rep.imag_residue <= kImagResidueLimit ? Verdict::pass
                                                                                        : Verdict::fail);
  } else if (k == "part1") {
    const auto rep = check_part1(*L, spec_param(c, n, false), v, num_param(c, "t", 1.0), opt);
    rec["lhs_interval"] = interval_json(rep.lhs_interval);
    rec["rhs_interval"] = interval_json(rep.rhs_interval);
    rec["margin"] = rep.margin;
    d = {{"identity", rep.identity}, {"t", rep.t}};
    set_verdict(rec, rep.verdict);
  } else if (k == "tail") {
    const auto spec = spec_param(c, n, false);
    const BodySpec body = tail_body(c, spec, n);
    const NuBound nu = nu_for_body(spec, body);
    const auto rep = check_tail_inequality(*L, spec, body, v, nu, opt);
    rec["lhs_interval"] = interval_json(rep.lhs);
    rec["rhs_interval"] = interval_json(rep.rhs);
    rec["margin"] = rep.margin;
    d = {{"body_p", body.p},
         {"radius", body.radius},
         {"nu", nu_json(nu)},
         {"inside_points", rep.inside_points},
         {"full_sum", sum_json(rep.rhs_sum)}};
    set_verdict(rec, rep.verdict);
  } else if (k == "part3") {
    const auto spec = spec_param(c, n, true);
    const double bp = num_param(c, "body_p");
    double radius;
    if (c.params.contains("radius")) {
      radius = num_param(c, "radius");
    } else {
      radius = num_param(c, "radius_sigma") * shortest_vector(*L, bp, opt.node_budget).sigma;
    }
    const BodySpec body(bp, radius);
    const NuBound nu = nu_for_body(spec, body);
    const auto rep = check_part3(*L, spec, body, v, nu, opt);
    rec["lhs_interval"] = interval_json(rep.lhs_interval);
    rec["rhs_interval"] = interval_json(rep.rhs_interval);
    rec["margin"] = rep.margin;
    d = {{"body_p", bp},          {"radius", radius},          {"nu", nu_json(nu)},
         {"factor", rep.factor},  {"identity", rep.identity}, {"trivial", rep.trivial},
         {"note", rep.note}};
    set_verdict(rec, rep.verdict);
  } else if (k == "transference") {
    const double p = num_param(c, "p");
    const int res = static_cast<int>(num_param(c, "resolution", 16.0));
    const auto rep = transference_check(*L, p, res, m.budgets.grid, m.budgets.nodes);
    rec["lhs_interval"] = Json::array({rep.product_lower, rep.product_upper});
    rec["rhs_interval"] = Json::array({rep.bound, rep.bound});
    rec["margin"] = rep.bound - rep.product_upper;
    d = {{"sigma", rep.sigma},
         {"rho", {rep.rho.lower, rep.rho.upper}},
         {"samples", rep.rho.samples},
         {"bound", rep.bound},
         {"ceiling", rep.ceiling},
         {"resolution", res}};
    Verdict verdict = rep.verdict;
    if (c.params.contains("expect_product")) {
      const double e = num_param(c, "expect_product");
      const bool inside = rep.product_lower <= e * (1 + 1e-12) && e <= rep.product_upper * (1 + 1e-12);
      d["expect_product"] = e;
      d["expect_inside"] = inside;
      if (!inside) verdict = Verdict::fail;
    }
    set_verdict(rec, verdict);
  } else if (k == "kissing") {
    const double p = num_param(c, "p", 2.0), u = num_param(c, "u", 1.0);
    const auto rep = handshake_census(*L, p, u, opt.node_budget);
    const auto red = handshake_census(lll_reduce(*L), p, u, opt.node_budget);
    rec["lhs_interval"] = Json::array({static_cast<double>(rep.count), static_cast<double>(rep.count)});
    rec["rhs_interval"] = Json::array({rep.bound, rep.bound});
    rec["margin"] = rep.bound - static_cast<double>(rep.count);
    d = {{"count", rep.count},
         {"sigma", rep.sigma},
         {"bound", rep.bound},
         {"even", rep.even},
         {"reduced_count", red.count}};
    bool ok = rep.pass && rep.even && red.count == rep.count;
    if (c.params.contains("expected_count")) {
      const auto e = c.params.at("expected_count").get<std::uint64_t>();
      d["expected_count"] = e;
      ok = ok && e == rep.count;
    }
    set_verdict(rec, ok ? Verdict::pass : Verdict::fail);
  }
}

}  // namespace detail

/// Resolves lattices and validates every check; throws ParseError before any numerical work.
inline std::vector<detail::Prepared> prepare_checks(const RunManifest& m) {
  std::map<std::string, std::shared_ptr<const Lattice>> cache;
  std::map<std::string, std::string> ids;
  std::vector<detail::Prepared> out;
  for (const auto& c : m.checks) {
    detail::Prepared p;
    p.spec = &c;
    if (check_needs_lattice(c.name)) {
      if (c.lattice_ref.empty()) throw detail::field_error(c, "lattice", "no lattice given and no lattice_file default");
      const double scale = detail::num_param(c, "scale", 1.0);
      const std::string key = c.lattice_ref + "@" + format_sig(scale);
      if (!cache.count(key)) {
        LatticeRecord rec;
        try {
          rec = resolve_lattice(c.lattice_ref, m.lattice_dir);
        } catch (const ParseError& e) {
          throw ParseError("check " + std::to_string(c.index) + ": " + e.what(), e.field(), e.line());
        }
        if (!(scale > 0.0)) throw detail::field_error(c, "scale", "must be positive");
        cache[key] = std::make_shared<const Lattice>(scale * rec.basis);
        ids[key] = scale == 1.0 ? rec.id : rec.id + "*" + format_sig(scale);
      }
      p.lattice = cache[key];
      p.lattice_id = ids[key];
      detail::validate_params(c, p.lattice->dim(), m.seed);
    } else {
      detail::validate_params(c, 0, m.seed);
    }
    out.push_back(p);
  }
  return out;
}

enum class RecordStatus { pass, fail, inconclusive, budget, error };

inline RecordStatus record_status(const Json& rec) {
  const std::string v = rec.at("verdict").get<std::string>();
  if (v == "PASS") return RecordStatus::pass;
  if (v == "FAIL") return RecordStatus::fail;
  if (v == "INCONCLUSIVE") return RecordStatus::inconclusive;
  if (v == "BUDGET_EXCEEDED") return RecordStatus::budget;
  return RecordStatus::error;
}

inline Json run_prepared(const detail::Prepared& p, const RunManifest& m) {
  const CheckSpec& c = *p.spec;
  Json rec;
  rec["index"] = c.index;
  rec["check"] = c.name;
  if (!c.label.empty()) rec["label"] = c.label;
  if (c.criterion) rec["criterion"] = c.criterion;
  rec["lattice_id"] = p.lattice ? Json(p.lattice_id) : Json(nullptr);
  rec["params"] = c.params;
  rec["lhs_interval"] = nullptr;
  rec["rhs_interval"] = nullptr;
  rec["margin"] = nullptr;
  try {
    detail::run_body(p, m, rec);
  } catch (const BudgetExceeded& e) {
    rec["verdict"] = "BUDGET_EXCEEDED";
    rec["details"] = {{"error", e.what()}, {"partial_count", e.partial_count()}, {"achieved", e.achieved()}};
  } catch (const Error& e) {
    rec["verdict"] = "ERROR";
    rec["details"] = {{"error", e.what()}};
  }
  return round_numbers(rec);
}

/// Runs every check; records come back in manifest order whatever the thread count.
inline std::vector<Json> run_manifest(const RunManifest& m, unsigned threads = 1,
                                      const std::function<void(const Json&)>& on_done = nullptr) {
  const auto prepared = prepare_checks(m);
  std::vector<Json> records(prepared.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      records[i] = run_prepared(prepared[i], m);
      if (on_done) on_done(records[i]);
    }
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < prepared.size(); i = next++) {
        records[i] = run_prepared(prepared[i], m);
        if (on_done) {
          std::lock_guard lock(done_mutex);
          on_done(records[i]);
        }
      }
    });
  for (auto& th : pool) th.join();
  return records;
}

inline Json report_json(const std::vector<Json>& records) {
  std::size_t counts[5] = {0, 0, 0, 0, 0};
  for (const auto& r : records) ++counts[static_cast<int>(record_status(r))];
  return {{"records", records},
          {"summary",
           {{"total", records.size()},
            {"pass", counts[0]},
            {"fail", counts[1]},
            {"inconclusive", counts[2]},
            {"budget_exceeded", counts[3]},
            {"error", counts[4]}}}};
}

/// 0 all PASS, 1 any FAIL or ERROR, 4 any budget overrun, 2 any INCONCLUSIVE.
inline int exit_code_for(const std::vector<Json>& records) {
  bool fail = false, budget = false, inconclusive = false;
  for (const auto& r : records) switch (record_status(r)) {
      case RecordStatus::fail:
      case RecordStatus::error: fail = true; break;
      case RecordStatus::budget: budget = true; break;
      case RecordStatus::inconclusive: inconclusive = true; break;
      case RecordStatus::pass: break;
    }
  if (fail) return 1;
  if (budget) return 4;
  if (inconclusive) return 2;
  return 0;
}

/// CSV rows "index,radius,tail_lower,tail_upper,bound" for every tail check.
inline std::string tail_curves_csv(const RunManifest& m, int points = 9) {
  std::string out = "index,lattice_id,radius,tail_lower,tail_upper,bound\n";
  for (const auto& p : prepare_checks(m)) {
    const CheckSpec& c = *p.spec;
    if (c.name != "tail") continue;
    const int n = p.lattice->dim();
    const auto spec = detail::spec_param(c, n, false);
    const BodySpec body = detail::tail_body(c, spec, n);
    std::vector<double> radii;
    for (int i = 0; i < points; ++i) radii.push_back(body.radius * (0.5 + 1.5 * i / (points - 1)));
    const auto rows = tail_curve(*p.lattice, spec, body.p, detail::vector_param(c, n, m.seed), radii,
                                 detail::sum_options(c, m.budgets));
    for (const auto& r : rows)
      out += std::to_string(c.index) + "," + p.lattice_id + "," + format_sig(r.radius) + "," +
             format_sig(r.tail.lower) + "," + format_sig(r.tail.upper) + "," + format_sig(r.bound) + "\n";
  }
  return out;
}

}  // namespace latbound
