#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latbound/latbound.hpp"

using namespace latbound;

namespace {

constexpr int kExitUsage = 3;

struct FunctionArgs {
  std::string lattice;
  std::string family = "gaussian";
  double p = 0.0;
  std::string v = "zero";
  double t = 1.0;
  double tol = 1e-10;
};

void add_function_options(CLI::App* cmd, FunctionArgs& a) {
  cmd->add_option("-l,--lattice", a.lattice, "Lattice file, or Z<n>, D4, random:<n>:<seed>")->required();
  cmd->add_option("-f,--family", a.family, "gaussian, sech_product, inv_cosh_product, supergaussian, exp_l1");
  cmd->add_option("-p,--p", a.p, "Supergaussian exponent in (0, 2]");
  cmd->add_option("-v,--v", a.v, "Shift: comma-separated numbers, 'zero' or 'random'");
  cmd->add_option("--tol", a.tol, "Relative remainder target");
}

Json parse_vector_arg(const std::string& s) {
  if (s == "zero" || s == "random") return s;
  Json out = Json::array();
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw ParseError("cannot parse shift vector entry '" + item + "'", "v");
    out.push_back(x);
  }
  if (out.empty()) throw ParseError("empty shift vector", "v");
  return out;
}

Json function_params(const FunctionArgs& a) {
  Json p = {{"family", a.family}, {"v", parse_vector_arg(a.v)}, {"tol", a.tol}};
  if (a.p != 0.0) p["p"] = a.p;
  return p;
}

void emit(const Json& doc, const std::string& path) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path, "output");
  out << text;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path, "plot_csv");
  out << text;
}

/// Runs one check through the manifest runner and prints its record.
int run_single(const std::string& check, const std::string& lattice, Json params, std::uint64_t seed,
               const std::string& output, const Budgets& budgets) {
  RunManifest m;
  m.seed = seed;
  m.budgets = budgets;
  CheckSpec c;
  c.name = check;
  c.lattice_ref = lattice;
  c.params = std::move(params);
  m.checks.push_back(c);
  const auto records = run_manifest(m);
  emit(records.front(), output);
  return exit_code_for(records);
}

Json constants_table(const std::vector<int>& ns, const std::vector<double>& ps, const std::vector<double>& us) {
  const auto cs = cstar_with_argmax();
  Json doc;
  doc["cstar"] = {{"value", cs.value}, {"z_star", cs.z_star}};
  const double exact = l1_constant_exact();
  doc["l1_constant"] = {{"exact", exact}, {"coefficient", kL1Coefficient}, {"gap", kL1Coefficient - exact}};
  Json rows = Json::array();
  for (int n : ns) {
    const auto l1 = transference_bound_l1(n);
    rows.push_back({{"n", n},
                    {"l2_bound", transference_bound_l2(n)},
                    {"l1_exact", l1.exact},
                    {"l1_ceiling", l1.ceiling},
                    {"l1_below_ceiling", l1.below_ceiling}});
  }
  doc["transference"] = rows;
  Json hs = Json::array();
  for (int n : ns)
    for (double p : ps)
      for (double u : us) hs.push_back({{"n", n}, {"p", p}, {"u", u}, {"bound", handshake_bound(n, p, u)}});
  doc["handshake"] = hs;
  return round_numbers(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified lattice sums, tail bounds and transference checks"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string output;
  std::uint64_t seed = 0;
  Budgets budgets;
  app.add_option("-o,--output", output, "Write the report here instead of stdout");
  app.add_option("--seed", seed, "Seed for random shifts");
  app.add_option("--node-budget", budgets.nodes, "Enumeration node budget");
  app.add_option("--grid-budget", budgets.grid, "Covering-radius grid budget");
  app.add_option("--max-points", budgets.max_points, "Largest number of points in one truncated sum");

  FunctionArgs theta_args;
  auto* theta = app.add_subcommand("theta", "Certified sum of f((lambda + v)/t) over a lattice");
  add_function_options(theta, theta_args);
  theta->add_option("-t,--t", theta_args.t, "Dilation t > 0");

  FunctionArgs psf_args;
  double max_residual = 0.0;
  auto* psf = app.add_subcommand("psf", "Poisson summation residual |LHS - RHS| / |RHS|");
  add_function_options(psf, psf_args);
  psf->add_option("-t,--t", psf_args.t, "Dilation t > 0");
  psf->add_option("--max-residual", max_residual, "Residual allowed for PASS");

  FunctionArgs tail_args;
  double tau = 0.0, tail_t = 0.0, alpha = 0.0, radius = 0.0, body_p = 2.0;
  std::string tail_plot;
  auto* tail = app.add_subcommand("tail", "Tail inequality: sum outside K <= nu * full sum");
  add_function_options(tail, tail_args);
  tail->add_option("--tau", tau, "Gaussian body: radius sqrt(tau n / pi)");
  tail->add_option("--body-t", tail_t, "Supergaussian body: radius t (n/p)^(1/p)");
  tail->add_option("--alpha", alpha, "Inverse-cosh body parameter");
  tail->add_option("--radius", radius, "Explicit body radius");
  tail->add_option("--body-p", body_p, "Norm of the explicit body");
  tail->add_option("--plot-csv", tail_plot, "Write radius/tail/bound curve data");

  std::string tr_lattice;
  double tr_p = 2.0;
  int resolution = 16;
  auto* transference = app.add_subcommand("transference", "sigma_p(L) * rho_p(dual L) against the bound");
  transference->add_option("-l,--lattice", tr_lattice, "Lattice file or reference")->required();
  transference->add_option("-p,--p", tr_p, "1 or 2");
  transference->add_option("--resolution", resolution, "Grid points per basis direction");

  std::string ks_lattice;
  double ks_p = 2.0, ks_u = 1.0;
  auto* kissing = app.add_subcommand("kissing", "Count of nonzero vectors within u times the minimum");
  kissing->add_option("-l,--lattice", ks_lattice, "Lattice file or reference")->required();
  kissing->add_option("-p,--p", ks_p, "Norm exponent in (0, 2]");
  kissing->add_option("-u,--u", ks_u, "Factor u >= 1");

  std::vector<int> c_n = {1, 2, 3, 4, 8, 16, 100};
  std::vector<double> c_p = {1.0, 2.0}, c_u = {1.0, 1.5};
  auto* constants = app.add_subcommand("constants", "C*, the l1 constant, and bound tables");
  constants->add_option("-n,--n", c_n, "Dimensions")->delimiter(',')->expected(1, -1);
  constants->add_option("-p,--p", c_p, "Norm exponents for the handshake bound")->delimiter(',')->expected(1, -1);
  constants->add_option("-u,--u", c_u, "Factors u for the handshake bound")->delimiter(',')->expected(1, -1);

  std::string manifest_path, lattice_dir, plot_csv;
  unsigned threads = 1;
  auto* verify = app.add_subcommand("verify", "Run every check listed in a manifest");
  verify->add_option("-m,--manifest", manifest_path, "Manifest file")->required();
  verify->add_option("--lattices", lattice_dir, "Directory for relative lattice files");
  verify->add_option("-j,--threads", threads, "Worker threads");
  verify->add_option("--plot-csv", plot_csv, "Write tail curve data for the tail checks");

  std::string gen_kind = "random";
  int gen_dim = 2;
  std::uint64_t gen_seed = 1;
  std::string gen_id;
  auto* generate = app.add_subcommand("generate", "Write a lattice file");
  generate->add_option("-k,--kind", gen_kind, "integer, d4 or random")->check(CLI::IsMember({"integer", "d4", "random"}));
  generate->add_option("-n,--dim", gen_dim, "Dimension");
  generate->add_option("-s,--lattice-seed", gen_seed, "Seed of the random lattice");
  generate->add_option("--id", gen_id, "Lattice id stored in the file");

  std::string en_lattice, en_center = "zero";
  double en_radius = 1.0, en_p = 2.0;
  auto* enumerate = app.add_subcommand("enumerate", "List lattice points in a ball");
  enumerate->add_option("-l,--lattice", en_lattice, "Lattice file or reference")->required();
  enumerate->add_option("-r,--radius", en_radius, "Ball radius");
  enumerate->add_option("-p,--p", en_p, "Norm exponent (inf allowed)");
  enumerate->add_option("-c,--center", en_center, "Center: comma-separated numbers or 'zero'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*theta) {
      Json params = function_params(theta_args);
      params["t"] = theta_args.t;
      return run_single("theta", theta_args.lattice, params, seed, output, budgets);
    }
    if (*psf) {
      Json params = function_params(psf_args);
      params["t"] = psf_args.t;
      if (max_residual > 0.0) params["max_residual"] = max_residual;
      return run_single("psf", psf_args.lattice, params, seed, output, budgets);
    }
    if (*tail) {
      Json params = function_params(tail_args);
      if (tau > 0.0) params["tau"] = tau;
      if (tail_t > 0.0) params["t"] = tail_t;
      if (alpha > 0.0) params["alpha"] = alpha;
      if (radius > 0.0) {
        params["radius"] = radius;
        params["body_p"] = body_p;
      }
      if (!tail_plot.empty()) {
        RunManifest m;
        m.seed = seed;
        m.budgets = budgets;
        CheckSpec c;
        c.name = "tail";
        c.lattice_ref = tail_args.lattice;
        c.params = params;
        m.checks.push_back(c);
        write_text(tail_plot, tail_curves_csv(m));
      }
      return run_single("tail", tail_args.lattice, params, seed, output, budgets);
    }
    if (*transference)
      return run_single("transference", tr_lattice, {{"p", tr_p}, {"resolution", resolution}}, seed, output, budgets);
    if (*kissing) return run_single("kissing", ks_lattice, {{"p", ks_p}, {"u", ks_u}}, seed, output, budgets);
    if (*constants) {
      if (c_n.empty() || c_p.empty() || c_u.empty()) throw ParseError("empty constants grid", "grid");
      emit(constants_table(c_n, c_p, c_u), output);
      return 0;
    }
    if (*verify) {
      RunManifest m = read_manifest(manifest_path);
      if (!lattice_dir.empty()) {
        m.lattice_dir = lattice_dir;
      } else {
        const auto slash = manifest_path.find_last_of('/');
        m.lattice_dir = slash == std::string::npos ? "." : manifest_path.substr(0, slash);
      }
      const std::string out_path = output.empty() ? m.output : output;
      const auto records = run_manifest(m, threads);
      emit(report_json(records), out_path);
      if (!plot_csv.empty()) write_text(plot_csv, tail_curves_csv(m));
      return exit_code_for(records);
    }
    if (*generate) {
      Matrix basis;
      if (gen_kind == "integer") basis = integer_lattice(gen_dim).basis();
      else if (gen_kind == "d4") basis = checkerboard_d4().basis();
      else basis = random_unimodular_lattice(gen_dim, gen_seed).basis();
      const std::string text = lattice_to_json(basis, gen_id);
      if (output.empty() || output == "-") std::cout << text;
      else write_text(output, text);
      return 0;
    }
    if (*enumerate) {
      const LatticeRecord rec = resolve_lattice(en_lattice, "");
      const Lattice L(rec.basis);
      Vector center = Vector::Zero(L.dim());
      if (en_center != "zero") {
        const Json c = parse_vector_arg(en_center);
        if (static_cast<int>(c.size()) != L.dim()) throw ParseError("center has the wrong length", "center");
        for (int i = 0; i < L.dim(); ++i) center(i) = c[i].get<double>();
      }
      const auto pts = enumerate_in_ball(L, center, en_radius, en_p, budgets.nodes);
      emit(round_numbers(Json{{"lattice_id", rec.id}, {"count", pts.size()}, {"points", points_json(pts)}}), output);
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << " (" << e.partial_count() << " points found)\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
