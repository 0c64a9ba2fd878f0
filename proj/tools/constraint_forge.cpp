// Command-line front end. Exit codes: 0 success, 1 a check or solve failed,
// 2 usage or input error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cforge/constraint.hpp"
#include "cforge/io.hpp"
#include "cforge/solve.hpp"
#include "cforge/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cforge;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PointArgs {
  std::string manifest;
  int n = 3;
  int points = 16;
  double tau = 0.0;
  double kappa = 0.0;
  std::optional<double> lambda;
  double perturb = 0.0;
  std::optional<double> momentum_perturb;
  int band = 2;
  std::uint64_t seed = 0;

  void add(CLI::App* sub, bool with_manifest) {
    if (with_manifest) sub->add_option("--manifest", manifest, "Phase-point manifest (JSON)");
    sub->add_option("--n", n, "Spatial dimension");
    sub->add_option("--points", points, "Grid points per axis");
    sub->add_option("--tau", tau, "Mean curvature parameter of the background");
    sub->add_option("--kappa", kappa, "Model curvature constant");
    sub->add_option("--lambda", lambda, "Cosmological constant (default: 2L = n(n-1)(tau^2+kappa))");
    sub->add_option("--perturb", perturb, "Sup-norm amplitude of the random metric perturbation");
    sub->add_option("--momentum-perturb", momentum_perturb, "Momentum perturbation amplitude (default: --perturb)");
    sub->add_option("--band", band, "Fourier band of random perturbations");
    sub->add_option("--seed", seed, "Random seed");
  }

  LoadedPoint load() const {
    if (!manifest.empty()) return read_phase_point(manifest);
    GridSpec s = GridSpec::uniform(n, points, tau, kappa);
    s.lambda = lambda;
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    LoadedPoint lp;
    lp.grid = Grid::make(s);
    lp.point = background(lp.grid);
    if (perturb != 0.0 || momentum_perturb.value_or(0.0) != 0.0) {
      if (band < 1 || band > default_band(lp.grid)) throw UsageError("--band must lie in [1, points/4]");
      lp.point = perturbed(lp.point, seed, band, perturb, momentum_perturb.value_or(perturb));
    }
    lp.lambda = s.cosmological_constant();
    return lp;
  }
};

/// Values from a JSON config fill every option not given on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("malformed config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError("unknown config key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    const auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(text(v));
    } else {
      opt->add_result(text(value));
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

void emit(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

Mutant mutant_from_string(const std::string& s) {
  static const std::map<std::string, Mutant> m{{"none", Mutant::none},
                                               {"flip_pi_hat", Mutant::flip_pi_hat},
                                               {"flip_trace_laplacian", Mutant::flip_trace_laplacian},
                                               {"flip_lie_density", Mutant::flip_lie_density}};
  const auto it = m.find(s);
  if (it == m.end()) throw UsageError("unknown mutant '" + s + "'");
  return it->second;
}

int report_set(const std::vector<OperatorReport>& reports, const std::string& report_dir) {
  bool ok = true;
  json all = json::array();
  for (const auto& r : reports) {
    ok = ok && r.pass;
    std::cerr << (r.pass ? "PASS " : "FAIL ") << r.check_name << "\n";
    all.push_back(r.to_json());
    if (!report_dir.empty()) {
      fs::create_directories(report_dir);
      std::ofstream(fs::path(report_dir) / (r.check_name + ".json")) << r.to_json().dump(2) << "\n";
      write_text((fs::path(report_dir) / (r.check_name + ".csv")).string(),
                 r.statistics.contains("errors") ? slope_csv(r) : residual_csv(r));
    }
  }
  if (report_dir.empty()) std::cout << all.dump(2) << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constraint-forge: constraint operators, KID detection and projection on flat tori"};
  app.require_subcommand(1);
  std::map<CLI::App*, std::string> configs;
  const auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", configs[sub], "JSON file supplying defaults for any flag of this command");
    return sub;
  };

  // gen
  PointArgs gen_pt;
  bool gen_background = false;
  bool gen_text = false;
  std::string gen_out = ".", gen_name = "point", gen_report;
  CLI::App* gen = with_config(app.add_subcommand("gen", "Write a background or perturbed phase point"));
  gen_pt.add(gen, false);
  gen->add_flag("--background", gen_background, "Unperturbed background (the default without --perturb)");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--name", gen_name, "Base name of the written files");
  gen->add_flag("--text", gen_text, "Write CFF1 text blocks instead of binary");
  gen->add_option("--report", gen_report, "Write the JSON summary here instead of stdout");

  // phi
  std::string phi_manifest, phi_out, phi_report;
  bool phi_text = false;
  CLI::App* phi_cmd = with_config(app.add_subcommand("phi", "Evaluate the constraint operator on a phase point"));
  phi_cmd->add_option("--manifest", phi_manifest, "Phase-point manifest")->required();
  phi_cmd->add_option("--out", phi_out, "Directory for phi0/phii CFF1 files");
  phi_cmd->add_flag("--text", phi_text, "Write CFF1 text blocks");
  phi_cmd->add_option("--report", phi_report, "JSON summary path");

  // check-adjoint
  PointArgs adj_pt;
  int adj_trials = 20, adj_band = 0;
  std::string adj_mutant = "none", adj_report;
  CLI::App* adj = with_config(app.add_subcommand("check-adjoint", "Pairing test of DPhi against DPhi*"));
  adj_pt.add(adj, true);
  adj->add_option("--trials", adj_trials, "Random (v, xi) pairs");
  adj->add_option("--test-band", adj_band, "Band of the test fields (default points/4)");
  adj->add_option("--mutant", adj_mutant, "none, flip_pi_hat, flip_trace_laplacian or flip_lie_density");
  adj->add_option("--report", adj_report, "JSON report path");

  // identities
  int id_points = 16, id_trials = 20;
  std::uint64_t id_seed = 0;
  std::string id_report_dir;
  CLI::App* ids = with_config(app.add_subcommand("identities", "Closed-form identities and mutant sensitivity"));
  ids->add_option("--points", id_points, "Grid points per axis");
  ids->add_option("--trials", id_trials, "Random trials per identity");
  ids->add_option("--seed", id_seed, "Random seed");
  ids->add_option("--report-dir", id_report_dir, "Directory for per-check JSON and CSV");

  // verify
  std::string v_suite = "all", v_report_dir;
  int v_points = 16;
  std::uint64_t v_seed = 0;
  CLI::App* ver = with_config(app.add_subcommand("verify", "Run a verification suite"));
  ver->add_option("suite", v_suite, "Suite name or 'all'");
  ver->add_option("--points", v_points, "Grid points per axis");
  ver->add_option("--seed", v_seed, "Random seed");
  ver->add_option("--report-dir", v_report_dir, "Directory for per-check JSON and CSV");

  // project
  std::string pr_manifest, pr_out = ".", pr_name = "projected", pr_strategy = "adjoint-composition", pr_csv,
                           pr_report;
  double pr_epsilon = 0.0;
  std::optional<double> pr_tau;
  SolveOptions pr_opts;
  bool pr_text = false;
  CLI::App* proj = with_config(app.add_subcommand("project", "Newton projection onto Phi = epsilon"));
  proj->add_option("--manifest", pr_manifest, "Starting phase point")->required();
  proj->add_option("--epsilon", pr_epsilon, "Target: Phi_0 = epsilon, Phi_i = 0");
  proj->add_option("--strategy", pr_strategy, "adjoint-composition or special-variations");
  proj->add_option("--tau", pr_tau, "Background mean curvature for the preconditioner (default: manifest)");
  proj->add_option("--max-iters", pr_opts.max_newton_iters, "Newton iterations");
  proj->add_option("--tol", pr_opts.newton_tol, "Relative residual target");
  proj->add_option("--abs-tol", pr_opts.newton_abs_tol, "Absolute residual target");
  proj->add_option("--krylov-tol", pr_opts.krylov_tol, "Inner solve tolerance");
  proj->add_option("--out", pr_out, "Output directory");
  proj->add_option("--name", pr_name, "Base name of the projected point");
  proj->add_flag("--text", pr_text, "Write CFF1 text blocks");
  proj->add_option("--csv", pr_csv, "Residual-against-iteration CSV");
  proj->add_option("--report", pr_report, "JSON report path");

  // kids
  PointArgs kid_pt;
  double kid_threshold = 1e-8;
  int kid_m = 6;
  std::string kid_path = "auto", kid_csv, kid_report, kid_basis_dir;
  CLI::App* kids = with_config(app.add_subcommand("kids", "Smallest singular values of DPhi* and KID kernel"));
  kid_pt.add(kids, true);
  kids->add_option("--threshold", kid_threshold, "Kernel threshold relative to sigma_max");
  kids->add_option("--m", kid_m, "Number of smallest singular values");
  kids->add_option("--path", kid_path, "auto, dense or matrix-free");
  kids->add_option("--csv", kid_csv, "Singular-value CSV");
  kids->add_option("--basis-dir", kid_basis_dir, "Write kernel lapse-shift pairs as CFF1 files here");
  kids->add_option("--report", kid_report, "JSON report path");

  // norms
  std::string nm_file, nm_manifest, nm_report;
  int nm_k = 2;
  CLI::App* norms = with_config(app.add_subcommand("norms", "Discrete Sobolev norms of a field or phase point"));
  norms->add_option("--file", nm_file, "CFF1 field file");
  norms->add_option("--manifest", nm_manifest, "Phase point: norms of g - identity and pi");
  norms->add_option("--k", nm_k, "Highest derivative order");
  norms->add_option("--report", nm_report, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (CLI::App* sub : app.get_subcommands()) {
      if (!configs[sub].empty()) apply_config(sub, configs[sub]);
    }

    if (app.got_subcommand(gen)) {
      const LoadedPoint lp = gen_pt.load();
      const fs::path manifest =
          write_phase_point(gen_out, gen_name, lp.point, gen_text ? Encoding::text : Encoding::binary);
      const ConstraintValue c = phi(lp.point, lp.lambda);
      emit({{"manifest", manifest.string()},
            {"grid", grid_spec_to_json(lp.grid->spec())},
            {"phi_max_norm", max_norm(c)},
            {"phi_l2", l2_norm(c)},
            {"ellipticity_lambda", ellipticity(lp.point.g.g).lambda}},
           gen_report);
      return 0;
    }

    if (app.got_subcommand(phi_cmd)) {
      const LoadedPoint lp = read_phase_point(phi_manifest);
      require_elliptic(lp.point.g);
      const ConstraintValue c = phi(lp.point, lp.lambda);
      const double dual = (hamiltonian(lp.point, lp.lambda) - hamiltonian_K_form(lp.point, lp.lambda)).max_abs();
      json j{{"manifest", phi_manifest},
             {"phi_max_norm", max_norm(c)},
             {"phi_l2", l2_norm(c)},
             {"phi_resolved_l2", l2_norm(drop_nyquist(c))},
             {"hamiltonian_dual_formula_difference", dual}};
      if (!phi_out.empty()) {
        fs::create_directories(phi_out);
        const Encoding enc = phi_text ? Encoding::text : Encoding::binary;
        const std::string stem = fs::path(phi_manifest).stem().string();
        write_cff1(fs::path(phi_out) / (stem + ".phi0.cff"), to_cff(c.phi0), enc);
        write_cff1(fs::path(phi_out) / (stem + ".phii.cff"), to_cff(c.phii), enc);
        j["files"] = {stem + ".phi0.cff", stem + ".phii.cff"};
      }
      emit(j, phi_report);
      return 0;
    }

    if (app.got_subcommand(adj)) {
      const LoadedPoint lp = adj_pt.load();
      const OperatorReport r =
          check_adjoint(lp.point, lp.lambda, adj_trials, adj_pt.seed, adj_band, mutant_from_string(adj_mutant));
      emit(r.to_json(), adj_report);
      std::cerr << (r.pass ? "PASS " : "FAIL ") << r.check_name << "\n";
      return r.pass ? 0 : 1;
    }

    if (app.got_subcommand(ids)) {
      std::vector<OperatorReport> reports;
      for (double tau : {0.0, 0.3, 1.0}) reports.push_back(check_background(Grid::make(GridSpec::uniform(3, id_points, tau))));
      const GridPtr grid = Grid::make(GridSpec::uniform(3, id_points, 0.3));
      const double Lambda = grid->spec().cosmological_constant();
      const PhasePoint p = random_elliptic_point(grid, derive_seed(id_seed, 7), std::max(1, id_points / 16), 0.05, 0.05);
      reports.push_back(check_dual_formula(grid, std::max(id_trials, 50), id_seed));
      reports.push_back(check_rank3_identity(grid, id_trials, id_seed));
      reports.push_back(check_trace_identity(grid, id_trials, id_seed));
      reports.push_back(check_f_leading(grid, id_seed));
      reports.push_back(check_mutants(p, Lambda, id_trials, id_seed));
      return report_set(reports, id_report_dir);
    }

    if (app.got_subcommand(ver)) {
      const auto& names = suite_names();
      if (v_suite != "all" && std::find(names.begin(), names.end(), v_suite) == names.end()) {
        throw UsageError("unknown suite '" + v_suite + "'");
      }
      if (v_points < 8 || v_points % 2 != 0) throw UsageError("--points must be even and >= 8");
      return report_set(run_suite(v_suite, v_points, v_seed), v_report_dir);
    }

    if (app.got_subcommand(proj)) {
      const LoadedPoint lp = read_phase_point(pr_manifest);
      pr_opts.strategy = strategy_from_string(pr_strategy);
      ConstraintValue eps = ConstraintValue::zero(lp.grid, lp.grid->dim());
      eps.phi0 += pr_epsilon;
      const NewtonReport nr = newton_project(lp.point, eps, lp.lambda, pr_tau.value_or(lp.grid->spec().tau), pr_opts);
      const fs::path manifest =
          write_phase_point(pr_out, pr_name, nr.result, pr_text ? Encoding::text : Encoding::binary);
      write_text(pr_csv, newton_csv(nr));
      const double order = newton_tail_order(nr.residuals);
      emit({{"manifest", manifest.string()},
            {"strategy", to_string(pr_opts.strategy)},
            {"converged", nr.converged},
            {"status", nr.status},
            {"steps", nr.halvings.size()},
            {"residuals", nr.residuals},
            {"raw_residuals", nr.raw_residuals},
            {"tail_order", std::isnan(order) ? nlohmann::json(nullptr) : nlohmann::json(order)},
            {"halvings", nr.halvings},
            {"krylov_iterations", nr.krylov_iterations},
            {"krylov_residuals", nr.krylov_residuals},
            {"hint", nr.hint},
            {"timing", {{"runtime_seconds", nr.runtime_seconds}}}},
           pr_report);
      return nr.converged ? 0 : 1;
    }

    if (app.got_subcommand(kids)) {
      const LoadedPoint lp = kid_pt.load();
      KernelPath path = KernelPath::automatic;
      if (kid_path == "dense") {
        path = KernelPath::dense;
      } else if (kid_path == "matrix-free") {
        path = KernelPath::matrix_free;
      } else if (kid_path != "auto") {
        throw UsageError("--path must be auto, dense or matrix-free");
      }
      const KernelReport kr = kid_kernel(lp.point, lp.lambda, kid_threshold, SolveOptions{}, kid_m, path);
      write_text(kid_csv, singular_value_csv(kr));
      json j{{"singular_values", kr.singular_values},
             {"kernel_dim", kr.kernel_dim},
             {"gap_ratio", std::isfinite(kr.gap_ratio) ? json(kr.gap_ratio) : json("inf")},
             {"sigma_max", kr.sigma_max},
             {"threshold", kr.threshold},
             {"dense", kr.dense},
             {"timing", {{"runtime_seconds", kr.runtime_seconds}}}};
      if (!kid_basis_dir.empty()) {
        fs::create_directories(kid_basis_dir);
        for (std::size_t i = 0; i < kr.basis.size(); ++i) {
          write_cff1(fs::path(kid_basis_dir) / ("kid" + std::to_string(i) + ".N.cff"), to_cff(kr.basis[i].N));
          write_cff1(fs::path(kid_basis_dir) / ("kid" + std::to_string(i) + ".X.cff"), to_cff(kr.basis[i].X));
        }
      }
      emit(j, kid_report);
      return 0;
    }

    if (app.got_subcommand(norms)) {
      if (nm_file.empty() == nm_manifest.empty()) throw UsageError("give exactly one of --file or --manifest");
      if (nm_k < 0) throw UsageError("--k must be >= 0");
      json j;
      const auto sob = [&](const auto& f) {
        std::vector<double> v;
        for (int k = 0; k <= nm_k; ++k) v.push_back(sobolev_norm(f, k));
        return v;
      };
      if (!nm_file.empty()) {
        const CffData d = read_cff1(fs::path(nm_file));
        GridSpec s;
        s.n = d.n;
        s.points = d.points;
        s.period = d.period;
        const GridPtr grid = Grid::make(s);
        j["shape"] = d.shape;
        if (d.shape == "scalar") {
          j["sobolev"] = sob(scalar_from_cff(grid, d));
        } else if (d.shape == "vector") {
          j["sobolev"] = sob(vector_from_cff(grid, d));
        } else {
          j["sobolev"] = sob(sym_from_cff(grid, d));
        }
      } else {
        const LoadedPoint lp = read_phase_point(nm_manifest);
        j["metric_deviation_sobolev"] = sob(lp.point.g.g - SymField::identity(lp.grid, lp.grid->dim()));
        j["momentum_sobolev"] = sob(lp.point.pi.pi);
        j["ellipticity_lambda"] = ellipticity(lp.point.g.g).lambda;
      }
      j["k"] = nm_k;
      emit(j, nm_report);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const NonEllipticMetric& e) {
    std::cerr << "numerical failure: " << e.what() << " (grid point " << e.point() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
