#include "bcot/cli/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>

#include "bcot/bicausal_dp.hpp"
#include "bcot/cli/problem_file.hpp"
#include "bcot/cli/report.hpp"
#include "bcot/concentration.hpp"
#include "bcot/couplings.hpp"
#include "bcot/noncausal.hpp"
#include "bcot/simulate.hpp"

namespace bcot::cli {

namespace {

using nlohmann::json;

constexpr const char* kWFormulaCaveat =
    "the printed two-state W formula disagrees with the maximal-coupling series (it vanishes for symmetric "
    "kernels although every coupling pays 1 at time 0); the series value is the operative one";

struct GlobalOptions {
  unsigned threads = 0;
};

std::string regime_name(Regime r) { return r == Regime::Discounted ? "discounted" : "undiscounted"; }

std::string pair_label(const StateSpace& space, std::size_t x, std::size_t xp) {
  return "(" + space.label(x) + ", " + space.label(xp) + ")";
}

SolveOptions solve_options(double tol, std::size_t max_iter, unsigned threads) {
  SolveOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  o.threads = threads;
  return o;
}

void print_coupling(std::ostream& out, const CouplingKernel& Q, const StateSpace& space) {
  for (std::size_t x = 0; x < Q.size(); ++x) {
    for (std::size_t xp = 0; xp < Q.size(); ++xp) {
      out << "from " << pair_label(space, x, xp) << ":\n";
      print_table(out, Q.plan(x, xp), space);
    }
  }
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string file;
  double tol = 1e-9;
  std::size_t max_iter = 100000;
  bool json = false;
  std::string csv;
};

int cmd_solve(const SolveArgs& a, const GlobalOptions& g, std::ostream& out) {
  const ProblemFile pf = load_problem(a.file);
  const ProblemSpec& spec = pf.spec;
  const SolveReport report = value_iterate(spec, solve_options(a.tol, a.max_iter, g.threads));
  const CouplingKernel Q = extract_greedy_coupling(report.value_table, spec, g.threads);

  if (!a.csv.empty()) {
    std::ofstream csv(a.csv);
    if (!csv) throw InputError(a.csv + ": cannot open for writing");
    write_csv(csv, report.value_table, pf.space);
  }

  const double at_start = report.value_table(spec.x0, spec.x0_prime);
  if (a.json) {
    json flags = json::array();
    for (auto [x, xp] : report.infinite_flags) flags.push_back({pf.space.label(x), pf.space.label(xp)});
    json doc = {
        {"states", pf.space.labels()},
        {"x0", pf.space.label(spec.x0)},
        {"x0_prime", pf.space.label(spec.x0_prime)},
        {"beta", spec.beta},
        {"regime", regime_name(report.regime)},
        {"value", number_to_json(at_start)},
        {"w_bc", matrix_to_json(report.value_table)},
        {"iterations", report.iterations},
        {"residual", report.residual},
        {"converged", report.converged},
        {"coupling", coupling_to_json(Q, pf.space)},
        {"flags", {{"possibly_infinite", flags}}},
    };
    out << doc.dump(2) << '\n';
  } else {
    out << "bicausal transport cost (" << regime_name(report.regime) << ", beta = " << spec.beta << ")\n";
    out << "iterations: " << report.iterations << "  residual: " << report.residual
        << "  converged: " << (report.converged ? "yes" : "no") << '\n';
    out << "W_bc" << pair_label(pf.space, spec.x0, spec.x0_prime) << " = " << fixed6(at_start) << "\n\n";
    out << "value table\n";
    print_table(out, report.value_table, pf.space);
    out << "\npossibly infinite:";
    if (report.infinite_flags.empty()) out << " none";
    for (auto [x, xp] : report.infinite_flags) out << ' ' << pair_label(pf.space, x, xp);
    out << "\n\noptimal coupling\n";
    print_coupling(out, Q, pf.space);
  }
  return report.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- couple

struct BuiltCoupling {
  CouplingKernel Q;
  bool converged = true;
};

BuiltCoupling build_coupling(const std::string& kind, const ProblemFile& pf, unsigned threads) {
  const ProblemSpec& spec = pf.spec;
  if (kind == "classic") {
    if (!pf.same_kernel) throw InputError("--kind classic requires P_prime to equal P");
    return {classic_coupling(spec.P)};
  }
  if (kind == "independent") return {independent_coupling(spec.P, spec.P_prime)};
  if (kind == "wasserstein") return {wasserstein_coupling(spec.P, spec.P_prime)};
  const SolveReport report = value_iterate(spec, solve_options(1e-9, 100000, threads));
  return {extract_greedy_coupling(report.value_table, spec, threads), report.converged};
}

struct CoupleArgs {
  std::string file;
  std::string kind = "optimal";
  bool json = false;
};

int cmd_couple(const CoupleArgs& a, const GlobalOptions& g, std::ostream& out) {
  const ProblemFile pf = load_problem(a.file);
  const ProblemSpec& spec = pf.spec;
  const BuiltCoupling built = build_coupling(a.kind, pf, g.threads);
  const bool valid = validate_coupling(built.Q, spec.P, spec.P_prime, 1e-9);
  std::optional<bool> sticky;
  if (pf.same_kernel) sticky = check_sticky(built.Q, spec.P, 1e-9);
  const ValueTable value = evaluate_policy(built.Q, spec);
  const double at_start = value(spec.x0, spec.x0_prime);

  if (a.json) {
    json doc = {
        {"states", pf.space.labels()},
        {"kind", a.kind},
        {"coupling", coupling_to_json(built.Q, pf.space)},
        {"valid", valid},
        {"sticky", sticky ? json(*sticky) : json(nullptr)},
        {"policy_value", matrix_to_json(value)},
        {"value", number_to_json(at_start)},
    };
    out << doc.dump(2) << '\n';
  } else {
    out << a.kind << " coupling\n";
    print_coupling(out, built.Q, pf.space);
    out << "\nvalid coupling: " << (valid ? "yes" : "no") << '\n';
    out << "sticky: " << (sticky ? (*sticky ? "yes" : "no") : "n/a (P_prime differs from P)") << '\n';
    out << "\npolicy value\n";
    print_table(out, value, pf.space);
    out << "value" << pair_label(pf.space, spec.x0, spec.x0_prime) << " = " << fixed6(at_start) << '\n';
  }
  return built.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------- noncausal

struct NoncausalArgs {
  std::string file;
  double tol = 1e-10;
  bool json = false;
};

int cmd_noncausal(const NoncausalArgs& a, std::ostream& out) {
  const ProblemFile pf = load_problem(a.file);
  if (!pf.same_kernel) throw InputError("noncausal requires P_prime to equal P");
  const ProblemSpec& spec = pf.spec;
  const SeriesResult series = noncausal_cost_series(spec.P, spec.x0, spec.x0_prime, spec.beta, a.tol);
  std::optional<TwoStateForms> forms;
  if (spec.size() == 2 && spec.x0 != spec.x0_prime) forms = two_state_closed_forms(spec.P);

  if (a.json) {
    json doc = {
        {"x0", pf.space.label(spec.x0)},
        {"x0_prime", pf.space.label(spec.x0_prime)},
        {"beta", spec.beta},
        {"series",
         {{"value", series.value}, {"terms_used", series.terms_used}, {"tail_bound", series.tail_bound}}},
    };
    if (forms) {
      doc["closed_forms"] = {
          {"w_bc_formula", number_to_json(forms->w_bc_formula)},
          {"w_formula", number_to_json(forms->w_formula)},
          {"w_formula_caveat", forms->w_formula_caveat},
          {"caveat", kWFormulaCaveat},
      };
    }
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  char tail[32];
  std::snprintf(tail, sizeof tail, "%.3e", series.tail_bound);
  out << "non-causal cost W" << pair_label(pf.space, spec.x0, spec.x0_prime) << ", beta = " << spec.beta << '\n';
  out << "series value: " << fixed6(series.value) << '\n';
  out << "terms used:   " << series.terms_used << '\n';
  out << "tail bound:   " << tail << '\n';
  if (forms) {
    out << "two-state closed forms\n";
    out << "  w_bc formula: " << fixed6(forms->w_bc_formula) << '\n';
    out << "  w formula:    " << fixed6(forms->w_formula) << (forms->w_formula_caveat ? "  [caveat]" : "") << '\n';
    out << "caveat: " << kWFormulaCaveat << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bound

struct BoundArgs {
  std::string file;
  std::size_t n = 1;
  double t = 0.0;
  std::string proxy = "doeblin";
  bool json = false;
};

ProxyMode proxy_mode(const std::string& name) {
  if (name == "series") return ProxyMode::NoncausalSeries;
  if (name == "dp") return ProxyMode::BicausalDp;
  return ProxyMode::Doeblin;
}

int cmd_bound(const BoundArgs& a, const GlobalOptions& g, std::ostream& out) {
  if (!(a.t > 0.0)) throw InputError("--t must be positive");
  if (a.n < 1) throw InputError("--n must be at least 1");
  const ProblemFile pf = load_problem(a.file);
  SolveOptions opts;
  opts.threads = g.threads;
  const double proxy = variance_proxy(pf.spec, proxy_mode(a.proxy), opts);
  const BoundRequest req{a.n, a.t, proxy_mode(a.proxy)};
  const double bound = mcdiarmid_bound(req, proxy);
  if (a.json) {
    json doc = {{"proxy_mode", a.proxy}, {"proxy", number_to_json(proxy)}, {"n", a.n}, {"t", a.t}, {"bound", bound}};
    out << doc.dump(2) << '\n';
  } else {
    out << "range proxy (" << a.proxy << "): " << fixed6(proxy) << '\n';
    out << "n = " << a.n << ", t = " << a.t << '\n';
    out << "P(|f - E f| >= t) <= " << fixed6(bound) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string file;
  std::string kind = "optimal";
  std::size_t samples = 100000;
  std::size_t horizon = 1000000;
  std::uint64_t seed = 0;
  bool json = false;
};

int cmd_simulate(const SimulateArgs& a, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const ProblemFile pf = load_problem(a.file);
  const ProblemSpec& spec = pf.spec;
  const BuiltCoupling built = build_coupling(a.kind, pf, g.threads);
  SimulationConfig cfg;
  cfg.samples = a.samples;
  cfg.horizon_cap = a.horizon;
  cfg.master_seed = a.seed;
  cfg.threads = g.threads;
  const CouplingTimeStats stats = estimate_coupling_time(built.Q, spec.x0, spec.x0_prime, cfg);
  if (!stats.diagonal_absorbing) {
    err << "warning: the " << a.kind
        << " coupling lets diagonal pairs separate; T is a first meeting time, not a transport cost\n";
  }
  if (a.json) {
    json doc = {
        {"kind", a.kind},
        {"x0", pf.space.label(spec.x0)},
        {"x0_prime", pf.space.label(spec.x0_prime)},
        {"seed", a.seed},
        {"mean", number_to_json(stats.mean)},
        {"std_error", number_to_json(stats.std_error)},
        {"censored", stats.censored},
        {"samples", stats.samples},
        {"diagonal_absorbing", stats.diagonal_absorbing},
    };
    out << doc.dump(2) << '\n';
  } else {
    out << "coupling time under the " << a.kind << " coupling from " << pair_label(pf.space, spec.x0, spec.x0_prime)
        << '\n';
    out << "mean:      " << fixed6(stats.mean) << '\n';
    out << "std error: " << fixed6(stats.std_error) << '\n';
    out << "censored:  " << stats.censored << " of " << stats.samples << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string file;
  std::string table_file;
  std::string coupling_file;
  double tol = 1e-9;
  bool json = false;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const ProblemFile pf = load_problem(a.file);
  const ProblemSpec& spec = pf.spec;
  const json table_doc = read_json_file(a.table_file);
  if (!table_doc.is_object() || !table_doc.contains("w_bc")) {
    throw InputError(a.table_file + ": field 'w_bc': missing");
  }
  const ValueTable V = matrix_from_json(table_doc.at("w_bc"), "w_bc", spec.size());
  for (double v : V.data()) {
    if (std::isnan(v) || v < 0.0) throw InputError(a.table_file + ": field 'w_bc': entries must be nonnegative");
  }
  const json coupling_doc = read_json_file(a.coupling_file);
  if (!coupling_doc.is_object() || !coupling_doc.contains("coupling")) {
    throw InputError(a.coupling_file + ": field 'coupling': missing");
  }
  const CouplingKernel Q = coupling_from_json(coupling_doc.at("coupling"), pf.space);

  const FixedPointReport fp = verify_fixed_point(V, spec, a.tol);
  const bool valid = validate_coupling(Q, spec.P, spec.P_prime, 1e-9);
  std::optional<double> policy_residual;
  if (valid) policy_residual = sup_distance(apply_policy_operator(V, Q, spec), V);
  const bool optimal = policy_residual && *policy_residual <= a.tol;
  const bool pass = fp.is_fixed_point && fp.diagonal_ok.value_or(true) && fp.finite_ok.value_or(true) && optimal;

  if (a.json) {
    auto opt = [](const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); };
    json doc = {
        {"fixed_point_residual", number_to_json(fp.residual)},
        {"is_fixed_point", fp.is_fixed_point},
        {"diagonal_ok", opt(fp.diagonal_ok)},
        {"finite_ok", opt(fp.finite_ok)},
        {"coupling_valid", valid},
        {"policy_residual", policy_residual ? number_to_json(*policy_residual) : json(nullptr)},
        {"coupling_optimal", optimal},
        {"pass", pass},
    };
    out << doc.dump(2) << '\n';
  } else {
    auto yn = [](bool b) { return b ? "yes" : "no"; };
    out << "fixed-point residual: " << fp.residual << "  (" << yn(fp.is_fixed_point) << ")\n";
    if (fp.diagonal_ok) out << "zero diagonal:        " << yn(*fp.diagonal_ok) << '\n';
    if (fp.finite_ok) out << "finite entries:       " << yn(*fp.finite_ok) << '\n';
    out << "coupling valid:       " << yn(valid) << '\n';
    if (policy_residual) out << "policy residual:      " << *policy_residual << '\n';
    out << "coupling optimal:     " << yn(optimal) << '\n';
    out << (pass ? "PASS" : "FAIL") << '\n';
  }
  return pass ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bicausal optimal transport between finite Markov chains"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--threads", g.threads, "Worker threads (0 = all hardware threads)")->capture_default_str();

  const std::vector<std::string> kinds{"classic", "independent", "wasserstein", "optimal"};

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Value iteration for W_bc and the greedy optimal coupling");
  s->add_option("file", solve.file, "Problem JSON")->required();
  s->add_option("--tol", solve.tol, "Stopping tolerance")->capture_default_str();
  s->add_option("--max-iter", solve.max_iter, "Iteration cap")->capture_default_str();
  s->add_flag("--json", solve.json, "Machine-readable report");
  s->add_option("--csv", solve.csv, "Also write the value table as CSV to this path");

  CoupleArgs couple;
  auto* c = app.add_subcommand("couple", "Build a named coupling, validate it and evaluate its cost");
  c->add_option("file", couple.file, "Problem JSON")->required();
  c->add_option("--kind", couple.kind, "Coupling kind")->check(CLI::IsMember(kinds))->capture_default_str();
  c->add_flag("--json", couple.json, "Machine-readable report");

  NoncausalArgs noncausal;
  auto* nc = app.add_subcommand("noncausal", "Maximal-coupling series for the non-causal cost");
  nc->add_option("file", noncausal.file, "Problem JSON")->required();
  nc->add_option("--tol", noncausal.tol, "Certified tail tolerance")->capture_default_str();
  nc->add_flag("--json", noncausal.json, "Machine-readable report");

  BoundArgs bound;
  auto* b = app.add_subcommand("bound", "Concentration bound for Hamming-Lipschitz path functionals");
  b->add_option("file", bound.file, "Problem JSON")->required();
  b->add_option("--n", bound.n, "Number of chain steps")->required();
  b->add_option("--t", bound.t, "Deviation")->required();
  b->add_option("--proxy", bound.proxy, "Range proxy")
      ->check(CLI::IsMember({"series", "dp", "doeblin"}))
      ->capture_default_str();
  b->add_flag("--json", bound.json, "Machine-readable report");

  SimulateArgs simulate;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo coupling times");
  sim->add_option("file", simulate.file, "Problem JSON")->required();
  sim->add_option("--kind", simulate.kind, "Coupling kind")->check(CLI::IsMember(kinds))->capture_default_str();
  sim->add_option("--samples", simulate.samples, "Trajectories")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--horizon", simulate.horizon, "Horizon cap")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--seed", simulate.seed, "Master seed")->capture_default_str();
  sim->add_flag("--json", simulate.json, "Machine-readable report");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Check a value table and coupling against the optimality conditions");
  v->add_option("file", verify.file, "Problem JSON")->required();
  v->add_option("table", verify.table_file, "JSON with a 'w_bc' table (solve --json output)")->required();
  v->add_option("coupling", verify.coupling_file, "JSON with a 'coupling' map (solve/couple --json output)")
      ->required();
  v->add_option("--tol", verify.tol, "Tolerance")->capture_default_str();
  v->add_flag("--json", verify.json, "Machine-readable report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (s->parsed()) return cmd_solve(solve, g, out);
    if (c->parsed()) return cmd_couple(couple, g, out);
    if (nc->parsed()) return cmd_noncausal(noncausal, out);
    if (b->parsed()) return cmd_bound(bound, g, out);
    if (sim->parsed()) return cmd_simulate(simulate, g, out, err);
    if (v->parsed()) return cmd_verify(verify, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const NoContraction& e) {
    err << "undefined: " << e.what() << '\n';
    return kExitUndefined;
  } catch (const InfiniteProxy& e) {
    err << "undefined: " << e.what() << '\n';
    return kExitUndefined;
  } catch (const SingularSystem& e) {
    err << "undefined: " << e.what() << '\n';
    return kExitUndefined;
  } catch (const NotTwoState& e) {
    err << "undefined: " << e.what() << '\n';
    return kExitUndefined;
  } catch (const Error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace bcot::cli
