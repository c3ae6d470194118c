// modesign: solve and certify optimal designs from a JSON problem file.
//
//   modesign solve problem.json --out dir
//   modesign certify problem.json --design weights.csv [--t 1.17]
//   modesign single problem.json --criterion D
//   modesign dispersion problem.json --design weights.csv
//
// Exit status: 0 certified, 2 not certified, 3 infeasible, 1 error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "modesign/certify.hpp"
#include "modesign/errors.hpp"
#include "modesign/problem_file.hpp"
#include "modesign/report.hpp"
#include "modesign/solve.hpp"

namespace fs = std::filesystem;
using namespace modesign;

namespace {

constexpr int kExitCertified = 0;
constexpr int kExitError = 1;
constexpr int kExitNotCertified = 2;
constexpr int kExitInfeasible = 3;

struct Options {
  std::string problem_path;
  std::string out_dir = ".";
  std::string design_path;
  std::string criterion;
  std::optional<double> delta;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<double> t;
  bool quiet = false;
};

unsigned thread_cap() {
  if (const char* env = std::getenv("MODESIGN_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("MODESIGN_THREADS must be a positive integer");
  }
  return 1;
}

MultiObjectiveProblem load(const Options& o) {
  MultiObjectiveProblem p = load_problem(o.problem_path);
  if (o.delta) p.delta = *o.delta;
  if (o.tol) p.solver_tol = *o.tol;
  if (o.max_iter) p.max_iterations = *o.max_iter;
  p.validate();
  return p;
}

std::size_t find_criterion(const MultiObjectiveProblem& p, const std::string& ref) {
  for (std::size_t k = 0; k < p.specs.size(); ++k) {
    if (p.specs[k].name == ref) return k;
  }
  try {
    std::size_t used = 0;
    const auto k = std::stoul(ref, &used);
    if (used == ref.size() && k < p.specs.size()) return k;
  } catch (const std::exception&) {
  }
  throw ProblemFileError("--criterion: unresolved reference '" + ref + "'");
}

void write_outputs(const Options& o, const MultiObjectiveProblem& p, const DesignSummary& s,
                   const Certificate& c) {
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  write_atomic(dir / "design.json", design_json(s));
  write_atomic(dir / "design.csv", design_csv(s.design));
  write_atomic(dir / "certificate.json", certificate_json(p, c));
  write_atomic(dir / "dispersion.csv", dispersion_csv(p, s.design, c));
}

void print_summary(const Options& o, const MultiObjectiveProblem& p, const Design& w,
                   const Certificate& c, std::optional<double> t) {
  if (o.quiet) return;
  std::cout << "support:\n" << support_table(p.grid, w);
  bool all_known = p.min_phi.size() == p.specs.size();
  for (const auto& m : p.min_phi) all_known = all_known && m.has_value();
  if (all_known) {
    const auto eff = efficiencies(p, w.weights());
    for (std::size_t k = 0; k < eff.size(); ++k) {
      std::printf("Eff[%s] = %.4f\n", p.specs[k].name.c_str(), eff[k]);
    }
  }
  if (t) std::printf("t* = %.4f\n", *t);
  std::cout << "eta:";
  for (Eigen::Index k = 0; k < c.eta.size(); ++k) std::printf(" %.4f", c.eta(k));
  std::cout << "\n" << to_string(c.verdict) << " (delta = " << c.delta << ")\n";
  for (const auto& n : c.notes) std::cout << "note: " << n << "\n";
}

int verdict_code(const Certificate& c) {
  return c.verdict == Verdict::Certified ? kExitCertified : kExitNotCertified;
}

int run_solve(const Options& o) {
  MultiObjectiveProblem p = load(o);
  const SolveResult r = solve(p, thread_cap());
  if (!o.quiet) {
    std::cout << to_string(p.kind) << " solve: " << to_string(r.status) << " after "
              << r.iterations << " Newton steps (residual " << r.kkt_residual << ")\n";
  }
  DesignSummary s{&p, r.design, r, std::nullopt};
  if (p.kind == ProblemKind::Maximin) s.t_star = r.t_star;
  if (r.status == SolveStatus::Infeasible) {
    fs::create_directories(o.out_dir);
    write_atomic(fs::path(o.out_dir) / "design.json", design_json(s));
    if (!o.quiet) std::cout << "efficiency bounds are infeasible\n";
    return kExitInfeasible;
  }
  const Certificate c = certify(p, r.design, s.t_star, p.delta);
  write_outputs(o, p, s, c);
  print_summary(o, p, r.design, c, s.t_star);
  return verdict_code(c);
}

int run_certify(const Options& o, bool report_only) {
  MultiObjectiveProblem p = load(o);
  if (p.kind != ProblemKind::Single) presolve(p, thread_cap());
  const Design w = read_design_csv(o.design_path, p.grid.size(), p.support_threshold);
  const Certificate c = certify(p, w, o.t, p.delta);
  DesignSummary s{&p, w, std::nullopt, o.t};
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  write_atomic(dir / "dispersion.csv", dispersion_csv(p, w, c));
  if (!report_only) {
    write_atomic(dir / "certificate.json", certificate_json(p, c));
    write_atomic(dir / "design.json", design_json(s));
    print_summary(o, p, w, c, o.t);
  }
  return verdict_code(c);
}

int run_single(const Options& o) {
  MultiObjectiveProblem p = load(o);
  if (!o.criterion.empty()) p.single_index = find_criterion(p, o.criterion);
  p.kind = ProblemKind::Single;
  const SolveResult r = solve_single(p, p.single_index);
  if (!o.quiet) {
    std::cout << "single solve [" << p.specs[p.single_index].name << "]: " << to_string(r.status)
              << ", Phi = " << r.objective << "\n";
  }
  const Certificate c = certify(p, r.design, std::nullopt, p.delta);
  write_outputs(o, p, DesignSummary{&p, r.design, r, std::nullopt}, c);
  print_summary(o, p, r.design, c, std::nullopt);
  return verdict_code(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal regression designs: solve and certify"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("problem", o.problem_path, "JSON problem file")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--delta", o.delta, "certificate slack");
    sub->add_option("--tol", o.tol, "solver tolerance");
    sub->add_option("--max-iter", o.max_iter, "Newton step cap");
    sub->add_flag("--quiet", o.quiet, "suppress the summary");
  };
  auto* solve_cmd = app.add_subcommand("solve", "presolve, solve, certify and report");
  common(solve_cmd);
  auto* certify_cmd = app.add_subcommand("certify", "certify a design given as index,weight CSV");
  common(certify_cmd);
  certify_cmd->add_option("--design", o.design_path, "design CSV")->required()->check(
      CLI::ExistingFile);
  certify_cmd->add_option("--t", o.t, "maximin t (default 1 / min efficiency)");
  auto* single_cmd = app.add_subcommand("single", "solve one criterion");
  common(single_cmd);
  single_cmd->add_option("--criterion", o.criterion, "criterion name or 0-based index");
  auto* disp_cmd = app.add_subcommand("dispersion", "write dispersion.csv for a design");
  common(disp_cmd);
  disp_cmd->add_option("--design", o.design_path, "design CSV")->required()->check(
      CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(o);
    if (certify_cmd->parsed()) return run_certify(o, false);
    if (single_cmd->parsed()) return run_single(o);
    if (disp_cmd->parsed()) return run_certify(o, true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
