#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "helmmg/error.hpp"
#include "helmmg/harness.hpp"

using namespace helmmg;

namespace {

// Options shared by the experiment subcommands. Every flag becomes a
// section.key override applied after --config.
struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "INI file; see `helmmg defaults`");
  sub->add_option("-s,--set", c.sets, "override, section.key=value (repeatable)");
}

void add_flag(CLI::App* sub, Common& c, const std::string& name, const std::string& key,
              const std::string& help) {
  sub->add_option_function<std::string>(
      name, [&c, key](const std::string& v) { c.flags[key] = v; }, help);
}

ExperimentConfig resolve(const Common& c, std::optional<std::string> kind) {
  std::vector<std::string> overrides;
  if (kind) overrides.push_back("experiment.kind=" + *kind);
  for (const auto& [k, v] : c.flags) overrides.push_back(k + "=" + v);
  overrides.insert(overrides.end(), c.sets.begin(), c.sets.end());
  return load_config(c.config, overrides);
}

void print_table(const TableArtifact& t, int maxit) {
  std::vector<std::size_t> width(t.col_labels.size() + 1, t.row_name.size());
  for (const auto& r : t.row_labels) width[0] = std::max(width[0], r.size());
  for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
    width[c + 1] = t.col_labels[c].size();
    for (std::size_t r = 0; r < t.row_labels.size(); ++r)
      width[c + 1] = std::max(width[c + 1], t.cell(r, c, maxit).size());
  }
  std::printf("# %s\n%-*s", t.title.c_str(), static_cast<int>(width[0]), t.row_name.c_str());
  for (std::size_t c = 0; c < t.col_labels.size(); ++c)
    std::printf("  %*s", static_cast<int>(width[c + 1]), t.col_labels[c].c_str());
  std::printf("\n");
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    std::printf("%-*s", static_cast<int>(width[0]), t.row_labels[r].c_str());
    for (std::size_t c = 0; c < t.col_labels.size(); ++c)
      std::printf("  %*s", static_cast<int>(width[c + 1]), t.cell(r, c, maxit).c_str());
    std::printf("\n");
  }
}

void print_written(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
}

void run_table(const ExperimentConfig& cfg) {
  TableArtifact t;
  if (cfg.kind == ExperimentKind::lfa_table) t = run_lfa_table(cfg);
  else if (cfg.kind == ExperimentKind::solve_table) t = run_solve_table(cfg);
  else throw Error(ErrorCode::invalid_argument, "table needs experiment.kind lfa-table or solve-table");
  print_table(t, cfg.maxit);
  print_written({emit_plotdata(t, cfg, table_params(cfg))});
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

int fail(std::string_view code, const std::string& message, int status) {
  std::fprintf(stderr, "error: code=%.*s message=%s\n", static_cast<int>(code.size()), code.data(),
               quote(message).c_str());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multigrid Helmholtz toolkit with dispersion-matched coarse operators"};
  app.require_subcommand(1);

  Common disp, fit, lfa, solve, table;

  auto* d = app.add_subcommand("dispersion", "phase-speed curves and max-error curve");
  add_common(d, disp);
  add_flag(d, disp, "--fine", "schemes.fine", "fine scheme");
  add_flag(d, disp, "--coarse", "schemes.coarse", "coarse scheme");
  add_flag(d, disp, "--ratio", "dispersion.ratio", "fine to coarse spacing ratio");
  add_flag(d, disp, "--angles", "dispersion.angles", "angles in degrees");
  add_flag(d, disp, "-o,--output-dir", "experiment.output_dir", "output directory");

  auto* f = app.add_subcommand("fit", "optimize coarse-stencil control values");
  add_common(f, fit);
  add_flag(f, fit, "--fine", "schemes.fine", "fine scheme");
  add_flag(f, fit, "--coarse", "schemes.coarse", "optimized scheme to fit (opt, optfe, opt3d)");
  add_flag(f, fit, "--ratio", "fit.ratio", "fine to coarse spacing ratio");
  add_flag(f, fit, "--P", "fit.P", "largest fitted p");
  add_flag(f, fit, "--n-controls", "fit.n_controls", "number of control values");
  add_flag(f, fit, "-o,--output-dir", "experiment.output_dir", "output directory");

  auto* l = app.add_subcommand("lfa", "two-grid convergence factors over Gc x alpha");
  add_common(l, lfa);
  add_flag(l, lfa, "--fine", "schemes.fine", "fine scheme");
  add_flag(l, lfa, "--coarse", "schemes.coarse", "coarse scheme (gal for Galerkin)");
  add_flag(l, lfa, "--Gc", "grid.Gc", "points per wavelength, list");
  add_flag(l, lfa, "--alpha", "grid.alpha", "damping, list");
  add_flag(l, lfa, "--smoother", "smoother.kind", "default, jacobi, sor or gs");
  add_flag(l, lfa, "--omega", "smoother.omega", "relaxation factor");
  add_flag(l, lfa, "--nu1", "smoother.nu1", "pre-smoothing steps");
  add_flag(l, lfa, "--nu2", "smoother.nu2", "post-smoothing steps");
  add_flag(l, lfa, "-o,--output-dir", "experiment.output_dir", "output directory");

  auto* s = app.add_subcommand("solve", "one preconditioned GMRES solve");
  add_common(s, solve);
  add_flag(s, solve, "--fine", "schemes.fine", "fine scheme");
  add_flag(s, solve, "--coarse", "schemes.coarse", "coarse scheme");
  add_flag(s, solve, "--Gc", "grid.Gc", "points per wavelength on the coarsest grid");
  add_flag(s, solve, "--alpha", "grid.alpha", "damping");
  add_flag(s, solve, "--levels", "grid.levels", "number of levels");
  add_flag(s, solve, "--discretization", "grid.discretization", "fd or fe-pml");
  add_flag(s, solve, "--coarse-size", "grid.coarse_size", "coarsest-grid unknowns (fd) or cells (fe-pml) per axis");
  add_flag(s, solve, "--medium", "medium.kind", "constant, random or file");
  add_flag(s, solve, "--smoother", "smoother.kind", "default, jacobi, sor or gs");
  add_flag(s, solve, "--tol", "solve.tol", "relative residual tolerance");
  add_flag(s, solve, "--maxit", "solve.maxit", "iteration limit");
  add_flag(s, solve, "-o,--output-dir", "experiment.output_dir", "output directory");

  auto* t = app.add_subcommand("table", "run the lfa-table or solve-table of a config");
  add_common(t, table);
  add_flag(t, table, "-o,--output-dir", "experiment.output_dir", "output directory");

  app.add_subcommand("defaults", "print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 64);
  }

  try {
    if (app.got_subcommand("defaults")) {
      std::cout << defaults_ini();
    } else if (app.got_subcommand(d)) {
      print_written(run_dispersion_curves(resolve(disp, "dispersion-curves")));
    } else if (app.got_subcommand(f)) {
      const ExperimentConfig cfg = resolve(fit, "fit");
      FitResult r;
      const auto files = run_fit(cfg, &r);
      std::printf("objective=%.6e start_objective=%.6e iterations=%d converged=%d\n", r.objective,
                  r.start_objective, r.iterations, r.converged ? 1 : 0);
      print_written(files);
    } else if (app.got_subcommand(l)) {
      run_table(resolve(lfa, "lfa-table"));
    } else if (app.got_subcommand(s)) {
      const ExperimentConfig cfg = resolve(solve, "single-solve");
      const SolveCase c{cfg.Gc.front(), cfg.alpha.front(), cfg.levels.front()};
      const SolveReport r = run_single_solve(cfg, c);
      std::printf("iterations=%d converged=%d true_residual=%.3e seconds=%.2f\n", r.iterations,
                  r.converged ? 1 : 0, r.true_residual, r.seconds);
      print_written(emit_solve_report(cfg, c, r));
      if (!r.converged) return fail("not_converged", "GMRES reached maxit", 3);
    } else if (app.got_subcommand(t)) {
      run_table(resolve(table, std::nullopt));
    }
  } catch (const Error& e) {
    return fail(to_string(e.code()), e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 2);
  }
  return 0;
}
