#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "helmmg/assembly.hpp"
#include "helmmg/optimizer.hpp"
#include "helmmg/solver.hpp"

namespace helmmg {

enum class ExperimentKind { dispersion_curves, fit, lfa_table, solve_table, single_solve };

std::string_view to_string(ExperimentKind k);
ExperimentKind parse_experiment(std::string_view s);

/// One run of the driver. Every field maps to a key of the INI file written
/// by `defaults`.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::lfa_table;
  std::string name;  // prefix of output files; defaults to the kind
  std::filesystem::path output_dir = ".";
  Scheme fine = Scheme::fd5;
  Scheme coarse = Scheme::opt2d;
  std::filesystem::path table_override;  // CSV registered for the coarse family

  std::vector<double> Gc{3.5};
  std::vector<double> alpha{0.0025};
  std::vector<int> levels{2};
  std::optional<SmootherSpec> smoother;

  // dispersion-curves
  double ratio = 0.5;
  std::vector<double> angles_deg{0.0, 15.0, 30.0, 45.0};
  double inv_G_max = 0.35;
  int curve_points = 70;

  // lfa-table
  int n_radii = 64;
  int n_angles = 128;

  // solve-table, single-solve
  Discretization discretization = Discretization::finite_difference;
  int coarse_size = 255;  // unknowns per axis (FD) or cells per axis (PML) on the coarsest grid
  int pml_layer = 5;      // cells per side on the finest grid
  double pml_strength = 2.0;  // sigma / omega at the outer boundary
  MediumParams medium;
  std::array<double, 3> source{0.5, 0.5, 0.5};
  double tol = 1e-6;
  int maxit = 100;
  std::int64_t max_unknowns = 262144;
  int workers = 1;
  bool write_solution = false;

  FitConfig fit;
};

boost::property_tree::ptree default_tree();
/// Parses a tree; unknown keys are rejected.
ExperimentConfig config_from_tree(const boost::property_tree::ptree& tree);
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});
/// INI text of every key with its default value.
std::string defaults_ini();

struct TableArtifact {
  std::string title;
  std::string row_name;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<bool>> flagged;  // divergent or not converged
  bool integer_cells = false;

  /// Cell text: ">1" for divergent factors, ">maxit" for failed solves.
  std::string cell(std::size_t r, std::size_t c, int maxit = 100) const;
};

/// File name `<experiment>_<pair>_<params>.csv`.
std::string artifact_name(const ExperimentConfig& cfg, const std::string& params);
std::filesystem::path emit_plotdata(const TableArtifact& t, const ExperimentConfig& cfg,
                                    const std::string& params = "");

std::vector<std::filesystem::path> run_dispersion_curves(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> run_fit(const ExperimentConfig& cfg, FitResult* out = nullptr);
TableArtifact run_lfa_table(const ExperimentConfig& cfg);

struct SolveCase {
  double Gc;
  double alpha;
  int levels;
};
/// Fine grid and medium for one solve; Gc is measured on the coarsest grid.
GridSpec solve_grid(const ExperimentConfig& cfg, int levels);
SolveReport run_single_solve(const ExperimentConfig& cfg, const SolveCase& c);
TableArtifact run_solve_table(const ExperimentConfig& cfg);
/// Residual history CSV, plus the solution field as two medium files (real
/// and imaginary parts) when write_solution is set.
std::vector<std::filesystem::path> emit_solve_report(const ExperimentConfig& cfg,
                                                     const SolveCase& c, const SolveReport& r);

/// `<params>` part of a table file name: the smoother for LFA tables, the
/// discretization, size and medium for solve tables.
std::string table_params(const ExperimentConfig& cfg);

/// Runs the configured experiment and returns the files it wrote.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg);

}  // namespace helmmg
