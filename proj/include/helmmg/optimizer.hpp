#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "helmmg/coefficients.hpp"
#include "helmmg/dispersion.hpp"

namespace helmmg {

/// Fine-scale scheme a table family is fitted against, and the coarse scheme
/// it parameterizes.
Scheme fine_scheme_of(TableFamily family);
Scheme coarse_scheme_of(TableFamily family);

struct FitConfig {
  TableFamily family = TableFamily::opt_fd5;
  double ratio = 0.5;  // h_f / h
  double P = 0.4;
  int n_controls = 11;
  int n_angles = 18;
  int n_p = 0;  // 0 selects 8 * n_controls
  int max_iterations = 200;
  double tolerance = 1e-13;  // relative objective decrease that stops a stage
  /// P values fitted before P itself, each stage starting from the previous
  /// table. Ignored when `start` is set.
  std::vector<double> continuation{0.2, 0.25, 0.3, 0.35};
  /// Control values at the final P (n_controls rows of free coefficients).
  std::optional<std::vector<std::vector<double>>> start;

  int samples_in_p() const { return n_p > 0 ? n_p : 8 * n_controls; }
};

/// Penalty added per sample whose slowness solve fails.
inline constexpr double kFitPenalty = 1e3;

/// Sum of squared relative errors over the direction and p samples. 3-D
/// samples carry the weight cos(elevation).
double fit_objective(const std::vector<std::vector<double>>& controls,
                     const FitConfig& cfg);

/// Free starting coefficients: the Jo-Shin-Suh values in 2-D, the 7-point
/// values in 3-D.
std::vector<double> default_start(TableFamily family);

struct FitResult {
  std::shared_ptr<const CoefficientTable> table;
  double objective = 0.0;
  double start_objective = 0.0;
  int iterations = 0;
  bool converged = false;  // false: best-so-far after max_iterations
};

/// Levenberg-Marquardt over the free control values with continuation in P.
FitResult fit_coefficients(const FitConfig& cfg);

}  // namespace helmmg
