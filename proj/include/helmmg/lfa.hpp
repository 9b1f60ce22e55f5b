#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "helmmg/symbols.hpp"

namespace helmmg {

enum class SmootherKind { jacobi, sor };

/// Relaxation method and its schedule. sor is the classical forward
/// lexicographic sweep (x1 fastest), (D + w L) u' = w f - ((w - 1) D + w U) u,
/// with L and U the strictly lower and upper parts; omega = 1 gives
/// Gauss-Seidel.
struct SmootherSpec {
  SmootherKind kind = SmootherKind::jacobi;
  double omega = 0.8;
  int nu1 = 2;
  int nu2 = 2;
};

/// Dimensionless base frequency theta in T_low = [-pi/2, pi/2)^2 and its
/// three aliases, in the order (0,0), (1,1), (0,1), (1,0).
struct HarmonicQuad {
  std::array<std::array<double, 2>, 4> theta;
};

double shift_frequency(double t);
HarmonicQuad harmonics(std::array<double, 2> theta);

struct LfaSetup {
  SchemeSpec fine;
  SchemeSpec coarse;  // Scheme::galerkin means the R L P triple product
  double Gc = 4.0;
  double alpha = 0.0;
  SmootherSpec smoother;
  int n_radii = 64;
  int n_angles = 128;
  bool refine = true;
  bool keep_spectra = false;

  /// Fine-grid scale with h = 1 and kh = pi / Gc.
  GridScale fine_scale() const;
  GridScale coarse_scale() const;
};

struct LfaSample {
  std::array<double, 2> theta;
  double rho;
};

struct LfaResult {
  double rho = 0.0;
  std::array<double, 2> argmax{0.0, 0.0};
  bool divergent = false;
  int resonances_skipped = 0;
  std::vector<LfaSample> spectra;
};

using Matrix4c = Eigen::Matrix<cplx, 4, 4>;
using Vector4c = Eigen::Matrix<cplx, 4, 1>;

/// Amplification factor of one smoothing step on the mode exp(i theta . x/h).
cplx smoother_symbol(const SmootherSpec& spec, const Stencil& fine,
                     std::array<double, 2> theta);
cplx smoother_symbol(const SmootherSpec& spec, const SchemeSpec& scheme,
                     const GridScale& scale, std::array<double, 2> theta);

struct TransferSymbols {
  Vector4c prolong;               // 4 x 1
  Eigen::Matrix<cplx, 1, 4> restrict_;  // 1 x 4, the transpose of prolong
};
TransferSymbols transfer_symbols(std::array<double, 2> theta);

/// Precomputed stencils for repeated evaluation of the two-grid symbol.
class TwoGridSymbol {
 public:
  explicit TwoGridSymbol(const LfaSetup& setup);

  /// Coarse operator symbol at 2 theta (coarse spacing).
  cplx coarse_symbol(std::array<double, 2> theta) const;
  Matrix4c coarse_correction(std::array<double, 2> theta) const;
  Matrix4c matrix(std::array<double, 2> theta) const;
  double spectral_radius(std::array<double, 2> theta) const;
  const Stencil& fine() const { return fine_; }

 private:
  LfaSetup setup_;
  Stencil fine_;
  std::optional<Stencil> coarse_;  // empty for Galerkin
  double restrict_scale_;
};

Matrix4c twogrid_matrix(const LfaSetup& setup, std::array<double, 2> theta);
double spectral_radius(const Matrix4c& m);
LfaResult convergence_factor(const LfaSetup& setup);

struct OracleOptions {
  int max_iterations = 20000;
  double tolerance = 1e-7;       // relative change of the radius estimate
  bool coarse_correction = true;  // false drops the coarse-grid correction
  /// Twist of the periodic images, u(x + n e_d) = exp(i phase_d) u(x). Zero is
  /// the plain torus, whose modes are theta = 2 pi j / n.
  std::array<double, 2> bloch_phase{0.0, 0.0};
};

/// Twist that puts `theta` on the mode lattice (phase + 2 pi j) / n.
std::array<double, 2> bloch_phase_for(std::array<double, 2> theta, int n);

/// Spectral radius of the two-grid error propagation matrix assembled on an
/// n x n periodic grid (n even, n <= 64), by power iteration.
double oracle_twogrid_radius(const LfaSetup& setup, int n = 32,
                             const OracleOptions& opts = {});

/// Default smoother per scheme pair: (4,4) 0.8-Jacobi for an optimized
/// coarse operator, (2,2) 0.8-Jacobi otherwise.
SmootherSpec default_smoother(Scheme fine, Scheme coarse);

}  // namespace helmmg
