#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "helmmg/error.hpp"

namespace helmmg {

class CoefficientTable;

/// Discretization schemes. FD forms carry an h^-2 Laplacian; the FE forms
/// (fe, opt_fe) are in integrated scaling, i.e. an overall factor h^2.
enum class Scheme { fd5, galerkin, jss, fe, fd7, opt2d, opt_fe, opt3d };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);
int dimension_of(Scheme s);
bool is_optimized(Scheme s);
bool is_fe_scaled(Scheme s);

/// Wave vector xi (radians per unit length).
struct WaveVector {
  std::array<double, 3> c{0.0, 0.0, 0.0};
  int dim = 2;

  static WaveVector of(double x1, double x2) { return {{x1, x2, 0.0}, 2}; }
  static WaveVector of(double x1, double x2, double x3) {
    return {{x1, x2, x3}, 3};
  }
};

struct GridScale {
  double h = 1.0;
  double k = 0.0;
  double alpha = 0.0;

  /// Inverse points per wavelength, kh / 2pi.
  double p() const;
  /// Damped mass coefficient ((1 + i alpha) k)^2.
  cplx mass() const;
};

/// Optimized 9-point coefficients, a1 + a2 = 1 and b1 + b2 + b3 = 1.
struct CoeffSet2D {
  double a1, a2, b1, b2, b3;

  static CoeffSet2D from_free(double a1, double b1, double b2) {
    return {a1, 1.0 - a1, b1, b2, 1.0 - b1 - b2};
  }
  /// Jo-Shin-Suh constants expressed in the optimized parameterization.
  static CoeffSet2D jss();
  /// Bilinear finite element values.
  static CoeffSet2D fe() { return {2.0 / 3.0, 1.0 / 3.0, 4.0 / 9.0, 4.0 / 9.0, 1.0 / 9.0}; }
  /// Coefficients that reproduce the 5-point scheme.
  static CoeffSet2D fd5() { return {1.0, 0.0, 1.0, 0.0, 0.0}; }
};

/// Optimized 27-point coefficients, a1 + a2 + a3 = 1 and b1 + ... + b4 = 1.
struct CoeffSet3D {
  double a1, a2, a3, b1, b2, b3, b4;

  static CoeffSet3D from_free(double a1, double a2, double b1, double b2,
                              double b3) {
    return {a1, a2, 1.0 - a1 - a2, b1, b2, b3, 1.0 - b1 - b2 - b3};
  }
  static CoeffSet3D fd7() { return {1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0}; }
};

struct StencilEntry {
  std::array<int, 3> offset{0, 0, 0};
  cplx weight;
};

/// Constant-coefficient stencil on a uniform grid of spacing h.
struct Stencil {
  int dim = 2;
  std::vector<StencilEntry> entries;

  /// sum_m w_m exp(i theta . m) for dimensionless theta = h xi.
  cplx symbol_at(std::span<const double> theta) const;
  /// Evaluated at a wave vector with the physical spacing h.
  cplx symbol(const WaveVector& xi, double h) const;
  cplx center() const;
};

/// A scheme together with the table its coefficients come from (optimized
/// schemes only).
struct SchemeSpec {
  Scheme kind = Scheme::fd5;
  std::shared_ptr<const CoefficientTable> table;

  std::string name() const { return std::string(to_string(kind)); }
};

cplx symbol_fd5(const GridScale& s, const WaveVector& xi);
cplx symbol_galerkin(const GridScale& s, const WaveVector& xi);
cplx symbol_jss(const GridScale& s, const WaveVector& xi);
cplx symbol_opt2d(const CoeffSet2D& c, const GridScale& s, const WaveVector& xi);
cplx symbol_fe(const GridScale& s, const WaveVector& xi);
cplx symbol_opt_fe(const CoeffSet2D& c, const GridScale& s, const WaveVector& xi);
cplx symbol_fd7(const GridScale& s, const WaveVector& xi);
cplx symbol_opt3d(const CoeffSet3D& c, const GridScale& s, const WaveVector& xi);

/// Closed-form symbol of any scheme. Optimized schemes interpolate their
/// coefficients from the attached table at p = kh/2pi.
cplx symbol(const SchemeSpec& scheme, const GridScale& s, const WaveVector& xi);

Stencil stencil_opt2d(const CoeffSet2D& c, const GridScale& s);
Stencil stencil_opt_fe(const CoeffSet2D& c, const GridScale& s);
Stencil stencil_opt3d(const CoeffSet3D& c, const GridScale& s);
Stencil stencil_of(const SchemeSpec& scheme, const GridScale& s);

/// Number of wavelengths over which damping reduces the amplitude tenfold.
double damping_distance(double alpha);

}  // namespace helmmg
