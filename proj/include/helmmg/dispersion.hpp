#pragma once

#include <array>
#include <optional>
#include <vector>

#include "helmmg/coefficients.hpp"
#include "helmmg/symbols.hpp"

namespace helmmg {

/// Propagation direction. 2-D: (cos t, sin t). 3-D: elevation t and azimuth
/// f give (cos t cos f, cos t sin f, sin t).
struct Direction {
  std::array<double, 3> u{1.0, 0.0, 0.0};
  int dim = 2;
  double elevation = 0.0;

  static Direction planar(double theta);
  static Direction spherical(double theta, double phi);
};

/// Root of the real symbol along a ray, with the number of sign changes the
/// bracketing scan saw on (0, pi / (h max|u_i|)).
struct PhaseRoot {
  double xi = 0.0;
  int sign_changes = 0;
};

/// Root of xi -> Re sigma(xi u) for the stencil of spacing h at alpha = 0;
/// the first sign change from xi = 0 is taken. Throws no_propagating_root if
/// the scan finds none.
PhaseRoot phase_root(const Stencil& st, double h, const Direction& dir);

/// Phase slowness xi / k of a scheme (the reciprocal of v_ph / c).
double phase_slowness(const SchemeSpec& scheme, const GridScale& scale,
                      const Direction& dir);
double phase_slowness(const Stencil& st, const GridScale& scale,
                      const Direction& dir);

/// |xi_coarse - xi_fine| / xi_fine at coarse p = kh/2pi, with the fine scheme
/// on spacing ratio * h.
double relative_phase_error(const SchemeSpec& coarse, const SchemeSpec& fine,
                            const Direction& dir, double p, double ratio);

struct ErrorCurve {
  std::vector<double> p;
  std::vector<double> max_error;
};

/// n equidistant angles on [0, pi/2).
std::vector<double> angle_grid(int n);
/// Default p samples j P / n, j = 1..n.
std::vector<double> p_grid(double P, int n);

/// Maximum over directions of the relative error at each p. 3-D schemes use
/// the product of `angles` for elevation and azimuth.
ErrorCurve error_curve(const SchemeSpec& coarse, const SchemeSpec& fine,
                       double ratio, const std::vector<double>& p,
                       const std::vector<double>& angles);

}  // namespace helmmg
