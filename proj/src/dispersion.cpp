#include "helmmg/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>

namespace helmmg {

namespace {

constexpr int kScanPoints = 32;

double ray_symbol(const Stencil& st, double h, const Direction& dir, double xi) {
  std::array<double, 3> t{};
  for (int i = 0; i < dir.dim; ++i) t[i] = h * xi * dir.u[i];
  return st.symbol_at(std::span<const double>(t.data(), dir.dim)).real();
}

GridScale undamped(GridScale s) {
  s.alpha = 0.0;
  return s;
}

}  // namespace

Direction Direction::planar(double theta) {
  return {{std::cos(theta), std::sin(theta), 0.0}, 2, 0.0};
}

Direction Direction::spherical(double theta, double phi) {
  return {{std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
           std::sin(theta)},
          3,
          theta};
}

PhaseRoot phase_root(const Stencil& st, double h, const Direction& dir) {
  if (st.dim != dir.dim)
    throw Error(ErrorCode::invalid_argument, "direction and stencil dimension differ");
  double umax = 0.0;
  for (int i = 0; i < dir.dim; ++i) umax = std::max(umax, std::abs(dir.u[i]));
  const double xi_max = std::numbers::pi / (h * umax);

  PhaseRoot root;
  double lo = 0.0, hi = 0.0;
  double prev = ray_symbol(st, h, dir, 0.0);
  double xprev = 0.0;
  for (int i = 1; i <= kScanPoints; ++i) {
    const double x = xi_max * i / kScanPoints;
    const double v = ray_symbol(st, h, dir, x);
    if ((prev < 0.0) != (v < 0.0)) {
      if (root.sign_changes == 0) {
        lo = xprev;
        hi = x;
      }
      ++root.sign_changes;
    }
    prev = v;
    xprev = x;
  }
  if (root.sign_changes == 0) {
    std::ostringstream msg;
    msg << "symbol has no sign change on (0, " << xi_max << ") along ("
        << dir.u[0] << ", " << dir.u[1] << ", " << dir.u[2] << ")";
    throw Error(ErrorCode::no_propagating_root, msg.str());
  }
  std::uintmax_t iters = 200;
  const auto f = [&](double x) { return ray_symbol(st, h, dir, x); };
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  root.xi = 0.5 * (a + b);
  return root;
}

double phase_slowness(const Stencil& st, const GridScale& scale,
                      const Direction& dir) {
  if (scale.k <= 0.0)
    throw Error(ErrorCode::invalid_argument, "phase slowness needs k > 0");
  return phase_root(st, scale.h, dir).xi / scale.k;
}

double phase_slowness(const SchemeSpec& scheme, const GridScale& scale,
                      const Direction& dir) {
  const GridScale s = undamped(scale);
  return phase_slowness(stencil_of(scheme, s), s, dir);
}

double relative_phase_error(const SchemeSpec& coarse, const SchemeSpec& fine,
                            const Direction& dir, double p, double ratio) {
  if (p <= 0.0) throw Error(ErrorCode::invalid_argument, "relative error needs p > 0");
  if (ratio <= 0.0) throw Error(ErrorCode::invalid_argument, "ratio must be positive");
  const double k = 2.0 * std::numbers::pi * p;
  const double xc = phase_slowness(coarse, {1.0, k, 0.0}, dir);
  const double xf = phase_slowness(fine, {ratio, k, 0.0}, dir);
  return std::abs(xc - xf) / xf;
}

std::vector<double> angle_grid(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "angle count must be positive");
  std::vector<double> a(n);
  for (int i = 0; i < n; ++i) a[i] = 0.5 * std::numbers::pi * i / n;
  return a;
}

std::vector<double> p_grid(double P, int n) {
  if (n < 1 || P <= 0.0)
    throw Error(ErrorCode::invalid_argument, "p grid needs P > 0 and n >= 1");
  std::vector<double> p(n);
  for (int j = 1; j <= n; ++j) p[j - 1] = P * j / n;
  return p;
}

ErrorCurve error_curve(const SchemeSpec& coarse, const SchemeSpec& fine,
                       double ratio, const std::vector<double>& p,
                       const std::vector<double>& angles) {
  const int dim = dimension_of(coarse.kind);
  if (dim != dimension_of(fine.kind))
    throw Error(ErrorCode::invalid_argument, "coarse and fine schemes differ in dimension");
  ErrorCurve curve;
  curve.p = p;
  curve.max_error.reserve(p.size());
  for (double pj : p) {
    double worst = 0.0;
    for (double t : angles) {
      if (dim == 2) {
        worst = std::max(worst, relative_phase_error(coarse, fine, Direction::planar(t), pj, ratio));
      } else {
        for (double f : angles)
          worst = std::max(worst, relative_phase_error(coarse, fine, Direction::spherical(t, f),
                                                       pj, ratio));
      }
    }
    curve.max_error.push_back(worst);
  }
  return curve;
}

}  // namespace helmmg
