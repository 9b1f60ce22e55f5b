#include "helmmg/symbols.hpp"

#include <cmath>
#include <numbers>

#include "helmmg/coefficients.hpp"

namespace helmmg {

namespace {

constexpr double kJssA = 0.5461;
constexpr double kJssC = 0.6248;
constexpr double kJssD = 0.9381e-1;

struct Cos2D {
  double axis;      // cos(h xi1) + cos(h xi2)
  double diagonal;  // cos(h(xi1 + xi2)) + cos(h(xi1 - xi2))
};

Cos2D cos2d(const WaveVector& xi, double h) {
  const double t1 = h * xi.c[0];
  const double t2 = h * xi.c[1];
  return {std::cos(t1) + std::cos(t2), std::cos(t1 + t2) + std::cos(t1 - t2)};
}

void require_dim(const WaveVector& xi, int dim) {
  if (xi.dim != dim)
    throw Error(ErrorCode::invalid_argument, "wave vector has wrong dimension");
}

// 9-point stencil from its three distinct weights.
Stencil nine_point(cplx center, cplx edge, cplx corner) {
  Stencil st;
  st.dim = 2;
  for (int j = -1; j <= 1; ++j) {
    for (int i = -1; i <= 1; ++i) {
      const int n = std::abs(i) + std::abs(j);
      const cplx w = n == 0 ? center : (n == 1 ? edge : corner);
      if (w != cplx(0.0)) st.entries.push_back({{i, j, 0}, w});
    }
  }
  return st;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::no_propagating_root: return "no_propagating_root";
    case ErrorCode::pole: return "pole";
    case ErrorCode::resonance: return "resonance";
    case ErrorCode::singular: return "singular";
    case ErrorCode::io: return "io";
    case ErrorCode::not_converged: return "not_converged";
  }
  return "unknown";
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::fd5: return "fd5";
    case Scheme::galerkin: return "gal";
    case Scheme::jss: return "jss";
    case Scheme::fe: return "fe";
    case Scheme::fd7: return "fd7";
    case Scheme::opt2d: return "opt";
    case Scheme::opt_fe: return "optfe";
    case Scheme::opt3d: return "opt3d";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "fd5") return Scheme::fd5;
  if (name == "gal" || name == "galerkin") return Scheme::galerkin;
  if (name == "jss") return Scheme::jss;
  if (name == "fe") return Scheme::fe;
  if (name == "fd7") return Scheme::fd7;
  if (name == "opt" || name == "opt2d") return Scheme::opt2d;
  if (name == "optfe" || name == "opt_fe") return Scheme::opt_fe;
  if (name == "opt3d") return Scheme::opt3d;
  throw Error(ErrorCode::invalid_argument,
              "unknown scheme '" + std::string(name) + "'");
}

int dimension_of(Scheme s) {
  return (s == Scheme::fd7 || s == Scheme::opt3d) ? 3 : 2;
}

bool is_optimized(Scheme s) {
  return s == Scheme::opt2d || s == Scheme::opt_fe || s == Scheme::opt3d;
}

bool is_fe_scaled(Scheme s) { return s == Scheme::fe || s == Scheme::opt_fe; }

double GridScale::p() const { return k * h / (2.0 * std::numbers::pi); }

cplx GridScale::mass() const {
  const cplx kk = cplx(1.0, alpha) * k;
  return kk * kk;
}

CoeffSet2D CoeffSet2D::jss() {
  return CoeffSet2D::from_free(0.5 * (1.0 + kJssA), kJssC, 4.0 * kJssD);
}

cplx Stencil::symbol_at(std::span<const double> theta) const {
  cplx sum = 0.0;
  for (const auto& e : entries) {
    double phase = 0.0;
    for (int d = 0; d < dim; ++d) phase += theta[d] * e.offset[d];
    sum += e.weight * cplx(std::cos(phase), std::sin(phase));
  }
  return sum;
}

cplx Stencil::symbol(const WaveVector& xi, double h) const {
  const std::array<double, 3> theta{h * xi.c[0], h * xi.c[1], h * xi.c[2]};
  return symbol_at(theta);
}

cplx Stencil::center() const {
  for (const auto& e : entries) {
    if (e.offset == std::array<int, 3>{0, 0, 0}) return e.weight;
  }
  return 0.0;
}

cplx symbol_fd5(const GridScale& s, const WaveVector& xi) {
  require_dim(xi, 2);
  const double ih2 = 1.0 / (s.h * s.h);
  return ih2 * (4.0 - 2.0 * std::cos(s.h * xi.c[0]) - 2.0 * std::cos(s.h * xi.c[1])) -
         s.mass();
}

cplx symbol_galerkin(const GridScale& s, const WaveVector& xi) {
  require_dim(xi, 2);
  const double ih2 = 1.0 / (s.h * s.h);
  const cplx m = s.mass();
  const auto c = cos2d(xi, s.h);
  return 3.0 * ih2 - 9.0 / 16.0 * m + (-ih2 - 3.0 / 16.0 * m) * c.axis +
         (-0.5 * ih2 - 1.0 / 32.0 * m) * c.diagonal;
}

cplx symbol_jss(const GridScale& s, const WaveVector& xi) {
  require_dim(xi, 2);
  const double ih2 = 1.0 / (s.h * s.h);
  const cplx m = s.mass();
  const auto c = cos2d(xi, s.h);
  return (ih2 * (2.0 + 2.0 * kJssA) - m * kJssC) +
         2.0 * (-ih2 * kJssA - m * kJssD) * c.axis +
         2.0 * (-ih2 * (1.0 - kJssA) / 2.0 - (1.0 - kJssC - 4.0 * kJssD) / 4.0 * m) *
             c.diagonal;
}

cplx symbol_opt2d(const CoeffSet2D& q, const GridScale& s, const WaveVector& xi) {
  require_dim(xi, 2);
  const double ih2 = 1.0 / (s.h * s.h);
  const cplx m = s.mass();
  const auto c = cos2d(xi, s.h);
  return (4.0 * q.a1 * ih2 - m * q.b1) +
         ((-q.a1 + q.a2) * ih2 - m * q.b2 / 4.0) * 2.0 * c.axis +
         (-q.a2 * ih2 - m * q.b3 / 4.0) * 2.0 * c.diagonal;
}

cplx symbol_fe(const GridScale& s, const WaveVector& xi) {
  return symbol_opt_fe(CoeffSet2D::fe(), s, xi);
}

cplx symbol_opt_fe(const CoeffSet2D& q, const GridScale& s, const WaveVector& xi) {
  require_dim(xi, 2);
  const cplx hm = s.h * s.h * s.mass();
  const auto c = cos2d(xi, s.h);
  return (4.0 * q.a1 - hm * q.b1) + ((-q.a1 + q.a2) - hm * q.b2 / 4.0) * 2.0 * c.axis +
         (-q.a2 - hm * q.b3 / 4.0) * 2.0 * c.diagonal;
}

cplx symbol_fd7(const GridScale& s, const WaveVector& xi) {
  require_dim(xi, 3);
  const double ih2 = 1.0 / (s.h * s.h);
  double sum = 0.0;
  for (int d = 0; d < 3; ++d) sum += std::cos(s.h * xi.c[d]);
  return ih2 * (6.0 - 2.0 * sum) - s.mass();
}

cplx symbol_opt3d(const CoeffSet3D& q, const GridScale& s, const WaveVector& xi) {
  require_dim(xi, 3);
  const double ih2 = 1.0 / (s.h * s.h);
  const cplx m = s.mass();
  const double t1 = s.h * xi.c[0], t2 = s.h * xi.c[1], t3 = s.h * xi.c[2];
  const double face = 2.0 * (std::cos(t1) + std::cos(t2) + std::cos(t3));
  const double edge = 2.0 * (std::cos(t1 + t2) + std::cos(t1 - t2) + std::cos(t1 + t3) +
                             std::cos(t1 - t3) + std::cos(t2 + t3) + std::cos(t2 - t3));
  const double corner = 2.0 * (std::cos(t1 + t2 + t3) + std::cos(t1 + t2 - t3) +
                               std::cos(t1 - t2 + t3) + std::cos(t1 - t2 - t3));
  // Edge Laplacian weight (a3 - a2)/2 follows from the tensor-product
  // construction and is what makes the symbol vanish at xi = 0 for k = 0.
  return (6.0 * q.a1 * ih2 - m * q.b1) + ((-q.a1 + q.a2) * ih2 - m * q.b2 / 6.0) * face +
         ((-0.5 * q.a2 + 0.5 * q.a3) * ih2 - m * q.b3 / 12.0) * edge +
         (-0.75 * q.a3 * ih2 - m * q.b4 / 8.0) * corner;
}

cplx symbol(const SchemeSpec& scheme, const GridScale& s, const WaveVector& xi) {
  switch (scheme.kind) {
    case Scheme::fd5: return symbol_fd5(s, xi);
    case Scheme::galerkin: return symbol_galerkin(s, xi);
    case Scheme::jss: return symbol_jss(s, xi);
    case Scheme::fe: return symbol_fe(s, xi);
    case Scheme::fd7: return symbol_fd7(s, xi);
    case Scheme::opt2d:
    case Scheme::opt_fe:
    case Scheme::opt3d: {
      if (!scheme.table)
        throw Error(ErrorCode::invalid_argument,
                    "optimized scheme without a coefficient table");
      if (scheme.kind == Scheme::opt3d)
        return symbol_opt3d(scheme.table->coeffs3d(s.p()), s, xi);
      const auto q = scheme.table->coeffs2d(s.p());
      return scheme.kind == Scheme::opt2d ? symbol_opt2d(q, s, xi)
                                          : symbol_opt_fe(q, s, xi);
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown scheme");
}

Stencil stencil_opt2d(const CoeffSet2D& q, const GridScale& s) {
  const double ih2 = 1.0 / (s.h * s.h);
  const cplx m = s.mass();
  return nine_point(4.0 * q.a1 * ih2 - m * q.b1,
                    (-q.a1 + q.a2) * ih2 - m * q.b2 / 4.0,
                    -q.a2 * ih2 - m * q.b3 / 4.0);
}

Stencil stencil_opt_fe(const CoeffSet2D& q, const GridScale& s) {
  const cplx hm = s.h * s.h * s.mass();
  return nine_point(4.0 * q.a1 - hm * q.b1, (-q.a1 + q.a2) - hm * q.b2 / 4.0,
                    -q.a2 - hm * q.b3 / 4.0);
}

Stencil stencil_opt3d(const CoeffSet3D& q, const GridScale& s) {
  const double ih2 = 1.0 / (s.h * s.h);
  const cplx m = s.mass();
  const cplx w[4] = {6.0 * q.a1 * ih2 - m * q.b1,
                     (-q.a1 + q.a2) * ih2 - m * q.b2 / 6.0,
                     (-0.5 * q.a2 + 0.5 * q.a3) * ih2 - m * q.b3 / 12.0,
                     -0.75 * q.a3 * ih2 - m * q.b4 / 8.0};
  Stencil st;
  st.dim = 3;
  for (int l = -1; l <= 1; ++l) {
    for (int j = -1; j <= 1; ++j) {
      for (int i = -1; i <= 1; ++i) {
        const cplx wt = w[std::abs(i) + std::abs(j) + std::abs(l)];
        if (wt != cplx(0.0)) st.entries.push_back({{i, j, l}, wt});
      }
    }
  }
  return st;
}

Stencil stencil_of(const SchemeSpec& scheme, const GridScale& s) {
  const double ih2 = 1.0 / (s.h * s.h);
  const cplx m = s.mass();
  switch (scheme.kind) {
    case Scheme::fd5:
      return nine_point(4.0 * ih2 - m, -ih2, 0.0);
    case Scheme::galerkin:
      return nine_point(3.0 * ih2 - 9.0 / 16.0 * m, 0.5 * (-ih2 - 3.0 / 16.0 * m),
                        0.5 * (-0.5 * ih2 - 1.0 / 32.0 * m));
    case Scheme::jss:
      return nine_point((2.0 + 2.0 * kJssA) * ih2 - kJssC * m, -kJssA * ih2 - kJssD * m,
                        -(1.0 - kJssA) / 2.0 * ih2 - (1.0 - kJssC - 4.0 * kJssD) / 4.0 * m);
    case Scheme::fe:
      return stencil_opt_fe(CoeffSet2D::fe(), s);
    case Scheme::fd7:
      return stencil_opt3d(CoeffSet3D::fd7(), s);
    case Scheme::opt2d:
    case Scheme::opt_fe:
    case Scheme::opt3d: {
      if (!scheme.table)
        throw Error(ErrorCode::invalid_argument,
                    "optimized scheme without a coefficient table");
      if (scheme.kind == Scheme::opt3d)
        return stencil_opt3d(scheme.table->coeffs3d(s.p()), s);
      const auto q = scheme.table->coeffs2d(s.p());
      return scheme.kind == Scheme::opt2d ? stencil_opt2d(q, s) : stencil_opt_fe(q, s);
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown scheme");
}

double damping_distance(double alpha) {
  if (!(alpha > 0.0))
    throw Error(ErrorCode::invalid_argument, "damping distance needs alpha > 0");
  return std::log(10.0) / (2.0 * std::numbers::pi * alpha);
}

}  // namespace helmmg
