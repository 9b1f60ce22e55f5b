#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "helmmg/lfa.hpp"

namespace helmmg {

namespace {

using Dense = Eigen::MatrixXcd;
using DVec = Eigen::VectorXcd;
using Sparse = Eigen::SparseMatrix<cplx>;

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Factor picked up by a value read across the torus seam, for functions with
// u(x + n e_d) = exp(i phase_d) u(x).
cplx seam(int i, int n, double phase) {
  const int turns = (i - wrap(i, n)) / n;
  return turns == 0 ? cplx(1.0) : std::polar(1.0, turns * phase);
}

Dense periodic(const Stencil& st, int n, std::array<double, 2> phase) {
  const int N = n * n;
  Dense A = Dense::Zero(N, N);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (const auto& e : st.entries) {
        const int a = i + e.offset[0], b = j + e.offset[1];
        A(i + n * j, wrap(a, n) + n * wrap(b, n)) +=
            e.weight * seam(a, n, phase[0]) * seam(b, n, phase[1]);
      }
  return A;
}

// Full weighting from the n x n to the n/2 x n/2 torus, coarse node (I, J)
// sitting on fine node (2I, 2J).
Dense full_weighting(int n, std::array<double, 2> phase) {
  const int m = n / 2;
  Dense R = Dense::Zero(m * m, n * n);
  const double w[3] = {0.25, 0.5, 0.25};
  for (int J = 0; J < m; ++J)
    for (int I = 0; I < m; ++I)
      for (int b = -1; b <= 1; ++b)
        for (int a = -1; a <= 1; ++a)
          R(I + m * J, wrap(2 * I + a, n) + n * wrap(2 * J + b, n)) +=
              w[a + 1] * w[b + 1] * seam(2 * I + a, n, phase[0]) * seam(2 * J + b, n, phase[1]);
  return R;
}

}  // namespace

std::array<double, 2> bloch_phase_for(std::array<double, 2> theta, int n) {
  std::array<double, 2> phase{};
  for (int d = 0; d < 2; ++d) phase[d] = std::remainder(n * theta[d], 2.0 * std::numbers::pi);
  return phase;
}

double oracle_twogrid_radius(const LfaSetup& setup, int n, const OracleOptions& opts) {
  if (n < 4 || n > 64 || n % 2 != 0)
    throw Error(ErrorCode::invalid_argument, "oracle grid size must be even and in [4, 64]");
  if (dimension_of(setup.fine.kind) != 2)
    throw Error(ErrorCode::invalid_argument, "the oracle is 2-D only");
  const Stencil fine = stencil_of(setup.fine, setup.fine_scale());
  const auto ph = opts.bloch_phase;
  const Dense L = periodic(fine, n, ph);
  const Dense R = (is_fe_scaled(setup.fine.kind) ? 4.0 : 1.0) * full_weighting(n, ph);
  const Dense P = 4.0 * full_weighting(n, ph).adjoint();
  Dense Lc;
  if (setup.coarse.kind == Scheme::galerkin) Lc = R * L * P;
  else Lc = periodic(stencil_of(setup.coarse, setup.coarse_scale()), n / 2, ph);
  const Eigen::PartialPivLU<Dense> coarse(Lc);
  const Sparse Ls = L.sparseView(), Rs = R.sparseView(), Ps = P.sparseView();

  const SmootherSpec& sm = setup.smoother;
  const double w = sm.omega;
  const cplx diag = fine.center();
  Sparse rhs_part;  // error propagation of one sweep is  sor_lu^-1 * rhs_part
  Eigen::PartialPivLU<Dense> sor_lu;
  if (sm.kind == SmootherKind::sor) {
    Stencil lower, upper;
    for (const auto& e : fine.entries) {
      if (e.offset == std::array<int, 3>{0, 0, 0}) continue;
      const bool earlier = e.offset[1] < 0 || (e.offset[1] == 0 && e.offset[0] < 0);
      (earlier ? lower : upper).entries.push_back(e);
    }
    const Dense I = Dense::Identity(n * n, n * n);
    sor_lu.compute(diag * I + w * periodic(lower, n, ph));
    rhs_part = (Dense((1.0 - w) * diag * I) - w * periodic(upper, n, ph)).sparseView();
  }
  auto smooth = [&](DVec e, int steps) {
    for (int s = 0; s < steps; ++s) {
      if (sm.kind == SmootherKind::jacobi) e -= (w / diag) * (Ls * e);
      else e = sor_lu.solve(rhs_part * e);
    }
    return e;
  };
  auto apply = [&](const DVec& e0) {
    DVec e = smooth(e0, sm.nu1);
    if (opts.coarse_correction) e -= Ps * coarse.solve(Rs * (Ls * e));
    return smooth(e, sm.nu2);
  };

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  DVec x(n * n);
  for (auto& v : x) v = cplx(g(rng), g(rng));
  x.normalize();

  // Geometric mean of the growth over windows, which also settles when the
  // dominant eigenvalues have equal modulus.
  constexpr int kWindow = 25;
  double prev = -1.0;
  double log_sum = 0.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    x = apply(x);
    const double nx = x.norm();
    if (nx == 0.0) return 0.0;
    log_sum += std::log(nx);
    x /= nx;
    if (it % kWindow == 0) {
      const double est = std::exp(log_sum / kWindow);
      log_sum = 0.0;
      if (prev > 0.0 && std::abs(est - prev) <= opts.tolerance * est) return est;
      prev = est;
    }
  }
  throw Error(ErrorCode::not_converged, "power iteration did not settle within max_iterations");
}

}  // namespace helmmg
