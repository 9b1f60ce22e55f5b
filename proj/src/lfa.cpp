#include "helmmg/lfa.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace helmmg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

bool in_low(std::array<double, 2> t) {
  return t[0] >= -kHalfPi && t[0] < kHalfPi && t[1] >= -kHalfPi && t[1] < kHalfPi;
}

cplx stencil_at(const Stencil& st, std::array<double, 2> t) {
  return st.symbol_at(std::span<const double>(t.data(), 2));
}

// Lexicographic order with x1 running fastest: an offset is "earlier" when
// it lies in a lower row, or in the same row to the left.
bool lexicographically_earlier(const std::array<int, 3>& m) {
  return m[1] < 0 || (m[1] == 0 && m[0] < 0);
}

}  // namespace

GridScale LfaSetup::fine_scale() const { return {1.0, kPi / Gc, alpha}; }

GridScale LfaSetup::coarse_scale() const { return {2.0, kPi / Gc, alpha}; }

double shift_frequency(double t) { return t < 0.0 ? t + kPi : t - kPi; }

HarmonicQuad harmonics(std::array<double, 2> theta) {
  if (!in_low(theta))
    throw Error(ErrorCode::invalid_argument,
                "base frequency outside [-pi/2, pi/2)^2");
  const double b1 = shift_frequency(theta[0]);
  const double b2 = shift_frequency(theta[1]);
  return {{{{theta[0], theta[1]}, {b1, b2}, {theta[0], b2}, {b1, theta[1]}}}};
}

cplx smoother_symbol(const SmootherSpec& spec, const Stencil& fine,
                     std::array<double, 2> theta) {
  const double w = spec.omega;
  if (spec.kind == SmootherKind::jacobi) {
    const cplx diag = fine.center();
    if (std::abs(diag) == 0.0)
      throw Error(ErrorCode::pole, "zero diagonal symbol in Jacobi smoother");
    const cplx offdiag = stencil_at(fine, theta) - diag;
    return 1.0 - w - w * offdiag / diag;
  }
  const cplx diag = fine.center();
  cplx lower = 0.0, upper = 0.0;
  for (const auto& e : fine.entries) {
    if (e.offset == std::array<int, 3>{0, 0, 0}) continue;
    const double ph = theta[0] * e.offset[0] + theta[1] * e.offset[1];
    const cplx v = e.weight * cplx(std::cos(ph), std::sin(ph));
    (lexicographically_earlier(e.offset) ? lower : upper) += v;
  }
  const cplx denom = diag + w * lower;
  if (std::abs(denom) < 1e-300)
    throw Error(ErrorCode::pole, "vanishing SOR denominator at theta = (" +
                                     std::to_string(theta[0]) + ", " +
                                     std::to_string(theta[1]) + ")");
  return ((1.0 - w) * diag - w * upper) / denom;
}

cplx smoother_symbol(const SmootherSpec& spec, const SchemeSpec& scheme,
                     const GridScale& scale, std::array<double, 2> theta) {
  return smoother_symbol(spec, stencil_of(scheme, scale), theta);
}

TransferSymbols transfer_symbols(std::array<double, 2> theta) {
  const auto q = harmonics(theta);
  TransferSymbols t;
  for (int a = 0; a < 4; ++a) {
    t.prolong(a) = 0.25 * (1.0 + std::cos(q.theta[a][0])) * (1.0 + std::cos(q.theta[a][1]));
  }
  t.restrict_ = t.prolong.transpose();
  return t;
}

TwoGridSymbol::TwoGridSymbol(const LfaSetup& setup)
    : setup_(setup),
      fine_(stencil_of(setup.fine, setup.fine_scale())),
      restrict_scale_(is_fe_scaled(setup.fine.kind) ? 4.0 : 1.0) {
  if (dimension_of(setup.fine.kind) != 2)
    throw Error(ErrorCode::invalid_argument, "local Fourier analysis is 2-D only");
  if (setup.coarse.kind != Scheme::galerkin)
    coarse_ = stencil_of(setup.coarse, setup.coarse_scale());
}

cplx TwoGridSymbol::coarse_symbol(std::array<double, 2> theta) const {
  if (coarse_) return stencil_at(*coarse_, {2.0 * theta[0], 2.0 * theta[1]});
  const auto q = harmonics(theta);
  const auto t = transfer_symbols(theta);
  cplx sum = 0.0;
  for (int a = 0; a < 4; ++a)
    sum += restrict_scale_ * t.restrict_(a) * stencil_at(fine_, q.theta[a]) * t.prolong(a);
  return sum;
}

Matrix4c TwoGridSymbol::coarse_correction(std::array<double, 2> theta) const {
  const auto q = harmonics(theta);
  const auto t = transfer_symbols(theta);
  const cplx lc = coarse_symbol(theta);
  if (std::abs(lc) < 1e-14 * std::abs(fine_.center()))
    throw Error(ErrorCode::resonance, "coarse symbol vanishes");
  Vector4c lfine;
  for (int a = 0; a < 4; ++a) lfine(a) = stencil_at(fine_, q.theta[a]);
  Matrix4c k = Matrix4c::Identity();
  k -= (t.prolong * (restrict_scale_ / lc)) * (t.restrict_ * lfine.asDiagonal());
  return k;
}

Matrix4c TwoGridSymbol::matrix(std::array<double, 2> theta) const {
  const auto q = harmonics(theta);
  Vector4c s;
  for (int a = 0; a < 4; ++a) s(a) = smoother_symbol(setup_.smoother, fine_, q.theta[a]);
  const Matrix4c k = coarse_correction(theta);
  Vector4c pre, post;
  for (int a = 0; a < 4; ++a) {
    pre(a) = std::pow(s(a), setup_.smoother.nu1);
    post(a) = std::pow(s(a), setup_.smoother.nu2);
  }
  return post.asDiagonal() * k * pre.asDiagonal();
}

double TwoGridSymbol::spectral_radius(std::array<double, 2> theta) const {
  return helmmg::spectral_radius(matrix(theta));
}

Matrix4c twogrid_matrix(const LfaSetup& setup, std::array<double, 2> theta) {
  return TwoGridSymbol(setup).matrix(theta);
}

double spectral_radius(const Matrix4c& m) {
  Eigen::ComplexEigenSolver<Matrix4c> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

LfaResult convergence_factor(const LfaSetup& setup) {
  const TwoGridSymbol tg(setup);
  LfaResult res;
  std::vector<LfaSample> samples;
  const double r_max = kHalfPi * std::numbers::sqrt2;
  const int nr = std::max(setup.n_radii, 2);
  const int na = std::max(setup.n_angles, 1);

  auto evaluate = [&](std::array<double, 2> t) -> std::optional<double> {
    if (!in_low(t)) return std::nullopt;
    try {
      return tg.spectral_radius(t);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::resonance && e.code() != ErrorCode::pole) throw;
      ++res.resonances_skipped;
      return std::nullopt;
    }
  };

  for (int i = 0; i < nr; ++i) {
    const double r = r_max * i / (nr - 1);
    for (int j = 0; j < (i == 0 ? 1 : na); ++j) {
      const double phi = 2.0 * kPi * j / na;
      const std::array<double, 2> t{r * std::cos(phi), r * std::sin(phi)};
      if (auto rho = evaluate(t)) samples.push_back({t, *rho});
    }
  }
  if (setup.refine) {
    // The maximum sits in a thin band around the rays' sign changes of the
    // fine and coarse symbols, which the uniform grid under-resolves.
    const auto fine_re = [&](std::array<double, 2> t) { return stencil_at(tg.fine(), t).real(); };
    const auto coarse_re = [&](std::array<double, 2> t) { return tg.coarse_symbol(t).real(); };
    constexpr int kScan = 256;
    constexpr int kOffsets = 30;
    for (int j = 0; j < na; ++j) {
      const double phi = 2.0 * kPi * j / na;
      const std::array<double, 2> d{std::cos(phi), std::sin(phi)};
      const double r_edge = kHalfPi / std::max(std::abs(d[0]), std::abs(d[1])) * (1.0 - 1e-9);
      auto at = [&](double r) { return std::array<double, 2>{r * d[0], r * d[1]}; };
      for (const auto& f : {std::function<double(std::array<double, 2>)>(fine_re),
                            std::function<double(std::array<double, 2>)>(coarse_re)}) {
        double r_prev = 0.0, v_prev = f(at(0.0));
        for (int i = 1; i <= kScan; ++i) {
          const double r = r_edge * i / kScan;
          const double v = f(at(r));
          if ((v_prev < 0.0) != (v < 0.0)) {
            double lo = r_prev, hi = r;
            for (int it = 0; it < 60; ++it) {
              const double mid = 0.5 * (lo + hi);
              ((f(at(mid)) < 0.0) == (v_prev < 0.0) ? lo : hi) = mid;
            }
            const double r0 = 0.5 * (lo + hi);
            double delta = 0.25;
            for (int o = 0; o < kOffsets; ++o, delta *= 0.7) {
              for (double r1 : {r0 - delta, r0 + delta}) {
                if (r1 < 0.0) continue;
                if (auto rho = evaluate(at(r1))) samples.push_back({at(r1), *rho});
              }
            }
          }
          r_prev = r;
          v_prev = v;
        }
      }
    }
  }
  if (samples.empty())
    throw Error(ErrorCode::resonance, "no admissible frequency on the LFA grid");

  std::sort(samples.begin(), samples.end(),
            [](const LfaSample& a, const LfaSample& b) { return a.rho > b.rho; });
  LfaSample best = samples.front();

  if (setup.refine) {
    // Compass search from the strongest grid samples.
    const double step0 = std::max(r_max / (nr - 1), 2.0 * kPi / na * r_max);
    const int starts = std::min<int>(8, static_cast<int>(samples.size()));
    for (int sidx = 0; sidx < starts; ++sidx) {
      LfaSample cur = samples[sidx];
      double step = step0;
      while (step > 1e-7) {
        bool moved = false;
        for (const auto& d : {std::array<double, 2>{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                              {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}) {
          std::array<double, 2> t{cur.theta[0] + step * d[0], cur.theta[1] + step * d[1]};
          if (auto rho = evaluate(t); rho && *rho > cur.rho) {
            cur = {t, *rho};
            moved = true;
          }
        }
        if (!moved) step *= 0.5;
      }
      if (cur.rho > best.rho) best = cur;
    }
  }

  res.rho = best.rho;
  res.argmax = best.theta;
  res.divergent = best.rho > 1.0;
  if (setup.keep_spectra) res.spectra = std::move(samples);
  return res;
}

SmootherSpec default_smoother(Scheme fine, Scheme coarse) {
  if (dimension_of(fine) == 3) return {SmootherKind::jacobi, 0.9, 8, 8};
  if (is_fe_scaled(fine)) return {SmootherKind::jacobi, 0.6, 2, 2};
  if (is_optimized(coarse) && fine == Scheme::fd5) return {SmootherKind::jacobi, 0.8, 4, 4};
  return {SmootherKind::jacobi, 0.8, 2, 2};
}

}  // namespace helmmg
