#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <doctest.h>

#include "helmmg/error.hpp"

namespace testing {

using helmmg::cplx;
inline constexpr double pi = std::numbers::pi;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline cplx random_cplx() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

inline bool near(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

template <class F>
helmmg::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const helmmg::Error& e) {
    return e.code();
  }
  FAIL("expected a helmmg::Error");
  return helmmg::ErrorCode::invalid_argument;
}

}  // namespace testing
