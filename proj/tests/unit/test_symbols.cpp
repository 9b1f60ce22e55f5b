#include <sstream>

#include "helmmg/coefficients.hpp"
#include "helmmg/symbols.hpp"
#include "support.hpp"

using namespace helmmg;
using namespace testing;

namespace {

constexpr double kJssA = 0.5461, kJssC = 0.6248, kJssD = 0.09381;

// Weight lookup by offset, for structural checks.
cplx weight_at(const Stencil& st, int a, int b, int c = 0) {
  for (const auto& e : st.entries)
    if (e.offset == std::array<int, 3>{a, b, c}) return e.weight;
  return 0.0;
}

std::vector<SchemeSpec> all_2d() {
  auto t1 = builtin_table(TableFamily::opt_fd5, 0.5);
  auto t2 = builtin_table(TableFamily::opt_fe, 0.5);
  return {{Scheme::fd5, nullptr}, {Scheme::galerkin, nullptr}, {Scheme::jss, nullptr},
          {Scheme::fe, nullptr},  {Scheme::opt2d, t1},         {Scheme::opt_fe, t2}};
}

std::vector<SchemeSpec> all_3d() {
  return {{Scheme::fd7, nullptr}, {Scheme::opt3d, builtin_table(TableFamily::opt_fd7, 0.5)}};
}

double scale_of(const SchemeSpec& s, const GridScale& g) {
  return is_fe_scaled(s.kind) ? 1.0 : 1.0 / (g.h * g.h);
}

}  // namespace

TEST_SUITE("symbols") {

TEST_CASE("fd5 closed-form values") {
  CHECK(near(symbol_fd5({1.0, 0.0, 0.0}, WaveVector::of(pi, pi)), 8.0, 1e-14));
  const GridScale s{1.0, 0.7, 0.0};
  CHECK(near(symbol_fd5(s, WaveVector::of(0.0, 0.0)), -0.49, 1e-14));
  const double k = 2.0 * pi / 10.0;
  const cplx v = symbol_fd5({1.0, k, 0.0}, WaveVector::of(k, 0.0));
  CHECK(v.real() == doctest::Approx(2.0 - 2.0 * std::cos(k) - k * k).epsilon(1e-14));
  CHECK(v.real() == doctest::Approx(-0.0128).epsilon(0.01));
}

TEST_CASE("damped mass substitution") {
  const GridScale s{0.5, 3.0, 0.02};
  const cplx m = std::pow(cplx(1.0, 0.02) * 3.0, 2);
  CHECK(near(s.mass(), m, 1e-13));
  CHECK(near(symbol_fd5(s, WaveVector::of(0.0, 0.0)), -m, 1e-12));
  CHECK(s.p() == doctest::Approx(1.5 / (2.0 * pi)));
}

TEST_CASE("Galerkin symbol equals the R L P composition on harmonics") {
  // Coarse spacing 1, fine fd5 on spacing 1/2.
  for (int trial = 0; trial < 25; ++trial) {
    const double k = uniform(0.0, 2.0), alpha = uniform(0.0, 0.1);
    const double t1 = uniform(-pi / 2, pi / 2), t2 = uniform(-pi / 2, pi / 2);
    cplx sum = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double s1 = a ? t1 - std::copysign(pi, t1) : t1;
        const double s2 = b ? t2 - std::copysign(pi, t2) : t2;
        const double w = (1 + std::cos(s1)) * (1 + std::cos(s2)) / 4.0;
        sum += w * w * symbol_fd5({0.5, k, alpha}, WaveVector::of(s1 / 0.5, s2 / 0.5));
      }
    const cplx gal = symbol_galerkin({1.0, k, alpha}, WaveVector::of(t1 / 0.5, t2 / 0.5));
    CHECK(near(gal, sum, 1e-12));
  }
  CHECK(near(symbol_galerkin({1.0, 1.3, 0.0}, WaveVector::of(0, 0)), -1.69, 1e-13));
  // k = 0 at (pi, 0): 3 - (cos pi + cos 0) - 0.5 * 2 cos pi cos 0 = 4.
  CHECK(near(symbol_galerkin({1.0, 0.0, 0.0}, WaveVector::of(pi, 0.0)), 4.0, 1e-13));
}

TEST_CASE("jss closed-form values") {
  CHECK(near(symbol_jss({1.0, 0.9, 0.0}, WaveVector::of(0, 0)), -0.81, 1e-13));
  CHECK(near(symbol_jss({1.0, 0.0, 0.0}, WaveVector::of(pi, pi)), 8.0 * kJssA, 1e-13));
  const auto q = CoeffSet2D::jss();
  CHECK(q.a1 == doctest::Approx((1.0 + kJssA) / 2.0));
  CHECK(q.b1 == doctest::Approx(kJssC));
  CHECK(q.b2 == doctest::Approx(4.0 * kJssD));
  for (int trial = 0; trial < 10; ++trial) {
    const GridScale s{uniform(0.2, 2.0), uniform(0.0, 1.5), uniform(0.0, 0.05)};
    const auto xi = WaveVector::of(uniform(-3, 3), uniform(-3, 3));
    CHECK(near(symbol_opt2d(q, s, xi), symbol_jss(s, xi), 1e-11 / (s.h * s.h)));
  }
}

TEST_CASE("FE symbols carry the h^2 scaling") {
  const GridScale s{0.25, 2.0, 0.0};
  CHECK(near(symbol_fe(s, WaveVector::of(0, 0)), -s.h * s.h * 4.0, 1e-14));
  // Hand stencil at k = 0: centre 8/3, all eight neighbours -1/3.
  const cplx v = symbol_fe({1.0, 0.0, 0.0}, WaveVector::of(pi, pi));
  CHECK(near(v, 8.0 / 3.0 - (1.0 / 3.0) * (-4.0) - (1.0 / 3.0) * 4.0, 1e-13));
  auto t2 = builtin_table(TableFamily::opt_fe, 0.5);
  const GridScale s0{0.5, 0.0, 0.0};
  CHECK(near(symbol_opt_fe(t2->coeffs2d(0.0), s0, WaveVector::of(0, 0)), 0.0, 1e-14));
  const GridScale s1{0.5, 1.0, 0.0};
  CHECK(near(symbol_opt_fe(t2->coeffs2d(s1.p()), s1, WaveVector::of(0, 0)), -0.25, 1e-13));
}

TEST_CASE("3-D symbols") {
  const GridScale s{0.5, 1.7, 0.01};
  CHECK(near(symbol_fd7(s, WaveVector::of(0, 0, 0)), -s.mass(), 1e-12));
  const auto xi = WaveVector::of(0.3, -1.1, 2.0);
  const double ih2 = 4.0;
  const cplx ref = ih2 * (6.0 - 2.0 * (std::cos(0.15) + std::cos(0.55) + std::cos(1.0))) - s.mass();
  CHECK(near(symbol_fd7(s, xi), ref, 1e-12));
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = CoeffSet3D::from_free(uniform(0.5, 1.0), uniform(0.0, 0.3), uniform(0.4, 1.0),
                                         uniform(0.0, 0.3), uniform(0.0, 0.2));
    CHECK(near(symbol_opt3d(c, s, WaveVector::of(0, 0, 0)), -s.mass(), 1e-11));
  }
}

TEST_CASE("consistency at zero frequency, all schemes") {
  for (const auto& sc : all_2d())
    for (double p : {0.0, 0.1, 0.25, 0.4}) {
      const GridScale s{0.5, 2.0 * pi * p / 0.5, 0.0};
      const double h2 = is_fe_scaled(sc.kind) ? s.h * s.h : 1.0;
      CHECK(near(symbol(sc, s, WaveVector::of(0, 0)), -h2 * s.k * s.k, 1e-10 * scale_of(sc, s)));
    }
  for (const auto& sc : all_3d())
    for (double p : {0.0, 0.2, 0.4}) {
      const GridScale s{0.5, 2.0 * pi * p / 0.5, 0.0};
      CHECK(near(symbol(sc, s, WaveVector::of(0, 0, 0)), -s.k * s.k, 1e-10 * scale_of(sc, s)));
    }
}

TEST_CASE("square and cube symmetry, all schemes") {
  for (const auto& sc : all_2d())
    for (int trial = 0; trial < 10; ++trial) {
      const GridScale s{1.0, uniform(0.0, 2.0 * pi * 0.4), uniform(0.0, 0.05)};
      const double a = uniform(-pi, pi), b = uniform(-pi, pi);
      const cplx v = symbol(sc, s, WaveVector::of(a, b));
      const double tol = 1e-12 * scale_of(sc, s);
      CHECK(near(symbol(sc, s, WaveVector::of(-a, -b)), v, tol));
      CHECK(near(symbol(sc, s, WaveVector::of(b, a)), v, tol));
      CHECK(near(symbol(sc, s, WaveVector::of(-a, b)), v, tol));
      CHECK(near(symbol(sc, s, WaveVector::of(a, -b)), v, tol));
    }
  for (const auto& sc : all_3d())
    for (int trial = 0; trial < 10; ++trial) {
      const GridScale s{1.0, uniform(0.0, 2.0 * pi * 0.4), 0.0};
      const double a = uniform(-pi, pi), b = uniform(-pi, pi), c = uniform(-pi, pi);
      const cplx v = symbol(sc, s, WaveVector::of(a, b, c));
      CHECK(near(symbol(sc, s, WaveVector::of(c, a, b)), v, 1e-12));
      CHECK(near(symbol(sc, s, WaveVector::of(b, a, c)), v, 1e-12));
      CHECK(near(symbol(sc, s, WaveVector::of(-a, b, -c)), v, 1e-12));
    }
}

TEST_CASE("parameter degeneration") {
  for (int trial = 0; trial < 25; ++trial) {
    const GridScale s{uniform(0.1, 1.0), uniform(0.0, 3.0), uniform(0.0, 0.05)};
    const double tol = 1e-12 / (s.h * s.h);
    const auto xi2 = WaveVector::of(uniform(-5, 5), uniform(-5, 5));
    CHECK(near(symbol_opt2d(CoeffSet2D::fd5(), s, xi2), symbol_fd5(s, xi2), tol));
    CHECK(near(symbol_opt2d(CoeffSet2D::from_free(1.0, 1.0, 0.0), s, xi2), symbol_fd5(s, xi2), tol));
    CHECK(near(symbol_opt_fe(CoeffSet2D::fe(), s, xi2), symbol_fe(s, xi2), 1e-12));
    CHECK(near(s.h * s.h * symbol_opt2d(CoeffSet2D::fe(), s, xi2), symbol_fe(s, xi2), 1e-12));
    const auto xi3 = WaveVector::of(uniform(-5, 5), uniform(-5, 5), uniform(-5, 5));
    CHECK(near(symbol_opt3d(CoeffSet3D::fd7(), s, xi3), symbol_fd7(s, xi3), tol));
    CHECK(near(symbol_opt3d(CoeffSet3D::from_free(1, 0, 1, 0, 0), s, xi3), symbol_fd7(s, xi3), tol));
  }
}

TEST_CASE("stencils reproduce the closed-form symbols") {
  auto check = [](const SchemeSpec& sc, int dim) {
    for (int trial = 0; trial < 25; ++trial) {
      const GridScale s{uniform(0.2, 1.0), uniform(0.0, 2.0 * pi * 0.39), uniform(0.0, 0.05)};
      const double k = s.k;
      const GridScale sp{s.h, std::min(k, 2.0 * pi * 0.4 / s.h), s.alpha};
      const Stencil st = stencil_of(sc, sp);
      const WaveVector xi = dim == 2 ? WaveVector::of(uniform(-5, 5), uniform(-5, 5))
                                     : WaveVector::of(uniform(-5, 5), uniform(-5, 5), uniform(-5, 5));
      CHECK(near(st.symbol(xi, sp.h), symbol(sc, sp, xi), 1e-12 * scale_of(sc, sp)));
    }
  };
  for (const auto& sc : all_2d())
    if (sc.kind != Scheme::galerkin) check(sc, 2);
  for (const auto& sc : all_3d()) check(sc, 3);
  const GridScale s{1.0, 0.5, 0.0};
  CHECK(near(stencil_of({Scheme::galerkin, nullptr}, s).symbol(WaveVector::of(0.4, 1.1), 1.0),
             symbol_galerkin(s, WaveVector::of(0.4, 1.1)), 1e-13));
}

TEST_CASE("stencil structure") {
  const GridScale s{0.5, 1.2, 0.0};
  const Stencil fd5 = stencil_of({Scheme::fd5, nullptr}, s);
  CHECK(fd5.entries.size() == 5);
  CHECK(near(fd5.center(), 4.0 / 0.25 - 1.44, 1e-13));
  CHECK(near(weight_at(fd5, 1, 0), -4.0, 1e-14));

  const Stencil opt = stencil_of({Scheme::opt2d, builtin_table(TableFamily::opt_fd5, 0.5)}, s);
  CHECK(opt.entries.size() == 9);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {-1, 0}, {0, -1}})
    CHECK(near(weight_at(opt, a, b), weight_at(opt, 1, 0), 1e-14));
  for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 1}, {-1, 1}, {1, -1}, {-1, -1}})
    CHECK(near(weight_at(opt, a, b), weight_at(opt, 1, 1), 1e-14));

  const Stencil o3 = stencil_of({Scheme::opt3d, builtin_table(TableFamily::opt_fd7, 0.5)}, s);
  CHECK(o3.entries.size() == 27);
  int seen = 0;
  for (const auto& e : o3.entries) {
    const int nz = (e.offset[0] != 0) + (e.offset[1] != 0) + (e.offset[2] != 0);
    std::array<int, 3> rep{0, 0, 0};
    for (int d = 0; d < nz; ++d) rep[d] = 1;
    CHECK(near(e.weight, weight_at(o3, rep[0], rep[1], rep[2]), 1e-13));
    ++seen;
  }
  CHECK(seen == 27);
}

TEST_CASE("damping distance") {
  CHECK(damping_distance(1.25e-3) == doctest::Approx(293.15).epsilon(1e-3));
  CHECK(damping_distance(std::log(10.0) / (2.0 * pi)) == doctest::Approx(1.0));
  CHECK(damping_distance(0.02) == doctest::Approx(18.32).epsilon(1e-3));
  CHECK(error_code_of([] { damping_distance(0.0); }) == ErrorCode::invalid_argument);
  CHECK(error_code_of([] { damping_distance(-1.0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("scheme names round-trip") {
  for (auto s : {Scheme::fd5, Scheme::galerkin, Scheme::jss, Scheme::fe, Scheme::fd7, Scheme::opt2d,
                 Scheme::opt_fe, Scheme::opt3d})
    CHECK(parse_scheme(to_string(s)) == s);
  CHECK(error_code_of([] { parse_scheme("fd9"); }) == ErrorCode::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("coefficients") {

TEST_CASE("built-in table values and interpolation") {
  auto t = builtin_table(TableFamily::opt_fd5, 0.5);
  auto c = t->coeffs2d(0.04);
  CHECK(c.a1 == doctest::Approx(0.87242).epsilon(1e-9));
  CHECK(c.b1 == doctest::Approx(0.63691).epsilon(1e-9));
  CHECK(c.b2 == doctest::Approx(0.47535).epsilon(1e-9));
  for (int k = 0; k < t->n_controls(); ++k) {
    const auto f = t->free_at(t->node(k));
    for (int j = 0; j < 3; ++j) CHECK(f[j] == doctest::Approx(t->controls()[k][j]).epsilon(1e-14));
  }
  const auto lo = t->free_at(0.04), hi = t->free_at(0.08), mid = t->free_at(0.06);
  for (int j = 0; j < 3; ++j) CHECK(mid[j] == doctest::Approx((lo[j] + hi[j]) / 2.0).epsilon(1e-13));
  // Affine between nodes.
  const auto q = t->free_at(0.05), r = t->free_at(0.07);
  for (int j = 0; j < 3; ++j) CHECK(q[j] + r[j] == doctest::Approx(2.0 * mid[j]).epsilon(1e-13));
  CHECK(c.a1 + c.a2 == doctest::Approx(1.0));
  CHECK(c.b1 + c.b2 + c.b3 == doctest::Approx(1.0));
}

TEST_CASE("all shipped tables") {
  for (auto fam : {TableFamily::opt_fd5, TableFamily::opt_fe, TableFamily::opt_fd7})
    for (double r : {0.5, 0.25, 0.125}) {
      auto t = builtin_table(fam, r);
      CHECK(t->n_controls() == 11);
      CHECK(t->P() == doctest::Approx(0.4));
      CHECK(t->ratio() == r);
    }
  CHECK(error_code_of([] { builtin_table(TableFamily::opt_fd5, 0.3); }) == ErrorCode::out_of_range);
}

TEST_CASE("range checks clamp float noise only") {
  auto t = builtin_table(TableFamily::opt_fd5, 0.5);
  CHECK_NOTHROW(t->free_at(0.4 + 1e-10));
  CHECK(error_code_of([&] { t->free_at(0.4 + 1e-6); }) == ErrorCode::out_of_range);
  CHECK(error_code_of([&] { t->free_at(-0.01); }) == ErrorCode::out_of_range);
}

TEST_CASE("CSV round trip and registered overrides") {
  auto t = builtin_table(TableFamily::opt_fd7, 0.25);
  std::stringstream ss;
  t->write_csv(ss);
  std::string header;
  std::stringstream lines(ss.str());
  while (std::getline(lines, header) && header.rfind('#', 0) == 0) {
  }
  CHECK(header == "p,a1,a2,b1,b2,b3");
  const auto back = CoefficientTable::read_csv(ss, TableFamily::opt_fd7, 0.25);
  for (int k = 0; k < t->n_controls(); ++k)
    for (int j = 0; j < 5; ++j) CHECK(back.controls()[k][j] == doctest::Approx(t->controls()[k][j]).epsilon(1e-12));

  auto flat = std::make_shared<CoefficientTable>(
      TableFamily::opt_fd5, 0.5, 0.4, std::vector<std::vector<double>>(11, {1.0, 1.0, 0.0}));
  register_table(flat);
  CHECK(lookup_table(TableFamily::opt_fd5, 0.5) == flat);
  clear_registered_tables();
  CHECK(lookup_table(TableFamily::opt_fd5, 0.5) == builtin_table(TableFamily::opt_fd5, 0.5));
}

}  // TEST_SUITE
