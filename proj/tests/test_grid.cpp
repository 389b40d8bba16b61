#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gllab/grid.hpp"

using namespace gllab;

TEST_CASE("grid geometry and validation") {
  const GridSpec g(-1, 3, 0, 2, 8, 16);
  CHECK(g.hx() == doctest::Approx(0.5));
  CHECK(g.hy() == doctest::Approx(0.125));
  CHECK(g.size() == 9u * 17u);
  CHECK(g.idx(2, 3) == 3u * 9u + 2u);
  CHECK(g.on_boundary(0, 5));
  CHECK_FALSE(g.on_boundary(1, 1));
  CHECK(g.boundary_depth(3, 2) == 2);
  CHECK_THROWS_AS(GridSpec(1, 0, 0, 1, 8, 8).validate(), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(0, 1, 0, 1, 4, 8).validate(), std::invalid_argument);
}

TEST_CASE("trapezoid integration") {
  const GridSpec g = GridSpec::square(1.0, 256);
  CHECK(integrate(ScalarField(g, 1.0)) == doctest::Approx(4.0).epsilon(1e-14));
  // Bilinear integrands are integrated exactly.
  CHECK(integrate(sample(g, [](double x, double y) { return 1 + x + 2 * y + 3 * x * y; })) ==
        doctest::Approx(4.0).epsilon(1e-13));
  const double exact = std::pow(2 * std::sin(1.0), 2);
  const double err256 = std::abs(integrate(sample(g, [](double x, double y) { return std::cos(x) * std::cos(y); })) - exact);
  const GridSpec g2 = GridSpec::square(1.0, 128);
  const double err128 = std::abs(integrate(sample(g2, [](double x, double y) { return std::cos(x) * std::cos(y); })) - exact);
  CHECK(err256 < 5e-5);
  CHECK(err128 / err256 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("derivative stencils are exact on quadratics, including boundary nodes") {
  const GridSpec g(-1, 2, -0.5, 1.5, 12, 10);
  const ScalarField f = sample(g, [](double x, double y) { return x * x - 3 * x * y + 2 * y * y + x; });
  const ScalarField fx = dx(f), fy = dy(f);
  double ex = 0, ey = 0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      ex = std::max(ex, std::abs(fx(i, j) - (2 * g.x(i) - 3 * g.y(j) + 1)));
      ey = std::max(ey, std::abs(fy(i, j) - (-3 * g.x(i) + 4 * g.y(j))));
    }
  CHECK(ex < 1e-12);
  CHECK(ey < 1e-12);
}

TEST_CASE("cuts give one-sided derivatives of a kink") {
  const GridSpec g = GridSpec::square(1.0, 16);
  const ScalarField f = sample(g, [](double x, double) { return std::abs(x); });
  Cuts c;
  c.columns = {8};
  const ScalarField fx = dx(f, c);
  for (int i = 0; i <= 16; ++i) {
    if (i == 8) continue;
    CHECK(fx(i, 3) == doctest::Approx(i < 8 ? -1.0 : 1.0).epsilon(1e-12));
  }
  // Without the cut the centered stencil smears the kink.
  CHECK(dx(f)(8, 3) == doctest::Approx(0.0));
}

TEST_CASE("transposed stencils are adjoints") {
  const GridSpec g(0, 1, 0, 2, 9, 13);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> a(g.size()), b(g.size()), da(g.size()), tb(g.size());
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  for (int dir = 0; dir < 2; ++dir) {
    (dir ? apply_dy : apply_dx)(g, a.data(), da.data());
    (dir ? apply_dy_t : apply_dx_t)(g, b.data(), tb.data());
    double l = 0, r = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      l += da[k] * b[k];
      r += a[k] * tb[k];
    }
    CHECK(l == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("curl of a gradient and divergence of a perpendicular gradient vanish") {
  const GridSpec g = GridSpec::square(2.0, 32);
  const ScalarField f = sample(g, [](double x, double y) { return std::sin(x) * std::exp(y) + x * x * y; });
  CHECK(max_abs(curl(grad(f)).v) < 1e-10);
  CHECK(max_abs(div(perp_grad(f)).v) < 1e-10);
}

TEST_CASE("bilinear interpolation") {
  const GridSpec g(0, 1, 0, 1, 8, 8);
  const ScalarField f = sample(g, [](double x, double y) { return 2 + x - y + 4 * x * y; });
  bool clamped = false;
  CHECK(interp(f, 0.337, 0.71, &clamped) == doctest::Approx(2 + 0.337 - 0.71 + 4 * 0.337 * 0.71).epsilon(1e-14));
  CHECK_FALSE(clamped);
  CHECK(interp(f, 1.5, 0.5, &clamped) == doctest::Approx(f(8, 4)));
  CHECK(clamped);
}

TEST_CASE("field files round-trip bit-exactly") {
  const GridSpec g(-1, 1, 0, 3, 8, 9);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 1e3);
  ScalarField s(g);
  for (auto& v : s.v) v = n(rng) * std::exp(n(rng) / 100);
  VectorField w(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    w.x[k] = n(rng);
    w.y[k] = 1e-300 * n(rng);
  }
  std::stringstream ss, sv;
  write_field(ss, s);
  write_field(sv, w);
  const ScalarField s2 = read_scalar_field(ss);
  const VectorField w2 = read_vector_field(sv);
  CHECK(s2.grid == g);
  CHECK(s2.v == s.v);
  CHECK(w2.x == w.x);
  CHECK(w2.y == w.y);
}

TEST_CASE("malformed field files are rejected") {
  std::stringstream empty;
  CHECK_THROWS(read_scalar_field(empty));
  const GridSpec g(0, 1, 0, 1, 8, 8);
  std::stringstream sv;
  write_field(sv, VectorField(g));
  CHECK_THROWS(read_scalar_field(sv));  // kind mismatch
  std::stringstream st;
  write_field(st, ScalarField(g, 1.0));
  std::string text = st.str();
  text.resize(text.size() / 2);
  std::stringstream trunc(text);
  CHECK_THROWS(read_scalar_field(trunc));
}
