#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gllab/solver.hpp"
#include "gllab/vorticity.hpp"

using namespace gllab;

TEST_CASE("supercurrent of a phase winding") {
  const GridSpec g = GridSpec::square(2.0, 64);
  GLState s(g);
  s.u = vortex_ansatz(g, 0, 0, 1, 0.05);
  const auto j = supercurrent(s);
  // j = grad theta = (-y, x)/r^2 where |u| = 1.
  double worst = 0;
  for (int jj = 0; jj <= g.ny; ++jj)
    for (int i = 0; i <= g.nx; ++i) {
      const double x = g.x(i), y = g.y(jj), r2 = x * x + y * y;
      if (r2 < 1.0) continue;
      const auto k = g.idx(i, jj);
      worst = std::max({worst, std::abs(j.x[k] + y / r2), std::abs(j.y[k] - x / r2)});
    }
  CHECK(worst < 5e-3);
}

TEST_CASE("vorticity of a vortex-free state vanishes") {
  const GridSpec g = GridSpec::square(1.0, 32);
  const GLState s = sample_state(g, [](double x, double y) {
    const double ph = 0.3 * x * y + std::sin(y);
    return StatePoint{std::cos(ph), std::sin(ph), -0.4 * y, 0.4 * x};
  });
  CHECK(max_abs(vorticity_mu(s).v) < 1e-2);
  // Gauge invariance of mu.
  const ScalarField f = sample(g, [](double x, double y) { return x * x - std::cos(y); });
  const ScalarField a = vorticity_mu(s), b = vorticity_mu(apply_gauge(s, f));
  double d = 0;
  for (std::size_t k = 0; k < g.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  CHECK(d < 1e-10);
}

TEST_CASE("total vorticity of a degree-d ansatz is 2 pi d") {
  const GridSpec g = GridSpec::square(2.0, 128);
  for (int d : {1, 2, -1}) {
    GLState s(g);
    s.u = vortex_ansatz(g, 0.1, 0, d, 0.2);
    CHECK(integrate(vorticity_mu(s)) / (2 * std::numbers::pi) == doctest::Approx(d).epsilon(1e-3));
  }
}

TEST_CASE("winding numbers") {
  const GridSpec g = GridSpec::square(2.0, 40);
  const auto u = vortex_ansatz(g, 0.5, 0.5, 2, 0.2);
  CHECK(winding_number(u, loop_around(g, 0.5, 0.5, 0.6)) == 2);
  CHECK(winding_number(u, LoopRect{2, 2, 12, 12}) == 0);  // away from the core
  CHECK(winding_real(u, loop_around(g, 0.5, 0.5, 0.6)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(winding_number(u, LoopRect{5, 5, 5, 9}), std::invalid_argument);
  CHECK_THROWS_AS(winding_number(u, LoopRect{0, 0, 50, 10}), std::invalid_argument);
  // Loop through the zero of u.
  const auto v = vortex_ansatz(g, 0.0, 0.0, 1, 0.2);
  CHECK_THROWS_AS(winding_number(v, LoopRect{20, 20, 30, 30}), std::domain_error);
}

TEST_CASE("winding is gauge invariant") {
  const GridSpec g = GridSpec::square(2.0, 40);
  GLState s(g);
  s.u = vortex_ansatz(g, 0, 0, -3, 0.2);
  const ScalarField f = sample(g, [](double x, double y) { return 2 * std::sin(x * y) + y; });
  CHECK(winding_number(apply_gauge(s, f).u, loop_around(g, 0, 0, 1)) == -3);
}

TEST_CASE("core resolution rule") {
  const GridSpec g = GridSpec::square(7.0, 224);
  CHECK(resolves_core(g, 0.25));
  CHECK_FALSE(resolves_core(g, 0.2));
}
