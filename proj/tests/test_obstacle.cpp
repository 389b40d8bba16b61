#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gllab/glcore.hpp"
#include "gllab/obstacle.hpp"

using namespace gllab;

namespace {
const GridSpec kGrid = GridSpec::square(1.0, 64);
}

TEST_CASE("argument checks and non-convergence") {
  CHECK_THROWS_AS(solve_obstacle(0.0, kGrid), std::invalid_argument);
  ObstacleOptions o;
  o.omega = 1.95;
  CHECK_THROWS_AS(solve_obstacle(0.2, kGrid, o), std::invalid_argument);
  o = {};
  o.max_iters = 3;
  CHECK_THROWS_AS(solve_obstacle(0.2, kGrid, o), NumericalError);
}

TEST_CASE("KKT conditions and bounds at several lambda") {
  std::vector<ObstacleSolution> sols;
  for (double lam : {0.1, 0.2, 0.5, 1.0, 1.9}) {
    sols.push_back(solve_obstacle(lam, kGrid));
    const auto k = kkt_report(sols.back());
    CHECK(k.feasibility <= 1e-9);
    CHECK(k.dual_feasibility <= 1e-9);
    CHECK(k.complementarity <= 1e-9);
    for (double v : sols.back().h_star.v) {
      CHECK(v >= 1 - lam / 2 - 1e-10);
      CHECK(v <= 1 + 1e-10);
    }
  }
  // Coincidence sets shrink and mu mass does not grow as lambda increases.
  for (std::size_t a = 0; a + 1 < sols.size(); ++a) {
    for (std::size_t k = 0; k < kGrid.size(); ++k)
      if (sols[a + 1].coincidence[k]) CHECK(sols[a].coincidence[k]);
    CHECK(integrate(sols[a + 1].mu_star) <= integrate(sols[a].mu_star) + 1e-12);
    CHECK(integrate(sols[a].mu_star) >= -1e-9);
  }
}

TEST_CASE("flat coincidence region carries mu = obstacle value") {
  const auto s = solve_obstacle(0.2, kGrid);
  int interior = 0;
  for (int j = 2; j < kGrid.ny - 1; ++j)
    for (int i = 2; i < kGrid.nx - 1; ++i) {
      auto on = [&](int a, int b) { return s.coincidence[kGrid.idx(a, b)] != 0; };
      if (on(i, j) && on(i - 1, j) && on(i + 1, j) && on(i, j - 1) && on(i, j + 1)) {
        ++interior;
        CHECK(s.mu_star(i, j) == doctest::Approx(0.9).epsilon(1e-9));
      }
    }
  CHECK(interior > 0);
}

TEST_CASE("inactive obstacle reproduces the unconstrained solution") {
  const ScalarField h0 = solve_unconstrained(kGrid);
  const double hmin = *std::min_element(h0.v.begin(), h0.v.end());
  CHECK(hmin > 0);
  CHECK(hmin < 1);
  const double lam = 2 * (1 - hmin) + 1e-3;
  const auto s = solve_obstacle(lam, kGrid);
  double d = 0;
  for (std::size_t k = 0; k < kGrid.size(); ++k) d = std::max(d, std::abs(s.h_star[k] - h0[k]));
  CHECK(d < 1e-6);
  CHECK(std::count(s.coincidence.begin(), s.coincidence.end(), 1) == 0);
  CHECK(kkt_report(h0, lam).complementarity < 1e-9);
  CHECK(max_abs(s.mu_star.v) < 1e-8);
}

TEST_CASE("KKT report flags an infeasible field") {
  ScalarField f(kGrid, 1.0);
  f(10, 10) = 0.5;
  CHECK(kkt_report(f, 0.2).feasibility == doctest::Approx(0.4));
}

TEST_CASE("E^lambda: trivial values and minimality sampling") {
  const double lam = 0.5;
  CHECK(e_lambda(ScalarField(kGrid, 1.0), lam) == doctest::Approx(kGrid.area() / (2 * lam)).epsilon(1e-12));
  ScalarField bad(kGrid, 1.0);
  bad(0, 3) = 0.9;
  CHECK_THROWS_AS(e_lambda(bad, lam), std::invalid_argument);

  const ScalarField h0 = solve_unconstrained(kGrid);
  const VectorField gr = grad(h0);
  std::vector<double> d(kGrid.size());
  for (std::size_t k = 0; k < kGrid.size(); ++k) d[k] = gr.x[k] * gr.x[k] + gr.y[k] * gr.y[k] + (h0[k] - 1) * (h0[k] - 1);
  CHECK(e_lambda(h0, lam) == doctest::Approx(0.5 * integrate(kGrid, d)).epsilon(1e-8));

  for (double l : {0.1, 0.2}) {
    const auto s = solve_obstacle(l, kGrid);
    const double e = e_lambda(s.h_star, l);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int r = 0; r < 20; ++r) {
      const double a = 0.05 * u(rng), kx = 1 + 3 * std::abs(u(rng)), ky = 1 + 3 * std::abs(u(rng));
      ScalarField f = s.h_star;
      for (int j = 1; j < kGrid.ny; ++j)
        for (int i = 1; i < kGrid.nx; ++i)
          f(i, j) += a * std::sin(kx * std::numbers::pi * (kGrid.x(i) + 1) / 2) * std::sin(ky * std::numbers::pi * (kGrid.y(j) + 1) / 2);
      CHECK(e <= e_lambda(f, l) + 1e-12);
    }
  }
}

TEST_CASE("screened operator of a constant") {
  const ScalarField m = screened_operator(ScalarField(kGrid, 0.7));
  for (double v : m.v) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
}
