#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gllab/caselab.hpp"

using namespace gllab;

// Closed-form values computed independently at 40 digits (mpmath).
TEST_CASE("closed form of q on the line example") {
  CHECK(q_closed(0.5) == doctest::Approx(1.877354938).epsilon(1e-9));
  CHECK(q_closed(1.0) == doctest::Approx(0.5176664956).epsilon(1e-9));
  CHECK(q_closed(1.5) == doctest::Approx(-0.08421202615).epsilon(1e-9));
  CHECK(q_closed(2.0) == doctest::Approx(-0.3429002881).epsilon(1e-9));
  CHECK_THROWS_AS(q_closed(0.0), std::invalid_argument);
}

TEST_CASE("threshold: bracket signs and critical half-width") {
  CHECK(threshold_bracket(1.0) > 0);
  CHECK(threshold_bracket(2.0) < 0);
  const double Ls = critical_L(1e-12);
  CHECK(std::abs(Ls - 1.3999107451533360) < 1e-10);
  CHECK(q_closed(Ls - 0.01) > 0);
  CHECK(q_closed(Ls + 0.01) < 0);
}

TEST_CASE("special tangent field: exact jet and tangency") {
  const double L = 1.3;
  const EtaFn eta = prop41_eta(L);
  // Tangent on the boundary.
  CHECK(std::abs(eta(L, 0.4).v[0]) < 1e-15);
  CHECK(std::abs(eta(0.2, -L).v[1]) < 1e-15);
  // Jet against central differences.
  const double x = 0.37, y = -0.52, h = 1e-5;
  const auto j = eta(x, y);
  for (int i = 0; i < 2; ++i) {
    CHECK(j.d[i][0] == doctest::Approx((eta(x + h, y).v[i] - eta(x - h, y).v[i]) / (2 * h)).epsilon(1e-8));
    CHECK(j.d[i][1] == doctest::Approx((eta(x, y + h).v[i] - eta(x, y - h).v[i]) / (2 * h)).epsilon(1e-8));
    CHECK(j.dd[i][0][1] == doctest::Approx((eta(x, y + h).d[i][0] - eta(x, y - h).d[i][0]) / (2 * h)).epsilon(1e-7));
  }
  // Divergence-free: the field is the perpendicular gradient of a product of sines.
  CHECK(std::abs(j.d[0][0] + j.d[1][1]) < 1e-14);
}

TEST_CASE("line example fields") {
  CHECK_THROWS_AS(prop41_fields(1.0, 31), std::invalid_argument);
  const auto f = prop41_fields(1.0, 32);
  REQUIRE(f.mu.line_part);
  CHECK(f.mu.line_part->segments.size() == 1);
  CHECK(f.mu.line_part->segments[0].density_at(0.5) == doctest::Approx(2.0));
  CHECK(f.h.cuts.columns == std::vector<int>{16});
  CHECK(f.eta.support == SupportKind::boundary_tangent);
}

TEST_CASE("the line measure is -h'' + h in the weak sense") {
  CHECK(prop41_weak_residual(1.0, 256, 10, 42) < 1e-4);
  // Negative control: the opposite sign is far off.
  CHECK(prop41_weak_residual(1.0, 256, 10, 42, -2.0) > 0.1);
}

TEST_CASE("quadrature of q_h converges to the closed form at second order") {
  const auto a = q_quadrature_vs_closed(1.0, 128), b = q_quadrature_vs_closed(1.0, 256);
  CHECK(b.defect <= 1e-3 * (1 + std::abs(b.q_closed)));
  CHECK(a.defect / b.defect == doctest::Approx(4.0).epsilon(0.1));
  CHECK(a.measure_term == 0.0);
}

TEST_CASE("certificate") {
  const auto c = certificate_check(0.05, 4, 0.75);
  CHECK(c.ok);
  CHECK(c.margins[0] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(c.margins[1] == doctest::Approx(1.0));
  // 1 - 3/4 - 16 * 0.05 * (e^{0.1} - 1)
  CHECK(c.margins[2] == doctest::Approx(0.25 - 0.8 * std::expm1(0.1)).epsilon(1e-12));
  CHECK_FALSE(certificate_check(1.0, 4, 0.75).ok);
  CHECK_THROWS_AS(certificate_check(0.05, 4, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(certificate_check(0.05, -1, 0.75), std::invalid_argument);
}

TEST_CASE("weighted Poincare inequality on seeded samples") {
  CHECK(poincare_check(0.05, poincare_samples(0.05, 20, 42), 128) <= 1.0);
  CHECK(poincare_check(1.0, poincare_samples(1.0, 20, 42), 128) <= 1.0);
}

TEST_CASE("random sweeps") {
  const auto small = random_eta_sweep(0.05, 20, 64, 42);
  CHECK(small.count == 20);
  CHECK(small.min_q >= -1e-8);
  const auto big = random_eta_sweep(2.0, 10, 64, 42, true);
  CHECK(big.argmin == 10);  // the special field
  CHECK(big.min_q < 0);
  // Deterministic.
  CHECK(random_eta_sweep(0.05, 20, 64, 42).min_q == small.min_q);
}

TEST_CASE("one-dimensional stability") {
  const auto m = monotone_1d_check(
      kink_profile(), [](double v) { return v * v * v - v; }, [](double v) { return 3 * v * v - 1; }, -8, 8, 16000);
  CHECK(m.min_eigenvalue >= -1e-6);
  CHECK(m.el_residual < 1e-6);
  // V = x with f = 0: lowest Dirichlet eigenvalue (pi / 16)^2, discrete value slightly below.
  const auto lin = monotone_1d_check([](double x) { return Jet1D{x, 1, 0}; }, [](double) { return 0.0; },
                                     [](double) { return 0.0; }, -8, 8, 1600);
  CHECK(lin.min_eigenvalue == doctest::Approx(std::pow(std::numbers::pi / 16, 2)).epsilon(1e-6));
  // Not monotone, not critical.
  CHECK_THROWS_AS(monotone_1d_check([](double x) { return Jet1D{std::cos(x), -std::sin(x), -std::cos(x)}; },
                                    [](double) { return 0.0; }, [](double) { return 0.0; }, -8, 8, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(monotone_1d_check([](double x) { return Jet1D{x * x * x, 3 * x * x + 1e-3, 6 * x}; },
                                    [](double) { return 0.0; }, [](double) { return 0.0; }, 0.1, 1, 100),
                  std::invalid_argument);
}

TEST_CASE("one-dimensional identity: flow differences give the full form") {
  const auto id = inner_identity_1d(kink_profile(), bump_1d(0.3, 2.0), -8, 8, 4000, 0.01);
  CHECK(std::abs(id.full_form - id.numeric) < 1e-5);
  CHECK(id.half_form == doctest::Approx(0.5 * id.full_form));
  CHECK(id.numeric / id.half_form == doctest::Approx(2.0).epsilon(1e-6));
}
