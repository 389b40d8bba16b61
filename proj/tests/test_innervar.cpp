#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gllab/innervar.hpp"

using namespace gllab;

namespace {

StatePoint smooth_state(double x, double y) {
  StatePoint q;
  const double rho = 0.8 + 0.15 * std::sin(x) * std::cos(y);
  q.u_re = rho * std::cos(x + y);
  q.u_im = rho * std::sin(x + y);
  q.a1 = 0.3 * std::sin(y) + 0.1;
  q.a2 = 0.2 * std::cos(x * y);
  return q;
}

EtaFn test_bump() { return bump_field(BumpSpec{-0.8, 0.75, -0.7, 0.8, 0.8, -0.5, 0.3, 0.4, 3.0, -1.8, 0.3}); }

GLParams params() {
  GLParams p;
  p.epsilon = 0.5;
  p.h_ex = 0.3;
  return p;
}

}  // namespace

TEST_CASE("support invariants of test fields") {
  const GridSpec g = GridSpec::square(1.0, 32);
  CHECK_NOTHROW(make_test_field(g, test_bump(), SupportKind::compact_interior));
  CHECK_THROWS_AS(make_test_field(g, constant_field(1, 0), SupportKind::compact_interior), std::invalid_argument);
  // (y, 0) is tangent on horizontal sides only.
  CHECK_THROWS_AS(make_test_field(g, linear_field(0, 1, 0, 0), SupportKind::boundary_tangent), std::invalid_argument);
  CHECK_NOTHROW(make_test_field(g, cutoff_field(g, constant_field(1, 2)), SupportKind::compact_interior));
  CHECK_THROWS_AS(bump_field(BumpSpec{1, 0, 0, 1}), std::invalid_argument);
}

TEST_CASE("zeta = D eta . eta at nodes") {
  const GridSpec g = GridSpec::square(1.0, 16);
  const auto T = make_test_field(g, cutoff_field(g, linear_field(1, 2, -1, 0.5, 0.2, 0.1)), SupportKind::compact_interior);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto& d = T.deta[k];
    CHECK(T.zeta.x[k] == doctest::Approx(d[0] * T.eta.x[k] + d[1] * T.eta.y[k]));
    CHECK(T.zeta.y[k] == doctest::Approx(d[2] * T.eta.x[k] + d[3] * T.eta.y[k]));
  }
}

TEST_CASE("flow of simple fields") {
  CHECK(flow_point(constant_field(0.3, -0.2), 0.1, 0.4, 0.5)[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(flow_point(constant_field(0.3, -0.2), 0.1, 0.4, 0.5)[1] == doctest::Approx(0.3).epsilon(1e-14));
  // eta = (x, -2y): Phi_t = (x e^t, y e^{-2t}).
  const auto p = flow_point(linear_field(1, 0, 0, -2), 0.7, -0.3, 0.05);
  CHECK(p[0] == doctest::Approx(0.7 * std::exp(0.05)).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(-0.3 * std::exp(-0.1)).epsilon(1e-12));

  const GridSpec g = GridSpec::square(1.0, 32);
  const auto T = make_test_field(g, test_bump(), SupportKind::compact_interior);
  const auto fm = flow(T, 0.02);
  CHECK(fm.composition_error < 1e-10);
  const auto z = flow(T, 0.0);
  CHECK(max_abs(z.fwd.x) == doctest::Approx(max_abs(sample(g, [](double x, double) { return x; }).v)));
  CHECK_THROWS_AS(flow(T, 1.0), std::invalid_argument);
}

TEST_CASE("pullback by the identity flow is the identity") {
  const GridSpec g = GridSpec::square(1.0, 16);
  const GLState s = sample_state(g, smooth_state);
  const auto T = make_test_field(g, zero_field(), SupportKind::compact_interior);
  const GLState q = pullback_state(s, flow(T, 0.1));
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(q.u.re[k] == doctest::Approx(s.u.re[k]));
    CHECK(q.A.y[k] == doctest::Approx(s.A.y[k]));
  }
}

TEST_CASE("pulled-back field carries the Jacobian factor") {
  const GridSpec g = GridSpec::square(1.0, 64);
  const GLState s = sample_state(g, smooth_state);
  const auto T = make_test_field(g, test_bump(), SupportKind::compact_interior);
  CHECK(pullback_field_defect(s, flow(T, 0.02)) < 5e-3);
}

TEST_CASE("closed inner variations of GL against flow differences") {
  const GridSpec g = GridSpec::square(1.0, 128);
  const GLParams p = params();
  const auto T = make_test_field(g, test_bump(), SupportKind::compact_interior);
  const GLState s = sample_state(g, smooth_state);
  const double c1 = closed_first_inner(s, p, T), c2 = closed_second_inner(s, p, T);
  const auto nd = numeric_inner_variations(StateFn(smooth_state), p, T, 0.005, Functional::gl, true);
  CHECK(std::abs(nd.d1_grid - c1) / std::abs(c1) < 5e-4);
  CHECK(std::abs(nd.d2_grid - c2) / std::abs(c2) < 5e-4);
  // Time Richardson alone leaves the O(h^2) resolution error.
  CHECK(std::abs(nd.d2_rich - c2) > std::abs(nd.d2_grid - c2));
  CHECK_THROWS_AS(numeric_inner_variations(StateFn(smooth_state), p,
                                           make_test_field(GridSpec::square(1.0, 33), test_bump(), SupportKind::compact_interior),
                                           0.005, Functional::gl, true),
                  std::invalid_argument);
}

TEST_CASE("closed inner variations are gauge invariant") {
  const GridSpec g = GridSpec::square(1.0, 64);
  const GLParams p = params();
  const auto T = make_test_field(g, test_bump(), SupportKind::compact_interior);
  const GLState s = sample_state(g, smooth_state);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int r = 0; r < 5; ++r) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const GLState sg = apply_gauge(s, sample(g, [=](double x, double y) { return a * std::sin(b * x - y) + c * x * y; }));
    const double c1 = closed_first_inner(s, p, T), c2 = closed_second_inner(s, p, T);
    CHECK(std::abs(closed_first_inner(sg, p, T) - c1) <= 1e-6 * (1 + std::abs(c1)));
    CHECK(std::abs(closed_second_inner(sg, p, T) - c2) <= 1e-6 * (1 + std::abs(c2)));
  }
}

TEST_CASE("inner variations of E_eps against flow differences") {
  const GridSpec g = GridSpec::square(1.0, 128);
  const auto T = make_test_field(g, test_bump(), SupportKind::compact_interior);
  const GLState s = sample_state(g, smooth_state);
  const auto c = closed_inner_E(s.u, 0.5, T);
  const auto nd = numeric_inner_variations(StateFn(smooth_state), params(), T, 0.005, Functional::e, true);
  CHECK(std::abs(nd.d1_grid - c.d1) / std::abs(c.d1) < 1e-3);
  CHECK(std::abs(nd.d2_grid - c.d2) / std::abs(c.d2) < 1e-3);
}

TEST_CASE("inner-outer link: O(h^2) defect") {
  const GLParams p = params();
  double prev = 0;
  for (int n : {64, 128}) {
    const GridSpec g = GridSpec::square(1.0, n);
    const auto lk = inner_outer_link_check(sample_state(g, smooth_state), p,
                                           make_test_field(g, test_bump(), SupportKind::compact_interior));
    CHECK(lk.defect1 <= 1e-3 * (1 + std::abs(lk.inner1)));
    if (n == 128) {
      CHECK(lk.defect2 <= 5e-3 * (1 + std::abs(lk.inner2)));
      CHECK(std::log2(prev / lk.defect2) == doctest::Approx(2.0).epsilon(0.2));
    }
    prev = lk.defect2;
  }
}

TEST_CASE("outer variations match finite differences of the discrete energy") {
  const GridSpec g = GridSpec::square(1.0, 32);
  const GLParams p = params();
  const GLState s = sample_state(g, smooth_state);
  ComplexField v(g);
  VectorField B(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    v.re[k] = std::sin(0.3 * k);
    v.im[k] = 0.5 * std::cos(0.7 * k);
    B.x[k] = 0.2 * std::sin(1.1 * k);
    B.y[k] = -0.1 * std::cos(0.2 * k);
  }
  const auto o = outer_variations(s, p, v, B);
  auto E = [&](double t) {
    GLState q = s;
    for (std::size_t k = 0; k < g.size(); ++k) {
      q.u.re[k] += t * v.re[k];
      q.u.im[k] += t * v.im[k];
      q.A.x[k] += t * B.x[k];
      q.A.y[k] += t * B.y[k];
    }
    return gl_energy(q, p);
  };
  const double h = 1e-3;
  const double f1 = (E(h) - E(-h)) / (2 * h), f1h = (E(h / 2) - E(-h / 2)) / h;
  const double f2 = (E(h) - 2 * E(0) + E(-h)) / (h * h), f2h = (E(h / 2) - 2 * E(0) + E(-h / 2)) / (h * h / 4);
  CHECK(o.d1 == doctest::Approx((4 * f1h - f1) / 3).epsilon(1e-8));
  CHECK(o.d2 == doctest::Approx((4 * f2h - f2) / 3).epsilon(1e-6));
  const auto oe = outer_variations_E(s.u, 0.5, v);
  auto F = [&](double t) {
    ComplexField w = s.u;
    for (std::size_t k = 0; k < g.size(); ++k) {
      w.re[k] += t * v.re[k];
      w.im[k] += t * v.im[k];
    }
    return e_energy(w, 0.5);
  };
  CHECK(oe.d1 == doctest::Approx((F(h) - F(-h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("pointwise identities") {
  // (div eta)^2 - tr((D eta)^2) = 2 det D eta for every matrix.
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int r = 0; r < 200; ++r) {
    EtaJet j;
    j.d = {{{u(rng), u(rng)}, {u(rng), u(rng)}}};
    CHECK(trace_identity(j).defect() < 1e-12);
  }
  const std::array<double, 4> M{0.3, -1.2, 0.7, 0.4}, N{1.0, 0.5, -0.2, 2.0};
  const double d1 = det_expansion(M, N, 1e-2).defect(), d2 = det_expansion(M, N, 5e-3).defect();
  CHECK(d1 / d2 == doctest::Approx(8.0).epsilon(0.05));
  CHECK(det_expansion(M, N, 0).defect() == 0.0);
}

TEST_CASE("one-dimensional second inner variation") {
  const auto V = kink_profile();
  const auto eta = bump_1d(0.3, 2.0);
  const double full = inner_second_1d_closed(V, eta, -8, 8, 4000);
  const auto nd = inner_variations_1d_numeric(V, eta, -8, 8, 4000, 0.01);
  // Frozen: independent adaptive quadrature of int eta'^2 V'^2 gives 0.4119500.
  CHECK(full == doctest::Approx(0.41195004).epsilon(1e-6));
  CHECK(std::abs(nd.d2_rich - full) < 1e-5);
  // The kink is critical: first inner variation vanishes.
  CHECK(std::abs(nd.d1_rich) < 1e-8);
  CHECK(kink_profile()(0.0).d == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK_THROWS_AS(inner_variations_1d_numeric(V, eta, -8, 8, 4000, 10.0), std::invalid_argument);
}
