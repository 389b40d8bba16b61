#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gllab/qforms.hpp"

using namespace gllab;

namespace {

LimitingField field(const GridSpec& g, FieldKind k, const std::function<double(double, double)>& f) {
  return LimitingField{sample(g, f), k, 1.0, {}};
}

EtaFn bump() { return bump_field(BumpSpec{-0.7, 0.6, -0.5, 0.75, 0.6, -0.4, 0.3, 0.5, 2.0, 1.0, 0.2}); }

}  // namespace

TEST_CASE("segments and line integrals") {
  Segment s;
  s.p0 = {0, -1};
  s.p1 = {0, 1};
  s.density = {1.0, 3.0};
  CHECK(s.length() == doctest::Approx(2.0));
  CHECK(s.density_at(0.25) == doctest::Approx(1.5));
  LineMeasurePart lm;
  lm.segments = {s};
  // int y^2 (2 + y) dy over (-1, 1) = 4/3.
  CHECK(line_integral([](double, double y) { return y * y; }, lm, 0.1) == doctest::Approx(4.0 / 3).epsilon(1e-13));
  s.density = {-2.0};
  lm.segments = {s};
  CHECK(line_integral([](double, double y) { return y * y; }, lm, 0.5) == doctest::Approx(4.0 / 3).epsilon(1e-13));
  CHECK(line_integral([](double, double y) { return y * y; }, lm, 0.5, LineWeight::signed_density) ==
        doctest::Approx(-4.0 / 3).epsilon(1e-13));
  // GL5 on subsegments integrates smooth functions to high accuracy.
  CHECK(line_integral([](double, double y) { return std::cos(y); }, lm, 0.05) ==
        doctest::Approx(4 * std::sin(1.0)).epsilon(1e-14));
}

TEST_CASE("line measure validation") {
  const GridSpec g = GridSpec::square(1.0, 8);
  LineMeasurePart lm;
  lm.segments = {Segment{{0, 0}, {0, 0}, {1.0}}};
  CHECK_THROWS_AS(lm.validate(), std::invalid_argument);
  lm.segments = {Segment{{0, 0}, {0, 1}, {}}};
  CHECK_THROWS_AS(lm.validate(), std::invalid_argument);
  lm.segments = {Segment{{0, 0}, {0, 2}, {1.0}}};
  CHECK_NOTHROW(lm.validate());
  CHECK_THROWS_AS(lm.validate(&g), std::invalid_argument);
  lm.segments = {Segment{{0, 0}, {0, 1}, {NAN}}};
  CHECK_THROWS_AS(lm.validate(), std::invalid_argument);
}

TEST_CASE("total variation adds absolutely continuous and line mass") {
  const GridSpec g = GridSpec::square(1.0, 16);
  VorticityMeasure mu;
  mu.ac_density = ScalarField(g, -1.0);
  mu.line_part = LineMeasurePart{{Segment{{0, -1}, {0, 1}, {-2.0}}}};
  CHECK(total_variation(mu, 0.1) == doctest::Approx(8.0));
  CHECK(VorticityMeasure{}.empty());
}

TEST_CASE("gradient integrals honour cuts") {
  const GridSpec g = GridSpec::square(1.0, 32);
  const ScalarField f = sample(g, [](double x, double) { return std::abs(x); });
  Cuts c;
  c.columns = {16};
  auto sq = [](std::size_t, double gx, double gy) { return gx * gx + gy * gy; };
  CHECK(integrate_gradient_form(f, c, sq) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(integrate_gradient_form(f, {}, sq) < 4.0 - 1e-3);
}

TEST_CASE("quadratic forms vanish for eta = 0") {
  const GridSpec g = GridSpec::square(1.0, 32);
  const auto Z = make_test_field(g, zero_field(), SupportKind::compact_interior);
  VorticityMeasure mu;
  mu.line_part = LineMeasurePart{{Segment{{0, -1}, {0, 1}, {2.0}}}};
  CHECK(q_h(field(g, FieldKind::magnetic_h, [](double x, double y) { return std::cos(x + y); }), mu, Z) == 0.0);
  CHECK(q_u(field(g, FieldKind::nonmagnetic_U, [](double x, double) { return x; }), mu, Z) == 0.0);
}

TEST_CASE("q_u for U = x equals half the Dirichlet energy of eta2") {
  const GridSpec g = GridSpec::square(1.0, 256);
  const auto T = make_test_field(g, bump(), SupportKind::compact_interior);
  const auto U = field(g, FieldKind::nonmagnetic_U, [](double x, double) { return x; });
  std::vector<double> e2(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) e2[k] = T.deta[k][2] * T.deta[k][2] + T.deta[k][3] * T.deta[k][3];
  CHECK(q_u(U, VorticityMeasure{}, T) == doctest::Approx(0.5 * integrate(g, e2)).epsilon(1e-6));
}

TEST_CASE("q_h and q_u reject the wrong field kind") {
  const GridSpec g = GridSpec::square(1.0, 16);
  const auto T = make_test_field(g, zero_field(), SupportKind::compact_interior);
  CHECK_THROWS_AS(q_h(field(g, FieldKind::nonmagnetic_U, [](double x, double) { return x; }), {}, T), std::invalid_argument);
  CHECK_THROWS_AS(q_u(field(g, FieldKind::magnetic_h, [](double x, double) { return x; }), {}, T), std::invalid_argument);
}

TEST_CASE("q_h parts: measure term uses |mu| and the 1/lambda factor") {
  const GridSpec g = GridSpec::square(1.0, 64);
  const auto T = make_test_field(g, bump(), SupportKind::compact_interior);
  auto h = field(g, FieldKind::magnetic_h, [](double x, double) { return std::exp(-std::abs(x)); });
  h.cuts.columns = {32};
  VorticityMeasure plus, minus;
  plus.line_part = LineMeasurePart{{Segment{{0, -1}, {0, 1}, {2.0}}}};
  minus.line_part = LineMeasurePart{{Segment{{0, -1}, {0, 1}, {-2.0}}}};
  const auto a = q_h_parts(h, plus, T), b = q_h_parts(h, minus, T);
  CHECK(a.measure == doctest::Approx(b.measure));
  CHECK(a.measure > 0);
  h.lambda = 2.0;
  const auto c = q_h_parts(h, plus, T);
  CHECK(c.total == doctest::Approx(c.field + 0.5 * c.measure));
}

TEST_CASE("stress tensors and their divergence") {
  const GridSpec g = GridSpec::square(1.0, 64);
  const auto one = field(g, FieldKind::magnetic_h, [](double, double) { return 1.0; });
  const auto T = stress_tensor(one);
  CHECK(T.t11[100] == doctest::Approx(-0.5));
  CHECK(T.t12[100] == doctest::Approx(0.0));
  CHECK(div_stress_residual(one) == 0.0);
  // S_U is constant for U = x.
  CHECK(div_stress_residual(field(g, FieldKind::nonmagnetic_U, [](double x, double) { return x; })) < 1e-12);
  // div T_h = grad h (Delta h - h): zero for cosh, not for h = x.
  CHECK(div_stress_residual(field(g, FieldKind::magnetic_h, [](double x, double) { return std::cosh(x); })) < 1e-3);
  CHECK(div_stress_residual(field(g, FieldKind::magnetic_h, [](double x, double) { return x; })) > 0.5);
}

TEST_CASE("holomorphy residual") {
  const GridSpec g = GridSpec::square(1.0, 64);
  CHECK(hol_residual(field(g, FieldKind::nonmagnetic_U, [](double x, double) { return x; })) == 0.0);
  // Re z^3: the residual is stencil error and decays as h^2.
  const auto cubic = [](double x, double y) { return x * x * x - 3 * x * y * y; };
  const double r64 = hol_residual(field(g, FieldKind::nonmagnetic_U, cubic));
  const double r128 = hol_residual(field(GridSpec::square(1.0, 128), FieldKind::nonmagnetic_U, cubic));
  CHECK(r64 < 0.1);
  CHECK(r64 / r128 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(hol_residual(field(g, FieldKind::nonmagnetic_U, [](double x, double y) { return x * x + y * y; })) > 5.0);
}

TEST_CASE("Iwaniec bookkeeping: complex and matrix forms agree") {
  const GridSpec g = GridSpec::square(1.0, 64);
  const auto U = field(g, FieldKind::nonmagnetic_U, [](double x, double y) { return x * x - y * y + 0.3 * x; });
  for (const auto& f : eta_samples(g, 42, 10)) {
    const auto v = iwaniec_lhs(U, make_test_field(g, f, SupportKind::compact_interior));
    CHECK(v.minus_complex == doctest::Approx(v.minus_matrix).epsilon(1e-12));
    CHECK(v.plus_complex == doctest::Approx(v.plus_matrix).epsilon(1e-12));
    CHECK(v.minus_complex >= -1e-8);
  }
}

TEST_CASE("eta samples are reproducible and compactly supported") {
  const GridSpec g = GridSpec::square(1.0, 32);
  const auto a = eta_samples(g, 42, 12), b = eta_samples(g, 42, 12), c = eta_samples(g, 43, 12);
  REQUIRE(a.size() == 12);
  for (int r = 0; r < 12; ++r) {
    CHECK(a[r](0.1, -0.2).v[0] == b[r](0.1, -0.2).v[0]);
    CHECK_NOTHROW(make_test_field(g, a[r], SupportKind::compact_interior));
  }
  CHECK(a[0](0.1, 0.2).v[1] != c[0](0.1, 0.2).v[1]);
}

TEST_CASE("measure files round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "gllab_test_measure";
  std::filesystem::create_directories(dir);
  const GridSpec g = GridSpec::square(1.0, 8);
  VorticityMeasure mu;
  mu.ac_density = sample(g, [](double x, double y) { return x - y; });
  mu.line_part = LineMeasurePart{{Segment{{0, -1}, {0, 1}, {2.0}}, Segment{{-1, 0}, {1, 0}, {0.5, 1.0, 1.5}}}};
  write_field_file((dir / "ac.csv").string(), *mu.ac_density);
  write_measure_file((dir / "mu.json").string(), mu, "ac.csv");
  const auto back = read_measure_file((dir / "mu.json").string());
  REQUIRE(back.ac_density);
  REQUIRE(back.line_part);
  CHECK(back.ac_density->v == mu.ac_density->v);
  CHECK(back.line_part->segments.size() == 2);
  CHECK(back.line_part->segments[1].density == std::vector<double>{0.5, 1.0, 1.5});
  CHECK_THROWS(read_measure_file((dir / "missing.json").string()));
  std::filesystem::remove_all(dir);
}
