#include "gllab/caselab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gllab/parallel.hpp"

namespace gllab {

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec square_even(double L, int n, const char* what) {
  if (!(L > 0)) throw std::invalid_argument(std::string(what) + ": L must be positive");
  if (n < 8 || n % 2) throw std::invalid_argument(std::string(what) + ": n must be even and >= 8");
  return GridSpec::square(L, n);
}

}  // namespace

EtaFn prop41_eta(double L) {
  const double c = kPi / (2 * L);
  return [c](double x, double y) {
    const double cx = std::cos(c * x), sx = std::sin(c * x), cy = std::cos(c * y), sy = std::sin(c * y);
    EtaJet j;
    j.v = {cx * sy, -sx * cy};
    j.d[0] = {-c * sx * sy, c * cx * cy};
    j.d[1] = {-c * cx * cy, c * sx * sy};
    const double c2 = c * c;
    j.dd[0][0] = {-c2 * cx * sy, -c2 * sx * cy};
    j.dd[0][1] = {-c2 * sx * cy, -c2 * cx * sy};
    j.dd[1][0] = {c2 * sx * cy, c2 * cx * sy};
    j.dd[1][1] = {c2 * cx * sy, c2 * sx * cy};
    return j;
  };
}

Prop41Fields prop41_fields(double L, int n) {
  const GridSpec g = square_even(L, n, "prop41_fields");
  Prop41Fields f;
  f.h.values = sample(g, [](double x, double) { return std::exp(-std::abs(x)); });
  f.h.kind = FieldKind::magnetic_h;
  f.h.lambda = 1.0;
  f.h.cuts.columns = {n / 2};
  LineMeasurePart lp;
  Segment s;
  s.p0 = {0.0, -L};
  s.p1 = {0.0, L};
  // -h'' + h = 2 delta across x = 0 for h = e^{-|x|}
  s.density = {2.0};
  lp.segments.push_back(s);
  f.mu.line_part = lp;
  f.eta = make_test_field(g, prop41_eta(L), SupportKind::boundary_tangent);
  return f;
}

double prop41_weak_residual(double L, int n, int count, std::uint64_t seed, double density) {
  auto f = prop41_fields(L, n);
  f.mu.line_part->segments[0].density = {density};
  const auto& g = f.h.values.grid;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> mode(1, 4);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double worst = 0;
  for (int s = 0; s < count; ++s) {
    struct Term {
      int k, m;
      double a;
    };
    std::vector<Term> terms;
    for (int t = 0; t < 3; ++t) terms.push_back({mode(rng), mode(rng), coef(rng)});
    // phi = sum a sin(k pi (x+L)/2L) sin(m pi (y+L)/2L) and its gradient
    auto phi = [&](double x, double y, double& v, double& px, double& py) {
      v = px = py = 0;
      for (const auto& t : terms) {
        const double kx = t.k * kPi / (2 * L), ky = t.m * kPi / (2 * L);
        const double X = kx * (x + L), Y = ky * (y + L);
        v += t.a * std::sin(X) * std::sin(Y);
        px += t.a * kx * std::cos(X) * std::sin(Y);
        py += t.a * ky * std::sin(X) * std::cos(Y);
      }
    };
    std::vector<double> pv(g.size()), ppx(g.size()), ppy(g.size()), norm(g.size());
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        const auto k = g.idx(i, j);
        phi(g.x(i), g.y(j), pv[k], ppx[k], ppy[k]);
        norm[k] = pv[k] * pv[k] + ppx[k] * ppx[k] + ppy[k] * ppy[k];
      }
    const double area = integrate_gradient_form(f.h.values, f.h.cuts, [&](std::size_t k, double hx, double hy) {
      return hx * ppx[k] + hy * ppy[k] + f.h.values[k] * pv[k];
    });
    const double line = line_integral(
        [&](double x, double y) {
          double v, a, b;
          phi(x, y, v, a, b);
          return v;
        },
        *f.mu.line_part, g.hy(), LineWeight::signed_density);
    worst = std::max(worst, std::abs(area - line) / std::sqrt(integrate(g, norm)));
  }
  return worst;
}

double threshold_bracket(double L) {
  const double L2 = L * L, p2 = kPi * kPi;
  return -4 * L2 + p2 - std::exp(-2 * L) * (12 * L2 + p2);
}

double q_closed(double L) {
  if (!(L > 0)) throw std::invalid_argument("q_closed: L must be positive");
  const double p2 = kPi * kPi;
  return p2 / (4 * L * (4 * L * L + p2)) * threshold_bracket(L);
}

double critical_L(double tol) {
  double a = 0.5, b = 3.0;
  double fa = threshold_bracket(a);
  const double fb = threshold_bracket(b);
  if (!(fa > 0 && fb < 0)) throw std::runtime_error("critical_L: no sign change on [0.5, 3]");
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    const double fm = threshold_bracket(m);
    if (fm == 0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

QuadratureComparison q_quadrature_vs_closed(double L, int n) {
  const auto f = prop41_fields(L, n);
  const auto parts = q_h_parts(f.h, f.mu, f.eta);
  QuadratureComparison r;
  r.L = L;
  r.q_closed = q_closed(L);
  r.q_quadrature = parts.total;
  r.defect = std::abs(parts.total - r.q_closed);
  r.measure_term = parts.measure;
  return r;
}

Certificate certificate_check(double L, double alpha2, double beta2) {
  if (!(L > 0)) throw std::invalid_argument("certificate_check: L must be positive");
  if (!(beta2 > 0.5 && beta2 < 1)) throw std::invalid_argument("certificate_check: beta2 must lie in (1/2, 1)");
  if (!(alpha2 > 0)) throw std::invalid_argument("certificate_check: alpha2 must be positive");
  Certificate c;
  c.margins = {2 - 2 / alpha2 - 1 / beta2, 1.0, 1 - beta2 - 4 * alpha2 * L * (std::exp(2 * L) - 1)};
  c.ok = c.margins[0] > 0 && c.margins[1] > 0 && c.margins[2] > 0;
  return c;
}

double poincare_check(double L, const std::vector<PoincareSample>& samples, int n) {
  const GridSpec g = square_even(L, n, "poincare_check");
  const double C = 2 * L * (std::exp(2 * L) - 1);
  double worst = 0;
  std::vector<double> lhs(g.size()), rhs(g.size());
  for (const auto& s : samples) {
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        const auto k = g.idx(i, j);
        const double w = std::exp(-2 * std::abs(g.x(i)));
        const auto v = s(g.x(i), g.y(j));
        lhs[k] = w * v[0] * v[0];
        rhs[k] = w * v[1] * v[1];
      }
    const double a = integrate(g, lhs), b = integrate(g, rhs);
    if (b == 0) {
      if (a > 0) throw std::domain_error("poincare_check: zero right side with nonzero left side");
      continue;
    }
    worst = std::max(worst, a / (C * b));
  }
  return worst;
}

std::vector<PoincareSample> poincare_samples(double L, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<PoincareSample> out;
  for (int s = 0; s < count; ++s) {
    std::array<double, 4> a;
    for (double& v : a) v = coef(rng);
    const double g0 = 1 + 0.5 * coef(rng), g1 = coef(rng);
    const double gk = (1 + static_cast<int>(3 * (coef(rng) + 1))) * kPi / (2 * L);
    out.push_back([=](double x, double y) {
      double v = 0, d = 0;
      for (int k = 1; k <= 4; ++k) {
        const double w = k * kPi / (2 * L);
        v += a[k - 1] * std::sin(w * (x + L));
        d += a[k - 1] * w * std::cos(w * (x + L));
      }
      const double gy = g0 + g1 * std::sin(gk * y);
      return std::array<double, 2>{v * gy, d * gy};
    });
  }
  return out;
}

SweepResult random_eta_sweep(double L, int count, int n, std::uint64_t seed, bool include_special) {
  SweepResult r;
  r.count = count;
  if (count <= 0 && !include_special) return r;
  const auto f = prop41_fields(L, n);
  const auto& g = f.h.values.grid;
  const auto fns = count > 0 ? eta_samples(g, seed, count) : std::vector<EtaFn>{};
  std::vector<double> q(fns.size());
  parallel_for(fns.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s)
      q[s] = q_h(f.h, f.mu, make_test_field(g, fns[s], SupportKind::compact_interior));
  });
  if (include_special) q.push_back(q_h(f.h, f.mu, f.eta));
  for (std::size_t s = 0; s < q.size(); ++s)
    if (q[s] < r.min_q) {
      r.min_q = q[s];
      r.argmin = static_cast<int>(s);
    }
  return r;
}

Monotone1D monotone_1d_check(const Fn1D& V, const std::function<double(double)>& fprime,
                             const std::function<double(double)>& fsecond, double a, double b, int n) {
  if (!(a < b) || n < 4) throw std::invalid_argument("monotone_1d_check: need a < b and n >= 4");
  const double h = (b - a) / n;
  Monotone1D r;
  std::vector<Jet1D> v(n + 1);
  for (int i = 0; i <= n; ++i) v[i] = V(a + i * h);
  const double sgn = v[1].v - v[0].v;
  for (int i = 0; i < n; ++i) {
    const double d = v[i + 1].v - v[i].v;
    if (!(d * sgn > 0)) throw std::invalid_argument("monotone_1d_check: V is not strictly monotone");
  }
  for (int i = 0; i <= n; ++i) r.el_residual = std::max(r.el_residual, std::abs(-v[i].dd + fprime(v[i].v)));
  if (r.el_residual > 1e-6) throw std::invalid_argument("monotone_1d_check: V is not a critical point");

  // interior unknowns 1..n-1
  const int m = n - 1;
  const double off = -1 / (h * h);
  std::vector<double> diag(m);
  double gersh = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    diag[i] = 2 / (h * h) + fsecond(v[i + 1].v);
    const double radius = (i > 0 ? -off : 0) + (i + 1 < m ? -off : 0);
    gersh = std::min(gersh, diag[i] - radius);
  }
  const double shift = gersh - 1e-3 * (1 + std::abs(gersh));
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (int i = 0; i < m; ++i) {
      y[i] = diag[i] * x[i];
      if (i > 0) y[i] += off * x[i - 1];
      if (i + 1 < m) y[i] += off * x[i + 1];
    }
  };
  // Thomas solve of (T - shift) y = x; the shifted matrix is diagonally dominant
  std::vector<double> cp(m), dp(m);
  auto solve = [&](const std::vector<double>& x, std::vector<double>& y) {
    double beta = diag[0] - shift;
    cp[0] = off / beta;
    dp[0] = x[0] / beta;
    for (int i = 1; i < m; ++i) {
      beta = diag[i] - shift - off * cp[i - 1];
      cp[i] = off / beta;
      dp[i] = (x[i] - off * dp[i - 1]) / beta;
    }
    y[m - 1] = dp[m - 1];
    for (int i = m - 2; i >= 0; --i) y[i] = dp[i] - cp[i] * y[i + 1];
  };
  std::vector<double> x(m, 1.0), y(m), tx(m);
  double lam = 0, prev = std::numeric_limits<double>::infinity();
  for (r.iterations = 1; r.iterations <= 100000; ++r.iterations) {
    solve(x, y);
    double nrm = 0;
    for (double t : y) nrm += t * t;
    nrm = std::sqrt(nrm);
    for (int i = 0; i < m; ++i) x[i] = y[i] / nrm;
    apply(x, tx);
    lam = 0;
    for (int i = 0; i < m; ++i) lam += x[i] * tx[i];
    if (std::abs(lam - prev) <= 1e-14 * (1 + std::abs(lam))) break;
    prev = lam;
  }
  r.min_eigenvalue = lam;
  return r;
}

Identity1D inner_identity_1d(const Fn1D& V, const Fn1D& eta, double a, double b, int n, double dt) {
  Identity1D r;
  r.full_form = inner_second_1d_closed(V, eta, a, b, n);
  r.half_form = 0.5 * r.full_form;
  r.numeric = inner_variations_1d_numeric(V, eta, a, b, n, dt).d2_rich;
  return r;
}

}  // namespace gllab
