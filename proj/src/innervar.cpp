#include "gllab/innervar.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "gllab/parallel.hpp"

namespace gllab {

namespace {

using cplx = std::complex<double>;

// Scalar 2D jet: value, gradient, Hessian.
struct SJ {
  double v = 0;
  std::array<double, 2> d{};
  std::array<std::array<double, 2>, 2> dd{};
};

SJ operator*(const SJ& a, const SJ& b) {
  SJ r;
  r.v = a.v * b.v;
  for (int j = 0; j < 2; ++j) r.d[j] = a.d[j] * b.v + a.v * b.d[j];
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      r.dd[j][k] = a.dd[j][k] * b.v + a.d[j] * b.d[k] + a.d[k] * b.d[j] + a.v * b.dd[j][k];
  return r;
}

// Jet of a function of x alone (axis 0) or y alone (axis 1) from its 1D value and derivatives.
SJ along(int axis, double v, double d, double dd) {
  SJ r;
  r.v = v;
  r.d[axis] = d;
  r.dd[axis][axis] = dd;
  return r;
}

EtaJet pack(const SJ& e1, const SJ& e2) {
  EtaJet j;
  const SJ* c[2] = {&e1, &e2};
  for (int i = 0; i < 2; ++i) {
    j.v[i] = c[i]->v;
    j.d[i] = c[i]->d;
    j.dd[i] = c[i]->dd;
  }
  return j;
}

SJ component(const EtaJet& j, int i) {
  SJ r;
  r.v = j.v[i];
  r.d = j.d[i];
  r.dd = j.dd[i];
  return r;
}

// sin^4 of pi (x - x0) / (x1 - x0) on [x0, x1], zero outside. C3 at the ends.
void sin4(double x, double x0, double x1, double& v, double& d, double& dd) {
  v = d = dd = 0;
  if (x <= x0 || x >= x1) return;
  const double c = std::numbers::pi / (x1 - x0);
  const double s = std::sin(c * (x - x0)), co = std::cos(c * (x - x0));
  v = s * s * s * s;
  d = 4 * s * s * s * co * c;
  dd = c * c * (12 * s * s * co * co - 4 * s * s * s * s);
}

// quintic smoothstep on [0, 1]
void smoothstep(double s, double& v, double& d, double& dd) {
  if (s <= 0) {
    v = d = dd = 0;
    return;
  }
  if (s >= 1) {
    v = 1;
    d = dd = 0;
    return;
  }
  v = s * s * s * (10 - 15 * s + 6 * s * s);
  d = 30 * s * s * (1 - s) * (1 - s);
  dd = 60 * s * (1 - s) * (1 - 2 * s);
}

// C2 ramp up over [lo + 2h, lo + 6h] and down over [hi - 6h, hi - 2h]
void ramp(double x, double lo, double hi, double h, double& v, double& d, double& dd) {
  double a, ad, add, b, bd, bdd;
  const double w = 4 * h;
  smoothstep((x - lo - 2 * h) / w, a, ad, add);
  smoothstep((hi - 2 * h - x) / w, b, bd, bdd);
  ad /= w, add /= w * w;
  bd = -bd / w, bdd /= w * w;
  v = a * b;
  d = ad * b + a * bd;
  dd = add * b + 2 * ad * bd + a * bdd;
}

using Mat = std::array<double, 4>;  // row-major 2x2

Mat matmul(const Mat& a, const Mat& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}
double det(const Mat& a) { return a[0] * a[3] - a[1] * a[2]; }

// RK4 for x' = s eta(x), J' = s D eta(x) J over time t.
void integrate_flow(const EtaFn& eta, double s, double t, double& x, double& y, Mat& J) {
  const double h = t / kFlowSubsteps;
  auto rhs = [&](double px, double py, const Mat& PJ, double& fx, double& fy, Mat& fJ) {
    const EtaJet e = eta(px, py);
    fx = s * e.v[0];
    fy = s * e.v[1];
    const Mat D{s * e.d[0][0], s * e.d[0][1], s * e.d[1][0], s * e.d[1][1]};
    fJ = matmul(D, PJ);
  };
  for (int n = 0; n < kFlowSubsteps; ++n) {
    double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
    Mat K1, K2, K3, K4, T;
    rhs(x, y, J, k1x, k1y, K1);
    for (int q = 0; q < 4; ++q) T[q] = J[q] + 0.5 * h * K1[q];
    rhs(x + 0.5 * h * k1x, y + 0.5 * h * k1y, T, k2x, k2y, K2);
    for (int q = 0; q < 4; ++q) T[q] = J[q] + 0.5 * h * K2[q];
    rhs(x + 0.5 * h * k2x, y + 0.5 * h * k2y, T, k3x, k3y, K3);
    for (int q = 0; q < 4; ++q) T[q] = J[q] + h * K3[q];
    rhs(x + h * k3x, y + h * k3y, T, k4x, k4y, K4);
    x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    for (int q = 0; q < 4; ++q) J[q] += h / 6 * (K1[q] + 2 * K2[q] + 2 * K3[q] + K4[q]);
  }
}

double energy_of(const GLState& s, const GLParams& p, Functional which) {
  return which == Functional::gl ? gl_energy(s, p) : e_energy(s.u, p.epsilon);
}

InnerDifferences differences(double dt, const std::function<double(double)>& G) {
  InnerDifferences r;
  r.dt = dt;
  const double g0 = G(0), gp = G(dt), gm = G(-dt), hp = G(dt / 2), hm = G(-dt / 2);
  r.d1 = (gp - gm) / (2 * dt);
  r.d2 = (gp - 2 * g0 + gm) / (dt * dt);
  r.d1_half = (hp - hm) / dt;
  r.d2_half = (hp - 2 * g0 + hm) / (dt * dt / 4);
  r.d1_rich = (4 * r.d1_half - r.d1) / 3;
  r.d2_rich = (4 * r.d2_half - r.d2) / 3;
  return r;
}

struct Derivs {
  ComplexField ux, uy;
};

Derivs plain_gradient(const ComplexField& u) {
  const auto& g = u.grid;
  Derivs d{ComplexField(g), ComplexField(g)};
  apply_dx(g, u.re.data(), d.ux.re.data());
  apply_dx(g, u.im.data(), d.ux.im.data());
  apply_dy(g, u.re.data(), d.uy.re.data());
  apply_dy(g, u.im.data(), d.uy.im.data());
  return d;
}

// Shared body of the closed inner variations. M1, M2 are the (covariant) derivatives, h the field
// (null for E), W the potential density (1/2eps^2)(1-|u|^2)^2.
struct InnerIntegrands {
  double first = 0, first_zeta = 0, second_rest = 0;
};

InnerIntegrands inner_integrals(const GridSpec& g, const ComplexField& M1, const ComplexField& M2,
                                const std::vector<double>* h, const std::vector<double>& W,
                                const TestVectorField& eta) {
  std::vector<double> f1(g.size()), fz(g.size()), f2(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx m[2] = {{M1.re[k], M1.im[k]}, {M2.re[k], M2.im[k]}};
    double G[2][2];  // M^T M
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) G[j][l] = std::real(std::conj(m[j]) * m[l]);
    const double m2 = G[0][0] + G[1][1];
    const double h2 = h ? (*h)[k] * (*h)[k] : 0.0;
    const double e = 0.5 * (m2 - h2 + W[k]);
    auto first = [&](const std::array<double, 4>& D) {
      return e * (D[0] + D[3]) - (G[0][0] * D[0] + G[0][1] * D[1] + G[1][0] * D[2] + G[1][1] * D[3]);
    };
    const auto& D = eta.deta[k];
    f1[k] = first(D);
    fz[k] = first(eta.dzeta[k]);
    // |M D eta|^2 with (M D eta)_c = sum_j M_j d_c eta_j
    double mdn = 0;
    for (int c = 0; c < 2; ++c) mdn += std::norm(m[0] * D[c] + m[1] * D[2 + c]);
    const double dt = D[0] * D[3] - D[1] * D[2];
    const double dv = D[0] + D[3];
    f2[k] = mdn - m2 * dt + h2 * (dv * dv - dt) + W[k] * dt;
  }
  return {integrate(g, f1), integrate(g, fz), integrate(g, f2)};
}

std::vector<double> potential_density(const ComplexField& u, double epsilon) {
  std::vector<double> W(u.re.size());
  const double c = 1.0 / (2 * epsilon * epsilon);
  for (std::size_t k = 0; k < W.size(); ++k) {
    const double r = 1 - u.re[k] * u.re[k] - u.im[k] * u.im[k];
    W[k] = c * r * r;
  }
  return W;
}

void check_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace

namespace {
TestVectorField build_field(const GridSpec& g, EtaFn fn, SupportKind kind, bool validate) {
  TestVectorField t;
  t.fn = fn;
  t.support = kind;
  t.eta = VectorField(g);
  t.zeta = VectorField(g);
  t.deta.assign(g.size(), {});
  t.dzeta.assign(g.size(), {});
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const auto k = g.idx(i, j);
      const EtaJet e = fn(g.x(i), g.y(j));
      t.eta.x[k] = e.v[0];
      t.eta.y[k] = e.v[1];
      double z[2];
      for (int a = 0; a < 2; ++a) z[a] = e.d[a][0] * e.v[0] + e.d[a][1] * e.v[1];
      t.zeta.x[k] = z[0];
      t.zeta.y[k] = z[1];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          t.deta[k][2 * a + b] = e.d[a][b];
          double s = 0;
          for (int c = 0; c < 2; ++c) s += e.dd[a][b][c] * e.v[c] + e.d[a][c] * e.d[c][b];
          t.dzeta[k][2 * a + b] = s;
        }
      double fro = 0;
      for (double v : t.deta[k]) fro += v * v;
      t.max_deta = std::max(t.max_deta, std::sqrt(fro));
      if (!validate) continue;
      if (kind == SupportKind::compact_interior && g.boundary_depth(i, j) <= 2 &&
          (std::abs(e.v[0]) > 1e-12 || std::abs(e.v[1]) > 1e-12))
        throw std::invalid_argument("make_test_field: compact field is nonzero within 2 cells of the boundary");
      if (kind == SupportKind::boundary_tangent) {
        if ((i == 0 || i == g.nx) && std::abs(e.v[0]) > 1e-12)
          throw std::invalid_argument("make_test_field: field is not tangent on a vertical side");
        if ((j == 0 || j == g.ny) && std::abs(e.v[1]) > 1e-12)
          throw std::invalid_argument("make_test_field: field is not tangent on a horizontal side");
      }
    }
  require_finite(t.eta.x, "make_test_field");
  require_finite(t.eta.y, "make_test_field");
  return t;
}
}  // namespace

TestVectorField make_test_field(const GridSpec& g, EtaFn fn, SupportKind kind) {
  return build_field(g, std::move(fn), kind, true);
}

EtaFn zero_field() {
  return [](double, double) { return EtaJet{}; };
}

EtaFn constant_field(double c1, double c2) {
  return [=](double, double) {
    EtaJet j;
    j.v = {c1, c2};
    return j;
  };
}

EtaFn linear_field(double m11, double m12, double m21, double m22, double b1, double b2) {
  return [=](double x, double y) {
    EtaJet j;
    j.v = {m11 * x + m12 * y + b1, m21 * x + m22 * y + b2};
    j.d = {{{m11, m12}, {m21, m22}}};
    return j;
  };
}

EtaFn bump_field(const BumpSpec& b) {
  if (!(b.x0 < b.x1 && b.y0 < b.y1)) throw std::invalid_argument("bump_field: empty box");
  return [b](double x, double y) {
    double v, d, dd;
    sin4(x, b.x0, b.x1, v, d, dd);
    const SJ ex = along(0, v, d, dd);
    sin4(y, b.y0, b.y1, v, d, dd);
    const SJ env = ex * along(1, v, d, dd);
    if (env.v == 0 && env.d[0] == 0 && env.d[1] == 0) return EtaJet{};
    SJ wave;
    const double ph = b.kx * x + b.ky * y + b.phase;
    wave.v = std::sin(ph);
    wave.d = {b.kx * std::cos(ph), b.ky * std::cos(ph)};
    const double k[2] = {b.kx, b.ky};
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) wave.dd[p][q] = -k[p] * k[q] * wave.v;
    SJ g1 = wave, g2 = wave;
    g1.v = b.a1 + b.b1 * wave.v;
    g2.v = b.a2 + b.b2 * wave.v;
    for (int p = 0; p < 2; ++p) {
      g1.d[p] = b.b1 * wave.d[p];
      g2.d[p] = b.b2 * wave.d[p];
      for (int q = 0; q < 2; ++q) {
        g1.dd[p][q] = b.b1 * wave.dd[p][q];
        g2.dd[p][q] = b.b2 * wave.dd[p][q];
      }
    }
    return pack(env * g1, env * g2);
  };
}

EtaFn sum_field(std::vector<EtaFn> parts) {
  return [parts = std::move(parts)](double x, double y) {
    EtaJet s;
    for (const auto& f : parts) {
      const EtaJet e = f(x, y);
      for (int i = 0; i < 2; ++i) {
        s.v[i] += e.v[i];
        for (int j = 0; j < 2; ++j) {
          s.d[i][j] += e.d[i][j];
          for (int k = 0; k < 2; ++k) s.dd[i][j][k] += e.dd[i][j][k];
        }
      }
    }
    return s;
  };
}

EtaFn cutoff_field(const GridSpec& g, EtaFn fn) {
  return [g, fn = std::move(fn)](double x, double y) {
    double v, d, dd;
    ramp(x, g.x_min, g.x_max, g.hx(), v, d, dd);
    const SJ cx = along(0, v, d, dd);
    ramp(y, g.y_min, g.y_max, g.hy(), v, d, dd);
    const SJ chi = cx * along(1, v, d, dd);
    if (chi.v == 0 && chi.d[0] == 0 && chi.d[1] == 0) return EtaJet{};
    const EtaJet e = fn(x, y);
    return pack(chi * component(e, 0), chi * component(e, 1));
  };
}

EtaFn random_bump_field(std::uint64_t seed, double x0, double x1, double y0, double y1, int terms, double amplitude) {
  if (terms < 1) throw std::invalid_argument("random_bump_field: terms must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u01(rng); };
  std::vector<EtaFn> parts;
  const double wx = x1 - x0, wy = y1 - y0;
  for (int n = 0; n < terms; ++n) {
    BumpSpec b;
    b.x0 = x0 + uni(0, 0.3) * wx;
    b.x1 = x1 - uni(0, 0.3) * wx;
    b.y0 = y0 + uni(0, 0.3) * wy;
    b.y1 = y1 - uni(0, 0.3) * wy;
    b.a1 = amplitude * uni(-1, 1);
    b.a2 = amplitude * uni(-1, 1);
    b.b1 = amplitude * uni(-1, 1);
    b.b2 = amplitude * uni(-1, 1);
    b.kx = uni(-3, 3) * std::numbers::pi / wx;
    b.ky = uni(-3, 3) * std::numbers::pi / wy;
    b.phase = uni(0, 2 * std::numbers::pi);
    parts.push_back(bump_field(b));
  }
  return sum_field(std::move(parts));
}

std::array<double, 2> flow_point(const EtaFn& eta, double x, double y, double t) {
  Mat J{1, 0, 0, 1};
  integrate_flow(eta, 1.0, t, x, y, J);
  return {x, y};
}

FlowMap flow(const TestVectorField& eta, double t) {
  const auto& g = eta.grid();
  if (std::abs(t) * eta.max_deta > kFlowGuard) {
    std::ostringstream msg;
    msg << "flow: |t| max|D eta| = " << std::abs(t) * eta.max_deta << " exceeds the guard " << kFlowGuard;
    throw std::invalid_argument(msg.str());
  }
  FlowMap fm;
  fm.grid = g;
  fm.t = t;
  fm.fwd = VectorField(g);
  fm.inv = VectorField(g);
  fm.jfwd.assign(g.size(), {});
  fm.jinv.assign(g.size(), {});
  std::vector<double> comp(g.size()), dets(g.size());
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const int i = static_cast<int>(k % (g.nx + 1)), j = static_cast<int>(k / (g.nx + 1));
      double x = g.x(i), y = g.y(j);
      Mat J{1, 0, 0, 1};
      integrate_flow(eta.fn, 1.0, t, x, y, J);
      fm.fwd.x[k] = x, fm.fwd.y[k] = y, fm.jfwd[k] = J;
      Mat Jb{1, 0, 0, 1};
      integrate_flow(eta.fn, -1.0, t, x, y, Jb);
      comp[k] = std::hypot(x - g.x(i), y - g.y(j));
      double xi = g.x(i), yi = g.y(j);
      Mat Ji{1, 0, 0, 1};
      integrate_flow(eta.fn, -1.0, t, xi, yi, Ji);
      fm.inv.x[k] = xi, fm.inv.y[k] = yi, fm.jinv[k] = Ji;
      dets[k] = std::min(det(J), det(Ji));
    }
  });
  fm.composition_error = max_abs(comp);
  const double dmin = *std::min_element(dets.begin(), dets.end());
  if (!(dmin > 0)) throw NumericalError("flow: det D Phi_t <= 0", dmin);
  if (!(fm.composition_error <= 1e-8))
    throw NumericalError("flow: composition error above 1e-8", fm.composition_error);
  return fm;
}

GLState pullback_state(const GLState& s, const FlowMap& fm, int* clamped) {
  check_grid(s.grid(), fm.grid, "pullback_state");
  const auto& g = fm.grid;
  GLState out(g);
  int nclamp = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double zx = fm.inv.x[k], zy = fm.inv.y[k];
    bool c = false;
    out.u.re[k] = interp(g, s.u.re, zx, zy, &c);
    nclamp += c;
    out.u.im[k] = interp(g, s.u.im, zx, zy);
    const double a1 = interp(g, s.A.x, zx, zy), a2 = interp(g, s.A.y, zx, zy);
    const auto& J = fm.jinv[k];
    out.A.x[k] = J[0] * a1 + J[2] * a2;
    out.A.y[k] = J[1] * a1 + J[3] * a2;
  }
  if (clamped)
    *clamped = nclamp;
  else if (nclamp > 0)
    std::clog << "warning: pullback_state clamped " << nclamp << " samples to the domain\n";
  return out;
}

GLState pullback_state(const StateFn& s, const FlowMap& fm) {
  const auto& g = fm.grid;
  GLState out(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const StatePoint q = s(fm.inv.x[k], fm.inv.y[k]);
    const auto& J = fm.jinv[k];
    out.u.re[k] = q.u_re;
    out.u.im[k] = q.u_im;
    out.A.x[k] = J[0] * q.a1 + J[2] * q.a2;
    out.A.y[k] = J[1] * q.a1 + J[3] * q.a2;
  }
  return out;
}

double pullback_field_defect(const GLState& s, const FlowMap& fm, int margin) {
  const auto& g = fm.grid;
  const auto ht = induced_field(pullback_state(s, fm));
  const auto h = induced_field(s);
  double m = 0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      if (g.boundary_depth(i, j) < margin) continue;
      const auto k = g.idx(i, j);
      const double expect = interp(h, fm.inv.x[k], fm.inv.y[k]) * det(fm.jinv[k]);
      m = std::max(m, std::abs(ht.v[k] - expect));
    }
  return m;
}

InnerDifferences numeric_inner_variations(const GLState& s, const GLParams& p, const TestVectorField& eta, double dt,
                                          Functional which) {
  p.validate();
  check_grid(s.grid(), eta.grid(), "numeric_inner_variations");
  return differences(dt, [&](double t) {
    if (t == 0) return energy_of(s, p, which);
    int clamped = 0;
    return energy_of(pullback_state(s, flow(eta, t), &clamped), p, which);
  });
}

InnerDifferences numeric_inner_variations(const StateFn& s, const GLParams& p, const TestVectorField& eta, double dt,
                                          Functional which, bool grid_richardson) {
  p.validate();
  auto run = [&](const TestVectorField& e) {
    return differences(dt, [&](double t) {
      if (t == 0) return energy_of(sample_state(e.grid(), s), p, which);
      return energy_of(pullback_state(s, flow(e, t)), p, which);
    });
  };
  InnerDifferences r = run(eta);
  if (grid_richardson) {
    const auto& g = eta.grid();
    if (g.nx % 2 || g.ny % 2 || g.nx < 16 || g.ny < 16)
      throw std::invalid_argument("numeric_inner_variations: grid Richardson needs even nx, ny >= 16");
    const GridSpec coarse(g.x_min, g.x_max, g.y_min, g.y_max, g.nx / 2, g.ny / 2);
    // same analytic field; the fine grid already enforced the support invariant
    const auto c = run(build_field(coarse, eta.fn, eta.support, false));
    r.d1_grid = (4 * r.d1_rich - c.d1_rich) / 3;
    r.d2_grid = (4 * r.d2_rich - c.d2_rich) / 3;
  }
  return r;
}

double closed_first_inner(const GLState& s, const GLParams& p, const TestVectorField& eta) {
  p.validate();
  check_grid(s.grid(), eta.grid(), "closed_first_inner");
  const auto c = covariant_gradient(s);
  const auto h = induced_field(s);
  return inner_integrals(s.grid(), c.d1, c.d2, &h.v, potential_density(s.u, p.epsilon), eta).first;
}

double closed_second_inner(const GLState& s, const GLParams& p, const TestVectorField& eta) {
  p.validate();
  check_grid(s.grid(), eta.grid(), "closed_second_inner");
  const auto c = covariant_gradient(s);
  const auto h = induced_field(s);
  const auto r = inner_integrals(s.grid(), c.d1, c.d2, &h.v, potential_density(s.u, p.epsilon), eta);
  return r.first_zeta + r.second_rest;
}

InnerPair closed_inner_E(const ComplexField& u, double epsilon, const TestVectorField& eta) {
  if (!(epsilon > 0)) throw std::invalid_argument("closed_inner_E: epsilon must be positive");
  check_grid(u.grid, eta.grid(), "closed_inner_E");
  const auto d = plain_gradient(u);
  const auto r = inner_integrals(u.grid, d.ux, d.uy, nullptr, potential_density(u, epsilon), eta);
  return {r.first, r.first_zeta + r.second_rest};
}

InnerPair outer_variations(const GLState& s, const GLParams& p, const ComplexField& v, const VectorField& B) {
  p.validate();
  const auto& g = s.grid();
  const auto J = covariant_jet(s, v, B);
  const auto h = induced_field(s);
  const auto cb = curl(B);
  const double ie = 1.0 / (p.epsilon * p.epsilon);
  std::vector<double> f1(g.size()), f2(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    double a = 0, b = 0;
    const ComplexField* ms[2] = {&J.m.d1, &J.m.d2};
    const ComplexField* ns[2] = {&J.n.d1, &J.n.d2};
    const ComplexField* ps[2] = {&J.p2.d1, &J.p2.d2};
    for (int c = 0; c < 2; ++c) {
      const cplx m(ms[c]->re[k], ms[c]->im[k]), n(ns[c]->re[k], ns[c]->im[k]), q(ps[c]->re[k], ps[c]->im[k]);
      a += std::real(std::conj(m) * n);
      b += std::norm(n) + std::real(std::conj(m) * q);
    }
    const double r = 1 - s.u.re[k] * s.u.re[k] - s.u.im[k] * s.u.im[k];
    const double uv = s.u.re[k] * v.re[k] + s.u.im[k] * v.im[k];
    const double vv = v.re[k] * v.re[k] + v.im[k] * v.im[k];
    f1[k] = a - ie * r * uv + (h.v[k] - p.h_ex) * cb.v[k];
    f2[k] = b + cb.v[k] * cb.v[k] + 2 * ie * uv * uv - ie * r * vv;
  }
  return {integrate(g, f1), integrate(g, f2)};
}

InnerPair outer_variations_E(const ComplexField& u, double epsilon, const ComplexField& v) {
  if (!(epsilon > 0)) throw std::invalid_argument("outer_variations_E: epsilon must be positive");
  check_grid(u.grid, v.grid, "outer_variations_E");
  const auto& g = u.grid;
  const auto du = plain_gradient(u), dv = plain_gradient(v);
  const double ie = 1.0 / (epsilon * epsilon);
  std::vector<double> f1(g.size()), f2(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double a = du.ux.re[k] * dv.ux.re[k] + du.ux.im[k] * dv.ux.im[k] + du.uy.re[k] * dv.uy.re[k] +
                     du.uy.im[k] * dv.uy.im[k];
    const double b = dv.ux.re[k] * dv.ux.re[k] + dv.ux.im[k] * dv.ux.im[k] + dv.uy.re[k] * dv.uy.re[k] +
                     dv.uy.im[k] * dv.uy.im[k];
    const double r = 1 - u.re[k] * u.re[k] - u.im[k] * u.im[k];
    const double uv = u.re[k] * v.re[k] + u.im[k] * v.im[k];
    const double vv = v.re[k] * v.re[k] + v.im[k] * v.im[k];
    f1[k] = a - ie * r * uv;
    f2[k] = b + 2 * ie * uv * uv - ie * r * vv;
  }
  return {integrate(g, f1), integrate(g, f2)};
}

LinkCheck inner_outer_link_check(const GLState& s, const GLParams& p, const TestVectorField& eta) {
  p.validate();
  const auto& g = s.grid();
  check_grid(g, eta.grid(), "inner_outer_link_check");
  // first and second grid derivatives of the four real components u_re, u_im, A_1, A_2
  const std::vector<double>* comp[4] = {&s.u.re, &s.u.im, &s.A.x, &s.A.y};
  std::vector<double> d[4][2], dd[4][2][2];
  for (int c = 0; c < 4; ++c) {
    for (int a = 0; a < 2; ++a) d[c][a].resize(g.size());
    apply_dx(g, comp[c]->data(), d[c][0].data());
    apply_dy(g, comp[c]->data(), d[c][1].data());
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) dd[c][a][b].resize(g.size());
    apply_dx(g, d[c][0].data(), dd[c][0][0].data());
    apply_dy(g, d[c][0].data(), dd[c][0][1].data());
    apply_dx(g, d[c][1].data(), dd[c][1][0].data());
    apply_dy(g, d[c][1].data(), dd[c][1][1].data());
    // symmetrize the mixed derivative
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double m = 0.5 * (dd[c][0][1][k] + dd[c][1][0][k]);
      dd[c][0][1][k] = dd[c][1][0][k] = m;
    }
  }
  ComplexField v1(g), v2(g);
  VectorField B1(g), B2(g);
  double* v1c[2] = {v1.re.data(), v1.im.data()};
  double* v2c[2] = {v2.re.data(), v2.im.data()};
  double* B1c[2] = {B1.x.data(), B1.y.data()};
  double* B2c[2] = {B2.x.data(), B2.y.data()};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double e[2] = {eta.eta.x[k], eta.eta.y[k]};
    const double z[2] = {eta.zeta.x[k], eta.zeta.y[k]};
    const auto& De = eta.deta[k];
    const auto& Dz = eta.dzeta[k];
    const double A[2] = {s.A.x[k], s.A.y[k]};
    for (int c = 0; c < 4; ++c) {
      double first = 0, second = 0, along_zeta = 0;
      for (int a = 0; a < 2; ++a) {
        first += d[c][a][k] * e[a];
        along_zeta += d[c][a][k] * z[a];
        for (int b = 0; b < 2; ++b) second += dd[c][a][b][k] * e[a] * e[b];
      }
      if (c < 2) {
        v1c[c][k] = -first;
        v2c[c][k] = second + along_zeta;
      } else {
        const int i = c - 2;
        // (D eta^T A)_i = sum_a d_i eta_a A_a, likewise for zeta
        const double etA = De[i] * A[0] + De[2 + i] * A[1];
        const double ztA = Dz[i] * A[0] + Dz[2 + i] * A[1];
        // (D eta^T (DA.eta))_i
        double cross = 0;
        for (int a = 0; a < 2; ++a) {
          double dAa = 0;
          for (int b = 0; b < 2; ++b) dAa += d[2 + a][b][k] * e[b];
          cross += De[2 * a + i] * dAa;
        }
        B1c[i][k] = -first - etA;
        B2c[i][k] = second + along_zeta + ztA + 2 * cross;
      }
    }
  }
  LinkCheck r;
  const auto o1 = outer_variations(s, p, v1, B1);
  const auto o2 = outer_variations(s, p, v2, B2);
  r.inner1 = closed_first_inner(s, p, eta);
  r.inner2 = closed_second_inner(s, p, eta);
  r.outer1 = o1.d1;
  r.outer2 = o2.d1 + o1.d2;
  r.defect1 = std::abs(r.inner1 - r.outer1);
  r.defect2 = std::abs(r.inner2 - r.outer2);
  return r;
}

double IdentityValue::defect() const { return std::abs(lhs - rhs); }

IdentityValue trace_identity(const EtaJet& j) {
  const double dv = j.d[0][0] + j.d[1][1];
  const double tr2 = j.d[0][0] * j.d[0][0] + 2 * j.d[0][1] * j.d[1][0] + j.d[1][1] * j.d[1][1];
  return {dv * dv - tr2, 2 * (j.d[0][0] * j.d[1][1] - j.d[0][1] * j.d[1][0])};
}

IdentityValue det_expansion(const std::array<double, 4>& M, const std::array<double, 4>& N, double t) {
  Mat X;
  for (int q = 0; q < 4; ++q) X[q] = t * M[q] + 0.5 * t * t * N[q];
  X[0] += 1;
  X[3] += 1;
  const double trM = M[0] + M[3], trN = N[0] + N[3];
  const Mat M2 = matmul(M, M);
  return {det(X), 1 + t * trM + 0.5 * t * t * (trN + trM * trM - (M2[0] + M2[3]))};
}

Fn1D kink_profile() {
  return [](double x) {
    const double v = std::tanh(x / std::numbers::sqrt2);
    return Jet1D{v, (1 - v * v) / std::numbers::sqrt2, -v * (1 - v * v)};
  };
}

Fn1D bump_1d(double c, double r, double amplitude) {
  if (!(r > 0)) throw std::invalid_argument("bump_1d: radius must be positive");
  return [=](double x) {
    const double s = (x - c) / r;
    if (std::abs(s) >= 1) return Jet1D{};
    const double q = 1 - s * s;
    return Jet1D{amplitude * q * q * q * q, -8 * amplitude * s * q * q * q / r,
                 -8 * amplitude * q * q * (1 - 7 * s * s) / (r * r)};
  };
}

double inner_second_1d_closed(const Fn1D& V, const Fn1D& eta, double a, double b, int n) {
  if (!(a < b) || n < 8) throw std::invalid_argument("inner_second_1d_closed: need a < b and n >= 8");
  const double h = (b - a) / n;
  long double s = 0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const double e = eta(x).d, v = V(x).d;
    s += w * e * e * v * v;
  }
  return static_cast<double>(s) * h;
}

InnerDifferences inner_variations_1d_numeric(const Fn1D& V, const Fn1D& eta, double a, double b, int n, double dt) {
  if (!(a < b) || n < 8) throw std::invalid_argument("inner_variations_1d_numeric: need a < b and n >= 8");
  const double h = (b - a) / n;
  double max_d = 0;
  for (int i = 0; i <= n; ++i) max_d = std::max(max_d, std::abs(eta(a + i * h).d));
  if (dt * max_d > kFlowGuard) throw std::invalid_argument("inner_variations_1d_numeric: flow guard violated");
  auto E = [&](double t) {
    long double s = 0;
    for (int i = 0; i <= n; ++i) {
      double x = a + i * h, J = 1;
      // backward flow x' = -eta(x), J' = -eta'(x) J
      const double step = t / kFlowSubsteps;
      for (int m = 0; m < kFlowSubsteps; ++m) {
        auto f = [&](double px, double pJ, double& fx, double& fJ) {
          const Jet1D e = eta(px);
          fx = -e.v;
          fJ = -e.d * pJ;
        };
        double k1, l1, k2, l2, k3, l3, k4, l4;
        f(x, J, k1, l1);
        f(x + 0.5 * step * k1, J + 0.5 * step * l1, k2, l2);
        f(x + 0.5 * step * k2, J + 0.5 * step * l2, k3, l3);
        f(x + step * k3, J + step * l3, k4, l4);
        x += step / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        J += step / 6 * (l1 + 2 * l2 + 2 * l3 + l4);
      }
      const Jet1D v = V(x);
      const double dv = v.d * J;
      const double r = 1 - v.v * v.v;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      s += w * (0.5 * dv * dv + 0.25 * r * r);
    }
    return static_cast<double>(s) * h;
  };
  return differences(dt, E);
}

}  // namespace gllab
