#include "gllab/glcore.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "gllab/links.hpp"

namespace gllab {

void GLParams::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("GLParams: epsilon must be positive");
  if (!(h_ex >= 0)) throw std::invalid_argument("GLParams: h_ex must be nonnegative");
  if (!(lambda > 0)) throw std::invalid_argument("GLParams: lambda must be positive");
}

void GLState::validate() const {
  if (!(u.grid == A.grid)) throw std::invalid_argument("GLState: u and A live on different grids");
  require_finite(u.re, "GLState u");
  require_finite(u.im, "GLState u");
  require_finite(A.x, "GLState A");
  require_finite(A.y, "GLState A");
}

GLState sample_state(const GridSpec& g, const StateFn& f) {
  GLState s(g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const auto k = g.idx(i, j);
      const StatePoint p = f(g.x(i), g.y(j));
      s.u.re[k] = p.u_re;
      s.u.im[k] = p.u_im;
      s.A.x[k] = p.a1;
      s.A.y[k] = p.a2;
    }
  return s;
}

namespace {

using cplx = std::complex<double>;

// Transported derivative stencils along one grid line of n cells. The stencil of node i is the
// nodal derivative stencil with each value u_m carried to node i by exp(-i phi), phi the sum of
// link phases from i to m. With v, beta present, also the first and second t-derivatives along
// (u + t v, theta + t beta).
struct LineJet {
  int n;
  double h;
  const double *ur, *ui, *vr, *vi;  // stride `stride`
  std::size_t stride;
  const double *theta, *beta;  // contiguous, n entries
  void run(double* mr, double* mi, double* nr, double* ni, double* pr, double* pi) const {
    const double c = 0.5 / h;
    auto path = [](const double* t, int i, int m) {
      double phi = 0;
      for (int l = i; l < m; ++l) phi += t[l];
      for (int l = m; l < i; ++l) phi -= t[l];
      return phi;
    };
    for (int i = 0; i <= n; ++i) {
      int ms[3];
      double cs[3];
      int len;
      if (i == 0) {
        ms[0] = 0, ms[1] = 1, ms[2] = 2, cs[0] = -3 * c, cs[1] = 4 * c, cs[2] = -c, len = 3;
      } else if (i == n) {
        ms[0] = n, ms[1] = n - 1, ms[2] = n - 2, cs[0] = 3 * c, cs[1] = -4 * c, cs[2] = c, len = 3;
      } else {
        ms[0] = i + 1, ms[1] = i - 1, cs[0] = c, cs[1] = -c, len = 2;
      }
      cplx M = 0, N = 0, P = 0;
      for (int q = 0; q < len; ++q) {
        const int m = ms[q];
        const cplx T = std::polar(1.0, -path(theta, i, m));
        const cplx u(ur[m * stride], ui[m * stride]);
        M += cs[q] * T * u;
        if (!vr) continue;
        const double psi = path(beta, i, m);
        const cplx v(vr[m * stride], vi[m * stride]);
        const cplx I(0, 1);
        N += cs[q] * T * (v - I * psi * u);
        P += cs[q] * T * (-2.0 * I * psi * v - psi * psi * u);
      }
      mr[i * stride] = M.real(), mi[i * stride] = M.imag();
      if (!vr) continue;
      nr[i * stride] = N.real(), ni[i * stride] = N.imag();
      pr[i * stride] = P.real(), pi[i * stride] = P.imag();
    }
  }
};

CovariantJet jet(const GLState& s, const ComplexField* v, const VectorField* B) {
  const auto& g = s.grid();
  const auto th = link_phases(s.A);
  const EdgeField be = B ? link_phases(*B) : EdgeField(g);
  CovariantJet J{{ComplexField(g), ComplexField(g)}, {ComplexField(g), ComplexField(g)}, {ComplexField(g), ComplexField(g)}};
  const double* vr = v ? v->re.data() : nullptr;
  const double* vi = v ? v->im.data() : nullptr;
  auto at = [](const double* p, std::size_t k) { return p ? p + k : nullptr; };
  for (int j = 0; j <= g.ny; ++j) {
    const auto k = g.idx(0, j);
    LineJet L{g.nx, g.hx(), s.u.re.data() + k, s.u.im.data() + k, at(vr, k), at(vi, k), 1,
              th.x.data() + th.xe(0, j), be.x.data() + be.xe(0, j)};
    L.run(J.m.d1.re.data() + k, J.m.d1.im.data() + k, J.n.d1.re.data() + k, J.n.d1.im.data() + k,
          J.p2.d1.re.data() + k, J.p2.d1.im.data() + k);
  }
  const std::size_t stride = g.nx + 1;
  for (int i = 0; i <= g.nx; ++i) {
    const auto k = g.idx(i, 0);
    LineJet L{g.ny, g.hy(), s.u.re.data() + k, s.u.im.data() + k, at(vr, k), at(vi, k), stride,
              th.y.data() + th.ye(i, 0), be.y.data() + be.ye(i, 0)};
    L.run(J.m.d2.re.data() + k, J.m.d2.im.data() + k, J.n.d2.re.data() + k, J.n.d2.im.data() + k,
          J.p2.d2.re.data() + k, J.p2.d2.im.data() + k);
  }
  return J;
}

}  // namespace

CovariantGradient covariant_gradient(const GLState& s) { return jet(s, nullptr, nullptr).m; }

CovariantJet covariant_jet(const GLState& s, const ComplexField& v, const VectorField& B) {
  if (!(v.grid == s.grid()) || !(B.grid == s.grid())) throw std::invalid_argument("covariant_jet: grid mismatch");
  return jet(s, &v, &B);
}

ScalarField induced_field(const GLState& s) { return curl(s.A); }

double gl_energy(const GLState& s, const GLParams& p) {
  const auto& g = s.grid();
  const auto c = covariant_gradient(s);
  const auto h = induced_field(s);
  const double pot = 1.0 / (2.0 * p.epsilon * p.epsilon);
  std::vector<double> dens(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double m2 = c.d1.re[k] * c.d1.re[k] + c.d1.im[k] * c.d1.im[k] + c.d2.re[k] * c.d2.re[k] + c.d2.im[k] * c.d2.im[k];
    const double r = 1.0 - s.u.re[k] * s.u.re[k] - s.u.im[k] * s.u.im[k];
    const double b = h.v[k] - p.h_ex;
    dens[k] = 0.5 * (m2 + pot * r * r) + 0.5 * b * b;
  }
  return integrate(g, dens);
}

double e_energy(const ComplexField& u, double epsilon) {
  const auto& g = u.grid;
  std::vector<double> ax(g.size()), ay(g.size()), bx(g.size()), by(g.size());
  apply_dx(g, u.re.data(), ax.data());
  apply_dy(g, u.re.data(), ay.data());
  apply_dx(g, u.im.data(), bx.data());
  apply_dy(g, u.im.data(), by.data());
  const double pot = 1.0 / (2.0 * epsilon * epsilon);
  std::vector<double> dens(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = 1.0 - u.re[k] * u.re[k] - u.im[k] * u.im[k];
    dens[k] = 0.5 * (ax[k] * ax[k] + ay[k] * ay[k] + bx[k] * bx[k] + by[k] * by[k] + pot * r * r);
  }
  return integrate(g, dens);
}

GLState apply_gauge(const GLState& s, const ScalarField& f) {
  GLState out = s;
  const auto df = grad(f);
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    const double c = std::cos(f.v[k]), sn = std::sin(f.v[k]);
    out.u.re[k] = c * s.u.re[k] - sn * s.u.im[k];
    out.u.im[k] = sn * s.u.re[k] + c * s.u.im[k];
    out.A.x[k] += df.x[k];
    out.A.y[k] += df.y[k];
  }
  return out;
}

namespace {

std::vector<double> node_weights(const GridSpec& g) {
  std::vector<double> w(g.size());
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) w[g.idx(i, j)] = g.weight(i, j);
  return w;
}

// out = G^T W (a1, a2)
void weak_div(const GridSpec& g, const std::vector<double>& w, const double* a1, const double* a2, double* out) {
  std::vector<double> t1(g.size()), t2(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    t1[k] = w[k] * a1[k];
    t2[k] = w[k] * a2[k];
  }
  apply_dx_t(g, t1.data(), out);
  apply_dy_t(g, t2.data(), t1.data());
  for (std::size_t k = 0; k < g.size(); ++k) out[k] += t1[k];
}

void remove_mean(std::vector<double>& v) {
  double m = 0;
  for (double a : v) m += a;
  m /= static_cast<double>(v.size());
  for (double& a : v) a -= m;
}

}  // namespace

double coulomb_defect(const VectorField& A) {
  const auto& g = A.grid;
  const auto w = node_weights(g);
  std::vector<double> r(g.size());
  weak_div(g, w, A.x.data(), A.y.data(), r.data());
  double m = 0;
  for (std::size_t k = 0; k < r.size(); ++k) m = std::max(m, std::abs(r[k]) / w[k]);
  return m;
}

double interior_div_max(const VectorField& A, int depth) {
  const auto d = div(A);
  const auto& g = A.grid;
  double m = 0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      if (g.boundary_depth(i, j) >= depth) m = std::max(m, std::abs(d(i, j)));
  return m;
}

GLState coulomb_project(const GLState& s, const CoulombOptions& opt) {
  s.validate();
  const auto& g = s.grid();
  const std::size_t n = g.size();
  const auto w = node_weights(g);

  // Solve (G^T W G) f = -G^T W A by preconditioned CG (preconditioner W^{-1}).
  std::vector<double> b(n), f(n, 0.0), r(n), z(n), p(n), q(n), gx(n), gy(n);
  weak_div(g, w, s.A.x.data(), s.A.y.data(), b.data());
  for (double& a : b) a = -a;
  auto apply_k = [&](const std::vector<double>& x, std::vector<double>& out) {
    apply_dx(g, x.data(), gx.data());
    apply_dy(g, x.data(), gy.data());
    weak_div(g, w, gx.data(), gy.data(), out.data());
  };
  auto scaled_max = [&](const std::vector<double>& v) {
    double m = 0;
    for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(v[k]) / w[k]);
    return m;
  };
  const double target = opt.tol * std::max(1.0, scaled_max(b));
  r = b;
  double res = scaled_max(r);
  int it = 0;
  if (res > target) {
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / w[k];
    remove_mean(z);
    p = z;
    double rz = 0;
    for (std::size_t k = 0; k < n; ++k) rz += r[k] * z[k];
    for (it = 1; it <= opt.max_iters; ++it) {
      apply_k(p, q);
      double pq = 0;
      for (std::size_t k = 0; k < n; ++k) pq += p[k] * q[k];
      if (!(pq > 0)) break;
      const double alpha = rz / pq;
      for (std::size_t k = 0; k < n; ++k) {
        f[k] += alpha * p[k];
        r[k] -= alpha * q[k];
      }
      res = scaled_max(r);
      if (res <= target) break;
      for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / w[k];
      remove_mean(z);
      double rz_new = 0;
      for (std::size_t k = 0; k < n; ++k) rz_new += r[k] * z[k];
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    if (res > target) {
      // Recompute the true residual before giving up: the recursive one drifts.
      apply_k(f, q);
      for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
      res = scaled_max(r);
      if (res > target) {
        std::ostringstream msg;
        msg << "coulomb_project: CG did not converge after " << opt.max_iters << " iterations (residual " << res
            << ", target " << target << ")";
        throw NumericalError(msg.str(), res);
      }
    }
  }
  remove_mean(f);
  ScalarField phase(g);
  phase.v = f;
  return apply_gauge(s, phase);
}

}  // namespace gllab
