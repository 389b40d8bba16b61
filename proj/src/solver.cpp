#include "gllab/solver.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <sstream>

#include "gllab/links.hpp"

namespace gllab {

void SolveConfig::validate() const {
  if (max_iters < 0 || !(step0 > 0) || !(tol_grad > 0) || !(armijo_c > 0 && armijo_c < 1))
    throw std::invalid_argument("SolveConfig: max_iters >= 0, step0 > 0, tol_grad > 0, 0 < armijo_c < 1 required");
  if (lbfgs_memory < 1) throw std::invalid_argument("SolveConfig: lbfgs_memory must be >= 1");
  if (reproject_every < 0) throw std::invalid_argument("SolveConfig: reproject_every must be >= 0");
}

namespace {

// Unknowns of the lattice energy: u at nodes, edge potentials a = theta / h on grid edges.
// x-edge (i,j)-(i+1,j) is stored at j*nx + i, y-edge (i,j)-(i,j+1) at i*ny + j.
struct Lattice {
  GridSpec g;
  std::size_t N, ex, ey;
  std::vector<double> W;  // L2 metric weights

  explicit Lattice(const GridSpec& grid)
      : g(grid),
        N(grid.size()),
        ex(static_cast<std::size_t>(grid.nx) * (grid.ny + 1)),
        ey(static_cast<std::size_t>(grid.ny) * (grid.nx + 1)),
        W(size()) {
    const double cell = g.hx() * g.hy();
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) W[g.idx(i, j)] = W[N + g.idx(i, j)] = g.weight(i, j);
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) W[ax() + xe(i, j)] = (j == 0 || j == g.ny) ? 0.5 * cell : cell;
    for (int i = 0; i <= g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) W[ay() + ye(i, j)] = (i == 0 || i == g.nx) ? 0.5 * cell : cell;
  }
  std::size_t size() const { return 2 * N + ex + ey; }
  std::size_t ax() const { return 2 * N; }
  std::size_t ay() const { return 2 * N + ex; }
  std::size_t xe(int i, int j) const { return static_cast<std::size_t>(j) * g.nx + i; }
  std::size_t ye(int i, int j) const { return static_cast<std::size_t>(i) * g.ny + j; }
};

std::vector<double> to_links(const Lattice& L, const GLState& s) {
  const auto& g = L.g;
  std::vector<double> x(L.size());
  std::copy(s.u.re.begin(), s.u.re.end(), x.begin());
  std::copy(s.u.im.begin(), s.u.im.end(), x.begin() + L.N);
  const auto t = link_phases(s.A);
  for (std::size_t k = 0; k < L.ex; ++k) x[L.ax() + k] = t.x[k] / g.hx();
  for (std::size_t k = 0; k < L.ey; ++k) x[L.ay() + k] = t.y[k] / g.hy();
  return x;
}

GLState to_state(const Lattice& L, const std::vector<double>& x) {
  const auto& g = L.g;
  GLState s(g);
  std::copy(x.begin(), x.begin() + L.N, s.u.re.begin());
  std::copy(x.begin() + L.N, x.begin() + 2 * L.N, s.u.im.begin());
  EdgeField t(g);
  for (std::size_t k = 0; k < L.ex; ++k) t.x[k] = x[L.ax() + k] * g.hx();
  for (std::size_t k = 0; k < L.ey; ++k) t.y[k] = x[L.ay() + k] * g.hy();
  s.A = link_potential(t);
  return s;
}

// Lattice GL energy; when `grad` is non-null it receives the gradient with respect to x.
double lattice_energy(const Lattice& L, const std::vector<double>& x, const GLParams& p,
                      std::vector<double>* grad) {
  const auto& g = L.g;
  const double hx = g.hx(), hy = g.hy();
  const double pot = 1.0 / (4.0 * p.epsilon * p.epsilon);
  const double* ur = x.data();
  const double* ui = x.data() + L.N;
  double* gr = nullptr;
  double* gi = nullptr;
  if (grad) {
    grad->assign(L.size(), 0.0);
    gr = grad->data();
    gi = gr + L.N;
  }
  long double E = 0;
  // c |u_b e^{-i theta} - u_a|^2, gradient wrt theta accumulated into *gt
  auto edge = [&](std::size_t a, std::size_t b, double theta, double c, double* gt) {
    const double ct = std::cos(theta), st = std::sin(theta);
    const double br = ur[b] * ct + ui[b] * st;
    const double bi = ui[b] * ct - ur[b] * st;
    const double zr = br - ur[a], zi = bi - ui[a];
    E += c * (zr * zr + zi * zi);
    if (!gt) return;
    gr[b] += 2 * c * (zr * ct - zi * st);
    gi[b] += 2 * c * (zi * ct + zr * st);
    gr[a] -= 2 * c * zr;
    gi[a] -= 2 * c * zi;
    *gt += 2 * c * (zr * bi - zi * br);
  };
  std::vector<double> gtx, gty;
  if (grad) {
    gtx.assign(L.ex, 0.0);
    gty.assign(L.ey, 0.0);
  }
  const double* ax = x.data() + L.ax();
  const double* ay = x.data() + L.ay();
  for (int j = 0; j <= g.ny; ++j) {
    const double wy = (j == 0 || j == g.ny) ? 0.5 : 1.0;
    for (int i = 0; i < g.nx; ++i) {
      const auto e = L.xe(i, j);
      edge(g.idx(i, j), g.idx(i + 1, j), ax[e] * hx, 0.5 * wy * hy / hx, grad ? &gtx[e] : nullptr);
    }
  }
  for (int i = 0; i <= g.nx; ++i) {
    const double wx = (i == 0 || i == g.nx) ? 0.5 : 1.0;
    for (int j = 0; j < g.ny; ++j) {
      const auto e = L.ye(i, j);
      edge(g.idx(i, j), g.idx(i, j + 1), ay[e] * hy, 0.5 * wx * hx / hy, grad ? &gty[e] : nullptr);
    }
  }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const auto bx0 = L.xe(i, j), bx1 = L.xe(i, j + 1);
      const auto by0 = L.ye(i, j), by1 = L.ye(i + 1, j);
      const double b = (ax[bx0] - ax[bx1]) / hy + (ay[by1] - ay[by0]) / hx - p.h_ex;
      E += 0.5 * hx * hy * b * b;
      if (!grad) continue;
      gtx[bx0] += b;
      gtx[bx1] -= b;
      gty[by1] += b;
      gty[by0] -= b;
    }
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const auto k = g.idx(i, j);
      const double w = g.weight(i, j);
      const double r = 1.0 - ur[k] * ur[k] - ui[k] * ui[k];
      E += w * pot * r * r;
      if (!grad) continue;
      gr[k] -= 4 * w * pot * r * ur[k];
      gi[k] -= 4 * w * pot * r * ui[k];
    }
  if (grad) {
    double* gax = grad->data() + L.ax();
    double* gay = grad->data() + L.ay();
    for (std::size_t e = 0; e < L.ex; ++e) gax[e] = gtx[e] * hx;
    for (std::size_t e = 0; e < L.ey; ++e) gay[e] = gty[e] * hy;
  }
  return static_cast<double>(E);
}

double wdot(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& w) {
  long double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += w[k] * a[k] * b[k];
  return static_cast<double>(s);
}

double edot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return static_cast<double>(s);
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

std::vector<double> densify(std::vector<double> g, const std::vector<double>& w) {
  for (std::size_t k = 0; k < g.size(); ++k) g[k] /= w[k];
  return g;
}

}  // namespace

double solver_energy(const GLState& s, const GLParams& p) {
  p.validate();
  const Lattice L(s.grid());
  return lattice_energy(L, to_links(L, s), p, nullptr);
}

GLState energy_gradient(const GLState& s, const GLParams& p) {
  p.validate();
  const auto& g = s.grid();
  const Lattice L(g);
  std::vector<double> graw;
  lattice_energy(L, to_links(L, s), p, &graw);
  GLState d(g);
  EdgeField t(g);
  for (std::size_t e = 0; e < L.ex; ++e) t.x[e] = graw[L.ax() + e] / g.hx();
  for (std::size_t e = 0; e < L.ey; ++e) t.y[e] = graw[L.ay() + e] / g.hy();
  d.A = link_phases_adjoint(t);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const auto k = g.idx(i, j);
      const double w = g.weight(i, j);
      d.u.re[k] = graw[k] / w;
      d.u.im[k] = graw[L.N + k] / w;
      d.A.x[k] /= w;
      d.A.y[k] /= w;
    }
  return d;
}

ELResidual el_residual(const GLState& s, const GLParams& p) {
  p.validate();
  const GLState c = coulomb_project(s);
  const auto& g = c.grid();
  const Lattice L(g);
  const auto x = to_links(L, c);
  std::vector<double> graw;
  lattice_energy(L, x, p, &graw);
  ELResidual r;
  for (std::size_t k = 0; k < L.N; ++k) r.r1 = std::max(r.r1, std::hypot(graw[k], graw[L.N + k]) / L.W[k]);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const auto e = L.ax() + L.xe(i, j);
      r.r2 = std::max(r.r2, std::abs(graw[e]) / L.W[e]);
    }
  for (int i = 1; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const auto e = L.ay() + L.ye(i, j);
      r.r2 = std::max(r.r2, std::abs(graw[e]) / L.W[e]);
    }
  const double* ax = x.data() + L.ax();
  const double* ay = x.data() + L.ay();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!(i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1)) continue;
      const double h = (ax[L.xe(i, j)] - ax[L.xe(i, j + 1)]) / g.hy() + (ay[L.ye(i + 1, j)] - ay[L.ye(i, j)]) / g.hx();
      r.r3 = std::max(r.r3, std::abs(h - p.h_ex));
    }
  return r;
}

SolveResult minimize_gl(const GLState& s0, const GLParams& p, const SolveConfig& cfg) {
  p.validate();
  cfg.validate();
  s0.validate();
  const Lattice L(s0.grid());
  const auto& w = L.W;

  SolveResult res;
  std::vector<double> x = to_links(L, s0);
  std::vector<double> graw;
  double E = lattice_energy(L, x, p, &graw);
  std::vector<double> G = densify(graw, w);
  double gnorm = std::sqrt(wdot(G, G, w));
  res.log.push_back({0, E, gnorm, 0.0});
  double step = cfg.step0;

  std::deque<std::pair<std::vector<double>, std::vector<double>>> mem;  // (s, y) pairs
  int since_projection = 0;
  // relative energy change below which the Armijo decrease is not resolvable
  const double resolvable = 64 * std::numeric_limits<double>::epsilon();

  for (int it = 1; it <= cfg.max_iters && gnorm > cfg.tol_grad; ++it) {
    std::vector<double> d = G;
    bool quasi_newton = cfg.method == DescentMethod::lbfgs && !mem.empty();
    if (quasi_newton) {
      std::vector<double> alpha(mem.size()), rho(mem.size());
      for (std::size_t m = mem.size(); m-- > 0;) {
        rho[m] = 1.0 / wdot(mem[m].second, mem[m].first, w);
        alpha[m] = rho[m] * wdot(mem[m].first, d, w);
        axpy(-alpha[m], mem[m].second, d);
      }
      const auto& last = mem.back();
      const double gamma = wdot(last.first, last.second, w) / wdot(last.second, last.second, w);
      for (double& v : d) v *= gamma;
      for (std::size_t m = 0; m < mem.size(); ++m) {
        const double beta = rho[m] * wdot(mem[m].second, d, w);
        axpy(alpha[m] - beta, mem[m].first, d);
      }
    }
    for (double& v : d) v = -v;
    double slope = edot(graw, d);
    if (!(slope < 0)) {
      d = G;
      for (double& v : d) v = -v;
      slope = edot(graw, d);
      quasi_newton = false;
      mem.clear();
    }

    // Armijo backtracking
    double tau = quasi_newton ? 1.0 : step;
    std::vector<double> trial;
    double E_new = E;
    bool accepted = false;
    while (tau >= 1e-14) {
      trial = x;
      axpy(tau, d, trial);
      E_new = lattice_energy(L, trial, p, nullptr);
      const double want = cfg.armijo_c * tau * slope;
      if (E_new <= E + want || (E_new <= E && -want < resolvable * std::abs(E))) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      if (quasi_newton) {  // retry along the steepest direction before giving up
        mem.clear();
        --it;
        continue;
      }
      std::ostringstream msg;
      msg << "minimize_gl: step underflow at iteration " << it << " (energy " << E << ", gradient norm " << gnorm
          << ")";
      throw NumericalError(msg.str(), gnorm);
    }
    if (!quasi_newton) step = 2.0 * tau;

    std::vector<double> graw_new;
    lattice_energy(L, trial, p, &graw_new);
    std::vector<double> G_new = densify(graw_new, w);
    if (cfg.method == DescentMethod::lbfgs) {
      std::vector<double> sv = trial, yv = G_new;
      axpy(-1.0, x, sv);
      axpy(-1.0, G, yv);
      if (wdot(sv, yv, w) > 1e-300) {
        mem.emplace_back(std::move(sv), std::move(yv));
        if (static_cast<int>(mem.size()) > cfg.lbfgs_memory) mem.pop_front();
      }
    }
    x = std::move(trial);
    E = E_new;
    graw = std::move(graw_new);
    G = std::move(G_new);
    gnorm = std::sqrt(wdot(G, G, w));
    res.iterations = it;
    res.log.push_back({it, E, gnorm, tau});

    if (cfg.reproject_every > 0 && ++since_projection >= cfg.reproject_every) {
      // moves along gauge orbits only; the lattice energy does not change beyond roundoff
      since_projection = 0;
      x = to_links(L, coulomb_project(to_state(L, x)));
      ++res.projections;
      E = std::min(E, lattice_energy(L, x, p, &graw));
      G = densify(graw, w);
      gnorm = std::sqrt(wdot(G, G, w));
      mem.clear();
    }
  }
  res.state = coulomb_project(to_state(L, x));
  ++res.projections;
  res.grad_norm = gnorm;
  res.converged = gnorm <= cfg.tol_grad;
  return res;
}

void write_solve_log(std::ostream& os, const SolveResult& r) {
  os << "iter,energy,grad_norm,step\n";
  os.precision(17);
  for (const auto& rec : r.log) os << rec.iter << ',' << rec.energy << ',' << rec.grad_norm << ',' << rec.step << '\n';
}

ComplexField vortex_ansatz(const GridSpec& g, double cx, double cy, int degree, double epsilon) {
  if (std::abs(degree) > 8) throw std::invalid_argument("vortex_ansatz: |degree| > 8 is not resolvable");
  if (!(epsilon > 0)) throw std::invalid_argument("vortex_ansatz: epsilon must be positive");
  if (!(cx > g.x_min && cx < g.x_max && cy > g.y_min && cy < g.y_max))
    throw std::invalid_argument("vortex_ansatz: center must be interior");
  ComplexField u(g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const double X = g.x(i) - cx, Y = g.y(j) - cy;
      const double rho = std::tanh(std::hypot(X, Y) / epsilon);
      const double th = degree * std::atan2(Y, X);
      u.re[g.idx(i, j)] = rho * std::cos(th);
      u.im[g.idx(i, j)] = rho * std::sin(th);
    }
  return u;
}

}  // namespace gllab
