#include "gllab/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gllab/glcore.hpp"

namespace gllab {

namespace {

struct Stencil {
  double cx, cy, diag;
  explicit Stencil(const GridSpec& g)
      : cx(1 / (g.hx() * g.hx())), cy(1 / (g.hy() * g.hy())), diag(2 * cx + 2 * cy + 1) {}
  double apply(const ScalarField& f, int i, int j) const {
    return diag * f(i, j) - cx * (f(i - 1, j) + f(i + 1, j)) - cy * (f(i, j - 1) + f(i, j + 1));
  }
};

double projected_residual(const ScalarField& h, double psi, const Stencil& st) {
  const auto& g = h.grid;
  double r = 0;
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) r = std::max(r, std::abs(std::min(h(i, j) - psi, st.apply(h, i, j))));
  return r;
}

}  // namespace

ObstacleSolution solve_obstacle(double lambda, const GridSpec& g, const ObstacleOptions& opt) {
  g.validate();
  if (!(lambda > 0)) throw std::invalid_argument("solve_obstacle: lambda must be positive");
  if (!(opt.omega >= 1 && opt.omega <= 1.9)) throw std::invalid_argument("solve_obstacle: omega must lie in [1, 1.9]");
  if (!(opt.tol > 0) || opt.max_iters < 1) throw std::invalid_argument("solve_obstacle: bad tolerance or iteration cap");
  const double psi = 1 - lambda / 2;
  const Stencil st(g);
  ObstacleSolution sol;
  sol.lambda = lambda;
  sol.h_star = ScalarField(g, 1.0);
  auto& h = sol.h_star;
  bool done = false;
  for (int it = 1; it <= opt.max_iters; ++it) {
    for (int j = 1; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i) {
        const double gs = (st.cx * (h(i - 1, j) + h(i + 1, j)) + st.cy * (h(i, j - 1) + h(i, j + 1))) / st.diag;
        h(i, j) = std::max(psi, h(i, j) + opt.omega * (gs - h(i, j)));
      }
    sol.iterations = it;
    if (it % 10 == 0 || it == opt.max_iters) {
      sol.residual = projected_residual(h, psi, st);
      if (sol.residual <= opt.tol) {
        done = true;
        break;
      }
    }
  }
  if (!done) throw NumericalError("solve_obstacle: no convergence", sol.residual);
  sol.mu_star = ScalarField(g, 0.0);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) sol.mu_star(i, j) = st.apply(h, i, j);
  sol.coincidence = coincidence_mask(h, lambda);
  return sol;
}

ScalarField solve_unconstrained(const GridSpec& g) {
  g.validate();
  const Stencil st(g);
  const int mx = g.nx - 1, my = g.ny - 1;
  auto id = [&](int i, int j) { return (j - 1) * mx + (i - 1); };
  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mx * my);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      const int r = id(i, j);
      t.emplace_back(r, r, st.diag);
      auto nb = [&](int a, int b, double c) {
        if (g.on_boundary(a, b))
          rhs[r] += c;  // boundary value 1
        else
          t.emplace_back(r, id(a, b), -c);
      };
      nb(i - 1, j, st.cx);
      nb(i + 1, j, st.cx);
      nb(i, j - 1, st.cy);
      nb(i, j + 1, st.cy);
    }
  Eigen::SparseMatrix<double> A(mx * my, mx * my);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("solve_unconstrained: factorization failed");
  const Eigen::VectorXd x = ldlt.solve(rhs);
  ScalarField h(g, 1.0);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) h(i, j) = x[id(i, j)];
  return h;
}

ScalarField screened_operator(const ScalarField& f) {
  const auto& g = f.grid;
  const Stencil st(g);
  ScalarField m(g);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) m(i, j) = st.apply(f, i, j);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      if (g.on_boundary(i, j)) m(i, j) = m(std::clamp(i, 1, g.nx - 1), std::clamp(j, 1, g.ny - 1));
  return m;
}

double e_lambda(const ScalarField& f, double lambda) {
  const auto& g = f.grid;
  if (!(lambda > 0)) throw std::invalid_argument("e_lambda: lambda must be positive");
  if (g.nx < 2 || g.ny < 2) throw std::invalid_argument("e_lambda: grid too coarse");
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      if (g.on_boundary(i, j) && std::abs(f(i, j) - 1) > 1e-12)
        throw std::invalid_argument("e_lambda: f must equal 1 on the boundary");
  const ScalarField m = screened_operator(f);
  const VectorField gr = grad(f);
  std::vector<double> a(g.size()), b(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    a[k] = std::abs(m[k]);
    b[k] = gr.x[k] * gr.x[k] + gr.y[k] * gr.y[k] + (f[k] - 1) * (f[k] - 1);
  }
  return integrate(g, a) / (2 * lambda) + 0.5 * integrate(g, b);
}

KKTReport kkt_report(const ScalarField& h, double lambda) {
  const auto& g = h.grid;
  const double psi = 1 - lambda / 2;
  const Stencil st(g);
  KKTReport r;
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      const double mu = st.apply(h, i, j);
      r.feasibility = std::max(r.feasibility, psi - h(i, j));
      r.dual_feasibility = std::max(r.dual_feasibility, -mu);
      r.complementarity = std::max(r.complementarity, std::abs((h(i, j) - psi) * mu));
    }
  return r;
}

KKTReport kkt_report(const ObstacleSolution& sol) { return kkt_report(sol.h_star, sol.lambda); }

std::vector<std::uint8_t> coincidence_mask(const ScalarField& h, double lambda) {
  const auto& g = h.grid;
  const double psi = 1 - lambda / 2;
  std::vector<std::uint8_t> m(g.size(), 0);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) m[g.idx(i, j)] = h(i, j) - psi <= 1e-12 ? 1 : 0;
  return m;
}

}  // namespace gllab
