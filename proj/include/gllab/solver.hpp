#ifndef GLLAB_SOLVER_HPP
#define GLLAB_SOLVER_HPP

#include <iosfwd>
#include <vector>

#include "gllab/glcore.hpp"

namespace gllab {

enum class DescentMethod { steepest, lbfgs };

struct SolveConfig {
  int max_iters = 5000;
  double step0 = 1e-3;
  double tol_grad = 1e-6;  ///< L2 norm of the energy gradient density
  double armijo_c = 1e-4;
  int reproject_every = 50;  ///< Coulomb re-projection period in iterations (0 disables)
  DescentMethod method = DescentMethod::steepest;
  int lbfgs_memory = 8;
  void validate() const;
};

struct ELResidual {
  double r1 = 0;  ///< max |-(grad_A)^2 u - u(1-|u|^2)/eps^2| over all nodes
  double r2 = 0;  ///< max |-perp_grad h - j| over non-boundary nodes
  double r3 = 0;  ///< max |h - h_ex| over boundary nodes
};

struct IterRecord {
  int iter;
  double energy;
  double grad_norm;
  double step;
};

struct SolveResult {
  GLState state;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0;
  std::vector<IterRecord> log;  ///< accepted descent steps only
  int projections = 0;
};

/// Compact discretization of the GL energy used for descent: covariant differences on grid edges with
/// link phases from edge-averaged A, induced field on cells, potential at nodes. Unlike the centered nodal
/// stencils it penalizes every grid-scale mode of u, so descent cannot exploit odd-even decoupling.
double solver_energy(const GLState& s, const GLParams& p);

/// Gradient of solver_energy divided by the node quadrature weights (L2 gradient density),
/// packed as a state: u-part in `u`, A-part in `A`.
GLState energy_gradient(const GLState& s, const GLParams& p);

/// Discrete Euler-Lagrange residuals of solver_energy, evaluated after Coulomb projection.
/// r3 uses the nodal curl of A.
ELResidual el_residual(const GLState& s, const GLParams& p);

SolveResult minimize_gl(const GLState& s0, const GLParams& p, const SolveConfig& cfg);

void write_solve_log(std::ostream& os, const SolveResult& r);

/// tanh(|x-c|/eps) e^{i d theta}; |d| <= 8.
ComplexField vortex_ansatz(const GridSpec& g, double cx, double cy, int degree, double epsilon);

}  // namespace gllab

#endif
