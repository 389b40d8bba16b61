#ifndef GLLAB_GLCORE_HPP
#define GLLAB_GLCORE_HPP

#include <functional>
#include <stdexcept>
#include <string>

#include "gllab/grid.hpp"

namespace gllab {

/// Raised when an iterative solve fails to converge; carries the last residual.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct GLParams {
  double epsilon = 1.0;
  double h_ex = 0.0;
  double lambda = 1.0;
  void validate() const;
};

struct GLState {
  ComplexField u;
  VectorField A;

  GLState() = default;
  explicit GLState(const GridSpec& g) : u(g), A(g) {}
  const GridSpec& grid() const { return u.grid; }
  void validate() const;
};

/// Point values of an analytic state, used to sample states exactly at arbitrary points.
struct StatePoint {
  double u_re = 0, u_im = 0, a1 = 0, a2 = 0;
};
using StateFn = std::function<StatePoint(double, double)>;

GLState sample_state(const GridSpec& g, const StateFn& f);

/// Components of the covariant gradient (d_1 - i A_1) u and (d_2 - i A_2) u.
struct CovariantGradient {
  ComplexField d1, d2;
};

/// Centered nodal stencils (one-sided at the boundary) with values parallel-transported by the
/// link phases of A, so the result transforms as u under apply_gauge.
CovariantGradient covariant_gradient(const GLState& s);

/// Covariant gradient along (u + t v, A + t B) at t = 0: value m, first derivative n and
/// second derivative p2. Exact derivatives of the discrete map.
struct CovariantJet {
  CovariantGradient m, n, p2;
};
CovariantJet covariant_jet(const GLState& s, const ComplexField& v, const VectorField& B);
ScalarField induced_field(const GLState& s);

double gl_energy(const GLState& s, const GLParams& p);
double e_energy(const ComplexField& u, double epsilon);

GLState apply_gauge(const GLState& s, const ScalarField& f);

struct CoulombOptions {
  double tol = 1e-10;
  int max_iters = 20000;
};

/// Gauge-equivalent state minimizing the discrete L2 norm of A over gauge directions.
/// The result satisfies the weak Coulomb conditions: grad_h^T W A = 0 at every node.
GLState coulomb_project(const GLState& s, const CoulombOptions& opt = {});

/// Max over nodes of |(grad_h^T W A)_k| / w_k: the weak divergence including the A.nu flux at boundary nodes.
double coulomb_defect(const VectorField& A);
/// Max of |div A| over nodes at least `depth` cells from the boundary.
double interior_div_max(const VectorField& A, int depth = 3);

}  // namespace gllab

#endif
