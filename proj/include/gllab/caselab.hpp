#ifndef GLLAB_CASELAB_HPP
#define GLLAB_CASELAB_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "gllab/innervar.hpp"
#include "gllab/qforms.hpp"

namespace gllab {

// Line example on (-L, L)^2: h = e^{-|x|}, mu = -Delta h + h = 2 H^1 on {x = 0}, and the tangent test field
// eta = (cos(pi x/2L) sin(pi y/2L), -sin(pi x/2L) cos(pi y/2L)).

struct Prop41Fields {
  LimitingField h;
  VorticityMeasure mu;
  TestVectorField eta;
};

/// n cells per side, n even so that x = 0 is a grid column. lambda = 1.
Prop41Fields prop41_fields(double L, int n);

/// The special tangent field as an exact jet.
EtaFn prop41_eta(double L);

/// max over `count` seeded test functions phi in H^1_0 of
/// |int (grad h . grad phi + h phi) - density int_{x=0} phi dy| / ||phi||_{H^1}, grid derivatives of h.
/// The line density defaults to that of prop41_fields.
double prop41_weak_residual(double L, int n, int count, std::uint64_t seed, double density = 2.0);

/// -4L^2 + pi^2 - e^{-2L}(12L^2 + pi^2).
double threshold_bracket(double L);
/// pi^2 / (4L(4L^2 + pi^2)) * threshold_bracket(L).
double q_closed(double L);

/// Bisection root of threshold_bracket on [0.5, 3]. Throws std::runtime_error without a sign change.
double critical_L(double tol = 1e-10);

struct QuadratureComparison {
  double L = 0;
  double q_closed = 0, q_quadrature = 0, defect = 0;
  double measure_term = 0;  ///< the line integral alone (zero for the special field)
};
QuadratureComparison q_quadrature_vs_closed(double L, int n);

struct Certificate {
  bool ok = false;
  std::array<double, 3> margins{};  ///< 2 - 2/alpha2 - 1/beta2, 1, 1 - beta2 - 4 alpha2 L (e^{2L} - 1)
};
/// Requires 1/2 < beta2 < 1 and alpha2 > 0 (std::invalid_argument otherwise).
Certificate certificate_check(double L, double alpha2, double beta2);

/// Sample for the weighted Poincare check: returns (eta1, d_1 eta1) at a point.
using PoincareSample = std::function<std::array<double, 2>(double, double)>;

/// max over samples of int e^{-2|x|} eta1^2 / (2L(e^{2L} - 1) int e^{-2|x|} (d_1 eta1)^2), trapezoid on n^2.
/// Throws std::domain_error if a sample has zero right side and nonzero left side.
double poincare_check(double L, const std::vector<PoincareSample>& samples, int n);
/// Seeded sine combinations sum_k a_k sin(k pi (x + L)/2L) g(y), k <= 4.
std::vector<PoincareSample> poincare_samples(double L, int count, std::uint64_t seed);

struct SweepResult {
  double min_q = std::numeric_limits<double>::infinity();
  int argmin = -1;  ///< sample index; `count` denotes the special field
  int count = 0;
};
/// Minimum of q_h (line example, lambda = 1) over `count` seeded compactly supported fields on an
/// n^2 grid, optionally including the special tangent field.
SweepResult random_eta_sweep(double L, int count, int n, std::uint64_t seed, bool include_special = false);

struct Monotone1D {
  double min_eigenvalue = 0;
  double el_residual = 0;  ///< max |-V'' + f'(V)| at grid nodes
  int iterations = 0;
};
/// Smallest eigenvalue of -phi'' + f''(V) phi on (a, b) with Dirichlet ends, n cells, by shifted
/// inverse iteration. Throws std::invalid_argument if V is not strictly monotone at the nodes or
/// the Euler-Lagrange residual exceeds 1e-6.
Monotone1D monotone_1d_check(const Fn1D& V, const std::function<double(double)>& fprime,
                             const std::function<double(double)>& fsecond, double a, double b, int n);

/// The 1D second inner variation three ways.
struct Identity1D {
  double half_form = 0;  ///< 1/2 int eta'^2 V'^2
  double full_form = 0;  ///< int eta'^2 V'^2
  double numeric = 0;    ///< Richardson flow differences
};
Identity1D inner_identity_1d(const Fn1D& V, const Fn1D& eta, double a, double b, int n, double dt);

}  // namespace gllab

#endif
