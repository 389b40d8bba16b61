#ifndef GLLAB_OBSTACLE_HPP
#define GLLAB_OBSTACLE_HPP

#include <cstdint>
#include <vector>

#include "gllab/grid.hpp"

namespace gllab {

/// Discrete solution of: h >= 1 - lambda/2, -Delta h + h >= 0, (h - obstacle)(-Delta h + h) = 0,
/// h = 1 on the boundary (5-point Laplacian).
struct ObstacleSolution {
  ScalarField h_star;
  ScalarField mu_star;                   ///< -Delta_h h + h at interior nodes, 0 on the boundary
  std::vector<std::uint8_t> coincidence;  ///< 1 where h_star sits on the obstacle (interior nodes)
  double lambda = 0;
  int iterations = 0;
  double residual = 0;  ///< max |min(h - obstacle, mu)| over interior nodes
};

struct ObstacleOptions {
  double tol = 1e-10;
  double omega = 1.9;  ///< over-relaxation, in [1, 1.9]
  int max_iters = 200000;
};

/// Projected SOR, lexicographic sweeps. Throws std::invalid_argument for lambda <= 0 or omega
/// outside [1, 1.9], NumericalError when max_iters is reached.
ObstacleSolution solve_obstacle(double lambda, const GridSpec& g, const ObstacleOptions& opt = {});

/// h0 with -Delta_h h0 + h0 = 0, h0 = 1 on the boundary (sparse Cholesky).
ScalarField solve_unconstrained(const GridSpec& g);

/// -Delta_h f + f at interior nodes; boundary nodes copy the nearest interior node.
ScalarField screened_operator(const ScalarField& f);

/// (1/2 lambda) int |-Delta f + f| + 1/2 int (|grad f|^2 + |f - 1|^2), trapezoid, second-order
/// gradients. Requires f = 1 on the boundary (std::invalid_argument otherwise).
double e_lambda(const ScalarField& f, double lambda);

struct KKTReport {
  double feasibility = 0;       ///< max (obstacle - h)_+
  double dual_feasibility = 0;  ///< max (-mu)_+
  double complementarity = 0;   ///< max |(h - obstacle) mu|
};
/// Evaluated on interior nodes from h and lambda (mu is recomputed from h).
KKTReport kkt_report(const ScalarField& h, double lambda);
KKTReport kkt_report(const ObstacleSolution& sol);

/// Coincidence mask of a solution (1 where h - obstacle <= 1e-12).
std::vector<std::uint8_t> coincidence_mask(const ScalarField& h, double lambda);

}  // namespace gllab

#endif
