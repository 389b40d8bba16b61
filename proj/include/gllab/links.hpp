#ifndef GLLAB_LINKS_HPP
#define GLLAB_LINKS_HPP

#include <vector>

#include "gllab/grid.hpp"

namespace gllab {

/// Values on grid edges. x-edge (i,j)-(i+1,j) is stored at j*nx + i, y-edge (i,j)-(i,j+1) at i*ny + j.
struct EdgeField {
  GridSpec grid;
  std::vector<double> x, y;

  EdgeField() = default;
  explicit EdgeField(const GridSpec& g)
      : grid(g), x(static_cast<std::size_t>(g.nx) * (g.ny + 1), 0.0), y(static_cast<std::size_t>(g.ny) * (g.nx + 1), 0.0) {}
  std::size_t xe(int i, int j) const { return static_cast<std::size_t>(j) * grid.nx + i; }
  std::size_t ye(int i, int j) const { return static_cast<std::size_t>(i) * grid.ny + j; }
};

/// Link phases of a nodal potential. Along each grid line, F is the least-squares solution of
/// D F = A_k with F = 0 at the first node (D: the nodal derivative stencil) and the phase of an
/// edge is the increment of F across it. Linear in A, and link_phases(grad f) is exactly the edge
/// increment of f, so anything built from these phases is invariant under apply_gauge.
EdgeField link_phases(const VectorField& A);

/// Adjoint of link_phases as a linear map (Euclidean inner products on nodes and edges).
VectorField link_phases_adjoint(const EdgeField& g);

/// Nodal potential D F with F the partial sums of theta along each line; link_phases inverts it.
VectorField link_potential(const EdgeField& theta);

}  // namespace gllab

#endif
