#ifndef GLLAB_VORTICITY_HPP
#define GLLAB_VORTICITY_HPP

#include "gllab/glcore.hpp"

namespace gllab {

/// Closed loop along grid lines: the boundary of the node rectangle [i0,i1] x [j0,j1].
struct LoopRect {
  int i0, j0, i1, j1;
};

/// j_k = <iu, d_k^A u>.
VectorField supercurrent(const GLState& s);
/// mu = curl j + curl A.
ScalarField vorticity_mu(const GLState& s);

/// Degree of u/|u| along the loop by summing principal phase increments.
int winding_number(const ComplexField& u, const LoopRect& loop);
/// Unrounded phase sum / 2pi, for diagnostics.
double winding_real(const ComplexField& u, const LoopRect& loop);

/// Loop of node rectangle closest to the circle of radius r around (cx, cy), clipped to the grid.
LoopRect loop_around(const GridSpec& g, double cx, double cy, double r);

/// True when epsilon resolves the core: epsilon >= 4 max(hx, hy).
bool resolves_core(const GridSpec& g, double epsilon);

}  // namespace gllab

#endif
