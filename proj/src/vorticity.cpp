#include "gllab/vorticity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace gllab {

VectorField supercurrent(const GLState& s) {
  const auto c = covariant_gradient(s);
  VectorField j(s.grid());
  for (std::size_t k = 0; k < j.x.size(); ++k) {
    const double ur = s.u.re[k], ui = s.u.im[k];
    j.x[k] = ur * c.d1.im[k] - ui * c.d1.re[k];
    j.y[k] = ur * c.d2.im[k] - ui * c.d2.re[k];
  }
  return j;
}

ScalarField vorticity_mu(const GLState& s) {
  auto j = supercurrent(s);
  for (std::size_t k = 0; k < j.x.size(); ++k) {
    j.x[k] += s.A.x[k];
    j.y[k] += s.A.y[k];
  }
  return curl(j);
}

namespace {

std::vector<std::size_t> loop_nodes(const GridSpec& g, const LoopRect& l) {
  if (!(0 <= l.i0 && l.i0 < l.i1 && l.i1 <= g.nx && 0 <= l.j0 && l.j0 < l.j1 && l.j1 <= g.ny))
    throw std::invalid_argument("winding_number: loop outside grid or degenerate");
  std::vector<std::size_t> nodes;
  for (int i = l.i0; i < l.i1; ++i) nodes.push_back(g.idx(i, l.j0));
  for (int j = l.j0; j < l.j1; ++j) nodes.push_back(g.idx(l.i1, j));
  for (int i = l.i1; i > l.i0; --i) nodes.push_back(g.idx(i, l.j1));
  for (int j = l.j1; j > l.j0; --j) nodes.push_back(g.idx(l.i0, j));
  return nodes;
}

}  // namespace

double winding_real(const ComplexField& u, const LoopRect& loop) {
  const auto nodes = loop_nodes(u.grid, loop);
  for (auto k : nodes)
    if (std::hypot(u.re[k], u.im[k]) < 1e-8) throw std::domain_error("loop crosses vortex core");
  double total = 0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    const auto a = nodes[m], b = nodes[(m + 1) % nodes.size()];
    // arg(u_b / u_a) in (-pi, pi]
    const double cr = u.re[a] * u.im[b] - u.im[a] * u.re[b];
    const double dt = u.re[a] * u.re[b] + u.im[a] * u.im[b];
    total += std::atan2(cr, dt);
  }
  return total / (2.0 * std::numbers::pi);
}

int winding_number(const ComplexField& u, const LoopRect& loop) {
  return static_cast<int>(std::lround(winding_real(u, loop)));
}

LoopRect loop_around(const GridSpec& g, double cx, double cy, double r) {
  auto col = [&](double x) { return std::clamp(static_cast<int>(std::lround((x - g.x_min) / g.hx())), 0, g.nx); };
  auto row = [&](double y) { return std::clamp(static_cast<int>(std::lround((y - g.y_min) / g.hy())), 0, g.ny); };
  return {col(cx - r), row(cy - r), col(cx + r), row(cy + r)};
}

bool resolves_core(const GridSpec& g, double epsilon) { return epsilon >= 4.0 * std::max(g.hx(), g.hy()); }

}  // namespace gllab
