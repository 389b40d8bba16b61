#ifndef GLLAB_INNERVAR_HPP
#define GLLAB_INNERVAR_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "gllab/glcore.hpp"

namespace gllab {

/// Value and first two derivatives of a smooth planar vector field at a point.
/// d[i][j] = d_j eta_i, dd[i][j][k] = d_j d_k eta_i.
struct EtaJet {
  std::array<double, 2> v{};
  std::array<std::array<double, 2>, 2> d{};
  std::array<std::array<std::array<double, 2>, 2>, 2> dd{};
};
using EtaFn = std::function<EtaJet(double, double)>;

enum class SupportKind { compact_interior, boundary_tangent };

/// Test field sampled on a grid together with zeta = D eta . eta and the derivatives of both.
struct TestVectorField {
  EtaFn fn;
  VectorField eta, zeta;
  std::vector<std::array<double, 4>> deta, dzeta;  ///< per node: d1 e1, d2 e1, d1 e2, d2 e2
  SupportKind support = SupportKind::compact_interior;
  double max_deta = 0;  ///< max over nodes of the Frobenius norm of D eta
  const GridSpec& grid() const { return eta.grid; }
};

/// Samples fn and checks the support invariant: compact_interior fields vanish within 2 cells of
/// the boundary, boundary_tangent fields have |eta.nu| <= 1e-12 on boundary nodes.
TestVectorField make_test_field(const GridSpec& g, EtaFn fn, SupportKind kind);

// Test field library. All return exact jets.

EtaFn zero_field();
/// eta = c.
EtaFn constant_field(double c1, double c2);
/// eta = M x + b.
EtaFn linear_field(double m11, double m12, double m21, double m22, double b1 = 0, double b2 = 0);
/// eta_i = env(x, y) * (a_i + b_i sin(kx x + ky y + phase)) with env = sin^4 on the box (0 outside).
struct BumpSpec {
  double x0, x1, y0, y1;
  double a1 = 1, a2 = 0, b1 = 0, b2 = 0;
  double kx = 0, ky = 0, phase = 0;
};
EtaFn bump_field(const BumpSpec& b);
/// Sum of fields.
EtaFn sum_field(std::vector<EtaFn> parts);
/// Multiplies fn by chi(x) chi(y), chi a C2 quintic ramp from 0 to 1 over 4 cells starting 2 cells
/// inside the boundary, so the product vanishes on the outer two cells.
EtaFn cutoff_field(const GridSpec& g, EtaFn fn);
/// Random sum of `terms` bumps inside the box, reproducible from `seed`.
EtaFn random_bump_field(std::uint64_t seed, double x0, double x1, double y0, double y1, int terms = 3,
                        double amplitude = 1.0);

struct FlowMap {
  GridSpec grid;
  double t = 0;
  VectorField fwd, inv;                       ///< Phi_t(x) and Phi_t^{-1}(x) at nodes
  std::vector<std::array<double, 4>> jfwd, jinv;  ///< D Phi_t and D(Phi_t^{-1}) at nodes, row-major
  double composition_error = 0;               ///< max |Phi_t^{-1}(Phi_t(x)) - x|
};

constexpr int kFlowSubsteps = 16;
constexpr double kFlowGuard = 0.2;

/// RK4 with kFlowSubsteps substeps per node for x and its Jacobian. Throws std::invalid_argument when
/// |t| max|D eta| > kFlowGuard, NumericalError on det <= 0 or composition error > 1e-8.
FlowMap flow(const TestVectorField& eta, double t);

/// Point map of the flow (single point, same integrator).
std::array<double, 2> flow_point(const EtaFn& eta, double x, double y, double t);

/// (u o Phi_t^{-1}, D(Phi_t^{-1})^T A o Phi_t^{-1}) with bilinear sampling. Samples outside the
/// rectangle are clamped; their count goes to `clamped` when given, else a warning is logged.
GLState pullback_state(const GLState& s, const FlowMap& fm, int* clamped = nullptr);
/// Same with exact sampling of an analytic state.
GLState pullback_state(const StateFn& s, const FlowMap& fm);

/// max |curl_h A_t - (h o Phi_t^{-1}) det D(Phi_t^{-1})| over nodes at least `margin` cells inside,
/// with h the nodal curl of s sampled bilinearly.
double pullback_field_defect(const GLState& s, const FlowMap& fm, int margin = 2);

enum class Functional { gl, e };

struct InnerDifferences {
  double dt = 0;
  double d1 = 0, d2 = 0;            ///< central differences at dt
  double d1_half = 0, d2_half = 0;  ///< at dt/2
  double d1_rich = 0, d2_rich = 0;  ///< Richardson combination (4 f(dt/2) - f(dt)) / 3
  /// Richardson in the grid spacing on top of d*_rich: (4 fine - coarse) / 3 with the coarse grid
  /// taking every other node. NaN unless computed.
  double d1_grid = std::numeric_limits<double>::quiet_NaN(), d2_grid = std::numeric_limits<double>::quiet_NaN();
};

/// Flow differences of G(t) = energy(pullback(s, flow(eta, t))) with bilinear sampling.
InnerDifferences numeric_inner_variations(const GLState& s, const GLParams& p, const TestVectorField& eta, double dt,
                                          Functional which = Functional::gl);
/// Same with exact sampling of an analytic state; the state is sampled on eta's grid. With
/// `grid_richardson` (even nx, ny) the differences are repeated on the half-resolution grid and
/// d*_grid is filled.
InnerDifferences numeric_inner_variations(const StateFn& s, const GLParams& p, const TestVectorField& eta, double dt,
                                          Functional which = Functional::gl, bool grid_richardson = false);

double closed_first_inner(const GLState& s, const GLParams& p, const TestVectorField& eta);
/// Includes the first variation along zeta.
double closed_second_inner(const GLState& s, const GLParams& p, const TestVectorField& eta);

struct InnerPair {
  double d1 = 0, d2 = 0;
};
/// Inner variations of E_eps; d2 includes the first variation along zeta.
InnerPair closed_inner_E(const ComplexField& u, double epsilon, const TestVectorField& eta);

/// First and second derivatives of t -> gl_energy(u + t v, A + t B) at t = 0 of the discrete energy.
InnerPair outer_variations(const GLState& s, const GLParams& p, const ComplexField& v, const VectorField& B);
/// Same for e_energy(u + t v).
InnerPair outer_variations_E(const ComplexField& u, double epsilon, const ComplexField& v);

struct LinkCheck {
  double inner1 = 0, outer1 = 0;  ///< closed delta GL and dGL(v1, B1)
  double inner2 = 0, outer2 = 0;  ///< closed delta^2 GL and dGL(v2, B2) + d^2GL(v1, B1)
  double defect1 = 0, defect2 = 0;
};
/// Both sides of the inner-outer link with v1 = -Du.eta, B1 = -DA.eta - D eta^T A,
/// v2 = D^2u[eta,eta] + Du.zeta, B2 = D^2A[eta,eta] + DA.zeta + D zeta^T A + 2 D eta^T DA.eta.
/// Derivatives of u and A are grid differences.
LinkCheck inner_outer_link_check(const GLState& s, const GLParams& p, const TestVectorField& eta);

struct IdentityValue {
  double lhs = 0, rhs = 0;
  double defect() const;
};
/// (div eta)^2 - tr((D eta)^2) against 2 det D eta at a point.
IdentityValue trace_identity(const EtaJet& j);
/// det(I + tM + t^2/2 N) against 1 + t tr M + t^2/2 (tr N + (tr M)^2 - tr(M^2)).
IdentityValue det_expansion(const std::array<double, 4>& M, const std::array<double, 4>& N, double t);

// One-dimensional reduction: energy int V'^2/2 + f(V) on (a, b) with f(V) = (1 - V^2)^2 / 4.

struct Jet1D {
  double v = 0, d = 0, dd = 0;
};
using Fn1D = std::function<Jet1D(double)>;

/// V = tanh(x / sqrt 2), a monotone critical point.
Fn1D kink_profile();
/// Polynomial bump (1 - ((x - c)/r)^2)^4 on |x - c| < r times amplitude.
Fn1D bump_1d(double c, double r, double amplitude = 1.0);

/// int_a^b |eta'|^2 |V'|^2 (trapezoid on n cells).
double inner_second_1d_closed(const Fn1D& V, const Fn1D& eta, double a, double b, int n);
/// Flow differences of t -> E(V o Phi_t^{-1}) with exact pullback, n cells.
InnerDifferences inner_variations_1d_numeric(const Fn1D& V, const Fn1D& eta, double a, double b, int n, double dt);

}  // namespace gllab

#endif
