#ifndef GLLAB_QFORMS_HPP
#define GLLAB_QFORMS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gllab/grid.hpp"
#include "gllab/innervar.hpp"

namespace gllab {

/// Straight segment carrying a signed density. `density` holds one value (constant) or samples at
/// equispaced points from p0 to p1 (both ends included), interpolated linearly in arclength.
struct Segment {
  std::array<double, 2> p0{}, p1{};
  std::vector<double> density{1.0};
  double length() const;
  double density_at(double s) const;  ///< s in [0, 1] along the segment
};

struct LineMeasurePart {
  std::vector<Segment> segments;
  /// Throws std::invalid_argument on degenerate segments, empty or non-finite densities, or (when g
  /// is given) segments leaving the closed rectangle.
  void validate(const GridSpec* g = nullptr) const;
};

struct VorticityMeasure {
  std::optional<ScalarField> ac_density;
  std::optional<LineMeasurePart> line_part;
  bool empty() const { return !ac_density && !line_part; }
};

enum class FieldKind { magnetic_h, nonmagnetic_U };

/// Limiting field h (magnetic) or U (nonmagnetic). `cuts` are grid lines across which the field
/// may have kinks; derivatives there are one-sided.
struct LimitingField {
  ScalarField values;
  FieldKind kind = FieldKind::magnetic_h;
  double lambda = 1.0;
  Cuts cuts;
};

enum class LineWeight { unsigned_density, signed_density };

/// Trapezoid integral of F(node, d_x f, d_y f). At cut nodes F is averaged over the one-sided
/// derivative values, which is the trapezoid rule on each side of the cut.
double integrate_gradient_form(const ScalarField& f, const Cuts& cuts,
                               const std::function<double(std::size_t, double, double)>& F);

/// Composite 5-point Gauss-Legendre along every segment, subsegments no longer than max_sub.
double line_integral(const std::function<double(double, double)>& f, const LineMeasurePart& lm, double max_sub,
                     LineWeight w = LineWeight::unsigned_density);

/// |mu|(Omega): trapezoid mass of |ac| plus line mass.
double total_variation(const VorticityMeasure& mu, double max_sub);

/// Field terms plus (1/lambda) times the measure term, with the measure integrand
/// |D eta|^2/2 - det D eta. D eta at line points comes from eta.fn.
double q_h(const LimitingField& h, const VorticityMeasure& mu, const TestVectorField& eta);

/// Pieces of q_h, for reporting.
struct QhParts {
  double field = 0;    ///< int |D eta^T perp grad h|^2 - |grad h|^2 det D eta + h^2 ((div eta)^2 - det D eta)
  double measure = 0;  ///< int (|D eta|^2/2 - det D eta) d|mu|, before the 1/lambda factor
  double total = 0;
};
QhParts q_h_parts(const LimitingField& h, const VorticityMeasure& mu, const TestVectorField& eta);

/// 1/2 int (|D eta^T perp grad U|^2 - |grad U|^2 det D eta) + int (|D eta|^2/2 - det D eta) d|mu|.
double q_u(const LimitingField& U, const VorticityMeasure& mu, const TestVectorField& eta);

/// Stress tensor components at nodes: T_h = grad h (x) grad h - (|grad h|^2 + h^2)/2 Id for
/// magnetic fields, S_U = 2 grad U (x) grad U - |grad U|^2 Id otherwise.
struct StressTensor {
  ScalarField t11, t12, t22;
};
StressTensor stress_tensor(const LimitingField& f);
/// max |div T| over nodes at least `margin` cells from the boundary and from every cut.
double div_stress_residual(const LimitingField& f, int margin = 2);

/// max |d_zbar W| with W = (d_x U)^2 - (d_y U)^2 - 2i d_x U d_y U, same exclusion as above.
double hol_residual(const LimitingField& U, int margin = 2);

/// Both sides of the complex/matrix bookkeeping for
/// minus = 1/2 int (|U_z|^2 + |U_zbar|^2) |eta_zbar|^2 - Re int U_z conj(U_zbar) eta_z eta_zbar
/// (and `plus` with the sign of the last term flipped), eta = eta1 + i eta2.
/// The matrix forms are (second +/- first)/8 with
/// first = int (perp U (x) perp U - |grad U|^2/2 Id) : (D eta D eta^T - |D eta|^2/2 Id) and
/// second = int |grad U|^2 (|D eta|^2/2 - det D eta).
struct IwaniecValues {
  double minus_complex = 0, minus_matrix = 0;
  double plus_complex = 0, plus_matrix = 0;
  double first = 0, second = 0;
};
IwaniecValues iwaniec_lhs(const LimitingField& U, const TestVectorField& eta);

/// Seeded compactly supported test fields: a library of 20 random sine-bump fields inside the
/// grid (3 cells clear of the boundary); sample r is library field r/5 (mod 20) plus a random
/// combination of two other library fields.
std::vector<EtaFn> eta_samples(const GridSpec& g, std::uint64_t seed, int count);

/// Measure file: {"ac_density": optional field-file path, "segments": [{"p0": [x, y], "p1": [x, y],
/// "density": number or array}]}. Relative paths resolve against the file's directory.
VorticityMeasure read_measure_file(const std::string& path);
void write_measure_file(const std::string& path, const VorticityMeasure& mu, const std::string& ac_path = "");

}  // namespace gllab

#endif
