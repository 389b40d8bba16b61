#ifndef GLLAB_GRID_HPP
#define GLLAB_GRID_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace gllab {

/// Node-centered rectangular grid with (nx+1)(ny+1) nodes stored row-major (x fastest).
struct GridSpec {
  double x_min = -1.0, x_max = 1.0, y_min = -1.0, y_max = 1.0;
  int nx = 8, ny = 8;

  GridSpec() = default;
  GridSpec(double x0, double x1, double y0, double y1, int nx_, int ny_);

  static GridSpec square(double half_width, int n) { return {-half_width, half_width, -half_width, half_width, n, n}; }

  double hx() const { return (x_max - x_min) / nx; }
  double hy() const { return (y_max - y_min) / ny; }
  double x(int i) const { return x_min + i * hx(); }
  double y(int j) const { return y_min + j * hy(); }
  std::size_t size() const { return static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny + 1); }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * (nx + 1) + i; }
  bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx || j == ny; }
  /// Distance in cells to the nearest boundary line.
  int boundary_depth(int i, int j) const;
  /// Trapezoid weight of node (i,j).
  double weight(int i, int j) const;
  double area() const { return (x_max - x_min) * (y_max - y_min); }

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

struct ScalarField {
  GridSpec grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double value = 0.0) : grid(g), v(g.size(), value) {}
  double& operator()(int i, int j) { return v[grid.idx(i, j)]; }
  double operator()(int i, int j) const { return v[grid.idx(i, j)]; }
  double& operator[](std::size_t k) { return v[k]; }
  double operator[](std::size_t k) const { return v[k]; }
};

struct VectorField {
  GridSpec grid;
  std::vector<double> x, y;

  VectorField() = default;
  explicit VectorField(const GridSpec& g) : grid(g), x(g.size(), 0.0), y(g.size(), 0.0) {}
  ScalarField component(int c) const;
};

/// Complex node field stored as two real arrays.
struct ComplexField {
  GridSpec grid;
  std::vector<double> re, im;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& g) : grid(g), re(g.size(), 0.0), im(g.size(), 0.0) {}
};

/// Axis-aligned grid lines across which fields may have kinks (one-sided stencils are used on each side).
struct Cuts {
  std::vector<int> columns;  ///< node indices i of vertical lines x = x(i)
  std::vector<int> rows;     ///< node indices j of horizontal lines y = y(j)
  bool empty() const { return columns.empty() && rows.empty(); }
};

ScalarField sample(const GridSpec& g, const std::function<double(double, double)>& f);
VectorField sample_vector(const GridSpec& g, const std::function<void(double, double, double&, double&)>& f);

double integrate(const ScalarField& f);
/// Trapezoid integral of a nodewise integrand given as a flat array on g.
double integrate(const GridSpec& g, const std::vector<double>& values);

ScalarField dx(const ScalarField& f, const Cuts& cuts = {});
ScalarField dy(const ScalarField& f, const Cuts& cuts = {});
VectorField grad(const ScalarField& f, const Cuts& cuts = {});
ScalarField div(const VectorField& v);
ScalarField curl(const VectorField& v);
VectorField perp_grad(const ScalarField& f, const Cuts& cuts = {});

/// Raw stencil kernels on flat arrays. The transposes are the exact adjoints of dx/dy as linear maps.
void apply_dx(const GridSpec& g, const double* in, double* out);
void apply_dy(const GridSpec& g, const double* in, double* out);
void apply_dx_t(const GridSpec& g, const double* in, double* out);
void apply_dy_t(const GridSpec& g, const double* in, double* out);

/// Bilinear interpolation. Points outside the rectangle are clamped; `clamped` is set when that happens.
double interp(const ScalarField& f, double x, double y, bool* clamped = nullptr);
double interp(const GridSpec& g, const std::vector<double>& values, double x, double y, bool* clamped = nullptr);

double max_abs(const std::vector<double>& v);
void require_finite(const std::vector<double>& v, const char* what);

/// Field file: one JSON header line then CSV node values at 17 significant digits.
void write_field(std::ostream& os, const ScalarField& f);
void write_field(std::ostream& os, const VectorField& f);
void write_field_file(const std::string& path, const ScalarField& f);
void write_field_file(const std::string& path, const VectorField& f);
ScalarField read_scalar_field(std::istream& is);
VectorField read_vector_field(std::istream& is);
ScalarField read_scalar_field_file(const std::string& path);
VectorField read_vector_field_file(const std::string& path);

}  // namespace gllab

#endif
