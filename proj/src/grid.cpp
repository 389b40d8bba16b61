#include "gllab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gllab {

GridSpec::GridSpec(double x0, double x1, double y0, double y1, int nx_, int ny_)
    : x_min(x0), x_max(x1), y_min(y0), y_max(y1), nx(nx_), ny(ny_) {
  validate();
}

void GridSpec::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) throw std::invalid_argument("grid: empty rectangle");
  if (nx < 8 || ny < 8) throw std::invalid_argument("grid: nx and ny must be >= 8");
}

int GridSpec::boundary_depth(int i, int j) const { return std::min(std::min(i, nx - i), std::min(j, ny - j)); }

double GridSpec::weight(int i, int j) const {
  double w = hx() * hy();
  if (i == 0 || i == nx) w *= 0.5;
  if (j == 0 || j == ny) w *= 0.5;
  return w;
}

ScalarField VectorField::component(int c) const {
  ScalarField f(grid);
  f.v = c == 0 ? x : y;
  return f;
}

ScalarField sample(const GridSpec& g, const std::function<double(double, double)>& f) {
  ScalarField out(g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) out(i, j) = f(g.x(i), g.y(j));
  return out;
}

VectorField sample_vector(const GridSpec& g, const std::function<void(double, double, double&, double&)>& f) {
  VectorField out(g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const auto k = g.idx(i, j);
      f(g.x(i), g.y(j), out.x[k], out.y[k]);
    }
  return out;
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double a : v)
    if (!std::isfinite(a)) throw std::domain_error(std::string(what) + ": non-finite value");
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

double integrate(const GridSpec& g, const std::vector<double>& values) {
  if (values.size() != g.size()) throw std::invalid_argument("integrate: size mismatch");
  double total = 0.0;
  for (int j = 0; j <= g.ny; ++j) {
    const double cy = (j == 0 || j == g.ny) ? 0.5 : 1.0;
    double row = 0.0;
    for (int i = 0; i <= g.nx; ++i) {
      const double a = values[g.idx(i, j)];
      if (!std::isfinite(a)) throw std::domain_error("integrate: non-finite value");
      row += (i == 0 || i == g.nx) ? 0.5 * a : a;
    }
    total += cy * row;
  }
  return total * g.hx() * g.hy();
}

double integrate(const ScalarField& f) { return integrate(f.grid, f.v); }

namespace {

// Second-order derivative along one line of n+1 samples with spacing h, split at `breaks`
// (sorted node indices strictly inside). A node on a break takes the value from the piece on its right.
void deriv_line(const double* in, std::size_t stride, int n, double h, const std::vector<int>& breaks, double* out) {
  const double c = 0.5 / h;
  int start = 0;
  auto piece = [&](int a, int b) {
    if (b - a < 2) throw std::invalid_argument("derivative: piece shorter than two cells");
    for (int i = a + 1; i < b; ++i) out[i * stride] = c * (in[(i + 1) * stride] - in[(i - 1) * stride]);
    out[b * stride] = c * (3.0 * in[b * stride] - 4.0 * in[(b - 1) * stride] + in[(b - 2) * stride]);
    out[a * stride] = c * (-3.0 * in[a * stride] + 4.0 * in[(a + 1) * stride] - in[(a + 2) * stride]);
  };
  for (int b : breaks) {
    if (b <= start || b >= n) continue;
    piece(start, b);
    start = b;
  }
  piece(start, n);
}

// Adjoint of deriv_line without breaks: out = D^T in.
void deriv_line_t(const double* in, std::size_t stride, int n, double h, double* out) {
  const double c = 0.5 / h;
  for (int i = 0; i <= n; ++i) out[i * stride] = 0.0;
  auto add = [&](int col, double coef, double val) { out[col * stride] += coef * val; };
  add(0, -3.0 * c, in[0]);
  add(1, 4.0 * c, in[0]);
  add(2, -c, in[0]);
  for (int i = 1; i < n; ++i) {
    const double a = in[i * stride];
    add(i + 1, c, a);
    add(i - 1, -c, a);
  }
  const double b = in[n * stride];
  add(n, 3.0 * c, b);
  add(n - 1, -4.0 * c, b);
  add(n - 2, c, b);
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

void apply_dx(const GridSpec& g, const double* in, double* out) {
  static const std::vector<int> none;
  for (int j = 0; j <= g.ny; ++j) deriv_line(in + g.idx(0, j), 1, g.nx, g.hx(), none, out + g.idx(0, j));
}

void apply_dy(const GridSpec& g, const double* in, double* out) {
  static const std::vector<int> none;
  const std::size_t stride = g.nx + 1;
  for (int i = 0; i <= g.nx; ++i) deriv_line(in + i, stride, g.ny, g.hy(), none, out + i);
}

void apply_dx_t(const GridSpec& g, const double* in, double* out) {
  for (int j = 0; j <= g.ny; ++j) deriv_line_t(in + g.idx(0, j), 1, g.nx, g.hx(), out + g.idx(0, j));
}

void apply_dy_t(const GridSpec& g, const double* in, double* out) {
  const std::size_t stride = g.nx + 1;
  for (int i = 0; i <= g.nx; ++i) deriv_line_t(in + i, stride, g.ny, g.hy(), out + i);
}

ScalarField dx(const ScalarField& f, const Cuts& cuts) {
  ScalarField out(f.grid);
  const auto& g = f.grid;
  const auto breaks = sorted_unique(cuts.columns);
  for (int j = 0; j <= g.ny; ++j) deriv_line(f.v.data() + g.idx(0, j), 1, g.nx, g.hx(), breaks, out.v.data() + g.idx(0, j));
  return out;
}

ScalarField dy(const ScalarField& f, const Cuts& cuts) {
  ScalarField out(f.grid);
  const auto& g = f.grid;
  const auto breaks = sorted_unique(cuts.rows);
  const std::size_t stride = g.nx + 1;
  for (int i = 0; i <= g.nx; ++i) deriv_line(f.v.data() + i, stride, g.ny, g.hy(), breaks, out.v.data() + i);
  return out;
}

VectorField grad(const ScalarField& f, const Cuts& cuts) {
  VectorField out(f.grid);
  out.x = dx(f, cuts).v;
  out.y = dy(f, cuts).v;
  return out;
}

VectorField perp_grad(const ScalarField& f, const Cuts& cuts) {
  VectorField out(f.grid);
  out.y = dx(f, cuts).v;
  out.x = dy(f, cuts).v;
  for (double& a : out.x) a = -a;
  return out;
}

ScalarField div(const VectorField& v) {
  ScalarField out(v.grid);
  std::vector<double> tmp(v.grid.size());
  apply_dx(v.grid, v.x.data(), out.v.data());
  apply_dy(v.grid, v.y.data(), tmp.data());
  for (std::size_t k = 0; k < tmp.size(); ++k) out.v[k] += tmp[k];
  return out;
}

ScalarField curl(const VectorField& v) {
  ScalarField out(v.grid);
  std::vector<double> tmp(v.grid.size());
  apply_dx(v.grid, v.y.data(), out.v.data());
  apply_dy(v.grid, v.x.data(), tmp.data());
  for (std::size_t k = 0; k < tmp.size(); ++k) out.v[k] -= tmp[k];
  return out;
}

double interp(const GridSpec& g, const std::vector<double>& values, double x, double y, bool* clamped) {
  bool out = false;
  if (x < g.x_min) { x = g.x_min; out = true; }
  if (x > g.x_max) { x = g.x_max; out = true; }
  if (y < g.y_min) { y = g.y_min; out = true; }
  if (y > g.y_max) { y = g.y_max; out = true; }
  if (clamped && out) *clamped = true;
  const double sx = (x - g.x_min) / g.hx(), sy = (y - g.y_min) / g.hy();
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, g.nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, g.ny - 1);
  const double a = sx - i, b = sy - j;
  return (1 - a) * (1 - b) * values[g.idx(i, j)] + a * (1 - b) * values[g.idx(i + 1, j)] +
         (1 - a) * b * values[g.idx(i, j + 1)] + a * b * values[g.idx(i + 1, j + 1)];
}

double interp(const ScalarField& f, double x, double y, bool* clamped) { return interp(f.grid, f.v, x, y, clamped); }

// ---- field files ----

namespace {

nlohmann::json grid_json(const GridSpec& g) {
  return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"y_min", g.y_min}, {"y_max", g.y_max}, {"nx", g.nx}, {"ny", g.ny}};
}

std::string fmt17(double a) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", a);
  return buf;
}

GridSpec read_header(std::istream& is, const std::string& want_kind) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("field file: missing header");
  const auto h = nlohmann::json::parse(line);
  if (h.at("kind").get<std::string>() != want_kind)
    throw std::runtime_error("field file: expected kind '" + want_kind + "'");
  const auto& gj = h.at("grid");
  return GridSpec(gj.at("x_min").get<double>(), gj.at("x_max").get<double>(), gj.at("y_min").get<double>(),
                  gj.at("y_max").get<double>(), gj.at("nx").get<int>(), gj.at("ny").get<int>());
}

std::vector<std::vector<double>> read_rows(std::istream& is, std::size_t count, int cols) {
  std::vector<std::vector<double>> out(cols, std::vector<double>(count));
  std::string line;
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(is, line)) throw std::runtime_error("field file: truncated data");
    const char* p = line.c_str();
    for (int c = 0; c < cols; ++c) {
      char* end = nullptr;
      out[c][k] = std::strtod(p, &end);
      if (end == p) throw std::runtime_error("field file: bad number at row " + std::to_string(k));
      p = end;
      if (c + 1 < cols) {
        if (*p != ',') throw std::runtime_error("field file: expected ',' at row " + std::to_string(k));
        ++p;
      }
    }
  }
  for (auto& col : out) require_finite(col, "field file");
  return out;
}

}  // namespace

void write_field(std::ostream& os, const ScalarField& f) {
  os << nlohmann::json{{"grid", grid_json(f.grid)}, {"kind", "scalar"}}.dump() << '\n';
  for (double a : f.v) os << fmt17(a) << '\n';
}

void write_field(std::ostream& os, const VectorField& f) {
  os << nlohmann::json{{"grid", grid_json(f.grid)}, {"kind", "vector"}}.dump() << '\n';
  for (std::size_t k = 0; k < f.x.size(); ++k) os << fmt17(f.x[k]) << ',' << fmt17(f.y[k]) << '\n';
}

ScalarField read_scalar_field(std::istream& is) {
  ScalarField f(read_header(is, "scalar"));
  f.v = read_rows(is, f.grid.size(), 1)[0];
  return f;
}

VectorField read_vector_field(std::istream& is) {
  VectorField f(read_header(is, "vector"));
  auto rows = read_rows(is, f.grid.size(), 2);
  f.x = std::move(rows[0]);
  f.y = std::move(rows[1]);
  return f;
}

namespace {
template <class F>
void write_to(const std::string& path, const F& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_field(os, f);
}
std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return is;
}
}  // namespace

void write_field_file(const std::string& path, const ScalarField& f) { write_to(path, f); }
void write_field_file(const std::string& path, const VectorField& f) { write_to(path, f); }
ScalarField read_scalar_field_file(const std::string& path) {
  auto is = open_in(path);
  return read_scalar_field(is);
}
VectorField read_vector_field_file(const std::string& path) {
  auto is = open_in(path);
  return read_vector_field(is);
}

}  // namespace gllab
