#include "gllab/qforms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gllab {

namespace {

using cplx = std::complex<double>;

constexpr double kGLNodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                0.9061798459386640};
constexpr double kGLWeights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                  0.2369268850561891};

// Nodal gradient with both one-sided values at cut lines (equal elsewhere).
struct SideGrad {
  std::vector<double> xl, xr, yl, yr;
};

SideGrad side_gradients(const ScalarField& f, const Cuts& cuts) {
  const auto& g = f.grid;
  SideGrad s;
  s.xr = dx(f, cuts).v;
  s.yr = dy(f, cuts).v;
  s.xl = s.xr;
  s.yl = s.yr;
  for (int c : cuts.columns) {
    if (c < 2 || c > g.nx) continue;
    for (int j = 0; j <= g.ny; ++j)
      s.xl[g.idx(c, j)] = (3 * f(c, j) - 4 * f(c - 1, j) + f(c - 2, j)) / (2 * g.hx());
  }
  for (int r : cuts.rows) {
    if (r < 2 || r > g.ny) continue;
    for (int i = 0; i <= g.nx; ++i)
      s.yl[g.idx(i, r)] = (3 * f(i, r) - 4 * f(i, r - 1) + f(i, r - 2)) / (2 * g.hy());
  }
  return s;
}

// Averages F over the one-sided gradient combinations at each node, then integrates.
double integrate_sided(const GridSpec& g, const SideGrad& s,
                       const std::function<double(std::size_t, double, double)>& F) {
  std::vector<double> vals(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (s.xl[k] == s.xr[k] && s.yl[k] == s.yr[k]) {
      vals[k] = F(k, s.xr[k], s.yr[k]);
    } else {
      vals[k] = 0.25 * (F(k, s.xl[k], s.yl[k]) + F(k, s.xl[k], s.yr[k]) + F(k, s.xr[k], s.yl[k]) +
                        F(k, s.xr[k], s.yr[k]));
    }
  }
  return integrate(g, vals);
}

double det4(const std::array<double, 4>& D) { return D[0] * D[3] - D[1] * D[2]; }
double fro2(const std::array<double, 4>& D) { return D[0] * D[0] + D[1] * D[1] + D[2] * D[2] + D[3] * D[3]; }

// |D eta^T v|^2 with (D eta^T v)_j = sum_i d_j eta_i v_i.
double dtv2(const std::array<double, 4>& D, double v1, double v2) {
  const double a = D[0] * v1 + D[2] * v2;
  const double b = D[1] * v1 + D[3] * v2;
  return a * a + b * b;
}

double measure_term(const VorticityMeasure& mu, const TestVectorField& eta) {
  const auto& g = eta.grid();
  double total = 0;
  if (mu.ac_density) {
    if (!(mu.ac_density->grid == g)) throw std::invalid_argument("q_h: ac density grid mismatch");
    std::vector<double> vals(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      vals[k] = (0.5 * fro2(eta.deta[k]) - det4(eta.deta[k])) * std::abs((*mu.ac_density)[k]);
    total += integrate(g, vals);
  }
  if (mu.line_part) {
    total += line_integral(
        [&](double x, double y) {
          const EtaJet j = eta.fn(x, y);
          const std::array<double, 4> D{j.d[0][0], j.d[0][1], j.d[1][0], j.d[1][1]};
          return 0.5 * fro2(D) - det4(D);
        },
        *mu.line_part, std::min(g.hx(), g.hy()));
  }
  return total;
}

void check_grids(const LimitingField& f, const TestVectorField& eta, const char* what) {
  if (!(f.values.grid == eta.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

bool away_from(const GridSpec& g, const Cuts& cuts, int i, int j, int margin) {
  if (g.boundary_depth(i, j) < margin) return false;
  for (int c : cuts.columns)
    if (std::abs(i - c) < margin) return false;
  for (int r : cuts.rows)
    if (std::abs(j - r) < margin) return false;
  return true;
}

}  // namespace

double integrate_gradient_form(const ScalarField& f, const Cuts& cuts,
                               const std::function<double(std::size_t, double, double)>& F) {
  return integrate_sided(f.grid, side_gradients(f, cuts), F);
}

double Segment::length() const { return std::hypot(p1[0] - p0[0], p1[1] - p0[1]); }

double Segment::density_at(double s) const {
  if (density.size() == 1) return density[0];
  const double pos = std::clamp(s, 0.0, 1.0) * static_cast<double>(density.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), density.size() - 2);
  const double w = pos - static_cast<double>(i);
  return (1 - w) * density[i] + w * density[i + 1];
}

void LineMeasurePart::validate(const GridSpec* g) const {
  for (const auto& s : segments) {
    if (!(s.length() > 0)) throw std::invalid_argument("LineMeasurePart: degenerate segment");
    if (s.density.empty()) throw std::invalid_argument("LineMeasurePart: empty density");
    for (double d : s.density)
      if (!std::isfinite(d)) throw std::invalid_argument("LineMeasurePart: non-finite density");
    if (g) {
      const double tx = 1e-12 * (g->x_max - g->x_min), ty = 1e-12 * (g->y_max - g->y_min);
      for (const auto& p : {s.p0, s.p1})
        if (p[0] < g->x_min - tx || p[0] > g->x_max + tx || p[1] < g->y_min - ty || p[1] > g->y_max + ty)
          throw std::invalid_argument("LineMeasurePart: segment leaves the domain");
    }
  }
}

double line_integral(const std::function<double(double, double)>& f, const LineMeasurePart& lm, double max_sub,
                     LineWeight w) {
  if (!(max_sub > 0)) throw std::invalid_argument("line_integral: max_sub must be positive");
  lm.validate();
  double total = 0;
  for (const auto& s : lm.segments) {
    const double len = s.length();
    const int m = std::max(1, static_cast<int>(std::ceil(len / max_sub - 1e-12)));
    double acc = 0;
    for (int q = 0; q < m; ++q) {
      const double a = static_cast<double>(q) / m, b = static_cast<double>(q + 1) / m;
      for (int k = 0; k < 5; ++k) {
        const double t = 0.5 * (a + b) + 0.5 * (b - a) * kGLNodes[k];
        const double x = s.p0[0] + t * (s.p1[0] - s.p0[0]);
        const double y = s.p0[1] + t * (s.p1[1] - s.p0[1]);
        double d = s.density_at(t);
        if (w == LineWeight::unsigned_density) d = std::abs(d);
        acc += kGLWeights[k] * 0.5 * (b - a) * d * f(x, y);
      }
    }
    total += acc * len;
  }
  return total;
}

double total_variation(const VorticityMeasure& mu, double max_sub) {
  double t = 0;
  if (mu.ac_density) {
    std::vector<double> a(mu.ac_density->v.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::abs(mu.ac_density->v[k]);
    t += integrate(mu.ac_density->grid, a);
  }
  if (mu.line_part) t += line_integral([](double, double) { return 1.0; }, *mu.line_part, max_sub);
  return t;
}

QhParts q_h_parts(const LimitingField& h, const VorticityMeasure& mu, const TestVectorField& eta) {
  if (h.kind != FieldKind::magnetic_h) throw std::invalid_argument("q_h: field must be magnetic_h");
  if (!(h.lambda > 0)) throw std::invalid_argument("q_h: lambda must be positive");
  check_grids(h, eta, "q_h");
  const auto& g = eta.grid();
  const SideGrad s = side_gradients(h.values, h.cuts);
  QhParts r;
  r.field = integrate_sided(g, s, [&](std::size_t k, double gx, double gy) {
    const auto& D = eta.deta[k];
    const double dt = det4(D), dv = D[0] + D[3];
    const double hv = h.values[k];
    return dtv2(D, -gy, gx) - (gx * gx + gy * gy) * dt + hv * hv * (dv * dv - dt);
  });
  r.measure = measure_term(mu, eta);
  r.total = r.field + r.measure / h.lambda;
  return r;
}

double q_h(const LimitingField& h, const VorticityMeasure& mu, const TestVectorField& eta) {
  return q_h_parts(h, mu, eta).total;
}

double q_u(const LimitingField& U, const VorticityMeasure& mu, const TestVectorField& eta) {
  if (U.kind != FieldKind::nonmagnetic_U) throw std::invalid_argument("q_u: field must be nonmagnetic_U");
  check_grids(U, eta, "q_u");
  const auto& g = eta.grid();
  const SideGrad s = side_gradients(U.values, U.cuts);
  const double field = integrate_sided(g, s, [&](std::size_t k, double gx, double gy) {
    const auto& D = eta.deta[k];
    return 0.5 * (dtv2(D, -gy, gx) - (gx * gx + gy * gy) * det4(D));
  });
  return field + measure_term(mu, eta);
}

StressTensor stress_tensor(const LimitingField& f) {
  const auto& g = f.values.grid;
  const ScalarField fx = dx(f.values, f.cuts), fy = dy(f.values, f.cuts);
  StressTensor t{ScalarField(g), ScalarField(g), ScalarField(g)};
  const bool mag = f.kind == FieldKind::magnetic_h;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double a = fx[k], b = fy[k], v = f.values[k];
    const double n2 = a * a + b * b;
    if (mag) {
      const double iso = 0.5 * (n2 + v * v);
      t.t11[k] = a * a - iso;
      t.t12[k] = a * b;
      t.t22[k] = b * b - iso;
    } else {
      t.t11[k] = 2 * a * a - n2;
      t.t12[k] = 2 * a * b;
      t.t22[k] = 2 * b * b - n2;
    }
  }
  return t;
}

double div_stress_residual(const LimitingField& f, int margin) {
  const auto& g = f.values.grid;
  const StressTensor t = stress_tensor(f);
  const ScalarField a = dx(t.t11, f.cuts), b = dy(t.t12, f.cuts), c = dx(t.t12, f.cuts), d = dy(t.t22, f.cuts);
  double worst = 0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      if (!away_from(g, f.cuts, i, j, margin)) continue;
      const auto k = g.idx(i, j);
      worst = std::max(worst, std::hypot(a[k] + b[k], c[k] + d[k]));
    }
  return worst;
}

double hol_residual(const LimitingField& U, int margin) {
  const auto& g = U.values.grid;
  const ScalarField ux = dx(U.values, U.cuts), uy = dy(U.values, U.cuts);
  ScalarField wr(g), wi(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    wr[k] = ux[k] * ux[k] - uy[k] * uy[k];
    wi[k] = -2 * ux[k] * uy[k];
  }
  const ScalarField wrx = dx(wr, U.cuts), wry = dy(wr, U.cuts), wix = dx(wi, U.cuts), wiy = dy(wi, U.cuts);
  double worst = 0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      if (!away_from(g, U.cuts, i, j, margin)) continue;
      const auto k = g.idx(i, j);
      worst = std::max(worst, 0.5 * std::hypot(wrx[k] - wiy[k], wix[k] + wry[k]));
    }
  return worst;
}

IwaniecValues iwaniec_lhs(const LimitingField& U, const TestVectorField& eta) {
  check_grids(U, eta, "iwaniec_lhs");
  const auto& g = eta.grid();
  const ScalarField ux = dx(U.values, U.cuts), uy = dy(U.values, U.cuts);
  std::vector<double> a(g.size()), b(g.size()), m1(g.size()), m2(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto& D = eta.deta[k];
    const cplx uz = 0.5 * cplx(ux[k], -uy[k]);
    const cplx uzb = 0.5 * cplx(ux[k], uy[k]);
    const cplx ez = 0.5 * cplx(D[0] + D[3], D[2] - D[1]);
    const cplx ezb = 0.5 * cplx(D[0] - D[3], D[2] + D[1]);
    a[k] = 0.5 * (std::norm(uz) + std::norm(uzb)) * std::norm(ezb);
    b[k] = std::real(uz * std::conj(uzb) * ez * ezb);
    // matrix form
    const double p1 = -uy[k], p2 = ux[k];
    const double n2 = ux[k] * ux[k] + uy[k] * uy[k];
    const double P[2][2] = {{p1 * p1 - 0.5 * n2, p1 * p2}, {p1 * p2, p2 * p2 - 0.5 * n2}};
    const double f2 = fro2(D);
    double Q[2][2];
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) Q[r][c] = D[2 * r] * D[2 * c] + D[2 * r + 1] * D[2 * c + 1] - (r == c ? 0.5 * f2 : 0.0);
    m1[k] = P[0][0] * Q[0][0] + P[0][1] * Q[0][1] + P[1][0] * Q[1][0] + P[1][1] * Q[1][1];
    m2[k] = n2 * (0.5 * f2 - det4(D));
  }
  IwaniecValues v;
  const double A = integrate(g, a), B = integrate(g, b);
  v.first = integrate(g, m1);
  v.second = integrate(g, m2);
  v.minus_complex = A - B;
  v.plus_complex = A + B;
  // Pointwise, first = -8 Re(U_z conj(U_zbar) eta_z eta_zbar) and second = 8 * (integrand of A).
  v.minus_matrix = (v.second + v.first) / 8;
  v.plus_matrix = (v.second - v.first) / 8;
  return v;
}

std::vector<EtaFn> eta_samples(const GridSpec& g, std::uint64_t seed, int count) {
  constexpr int kLibrary = 20;
  const double mx = 3 * g.hx(), my = 3 * g.hy();
  const double x0 = g.x_min + mx, x1 = g.x_max - mx, y0 = g.y_min + my, y1 = g.y_max - my;
  if (!(x0 < x1 && y0 < y1)) throw std::invalid_argument("eta_samples: grid too coarse");
  std::mt19937_64 rng(seed);
  std::vector<EtaFn> lib;
  for (int m = 0; m < kLibrary; ++m) lib.push_back(random_bump_field(rng(), x0, x1, y0, y1, 1, 1.0));
  std::uniform_int_distribution<int> pick(0, kLibrary - 1);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<EtaFn> out;
  for (int r = 0; r < count; ++r) {
    const int base = (r / 5) % kLibrary;
    const int o1 = pick(rng), o2 = pick(rng);
    const double c1 = coef(rng), c2 = coef(rng);
    auto scaled = [](EtaFn f, double c) {
      return EtaFn([f, c](double x, double y) {
        EtaJet j = f(x, y);
        for (int i = 0; i < 2; ++i) {
          j.v[i] *= c;
          for (int a = 0; a < 2; ++a) {
            j.d[i][a] *= c;
            for (int b = 0; b < 2; ++b) j.dd[i][a][b] *= c;
          }
        }
        return j;
      });
    };
    out.push_back(sum_field({lib[base], scaled(lib[o1], c1), scaled(lib[o2], c2)}));
  }
  return out;
}

VorticityMeasure read_measure_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("read_measure_file: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("read_measure_file: ") + e.what());
  }
  VorticityMeasure mu;
  if (j.contains("ac_density") && !j["ac_density"].is_null()) {
    std::filesystem::path p = j["ac_density"].get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(path).parent_path() / p;
    mu.ac_density = read_scalar_field_file(p.string());
  }
  if (j.contains("segments") && !j["segments"].empty()) {
    LineMeasurePart lp;
    for (const auto& s : j["segments"]) {
      Segment seg;
      seg.p0 = {s.at("p0").at(0).get<double>(), s.at("p0").at(1).get<double>()};
      seg.p1 = {s.at("p1").at(0).get<double>(), s.at("p1").at(1).get<double>()};
      const auto& d = s.at("density");
      if (d.is_number())
        seg.density = {d.get<double>()};
      else
        seg.density = d.get<std::vector<double>>();
      lp.segments.push_back(seg);
    }
    lp.validate(mu.ac_density ? &mu.ac_density->grid : nullptr);
    mu.line_part = lp;
  }
  return mu;
}

void write_measure_file(const std::string& path, const VorticityMeasure& mu, const std::string& ac_path) {
  nlohmann::json j;
  if (mu.ac_density) {
    if (ac_path.empty()) throw std::invalid_argument("write_measure_file: ac density needs a field path");
    write_field_file(ac_path, *mu.ac_density);
    j["ac_density"] = ac_path;
  } else {
    j["ac_density"] = nullptr;
  }
  j["segments"] = nlohmann::json::array();
  if (mu.line_part)
    for (const auto& s : mu.line_part->segments) {
      nlohmann::json e;
      e["p0"] = {s.p0[0], s.p0[1]};
      e["p1"] = {s.p1[0], s.p1[1]};
      if (s.density.size() == 1)
        e["density"] = s.density[0];
      else
        e["density"] = s.density;
      j["segments"].push_back(e);
    }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_measure_file: cannot open " + path);
  os << j.dump(2) << '\n';
}

}  // namespace gllab
