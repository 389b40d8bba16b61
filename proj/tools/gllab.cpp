// gllab command line: one subcommand per pipeline, JSON report per run.
//
// Exit codes: 0 all checks pass, 1 numerical failure or failed check, 2 bad configuration.

#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gllab/caselab.hpp"
#include "gllab/checks.hpp"
#include "gllab/glcore.hpp"
#include "gllab/innervar.hpp"
#include "gllab/io.hpp"
#include "gllab/obstacle.hpp"
#include "gllab/parallel.hpp"
#include "gllab/qforms.hpp"
#include "gllab/solver.hpp"
#include "gllab/vorticity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gllab;

namespace {

/// Raised for configuration problems detected after parsing.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct Check {
  std::string name;
  bool pass;
  double value, tolerance;
};

/// Collects one run's report.
struct Report {
  std::string command;
  json inputs = json::object();
  std::vector<std::string> input_files;
  json results = json::object();
  json tolerances = json::object();
  std::vector<Check> checks;
  std::vector<SuiteReport> suites;
  std::string error;

  void check_at_most(const std::string& name, double v, double tol) {
    checks.push_back({name, std::isfinite(v) && v <= tol, v, tol});
    tolerances[name] = tol;
  }
  bool pass() const {
    if (!error.empty()) return false;
    for (const auto& c : checks)
      if (!c.pass) return false;
    for (const auto& s : suites)
      if (!s.pass()) return false;
    return true;
  }
  json to_json() const {
    std::uint64_t h = fnv1a(inputs.dump());
    for (const auto& f : input_files) h = fnv1a(read_bytes(f), h);
    json cs = json::array();
    for (const auto& c : checks) cs.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"tolerance", c.tolerance}});
    json j{{"command", command},   {"timestamp", utc_timestamp()}, {"inputs", inputs},
           {"inputs_digest", hex64(h)}, {"results", results}, {"tolerances", tolerances},
           {"checks", cs},         {"pass", pass()}};
    if (!suites.empty()) {
      json ss = json::array();
      for (const auto& s : suites) ss.push_back(s.to_json());
      j["suites"] = ss;
    }
    if (!error.empty()) j["error"] = error;
    return j;
  }
};

struct Common {
  std::uint64_t seed = 42;
  std::string out = ".";
  std::string report;
};

fs::path out_path(const Common& c, const std::string& name) { return fs::path(c.out) / name; }

void print_summary(const Report& r) {
  for (const auto& c : r.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " tol=" << c.tolerance << '\n';
  for (const auto& s : r.suites) {
    std::cout << (s.pass() ? "PASS " : "FAIL ") << "suite " << s.suite << " (criterion " << s.criterion << ")\n";
    for (const auto& c : s.checks)
      if (!c.pass) std::cout << "  failed: " << c.name << " value=" << c.value << " tol=" << c.tolerance << '\n';
  }
  if (!r.error.empty()) std::cout << "ERROR " << r.error << '\n';
}

int finish(const Common& c, Report& r) {
  fs::create_directories(c.out);
  const std::string path = c.report.empty() ? out_path(c, r.command + "_report.json").string() : c.report;
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write report " + path);
  os << r.to_json().dump(2) << '\n';
  print_summary(r);
  std::cout << "report: " << path << '\n';
  return r.pass() ? 0 : 1;
}

// --- simulate -----------------------------------------------------------------------------------

struct SimulateOpts {
  int n = 128;
  double half_width = 4, epsilon = 0.25, h_ex = 0, el_tol = 1e-4, tol = 1e-7;
  int degree = 1, max_iters = 3000, reproject = 200;
  std::string method = "lbfgs";
};

void run_simulate(const Common& c, const SimulateOpts& o, Report& r) {
  r.inputs = {{"n", o.n},     {"half_width", o.half_width}, {"epsilon", o.epsilon}, {"h_ex", o.h_ex},
              {"degree", o.degree}, {"method", o.method},   {"max_iters", o.max_iters}, {"tol", o.tol},
              {"reproject_every", o.reproject}, {"seed", c.seed}};
  const GridSpec g = GridSpec::square(o.half_width, o.n);
  GLParams p;
  p.epsilon = o.epsilon;
  p.h_ex = o.h_ex;
  p.validate();
  SolveConfig cfg;
  cfg.method = o.method == "steepest" ? DescentMethod::steepest : DescentMethod::lbfgs;
  cfg.max_iters = o.max_iters;
  cfg.tol_grad = o.tol;
  cfg.reproject_every = o.reproject;
  cfg.validate();
  if (!resolves_core(g, o.epsilon)) std::cerr << "warning: epsilon < 4h, vortex core under-resolved\n";
  GLState s(g);
  s.u = vortex_ansatz(g, 0, 0, o.degree, o.epsilon);
  const auto res = minimize_gl(s, p, cfg);

  fs::create_directories(c.out);
  write_state_manifest(out_path(c, "state.json").string(), res.state, p);
  std::ofstream log(out_path(c, "solve_log.csv"));
  write_solve_log(log, res);

  const auto el = el_residual(res.state, p);
  const double radius = std::min(1.0, o.half_width / 2);
  r.results = {{"iterations", res.iterations},
               {"converged", res.converged},
               {"grad_norm", res.grad_norm},
               {"energy", solver_energy(res.state, p)},
               {"gl_energy", gl_energy(res.state, p)},
               {"el_residual", {{"r1", el.r1}, {"r2", el.r2}, {"r3", el.r3}}},
               {"winding", winding_number(res.state.u, loop_around(g, 0, 0, radius))},
               {"mu_mass_over_2pi", integrate(vorticity_mu(res.state)) / (2 * std::numbers::pi)},
               {"threads", thread_count()},
               {"state", "state.json"},
               {"log", "solve_log.csv"}};
  r.checks.push_back({"converged", res.converged, res.grad_norm, o.tol});
  r.tolerances["converged"] = o.tol;
  r.check_at_most("el_r1", el.r1, o.el_tol);
  r.check_at_most("el_r2", el.r2, o.el_tol);
  r.check_at_most("el_r3", el.r3, o.el_tol);
}

// --- vorticity ----------------------------------------------------------------------------------

struct VorticityOpts {
  std::string state;
  double cx = 0, cy = 0, radius = 1;
};

void run_vorticity(const Common& c, const VorticityOpts& o, Report& r) {
  r.inputs = {{"state", fs::path(o.state).filename().string()}, {"cx", o.cx}, {"cy", o.cy}, {"radius", o.radius}};
  r.input_files.push_back(o.state);
  const auto m = read_state_manifest(o.state);
  const ScalarField mu = vorticity_mu(m.state);
  fs::create_directories(c.out);
  write_field_file(out_path(c, "mu.csv").string(), mu);
  write_field_file(out_path(c, "supercurrent.csv").string(), supercurrent(m.state));
  const auto loop = loop_around(m.state.grid(), o.cx, o.cy, o.radius);
  const double mass = integrate(mu);
  r.results = {{"mu_integral", mass},
               {"mu_integral_over_2pi", mass / (2 * std::numbers::pi)},
               {"winding", winding_number(m.state.u, loop)},
               {"winding_real", winding_real(m.state.u, loop)},
               {"mu", "mu.csv"},
               {"supercurrent", "supercurrent.csv"}};
  r.checks.push_back({"mu finite", std::isfinite(mass), mass, 0});
}

// --- innervar -----------------------------------------------------------------------------------

struct InnervarOpts {
  std::string state;
  int n = 256;
  double half_width = 1, epsilon = 0.5, h_ex = 0.3, dt = 0, tol = 1e-4;
  bool random_eta = false, grid_richardson = true;
};

StatePoint analytic_state(double x, double y) {
  StatePoint q;
  const double rho = 0.8 + 0.15 * std::sin(x) * std::cos(y);
  q.u_re = rho * std::cos(x + y);
  q.u_im = rho * std::sin(x + y);
  q.a1 = 0.3 * std::sin(y) + 0.1;
  q.a2 = 0.2 * std::cos(x * y);
  return q;
}

void run_innervar(const Common& c, const InnervarOpts& o, Report& r) {
  r.inputs = {{"dt", o.dt}, {"tol", o.tol}, {"random_eta", o.random_eta}, {"seed", c.seed}};
  double dt = o.dt;
  GridSpec g;
  GLParams p;
  GLState s;
  if (!o.state.empty()) {
    r.inputs["state"] = fs::path(o.state).filename().string();
    r.input_files.push_back(o.state);
    auto m = read_state_manifest(o.state);
    s = std::move(m.state);
    p = m.params;
    g = s.grid();
  } else {
    r.inputs.update({{"n", o.n}, {"half_width", o.half_width}, {"epsilon", o.epsilon}, {"h_ex", o.h_ex},
                     {"grid_richardson", o.grid_richardson}});
    g = GridSpec::square(o.half_width, o.n);
    p.epsilon = o.epsilon;
    p.h_ex = o.h_ex;
    p.validate();
    s = sample_state(g, analytic_state);
  }
  const double w = 0.9;
  const double cx = 0.5 * (g.x_min + g.x_max), cy = 0.5 * (g.y_min + g.y_max);
  const double ax = 0.5 * (g.x_max - g.x_min) * w, ay = 0.5 * (g.y_max - g.y_min) * w;
  EtaFn fn = o.random_eta ? random_bump_field(c.seed, cx - ax, cx + ax, cy - ay, cy + ay)
                          : bump_field(BumpSpec{cx - ax, cx + 0.95 * ax, cy - 0.9 * ay, cy + ay, 0.8, -0.5, 0.3, 0.4,
                                                3.0 / ax * 0.9, -1.8 / ax * 0.9, 0.3});
  const auto T = make_test_field(g, fn, SupportKind::compact_interior);
  // Bilinear sampling of a stored state adds O(h^2 / dt^2) noise to the second difference.
  if (dt == 0) dt = o.state.empty() ? 0.005 : std::min(0.1, 0.5 * kFlowGuard / std::max(T.max_deta, 1e-12));
  const double c1 = closed_first_inner(s, p, T), c2 = closed_second_inner(s, p, T);
  InnerDifferences nd;
  double n1, n2;
  if (o.state.empty()) {
    nd = numeric_inner_variations(StateFn(analytic_state), p, T, dt, Functional::gl, o.grid_richardson);
    n1 = o.grid_richardson ? nd.d1_grid : nd.d1_rich;
    n2 = o.grid_richardson ? nd.d2_grid : nd.d2_rich;
  } else {
    nd = numeric_inner_variations(s, p, T, dt);
    n1 = nd.d1_rich;
    n2 = nd.d2_rich;
  }
  const double e1 = std::abs(n1 - c1) / std::max(std::abs(c1), 1e-300);
  const double e2 = std::abs(n2 - c2) / std::max(std::abs(c2), 1e-300);
  const auto lk = inner_outer_link_check(s, p, T);
  r.results = {{"d1_numeric", n1},
               {"d2_numeric", n2},
               {"d1_closed", c1},
               {"d2_closed", c2},
               {"defects", {{"d1_relative", e1}, {"d2_relative", e2}, {"link1", lk.defect1}, {"link2", lk.defect2}}},
               {"dt", dt},
               {"richardson_order", 2},
               {"grid_richardson", o.state.empty() && o.grid_richardson}};
  r.check_at_most("d1_relative", e1, o.tol);
  r.check_at_most("d2_relative", e2, o.tol);
}

// --- qform --------------------------------------------------------------------------------------

struct QformOpts {
  std::string field, measure, kind = "h";
  double lambda = 1;
  std::vector<int> cut_columns, cut_rows;
  int count = 20;
  bool expect_nonnegative = false;
  double tol = 1e-8;
};

void run_qform(const Common& c, const QformOpts& o, Report& r) {
  if (o.kind != "h" && o.kind != "U") throw ConfigError("--kind must be h or U");
  r.inputs = {{"field", fs::path(o.field).filename().string()}, {"kind", o.kind}, {"lambda", o.lambda},
              {"cut_columns", o.cut_columns}, {"cut_rows", o.cut_rows}, {"count", o.count}, {"seed", c.seed}};
  r.input_files.push_back(o.field);
  LimitingField f;
  f.values = read_scalar_field_file(o.field);
  f.kind = o.kind == "h" ? FieldKind::magnetic_h : FieldKind::nonmagnetic_U;
  f.lambda = o.lambda;
  f.cuts.columns = o.cut_columns;
  f.cuts.rows = o.cut_rows;
  const GridSpec& g = f.values.grid;
  for (int i : o.cut_columns)
    if (i <= 0 || i >= g.nx) throw ConfigError("cut column outside the grid interior");
  for (int j : o.cut_rows)
    if (j <= 0 || j >= g.ny) throw ConfigError("cut row outside the grid interior");
  VorticityMeasure mu;
  if (!o.measure.empty()) {
    r.inputs["measure"] = fs::path(o.measure).filename().string();
    r.input_files.push_back(o.measure);
    mu = read_measure_file(o.measure);
    if (mu.line_part) mu.line_part->validate(&g);
    if (mu.ac_density && !(mu.ac_density->grid == g)) throw ConfigError("measure density grid differs from field grid");
  }
  json values = json::array();
  double qmin = INFINITY;
  for (const auto& fn : eta_samples(g, c.seed, o.count)) {
    const auto T = make_test_field(g, fn, SupportKind::compact_interior);
    const double q = f.kind == FieldKind::magnetic_h ? q_h(f, mu, T) : q_u(f, mu, T);
    values.push_back(q);
    qmin = std::min(qmin, q);
  }
  r.results = {{"q", values}, {"q_min", qmin}, {"div_stress_residual", div_stress_residual(f)}};
  if (f.kind == FieldKind::nonmagnetic_U) r.results["hol_residual"] = hol_residual(f);
  if (o.expect_nonnegative) {
    r.checks.push_back({"q_min nonnegative", std::isfinite(qmin) && qmin >= -o.tol, qmin, -o.tol});
    r.tolerances["q_min nonnegative"] = -o.tol;
  } else {
    r.checks.push_back({"q finite", std::isfinite(qmin), qmin, 0});
  }
}

// --- prop41 -------------------------------------------------------------------------------------

struct Prop41Opts {
  std::vector<double> Ls{0.5, 1.0, 1.5, 2.0};
  int n = 512;
  double alpha2 = 4, beta2 = 0.75, cert_L = 0.05;
};

void run_prop41(const Common& c, const Prop41Opts& o, Report& r) {
  r.inputs = {{"L", o.Ls}, {"n", o.n}, {"alpha2", o.alpha2}, {"beta2", o.beta2}, {"certificate_L", o.cert_L}};
  fs::create_directories(c.out);
  std::ofstream csv(out_path(c, "prop41.csv"));
  csv.precision(17);
  csv << "L,q_closed,q_quadrature,defect\n";
  json rows = json::array();
  for (double L : o.Ls) {
    const auto q = q_quadrature_vs_closed(L, o.n);
    csv << L << ',' << q.q_closed << ',' << q.q_quadrature << ',' << q.defect << '\n';
    rows.push_back({{"L", L}, {"q_closed", q.q_closed}, {"q_quadrature", q.q_quadrature}, {"defect", q.defect}});
    r.check_at_most("defect L=" + json(L).dump(), q.defect, 1e-3 * (1 + std::abs(q.q_closed)));
  }
  const auto cert = certificate_check(o.cert_L, o.alpha2, o.beta2);
  r.results = {{"table", rows},
               {"csv", "prop41.csv"},
               {"critical_L", critical_L()},
               {"certificate", {{"alpha2", o.alpha2}, {"beta2", o.beta2}, {"L", o.cert_L}, {"margins", cert.margins}, {"ok", cert.ok}}}};
  const double m = std::min({cert.margins[0], cert.margins[1], cert.margins[2]});
  r.checks.push_back({"certificate", cert.ok, m, 0});
  r.tolerances["certificate"] = 0;
}

// --- obstacle -----------------------------------------------------------------------------------

struct ObstacleOpts {
  double lambda = 0.2, tol = 1e-10, omega = 1.9, half_width = 1;
  int n = 256, max_iters = 200000;
};

void run_obstacle(const Common& c, const ObstacleOpts& o, Report& r) {
  r.inputs = {{"lambda", o.lambda}, {"n", o.n}, {"tol", o.tol}, {"omega", o.omega}, {"half_width", o.half_width},
              {"max_iters", o.max_iters}};
  ObstacleOptions opt;
  opt.tol = o.tol;
  opt.omega = o.omega;
  opt.max_iters = o.max_iters;
  const auto sol = solve_obstacle(o.lambda, GridSpec::square(o.half_width, o.n), opt);
  fs::create_directories(c.out);
  write_field_file(out_path(c, "h_star.csv").string(), sol.h_star);
  write_field_file(out_path(c, "mu_star.csv").string(), sol.mu_star);
  const auto k = kkt_report(sol);
  int cnt = 0;
  for (auto v : sol.coincidence) cnt += v;
  r.results = {{"iterations", sol.iterations},
               {"residual", sol.residual},
               {"coincidence_nodes", cnt},
               {"mu_mass", integrate(sol.mu_star)},
               {"e_lambda", e_lambda(sol.h_star, o.lambda)},
               {"kkt", {{"feasibility", k.feasibility}, {"dual_feasibility", k.dual_feasibility}, {"complementarity", k.complementarity}}},
               {"h_star", "h_star.csv"},
               {"mu_star", "mu_star.csv"}};
  const double kt = 10 * o.tol;
  r.check_at_most("feasibility", k.feasibility, kt);
  r.check_at_most("dual_feasibility", k.dual_feasibility, kt);
  r.check_at_most("complementarity", k.complementarity, kt);
}

// --- check --------------------------------------------------------------------------------------

struct CheckOpts {
  std::vector<std::string> suites;
  bool all = false;
};

void run_check(const Common& c, const CheckOpts& o, Report& r) {
  if (o.all == !o.suites.empty()) throw ConfigError("give either --all or at least one --suite");
  const auto& names = suite_names();
  const std::vector<std::string> list = o.all ? names : o.suites;
  for (const auto& s : list)
    if (std::find(names.begin(), names.end(), s) == names.end()) throw ConfigError("unknown suite: " + s);
  r.inputs = {{"suites", list}, {"seed", c.seed}};
  json summary = json::object();
  for (const auto& s : list) {
    r.suites.push_back(run_suite(s, c.seed));
    summary[s] = r.suites.back().pass();
  }
  r.results = {{"suite_pass", summary}, {"threads", thread_count()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ginzburg-Landau stability laboratory"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "random seed")->capture_default_str();
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
    sub->add_option("--report", common.report, "report path (default <out>/<command>_report.json)");
  };

  SimulateOpts so;
  auto* sim = app.add_subcommand("simulate", "relax a vortex ansatz and write the state");
  sim->add_option("--n", so.n)->check(CLI::Range(8, 4096))->capture_default_str();
  sim->add_option("--half-width", so.half_width)->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--epsilon", so.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--hex", so.h_ex)->capture_default_str();
  sim->add_option("--degree", so.degree)->check(CLI::Range(-8, 8))->capture_default_str();
  sim->add_option("--method", so.method)->check(CLI::IsMember({"lbfgs", "steepest"}))->capture_default_str();
  sim->add_option("--max-iters", so.max_iters)->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--tol", so.tol, "gradient norm tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--reproject", so.reproject, "Coulomb re-projection period")->check(CLI::NonNegativeNumber)->capture_default_str();
  sim->add_option("--el-tol", so.el_tol)->check(CLI::PositiveNumber)->capture_default_str();
  add_common(sim);

  VorticityOpts vo;
  auto* vor = app.add_subcommand("vorticity", "vorticity measure and winding of a stored state");
  vor->add_option("--state", vo.state, "state manifest")->required()->check(CLI::ExistingFile);
  vor->add_option("--cx", vo.cx)->capture_default_str();
  vor->add_option("--cy", vo.cy)->capture_default_str();
  vor->add_option("--radius", vo.radius)->check(CLI::PositiveNumber)->capture_default_str();
  add_common(vor);

  InnervarOpts io;
  auto* inn = app.add_subcommand("innervar", "closed inner variations against flow differences");
  inn->add_option("--state", io.state, "state manifest (default: built-in analytic state)")->check(CLI::ExistingFile);
  inn->add_option("--n", io.n)->check(CLI::Range(16, 4096))->capture_default_str();
  inn->add_option("--half-width", io.half_width)->check(CLI::PositiveNumber)->capture_default_str();
  inn->add_option("--epsilon", io.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
  inn->add_option("--hex", io.h_ex)->capture_default_str();
  inn->add_option("--dt", io.dt, "flow step (default 0.005 analytic, 0.1 stored state)")->check(CLI::PositiveNumber);
  inn->add_option("--tol", io.tol, "relative tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  inn->add_flag("--random-eta", io.random_eta, "seeded random bump instead of the fixed bump");
  inn->add_flag("!--no-grid-richardson", io.grid_richardson, "skip the half-resolution repeat");
  add_common(inn);

  QformOpts qo;
  auto* qf = app.add_subcommand("qform", "limiting quadratic form over seeded test fields");
  qf->add_option("--field", qo.field, "scalar field file")->required()->check(CLI::ExistingFile);
  qf->add_option("--kind", qo.kind, "h (magnetic) or U (nonmagnetic)")->check(CLI::IsMember({"h", "U"}))->capture_default_str();
  qf->add_option("--measure", qo.measure, "measure file")->check(CLI::ExistingFile);
  qf->add_option("--lambda", qo.lambda)->check(CLI::PositiveNumber)->capture_default_str();
  qf->add_option("--cut-column", qo.cut_columns, "node column of a kink line");
  qf->add_option("--cut-row", qo.cut_rows, "node row of a kink line");
  qf->add_option("--count", qo.count, "number of test fields")->check(CLI::Range(1, 100000))->capture_default_str();
  qf->add_flag("--expect-nonnegative", qo.expect_nonnegative, "fail when min q < -tol");
  qf->add_option("--tol", qo.tol)->check(CLI::PositiveNumber)->capture_default_str();
  add_common(qf);

  Prop41Opts po;
  auto* p41 = app.add_subcommand("prop41", "line example: quadrature vs closed form, threshold, certificate");
  p41->add_option("--L", po.Ls, "half-widths")->check(CLI::PositiveNumber)->capture_default_str();
  p41->add_option("--n", po.n)->check(CLI::Range(8, 8192))->capture_default_str();
  p41->add_option("--alpha2", po.alpha2)->capture_default_str();
  p41->add_option("--beta2", po.beta2)->capture_default_str();
  p41->add_option("--cert-L", po.cert_L)->check(CLI::PositiveNumber)->capture_default_str();
  add_common(p41);

  ObstacleOpts oo;
  auto* obs = app.add_subcommand("obstacle", "obstacle problem for the limiting field");
  obs->add_option("--lambda", oo.lambda)->check(CLI::PositiveNumber)->capture_default_str();
  obs->add_option("--n", oo.n)->check(CLI::Range(2, 4096))->capture_default_str();
  obs->add_option("--tol", oo.tol)->check(CLI::PositiveNumber)->capture_default_str();
  obs->add_option("--omega", oo.omega)->check(CLI::Range(1.0, 1.9))->capture_default_str();
  obs->add_option("--half-width", oo.half_width)->check(CLI::PositiveNumber)->capture_default_str();
  obs->add_option("--max-iters", oo.max_iters)->check(CLI::PositiveNumber)->capture_default_str();
  add_common(obs);

  CheckOpts co;
  auto* chk = app.add_subcommand("check", "run check suites");
  chk->add_option("--suite", co.suites, "suite name (repeatable)");
  chk->add_flag("--all", co.all, "run every suite");
  add_common(chk);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Report r;
  r.command = app.get_subcommands().front()->get_name();
  try {
    if (*sim) run_simulate(common, so, r);
    if (*vor) run_vorticity(common, vo, r);
    if (*inn) run_innervar(common, io, r);
    if (*qf) run_qform(common, qo, r);
    if (*p41) run_prop41(common, po, r);
    if (*obs) run_obstacle(common, oo, r);
    if (*chk) run_check(common, co, r);
  } catch (const NumericalError& e) {
    r.error = e.what();
    r.results["last_residual"] = e.residual();
    try {
      finish(common, r);
    } catch (const std::exception& w) {
      std::cerr << "error: " << w.what() << '\n';
    }
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad configuration: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "bad configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    // I/O and parse failures of input files count as configuration errors.
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    return finish(common, r);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
