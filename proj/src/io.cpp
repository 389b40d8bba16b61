#include "gllab/io.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gllab {

namespace fs = std::filesystem;

void write_state_manifest(const std::string& path, const GLState& s, const GLParams& p) {
  s.validate();
  const fs::path mp(path);
  const std::string stem = mp.stem().string();
  const std::string u_name = stem + "_u.csv", a_name = stem + "_A.csv";
  const fs::path dir = mp.has_parent_path() ? mp.parent_path() : fs::path(".");

  VectorField u(s.grid());
  u.x = s.u.re;
  u.y = s.u.im;
  write_field_file((dir / u_name).string(), u);
  write_field_file((dir / a_name).string(), s.A);

  nlohmann::json j{{"u", u_name}, {"A", a_name}, {"epsilon", p.epsilon}, {"h_ex", p.h_ex}, {"lambda", p.lambda}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_state_manifest: cannot open " + path);
  os << j.dump(2) << '\n';
}

StateManifest read_state_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_state_manifest: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("read_state_manifest: ") + e.what());
  }
  const fs::path dir = fs::path(path).has_parent_path() ? fs::path(path).parent_path() : fs::path(".");
  auto resolve = [&](const std::string& key) {
    if (!j.contains(key) || !j[key].is_string()) throw std::invalid_argument("read_state_manifest: missing " + key);
    fs::path p = j[key].get<std::string>();
    return (p.is_absolute() ? p : dir / p).string();
  };
  const VectorField u = read_vector_field_file(resolve("u"));
  StateManifest m;
  m.state.A = read_vector_field_file(resolve("A"));
  if (!(u.grid == m.state.A.grid)) throw std::invalid_argument("read_state_manifest: u and A grids differ");
  m.state.u = ComplexField(u.grid);
  m.state.u.re = u.x;
  m.state.u.im = u.y;
  m.params.epsilon = j.value("epsilon", 1.0);
  m.params.h_ex = j.value("h_ex", 0.0);
  m.params.lambda = j.value("lambda", 1.0);
  m.params.validate();
  m.state.validate();
  return m;
}

}  // namespace gllab
