#ifndef GLLAB_IO_HPP
#define GLLAB_IO_HPP

#include <string>

#include "gllab/glcore.hpp"

namespace gllab {

/// State manifest: {"u": path, "A": path, "epsilon", "h_ex", "lambda"}. u is stored as a two-column
/// vector field file (re, im). Relative paths resolve against the manifest's directory.
struct StateManifest {
  GLState state;
  GLParams params;
};

/// Writes <stem>_u.csv and <stem>_A.csv next to the manifest and the manifest itself.
void write_state_manifest(const std::string& path, const GLState& s, const GLParams& p);
/// Throws std::runtime_error on unreadable files and std::invalid_argument on mismatched grids.
StateManifest read_state_manifest(const std::string& path);

}  // namespace gllab

#endif
