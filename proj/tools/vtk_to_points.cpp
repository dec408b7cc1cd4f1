// Extracts the POINTS section of a legacy ASCII VTK file into the plain point format.
//
//   vtk_to_points INPUT.vtk OUTPUT.txt [--dim 2|3]
//
// With --dim 2 the third coordinate is dropped.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fanning/point_io.hpp"

namespace {

fanning::Points read_vtk_points(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw fanning::io::FormatError(path + ": cannot open file");
  std::string word;
  while (in >> word) {
    if (word != "POINTS") continue;
    long count = 0;
    std::string type;
    if (!(in >> count >> type) || count < 1) throw fanning::io::FormatError(path + ": malformed POINTS header");
    fanning::Points pts(count, dim);
    for (long i = 0; i < count; ++i) {
      double xyz[3];
      for (double& v : xyz) {
        if (!(in >> v)) throw fanning::io::FormatError(path + ": truncated POINTS section");
      }
      for (int k = 0; k < dim; ++k) pts(i, k) = xyz[k];
    }
    return pts;
  }
  throw fanning::io::FormatError(path + ": no POINTS section");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convert legacy ASCII VTK points to the text point format", "vtk_to_points"};
  std::string input, output;
  int dim = 3;
  app.add_option("input", input, "Legacy VTK file")->required();
  app.add_option("output", output, "Point file to write")->required();
  app.add_option("--dim", dim, "Output dimension")->check(CLI::IsMember({2, 3}))->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    fanning::io::write_point_set(output, read_vtk_points(input, dim));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
