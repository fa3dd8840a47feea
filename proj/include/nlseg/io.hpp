#pragma once

#include <string>
#include <vector>

#include "nlseg/contour.hpp"
#include "nlseg/grid.hpp"

namespace nlseg {

struct FieldMeta {
  std::string name;
  Grid grid;
  double epsilon = 0;
  int population = 0;   // 1-based; 0 when the field is not per population
  int iterations = -1;  // checkpoints only
};

// <base>.bin holds little-endian float64 values in row-major order (x fastest);
// <base>.json is the sidecar header. Both are written via a temporary file and
// renamed, so a reader never sees a partial dump.
void write_field(const std::string& base, const Field& f, const FieldMeta& meta);
Field read_field(const std::string& base, FieldMeta* meta = nullptr);

// Binary PGM (P5), top row first; set cells are white.
void write_pgm(const std::string& path, const Mask& m, const Grid& g);

// Rows curve_id,x,y,nx,ny,kappa,u_nu.
void write_interface_csv(const std::string& path, const InterfaceSet& s);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
bool file_exists(const std::string& path);
void make_dirs(const std::string& path);

// Shortest decimal text that round-trips a double.
std::string format_double(double v);

}  // namespace nlseg
