#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nlseg {

using Field = std::vector<double>;
using Mask = std::vector<std::uint8_t>;

struct Vec2 {
  double x = 0, y = 0;
};

// Cell-centred lattice. Cell (i, j) has centre (x0 + (i+1/2)h, y0 + (j+1/2)h)
// and is stored at j*nx + i. A mirrored axis represents a field that is even
// about the low edge of the box (x = x0 or y = y0): ghost index -k-1 reads k.
struct Grid {
  int nx = 0, ny = 0;
  double h = 0;
  double x0 = 0, y0 = 0;
  bool mirror_x = false, mirror_y = false;

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  double xc(int i) const { return x0 + (i + 0.5) * h; }
  double yc(int j) const { return y0 + (j + 0.5) * h; }
  bool mirrored() const { return mirror_x || mirror_y; }

  // Folds a possibly negative index through the mirror; returns -1 when the
  // index lies outside the represented plane region.
  int fold_x(int i) const {
    if (i < 0) return mirror_x ? (-i - 1 < nx ? -i - 1 : -1) : -1;
    return i < nx ? i : -1;
  }
  int fold_y(int j) const {
    if (j < 0) return mirror_y ? (-j - 1 < ny ? -j - 1 : -1) : -1;
    return j < ny ? j : -1;
  }
};

bool same_grid(const Grid& a, const Grid& b);

// Full-plane version of a mirrored grid (identity for plain grids).
Grid unfolded_grid(const Grid& g);
Field unfold(const Field& f, const Grid& g);
Mask unfold(const Mask& m, const Grid& g);
// Inverse of unfold: keeps the represented quadrant/half.
Field fold(const Field& full, const Grid& g);
Mask fold(const Mask& full, const Grid& g);

// Bilinear interpolation through cell centres; mirror-aware, zero beyond the
// box.
double sample_bilinear(const Field& f, const Grid& g, double x, double y);

// Bilinear resampling of a field onto another grid (used for warm starts
// between resolutions).
Field resample(const Field& f, const Grid& from, const Grid& to);

std::size_t count(const Mask& m);

}  // namespace nlseg
