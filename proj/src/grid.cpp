#include "nlseg/grid.hpp"

#include <cmath>

#include "nlseg/parallel.hpp"

namespace nlseg {

bool same_grid(const Grid& a, const Grid& b) {
  return a.nx == b.nx && a.ny == b.ny && a.h == b.h && a.x0 == b.x0 && a.y0 == b.y0 &&
         a.mirror_x == b.mirror_x && a.mirror_y == b.mirror_y;
}

Grid unfolded_grid(const Grid& g) {
  Grid u = g;
  if (g.mirror_x) {
    u.nx = 2 * g.nx;
    u.x0 = g.x0 - g.nx * g.h;
    u.mirror_x = false;
  }
  if (g.mirror_y) {
    u.ny = 2 * g.ny;
    u.y0 = g.y0 - g.ny * g.h;
    u.mirror_y = false;
  }
  return u;
}

namespace {
template <class V>
V unfold_impl(const V& f, const Grid& g) {
  if (!g.mirrored()) return f;
  Grid u = unfolded_grid(g);
  V out(u.size());
  const int ox = g.mirror_x ? g.nx : 0, oy = g.mirror_y ? g.ny : 0;
  parallel_for(u.ny, [&](std::int64_t j0, std::int64_t j1) {
    for (std::int64_t J = j0; J < j1; ++J) {
      int j = static_cast<int>(J) - oy;
      int sj = j < 0 ? -j - 1 : j;
      for (int I = 0; I < u.nx; ++I) {
        int i = I - ox;
        int si = i < 0 ? -i - 1 : i;
        out[u.idx(I, static_cast<int>(J))] = f[g.idx(si, sj)];
      }
    }
  }, 16);
  return out;
}

template <class V>
V fold_impl(const V& full, const Grid& g) {
  if (!g.mirrored()) return full;
  Grid u = unfolded_grid(g);
  V out(g.size());
  const int ox = g.mirror_x ? g.nx : 0, oy = g.mirror_y ? g.ny : 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out[g.idx(i, j)] = full[u.idx(i + ox, j + oy)];
  return out;
}
}  // namespace

Field unfold(const Field& f, const Grid& g) { return unfold_impl(f, g); }
Mask unfold(const Mask& m, const Grid& g) { return unfold_impl(m, g); }
Field fold(const Field& full, const Grid& g) { return fold_impl(full, g); }
Mask fold(const Mask& full, const Grid& g) { return fold_impl(full, g); }

double sample_bilinear(const Field& f, const Grid& g, double x, double y) {
  double fx = (x - g.x0) / g.h - 0.5, fy = (y - g.y0) / g.h - 0.5;
  int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
  double tx = fx - i0, ty = fy - j0;
  auto at = [&](int i, int j) {
    int a = g.fold_x(i), b = g.fold_y(j);
    return (a < 0 || b < 0) ? 0.0 : f[g.idx(a, b)];
  };
  return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) +
         (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
}

Field resample(const Field& f, const Grid& from, const Grid& to) {
  if (same_grid(from, to)) return f;
  Field out(to.size());
  parallel_for(to.ny, [&](std::int64_t j0, std::int64_t j1) {
    for (std::int64_t j = j0; j < j1; ++j)
      for (int i = 0; i < to.nx; ++i)
        out[to.idx(i, static_cast<int>(j))] =
            sample_bilinear(f, from, to.xc(i), to.yc(static_cast<int>(j)));
  }, 8);
  return out;
}

std::size_t count(const Mask& m) {
  std::size_t c = 0;
  for (auto v : m) c += v ? 1 : 0;
  return c;
}

}  // namespace nlseg
