#include "nlseg/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlseg/errors.hpp"
#include "nlseg/parallel.hpp"

namespace nlseg {

namespace {

constexpr double kInf = 1e300;

bool is_quadratic(const Norm& n) { return n.kind != Norm::Kind::SmoothedP; }

void dt1d(const double* f, int n, double w, double* d, int* v, double* z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = 0;
    while (k >= 0) {
      int p = v[k];
      s = ((f[q] + w * double(q) * q) - (f[p] + w * double(p) * p)) / (2.0 * w * (q - p));
      if (s <= z[k])
        --k;
      else
        break;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    double dq = q - v[j];
    d[q] = w * dq * dq + f[v[j]];
  }
}

struct Ctx {
  Grid g;
  Mask m;
};

Ctx plain(const Mask& m, const Grid& g) {
  if (!g.mirrored()) return {g, m};
  return {unfolded_grid(g), unfold(m, g)};
}

// Distance to nearest cell centre beyond the box, in cells.
double border_cells(int i, int j, int nx, int ny) {
  return std::min({double(i + 1), double(nx - i), double(j + 1), double(ny - j)});
}

Mask dilate_core(const Mask& m, const Grid& g, double r, const Norm& n, bool open, bool outside_in_set) {
  const int nx = g.nx, ny = g.ny;
  const double h = g.h;
  auto in_ball = [&](int dx, int dy) {
    double v = n(dx * h, dy * h);
    return open ? v < r : v <= r;
  };
  const int Ry = static_cast<int>(std::ceil(r * ball_extent_y(n) / h)) + 1;
  const int Rx = static_cast<int>(std::ceil(r * ball_extent_x(n) / h)) + 1;
  std::vector<int> hi(Ry + 1, -1);
  for (int dy = 0; dy <= Ry; ++dy) {
    int last = -1;
    for (int dx = 0; dx <= Rx; ++dx) {
      if (in_ball(dx, dy)) last = dx;
    }
    hi[dy] = last;
  }
  std::vector<std::int32_t> pre(static_cast<std::size_t>(ny) * (nx + 1), 0);
  for (int j = 0; j < ny; ++j) {
    std::int32_t* P = &pre[static_cast<std::size_t>(j) * (nx + 1)];
    for (int i = 0; i < nx; ++i) P[i + 1] = P[i] + (m[g.idx(i, j)] ? 1 : 0);
  }
  Field d2 = edt_squared(m, nx, ny);
  const EquivalenceConstants ec = exact_equivalence(n);
  Mask out(g.size(), 0);
  parallel_for(ny, [&](std::int64_t j0, std::int64_t j1) {
    for (int j = static_cast<int>(j0); j < j1; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t id = g.idx(i, j);
        if (m[id]) {
          out[id] = 1;
          continue;
        }
        double dc = d2[id] >= kInf ? kInf : std::sqrt(d2[id]);
        if (outside_in_set) dc = std::min(dc, border_cells(i, j, nx, ny));
        if (dc >= kInf) continue;
        double dE = dc * h;
        if (ec.c2 * dE < r * (1 - 1e-12)) {
          out[id] = 1;
          continue;
        }
        if (ec.c1 * dE > r * (1 + 1e-12)) continue;
        bool hit = false;
        for (int dy = -Ry; dy <= Ry && !hit; ++dy) {
          int hy = hi[std::abs(dy)];
          if (hy < 0) continue;
          int jj = j + dy;
          if (jj < 0 || jj >= ny) {
            if (outside_in_set) hit = true;
            continue;
          }
          int lo = i - hy, up = i + hy;
          if (outside_in_set && (lo < 0 || up >= nx)) {
            hit = true;
            break;
          }
          lo = std::max(lo, 0);
          up = std::min(up, nx - 1);
          const std::int32_t* P = &pre[static_cast<std::size_t>(jj) * (nx + 1)];
          if (P[up + 1] - P[lo] > 0) hit = true;
        }
        if (hit) out[id] = 1;
      }
    }
  }, 4);
  return out;
}

// Exact rho-distance from the set to the given target cells (plain grid).
Field distance_at(const Mask& m, const Grid& g, const Norm& n, const std::vector<std::size_t>& targets) {
  Field res(targets.size(), kInf);
  if (is_quadratic(n)) {
    double wx = 1, wy = 1;
    if (n.kind == Norm::Kind::Ellipse) {
      wx = 1 / (n.ax * n.ax);
      wy = 1 / (n.ay * n.ay);
    }
    Field d2 = edt_squared(m, g.nx, g.ny, wx, wy);
    for (std::size_t k = 0; k < targets.size(); ++k) res[k] = g.h * std::sqrt(d2[targets[k]]);
    return res;
  }
  Mask bd = boundary_cells(m, g, true);
  // bucket the boundary cells
  const int B = 16;
  const int bx = (g.nx + B - 1) / B, by = (g.ny + B - 1) / B;
  std::vector<std::vector<std::pair<int, int>>> buckets(static_cast<std::size_t>(bx) * by);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (bd[g.idx(i, j)]) buckets[static_cast<std::size_t>(j / B) * bx + i / B].push_back({i, j});
  Field d2 = edt_squared(m, g.nx, g.ny);
  const EquivalenceConstants ec = exact_equivalence(n);
  parallel_for(static_cast<std::int64_t>(targets.size()), [&](std::int64_t k0, std::int64_t k1) {
    for (std::int64_t k = k0; k < k1; ++k) {
      std::size_t id = targets[k];
      if (m[id]) {
        res[k] = 0;
        continue;
      }
      int i = static_cast<int>(id % g.nx), j = static_cast<int>(id / g.nx);
      double rad = std::sqrt(d2[id]) * ec.c2 / ec.c1 + 1.5;
      int bi0 = std::max(0, static_cast<int>((i - rad) / B) - 1), bi1 = std::min(bx - 1, static_cast<int>((i + rad) / B) + 1);
      int bj0 = std::max(0, static_cast<int>((j - rad) / B) - 1), bj1 = std::min(by - 1, static_cast<int>((j + rad) / B) + 1);
      double best = kInf;
      for (int bj = bj0; bj <= bj1; ++bj)
        for (int bi = bi0; bi <= bi1; ++bi)
          for (auto [a, b] : buckets[static_cast<std::size_t>(bj) * bx + bi]) {
            double v = n((i - a) * g.h, (j - b) * g.h);
            if (v < best) best = v;
          }
      res[k] = best;
    }
  }, 256);
  return res;
}

}  // namespace

Mask boundary_cells(const Mask& m, const Grid& g, bool conn8) {
  Mask out(g.size(), 0);
  auto in = [&](int i, int j) {
    int a = g.fold_x(i), b = g.fold_y(j);
    return a >= 0 && b >= 0 && m[g.idx(a, b)];
  };
  parallel_for(g.ny, [&](std::int64_t j0, std::int64_t j1) {
    for (int j = static_cast<int>(j0); j < j1; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (!m[g.idx(i, j)]) continue;
        bool b = !in(i - 1, j) || !in(i + 1, j) || !in(i, j - 1) || !in(i, j + 1);
        if (conn8 && !b) b = !in(i - 1, j - 1) || !in(i + 1, j - 1) || !in(i - 1, j + 1) || !in(i + 1, j + 1);
        out[g.idx(i, j)] = b ? 1 : 0;
      }
  }, 16);
  return out;
}

Field edt_squared(const Mask& m, int nx, int ny, double wx, double wy) {
  const std::size_t N = static_cast<std::size_t>(nx) * ny;
  Field tmp(N);
  // columns
  parallel_for(nx, [&](std::int64_t i0, std::int64_t i1) {
    std::vector<double> f(ny), d(ny), z(ny + 1);
    std::vector<int> v(ny);
    for (std::int64_t i = i0; i < i1; ++i) {
      for (int j = 0; j < ny; ++j) f[j] = m[static_cast<std::size_t>(j) * nx + i] ? 0.0 : kInf;
      dt1d(f.data(), ny, wy, d.data(), v.data(), z.data());
      for (int j = 0; j < ny; ++j) tmp[static_cast<std::size_t>(j) * nx + i] = d[j];
    }
  }, 16);
  Field out(N);
  parallel_for(ny, [&](std::int64_t j0, std::int64_t j1) {
    std::vector<double> d(nx), z(nx + 1);
    std::vector<int> v(nx);
    for (std::int64_t j = j0; j < j1; ++j) {
      dt1d(&tmp[static_cast<std::size_t>(j) * nx], nx, wx, d.data(), v.data(), z.data());
      for (int i = 0; i < nx; ++i) out[static_cast<std::size_t>(j) * nx + i] = d[i];
    }
  }, 16);
  return out;
}

Field rho_distance_field(const Mask& m, const Grid& g, const Norm& n) {
  Ctx c = plain(m, g);
  if (count(c.m) == 0) fail(ErrorCode::EmptySet, "distance to an empty set");
  std::vector<std::size_t> all(c.g.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  Field d = distance_at(c.m, c.g, n, all);
  return g.mirrored() ? fold(d, g) : d;
}

double set_distance(const Mask& a, const Mask& b, const Grid& g, const Norm& n) {
  Ctx ca = plain(a, g), cb = plain(b, g);
  if (count(ca.m) == 0 || count(cb.m) == 0) fail(ErrorCode::EmptySet, "set distance with an empty set");
  Mask ba = boundary_cells(ca.m, ca.g, true);
  std::vector<std::size_t> t;
  for (std::size_t k = 0; k < ba.size(); ++k)
    if (ba[k]) t.push_back(k);
  Field d = distance_at(cb.m, cb.g, n, t);
  double best = kInf;
  for (double v : d) best = std::min(best, v);
  return best;
}

Mask dilate_by_ball(const Mask& m, const Grid& g, double r, const Norm& n, bool open) {
  if (!(r > 0)) fail(ErrorCode::InvalidArgument, "dilation radius must be positive");
  Ctx c = plain(m, g);
  Mask out = dilate_core(c.m, c.g, r, n, open, false);
  return g.mirrored() ? fold(out, g) : out;
}

Mask erode_by_ball(const Mask& m, const Grid& g, double r, const Norm& n, bool open) {
  if (!(r > 0)) fail(ErrorCode::InvalidArgument, "erosion radius must be positive");
  Ctx c = plain(m, g);
  Mask comp = mask_not(c.m);
  Mask d = dilate_core(comp, c.g, r, n, open, true);
  Mask out = mask_not(d);
  return g.mirrored() ? fold(out, g) : out;
}

Mask mask_not(const Mask& a) {
  Mask o(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) o[k] = a[k] ? 0 : 1;
  return o;
}
Mask mask_and(const Mask& a, const Mask& b) {
  Mask o(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) o[k] = (a[k] && b[k]) ? 1 : 0;
  return o;
}
Mask mask_or(const Mask& a, const Mask& b) {
  Mask o(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) o[k] = (a[k] || b[k]) ? 1 : 0;
  return o;
}
Mask mask_minus(const Mask& a, const Mask& b) {
  Mask o(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) o[k] = (a[k] && !b[k]) ? 1 : 0;
  return o;
}
Mask mask_xor(const Mask& a, const Mask& b) {
  Mask o(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) o[k] = ((a[k] != 0) != (b[k] != 0)) ? 1 : 0;
  return o;
}

}  // namespace nlseg
