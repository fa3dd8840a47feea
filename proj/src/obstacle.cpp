#include "nlseg/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nlseg/errors.hpp"
#include "nlseg/morphology.hpp"
#include "nlseg/parallel.hpp"

namespace nlseg {

namespace {

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double seg_dist(Vec2 p, Vec2 a, Vec2 b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double L2 = vx * vx + vy * vy;
  double t = L2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / L2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * vx, p.y - a.y - t * vy);
}

// Cells of Omega within Euclidean distance < r of a sampled polyline (or of
// isolated points when the samples are far apart), using square buckets.
Mask near_polyline(const std::vector<Vec2>& pts, const GridDomain& gd, double r) {
  const Grid& g = gd.grid;
  Mask out(g.size(), 0);
  if (pts.empty()) return out;
  const double bs = std::max(r, 4 * g.h) + g.h;
  double xmin = pts[0].x, ymin = pts[0].y;
  for (auto& p : pts) {
    xmin = std::min(xmin, p.x);
    ymin = std::min(ymin, p.y);
  }
  xmin -= bs;
  ymin -= bs;
  int bx = 0, by = 0;
  for (auto& p : pts) {
    bx = std::max(bx, static_cast<int>((p.x - xmin) / bs) + 2);
    by = std::max(by, static_cast<int>((p.y - ymin) / bs) + 2);
  }
  std::vector<std::vector<int>> bucket(static_cast<std::size_t>(bx) * by);
  const int ns = static_cast<int>(pts.size()) - 1;
  for (int s = 0; s < std::max(ns, 1); ++s) {
    Vec2 a = pts[s], b = ns > 0 ? pts[s + 1] : pts[s];
    Vec2 m{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    int ix = static_cast<int>((m.x - xmin) / bs), iy = static_cast<int>((m.y - ymin) / bs);
    bucket[static_cast<std::size_t>(iy) * bx + ix].push_back(s);
  }
  parallel_for(g.ny, [&](std::int64_t j0, std::int64_t j1) {
    for (int j = static_cast<int>(j0); j < j1; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t c = g.idx(i, j);
        if (!gd.omega[c]) continue;
        Vec2 p{g.xc(i), g.yc(j)};
        int ix = static_cast<int>(std::floor((p.x - xmin) / bs)), iy = static_cast<int>(std::floor((p.y - ymin) / bs));
        bool hit = false;
        for (int dy = -1; dy <= 1 && !hit; ++dy)
          for (int dx = -1; dx <= 1 && !hit; ++dx) {
            int X = ix + dx, Y = iy + dy;
            if (X < 0 || Y < 0 || X >= bx || Y >= by) continue;
            for (int s : bucket[static_cast<std::size_t>(Y) * bx + X]) {
              Vec2 a = pts[s], b = ns > 0 ? pts[s + 1] : pts[s];
              if (seg_dist(p, a, b) < r) {
                hit = true;
                break;
              }
            }
          }
        out[c] = hit;
      }
  }, 4);
  return out;
}

bool representable(const Grid& g, Vec2 y) {
  return (!g.mirror_x || y.x >= g.x0) && (!g.mirror_y || y.y >= g.y0);
}

}  // namespace

double corner_angle(const Mask& A, const GridDomain& gd, Vec2 y, Vec2 t0, double window) {
  const Grid& g = gd.grid;
  // midpoints of edges between A and Omega \ A near y
  std::vector<Vec2> mids;
  const int R = static_cast<int>(std::ceil(window / g.h)) + 2;
  const int ic = static_cast<int>(std::floor((y.x - g.x0) / g.h)), jc = static_cast<int>(std::floor((y.y - g.y0) / g.h));
  for (int j = jc - R; j <= jc + R; ++j)
    for (int i = ic - R; i <= ic + R; ++i) {
      int fi = g.fold_x(i), fj = g.fold_y(j);
      if (fi < 0 || fj < 0 || !A[g.idx(fi, fj)]) continue;
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        int ni = g.fold_x(i + di[k]), nj = g.fold_y(j + dj[k]);
        if (ni < 0 || nj < 0) continue;
        std::size_t q = g.idx(ni, nj);
        if (A[q] || !gd.omega[q]) continue;
        Vec2 m{g.x0 + (i + 0.5 + 0.5 * di[k]) * g.h, g.y0 + (j + 0.5 + 0.5 * dj[k]) * g.h};
        double d = dist(m, y);
        if (d > 2 * g.h && d <= window) mids.push_back(m);
      }
    }
  if (mids.size() < 3) fail(ErrorCode::DegenerateContour, "too few edge samples near the obstacle corner");
  double mx = 0, my = 0;
  for (auto& m : mids) {
    mx += m.x;
    my += m.y;
  }
  mx /= mids.size();
  my /= mids.size();
  double sxx = 0, syy = 0, sxy = 0;
  for (auto& m : mids) {
    sxx += (m.x - mx) * (m.x - mx);
    syy += (m.y - my) * (m.y - my);
    sxy += (m.x - mx) * (m.y - my);
  }
  double th = 0.5 * std::atan2(2 * sxy, sxx - syy);
  Vec2 d{std::cos(th), std::sin(th)};
  if (d.x * (mx - y.x) + d.y * (my - y.y) < 0) d = {-d.x, -d.y};
  double c = std::clamp(d.x * t0.x + d.y * t0.y, -1.0, 1.0);
  return std::acos(c);
}

ObstacleSpec build_obstacles(const GridDomain& gd, const BoundaryData& bd, double mu, double lambda, const Norm& norm,
                             const LinearOptions& lin) {
  if (!(mu > 0 && mu < lambda && lambda < 1))
    fail(ErrorCode::InvalidArgument, "obstacles need 0 < mu < lambda < 1");
  if (static_cast<int>(bd.curves.size()) != bd.K)
    fail(ErrorCode::InvalidArgument, "obstacles need boundary curves for every population");
  const Grid& g = gd.grid;
  ObstacleSpec sp;
  sp.mu = mu;
  sp.lambda = lambda;
  sp.a = lambda - mu;
  for (int i = 0; i < bd.K; ++i) {
    const BoundaryCurve& c = bd.curves[i];
    std::vector<Vec2> ends;
    if (!c.closed && !c.pts.empty()) ends = {c.pts.front(), c.pts.back()};
    std::vector<Vec2> gam;
    for (std::size_t k = 0; k < c.pts.size(); ++k) {
      Vec2 z{c.pts[k].x + mu * c.normals[k].x, c.pts[k].y + mu * c.normals[k].y};
      bool ok = true;
      for (auto& y : ends)
        if (dist(z, y) < lambda) ok = false;
      if (ok) gam.push_back(z);
    }
    if (gam.size() < 2) fail(ErrorCode::EmptySet, "trimmed offset curve is empty");
    if (c.closed) gam.push_back(gam.front());
    Mask A = near_polyline(gam, gd, lambda);
    if (!count(A)) fail(ErrorCode::EmptySet, "obstacle neighbourhood has no cells");

    Field bdry(g.size(), 0.0);
    for (std::size_t p = 0; p < g.size(); ++p)
      if (!gd.omega[p]) bdry[p] = bd.f[i][p];
    ScreenedSolver s(g, A, lin);
    Field psi = s.solve(Field(g.size(), 0.0), bdry);
    for (std::size_t p = 0; p < g.size(); ++p)
      if (gd.omega[p] && !A[p]) psi[p] = 0;

    std::vector<double> ang;
    for (std::size_t l = 0; l < ends.size(); ++l) {
      if (!representable(g, ends[l])) continue;
      Vec2 t0 = l == 0 ? Vec2{c.pts[1].x - c.pts[0].x, c.pts[1].y - c.pts[0].y}
                       : Vec2{c.pts[c.pts.size() - 2].x - c.pts.back().x, c.pts[c.pts.size() - 2].y - c.pts.back().y};
      double tn = std::hypot(t0.x, t0.y);
      t0 = {t0.x / tn, t0.y / tn};
      ang.push_back(corner_angle(A, gd, ends[l], t0, 10 * g.h));
    }
    if (c.closed) gam.pop_back();
    sp.A.push_back(std::move(A));
    sp.psi.push_back(std::move(psi));
    sp.gamma.push_back(std::move(gam));
    sp.ends.push_back(std::move(ends));
    sp.angles.push_back(std::move(ang));
  }
  for (int i = 0; i < bd.K; ++i)
    for (int j = i + 1; j < bd.K; ++j) {
      double d = set_distance(sp.A[i], sp.A[j], g, norm);
      if (d < 1.0 - g.h) {
        std::ostringstream os;
        os << "A_" << i + 1 << " and A_" << j + 1 << " at rho-distance " << d;
        fail(ErrorCode::SeparationViolation, os.str());
      }
    }
  return sp;
}

SlopeReport check_obstacle_gradient(const ObstacleSpec& spec, const GridDomain& gd) {
  const Grid& g = gd.grid;
  SlopeReport rep;
  for (std::size_t i = 0; i < spec.A.size(); ++i) {
    const Mask& A = spec.A[i];
    const Field& psi = spec.psi[i];
    double mn = std::numeric_limits<double>::infinity();
    std::size_t n = 0;
    auto val = [&](int a, int b) {
      int fa = g.fold_x(a), fb = g.fold_y(b);
      return (fa < 0 || fb < 0) ? 0.0 : psi[g.idx(fa, fb)];
    };
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.nx; ++k) {
        std::size_t p = g.idx(k, j);
        if (!A[p]) continue;
        bool edge = false;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int m = 0; m < 4; ++m) {
          int ni = g.fold_x(k + di[m]), nj = g.fold_y(j + dj[m]);
          if (ni < 0 || nj < 0) continue;
          std::size_t q = g.idx(ni, nj);
          if (gd.omega[q] && !A[q]) edge = true;
        }
        if (!edge) continue;
        Vec2 x{g.xc(k), g.yc(j)};
        bool near_end = false;
        for (auto& y : spec.ends[i]) {
          if (dist(x, y) < 4 * g.h) near_end = true;
          Vec2 ym{g.mirror_x ? 2 * g.x0 - y.x : y.x, g.mirror_y ? 2 * g.y0 - y.y : y.y};
          if (dist(x, ym) < 4 * g.h) near_end = true;
        }
        if (near_end) continue;
        double gx = (val(k + 1, j) - val(k - 1, j)) / (2 * g.h);
        double gy = (val(k, j + 1) - val(k, j - 1)) / (2 * g.h);
        mn = std::min(mn, std::hypot(gx, gy));
        ++n;
      }
    rep.min_slope.push_back(n ? mn : 0.0);
    rep.samples.push_back(n);
  }
  return rep;
}

double barrier_margin(const ObstacleSpec& spec, const GridDomain& gd, int i, int z_stride) {
  const Grid& g = gd.grid;
  const double L = std::log(spec.lambda / spec.mu);
  double margin = std::numeric_limits<double>::infinity();
  const auto& gam = spec.gamma.at(i);
  const int R = static_cast<int>(std::ceil(spec.lambda / g.h)) + 1;
  for (std::size_t k = 0; k < gam.size(); k += std::max(z_stride, 1)) {
    Vec2 z = gam[k];
    if (!representable(g, z)) continue;
    int ic = static_cast<int>(std::floor((z.x - g.x0) / g.h)), jc = static_cast<int>(std::floor((z.y - g.y0) / g.h));
    for (int j = std::max(0, jc - R); j <= std::min(g.ny - 1, jc + R); ++j)
      for (int m = std::max(0, ic - R); m <= std::min(g.nx - 1, ic + R); ++m) {
        std::size_t p = g.idx(m, j);
        if (!gd.omega[p]) continue;
        double r = std::hypot(g.xc(m) - z.x, g.yc(j) - z.y);
        if (r >= spec.lambda || r <= spec.mu) continue;
        double phi = std::log(spec.lambda / r) / L;
        margin = std::min(margin, spec.psi[i][p] - phi);
      }
  }
  return margin;
}

}  // namespace nlseg
