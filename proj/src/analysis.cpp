#include "nlseg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nlseg/errors.hpp"
#include "nlseg/linsolve.hpp"
#include "nlseg/morphology.hpp"
#include "nlseg/parallel.hpp"
#include "nlseg/radial.hpp"

namespace nlseg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> arc_positions(const std::vector<Vec2>& pts) {
  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) s[k] = s[k - 1] + dist(pts[k - 1], pts[k]);
  return s;
}

std::vector<Vec2> points_of(const InterfaceCurve& c) {
  std::vector<Vec2> p;
  p.reserve(c.v.size());
  for (auto& v : c.v) p.push_back(v.x);
  return p;
}

// Arc distance between vertices a and b of a curve; wraps for closed curves.
double arc_gap(const std::vector<double>& s, double total, bool closed, int a, int b) {
  double d = std::fabs(s[a] - s[b]);
  return closed ? std::min(d, total - d) : d;
}

double curve_total(const std::vector<Vec2>& pts, const std::vector<double>& s, bool closed) {
  if (pts.empty()) return 0;
  return closed ? s.back() + dist(pts.back(), pts.front()) : s.back();
}

// Unit direction of the best-fit line through pts, oriented away from x.
bool fit_direction(const std::vector<Vec2>& pts, Vec2 x, Vec2& dir) {
  if (pts.size() < 2) return false;
  double mx = 0, my = 0;
  for (auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0, syy = 0, sxy = 0;
  for (auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  const double t = 0.5 * std::atan2(2 * sxy, sxx - syy);
  dir = {std::cos(t), std::sin(t)};
  if ((mx - x.x) * dir.x + (my - x.y) * dir.y < 0) dir = {-dir.x, -dir.y};
  return true;
}

int cell_of(const Grid& g, Vec2 p) {
  int i = static_cast<int>(std::floor((p.x - g.x0) / g.h));
  int j = static_cast<int>(std::floor((p.y - g.y0) / g.h));
  i = g.fold_x(i);
  j = g.fold_y(j);
  if (i < 0 || j < 0) return -1;
  return static_cast<int>(g.idx(i, j));
}

}  // namespace

Support extract_support(const Field& u, const Mask& omega, double delta_abs, double delta_rel) {
  double m = 0;
  for (std::size_t p = 0; p < u.size(); ++p)
    if (omega[p]) m = std::max(m, u[p]);
  Support s;
  s.threshold = std::max(delta_abs, delta_rel * m);
  s.mask.assign(u.size(), 0);
  for (std::size_t p = 0; p < u.size(); ++p) s.mask[p] = omega[p] && u[p] > s.threshold;
  return s;
}

std::vector<std::vector<double>> support_separation(const std::vector<Mask>& masks, const Grid& g, const Norm& n) {
  if (masks.size() < 2) fail(ErrorCode::InvalidArgument, "support_separation needs at least two masks");
  const std::size_t K = masks.size();
  std::vector<std::vector<double>> d(K, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j) d[i][j] = d[j][i] = set_distance(masks[i], masks[j], g, n);
  return d;
}

BallRegularity check_ball_regularization(const Mask& S, const Grid& g, const Norm& n, const Mask* domain, int collar) {
  const Mask D = domain ? *domain : Mask(S.size(), 1);
  const Mask Sd = mask_and(S, D);
  const Mask T = mask_minus(D, dilate_by_ball(Sd, g, 1.0, n, true));
  const Mask Sstar = count(T) ? mask_minus(D, dilate_by_ball(T, g, 1.0, n, false)) : D;
  const Mask diff = mask_xor(Sstar, Sd);

  // distance in cells from each cell to the other side of ∂S
  const Grid gu = unfolded_grid(g);
  const Mask Su = unfold(Sd, g);
  const Field in = edt_squared(mask_not(Su), gu.nx, gu.ny);
  const Field out = edt_squared(Su, gu.nx, gu.ny);
  Field d2(Su.size());
  for (std::size_t p = 0; p < d2.size(); ++p) d2[p] = Su[p] ? in[p] : out[p];
  const Field d2f = g.mirrored() ? fold(d2, g) : d2;

  BallRegularity r;
  for (std::size_t p = 0; p < diff.size(); ++p) {
    if (!diff[p]) continue;
    ++r.diff_cells;
    if (d2f[p] > static_cast<double>(collar) * collar) ++r.outside_collar;
  }
  r.pass = r.outside_collar == 0;
  return r;
}

LengthStability interface_length_stability(const InterfaceSet& a, const InterfaceSet& b, double tol) {
  LengthStability r;
  r.length_h = a.total_length();
  r.length_h2 = b.total_length();
  r.rel_change = r.length_h2 > 0 ? std::fabs(r.length_h - r.length_h2) / r.length_h2 : kInf;
  r.pass = r.rel_change <= tol;
  return r;
}

double tangent_cone_angle(const std::vector<Vec2>& pts, bool closed, int k, double exclude, double fit) {
  const int n = static_cast<int>(pts.size());
  const auto s = arc_positions(pts);
  const double total = curve_total(pts, s, closed);
  std::vector<Vec2> fwd, bwd;
  for (int m = 0; m < n; ++m) {
    if (m == k) continue;
    double ahead = s[m] - s[k];
    if (closed) {
      if (ahead < 0) ahead += total;
      double behind = total - ahead;
      if (ahead > exclude && ahead <= exclude + fit) fwd.push_back(pts[m]);
      if (behind > exclude && behind <= exclude + fit) bwd.push_back(pts[m]);
    } else {
      double a = std::fabs(ahead);
      if (a > exclude && a <= exclude + fit) (ahead > 0 ? fwd : bwd).push_back(pts[m]);
    }
  }
  Vec2 d1, d2;
  if (!fit_direction(fwd, pts[k], d1) || !fit_direction(bwd, pts[k], d2)) return std::nan("");
  return std::acos(std::clamp(d1.x * d2.x + d1.y * d2.y, -1.0, 1.0));
}

std::vector<SingularPoint> detect_singular_points(const InterfaceSet& iface, const InterfaceSet& opposing,
                                                  const Norm& n, const SingularOptions& opt) {
  const double h = iface.h;
  struct Opp {
    std::vector<Vec2> pts;
    std::vector<double> s;
    double total = 0;
    bool closed = false;
  };
  std::vector<Opp> opp;
  for (auto& c : opposing.curves) {
    Opp o;
    o.pts = points_of(c);
    o.s = arc_positions(o.pts);
    o.total = curve_total(o.pts, o.s, c.closed);
    o.closed = c.closed;
    opp.push_back(std::move(o));
  }
  const double window = opt.window_cells * h;

  struct Hit {
    bool flagged = false;
    double spread = 0, balance = 0, dmin = 0;
    int pc = -1, pv = -1;
  };

  std::vector<SingularPoint> out;
  for (std::size_t ci = 0; ci < iface.curves.size(); ++ci) {
    const auto& curve = iface.curves[ci];
    const auto pts = points_of(curve);
    const int nv = static_cast<int>(pts.size());
    std::vector<Hit> hits(nv);
    parallel_for(
        nv,
        [&](std::int64_t b, std::int64_t e) {
          std::vector<std::vector<double>> d(opp.size());
          for (std::int64_t k = b; k < e; ++k) {
            const Vec2 x = pts[k];
            double dmin = kInf;
            for (std::size_t c = 0; c < opp.size(); ++c) {
              d[c].resize(opp[c].pts.size());
              for (std::size_t m = 0; m < opp[c].pts.size(); ++m) {
                d[c][m] = n(x.x - opp[c].pts[m].x, x.y - opp[c].pts[m].y);
                dmin = std::min(dmin, d[c][m]);
              }
            }
            // near-minimal local minimisers, open-curve ends excluded
            std::vector<Vec2> R;
            std::vector<double> Rd;
            int pc = -1, pv = -1;
            double best = kInf;
            for (std::size_t c = 0; c < opp.size(); ++c) {
              const auto& o = opp[c];
              const int m_n = static_cast<int>(o.pts.size());
              for (int m = 0; m < m_n; ++m) {
                if (d[c][m] > dmin + opt.slack_cells * h) continue;
                if (!o.closed && (m == 0 || m == m_n - 1)) continue;
                bool is_min = true;
                for (int q = m - 1;; --q) {
                  int qq = o.closed ? (q + m_n) % m_n : q;
                  if (qq < 0 || qq == m || arc_gap(o.s, o.total, o.closed, m, qq) > window) break;
                  if (d[c][qq] < d[c][m]) {
                    is_min = false;
                    break;
                  }
                  if (q <= m - m_n) break;
                }
                for (int q = m + 1; is_min; ++q) {
                  int qq = o.closed ? q % m_n : q;
                  if (qq >= m_n || qq == m || arc_gap(o.s, o.total, o.closed, m, qq) > window) break;
                  if (d[c][qq] < d[c][m]) is_min = false;
                  if (q >= m + m_n) break;
                }
                if (!is_min) continue;
                R.push_back(o.pts[m]);
                Rd.push_back(d[c][m]);
                if (d[c][m] < best) {
                  best = d[c][m];
                  pc = static_cast<int>(c);
                  pv = m;
                }
              }
            }
            Hit hit;
            hit.dmin = dmin;
            hit.pc = pc;
            hit.pv = pv;
            for (std::size_t a = 0; a < R.size(); ++a)
              for (std::size_t c = a + 1; c < R.size(); ++c) hit.spread = std::max(hit.spread, dist(R[a], R[c]));
            if (!Rd.empty()) hit.balance = *std::max_element(Rd.begin(), Rd.end()) - *std::min_element(Rd.begin(), Rd.end());
            hit.flagged = hit.spread > opt.spread_cells * h;
            hits[k] = hit;
          }
        },
        64);

    // runs of flagged vertices (gaps of up to two vertices are bridged)
    std::vector<std::vector<int>> runs;
    int start = 0;
    if (curve.closed) {
      // start the scan at an unflagged vertex so runs do not straddle the seam
      while (start < nv && hits[start].flagged) ++start;
      if (start == nv) start = 0;
    }
    int last = -100;
    for (int t = 0; t < nv; ++t) {
      int k = (start + t) % nv;
      if (!hits[k].flagged) continue;
      if (runs.empty() || t - last > 3) runs.emplace_back();
      runs.back().push_back(k);
      last = t;
    }
    for (auto& run : runs) {
      int rep = run[0];
      for (int k : run)
        if (hits[k].balance < hits[rep].balance) rep = k;
      const Hit& hit = hits[rep];
      if (hit.pc < 0) continue;
      SingularPoint sp;
      sp.location = pts[rep];
      sp.curve = static_cast<int>(ci);
      sp.vertex = rep;
      sp.spread = hit.spread;
      sp.partner = opp[hit.pc].pts[hit.pv];
      sp.distance = hit.dmin;
      sp.theta = tangent_cone_angle(pts, curve.closed, rep, opt.exclude_cells * h, opt.fit_cells * h);
      sp.partner_theta =
          tangent_cone_angle(opp[hit.pc].pts, opp[hit.pc].closed, hit.pv, opt.exclude_cells * h, opt.fit_cells * h);
      out.push_back(sp);
    }
  }
  return out;
}

double cone_growth_exponent(double theta0) {
  if (!(theta0 > 0)) fail(ErrorCode::ZeroAngle, "cone opening must be positive");
  if (theta0 > kPi + 1e-12) fail(ErrorCode::InvalidArgument, "cone opening exceeds pi");
  return kPi / theta0 - 1.0;
}

WedgeFit fit_wedge_exponent(double theta0, double h, double r_min, double r_max, int n_radii) {
  const double e = 1.0 + cone_growth_exponent(theta0);
  if (!(h > 0) || !(r_min > 0) || !(r_max > r_min) || n_radii < 3)
    fail(ErrorCode::InvalidArgument, "bad wedge sampling parameters");
  std::vector<double> radii(n_radii), best(n_radii, 0.0);
  for (int k = 0; k < n_radii; ++k) radii[k] = r_min * std::pow(r_max / r_min, static_cast<double>(k) / (n_radii - 1));
  const int N = static_cast<int>(std::ceil((r_max + h) / h));
  for (int j = -N; j <= N; ++j)
    for (int i = -N; i <= N; ++i) {
      const double x = i * h, y = j * h;
      const double r = std::hypot(x, y);
      double t = std::atan2(y, x);
      if (t < 0) t += 2 * kPi;
      if (!(t > 0 && t < theta0)) continue;
      const double v = std::pow(r, e) * std::sin(e * t);
      for (int k = 0; k < n_radii; ++k)
        if (std::fabs(r - radii[k]) <= 0.5 * h) best[k] = std::max(best[k], v);
    }
  std::vector<double> lx, ly;
  for (int k = 0; k < n_radii; ++k)
    if (best[k] > 0) {
      lx.push_back(std::log(radii[k]));
      ly.push_back(std::log(best[k]));
    }
  if (lx.size() < 3) fail(ErrorCode::InvalidArgument, "wedge sampling produced too few arcs");
  LineFit f = fit_line(lx, ly);
  return {f.slope, f.r2};
}

FbReport check_fb_condition(const InterfaceSet& iface1, const InterfaceSet& iface2, double pair_tol, double rel_tol,
                            double flat_kappa, double skip_ends) {
  std::vector<const InterfaceVertex*> opp;
  for (auto& c : iface2.curves)
    for (auto& v : c.v) opp.push_back(&v);
  if (opp.empty()) fail(ErrorCode::DegenerateContour, "opposing interface is empty");

  std::vector<const InterfaceVertex*> src;
  for (auto& c : iface1.curves) {
    const auto pts = points_of(c);
    const auto s = arc_positions(pts);
    const double total = curve_total(pts, s, c.closed);
    for (std::size_t k = 0; k < c.v.size(); ++k) {
      if (!c.closed && (s[k] < skip_ends || total - s[k] < skip_ends)) continue;
      if (c.v[k].n.x == 0 && c.v[k].n.y == 0) continue;
      src.push_back(&c.v[k]);
    }
  }

  const std::size_t N = src.size();
  std::vector<int> match(N, -1);
  std::vector<double> offset(N, kInf);
  parallel_for(
      static_cast<std::int64_t>(N),
      [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t k = b; k < e; ++k) {
          const Vec2 p{src[k]->x.x + src[k]->n.x, src[k]->x.y + src[k]->n.y};
          for (std::size_t m = 0; m < opp.size(); ++m) {
            double d = dist(p, opp[m]->x);
            if (d < offset[k]) {
              offset[k] = d;
              match[k] = static_cast<int>(m);
            }
          }
        }
      },
      64);

  FbReport r;
  std::vector<double> ratios, targets;
  std::size_t good = 0;
  for (std::size_t k = 0; k < N; ++k) {
    if (offset[k] > pair_tol) {
      ++r.unpaired;
      continue;
    }
    const InterfaceVertex& x = *src[k];
    const InterfaceVertex& y = *opp[match[k]];
    if (std::fabs(1.0 - x.kappa) < 0.1)
      fail(ErrorCode::CurvatureNearFocal, "curvature " + std::to_string(x.kappa) + " is within 0.1 of the focal value");
    FbPair pr;
    pr.x = x.x;
    pr.y = y.x;
    pr.kappa = x.kappa;
    pr.ratio = y.u_nu != 0 ? x.u_nu / y.u_nu : kInf;
    pr.target = std::fabs(x.kappa) <= flat_kappa ? 1.0 : 1.0 - x.kappa;
    pr.pass = std::fabs(pr.ratio - pr.target) <= rel_tol * pr.target;
    good += pr.pass;
    r.max_pair_offset = std::max(r.max_pair_offset, offset[k]);
    ratios.push_back(pr.ratio);
    targets.push_back(pr.target);
    r.pairs.push_back(pr);
  }
  if (r.pairs.empty()) return r;
  r.median_ratio = median(ratios);
  r.median_target = median(targets);
  r.pass_fraction = static_cast<double>(good) / r.pairs.size();
  r.pass = std::fabs(r.median_ratio - r.median_target) <= rel_tol * r.median_target && r.pass_fraction >= 0.9;
  return r;
}

MassBalance check_mass_balance(const Field& u1, const Field& u2, const Grid& g, const Mask& omega, const Mask& patch1,
                               const Mask& patch2, std::size_t min_cells) {
  const Field L1 = discrete_laplacian(u1, g, omega);
  const Field L2 = discrete_laplacian(u2, g, omega);
  MassBalance m;
  const double h2 = g.h * g.h;
  for (std::size_t p = 0; p < omega.size(); ++p) {
    if (!omega[p]) continue;
    if (patch1[p]) {
      m.mass1 += h2 * L1[p];
      ++m.cells1;
    }
    if (patch2[p]) {
      m.mass2 += h2 * L2[p];
      ++m.cells2;
    }
  }
  if (m.cells1 < min_cells || m.cells2 < min_cells)
    fail(ErrorCode::PatchTooSmall, "patch has " + std::to_string(std::min(m.cells1, m.cells2)) + " cells, need " +
                                       std::to_string(min_cells));
  const double big = std::max(std::fabs(m.mass1), std::fabs(m.mass2));
  if (!(big > 0)) fail(ErrorCode::PatchTooSmall, "patches carry no Laplacian mass");
  m.rel_diff = std::fabs(m.mass1 - m.mass2) / big;
  return m;
}

AreaRatio check_area_ratio(const InterfaceCurve& c, int first, int last) {
  const int n = static_cast<int>(c.v.size());
  if (first < 0 || last < 0 || first >= n || last >= n) fail(ErrorCode::InvalidArgument, "patch indices out of range");
  std::vector<int> idx;
  if (first <= last) {
    for (int k = first; k <= last; ++k) idx.push_back(k);
  } else {
    if (!c.closed) fail(ErrorCode::InvalidArgument, "wrapped patch on an open curve");
    for (int k = first; k < n; ++k) idx.push_back(k);
    for (int k = 0; k <= last; ++k) idx.push_back(k);
  }
  if (idx.size() < 3) fail(ErrorCode::InvalidArgument, "patch needs at least three vertices");
  AreaRatio r;
  double sk = 0, skk = 0;
  for (std::size_t t = 0; t < idx.size(); ++t) {
    const auto& v = c.v[idx[t]];
    sk += v.kappa;
    skk += v.kappa * v.kappa;
    if (t == 0) continue;
    const auto& w = c.v[idx[t - 1]];
    r.len1 += dist(v.x, w.x);
    r.len2 += dist({v.x.x + v.n.x, v.x.y + v.n.y}, {w.x.x + w.n.x, w.x.y + w.n.y});
  }
  const double m = idx.size();
  r.mean_kappa = sk / m;
  r.kappa_spread = std::sqrt(std::max(0.0, skk / m - r.mean_kappa * r.mean_kappa));
  r.ratio = r.len1 > 0 ? r.len2 / r.len1 : 0;
  r.target = 1.0 - r.mean_kappa;
  return r;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::InvalidArgument, "fit_line needs two or more points");
  const double n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 0)) fail(ErrorCode::InvalidArgument, "fit_line abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double r = y[k] - (f.intercept + f.slope * x[k]);
    ss += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ss / syy : (ss == 0 ? 1.0 : 0.0);
  return f;
}

DecayEstimate fit_decay(const std::vector<double>& eps, const std::vector<double>& values, Vec2 probe, const Grid& g,
                        const Mask& decay_region, const Mask& data_support) {
  if (eps.size() != values.size() || eps.size() < 3) fail(ErrorCode::InvalidArgument, "decay fit needs three or more epsilon values");
  const int p = cell_of(g, probe);
  if (p < 0 || data_support[p] || !decay_region[p])
    fail(ErrorCode::ProbeOutsideDecayRegion,
         "probe (" + std::to_string(probe.x) + ", " + std::to_string(probe.y) + ") is not in the decay region");
  DecayEstimate d;
  d.probe = probe;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(values[k] > 0)) fail(ErrorCode::InvalidArgument, "decay probe value is not positive");
    d.inv_eps.push_back(1.0 / eps[k]);
    d.log_u.push_back(std::log(values[k]));
  }
  LineFit f = fit_line(d.inv_eps, d.log_u);
  d.slope = f.slope;
  d.r2 = f.r2;
  return d;
}

std::vector<double> gradient_profile(const Field& u, const Grid& g, const Mask& omega, const Field& dist_to_boundary,
                                     const std::vector<double>& radii) {
  std::vector<double> best(radii.size(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t p = g.idx(i, j);
      if (!omega[p]) continue;
      int il = g.fold_x(i - 1), ir = g.fold_x(i + 1), jd = g.fold_y(j - 1), ju = g.fold_y(j + 1);
      if (il < 0 || ir < 0 || jd < 0 || ju < 0) continue;
      const double gx = (u[g.idx(ir, j)] - u[g.idx(il, j)]) / (2 * g.h);
      const double gy = (u[g.idx(i, ju)] - u[g.idx(i, jd)]) / (2 * g.h);
      const double gn = std::hypot(gx, gy);
      for (std::size_t k = 0; k < radii.size(); ++k)
        if (dist_to_boundary[p] >= radii[k]) best[k] = std::max(best[k], gn);
    }
  return best;
}

std::vector<Field> render_annulus_limit(const GridDomain& gd, const BoundaryData& bd, double fa, double fb) {
  const double a = gd.spec.a, b = gd.spec.b;
  const double R = solve_radial_limit(a, b, fa, fb);
  const Grid& g = gd.grid;
  std::vector<Field> u = bd.f;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t p = g.idx(i, j);
      if (!gd.omega[p]) continue;
      LimitProfile lp = radial_limit_profile(a, b, fa, fb, R, std::hypot(g.xc(i), g.yc(j)));
      u[0][p] = lp.u1;
      u[1][p] = lp.u2;
    }
  return u;
}

std::vector<Field> render_strip_limit(const GridDomain& gd, const BoundaryData& bd, double f1, double f2) {
  const double W = gd.spec.width;
  const double R = (W - 1.0) / 2.0;
  const Grid& g = gd.grid;
  std::vector<Field> u = bd.f;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t p = g.idx(i, j);
      if (!gd.omega[p]) continue;
      const double x = g.xc(i);
      u[0][p] = f1 * std::clamp((R - x) / R, 0.0, 1.0);
      u[1][p] = f2 * std::clamp((x - R - 1.0) / (W - R - 1.0), 0.0, 1.0);
    }
  return u;
}

double threshold_shift_cells(const Field& u, const Grid& g, const Mask& omega, double delta_abs, double delta_rel) {
  const Mask a = extract_support(u, omega, delta_abs, delta_rel).mask;
  const Mask b = extract_support(u, omega, delta_abs, 0.5 * delta_rel).mask;
  const Grid gu = unfolded_grid(g);
  const Mask au = unfold(a, g), bu = unfold(b, g);
  const Field d2 = edt_squared(au, gu.nx, gu.ny);
  double worst = 0;
  bool any_a = count(au) > 0;
  for (std::size_t p = 0; p < bu.size(); ++p)
    if (bu[p] && !au[p]) {
      if (!any_a) return kInf;
      worst = std::max(worst, d2[p]);
    }
  return std::sqrt(worst);
}

}  // namespace nlseg
