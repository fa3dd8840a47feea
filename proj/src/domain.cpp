#include "nlseg/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "nlseg/errors.hpp"
#include "nlseg/linsolve.hpp"
#include "nlseg/morphology.hpp"

namespace nlseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

int cells_for(double len, double h) { return static_cast<int>(std::ceil(len / h - 1e-9)); }

void check_positive(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be positive, got " << v;
    fail(ErrorCode::InvalidArgument, os.str());
  }
}

// Sector angle of the disk preset: each population owns an arc, separated by a
// chord of length exactly 1 at radius R.
double sector_gap(double R) { return 2.0 * std::asin(1.0 / (2.0 * R)); }

double angle_of(double x, double y) {
  double t = std::atan2(y, x);
  return t < 0 ? t + 2 * kPi : t;
}

BoundaryCurve arc_curve(double R, double t0, double t1, double ds) {
  BoundaryCurve c;
  int n = std::max(8, static_cast<int>(std::ceil(R * (t1 - t0) / ds)));
  for (int k = 0; k <= n; ++k) {
    double t = t0 + (t1 - t0) * k / n;
    c.pts.push_back({R * std::cos(t), R * std::sin(t)});
    c.normals.push_back({std::cos(t), std::sin(t)});
  }
  return c;
}

BoundaryCurve circle_curve(double R, double ds, bool inward) {
  BoundaryCurve c = arc_curve(R, 0, 2 * kPi, ds);
  c.pts.pop_back();
  c.normals.pop_back();
  if (inward)
    for (auto& n : c.normals) n = {-n.x, -n.y};
  c.closed = true;
  return c;
}

BoundaryCurve polyline_curve(const std::vector<Vec2>& corners, double ds) {
  BoundaryCurve c;
  for (std::size_t s = 0; s + 1 < corners.size(); ++s) {
    Vec2 a = corners[s], b = corners[s + 1];
    double len = std::hypot(b.x - a.x, b.y - a.y);
    int n = std::max(2, static_cast<int>(std::ceil(len / ds)));
    // outward normal of the segment for a counter-clockwise boundary
    Vec2 nrm{(b.y - a.y) / len, -(b.x - a.x) / len};
    for (int k = (s == 0 ? 0 : 1); k <= n; ++k) {
      double t = static_cast<double>(k) / n;
      c.pts.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
      c.normals.push_back(nrm);
    }
  }
  return c;
}

}  // namespace

Mask GridDomain::strip() const { return mask_minus(extended, omega); }

GridDomain build_domain(const DomainSpec& spec, const Norm& norm) {
  check_positive(spec.h, "h");
  const double h = spec.h;
  const double ex = ball_extent_x(norm), ey = ball_extent_y(norm);
  const double span = 2.0 * std::min(ex, ey) / h;
  if (span < 64.0 - 1e-9) {
    std::ostringstream os;
    os << "unit ball spans " << span << " cells; need at least 64 (h <= " << 2.0 * std::min(ex, ey) / 64.0 << ")";
    fail(ErrorCode::ResolutionTooCoarse, os.str());
  }

  GridDomain gd;
  gd.spec = spec;
  gd.norm = norm;
  Grid& g = gd.grid;
  g.h = h;
  const int px = cells_for(ex, h) + 2, py = cells_for(ey, h) + 2;

  enum class Geo { Rect, Annulus, Disk } geo = Geo::Rect;
  if (spec.shape == "rectangle" || spec.shape == "strip") {
    check_positive(spec.width, "width");
    check_positive(spec.height, "height");
    if (spec.shape == "strip" && spec.height < 4.0) {
      std::ostringstream os;
      os << "strip height " << spec.height << " < 4";
      fail(ErrorCode::GeometryTooThin, os.str());
    }
    g.nx = cells_for(spec.width, h) + 2 * px;
    g.x0 = -px * h;
    if (spec.shape == "strip" && spec.use_symmetry) {
      // even about the mid-line y = height/2
      int half = cells_for(spec.height / 2, h);
      if (std::fabs(half * h - spec.height / 2) > 1e-9 * spec.height)
        fail(ErrorCode::InvalidArgument, "strip symmetry needs height/2 to be a multiple of h");
      g.mirror_y = true;
      g.y0 = spec.height / 2;
      g.ny = half + py;
    } else {
      g.ny = cells_for(spec.height, h) + 2 * py;
      g.y0 = -py * h;
    }
  } else if (spec.shape == "annulus") {
    check_positive(spec.a, "a");
    check_positive(spec.b, "b");
    if (!(spec.b - spec.a > 2.0)) {
      std::ostringstream os;
      os << "annulus needs b - a > 2, got " << spec.b - spec.a;
      fail(ErrorCode::GeometryTooThin, os.str());
    }
    geo = Geo::Annulus;
  } else if (spec.shape == "disk") {
    check_positive(spec.radius, "radius");
    if (spec.radius < 1.0) fail(ErrorCode::GeometryTooThin, "disk radius < 1");
    geo = Geo::Disk;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown domain shape '" + spec.shape + "'");
  }

  if (geo != Geo::Rect) {
    const double outer = (geo == Geo::Annulus ? spec.b : spec.radius);
    const int nxh = cells_for(outer + ex, h) + 2, nyh = cells_for(outer + ey, h) + 2;
    // the annulus is even in both axes; the disk preset only in x
    g.mirror_x = spec.use_symmetry;
    g.mirror_y = spec.use_symmetry && geo == Geo::Annulus;
    g.nx = g.mirror_x ? nxh : 2 * nxh;
    g.x0 = g.mirror_x ? 0.0 : -nxh * h;
    g.ny = g.mirror_y ? nyh : 2 * nyh;
    g.y0 = g.mirror_y ? 0.0 : -nyh * h;
  }

  gd.omega.assign(g.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double x = g.xc(i), y = g.yc(j);
      bool in = false;
      switch (geo) {
        case Geo::Rect: in = x > 0 && x < spec.width && y > 0 && y < spec.height; break;
        case Geo::Annulus: {
          double r = std::hypot(x, y);
          in = r > spec.a && r < spec.b;
          break;
        }
        case Geo::Disk: in = std::hypot(x, y) < spec.radius; break;
      }
      gd.omega[g.idx(i, j)] = in;
    }

  if (norm.is_euclidean() && geo != Geo::Rect) {
    gd.extended.assign(g.size(), 0);
    const double lo = geo == Geo::Annulus ? std::max(spec.a - 1.0, 0.0) : 0.0;
    const double hi = (geo == Geo::Annulus ? spec.b : spec.radius) + 1.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double r = std::hypot(g.xc(i), g.yc(j));
        gd.extended[g.idx(i, j)] = r >= lo && r <= hi;
      }
  } else {
    gd.extended = dilate_by_ball(gd.omega, g, 1.0 + 0.5 * h, norm);
  }
  return gd;
}

BoundaryData make_boundary_data(const GridDomain& gd, const DataSpec& ds) {
  if (ds.preset == "csv") return read_boundary_csv(ds.csv_path, gd, ds.K);
  const Grid& g = gd.grid;
  const Mask strip = gd.strip();
  const double h = g.h;
  auto level = [&](int i) {
    if (ds.values.empty()) return 1.0;
    if (static_cast<int>(ds.values.size()) <= i) fail(ErrorCode::InvalidArgument, "too few data values");
    return ds.values[i];
  };
  BoundaryData bd;
  if (ds.preset == "annulus_rims") {
    if (gd.spec.shape != "annulus") fail(ErrorCode::InvalidArgument, "annulus_rims needs an annulus domain");
    bd.K = 2;
    bd.f.assign(2, Field(g.size(), 0.0));
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t p = g.idx(i, j);
        if (!strip[p]) continue;
        double r = std::hypot(g.xc(i), g.yc(j));
        if (r <= gd.spec.a)
          bd.f[0][p] = level(0);
        else
          bd.f[1][p] = level(1);
      }
    bd.curves.push_back(circle_curve(gd.spec.a, 0.5 * h, true));
    bd.curves.push_back(circle_curve(gd.spec.b, 0.5 * h, false));
  } else if (ds.preset == "strip_linear") {
    if (gd.spec.shape != "strip") fail(ErrorCode::InvalidArgument, "strip_linear needs a strip domain");
    const double W = gd.spec.width, H = gd.spec.height;
    const double R = (W - 1.0) / 2.0;
    if (!(R > 0)) fail(ErrorCode::GeometryTooThin, "strip width must exceed 1");
    bd.K = 2;
    bd.f.assign(2, Field(g.size(), 0.0));
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t p = g.idx(i, j);
        if (!strip[p]) continue;
        double x = g.xc(i);
        bd.f[0][p] = level(0) * std::clamp((R - x) / R, 0.0, 1.0);
        bd.f[1][p] = level(1) * std::clamp((x - R - 1.0) / (W - R - 1.0), 0.0, 1.0);
      }
    bd.curves.push_back(polyline_curve({{R, 0}, {0, 0}, {0, H}, {R, H}}, 0.5 * h));
    bd.curves.push_back(polyline_curve({{R + 1, H}, {W, H}, {W, 0}, {R + 1, 0}}, 0.5 * h));
    // polyline_curve takes counter-clockwise order; both chains run with
    // Omega on the right, so flip the normals to point out of Omega
    for (auto& c : bd.curves)
      for (auto& n : c.normals) n = {-n.x, -n.y};
  } else if (ds.preset == "disk_sectors") {
    if (gd.spec.shape != "disk") fail(ErrorCode::InvalidArgument, "disk_sectors needs a disk domain");
    const double R = gd.spec.radius;
    const double gap = sector_gap(R);
    bd.K = 2;
    bd.f.assign(2, Field(g.size(), 0.0));
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t p = g.idx(i, j);
        if (!strip[p]) continue;
        double t = angle_of(g.xc(i), g.yc(j));
        if (t >= gap / 2 && t <= kPi - gap / 2) bd.f[0][p] = level(0);
        if (t >= kPi + gap / 2 && t <= 2 * kPi - gap / 2) bd.f[1][p] = level(1);
      }
    bd.curves.push_back(arc_curve(R, gap / 2, kPi - gap / 2, 0.5 * h));
    bd.curves.push_back(arc_curve(R, kPi + gap / 2, 2 * kPi - gap / 2, 0.5 * h));
  } else {
    fail(ErrorCode::InvalidArgument, "unknown data preset '" + ds.preset + "'");
  }
  return bd;
}

BoundaryData read_boundary_csv(const std::string& path, const GridDomain& gd, int K) {
  if (K < 1) fail(ErrorCode::InvalidArgument, "K must be at least 1");
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  const Grid& g = gd.grid;
  BoundaryData bd;
  bd.K = K;
  bd.f.assign(K, Field(g.size(), 0.0));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find_first_of("xX") == 0) continue;  // header
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, y, v;
    int pop;
    auto where = [&] { return path + ":" + std::to_string(lineno) + ": "; };
    if (!(ss >> x >> y >> pop >> v)) fail(ErrorCode::InvalidArgument, where() + "expected x,y,population_index,value");
    if (pop < 1 || pop > K) fail(ErrorCode::InvalidArgument, where() + "population_index out of range");
    int i = static_cast<int>(std::floor((x - g.x0) / g.h));
    int j = static_cast<int>(std::floor((y - g.y0) / g.h));
    i = g.fold_x(i);
    j = g.fold_y(j);
    if (i < 0 || j < 0) fail(ErrorCode::InvalidArgument, where() + "point outside the grid");
    bd.f[pop - 1][g.idx(i, j)] = v;
  }
  return bd;
}

void write_boundary_csv(const std::string& path, const BoundaryData& bd, const GridDomain& gd) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out.precision(17);
  out << "x,y,population_index,value\n";
  const Grid& g = gd.grid;
  for (int k = 0; k < bd.K; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double v = bd.f[k][g.idx(i, j)];
        if (v != 0) out << g.xc(i) << ',' << g.yc(j) << ',' << k + 1 << ',' << v << '\n';
      }
}

bool ValidationReport::ok() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.pass; });
}

ValidationReport validate_boundary_data(const BoundaryData& bd, const GridDomain& gd, const Norm& norm,
                                        double density_c, bool throw_on_error) {
  const Grid& g = gd.grid;
  ValidationReport rep;
  if (bd.K < 1 || static_cast<int>(bd.f.size()) != bd.K)
    fail(ErrorCode::InvalidArgument, "population count does not match data");
  for (const auto& f : bd.f)
    if (f.size() != g.size()) fail(ErrorCode::InvalidArgument, "data field does not match grid");

  std::vector<Mask> supp(bd.K, Mask(g.size(), 0));
  for (int k = 0; k < bd.K; ++k) {
    const std::string tag = "f" + std::to_string(k + 1);
    double fmin = std::numeric_limits<double>::infinity();
    std::size_t n = 0, in_omega = 0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      double v = bd.f[k][p];
      if (!std::isfinite(v)) v = -1;
      fmin = std::min(fmin, v);
      if (v > 0) {
        supp[k][p] = 1;
        ++n;
        if (gd.omega[p]) ++in_omega;
      }
    }
    CheckItem neg{tag + ".nonnegative", fmin >= 0, fmin, ""};
    rep.items.push_back(neg);
    if (!neg.pass && throw_on_error) fail(ErrorCode::NegativeData, tag + " has min " + std::to_string(fmin));
    CheckItem empty{tag + ".nonempty", n > 0, static_cast<double>(n), "support cells"};
    rep.items.push_back(empty);
    if (!empty.pass && throw_on_error) fail(ErrorCode::EmptySupport, tag + " is identically zero");
    rep.items.push_back({tag + ".outside_omega", in_omega == 0, -static_cast<double>(in_omega), "support cells in Omega"});
    if (in_omega && throw_on_error) fail(ErrorCode::InvalidArgument, tag + " is nonzero inside Omega");
  }

  for (int a = 0; a < bd.K; ++a)
    for (int b = a + 1; b < bd.K; ++b) {
      const std::string tag = "separation.f" + std::to_string(a + 1) + ".f" + std::to_string(b + 1);
      if (!count(supp[a]) || !count(supp[b])) {
        rep.items.push_back({tag, false, 0, "empty support"});
        continue;
      }
      double d = set_distance(supp[a], supp[b], g, norm);
      std::ostringstream os;
      os.precision(12);
      os << "d_rho = " << d;
      CheckItem it{tag, d >= 1.0 - g.h, d - 1.0, os.str()};
      rep.items.push_back(it);
      if (!it.pass && throw_on_error) fail(ErrorCode::SeparationViolation, tag + ": " + os.str());
    }

  // density: ball fractions at support boundary cells for r in {2h, 4h, 8h}
  for (int k = 0; k < bd.K; ++k) {
    if (!count(supp[k])) continue;
    Mask bnd = boundary_cells(supp[k], g);
    double worst = 1.0;
    for (int m : {2, 4, 8}) {
      const double r = m * g.h;
      std::vector<std::pair<int, int>> offs;
      const int R = m * 4 + 2;
      for (int dj = -R; dj <= R; ++dj)
        for (int di = -R; di <= R; ++di)
          if (norm(di * g.h, dj * g.h) <= r) offs.push_back({di, dj});
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          if (!bnd[g.idx(i, j)]) continue;
          std::size_t hit = 0;
          for (auto [di, dj] : offs) {
            int a = g.fold_x(i + di), b = g.fold_y(j + dj);
            if (a >= 0 && b >= 0 && supp[k][g.idx(a, b)]) ++hit;
          }
          worst = std::min(worst, static_cast<double>(hit) / offs.size());
        }
    }
    std::ostringstream os;
    os << "min ball fraction " << worst << " (c = " << density_c << ")";
    rep.items.push_back({"density.f" + std::to_string(k + 1), worst >= density_c, worst - density_c, os.str()});
  }
  return rep;
}

Field harmonic_majorant(const Field& f, const GridDomain& gd, const LinearOptions& opt) {
  const Grid& g = gd.grid;
  if (f.size() != g.size()) fail(ErrorCode::InvalidArgument, "data field does not match grid");
  Field bdry(g.size(), 0.0);
  double fmax = 0;
  for (std::size_t p = 0; p < g.size(); ++p)
    if (!gd.omega[p]) {
      bdry[p] = f[p];
      fmax = std::max(fmax, f[p]);
    }
  ScreenedSolver s(g, gd.omega, opt);
  Field phi = s.solve(Field(g.size(), 0.0), bdry);
  const double slack = 1e-8 * std::max(fmax, 1e-300);
  for (std::size_t p = 0; p < g.size(); ++p)
    if (gd.omega[p] && (phi[p] < -slack || phi[p] > fmax + slack)) {
      std::ostringstream os;
      os << "maximum principle violated: phi = " << phi[p] << " with max f = " << fmax;
      fail(ErrorCode::SolverDiverged, os.str());
    }
  return phi;
}

Field harmonic_majorant(const Field& f, const GridDomain& gd) {
  LinearOptions opt;
  opt.tol = 1e-12;
  return harmonic_majorant(f, gd, opt);
}

}  // namespace nlseg
