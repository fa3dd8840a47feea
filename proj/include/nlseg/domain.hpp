#pragma once

#include <string>
#include <vector>

#include "nlseg/grid.hpp"
#include "nlseg/norm.hpp"

namespace nlseg {

struct DomainSpec {
  std::string shape = "rectangle";  // rectangle | strip | annulus | disk
  double width = 0, height = 0;     // rectangle / strip: Omega = (0,width) x (0,height)
  double a = 0, b = 0;              // annulus a < |x| < b
  double radius = 0;                // disk |x| < radius
  double h = 0;
  bool use_symmetry = true;         // mirror planes where the preset allows them
};

struct GridDomain {
  Grid grid;
  Mask omega;     // Omega
  Mask extended;  // Omega plus the rho-strip of width 1
  DomainSpec spec;
  Norm norm;

  Mask strip() const;  // extended \ omega
};

// Throws ResolutionTooCoarse (unit ball spans < 64 cells along an axis) and
// GeometryTooThin (annulus b - a <= 2, strip height < 4).
GridDomain build_domain(const DomainSpec& spec, const Norm& norm);

// Dense sampling of supp f_i ∩ ∂Omega with normals pointing out of Omega.
struct BoundaryCurve {
  std::vector<Vec2> pts;
  std::vector<Vec2> normals;
  bool closed = false;
};

struct BoundaryData {
  int K = 0;
  std::vector<Field> f;               // supported on the strip
  std::vector<BoundaryCurve> curves;  // empty when the preset has no closed form
};

struct DataSpec {
  std::string preset = "annulus_rims";  // annulus_rims | strip_linear | disk_sectors | csv
  std::vector<double> values;           // per-population level (default 1)
  int K = 2;
  std::string csv_path;
};

BoundaryData make_boundary_data(const GridDomain& gd, const DataSpec& ds);

// Rows "x,y,population_index,value" with 1-based population index.
BoundaryData read_boundary_csv(const std::string& path, const GridDomain& gd, int K);
void write_boundary_csv(const std::string& path, const BoundaryData& bd, const GridDomain& gd);

struct CheckItem {
  std::string name;
  bool pass = true;
  double margin = 0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckItem> items;
  bool ok() const;
};

// Throws NegativeData, EmptySupport or SeparationViolation (distance < 1 - h)
// when throw_on_error is set; the report is filled either way.
ValidationReport validate_boundary_data(const BoundaryData& bd, const GridDomain& gd, const Norm& norm,
                                        double density_c = 0.25, bool throw_on_error = true);

struct LinearOptions;
// Discrete harmonic extension of f into Omega.
Field harmonic_majorant(const Field& f, const GridDomain& gd, const LinearOptions& opt);
Field harmonic_majorant(const Field& f, const GridDomain& gd);

}  // namespace nlseg
