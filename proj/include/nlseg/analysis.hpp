#pragma once

#include <string>
#include <vector>

#include "nlseg/contour.hpp"
#include "nlseg/domain.hpp"
#include "nlseg/grid.hpp"
#include "nlseg/norm.hpp"

namespace nlseg {

// ---- supports -------------------------------------------------------------

struct Support {
  Mask mask;
  double threshold = 0;  // max(delta_abs, delta_rel * max u over Omega)
};

// {x in Omega : u > threshold}.
Support extract_support(const Field& u, const Mask& omega, double delta_abs, double delta_rel);

// Pairwise rho-distances between cell centres of the masks. Throws EmptySet.
std::vector<std::vector<double>> support_separation(const std::vector<Mask>& masks, const Grid& g, const Norm& n);

struct BallRegularity {
  std::size_t diff_cells = 0;     // |S* Δ S| inside the region
  std::size_t outside_collar = 0; // of which farther than `collar` cells from ∂S
  bool pass = false;
};

// T = {x in D : d(x,S) >= 1}, S* = {x in D : d(x,T) > 1} with D = `domain`
// (the whole box when null). Passes when every cell of S* Δ S lies within
// `collar` cells of the boundary of S.
BallRegularity check_ball_regularization(const Mask& S, const Grid& g, const Norm& n, const Mask* domain = nullptr,
                                         int collar = 2);

// ---- interfaces ------------------------------------------------------------

struct LengthStability {
  double length_h = 0, length_h2 = 0, rel_change = 0;
  bool pass = false;
};
LengthStability interface_length_stability(const InterfaceSet& a, const InterfaceSet& b, double tol = 0.05);

struct SingularPoint {
  Vec2 location;
  double theta = 0;  // tangent-cone angle at the point
  Vec2 partner;
  double partner_theta = 0;
  double distance = 0;  // rho(location - partner)
  double spread = 0;    // diameter of the minimising set
  int curve = 0, vertex = 0;
};

struct SingularOptions {
  double window_cells = 5;   // local minimum window (cells of arc length)
  double slack_cells = 2;    // candidates within d_min + slack
  double spread_cells = 4;   // realisation set diameter threshold
  int exclude_cells = 5;     // nearest cells skipped by tangent fits
  int fit_cells = 20;        // tangent fit window beyond the exclusion
};

// Vertices whose set of near-minimal local minimisers of rho(x - ·) on the
// opposing interface has diameter above spread_cells * h. Runs of flagged
// vertices are merged into one point (the most balanced vertex of the run).
std::vector<SingularPoint> detect_singular_points(const InterfaceSet& iface, const InterfaceSet& opposing,
                                                  const Norm& n, const SingularOptions& opt = {});

// Angle between the two one-sided tangents of a polyline at vertex k, each a
// line fit over the vertices at arc distance (exclude, exclude + fit] on that
// side. Returns pi for a straight curve and NaN when a side has fewer than
// two vertices.
double tangent_cone_angle(const std::vector<Vec2>& pts, bool closed, int k, double exclude, double fit);

// ---- laws at the free boundary -----------------------------------------------

// pi/theta0 - 1. Throws ZeroAngle for theta0 <= 0.
double cone_growth_exponent(double theta0);

struct WedgeFit {
  double exponent = 0, r2 = 0;
};
// Samples r^{1+a} sin((1+a) t) on a lattice covering the wedge 0 < t < theta0,
// takes the maximum over thin arcs at each radius and fits log max vs log r.
WedgeFit fit_wedge_exponent(double theta0, double h, double r_min = 0.1, double r_max = 1.0, int n_radii = 10);

struct FbPair {
  Vec2 x, y;
  double ratio = 0;    // u_nu^1(x) / u_nu^2(y)
  double target = 0;   // 1 - kappa_1(x), or 1 on the flat branch
  double kappa = 0;
  bool pass = false;
};

struct FbReport {
  std::vector<FbPair> pairs;
  double median_ratio = 0, median_target = 0;
  double max_pair_offset = 0;  // worst |partner - nearest opposing vertex|
  std::size_t unpaired = 0;
  double pass_fraction = 0;  // pairs within rel_tol of their own target
  bool pass = false;         // median agreement and pass_fraction >= 0.9
};

// Pairs each vertex x of iface1 with x + nu(x) (Euclidean unit step) on
// iface2, accepting partners within pair_tol. `rel_tol` is the per-pair and
// median agreement bound. Throws CurvatureNearFocal when |1 - kappa| < 0.1.
FbReport check_fb_condition(const InterfaceSet& iface1, const InterfaceSet& iface2, double pair_tol, double rel_tol = 0.1,
                            double flat_kappa = 0.02, double skip_ends = 0.0);

struct MassBalance {
  double mass1 = 0, mass2 = 0, rel_diff = 0;
  std::size_t cells1 = 0, cells2 = 0;
};
// Sums h^2 Δ_h u_i over the patch cells (inside Omega). Throws PatchTooSmall
// when a patch has fewer than min_cells cells or vanishing mass.
MassBalance check_mass_balance(const Field& u1, const Field& u2, const Grid& g, const Mask& omega, const Mask& patch1,
                               const Mask& patch2, std::size_t min_cells = 16);

struct AreaRatio {
  double len1 = 0, len2 = 0, ratio = 0;
  double mean_kappa = 0, kappa_spread = 0;
  double target = 0;  // 1 - mean kappa
};
// Transports the patch (vertices [first, last] of one curve) by one unit
// along the normals and compares lengths.
AreaRatio check_area_ratio(const InterfaceCurve& c, int first, int last);

// ---- decay and gradient probes ---------------------------------------------

struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct DecayEstimate {
  Vec2 probe;
  double slope = 0, r2 = 0;
  std::vector<double> inv_eps, log_u;
};

// Affine fit of log u_j(probe) against 1/eps. `decay_region` is the cell
// mask where the fit is meaningful and `data_support` the support of f_j;
// throws ProbeOutsideDecayRegion when the probe is in data_support or outside
// decay_region (values are looked up on the grid g).
DecayEstimate fit_decay(const std::vector<double>& eps, const std::vector<double>& values, Vec2 probe, const Grid& g,
                        const Mask& decay_region, const Mask& data_support);

// max over cells of Omega with d(x, ∂Omega) >= r of |grad u| (central
// differences), for each r.
std::vector<double> gradient_profile(const Field& u, const Grid& g, const Mask& omega, const Field& dist_to_boundary,
                                     const std::vector<double>& radii);

// Limit states rendered on a domain: the radial limit on an annulus and the
// linear profiles of the strip preset. Strip cells carry the boundary data.
std::vector<Field> render_annulus_limit(const GridDomain& gd, const BoundaryData& bd, double fa, double fb);
std::vector<Field> render_strip_limit(const GridDomain& gd, const BoundaryData& bd, double f1, double f2);

// Cell-wise threshold sensitivity: Hausdorff distance in cells between the
// supports at delta_rel and delta_rel / 2.
double threshold_shift_cells(const Field& u, const Grid& g, const Mask& omega, double delta_abs, double delta_rel);

}  // namespace nlseg
