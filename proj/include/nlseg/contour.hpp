#pragma once

#include <vector>

#include "nlseg/grid.hpp"

namespace nlseg {

struct Polyline {
  std::vector<Vec2> pts;
  bool closed = false;
  double length() const;
};

// Marching squares through cell centres of a plain (unmirrored) grid. A square
// is contoured only if `keep` (when given) accepts all four corners and
// `touch` (when given) accepts at least one. Curves are oriented with
// {u > level} on the left and sorted by first vertex.
std::vector<Polyline> marching_squares(const Field& u, const Grid& g, double level, const Mask* keep = nullptr,
                                       const Mask* touch = nullptr);

struct InterfaceVertex {
  Vec2 x;
  Vec2 n;            // outward normal of the support, -grad u / |grad u|
  double kappa = 0;  // signed curvature; negative where the support is convex
  double u_nu = 0;   // outward normal derivative
};

struct InterfaceCurve {
  std::vector<InterfaceVertex> v;
  bool closed = false;
  double length() const;
};

struct InterfaceSet {
  int population = 0;  // 0-based
  double level = 0;
  double h = 0;
  std::vector<InterfaceCurve> curves;
  double total_length() const;
  std::size_t vertex_count() const;
};

struct InterfaceOptions {
  double window = 0;  // curvature window half-length; 0: max(10h, 0.1)
  int min_vertices = 6;
};

// Traces {u = level} inside the extended region with at least one corner in
// Omega. Throws DegenerateContour when no curve has min_vertices vertices.
InterfaceSet extract_interface(const Field& u, const Grid& g, const Mask& omega, const Mask& extended, double level,
                               int population, const InterfaceOptions& opt = {});

// Pratt algebraic circle fit. Returns false for (near) collinear input.
bool fit_circle(const std::vector<Vec2>& pts, Vec2& centre, double& radius);

// One-sided derivative along -n from four samples at spacing h.
double normal_derivative(const Field& u, const Grid& g, Vec2 x, Vec2 n, double h);

}  // namespace nlseg
