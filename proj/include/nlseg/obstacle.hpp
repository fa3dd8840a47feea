#pragma once

#include <vector>

#include "nlseg/domain.hpp"
#include "nlseg/linsolve.hpp"

namespace nlseg {

struct ObstacleSpec {
  double mu = 0, lambda = 0, a = 0;  // a = lambda - mu
  std::vector<Mask> A;               // per population, inside Omega
  std::vector<Field> psi;            // harmonic in A_i, f_i on the strip, 0 elsewhere
  std::vector<std::vector<Vec2>> gamma;  // samples of the trimmed offset curve
  std::vector<std::vector<Vec2>> ends;   // endpoints y_l of supp f_i ∩ ∂Omega (empty for closed curves)
  std::vector<std::vector<double>> angles;  // measured corner angle of A_i at each representable endpoint
};

// Offset curve at distance mu outside Omega, trimmed to distance >= lambda
// from the endpoints, and A_i = Omega ∩ {d(x, Γ) < lambda} (Euclidean d).
// Needs boundary curves from a preset. Throws SeparationViolation when two
// A_i come within rho-distance 1 - h of each other.
ObstacleSpec build_obstacles(const GridDomain& gd, const BoundaryData& bd, double mu, double lambda, const Norm& norm,
                             const LinearOptions& lin = {});

// Angle of the mask at a corner point y between the boundary direction t0
// and a line fitted to the internal edge of the mask within `window` of y.
double corner_angle(const Mask& A, const GridDomain& gd, Vec2 y, Vec2 t0, double window);

struct SlopeReport {
  std::vector<double> min_slope;  // min |grad psi_i| on the internal boundary of A_i
  std::vector<std::size_t> samples;
};

// Boundary cells closer than 4h to an endpoint are skipped.
SlopeReport check_obstacle_gradient(const ObstacleSpec& spec, const GridDomain& gd);

// min over Omega ∩ B_lambda(z), z on Γ, of psi_i - log(lambda/|x - z|)/log(lambda/mu).
double barrier_margin(const ObstacleSpec& spec, const GridDomain& gd, int i, int z_stride = 8);

}  // namespace nlseg
