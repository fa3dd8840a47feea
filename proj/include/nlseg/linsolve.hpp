#pragma once

#include <memory>

#include "nlseg/domain.hpp"
#include "nlseg/grid.hpp"

namespace nlseg {

enum class LinearMethod { Multigrid, Jacobi };

struct LinearOptions {
  LinearMethod method = LinearMethod::Multigrid;
  double tol = 1e-10;  // on max |h^2 (Δv - c v)| relative to max |bdry|
  int max_iter = 0;    // 0: method default
};

struct LinearStats {
  int iterations = 0;
  double residual = 0;  // achieved relative residual
};

// Conjugate gradients for the SPD five-point operator h^2(-Δ + c) on the
// `unknown` cells; every other cell is a Dirichlet value taken from bdry.
// Multigrid preconditioning uses a geometric V-cycle (bilinear transfer,
// red-black Gauss-Seidel, rediscretised coarse operators).
class ScreenedSolver {
 public:
  ScreenedSolver(const Grid& g, const Mask& unknown, LinearOptions opt = {});
  Field solve(const Field& c, const Field& bdry, const Field* guess = nullptr, LinearStats* st = nullptr);
  const Grid& grid() const;
  const Mask& unknown() const;
  const LinearOptions& options() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Throws NegativeCoefficient (c < 0 on an unknown cell) and SolverDiverged.
Field solve_screened(const Field& c, const Field& bdry, const GridDomain& gd, const LinearOptions& opt,
                     LinearStats* st = nullptr);

// h^2 (Δ_h v - c v) on the unknown cells, 0 elsewhere.
Field screened_residual(const Field& v, const Field& c, const Grid& g, const Mask& unknown);
// Δ_h v on the unknown cells, 0 elsewhere.
Field discrete_laplacian(const Field& v, const Grid& g, const Mask& unknown);

}  // namespace nlseg
