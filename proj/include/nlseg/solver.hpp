#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "nlseg/domain.hpp"
#include "nlseg/linsolve.hpp"
#include "nlseg/nonlocal.hpp"

namespace nlseg {

struct InteractionSpec {
  HForm form = HForm::Integral;
  double p = 1.0;
  PhiParams phi;
};

// Everything fixed for one grid: domain, data, stencil, majorants and the
// reusable operators.
struct Problem {
  GridDomain gd;
  BoundaryData bd;
  InteractionSpec inter;
  BallStencil stencil;
  std::vector<Field> phi;           // harmonic majorants
  std::vector<std::size_t> cells;   // Omega cells in storage order
  double scale = 1;                 // max over i of max f_i
  std::shared_ptr<HOperator> hop;
  std::shared_ptr<ScreenedSolver> lin;

  int K() const { return bd.K; }
  const Grid& grid() const { return gd.grid; }
};

Problem make_problem(GridDomain gd, BoundaryData bd, const InteractionSpec& inter, const LinearOptions& lin,
                     HOperator::Mode hmode = HOperator::Mode::Fast);

struct SolverConfig {
  double damping = 0.5;     // mixing weight of the fixed-point update
  int anderson_depth = 4;   // 0: plain damped iteration
  double fp_tol = 1e-8;     // max_i |T(u)_i - u_i|_inf / max f
  int max_outer = 500;
  LinearOptions lin;
  std::vector<double> eps_schedule;
};

struct PopulationState {
  double epsilon = 0;
  Grid grid;
  std::vector<Field> u;
  std::vector<Field> phi;
  std::vector<Field> psi;    // obstacles; empty for the free system
  double residual = 0;       // last fixed-point residual
  double pde_residual = 0;   // max |h^2 (Δu - c u)| / max f on cells where the equation holds
  double obstacle_excess = 0;  // max (h^2 (Δu - c u))^+ / max f over Omega (obstacle runs)
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

// Coefficients c_i = eps^-2 sum_{j != i} H(u_j) on Omega cells.
std::vector<Field> interaction_coefficients(Problem& pb, const std::vector<Field>& u, double eps);

// One sweep of the fixed-point map: v_i solves Δv = c_i v with c_i built from
// the incoming iterate (Jacobi style), then u_i <- (1 - damping) u_i + damping v_i.
// The residual is max_i |v_i - u_i| / max f before blending.
PopulationState apply_T(Problem& pb, const PopulationState& s, double damping);

PopulationState initial_state(const Problem& pb, double eps);

// Solves the epsilon system. Returns the final iterate even when max_outer is
// hit; `converged` is false in that case. A warm start must live on pb's grid.
// With obstacles the update is projected onto u_i >= psi_i.
PopulationState solve_system(Problem& pb, const SolverConfig& cfg, double eps, const std::vector<Field>* warm = nullptr,
                             const std::vector<Field>* psi = nullptr);

// Warm-started sweep over cfg.eps_schedule. `make` builds the problem for one
// epsilon (the grid may change between stages); `on_stage` sees each result.
using ProblemFactory = std::function<Problem(double eps)>;
using StageCallback = std::function<void(int stage, Problem& pb, const PopulationState& s)>;
using ObstacleFactory = std::function<std::vector<Field>(const Problem& pb)>;
std::vector<PopulationState> run_continuation(const ProblemFactory& make, const SolverConfig& cfg,
                                              const StageCallback& on_stage = {}, bool keep_states = true,
                                              const ObstacleFactory& obstacles = {});

// Moves fields to another grid by bilinear resampling, then restores the
// frozen data and the bounds 0 <= u_i <= phi_i.
std::vector<Field> transfer_state(const std::vector<Field>& u, const Grid& from, const Problem& to);

}  // namespace nlseg
