#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "nlseg/grid.hpp"
#include "nlseg/norm.hpp"

namespace nlseg {

enum class HForm { Integral, Sup };

// phi(rho) = C (1 - rho)^q, or the constant C when q == 0.
struct PhiParams {
  double C = 1.0;
  double q = 0.0;
};

struct BallStencil {
  HForm form = HForm::Integral;
  Norm norm;
  double h = 0;
  double p = 1.0;
  PhiParams phi;
  std::vector<std::pair<int, int>> offsets;  // rho(offset * h) < 1
  std::vector<double> weights;               // h^2 phi(rho) (integral) or 1 (sup)
  int rx = 0, ry = 0;                        // max |di|, |dj|

  double weight_sum() const;
};

// Throws ResolutionTooCoarse when the ball spans fewer than 64 cells.
BallStencil build_ball_stencil(const Norm& n, double h, HForm form, double p = 1.0, PhiParams phi = {});

// Reference evaluation by a double loop over cells and offsets. Cells beyond
// the box read 0; mirrored axes read the reflected cell. `where` restricts the
// cells evaluated (others are 0).
Field apply_H_direct(const Field& w, const Grid& g, const BallStencil& st, const Mask* where = nullptr);

// Reusable evaluator. Fast mode uses a cosine-transform convolution for the
// integral form and row-interval running maxima for the sup form; the sup
// path is bit-identical to the direct loop.
class HOperator {
 public:
  enum class Mode { Direct, Fast };
  HOperator(const Grid& g, const BallStencil& st, Mode mode = Mode::Fast);
  Field apply(const Field& w, const Mask* where = nullptr);
  Mode mode() const;
  const BallStencil& stencil() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

Field apply_H(const Field& w, const Grid& g, const BallStencil& st);

}  // namespace nlseg
