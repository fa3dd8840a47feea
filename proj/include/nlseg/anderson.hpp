#pragma once

#include <deque>
#include <vector>

namespace nlseg {

// Anderson mixing for x = T(x), fed with g = T(x) - x. Depth 0 reduces to
// damped iteration x + beta g.
class Anderson {
 public:
  Anderson(int depth, double beta);
  void step(std::vector<double>& x, const std::vector<double>& g);
  void reset();
  int depth() const { return m_; }
  int history() const { return static_cast<int>(dx_.size()); }

 private:
  int m_;
  double beta_;
  std::deque<std::vector<double>> dx_, dg_;
  std::vector<double> px_, pg_;
  bool has_prev_ = false;
};

}  // namespace nlseg
