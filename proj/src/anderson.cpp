#include "nlseg/anderson.hpp"

#include <Eigen/Dense>

#include "nlseg/errors.hpp"
#include "nlseg/parallel.hpp"

namespace nlseg {

Anderson::Anderson(int depth, double beta) : m_(depth), beta_(beta) {
  if (depth < 0) fail(ErrorCode::InvalidArgument, "anderson depth must be >= 0");
  if (!(beta > 0 && beta <= 1)) fail(ErrorCode::InvalidArgument, "anderson mixing must lie in (0, 1]");
}

void Anderson::reset() {
  dx_.clear();
  dg_.clear();
  has_prev_ = false;
}

void Anderson::step(std::vector<double>& x, const std::vector<double>& g) {
  const std::size_t n = x.size();
  if (g.size() != n) fail(ErrorCode::InvalidArgument, "anderson: size mismatch");
  if (m_ > 0) {
    if (has_prev_) {
      std::vector<double> a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = x[i] - px_[i];
        b[i] = g[i] - pg_[i];
      }
      dx_.push_back(std::move(a));
      dg_.push_back(std::move(b));
      if (static_cast<int>(dx_.size()) > m_) {
        dx_.pop_front();
        dg_.pop_front();
      }
    }
    px_ = x;
    pg_ = g;
    has_prev_ = true;
  }
  const int k = static_cast<int>(dg_.size());
  if (k == 0) {
    for (std::size_t i = 0; i < n; ++i) x[i] += beta_ * g[i];
    return;
  }
  // gamma = argmin |g - dG gamma| via regularised normal equations
  Eigen::MatrixXd M(k, k);
  Eigen::VectorXd rhs(k);
  for (int a = 0; a < k; ++a) {
    rhs[a] = det_dot(dg_[a].data(), g.data(), n);
    for (int b = 0; b <= a; ++b) M(a, b) = M(b, a) = det_dot(dg_[a].data(), dg_[b].data(), n);
  }
  double tr = M.trace();
  M.diagonal().array() += 1e-12 * (tr > 0 ? tr / k : 1.0);
  Eigen::VectorXd gamma = M.ldlt().solve(rhs);
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i] + beta_ * g[i];
    for (int a = 0; a < k; ++a) s -= gamma[a] * (dx_[a][i] + beta_ * dg_[a][i]);
    x[i] = s;
  }
}

}  // namespace nlseg
