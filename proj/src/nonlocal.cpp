#include "nlseg/nonlocal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "nlseg/errors.hpp"
#include "nlseg/parallel.hpp"

namespace nlseg {

namespace {

int fft_size(int m) {
  for (int n = std::max(m, 1);; ++n) {
    int r = n;
    for (int f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return n;
  }
}

// w (or w^p) copied into a box padded by (rx, ry) on each side, applying the
// mirror and zero-beyond rules once.
struct Padded {
  int px = 0, py = 0, rx = 0, ry = 0;
  std::vector<double> v;
  double at(int i, int j) const { return v[static_cast<std::size_t>(j + ry) * px + (i + rx)]; }
  const double* row(int j) const { return v.data() + static_cast<std::size_t>(j + ry) * px; }
};

Padded pad_field(const Field& w, const Grid& g, int rx, int ry, double p) {
  Padded P;
  P.rx = rx;
  P.ry = ry;
  P.px = g.nx + 2 * rx;
  P.py = g.ny + 2 * ry;
  P.v.assign(static_cast<std::size_t>(P.px) * P.py, 0.0);
  parallel_for(P.py, [&](std::int64_t b0, std::int64_t b1) {
    for (int jj = static_cast<int>(b0); jj < b1; ++jj) {
      int j = g.fold_y(jj - ry);
      if (j < 0) continue;
      for (int ii = 0; ii < P.px; ++ii) {
        int i = g.fold_x(ii - rx);
        if (i < 0) continue;
        double x = w[g.idx(i, j)] + 0.0;  // drops negative zero
        P.v[static_cast<std::size_t>(jj) * P.px + ii] = (p == 1.0) ? x : std::pow(x, p);
      }
    }
  }, 4);
  return P;
}

void check_field(const Field& w, const Grid& g) {
  if (w.size() != g.size()) fail(ErrorCode::InvalidArgument, "field does not match grid");
}

Field direct_eval(const Padded& P, const Grid& g, const BallStencil& st, const Mask* where) {
  Field out(g.size(), 0.0);
  const auto& off = st.offsets;
  const auto& wt = st.weights;
  const bool sup = st.form == HForm::Sup;
  parallel_for(g.ny, [&](std::int64_t j0, std::int64_t j1) {
    for (int j = static_cast<int>(j0); j < j1; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t c = g.idx(i, j);
        if (where && !(*where)[c]) continue;
        if (sup) {
          double m = -std::numeric_limits<double>::infinity();
          for (const auto& o : off) m = std::max(m, P.at(i + o.first, j + o.second));
          out[c] = m;
        } else {
          double s = 0;
          for (std::size_t k = 0; k < off.size(); ++k) s += wt[k] * P.at(i + off[k].first, j + off[k].second);
          out[c] = s;
        }
      }
  }, 4);
  return out;
}

}  // namespace

double BallStencil::weight_sum() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

BallStencil build_ball_stencil(const Norm& n, double h, HForm form, double p, PhiParams phi) {
  if (!(h > 0)) fail(ErrorCode::InvalidArgument, "h must be positive");
  if (!(p >= 1.0)) fail(ErrorCode::InvalidArgument, "p must be >= 1");
  if (!(phi.C > 0) || !(phi.q >= 0)) fail(ErrorCode::InvalidArgument, "phi needs C > 0 and q >= 0");
  const double ex = ball_extent_x(n), ey = ball_extent_y(n);
  const double span = 2.0 * std::min(ex, ey) / h;
  if (span < 64.0 - 1e-9) {
    std::ostringstream os;
    os << "unit ball spans " << span << " cells; need at least 64";
    fail(ErrorCode::ResolutionTooCoarse, os.str());
  }
  BallStencil st;
  st.form = form;
  st.norm = n;
  st.h = h;
  st.p = p;
  st.phi = phi;
  const int Rx = static_cast<int>(std::ceil(ex / h)) + 1, Ry = static_cast<int>(std::ceil(ey / h)) + 1;
  for (int dj = -Ry; dj <= Ry; ++dj)
    for (int di = -Rx; di <= Rx; ++di) {
      double r = n(di * h, dj * h);
      if (!(r < 1.0)) continue;
      st.offsets.push_back({di, dj});
      double w = 1.0;
      if (form == HForm::Integral) w = h * h * phi.C * (phi.q == 0 ? 1.0 : std::pow(1.0 - r, phi.q));
      st.weights.push_back(w);
      st.rx = std::max(st.rx, std::abs(di));
      st.ry = std::max(st.ry, std::abs(dj));
    }
  return st;
}

Field apply_H_direct(const Field& w, const Grid& g, const BallStencil& st, const Mask* where) {
  check_field(w, g);
  Padded P = pad_field(w, g, st.rx, st.ry, st.form == HForm::Integral ? st.p : 1.0);
  return direct_eval(P, g, st, where);
}

struct HOperator::Impl {
  Grid g;
  BallStencil st;
  Mode mode = Mode::Direct;
  // sup: per row offset dj, the half-width of the row interval
  std::vector<int> half_width;
  // integral: cosine-transform convolution
  int mx = 0, my = 0, sx = 0, sy = 0;  // transform sizes and signal offsets
  double* buf = nullptr;
  double* spec = nullptr;
  fftw_plan fwd = nullptr, bwd = nullptr;

  ~Impl() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
    if (spec) fftw_free(spec);
  }

  bool setup_sup() {
    half_width.assign(2 * st.ry + 1, -1);
    std::vector<int> lo(2 * st.ry + 1, 0), cnt(2 * st.ry + 1, 0);
    for (auto [di, dj] : st.offsets) {
      int k = dj + st.ry;
      half_width[k] = std::max(half_width[k], std::abs(di));
      ++cnt[k];
    }
    // rows must be symmetric intervals for the decomposition to be exact
    for (int k = 0; k <= 2 * st.ry; ++k)
      if (half_width[k] >= 0 && cnt[k] != 2 * half_width[k] + 1) return false;
    return true;
  }

  bool setup_integral() {
    std::map<std::pair<int, int>, double> wmap;
    for (std::size_t k = 0; k < st.offsets.size(); ++k) wmap[st.offsets[k]] = st.weights[k];
    for (auto& [o, wv] : wmap) {
      auto it1 = wmap.find({-o.first, o.second});
      auto it2 = wmap.find({o.first, -o.second});
      if (it1 == wmap.end() || it2 == wmap.end() || it1->second != wv || it2->second != wv) return false;
    }
    sx = g.mirror_x ? 0 : st.rx;
    sy = g.mirror_y ? 0 : st.ry;
    mx = fft_size(g.nx + (g.mirror_x ? st.rx : 2 * st.rx));
    my = fft_size(g.ny + (g.mirror_y ? st.ry : 2 * st.ry));
    const std::size_t n = static_cast<std::size_t>(mx) * my;
    buf = fftw_alloc_real(n);
    const std::size_t nk = static_cast<std::size_t>(mx + 1) * (my + 1);
    double* ker = fftw_alloc_real(nk);
    std::fill(ker, ker + nk, 0.0);
    for (auto& [o, wv] : wmap)
      if (o.first >= 0 && o.second >= 0) ker[static_cast<std::size_t>(o.second) * (mx + 1) + o.first] = wv;
    fftw_plan kp = fftw_plan_r2r_2d(my + 1, mx + 1, ker, ker, FFTW_REDFT00, FFTW_REDFT00, FFTW_ESTIMATE);
    fftw_execute(kp);
    fftw_destroy_plan(kp);
    spec = fftw_alloc_real(n);
    const double norm = 1.0 / (4.0 * mx * my);
    for (int j = 0; j < my; ++j)
      for (int i = 0; i < mx; ++i)
        spec[static_cast<std::size_t>(j) * mx + i] = ker[static_cast<std::size_t>(j) * (mx + 1) + i] * norm;
    fftw_free(ker);
    fwd = fftw_plan_r2r_2d(my, mx, buf, buf, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
    bwd = fftw_plan_r2r_2d(my, mx, buf, buf, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
    return fwd && bwd;
  }

  Field sup_fast(const Field& w, const Mask* where) const {
    Padded P = pad_field(w, g, st.rx, st.ry, 1.0);
    const double ninf = -std::numeric_limits<double>::infinity();
    Field out(g.size(), ninf);
    std::vector<int> widths;
    for (int a : half_width)
      if (a >= 0 && std::find(widths.begin(), widths.end(), a) == widths.end()) widths.push_back(a);
    std::sort(widths.begin(), widths.end());
    std::vector<double> rm(static_cast<std::size_t>(g.nx) * P.py);
    for (int a : widths) {
      const int L = 2 * a + 1;
      // running maximum over windows [i - a, i + a] of each padded row
      parallel_for(P.py, [&](std::int64_t b0, std::int64_t b1) {
        std::vector<double> fw(P.px), bw(P.px);
        for (int jj = static_cast<int>(b0); jj < b1; ++jj) {
          const double* row = P.v.data() + static_cast<std::size_t>(jj) * P.px;
          for (int s = 0; s < P.px; ++s) fw[s] = (s % L == 0) ? row[s] : std::max(fw[s - 1], row[s]);
          for (int s = P.px - 1; s >= 0; --s)
            bw[s] = (s == P.px - 1 || (s + 1) % L == 0) ? row[s] : std::max(bw[s + 1], row[s]);
          double* dst = rm.data() + static_cast<std::size_t>(jj) * g.nx;
          for (int i = 0; i < g.nx; ++i) {
            int s0 = i + P.rx - a, s1 = i + P.rx + a;
            dst[i] = std::max(bw[s0], fw[s1]);
          }
        }
      }, 4);
      parallel_for(g.ny, [&](std::int64_t j0, std::int64_t j1) {
        for (int j = static_cast<int>(j0); j < j1; ++j)
          for (int k = 0; k <= 2 * st.ry; ++k) {
            if (half_width[k] != a) continue;
            const double* src = rm.data() + static_cast<std::size_t>(j + k) * g.nx;
            double* o = out.data() + static_cast<std::size_t>(j) * g.nx;
            for (int i = 0; i < g.nx; ++i) o[i] = std::max(o[i], src[i]);
          }
      }, 4);
    }
    if (where)
      for (std::size_t c = 0; c < out.size(); ++c)
        if (!(*where)[c]) out[c] = 0.0;
    return out;
  }

  Field integral_fast(const Field& w, const Mask* where) {
    const std::size_t n = static_cast<std::size_t>(mx) * my;
    std::fill(buf, buf + n, 0.0);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double x = w[g.idx(i, j)];
        buf[static_cast<std::size_t>(j + sy) * mx + i + sx] = (st.p == 1.0) ? x : std::pow(x, st.p);
      }
    fftw_execute(fwd);
    for (std::size_t k = 0; k < n; ++k) buf[k] *= spec[k];
    fftw_execute(bwd);
    Field out(g.size(), 0.0);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t c = g.idx(i, j);
        if (where && !(*where)[c]) continue;
        out[c] = std::max(0.0, buf[static_cast<std::size_t>(j + sy) * mx + i + sx]);
      }
    return out;
  }
};

HOperator::HOperator(const Grid& g, const BallStencil& st, Mode mode) : impl_(std::make_shared<Impl>()) {
  if (std::fabs(g.h - st.h) > 1e-12 * g.h) fail(ErrorCode::InvalidArgument, "stencil spacing differs from grid");
  impl_->g = g;
  impl_->st = st;
  impl_->mode = Mode::Direct;
  if (mode == Mode::Fast) {
    bool ok = st.form == HForm::Sup ? impl_->setup_sup() : impl_->setup_integral();
    if (ok) impl_->mode = Mode::Fast;
  }
}

HOperator::Mode HOperator::mode() const { return impl_->mode; }
const BallStencil& HOperator::stencil() const { return impl_->st; }

Field HOperator::apply(const Field& w, const Mask* where) {
  check_field(w, impl_->g);
  if (impl_->mode == Mode::Direct) return apply_H_direct(w, impl_->g, impl_->st, where);
  return impl_->st.form == HForm::Sup ? impl_->sup_fast(w, where) : impl_->integral_fast(w, where);
}

Field apply_H(const Field& w, const Grid& g, const BallStencil& st) {
  HOperator op(g, st);
  return op.apply(w);
}

}  // namespace nlseg
