#include "nlseg/linsolve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlseg/errors.hpp"
#include "nlseg/parallel.hpp"

namespace nlseg {

namespace {

using Pairs = std::vector<std::vector<std::pair<int, double>>>;

struct Transfer {
  Pairs f2c;  // fine index -> (coarse index, weight)
  Pairs c2f;
};

Transfer make_transfer(int nf, int nc, bool mirror) {
  Transfer t;
  t.f2c.resize(nf);
  t.c2f.resize(nc);
  for (int i = 0; i < nf; ++i) {
    int I = i / 2;
    int J = (i % 2 == 0) ? I - 1 : I + 1;
    auto add = [&](int k, double w) {
      if (k < 0) {
        if (!mirror) return;
        k = -k - 1;
      }
      if (k >= nc) return;
      for (auto& pr : t.f2c[i])
        if (pr.first == k) {
          pr.second += w;
          return;
        }
      t.f2c[i].push_back({k, w});
    };
    add(I, 0.75);
    add(J, 0.25);
  }
  for (int i = 0; i < nf; ++i)
    for (auto [k, w] : t.f2c[i]) t.c2f[k].push_back({i, w});
  return t;
}

struct Level {
  int nx = 0, ny = 0;
  bool mx = false, my = false;
  Mask act;
  std::vector<double> nb0;  // neighbour directions that are not the mirror image of the cell itself
  Field diag, chat, x, b, r;
  Transfer tx, ty;  // towards the next coarser level
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t id(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
};

inline double nbsum(const Level& L, const double* x, int i, int j) {
  const std::size_t p = L.id(i, j);
  double s = 0;
  if (i > 0) s += x[p - 1];
  if (i + 1 < L.nx) s += x[p + 1];
  if (j > 0) s += x[p - L.nx];
  if (j + 1 < L.ny) s += x[p + L.nx];
  return s;
}

void apply_op(const Level& L, const double* x, double* y) {
  parallel_for(L.ny, [&](std::int64_t j0, std::int64_t j1) {
    for (int j = static_cast<int>(j0); j < j1; ++j)
      for (int i = 0; i < L.nx; ++i) {
        std::size_t p = L.id(i, j);
        y[p] = L.act[p] ? L.diag[p] * x[p] - nbsum(L, x, i, j) : 0.0;
      }
  }, 8);
}

void gs_color(Level& L, int color) {
  double* x = L.x.data();
  parallel_for(L.ny, [&](std::int64_t j0, std::int64_t j1) {
    for (int j = static_cast<int>(j0); j < j1; ++j)
      for (int i = (j + color) & 1; i < L.nx; i += 2) {
        std::size_t p = L.id(i, j);
        if (!L.act[p]) continue;
        x[p] = (L.b[p] + nbsum(L, x, i, j)) / L.diag[p];
      }
  }, 8);
}

}  // namespace

struct ScreenedSolver::Impl {
  Grid g;
  Mask unknown;
  LinearOptions opt;
  std::vector<Level> levels;
  // coarsest dense factor
  std::vector<std::size_t> coarse_ids;
  Eigen::LLT<Eigen::MatrixXd> llt;

  void build_hierarchy() {
    Level L0;
    L0.nx = g.nx;
    L0.ny = g.ny;
    L0.mx = g.mirror_x;
    L0.my = g.mirror_y;
    L0.act = unknown;
    levels.push_back(std::move(L0));
    while (true) {
      Level& F = levels.back();
      std::size_t nact = count(F.act);
      if (nact <= 500 || F.nx <= 2 || F.ny <= 2) break;
      Level C;
      C.nx = (F.nx + 1) / 2;
      C.ny = (F.ny + 1) / 2;
      C.mx = F.mx;
      C.my = F.my;
      C.act.assign(C.size(), 0);
      for (int j = 0; j < F.ny; ++j)
        for (int i = 0; i < F.nx; ++i)
          if (F.act[F.id(i, j)]) C.act[C.id(i / 2, j / 2)] = 1;
      F.tx = make_transfer(F.nx, C.nx, F.mx);
      F.ty = make_transfer(F.ny, C.ny, F.my);
      levels.push_back(std::move(C));
    }
    for (auto& L : levels) {
      L.nb0.assign(L.size(), 0.0);
      for (int j = 0; j < L.ny; ++j)
        for (int i = 0; i < L.nx; ++i)
          L.nb0[L.id(i, j)] = 4.0 - ((i == 0 && L.mx) ? 1 : 0) - ((j == 0 && L.my) ? 1 : 0);
      L.diag.assign(L.size(), 0.0);
      L.chat.assign(L.size(), 0.0);
      L.x.assign(L.size(), 0.0);
      L.b.assign(L.size(), 0.0);
      L.r.assign(L.size(), 0.0);
    }
  }

  void set_coefficients(const Field& c) {
    Level& L0 = levels[0];
    const double h2 = g.h * g.h;
    for (std::size_t p = 0; p < L0.size(); ++p) {
      L0.chat[p] = L0.act[p] ? c[p] * h2 : 0.0;
      L0.diag[p] = L0.act[p] ? L0.nb0[p] + L0.chat[p] : 1.0;
    }
    for (std::size_t l = 1; l < levels.size(); ++l) {
      Level& F = levels[l - 1];
      Level& C = levels[l];
      std::vector<double> sum(C.size(), 0.0), cnt(C.size(), 0.0);
      for (int j = 0; j < F.ny; ++j)
        for (int i = 0; i < F.nx; ++i) {
          std::size_t p = F.id(i, j);
          if (!F.act[p]) continue;
          std::size_t q = C.id(i / 2, j / 2);
          sum[q] += F.chat[p];
          cnt[q] += 1;
        }
      for (std::size_t q = 0; q < C.size(); ++q) {
        C.chat[q] = C.act[q] ? 4.0 * sum[q] / cnt[q] : 0.0;
        C.diag[q] = C.act[q] ? C.nb0[q] + C.chat[q] : 1.0;
      }
    }
    if (opt.method == LinearMethod::Multigrid) factor_coarsest();
  }

  void factor_coarsest() {
    Level& C = levels.back();
    coarse_ids.clear();
    std::vector<int> pos(C.size(), -1);
    for (std::size_t p = 0; p < C.size(); ++p)
      if (C.act[p]) {
        pos[p] = static_cast<int>(coarse_ids.size());
        coarse_ids.push_back(p);
      }
    const int n = static_cast<int>(coarse_ids.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      std::size_t p = coarse_ids[k];
      int i = static_cast<int>(p % C.nx), j = static_cast<int>(p / C.nx);
      A(k, k) = C.diag[p];
      auto link = [&](int a, int b) {
        if (a < 0 || b < 0 || a >= C.nx || b >= C.ny) return;
        int q = pos[C.id(a, b)];
        if (q >= 0) A(k, q) -= 1.0;
      };
      link(i - 1, j);
      link(i + 1, j);
      link(i, j - 1);
      link(i, j + 1);
    }
    llt.compute(A);
  }

  void restrict_to(const Level& F, Level& C) {
    const Field& r = F.r;
    parallel_for(C.ny, [&](std::int64_t J0, std::int64_t J1) {
      for (int J = static_cast<int>(J0); J < J1; ++J)
        for (int I = 0; I < C.nx; ++I) {
          std::size_t q = C.id(I, J);
          if (!C.act[q]) {
            C.b[q] = 0;
            continue;
          }
          double s = 0;
          for (auto [j, wj] : F.ty.c2f[J])
            for (auto [i, wi] : F.tx.c2f[I]) s += wi * wj * r[F.id(i, j)];
          C.b[q] = s;
        }
    }, 8);
  }

  void prolong_add(Level& F, const Level& C) {
    parallel_for(F.ny, [&](std::int64_t j0, std::int64_t j1) {
      for (int j = static_cast<int>(j0); j < j1; ++j)
        for (int i = 0; i < F.nx; ++i) {
          std::size_t p = F.id(i, j);
          if (!F.act[p]) continue;
          double s = 0;
          for (auto [J, wj] : F.ty.f2c[j])
            for (auto [I, wi] : F.tx.f2c[i]) s += wi * wj * C.x[C.id(I, J)];
          F.x[p] += s;
        }
    }, 8);
  }

  void vcycle(std::size_t l) {
    Level& L = levels[l];
    if (l + 1 == levels.size()) {
      Eigen::VectorXd rhs(coarse_ids.size());
      for (std::size_t k = 0; k < coarse_ids.size(); ++k) rhs[k] = L.b[coarse_ids[k]];
      Eigen::VectorXd sol = llt.solve(rhs);
      std::fill(L.x.begin(), L.x.end(), 0.0);
      for (std::size_t k = 0; k < coarse_ids.size(); ++k) L.x[coarse_ids[k]] = sol[k];
      return;
    }
    std::fill(L.x.begin(), L.x.end(), 0.0);
    for (int s = 0; s < 2; ++s) {
      gs_color(L, 0);
      gs_color(L, 1);
    }
    apply_op(L, L.x.data(), L.r.data());
    for (std::size_t p = 0; p < L.size(); ++p) L.r[p] = L.act[p] ? L.b[p] - L.r[p] : 0.0;
    Level& C = levels[l + 1];
    restrict_to(L, C);
    vcycle(l + 1);
    prolong_add(L, C);
    for (int s = 0; s < 2; ++s) {
      gs_color(L, 1);
      gs_color(L, 0);
    }
  }

  void precondition(const Field& r, Field& z) {
    Level& L0 = levels[0];
    if (opt.method == LinearMethod::Jacobi) {
      for (std::size_t p = 0; p < r.size(); ++p) z[p] = L0.act[p] ? r[p] / L0.diag[p] : 0.0;
      return;
    }
    L0.b = r;
    vcycle(0);
    z = L0.x;
  }
};

ScreenedSolver::ScreenedSolver(const Grid& g, const Mask& unknown, LinearOptions opt) : impl_(std::make_shared<Impl>()) {
  if (unknown.size() != g.size()) fail(ErrorCode::InvalidArgument, "mask does not match grid");
  impl_->g = g;
  impl_->unknown = unknown;
  impl_->opt = opt;
  impl_->build_hierarchy();
}

const Grid& ScreenedSolver::grid() const { return impl_->g; }
const Mask& ScreenedSolver::unknown() const { return impl_->unknown; }
const LinearOptions& ScreenedSolver::options() const { return impl_->opt; }

Field ScreenedSolver::solve(const Field& c, const Field& bdry, const Field* guess, LinearStats* st) {
  Impl& S = *impl_;
  const Grid& g = S.g;
  const std::size_t N = g.size();
  if (c.size() != N || bdry.size() != N) fail(ErrorCode::InvalidArgument, "field size does not match grid");
  for (std::size_t p = 0; p < N; ++p)
    if (S.unknown[p] && !(c[p] >= 0)) {
      std::ostringstream os;
      os << "c = " << c[p] << " at cell " << p;
      fail(ErrorCode::NegativeCoefficient, os.str());
    }
  S.set_coefficients(c);
  const Level& L0 = S.levels[0];

  double scale = 0;
  for (std::size_t p = 0; p < N; ++p)
    if (!S.unknown[p]) scale = std::max(scale, std::fabs(bdry[p]));
  Field out(N);
  for (std::size_t p = 0; p < N; ++p) out[p] = S.unknown[p] ? 0.0 : bdry[p];
  if (scale == 0) {
    if (st) *st = {0, 0};
    return out;
  }

  // right-hand side from Dirichlet neighbours
  Field b(N, 0.0);
  parallel_for(g.ny, [&](std::int64_t j0, std::int64_t j1) {
    for (int j = static_cast<int>(j0); j < j1; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t p = g.idx(i, j);
        if (!S.unknown[p]) continue;
        double s = 0;
        auto add = [&](int a, int bb) {
          if (a < 0 || bb < 0 || a >= g.nx || bb >= g.ny) return;
          std::size_t q = g.idx(a, bb);
          if (!S.unknown[q]) s += bdry[q];
        };
        add(i - 1, j);
        add(i + 1, j);
        add(i, j - 1);
        add(i, j + 1);
        b[p] = s;
      }
  }, 8);

  Field x(N, 0.0);
  if (guess)
    for (std::size_t p = 0; p < N; ++p) x[p] = S.unknown[p] ? (*guess)[p] : 0.0;

  const int maxit = S.opt.max_iter > 0 ? S.opt.max_iter : (S.opt.method == LinearMethod::Multigrid ? 400 : 100000);
  Field r(N), z(N), pv(N), q(N);
  auto residual = [&]() {
    apply_op(L0, x.data(), q.data());
    for (std::size_t p = 0; p < N; ++p) r[p] = S.unknown[p] ? b[p] - q[p] : 0.0;
    return max_abs(r.data(), N) / scale;
  };
  double res = residual();
  int it = 0;
  bool done = res <= S.opt.tol;
  while (!done && it < maxit) {
    S.precondition(r, z);
    pv = z;
    double rz = det_dot(r.data(), z.data(), N);
    while (it < maxit) {
      ++it;
      apply_op(L0, pv.data(), q.data());
      double pq = det_dot(pv.data(), q.data(), N);
      if (!(pq > 0) || !std::isfinite(pq)) break;
      double alpha = rz / pq;
      for (std::size_t p = 0; p < N; ++p) {
        x[p] += alpha * pv[p];
        r[p] -= alpha * q[p];
      }
      res = max_abs(r.data(), N) / scale;
      if (!std::isfinite(res)) fail(ErrorCode::SolverDiverged, "non-finite residual");
      if (res <= S.opt.tol) break;
      S.precondition(r, z);
      double rz2 = det_dot(r.data(), z.data(), N);
      double beta = rz2 / rz;
      rz = rz2;
      for (std::size_t p = 0; p < N; ++p) pv[p] = z[p] + beta * pv[p];
    }
    res = residual();
    done = res <= S.opt.tol;
    if (!done && res <= S.opt.tol * 4 && it >= maxit) break;
  }
  if (!done) {
    std::ostringstream os;
    os << "residual " << res << " > tol " << S.opt.tol << " after " << it << " iterations";
    fail(ErrorCode::SolverDiverged, os.str());
  }
  for (std::size_t p = 0; p < N; ++p)
    if (S.unknown[p]) out[p] = x[p];
  if (st) *st = {it, res};
  return out;
}

Field solve_screened(const Field& c, const Field& bdry, const GridDomain& gd, const LinearOptions& opt,
                     LinearStats* st) {
  ScreenedSolver s(gd.grid, gd.omega, opt);
  return s.solve(c, bdry, nullptr, st);
}

Field screened_residual(const Field& v, const Field& c, const Grid& g, const Mask& unknown) {
  Field out(g.size(), 0.0);
  const double h2 = g.h * g.h;
  Field lap = discrete_laplacian(v, g, unknown);
  for (std::size_t p = 0; p < out.size(); ++p)
    if (unknown[p]) out[p] = h2 * lap[p] - h2 * c[p] * v[p];
  return out;
}

Field discrete_laplacian(const Field& v, const Grid& g, const Mask& unknown) {
  Field out(g.size(), 0.0);
  const double ih2 = 1.0 / (g.h * g.h);
  parallel_for(g.ny, [&](std::int64_t j0, std::int64_t j1) {
    for (int j = static_cast<int>(j0); j < j1; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t p = g.idx(i, j);
        if (!unknown[p]) continue;
        double s = 0;
        auto add = [&](int a, int b) {
          int fa = g.fold_x(a), fb = g.fold_y(b);
          double vq = (fa < 0 || fb < 0) ? 0.0 : v[g.idx(fa, fb)];
          s += vq - v[p];
        };
        add(i - 1, j);
        add(i + 1, j);
        add(i, j - 1);
        add(i, j + 1);
        out[p] = s * ih2;
      }
  }, 8);
  return out;
}

}  // namespace nlseg
