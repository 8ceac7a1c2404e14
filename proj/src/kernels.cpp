// SPDX-License-Identifier: Apache-2.0
#include "cascade/kernels.hpp"

#include <atomic>
#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cascade {

namespace {
std::atomic<Exec> g_exec{Exec::parallel};
}

Exec default_exec() { return g_exec.load(); }
void set_default_exec(Exec e) { g_exec.store(e); }

void implicit_row_general(const Problem& pb, int eq, int time_index, int age_row,
                          double h, const double* rhs, double* out,
                          double* cwork, double* dwork) {
  const GridSpec& g = pb.grid();
  const int nx = g.n_x;
  const double inv_h2 = 1.0 / (g.dx() * g.dx());
  const RatesGrid& r = pb.rates();
  const std::vector<double>& mu = (eq == 1) ? r.mu1 : r.mu2;

  double prev_c = 0.0, prev_d = 0.0;
  for (int j = 1; j <= nx - 1; ++j) {
    const double kl = pb.k_face(eq, j - 1) * h * inv_h2;
    const double kr = pb.k_face(eq, j) * h * inv_h2;
    const double diag = 1.0 + h * mu[pb.idx(time_index, age_row, j)] + kl + kr;
    const double lower = -kl;
    const double denom = diag - lower * prev_c;
    if (!(std::abs(denom) > 0.0))
      throw Error("solver: tridiagonal breakdown at age row " + std::to_string(age_row));
    const double inv = 1.0 / denom;
    prev_c = -kr * inv;
    prev_d = (rhs[j] - lower * prev_d) * inv;
    cwork[j] = prev_c;
    dwork[j] = prev_d;
  }
  out[0] = 0.0;
  out[nx] = 0.0;
  double next = 0.0;
  for (int j = nx - 1; j >= 1; --j) {
    next = dwork[j] - cwork[j] * next;
    out[j] = next;
  }
}

void apply_diffusion_row(const Problem& pb, int eq, int time_index, int age_row,
                         const double* w, double* out) {
  const GridSpec& g = pb.grid();
  const int nx = g.n_x;
  const double inv_h2 = 1.0 / (g.dx() * g.dx());
  const RatesGrid& r = pb.rates();
  const std::vector<double>& mu = (eq == 1) ? r.mu1 : r.mu2;
  out[0] = 0.0;
  out[nx] = 0.0;
  for (int j = 1; j <= nx - 1; ++j) {
    const double kl = pb.k_face(eq, j - 1);
    const double kr = pb.k_face(eq, j);
    const double lap = (kr * (w[j + 1] - w[j]) - kl * (w[j] - w[j - 1])) * inv_h2;
    out[j] = lap - mu[pb.idx(time_index, age_row, j)] * w[j];
  }
}

void implicit_rows(const Problem& pb, int eq, int time_index, const Field2D& rhs,
                   const Field2D* couple, double couple_scale, Field2D& out,
                   int row_begin, int row_end, Exec exec, KernelWorkspace& ws) {
  const GridSpec& g = pb.grid();
  const int nxp = g.n_x + 1;
  const double dt = g.dt();
  const RatesGrid& r = pb.rates();
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (int i = row_begin; i <= row_end; ++i) {
    double* c = ws.cprime.data() + static_cast<std::size_t>(i) * nxp;
    double* d = ws.dwork.data() + static_cast<std::size_t>(i) * nxp;
    if (couple) {
      // fold the cascade source into a staged right-hand side
      double* stage = ws.stage.data() + static_cast<std::size_t>(i) * nxp;
      const double* rr = rhs.row(i);
      const double* cp = couple->row(i);
      for (int j = 0; j < nxp; ++j)
        stage[j] = rr[j] + couple_scale * dt * r.mu3[pb.idx(time_index, i, j)] * cp[j];
      implicit_row_general(pb, eq, time_index, i, dt, stage, out.row(i), c, d);
    } else {
      implicit_row_general(pb, eq, time_index, i, dt, rhs.row(i), out.row(i), c, d);
    }
  }
}

double rowwise_weighted_sum(const Problem& pb,
                            const std::function<double(int, int)>& f, Exec exec) {
  const GridSpec& g = pb.grid();
  std::vector<double> partial(g.n_a + 1, 0.0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (int i = 0; i <= g.n_a; ++i) {
    double s = 0.0;
    for (int j = 0; j <= g.n_x; ++j) s += pb.wx()[j] * f(i, j);
    partial[i] = pb.wa()[i] * s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double grid_weighted_sum(const Problem& pb,
                         const std::function<double(int, int, int)>& f, Exec exec) {
  const GridSpec& g = pb.grid();
  const int rows = (g.n_t + 1) * (g.n_a + 1);
  std::vector<double> partial(rows, 0.0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (int r = 0; r < rows; ++r) {
    const int n = r / (g.n_a + 1);
    const int i = r % (g.n_a + 1);
    double s = 0.0;
    for (int j = 0; j <= g.n_x; ++j) s += pb.wx()[j] * f(n, i, j);
    partial[r] = pb.wt()[n] * pb.wa()[i] * s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double q_inner(const Problem& pb, const ControlField& a, const ControlField& b,
               Exec exec) {
  const GridSpec& g = pb.grid();
  const int rows = (g.n_t + 1) * (g.n_a + 1);
  std::vector<double> partial(rows, 0.0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (int r = 0; r < rows; ++r) {
    const int n = r / (g.n_a + 1);
    const int i = r % (g.n_a + 1);
    double s = 0.0;
    for (int j = 0; j <= g.n_x; ++j) s += pb.wx()[j] * a.at(n, i, j) * b.at(n, i, j);
    partial[r] = pb.wt()[n] * pb.wa()[i] * s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace cascade
