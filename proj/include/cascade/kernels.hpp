// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cascade/config.hpp"
#include "cascade/field.hpp"

namespace cascade {

/// Execution mode for the data-parallel kernels.  `serial` is the reference
/// path kept for testing and benchmarking; `parallel` uses OpenMP.  Both
/// produce bitwise-identical results: rows are written disjointly and
/// reductions combine fixed per-row partials in index order.
enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec e);

/// Scratch for batched tridiagonal solves (one lane per age row).
struct KernelWorkspace {
  std::vector<double> cprime;  // (n_a+1) * (n_x+1)
  std::vector<double> dwork;
  std::vector<double> stage;
  void resize(const GridSpec& g) {
    const std::size_t n = static_cast<std::size_t>(g.n_a + 1) * (g.n_x + 1);
    cprime.assign(n, 0.0);
    dwork.assign(n, 0.0);
    stage.assign(n, 0.0);
  }
};

/// Backward-Euler diffusion-reaction update for one equation across age rows
/// [row_begin, row_end]: solves (I + dt (mu - (k . )_x' )) out_i = rhs_i on the
/// interior x-nodes of every row i, with homogeneous Dirichlet columns.
/// `eq` selects (k1, mu1) or (k2, mu2); `mu3_scale`/`couple` add the cascade
/// source -dt*mu3*couple_i to the right-hand side before solving.
void implicit_rows(const Problem& pb, int eq, int time_index, const Field2D& rhs,
                   const Field2D* couple, double couple_scale, Field2D& out,
                   int row_begin, int row_end, Exec exec, KernelWorkspace& ws);

/// Single-row building blocks shared by the steppers and the
/// characteristic-line marches.  `eq` selects (k1, mu1) or (k2, mu2);
/// (time_index, age_row) locate the sampled coefficients.
///
/// Solves (I + h (mu - (k .)_x')) out = rhs on interior x-nodes (Thomas),
/// Dirichlet columns zero.  `cwork`/`dwork` are scratch of length n_x+1.
void implicit_row_general(const Problem& pb, int eq, int time_index, int age_row,
                          double h, const double* rhs, double* out,
                          double* cwork, double* dwork);

/// out = (k w_x)_x - mu w on interior nodes (flux form), zero at the columns.
void apply_diffusion_row(const Problem& pb, int eq, int time_index, int age_row,
                         const double* w, double* out);

/// Deterministic weighted reduction over age rows: sums f(i, j) * wa_i * wx_j
/// for rows [0, n_a] with per-row partials combined serially in row order.
double rowwise_weighted_sum(const Problem& pb,
                            const std::function<double(int, int)>& f,
                            Exec exec = default_exec());

/// Deterministic reduction over the whole (t, a, x) grid: per-(t,a) row
/// partials combined in index order.  `f(n, i, j)` must be pure.
double grid_weighted_sum(const Problem& pb,
                         const std::function<double(int, int, int)>& f,
                         Exec exec = default_exec());

/// L2 inner product of two control fields in the q-weighted metric
/// (quadrature weights in t, a, x; both fields assumed omega-supported).
double q_inner(const Problem& pb, const ControlField& a, const ControlField& b,
               Exec exec = default_exec());

}  // namespace cascade
