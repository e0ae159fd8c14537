#pragma once

// Geometric multigrid for the periodic Poisson problem  L phi = -rho.
//
// Cell-centered V-cycles: red-black Gauss-Seidel smoothing, full-weighting
// (child-average) restriction, linear prolongation, rediscretized coarse
// operators down to 4 cells per dimension, where the coarse problem is solved by
// repeated smoothing. The periodic operator is singular; right-hand sides are
// projected to zero mean on every level and the returned potential has zero mean.
//
// For the 4th-order operator the V-cycle smooths the 4th-order stencil directly.
// If that stalls the solver switches to defect correction, using order-2
// V-cycles as the approximate inverse.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hopic/mesh.hpp"
#include "hopic/stencils.hpp"

namespace hopic {

struct MultigridConfig {
  double tolerance = 1e-9;  // relative max-norm residual target
  int max_vcycles = 100;
  int pre_smooth = 2;
  int post_smooth = 2;
  int coarse_sweeps = 50;
  int start_color = 0;  // which red-black color is swept first

  void validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("MultigridConfig: tolerance must be > 0");
    if (pre_smooth < 1 || post_smooth < 1) throw std::invalid_argument("MultigridConfig: smoothing counts must be >= 1");
    if (max_vcycles < 1) throw std::invalid_argument("MultigridConfig: max_vcycles must be >= 1");
    if (coarse_sweeps < 50) throw std::invalid_argument("MultigridConfig: coarse_sweeps must be >= 50");
    if (start_color != 0 && start_color != 1) throw std::invalid_argument("MultigridConfig: start_color must be 0 or 1");
  }
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(int cycles, double residual)
      : std::runtime_error("multigrid did not converge after " + std::to_string(cycles) +
                           " cycles (relative residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct SolveStats {
  int vcycles = 0;
  double residual = 0.0;  // achieved relative max-norm residual
  bool defect_correction = false;
};

namespace mg {

template <int D>
double residual(const ScalarField<D>& phi, const ScalarField<D>& rhs, int order, ScalarField<D>& out) {
  double m = 0.0;
  for (std::size_t c = 0; c < phi.size(); ++c) {
    out[c] = rhs[c] - detail::laplacian_at(phi, phi.mesh().multi_index(c), order);
    m = std::max(m, std::abs(out[c]));
  }
  return m;
}

template <int D>
double residual_norm(const ScalarField<D>& phi, const ScalarField<D>& rhs, int order) {
  ScalarField<D> r(phi.mesh());
  return residual(phi, rhs, order, r);
}

/// One red-black Gauss-Seidel sweep (both colors).
template <int D>
void smooth(ScalarField<D>& phi, const ScalarField<D>& rhs, int order, int start_color) {
  const auto& mesh = phi.mesh();
  const double diag = detail::laplacian_diagonal(mesh, order);
  for (int pass = 0; pass < 2; ++pass) {
    const int color = (start_color + pass) & 1;
    for (std::size_t c = 0; c < phi.size(); ++c) {
      const auto i = mesh.multi_index(c);
      int parity = 0;
      for (int d = 0; d < D; ++d) parity += i[d];
      if ((parity & 1) != color) continue;
      phi[c] += (rhs[c] - detail::laplacian_at(phi, i, order)) / diag;
    }
  }
}

template <int D>
ScalarField<D> restrict_field(const ScalarField<D>& fine) {
  const Mesh<D> coarse_mesh = fine.mesh().coarsened();
  ScalarField<D> coarse(coarse_mesh);
  const double w = 1.0 / (1 << D);
  for (std::size_t c = 0; c < fine.size(); ++c) {
    auto i = fine.mesh().multi_index(c);
    for (int d = 0; d < D; ++d) i[d] /= 2;
    coarse.at(i) += w * fine[c];
  }
  return coarse;
}

/// Adds the linear (cell-centered 3/4, 1/4 per dimension) interpolant of
/// `coarse` to `fine`.
template <int D>
void prolong_add(const ScalarField<D>& coarse, ScalarField<D>& fine) {
  const auto& cm = coarse.mesh();
  for (std::size_t c = 0; c < fine.size(); ++c) {
    const auto i = fine.mesh().multi_index(c);
    std::array<int, D> parent, other;
    for (int d = 0; d < D; ++d) {
      parent[d] = i[d] / 2;
      other[d] = cm.wrap(d, parent[d] + ((i[d] & 1) ? 1 : -1));
    }
    double v = 0.0;
    for (int corner = 0; corner < (1 << D); ++corner) {
      std::array<int, D> j;
      double w = 1.0;
      for (int d = 0; d < D; ++d) {
        const bool use_other = (corner >> d) & 1;
        j[d] = use_other ? other[d] : parent[d];
        w *= use_other ? 0.25 : 0.75;
      }
      v += w * coarse.at(j);
    }
    fine[c] += v;
  }
}

/// One V-cycle on L phi = rhs, updating phi in place.
template <int D>
void vcycle(ScalarField<D>& phi, const ScalarField<D>& rhs, int order, const MultigridConfig& cfg) {
  const auto& mesh = phi.mesh();
  if (!mesh.coarsenable()) {
    for (int s = 0; s < cfg.coarse_sweeps; ++s) smooth(phi, rhs, order, cfg.start_color);
    phi.subtract_mean();
    return;
  }
  for (int s = 0; s < cfg.pre_smooth; ++s) smooth(phi, rhs, order, cfg.start_color);
  ScalarField<D> r(mesh);
  residual(phi, rhs, order, r);
  ScalarField<D> rc = restrict_field(r);
  rc.subtract_mean();
  ScalarField<D> ec(rc.mesh());
  vcycle(ec, rc, order, cfg);
  prolong_add(ec, phi);
  for (int s = 0; s < cfg.post_smooth; ++s) smooth(phi, rhs, order, cfg.start_color);
}

}  // namespace mg

/// Solves L phi = -(rho - mean(rho)) in place, starting from the given phi.
template <int D>
SolveStats solve_poisson_into(const ScalarField<D>& rho, int order, const MultigridConfig& cfg, ScalarField<D>& phi) {
  check_order(order);
  cfg.validate();
  const auto& mesh = rho.mesh();
  if (!(phi.mesh() == mesh)) phi = ScalarField<D>(mesh);

  ScalarField<D> rhs(mesh);
  const double mean_rho = rho.mean();
  for (std::size_t c = 0; c < rhs.size(); ++c) rhs[c] = -(rho[c] - mean_rho);
  const double scale = rhs.max_abs();

  SolveStats stats;
  if (scale == 0.0) {
    phi = ScalarField<D>(mesh);
    return stats;
  }

  ScalarField<D> r(mesh);
  double res = mg::residual(phi, rhs, order, r) / scale;
  std::vector<double> history{res};
  while (res > cfg.tolerance) {
    if (stats.vcycles >= cfg.max_vcycles) throw ConvergenceError(stats.vcycles, res);
    if (!stats.defect_correction) {
      mg::vcycle(phi, rhs, order, cfg);
    } else {
      // r holds the current order-4 defect
      r.subtract_mean();
      ScalarField<D> e(mesh);
      mg::vcycle(e, r, 2, cfg);
      for (std::size_t c = 0; c < phi.size(); ++c) phi[c] += e[c];
    }
    ++stats.vcycles;
    res = mg::residual(phi, rhs, order, r) / scale;
    history.push_back(res);
    const std::size_t n = history.size();
    if (order == 4 && !stats.defect_correction && n > 5 && res / history[n - 6] > std::pow(0.9, 5))
      stats.defect_correction = true;
  }
  phi.subtract_mean();
  stats.residual = res;
  return stats;
}

template <int D>
ScalarField<D> solve_poisson(const ScalarField<D>& rho, int order, const MultigridConfig& cfg = {},
                             SolveStats* stats = nullptr) {
  ScalarField<D> phi(rho.mesh());
  const auto s = solve_poisson_into(rho, order, cfg, phi);
  if (stats) *stats = s;
  return phi;
}

}  // namespace hopic
