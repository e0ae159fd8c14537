#pragma once

// Particle push: RK2 for the 2nd-order scheme and the 3-stage RK4 (Runge-Kutta
// for velocity-independent forces) for the 4th-order scheme. Every stage
// evaluates a force callback; for PIC runs that callback is PicForce, which runs
// deposit -> Poisson solve -> gradient -> interpolation.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hopic/kernels.hpp"
#include "hopic/mesh.hpp"
#include "hopic/multigrid.hpp"
#include "hopic/particles.hpp"
#include "hopic/stencils.hpp"

namespace hopic {

/// Order-locked scheme selection.
struct SchemeConfig {
  int order = 4;
  KernelId transfer_kernel = KernelId::W4;
  KernelId remap_kernel = KernelId::W6;
  int laplacian_order = 4;
  int gradient_order = 4;
  double dt = 1.0 / 32.0;
  double t_final = 0.0;

  static SchemeConfig for_order(int order, double dt, double t_final) {
    check_order(order);
    SchemeConfig c;
    c.order = order;
    c.transfer_kernel = order == 2 ? KernelId::W2 : KernelId::W4;
    c.remap_kernel = order == 2 ? KernelId::W3 : KernelId::W6;
    c.laplacian_order = order;
    c.gradient_order = order;
    c.dt = dt;
    c.t_final = t_final;
    c.validate();
    return c;
  }

  void validate() const {
    check_order(order);
    const bool second = order == 2;
    if (transfer_kernel != (second ? KernelId::W2 : KernelId::W4) ||
        remap_kernel != (second ? KernelId::W3 : KernelId::W6) || laplacian_order != order ||
        gradient_order != order)
      throw std::invalid_argument("SchemeConfig: kernels and stencils must match order " + std::to_string(order));
    if (!(dt > 0.0)) throw std::invalid_argument("SchemeConfig: dt must be > 0");
    if (!(t_final >= 0.0)) throw std::invalid_argument("SchemeConfig: t_final must be >= 0");
  }
};

/// Field pipeline at arbitrary trial positions. Keeps the previous potential
/// as the multigrid initial guess.
template <int D>
class PicForce {
 public:
  PicForce(Mesh<D> mesh, const SchemeConfig& scheme, MultigridConfig mg = {})
      : mesh_(mesh), scheme_(scheme), mg_(mg), deposited_(mesh), phi_(mesh), field_(mesh) {
    scheme_.validate();
    mg_.validate();
  }

  void operator()(std::span<const Vec<D>> x, std::span<const double> q, std::span<Vec<D>> accel) {
    deposit_charge<D>(x, q, scheme_.transfer_kernel, deposited_);
    const ScalarField<D> rho = charge_density_rhs(deposited_);
    stats_ = solve_poisson_into(rho, scheme_.laplacian_order, mg_, phi_);
    field_ = gradient_to_efield(phi_, scheme_.gradient_order);
    interpolate_field<D>(field_, x, scheme_.transfer_kernel, accel);
    ++evaluations_;
    if (capture_) {
      captured_ = field_;
      capture_ = false;
    }
  }

  /// The next evaluation's grid field is copied into captured().
  void capture_next() { capture_ = true; }
  const VectorField<D>& captured() const { return captured_; }

  const Mesh<D>& mesh() const { return mesh_; }
  const VectorField<D>& field() const { return field_; }
  const ScalarField<D>& potential() const { return phi_; }
  const SolveStats& last_solve() const { return stats_; }
  std::uint64_t evaluations() const { return evaluations_; }

 private:
  Mesh<D> mesh_;
  SchemeConfig scheme_;
  MultigridConfig mg_;
  ScalarField<D> deposited_;
  ScalarField<D> phi_;
  VectorField<D> field_;
  VectorField<D> captured_;
  SolveStats stats_;
  std::uint64_t evaluations_ = 0;
  bool capture_ = false;
};

/// Convenience: accelerations at trial positions using the charges of `ps`.
template <int D>
std::vector<Vec<D>> accel_at(std::span<const Vec<D>> positions, const ParticleSet<D>& ps, PicForce<D>& force) {
  if (positions.size() != ps.size()) throw std::invalid_argument("accel_at: position count differs from particle count");
  std::vector<Vec<D>> x(positions.begin(), positions.end());
  for (auto& p : x)
    for (int d = 0; d < D; ++d) p[d] = wrap_periodic(p[d], ps.length[d]);
  const auto q = ps.charges();
  std::vector<Vec<D>> a(x.size());
  force(std::span<const Vec<D>>(x), std::span<const double>(q), std::span<Vec<D>>(a));
  return a;
}

template <int D>
struct StepWorkspace {
  std::vector<double> q;
  std::vector<Vec<D>> trial, accel, xacc, vacc;

  void resize(std::size_t n) {
    q.resize(n);
    trial.resize(n);
    accel.resize(n);
    xacc.resize(n);
    vacc.resize(n);
  }
  void release() { *this = StepWorkspace{}; }
};

namespace detail {

template <int D>
void load_stage(const ParticleSet<D>& ps, StepWorkspace<D>& ws) {
  ws.resize(ps.size());
  for (std::size_t p = 0; p < ps.size(); ++p) {
    ws.q[p] = ps.particles[p].q;
    ws.trial[p] = ps.particles[p].x;
  }
}

template <int D, class Force>
void eval_stage(Force& force, StepWorkspace<D>& ws) {
  force(std::span<const Vec<D>>(ws.trial), std::span<const double>(ws.q), std::span<Vec<D>>(ws.accel));
}

}  // namespace detail

/// x' = x + v dt + a1 dt^2 / 2,  v' = v + (a1 + a2) dt / 2,
/// a1 = a(x), a2 = a(x + v dt).
template <int D, class Force>
void step_rk2(ParticleSet<D>& ps, double dt, Force&& force, StepWorkspace<D>& ws) {
  const std::size_t n = ps.size();
  detail::load_stage(ps, ws);
  detail::eval_stage<D>(force, ws);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& pt = ps.particles[p];
    ws.vacc[p] = ws.accel[p];
    for (int d = 0; d < D; ++d) ws.trial[p][d] = wrap_periodic(pt.x[d] + pt.v[d] * dt, ps.length[d]);
  }
  detail::eval_stage<D>(force, ws);
  for (std::size_t p = 0; p < n; ++p) {
    auto& pt = ps.particles[p];
    for (int d = 0; d < D; ++d) {
      pt.x[d] = wrap_periodic(pt.x[d] + pt.v[d] * dt + 0.5 * ws.vacc[p][d] * dt * dt, ps.length[d]);
      pt.v[d] += 0.5 * (ws.vacc[p][d] + ws.accel[p][d]) * dt;
    }
  }
}

/// Three-stage RK4 for velocity-independent accelerations:
///   a1 = a(x), a2 = a(x + v dt/2 + a1 dt^2/8), a3 = a(x + v dt + a2 dt^2/2)
///   x' = x + v dt + (a1 + 2 a2) dt^2 / 6,  v' = v + (a1 + 4 a2 + a3) dt / 6
template <int D, class Force>
void step_rk4(ParticleSet<D>& ps, double dt, Force&& force, StepWorkspace<D>& ws) {
  const std::size_t n = ps.size();
  const double dt2 = dt * dt;
  detail::load_stage(ps, ws);
  detail::eval_stage<D>(force, ws);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& pt = ps.particles[p];
    const auto& a1 = ws.accel[p];
    ws.xacc[p] = a1;
    ws.vacc[p] = a1;
    for (int d = 0; d < D; ++d)
      ws.trial[p][d] = wrap_periodic(pt.x[d] + 0.5 * pt.v[d] * dt + 0.125 * a1[d] * dt2, ps.length[d]);
  }
  detail::eval_stage<D>(force, ws);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& pt = ps.particles[p];
    const auto& a2 = ws.accel[p];
    for (int d = 0; d < D; ++d) {
      ws.xacc[p][d] += 2.0 * a2[d];
      ws.vacc[p][d] += 4.0 * a2[d];
      ws.trial[p][d] = wrap_periodic(pt.x[d] + pt.v[d] * dt + 0.5 * a2[d] * dt2, ps.length[d]);
    }
  }
  detail::eval_stage<D>(force, ws);
  for (std::size_t p = 0; p < n; ++p) {
    auto& pt = ps.particles[p];
    for (int d = 0; d < D; ++d) {
      pt.x[d] = wrap_periodic(pt.x[d] + pt.v[d] * dt + ws.xacc[p][d] * dt2 / 6.0, ps.length[d]);
      pt.v[d] += (ws.vacc[p][d] + ws.accel[p][d]) * dt / 6.0;
    }
  }
}

template <int D, class Force>
void step(int order, ParticleSet<D>& ps, double dt, Force&& force, StepWorkspace<D>& ws) {
  check_order(order);
  if (order == 2) step_rk2(ps, dt, force, ws);
  else step_rk4(ps, dt, force, ws);
}

}  // namespace hopic
