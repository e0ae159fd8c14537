#pragma once

// Run orchestration: initialize particles from a benchmark problem, advance
// with the order-matched scheme, remap on a fixed step interval and collect
// diagnostics. Also the resolution-ladder driver for Richardson studies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hopic/diagnostics.hpp"
#include "hopic/integrator.hpp"
#include "hopic/multigrid.hpp"
#include "hopic/particles.hpp"
#include "hopic/problems.hpp"
#include "hopic/remap.hpp"

namespace hopic {

struct SimulationConfig {
  ProblemSpec problem;
  int order = 4;
  Resolution resolution;
  double t_final = 20.0;
  int remap_interval = 5;
  double threshold = 1e-16;
  bool positivity = true;
  int max_redistribution_iters = 5;
  std::size_t remap_chunk_cells = std::size_t{1} << 27;
  MultigridConfig multigrid;
  AmplitudeNorm norm = AmplitudeNorm::Max;
  std::vector<double> snapshot_times;      // particle snapshots / phase-space images
  std::vector<double> field_sample_times;  // grid E fields kept in the result

  static SimulationConfig from_paper(ProblemId id, int order) {
    const auto pc = paper_config(id);
    SimulationConfig c;
    c.problem = pc.problem;
    c.order = order;
    c.resolution = pc.resolution;
    c.t_final = pc.t_final;
    c.remap_interval = pc.remap_interval;
    c.threshold = pc.threshold;
    c.positivity = pc.positivity;
    return c;
  }

  long long n_steps() const { return std::llround(std::ceil(t_final / resolution.dt - 1e-9)); }

  void validate() const {
    check_order(order);
    const auto& r = resolution;
    if (r.n_cells < 4 || (r.n_cells & (r.n_cells - 1)) != 0)
      throw std::invalid_argument("n_cells must be a power of two >= 4, got " + std::to_string(r.n_cells));
    if (r.n_x < 1) throw std::invalid_argument("nx must be >= 1");
    if (r.n_v < 1) throw std::invalid_argument("nv must be >= 1");
    if (!(r.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(t_final >= 0.0)) throw std::invalid_argument("t_final must be >= 0");
    if (remap_interval < 0) throw std::invalid_argument("remap_interval must be >= 0");
    if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
    if (!(problem.v_max > 0.0)) throw std::invalid_argument("v_max must be > 0");
    if (!(problem.k[0] > 0.0) || !(problem.k[1] > 0.0)) throw std::invalid_argument("k must be > 0");
    if (positivity && max_redistribution_iters < 1) throw std::invalid_argument("max_redistribution_iters must be >= 1");
    multigrid.validate();
    for (double t : field_sample_times) {
      const double steps = t / r.dt;
      if (t < 0.0 || t > t_final + 1e-12 || std::abs(steps - std::round(steps)) > 1e-9)
        throw std::invalid_argument("field sample time " + std::to_string(t) + " is not a step time");
    }
  }
};

struct ProgressRecord {
  long long step = 0;
  double time = 0.0;
  double max_e = 0.0;
  std::size_t particles = 0;
  double residual = 0.0;
  int vcycles = 0;
};

inline std::ostream& operator<<(std::ostream& os, const ProgressRecord& r) {
  return os << "step=" << r.step << " time=" << r.time << " max|E|=" << r.max_e << " particles=" << r.particles
            << " residual=" << r.residual << " vcycles=" << r.vcycles;
}

template <int D>
struct SimulationState {
  ParticleSet<D> particles;
  double time = 0.0;
  long long step_index = 0;
  Mesh<D> mesh;
};

template <int D>
struct RunObserver {
  std::function<void(const ProgressRecord&)> on_progress;
  std::function<void(double, const ParticleSet<D>&)> on_snapshot;
  std::function<void(long long, const RemapReport&)> on_remap;
};

template <int D>
struct RunResult {
  AmplitudeSeries series;
  std::vector<std::pair<double, VectorField<D>>> fields;  // at field_sample_times
  SimulationState<D> final_state;
  std::uint64_t pipeline_evaluations = 0;
  int remaps = 0;
  RemapReport remap_totals;  // charges summed over all remaps
  double initial_charge = 0.0;
};

namespace detail {

inline bool matches_step(const std::vector<double>& times, double t, double dt) {
  for (double s : times)
    if (std::abs(s - t) < 0.5 * dt * (1.0 - 1e-9)) return true;
  return false;
}

}  // namespace detail

template <int D>
RunResult<D> run(const SimulationConfig& cfg, const RunObserver<D>& obs = {}) {
  cfg.validate();
  if (cfg.problem.dims() != D) throw std::invalid_argument("run: problem dimension does not match");
  const auto& res = cfg.resolution;
  const auto lengths = cfg.problem.template lengths<D>();
  const double dt = res.dt;
  const auto scheme = SchemeConfig::for_order(cfg.order, dt, cfg.t_final);

  SimulationState<D> state;
  {
    std::array<int, D> n;
    n.fill(res.n_cells);
    state.mesh = Mesh<D>(n, lengths);
  }

  RemapConfig<D> remap_cfg;
  remap_cfg.interval = cfg.remap_interval;
  remap_cfg.spec = PhaseSpaceGridSpec<D>{lengths, res.n_x, res.n_v, cfg.problem.v_max, cfg.threshold};
  remap_cfg.kernel = scheme.remap_kernel;
  remap_cfg.positivity = cfg.positivity;
  remap_cfg.max_redistribution_iters = cfg.max_redistribution_iters;
  remap_cfg.max_chunk_cells = cfg.remap_chunk_cells;
  remap_cfg.validate();

  const auto problem = cfg.problem;
  state.particles = initialize_particles<D>(
      [&](const Vec<D>& x, const Vec<D>& v) { return eval_initial_f<D>(problem, x, v); }, remap_cfg.spec);

  RunResult<D> result;
  result.initial_charge = state.particles.total_charge();
  PicForce<D> force(state.mesh, scheme, cfg.multigrid);
  StepWorkspace<D> ws;

  auto record = [&](long long n, const VectorField<D>& e) {
    const double t = n * dt;
    result.series.push(t, field_amplitude(e, cfg.norm));
    if (detail::matches_step(cfg.field_sample_times, t, dt)) result.fields.emplace_back(t, e);
    if (obs.on_progress) {
      ProgressRecord r{n, t, e.max_abs(), state.particles.size(), force.last_solve().residual,
                       force.last_solve().vcycles};
      obs.on_progress(r);
    }
  };

  const long long steps = cfg.n_steps();
  for (long long n = 0; n < steps; ++n) {
    state.step_index = n;
    state.time = n * dt;
    if (obs.on_snapshot && detail::matches_step(cfg.snapshot_times, state.time, dt)) obs.on_snapshot(state.time, state.particles);
    force.capture_next();
    step(cfg.order, state.particles, dt, force, ws);
    record(n, force.captured());

    if (cfg.remap_interval > 0 && (n + 1) % cfg.remap_interval == 0) {
      ws.release();
      RemapReport rr;
      state.particles = remap(state.particles, remap_cfg, &rr);
      ++result.remaps;
      auto& tot = result.remap_totals;
      tot.truncated_charge += rr.truncated_charge;
      tot.dropped_charge += rr.dropped_charge;
      tot.dropped_count += rr.dropped_count;
      tot.clamp_defect += rr.clamp_defect;
      tot.redistribution_iterations = std::max(tot.redistribution_iterations, rr.redistribution_iterations);
      if (obs.on_remap) obs.on_remap(n + 1, rr);
    }
  }

  // diagnostics for the final state
  state.step_index = steps;
  state.time = steps * dt;
  if (obs.on_snapshot && detail::matches_step(cfg.snapshot_times, state.time, dt)) obs.on_snapshot(state.time, state.particles);
  {
    ws.resize(state.particles.size());
    for (std::size_t p = 0; p < state.particles.size(); ++p) {
      ws.q[p] = state.particles.particles[p].q;
      ws.trial[p] = state.particles.particles[p].x;
    }
    force(std::span<const Vec<D>>(ws.trial), std::span<const double>(ws.q), std::span<Vec<D>>(ws.accel));
    record(steps, force.field());
    ws.release();
  }

  result.pipeline_evaluations = force.evaluations();
  result.final_state = std::move(state);
  return result;
}

/// Runs `n_levels` resolutions, each refining every discretization parameter
/// by 2, and returns Richardson errors between consecutive levels at `times`.
template <int D>
ConvergenceReport run_ladder(const SimulationConfig& base, int n_levels, const std::vector<double>& times,
                             const std::function<void(int, const Resolution&)>& on_level = {}) {
  if (n_levels < 3) throw std::invalid_argument("convergence ladder needs at least 3 levels, got " + std::to_string(n_levels));
  if (times.empty()) throw std::invalid_argument("convergence ladder needs at least one sample time");
  std::vector<Resolution> levels{base.resolution};
  for (int l = 1; l < n_levels; ++l) levels.push_back(levels.back().refined());

  std::vector<std::vector<VectorField<D>>> fields;  // [level][time]
  for (int l = 0; l < n_levels; ++l) {
    if (on_level) on_level(l, levels[l]);
    SimulationConfig cfg = base;
    cfg.resolution = levels[l];
    cfg.field_sample_times = times;
    cfg.snapshot_times.clear();
    auto r = run<D>(cfg);
    if (r.fields.size() != times.size()) throw std::logic_error("run_ladder: missing field samples");
    std::vector<VectorField<D>> f;
    for (auto& [t, e] : r.fields) f.push_back(std::move(e));
    fields.push_back(std::move(f));
  }
  std::vector<std::vector<double>> errors;
  for (int l = 0; l + 1 < n_levels; ++l) {
    std::vector<double> e;
    for (std::size_t t = 0; t < times.size(); ++t) e.push_back(richardson_error(fields[l + 1][t], fields[l][t]));
    errors.push_back(std::move(e));
  }
  return ConvergenceReport::from_errors(std::move(levels), times, std::move(errors));
}

}  // namespace hopic
