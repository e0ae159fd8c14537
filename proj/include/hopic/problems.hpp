#pragma once

// Benchmark initial conditions for the electrostatic Vlasov-Poisson system.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hopic/mesh.hpp"

namespace hopic {

enum class ProblemId { Landau1D, TwoStream1D, Landau2D, TwoStream2D };

inline std::string_view problem_name(ProblemId id) {
  switch (id) {
    case ProblemId::Landau1D: return "landau1d";
    case ProblemId::TwoStream1D: return "twostream1d";
    case ProblemId::Landau2D: return "landau2d";
    case ProblemId::TwoStream2D: return "twostream2d";
  }
  return "?";
}

inline ProblemId parse_problem(std::string_view name) {
  for (auto id : {ProblemId::Landau1D, ProblemId::TwoStream1D, ProblemId::Landau2D, ProblemId::TwoStream2D})
    if (problem_name(id) == name) return id;
  throw std::invalid_argument("unknown problem '" + std::string(name) +
                              "' (expected landau1d, twostream1d, landau2d or twostream2d)");
}

inline int problem_dims(ProblemId id) {
  return (id == ProblemId::Landau1D || id == ProblemId::TwoStream1D) ? 1 : 2;
}

struct ProblemSpec {
  ProblemId id = ProblemId::Landau1D;
  double alpha = 0.01;
  std::array<double, 2> k{0.5, 0.5};  // wavenumber per spatial dimension
  double v_max = 10.0;

  int dims() const { return problem_dims(id); }
  double length(int d) const { return 2.0 * std::numbers::pi / k[d]; }

  template <int D>
  Vec<D> lengths() const {
    Vec<D> l;
    for (int d = 0; d < D; ++d) l[d] = length(d);
    return l;
  }
};

struct AnalyticReference {
  double gamma;                 // amplitude damping rate (positive = decay)
  std::optional<double> omega;  // oscillation frequency, where known
};

inline std::optional<AnalyticReference> analytic_reference(ProblemId id) {
  switch (id) {
    case ProblemId::Landau1D: return AnalyticReference{0.1533, 1.416};
    case ProblemId::Landau2D: return AnalyticReference{0.394, std::nullopt};
    default: return std::nullopt;
  }
}

/// Initial distribution f(x, v, t = 0).
template <int D>
double eval_initial_f(const ProblemSpec& p, const Vec<D>& x, const Vec<D>& v) {
  using std::numbers::pi;
  if (p.dims() != D) throw std::invalid_argument("eval_initial_f: dimension mismatch for " + std::string(problem_name(p.id)));
  if constexpr (D == 1) {
    const double g = std::exp(-0.5 * v[0] * v[0]) / std::sqrt(2.0 * pi);
    const double pert = 1.0 + p.alpha * std::cos(p.k[0] * x[0]);
    if (p.id == ProblemId::Landau1D) return g * pert;
    return v[0] * v[0] * g * pert;
  } else {
    const double g = std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1]));
    if (p.id == ProblemId::Landau2D)
      return g / (2.0 * pi) * (1.0 + p.alpha * std::cos(p.k[0] * x[0]) * std::cos(p.k[1] * x[1]));
    return g / (12.0 * pi) * (1.0 + p.alpha * std::cos(p.k[0] * x[0])) * (1.0 + 5.0 * v[0] * v[0]);
  }
}

/// Mesh/lattice resolution and time step. n_x and n_v count phase-space
/// lattice cells per spatial and per velocity dimension.
struct Resolution {
  int n_cells = 64;
  int n_x = 128;
  int n_v = 256;
  double dt = 1.0 / 32.0;

  Resolution refined() const { return {2 * n_cells, 2 * n_x, 2 * n_v, dt / 2.0}; }
};

struct PaperConfig {
  ProblemSpec problem;
  Resolution resolution;
  Resolution ladder_base;  // coarsest level of the convergence study
  double threshold = 1e-16;
  double t_final = 30.0;
  int remap_interval = 5;
  bool positivity = true;
};

inline PaperConfig paper_config(ProblemId id) {
  PaperConfig c;
  c.problem.id = id;
  switch (id) {
    case ProblemId::Landau1D:
      c.problem.alpha = 0.01;
      c.problem.v_max = 10.0;
      c.resolution = {64, 128, 256, 1.0 / 32.0};
      c.ladder_base = {32, 64, 128, 1.0 / 16.0};
      c.threshold = 1e-16;
      break;
    case ProblemId::TwoStream1D:
      c.problem.alpha = 0.01;
      c.problem.v_max = 10.0;
      c.resolution = {256, 512, 1024, 1.0 / 128.0};
      c.ladder_base = {32, 64, 128, 1.0 / 16.0};
      c.threshold = 1e-16;
      break;
    case ProblemId::Landau2D:
      c.problem.alpha = 0.05;
      c.problem.v_max = 6.0;
      c.resolution = {32, 64, 128, 1.0 / 16.0};
      c.ladder_base = {8, 16, 32, 1.0 / 4.0};
      c.threshold = 1e-12;
      break;
    case ProblemId::TwoStream2D:
      c.problem.alpha = 0.05;
      c.problem.v_max = 9.0;
      c.resolution = {64, 128, 256, 1.0 / 32.0};
      c.ladder_base = {8, 16, 32, 1.0 / 4.0};
      c.threshold = 1e-12;
      break;
  }
  c.problem.k = {0.5, 0.5};
  return c;
}

}  // namespace hopic
