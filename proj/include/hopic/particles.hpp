#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hopic/kernels.hpp"
#include "hopic/mesh.hpp"

namespace hopic {

template <int D>
struct Particle {
  double q = 0.0;
  Vec<D> x{};
  Vec<D> v{};
};

/// Wraps a coordinate into [0, length).
inline double wrap_periodic(double x, double length) {
  if (x >= 0.0 && x < length) return x;
  double y = x - length * std::floor(x / length);
  if (y >= length) y -= length;
  if (y < 0.0) y = 0.0;
  return y;
}

template <int D>
struct ParticleSet {
  std::vector<Particle<D>> particles;
  Vec<D> length{};  // periodic domain extent

  std::size_t size() const { return particles.size(); }

  double total_charge() const {
    double s = 0.0;
    for (const auto& p : particles) s += p.q;
    return s;
  }

  std::vector<Vec<D>> positions() const {
    std::vector<Vec<D>> out(particles.size());
    for (std::size_t i = 0; i < particles.size(); ++i) out[i] = particles[i].x;
    return out;
  }

  std::vector<double> charges() const {
    std::vector<double> out(particles.size());
    for (std::size_t i = 0; i < particles.size(); ++i) out[i] = particles[i].q;
    return out;
  }

  void wrap_positions() {
    for (auto& p : particles)
      for (int d = 0; d < D; ++d) p.x[d] = wrap_periodic(p.x[d], length[d]);
  }
};

/// Cell-centered phase-space lattice used for particle creation and remapping:
/// n_x cells per spatial dimension over [0, L), n_v cells per velocity
/// dimension over [-v_max, v_max].
template <int D>
struct PhaseSpaceGridSpec {
  Vec<D> length{};
  int n_x = 0;
  int n_v = 0;
  double v_max = 0.0;
  double threshold = 0.0;  // minimum particle charge kept

  void validate() const {
    if (n_x < 1 || n_v < 1) throw std::invalid_argument("PhaseSpaceGridSpec: n_x and n_v must be >= 1");
    if (!(v_max > 0.0)) throw std::invalid_argument("PhaseSpaceGridSpec: v_max must be > 0");
    if (!(threshold >= 0.0)) throw std::invalid_argument("PhaseSpaceGridSpec: threshold must be >= 0");
    for (double l : length)
      if (!(l > 0.0)) throw std::invalid_argument("PhaseSpaceGridSpec: domain length must be > 0");
  }

  double h_x(int d = 0) const { return length[d] / n_x; }
  double h_v() const { return 2.0 * v_max / n_v; }

  /// Phase-space cell volume h_x^D h_v^D.
  double cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < D; ++d) v *= h_x(d) * h_v();
    return v;
  }

  double x_center(int d, int i) const { return (i + 0.5) * h_x(d); }
  double v_center(int j) const { return -v_max + (j + 0.5) * h_v(); }

  /// Cells in one slice of fixed first spatial index.
  std::size_t slice_size() const {
    std::size_t s = 1;
    for (int d = 1; d < D; ++d) s *= static_cast<std::size_t>(n_x);
    for (int d = 0; d < D; ++d) s *= static_cast<std::size_t>(n_v);
    return s;
  }
  std::size_t size() const { return slice_size() * static_cast<std::size_t>(n_x); }
};

/// One particle per phase-space lattice cell, q = f(x_c, v_c) h_x^D h_v^D.
/// Cells with q <= 0 or q < threshold produce no particle. Particles are
/// emitted in lattice order (first spatial index slowest, last velocity fastest).
template <int D, class Fn>
ParticleSet<D> initialize_particles(Fn&& f, const PhaseSpaceGridSpec<D>& spec) {
  spec.validate();
  ParticleSet<D> ps;
  ps.length = spec.length;
  const double vol = spec.cell_volume();
  auto emit = [&](const Vec<D>& x, const Vec<D>& v) {
    const double q = f(x, v) * vol;
    if (q > 0.0 && q >= spec.threshold) ps.particles.push_back({q, x, v});
  };
  if constexpr (D == 1) {
    for (int i = 0; i < spec.n_x; ++i)
      for (int j = 0; j < spec.n_v; ++j) emit({spec.x_center(0, i)}, {spec.v_center(j)});
  } else {
    for (int i0 = 0; i0 < spec.n_x; ++i0)
      for (int i1 = 0; i1 < spec.n_x; ++i1)
        for (int j0 = 0; j0 < spec.n_v; ++j0)
          for (int j1 = 0; j1 < spec.n_v; ++j1)
            emit({spec.x_center(0, i0), spec.x_center(1, i1)}, {spec.v_center(j0), spec.v_center(j1)});
  }
  return ps;
}

namespace detail {

/// Home cell and fractional offset of coordinate x on a cell-centered lattice
/// with spacing h whose first center sits at origin + h/2.
struct HomeCell {
  int home;
  double s;
};

inline HomeCell home_cell(double x, double origin, double h) {
  const double u = (x - origin) / h - 0.5;
  const double fl = std::floor(u);
  return {static_cast<int>(fl), u - fl};
}

template <class K, int D>
struct MeshStencil {
  std::array<int, D> first{};  // lowest touched cell index per dim (unwrapped)
  std::array<std::array<double, K::width>, D> w{};
};

template <class K, int D>
MeshStencil<K, D> mesh_stencil(const Vec<D>& x, const Mesh<D>& mesh) {
  MeshStencil<K, D> st;
  for (int d = 0; d < D; ++d) {
    const auto hc = home_cell(x[d], 0.0, mesh.dx(d));
    st.first[d] = hc.home - K::radius + 1;
    K::weights(hc.s, st.w[d].data());
  }
  return st;
}

template <class K, int D>
void deposit_impl(std::span<const Vec<D>> x, std::span<const double> q, ScalarField<D>& rho) {
  const auto& mesh = rho.mesh();
  const double inv_vol = 1.0 / mesh.cell_volume();
  auto& val = rho.values();
  for (std::size_t p = 0; p < x.size(); ++p) {
    const auto st = mesh_stencil<K, D>(x[p], mesh);
    const double qv = q[p] * inv_vol;
    if constexpr (D == 1) {
      for (int a = 0; a < K::width; ++a) val[mesh.wrap(0, st.first[0] + a)] += qv * st.w[0][a];
    } else {
      const int n1 = mesh.n_cells(1);
      for (int a = 0; a < K::width; ++a) {
        const std::size_t row = static_cast<std::size_t>(mesh.wrap(0, st.first[0] + a)) * n1;
        const double qa = qv * st.w[0][a];
        for (int b = 0; b < K::width; ++b) val[row + mesh.wrap(1, st.first[1] + b)] += qa * st.w[1][b];
      }
    }
  }
}

template <class K, int D>
void interpolate_impl(const VectorField<D>& e, std::span<const Vec<D>> x, std::span<Vec<D>> accel) {
  const auto& mesh = e.mesh();
  for (std::size_t p = 0; p < x.size(); ++p) {
    const auto st = mesh_stencil<K, D>(x[p], mesh);
    Vec<D> ep{};
    if constexpr (D == 1) {
      const auto& ev = e[0].values();
      for (int a = 0; a < K::width; ++a) ep[0] += ev[mesh.wrap(0, st.first[0] + a)] * st.w[0][a];
    } else {
      const int n1 = mesh.n_cells(1);
      const auto& e0 = e[0].values();
      const auto& e1 = e[1].values();
      for (int a = 0; a < K::width; ++a) {
        const std::size_t row = static_cast<std::size_t>(mesh.wrap(0, st.first[0] + a)) * n1;
        double s0 = 0.0, s1 = 0.0;
        for (int b = 0; b < K::width; ++b) {
          const std::size_t c = row + mesh.wrap(1, st.first[1] + b);
          s0 += e0[c] * st.w[1][b];
          s1 += e1[c] * st.w[1][b];
        }
        ep[0] += s0 * st.w[0][a];
        ep[1] += s1 * st.w[0][a];
      }
    }
    for (int d = 0; d < D; ++d) accel[p][d] = -ep[d];
  }
}

inline void check_transfer_kernel(KernelId k) {
  if (k != KernelId::W2 && k != KernelId::W4)
    throw std::invalid_argument("particle/mesh transfer kernel must be W2 or W4");
}

}  // namespace detail

/// rho_i = sum_p (q_p / V) W((x_i - x_p) / dx), accumulated in particle order.
/// Positions must already be wrapped into the domain.
template <int D>
void deposit_charge(std::span<const Vec<D>> x, std::span<const double> q, KernelId kernel, ScalarField<D>& rho) {
  detail::check_transfer_kernel(kernel);
  std::fill(rho.values().begin(), rho.values().end(), 0.0);
  dispatch_kernel(kernel, [&](auto k) { detail::deposit_impl<decltype(k), D>(x, q, rho); });
}

template <int D>
ScalarField<D> deposit_charge(const ParticleSet<D>& ps, const Mesh<D>& mesh, KernelId kernel) {
  ScalarField<D> rho(mesh);
  const auto x = ps.positions();
  const auto q = ps.charges();
  deposit_charge<D>(x, q, kernel, rho);
  return rho;
}

/// Net charge density against the unit neutralizing background, projected to
/// zero mean.
template <int D>
ScalarField<D> charge_density_rhs(const ScalarField<D>& deposited) {
  ScalarField<D> rho(deposited.mesh());
  for (std::size_t c = 0; c < rho.size(); ++c) rho[c] = 1.0 - deposited[c];
  rho.subtract_mean();
  return rho;
}

/// Gathers E to particle positions with unit-sum weights and returns a = -E_p.
template <int D>
void interpolate_field(const VectorField<D>& e, std::span<const Vec<D>> x, KernelId kernel, std::span<Vec<D>> accel) {
  detail::check_transfer_kernel(kernel);
  if (accel.size() != x.size()) throw std::invalid_argument("interpolate_field: output size mismatch");
  dispatch_kernel(kernel, [&](auto k) { detail::interpolate_impl<decltype(k), D>(e, x, accel); });
}

template <int D>
std::vector<Vec<D>> interpolate_field(const VectorField<D>& e, const ParticleSet<D>& ps, KernelId kernel) {
  const auto x = ps.positions();
  std::vector<Vec<D>> a(x.size());
  interpolate_field<D>(e, x, kernel, a);
  return a;
}

// Particle snapshot (text):
//   # particles count=<N> D=<D>
//   q,x_0[,x_1],v_0[,v_1]   one line per particle
namespace io {

template <int D>
void write_particles(std::ostream& os, const ParticleSet<D>& ps) {
  os << "# particles count=" << ps.size() << " D=" << D << " length=" << std::setprecision(17);
  for (int d = 0; d < D; ++d) os << (d ? "x" : "") << ps.length[d];
  os << '\n';
  for (const auto& p : ps.particles) {
    os << p.q;
    for (int d = 0; d < D; ++d) os << ',' << p.x[d];
    for (int d = 0; d < D; ++d) os << ',' << p.v[d];
    os << '\n';
  }
}

template <int D>
ParticleSet<D> read_particles(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# particles", 0) != 0)
    throw std::runtime_error("particle snapshot: missing header");
  std::size_t count = 0;
  int dims = 0;
  ParticleSet<D> ps;
  std::istringstream hs(line.substr(11));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const auto key = tok.substr(0, eq);
    auto val = tok.substr(eq + 1);
    if (key == "count") count = std::stoull(val);
    else if (key == "D") dims = std::stoi(val);
    else if (key == "length") {
      for (int d = 0; d < D; ++d) {
        const auto x = val.find('x');
        ps.length[d] = std::stod(val.substr(0, x));
        val = x == std::string::npos ? "" : val.substr(x + 1);
      }
    }
  }
  if (dims != D) throw std::runtime_error("particle snapshot: dimension mismatch");
  ps.particles.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("particle snapshot: truncated");
    std::istringstream row(line);
    std::string cell;
    Particle<D> p;
    auto next = [&] {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("particle snapshot: short record");
      return std::stod(cell);
    };
    p.q = next();
    for (int d = 0; d < D; ++d) p.x[d] = next();
    for (int d = 0; d < D; ++d) p.v[d] = next();
    ps.particles.push_back(p);
  }
  return ps;
}

}  // namespace io
}  // namespace hopic
