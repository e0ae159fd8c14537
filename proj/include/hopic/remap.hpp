#pragma once

// Phase-space remapping: deposit the particles onto the (x, v) lattice with a
// high-order kernel, optionally redistribute negative undershoots to their
// neighbors, and re-sample one particle per lattice cell.
//
// The lattice is processed in slabs along the first spatial index so the whole
// 2D-dimensional grid never has to be resident. A slab carries a halo wide
// enough for the redistribution iterations; cells in the slab core come out
// bitwise identical to a monolithic remap.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "hopic/kernels.hpp"
#include "hopic/particles.hpp"

namespace hopic {

template <int D>
struct RemapConfig {
  int interval = 5;  // steps between remaps, 0 disables
  PhaseSpaceGridSpec<D> spec;
  KernelId kernel = KernelId::W6;
  bool positivity = true;
  int max_redistribution_iters = 5;
  // Upper bound on lattice cells held at once (slab plus halo). 0 = no limit.
  std::size_t max_chunk_cells = std::size_t{1} << 27;
  // Forces a slab core width in first-index cells when > 0 (testing).
  int chunk_width = 0;

  void validate() const {
    if (interval < 0) throw std::invalid_argument("RemapConfig: interval must be >= 0");
    if (positivity && max_redistribution_iters < 1)
      throw std::invalid_argument("RemapConfig: max_redistribution_iters must be >= 1");
    if (kernel != KernelId::W3 && kernel != KernelId::W6)
      throw std::invalid_argument("RemapConfig: remap kernel must be W3 or W6");
    spec.validate();
  }
};

/// f values on a slab [x_begin, x_begin + x_count) of the first spatial index
/// (indices taken modulo n_x) times the full remaining lattice. `periodic` is
/// set when the slab is the entire lattice.
template <int D>
struct PhaseSpaceDensity {
  PhaseSpaceGridSpec<D> spec;
  int x_begin = 0;
  int x_count = 0;
  bool periodic = true;
  std::vector<double> values;
  double truncated_charge = 0.0;  // charge deposited outside the velocity bounds

  static PhaseSpaceDensity full(const PhaseSpaceGridSpec<D>& spec) {
    PhaseSpaceDensity f;
    f.spec = spec;
    f.x_begin = 0;
    f.x_count = spec.n_x;
    f.periodic = true;
    f.values.assign(spec.size(), 0.0);
    return f;
  }

  static PhaseSpaceDensity slab(const PhaseSpaceGridSpec<D>& spec, int begin, int count) {
    if (count >= spec.n_x) return full(spec);
    PhaseSpaceDensity f;
    f.spec = spec;
    f.x_begin = begin;
    f.x_count = count;
    f.periodic = false;
    f.values.assign(static_cast<std::size_t>(count) * spec.slice_size(), 0.0);
    return f;
  }

  /// Extents of the stored block: (x0, [x1], v0, [v1]).
  std::array<int, 2 * D> extents() const {
    std::array<int, 2 * D> e{};
    e[0] = x_count;
    for (int d = 1; d < D; ++d) e[d] = spec.n_x;
    for (int d = 0; d < D; ++d) e[D + d] = spec.n_v;
    return e;
  }

  double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

struct RedistributionReport {
  int iterations = 0;
  std::size_t initial_negatives = 0;
  std::size_t clamped_cells = 0;
  double clamp_defect = 0.0;  // sum of negative f values zeroed at the end (f units)
};

struct ResampleReport {
  std::size_t emitted = 0;
  std::size_t dropped_count = 0;
  double dropped_charge = 0.0;  // signed sum of discarded q
};

struct RemapReport {
  double charge_before = 0.0;
  double charge_after = 0.0;
  double truncated_charge = 0.0;
  double dropped_charge = 0.0;
  std::size_t dropped_count = 0;
  double clamp_defect = 0.0;  // charge added by clamping residual negatives
  int redistribution_iterations = 0;
  int chunks = 0;
};

namespace detail {

template <class K>
struct AxisStencil {
  int first;  // lowest touched lattice index (unwrapped)
  std::array<double, K::width> w;
};

template <class K>
AxisStencil<K> axis_stencil(double x, double origin, double h) {
  const auto hc = home_cell(x, origin, h);
  AxisStencil<K> st;
  st.first = hc.home - K::radius + 1;
  K::weights(hc.s, st.w.data());
  return st;
}

inline int wrap_index(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

/// Deposits particles `ids` (in the given order) into the slab `f`.
template <class K, int D>
void deposit_slab(const ParticleSet<D>& ps, const std::vector<std::size_t>* ids, PhaseSpaceDensity<D>& f) {
  const auto& spec = f.spec;
  const int nx = spec.n_x;
  const int nv = spec.n_v;
  const double inv_vol = 1.0 / spec.cell_volume();
  const std::size_t slice = spec.slice_size();
  const std::size_t count = ids ? ids->size() : ps.size();

  for (std::size_t k = 0; k < count; ++k) {
    const auto& p = ps.particles[ids ? (*ids)[k] : k];
    std::array<AxisStencil<K>, D> sx, sv;
    for (int d = 0; d < D; ++d) {
      sx[d] = axis_stencil<K>(p.x[d], 0.0, spec.h_x(d));
      sv[d] = axis_stencil<K>(p.v[d], -spec.v_max, spec.h_v());
    }
    const double qv = p.q * inv_vol;
    for (int a = 0; a < K::width; ++a) {
      const int rel = wrap_index(sx[0].first + a - f.x_begin, nx);
      if (rel >= f.x_count) continue;
      const double wa = qv * sx[0].w[a];
      double* base0 = f.values.data() + static_cast<std::size_t>(rel) * slice;
      if constexpr (D == 1) {
        for (int c = 0; c < K::width; ++c) {
          const int jv = sv[0].first + c;
          if (jv < 0 || jv >= nv) continue;
          base0[jv] += wa * sv[0].w[c];
        }
      } else {
        for (int b = 0; b < K::width; ++b) {
          const int i1 = wrap_index(sx[1].first + b, nx);
          const double wab = wa * sx[1].w[b];
          double* base1 = base0 + static_cast<std::size_t>(i1) * nv * nv;
          for (int c = 0; c < K::width; ++c) {
            const int j0 = sv[0].first + c;
            if (j0 < 0 || j0 >= nv) continue;
            const double wabc = wab * sv[0].w[c];
            double* row = base1 + static_cast<std::size_t>(j0) * nv;
            const int j1_first = sv[1].first;
            const int lo = std::max(0, -j1_first);
            const int hi = std::min(K::width, nv - j1_first);
            for (int e = lo; e < hi; ++e) row[j1_first + e] += wabc * sv[1].w[e];
          }
        }
      }
    }
  }
}

/// Charge each particle deposits outside the velocity bounds.
template <class K, int D>
double truncated_charge(const ParticleSet<D>& ps, const PhaseSpaceGridSpec<D>& spec) {
  double lost = 0.0;
  for (const auto& p : ps.particles) {
    double inside = 1.0;
    for (int d = 0; d < D; ++d) {
      const auto sv = axis_stencil<K>(p.v[d], -spec.v_max, spec.h_v());
      double s = 0.0;
      for (int c = 0; c < K::width; ++c) {
        const int jv = sv.first + c;
        if (jv >= 0 && jv < spec.n_v) s += sv.w[c];
      }
      inside *= s;
    }
    lost += p.q * (1.0 - inside);
  }
  return lost;
}

}  // namespace detail

/// f on the full lattice: sum_p q_p / (h_x^D h_v^D) W((x_i - x_p)/h_x) W((v_j - v_p)/h_v),
/// periodic in x, truncated at the velocity bounds.
template <int D>
PhaseSpaceDensity<D> deposit_phase_space(const ParticleSet<D>& ps, const PhaseSpaceGridSpec<D>& spec, KernelId kernel) {
  if (kernel != KernelId::W3 && kernel != KernelId::W6)
    throw std::invalid_argument("deposit_phase_space: kernel must be W3 or W6");
  spec.validate();
  auto f = PhaseSpaceDensity<D>::full(spec);
  dispatch_kernel(kernel, [&](auto k) {
    using K = decltype(k);
    detail::deposit_slab<K, D>(ps, nullptr, f);
    f.truncated_charge = detail::truncated_charge<K, D>(ps, spec);
  });
  return f;
}

namespace detail {

/// Neighbor enumeration on the stored block: +-1 in every phase-space axis,
/// periodic along the first axis only for the full lattice, periodic along the
/// other spatial axes, truncated along velocity axes.
template <int D>
struct BlockTopology {
  static constexpr int R = 2 * D;
  std::array<int, R> ext{};
  std::array<std::size_t, R> stride{};
  std::array<bool, R> periodic{};

  explicit BlockTopology(const PhaseSpaceDensity<D>& f) {
    ext = f.extents();
    stride[R - 1] = 1;
    for (int r = R - 2; r >= 0; --r) stride[r] = stride[r + 1] * static_cast<std::size_t>(ext[r + 1]);
    periodic[0] = f.periodic;
    for (int r = 1; r < R; ++r) periodic[r] = r < D;
  }

  std::array<int, R> coords(std::size_t flat) const {
    std::array<int, R> c{};
    for (int r = R - 1; r >= 0; --r) {
      c[r] = static_cast<int>(flat % ext[r]);
      flat /= ext[r];
    }
    return c;
  }

  /// Calls fn(neighbor_flat) for each valid neighbor in a fixed order.
  template <class Fn>
  void for_each_neighbor(std::size_t flat, Fn&& fn) const {
    const auto c = coords(flat);
    std::array<std::ptrdiff_t, R * 3> delta{};
    std::array<bool, R * 3> valid{};
    for (int r = 0; r < R; ++r) {
      for (int o = -1; o <= 1; ++o) {
        int j = c[r] + o;
        bool ok = true;
        if (j < 0 || j >= ext[r]) {
          if (periodic[r] && ext[r] > 2) j = (j + ext[r]) % ext[r];
          else ok = false;
        }
        valid[r * 3 + o + 1] = ok;
        delta[r * 3 + o + 1] = (static_cast<std::ptrdiff_t>(j) - c[r]) * static_cast<std::ptrdiff_t>(stride[r]);
      }
    }
    constexpr int total = R == 2 ? 9 : 81;
    for (int m = 0; m < total; ++m) {
      if (m == total / 2) continue;  // the cell itself
      int rem = m;
      std::ptrdiff_t off = 0;
      bool ok = true;
      for (int r = R - 1; r >= 0; --r) {
        const int o = rem % 3;
        rem /= 3;
        ok = ok && valid[r * 3 + o];
        off += delta[r * 3 + o];
      }
      if (ok) fn(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(flat) + off));
    }
  }
};

}  // namespace detail

/// Positivity-preserving redistribution. Each iteration (Jacobi style) zeroes
/// every negative cell whose +-1 neighborhood has positive capacity and removes
/// its deficit from those neighbors in proportion to their value. Negative cells
/// with no capacity wait for the next iteration. Negatives left after
/// `max_iters` are clamped to zero and reported as clamp_defect.
namespace detail {

template <int D>
RedistributionReport redistribute(PhaseSpaceDensity<D>& f, int max_iters, int core_offset, int core_count) {
  if (max_iters < 1) throw std::invalid_argument("redistribute_negatives: max_iters must be >= 1");
  RedistributionReport rep;
  const detail::BlockTopology<D> topo(f);
  auto& val = f.values;
  const std::size_t n = val.size();

  // 0: ordinary cell, 1: negative cell whose slot now holds ratio f_i / capacity_i,
  // 2: negative cell without capacity, 4: bit marking a neighbor of a type-1 cell
  std::vector<std::uint8_t> state(n, 0);
  std::vector<std::size_t> negatives;

  for (int it = 0; it < max_iters; ++it) {
    negatives.clear();
    for (std::size_t c = 0; c < n; ++c)
      if (val[c] < 0.0) negatives.push_back(c);
    if (it == 0) rep.initial_negatives = negatives.size();
    if (negatives.empty()) break;
    rep.iterations = it + 1;

    // capacities from the previous iterate
    std::vector<double> ratio(negatives.size());
    for (std::size_t k = 0; k < negatives.size(); ++k) {
      double cap = 0.0;
      topo.for_each_neighbor(negatives[k], [&](std::size_t nb) { cap += std::max(0.0, val[nb]); });
      ratio[k] = cap > 0.0 ? val[negatives[k]] / cap : 0.0;
    }
    std::vector<std::size_t> touched;
    for (std::size_t k = 0; k < negatives.size(); ++k) {
      const std::size_t c = negatives[k];
      if (ratio[k] < 0.0) {
        state[c] = 1;
        val[c] = ratio[k];
        topo.for_each_neighbor(c, [&](std::size_t nb) {
          if (!(state[nb] & 4)) {
            state[nb] |= 4;
            touched.push_back(nb);
          }
        });
      } else {
        state[c] = 2;
      }
    }
    // gather into positive neighbors in fixed neighbor order
    for (std::size_t c : touched) {
      if ((state[c] & 3) != 0 || val[c] <= 0.0) continue;
      double s = 0.0;
      topo.for_each_neighbor(c, [&](std::size_t nb) {
        if ((state[nb] & 3) == 1) s += val[nb];
      });
      val[c] += val[c] * s;
    }
    for (std::size_t k = 0; k < negatives.size(); ++k) {
      const std::size_t c = negatives[k];
      if ((state[c] & 3) == 1) val[c] = 0.0;
    }
    for (std::size_t c : negatives) state[c] = 0;
    for (std::size_t c : touched) state[c] = 0;
  }

  const std::size_t core_lo = static_cast<std::size_t>(core_offset) * topo.stride[0];
  const std::size_t core_hi = static_cast<std::size_t>(core_offset + core_count) * topo.stride[0];
  for (std::size_t c = 0; c < n; ++c) {
    if (val[c] < 0.0) {
      if (c >= core_lo && c < core_hi) {
        rep.clamp_defect += val[c];
        ++rep.clamped_cells;
      }
      val[c] = 0.0;
    }
  }
  return rep;
}

}  // namespace detail

template <int D>
RedistributionReport redistribute_negatives(PhaseSpaceDensity<D>& f, int max_iters) {
  return detail::redistribute(f, max_iters, 0, f.x_count);
}

namespace detail {

template <int D, class Emit>
void for_each_core_cell(const PhaseSpaceDensity<D>& f, int core_offset, int core_count, Emit&& emit) {
  const auto& spec = f.spec;
  const std::size_t slice = spec.slice_size();
  for (int r = core_offset; r < core_offset + core_count; ++r) {
    const int i0 = wrap_index(f.x_begin + r, spec.n_x);
    const double* base = f.values.data() + static_cast<std::size_t>(r) * slice;
    if constexpr (D == 1) {
      for (int j = 0; j < spec.n_v; ++j) emit(base[j], Vec<1>{spec.x_center(0, i0)}, Vec<1>{spec.v_center(j)});
    } else {
      std::size_t c = 0;
      for (int i1 = 0; i1 < spec.n_x; ++i1)
        for (int j0 = 0; j0 < spec.n_v; ++j0)
          for (int j1 = 0; j1 < spec.n_v; ++j1, ++c)
            emit(base[c], Vec<2>{spec.x_center(0, i0), spec.x_center(1, i1)},
                 Vec<2>{spec.v_center(j0), spec.v_center(j1)});
    }
  }
}

template <int D>
void resample_core(const PhaseSpaceDensity<D>& f, int core_offset, int core_count, ParticleSet<D>& out,
                   ResampleReport& rep) {
  const double vol = f.spec.cell_volume();
  const double threshold = f.spec.threshold;
  for_each_core_cell<D>(f, core_offset, core_count, [&](double fv, const Vec<D>& x, const Vec<D>& v) {
    const double q = fv * vol;
    if (q > 0.0 && q >= threshold) {
      out.particles.push_back({q, x, v});
      ++rep.emitted;
    } else if (q != 0.0) {
      ++rep.dropped_count;
      rep.dropped_charge += q;
    }
  });
}

}  // namespace detail

/// One particle per lattice cell with q = f h_x^D h_v^D at the cell center;
/// non-positive q and q < threshold are discarded and reported.
template <int D>
ParticleSet<D> resample_particles(const PhaseSpaceDensity<D>& f, ResampleReport* report = nullptr) {
  ParticleSet<D> out;
  out.length = f.spec.length;
  ResampleReport rep;
  detail::resample_core<D>(f, 0, f.x_count, out, rep);
  if (report) *report = rep;
  return out;
}

/// deposit -> (redistribute) -> resample, slab by slab along the first spatial index.
template <int D>
ParticleSet<D> remap(const ParticleSet<D>& ps, const RemapConfig<D>& cfg, RemapReport* report = nullptr) {
  cfg.validate();
  const auto& spec = cfg.spec;
  const int nx = spec.n_x;
  const std::size_t slice = spec.slice_size();
  const int halo = cfg.positivity ? 2 * cfg.max_redistribution_iters : 0;

  int core = nx;
  if (cfg.chunk_width > 0) {
    core = std::min(nx, cfg.chunk_width);
  } else if (cfg.max_chunk_cells > 0 && spec.size() > cfg.max_chunk_cells) {
    const auto fit = static_cast<long long>(cfg.max_chunk_cells / slice) - 2LL * halo;
    core = static_cast<int>(std::clamp<long long>(fit, 1, nx));
  }
  if (core + 2 * halo >= nx) core = nx;

  RemapReport rep;
  rep.charge_before = ps.total_charge();
  ParticleSet<D> out;
  out.length = spec.length;

  dispatch_kernel(cfg.kernel, [&](auto k) {
    using K = decltype(k);
    rep.truncated_charge = detail::truncated_charge<K, D>(ps, spec);

    if (core == nx) {
      auto f = PhaseSpaceDensity<D>::full(spec);
      detail::deposit_slab<K, D>(ps, nullptr, f);
      if (cfg.positivity) {
        const auto rr = detail::redistribute(f, cfg.max_redistribution_iters, 0, nx);
        rep.redistribution_iterations = rr.iterations;
        rep.clamp_defect = -rr.clamp_defect * spec.cell_volume();
      }
      ResampleReport rs;
      detail::resample_core<D>(f, 0, nx, out, rs);
      rep.dropped_charge = rs.dropped_charge;
      rep.dropped_count = rs.dropped_count;
      rep.chunks = 1;
      return;
    }

    // bin particles by the first lattice index their x0 stencil touches
    std::vector<std::size_t> bin_start(nx + 1, 0);
    std::vector<int> first(ps.size());
    for (std::size_t p = 0; p < ps.size(); ++p) {
      const auto st = detail::axis_stencil<K>(ps.particles[p].x[0], 0.0, spec.h_x(0));
      first[p] = detail::wrap_index(st.first, nx);
      ++bin_start[first[p] + 1];
    }
    for (int i = 0; i < nx; ++i) bin_start[i + 1] += bin_start[i];
    std::vector<std::size_t> binned(ps.size());
    {
      auto cursor = bin_start;
      for (std::size_t p = 0; p < ps.size(); ++p) binned[cursor[first[p]]++] = p;
    }

    std::vector<std::size_t> ids;
    for (int begin = 0; begin < nx; begin += core) {
      const int count = std::min(core, nx - begin);
      const int ext_begin = begin - halo;
      const int ext_count = count + 2 * halo;
      auto f = PhaseSpaceDensity<D>::slab(spec, detail::wrap_index(ext_begin, nx), ext_count);

      ids.clear();
      const int span = ext_count + K::width - 1;
      for (int b = 0; b < std::min(span, nx); ++b) {
        const int bin = detail::wrap_index(ext_begin - K::width + 1 + b, nx);
        ids.insert(ids.end(), binned.begin() + bin_start[bin], binned.begin() + bin_start[bin + 1]);
      }
      std::sort(ids.begin(), ids.end());
      detail::deposit_slab<K, D>(ps, &ids, f);

      if (cfg.positivity) {
        const auto rr = detail::redistribute(f, cfg.max_redistribution_iters, halo, count);
        rep.redistribution_iterations = std::max(rep.redistribution_iterations, rr.iterations);
        rep.clamp_defect -= rr.clamp_defect * spec.cell_volume();
      }
      ResampleReport rs;
      detail::resample_core<D>(f, halo, count, out, rs);
      rep.dropped_charge += rs.dropped_charge;
      rep.dropped_count += rs.dropped_count;
      ++rep.chunks;
    }
  });

  rep.charge_after = out.total_charge();
  if (report) *report = rep;
  return out;
}

// Phase-space density dump (text):
//   # phase_space D=<D> n_x=<n> n_v=<n> h_x=<h> h_v=<h> L=<L> v_max=<v>
//   values in row-major (x0, [x1], v0, [v1]) order, one line per fixed leading
//   indices with the last velocity index along the line
namespace io {

template <int D>
void write_phase_space(std::ostream& os, const PhaseSpaceDensity<D>& f) {
  const auto& s = f.spec;
  os << std::setprecision(17) << "# phase_space D=" << D << " n_x=" << s.n_x << " n_v=" << s.n_v
     << " h_x=" << s.h_x(0) << " h_v=" << s.h_v() << " L=" << s.length[0] << " v_max=" << s.v_max << '\n';
  for (std::size_t c = 0; c < f.values.size(); ++c) {
    os << f.values[c];
    os << (((c + 1) % s.n_v == 0) ? '\n' : ',');
  }
}

}  // namespace io
}  // namespace hopic
