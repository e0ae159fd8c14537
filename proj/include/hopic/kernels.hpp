#pragma once

// Compact interpolating kernels for particle/mesh and particle/phase-space transfer.
//
// All kernels are evaluated in normalized cell units. Each kernel is a piecewise
// polynomial that equals the local Lagrange interpolant on its support, which is
// why the branches below are written in factored (root) form: the products are
// exactly 1 at the origin and exactly 0 at every other integer node.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hopic {

enum class KernelId { W2, W3, W4, W6 };

struct KernelInfo {
  int order;              // formal accuracy
  double support_radius;  // eval == 0 for |x| >= support_radius
};

constexpr KernelInfo kernel_info(KernelId id) {
  switch (id) {
    case KernelId::W2: return {2, 1.0};
    case KernelId::W3: return {3, 2.0};
    case KernelId::W4: return {4, 2.0};
    case KernelId::W6: return {6, 3.0};
  }
  return {0, 0.0};
}

inline std::string_view kernel_name(KernelId id) {
  switch (id) {
    case KernelId::W2: return "W2";
    case KernelId::W3: return "W3";
    case KernelId::W4: return "W4";
    case KernelId::W6: return "W6";
  }
  return "?";
}

/// Compile-time kernel. `radius` is the integer support radius R; `weights`
/// fills the 2R weights for cell offsets j = -R+1 .. R of a sample at
/// fractional offset s in [0,1), i.e. w[j + R - 1] = W(j - s).
template <KernelId K>
struct Kernel;

template <>
struct Kernel<KernelId::W2> {
  static constexpr int radius = 1;
  static constexpr int width = 2;

  static double eval(double x) {
    const double a = std::abs(x);
    return a <= 1.0 ? 1.0 - a : 0.0;
  }
  static void weights(double s, double* w) {
    w[0] = 1.0 - s;
    w[1] = s;
  }
};

template <>
struct Kernel<KernelId::W3> {
  static constexpr int radius = 2;
  static constexpr int width = 4;

  static double inner(double a) { return 0.5 * (1.0 - a) * (2.0 + 2.0 * a - 3.0 * a * a); }
  static double outer(double a) { return 0.5 * (2.0 - a) * (2.0 - a) * (1.0 - a); }

  static double eval(double x) {
    const double a = std::abs(x);
    if (a <= 1.0) return inner(a);
    if (a <= 2.0) return outer(a);
    return 0.0;
  }
  static void weights(double s, double* w) {
    w[0] = outer(1.0 + s);
    w[1] = inner(s);
    w[2] = inner(1.0 - s);
    w[3] = outer(2.0 - s);
  }
};

template <>
struct Kernel<KernelId::W4> {
  static constexpr int radius = 2;
  static constexpr int width = 4;

  static double inner(double a) { return 0.5 * (1.0 - a) * (1.0 + a) * (2.0 - a); }
  static double outer(double a) { return (1.0 - a) * (2.0 - a) * (3.0 - a) / 6.0; }

  static double eval(double x) {
    const double a = std::abs(x);
    if (a <= 1.0) return inner(a);
    if (a <= 2.0) return outer(a);
    return 0.0;
  }
  static void weights(double s, double* w) {
    w[0] = outer(1.0 + s);
    w[1] = inner(s);
    w[2] = inner(1.0 - s);
    w[3] = outer(2.0 - s);
  }
};

template <>
struct Kernel<KernelId::W6> {
  static constexpr int radius = 3;
  static constexpr int width = 6;

  static double inner(double a) {
    return (1.0 - a) * (1.0 + a) * (2.0 - a) * (2.0 + a) * (3.0 - a) / 12.0;
  }
  static double middle(double a) {
    return (1.0 - a) * (1.0 + a) * (2.0 - a) * (3.0 - a) * (4.0 - a) / 24.0;
  }
  static double outer(double a) {
    return (1.0 - a) * (2.0 - a) * (3.0 - a) * (4.0 - a) * (5.0 - a) / 120.0;
  }

  static double eval(double x) {
    const double a = std::abs(x);
    if (a <= 1.0) return inner(a);
    if (a <= 2.0) return middle(a);
    if (a <= 3.0) return outer(a);
    return 0.0;
  }
  static void weights(double s, double* w) {
    w[0] = outer(2.0 + s);
    w[1] = middle(1.0 + s);
    w[2] = inner(s);
    w[3] = inner(1.0 - s);
    w[4] = middle(2.0 - s);
    w[5] = outer(3.0 - s);
  }
};

/// Calls `fn(std::integral_constant-like tag)` with the compile-time kernel
/// matching `id`. Used to hoist the kernel switch out of particle loops.
template <class Fn>
decltype(auto) dispatch_kernel(KernelId id, Fn&& fn) {
  switch (id) {
    case KernelId::W2: return fn(Kernel<KernelId::W2>{});
    case KernelId::W3: return fn(Kernel<KernelId::W3>{});
    case KernelId::W4: return fn(Kernel<KernelId::W4>{});
    case KernelId::W6: return fn(Kernel<KernelId::W6>{});
  }
  throw std::invalid_argument("unknown kernel id");
}

inline double eval_1d(KernelId id, double x) {
  return dispatch_kernel(id, [x](auto k) { return decltype(k)::eval(x); });
}

inline double eval_nd(KernelId id, std::span<const double> offset, int dims) {
  if (dims < 1 || dims > 2 || static_cast<int>(offset.size()) != dims)
    throw std::invalid_argument("eval_nd: offset has " + std::to_string(offset.size()) +
                                " components, expected D = " + std::to_string(dims));
  double w = 1.0;
  for (double o : offset) w *= eval_1d(id, o);
  return w;
}

template <int D>
struct StencilEntry {
  std::array<int, D> offset{};
  double weight = 0.0;
};

/// Lattice offsets j (relative to the home cell) touched by a sample at
/// fractional offset s, with weight prod_d W(j_d - s_d). Zero weights are omitted.
template <int D>
std::vector<StencilEntry<D>> stencil(KernelId id, const std::array<double, D>& s) {
  for (double c : s)
    if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("stencil: fractional offset outside [0,1)");

  return dispatch_kernel(id, [&](auto k) {
    using K = decltype(k);
    std::array<std::array<double, K::width>, D> w{};
    for (int d = 0; d < D; ++d) K::weights(s[d], w[d].data());

    std::vector<StencilEntry<D>> out;
    std::array<int, D> idx{};
    const auto total = static_cast<int>(std::pow(K::width, D));
    for (int flat = 0; flat < total; ++flat) {
      int rem = flat;
      double weight = 1.0;
      for (int d = D - 1; d >= 0; --d) {
        idx[d] = rem % K::width;
        rem /= K::width;
        weight *= w[d][idx[d]];
      }
      if (weight == 0.0) continue;
      StencilEntry<D> e;
      for (int d = 0; d < D; ++d) e.offset[d] = idx[d] - K::radius + 1;
      e.weight = weight;
      out.push_back(e);
    }
    return out;
  });
}

}  // namespace hopic
