#pragma once

// Periodic centered finite-difference Laplacian and gradient, 2nd or 4th order.

#include <array>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "hopic/mesh.hpp"

namespace hopic {

inline void check_order(int order) {
  if (order != 2 && order != 4)
    throw std::invalid_argument("order must be 2 or 4, got " + std::to_string(order));
}

namespace detail {

// Laplacian stencil weights for offsets 0, +-1, +-2 (before dividing by dx^2).
struct LaplacianCoeffs {
  double c0, c1, c2;
};

constexpr LaplacianCoeffs laplacian_coeffs(int order) {
  return order == 2 ? LaplacianCoeffs{-2.0, 1.0, 0.0}
                    : LaplacianCoeffs{-30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
}

template <int D>
double laplacian_diagonal(const Mesh<D>& mesh, int order) {
  const auto k = laplacian_coeffs(order);
  double diag = 0.0;
  for (int d = 0; d < D; ++d) diag += k.c0 / (mesh.dx(d) * mesh.dx(d));
  return diag;
}

/// (L phi) at a single cell; used by the operator and by the smoother.
template <int D>
double laplacian_at(const ScalarField<D>& phi, const std::type_identity_t<std::array<int, D>>& i, int order) {
  const auto& mesh = phi.mesh();
  const auto k = laplacian_coeffs(order);
  double acc = 0.0;
  for (int d = 0; d < D; ++d) {
    auto at = [&](int off) {
      auto j = i;
      j[d] = mesh.wrap(d, i[d] + off);
      return phi.at(j);
    };
    double s = k.c0 * phi.at(i) + k.c1 * (at(1) + at(-1));
    if (order == 4) s += k.c2 * (at(2) + at(-2));
    acc += s / (mesh.dx(d) * mesh.dx(d));
  }
  return acc;
}

}  // namespace detail

template <int D>
ScalarField<D> apply_laplacian(const ScalarField<D>& phi, int order) {
  check_order(order);
  ScalarField<D> out(phi.mesh());
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = detail::laplacian_at(phi, phi.mesh().multi_index(c), order);
  return out;
}

/// E = -grad(phi) with the centered 2- or 4-point difference per dimension.
template <int D>
VectorField<D> gradient_to_efield(const ScalarField<D>& phi, int order) {
  check_order(order);
  const auto& mesh = phi.mesh();
  VectorField<D> e(mesh);
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    const auto i = mesh.multi_index(c);
    for (int d = 0; d < D; ++d) {
      auto at = [&](int off) {
        auto j = i;
        j[d] = mesh.wrap(d, i[d] + off);
        return phi.at(j);
      };
      double g;
      if (order == 2) {
        g = (at(1) - at(-1)) / (2.0 * mesh.dx(d));
      } else {
        g = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * mesh.dx(d));
      }
      e[d][c] = -g;
    }
  }
  return e;
}

}  // namespace hopic
