#include <catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"

using namespace hopic;
using Catch::Approx;

namespace {

const KernelId kAll[] = {KernelId::W2, KernelId::W3, KernelId::W4, KernelId::W6};

// Expanded polynomial forms, independent of the factored implementation.
double printed(KernelId id, double x) {
  const double a = std::abs(x), a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a;
  switch (id) {
    case KernelId::W2: return a < 1 ? 1 - a : 0.0;
    case KernelId::W3:
      if (a <= 1) return 1 - 2.5 * a2 + 1.5 * a3;
      if (a <= 2) return 0.5 * (2 - a) * (2 - a) * (1 - a);
      return 0.0;
    case KernelId::W4:
      if (a <= 1) return 1 - a / 2 - a2 + a3 / 2;
      if (a <= 2) return 1 - 11 * a / 6 + a2 - a3 / 6;
      return 0.0;
    case KernelId::W6:
      if (a <= 1) return 1 - a / 3 - 5 * a2 / 4 + 5 * a3 / 12 + a4 / 4 - a5 / 12;
      if (a <= 2) return 1 - 13 * a / 12 - 5 * a2 / 8 + 25 * a3 / 24 - 3 * a4 / 8 + a5 / 24;
      if (a <= 3) return 1 - 137 * a / 60 + 15 * a2 / 8 - 17 * a3 / 24 + a4 / 8 - a5 / 120;
      return 0.0;
  }
  return 0.0;
}

double weight_sum_moment(KernelId id, double x, int m) {
  double s = 0.0;
  for (int j = -4; j <= 5; ++j) s += std::pow(j - x, m) * eval_1d(id, j - x);
  return s;
}

}  // namespace

TEST_CASE("kernel metadata") {
  CHECK(kernel_info(KernelId::W2).order == 2);
  CHECK(kernel_info(KernelId::W3).support_radius == 2.0);
  CHECK(kernel_info(KernelId::W4).support_radius == 2.0);
  CHECK(kernel_info(KernelId::W6).support_radius == 3.0);
  CHECK(kernel_name(KernelId::W6) == "W6");
}

TEST_CASE("kernels match the expanded polynomials") {
  testing::Gen g(1);
  for (auto id : kAll)
    for (int t = 0; t < 2000; ++t) {
      const double x = g.uniform(-3.5, 3.5);
      CHECK(eval_1d(id, x) == Approx(printed(id, x)).margin(1e-14));
    }
}

TEST_CASE("kernel node values") {
  for (auto id : kAll) {
    CHECK(eval_1d(id, 0.0) == 1.0);
    for (int j = 1; j <= 3; ++j) {
      CHECK(eval_1d(id, j) == 0.0);
      CHECK(eval_1d(id, -j) == 0.0);
    }
  }
  CHECK(eval_1d(KernelId::W2, 0.5) == 0.5);
  CHECK(eval_1d(KernelId::W3, 0.5) == Approx(9.0 / 16.0).epsilon(1e-15));
  CHECK(eval_1d(KernelId::W4, 1.5) == Approx(-1.0 / 16.0).epsilon(1e-15));
  CHECK(eval_1d(KernelId::W4, 2.5) == 0.0);
}

TEST_CASE("kernels are even and vanish outside the support") {
  testing::Gen g(2);
  for (auto id : kAll) {
    const double r = kernel_info(id).support_radius;
    for (int t = 0; t < 500; ++t) {
      const double x = g.uniform(0.0, 4.0);
      CHECK(eval_1d(id, x) == eval_1d(id, -x));
      if (x >= r) CHECK(eval_1d(id, x) == 0.0);
    }
  }
}

TEST_CASE("partition of unity") {
  testing::Gen g(3);
  for (auto id : kAll)
    for (int t = 0; t < testing::kTrials; ++t) {
      const double x = g.uniform(-1.0, 1.0);
      CHECK(weight_sum_moment(id, x, 0) == Approx(1.0).margin(1e-14));
    }
}

TEST_CASE("discrete moments vanish up to the kernel order") {
  testing::Gen g(4);
  for (auto id : kAll) {
    const int order = kernel_info(id).order;
    for (int m = 1; m < order; ++m)
      for (int t = 0; t < 20; ++t) {
        const double x = g.uniform(0.0, 1.0);
        CHECK(weight_sum_moment(id, x, m) == Approx(0.0).margin(1e-12));
      }
  }
}

TEST_CASE("interpolation reproduces polynomials below the kernel order") {
  testing::Gen g(5);
  for (auto id : kAll) {
    const int order = kernel_info(id).order;
    for (int t = 0; t < 20; ++t) {
      std::vector<double> c(order);
      for (auto& v : c) v = g.uniform(-1, 1);
      auto poly = [&](double y) {
        double s = 0.0;
        for (int k = order - 1; k >= 0; --k) s = s * y + c[k];
        return s;
      };
      const double x = g.uniform(-1.0, 1.0);
      double interp = 0.0;
      for (int j = -4; j <= 5; ++j) interp += poly(j) * eval_1d(id, j - x);
      CHECK(interp == Approx(poly(x)).margin(1e-11));
    }
  }
}

TEST_CASE("W3 is not exact for cubics") {
  double interp = 0.0;
  for (int j = -4; j <= 5; ++j) interp += std::pow(j, 3) * eval_1d(KernelId::W3, j - 0.25);
  CHECK(std::abs(interp - std::pow(0.25, 3)) > 1e-3);
}

TEST_CASE("kernels are continuous at breakpoints") {
  for (auto id : kAll)
    for (double b : {1.0, 2.0, 3.0}) {
      CHECK(eval_1d(id, b - 1e-12) == Approx(eval_1d(id, b + 1e-12)).margin(1e-10));
    }
}

TEST_CASE("higher-order kernels take negative values") {
  CHECK(eval_1d(KernelId::W4, 1.5) < 0.0);
  CHECK(eval_1d(KernelId::W6, 1.5) < 0.0);
  CHECK(eval_1d(KernelId::W3, 1.5) < 0.0);
  for (double x = -1.0; x <= 1.0; x += 0.01) CHECK(eval_1d(KernelId::W2, x) >= 0.0);
}

TEST_CASE("W6 half-integer weights") {
  const std::vector<double> expect{3.0 / 256, -25.0 / 256, 75.0 / 128, 75.0 / 128, -25.0 / 256, 3.0 / 256};
  double w[6];
  Kernel<KernelId::W6>::weights(0.5, w);
  for (int i = 0; i < 6; ++i) CHECK(w[i] == Approx(expect[i]).margin(1e-15));
}

TEST_CASE("stencil weights agree with pointwise evaluation") {
  testing::Gen g(6);
  for (auto id : kAll)
    for (int t = 0; t < 20; ++t) {
      std::array<double, 2> s{g.uniform(), g.uniform()};
      double sum = 0.0;
      for (const auto& e : stencil<2>(id, s)) {
        const double expect = eval_1d(id, e.offset[0] - s[0]) * eval_1d(id, e.offset[1] - s[1]);
        CHECK(e.weight == Approx(expect).margin(1e-15));
        sum += e.weight;
      }
      CHECK(sum == Approx(1.0).margin(1e-13));
    }
}

TEST_CASE("tensor product evaluation") {
  const std::array<double, 2> off{0.25, -1.5};
  CHECK(eval_nd(KernelId::W4, off, 2) == Approx(eval_1d(KernelId::W4, 0.25) * eval_1d(KernelId::W4, -1.5)));
  CHECK_THROWS_AS(eval_nd(KernelId::W4, off, 1), std::invalid_argument);
  CHECK_THROWS_AS(stencil<1>(KernelId::W2, {1.0}), std::invalid_argument);
}
