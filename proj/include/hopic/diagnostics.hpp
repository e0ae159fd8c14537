#pragma once

// Post-processing: field amplitudes, damping-rate fits, periodic cubic-spline
// resampling between nested meshes, Richardson error estimates and observed
// convergence orders, and reduced (x, v) phase-space images.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hopic/kernels.hpp"
#include "hopic/mesh.hpp"
#include "hopic/particles.hpp"
#include "hopic/problems.hpp"

namespace hopic {

enum class AmplitudeNorm { Max, L2 };

struct AmplitudeSeries {
  std::vector<double> times;
  std::vector<double> amplitude;

  std::size_t size() const { return times.size(); }

  void push(double t, double a) {
    if (!times.empty() && !(t > times.back()))
      throw std::invalid_argument("AmplitudeSeries: times must be strictly increasing");
    if (!(a >= 0.0)) throw std::invalid_argument("AmplitudeSeries: amplitude must be >= 0");
    times.push_back(t);
    amplitude.push_back(a);
  }
};

/// Max over cells and components of |E| (default), or the RMS of |E| over cells.
template <int D>
double field_amplitude(const VectorField<D>& e, AmplitudeNorm norm = AmplitudeNorm::Max) {
  if (norm == AmplitudeNorm::Max) return e.max_abs();
  const std::size_t n = e.mesh().size();
  double s = 0.0;
  for (std::size_t c = 0; c < n; ++c)
    for (int d = 0; d < D; ++d) s += e[d][c] * e[d][c];
  return std::sqrt(s / static_cast<double>(n));
}

namespace io {

inline void write_amplitude_csv(std::ostream& os, const AmplitudeSeries& s) {
  os << "time,amplitude\n" << std::setprecision(17);
  for (std::size_t i = 0; i < s.size(); ++i) os << s.times[i] << ',' << s.amplitude[i] << '\n';
}

inline AmplitudeSeries read_amplitude_csv(std::istream& is) {
  AmplitudeSeries s;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("time", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("amplitude csv: expected 'time,amplitude' rows");
    s.push(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return s;
}

}  // namespace io

// ---------------------------------------------------------------------------
// Damping fit

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitOptions {
  double t_begin = 0.0;
  double t_end = 20.0;
  bool exclude_first_peak = true;
  // A peak must be the largest sample within +-min_separation time units.
  double min_separation = 0.5;
};

struct DampingFit {
  double gamma = 0.0;
  double omega = 0.0;
  std::vector<double> peak_times;
  std::vector<double> peak_values;
};

struct Peaks {
  std::vector<double> times;
  std::vector<double> values;
};

/// Local maxima of the series inside [t_begin, t_end], refined by a parabola
/// through the three samples around each maximum.
inline Peaks find_peaks(const AmplitudeSeries& s, double t_begin, double t_end, double min_separation) {
  Peaks out;
  const auto& t = s.times;
  const auto& a = s.amplitude;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (t[i] < t_begin || t[i] > t_end) continue;
    if (!(a[i] > a[i - 1] && a[i] >= a[i + 1])) continue;
    bool dominant = true;
    for (std::size_t j = i; j-- > 0 && t[i] - t[j] <= min_separation;)
      if (a[j] > a[i]) dominant = false;
    for (std::size_t j = i + 1; j < s.size() && t[j] - t[i] <= min_separation; ++j)
      if (a[j] > a[i]) dominant = false;
    if (!dominant) continue;

    const double h = 0.5 * (t[i + 1] - t[i - 1]);
    const double den = a[i - 1] - 2.0 * a[i] + a[i + 1];
    double shift = 0.0;
    if (den < 0.0) shift = std::clamp(0.5 * (a[i - 1] - a[i + 1]) / den, -0.5, 0.5);
    out.times.push_back(t[i] + shift * h);
    out.values.push_back(a[i] - 0.25 * (a[i - 1] - a[i + 1]) * shift);
  }
  return out;
}

/// Least-squares line y = intercept + slope x.
struct LineFit {
  double slope;
  double intercept;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

/// For |E| ~ A e^{-gamma t} |cos(omega t + phase)|: gamma is minus the slope of
/// log(peak amplitude) against peak time, omega = pi / mean peak spacing.
inline DampingFit fit_damping(const AmplitudeSeries& s, const FitOptions& opt = {}) {
  if (s.size() < 3) throw FitError("fit_damping: amplitude series has fewer than 3 samples");
  auto peaks = find_peaks(s, opt.t_begin, opt.t_end, opt.min_separation);
  if (peaks.times.size() < 4)
    throw FitError("fit_damping: found " + std::to_string(peaks.times.size()) + " peaks in [" +
                   std::to_string(opt.t_begin) + ", " + std::to_string(opt.t_end) + "], need at least 4");
  if (opt.exclude_first_peak) {
    peaks.times.erase(peaks.times.begin());
    peaks.values.erase(peaks.values.begin());
  }
  std::vector<double> logs;
  for (double v : peaks.values) {
    if (!(v > 0.0)) throw FitError("fit_damping: non-positive peak amplitude");
    logs.push_back(std::log(v));
  }
  DampingFit fit;
  fit.gamma = -fit_line(peaks.times, logs).slope;
  const double spacing = (peaks.times.back() - peaks.times.front()) / static_cast<double>(peaks.times.size() - 1);
  fit.omega = std::numbers::pi / spacing;
  fit.peak_times = std::move(peaks.times);
  fit.peak_values = std::move(peaks.values);
  return fit;
}

struct EnvelopeCheck {
  double amplitude = 0.0;  // C in C e^{-gamma t}
  double max_deviation = 0.0;
  double worst_time = 0.0;
  std::vector<double> peak_times;
  std::vector<double> deviations;  // |peak / envelope - 1|
};

/// Compares series peaks with the decay envelope C e^{-gamma t}. C is the
/// log-mean of peak_i e^{gamma t_i} over peaks in the anchor window; the
/// deviation is measured at every peak in the check window.
inline EnvelopeCheck envelope_deviation(const AmplitudeSeries& s, double gamma, double anchor_begin, double anchor_end,
                                        double check_begin, double check_end, double min_separation = 0.5) {
  const auto anchor = find_peaks(s, anchor_begin, anchor_end, min_separation);
  if (anchor.times.empty()) throw FitError("envelope_deviation: no peaks in the anchor window");
  double acc = 0.0;
  for (std::size_t i = 0; i < anchor.times.size(); ++i) {
    if (!(anchor.values[i] > 0.0)) throw FitError("envelope_deviation: non-positive anchor peak");
    acc += std::log(anchor.values[i]) + gamma * anchor.times[i];
  }
  EnvelopeCheck out;
  out.amplitude = std::exp(acc / static_cast<double>(anchor.times.size()));
  const auto peaks = find_peaks(s, check_begin, check_end, min_separation);
  if (peaks.times.empty()) throw FitError("envelope_deviation: no peaks in the check window");
  for (std::size_t i = 0; i < peaks.times.size(); ++i) {
    const double dev = std::abs(peaks.values[i] / (out.amplitude * std::exp(-gamma * peaks.times[i])) - 1.0);
    out.peak_times.push_back(peaks.times[i]);
    out.deviations.push_back(dev);
    if (dev > out.max_deviation) {
      out.max_deviation = dev;
      out.worst_time = peaks.times[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Periodic cubic spline on uniform cell-centered samples

/// Interpolating cubic spline through y_i at x_i = origin + i h, periodic
/// with period n h.
class PeriodicSpline {
 public:
  PeriodicSpline(std::vector<double> y, double origin, double h) : y_(std::move(y)), origin_(origin), h_(h) {
    const std::size_t n = y_.size();
    if (n < 3) throw std::invalid_argument("PeriodicSpline: need at least 3 samples");
    // Second derivatives from the cyclic system M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / h^2,
    // solved with Sherman-Morrison around a tridiagonal Thomas sweep.
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i)
      rhs[i] = 6.0 * (y_[(i + 1) % n] - 2.0 * y_[i] + y_[(i + n - 1) % n]) / (h_ * h_);
    const double gamma = -4.0;
    std::vector<double> diag(n, 4.0);
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    const auto x = thomas(diag, rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = 1.0;
    const auto z = thomas(diag, u);
    const double fact = (x[0] + x[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
    m_.resize(n);
    for (std::size_t i = 0; i < n; ++i) m_[i] = x[i] - fact * z[i];
  }

  double operator()(double x) const {
    const auto n = static_cast<long long>(y_.size());
    const double u = (x - origin_) / h_;
    const double fl = std::floor(u);
    const double t = u - fl;
    long long i = static_cast<long long>(fl) % n;
    if (i < 0) i += n;
    const long long j = (i + 1) % n;
    const double a = 1.0 - t;
    return a * y_[i] + t * y_[j] + h_ * h_ / 6.0 * ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[j]);
  }

 private:
  static std::vector<double> thomas(const std::vector<double>& diag, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n);
    c[0] = 1.0 / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = diag[i] - c[i - 1];
      c[i] = 1.0 / m;
      d[i] = (rhs[i] - d[i - 1]) / m;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
  }

  std::vector<double> y_;
  std::vector<double> m_;
  double origin_;
  double h_;
};

namespace detail {

template <int D>
void check_nested(const Mesh<D>& coarse, const Mesh<D>& fine) {
  for (int d = 0; d < D; ++d) {
    const int nc = coarse.n_cells(d), nf = fine.n_cells(d);
    if (nf < nc || nf % nc != 0 || std::abs(coarse.length(d) - fine.length(d)) > 1e-12 * fine.length(d))
      throw std::invalid_argument("resample_field: meshes are not nested refinements of the same domain");
  }
}

}  // namespace detail

/// Periodic cubic-spline interpolation of a scalar field from coarse cell
/// centers to the centers of a nested finer mesh, one dimension at a time.
template <int D>
ScalarField<D> resample_scalar(const ScalarField<D>& coarse, const Mesh<D>& target) {
  const auto& cm = coarse.mesh();
  detail::check_nested(cm, target);
  if constexpr (D == 1) {
    const PeriodicSpline sp(coarse.values(), 0.5 * cm.dx(0), cm.dx(0));
    return ScalarField<1>::sample(target, [&](const Vec<1>& x) { return sp(x[0]); });
  } else {
    const int nc0 = cm.n_cells(0), nc1 = cm.n_cells(1);
    const int nf0 = target.n_cells(0), nf1 = target.n_cells(1);
    // along dim 1 for every coarse row
    std::vector<double> mid(static_cast<std::size_t>(nc0) * nf1);
    for (int i = 0; i < nc0; ++i) {
      std::vector<double> row(coarse.values().begin() + static_cast<std::ptrdiff_t>(i) * nc1,
                              coarse.values().begin() + static_cast<std::ptrdiff_t>(i + 1) * nc1);
      const PeriodicSpline sp(std::move(row), 0.5 * cm.dx(1), cm.dx(1));
      for (int j = 0; j < nf1; ++j) mid[static_cast<std::size_t>(i) * nf1 + j] = sp(target.center(1, j));
    }
    ScalarField<2> out(target);
    for (int j = 0; j < nf1; ++j) {
      std::vector<double> col(nc0);
      for (int i = 0; i < nc0; ++i) col[i] = mid[static_cast<std::size_t>(i) * nf1 + j];
      const PeriodicSpline sp(std::move(col), 0.5 * cm.dx(0), cm.dx(0));
      for (int i = 0; i < nf0; ++i) out.at({i, j}) = sp(target.center(0, i));
    }
    return out;
  }
}

template <int D>
VectorField<D> resample_field(const VectorField<D>& coarse, const Mesh<D>& target) {
  VectorField<D> out(target);
  for (int d = 0; d < D; ++d) out[d] = resample_scalar(coarse[d], target);
  return out;
}

/// max-norm of E_h - I(E_2h), with E_2h spline-resampled to the mesh of E_h.
template <int D>
double richardson_error(const VectorField<D>& fine, const VectorField<D>& coarse) {
  const auto& fm = fine.mesh();
  if (!(coarse.mesh() == fm.coarsened()))
    throw std::invalid_argument("richardson_error: coarse field is not on the 2x coarsened mesh");
  const auto interp = resample_field(coarse, fm);
  double e = 0.0;
  for (int d = 0; d < D; ++d)
    for (std::size_t c = 0; c < fm.size(); ++c) e = std::max(e, std::abs(fine[d][c] - interp[d][c]));
  return e;
}

/// q = log2(e_2h / e_h).
inline double convergence_order(double e_2h, double e_h) {
  if (!(e_2h > 0.0) || !(e_h > 0.0))
    throw std::invalid_argument("convergence_order: errors must be positive (got " + std::to_string(e_2h) + ", " +
                                std::to_string(e_h) + ")");
  return std::log2(e_2h / e_h);
}

// ---------------------------------------------------------------------------
// Phase-space image

struct PhaseSpaceImage {
  int n_x = 0, n_v = 0;
  double length = 0.0, v_max = 0.0;
  std::vector<double> values;  // n_x rows of n_v values

  double dx() const { return length / n_x; }
  double dv() const { return 2.0 * v_max / n_v; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_v + j]; }
  double sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }
};

/// W6 deposit of the particles onto an (x_d, v_d) grid covering [0, L_d) x
/// [-v_max, v_max], integrating over all other phase-space coordinates.
template <int D>
PhaseSpaceImage phase_space_image(const ParticleSet<D>& ps, int x_dim, int v_dim, int n_x, int n_v, double v_max) {
  if (x_dim < 0 || x_dim >= D || v_dim < 0 || v_dim >= D)
    throw std::invalid_argument("phase_space_image: axis out of range");
  if (n_x < 1 || n_v < 1 || !(v_max > 0.0)) throw std::invalid_argument("phase_space_image: invalid grid");
  using K = Kernel<KernelId::W6>;
  PhaseSpaceImage img;
  img.n_x = n_x;
  img.n_v = n_v;
  img.length = ps.length[x_dim];
  img.v_max = v_max;
  img.values.assign(static_cast<std::size_t>(n_x) * n_v, 0.0);
  const double dx = img.dx(), dv = img.dv();
  const double inv = 1.0 / (dx * dv);
  for (const auto& p : ps.particles) {
    const auto hx = detail::home_cell(p.x[x_dim], 0.0, dx);
    const auto hv = detail::home_cell(p.v[v_dim], -v_max, dv);
    std::array<double, K::width> wx, wv;
    K::weights(hx.s, wx.data());
    K::weights(hv.s, wv.data());
    for (int a = 0; a < K::width; ++a) {
      int i = (hx.home - K::radius + 1 + a) % n_x;
      if (i < 0) i += n_x;
      for (int b = 0; b < K::width; ++b) {
        const int j = hv.home - K::radius + 1 + b;
        if (j < 0 || j >= n_v) continue;
        img.values[static_cast<std::size_t>(i) * n_v + j] += p.q * inv * wx[a] * wv[b];
      }
    }
  }
  return img;
}

namespace io {

inline void write_phase_space_image(std::ostream& os, const PhaseSpaceImage& img) {
  os << std::setprecision(17) << "# phase_space_image n_x=" << img.n_x << " n_v=" << img.n_v << " dx=" << img.dx()
     << " dv=" << img.dv() << " L=" << img.length << " v_max=" << img.v_max << '\n';
  for (int i = 0; i < img.n_x; ++i) {
    for (int j = 0; j < img.n_v; ++j) os << (j ? "," : "") << img.at(i, j);
    os << '\n';
  }
}

}  // namespace io

// ---------------------------------------------------------------------------
// Convergence report

struct ConvergenceReport {
  std::vector<Resolution> levels;
  std::vector<double> times;
  // errors[k][t]: Richardson error between levels k and k+1 at times[t]
  std::vector<std::vector<double>> errors;
  // orders[k][t]: log2(errors[k][t] / errors[k+1][t]); NaN where undefined
  std::vector<std::vector<double>> orders;

  static ConvergenceReport from_errors(std::vector<Resolution> levels, std::vector<double> times,
                                       std::vector<std::vector<double>> errors) {
    ConvergenceReport r{std::move(levels), std::move(times), std::move(errors), {}};
    for (std::size_t k = 0; k + 1 < r.errors.size(); ++k) {
      std::vector<double> q(r.times.size(), std::numeric_limits<double>::quiet_NaN());
      for (std::size_t t = 0; t < r.times.size(); ++t)
        if (r.errors[k][t] > 0.0 && r.errors[k + 1][t] > 0.0) q[t] = convergence_order(r.errors[k][t], r.errors[k + 1][t]);
      r.orders.push_back(std::move(q));
    }
    return r;
  }
};

namespace io {

/// time, e_<n0>_<n1> per consecutive pair, q_<pair k>_<pair k+1> per pair of pairs.
inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& r) {
  os << "time";
  for (std::size_t k = 0; k < r.errors.size(); ++k)
    os << ",e_" << r.levels[k].n_cells << "_" << r.levels[k + 1].n_cells;
  for (std::size_t k = 0; k < r.orders.size(); ++k) os << ",q_" << r.levels[k + 1].n_cells << "_" << r.levels[k + 2].n_cells;
  os << '\n' << std::setprecision(17);
  for (std::size_t t = 0; t < r.times.size(); ++t) {
    os << r.times[t];
    for (const auto& e : r.errors) os << ',' << e[t];
    for (const auto& q : r.orders) os << ',' << q[t];
    os << '\n';
  }
}

}  // namespace io
}  // namespace hopic
