#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hopic {

template <int D>
using Vec = std::array<double, D>;

/// Periodic, cell-centered Cartesian mesh on [0, L_0) x ... x [0, L_{D-1}).
/// Cell i has its center at (i + 1/2) dx.
template <int D>
class Mesh {
  static_assert(D == 1 || D == 2, "only 1D and 2D meshes are supported");

 public:
  static constexpr int dims = D;

  Mesh() = default;

  Mesh(std::array<int, D> n_cells, Vec<D> length) : n_(n_cells), length_(length) {
    for (int d = 0; d < D; ++d) {
      const int n = n_[d];
      if (n < 4 || (n & (n - 1)) != 0)
        throw std::invalid_argument("Mesh: n_cells must be a power of two >= 4, got " + std::to_string(n));
      if (!(length_[d] > 0.0) || !std::isfinite(length_[d]))
        throw std::invalid_argument("Mesh: domain length must be positive");
      dx_[d] = length_[d] / n;
    }
  }

  /// Same cell count and length in every dimension.
  static Mesh uniform(int n_cells, double length) {
    std::array<int, D> n;
    Vec<D> l;
    n.fill(n_cells);
    l.fill(length);
    return Mesh(n, l);
  }

  const std::array<int, D>& n_cells() const { return n_; }
  int n_cells(int d) const { return n_[d]; }
  const Vec<D>& dx() const { return dx_; }
  double dx(int d) const { return dx_[d]; }
  const Vec<D>& length() const { return length_; }
  double length(int d) const { return length_[d]; }

  double cell_volume() const {
    double v = 1.0;
    for (double h : dx_) v *= h;
    return v;
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int n : n_) s *= static_cast<std::size_t>(n);
    return s;
  }

  double center(int d, int i) const { return (i + 0.5) * dx_[d]; }

  /// Row-major flat index, last dimension fastest.
  std::size_t index(const std::array<int, D>& i) const {
    if constexpr (D == 1) {
      return static_cast<std::size_t>(i[0]);
    } else {
      return static_cast<std::size_t>(i[0]) * n_[1] + i[1];
    }
  }

  std::array<int, D> multi_index(std::size_t flat) const {
    std::array<int, D> i{};
    for (int d = D - 1; d >= 0; --d) {
      i[d] = static_cast<int>(flat % n_[d]);
      flat /= n_[d];
    }
    return i;
  }

  /// Wraps any integer index into [0, n).
  int wrap(int d, int i) const { return i & (n_[d] - 1); }

  bool coarsenable() const {
    return std::all_of(n_.begin(), n_.end(), [](int n) { return n >= 8; });
  }

  Mesh coarsened() const {
    std::array<int, D> n;
    for (int d = 0; d < D; ++d) n[d] = n_[d] / 2;
    return Mesh(n, length_);
  }

  Mesh refined() const {
    std::array<int, D> n;
    for (int d = 0; d < D; ++d) n[d] = n_[d] * 2;
    return Mesh(n, length_);
  }

  friend bool operator==(const Mesh& a, const Mesh& b) {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  std::array<int, D> n_{};
  Vec<D> length_{};
  Vec<D> dx_{};
};

template <int D>
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Mesh<D> mesh, double value = 0.0) : mesh_(mesh), values_(mesh.size(), value) {}

  /// Samples `fn(cell center)` at every cell.
  template <class Fn>
  static ScalarField sample(const Mesh<D>& mesh, Fn&& fn) {
    ScalarField f(mesh);
    for (std::size_t c = 0; c < f.size(); ++c) {
      const auto i = mesh.multi_index(c);
      Vec<D> x;
      for (int d = 0; d < D; ++d) x[d] = mesh.center(d, i[d]);
      f[c] = fn(x);
    }
    return f;
  }

  const Mesh<D>& mesh() const { return mesh_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t c) { return values_[c]; }
  double operator[](std::size_t c) const { return values_[c]; }
  double& at(const std::array<int, D>& i) { return values_[mesh_.index(i)]; }
  double at(const std::array<int, D>& i) const { return values_[mesh_.index(i)]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }
  double mean() const { return values_.empty() ? 0.0 : sum() / static_cast<double>(values_.size()); }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  void subtract_mean() {
    const double m = mean();
    for (double& v : values_) v -= m;
  }

 private:
  Mesh<D> mesh_;
  std::vector<double> values_;
};

template <int D>
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(Mesh<D> mesh) : mesh_(mesh) { components_.fill(ScalarField<D>(mesh)); }

  const Mesh<D>& mesh() const { return mesh_; }
  ScalarField<D>& operator[](int d) { return components_[d]; }
  const ScalarField<D>& operator[](int d) const { return components_[d]; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : components_) m = std::max(m, c.max_abs());
    return m;
  }

 private:
  Mesh<D> mesh_;
  std::array<ScalarField<D>, D> components_;
};

// Grid dump format (text):
//   # field D=<D> n_cells=<n0>[x<n1>] dx=<dx0>[x<dx1>] components=<c>
//   one line per cell in row-major order, c comma-separated values per line
namespace io {

template <int D>
void write_grid(std::ostream& os, const Mesh<D>& mesh, const std::vector<const ScalarField<D>*>& comps) {
  os << "# field D=" << D << " n_cells=";
  for (int d = 0; d < D; ++d) os << (d ? "x" : "") << mesh.n_cells(d);
  os << " dx=" << std::setprecision(17);
  for (int d = 0; d < D; ++d) os << (d ? "x" : "") << mesh.dx(d);
  os << " components=" << comps.size() << '\n';
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    for (std::size_t k = 0; k < comps.size(); ++k) os << (k ? "," : "") << (*comps[k])[c];
    os << '\n';
  }
}

template <int D>
void write_field(std::ostream& os, const ScalarField<D>& f) {
  write_grid<D>(os, f.mesh(), {&f});
}

template <int D>
void write_field(std::ostream& os, const VectorField<D>& e) {
  std::vector<const ScalarField<D>*> comps;
  for (int d = 0; d < D; ++d) comps.push_back(&e[d]);
  write_grid<D>(os, e.mesh(), comps);
}

struct GridHeader {
  int dims = 0;
  std::vector<int> n_cells;
  std::vector<double> dx;
  int components = 0;
};

inline GridHeader parse_grid_header(const std::string& line) {
  GridHeader h;
  std::istringstream ss(line);
  std::string tok;
  ss >> tok >> tok;  // "#", "field"
  if (tok != "field") throw std::runtime_error("grid dump: missing '# field' header");
  auto split = [](const std::string& s, auto conv) {
    std::vector<decltype(conv(std::string{}))> out;
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto end = s.find('x', start);
      out.push_back(conv(s.substr(start, end - start)));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return out;
  };
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "D") h.dims = std::stoi(val);
    else if (key == "n_cells") h.n_cells = split(val, [](const std::string& s) { return std::stoi(s); });
    else if (key == "dx") h.dx = split(val, [](const std::string& s) { return std::stod(s); });
    else if (key == "components") h.components = std::stoi(val);
  }
  if (h.dims < 1 || static_cast<int>(h.n_cells.size()) != h.dims || static_cast<int>(h.dx.size()) != h.dims)
    throw std::runtime_error("grid dump: malformed header: " + line);
  return h;
}

/// Reads a dump written by write_field. Returns one ScalarField per component.
template <int D>
std::vector<ScalarField<D>> read_grid(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("grid dump: empty input");
  const auto h = parse_grid_header(line);
  if (h.dims != D) throw std::runtime_error("grid dump: dimension mismatch");
  std::array<int, D> n;
  Vec<D> len;
  for (int d = 0; d < D; ++d) {
    n[d] = h.n_cells[d];
    len[d] = h.dx[d] * h.n_cells[d];
  }
  const Mesh<D> mesh(n, len);
  std::vector<ScalarField<D>> comps(h.components, ScalarField<D>(mesh));
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    if (!std::getline(is, line)) throw std::runtime_error("grid dump: truncated data");
    std::istringstream row(line);
    for (int k = 0; k < h.components; ++k) {
      std::string cell;
      std::getline(row, cell, ',');
      comps[k][c] = std::stod(cell);
    }
  }
  return comps;
}

}  // namespace io
}  // namespace hopic
