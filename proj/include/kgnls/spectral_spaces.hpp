#pragma once

// Grids, discrete Fourier representations and weighted Sobolev norms for
// periodic, localized and mixed (periodic + localized) functions.
//
// Transform convention (used by every norm in this library):
//
//   periodic, period P = 2 pi / k0, nodes x_j = j dx:
//     vhat_m = P^{-1/2} dx sum_j v_j e^{-i m k0 x_j},      m in Z (signed)
//     v_j    = P^{-1/2} sum_m vhat_m e^{+i m k0 x_j}
//
//   line, length L, nodes x_i = -L/2 + i dx, kappa_m = 2 pi m / L:
//     what(kappa_m) = (2 pi)^{-1/2} dx sum_i w_i e^{-i kappa_m x_i}
//
// Both are unitary, so s = 0 norms equal the physical-space L^2 quadrature:
//   sum_m |vhat_m|^2 = dx sum_j |v_j|^2,
//   sum_m |what(kappa_m)|^2 dk = dx sum_i |w_i|^2.
//
// Norms use the weight (1 + k^2)^s inside the squared sum; for the periodic
// space k is the integer mode index, for the line k is the wavenumber.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgnls/error.hpp"
#include "kgnls/fft.hpp"

namespace kgnls {

using cplx = std::complex<double>;

/// Regularity index s >= 0 of H^s.
class SobolevIndex {
 public:
  explicit SobolevIndex(double s) : s_(s) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw DomainError("Sobolev index must be finite and >= 0, got " + std::to_string(s));
    }
  }
  double value() const noexcept { return s_; }
  /// Product estimates (algebra property) need s > 1/2.
  bool is_algebra() const noexcept { return s_ > 0.5; }

 private:
  double s_;
};

/// One period [0, 2 pi / k0) sampled at n_modes equispaced nodes.
class PeriodicGrid {
 public:
  PeriodicGrid(double k0, std::size_t n_modes) : k0_(k0), n_(n_modes) {
    if (!(k0 > 0.0) || !std::isfinite(k0)) throw DomainError("PeriodicGrid: k0 must be > 0");
    if (n_modes == 0 || n_modes % 2 != 0) {
      throw DomainError("PeriodicGrid: n_modes must be even and positive");
    }
  }

  double k0() const noexcept { return k0_; }
  std::size_t size() const noexcept { return n_; }
  double period() const noexcept { return 2.0 * std::numbers::pi / k0_; }
  double dx() const noexcept { return period() / static_cast<double>(n_); }
  double node(std::size_t j) const noexcept { return static_cast<double>(j) * dx(); }
  /// Signed integer mode index of FFT bin m.
  long mode_index(std::size_t m) const noexcept { return fft::signed_index(m, n_); }
  /// Physical wavenumber of FFT bin m (integer multiple of k0).
  double wavenumber(std::size_t m) const noexcept {
    return static_cast<double>(mode_index(m)) * k0_;
  }

  bool operator==(const PeriodicGrid&) const = default;

 private:
  double k0_;
  std::size_t n_;
};

/// Truncated line [-L/2, L/2) with n_points equispaced nodes, periodic closure.
class LineGrid {
 public:
  LineGrid(double length, std::size_t n_points) : length_(length), n_(n_points) {
    if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("LineGrid: length must be > 0");
    if (n_points == 0 || n_points % 2 != 0) {
      throw DomainError("LineGrid: n_points must be even and positive");
    }
  }

  /// Smallest grid commensurate with `cell` that covers at least min_length,
  /// using `refine` line nodes per periodic node.
  static LineGrid covering(const PeriodicGrid& cell, double min_length, std::size_t refine = 1) {
    if (refine == 0) throw DomainError("LineGrid::covering: refine must be >= 1");
    auto periods = static_cast<std::size_t>(std::ceil(min_length / cell.period() - 1e-9));
    periods = std::max<std::size_t>(periods, 1);
    return LineGrid(static_cast<double>(periods) * cell.period(), periods * cell.size() * refine);
  }

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return length_ / static_cast<double>(n_); }
  double dk() const noexcept { return 2.0 * std::numbers::pi / length_; }
  double node(std::size_t i) const noexcept {
    return -0.5 * length_ + static_cast<double>(i) * dx();
  }
  double wavenumber(std::size_t m) const noexcept {
    return static_cast<double>(fft::signed_index(m, n_)) * dk();
  }

  bool operator==(const LineGrid&) const = default;

 private:
  double length_;
  std::size_t n_;
};

/// Number of whole periods of `cell` in `line`; throws GeometryError otherwise.
inline std::size_t periods_in(const PeriodicGrid& cell, const LineGrid& line) {
  const double ratio = line.length() / cell.period();
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw GeometryError("line length " + std::to_string(line.length()) +
                        " is not a multiple of the period " + std::to_string(cell.period()));
  }
  return static_cast<std::size_t>(rounded);
}

/// Line nodes per periodic node; throws GeometryError when not an integer.
inline std::size_t refinement_of(const PeriodicGrid& cell, const LineGrid& line) {
  const std::size_t periods = periods_in(cell, line);
  if (line.size() % periods != 0 || (line.size() / periods) % cell.size() != 0) {
    throw GeometryError("line node count " + std::to_string(line.size()) +
                        " is not a multiple of n_modes per period");
  }
  return line.size() / periods / cell.size();
}

namespace detail {

inline void require_finite(std::span<const cplx> values, const char* who) {
  for (const auto& z : values) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw InvalidFieldError(std::string(who) + ": non-finite sample");
    }
  }
}

}  // namespace detail

/// Complex samples of a 2 pi / k0 periodic function on one period.
class PeriodicField {
 public:
  PeriodicField(PeriodicGrid grid, std::vector<cplx> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw GeometryError("PeriodicField: size mismatch");
  }

  static PeriodicField zeros(const PeriodicGrid& grid) {
    return {grid, std::vector<cplx>(grid.size())};
  }

  template <class F>
  static PeriodicField sample(const PeriodicGrid& grid, F&& f) {
    std::vector<cplx> values(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) values[j] = f(grid.node(j));
    return {grid, std::move(values)};
  }

  /// Build from unitary coefficients vhat (FFT bin order).
  static PeriodicField from_coefficients(const PeriodicGrid& grid, std::span<const cplx> coeffs) {
    if (coeffs.size() != grid.size()) throw GeometryError("PeriodicField: coefficient size mismatch");
    auto values = fft::backward(coeffs);
    const double scale = 1.0 / std::sqrt(grid.period());
    for (auto& z : values) z *= scale;
    return {grid, std::move(values)};
  }

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  cplx operator[](std::size_t j) const { return values_[j]; }

  /// Unitary coefficients vhat_m in FFT bin order.
  std::vector<cplx> coefficients() const {
    auto c = fft::forward(values_);
    const double scale = grid_.dx() / std::sqrt(grid_.period());
    for (auto& z : c) z *= scale;
    return c;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : values_) m = std::max(m, std::abs(z));
    return m;
  }

 private:
  PeriodicGrid grid_;
  std::vector<cplx> values_;
};

/// Complex samples of a localized function on a truncated line.
class LineField {
 public:
  LineField(LineGrid grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw GeometryError("LineField: size mismatch");
  }

  static LineField zeros(const LineGrid& grid) { return {grid, std::vector<cplx>(grid.size())}; }

  template <class F>
  static LineField sample(const LineGrid& grid, F&& f) {
    std::vector<cplx> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = f(grid.node(i));
    return {grid, std::move(values)};
  }

  /// Build from continuum-scaled coefficients what(kappa_m) (FFT bin order).
  static LineField from_coefficients(const LineGrid& grid, std::span<const cplx> coeffs) {
    if (coeffs.size() != grid.size()) throw GeometryError("LineField: coefficient size mismatch");
    std::vector<cplx> spec(coeffs.begin(), coeffs.end());
    for (std::size_t m = 0; m < spec.size(); ++m) {
      if (fft::signed_index(m, spec.size()) % 2 != 0) spec[m] = -spec[m];
    }
    fft::backward_inplace(spec);
    const double scale = std::sqrt(2.0 * std::numbers::pi) / grid.length();
    for (auto& z : spec) z *= scale;
    return {grid, std::move(spec)};
  }

  const LineGrid& grid() const noexcept { return grid_; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  cplx operator[](std::size_t i) const { return values_[i]; }

  /// Continuum-scaled coefficients what(kappa_m) in FFT bin order.
  std::vector<cplx> coefficients() const {
    auto c = fft::forward(values_);
    const double scale = grid_.dx() / std::sqrt(2.0 * std::numbers::pi);
    // e^{+i kappa_m L/2} = (-1)^m accounts for the node offset -L/2.
    for (std::size_t m = 0; m < c.size(); ++m) {
      c[m] *= (fft::signed_index(m, c.size()) % 2 == 0) ? scale : -scale;
    }
    return c;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : values_) m = std::max(m, std::abs(z));
    return m;
  }

 private:
  LineGrid grid_;
  std::vector<cplx> values_;
};

/// u = v + w with v periodic and w localized on a commensurate line.
class MixedField {
 public:
  MixedField(PeriodicField periodic, LineField localized)
      : periodic_(std::move(periodic)), localized_(std::move(localized)) {
    periods_in(periodic_.grid(), localized_.grid());
  }

  const PeriodicField& periodic_part() const noexcept { return periodic_; }
  const LineField& localized_part() const noexcept { return localized_; }

 private:
  PeriodicField periodic_;
  LineField localized_;
};

/// ||v||_{H^s_per} = (sum_m (1+m^2)^s |vhat_m|^2)^{1/2}.
inline double periodic_norm(const PeriodicField& v, SobolevIndex s) {
  detail::require_finite(v.values(), "periodic_norm");
  const auto c = v.coefficients();
  double acc = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double k = static_cast<double>(v.grid().mode_index(m));
    acc += std::pow(1.0 + k * k, s.value()) * std::norm(c[m]);
  }
  return std::sqrt(acc);
}

/// ||w||_{H^s} = (int (1+k^2)^s |what(k)|^2 dk)^{1/2}, rectangle rule in k.
inline double line_norm(const LineField& w, SobolevIndex s) {
  detail::require_finite(w.values(), "line_norm");
  const auto c = w.coefficients();
  double acc = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double k = w.grid().wavenumber(m);
    acc += std::pow(1.0 + k * k, s.value()) * std::norm(c[m]);
  }
  return std::sqrt(acc * w.grid().dk());
}

/// ||u||_{M^s} = ||v||_{H^s_per} + ||w||_{H^s}.
inline double mixed_norm(const MixedField& u, SobolevIndex s) {
  return periodic_norm(u.periodic_part(), s) + line_norm(u.localized_part(), s);
}

inline double mixed_norm(const PeriodicField& v, const LineField& w, SobolevIndex s) {
  return mixed_norm(MixedField(v, w), s);
}

/// Plain dx-weighted L^2 quadrature of samples.
inline double l2_quadrature(std::span<const cplx> values, double dx) {
  double acc = 0.0;
  for (const auto& z : values) acc += std::norm(z);
  return std::sqrt(acc * dx);
}

/// Trigonometric interpolant of v on a grid with `factor` times as many nodes.
inline PeriodicField refine(const PeriodicField& v, std::size_t factor) {
  if (factor == 1) return v;
  const PeriodicGrid fine(v.grid().k0(), v.size() * factor);
  auto spec = fft::forward(v.values());
  auto padded = fft::pad_spectrum(spec, fine.size());
  fft::backward_inplace(padded);
  const double scale = 1.0 / static_cast<double>(v.size());
  for (auto& z : padded) z *= scale;
  return {fine, std::move(padded)};
}

inline LineField refine(const LineField& w, std::size_t factor) {
  if (factor == 1) return w;
  const LineGrid fine(w.grid().length(), w.size() * factor);
  auto spec = fft::forward(w.values());
  // Both grids start at -L/2, so bin phases carry over unchanged.
  auto padded = fft::pad_spectrum(spec, fine.size());
  fft::backward_inplace(padded);
  const double scale = 1.0 / static_cast<double>(w.size());
  for (auto& z : padded) z *= scale;
  return {fine, std::move(padded)};
}

/// Samples of the periodic extension of v at the nodes of g.
inline LineField restrict_periodic_to_line(const PeriodicField& v, const LineGrid& g) {
  const std::size_t periods = periods_in(v.grid(), g);
  const std::size_t factor = refinement_of(v.grid(), g);
  const PeriodicField cell = refine(v, factor);
  const std::size_t nf = cell.size();
  // Line node i sits at x = -L/2 + i dx = (offset + i) dx modulo the period.
  const long total = static_cast<long>(periods * nf);
  const long nfl = static_cast<long>(nf);
  const std::size_t offset = static_cast<std::size_t>(((-total / 2) % nfl + nfl) % nfl);
  std::vector<cplx> values(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) values[i] = cell[(offset + i) % nf];
  return {g, std::move(values)};
}

/// Pointwise product of band-limited fields evaluated exactly on a 2x grid.
inline LineField padded_product(const LineField& a, const LineField& b) {
  if (!(a.grid() == b.grid())) throw GeometryError("padded_product: grid mismatch");
  const auto fa = refine(a, 2);
  const auto fb = refine(b, 2);
  std::vector<cplx> out(fa.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fa[i] * fb[i];
  return {fa.grid(), std::move(out)};
}

/// ||v w||_{H^s} / (||v||_{H^s_per} ||w||_{H^s}); the product is formed on a
/// 2x refined line so no aliasing enters the numerator.
inline double product_estimate_probe(const PeriodicField& v, const LineField& w, SobolevIndex s) {
  if (!s.is_algebra()) throw DomainError("product_estimate_probe requires s > 1/2");
  const double nv = periodic_norm(v, s);
  const double nw = line_norm(w, s);
  if (nv == 0.0 || nw == 0.0) throw DomainError("product_estimate_probe: zero factor");
  const auto vl = restrict_periodic_to_line(v, w.grid());
  return line_norm(padded_product(vl, w), s) / (nv * nw);
}

/// Spectral derivative of order `order` (multiplication by (i k)^order).
inline PeriodicField derivative(const PeriodicField& v, int order) {
  auto spec = fft::forward(v.values());
  const double scale = 1.0 / static_cast<double>(v.size());
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const cplx ik{0.0, v.grid().wavenumber(m)};
    spec[m] *= std::pow(ik, order) * scale;
  }
  fft::backward_inplace(spec);
  return {v.grid(), std::move(spec)};
}

inline LineField derivative(const LineField& w, int order) {
  auto spec = fft::forward(w.values());
  const double scale = 1.0 / static_cast<double>(w.size());
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const cplx ik{0.0, w.grid().wavenumber(m)};
    spec[m] *= std::pow(ik, order) * scale;
  }
  fft::backward_inplace(spec);
  return {w.grid(), std::move(spec)};
}

/// Debug dump, columns x,re,im.
template <class Field>
void write_csv(std::ostream& out, const Field& f) {
  out << "x,re,im\n";
  out.precision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << f.grid().node(i) << ',' << f[i].real() << ',' << f[i].imag() << '\n';
  }
}

}  // namespace kgnls
