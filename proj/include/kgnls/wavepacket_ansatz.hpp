#pragma once

// Improved two-part wave-packet approximation of the cubic Klein-Gordon
// equation u_tt = u_xx - u + u^3:
//
//   eps Psi = eps A(X,T) E + eps^3 A3(X,T) E^3 + c.c.,
//   E = e^{i(k0 x - omega0 t)},  X = eps (x - cg t),  T = eps^2 t,
//
// with A = A_v + A_w split into the spatially constant background and the
// localized remainder. eps Psi_v lives on one carrier period, eps Psi_w on a
// truncated line. Time derivatives are exact: the envelope jets supply every
// partial in (X, T) and the chain rule d/dt = -eps cg d/dX + eps^2 d/dT is
// applied analytically.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "kgnls/error.hpp"
#include "kgnls/jet.hpp"
#include "kgnls/nls_library.hpp"
#include "kgnls/params.hpp"
#include "kgnls/spectral_spaces.hpp"

namespace kgnls {

/// A3 from 0 = (9k0^2 - 9 omega0^2 + 1) A3 - A^3, split into the constant part
/// and the localized part. The symbol equals -8 under the dispersion relation.
template <class S>
std::pair<S, S> third_harmonic_split(const S& av, const S& aw, double symbol) {
  const S a3v = av * av * av / symbol;
  const S a3w = (3.0 * av * av * aw + 3.0 * av * aw * aw + aw * aw * aw) / symbol;
  return {a3v, a3w};
}

inline std::pair<cplx, LineField> third_harmonic(cplx av, const LineField& aw,
                                                 const PhysicalParams& p = PhysicalParams{}) {
  const double symbol = p.third_harmonic_symbol();
  std::vector<cplx> out(aw.size());
  cplx a3v{};
  for (std::size_t i = 0; i < aw.size(); ++i) {
    auto [v, w] = third_harmonic_split(av, aw[i], symbol);
    a3v = v;
    out[i] = w;
  }
  if (aw.size() == 0) a3v = av * av * av / symbol;
  return {a3v, LineField(aw.grid(), std::move(out))};
}

/// Periodic cell plus the commensurate line used for the localized part.
struct AnsatzGeometry {
  PeriodicGrid cell;
  LineGrid line;

  /// One carrier period at n_modes nodes and a line of slow length >= slow_length
  /// at the same node spacing.
  static AnsatzGeometry make(const PhysicalParams& p, std::size_t n_modes, double slow_length) {
    if (!(slow_length > 0.0)) throw DomainError("AnsatzGeometry: slow_length must be > 0");
    PeriodicGrid cell(p.k0, n_modes);
    return {cell, LineGrid::covering(cell, slow_length / p.epsilon)};
  }

  double slow_length(const PhysicalParams& p) const { return p.epsilon * line.length(); }
};

struct AnsatzOptions {
  bool third_harmonic = true;
  double carrier_phase = 0.0;  // E -> e^{i phase} E
};

/// eps Psi_v and eps Psi_w at one time with exact time derivatives.
struct AnsatzState {
  double t = 0.0;
  PeriodicField psi_v;
  PeriodicField d_psi_v;
  LineField psi_w;
  LineField d_psi_w;
  std::optional<PeriodicField> dd_psi_v;  // d2/dt2
  std::optional<LineField> dd_psi_w;      // d2/dt2
  std::optional<LineField> psi_w_xx;      // d2/dx2, analytic
  /// |A_w| at the line boundary divided by max |A_w|.
  double boundary_ratio = 0.0;
};

namespace detail {

struct WaveDerivs {
  cplx value;
  cplx dt;
  cplx dtt;
  cplx dxx;
};

/// Derivatives of F(X,T) E^n with X = eps(x - cg t), T = eps^2 t.
inline WaveDerivs harmonic(const Jet2& f, int n, const PhysicalParams& p, cplx carrier_n) {
  const double e = p.epsilon;
  const double e2 = e * e;
  const cplx in_w = kI * (static_cast<double>(n) * p.omega0);
  const cplx in_k = kI * (static_cast<double>(n) * p.k0);
  const cplx slow_t = -e * p.cg * f.x + e2 * f.t;
  const cplx slow_tt = e2 * p.cg * p.cg * f.xx - 2.0 * e2 * e * p.cg * f.xt + e2 * e2 * f.tt;
  WaveDerivs d;
  d.value = f.v * carrier_n;
  d.dt = (slow_t - in_w * f.v) * carrier_n;
  d.dtt = (slow_tt - 2.0 * in_w * slow_t + in_w * in_w * f.v) * carrier_n;
  d.dxx = (e2 * f.xx + 2.0 * in_k * e * f.x + in_k * in_k * f.v) * carrier_n;
  return d;
}

/// Real field 2 Re(eps a1 E + eps^3 a3 E^3) and its derivatives.
inline WaveDerivs assemble(const Jet2& a1, const Jet2& a3, const PhysicalParams& p, double x, double t,
                           bool with_third, double phase = 0.0) {
  const double e = p.epsilon;
  const cplx carrier = std::exp(kI * (p.k0 * x - p.omega0 * t + phase));
  const WaveDerivs h1 = harmonic(a1, 1, p, carrier);
  WaveDerivs out{e * h1.value, e * h1.dt, e * h1.dtt, e * h1.dxx};
  if (with_third) {
    const WaveDerivs h3 = harmonic(a3, 3, p, carrier * carrier * carrier);
    const double e3 = e * e * e;
    out.value += e3 * h3.value;
    out.dt += e3 * h3.dt;
    out.dtt += e3 * h3.dtt;
    out.dxx += e3 * h3.dxx;
  }
  return {2.0 * out.value.real(), 2.0 * out.dt.real(), 2.0 * out.dtt.real(), 2.0 * out.dxx.real()};
}

}  // namespace detail

/// Wrap into [-L/2, L/2).
inline double wrap_centered(double x, double length) {
  double y = std::fmod(x + 0.5 * length, length);
  if (y < 0.0) y += length;
  return y - 0.5 * length;
}

/// Builds eps Psi_v / eps Psi_w for a certified closed-form envelope. The
/// localized envelope is evaluated at the slow coordinate wrapped onto the
/// truncated line, i.e. periodic truncation in X.
class WavePacketAnsatz {
 public:
  WavePacketAnsatz(PhysicalParams params, ScaledSolution envelope, AnsatzGeometry geometry,
                   AnsatzOptions options = {}, bool certify_envelope = true)
      : p_(params), env_(std::move(envelope)), geo_(geometry), opt_(options) {
    periods_in(geo_.cell, geo_.line);
    if (geo_.cell.k0() != p_.k0) throw GeometryError("WavePacketAnsatz: cell k0 differs from params");
    if (certify_envelope) require_certified(env_.solution());
  }

  const PhysicalParams& params() const noexcept { return p_; }
  const AnsatzGeometry& geometry() const noexcept { return geo_; }
  const ScaledSolution& envelope() const noexcept { return env_; }

  /// A_v jet at slow time T (no X dependence).
  Jet2 background_jet(double slow_t) const { return env_.background_jet(slow_t); }

  AnsatzState at(double t, bool second_derivatives = true) const {
    const double e = p_.epsilon;
    const double slow_t = e * e * t;
    const double symbol = p_.third_harmonic_symbol();
    const Jet2 av = background_jet(slow_t);
    const auto [a3v, unused] = third_harmonic_split(av, Jet2(0.0), symbol);
    (void)unused;

    const std::size_t nc = geo_.cell.size();
    std::vector<cplx> v(nc), vt(nc), vtt(nc);
    for (std::size_t j = 0; j < nc; ++j) {
      const auto d = detail::assemble(av, a3v, p_, geo_.cell.node(j), t, opt_.third_harmonic, opt_.carrier_phase);
      v[j] = d.value;
      vt[j] = d.dt;
      vtt[j] = d.dtt;
    }

    const std::size_t nl = geo_.line.size();
    const double slow_len = geo_.slow_length(p_);
    std::vector<cplx> w(nl), wt(nl), wtt(nl), wxx(nl);
    double peak = 0.0;
    double edge = 0.0;
    double edge_dist = -1.0;
    for (std::size_t i = 0; i < nl; ++i) {
      const double x = geo_.line.node(i);
      const double slow_x = wrap_centered(e * (x - p_.cg * t), slow_len);
      const Jet2 aw = env_.jet(slow_x, slow_t) - av;
      const auto [a3v_i, a3w] = third_harmonic_split(av, aw, symbol);
      (void)a3v_i;
      const auto d = detail::assemble(aw, a3w, p_, x, t, opt_.third_harmonic, opt_.carrier_phase);
      w[i] = d.value;
      wt[i] = d.dt;
      wtt[i] = d.dtt;
      wxx[i] = d.dxx;
      const double mag = std::abs(aw.v);
      peak = std::max(peak, mag);
      if (std::abs(slow_x) > edge_dist) {
        edge_dist = std::abs(slow_x);
        edge = mag;
      }
    }

    AnsatzState s{t,
                  PeriodicField(geo_.cell, std::move(v)),
                  PeriodicField(geo_.cell, std::move(vt)),
                  LineField(geo_.line, std::move(w)),
                  LineField(geo_.line, std::move(wt)),
                  std::nullopt,
                  std::nullopt,
                  std::nullopt,
                  peak > 0.0 ? edge / peak : 0.0};
    if (second_derivatives) {
      s.dd_psi_v.emplace(geo_.cell, std::move(vtt));
      s.dd_psi_w.emplace(geo_.line, std::move(wtt));
      s.psi_w_xx.emplace(geo_.line, std::move(wxx));
    }
    return s;
  }

 private:
  PhysicalParams p_;
  ScaledSolution env_;
  AnsatzGeometry geo_;
  AnsatzOptions opt_;
};

/// Truncation monitor threshold on boundary_ratio.
inline constexpr double kTruncationLimit = 1e-2;

/// The envelope for a catalogued solution in Klein-Gordon NLS variables.
inline ScaledSolution kg_envelope(const PhysicalParams& p, ClosedFormSolution sol, double slow_time_offset = 0.0) {
  return ScaledSolution(std::move(sol), scaling_map(kg_nls_coefficients(p)), slow_time_offset);
}

inline AnsatzState build_ansatz(const PhysicalParams& p, const ScaledSolution& envelope, double t,
                                const AnsatzGeometry& geo, AnsatzOptions opt = {}) {
  return WavePacketAnsatz(p, envelope, geo, opt).at(t);
}

/// Res_v(v) = -v_tt + v_xx - v + v^3 with spectral v_xx.
inline PeriodicField residual_v(const PeriodicField& v, const PeriodicField& v_tt) {
  if (!(v.grid() == v_tt.grid())) throw GeometryError("residual_v: grid mismatch");
  const auto v_xx = derivative(v, 2);
  std::vector<cplx> r(v.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    const cplx u = v[j];
    r[j] = -v_tt[j] + v_xx[j] - u + u * u * u;
  }
  return {v.grid(), std::move(r)};
}

inline PeriodicField residual_v(const AnsatzState& s) {
  if (!s.dd_psi_v) throw InputError("residual_v: second time derivative missing");
  return residual_v(s.psi_v, *s.dd_psi_v);
}

/// Res_w(v,w) = -w_tt + w_xx - w + 3 v^2 w + 3 v w^2 + w^3, v given on the line.
inline LineField residual_w(const LineField& v_line, const LineField& w, const LineField& w_tt,
                            const LineField& w_xx) {
  if (!(v_line.grid() == w.grid()) || !(w.grid() == w_tt.grid()) || !(w.grid() == w_xx.grid())) {
    throw GeometryError("residual_w: grid mismatch");
  }
  std::vector<cplx> r(w.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const cplx a = v_line[i];
    const cplx b = w[i];
    r[i] = -w_tt[i] + w_xx[i] - b + 3.0 * a * a * b + 3.0 * a * b * b + b * b * b;
  }
  return {w.grid(), std::move(r)};
}

inline LineField residual_w(const AnsatzState& s) {
  if (!s.dd_psi_w || !s.psi_w_xx) throw InputError("residual_w: second derivatives missing");
  const auto v_line = restrict_periodic_to_line(s.psi_v, s.psi_w.grid());
  return residual_w(v_line, s.psi_w, *s.dd_psi_w, *s.psi_w_xx);
}

}  // namespace kgnls
