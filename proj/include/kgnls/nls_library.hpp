#pragma once

// Closed-form solutions of the focusing NLS
//
//     i psi_tau + 1/2 psi_xixi + |psi|^2 psi = 0,
//
// a finite-difference residual certifier, the map between this normalized
// form and i A_T = nu1 A_XX + nu2 |A|^2 A, and a split-step evolver for the
// localized part A_w riding on a spatially constant background A_v.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kgnls/error.hpp"
#include "kgnls/fft.hpp"
#include "kgnls/jet.hpp"
#include "kgnls/params.hpp"
#include "kgnls/spectral_spaces.hpp"

namespace kgnls {

inline constexpr cplx kI{0.0, 1.0};

/// Sum of c * X^px * T^pt over the stored terms.
class Polynomial2 {
 public:
  struct Term {
    int px = 0;
    int pt = 0;
    cplx coeff{};
  };

  Polynomial2() = default;
  explicit Polynomial2(std::vector<Term> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      if (t.px < 0 || t.pt < 0) throw DomainError("Polynomial2: negative exponent");
    }
  }

  const std::vector<Term>& terms() const noexcept { return terms_; }

  template <class S>
  S operator()(const S& x, const S& t) const {
    S acc(0.0);
    for (const auto& term : terms_) {
      S mono(term.coeff);
      for (int i = 0; i < term.px; ++i) mono = mono * x;
      for (int i = 0; i < term.pt; ++i) mono = mono * t;
      acc = acc + mono;
    }
    return acc;
  }

  /// Parse "px pt re [im]; px pt re [im]; ...".
  static Polynomial2 parse(const std::string& text) {
    std::vector<Term> terms;
    std::stringstream all(text);
    std::string chunk;
    while (std::getline(all, chunk, ';')) {
      if (chunk.find_first_not_of(" \t") == std::string::npos) continue;
      std::stringstream ss(chunk);
      Term t;
      double re = 0.0;
      double im = 0.0;
      if (!(ss >> t.px >> t.pt >> re)) {
        throw DomainError("Polynomial2::parse: malformed term '" + chunk + "'");
      }
      ss >> im;
      t.coeff = {re, im};
      terms.push_back(t);
    }
    return Polynomial2(std::move(terms));
  }

 private:
  std::vector<Term> terms_;
};

/// Catalogue of exact solutions of the normalized focusing NLS.
class ClosedFormSolution {
 public:
  enum class Kind { peregrine, akhmediev, kuznetsov_ma, higher_order };

  static ClosedFormSolution peregrine() { return ClosedFormSolution(Kind::peregrine); }

  /// Akhmediev breather, 0 < a < 1/2: periodic in xi, localized in tau.
  static ClosedFormSolution akhmediev(double a) {
    if (!(a > 0.0 && a < 0.5)) throw DomainError("akhmediev requires 0 < a < 1/2");
    ClosedFormSolution s(Kind::akhmediev);
    s.a_ = a;
    return s;
  }

  /// Kuznetsov-Ma soliton, a > 1/2: periodic in tau, localized in xi.
  static ClosedFormSolution kuznetsov_ma(double a) {
    if (!(a > 0.5) || !std::isfinite(a)) throw DomainError("kuznetsov_ma requires a > 1/2");
    ClosedFormSolution s(Kind::kuznetsov_ma);
    s.a_ = a;
    return s;
  }

  /// e^{i tau}((-1)^j + (G + i H)/D) with user-supplied polynomials in (xi, tau).
  static ClosedFormSolution higher_order(int j, Polynomial2 g, Polynomial2 h, Polynomial2 d) {
    if (j < 1) throw DomainError("higher_order requires j >= 1");
    ClosedFormSolution s(Kind::higher_order);
    s.j_ = j;
    s.g_ = std::move(g);
    s.h_ = std::move(h);
    s.d_ = std::move(d);
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  double a() const noexcept { return a_; }
  int order() const noexcept { return j_; }

  /// Breather growth rate R = sqrt(8a(1-2a)) (imaginary for a > 1/2).
  cplx growth_rate() const { return std::sqrt(cplx(8.0 * a_ * (1.0 - 2.0 * a_), 0.0)); }
  /// Breather modulation wavenumber Omega = 2 sqrt(1-2a) (imaginary for a > 1/2).
  cplx modulation_wavenumber() const { return 2.0 * std::sqrt(cplx(1.0 - 2.0 * a_, 0.0)); }

  /// Time period of a Kuznetsov-Ma soliton, 2 pi / |Im R|.
  double time_period() const {
    if (kind_ != Kind::kuznetsov_ma) throw DomainError("time_period: only Kuznetsov-Ma is time periodic");
    return 2.0 * std::numbers::pi / std::abs(growth_rate().imag());
  }

  std::string name() const {
    switch (kind_) {
      case Kind::peregrine: return "peregrine";
      case Kind::akhmediev: return "akhmediev";
      case Kind::kuznetsov_ma: return "kuznetsov_ma";
      case Kind::higher_order: return "higher_order";
    }
    return "unknown";
  }

  template <class S>
  S evaluate(const S& xi, const S& tau) const {
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::sinh;
    const S carrier = exp(kI * tau);
    switch (kind_) {
      case Kind::peregrine: {
        const S den = 1.0 + 4.0 * xi * xi + 4.0 * tau * tau;
        return (1.0 - 4.0 * (1.0 + 2.0 * kI * tau) / den) * carrier;
      }
      case Kind::akhmediev:
      case Kind::kuznetsov_ma: {
        const cplx r = growth_rate();
        const cplx om = modulation_wavenumber();
        const S ch = cosh(r * tau);
        const S den = std::sqrt(2.0 * a_) * cos(om * xi) - ch;
        check_denominator(value_of(den));
        const S num = 2.0 * (1.0 - 2.0 * a_) * ch + kI * r * sinh(r * tau);
        return carrier * (1.0 + num / den);
      }
      case Kind::higher_order: {
        const S den = d_(xi, tau);
        const cplx dv = value_of(den);
        if (!(dv.real() > 1e-14)) {
          throw SingularEvaluationError("higher_order: D must be positive, got " + std::to_string(dv.real()));
        }
        const double sign = (j_ % 2 == 0) ? 1.0 : -1.0;
        return carrier * (sign + (g_(xi, tau) + kI * h_(xi, tau)) / den);
      }
    }
    return S(0.0);
  }

  cplx operator()(double xi, double tau) const { return evaluate<cplx>(xi, tau); }

 private:
  explicit ClosedFormSolution(Kind k) : kind_(k) {}

  static void check_denominator(cplx den) {
    if (std::abs(den) < 1e-14) throw SingularEvaluationError("closed form: vanishing denominator");
  }

  Kind kind_;
  double a_ = 0.5;
  int j_ = 1;
  Polynomial2 g_;
  Polynomial2 h_;
  Polynomial2 d_;
};

/// The plane-wave background e^{i tau} of every catalogued solution.
inline cplx background(double tau) { return std::exp(kI * tau); }

/// Coefficients of i A_T = nu1 A_XX + nu2 |A|^2 A.
struct NLSCoefficients {
  double nu1 = -0.5;
  double nu2 = -1.0;

  static NLSCoefficients normalized() { return {-0.5, -1.0}; }
};

inline void validate(const NLSCoefficients& c) {
  if (c.nu1 == 0.0 || !std::isfinite(c.nu1) || !std::isfinite(c.nu2)) {
    throw DomainError("NLSCoefficients: nu1 must be finite and nonzero");
  }
}

/// Envelope equation forced by the Klein-Gordon carrier:
/// 2 i omega0 A_T = (cg^2 - 1) A_XX - 3 A |A|^2.
inline NLSCoefficients kg_nls_coefficients(const PhysicalParams& p) {
  if (!(p.k0 > 0.0)) throw DomainError("kg_nls_coefficients: k0 must be > 0");
  return {(p.cg * p.cg - 1.0) / (2.0 * p.omega0), -3.0 / (2.0 * p.omega0)};
}

/// A(X,T) = amp * psi(space X, time T), conjugated when `conjugate` is set.
struct ScalingMap {
  double amp = 1.0;
  double space = 1.0;
  double time = 1.0;
  bool conjugate = false;
};

inline ScalingMap scaling_map(const NLSCoefficients& c) {
  validate(c);
  if (c.nu2 == 0.0 || (c.nu1 > 0.0) != (c.nu2 > 0.0)) {
    throw DefocusingIncompatibilityError("scaling_map: nu1 and nu2 must share a sign");
  }
  const double alpha = std::abs(c.nu1);
  const double beta = std::abs(c.nu2);
  // With time scale 1: alpha b^2 = 1/2 and beta a^2 = 1. Positive
  // coefficients are reached through psi -> conj(psi).
  return {std::sqrt(1.0 / beta), std::sqrt(1.0 / (2.0 * alpha)), 1.0, c.nu1 > 0.0};
}

/// Closed-form solution expressed in the variables of a target NLS.
class ScaledSolution {
 public:
  ScaledSolution(ClosedFormSolution sol, ScalingMap map, double time_offset = 0.0)
      : sol_(std::move(sol)), map_(map), offset_(time_offset) {}

  const ClosedFormSolution& solution() const noexcept { return sol_; }
  const ScalingMap& map() const noexcept { return map_; }
  double time_offset() const noexcept { return offset_; }

  template <class S>
  S evaluate(const S& x, const S& t) const {
    const S psi = sol_.evaluate(map_.space * x, map_.time * (t + offset_));
    return map_.amp * (map_.conjugate ? conj(psi) : psi);
  }

  cplx operator()(double x, double t) const { return evaluate<cplx>(x, t); }

  /// Envelope and its first and second partials in (X, T).
  Jet2 jet(double x, double t) const { return evaluate(Jet2::var_x(x), Jet2::var_t(t)); }

  /// Spatially constant part amp * e^{+-i time (T + offset)}.
  cplx background_at(double t) const {
    const cplx b = map_.amp * background(map_.time * (t + offset_));
    return map_.conjugate ? std::conj(b) : b;
  }

  Jet2 background_jet(double t) const {
    const double rate = map_.conjugate ? -map_.time : map_.time;
    const cplx b = background_at(t);
    const cplx r = kI * rate;
    return {b, 0.0, r * b, 0.0, 0.0, r * r * b};
  }

 private:
  static cplx conj(const cplx& z) { return std::conj(z); }
  static Jet2 conj(const Jet2& z) { return kgnls::conj(z); }

  ClosedFormSolution sol_;
  ScalingMap map_;
  double offset_;
};

/// Rectangular (xi, tau) sample window for residual checks.
struct Window {
  double xi_min = -5.0;
  double xi_max = 5.0;
  double tau_min = -5.0;
  double tau_max = 5.0;
  std::size_t n_xi = 101;
  std::size_t n_tau = 101;

  double xi(std::size_t i) const {
    return n_xi < 2 ? xi_min : xi_min + (xi_max - xi_min) * static_cast<double>(i) / static_cast<double>(n_xi - 1);
  }
  double tau(std::size_t j) const {
    return n_tau < 2 ? tau_min : tau_min + (tau_max - tau_min) * static_cast<double>(j) / static_cast<double>(n_tau - 1);
  }
};

/// max over the window of |i A_T - nu1 A_XX - nu2 |A|^2 A|, derivatives from
/// fourth-order centered differences with step h. The default coefficients
/// give the normalized operator i psi_tau + 1/2 psi_xixi + |psi|^2 psi.
template <class F>
double nls_residual(const F& field, const Window& w, double h,
                    NLSCoefficients c = NLSCoefficients::normalized()) {
  if (!(h > 0.0)) throw DomainError("nls_residual: h must be > 0");
  validate(c);
  double worst = 0.0;
  for (std::size_t i = 0; i < w.n_xi; ++i) {
    const double x = w.xi(i);
    for (std::size_t j = 0; j < w.n_tau; ++j) {
      const double t = w.tau(j);
      const cplx f0 = field(x, t);
      const cplx dt = (-field(x, t + 2 * h) + 8.0 * field(x, t + h) - 8.0 * field(x, t - h) +
                       field(x, t - 2 * h)) / (12.0 * h);
      const cplx dxx = (-field(x + 2 * h, t) + 16.0 * field(x + h, t) - 30.0 * f0 +
                        16.0 * field(x - h, t) - field(x - 2 * h, t)) / (12.0 * h * h);
      const cplx r = kI * dt - c.nu1 * dxx - c.nu2 * std::norm(f0) * f0;
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

/// Residual at h and h/2 plus the Richardson order estimate log2(r(h)/r(h/2)).
struct Certificate {
  double residual_max = 0.0;
  double residual_half = 0.0;
  double order_estimate = 0.0;
  Window window;
  double h = 0.0;

  /// Residual bound used by the acceptance check (1e-6 at h = 1e-2).
  bool within(double tol) const { return residual_max <= tol; }

  /// A correct formula leaves only discretization error: the residual is
  /// small and shrinks at fourth order, or it sits at roundoff already.
  /// Transcription errors plateau and fail the order test.
  bool certified() const {
    if (residual_half <= 1e-9) return true;
    return residual_max <= 1e-3 && order_estimate >= 3.5;
  }
};

template <class F>
Certificate certify(const F& field, const Window& w, double h,
                    NLSCoefficients c = NLSCoefficients::normalized()) {
  Certificate cert;
  cert.window = w;
  cert.h = h;
  cert.residual_max = nls_residual(field, w, h, c);
  cert.residual_half = nls_residual(field, w, 0.5 * h, c);
  cert.order_estimate = std::log2(cert.residual_max / cert.residual_half);
  return cert;
}

/// Throws CertificationError unless the solution passes the residual
/// certification on the window (default [-5,5]^2, h = 1e-2).
inline Certificate require_certified(const ClosedFormSolution& sol, const Window& w = Window{},
                                     double h = 1e-2) {
  Certificate cert;
  try {
    cert = certify(sol, w, h);
  } catch (const SingularEvaluationError& e) {
    throw CertificationError(sol.name() + ": singular point inside certification window: " + e.what());
  }
  if (!cert.certified()) {
    std::ostringstream msg;
    msg << sol.name() << ": residual " << cert.residual_max << " at h=" << h << ", order estimate "
        << cert.order_estimate << "; not a solution of the normalized NLS";
    throw CertificationError(msg.str());
  }
  return cert;
}

/// Exact solution of 2 i omega0 A_v' = -3 A_v |A_v|^2.
inline cplx constant_background_evolution(cplx av0, double omega0, double t) {
  return av0 * std::exp(kI * (3.0 * std::norm(av0) * t / (2.0 * omega0)));
}

struct NlsTrajectory {
  std::vector<double> times;
  std::vector<LineField> states;
};

/// Strang split-step evolution of A_w under
///   i A_w' = nu1 A_w'' + nu2 (|A_v + A_w|^2 (A_v + A_w) - |A_v|^2 A_v)
/// with A_v(T) = A_v0 exp(-i nu2 |A_v0|^2 T) (the constant-background flow).
/// The dispersive step is exact in Fourier space; the pointwise step is
/// exact because A = A_v + A_w then solves i A' = nu2 |A|^2 A with constant |A|.
/// States are recorded every `stride` steps (0: only start and end).
inline NlsTrajectory split_nls_evolve(const LineField& aw0, cplx av0, const NLSCoefficients& c,
                                      double t_end, double dt, std::size_t stride = 0) {
  validate(c);
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw DomainError("split_nls_evolve: need dt > 0, t_end >= 0");
  const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
  const double h = steps > 0 ? t_end / static_cast<double>(steps) : 0.0;
  const LineGrid& g = aw0.grid();
  const std::size_t n = g.size();
  const double rate = -c.nu2 * std::norm(av0);
  auto av = [&](double t) { return av0 * std::exp(kI * rate * t); };

  std::vector<cplx> phase(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double k = g.wavenumber(m);
    phase[m] = std::exp(kI * (c.nu1 * k * k * h)) / static_cast<double>(n);
  }

  std::vector<cplx> aw(aw0.values().begin(), aw0.values().end());
  const double scale0 = std::max(aw0.max_abs(), 1e-300);
  auto nonlinear = [&](double t0, double dt_half) {
    const cplx a_start = av(t0);
    const cplx a_end = av(t0 + dt_half);
    for (auto& z : aw) {
      const cplx total = a_start + z;
      z = total * std::exp(-kI * c.nu2 * std::norm(total) * dt_half) - a_end;
    }
  };

  NlsTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(aw0);
  double t = 0.0;
  for (long step = 1; step <= steps; ++step) {
    nonlinear(t, 0.5 * h);
    fft::forward_inplace(aw);
    for (std::size_t m = 0; m < n; ++m) aw[m] *= phase[m];
    fft::backward_inplace(aw);
    nonlinear(t + 0.5 * h, 0.5 * h);
    t = static_cast<double>(step) * h;
    double peak = 0.0;
    for (const auto& z : aw) peak = std::max(peak, std::abs(z));
    if (!std::isfinite(peak) || peak > 1e6 * std::max(scale0, 1.0)) {
      throw InstabilityError("split_nls_evolve: norm blowup", step);
    }
    if ((stride > 0 && step % static_cast<long>(stride) == 0) || step == steps) {
      if (traj.times.back() != t) {
        traj.times.push_back(t);
        traj.states.emplace_back(g, aw);
      }
    }
  }
  return traj;
}

}  // namespace kgnls
