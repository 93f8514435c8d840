#pragma once

// Time integration of u_tt = u_xx - u + u^3.
//
// The linear part is advanced exactly per wavenumber. In the first-order
// variables R1 = uhat, R2 = uhat_t / (i omega), omega(k) = sqrt(k^2 + 1),
//
//   d/dt (R1, R2) = Lambda (R1, R2),  Lambda = [[0, i omega], [i omega, 0]],
//   exp(t Lambda) = S diag(e^{i omega t}, e^{-i omega t}) S^{-1},  S = [[1,1],[1,-1]].
//
// The cubic terms enter as Strang kicks (half kick, exact linear step, half
// kick). Cubic products are formed on a 2x zero-padded grid and projected back.
//
// The split system evolves v on one carrier period and w on a commensurate
// truncated line:
//   v_tt = v_xx - v + v^3,
//   w_tt = w_xx - w + 3 v^2 w + 3 v w^2 + w^3.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "kgnls/error.hpp"
#include "kgnls/fft.hpp"
#include "kgnls/params.hpp"
#include "kgnls/spectral_spaces.hpp"

namespace kgnls {

/// 2x2 complex matrix, row major.
struct Mat2 {
  std::array<cplx, 4> m{};

  cplx operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }

  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {{a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
             a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)}};
  }

  static Mat2 identity() { return {{1.0, 0.0, 0.0, 1.0}}; }
};

/// exp(t Lambda(k)) for the linear Klein-Gordon flow.
class LinearPropagator {
 public:
  static Mat2 S() { return {{1.0, 1.0, 1.0, -1.0}}; }
  static Mat2 S_inverse() { return {{0.5, 0.5, 0.5, -0.5}}; }

  static Mat2 generator(double k) {
    const cplx iw{0.0, kg_omega(k)};
    return {{0.0, iw, iw, 0.0}};
  }

  static Mat2 at(double k, double t) {
    const double w = kg_omega(k);
    const Mat2 diag{{std::exp(cplx(0.0, w * t)), 0.0, 0.0, std::exp(cplx(0.0, -w * t))}};
    return S() * diag * S_inverse();
  }
};

/// Per-mode coefficients of the exact linear step in (uhat, uhat_t) form:
///   uhat'   = c uhat + (s / omega) uhat_t
///   uhat_t' = -omega s uhat + c uhat_t
struct LinearStepTable {
  std::vector<double> c;
  std::vector<double> s_over_w;
  std::vector<double> w_s;

  LinearStepTable() = default;

  template <class WavenumberFn>
  LinearStepTable(std::size_t n, WavenumberFn&& k_of, double dt) : c(n), s_over_w(n), w_s(n) {
    for (std::size_t m = 0; m < n; ++m) {
      const double k = k_of(m);
      const double w = kg_omega(k);
      // Entries of S e^{dt D} S^{-1}; the basis change R2 = uhat_t/(i w)
      // turns the off-diagonal i sin into the real s/w and -w s factors.
      const Mat2 p = LinearPropagator::at(k, dt);
      c[m] = p(0, 0).real();
      const double s = p(0, 1).imag();
      s_over_w[m] = s / w;
      w_s[m] = w * s;
    }
  }
};

/// Exact linear flow on a Fourier-space pair (uhat, uhat_t).
inline void linear_step(std::span<cplx> u_hat, std::span<cplx> ut_hat, const LinearStepTable& table) {
  for (std::size_t m = 0; m < u_hat.size(); ++m) {
    const cplx a = u_hat[m];
    const cplx b = ut_hat[m];
    u_hat[m] = table.c[m] * a + table.s_over_w[m] * b;
    ut_hat[m] = -table.w_s[m] * a + table.c[m] * b;
  }
}

/// Convenience form for wavenumbers given explicitly.
inline void linear_step(std::span<cplx> u_hat, std::span<cplx> ut_hat, std::span<const double> k, double dt) {
  const LinearStepTable table(k.size(), [&](std::size_t m) { return k[m]; }, dt);
  linear_step(u_hat, ut_hat, table);
}

struct SplitState {
  PeriodicField v;
  PeriodicField v_t;
  LineField w;
  LineField w_t;
  double t = 0.0;
};

struct FullState {
  LineField u;
  LineField u_t;
  double t = 0.0;
};

struct IntegratorOptions {
  bool nonlinear = true;
  bool dealias = true;
};

/// Energy int u_t^2 + u_x^2 + u^2 - u^4/2 dx (drop the quartic term with
/// nonlinear = false). Band-limited fields give exact quadrature: the quadratic
/// part via Parseval, the quartic part on a 2x grid.
inline double kg_energy(const LineField& u, const LineField& u_t, bool nonlinear = true) {
  const auto& g = u.grid();
  const auto uh = fft::forward(u.values());
  const auto vh = fft::forward(u_t.values());
  const double n = static_cast<double>(g.size());
  double quad = 0.0;
  for (std::size_t m = 0; m < uh.size(); ++m) {
    const double k = g.wavenumber(m);
    quad += std::norm(vh[m]) + (k * k + 1.0) * std::norm(uh[m]);
  }
  quad *= g.dx() / n;
  if (!nonlinear) return quad;
  const auto fine = refine(u, 2);
  double quart = 0.0;
  for (const auto& z : fine.values()) quart += std::norm(z) * std::norm(z);
  quart *= fine.grid().dx();
  return quad - 0.5 * quart;
}

/// Momentum int u_t u_x dx.
inline double kg_momentum(const LineField& u, const LineField& u_t) {
  const auto& g = u.grid();
  const auto uh = fft::forward(u.values());
  const auto vh = fft::forward(u_t.values());
  double acc = 0.0;
  for (std::size_t m = 0; m < uh.size(); ++m) {
    const cplx ux = cplx(0.0, g.wavenumber(m)) * uh[m];
    acc += (vh[m] * std::conj(ux)).real();
  }
  return acc * g.dx() / static_cast<double>(g.size());
}

namespace detail {

/// One field advanced in Fourier space (unnormalized FFT coefficients).
struct SpectralPair {
  std::vector<cplx> u;
  std::vector<cplx> ut;

  template <class Field>
  static SpectralPair from(const Field& a, const Field& b) {
    return {fft::forward(a.values()), fft::forward(b.values())};
  }

  std::vector<cplx> physical(const std::vector<cplx>& spec) const {
    auto out = fft::backward(spec);
    const double s = 1.0 / static_cast<double>(spec.size());
    for (auto& z : out) z *= s;
    return out;
  }

  double norm2() const {
    double acc = 0.0;
    for (const auto& z : u) acc += std::norm(z);
    for (const auto& z : ut) acc += std::norm(z);
    return acc;
  }
};

/// Samples of the field with spectrum `spec` on a grid `factor` times finer.
inline std::vector<cplx> to_fine(const std::vector<cplx>& spec, std::size_t factor) {
  const std::size_t n = spec.size();
  auto fine = factor == 1 ? spec : fft::pad_spectrum(spec, n * factor);
  fft::backward_inplace(fine);
  const double s = 1.0 / static_cast<double>(n);
  for (auto& z : fine) z *= s;
  return fine;
}

/// Unnormalized coarse spectrum of fine-grid samples, band |j| < n/2.
inline std::vector<cplx> from_fine(std::vector<cplx> fine, std::size_t n) {
  const std::size_t m = fine.size();
  fft::forward_inplace(fine);
  auto out = m == n ? std::move(fine) : fft::truncate_spectrum(fine, n);
  const double s = static_cast<double>(n) / static_cast<double>(m);
  for (auto& z : out) z *= s;
  return out;
}

inline void kick(std::vector<cplx>& ut, const std::vector<cplx>& force, double tau) {
  for (std::size_t m = 0; m < ut.size(); ++m) ut[m] += tau * force[m];
}

}  // namespace detail

/// Strang integrator for the split (v, w) system.
class SplitIntegrator {
 public:
  SplitIntegrator(const SplitState& initial, double dt, IntegratorOptions opt = {})
      : cell_(initial.v.grid()),
        line_(initial.w.grid()),
        dt_(dt),
        t_(initial.t),
        opt_(opt),
        v_(detail::SpectralPair::from(initial.v, initial.v_t)),
        w_(detail::SpectralPair::from(initial.w, initial.w_t)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("SplitIntegrator: dt must be > 0");
    if (!(initial.v.grid() == initial.v_t.grid()) || !(initial.w.grid() == initial.w_t.grid())) {
      throw GeometryError("SplitIntegrator: field/derivative grid mismatch");
    }
    periods_ = periods_in(cell_, line_);
    if (refinement_of(cell_, line_) != 1) {
      throw GeometryError("SplitIntegrator: line and cell must share the node spacing");
    }
    table_v_ = LinearStepTable(cell_.size(), [&](std::size_t m) { return cell_.wavenumber(m); }, dt);
    table_w_ = LinearStepTable(line_.size(), [&](std::size_t m) { return line_.wavenumber(m); }, dt);
    initial_norm_ = std::max(v_.norm2() + w_.norm2(), 1e-300);
    compute_forces();
  }

  double time() const noexcept { return t_; }
  double dt() const noexcept { return dt_; }
  long steps_taken() const noexcept { return steps_; }

  void step() {
    if (opt_.nonlinear) {
      detail::kick(v_.ut, fv_, 0.5 * dt_);
      detail::kick(w_.ut, fw_, 0.5 * dt_);
    }
    linear_step(v_.u, v_.ut, table_v_);
    linear_step(w_.u, w_.ut, table_w_);
    if (opt_.nonlinear) {
      compute_forces();
      detail::kick(v_.ut, fv_, 0.5 * dt_);
      detail::kick(w_.ut, fw_, 0.5 * dt_);
    }
    ++steps_;
    t_ += dt_;
    const double n2 = v_.norm2() + w_.norm2();
    if (!std::isfinite(n2) || n2 > 1e12 * initial_norm_) {
      throw InstabilityError("evolve_split: norm blowup", steps_);
    }
  }

  SplitState state() const {
    return {PeriodicField(cell_, v_.physical(v_.u)), PeriodicField(cell_, v_.physical(v_.ut)),
            LineField(line_, w_.physical(w_.u)), LineField(line_, w_.physical(w_.ut)), t_};
  }

 private:
  void compute_forces() {
    if (!opt_.nonlinear) return;
    const std::size_t factor = opt_.dealias ? 2 : 1;
    const auto vf = detail::to_fine(v_.u, factor);
    auto v3 = vf;
    for (auto& z : v3) z = z * z * z;
    fv_ = detail::from_fine(std::move(v3), cell_.size());

    auto wf = detail::to_fine(w_.u, factor);
    const std::size_t nf = vf.size();
    const long total = static_cast<long>(periods_ * nf);
    const long nfl = static_cast<long>(nf);
    const auto offset = static_cast<std::size_t>(((-total / 2) % nfl + nfl) % nfl);
    for (std::size_t i = 0; i < wf.size(); ++i) {
      const cplx a = vf[(offset + i) % nf];
      const cplx b = wf[i];
      wf[i] = 3.0 * a * a * b + 3.0 * a * b * b + b * b * b;
    }
    fw_ = detail::from_fine(std::move(wf), line_.size());
  }

  PeriodicGrid cell_;
  LineGrid line_;
  double dt_;
  double t_;
  IntegratorOptions opt_;
  std::size_t periods_ = 1;
  detail::SpectralPair v_;
  detail::SpectralPair w_;
  LinearStepTable table_v_;
  LinearStepTable table_w_;
  std::vector<cplx> fv_;
  std::vector<cplx> fw_;
  double initial_norm_ = 1.0;
  long steps_ = 0;
};

/// Strang integrator for the unsplit field on a line grid.
class FullIntegrator {
 public:
  FullIntegrator(const FullState& initial, double dt, IntegratorOptions opt = {})
      : line_(initial.u.grid()), dt_(dt), t_(initial.t), opt_(opt),
        u_(detail::SpectralPair::from(initial.u, initial.u_t)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("FullIntegrator: dt must be > 0");
    if (!(initial.u.grid() == initial.u_t.grid())) throw GeometryError("FullIntegrator: grid mismatch");
    table_ = LinearStepTable(line_.size(), [&](std::size_t m) { return line_.wavenumber(m); }, dt);
    initial_norm_ = std::max(u_.norm2(), 1e-300);
    compute_force();
  }

  double time() const noexcept { return t_; }
  long steps_taken() const noexcept { return steps_; }

  void step() {
    if (opt_.nonlinear) detail::kick(u_.ut, f_, 0.5 * dt_);
    linear_step(u_.u, u_.ut, table_);
    if (opt_.nonlinear) {
      compute_force();
      detail::kick(u_.ut, f_, 0.5 * dt_);
    }
    ++steps_;
    t_ += dt_;
    const double n2 = u_.norm2();
    if (!std::isfinite(n2) || n2 > 1e12 * initial_norm_) {
      throw InstabilityError("evolve_full: norm blowup", steps_);
    }
  }

  FullState state() const {
    return {LineField(line_, u_.physical(u_.u)), LineField(line_, u_.physical(u_.ut)), t_};
  }

 private:
  void compute_force() {
    if (!opt_.nonlinear) return;
    auto uf = detail::to_fine(u_.u, opt_.dealias ? 2 : 1);
    for (auto& z : uf) z = z * z * z;
    f_ = detail::from_fine(std::move(uf), line_.size());
  }

  LineGrid line_;
  double dt_;
  double t_;
  IntegratorOptions opt_;
  detail::SpectralPair u_;
  LinearStepTable table_;
  std::vector<cplx> f_;
  double initial_norm_ = 1.0;
  long steps_ = 0;
};

/// Number of steps and the adjusted step so that steps * dt == t_end.
inline std::pair<long, double> step_plan(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw DomainError("step_plan: need dt > 0 and t_end >= 0");
  const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  return {steps, steps > 0 ? t_end / static_cast<double>(steps) : dt};
}

struct SplitTrajectory {
  std::vector<SplitState> snapshots;
};

struct FullTrajectory {
  std::vector<FullState> snapshots;
};

/// Evolve the split system to t_end; `observer` sees the initial state and
/// every `stride`-th state (and the final one).
inline SplitState evolve_split(const SplitState& initial, double t_end, double dt, std::size_t stride,
                               const std::function<void(const SplitState&)>& observer,
                               IntegratorOptions opt = {}) {
  const auto [steps, h] = step_plan(t_end - initial.t, dt);
  SplitIntegrator integ(initial, h, opt);
  if (observer) observer(initial);
  for (long s = 1; s <= steps; ++s) {
    integ.step();
    if (observer && ((stride > 0 && s % static_cast<long>(stride) == 0) || s == steps)) {
      observer(integ.state());
    }
  }
  return integ.state();
}

inline SplitTrajectory evolve_split(const SplitState& initial, double t_end, double dt, std::size_t stride = 0,
                                    IntegratorOptions opt = {}) {
  SplitTrajectory traj;
  evolve_split(initial, t_end, dt, stride, [&](const SplitState& s) { traj.snapshots.push_back(s); }, opt);
  return traj;
}

inline FullState evolve_full(const FullState& initial, double t_end, double dt, std::size_t stride,
                             const std::function<void(const FullState&)>& observer, IntegratorOptions opt = {}) {
  const auto [steps, h] = step_plan(t_end - initial.t, dt);
  FullIntegrator integ(initial, h, opt);
  if (observer) observer(initial);
  for (long s = 1; s <= steps; ++s) {
    integ.step();
    if (observer && ((stride > 0 && s % static_cast<long>(stride) == 0) || s == steps)) {
      observer(integ.state());
    }
  }
  return integ.state();
}

inline FullTrajectory evolve_full(const FullState& initial, double t_end, double dt, std::size_t stride = 0,
                                  IntegratorOptions opt = {}) {
  FullTrajectory traj;
  evolve_full(initial, t_end, dt, stride, [&](const FullState& s) { traj.snapshots.push_back(s); }, opt);
  return traj;
}

/// v + w on the line grid.
inline LineField combine(const PeriodicField& v, const LineField& w) {
  const auto vl = restrict_periodic_to_line(v, w.grid());
  std::vector<cplx> out(w.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = vl[i] + w[i];
  return {w.grid(), std::move(out)};
}

inline FullState combine(const SplitState& s) {
  return {combine(s.v, s.w), combine(s.v_t, s.w_t), s.t};
}

/// Largest |Im| over the four fields.
inline double imaginary_residue(const SplitState& s) {
  double m = 0.0;
  auto scan = [&](std::span<const cplx> vals) {
    for (const auto& z : vals) m = std::max(m, std::abs(z.imag()));
  };
  scan(s.v.values());
  scan(s.v_t.values());
  scan(s.w.values());
  scan(s.w_t.values());
  return m;
}

struct ConvergenceOrder {
  std::vector<double> dts;
  std::vector<double> differences;  // ||u_{dt_i} - u_{dt_{i+1}}|| in M^1
  double order = 0.0;
  bool skipped = false;  // differences at roundoff, no order measurable
};

/// Observed time-step order from successive differences over a halving ladder.
inline ConvergenceOrder self_convergence(const SplitState& initial, double t_end, std::span<const double> dt_ladder,
                                         IntegratorOptions opt = {}) {
  if (dt_ladder.size() < 3) throw DomainError("self_convergence: need at least 3 ladder entries");
  for (std::size_t i = 1; i < dt_ladder.size(); ++i) {
    if (std::abs(dt_ladder[i] - 0.5 * dt_ladder[i - 1]) > 1e-12 * dt_ladder[i - 1]) {
      throw DomainError("self_convergence: each ladder entry must halve the previous one");
    }
  }
  ConvergenceOrder out;
  out.dts.assign(dt_ladder.begin(), dt_ladder.end());
  std::vector<SplitState> finals;
  for (double dt : dt_ladder) {
    finals.push_back(evolve_split(initial, t_end, dt, 0, std::function<void(const SplitState&)>{}, opt));
  }
  const SobolevIndex s1(1.0);
  double scale = 0.0;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    auto diff_p = [](const PeriodicField& a, const PeriodicField& b) {
      std::vector<cplx> d(a.size());
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = a[j] - b[j];
      return PeriodicField(a.grid(), std::move(d));
    };
    auto diff_l = [](const LineField& a, const LineField& b) {
      std::vector<cplx> d(a.size());
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = a[j] - b[j];
      return LineField(a.grid(), std::move(d));
    };
    out.differences.push_back(
        mixed_norm(diff_p(finals[i].v, finals[i + 1].v), diff_l(finals[i].w, finals[i + 1].w), s1));
    scale = std::max(scale, mixed_norm(finals[i].v, finals[i].w, s1));
  }
  if (out.differences.front() <= 1e-12 * std::max(scale, 1e-300)) {
    out.skipped = true;
    return out;
  }
  for (std::size_t i = 1; i < out.differences.size(); ++i) {
    if (!(out.differences[i] < out.differences[i - 1])) {
      throw InconclusiveOrderError("self_convergence: differences do not decrease along the ladder");
    }
  }
  const std::size_t last = out.differences.size() - 1;
  out.order = std::log2(out.differences[last - 1] / out.differences[last]);
  return out;
}

}  // namespace kgnls
