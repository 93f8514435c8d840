#pragma once

// Second-order forward-mode jets in two real variables (X, T) with complex
// values. Closed-form envelopes are written once as templates over the scalar
// type; evaluating them on Jet2 yields exact first and second partials, which
// the ansatz needs for its chain-rule time derivatives.

#include <complex>

namespace kgnls {

struct Jet2 {
  using cplx = std::complex<double>;

  cplx v{};    // value
  cplx x{};    // d/dX
  cplx t{};    // d/dT
  cplx xx{};   // d2/dX2
  cplx xt{};   // d2/dXdT
  cplx tt{};   // d2/dT2

  constexpr Jet2() = default;
  constexpr Jet2(double c) : v(c) {}  // NOLINT(google-explicit-constructor)
  constexpr Jet2(cplx c) : v(c) {}    // NOLINT(google-explicit-constructor)
  constexpr Jet2(cplx v_, cplx x_, cplx t_, cplx xx_, cplx xt_, cplx tt_)
      : v(v_), x(x_), t(t_), xx(xx_), xt(xt_), tt(tt_) {}

  static constexpr Jet2 var_x(double x0) { return {x0, 1.0, 0.0, 0.0, 0.0, 0.0}; }
  static constexpr Jet2 var_t(double t0) { return {t0, 0.0, 1.0, 0.0, 0.0, 0.0}; }

  Jet2& operator+=(const Jet2& o) {
    v += o.v; x += o.x; t += o.t; xx += o.xx; xt += o.xt; tt += o.tt;
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    v -= o.v; x -= o.x; t -= o.t; xx -= o.xx; xt -= o.xt; tt -= o.tt;
    return *this;
  }
  Jet2& operator*=(cplx c) {
    v *= c; x *= c; t *= c; xx *= c; xt *= c; tt *= c;
    return *this;
  }
};

inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.x, -a.t, -a.xx, -a.xt, -a.tt}; }
inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator*(Jet2 a, std::complex<double> c) { return a *= c; }
inline Jet2 operator*(std::complex<double> c, Jet2 a) { return a *= c; }
inline Jet2 operator*(Jet2 a, double c) { return a *= c; }
inline Jet2 operator*(double c, Jet2 a) { return a *= c; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v,
          a.x * b.v + a.v * b.x,
          a.t * b.v + a.v * b.t,
          a.xx * b.v + 2.0 * a.x * b.x + a.v * b.xx,
          a.xt * b.v + a.x * b.t + a.t * b.x + a.v * b.xt,
          a.tt * b.v + 2.0 * a.t * b.t + a.v * b.tt};
}

/// Lift a scalar function with known first and second derivative at a.v.
inline Jet2 chain(const Jet2& a, std::complex<double> f, std::complex<double> f1,
                  std::complex<double> f2) {
  return {f,
          f1 * a.x,
          f1 * a.t,
          f2 * a.x * a.x + f1 * a.xx,
          f2 * a.x * a.t + f1 * a.xt,
          f2 * a.t * a.t + f1 * a.tt};
}

inline Jet2 reciprocal(const Jet2& a) {
  const auto r = 1.0 / a.v;
  return chain(a, r, -r * r, 2.0 * r * r * r);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }
inline Jet2 operator/(const Jet2& a, std::complex<double> c) { return a * (1.0 / c); }
inline Jet2 operator/(const Jet2& a, double c) { return a * (1.0 / c); }
inline Jet2 operator/(std::complex<double> c, const Jet2& b) { return c * reciprocal(b); }
inline Jet2 operator/(double c, const Jet2& b) { return c * reciprocal(b); }
inline Jet2 operator+(Jet2 a, std::complex<double> c) { a.v += c; return a; }
inline Jet2 operator+(std::complex<double> c, Jet2 a) { a.v += c; return a; }
inline Jet2 operator+(Jet2 a, double c) { a.v += c; return a; }
inline Jet2 operator+(double c, Jet2 a) { a.v += c; return a; }
inline Jet2 operator-(Jet2 a, double c) { a.v -= c; return a; }
inline Jet2 operator-(double c, const Jet2& a) { return c + (-a); }
inline Jet2 operator-(Jet2 a, std::complex<double> c) { a.v -= c; return a; }
inline Jet2 operator-(std::complex<double> c, const Jet2& a) { return c + (-a); }

inline Jet2 exp(const Jet2& a) {
  const auto e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet2 cos(const Jet2& a) {
  const auto c = std::cos(a.v);
  return chain(a, c, -std::sin(a.v), -c);
}
inline Jet2 cosh(const Jet2& a) {
  const auto c = std::cosh(a.v);
  const auto s = std::sinh(a.v);
  return chain(a, c, s, c);
}
inline Jet2 sinh(const Jet2& a) {
  const auto c = std::cosh(a.v);
  const auto s = std::sinh(a.v);
  return chain(a, s, c, s);
}

/// Componentwise conjugate; valid because X and T are real.
inline Jet2 conj(const Jet2& a) {
  return {std::conj(a.v), std::conj(a.x), std::conj(a.t),
          std::conj(a.xx), std::conj(a.xt), std::conj(a.tt)};
}

inline std::complex<double> value_of(const Jet2& a) { return a.v; }
inline std::complex<double> value_of(std::complex<double> a) { return a; }

}  // namespace kgnls
