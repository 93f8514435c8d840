#pragma once

#include <cmath>
#include <string>

#include "kgnls/error.hpp"

namespace kgnls {

/// Carrier data of a Klein-Gordon wave packet. make_params fills omega0 and
/// cg from the dispersion relation; the fields stay writable so negative
/// controls can break one identity on purpose.
struct PhysicalParams {
  double k0 = 1.0;
  double omega0 = std::sqrt(2.0);
  double cg = 1.0 / std::sqrt(2.0);
  double epsilon = 0.1;

  /// omega0^2 - k0^2 - 1; zero for consistent parameters.
  double dispersion_defect() const noexcept { return omega0 * omega0 - k0 * k0 - 1.0; }

  /// 9 k0^2 - 9 omega0^2 + 1, the third-harmonic operator symbol (-8 when consistent).
  double third_harmonic_symbol() const noexcept { return 9.0 * k0 * k0 - 9.0 * omega0 * omega0 + 1.0; }
};

inline PhysicalParams make_params(double k0, double epsilon) {
  if (!(k0 > 0.0) || !std::isfinite(k0)) {
    throw DomainError("make_params: k0 must be > 0, got " + std::to_string(k0));
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("make_params: epsilon must be > 0, got " + std::to_string(epsilon));
  }
  PhysicalParams p;
  p.k0 = k0;
  p.omega0 = std::sqrt(k0 * k0 + 1.0);
  p.cg = k0 / p.omega0;
  p.epsilon = epsilon;
  return p;
}

/// Linear Klein-Gordon dispersion omega(k) = sqrt(k^2 + 1).
inline double kg_omega(double k) noexcept { return std::sqrt(k * k + 1.0); }

}  // namespace kgnls
