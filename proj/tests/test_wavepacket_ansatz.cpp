#include <gtest/gtest.h>

#include <cmath>

#include "kgnls/experiments.hpp"
#include "kgnls/wavepacket_ansatz.hpp"

using namespace kgnls;

namespace {

struct Setup {
  PhysicalParams p;
  WavePacketAnsatz ansatz;
};

Setup make(double eps, double offset = 0.0, AnsatzOptions opt = {}, double k0 = 1.0) {
  const auto p = make_params(k0, eps);
  return {p, WavePacketAnsatz(p, kg_envelope(p, ClosedFormSolution::peregrine(), offset),
                              AnsatzGeometry::make(p, 32, 40.0), opt)};
}

// Res_v of v = 2 Re(eps a E + eps^3 b E^3) with a(T) = a0 e^{i theta T},
// b = a^3 / symbol, expanded by hand into harmonics E^1 ... E^9.
std::vector<double> res_v_oracle(const PhysicalParams& p, cplx a, const PeriodicGrid& g, double t) {
  const double e = p.epsilon;
  const double theta = 3.0 * std::norm(a) / (2.0 * p.omega0);
  const cplx b = a * a * a / p.third_harmonic_symbol();
  const cplx app = -theta * theta * a;
  const cplx bp = cplx(0, 3 * theta) * b;
  const cplx bpp = -9.0 * theta * theta * b;
  const double e5 = std::pow(e, 5), e7 = std::pow(e, 7), e9 = std::pow(e, 9);
  const cplx c1 = e5 * (-app + 3.0 * std::conj(a) * std::conj(a) * b) + 6.0 * e7 * std::norm(b) * a;
  const cplx c3 = e5 * (cplx(0, 6 * p.omega0) * bp + 6.0 * std::norm(a) * b) - e7 * bpp + 3.0 * e9 * std::norm(b) * b;
  const cplx c5 = 3.0 * e5 * a * a * b + 3.0 * e7 * std::conj(a) * b * b;
  const cplx c7 = 3.0 * e7 * a * b * b;
  const cplx c9 = e9 * b * b * b;
  std::vector<double> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const cplx E = std::polar(1.0, p.k0 * g.node(j) - p.omega0 * t);
    out[j] = 2.0 * (c1 * E + c3 * std::pow(E, 3) + c5 * std::pow(E, 5) + c7 * std::pow(E, 7) + c9 * std::pow(E, 9)).real();
  }
  return out;
}

}  // namespace

TEST(Params, MakeParamsValidates) {
  EXPECT_THROW(make_params(0.0, 0.1), DomainError);
  EXPECT_THROW(make_params(1.0, -0.1), DomainError);
  const auto p = make_params(2.0, 0.1);
  EXPECT_NEAR(p.omega0, std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(p.cg, 2.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(p.dispersion_defect(), 0.0, 1e-14);
}

TEST(ThirdHarmonic, SymbolIsMinusEight) {
  for (double k0 : {0.5, 1.0, 2.0, 5.0}) EXPECT_NEAR(make_params(k0, 0.1).third_harmonic_symbol(), -8.0, 1e-12);
}

TEST(ThirdHarmonic, SplitAddsUpToFullCube) {
  const cplx av(0.7, 0.2), aw(-0.3, 0.5);
  const auto [v, w] = third_harmonic_split(av, aw, -8.0);
  EXPECT_NEAR(std::abs(v + w + std::pow(av + aw, 3) / 8.0), 0.0, 1e-15);
  const LineGrid g(10.0, 8);
  const auto [v3, w3] = third_harmonic(av, LineField::sample(g, [&](double) { return aw; }));
  EXPECT_NEAR(std::abs(v3 - v), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(w3[5] - w), 0.0, 1e-15);
}

TEST(Ansatz, RealValued) {
  const auto s = make(0.1, -0.3);
  for (double t : {0.0, 17.0, 55.5}) {
    const auto st = s.ansatz.at(t);
    double worst = 0;
    for (auto f : {st.psi_v.values(), st.d_psi_v.values(), st.dd_psi_v->values()})
      for (auto z : f) worst = std::max(worst, std::abs(z.imag()));
    for (auto f : {st.psi_w.values(), st.d_psi_w.values(), st.dd_psi_w->values(), st.psi_w_xx->values()})
      for (auto z : f) worst = std::max(worst, std::abs(z.imag()));
    EXPECT_LE(worst, 1e-13);
  }
}

TEST(Ansatz, SmallEpsilonLimitOfPeriodicPart) {
  for (double eps : {1e-2, 1e-3}) {
    const auto s = make(eps);
    const auto st = s.ansatz.at(0.0, false);
    const double av = std::abs(s.ansatz.envelope().background_at(0.0));
    const double sup = refine(st.psi_v, 64).max_abs() / eps;
    EXPECT_NEAR(sup / (2 * av), 1.0, 2 * eps * eps + 2e-6);
  }
}

TEST(Ansatz, TimeDerivativesMatchFiniteDifferences) {
  const auto s = make(0.1, 0.2);
  const double t = 12.3, h = 1e-3;
  const auto c = s.ansatz.at(t);
  const auto m = s.ansatz.at(t - h, false);
  const auto q = s.ansatz.at(t + h, false);
  for (std::size_t j = 0; j < c.psi_v.size(); ++j) {
    EXPECT_NEAR(std::abs(c.d_psi_v[j] - (q.psi_v[j] - m.psi_v[j]) / (2 * h)), 0, 1e-7);
    EXPECT_NEAR(std::abs((*c.dd_psi_v)[j] - (q.psi_v[j] - 2.0 * c.psi_v[j] + m.psi_v[j]) / (h * h)), 0, 1e-6);
  }
  for (std::size_t i = 0; i < c.psi_w.size(); i += 7) {
    EXPECT_NEAR(std::abs(c.d_psi_w[i] - (q.psi_w[i] - m.psi_w[i]) / (2 * h)), 0, 1e-6);
    EXPECT_NEAR(std::abs((*c.dd_psi_w)[i] - (q.psi_w[i] - 2.0 * c.psi_w[i] + m.psi_w[i]) / (h * h)), 0, 1e-5);
  }
}

TEST(Ansatz, AnalyticSecondSpaceDerivativeMatchesSpectral) {
  const auto s = make(0.1, 0.0);
  const auto st = s.ansatz.at(0.0);
  const auto spectral = derivative(st.psi_w, 2);
  const std::size_t n = st.psi_w.size();
  double worst = 0, scale = st.psi_w_xx->max_abs();
  for (std::size_t i = n / 4; i < 3 * n / 4; ++i) worst = std::max(worst, std::abs(spectral[i] - (*st.psi_w_xx)[i]));
  EXPECT_LT(worst, 1e-3 * scale);
}

TEST(Ansatz, BoundaryRatioSmallOnDefaultLine) {
  const auto s = make(0.1);
  EXPECT_LT(s.ansatz.at(0.0, false).boundary_ratio, kTruncationLimit);
}

TEST(Ansatz, RejectsBadGeometry) {
  const auto p = make_params(1.0, 0.1);
  EXPECT_THROW(AnsatzGeometry::make(p, 32, 0.0), DomainError);
  auto geo = AnsatzGeometry::make(p, 32, 40.0);
  geo.line = LineGrid(401.3, 2048);
  EXPECT_THROW(WavePacketAnsatz(p, kg_envelope(p, ClosedFormSolution::peregrine()), geo), GeometryError);
}

TEST(Residual, PeriodicResidualMatchesHarmonicExpansion) {
  for (double eps : {0.2, 0.1}) {
    const auto s = make(eps, 0.1);
    for (double t : {0.0, 3.7, 40.0}) {
      const auto st = s.ansatz.at(t);
      const auto r = residual_v(st);
      const cplx a = s.ansatz.envelope().background_at(eps * eps * t);
      const auto oracle = res_v_oracle(s.p, a, st.psi_v.grid(), t);
      double worst = 0, scale = 0;
      for (std::size_t j = 0; j < r.size(); ++j) {
        worst = std::max(worst, std::abs(r[j] - oracle[j]));
        scale = std::max(scale, std::abs(oracle[j]));
      }
      EXPECT_LT(worst, 1e-9 * scale + 1e-14) << "eps=" << eps << " t=" << t;
    }
  }
}

TEST(Residual, PeriodicResidualIsFifthOrder) {
  // Constant background: every eps^3 term cancels and the leading remainder is eps^5.
  const auto a = make(0.1);
  const auto b = make(0.05);
  const double ra = periodic_norm(residual_v(a.ansatz.at(0.0)), SobolevIndex(1));
  const double rb = periodic_norm(residual_v(b.ansatz.at(0.0)), SobolevIndex(1));
  EXPECT_NEAR(std::log2(ra / rb), 5.0, 0.1);
}

TEST(Residual, LocalizedRatioUnderHalving) {
  auto norm = [](double eps) { return line_norm(residual_w(make(eps).ansatz.at(0.0)), SobolevIndex(1)); };
  const double ratio = norm(0.1) / norm(0.05);
  EXPECT_NEAR(ratio, std::pow(2.0, 3.5), 0.25 * std::pow(2.0, 3.5));
}

TEST(Residual, LocalizedResidualIsFirstOrderSensitive) {
  const auto s = make(0.1);
  const auto st = s.ansatz.at(5.0);
  const auto g = st.psi_w.grid();
  const auto v_line = restrict_periodic_to_line(st.psi_v, g);
  const auto base = residual_w(v_line, st.psi_w, *st.dd_psi_w, *st.psi_w_xx);
  auto bump = [](double x) { return std::exp(-0.05 * x * x); };
  auto bump_xx = [](double x) { return (0.01 * x * x - 0.1) * std::exp(-0.05 * x * x); };
  auto change = [&](double eta) {
    std::vector<cplx> w(g.size()), wxx(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      w[i] = st.psi_w[i] + eta * bump(g.node(i));
      wxx[i] = (*st.psi_w_xx)[i] + eta * bump_xx(g.node(i));
    }
    const auto r = residual_w(v_line, LineField(g, w), *st.dd_psi_w, LineField(g, wxx));
    std::vector<cplx> d(g.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = r[i] - base[i];
    return line_norm(LineField(g, d), SobolevIndex(1));
  };
  const double r1 = change(1e-3), r2 = change(5e-4), r3 = change(2.5e-4);
  EXPECT_NEAR(r1 / r2, 2.0, 0.02);
  EXPECT_NEAR(r2 / r3, 2.0, 0.01);
}

TEST(Residual, MissingDerivativesRejected) {
  const auto s = make(0.1);
  const auto st = s.ansatz.at(0.0, false);
  EXPECT_THROW(residual_v(st), InputError);
  EXPECT_THROW(residual_w(st), InputError);
}

TEST(NegativeControl, WrongFrequencyBreaksDispersionCancellation) {
  std::vector<std::pair<double, double>> pts;
  for (double eps : {0.1, 0.07, 0.05}) {
    auto p = make_params(1.0, eps);
    p.omega0 += 0.1;
    const WavePacketAnsatz an(p, kg_envelope(p, ClosedFormSolution::peregrine()), AnsatzGeometry::make(p, 32, 40.0));
    pts.emplace_back(eps, periodic_norm(residual_v(an.at(0.0)), SobolevIndex(1)));
  }
  EXPECT_NEAR(fit_slope(pts).exponent, 1.0, 0.2);
}

TEST(NegativeControl, MissingThirdHarmonicLowersLocalizedOrder) {
  std::vector<std::pair<double, double>> pts;
  for (double eps : {0.1, 0.07, 0.05}) {
    const auto s = make(eps, 0.0, AnsatzOptions{false});
    pts.emplace_back(eps, line_norm(residual_w(s.ansatz.at(0.0)), SobolevIndex(1)));
  }
  EXPECT_LT(fit_slope(pts).exponent, 3.0);
}

TEST(NegativeControl, WrongGroupVelocityDegradesLocalizedResidual) {
  std::vector<std::pair<double, double>> pts;
  for (double eps : {0.1, 0.07, 0.05}) {
    auto p = make_params(1.0, eps);
    p.cg += 0.1;
    const WavePacketAnsatz an(p, kg_envelope(p, ClosedFormSolution::peregrine()), AnsatzGeometry::make(p, 32, 40.0));
    pts.emplace_back(eps, line_norm(residual_w(an.at(0.0)), SobolevIndex(1)));
  }
  EXPECT_LT(fit_slope(pts).exponent, 2.2);
}

TEST(Gauge, ResidualNormsInvariantUnderCarrierPhase) {
  // Harmonics of the periodic part are orthogonal Fourier modes, so Res_v is
  // exactly invariant. On the line the E and conj(E) sidebands of the
  // envelope overlap by an amount that vanishes as eps -> 0.
  AnsatzOptions opt;
  opt.carrier_phase = 0.9;
  std::vector<double> spread;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto base = make(eps), turned = make(eps, 0.0, opt);
    for (double t : {0.0, 1.0 / (eps * eps)}) {
      const AnsatzState a = base.ansatz.at(t), b = turned.ansatz.at(t);
      EXPECT_GT(std::abs(a.psi_v[0] - b.psi_v[0]), 1e-3 * eps);
      const double rv = periodic_norm(residual_v(a), SobolevIndex(1));
      EXPECT_NEAR(periodic_norm(residual_v(b), SobolevIndex(1)), rv, 1e-9 * rv + 1e-13);
    }
    const double rw = line_norm(residual_w(base.ansatz.at(0.0)), SobolevIndex(1));
    spread.push_back(std::abs(line_norm(residual_w(turned.ansatz.at(0.0)), SobolevIndex(1)) / rw - 1.0));
  }
  EXPECT_LT(spread[1], 0.5 * spread[0]);
  EXPECT_LT(spread[2], 0.5 * spread[1]);
  EXPECT_LT(spread[2], 0.02);
}
