#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kgnls/experiments.hpp"
#include "kgnls/kg_integrator.hpp"

using namespace kgnls;

namespace {

SplitState ansatz_data(double eps, std::size_t n_modes = 32, double slow_length = 40.0) {
  const auto p = make_params(1.0, eps);
  const WavePacketAnsatz an(p, kg_envelope(p, ClosedFormSolution::peregrine()),
                            AnsatzGeometry::make(p, n_modes, slow_length));
  return initial_state(an);
}

Mat2 taylor_exp(const Mat2& a, double t) {
  // exp(t a) by scaling and squaring of a 20-term series.
  Mat2 x{{a(0, 0) * t / 64.0, a(0, 1) * t / 64.0, a(1, 0) * t / 64.0, a(1, 1) * t / 64.0}};
  Mat2 sum = Mat2::identity(), term = Mat2::identity();
  for (int n = 1; n <= 20; ++n) {
    term = term * x;
    for (auto& z : term.m) z /= static_cast<double>(n);
    for (std::size_t i = 0; i < 4; ++i) sum.m[i] += term.m[i];
  }
  for (int i = 0; i < 6; ++i) sum = sum * sum;
  return sum;
}

double diff_norm(const LineField& a, const LineField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// u'' = -u + u^3 by classical RK4.
std::pair<double, double> ode_oracle(double u, double v, double t_end, int steps) {
  const double h = t_end / steps;
  auto f = [](double x) { return -x + x * x * x; };
  for (int i = 0; i < steps; ++i) {
    const double k1u = v, k1v = f(u);
    const double k2u = v + 0.5 * h * k1v, k2v = f(u + 0.5 * h * k1u);
    const double k3u = v + 0.5 * h * k2v, k3v = f(u + 0.5 * h * k2u);
    const double k4u = v + h * k3v, k4v = f(u + h * k3u);
    u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return {u, v};
}

}  // namespace

TEST(Propagator, MatchesMatrixExponential) {
  for (double k : {0.0, 0.7, 3.0}) {
    for (double t : {0.01, 0.5, 2.3}) {
      const Mat2 a = LinearPropagator::at(k, t);
      const Mat2 b = taylor_exp(LinearPropagator::generator(k), t);
      for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(a.m[i] - b.m[i]), 0.0, 1e-12);
    }
  }
}

TEST(Propagator, GroupProperty) {
  const Mat2 a = LinearPropagator::at(1.3, 0.4) * LinearPropagator::at(1.3, 0.9);
  const Mat2 b = LinearPropagator::at(1.3, 1.3);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(a.m[i] - b.m[i]), 0.0, 1e-14);
  const Mat2 c = LinearPropagator::S() * LinearPropagator::S_inverse();
  EXPECT_NEAR(std::abs(c(0, 0) - 1.0) + std::abs(c(0, 1)) + std::abs(c(1, 0)) + std::abs(c(1, 1) - 1.0), 0, 1e-15);
}

TEST(Propagator, TimeReversible) {
  for (double k : {0.0, 1.0, 4.5, 40.0}) {
    for (double t : {0.01, 0.7, 9.0}) {
      const Mat2 c = LinearPropagator::at(k, -t) * LinearPropagator::at(k, t);
      EXPECT_NEAR(std::abs(c(0, 0) - 1.0) + std::abs(c(0, 1)) + std::abs(c(1, 0)) + std::abs(c(1, 1) - 1.0), 0, 1e-13);
    }
  }
}

TEST(Linear, PlaneWaveIsExact) {
  const LineGrid g(20 * std::numbers::pi, 256);
  const double k = 3 * g.dk();
  const double w = kg_omega(k);
  const auto u0 = LineField::sample(g, [&](double x) { return cplx(std::cos(k * x), 0); });
  const auto ut0 = LineField::sample(g, [&](double x) { return cplx(w * std::sin(k * x), 0); });
  IntegratorOptions lin;
  lin.nonlinear = false;
  const FullState end = evolve_full({u0, ut0, 0.0}, 7.3, 0.1, 0, {}, lin);
  const auto exact = LineField::sample(g, [&](double x) { return cplx(std::cos(k * x - w * 7.3), 0); });
  EXPECT_LT(diff_norm(end.u, exact), 1e-12);
}

TEST(Linear, EnergyConservedOverManySteps) {
  const SplitState s0 = ansatz_data(0.1);
  const FullState f0 = combine(s0);
  IntegratorOptions lin;
  lin.nonlinear = false;
  FullIntegrator integ(f0, 0.05, lin);
  const double e0 = kg_energy(f0.u, f0.u_t, false);
  for (int i = 0; i < 10000; ++i) integ.step();
  const FullState f = integ.state();
  EXPECT_LE(std::abs(kg_energy(f.u, f.u_t, false) - e0) / e0, 1e-12);
}

TEST(Nonlinear, FullAndSplitAgree) {
  const SplitState s0 = ansatz_data(0.1);
  const SplitState s = evolve_split(s0, 10.0, 0.01, 0, std::function<void(const SplitState&)>{});
  const FullState f = evolve_full(combine(s0), 10.0, 0.01, 0, std::function<void(const FullState&)>{});
  EXPECT_LE(diff_norm(combine(s).u, f.u), 1e-9);
  EXPECT_LE(diff_norm(combine(s).u_t, f.u_t), 1e-9);
}

TEST(Nonlinear, FullAndSplitAgreeOnRandomData) {
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  const PeriodicGrid cell(1.0, 16);
  const LineGrid line = LineGrid::covering(cell, 40.0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<cplx> cv(cell.size()), ct(cell.size());
    for (std::size_t m = 0; m < cell.size(); ++m) {
      const double k = static_cast<double>(cell.mode_index(m));
      const double decay = 0.05 * std::exp(-k * k / 4);
      cv[m] = cplx(nd(rng), nd(rng)) * decay;
      ct[m] = cplx(nd(rng), nd(rng)) * decay;
    }
    // Hermitian symmetry keeps the periodic data real.
    auto realify = [&](std::vector<cplx>& c) {
      const auto v = PeriodicField::from_coefficients(cell, c);
      std::vector<cplx> re(v.size());
      for (std::size_t j = 0; j < re.size(); ++j) re[j] = cplx(v[j].real(), 0);
      return PeriodicField(cell, re);
    };
    const double x0 = 5 * ud(rng), width = 2 + ud(rng), k = 1 + ud(rng);
    auto bump = [&](double a) {
      return LineField::sample(line, [&, a](double x) { return cplx(a * std::exp(-std::pow((x - x0) / width, 2)) * std::cos(k * x), 0); });
    };
    const SplitState s0{realify(cv), realify(ct), bump(0.1), bump(0.05), 0.0};
    const SplitState s = evolve_split(s0, 5.0, 0.01, 0, std::function<void(const SplitState&)>{});
    const FullState f = evolve_full(combine(s0), 5.0, 0.01, 0, std::function<void(const FullState&)>{});
    EXPECT_LE(diff_norm(combine(s).u, f.u), 1e-9);
  }
}

TEST(Nonlinear, SpatiallyConstantSolutionFollowsOde) {
  const PeriodicGrid cell(1.0, 8);
  const LineGrid line = LineGrid::covering(cell, 20.0);
  const SplitState s0{PeriodicField::sample(cell, [](double) { return cplx(0.4, 0); }),
                      PeriodicField::sample(cell, [](double) { return cplx(0.1, 0); }), LineField::zeros(line),
                      LineField::zeros(line), 0.0};
  const SplitState s = evolve_split(s0, 5.0, 1e-3, 0, std::function<void(const SplitState&)>{});
  const auto [u, v] = ode_oracle(0.4, 0.1, 5.0, 20000);
  EXPECT_NEAR(s.v[3].real(), u, 1e-6);
  EXPECT_NEAR(s.v_t[5].real(), v, 1e-6);
  EXPECT_LT(s.w.max_abs(), 1e-15);
}

TEST(Nonlinear, StrangOrderIsTwo) {
  const SplitState s0 = ansatz_data(0.2, 32, 20.0);
  const std::vector<double> ladder{0.2, 0.1, 0.05, 0.025};
  const ConvergenceOrder o = self_convergence(s0, 5.0, ladder);
  EXPECT_FALSE(o.skipped);
  EXPECT_GE(o.order, 1.8);
  EXPECT_LE(o.order, 2.2);
}

TEST(Nonlinear, EnergyDriftSmall) {
  const SplitState s0 = ansatz_data(0.1);
  const FullState f0 = combine(s0);
  const double e0 = kg_energy(f0.u, f0.u_t);
  double drift = 0;
  evolve_split(s0, 100.0, 0.01, 500, [&](const SplitState& s) {
    const FullState f = combine(s);
    drift = std::max(drift, std::abs(kg_energy(f.u, f.u_t) - e0) / std::abs(e0));
  });
  EXPECT_LE(drift, 1e-6);
}

TEST(Nonlinear, MomentumNearlyConserved) {
  const SplitState s0 = ansatz_data(0.1);
  const FullState f0 = combine(s0);
  const FullState f = evolve_full(f0, 100.0, 0.01, 0, std::function<void(const FullState&)>{});
  const double p0 = kg_momentum(f0.u, f0.u_t);
  EXPECT_NEAR(kg_momentum(f.u, f.u_t), p0, 1e-6 * std::abs(p0) + 1e-12);
}

TEST(Nonlinear, SplitStateStaysReal) {
  const SplitState s = evolve_split(ansatz_data(0.1), 3.0, 0.01, 0, std::function<void(const SplitState&)>{});
  EXPECT_LT(imaginary_residue(s), 1e-12);
}

TEST(Nonlinear, BlowupIsReported) {
  const PeriodicGrid cell(1.0, 8);
  const LineGrid line = LineGrid::covering(cell, 20.0);
  const SplitState s0{PeriodicField::sample(cell, [](double) { return cplx(3.0, 0); }), PeriodicField::zeros(cell),
                      LineField::zeros(line), LineField::zeros(line), 0.0};
  try {
    evolve_split(s0, 50.0, 1e-3, 0, std::function<void(const SplitState&)>{});
    FAIL() << "expected InstabilityError";
  } catch (const InstabilityError& e) {
    EXPECT_GT(e.step(), 0);
  }
}

TEST(Integrators, RejectBadInput) {
  const SplitState s0 = ansatz_data(0.2, 16, 10.0);
  EXPECT_THROW(SplitIntegrator(s0, 0.0), DomainError);
  EXPECT_THROW(FullIntegrator(combine(s0), -1.0), DomainError);
  const std::vector<double> short_ladder{0.1, 0.05};
  EXPECT_THROW(self_convergence(s0, 1.0, short_ladder), DomainError);
  const std::vector<double> bad_ladder{0.1, 0.04, 0.02};
  EXPECT_THROW(self_convergence(s0, 1.0, bad_ladder), DomainError);
  SplitState refined = s0;
  const LineGrid fine = LineGrid::covering(s0.v.grid(), 10.0, 2);
  refined.w = LineField::zeros(fine);
  refined.w_t = LineField::zeros(fine);
  EXPECT_THROW(SplitIntegrator(refined, 0.1), GeometryError);
}

TEST(Integrators, StepPlanHitsEndTime) {
  const auto [n, h] = step_plan(1.0, 0.3);
  EXPECT_EQ(n, 4);
  EXPECT_NEAR(n * h, 1.0, 1e-15);
  EXPECT_EQ(step_plan(0.0, 0.1).first, 0);
}
