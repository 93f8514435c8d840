#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>

#include "kgnls/experiments.hpp"

using namespace kgnls;

namespace {

ExperimentConfig quick() {
  ExperimentConfig c;
  c.epsilon_ladder = {0.2, 0.14, 0.1};
  c.residual_samples = 8;
  c.time_samples = 20;
  c.T0 = 0.1;
  c.dt = 0.05;
  c.record_wall_time = false;
  return c;
}

}  // namespace

TEST(FitSlope, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double e : {0.2, 0.1, 0.05, 0.025}) pts.emplace_back(e, 7 * e * e * e);
  const SlopeFit f = fit_slope(pts);
  EXPECT_NEAR(f.exponent, 3.0, 1e-12);
  EXPECT_NEAR(f.constant, 7.0, 1e-10);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_EQ(f.points, 4u);
}

TEST(FitSlope, NoisyDataLowersR2) {
  std::vector<std::pair<double, double>> pts{{0.2, 1.0}, {0.1, 0.3}, {0.05, 0.2}, {0.025, 0.01}};
  const SlopeFit f = fit_slope(pts);
  EXPECT_LT(f.r2, 0.99);
  EXPECT_GT(f.r2, 0.0);
}

TEST(FitSlope, RejectsDegenerateInput) {
  EXPECT_THROW(fit_slope({{0.1, 1.0}, {0.05, 0.5}}), InputError);
  EXPECT_THROW(fit_slope({{0.1, 1.0}, {0.05, 0.0}, {0.02, 0.1}}), InputError);
  EXPECT_THROW(fit_slope({{0.1, 1.0}, {0.1, 0.5}, {0.1, 0.1}}), InputError);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(validate(c));
  c.epsilon_ladder = {0.1, 0.14, 0.05};
  EXPECT_THROW(validate(c), ConfigError);
  c.epsilon_ladder = {0.3, 0.1, 0.05};
  EXPECT_THROW(validate(c), ConfigError);
  c = ExperimentConfig{};
  c.T0 = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = ExperimentConfig{};
  c.kind = "soliton";
  EXPECT_THROW(validate(c), ConfigError);
  c = ExperimentConfig{};
  c.n_modes = 31;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Pool, RunsEveryItemOnceAndPropagatesErrors) {
  std::atomic<int> sum{0};
  parallel_for(100, 4, [&](std::size_t i) { sum += static_cast<int>(i); });
  EXPECT_EQ(sum.load(), 4950);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw InstabilityError("boom", 1);
                            }),
               InstabilityError);
}

TEST(ResidualScan, RecordsOrderedAndIndependentOfWorkers) {
  ExperimentConfig c = quick();
  c.workers = 1;
  const ScanResult a = residual_scan(c);
  c.workers = 3;
  const ScanResult b = residual_scan(c);
  ASSERT_EQ(a.records.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.records[i].epsilon, c.epsilon_ladder[i]);
    EXPECT_EQ(a.records[i].res_v, b.records[i].res_v);
    EXPECT_EQ(a.records[i].res_w, b.records[i].res_w);
    EXPECT_TRUE(std::isnan(a.records[i].sup_err_v));
    EXPECT_EQ(a.records[i].wall_ms, 0.0);
  }
  EXPECT_GT(a.fit_v.exponent, 4.0);
}

TEST(ResidualScan, Cancellation) {
  std::atomic<bool> stop{true};
  const ScanResult r = residual_scan(quick(), RunControl{&stop});
  EXPECT_TRUE(r.truncated);
  EXPECT_TRUE(r.records.empty());
}

TEST(Convergence, ShortRunProducesRecordsAndDtCheck) {
  ExperimentConfig c = quick();
  const ConvergenceResult r = convergence_study(c);
  ASSERT_EQ(r.records.size(), 3u);
  for (const auto& rec : r.records) {
    EXPECT_GT(rec.sup_err_v, 0.0);
    EXPECT_GT(rec.sup_err_w, 0.0);
    EXPECT_TRUE(std::isnan(rec.res_v));
    EXPECT_LT(rec.trunc_monitor, kTruncationLimit);
  }
  EXPECT_TRUE(r.dt_check_passed);
  EXPECT_EQ(r.dt_check_epsilon, 0.1);
  EXPECT_LT(r.dt_gap_relative, c.dt_check_tolerance);
}

TEST(Convergence, CoarseStepFailsDtCheck) {
  ExperimentConfig c = quick();
  c.dt = 0.3;
  c.time_samples = 5;
  c.dt_check_tolerance = 1e-6;
  EXPECT_THROW(convergence_study(c), CertificationError);
}

TEST(Convergence, SampledSupIsLowerBoundOfDenserSampling) {
  ExperimentConfig c = quick();
  c.epsilon_ladder = {0.2};
  const WavePacketAnsatz an = make_ansatz(c, 0.2);
  const LongRun coarse = long_run(c, an, 0.2, false);
  c.time_samples = 40;
  const LongRun dense = long_run(c, an, 0.2, false);
  double sc = 0, sd = 0;
  for (const auto& s : coarse.samples) sc = std::max(sc, s.err_w);
  for (const auto& s : dense.samples) sd = std::max(sd, s.err_w);
  EXPECT_EQ(coarse.samples.size(), 21u);
  EXPECT_LE(sc, sd * (1 + 1e-9));
}

TEST(Convergence, DoublingHorizonGrowsErrorBoundedly) {
  ExperimentConfig c;
  c.record_wall_time = false;
  c.time_samples = 50;
  const WavePacketAnsatz an = make_ansatz(c, 0.14);
  auto sup = [&](double T0) {
    c.T0 = T0;
    double m = 0;
    for (const auto& s : long_run(c, an, 0.14, false).samples) m = std::max(m, s.err_v + s.err_w);
    return m;
  };
  const double one = sup(1.0), two = sup(2.0);
  EXPECT_GE(two, one * 0.999);
  EXPECT_LT(two / one, 10.0);
}

TEST(Convergence, ExponentStableUnderGridAndDomainDoubling) {
  ExperimentConfig c;
  c.epsilon_ladder = {0.2, 0.14, 0.1};
  c.T0 = 0.5;
  c.time_samples = 50;
  c.dt_check = false;
  c.record_wall_time = false;
  const double base = convergence_study(c).fit.exponent;
  c.n_modes *= 2;
  c.slow_length *= 2;
  const double doubled = convergence_study(c).fit.exponent;
  EXPECT_GE(doubled, base - 1e-3) << base << " -> " << doubled;
}

TEST(Simulation, EnergyDriftAndFinalFields) {
  ExperimentConfig c = quick();
  const SimulationResult r = simulate(c, 0.2);
  EXPECT_NEAR(r.final_state.t, 0.1 / 0.04, 1e-9);
  EXPECT_LT(r.energy_drift, 1e-5);
  EXPECT_EQ(r.samples.size(), c.time_samples + 1);
}

TEST(Gallery, ProducesMaps) {
  ExperimentConfig c = quick();
  c.time_samples = 10;
  const GalleryResult g = gallery(c, 40);
  ASSERT_EQ(g.maps.size(), 5u);
  std::set<std::string> titles;
  for (const auto& m : g.maps) {
    EXPECT_EQ(m.values.size(), m.nx * m.ny);
    titles.insert(m.title);
  }
  EXPECT_EQ(titles.size(), 5u);
  EXPECT_EQ(g.final_u.size(), g.final_ansatz.size());
}

TEST(Solutions, MakeSolutionFromConfig) {
  ExperimentConfig c;
  c.kind = "kuznetsov_ma";
  c.a = 0.75;
  EXPECT_EQ(make_solution(c).name(), "kuznetsov_ma");
  c.kind = "higher_order";
  c.order = 1;
  c.poly_g = "0 0 4";
  c.poly_h = "0 1 8";
  c.poly_d = "0 0 1; 2 0 4; 0 2 4";
  EXPECT_NEAR(std::abs(make_solution(c)(0, 0)), 3.0, 1e-14);
  c.kind = "akhmediev";
  c.a = 0.7;
  EXPECT_THROW(make_solution(c), DomainError);
}
