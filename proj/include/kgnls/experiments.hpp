#pragma once

// Residual scans, long-time convergence studies and gallery data. Every run is
// described by an ExperimentConfig; per-epsilon work items are independent and
// go through a small worker pool.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kgnls/error.hpp"
#include "kgnls/kg_integrator.hpp"
#include "kgnls/nls_library.hpp"
#include "kgnls/params.hpp"
#include "kgnls/spectral_spaces.hpp"
#include "kgnls/wavepacket_ansatz.hpp"

namespace kgnls {

struct ExperimentConfig {
  // physics
  double k0 = 1.0;
  std::vector<double> epsilon_ladder{0.2, 0.14, 0.1, 0.07, 0.05};
  double epsilon0 = 0.2;
  double s = 1.0;
  // solution
  std::string kind = "peregrine";  // peregrine | akhmediev | kuznetsov_ma | higher_order
  double a = 0.25;
  int order = 1;
  std::string poly_g;
  std::string poly_h;
  std::string poly_d;
  double slow_time_offset = 0.0;
  // grids
  std::size_t n_modes = 32;
  double slow_length = 40.0;
  // time
  double T0 = 1.0;
  double dt = 0.02;
  std::size_t time_samples = 200;
  std::size_t residual_samples = 200;
  bool dt_check = true;
  double dt_check_tolerance = 0.1;
  // controls
  bool third_harmonic = true;
  double omega0_shift = 0.0;
  double cg_shift = 0.0;
  // run
  std::size_t workers = 0;  // 0: hardware concurrency
  bool record_wall_time = true;
};

/// Carrier data for one epsilon, with the configured control shifts applied.
inline PhysicalParams params_for(const ExperimentConfig& cfg, double eps) {
  PhysicalParams p = make_params(cfg.k0, eps);
  p.omega0 += cfg.omega0_shift;
  p.cg += cfg.cg_shift;
  return p;
}

inline ClosedFormSolution make_solution(const ExperimentConfig& cfg) {
  if (cfg.kind == "peregrine") return ClosedFormSolution::peregrine();
  if (cfg.kind == "akhmediev") return ClosedFormSolution::akhmediev(cfg.a);
  if (cfg.kind == "kuznetsov_ma") return ClosedFormSolution::kuznetsov_ma(cfg.a);
  if (cfg.kind == "higher_order") {
    return ClosedFormSolution::higher_order(cfg.order, Polynomial2::parse(cfg.poly_g), Polynomial2::parse(cfg.poly_h),
                                            Polynomial2::parse(cfg.poly_d));
  }
  throw ConfigError("solution.kind: unknown solution '" + cfg.kind + "'");
}

inline void validate(const ExperimentConfig& cfg) {
  if (!(cfg.k0 > 0.0) || !std::isfinite(cfg.k0)) throw ConfigError("physics.k0: must be > 0");
  if (!(cfg.epsilon0 > 0.0)) throw ConfigError("physics.epsilon0: must be > 0");
  if (cfg.epsilon_ladder.empty()) throw ConfigError("physics.epsilon_ladder: empty");
  for (std::size_t i = 0; i < cfg.epsilon_ladder.size(); ++i) {
    const double e = cfg.epsilon_ladder[i];
    if (!(e > 0.0) || e > cfg.epsilon0) {
      throw ConfigError("physics.epsilon_ladder: entries must lie in (0, epsilon0]");
    }
    if (i > 0 && !(e < cfg.epsilon_ladder[i - 1])) {
      throw ConfigError("physics.epsilon_ladder: must be strictly decreasing");
    }
  }
  if (!(cfg.s >= 0.0)) throw ConfigError("physics.s: must be >= 0");
  if (!(cfg.T0 > 0.0)) throw ConfigError("time.T0: must be > 0");
  if (!(cfg.dt > 0.0)) throw ConfigError("time.dt: must be > 0");
  if (cfg.time_samples < 1) throw ConfigError("time.samples: must be >= 1");
  if (cfg.residual_samples < 1) throw ConfigError("time.residual_samples: must be >= 1");
  if (cfg.n_modes < 4 || cfg.n_modes % 2 != 0) throw ConfigError("grids.n_modes: must be even and >= 4");
  if (!(cfg.slow_length > 0.0)) throw ConfigError("grids.slow_length: must be > 0");
  if (!(cfg.a > 0.0)) throw ConfigError("solution.a: must be > 0");
  if (!(cfg.dt_check_tolerance > 0.0)) throw ConfigError("time.dt_check_tolerance: must be > 0");
  make_solution(cfg);
}

/// Per-epsilon measurements. Fields a run does not measure stay NaN.
struct ExperimentRecord {
  double epsilon = 0.0;
  double sup_err_v = std::numeric_limits<double>::quiet_NaN();
  double sup_err_w = std::numeric_limits<double>::quiet_NaN();
  double res_v = std::numeric_limits<double>::quiet_NaN();
  double res_w = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  double trunc_monitor = 0.0;

  double sup_err() const { return sup_err_v + sup_err_w; }
};

/// value ~ constant * eps^exponent, least squares in log-log.
struct SlopeFit {
  double exponent = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

inline SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw InputError("fit_slope: need at least 3 points");
  double sx = 0, sy = 0;
  for (const auto& [e, v] : points) {
    if (!(e > 0.0) || !(v > 0.0) || !std::isfinite(e) || !std::isfinite(v)) {
      throw InputError("fit_slope: epsilon and values must be positive and finite");
    }
    sx += std::log(e);
    sy += std::log(v);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [e, v] : points) {
    const double dx = std::log(e) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw InputError("fit_slope: all epsilon values coincide");
  SlopeFit f;
  f.exponent = sxy / sxx;
  f.constant = std::exp(my - f.exponent * mx);
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  f.points = points.size();
  return f;
}

template <class Get>
SlopeFit fit_records(const std::vector<ExperimentRecord>& records, Get&& get) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : records) pts.emplace_back(r.epsilon, get(r));
  return fit_slope(pts);
}

/// Cooperative cancellation flag checked between time steps and samples.
struct RunControl {
  const std::atomic<bool>* stop = nullptr;
  bool cancelled() const { return stop != nullptr && stop->load(std::memory_order_relaxed); }
};

/// Runs work(i) for i in [0, n) on at most `workers` threads. The first
/// exception thrown by any item is rethrown after all threads joined.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& work) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex m;
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        work(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!first) first = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    loop();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
  }
  if (first) std::rethrow_exception(first);
}

/// Records keyed by epsilon, emitted in ladder (decreasing) order.
class RecordSet {
 public:
  void put(const ExperimentRecord& r) {
    std::lock_guard lock(m_);
    records_[r.epsilon] = r;
  }
  std::vector<ExperimentRecord> ordered() const {
    std::lock_guard lock(m_);
    std::vector<ExperimentRecord> out;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) out.push_back(it->second);
    return out;
  }

 private:
  mutable std::mutex m_;
  std::map<double, ExperimentRecord> records_;
};

inline WavePacketAnsatz make_ansatz(const ExperimentConfig& cfg, double eps) {
  const PhysicalParams p = params_for(cfg, eps);
  AnsatzOptions opt;
  opt.third_harmonic = cfg.third_harmonic;
  return WavePacketAnsatz(p, kg_envelope(p, make_solution(cfg), cfg.slow_time_offset),
                          AnsatzGeometry::make(p, cfg.n_modes, cfg.slow_length), opt);
}

inline double horizon(const ExperimentConfig& cfg, double eps) { return cfg.T0 / (eps * eps); }

struct ScanResult {
  std::vector<ExperimentRecord> records;
  SlopeFit fit_v;
  SlopeFit fit_w;
  bool truncated = false;
};

/// sup over sampled t in [0, T0/eps^2] of the H^s residual norms for every
/// epsilon of the ladder, then log-log fits.
inline ScanResult residual_scan(const ExperimentConfig& cfg, RunControl ctl = {}) {
  validate(cfg);
  require_certified(make_solution(cfg));
  const SobolevIndex s(cfg.s);
  RecordSet set;
  std::atomic<bool> truncated{false};
  parallel_for(cfg.epsilon_ladder.size(), cfg.workers, [&](std::size_t i) {
    const double eps = cfg.epsilon_ladder[i];
    const auto start = std::chrono::steady_clock::now();
    const WavePacketAnsatz ansatz = make_ansatz(cfg, eps);
    ExperimentRecord rec;
    rec.epsilon = eps;
    rec.res_v = 0.0;
    rec.res_w = 0.0;
    const double t_end = horizon(cfg, eps);
    for (std::size_t k = 0; k <= cfg.residual_samples; ++k) {
      if (ctl.cancelled()) {
        truncated = true;
        return;
      }
      const double t = t_end * static_cast<double>(k) / static_cast<double>(cfg.residual_samples);
      const AnsatzState st = ansatz.at(t);
      rec.res_v = std::max(rec.res_v, periodic_norm(residual_v(st), s));
      rec.res_w = std::max(rec.res_w, line_norm(residual_w(st), s));
      rec.trunc_monitor = std::max(rec.trunc_monitor, st.boundary_ratio);
    }
    if (cfg.record_wall_time) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    set.put(rec);
  });
  ScanResult out;
  out.records = set.ordered();
  out.truncated = truncated;
  if (out.records.size() >= 3) {
    out.fit_v = fit_records(out.records, [](const ExperimentRecord& r) { return r.res_v; });
    out.fit_w = fit_records(out.records, [](const ExperimentRecord& r) { return r.res_w; });
  }
  return out;
}

/// Split-system initial data from the ansatz at time t.
inline SplitState initial_state(const WavePacketAnsatz& ansatz, double t = 0.0) {
  const AnsatzState a = ansatz.at(t, false);
  return {a.psi_v, a.d_psi_v, a.psi_w, a.d_psi_w, t};
}

/// Edge amplitude of the numerical w relative to its maximum.
inline double edge_ratio(const LineField& w) {
  const double peak = w.max_abs();
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(w[0]), std::abs(w[w.size() - 1])) / peak;
}

struct ErrorSample {
  double t = 0.0;
  double err_v = 0.0;
  double err_w = 0.0;
  double energy = 0.0;
  double amplitude = 0.0;
};

struct LongRun {
  std::vector<ErrorSample> samples;
  SplitState final_state;
  double trunc_monitor = 0.0;
  /// sup over samples of the mixed-norm gap to a run at dt/2 (NaN if not run).
  double dt_gap = std::numeric_limits<double>::quiet_NaN();
  bool truncated = false;
};

/// Evolves the split system from ansatz data to T0/eps^2 and samples the
/// distance to the ansatz at time_samples + 1 equispaced times.
inline LongRun long_run(const ExperimentConfig& cfg, const WavePacketAnsatz& ansatz, double eps, bool with_dt_check,
                        RunControl ctl = {}) {
  const SobolevIndex s(cfg.s);
  const double t_end = horizon(cfg, eps);
  const std::size_t n = cfg.time_samples;
  const long per_sample = std::max<long>(1, static_cast<long>(std::ceil(t_end / (static_cast<double>(n) * cfg.dt))));
  const double h = t_end / static_cast<double>(per_sample * static_cast<long>(n));
  const SplitState init = initial_state(ansatz);
  SplitIntegrator main(init, h);
  std::optional<SplitIntegrator> fine;
  if (with_dt_check) fine.emplace(init, 0.5 * h);

  LongRun run{.samples = {}, .final_state = init};
  run.dt_gap = with_dt_check ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  auto record = [&](const SplitState& st) {
    const AnsatzState a = ansatz.at(st.t, false);
    std::vector<cplx> dv(st.v.size()), dw(st.w.size());
    for (std::size_t j = 0; j < dv.size(); ++j) dv[j] = st.v[j] - a.psi_v[j];
    for (std::size_t j = 0; j < dw.size(); ++j) dw[j] = st.w[j] - a.psi_w[j];
    ErrorSample e;
    e.t = st.t;
    e.err_v = periodic_norm(PeriodicField(st.v.grid(), std::move(dv)), s);
    e.err_w = line_norm(LineField(st.w.grid(), std::move(dw)), s);
    const FullState u = combine(st);
    e.energy = kg_energy(u.u, u.u_t);
    e.amplitude = u.u.max_abs();
    run.samples.push_back(e);
    run.trunc_monitor = std::max({run.trunc_monitor, a.boundary_ratio, edge_ratio(st.w)});
  };
  record(init);
  for (std::size_t k = 1; k <= n; ++k) {
    for (long j = 0; j < per_sample; ++j) {
      if (ctl.cancelled()) {
        run.truncated = true;
        run.final_state = main.state();
        return run;
      }
      main.step();
      if (fine) {
        fine->step();
        fine->step();
      }
    }
    const SplitState st = main.state();
    record(st);
    if (fine) {
      const SplitState sf = fine->state();
      std::vector<cplx> dv(st.v.size()), dw(st.w.size());
      for (std::size_t j = 0; j < dv.size(); ++j) dv[j] = st.v[j] - sf.v[j];
      for (std::size_t j = 0; j < dw.size(); ++j) dw[j] = st.w[j] - sf.w[j];
      run.dt_gap = std::max(run.dt_gap, mixed_norm(PeriodicField(st.v.grid(), std::move(dv)),
                                                   LineField(st.w.grid(), std::move(dw)), s));
    }
  }
  run.final_state = main.state();
  return run;
}

struct ConvergenceResult {
  std::vector<ExperimentRecord> records;
  SlopeFit fit;    // mixed norm
  SlopeFit fit_v;
  SlopeFit fit_w;
  double dt_check_epsilon = 0.0;
  double dt_gap = std::numeric_limits<double>::quiet_NaN();
  double dt_gap_relative = std::numeric_limits<double>::quiet_NaN();
  bool dt_check_passed = true;
  bool truncated = false;
};

/// Long-time error study over the ladder. The smallest epsilon also runs at
/// dt/2; if that gap exceeds dt_check_tolerance times the measured error the
/// time-integration error is not subdominant and the study is rejected.
inline ConvergenceResult convergence_study(const ExperimentConfig& cfg, RunControl ctl = {}) {
  validate(cfg);
  require_certified(make_solution(cfg));
  RecordSet set;
  std::atomic<bool> truncated{false};
  ConvergenceResult out;
  const std::size_t check_index = cfg.epsilon_ladder.size() - 1;
  out.dt_check_epsilon = cfg.epsilon_ladder[check_index];
  std::mutex m;
  parallel_for(cfg.epsilon_ladder.size(), cfg.workers, [&](std::size_t i) {
    const double eps = cfg.epsilon_ladder[i];
    const auto start = std::chrono::steady_clock::now();
    const WavePacketAnsatz ansatz = make_ansatz(cfg, eps);
    const bool check = cfg.dt_check && i == check_index;
    const LongRun run = long_run(cfg, ansatz, eps, check, ctl);
    if (run.truncated) {
      truncated = true;
      return;
    }
    ExperimentRecord rec;
    rec.epsilon = eps;
    rec.sup_err_v = 0.0;
    rec.sup_err_w = 0.0;
    for (const auto& e : run.samples) {
      rec.sup_err_v = std::max(rec.sup_err_v, e.err_v);
      rec.sup_err_w = std::max(rec.sup_err_w, e.err_w);
    }
    rec.trunc_monitor = run.trunc_monitor;
    if (cfg.record_wall_time) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    if (check) {
      std::lock_guard lock(m);
      out.dt_gap = run.dt_gap;
      double sup = 0.0;
      for (const auto& e : run.samples) sup = std::max(sup, e.err_v + e.err_w);
      out.dt_gap_relative = run.dt_gap / std::max(sup, 1e-300);
      out.dt_check_passed = out.dt_gap_relative <= cfg.dt_check_tolerance;
    }
    set.put(rec);
  });
  out.records = set.ordered();
  out.truncated = truncated;
  if (!out.truncated && !out.dt_check_passed) {
    throw CertificationError("convergence_study: dt check failed, time-integration gap is " +
                             std::to_string(out.dt_gap_relative) + " of the model error");
  }
  if (out.records.size() >= 3) {
    out.fit = fit_records(out.records, [](const ExperimentRecord& r) { return r.sup_err(); });
    out.fit_v = fit_records(out.records, [](const ExperimentRecord& r) { return r.sup_err_v; });
    out.fit_w = fit_records(out.records, [](const ExperimentRecord& r) { return r.sup_err_w; });
  }
  return out;
}

/// Values on a regular (x, y) lattice, row-major in y.
struct Heatmap {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  std::size_t nx = 0, ny = 0;
  std::vector<double> values;
};

/// |psi(xi, tau)| of a normalized NLS solution on a window.
inline Heatmap envelope_heatmap(const ClosedFormSolution& sol, const Window& w) {
  Heatmap h{"|psi| " + sol.name(), "xi", "tau", w.xi_min, w.xi_max, w.tau_min, w.tau_max, w.n_xi, w.n_tau, {}};
  h.values.reserve(w.n_xi * w.n_tau);
  for (std::size_t j = 0; j < w.n_tau; ++j) {
    for (std::size_t i = 0; i < w.n_xi; ++i) h.values.push_back(std::abs(sol(w.xi(i), w.tau(j))));
  }
  return h;
}

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct GalleryResult {
  std::vector<Heatmap> maps;
  LineField final_u;
  LineField final_ansatz;
  double epsilon = 0.0;
};

/// Envelope maps for the configured solution and the canonical trio, plus
/// space-time maps of the ansatz and of the simulation error at the first
/// ladder epsilon.
inline GalleryResult gallery(const ExperimentConfig& cfg, std::size_t nx = 160, RunControl ctl = {}) {
  validate(cfg);
  const double eps = cfg.epsilon_ladder.front();
  const WavePacketAnsatz ansatz = make_ansatz(cfg, eps);
  const SplitState init = initial_state(ansatz);
  GalleryResult g{.maps = {}, .final_u = combine(init.v, init.w), .final_ansatz = combine(init.v, init.w)};
  Window w;
  w.n_xi = w.n_tau = nx;
  const ClosedFormSolution sol = make_solution(cfg);
  g.maps.push_back(envelope_heatmap(sol, w));
  for (const auto& other : {ClosedFormSolution::peregrine(), ClosedFormSolution::akhmediev(0.25),
                            ClosedFormSolution::kuznetsov_ma(0.75)}) {
    if (other.name() != sol.name()) g.maps.push_back(envelope_heatmap(other, w));
  }

  g.epsilon = eps;
  const std::size_t rows = std::min<std::size_t>(cfg.time_samples, 200);
  ExperimentConfig c = cfg;
  c.time_samples = rows;
  const double t_end = horizon(c, eps);
  const auto& line = ansatz.geometry().line;
  const std::size_t stride = std::max<std::size_t>(1, line.size() / nx);
  const std::size_t cols = line.size() / stride;

  Heatmap am{"ansatz |u|, eps " + short_number(eps), "x", "t", line.node(0), line.node((cols - 1) * stride),
             0.0, t_end, cols, rows + 1, {}};
  Heatmap em = am;
  em.title = "|u - ansatz|, eps " + short_number(eps);

  const std::size_t n = rows;
  const long per_sample = std::max<long>(1, static_cast<long>(std::ceil(t_end / (static_cast<double>(n) * c.dt))));
  const double h = t_end / static_cast<double>(per_sample * static_cast<long>(n));
  SplitIntegrator integ(init, h);
  auto row = [&](const SplitState& st) {
    const AnsatzState a = ansatz.at(st.t, false);
    const LineField u = combine(st.v, st.w);
    const LineField ua = combine(a.psi_v, a.psi_w);
    for (std::size_t i = 0; i < cols; ++i) {
      am.values.push_back(std::abs(ua[i * stride]));
      em.values.push_back(std::abs(u[i * stride] - ua[i * stride]));
    }
    g.final_u = u;
    g.final_ansatz = ua;
  };
  row(integ.state());
  for (std::size_t k = 1; k <= n && !ctl.cancelled(); ++k) {
    for (long j = 0; j < per_sample; ++j) integ.step();
    row(integ.state());
  }
  em.ny = am.ny = am.values.size() / cols;
  g.maps.push_back(std::move(am));
  g.maps.push_back(std::move(em));
  return g;
}

struct SimulationResult {
  double epsilon = 0.0;
  std::vector<ErrorSample> samples;
  FullState final_state;
  FullState final_ansatz;
  double energy_drift = 0.0;  // max relative deviation from the initial energy
  double trunc_monitor = 0.0;
  bool truncated = false;
};

/// One long run at a single epsilon with diagnostics.
inline SimulationResult simulate(const ExperimentConfig& cfg, double eps, RunControl ctl = {}) {
  validate(cfg);
  const WavePacketAnsatz ansatz = make_ansatz(cfg, eps);
  LongRun run = long_run(cfg, ansatz, eps, false, ctl);
  const AnsatzState a = ansatz.at(run.final_state.t, false);
  SimulationResult r{.epsilon = eps,
                     .samples = std::move(run.samples),
                     .final_state = combine(run.final_state),
                     .final_ansatz = {combine(a.psi_v, a.psi_w), combine(a.d_psi_v, a.d_psi_w), a.t}};
  const double e0 = r.samples.front().energy;
  for (const auto& e : r.samples) r.energy_drift = std::max(r.energy_drift, std::abs(e.energy - e0) / std::abs(e0));
  r.trunc_monitor = run.trunc_monitor;
  r.truncated = run.truncated;
  return r;
}

}  // namespace kgnls
