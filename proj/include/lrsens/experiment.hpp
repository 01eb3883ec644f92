#ifndef LRSENS_EXPERIMENT_HPP
#define LRSENS_EXPERIMENT_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "lrsens/estimators.hpp"
#include "lrsens/model.hpp"
#include "lrsens/networks.hpp"
#include "lrsens/oracle.hpp"
#include "lrsens/ssa.hpp"

namespace lrsens {

enum class CenteringKind { Oracle, PreRun, Explicit };

struct CenteringSpec {
  CenteringKind kind = CenteringKind::Oracle;
  std::vector<std::int64_t> oracle_bounds;  // truncation caps for Oracle
  double prerun_factor = 10.0;              // pre-run length = factor * t_end
  std::vector<double> values;               // Explicit, one per observable
};

struct EnsembleConfig {
  ReactionNetwork net;
  std::vector<double> c;
  State x0;
  double t_end = 0.0;
  std::vector<double> checkpoints;
  std::size_t n_samples = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::size_t> params;
  std::vector<Observable> observables;
  CenteringSpec centering;
  std::vector<EstimatorKind> estimators{kAllEstimators.begin(),
                                        kAllEstimators.end()};
  std::size_t n_threads = 0;  // 0 -> hardware concurrency
  double burn_in_fraction = 0.0;
};

struct EstimateStats {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

struct EnsembleReport {
  std::vector<double> checkpoints;
  std::vector<std::size_t> params;
  std::vector<std::string> param_names;
  std::vector<std::string> observable_names;
  std::vector<EstimatorKind> estimators;
  std::size_t n_samples = 0;
  std::uint64_t base_seed = 0;
  std::int64_t absorbed_count = 0;

  // flat index (((e * n_params + k) * n_obs + o) * n_ck + i)
  std::vector<EstimateStats> stats;
  std::vector<SlopeFit> slopes;  // per (e, k, o), over post-burn-in checkpoints

  std::vector<double> z_mean, z_se;  // [k * n_ck + i]
  std::vector<double> y_mean, y_se;  // [j * n_ck + i]
  bool martingale_healthy = true;    // all |Z means| within 3 SE of 0

  std::string centering_provenance;
  std::vector<double> centering_values;
  double centering_halfwidth = 0.0;  // pre-run 95% half-width, else 0

  std::size_t n_ck() const { return checkpoints.size(); }
  std::size_t stat_index(std::size_t e, std::size_t k, std::size_t o,
                         std::size_t i) const {
    return ((e * params.size() + k) * observable_names.size() + o) * n_ck() + i;
  }
  std::size_t slope_index(std::size_t e, std::size_t k, std::size_t o) const {
    return (e * params.size() + k) * observable_names.size() + o;
  }
  const EstimateStats& at(std::size_t e, std::size_t k, std::size_t o,
                          std::size_t i) const {
    return stats[stat_index(e, k, o, i)];
  }
};

/// OLS of log(Var) on log(t) over checkpoints past the burn-in fraction.
inline SlopeFit variance_slope(const std::vector<double>& times,
                               const std::vector<double>& variances,
                               double burn_in_fraction = 0.0) {
  if (times.size() != variances.size() || times.empty())
    throw ModelError("variance_slope: size mismatch");
  const double t_min = burn_in_fraction * times.back();
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_min) continue;
    if (!(variances[i] > 0.0))
      throw NumericalError("variance_slope: non-positive variance at t=" +
                           std::to_string(times[i]));
    lx.push_back(std::log(times[i]));
    ly.push_back(std::log(variances[i]));
  }
  if (lx.size() < 3)
    throw ModelError("variance_slope: need >= 3 checkpoints after burn-in");
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  SlopeFit fit;
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r2 = vyy > 0.0 ? vxy * vxy / (vxx * vyy) : 1.0;
  return fit;
}

namespace detail {

struct ResolvedCentering {
  std::vector<double> values;
  std::string provenance;
  double halfwidth = 0.0;
};

inline ResolvedCentering resolve_centering(const EnsembleConfig& cfg) {
  ResolvedCentering rc;
  switch (cfg.centering.kind) {
    case CenteringKind::Explicit:
      if (cfg.centering.values.size() != cfg.observables.size())
        throw ModelError("explicit centering needs one value per observable");
      rc.values = cfg.centering.values;
      rc.provenance = "explicit";
      return rc;
    case CenteringKind::Oracle: {
      Truncation tr = Truncation::reachable_box(cfg.net, cfg.x0,
                                                cfg.centering.oracle_bounds);
      auto irr = check_irreducible(cfg.net, cfg.c, tr);
      if (!irr.irreducible)
        throw ModelError("oracle centering: truncation is reducible (" +
                         std::to_string(irr.components.size()) +
                         " components)");
      FspSolution sol = stationary_distribution(cfg.net, cfg.c, tr);
      const Eigen::VectorXd& pi = sol.pi;
      for (const Observable& f : cfg.observables)
        rc.values.push_back(pi.dot(tabulate(f, tr)));
      rc.provenance = "oracle";
      return rc;
    }
    case CenteringKind::PreRun: {
      const double t_pre = cfg.centering.prerun_factor * cfg.t_end;
      const std::size_t n_batches = 20;
      SimulateOptions opt;
      opt.net = &cfg.net;
      opt.c = cfg.c;
      opt.x0 = cfg.x0;
      opt.t_end = t_pre;
      opt.observables = cfg.observables;
      for (std::size_t b = 1; b <= n_batches; ++b)
        opt.checkpoints.push_back(t_pre * static_cast<double>(b) /
                                  static_cast<double>(n_batches));
      // dedicated stream outside the trajectory range
      TrajectoryRecord rec =
          simulate(opt, {cfg.base_seed, 0x8000000000000000ull});
      if (rec.absorbed)
        throw ModelError("pre-run centering: trajectory absorbed");
      double worst_hw = 0.0;
      for (std::size_t o = 0; o < cfg.observables.size(); ++o) {
        Moments batch;
        double prev = 0.0, prev_t = 0.0;
        for (const Checkpoint& ck : rec.checkpoints) {
          const double cur = ck.acc.int_f[o].value();
          batch.add((cur - prev) / (ck.time - prev_t));
          prev = cur;
          prev_t = ck.time;
        }
        rc.values.push_back(rec.checkpoints.back().acc.int_f[o].value() /
                            t_pre);
        worst_hw = std::max(worst_hw, 1.96 * batch.std_error());
      }
      rc.provenance = "prerun(factor=" +
                      std::to_string(cfg.centering.prerun_factor) + ")";
      rc.halfwidth = worst_hw;
      return rc;
    }
  }
  throw ModelError("unresolvable centering");
}

}  // namespace detail

/// Runs N independent trajectories (stream indices 0..N-1), aggregates the
/// selected estimators at every checkpoint, and fits the variance-vs-time
/// slopes. Trajectories may execute on any number of threads; moments are
/// merged in trajectory-index order, so the report is bit-identical for
/// any thread count.
inline EnsembleReport run_ensemble(const EnsembleConfig& cfg) {
  if (cfg.n_samples < 2) throw ModelError("run_ensemble: need N >= 2");
  if (cfg.checkpoints.empty())
    throw ModelError("run_ensemble: need >= 1 checkpoint");
  cfg.net.validate();

  const std::size_t n_ck = cfg.checkpoints.size();
  const std::size_t n_par = cfg.params.size();
  const std::size_t n_obs = cfg.observables.size();
  const std::size_t n_rxn = cfg.net.reaction_count();
  const std::size_t n_est = cfg.estimators.size();

  detail::ResolvedCentering ctr = detail::resolve_centering(cfg);

  SimulateOptions opt;
  opt.net = &cfg.net;
  opt.c = cfg.c;
  opt.x0 = cfg.x0;
  opt.t_end = cfg.t_end;
  opt.checkpoints = cfg.checkpoints;
  opt.observables = cfg.observables;
  opt.params = cfg.params;
  opt.centering = ctr.values;
  validate_options(opt);

  // per-trajectory scratch: estimator values, Z_k and Y_j per checkpoint
  const std::size_t vals_per_traj =
      n_ck * (n_est * n_par * n_obs + n_par + n_rxn);
  std::vector<double> store(cfg.n_samples * vals_per_traj, 0.0);
  std::vector<std::uint8_t> absorbed(cfg.n_samples, 0);

  auto run_one = [&](std::size_t traj) {
    TrajectoryRecord rec = simulate(opt, {cfg.base_seed, traj});
    absorbed[traj] = rec.absorbed ? 1 : 0;
    double* out = store.data() + traj * vals_per_traj;
    for (std::size_t i = 0; i < n_ck; ++i) {
      const SensitivityAccumulators& acc = rec.checkpoints[i].acc;
      const double t = rec.checkpoints[i].time;
      for (std::size_t e = 0; e < n_est; ++e)
        for (std::size_t k = 0; k < n_par; ++k)
          for (std::size_t o = 0; o < n_obs; ++o) {
            double v = 0.0;
            switch (cfg.estimators[e]) {
              case EstimatorKind::LR: v = lr_estimate(acc, t, k, o); break;
              case EstimatorKind::CLR:
                v = clr_estimate(acc, t, ctr.values[o], k, o);
                break;
              case EstimatorKind::IntLR:
                v = int_lr_estimate(acc, t, k, o);
                break;
              case EstimatorKind::IntCLR:
                v = int_clr_estimate(acc, t, k, o);
                break;
            }
            *out++ = v;
          }
      for (std::size_t k = 0; k < n_par; ++k) *out++ = acc.z[k];
      for (std::size_t j = 0; j < n_rxn; ++j)
        *out++ = static_cast<double>(acc.r[j]) - acc.int_a[j].value();
    }
  };

  std::size_t n_threads = cfg.n_threads;
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  if (n_threads <= 1) {
    for (std::size_t traj = 0; traj < cfg.n_samples; ++traj) run_one(traj);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t traj = next.fetch_add(1); traj < cfg.n_samples;
             traj = next.fetch_add(1))
          run_one(traj);
      });
    for (auto& th : pool) th.join();
  }

  // index-ordered reduction
  std::vector<Moments> est_mom(n_est * n_par * n_obs * n_ck);
  std::vector<Moments> z_mom(n_par * n_ck), y_mom(n_rxn * n_ck);
  std::int64_t n_absorbed = 0;
  for (std::size_t traj = 0; traj < cfg.n_samples; ++traj) {
    if (absorbed[traj]) {
      ++n_absorbed;
      continue;  // steady-state quantities are undefined on absorbed paths
    }
    const double* in = store.data() + traj * vals_per_traj;
    for (std::size_t i = 0; i < n_ck; ++i) {
      for (std::size_t e = 0; e < n_est; ++e)
        for (std::size_t k = 0; k < n_par; ++k)
          for (std::size_t o = 0; o < n_obs; ++o)
            est_mom[((e * n_par + k) * n_obs + o) * n_ck + i].add(*in++);
      for (std::size_t k = 0; k < n_par; ++k) z_mom[k * n_ck + i].add(*in++);
      for (std::size_t j = 0; j < n_rxn; ++j) y_mom[j * n_ck + i].add(*in++);
    }
  }
  if (n_absorbed == static_cast<std::int64_t>(cfg.n_samples))
    throw ModelError("run_ensemble: all trajectories absorbed");

  EnsembleReport rep;
  rep.checkpoints = cfg.checkpoints;
  rep.params = cfg.params;
  for (std::size_t k : cfg.params)
    rep.param_names.push_back(cfg.net.parameter_names[k]);
  for (const Observable& f : cfg.observables)
    rep.observable_names.push_back(f.name);
  rep.estimators = cfg.estimators;
  rep.n_samples = cfg.n_samples;
  rep.base_seed = cfg.base_seed;
  rep.absorbed_count = n_absorbed;
  rep.centering_provenance = ctr.provenance;
  rep.centering_values = ctr.values;
  rep.centering_halfwidth = ctr.halfwidth;

  rep.stats.resize(est_mom.size());
  for (std::size_t idx = 0; idx < est_mom.size(); ++idx) {
    const Moments& mo = est_mom[idx];
    EstimateStats& st = rep.stats[idx];
    st.mean = mo.mean;
    st.variance = mo.variance();
    st.std_error = mo.std_error();
    st.ci_lo = st.mean - 1.96 * st.std_error;
    st.ci_hi = st.mean + 1.96 * st.std_error;
  }
  rep.slopes.resize(n_est * n_par * n_obs);
  for (std::size_t e = 0; e < n_est; ++e)
    for (std::size_t k = 0; k < n_par; ++k)
      for (std::size_t o = 0; o < n_obs; ++o) {
        SlopeFit& fit = rep.slopes[rep.slope_index(e, k, o)];
        fit.slope = fit.intercept = fit.r2 =
            std::numeric_limits<double>::quiet_NaN();
        bool positive = n_ck >= 3;
        for (std::size_t i = 0; positive && i < n_ck; ++i)
          positive = rep.at(e, k, o, i).variance > 0.0;
        if (positive) {
          std::vector<double> vars(n_ck);
          for (std::size_t i = 0; i < n_ck; ++i)
            vars[i] = rep.at(e, k, o, i).variance;
          fit = variance_slope(cfg.checkpoints, vars, cfg.burn_in_fraction);
        }
      }

  rep.z_mean.resize(z_mom.size());
  rep.z_se.resize(z_mom.size());
  for (std::size_t idx = 0; idx < z_mom.size(); ++idx) {
    rep.z_mean[idx] = z_mom[idx].mean;
    rep.z_se[idx] = z_mom[idx].std_error();
    if (std::abs(rep.z_mean[idx]) > 3.0 * rep.z_se[idx])
      rep.martingale_healthy = false;
  }
  rep.y_mean.resize(y_mom.size());
  rep.y_se.resize(y_mom.size());
  for (std::size_t idx = 0; idx < y_mom.size(); ++idx) {
    rep.y_mean[idx] = y_mom[idx].mean;
    rep.y_se[idx] = y_mom[idx].std_error();
  }
  return rep;
}

enum class BenchScale { Paper, Desk };

struct BenchCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct BenchResult {
  EnsembleReport report;
  double exact = std::numeric_limits<double>::quiet_NaN();
  std::vector<BenchCheck> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline std::vector<double> geometric_grid(double t0, double t1,
                                          std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = t0 * std::pow(t1 / t0, static_cast<double>(i) /
                                      static_cast<double>(n - 1));
  g.back() = t1;
  return g;
}

inline std::vector<double> linear_grid(double t0, double t1, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = t0 + (t1 - t0) * static_cast<double>(i) /
                    static_cast<double>(n - 1);
  return g;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

/// Linear-chain benchmark: sensitivity of pi(x1) to c3, validated against
/// the exact moment-equation value.
inline BenchResult bench_linear(BenchScale scale, std::uint64_t seed = 12345,
                                std::size_t n_threads = 0) {
  EnsembleConfig cfg;
  cfg.net = make_linear_network();
  cfg.c = linear_network_params();
  cfg.x0 = linear_network_x0();
  cfg.t_end = 1000.0;
  cfg.base_seed = seed;
  cfg.n_threads = n_threads;
  cfg.params = {2};  // c3
  Observable f;
  f.kind = Observable::Kind::SpeciesCount;
  f.species = 0;
  f.name = "x1";
  cfg.observables = {f};
  cfg.centering.kind = CenteringKind::Oracle;
  cfg.centering.oracle_bounds = {10, 10, 10};
  if (scale == BenchScale::Paper) {
    cfg.checkpoints = linear_grid(100.0, 1000.0, 10);
    cfg.n_samples = 10000;
  } else {
    cfg.checkpoints = geometric_grid(100.0, 1000.0, 6);
    cfg.n_samples = 4000;
  }

  BenchResult res;
  res.exact =
      linear_moment_sensitivity(cfg.net, cfg.c, cfg.observables[0], cfg.x0)
          .sensitivity[2];
  res.report = run_ensemble(cfg);

  const EnsembleReport& rep = res.report;
  const std::size_t last = rep.n_ck() - 1;
  auto est_index = [&](EstimatorKind k) {
    for (std::size_t e = 0; e < rep.estimators.size(); ++e)
      if (rep.estimators[e] == k) return e;
    throw ModelError("estimator not in report");
  };
  const std::size_t e_lr = est_index(EstimatorKind::LR);
  const std::size_t e_clr = est_index(EstimatorKind::CLR);
  const std::size_t e_ilr = est_index(EstimatorKind::IntLR);
  const std::size_t e_iclr = est_index(EstimatorKind::IntCLR);

  for (std::size_t e : {e_lr, e_clr, e_ilr, e_iclr}) {
    const EstimateStats& st = rep.at(e, 0, 0, last);
    const double dev = std::abs(st.mean - res.exact);
    res.checks.push_back(
        {std::string(estimator_name(rep.estimators[e])) +
             " mean within 3 SE of exact",
         dev <= 3.0 * st.std_error,
         "mean=" + detail::fmt(st.mean) + " exact=" + detail::fmt(res.exact) +
             " dev/SE=" + detail::fmt(dev / st.std_error)});
  }
  for (std::size_t e : {e_clr, e_iclr}) {
    const EstimateStats& st = rep.at(e, 0, 0, last);
    const double rel = std::abs(st.mean - res.exact) / std::abs(res.exact);
    res.checks.push_back(
        {std::string(estimator_name(rep.estimators[e])) +
             " relative error <= 5% at t=1000",
         rel <= 0.05, "rel=" + detail::fmt(rel)});
  }
  for (std::size_t e : {e_lr, e_ilr}) {
    const SlopeFit& fit = rep.slopes[rep.slope_index(e, 0, 0)];
    res.checks.push_back(
        {std::string(estimator_name(rep.estimators[e])) +
             " variance slope in [0.7, 1.3]",
         fit.slope >= 0.7 && fit.slope <= 1.3,
         "slope=" + detail::fmt(fit.slope) + " r2=" + detail::fmt(fit.r2)});
  }
  for (std::size_t e : {e_clr, e_iclr}) {
    const SlopeFit& fit = rep.slopes[rep.slope_index(e, 0, 0)];
    res.checks.push_back(
        {std::string(estimator_name(rep.estimators[e])) +
             " variance slope in [-0.2, 0.2]",
         fit.slope >= -0.2 && fit.slope <= 0.2,
         "slope=" + detail::fmt(fit.slope) + " r2=" + detail::fmt(fit.r2)});
  }
  {
    const double v_clr = rep.at(e_clr, 0, 0, last).variance;
    const double v_iclr = rep.at(e_iclr, 0, 0, last).variance;
    res.checks.push_back({"Var(intCLR) <= 0.6 Var(CLR) at t=1000",
                          v_iclr <= 0.6 * v_clr,
                          "ratio=" + detail::fmt(v_iclr / v_clr)});
    const double v_lr = rep.at(e_lr, 0, 0, last).variance;
    res.checks.push_back({"Var(LR)/Var(CLR) > 100 at t=1000",
                          v_lr / v_clr > 100.0,
                          "ratio=" + detail::fmt(v_lr / v_clr)});
  }
  return res;
}

/// Two-gene benchmark: sensitivity of pi(#p_AB) to all 9 parameters from
/// the same trajectories, centered by a long pre-run.
inline BenchResult bench_twogene(BenchScale scale, std::uint64_t seed = 12345,
                                 std::size_t n_threads = 0) {
  EnsembleConfig cfg;
  cfg.net = make_twogene_network();
  cfg.c = twogene_params();
  cfg.x0 = twogene_x0();
  cfg.base_seed = seed;
  cfg.n_threads = n_threads;
  cfg.params = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  Observable f;
  f.kind = Observable::Kind::SpeciesCount;
  f.species = 5;  // p_AB
  f.name = "p_AB";
  cfg.observables = {f};
  cfg.centering.kind = CenteringKind::PreRun;
  cfg.centering.prerun_factor = 10.0;
  if (scale == BenchScale::Paper) {
    cfg.t_end = 2.5e4;
    cfg.checkpoints = linear_grid(5.0e3, 2.5e4, 5);
    cfg.n_samples = 100000;
  } else {
    cfg.t_end = 5.0e3;
    cfg.checkpoints = linear_grid(1.0e3, 5.0e3, 5);
    cfg.n_samples = 10000;
  }

  BenchResult res;
  res.report = run_ensemble(cfg);
  const EnsembleReport& rep = res.report;
  const std::size_t last = rep.n_ck() - 1;
  auto est_index = [&](EstimatorKind k) {
    for (std::size_t e = 0; e < rep.estimators.size(); ++e)
      if (rep.estimators[e] == k) return e;
    throw ModelError("estimator not in report");
  };
  const std::size_t e_lr = est_index(EstimatorKind::LR);
  const std::size_t e_clr = est_index(EstimatorKind::CLR);
  const std::size_t e_ilr = est_index(EstimatorKind::IntLR);
  const std::size_t e_iclr = est_index(EstimatorKind::IntCLR);

  {
    const EstimateStats& st = rep.at(e_clr, 0, 0, last);  // k_r
    res.checks.push_back({"CLR d pi(p_AB)/d k_r in [26, 40]",
                          st.mean >= 26.0 && st.mean <= 40.0,
                          "mean=" + detail::fmt(st.mean) + " +- " +
                              detail::fmt(1.96 * st.std_error)});
  }
  {
    // reference sign pattern of the steady-state sensitivities
    const std::vector<int> signs = {+1, +1, -1, +1, -1, -1, +1, +1, -1};
    bool ok = true;
    std::string got;
    for (std::size_t k = 0; k < 9; ++k) {
      const double mean = rep.at(e_clr, k, 0, last).mean;
      got += mean > 0 ? '+' : '-';
      if ((mean > 0 ? +1 : -1) != signs[k]) ok = false;
    }
    res.checks.push_back({"CLR sign pattern (+,+,-,+,-,-,+,+,-)", ok, got});
  }
  {
    const double w_lr = rep.at(e_lr, 0, 0, last).std_error;
    const double w_clr = rep.at(e_clr, 0, 0, last).std_error;
    const double w_ilr = rep.at(e_ilr, 0, 0, last).std_error;
    const double w_iclr = rep.at(e_iclr, 0, 0, last).std_error;
    res.checks.push_back(
        {"LR and intLR CIs >= 10x wider than CLR and intCLR for k_r",
         w_lr >= 10.0 * w_clr && w_ilr >= 10.0 * w_iclr &&
             w_lr >= 10.0 * w_iclr && w_ilr >= 10.0 * w_clr,
         "LR/CLR=" + detail::fmt(w_lr / w_clr) +
             " intLR/intCLR=" + detail::fmt(w_ilr / w_iclr)});
  }
  return res;
}

}  // namespace lrsens

#endif  // LRSENS_EXPERIMENT_HPP
