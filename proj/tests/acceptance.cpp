// Release acceptance gate: one pass/fail line per criterion.
// Usage: lrsens_acceptance [fast|slow|all]   (default: all)
//   fast = criteria 1-6, 8, 9;  slow = criterion 7 (two-gene benchmark)

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "lrsens/experiment.hpp"
#include "lrsens/report_io.hpp"

using namespace lrsens;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail = "") {
  std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

Observable indicator_a() {
  Observable f;
  f.kind = Observable::Kind::Indicator;
  f.name = "ind_a";
  f.target_states = {{1, 0}};
  return f;
}

// --- criterion 1: oracle exactness on the 2-state chain --------------------

void criterion1() {
  ReactionNetwork net = make_isomerization_network();
  std::vector<double> c = {1.0, 2.0};
  Truncation tr = Truncation::reachable_box(net, {1, 0}, {1, 1});
  FspSolution sol = stationary_distribution(net, c, tr);
  const std::size_t ia = *tr.find({1, 0});
  const std::size_t ib = *tr.find({0, 1});
  bool ok = std::abs(sol.pi[(int)ia] - 2.0 / 3.0) < 1e-12 &&
            std::abs(sol.pi[(int)ib] - 1.0 / 3.0) < 1e-12;
  solve_poisson(net, c, indicator_a(), sol);
  ok = ok && std::abs(sol.f_hat[(int)ia] - 1.0 / 9.0) < 1e-10 &&
       std::abs(sol.f_hat[(int)ib] + 2.0 / 9.0) < 1e-10;
  const double s = sensitivity_direct(net, c, sol, 0);
  ok = ok && std::abs(s + 2.0 / 9.0) < 1e-10;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "pi=(%.15f, %.15f), sens=%.15f",
                sol.pi[(int)ia], sol.pi[(int)ib], s);
  report(1, "oracle exactness (2-state stationary/Poisson/sensitivity)", ok,
         buf);
}

// --- criterion 2: oracle cross-validation ----------------------------------

void criterion2() {
  bool ok = true;
  std::string detail;
  {
    ReactionNetwork net = make_isomerization_network();
    std::vector<double> c = {1.0, 2.0};
    Truncation tr = Truncation::reachable_box(net, {1, 0}, {1, 1});
    FspSolution sol = stationary_distribution(net, c, tr);
    solve_poisson(net, c, indicator_a(), sol);
    const double direct = sensitivity_direct(net, c, sol, 0);
    const double fd = sensitivity_fd(net, c, tr, indicator_a(), 0);
    ok = ok && std::abs(direct - fd) <= 1e-4 * std::abs(direct);
  }
  {
    ReactionNetwork net = make_linear_network();
    std::vector<double> c = linear_network_params();
    Truncation tr = Truncation::reachable_box(net, {5, 5, 0}, {10, 10, 10});
    Observable f;
    f.kind = Observable::Kind::SpeciesCount;
    f.species = 0;
    f.name = "x1";
    FspSolution sol = stationary_distribution(net, c, tr);
    solve_poisson(net, c, f, sol);
    LinearMomentResult mom = linear_moment_sensitivity(net, c, f, {5, 5, 0});
    double worst_fd = 0.0, worst_mom = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double direct = sensitivity_direct(net, c, sol, k);
      const double fd = sensitivity_fd(net, c, tr, f, k);
      worst_fd = std::max(worst_fd, std::abs(direct - fd) / std::abs(direct));
      worst_mom = std::max(worst_mom, std::abs(direct - mom.sensitivity[k]) /
                                          std::abs(mom.sensitivity[k]));
    }
    ok = ok && worst_fd <= 1e-4 && worst_mom <= 1e-6;
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "worst rel dev: fd=%.3g, moment=%.3g (66-state surface)",
                  worst_fd, worst_mom);
    detail = buf;
  }
  report(2, "oracle cross-validation (direct vs FD vs moment equations)", ok,
         detail);
}

// --- criteria 3-5a: the linear-chain benchmark ------------------------------

bool checks_pass(const BenchResult& res, std::vector<const char*> needles,
                 std::string& detail) {
  bool ok = true;
  for (const char* n : needles) {
    bool found = false;
    for (const auto& chk : res.checks) {
      if (chk.name.find(n) == std::string::npos) continue;
      found = true;
      if (!chk.pass) {
        ok = false;
        detail += std::string("[") + chk.name + ": " + chk.detail + "] ";
      }
    }
    if (!found) {
      ok = false;
      detail += std::string("[missing check: ") + n + "] ";
    }
  }
  return ok;
}

void criteria_3_4_5(std::uint64_t seed) {
  BenchResult res = bench_linear(BenchScale::Desk, seed);
  {
    std::string detail;
    bool ok = checks_pass(res, {"mean within 3 SE"}, detail);
    const bool exact_ok = std::abs(res.exact + 49.3827) < 1e-3;
    if (!exact_ok) detail += "[exact value mismatch] ";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "exact=%.6f, N=%zu, t=1000", res.exact,
                  res.report.n_samples);
    report(3, "unbiasedness: all four estimator means within 3 SE of exact",
           ok && exact_ok, detail + buf);
  }
  {
    std::string detail;
    bool ok = checks_pass(res, {"variance slope"}, detail);
    char buf[160];
    auto slope = [&](EstimatorKind k) {
      for (std::size_t e = 0; e < res.report.estimators.size(); ++e)
        if (res.report.estimators[e] == k)
          return res.report.slopes[res.report.slope_index(e, 0, 0)].slope;
      return 0.0;
    };
    std::snprintf(buf, sizeof(buf),
                  "slopes: LR=%.3f intLR=%.3f CLR=%.3f intCLR=%.3f",
                  slope(EstimatorKind::LR), slope(EstimatorKind::IntLR),
                  slope(EstimatorKind::CLR), slope(EstimatorKind::IntCLR));
    report(4, "variance orders: LR/intLR slope ~1, CLR/intCLR slope ~0", ok,
           detail + buf);
  }
  {
    std::string detail;
    bool ok = checks_pass(res, {"Var(intCLR) <= 0.6 Var(CLR)"}, detail);

    // limit-distribution half: symmetric 2-state oracle covariance
    ReactionNetwork net = make_isomerization_network();
    std::vector<double> c = {1.0, 1.0};
    Truncation tr = Truncation::reachable_box(net, {1, 0}, {1, 1});
    FspSolution sol = stationary_distribution(net, c, tr);
    solve_poisson(net, c, indicator_a(), sol);
    AsymptoticCovariance cov = asymptotic_covariance(net, c, sol, 0);
    LimitSamples ls =
        sample_limit_distributions(cov, sol.pi_f, 1000, 100000, {seed, 1});
    auto var_of = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= (double)v.size();
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return s / (double)(v.size() - 1);
    };
    const double v_clr = var_of(ls.clr);
    const double v_iclr = var_of(ls.int_clr);
    const bool sampler_ok =
        std::abs(v_clr - 0.1875) <= 0.05 * 0.1875 && v_iclr <= 0.55 * v_clr;
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "limit Var(CLR)=%.5f (target 0.1875), ratio=%.3f", v_clr,
                  v_iclr / v_clr);
    report(5, "factor-1/2 gap: Var(intCLR) vs Var(CLR), limit sampler",
           ok && sampler_ok, detail + buf);
  }
}

// --- criterion 6: martingale nulls and quadratic-variation rate -------------

void criterion6(std::uint64_t seed) {
  ReactionNetwork net = make_isomerization_network();
  std::vector<double> c = {2.0, 1.0};
  SimulateOptions opt;
  opt.net = &net;
  opt.c = c;
  opt.x0 = {1, 0};
  opt.t_end = 500.0;
  opt.checkpoints = {100.0, 200.0, 300.0, 400.0, 500.0};
  opt.params = {0};

  const std::size_t n_ck = opt.checkpoints.size();
  const std::size_t N = 10000;
  std::vector<Moments> zm(n_ck), y1(n_ck), y2(n_ck);
  Moments z2;
  for (std::size_t s = 0; s < N; ++s) {
    TrajectoryRecord rec = simulate(opt, {seed, s});
    for (std::size_t i = 0; i < n_ck; ++i) {
      const auto& acc = rec.checkpoints[i].acc;
      zm[i].add(acc.z[0]);
      y1[i].add((double)acc.r[0] - acc.int_a[0].value());
      y2[i].add((double)acc.r[1] - acc.int_a[1].value());
    }
    const double z = rec.checkpoints.back().acc.z[0];
    z2.add(z * z);
  }
  bool nulls_ok = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < n_ck; ++i) {
    for (const Moments* m : {&zm[i], &y1[i], &y2[i]}) {
      const double ratio = std::abs(m->mean) / m->std_error();
      worst = std::max(worst, ratio);
      if (ratio > 3.0) nulls_ok = false;
    }
  }
  const double qv_rate = z2.mean / opt.t_end;  // E[Z(t)^2]/t
  const double target = 1.0 / 6.0;             // pi(a_1)/c_1^2
  const bool qv_ok = std::abs(qv_rate - target) <= 0.05 * target;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "worst |mean|/SE=%.2f, E[Z^2]/t=%.5f (target %.5f)", worst,
                qv_rate, target);
  report(6, "martingale nulls and E[Z^2]/t quadratic-variation rate",
         nulls_ok && qv_ok, buf);
}

// --- criterion 7: two-gene benchmark (slow) ---------------------------------

void criterion7(std::uint64_t seed) {
  BenchResult res = bench_twogene(BenchScale::Desk, seed);
  std::string detail;
  bool ok = res.all_pass();
  for (const auto& chk : res.checks)
    detail += std::string(chk.pass ? "ok(" : "FAIL(") + chk.name + ": " +
              chk.detail + ") ";
  report(7, "two-gene benchmark (CLR magnitude, signs, CI tightening)", ok,
         detail);
}

// --- criterion 8: determinism ------------------------------------------------

void criterion8(std::uint64_t seed) {
  EnsembleConfig cfg;
  cfg.net = make_isomerization_network();
  cfg.c = {1.0, 2.0};
  cfg.x0 = {1, 0};
  cfg.t_end = 50.0;
  cfg.checkpoints = {10.0, 25.0, 50.0};
  cfg.n_samples = 300;
  cfg.base_seed = seed;
  cfg.params = {0, 1};
  cfg.observables = {indicator_a()};
  cfg.centering.kind = CenteringKind::Oracle;
  cfg.centering.oracle_bounds = {1, 1};

  nlohmann::json prov = {{"seed", seed}, {"version", kVersion}};
  cfg.n_threads = 1;
  const std::string serial = report_to_json(run_ensemble(cfg), prov).dump();
  const std::string serial2 = report_to_json(run_ensemble(cfg), prov).dump();
  cfg.n_threads = 4;
  const std::string parallel = report_to_json(run_ensemble(cfg), prov).dump();
  const bool ok = serial == serial2 && serial == parallel;
  report(8, "determinism: repeated and parallel runs byte-identical", ok,
         ok ? "serial==serial, serial==4 threads"
            : "serialized reports differ");
}

// --- criterion 9: assumption checkers ----------------------------------------

void criterion9() {
  bool ok = true;
  std::string detail;
  {
    ReactionNetwork net = make_linear_network();
    Truncation tr = Truncation::reachable_box(net, {5, 5, 0}, {10, 10, 10});
    ok = ok && check_irreducible(net, linear_network_params(), tr).irreducible;
  }
  {
    ReactionNetwork net = make_isomerization_network();
    Truncation tr = Truncation::reachable_box(net, {1, 0}, {1, 1});
    ok = ok && check_irreducible(net, {1.0, 2.0}, tr).irreducible;
  }
  {
    ReactionNetwork net = make_pure_death_network();
    Truncation tr = Truncation::reachable_box(net, {5}, {5});
    ok = ok && !check_irreducible(net, {1.0}, tr).irreducible;
  }
  {
    ReactionNetwork net = make_birth_death_network();
    Truncation tr = Truncation::reachable_box(net, {0}, {30});
    LyapunovReport rep = check_lyapunov(net, {1.0, 1.0}, {1.0}, 0.5, tr);
    const bool d_ok = rep.violation_set.size() == 3 &&
                      rep.violation_set[0] == State{0} &&
                      rep.violation_set[1] == State{1} &&
                      rep.violation_set[2] == State{2} &&
                      std::abs(rep.alpha2 - 1.5) < 1e-12;
    ok = ok && d_ok;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "|D|=%zu, alpha2=%.3f",
                  rep.violation_set.size(), rep.alpha2);
    detail = buf;
  }
  report(9, "assumption checkers (irreducibility, Lyapunov drift)", ok,
         detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "all";
  const std::uint64_t seed = 12345;
  const bool fast = mode == "fast" || mode == "all";
  const bool slow = mode == "slow" || mode == "all";
  if (!fast && !slow) {
    std::fprintf(stderr, "usage: %s [fast|slow|all]\n", argv[0]);
    return 2;
  }
  try {
    if (fast) {
      criterion1();
      criterion2();
      criteria_3_4_5(seed);
      criterion6(seed);
      criterion8(seed);
      criterion9();
    }
    if (slow) criterion7(seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 1;
  }
  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
