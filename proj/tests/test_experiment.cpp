#include <doctest.h>

#include <cmath>
#include <vector>

#include "lrsens/experiment.hpp"

using namespace lrsens;

namespace {

EnsembleConfig small_two_state(std::uint64_t seed) {
  EnsembleConfig cfg;
  cfg.net = make_isomerization_network();
  cfg.c = {1.0, 2.0};
  cfg.x0 = {1, 0};
  cfg.t_end = 50.0;
  cfg.checkpoints = {10.0, 20.0, 30.0, 40.0, 50.0};
  cfg.n_samples = 200;
  cfg.base_seed = seed;
  cfg.params = {0};
  Observable f;
  f.kind = Observable::Kind::Indicator;
  f.name = "ind_a";
  f.target_states = {{1, 0}};
  cfg.observables = {f};
  cfg.centering.kind = CenteringKind::Oracle;
  cfg.centering.oracle_bounds = {1, 1};
  cfg.n_threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("variance_slope recovers exact power laws") {
  std::vector<double> t = {100, 200, 400, 800};
  std::vector<double> v1(t.size()), v0(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    v1[i] = 2.0 * t[i];
    v0[i] = 3.0;
  }
  SlopeFit f1 = variance_slope(t, v1);
  CHECK(f1.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f1.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(f1.r2 == doctest::Approx(1.0).epsilon(1e-12));
  SlopeFit f0 = variance_slope(t, v0);
  CHECK(f0.slope == doctest::Approx(0.0).epsilon(1e-12));

  // burn-in drops the first point; 2 points left -> error
  CHECK_THROWS_AS(variance_slope({1.0, 10.0, 100.0}, {1.0, 1.0, 1.0}, 0.05),
                  ModelError);
  CHECK_THROWS_AS(variance_slope(t, {1.0, 0.0, 1.0, 1.0}), NumericalError);
}

TEST_CASE("run_ensemble is reproducible and thread-invariant") {
  EnsembleConfig cfg = small_two_state(314);
  EnsembleReport a = run_ensemble(cfg);
  EnsembleReport b = run_ensemble(cfg);
  cfg.n_threads = 3;
  EnsembleReport c = run_ensemble(cfg);

  REQUIRE(a.stats.size() == b.stats.size());
  REQUIRE(a.stats.size() == c.stats.size());
  for (std::size_t i = 0; i < a.stats.size(); ++i) {
    CHECK(a.stats[i].mean == b.stats[i].mean);
    CHECK(a.stats[i].variance == b.stats[i].variance);
    CHECK(a.stats[i].mean == c.stats[i].mean);
    CHECK(a.stats[i].variance == c.stats[i].variance);
  }
  for (std::size_t i = 0; i < a.z_mean.size(); ++i)
    CHECK(a.z_mean[i] == c.z_mean[i]);
}

TEST_CASE("oracle and matching explicit centering agree") {
  EnsembleConfig cfg = small_two_state(2718);
  EnsembleReport oracle = run_ensemble(cfg);
  CHECK(oracle.centering_provenance == "oracle");
  REQUIRE(oracle.centering_values.size() == 1);
  CHECK(oracle.centering_values[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));

  cfg.centering.kind = CenteringKind::Explicit;
  cfg.centering.values = {oracle.centering_values[0]};
  EnsembleReport expl = run_ensemble(cfg);
  CHECK(expl.centering_provenance == "explicit");
  for (std::size_t i = 0; i < oracle.stats.size(); ++i)
    CHECK(oracle.stats[i].mean == expl.stats[i].mean);
}

TEST_CASE("pre-run centering reports provenance and a half-width") {
  EnsembleConfig cfg = small_two_state(99);
  cfg.n_samples = 50;
  cfg.centering.kind = CenteringKind::PreRun;
  cfg.centering.prerun_factor = 10.0;
  EnsembleReport rep = run_ensemble(cfg);
  CHECK(rep.centering_provenance.rfind("prerun", 0) == 0);
  CHECK(rep.centering_halfwidth > 0.0);
  // long ergodic pre-run should land near pi(f) = 2/3
  CHECK(rep.centering_values[0] == doctest::Approx(2.0 / 3.0).epsilon(0.15));
}

TEST_CASE("degenerate N=2 ensemble completes with finite statistics") {
  EnsembleConfig cfg = small_two_state(7);
  cfg.n_samples = 2;
  EnsembleReport rep = run_ensemble(cfg);
  for (const EstimateStats& st : rep.stats) {
    CHECK(std::isfinite(st.mean));
    CHECK(std::isfinite(st.variance));
    CHECK(st.variance >= 0.0);
    CHECK(st.ci_hi >= st.ci_lo);
  }
  CHECK_THROWS_AS([&] {
    EnsembleConfig bad = small_two_state(7);
    bad.n_samples = 1;
    run_ensemble(bad);
  }(), ModelError);
}

TEST_CASE("CI invariants hold") {
  EnsembleConfig cfg = small_two_state(55);
  EnsembleReport rep = run_ensemble(cfg);
  for (const EstimateStats& st : rep.stats) {
    CHECK(st.ci_hi - st.mean == doctest::Approx(1.96 * st.std_error));
    CHECK(st.mean - st.ci_lo == doctest::Approx(1.96 * st.std_error));
    CHECK(st.variance >= 0.0);
  }
  CHECK(rep.absorbed_count == 0);
}

TEST_CASE("grids") {
  std::vector<double> g = geometric_grid(100.0, 1000.0, 6);
  CHECK(g.front() == doctest::Approx(100.0));
  CHECK(g.back() == doctest::Approx(1000.0));
  for (std::size_t i = 1; i < g.size(); ++i)
    CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]).epsilon(1e-9));
  std::vector<double> l = linear_grid(1.0, 5.0, 5);
  CHECK(l == std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0});
}
