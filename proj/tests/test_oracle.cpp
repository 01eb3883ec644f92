#include <doctest.h>

#include <cmath>

#include "lrsens/networks.hpp"
#include "lrsens/oracle.hpp"

using namespace lrsens;

namespace {

Observable indicator_a() {
  Observable f;
  f.kind = Observable::Kind::Indicator;
  f.name = "ind_a";
  f.target_states = {{1, 0}};
  return f;
}

Observable species_obs(std::size_t i, const char* name) {
  Observable f;
  f.kind = Observable::Kind::SpeciesCount;
  f.species = i;
  f.name = name;
  return f;
}

}  // namespace

TEST_CASE("2-state chain: stationary, Poisson, sensitivity are exact") {
  ReactionNetwork net = make_isomerization_network();
  std::vector<double> c = {1.0, 2.0};
  Truncation tr = Truncation::reachable_box(net, {1, 0}, {1, 1});
  REQUIRE(tr.size() == 2);
  const std::size_t ia = *tr.find({1, 0});
  const std::size_t ib = *tr.find({0, 1});

  FspSolution sol = stationary_distribution(net, c, tr);
  CHECK(std::abs(sol.pi[static_cast<int>(ia)] - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(sol.pi[static_cast<int>(ib)] - 1.0 / 3.0) < 1e-12);
  CHECK(sol.mass_leak_rate == 0.0);
  CHECK(sol.residuals.stationary < 1e-12);

  solve_poisson(net, c, indicator_a(), sol);
  CHECK(std::abs(sol.f_hat[static_cast<int>(ia)] - 1.0 / 9.0) < 1e-10);
  CHECK(std::abs(sol.f_hat[static_cast<int>(ib)] + 2.0 / 9.0) < 1e-10);
  CHECK(sol.residuals.poisson < 1e-10);
  CHECK(sol.residuals.centering < 1e-12);
  CHECK(std::abs(sol.pi_f - 2.0 / 3.0) < 1e-12);

  CHECK(std::abs(sensitivity_direct(net, c, sol, 0) + 2.0 / 9.0) < 1e-10);
  CHECK(sensitivity_fd(net, c, tr, indicator_a(), 0) ==
        doctest::Approx(-2.0 / 9.0).epsilon(1e-6));
}

TEST_CASE("linear chain surface: 66 states, cross-validated sensitivities") {
  ReactionNetwork net = make_linear_network();
  std::vector<double> c = linear_network_params();
  Truncation tr = Truncation::reachable_box(net, {5, 5, 0}, {10, 10, 10});
  CHECK(tr.size() == 66);  // conservation surface x1+x2+x3 = 10
  CHECK(check_irreducible(net, c, tr).irreducible);

  Observable f = species_obs(0, "x1");
  FspSolution sol = stationary_distribution(net, c, tr);
  CHECK(sol.mass_leak_rate == 0.0);  // closed network
  solve_poisson(net, c, f, sol);
  CHECK(sol.residuals.poisson < 1e-9);

  LinearMomentResult mom = linear_moment_sensitivity(net, c, f, {5, 5, 0});
  CHECK(mom.value == doctest::Approx(40.0 / 9.0).epsilon(1e-12));
  CHECK(sol.pi_f == doctest::Approx(mom.value).epsilon(1e-10));

  for (std::size_t k = 0; k < 4; ++k) {
    const double direct = sensitivity_direct(net, c, sol, k);
    const double fd = sensitivity_fd(net, c, tr, f, k);
    const double moment = mom.sensitivity[k];
    CHECK(std::abs(direct - fd) <= 1e-4 * std::abs(direct));
    CHECK(std::abs(direct - moment) <= 1e-6 * std::abs(moment));
  }
  CHECK(mom.sensitivity[2] == doctest::Approx(-49.3827).epsilon(1e-4));
  CHECK(mom.sensitivity[3] == doctest::Approx(74.0741).epsilon(1e-4));
}

TEST_CASE("symmetric 2-state covariance rates and limit variance") {
  ReactionNetwork net = make_isomerization_network();
  std::vector<double> c = {1.0, 1.0};
  Truncation tr = Truncation::reachable_box(net, {1, 0}, {1, 1});
  FspSolution sol = stationary_distribution(net, c, tr);
  solve_poisson(net, c, indicator_a(), sol);

  AsymptoticCovariance cov = asymptotic_covariance(net, c, sol, 0);
  CHECK(std::abs(cov.sigma11_rate - 0.25) < 1e-12);
  CHECK(std::abs(cov.sigma12_rate + 0.25) < 1e-12);
  CHECK(std::abs(cov.sigma22_rate - 0.5) < 1e-12);

  LimitSamples ls = sample_limit_distributions(cov, sol.pi_f, 200, 20000,
                                               {77, 0});
  auto var_of = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };
  // Var(W1(1) W2(1)) = s11 s22 + 2 s12^2 for jointly normal mean-zero pairs
  CHECK(var_of(ls.clr) == doctest::Approx(0.1875).epsilon(0.08));
  CHECK(var_of(ls.int_clr) < var_of(ls.clr));
  CHECK(ls.lr_rescaled.size() == 20000);
}

TEST_CASE("limit sampler input validation") {
  AsymptoticCovariance bad;
  bad.sigma11_rate = 1.0;
  bad.sigma22_rate = 1.0;
  bad.sigma12_rate = 2.0;  // not PSD
  CHECK_THROWS_AS(sample_limit_distributions(bad, 0.0, 200, 10, {1, 0}),
                  NumericalError);
  AsymptoticCovariance ok;
  ok.sigma11_rate = 1.0;
  ok.sigma22_rate = 1.0;
  ok.sigma12_rate = 0.5;
  CHECK_THROWS_AS(sample_limit_distributions(ok, 0.0, 10, 10, {1, 0}),
                  ModelError);
}

TEST_CASE("irreducibility checker") {
  ReactionNetwork death = make_pure_death_network();
  Truncation tr = Truncation::reachable_box(death, {5}, {5});
  IrreducibilityReport rep = check_irreducible(death, {1.0}, tr);
  CHECK_FALSE(rep.irreducible);
  CHECK(rep.components.size() == 6);  // every state is its own class

  ReactionNetwork iso = make_isomerization_network();
  Truncation tr2 = Truncation::reachable_box(iso, {1, 0}, {1, 1});
  CHECK(check_irreducible(iso, {1.0, 2.0}, tr2).irreducible);
}

TEST_CASE("Lyapunov drift scan on birth-death") {
  ReactionNetwork net = make_birth_death_network();
  std::vector<double> c = {1.0, 1.0};
  Truncation tr = Truncation::reachable_box(net, {0}, {30});
  LyapunovReport rep = check_lyapunov(net, c, {1.0}, 0.5, tr);
  // drift = 1 - x, margin = 1 - x + 0.5 (1 + x) = 1.5 - 0.5 x
  REQUIRE(rep.violation_set.size() == 3);
  CHECK(rep.violation_set[0] == State{0});
  CHECK(rep.violation_set[1] == State{1});
  CHECK(rep.violation_set[2] == State{2});
  CHECK(rep.margins[0] == doctest::Approx(1.5));
  CHECK(rep.margins[1] == doctest::Approx(1.0));
  CHECK(rep.margins[2] == doctest::Approx(0.5));
  CHECK(rep.alpha2 == doctest::Approx(1.5));
  CHECK_FALSE(rep.drift_trivial);

  CHECK_THROWS_AS(check_lyapunov(net, c, {-1.0}, 0.5, tr), ModelError);
  CHECK_THROWS_AS(check_lyapunov(net, c, {1.0}, 0.0, tr), ModelError);
}

TEST_CASE("assumption diagnostics are finite and positive") {
  ReactionNetwork net = make_birth_death_network();
  Truncation tr = Truncation::reachable_box(net, {0}, {30});
  Observable f = species_obs(0, "n");
  AssumptionDiagnostics d =
      assumption_diagnostics(net, {1.0, 1.0}, {1.0}, f, tr);
  CHECK(d.intensity_sqrtv > 0.0);
  CHECK(d.observable_sqrtv > 0.0);
  CHECK(d.increment_bound == doctest::Approx(1.0));
  CHECK(std::isfinite(d.regularity));
}
