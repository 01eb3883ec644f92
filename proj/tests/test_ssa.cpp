#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lrsens/estimators.hpp"
#include "lrsens/networks.hpp"
#include "lrsens/ssa.hpp"

using namespace lrsens;

namespace {

SimulateOptions two_state_options(const ReactionNetwork& net,
                                  std::vector<double>& c,
                                  std::vector<Observable>& obs) {
  SimulateOptions opt;
  opt.net = &net;
  opt.c = c;
  opt.x0 = {1, 0};
  opt.t_end = 50.0;
  opt.checkpoints = {10.0, 25.0, 50.0};
  Observable f;
  f.kind = Observable::Kind::Indicator;
  f.name = "ind_a";
  f.target_states = {{1, 0}};
  obs = {f};
  opt.observables = obs;
  opt.params = {0};
  return opt;
}

}  // namespace

TEST_CASE("identical seed and stream reproduce a trajectory bitwise") {
  ReactionNetwork net = make_isomerization_network();
  std::vector<double> c = {1.0, 2.0};
  std::vector<Observable> obs;
  SimulateOptions opt = two_state_options(net, c, obs);

  TrajectoryRecord a = simulate(opt, {7, 3});
  TrajectoryRecord b = simulate(opt, {7, 3});
  REQUIRE(a.checkpoints.size() == b.checkpoints.size());
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    CHECK(a.checkpoints[i].state == b.checkpoints[i].state);
    CHECK(a.checkpoints[i].acc.z[0] == b.checkpoints[i].acc.z[0]);
    CHECK(a.checkpoints[i].acc.int_f[0].value() ==
          b.checkpoints[i].acc.int_f[0].value());
    CHECK(a.checkpoints[i].acc.int_fz[0].value() ==
          b.checkpoints[i].acc.int_fz[0].value());
  }

  TrajectoryRecord other = simulate(opt, {7, 4});
  CHECK(other.checkpoints.back().acc.int_f[0].value() !=
        a.checkpoints.back().acc.int_f[0].value());
}

TEST_CASE("replaying the recorded event stream is bit-exact") {
  ReactionNetwork net = make_linear_network();
  std::vector<double> c = linear_network_params();
  SimulateOptions opt;
  opt.net = &net;
  opt.c = c;
  opt.x0 = linear_network_x0();
  opt.t_end = 20.0;
  opt.checkpoints = {5.0, 10.0, 20.0};
  Observable f;
  f.kind = Observable::Kind::SpeciesCount;
  f.species = 0;
  f.name = "x1";
  opt.observables = {f};
  opt.params = {2};

  const RngStream rng{42, 11};
  TrajectoryRecord direct = simulate(opt, rng);
  std::vector<JumpEvent> events = event_stream(net, c, opt.x0, opt.t_end, rng);
  TrajectoryRecord replayed = replay(opt, events);

  REQUIRE(direct.checkpoints.size() == replayed.checkpoints.size());
  for (std::size_t i = 0; i < direct.checkpoints.size(); ++i) {
    const auto& da = direct.checkpoints[i].acc;
    const auto& ra = replayed.checkpoints[i].acc;
    CHECK(direct.checkpoints[i].state == replayed.checkpoints[i].state);
    CHECK(da.z[0] == ra.z[0]);
    CHECK(da.int_z[0].value() == ra.int_z[0].value());
    CHECK(da.int_f[0].value() == ra.int_f[0].value());
    CHECK(da.int_fz[0].value() == ra.int_fz[0].value());
    CHECK(da.r == ra.r);
    for (std::size_t j = 0; j < net.reaction_count(); ++j)
      CHECK(da.int_a[j].value() == ra.int_a[j].value());
  }
}

TEST_CASE("mass-action weight reduces to (R_1 - int a_1)/c_1") {
  ReactionNetwork net = make_isomerization_network();
  std::vector<double> c = {1.7, 0.9};
  std::vector<Observable> obs;
  SimulateOptions opt = two_state_options(net, c, obs);
  opt.c = c;
  opt.t_end = 200.0;
  opt.checkpoints = {50.0, 200.0};

  TrajectoryRecord rec = simulate(opt, {99, 0});
  for (const Checkpoint& ck : rec.checkpoints) {
    const double z_closed =
        (static_cast<double>(ck.acc.r[0]) - ck.acc.int_a[0].value()) / c[0];
    CHECK(ck.acc.z[0] == doctest::Approx(z_closed).epsilon(1e-12));
  }
}

TEST_CASE("first holding time is Exponential(total rate): KS test") {
  ReactionNetwork net = make_linear_network();
  std::vector<double> c = linear_network_params();
  const State x0 = linear_network_x0();
  // total intensity at (5,5,0): 10*5 + 20*5 + 0.03*5 = 150.15
  const double rate = 150.15;
  const std::size_t n = 10000;
  std::vector<double> u(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<JumpEvent> ev = event_stream(net, c, x0, 1.0, {2024, s});
    REQUIRE(!ev.empty());
    u[s] = 1.0 - std::exp(-rate * ev[0].time);  // PIT: should be U(0,1)
  }
  std::sort(u.begin(), u.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, u[i] - lo, hi - u[i]});
  }
  // 1% critical value of the one-sample KS statistic
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("absorbing state freezes the path but not the clock") {
  ReactionNetwork net = make_pure_death_network();
  std::vector<double> c = {1.0};
  SimulateOptions opt;
  opt.net = &net;
  opt.c = c;
  opt.x0 = {5};
  opt.t_end = 100.0;
  opt.checkpoints = {50.0, 100.0};
  Observable f;
  f.kind = Observable::Kind::SpeciesCount;
  f.species = 0;
  f.name = "n";
  opt.observables = {f};
  opt.params = {0};

  TrajectoryRecord rec = simulate(opt, {5, 0});
  CHECK(rec.absorbed);
  REQUIRE(rec.checkpoints.size() == 2);
  CHECK(rec.checkpoints.back().state == State{0});
  // after absorption f = 0, so int_f stops growing
  CHECK(rec.checkpoints[0].acc.int_f[0].value() ==
        doctest::Approx(rec.checkpoints[1].acc.int_f[0].value()));
  CHECK(std::isfinite(rec.checkpoints.back().acc.z[0]));
}

TEST_CASE("option validation") {
  ReactionNetwork net = make_isomerization_network();
  std::vector<double> c = {1.0, 2.0};
  SimulateOptions opt;
  opt.net = &net;
  opt.c = c;
  opt.x0 = {1, 0};
  opt.t_end = 0.0;
  CHECK_THROWS_AS(validate_options(opt), ModelError);
  opt.t_end = 10.0;
  opt.checkpoints = {5.0, 5.0};
  CHECK_THROWS_AS(validate_options(opt), ModelError);
  opt.checkpoints = {5.0, 20.0};
  CHECK_THROWS_AS(validate_options(opt), ModelError);
  opt.checkpoints = {5.0, 10.0};
  opt.params = {9};
  CHECK_THROWS_AS(validate_options(opt), ModelError);
  opt.params = {0};
  CHECK_NOTHROW(validate_options(opt));
}
