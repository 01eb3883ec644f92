#ifndef LRSENS_SSA_HPP
#define LRSENS_SSA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lrsens/model.hpp"

namespace lrsens {

/// Seed plus trajectory ordinal; the pair fully determines the random
/// sequence, distinct ordinals give independent streams.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;
};

/// Deterministic random source. Raw 64-bit output of a mt19937_64 seeded
/// from (seed, stream_index) via seed_seq, mapped to doubles explicitly so
/// results do not depend on library distribution internals.
class Rng {
 public:
  explicit Rng(RngStream s) {
    std::seed_seq seq{s.seed, s.stream_index, std::uint64_t{0x9e3779b97f4a7c15}};
    gen_.seed(seq);
  }

  /// Uniform on (0, 1).
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Standard normal via Box-Muller (two uniforms per call, no state).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

/// Compensated (Kahan) summation for long-horizon time integrals.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

/// Streaming per-trajectory accumulators.
///
/// Layout: parameters of interest indexed by k (position within the
/// requested set), reactions by j, observables by o. Pair integrals are
/// stored flat as o * n_params + k.
struct SensitivityAccumulators {
  std::vector<double> z;           // weight process Z_k(t)
  std::vector<KahanSum> int_z;     // \int_0^t Z_k(s) ds
  std::vector<std::int64_t> r;     // jump counters R_j(t)
  std::vector<KahanSum> int_a;     // \int_0^t a_j(X(s)) ds
  std::vector<KahanSum> int_f;     // \int_0^t f_o(X(s)) ds
  std::vector<KahanSum> int_fz;    // \int_0^t f_o(X(s)) Z_k(s) ds
  std::vector<KahanSum> int_fcz;   // \int_0^t (f_o(X(s)) - ctr_o) Z_k(s) ds

  SensitivityAccumulators() = default;
  SensitivityAccumulators(std::size_t n_params, std::size_t n_reactions,
                          std::size_t n_obs)
      : z(n_params, 0.0),
        int_z(n_params),
        r(n_reactions, 0),
        int_a(n_reactions),
        int_f(n_obs),
        int_fz(n_obs * n_params),
        int_fcz(n_obs * n_params) {}

  std::size_t pair_index(std::size_t o, std::size_t k) const {
    return o * z.size() + k;
  }
};

struct Checkpoint {
  double time = 0.0;
  State state;
  SensitivityAccumulators acc;
};

struct TrajectoryRecord {
  std::vector<Checkpoint> checkpoints;
  double terminal_time = 0.0;
  bool absorbed = false;
};

/// One SSA jump event: holding time spent in `pre_state`, then reaction
/// `reaction` fires at `time`.
struct JumpEvent {
  double time = 0.0;
  std::size_t reaction = 0;
  State pre_state;
};

namespace detail {

/// Event source driven by the RNG (normal simulation).
struct RandomSource {
  Rng rng;
  explicit RandomSource(RngStream s) : rng(s) {}

  double next_jump_time(double t, double total_rate) {
    return t + rng.exponential(total_rate);
  }

  std::size_t pick_reaction(const std::vector<double>& a, double total) {
    const double u = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < a.size(); ++j) {
      acc += a[j];
      if (u < acc) return j;
    }
    return a.size() - 1;
  }
};

/// Event source replaying a recorded jump stream through the identical
/// accumulator arithmetic. Absolute jump times are replayed so the replay
/// is bit-identical to the recording run.
struct ReplaySource {
  const std::vector<JumpEvent>* events;
  std::size_t next = 0;

  double next_jump_time(double, double) {
    if (next >= events->size()) return std::numeric_limits<double>::infinity();
    return (*events)[next].time;
  }

  std::size_t pick_reaction(const std::vector<double>&, double) {
    return (*events)[next++].reaction;
  }
};

}  // namespace detail

struct SimulateOptions {
  const ReactionNetwork* net = nullptr;
  std::vector<double> c;
  State x0;
  double t_end = 0.0;
  std::vector<double> checkpoints;         // strictly increasing, in (0, t_end]
  std::vector<Observable> observables;
  std::vector<std::size_t> params;         // parameter indices of interest
  std::vector<double> centering;           // per observable; empty -> zeros
};

namespace detail {

/// Core SSA loop (direct method) with exact closed-form inter-jump
/// integration of all accumulators. X(s) is piecewise constant, so on a
/// hold of length dt in state x with entry weight Z0 and drift
/// D = sum_j da_j/dc_k(x):
///   Z(s)        = Z0 - D (s - t0)
///   int Z ds   += Z0 dt - D dt^2/2
///   int f Z ds += f(x) (Z0 dt - D dt^2/2)
///   int a_j ds += a_j(x) dt,  int f ds += f(x) dt
/// Holds are split at checkpoint times; the split is algebraically exact.
/// At a jump of reaction j the hold integrals are accumulated first with
/// the pre-jump state, then Z_k += (da_j/dc_k)/a_j at the pre-jump state.
template <class Source>
TrajectoryRecord run_trajectory(const SimulateOptions& opt, Source& src,
                                std::vector<JumpEvent>* sink = nullptr) {
  const ReactionNetwork& net = *opt.net;
  const std::size_t m = net.reaction_count();
  const std::size_t np = opt.params.size();
  const std::size_t no = opt.observables.size();
  std::vector<double> ctr = opt.centering;
  if (ctr.empty()) ctr.assign(no, 0.0);

  TrajectoryRecord rec;
  rec.terminal_time = opt.t_end;
  SensitivityAccumulators acc(np, m, no);

  State x = opt.x0;
  double t = 0.0;
  std::size_t ck = 0;

  std::vector<double> a(m, 0.0);
  std::vector<double> drift(np, 0.0);       // D_k(x)
  std::vector<double> fval(no, 0.0);
  // da[j*np + k] only for k governing reaction j; dense is fine at this size
  std::vector<double> da(m * np, 0.0);

  // (j, k) pairs whose derivative can be nonzero; everything else stays 0
  std::vector<std::vector<std::size_t>> dep(m);
  for (std::size_t j = 0; j < m; ++j) {
    const RateLaw& rl = net.reactions[j].rate;
    for (std::size_t k = 0; k < np; ++k) {
      const bool hit =
          rl.param == opt.params[k] ||
          (rl.kind == RateLaw::Kind::HillRepression &&
           rl.threshold_param == opt.params[k]);
      if (hit) dep[j].push_back(k);
    }
  }

  auto refresh_state = [&] {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      a[j] = feasible(net.reactions[j], x) ? intensity(net, j, x, opt.c) : 0.0;
      total += a[j];
    }
    std::fill(drift.begin(), drift.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k : dep[j]) {
        const double v =
            intensity_param_derivative(net, j, x, opt.c, opt.params[k]);
        da[j * np + k] = v;
        drift[k] += v;
      }
    for (std::size_t o = 0; o < no; ++o) fval[o] = opt.observables[o](x);
    return total;
  };

  auto advance_to = [&](double s) {
    const double dt = s - t;
    if (dt <= 0.0) { t = s; return; }
    for (std::size_t k = 0; k < np; ++k) {
      const double dz = acc.z[k] * dt - 0.5 * drift[k] * dt * dt;
      acc.int_z[k].add(dz);
      for (std::size_t o = 0; o < no; ++o) {
        acc.int_fz[acc.pair_index(o, k)].add(fval[o] * dz);
        acc.int_fcz[acc.pair_index(o, k)].add((fval[o] - ctr[o]) * dz);
      }
      acc.z[k] -= drift[k] * dt;
    }
    for (std::size_t j = 0; j < m; ++j) acc.int_a[j].add(a[j] * dt);
    for (std::size_t o = 0; o < no; ++o) acc.int_f[o].add(fval[o] * dt);
    t = s;
  };

  auto snapshot_due = [&](double horizon) {
    while (ck < opt.checkpoints.size() && opt.checkpoints[ck] <= horizon) {
      advance_to(opt.checkpoints[ck]);
      rec.checkpoints.push_back({t, x, acc});
      ++ck;
    }
  };

  double total = refresh_state();
  while (t < opt.t_end) {
    if (total <= 0.0) {
      // Absorbing state: freeze the state, keep integrating through t_end.
      rec.absorbed = true;
      snapshot_due(opt.t_end);
      advance_to(opt.t_end);
      break;
    }
    const double t_jump = src.next_jump_time(t, total);
    if (!(t_jump < opt.t_end)) {
      snapshot_due(opt.t_end);
      advance_to(opt.t_end);
      break;
    }
    snapshot_due(t_jump);
    advance_to(t_jump);
    const std::size_t j = src.pick_reaction(a, total);
    if (sink) sink->push_back({t_jump, j, x});
    acc.r[j] += 1;
    for (std::size_t k : dep[j]) acc.z[k] += da[j * np + k] / a[j];
    x = apply_reaction(net.reactions[j], x);
    total = refresh_state();
    for (std::size_t k = 0; k < np; ++k) {
      if (!std::isfinite(acc.z[k]))
        throw NumericalError("non-finite weight accumulator at t=" +
                             std::to_string(t));
    }
  }
  // A checkpoint exactly at t_end lands here when the loop exits via break.
  snapshot_due(opt.t_end);
  return rec;
}

}  // namespace detail

inline void validate_options(const SimulateOptions& opt) {
  if (!opt.net) throw ModelError("simulate: network not set");
  if (!(opt.t_end > 0.0)) throw ModelError("simulate: t_end must be > 0");
  if (opt.x0.size() != opt.net->species_count())
    throw ModelError("simulate: initial state has wrong length");
  for (auto v : opt.x0)
    if (v < 0) throw ModelError("simulate: negative initial count");
  double prev = 0.0;
  for (double ckt : opt.checkpoints) {
    if (!(ckt > prev) || ckt > opt.t_end)
      throw ModelError("simulate: checkpoints must increase within (0, t_end]");
    prev = ckt;
  }
  for (std::size_t k : opt.params)
    if (k >= opt.net->parameter_count())
      throw ModelError("simulate: parameter index out of range");
  if (!opt.centering.empty() && opt.centering.size() != opt.observables.size())
    throw ModelError("simulate: centering length != observable count");
}

/// Exact-in-distribution CTMC path with accumulator checkpoints.
inline TrajectoryRecord simulate(const SimulateOptions& opt, RngStream rng) {
  validate_options(opt);
  detail::RandomSource src(rng);
  return detail::run_trajectory(opt, src);
}

/// Raw jump-event stream for the same dynamics (and the same RngStream
/// gives the same path as simulate()).
inline std::vector<JumpEvent> event_stream(const ReactionNetwork& net,
                                           const std::vector<double>& c,
                                           const State& x0, double t_end,
                                           RngStream rng) {
  SimulateOptions opt;
  opt.net = &net;
  opt.c = c;
  opt.x0 = x0;
  opt.t_end = t_end;
  std::vector<JumpEvent> events;
  detail::RandomSource src(rng);
  detail::run_trajectory(opt, src, &events);
  return events;
}

/// Replays a recorded event stream through the accumulator update; for the
/// RngStream that produced the events this reproduces simulate()'s
/// checkpoints bit-exactly.
inline TrajectoryRecord replay(const SimulateOptions& opt,
                               const std::vector<JumpEvent>& events) {
  detail::ReplaySource src{&events};
  return detail::run_trajectory(opt, src);
}

}  // namespace lrsens

#endif  // LRSENS_SSA_HPP
