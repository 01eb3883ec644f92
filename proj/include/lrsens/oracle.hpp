#ifndef LRSENS_ORACLE_HPP
#define LRSENS_ORACLE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lrsens/model.hpp"
#include "lrsens/ssa.hpp"

namespace lrsens {

struct StateHash {
  std::size_t operator()(const State& x) const {
    std::size_t h = 1469598103934665603ull;
    for (auto v : x) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) +
           (h >> 2);
    }
    return h;
  }
};

/// Whether reaction j can ever fire from x (positivity of the intensity
/// for any admissible parameters), used for reachability analysis.
inline bool structurally_active(const Reaction& r, const State& x) {
  if (!feasible(r, x)) return false;
  switch (r.rate.kind) {
    case RateLaw::Kind::MassAction:
      return mass_action_b(r, x) > 0.0;
    case RateLaw::Kind::Hill:
      return r.rate.exponent == 0 || x[r.rate.species] > 0;
    case RateLaw::Kind::HillRepression:
      return true;
  }
  return false;
}

/// Finite enumeration of the state space: per-species caps intersected
/// with reachability from x0. Closed networks get exactly their
/// conservation surface; open networks get a box with dropped outflow.
struct Truncation {
  std::vector<State> states;  // sorted lexicographically
  std::unordered_map<State, std::size_t, StateHash> index;

  std::size_t size() const { return states.size(); }

  std::optional<std::size_t> find(const State& x) const {
    auto it = index.find(x);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  static Truncation reachable_box(const ReactionNetwork& net, const State& x0,
                                  const std::vector<std::int64_t>& bounds) {
    if (bounds.size() != net.species_count())
      throw ModelError("truncation bounds length != species count");
    auto inside = [&](const State& x) {
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < 0 || x[i] > bounds[i]) return false;
      return true;
    };
    if (!inside(x0))
      throw ModelError("initial state outside truncation bounds");

    Truncation tr;
    std::unordered_map<State, std::size_t, StateHash> seen;
    std::deque<State> queue{x0};
    seen.emplace(x0, 0);
    while (!queue.empty()) {
      State x = std::move(queue.front());
      queue.pop_front();
      for (const Reaction& r : net.reactions) {
        if (!structurally_active(r, x)) continue;
        State y = apply_reaction(r, x);
        if (!inside(y) || seen.count(y)) continue;
        seen.emplace(y, 0);
        queue.push_back(y);
      }
      tr.states.push_back(std::move(x));
    }
    std::sort(tr.states.begin(), tr.states.end());
    for (std::size_t i = 0; i < tr.states.size(); ++i)
      tr.index.emplace(tr.states[i], i);
    return tr;
  }
};

/// Generator matrix on the truncation; off-diagonal (x, x+nu_j) = a_j(x),
/// diagonal = -(retained row sum). Transitions leaving the truncation are
/// dropped; their stationary flux is reported separately.
inline Eigen::SparseMatrix<double> build_generator(
    const ReactionNetwork& net, const std::vector<double>& c,
    const Truncation& trunc) {
  if (trunc.size() == 0) throw ModelError("empty truncation");
  const std::size_t n = trunc.size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(n * (net.reaction_count() + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const State& x = trunc.states[i];
    double diag = 0.0;
    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
      if (!feasible(net.reactions[j], x)) continue;
      const double a = intensity(net, j, x, c);
      if (a <= 0.0) continue;
      auto yi = trunc.find(apply_reaction(net.reactions[j], x));
      if (!yi) continue;  // dropped outflow
      trips.emplace_back(static_cast<int>(i), static_cast<int>(*yi), a);
      diag -= a;
    }
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
  }
  Eigen::SparseMatrix<double> L(static_cast<int>(n), static_cast<int>(n));
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

struct FspResiduals {
  double stationary = 0.0;  // ||pi^T L||_inf
  double poisson = 0.0;     // ||-L fhat - (f - pi(f))||_inf
  double pi_sum = 0.0;      // |sum pi - 1|
  double centering = 0.0;   // |sum pi fhat|
};

struct FspSolution {
  Truncation truncation;
  Eigen::VectorXd pi;
  Eigen::VectorXd f_hat;
  double pi_f = 0.0;
  double mass_leak_rate = 0.0;
  FspResiduals residuals;
};

/// Stationary distribution by sparse solve of pi^T L = 0, sum pi = 1
/// (normalization row replacing the last equation of L^T pi = 0).
inline FspSolution stationary_distribution(const ReactionNetwork& net,
                                           const std::vector<double>& c,
                                           const Truncation& trunc) {
  const int n = static_cast<int>(trunc.size());
  Eigen::SparseMatrix<double> L = build_generator(net, c, trunc);
  // L^T pi = 0 with the last equation replaced by the normalization row
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(L.nonZeros() + n);
  for (int k = 0; k < L.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it)
      if (static_cast<int>(it.col()) != n - 1)
        trips.emplace_back(static_cast<int>(it.col()),
                           static_cast<int>(it.row()), it.value());
  for (int j = 0; j < n; ++j) trips.emplace_back(n - 1, j, 1.0);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw NumericalError("stationary solve: singular system (truncation "
                         "likely reducible)");
  Eigen::VectorXd pi = lu.solve(rhs);

  FspSolution sol;
  sol.truncation = trunc;
  const double minpi = pi.minCoeff();
  if (minpi < -1e-9)
    throw NumericalError("stationary solve: negative probability mass");
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  sol.pi = pi;
  sol.residuals.stationary = (L.transpose() * pi).lpNorm<Eigen::Infinity>();
  sol.residuals.pi_sum = std::abs(pi.sum() - 1.0);

  double leak = 0.0;
  for (std::size_t i = 0; i < trunc.size(); ++i) {
    const State& x = trunc.states[i];
    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
      if (!feasible(net.reactions[j], x)) continue;
      const double a = intensity(net, j, x, c);
      if (a <= 0.0) continue;
      if (!trunc.find(apply_reaction(net.reactions[j], x)))
        leak += pi[static_cast<int>(i)] * a;
    }
  }
  sol.mass_leak_rate = leak;
  return sol;
}

inline Eigen::VectorXd tabulate(const Observable& f, const Truncation& trunc) {
  Eigen::VectorXd v(static_cast<int>(trunc.size()));
  for (std::size_t i = 0; i < trunc.size(); ++i)
    v[static_cast<int>(i)] = f(trunc.states[i]);
  return v;
}

/// Solves -L fhat = f - pi(f) with the pi-orthogonality constraint in a
/// bordered square system [[-L, 1], [pi^T, 0]]; the multiplier comes out 0
/// because the right-hand side is pi-centered.
inline void solve_poisson(const ReactionNetwork& net,
                          const std::vector<double>& c, const Observable& f,
                          FspSolution& sol) {
  const int n = static_cast<int>(sol.truncation.size());
  if (sol.pi.size() != n)
    throw ModelError("solve_poisson: stationary distribution missing");
  Eigen::SparseMatrix<double> L = build_generator(net, c, sol.truncation);
  const Eigen::VectorXd fv = tabulate(f, sol.truncation);
  sol.pi_f = sol.pi.dot(fv);
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = fv.array() - sol.pi_f;
  rhs[n] = 0.0;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(L.nonZeros() + 2 * n);
  for (int k = 0; k < L.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()),
                         static_cast<int>(it.col()), -it.value());
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, n, 1.0);
    trips.emplace_back(n, i, sol.pi[i]);
  }
  Eigen::SparseMatrix<double> A(n + 1, n + 1);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw NumericalError("Poisson solve: singular augmented system (signals "
                         "reducibility)");
  Eigen::VectorXd sol_vec = lu.solve(rhs);
  sol.f_hat = sol_vec.head(n);
  sol.residuals.poisson =
      (-(L * sol.f_hat) - rhs.head(n)).lpNorm<Eigen::Infinity>();
  sol.residuals.centering = std::abs(sol.pi.dot(sol.f_hat));
}

/// Exact sensitivity sum_j sum_x pi(x) (da_j/dc_k)(x) Delta_j fhat(x);
/// reduces to c_k^{-1} pi(a_j Delta_j fhat) for mass action.
inline double sensitivity_direct(const ReactionNetwork& net,
                                 const std::vector<double>& c,
                                 const FspSolution& sol, std::size_t k) {
  const Truncation& tr = sol.truncation;
  if (sol.f_hat.size() != static_cast<Eigen::Index>(tr.size()))
    throw ModelError("sensitivity_direct: Poisson solution missing");
  double s = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const State& x = tr.states[i];
    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
      if (!feasible(net.reactions[j], x)) continue;
      const double dadc = intensity_param_derivative(net, j, x, c, k);
      if (dadc == 0.0) continue;
      auto yi = tr.find(apply_reaction(net.reactions[j], x));
      if (!yi) continue;
      const double dfh = sol.f_hat[static_cast<int>(*yi)] -
                         sol.f_hat[static_cast<int>(i)];
      s += sol.pi[static_cast<int>(i)] * dadc * dfh;
    }
  }
  return s;
}

/// Central finite difference of pi_c(f) across two stationary solves on
/// the same truncation, h = h_rel * c_k.
inline double sensitivity_fd(const ReactionNetwork& net,
                             const std::vector<double>& c,
                             const Truncation& trunc, const Observable& f,
                             std::size_t k, double h_rel = 1e-4) {
  if (k >= c.size()) throw std::out_of_range("parameter index out of range");
  const double h = h_rel * c[k];
  std::vector<double> cp = c, cm = c;
  cp[k] += h;
  cm[k] -= h;
  if (cm[k] <= 0.0)
    throw ModelError("sensitivity_fd: perturbed parameter leaves the valid "
                     "region");
  const Eigen::VectorXd fv = tabulate(f, trunc);
  const double up = stationary_distribution(net, cp, trunc).pi.dot(fv);
  const double um = stationary_distribution(net, cm, trunc).pi.dot(fv);
  return (up - um) / (2.0 * h);
}

struct LinearMomentResult {
  Eigen::VectorXd mean;              // steady-state first moments
  double value = 0.0;                // f evaluated at the moments
  std::vector<double> sensitivity;   // d value / d c_k, all parameters
};

/// Exact sensitivity via the closed first-moment equations, valid when all
/// intensities are affine in the state (mass action with at most one
/// reactant molecule). Conservation relations are appended as constraints
/// and the derivative follows from the implicit function theorem.
inline LinearMomentResult linear_moment_sensitivity(
    const ReactionNetwork& net, const std::vector<double>& c,
    const Observable& f, const State& x0) {
  const std::size_t n = net.species_count();
  const std::size_t m = net.reaction_count();
  const std::size_t np = net.parameter_count();

  Eigen::VectorXd w(static_cast<int>(n));  // observable coefficients
  if (f.kind == Observable::Kind::SpeciesCount) {
    w.setZero();
    w[static_cast<int>(f.species)] = 1.0;
  } else if (f.kind == Observable::Kind::LinearCombination) {
    for (std::size_t i = 0; i < n; ++i) w[static_cast<int>(i)] =
        i < f.coefficients.size() ? f.coefficients[i] : 0.0;
  } else {
    throw ModelError("linear_moment_sensitivity needs a linear observable");
  }

  // affine decomposition b_j(x) = alpha_j + beta_j . x
  std::vector<double> alpha(m, 0.0);
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(static_cast<int>(m),
                                               static_cast<int>(n));
  for (std::size_t j = 0; j < m; ++j) {
    const Reaction& r = net.reactions[j];
    if (r.rate.kind != RateLaw::Kind::MassAction)
      throw ModelError("non-affine intensity present (reaction " +
                       std::to_string(j) + ")");
    std::int64_t order = 0;
    for (std::size_t i = 0; i < n; ++i) order += r.reactants[i];
    if (order == 0) {
      alpha[j] = 1.0;
    } else if (order == 1) {
      for (std::size_t i = 0; i < n; ++i)
        if (r.reactants[i] == 1) beta(static_cast<int>(j),
                                      static_cast<int>(i)) = 1.0;
    } else {
      throw ModelError("non-affine intensity present (reaction " +
                       std::to_string(j) + ")");
    }
  }

  Eigen::MatrixXd nu(static_cast<int>(n), static_cast<int>(m));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i)
      nu(static_cast<int>(i), static_cast<int>(j)) =
          static_cast<double>(net.reactions[j].net[i]);

  // conservation relations: left kernel of the stoichiometric matrix
  Eigen::FullPivLU<Eigen::MatrixXd> lu(nu.transpose());
  Eigen::MatrixXd U = lu.kernel();  // n x q, columns u with u . nu_j = 0
  const int q = (lu.dimensionOfKernel() == 0) ? 0 : static_cast<int>(U.cols());

  auto assemble = [&](const std::vector<double>& cc, Eigen::MatrixXd& A,
                      Eigen::VectorXd& r0) {
    A = Eigen::MatrixXd::Zero(static_cast<int>(n), static_cast<int>(n));
    r0 = Eigen::VectorXd::Zero(static_cast<int>(n));
    for (std::size_t j = 0; j < m; ++j) {
      const double cj = cc[net.reactions[j].rate.param];
      A += cj * nu.col(static_cast<int>(j)) * beta.row(static_cast<int>(j));
      r0 += cj * alpha[j] * nu.col(static_cast<int>(j));
    }
  };

  Eigen::MatrixXd A;
  Eigen::VectorXd r0;
  assemble(c, A, r0);

  const int rows = static_cast<int>(n) + q;
  Eigen::MatrixXd M(rows, static_cast<int>(n));
  M.topRows(static_cast<int>(n)) = A;
  Eigen::VectorXd x0v(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i)
    x0v[static_cast<int>(i)] = static_cast<double>(x0[i]);
  if (q > 0) M.bottomRows(q) = U.transpose();
  Eigen::VectorXd rhs(rows);
  rhs.head(static_cast<int>(n)) = -r0;
  if (q > 0) rhs.tail(q) = U.transpose() * x0v;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  if (qr.rank() < static_cast<int>(n))
    throw NumericalError("singular moment system after conservation "
                         "reduction");
  Eigen::VectorXd mvec = qr.solve(rhs);

  LinearMomentResult res;
  res.mean = mvec;
  res.value = w.dot(mvec);
  res.sensitivity.resize(np, 0.0);
  for (std::size_t k = 0; k < np; ++k) {
    Eigen::MatrixXd dA = Eigen::MatrixXd::Zero(static_cast<int>(n),
                                               static_cast<int>(n));
    Eigen::VectorXd dr = Eigen::VectorXd::Zero(static_cast<int>(n));
    for (std::size_t j = 0; j < m; ++j) {
      if (net.reactions[j].rate.param != k) continue;
      dA += nu.col(static_cast<int>(j)) * beta.row(static_cast<int>(j));
      dr += alpha[j] * nu.col(static_cast<int>(j));
    }
    Eigen::VectorXd rhs_k(rows);
    rhs_k.head(static_cast<int>(n)) = -(dA * mvec + dr);
    if (q > 0) rhs_k.tail(q).setZero();
    res.sensitivity[k] = w.dot(qr.solve(rhs_k));
  }
  return res;
}

/// Per-unit-time rates of the asymptotic covariance matrix of (M, Z):
///   sigma11 = sum_j pi(a_j |Delta_j fhat|^2)
///   sigma12 = sum_j pi(da_j/dc_k Delta_j fhat)
///   sigma22 = sum_j pi((da_j/dc_k)^2 / a_j)   (the quadratic-variation
///             rate of Z; equals pi(a_1)/c_1^2 for mass action in c_1)
struct AsymptoticCovariance {
  double sigma11_rate = 0.0;
  double sigma12_rate = 0.0;
  double sigma22_rate = 0.0;
};

inline AsymptoticCovariance asymptotic_covariance(const ReactionNetwork& net,
                                                  const std::vector<double>& c,
                                                  const FspSolution& sol,
                                                  std::size_t k) {
  const Truncation& tr = sol.truncation;
  if (sol.f_hat.size() != static_cast<Eigen::Index>(tr.size()))
    throw ModelError("asymptotic_covariance: Poisson solution missing");
  AsymptoticCovariance cov;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const State& x = tr.states[i];
    const double pix = sol.pi[static_cast<int>(i)];
    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
      if (!feasible(net.reactions[j], x)) continue;
      const double a = intensity(net, j, x, c);
      const double dadc = intensity_param_derivative(net, j, x, c, k);
      if (a > 0.0) cov.sigma22_rate += pix * dadc * dadc / a;
      auto yi = tr.find(apply_reaction(net.reactions[j], x));
      if (!yi) continue;
      const double dfh = sol.f_hat[static_cast<int>(*yi)] -
                         sol.f_hat[static_cast<int>(i)];
      cov.sigma11_rate += pix * a * dfh * dfh;
      cov.sigma12_rate += pix * dadc * dfh;
    }
  }
  return cov;
}

/// Empirical samples of the four limiting laws of the estimators, drawn by
/// Euler discretization of the correlated 2-D Brownian motion (W1, W2)
/// with per-unit-time covariance rates from `cov`:
///   CLR    -> W1(1) W2(1)
///   intCLR -> int_0^1 (W1(1) - W1(s)) dW2(s)
///   LR     (rescaled by sqrt(n)) -> pi(f) W2(1)
///   intLR  (rescaled by sqrt(n)) -> pi(f) int_0^1 (1-s) dW2(s)
struct LimitSamples {
  std::vector<double> clr;
  std::vector<double> int_clr;
  std::vector<double> lr_rescaled;
  std::vector<double> int_lr_rescaled;
};

inline LimitSamples sample_limit_distributions(const AsymptoticCovariance& cov,
                                               double pi_f,
                                               std::size_t n_steps,
                                               std::size_t n_samples,
                                               RngStream rng) {
  if (n_steps < 100) throw ModelError("sample_limit_distributions: n_steps "
                                      "must be >= 100");
  const double s11 = cov.sigma11_rate;
  const double s22 = cov.sigma22_rate;
  const double s12 = cov.sigma12_rate;
  if (s11 < 0.0 || s22 < 0.0 || s11 * s22 - s12 * s12 < -1e-12)
    throw NumericalError("covariance rate matrix not positive semidefinite");

  // Cholesky factor of [[s11, s12], [s12, s22]]
  const double l11 = std::sqrt(s11);
  const double l21 = l11 > 0.0 ? s12 / l11 : 0.0;
  const double l22 = std::sqrt(std::max(0.0, s22 - l21 * l21));

  const double dt = 1.0 / static_cast<double>(n_steps);
  const double sdt = std::sqrt(dt);
  Rng gen(rng);

  LimitSamples out;
  out.clr.reserve(n_samples);
  out.int_clr.reserve(n_samples);
  out.lr_rescaled.reserve(n_samples);
  out.int_lr_rescaled.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    double w1 = 0.0, w2 = 0.0;
    double int_w1_dw2 = 0.0;  // left-point Ito sum
    double int_s_dw2 = 0.0;
    for (std::size_t i = 0; i < n_steps; ++i) {
      const double g1 = gen.normal();
      const double g2 = gen.normal();
      const double dw1 = l11 * g1 * sdt;
      const double dw2 = (l21 * g1 + l22 * g2) * sdt;
      int_w1_dw2 += w1 * dw2;
      int_s_dw2 += (static_cast<double>(i) * dt) * dw2;
      w1 += dw1;
      w2 += dw2;
    }
    out.clr.push_back(w1 * w2);
    out.int_clr.push_back(w1 * w2 - int_w1_dw2);
    out.lr_rescaled.push_back(pi_f * w2);
    out.int_lr_rescaled.push_back(pi_f * (w2 - int_s_dw2));
  }
  return out;
}

struct IrreducibilityReport {
  bool irreducible = false;
  std::vector<std::vector<std::size_t>> components;  // SCCs, state indices
};

/// Strong connectivity of the transition graph restricted to the
/// truncation (iterative Tarjan).
inline IrreducibilityReport check_irreducible(const ReactionNetwork& net,
                                              const std::vector<double>& c,
                                              const Truncation& trunc) {
  const std::size_t n = trunc.size();
  if (n == 0) throw ModelError("empty truncation");
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const State& x = trunc.states[i];
    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
      if (!feasible(net.reactions[j], x)) continue;
      if (intensity(net, j, x, c) <= 0.0) continue;
      if (auto yi = trunc.find(apply_reaction(net.reactions[j], x)))
        adj[i].push_back(*yi);
    }
  }

  IrreducibilityReport rep;
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> idx(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t child;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (idx[root] != kUnset) continue;
    std::vector<Frame> call{{root, 0}};
    idx[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& fr = call.back();
      if (fr.child < adj[fr.v].size()) {
        const std::size_t w = adj[fr.v][fr.child++];
        if (idx[w] == kUnset) {
          idx[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[fr.v] = std::min(low[fr.v], idx[w]);
        }
      } else {
        if (low[fr.v] == idx[fr.v]) {
          std::vector<std::size_t> comp;
          std::size_t w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp.push_back(w);
          } while (w != fr.v);
          rep.components.push_back(std::move(comp));
        }
        const std::size_t v = fr.v;
        call.pop_back();
        if (!call.empty())
          low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  rep.irreducible = rep.components.size() == 1;
  return rep;
}

struct LyapunovReport {
  std::vector<State> violation_set;     // the discovered finite set D
  std::vector<double> margins;          // drift + alpha1 V on D
  double alpha2 = 0.0;
  bool drift_trivial = false;           // drift identically 0 (conservation)
  bool boundary_warning = false;        // worst margin on truncation boundary
};

/// Scans the truncation for the drift inequality with V(x) = 1 + <v, x>:
///   sum_j a_j(x) <v, nu_j> <= -alpha1 V(x)   outside D.
/// Returns the violating set D and alpha2 = max over D of the margin.
inline LyapunovReport check_lyapunov(const ReactionNetwork& net,
                                     const std::vector<double>& c,
                                     const std::vector<double>& v,
                                     double alpha1, const Truncation& trunc) {
  if (v.size() != net.species_count())
    throw ModelError("check_lyapunov: v length != species count");
  for (double vi : v)
    if (!(vi > 0.0)) throw ModelError("check_lyapunov: v must be positive");
  if (!(alpha1 > 0.0)) throw ModelError("check_lyapunov: alpha1 must be > 0");

  std::vector<double> vnu(net.reaction_count(), 0.0);
  for (std::size_t j = 0; j < net.reaction_count(); ++j)
    for (std::size_t i = 0; i < net.species_count(); ++i)
      vnu[j] += v[i] * static_cast<double>(net.reactions[j].net[i]);

  LyapunovReport rep;
  double worst = -std::numeric_limits<double>::infinity();
  bool worst_on_boundary = false;
  bool any_drift = false;
  for (const State& x : trunc.states) {
    double driftv = 0.0;
    bool boundary = false;
    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
      if (!structurally_active(net.reactions[j], x)) continue;
      const double a = intensity(net, j, x, c);
      driftv += a * vnu[j];
      if (a > 0.0 && !trunc.find(apply_reaction(net.reactions[j], x)))
        boundary = true;
    }
    if (std::abs(driftv) > 1e-12) any_drift = true;
    double big_v = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      big_v += v[i] * static_cast<double>(x[i]);
    const double margin = driftv + alpha1 * big_v;
    if (margin > worst) {
      worst = margin;
      worst_on_boundary = boundary;
    }
    if (margin > 0.0) {
      rep.violation_set.push_back(x);
      rep.margins.push_back(margin);
      rep.alpha2 = std::max(rep.alpha2, margin);
    }
  }
  rep.drift_trivial = !any_drift;
  rep.boundary_warning = worst_on_boundary;
  return rep;
}

/// Sup-ratio diagnostics for the growth assumptions with V(x) = 1 + <v, x>
/// (sqrt(V)-bounded intensities and observable, bounded increments, the
/// generator regularity ratio). Reported, never enforced: a truncation
/// cannot certify behavior at infinity.
struct AssumptionDiagnostics {
  double intensity_sqrtv = 0.0;   // max_j sup a_j / sqrt(V)
  double observable_sqrtv = 0.0;  // sup |f| / sqrt(V)
  double increment_bound = 0.0;   // max_j sup |Delta_j f|
  double regularity = 0.0;        // sup b_1 (V(x+nu_1)/V(x) + 1)
};

inline AssumptionDiagnostics assumption_diagnostics(
    const ReactionNetwork& net, const std::vector<double>& c,
    const std::vector<double>& v, const Observable& f,
    const Truncation& trunc, std::size_t param_reaction = 0) {
  AssumptionDiagnostics d;
  auto big_v = [&](const State& x) {
    double s = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      s += v[i] * static_cast<double>(x[i]);
    return s;
  };
  for (const State& x : trunc.states) {
    const double sv = std::sqrt(big_v(x));
    d.observable_sqrtv = std::max(d.observable_sqrtv, std::abs(f(x)) / sv);
    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
      if (!feasible(net.reactions[j], x)) continue;
      const double a = intensity(net, j, x, c);
      d.intensity_sqrtv = std::max(d.intensity_sqrtv, a / sv);
      if (trunc.find(apply_reaction(net.reactions[j], x)))
        d.increment_bound =
            std::max(d.increment_bound, std::abs(increment(f, x, j, net)));
    }
    const Reaction& r1 = net.reactions[param_reaction];
    if (feasible(r1, x)) {
      const double b1 = r1.rate.kind == RateLaw::Kind::MassAction
                            ? mass_action_b(r1, x)
                            : intensity(net, param_reaction, x, c);
      d.regularity = std::max(
          d.regularity, b1 * (big_v(apply_reaction(r1, x)) / big_v(x) + 1.0));
    }
  }
  return d;
}

}  // namespace lrsens

#endif  // LRSENS_ORACLE_HPP
