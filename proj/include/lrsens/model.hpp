#ifndef LRSENS_MODEL_HPP
#define LRSENS_MODEL_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrsens {

/// Molecule counts per species.
using State = std::vector<std::int64_t>;

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rate law attached to one reaction channel.
///
/// MassAction:      a(x, c) = c[param] * b(x), b the falling-factorial
///                  product over reactant species.
/// Hill:            a(x, c) = x_s^n / (c[param] + x_s^n)
/// HillRepression:  a(x, c) = c[param] * c[threshold_param]^n /
///                            (c[threshold_param]^n + x_s^n)
/// The repressive form covers intensities such as k_r * phi^4/(phi^4 + x^4)
/// that depend on both a scale and a threshold parameter.
struct RateLaw {
  enum class Kind { MassAction, Hill, HillRepression };
  Kind kind = Kind::MassAction;
  std::size_t param = 0;            // scale parameter (c_j resp. k)
  std::size_t threshold_param = 0;  // HillRepression only
  int exponent = 1;                 // Hill exponent n
  std::size_t species = 0;          // species the Hill term binds to
};

struct Reaction {
  std::vector<std::int64_t> reactants;  // nu^- (consumed counts)
  std::vector<std::int64_t> products;   // nu^+ (produced counts)
  std::vector<std::int64_t> net;        // nu = nu^+ - nu^-
  RateLaw rate;
};

struct ReactionNetwork {
  std::vector<std::string> species_names;
  std::vector<std::string> parameter_names;
  std::vector<Reaction> reactions;

  std::size_t species_count() const { return species_names.size(); }
  std::size_t parameter_count() const { return parameter_names.size(); }
  std::size_t reaction_count() const { return reactions.size(); }

  /// Checks the structural invariants; throws ModelError on violation.
  void validate() const {
    if (reactions.empty())
      throw ModelError("network must contain >=1 reaction");
    const std::size_t n = species_count();
    for (std::size_t j = 0; j < reactions.size(); ++j) {
      const Reaction& r = reactions[j];
      if (r.reactants.size() != n || r.products.size() != n ||
          r.net.size() != n)
        throw ModelError("reaction " + std::to_string(j) +
                         ": stoichiometry length != species count");
      for (std::size_t i = 0; i < n; ++i) {
        if (r.reactants[i] < 0 || r.products[i] < 0)
          throw ModelError("reaction " + std::to_string(j) +
                           ": negative stoichiometry");
        if (r.net[i] != r.products[i] - r.reactants[i])
          throw ModelError("reaction " + std::to_string(j) +
                           ": net != products - reactants");
      }
      if (r.rate.param >= parameter_count())
        throw ModelError("reaction " + std::to_string(j) +
                         ": parameter index out of range");
      if (r.rate.kind == RateLaw::Kind::HillRepression &&
          r.rate.threshold_param >= parameter_count())
        throw ModelError("reaction " + std::to_string(j) +
                         ": threshold parameter index out of range");
      if (r.rate.kind != RateLaw::Kind::MassAction &&
          r.rate.species >= n)
        throw ModelError("reaction " + std::to_string(j) +
                         ": Hill species index out of range");
    }
  }
};

inline double int_pow(double base, int n) {
  double p = 1.0;
  for (int i = 0; i < n; ++i) p *= base;
  return p;
}

/// Falling-factorial reactant count b_j(x); 0 when counts are insufficient.
inline double mass_action_b(const Reaction& r, const State& x) {
  double b = 1.0;
  for (std::size_t i = 0; i < r.reactants.size(); ++i) {
    for (std::int64_t l = 0; l < r.reactants[i]; ++l) {
      if (x[i] - l <= 0) return 0.0;
      b *= static_cast<double>(x[i] - l);
    }
  }
  return b;
}

/// Intensity a_j(x, c) of reaction channel j.
inline double intensity(const ReactionNetwork& net, std::size_t j,
                        const State& x, const std::vector<double>& c) {
  if (j >= net.reactions.size())
    throw std::out_of_range("reaction index out of range");
  const Reaction& r = net.reactions[j];
  switch (r.rate.kind) {
    case RateLaw::Kind::MassAction:
      return c[r.rate.param] * mass_action_b(r, x);
    case RateLaw::Kind::Hill: {
      const double xn =
          int_pow(static_cast<double>(x[r.rate.species]), r.rate.exponent);
      return xn / (c[r.rate.param] + xn);
    }
    case RateLaw::Kind::HillRepression: {
      const double phin = int_pow(c[r.rate.threshold_param], r.rate.exponent);
      const double xn =
          int_pow(static_cast<double>(x[r.rate.species]), r.rate.exponent);
      return c[r.rate.param] * phin / (phin + xn);
    }
  }
  return 0.0;
}

/// Partial derivative of a_j(x, c) with respect to parameter k.
inline double intensity_param_derivative(const ReactionNetwork& net,
                                         std::size_t j, const State& x,
                                         const std::vector<double>& c,
                                         std::size_t k) {
  if (j >= net.reactions.size())
    throw std::out_of_range("reaction index out of range");
  if (k >= net.parameter_count())
    throw std::out_of_range("parameter index out of range");
  const Reaction& r = net.reactions[j];
  switch (r.rate.kind) {
    case RateLaw::Kind::MassAction:
      return k == r.rate.param ? mass_action_b(r, x) : 0.0;
    case RateLaw::Kind::Hill: {
      if (k != r.rate.param) return 0.0;
      const double xn =
          int_pow(static_cast<double>(x[r.rate.species]), r.rate.exponent);
      const double d = c[r.rate.param] + xn;
      return -xn / (d * d);
    }
    case RateLaw::Kind::HillRepression: {
      const double n = static_cast<double>(r.rate.exponent);
      const double phi = c[r.rate.threshold_param];
      const double phin = int_pow(phi, r.rate.exponent);
      const double xn =
          int_pow(static_cast<double>(x[r.rate.species]), r.rate.exponent);
      const double d = phin + xn;
      if (k == r.rate.param) return phin / d;
      if (k == r.rate.threshold_param)
        return c[r.rate.param] * n * int_pow(phi, r.rate.exponent - 1) * xn /
               (d * d);
      return 0.0;
    }
  }
  return 0.0;
}

/// Observable f: E -> R, restricted to forms the truncation oracle can
/// tabulate.
struct Observable {
  enum class Kind { SpeciesCount, LinearCombination, Indicator, Custom };
  Kind kind = Kind::SpeciesCount;
  std::string name;
  std::size_t species = 0;
  std::vector<double> coefficients;   // LinearCombination
  std::vector<State> target_states;   // Indicator (sorted)
  std::map<State, double> table;      // Custom, over a declared truncation

  double operator()(const State& x) const {
    switch (kind) {
      case Kind::SpeciesCount:
        return static_cast<double>(x[species]);
      case Kind::LinearCombination: {
        double v = 0.0;
        for (std::size_t i = 0; i < coefficients.size(); ++i)
          v += coefficients[i] * static_cast<double>(x[i]);
        return v;
      }
      case Kind::Indicator:
        return std::binary_search(target_states.begin(), target_states.end(),
                                  x)
                   ? 1.0
                   : 0.0;
      case Kind::Custom: {
        auto it = table.find(x);
        if (it == table.end())
          throw ModelError("custom observable '" + name +
                           "' undefined at requested state");
        return it->second;
      }
    }
    return 0.0;
  }
};

/// Feasibility of firing reaction j from x: the post-jump state must be a
/// valid state (non-negative counts).
inline bool feasible(const Reaction& r, const State& x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] + r.net[i] < 0) return false;
  return true;
}

inline State apply_reaction(const Reaction& r, const State& x) {
  State y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += r.net[i];
  return y;
}

/// Increment function Delta_j f(x) = f(x + nu_j) - f(x).
inline double increment(const Observable& f, const State& x, std::size_t j,
                        const ReactionNetwork& net) {
  const Reaction& r = net.reactions.at(j);
  if (!feasible(r, x))
    throw ModelError("increment requested for infeasible reaction");
  return f(apply_reaction(r, x)) - f(x);
}

/// Generator applied to an observable: sum_j a_j(x, c) Delta_j f(x) over
/// feasible channels.
inline double apply_generator(const ReactionNetwork& net, const Observable& f,
                              const State& x, const std::vector<double>& c) {
  double v = 0.0;
  for (std::size_t j = 0; j < net.reactions.size(); ++j) {
    if (!feasible(net.reactions[j], x)) continue;
    const double a = intensity(net, j, x, c);
    if (a > 0.0) v += a * increment(f, x, j, net);
  }
  return v;
}

}  // namespace lrsens

#endif  // LRSENS_MODEL_HPP
