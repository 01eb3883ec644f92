#ifndef LRSENS_NETWORKS_HPP
#define LRSENS_NETWORKS_HPP

#include <cstdint>
#include <vector>

#include "lrsens/model.hpp"

namespace lrsens {

namespace detail {

inline Reaction make_reaction(std::size_t n_species,
                              std::vector<std::pair<std::size_t, std::int64_t>>
                                  reactants,
                              std::vector<std::pair<std::size_t, std::int64_t>>
                                  products,
                              RateLaw rate) {
  Reaction r;
  r.reactants.assign(n_species, 0);
  r.products.assign(n_species, 0);
  r.net.assign(n_species, 0);
  for (auto [i, k] : reactants) r.reactants[i] = k;
  for (auto [i, k] : products) r.products[i] = k;
  for (std::size_t i = 0; i < n_species; ++i)
    r.net[i] = r.products[i] - r.reactants[i];
  r.rate = rate;
  return r;
}

inline RateLaw mass_action(std::size_t param) {
  RateLaw rl;
  rl.kind = RateLaw::Kind::MassAction;
  rl.param = param;
  return rl;
}

inline RateLaw hill_repression(std::size_t scale_param,
                               std::size_t threshold_param, int exponent,
                               std::size_t species) {
  RateLaw rl;
  rl.kind = RateLaw::Kind::HillRepression;
  rl.param = scale_param;
  rl.threshold_param = threshold_param;
  rl.exponent = exponent;
  rl.species = species;
  return rl;
}

}  // namespace detail

/// Closed 3-species linear chain S1 <-> S2 <-> S3 with unimolecular rates;
/// nominal parameters (10, 20, 0.03, 0.02), initial population (5, 5, 0).
inline ReactionNetwork make_linear_network() {
  using namespace detail;
  ReactionNetwork net;
  net.species_names = {"S1", "S2", "S3"};
  net.parameter_names = {"c1", "c2", "c3", "c4"};
  net.reactions = {
      make_reaction(3, {{0, 1}}, {{1, 1}}, mass_action(0)),
      make_reaction(3, {{1, 1}}, {{0, 1}}, mass_action(1)),
      make_reaction(3, {{1, 1}}, {{2, 1}}, mass_action(2)),
      make_reaction(3, {{2, 1}}, {{1, 1}}, mass_action(3)),
  };
  net.validate();
  return net;
}

inline std::vector<double> linear_network_params() {
  return {10.0, 20.0, 0.03, 0.02};
}

inline State linear_network_x0() { return {5, 5, 0}; }

/// Two-state reversible isomerization S1 <-> S2 with one molecule.
inline ReactionNetwork make_isomerization_network() {
  using namespace detail;
  ReactionNetwork net;
  net.species_names = {"S1", "S2"};
  net.parameter_names = {"c1", "c2"};
  net.reactions = {
      make_reaction(2, {{0, 1}}, {{1, 1}}, mass_action(0)),
      make_reaction(2, {{1, 1}}, {{0, 1}}, mass_action(1)),
  };
  net.validate();
  return net;
}

/// Birth-death: 0 -> S at rate c1, S -> 0 at rate c2 * x.
inline ReactionNetwork make_birth_death_network() {
  using namespace detail;
  ReactionNetwork net;
  net.species_names = {"S"};
  net.parameter_names = {"k", "gamma"};
  net.reactions = {
      make_reaction(1, {}, {{0, 1}}, mass_action(0)),
      make_reaction(1, {{0, 1}}, {}, mass_action(1)),
  };
  net.validate();
  return net;
}

/// Pure death S -> 0 at rate c * x (state 0 absorbing).
inline ReactionNetwork make_pure_death_network() {
  using namespace detail;
  ReactionNetwork net;
  net.species_names = {"S"};
  net.parameter_names = {"c"};
  net.reactions = {make_reaction(1, {{0, 1}}, {}, mass_action(0))};
  net.validate();
  return net;
}

/// Two-gene complex: 6 species (m_A, p_A, p_A2, m_B, p_B, p_AB), 12
/// reactions, 9 parameters (k_r, phi, k_dr, k_p, k_dp, k1, k2, k3, k4).
/// Transcription of m_A is repressed by p_A2 (Hill exponent 4) and of m_B
/// by p_AB (exponent 2); translation is catalytic in the mRNA.
inline ReactionNetwork make_twogene_network() {
  using namespace detail;
  enum Species { mA, pA, pA2, mB, pB, pAB };
  enum Param { kr, phi, kdr, kp, kdp, k1, k2, k3, k4 };
  ReactionNetwork net;
  net.species_names = {"m_A", "p_A", "p_A2", "m_B", "p_B", "p_AB"};
  net.parameter_names = {"k_r", "phi", "k_dr", "k_p", "k_dp",
                         "k1",  "k2",  "k3",   "k4"};
  net.reactions = {
      make_reaction(6, {}, {{mA, 1}}, hill_repression(kr, phi, 4, pA2)),
      make_reaction(6, {{mA, 1}}, {}, mass_action(kdr)),
      make_reaction(6, {{mA, 1}}, {{mA, 1}, {pA, 1}}, mass_action(kp)),
      make_reaction(6, {{pA, 1}}, {}, mass_action(kdp)),
      make_reaction(6, {{pA, 2}}, {{pA2, 1}}, mass_action(k1)),
      make_reaction(6, {{pA2, 1}}, {{pA, 2}}, mass_action(k2)),
      make_reaction(6, {}, {{mB, 1}}, hill_repression(kr, phi, 2, pAB)),
      make_reaction(6, {{mB, 1}}, {}, mass_action(kdr)),
      make_reaction(6, {{mB, 1}}, {{mB, 1}, {pB, 1}}, mass_action(kp)),
      make_reaction(6, {{pB, 1}}, {}, mass_action(kdp)),
      make_reaction(6, {{pA, 1}, {pB, 1}}, {{pAB, 1}}, mass_action(k3)),
      make_reaction(6, {{pAB, 1}}, {{pA, 1}, {pB, 1}}, mass_action(k4)),
  };
  net.validate();
  return net;
}

inline std::vector<double> twogene_params() {
  return {1.0, 60.0, 0.1, 1.0, 0.5, 0.02, 0.08, 0.02, 0.1};
}

inline State twogene_x0() { return {0, 0, 0, 0, 0, 0}; }

}  // namespace lrsens

#endif  // LRSENS_NETWORKS_HPP
