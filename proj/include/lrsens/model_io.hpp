#ifndef LRSENS_MODEL_IO_HPP
#define LRSENS_MODEL_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrsens/model.hpp"

namespace lrsens {

inline constexpr int kModelSchemaVersion = 1;

/// Parsed model file: network plus everything needed to run it.
struct ModelFile {
  ReactionNetwork net;
  std::vector<double> parameter_values;
  State initial_state;
  std::vector<Observable> observables;
  std::optional<std::vector<std::int64_t>> truncation_bounds;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok)
      throw ModelError("model file: unknown key '" + it.key() + "' in " +
                       where);
  }
}

inline std::size_t lookup(const std::vector<std::string>& names,
                          const std::string& name, const char* kind) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw ModelError("model file: unknown " + std::string(kind) + " '" + name +
                   "'");
}

inline std::vector<std::int64_t> counts_by_species(
    const json& obj, const std::vector<std::string>& species,
    const std::string& where) {
  std::vector<std::int64_t> v(species.size(), 0);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::size_t i = lookup(species, it.key(), "species");
    const std::int64_t count = it.value().get<std::int64_t>();
    if (count < 0)
      throw ModelError("model file: negative count in " + where);
    v[i] = count;
  }
  return v;
}

}  // namespace detail

inline ModelFile parse_model(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("model file: JSON parse error: ") + e.what());
  }
  try {
    detail::reject_unknown_keys(doc,
                                {"schema_version", "species", "parameters",
                                 "reactions", "initial_state", "observables",
                                 "truncation"},
                                "document root");
    if (doc.value("schema_version", 0) != kModelSchemaVersion)
      throw ModelError("model file: unsupported schema_version");

    ModelFile mf;
    mf.net.species_names = doc.at("species").get<std::vector<std::string>>();
    for (const json& p : doc.at("parameters")) {
      detail::reject_unknown_keys(p, {"name", "value"}, "parameters");
      mf.net.parameter_names.push_back(p.at("name").get<std::string>());
      mf.parameter_values.push_back(p.at("value").get<double>());
    }

    for (const json& rj : doc.at("reactions")) {
      detail::reject_unknown_keys(rj, {"reactants", "products", "rate"},
                                  "reactions");
      Reaction r;
      r.reactants = detail::counts_by_species(
          rj.value("reactants", json::object()), mf.net.species_names,
          "reactants");
      r.products = detail::counts_by_species(
          rj.value("products", json::object()), mf.net.species_names,
          "products");
      r.net.resize(mf.net.species_count());
      for (std::size_t i = 0; i < r.net.size(); ++i)
        r.net[i] = r.products[i] - r.reactants[i];

      const json& rate = rj.at("rate");
      const std::string kind = rate.at("kind").get<std::string>();
      if (kind == "mass_action") {
        detail::reject_unknown_keys(rate, {"kind", "param"}, "rate");
        r.rate.kind = RateLaw::Kind::MassAction;
        r.rate.param = detail::lookup(mf.net.parameter_names,
                                      rate.at("param").get<std::string>(),
                                      "parameter");
      } else if (kind == "hill") {
        detail::reject_unknown_keys(rate, {"kind", "param", "exponent",
                                           "species"},
                                    "rate");
        r.rate.kind = RateLaw::Kind::Hill;
        r.rate.param = detail::lookup(mf.net.parameter_names,
                                      rate.at("param").get<std::string>(),
                                      "parameter");
        r.rate.exponent = rate.at("exponent").get<int>();
        r.rate.species = detail::lookup(mf.net.species_names,
                                        rate.at("species").get<std::string>(),
                                        "species");
      } else if (kind == "hill_repression") {
        detail::reject_unknown_keys(
            rate, {"kind", "scale_param", "threshold_param", "exponent",
                   "species"},
            "rate");
        r.rate.kind = RateLaw::Kind::HillRepression;
        r.rate.param = detail::lookup(
            mf.net.parameter_names, rate.at("scale_param").get<std::string>(),
            "parameter");
        r.rate.threshold_param = detail::lookup(
            mf.net.parameter_names,
            rate.at("threshold_param").get<std::string>(), "parameter");
        r.rate.exponent = rate.at("exponent").get<int>();
        r.rate.species = detail::lookup(mf.net.species_names,
                                        rate.at("species").get<std::string>(),
                                        "species");
      } else {
        throw ModelError("model file: unknown rate kind '" + kind + "'");
      }
      mf.net.reactions.push_back(std::move(r));
    }
    mf.net.validate();

    mf.initial_state = detail::counts_by_species(
        doc.value("initial_state", json::object()), mf.net.species_names,
        "initial_state");

    for (const json& oj : doc.value("observables", json::array())) {
      Observable f;
      f.name = oj.at("name").get<std::string>();
      const std::string kind = oj.at("kind").get<std::string>();
      if (kind == "species") {
        detail::reject_unknown_keys(oj, {"name", "kind", "species"},
                                    "observables");
        f.kind = Observable::Kind::SpeciesCount;
        f.species = detail::lookup(mf.net.species_names,
                                   oj.at("species").get<std::string>(),
                                   "species");
      } else if (kind == "linear") {
        detail::reject_unknown_keys(oj, {"name", "kind", "coefficients"},
                                    "observables");
        f.kind = Observable::Kind::LinearCombination;
        f.coefficients.assign(mf.net.species_count(), 0.0);
        const json& co = oj.at("coefficients");
        for (auto it = co.begin(); it != co.end(); ++it)
          f.coefficients[detail::lookup(mf.net.species_names, it.key(),
                                        "species")] =
              it.value().get<double>();
      } else if (kind == "indicator") {
        detail::reject_unknown_keys(oj, {"name", "kind", "states"},
                                    "observables");
        f.kind = Observable::Kind::Indicator;
        for (const json& sj : oj.at("states")) {
          State s = sj.get<State>();
          if (s.size() != mf.net.species_count())
            throw ModelError("model file: indicator state has wrong length");
          f.target_states.push_back(std::move(s));
        }
        std::sort(f.target_states.begin(), f.target_states.end());
      } else if (kind == "custom") {
        detail::reject_unknown_keys(oj, {"name", "kind", "table"},
                                    "observables");
        f.kind = Observable::Kind::Custom;
        for (const json& ej : oj.at("table")) {
          detail::reject_unknown_keys(ej, {"state", "value"}, "custom table");
          State s = ej.at("state").get<State>();
          if (s.size() != mf.net.species_count())
            throw ModelError("model file: custom-table state has wrong "
                             "length");
          f.table.emplace(std::move(s), ej.at("value").get<double>());
        }
      } else {
        throw ModelError("model file: unknown observable kind '" + kind +
                         "'");
      }
      mf.observables.push_back(std::move(f));
    }

    if (doc.contains("truncation")) {
      const json& tj = doc.at("truncation");
      detail::reject_unknown_keys(tj, {"bounds"}, "truncation");
      std::vector<std::int64_t> bounds(mf.net.species_count(), 0);
      const json& bj = tj.at("bounds");
      for (auto it = bj.begin(); it != bj.end(); ++it)
        bounds[detail::lookup(mf.net.species_names, it.key(), "species")] =
            it.value().get<std::int64_t>();
      mf.truncation_bounds = std::move(bounds);
    }
    return mf;
  } catch (const json::exception& e) {
    throw ModelError(std::string("model file: ") + e.what());
  }
}

inline ReactionNetwork parse_network(const std::string& text) {
  return parse_model(text).net;
}

inline std::string serialize_model(const ModelFile& mf) {
  using detail::json;
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["species"] = mf.net.species_names;
  doc["parameters"] = json::array();
  for (std::size_t k = 0; k < mf.net.parameter_count(); ++k)
    doc["parameters"].push_back({{"name", mf.net.parameter_names[k]},
                                 {"value", mf.parameter_values[k]}});
  doc["reactions"] = json::array();
  auto counts_obj = [&](const std::vector<std::int64_t>& v) {
    json o = json::object();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0) o[mf.net.species_names[i]] = v[i];
    return o;
  };
  for (const Reaction& r : mf.net.reactions) {
    json rj;
    rj["reactants"] = counts_obj(r.reactants);
    rj["products"] = counts_obj(r.products);
    json rate;
    switch (r.rate.kind) {
      case RateLaw::Kind::MassAction:
        rate = {{"kind", "mass_action"},
                {"param", mf.net.parameter_names[r.rate.param]}};
        break;
      case RateLaw::Kind::Hill:
        rate = {{"kind", "hill"},
                {"param", mf.net.parameter_names[r.rate.param]},
                {"exponent", r.rate.exponent},
                {"species", mf.net.species_names[r.rate.species]}};
        break;
      case RateLaw::Kind::HillRepression:
        rate = {{"kind", "hill_repression"},
                {"scale_param", mf.net.parameter_names[r.rate.param]},
                {"threshold_param",
                 mf.net.parameter_names[r.rate.threshold_param]},
                {"exponent", r.rate.exponent},
                {"species", mf.net.species_names[r.rate.species]}};
        break;
    }
    rj["rate"] = rate;
    doc["reactions"].push_back(rj);
  }
  doc["initial_state"] = counts_obj(mf.initial_state);
  doc["observables"] = json::array();
  for (const Observable& f : mf.observables) {
    json oj;
    oj["name"] = f.name;
    switch (f.kind) {
      case Observable::Kind::SpeciesCount:
        oj["kind"] = "species";
        oj["species"] = mf.net.species_names[f.species];
        break;
      case Observable::Kind::LinearCombination: {
        oj["kind"] = "linear";
        json co = json::object();
        for (std::size_t i = 0; i < f.coefficients.size(); ++i)
          if (f.coefficients[i] != 0.0)
            co[mf.net.species_names[i]] = f.coefficients[i];
        oj["coefficients"] = co;
        break;
      }
      case Observable::Kind::Indicator:
        oj["kind"] = "indicator";
        oj["states"] = f.target_states;
        break;
      case Observable::Kind::Custom: {
        oj["kind"] = "custom";
        json tbl = json::array();
        for (const auto& [s, v] : f.table)
          tbl.push_back({{"state", s}, {"value", v}});
        oj["table"] = tbl;
        break;
      }
    }
    doc["observables"].push_back(oj);
  }
  if (mf.truncation_bounds) {
    json bj = json::object();
    for (std::size_t i = 0; i < mf.truncation_bounds->size(); ++i)
      bj[mf.net.species_names[i]] = (*mf.truncation_bounds)[i];
    doc["truncation"] = {{"bounds", bj}};
  }
  return doc.dump(2) + "\n";
}

}  // namespace lrsens

#endif  // LRSENS_MODEL_IO_HPP
