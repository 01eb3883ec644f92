// lrsens: steady-state parametric sensitivity estimation for stochastic
// reaction networks. Subcommands: simulate, estimate, oracle, bench.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrsens/experiment.hpp"
#include "lrsens/model_io.hpp"
#include "lrsens/report_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitModel = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitBenchFail = 5;

lrsens::ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lrsens::ModelError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return lrsens::parse_model(ss.str());
}

std::size_t find_name(const std::vector<std::string>& names,
                      const std::string& name, const char* kind) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw lrsens::ModelError("unknown " + std::string(kind) + " '" + name + "'");
}

const lrsens::Observable& find_observable(const lrsens::ModelFile& mf,
                                          const std::string& name) {
  for (const auto& f : mf.observables)
    if (f.name == name) return f;
  throw lrsens::ModelError("unknown observable '" + name + "'");
}

std::vector<std::int64_t> require_bounds(const lrsens::ModelFile& mf) {
  if (!mf.truncation_bounds)
    throw lrsens::ModelError(
        "model file declares no truncation bounds (required for oracle "
        "operations)");
  return *mf.truncation_bounds;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("LRSENS_THREADS")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 0;  // hardware concurrency
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  lrsens::write_file(path, text);
}

// --- simulate -------------------------------------------------------------

int cmd_simulate(const std::string& model_path, double t_end,
                 std::uint64_t seed, std::vector<double> checkpoints,
                 const std::string& out) {
  lrsens::ModelFile mf = load_model(model_path);
  if (checkpoints.empty()) checkpoints = lrsens::linear_grid(
      t_end / 100.0, t_end, 100);

  lrsens::SimulateOptions opt;
  opt.net = &mf.net;
  opt.c = mf.parameter_values;
  opt.x0 = mf.initial_state;
  opt.t_end = t_end;
  opt.checkpoints = checkpoints;
  opt.observables = mf.observables;
  for (std::size_t k = 0; k < mf.net.parameter_count(); ++k)
    opt.params.push_back(k);

  lrsens::TrajectoryRecord rec = lrsens::simulate(opt, {seed, 0});
  if (rec.absorbed)
    std::cerr << "warning: trajectory reached an absorbing state\n";

  std::string csv = "t";
  for (const auto& s : mf.net.species_names) csv += "," + s;
  for (const auto& p : mf.net.parameter_names) csv += ",z_" + p;
  for (std::size_t j = 0; j < mf.net.reaction_count(); ++j)
    csv += ",r_" + std::to_string(j) + ",int_a_" + std::to_string(j);
  for (const auto& f : mf.observables) csv += ",int_f_" + f.name;
  csv += "\n";
  for (const lrsens::Checkpoint& ck : rec.checkpoints) {
    csv += lrsens::csv_num(ck.time);
    for (auto v : ck.state) csv += "," + std::to_string(v);
    for (double z : ck.acc.z) csv += "," + lrsens::csv_num(z);
    for (std::size_t j = 0; j < mf.net.reaction_count(); ++j)
      csv += "," + std::to_string(ck.acc.r[j]) + "," +
             lrsens::csv_num(ck.acc.int_a[j].value());
    for (const auto& s : ck.acc.int_f) csv += "," + lrsens::csv_num(s.value());
    csv += "\n";
  }
  write_text(out, csv);
  return kExitOk;
}

// --- estimate / bench -----------------------------------------------------

nlohmann::json config_json(const lrsens::EnsembleConfig& cfg,
                           const lrsens::ModelFile& mf,
                           const std::string& command) {
  nlohmann::json j;
  j["command"] = command;
  j["model"] = nlohmann::json::parse(lrsens::serialize_model(mf));
  j["t_end"] = cfg.t_end;
  j["checkpoints"] = cfg.checkpoints;
  j["n_samples"] = cfg.n_samples;
  j["seed"] = cfg.base_seed;
  j["params"] = cfg.params;
  nlohmann::json ests = nlohmann::json::array();
  for (auto e : cfg.estimators) ests.push_back(lrsens::estimator_name(e));
  j["estimators"] = ests;
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& f : cfg.observables) obs.push_back(f.name);
  j["observables"] = obs;
  switch (cfg.centering.kind) {
    case lrsens::CenteringKind::Oracle: j["centering"] = "oracle"; break;
    case lrsens::CenteringKind::PreRun: j["centering"] = "prerun"; break;
    case lrsens::CenteringKind::Explicit:
      j["centering"] = {{"values", cfg.centering.values}};
      break;
  }
  j["burn_in_fraction"] = cfg.burn_in_fraction;
  // deliberately excludes the thread count: results are thread-invariant
  return j;
}

nlohmann::json provenance_json(const nlohmann::json& cfg,
                               std::uint64_t seed) {
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(lrsens::config_hash(cfg)));
  nlohmann::json p;
  p["version"] = lrsens::kVersion;
  p["seed"] = seed;
  p["config_hash"] = hex;
  p["config"] = cfg;
  return p;
}

int cmd_estimate(const std::string& model_path,
                 const std::vector<std::string>& param_names,
                 const std::vector<std::string>& obs_names,
                 const std::vector<std::string>& estimator_names,
                 std::size_t samples, double t_end,
                 std::vector<double> checkpoints,
                 const std::string& centering, std::uint64_t seed,
                 double burn_in, const std::string& out) {
  lrsens::ModelFile mf = load_model(model_path);

  lrsens::EnsembleConfig cfg;
  cfg.net = mf.net;
  cfg.c = mf.parameter_values;
  cfg.x0 = mf.initial_state;
  cfg.t_end = t_end;
  cfg.checkpoints = checkpoints.empty()
                        ? lrsens::linear_grid(t_end / 5.0, t_end, 5)
                        : checkpoints;
  cfg.n_samples = samples;
  cfg.base_seed = seed;
  cfg.burn_in_fraction = burn_in;
  cfg.n_threads = default_threads();

  if (param_names.empty())
    throw CLI::ValidationError("--param", "at least one parameter required");
  for (const auto& p : param_names)
    cfg.params.push_back(find_name(mf.net.parameter_names, p, "parameter"));
  if (obs_names.empty())
    throw CLI::ValidationError("--observable",
                               "at least one observable required");
  for (const auto& o : obs_names)
    cfg.observables.push_back(find_observable(mf, o));
  if (!estimator_names.empty()) {
    cfg.estimators.clear();
    for (const auto& e : estimator_names)
      cfg.estimators.push_back(lrsens::estimator_from_name(e));
  }

  if (centering == "oracle") {
    cfg.centering.kind = lrsens::CenteringKind::Oracle;
    cfg.centering.oracle_bounds = require_bounds(mf);
  } else if (centering == "prerun") {
    cfg.centering.kind = lrsens::CenteringKind::PreRun;
  } else if (centering.rfind("value:", 0) == 0) {
    cfg.centering.kind = lrsens::CenteringKind::Explicit;
    std::stringstream ss(centering.substr(6));
    std::string tok;
    while (std::getline(ss, tok, ','))
      cfg.centering.values.push_back(std::stod(tok));
  } else {
    throw CLI::ValidationError("--centering",
                               "expected oracle, prerun, or value:<x>[,...]");
  }

  lrsens::EnsembleReport rep = lrsens::run_ensemble(cfg);
  nlohmann::json cj = config_json(cfg, mf, "estimate");
  lrsens::write_report_bundle(out, rep, provenance_json(cj, seed));
  std::cout << "report bundle written to " << out << "\n";
  return kExitOk;
}

int cmd_bench(const std::string& which, const std::string& scale_name,
              std::uint64_t seed, const std::string& out) {
  const lrsens::BenchScale scale = scale_name == "paper"
                                       ? lrsens::BenchScale::Paper
                                       : lrsens::BenchScale::Desk;
  lrsens::BenchResult res;
  std::vector<std::pair<std::string, double>> oracle_rows;
  if (which == "linear") {
    res = lrsens::bench_linear(scale, seed, default_threads());
    oracle_rows.emplace_back("exact_sensitivity", res.exact);
  } else if (which == "twogene") {
    res = lrsens::bench_twogene(scale, seed, default_threads());
  } else {
    throw CLI::ValidationError("benchmark", "expected linear or twogene");
  }

  nlohmann::json cj;
  cj["command"] = "bench";
  cj["benchmark"] = which;
  cj["scale"] = scale_name;
  cj["seed"] = seed;
  lrsens::write_report_bundle(out, res.report, provenance_json(cj, seed),
                              oracle_rows);

  std::string table;
  for (const auto& chk : res.checks)
    table += std::string(chk.pass ? "PASS  " : "FAIL  ") + chk.name + "  [" +
             chk.detail + "]\n";
  lrsens::write_file(std::filesystem::path(out) / "checks.txt", table);
  std::cout << table;
  if (!res.all_pass()) {
    std::cerr << "benchmark checks failed\n";
    return kExitBenchFail;
  }
  return kExitOk;
}

// --- oracle ----------------------------------------------------------------

std::string state_label(const lrsens::State& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i)
    s += (i ? " " : "") + std::to_string(x[i]);
  return s + ")";
}

int cmd_oracle(const std::string& model_path, const std::string& obs_name,
               const std::string& param_name, const std::string& what,
               const std::string& out) {
  lrsens::ModelFile mf = load_model(model_path);
  lrsens::Truncation tr = lrsens::Truncation::reachable_box(
      mf.net, mf.initial_state, require_bounds(mf));

  if (what == "check") {
    auto irr = lrsens::check_irreducible(mf.net, mf.parameter_values, tr);
    nlohmann::json j;
    j["irreducible"] = irr.irreducible;
    j["n_states"] = tr.size();
    j["n_components"] = irr.components.size();
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& comp : irr.components) {
      nlohmann::json cj = nlohmann::json::array();
      for (std::size_t i : comp) cj.push_back(tr.states[i]);
      comps.push_back(cj);
    }
    j["components"] = comps;
    write_text(out, j.dump(2) + "\n");
    return kExitOk;
  }

  lrsens::FspSolution sol =
      lrsens::stationary_distribution(mf.net, mf.parameter_values, tr);
  std::vector<std::pair<std::string, double>> rows;
  rows.emplace_back("n_states", static_cast<double>(tr.size()));
  rows.emplace_back("mass_leak_rate", sol.mass_leak_rate);
  rows.emplace_back("residual_stationary", sol.residuals.stationary);

  if (what == "pi") {
    for (std::size_t i = 0; i < tr.size(); ++i)
      rows.emplace_back("pi" + state_label(tr.states[i]),
                        sol.pi[static_cast<int>(i)]);
    write_text(out, lrsens::oracle_csv(rows));
    return kExitOk;
  }

  const lrsens::Observable& f = find_observable(mf, obs_name);
  lrsens::solve_poisson(mf.net, mf.parameter_values, f, sol);
  rows.emplace_back("pi_f", sol.pi_f);
  rows.emplace_back("residual_poisson", sol.residuals.poisson);
  rows.emplace_back("residual_centering", sol.residuals.centering);

  if (what == "poisson") {
    for (std::size_t i = 0; i < tr.size(); ++i)
      rows.emplace_back("fhat" + state_label(tr.states[i]),
                        sol.f_hat[static_cast<int>(i)]);
    write_text(out, lrsens::oracle_csv(rows));
    return kExitOk;
  }

  const std::size_t k =
      find_name(mf.net.parameter_names, param_name, "parameter");
  if (what == "sensitivity") {
    rows.emplace_back("sensitivity_direct",
                      lrsens::sensitivity_direct(mf.net, mf.parameter_values,
                                                 sol, k));
    rows.emplace_back("sensitivity_fd",
                      lrsens::sensitivity_fd(mf.net, mf.parameter_values, tr,
                                             f, k));
    write_text(out, lrsens::oracle_csv(rows));
    return kExitOk;
  }
  if (what == "covariance") {
    auto cov =
        lrsens::asymptotic_covariance(mf.net, mf.parameter_values, sol, k);
    rows.emplace_back("sigma11_rate", cov.sigma11_rate);
    rows.emplace_back("sigma12_rate", cov.sigma12_rate);
    rows.emplace_back("sigma22_rate", cov.sigma22_rate);
    write_text(out, lrsens::oracle_csv(rows));
    return kExitOk;
  }
  throw CLI::ValidationError(
      "--what", "expected pi, poisson, sensitivity, covariance, or check");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steady-state sensitivity estimation for stochastic reaction "
               "networks"};
  app.require_subcommand(1);

  // simulate
  std::string sim_model, sim_out = "-";
  double sim_t_end = 0.0;
  std::uint64_t sim_seed = 0;
  std::vector<double> sim_cks;
  auto* sim = app.add_subcommand("simulate", "run one trajectory, write CSV");
  sim->add_option("model", sim_model, "model file (JSON)")->required();
  sim->add_option("--t-end", sim_t_end, "terminal time")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--checkpoints", sim_cks, "checkpoint times")
      ->delimiter(',');
  sim->add_option("--out", sim_out, "output CSV path ('-' for stdout)");

  // estimate
  std::string est_model, est_out = "report", est_centering = "oracle";
  std::vector<std::string> est_params, est_obs, est_estimators;
  std::size_t est_samples = 1000;
  double est_t_end = 0.0, est_burn_in = 0.0;
  std::uint64_t est_seed = 0;
  std::vector<double> est_cks;
  auto* est = app.add_subcommand("estimate",
                                 "ensemble sensitivity estimation");
  est->add_option("model", est_model, "model file (JSON)")->required();
  est->add_option("--param", est_params, "parameter name(s)")
      ->required()
      ->delimiter(',');
  est->add_option("--observable", est_obs, "observable name(s)")
      ->required()
      ->delimiter(',');
  est->add_option("--estimators", est_estimators,
                  "subset of lr,clr,intlr,intclr (default all)")
      ->delimiter(',');
  est->add_option("--samples", est_samples, "ensemble size")
      ->check(CLI::PositiveNumber);
  est->add_option("--t-end", est_t_end, "terminal time")
      ->required()
      ->check(CLI::PositiveNumber);
  est->add_option("--checkpoints", est_cks, "checkpoint times")
      ->delimiter(',');
  est->add_option("--centering", est_centering,
                  "oracle | prerun | value:<x>[,...]");
  est->add_option("--seed", est_seed, "base RNG seed");
  est->add_option("--burn-in", est_burn_in,
                  "fraction of t_end excluded from slope fits");
  est->add_option("--out", est_out, "output directory");

  // oracle
  std::string orc_model, orc_obs, orc_param, orc_what = "sensitivity",
              orc_out = "-";
  auto* orc = app.add_subcommand("oracle", "exact truncation-based values");
  orc->add_option("model", orc_model, "model file (JSON)")->required();
  orc->add_option("--observable", orc_obs, "observable name");
  orc->add_option("--param", orc_param, "parameter name");
  orc->add_option("--what", orc_what,
                  "pi | poisson | sensitivity | covariance | check");
  orc->add_option("--out", orc_out, "output path ('-' for stdout)");

  // bench
  std::string bench_which, bench_scale = "desk", bench_out = "bench";
  std::uint64_t bench_seed = 12345;
  auto* ben = app.add_subcommand("bench", "reference benchmarks");
  ben->add_option("benchmark", bench_which, "linear | twogene")->required();
  ben->add_option("--scale", bench_scale, "paper | desk")
      ->check(CLI::IsMember({"paper", "desk"}));
  ben->add_option("--seed", bench_seed, "base RNG seed");
  ben->add_option("--out", bench_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(sim_model, sim_t_end, sim_seed, sim_cks, sim_out);
    if (est->parsed())
      return cmd_estimate(est_model, est_params, est_obs, est_estimators,
                          est_samples, est_t_end, est_cks, est_centering,
                          est_seed, est_burn_in, est_out);
    if (orc->parsed())
      return cmd_oracle(orc_model, orc_obs, orc_param, orc_what, orc_out);
    if (ben->parsed())
      return cmd_bench(bench_which, bench_scale, bench_seed, bench_out);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const lrsens::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const lrsens::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kExitModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
