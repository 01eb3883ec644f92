#ifndef LRSENS_REPORT_IO_HPP
#define LRSENS_REPORT_IO_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "lrsens/experiment.hpp"

namespace lrsens {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

/// Hash of the canonical (key-sorted) JSON dump; insensitive to the key
/// order of the input document.
inline std::uint64_t config_hash(const nlohmann::json& cfg) {
  return fnv1a64(cfg.dump());
}

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline EstimatorKind estimator_from_name(const std::string& s) {
  for (EstimatorKind k : kAllEstimators)
    if (s == estimator_name(k)) return k;
  // accept lower-case spellings on the CLI
  if (s == "lr") return EstimatorKind::LR;
  if (s == "clr") return EstimatorKind::CLR;
  if (s == "intlr") return EstimatorKind::IntLR;
  if (s == "intclr") return EstimatorKind::IntCLR;
  throw ModelError("unknown estimator '" + s + "'");
}

inline nlohmann::json report_to_json(const EnsembleReport& rep,
                                     const nlohmann::json& provenance) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["provenance"] = provenance;
  doc["checkpoints"] = rep.checkpoints;
  doc["params"] = rep.params;
  doc["param_names"] = rep.param_names;
  doc["observable_names"] = rep.observable_names;
  nlohmann::json ests = nlohmann::json::array();
  for (EstimatorKind k : rep.estimators) ests.push_back(estimator_name(k));
  doc["estimators"] = ests;
  doc["n_samples"] = rep.n_samples;
  doc["base_seed"] = rep.base_seed;
  doc["absorbed_count"] = rep.absorbed_count;
  doc["martingale_healthy"] = rep.martingale_healthy;
  doc["centering"] = {{"provenance", rep.centering_provenance},
                      {"values", rep.centering_values},
                      {"halfwidth", rep.centering_halfwidth}};

  nlohmann::json stats = nlohmann::json::array();
  for (std::size_t e = 0; e < rep.estimators.size(); ++e)
    for (std::size_t k = 0; k < rep.params.size(); ++k)
      for (std::size_t o = 0; o < rep.observable_names.size(); ++o) {
        for (std::size_t i = 0; i < rep.n_ck(); ++i) {
          const EstimateStats& st = rep.at(e, k, o, i);
          stats.push_back({{"estimator", estimator_name(rep.estimators[e])},
                           {"parameter", rep.param_names[k]},
                           {"observable", rep.observable_names[o]},
                           {"t", rep.checkpoints[i]},
                           {"mean", st.mean},
                           {"var", st.variance},
                           {"se", st.std_error},
                           {"ci_lo", st.ci_lo},
                           {"ci_hi", st.ci_hi}});
        }
      }
  doc["estimates"] = stats;

  nlohmann::json slopes = nlohmann::json::array();
  for (std::size_t e = 0; e < rep.estimators.size(); ++e)
    for (std::size_t k = 0; k < rep.params.size(); ++k)
      for (std::size_t o = 0; o < rep.observable_names.size(); ++o) {
        const SlopeFit& f = rep.slopes[rep.slope_index(e, k, o)];
        slopes.push_back({{"estimator", estimator_name(rep.estimators[e])},
                          {"parameter", rep.param_names[k]},
                          {"observable", rep.observable_names[o]},
                          {"slope", f.slope},
                          {"intercept", f.intercept},
                          {"r2", f.r2}});
      }
  doc["variance_slopes"] = slopes;

  doc["z_mean"] = rep.z_mean;
  doc["z_se"] = rep.z_se;
  doc["y_mean"] = rep.y_mean;
  doc["y_se"] = rep.y_se;
  return doc;
}

/// Inverse of report_to_json for the EnsembleReport payload (provenance is
/// returned separately by the caller if needed).
inline EnsembleReport report_from_json(const nlohmann::json& doc) {
  if (doc.value("schema_version", 0) != kReportSchemaVersion)
    throw ModelError("report: unsupported schema_version");
  EnsembleReport rep;
  rep.checkpoints = doc.at("checkpoints").get<std::vector<double>>();
  rep.params = doc.at("params").get<std::vector<std::size_t>>();
  rep.param_names = doc.at("param_names").get<std::vector<std::string>>();
  rep.observable_names =
      doc.at("observable_names").get<std::vector<std::string>>();
  for (const auto& s : doc.at("estimators"))
    rep.estimators.push_back(estimator_from_name(s.get<std::string>()));
  rep.n_samples = doc.at("n_samples").get<std::size_t>();
  rep.base_seed = doc.at("base_seed").get<std::uint64_t>();
  rep.absorbed_count = doc.at("absorbed_count").get<std::int64_t>();
  rep.martingale_healthy = doc.at("martingale_healthy").get<bool>();
  rep.centering_provenance =
      doc.at("centering").at("provenance").get<std::string>();
  rep.centering_values =
      doc.at("centering").at("values").get<std::vector<double>>();
  rep.centering_halfwidth = doc.at("centering").at("halfwidth").get<double>();

  rep.stats.resize(rep.estimators.size() * rep.params.size() *
                   rep.observable_names.size() * rep.n_ck());
  std::size_t idx = 0;
  for (const auto& sj : doc.at("estimates")) {
    EstimateStats st;
    st.mean = sj.at("mean").get<double>();
    st.variance = sj.at("var").get<double>();
    st.std_error = sj.at("se").get<double>();
    st.ci_lo = sj.at("ci_lo").get<double>();
    st.ci_hi = sj.at("ci_hi").get<double>();
    if (idx >= rep.stats.size()) throw ModelError("report: extra estimates");
    rep.stats[idx++] = st;  // emitted in stat_index order
  }
  if (idx != rep.stats.size()) throw ModelError("report: missing estimates");

  rep.slopes.resize(rep.estimators.size() * rep.params.size() *
                    rep.observable_names.size());
  idx = 0;
  for (const auto& sj : doc.at("variance_slopes")) {
    SlopeFit f;
    f.slope = sj.at("slope").get<double>();
    f.intercept = sj.at("intercept").get<double>();
    f.r2 = sj.at("r2").get<double>();
    if (idx >= rep.slopes.size()) throw ModelError("report: extra slopes");
    rep.slopes[idx++] = f;
  }
  if (idx != rep.slopes.size()) throw ModelError("report: missing slopes");

  rep.z_mean = doc.at("z_mean").get<std::vector<double>>();
  rep.z_se = doc.at("z_se").get<std::vector<double>>();
  rep.y_mean = doc.at("y_mean").get<std::vector<double>>();
  rep.y_se = doc.at("y_se").get<std::vector<double>>();
  return rep;
}

inline std::string estimates_csv(const EnsembleReport& rep) {
  struct Row {
    std::string est, par, obs;
    double t;
    EstimateStats st;
  };
  std::vector<Row> rows;
  for (std::size_t e = 0; e < rep.estimators.size(); ++e)
    for (std::size_t k = 0; k < rep.params.size(); ++k)
      for (std::size_t o = 0; o < rep.observable_names.size(); ++o)
        for (std::size_t i = 0; i < rep.n_ck(); ++i)
          rows.push_back({estimator_name(rep.estimators[e]),
                          rep.param_names[k], rep.observable_names[o],
                          rep.checkpoints[i], rep.at(e, k, o, i)});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.est, a.par, a.obs, a.t) <
           std::tie(b.est, b.par, b.obs, b.t);
  });
  std::string out = "estimator,parameter,observable,t,mean,var,se,ci_lo,ci_hi\n";
  for (const Row& r : rows)
    out += r.est + "," + r.par + "," + r.obs + "," + csv_num(r.t) + "," +
           csv_num(r.st.mean) + "," + csv_num(r.st.variance) + "," +
           csv_num(r.st.std_error) + "," + csv_num(r.st.ci_lo) + "," +
           csv_num(r.st.ci_hi) + "\n";
  return out;
}

inline std::string variance_csv(const EnsembleReport& rep) {
  struct Row {
    std::string est, par, obs;
    double t, var;
  };
  std::vector<Row> rows;
  for (std::size_t e = 0; e < rep.estimators.size(); ++e)
    for (std::size_t k = 0; k < rep.params.size(); ++k)
      for (std::size_t o = 0; o < rep.observable_names.size(); ++o)
        for (std::size_t i = 0; i < rep.n_ck(); ++i)
          rows.push_back({estimator_name(rep.estimators[e]),
                          rep.param_names[k], rep.observable_names[o],
                          rep.checkpoints[i], rep.at(e, k, o, i).variance});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.est, a.par, a.obs, a.t) <
           std::tie(b.est, b.par, b.obs, b.t);
  });
  std::string out = "estimator,parameter,observable,t,var\n";
  for (const Row& r : rows)
    out += r.est + "," + r.par + "," + r.obs + "," + csv_num(r.t) + "," +
           csv_num(r.var) + "\n";
  return out;
}

inline std::string oracle_csv(
    const std::vector<std::pair<std::string, double>>& rows) {
  std::string out = "quantity,value\n";
  for (const auto& [q, v] : rows) out += q + "," + csv_num(v) + "\n";
  return out;
}

/// Standalone two-panel plot script over the emitted CSVs; kept out of
/// process so the library has no rendering dependency.
inline std::string plot_script() {
  return R"(#!/usr/bin/env python3
"""Two-panel figure from estimates.csv / variance.csv in this directory.

Left: estimated sensitivity vs t with 95% CIs. Right: log-log variance vs t.
"""
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))

def load(name):
    with open(os.path.join(here, name), newline="") as fh:
        return list(csv.DictReader(fh))

est = load("estimates.csv")
var = load("variance.csv")
series = defaultdict(list)
for r in est:
    series[(r["estimator"], r["parameter"], r["observable"])].append(r)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
for (e, p, o), rows in sorted(series.items()):
    rows.sort(key=lambda r: float(r["t"]))
    t = [float(r["t"]) for r in rows]
    m = [float(r["mean"]) for r in rows]
    lo = [float(r["ci_lo"]) for r in rows]
    hi = [float(r["ci_hi"]) for r in rows]
    lbl = e if len(series) <= 4 else f"{e} {p}"
    ax1.plot(t, m, marker="o", label=lbl)
    ax1.fill_between(t, lo, hi, alpha=0.2)
ax1.set_xlabel("t")
ax1.set_ylabel("estimated sensitivity")
ax1.legend(fontsize=8)

vseries = defaultdict(list)
for r in var:
    vseries[(r["estimator"], r["parameter"], r["observable"])].append(r)
for (e, p, o), rows in sorted(vseries.items()):
    rows.sort(key=lambda r: float(r["t"]))
    t = [float(r["t"]) for r in rows]
    v = [float(r["var"]) for r in rows]
    lbl = e if len(vseries) <= 4 else f"{e} {p}"
    ax2.loglog(t, v, marker="o", label=lbl)
ax2.set_xlabel("t")
ax2.set_ylabel("ensemble variance")
ax2.legend(fontsize=8)

fig.tight_layout()
out = os.path.join(here, "figure.png")
fig.savefig(out, dpi=150)
print(out)
)";
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot open '" + path.string() + "' for write");
  out << text;
  if (!out) throw ModelError("write failed for '" + path.string() + "'");
}

/// report.json + estimates.csv + variance.csv + oracle.csv + plot.py.
inline void write_report_bundle(
    const std::filesystem::path& dir, const EnsembleReport& rep,
    const nlohmann::json& provenance,
    const std::vector<std::pair<std::string, double>>& oracle_rows = {}) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json",
             report_to_json(rep, provenance).dump(2) + "\n");
  write_file(dir / "estimates.csv", estimates_csv(rep));
  write_file(dir / "variance.csv", variance_csv(rep));
  write_file(dir / "oracle.csv", oracle_csv(oracle_rows));
  write_file(dir / "plot.py", plot_script());
}

}  // namespace lrsens

#endif  // LRSENS_REPORT_IO_HPP
