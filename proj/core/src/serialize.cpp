#include "wavemap/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "wavemap/errors.hpp"
#include "wavemap/version.hpp"

namespace wavemap {

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double require_number(const ordered_json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    std::ostringstream msg;
    msg << "document is missing numeric field '" << key << "'";
    throw validation_error(msg.str());
  }
  return j.at(key).get<double>();
}

}  // namespace

ordered_json run_config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["command"] = cfg.command;
  j["n"] = cfg.n;
  j["grid"] = cfg.grid;
  j["cfl"] = cfg.cfl;
  j["tau_end"] = cfg.tau_end;
  j["levels"] = cfg.levels;
  j["lambda_range"] = {cfg.lambda_lo, cfg.lambda_hi};
  j["window"] = {{"len", cfg.window_len},
                 {"stride", cfg.window_stride},
                 {"settle", cfg.settle}};
  j["out"] = cfg.out;
  j["config_path"] = cfg.config_path;
  return j;
}

RunConfig run_config_from_json(const ordered_json& j, const RunConfig& defaults) {
  if (!j.is_object())
    throw validation_error("config: expected a JSON object");
  RunConfig cfg = defaults;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "command") {
        cfg.command = value.get<std::string>();
      } else if (key == "n") {
        cfg.n = value.get<int>();
      } else if (key == "grid") {
        cfg.grid = value.get<int>();
      } else if (key == "cfl") {
        cfg.cfl = value.get<double>();
      } else if (key == "tau_end") {
        cfg.tau_end = value.get<double>();
      } else if (key == "levels") {
        cfg.levels = value.get<int>();
      } else if (key == "lambda_range") {
        if (!value.is_array() || value.size() != 2)
          throw validation_error("config: lambda_range must be [lo, hi]");
        cfg.lambda_lo = value[0].get<double>();
        cfg.lambda_hi = value[1].get<double>();
      } else if (key == "window") {
        for (const auto& [wk, wv] : value.items()) {
          if (wk == "len")
            cfg.window_len = wv.get<double>();
          else if (wk == "stride")
            cfg.window_stride = wv.get<double>();
          else if (wk == "settle")
            cfg.settle = wv.get<double>();
          else
            throw validation_error("config: unknown window key '" + wk + "'");
        }
      } else if (key == "out") {
        cfg.out = value.get<std::string>();
      } else if (key == "config_path") {
        cfg.config_path = value.get<std::string>();
      } else {
        throw validation_error("config: unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("config: bad value for '" + key + "': " + e.what());
    }
  }
  return cfg;
}

ordered_json profile_to_json(const Profile& p) {
  ordered_json j;
  j["format"] = kProfileFormat;
  j["n"] = p.n;
  j["b"] = p.b;
  j["c"] = p.c;
  j["defect"] = p.defect;
  j["sign"] = p.sign;
  j["grid"] = {{"rho_min", p.rho.front()},
               {"rho_max", p.rho.back()},
               {"count", p.rho.size()}};
  ordered_json samples = ordered_json::array();
  for (std::size_t k = 0; k < p.rho.size(); ++k)
    samples.push_back({p.rho[k], p.f[k], p.fp[k]});
  j["samples"] = std::move(samples);
  return j;
}

Profile profile_from_json(const ordered_json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != kProfileFormat)
    throw validation_error("profile document: missing or wrong format tag");
  Profile p;
  p.n = static_cast<int>(require_number(j, "n"));
  p.b = require_number(j, "b");
  p.c = require_number(j, "c");
  p.defect = require_number(j, "defect");
  p.sign = static_cast<int>(require_number(j, "sign"));
  if (!j.contains("samples") || !j.at("samples").is_array() ||
      j.at("samples").size() < 2)
    throw validation_error("profile document: needs at least two samples");
  for (const auto& row : j.at("samples")) {
    if (!row.is_array() || row.size() != 3)
      throw validation_error("profile document: sample rows are [rho, f, f']");
    p.rho.push_back(row[0].get<double>());
    p.f.push_back(row[1].get<double>());
    p.fp.push_back(row[2].get<double>());
  }
  p.rho_step = p.rho[1] - p.rho[0];
  if (!(p.rho_step > 0.0))
    throw validation_error("profile document: samples must ascend in rho");
  for (std::size_t k = 1; k < p.rho.size(); ++k) {
    const double gap = p.rho[k] - p.rho[k - 1];
    if (std::abs(gap - p.rho_step) > 1e-12)
      throw validation_error("profile document: sample grid is not uniform");
  }
  p.closed_form = (p.n == 0);
  return p;
}

ordered_json eigenpair_to_json(const Eigenpair& ep, int profile_n,
                               const std::vector<std::array<double, 3>>& samples) {
  ordered_json j;
  j["n"] = profile_n;
  j["lambda"] = ep.lambda;
  j["a"] = ep.a;
  j["defect"] = ep.defect;
  j["uncertainty"] = ep.uncertainty;
  j["newton_iterations"] = ep.newton_iterations;
  if (!samples.empty()) {
    ordered_json rows = ordered_json::array();
    for (const auto& s : samples) rows.push_back({s[0], s[1], s[2]});
    j["samples"] = std::move(rows);
  }
  return j;
}

ordered_json spectrum_to_json(const SpectrumResult& res,
                              const std::string& method) {
  ordered_json j;
  j["format"] = kSpectrumFormat;
  j["profile_n"] = res.profile_n;
  j["method"] = method;
  ordered_json levels = ordered_json::array();
  for (const LevelEstimate& le : res.levels) {
    ordered_json row;
    row["level"] = le.level;
    row["mu"] = le.mu;
    row["uncertainty"] = le.uncertainty;
    row["oscillation"] = le.oscillation;
    row["window"] = {le.window_lo, le.window_hi};
    row["rms_residual"] = le.rms_residual;
    levels.push_back(std::move(row));
  }
  j["levels"] = std::move(levels);
  return j;
}

ordered_json make_document(const std::string& kind, ordered_json body,
                           const RunConfig& cfg) {
  ordered_json doc;
  doc["tool"] = "wavemap";
  doc["version"] = kVersion;
  doc["kind"] = kind;
  doc["config"] = run_config_to_json(cfg);
  doc["result"] = std::move(body);
  return doc;
}

void write_snapshot_csv(std::ostream& os, const State& s, const Grid& g) {
  os << "tau,rho,u1,u2,u3\n";
  for (int i = 0; i < g.points(); ++i)
    os << fmt17(s.tau) << ',' << fmt17(g.rho(i)) << ',' << fmt17(s.u1[i])
       << ',' << fmt17(s.u2[i]) << ',' << fmt17(s.u3[i]) << '\n';
}

void write_series_csv(std::ostream& os, const std::vector<double>& taus,
                      const std::vector<std::vector<double>>& lognorm) {
  os << "tau";
  for (std::size_t k = 0; k < lognorm.size(); ++k)
    os << ",log_norm_level_" << k;
  os << '\n';
  for (std::size_t i = 0; i < taus.size(); ++i) {
    os << fmt17(taus[i]);
    for (const auto& series : lognorm) {
      if (series.size() != taus.size())
        throw validation_error("series CSV: level series length mismatch");
      os << ',' << fmt17(series[i]);
    }
    os << '\n';
  }
}

}  // namespace wavemap
