#pragma once

// JSON/CSV persistence for profiles, eigenpairs, and spectra.  All documents
// are deterministic: ordered keys, no timestamps, fixed float round-trip
// formatting; every top-level document carries the effective run
// configuration and the library/format version tags.

#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wavemap/mode_ode.hpp"
#include "wavemap/profile.hpp"
#include "wavemap/spectra.hpp"

namespace wavemap {

using ordered_json = nlohmann::ordered_json;

// Effective configuration of one CLI run; serialized verbatim into every
// output document.  Fully deterministic: there is no random state anywhere.
struct RunConfig {
  std::string command;
  int n = 0;
  int grid = 2048;
  double cfl = 0.25;
  double tau_end = 12.0;
  int levels = 4;
  double lambda_lo = -1.0;
  double lambda_hi = 2.0;
  double window_len = 2.5;
  double window_stride = 0.25;
  double settle = 1.0;
  std::string out;          // output path ("" = report to stdout only)
  std::string config_path;  // --config file the run loaded ("" = none)
};

ordered_json run_config_to_json(const RunConfig& cfg);
// Reads the keys above from a JSON object (absent keys keep their defaults;
// unknown keys are a validation_error, catching misspelled options).
RunConfig run_config_from_json(const ordered_json& j, const RunConfig& defaults = {});

// Profile document: {n, b, c, defect, sign, grid: {rho_min, rho_max, count},
// samples: [[rho, f, f'], ...]} plus version tag.
ordered_json profile_to_json(const Profile& p);
Profile profile_from_json(const ordered_json& j);

// Eigenpair entry: {n, lambda, a, defect, uncertainty} with optional
// eigenfunction samples [[rho, v, v'], ...].
ordered_json eigenpair_to_json(
    const Eigenpair& ep, int profile_n,
    const std::vector<std::array<double, 3>>& samples = {});

// Spectrum report body: {profile_n, method, levels: [{level, mu,
// uncertainty, oscillation, window, rms_residual}]}.
ordered_json spectrum_to_json(const SpectrumResult& res,
                              const std::string& method);

// Wraps a document body with the version tags and the effective config, the
// layout every file written by the CLI shares.
ordered_json make_document(const std::string& kind, ordered_json body,
                           const RunConfig& cfg);

// CSV emitters (17 significant digits, '\n' separators, deterministic).
void write_snapshot_csv(std::ostream& os, const State& s, const Grid& g);
void write_series_csv(std::ostream& os, const std::vector<double>& taus,
                      const std::vector<std::vector<double>>& lognorm);

}  // namespace wavemap
