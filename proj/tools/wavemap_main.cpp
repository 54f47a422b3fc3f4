// wavemap: blow-up profiles of the co-rotational wave map and the spectrum
// of their linear perturbations, by singular two-point shooting and by
// filtered linearized evolution.
//
// Commands: profile, modes, spectrum, reproduce-tables, converge.
// Exit codes: 0 success, 2 validation error, 3 numerical failure,
//             4 regression (a checked value missed its tolerance).

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wavemap/errors.hpp"
#include "wavemap/evolve.hpp"
#include "wavemap/mode_ode.hpp"
#include "wavemap/profile.hpp"
#include "wavemap/serialize.hpp"
#include "wavemap/spectra.hpp"
#include "wavemap/version.hpp"

namespace {

using namespace wavemap;

std::string num(double v, const char* fmt = "%.12g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw validation_error("cannot open output file: " + path);
  os << content;
  if (!os) throw validation_error("failed writing output file: " + path);
}

ordered_json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw validation_error("cannot open config file: " + path);
  try {
    return ordered_json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("config file " + path + ": " + e.what());
  }
}

std::string csv_path_for(const std::string& out) {
  const std::string suffix = ".json";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
    return out.substr(0, out.size() - suffix.size()) + ".csv";
  return out + ".csv";
}

// ---------------------------------------------------------------------------
// profile

int cmd_profile(const RunConfig& cfg, bool check_closed_form) {
  const Profile p = shoot_profile(cfg.n);
  std::cout << "profile n=" << p.n << ": b=" << num(p.b, "%.12f")
            << " c=" << num(p.c, "%.12f") << " defect=" << num(p.defect, "%.3g")
            << "\n";

  int code = 0;
  if (check_closed_form) {
    if (cfg.n != 0)
      throw validation_error(
          "--check-closed-form: only the n=0 profile has a closed form");
    double dev = 0.0;
    for (std::size_t k = 0; k < p.rho.size(); ++k) {
      const auto [f, fp] = ground_state(p.rho[k]);
      dev = std::max(dev, std::abs(p.f[k] - f));
      dev = std::max(dev, std::abs(p.fp[k] - fp));
    }
    const bool ok = dev <= 1e-8;
    std::cout << "closed-form check: max deviation " << num(dev, "%.3g")
              << (ok ? " <= 1e-8 (ok)" : " > 1e-8 (FAIL)") << "\n";
    if (!ok) code = 4;
  }

  if (!cfg.out.empty()) {
    write_text_file(cfg.out,
                    make_document("profile", profile_to_json(p), cfg).dump(2) + "\n");
    std::cout << "wrote " << cfg.out << "\n";
  }
  return code;
}

// ---------------------------------------------------------------------------
// modes

int cmd_modes(const RunConfig& cfg) {
  if (!(cfg.lambda_hi > cfg.lambda_lo))
    throw validation_error("modes: --lambda-range needs lo < hi");
  const Profile p = shoot_profile(cfg.n);
  const int steps = std::max(
      24, static_cast<int>(std::ceil((cfg.lambda_hi - cfg.lambda_lo) * 40.0)));
  const auto candidates =
      scan_eigenvalues(cfg.lambda_lo, cfg.lambda_hi, steps, p);

  std::vector<Eigenpair> pairs;
  for (const ScanCandidate& c : candidates) {
    const Eigenpair ep = find_eigenvalue(c.lambda_opt, c.a_opt, p);
    bool duplicate = false;
    for (const Eigenpair& seen : pairs)
      duplicate = duplicate || std::abs(seen.lambda - ep.lambda) < 1e-7;
    if (!duplicate) pairs.push_back(ep);
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const Eigenpair& a, const Eigenpair& b) { return a.lambda > b.lambda; });

  std::cout << "modes n=" << cfg.n << " scan [" << num(cfg.lambda_lo) << ", "
            << num(cfg.lambda_hi) << "]: " << pairs.size() << " eigenvalue"
            << (pairs.size() == 1 ? "" : "s") << "\n";
  for (const Eigenpair& ep : pairs)
    std::cout << "  lambda=" << num(ep.lambda, "%+.10f") << "  a="
              << num(ep.a, "%.10g") << "  defect=" << num(ep.defect, "%.3g")
              << "  uncertainty=" << num(ep.uncertainty, "%.2g") << "\n";

  ordered_json body;
  body["format"] = kModeFormat;
  body["profile"] = {{"n", p.n}, {"b", p.b}, {"c", p.c}, {"defect", p.defect}};
  body["scan"] = {{"lo", cfg.lambda_lo}, {"hi", cfg.lambda_hi}, {"steps", steps}};
  ordered_json scan_rows = ordered_json::array();
  for (const ScanCandidate& c : candidates)
    scan_rows.push_back({{"bracket", {c.lambda_lo, c.lambda_hi}},
                         {"lambda_opt", c.lambda_opt},
                         {"a_opt", c.a_opt},
                         {"min_residual", c.min_residual},
                         {"near_pole", c.near_pole}});
  body["scan"]["candidates"] = std::move(scan_rows);
  ordered_json rows = ordered_json::array();
  for (const Eigenpair& ep : pairs)
    rows.push_back(cfg.out.empty()
                       ? eigenpair_to_json(ep, p.n)
                       : eigenpair_to_json(ep, p.n, eigenfunction_table(ep, p)));
  body["eigenvalues"] = std::move(rows);

  // The lambda = -2 resonance: the generic one-parameter light-cone branch
  // degenerates there, so the scan is structurally blind to it.  Whenever
  // the requested range covers -2, report the analytic-branch diagnostics.
  if (cfg.lambda_lo <= -2.0 && cfg.lambda_hi >= -2.0) {
    const double numer = resonance_numerator_minus2(p);
    const ResonantMatch rm = resonant_match_minus2(p);
    const bool is_eigen = std::abs(numer) <= 1e-8;
    body["resonant_minus2"] = {{"numerator", numer},
                               {"is_eigenvalue", is_eigen},
                               {"a", rm.a},
                               {"beta", rm.beta},
                               {"solve_residual", rm.solve_residual},
                               {"a_direct", rm.a_direct}};
    std::cout << "  lambda=-2 resonance: numerator=" << num(numer, "%.3g")
              << (is_eigen ? " (analytic eigenvalue; a=" + num(rm.a, "%.10g") +
                                 ", match residual " +
                                 num(rm.solve_residual, "%.2g") + ")"
                           : " (not an eigenvalue of this profile)")
              << "\n";
  }

  if (!cfg.out.empty()) {
    write_text_file(cfg.out, make_document("modes", std::move(body), cfg).dump(2) + "\n");
    std::cout << "wrote " << cfg.out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// spectrum

SpectrumOptions spectrum_options(const RunConfig& cfg) {
  SpectrumOptions so;
  so.levels = cfg.levels;
  so.grid_n = cfg.grid;
  so.kappa = cfg.cfl;
  so.tau_end = cfg.tau_end;
  so.window_len = cfg.window_len;
  so.window_stride = cfg.window_stride;
  so.settle = cfg.settle;
  return so;
}

void print_spectrum(const SpectrumResult& res) {
  for (const LevelEstimate& le : res.levels)
    std::cout << "  level " << le.level << ": mu=" << num(le.mu, "%+.6f")
              << " +/- " << num(le.uncertainty, "%.2g") << "  window=["
              << num(le.window_lo) << ", " << num(le.window_hi)
              << "]  residual=" << num(le.rms_residual, "%.2g")
              << "  oscillation=" << (le.oscillation ? "yes" : "no") << "\n";
}

int cmd_spectrum(const RunConfig& cfg) {
  const Profile p = shoot_profile(cfg.n);
  const SpectrumResult res = extract_spectrum(p, spectrum_options(cfg));
  std::cout << "spectrum n=" << cfg.n << " (evolution, N=" << cfg.grid
            << ", kappa=" << num(cfg.cfl) << ", tau_end=" << num(cfg.tau_end)
            << "):\n";
  print_spectrum(res);

  if (!cfg.out.empty()) {
    write_text_file(cfg.out,
                    make_document("spectrum", spectrum_to_json(res, "evolution"),
                                  cfg)
                            .dump(2) +
                        "\n");
    const std::string csv = csv_path_for(cfg.out);
    std::ostringstream os;
    write_series_csv(os, res.taus, res.lognorm);
    write_text_file(csv, os.str());
    std::cout << "wrote " << cfg.out << " and " << csv << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// reproduce-tables

struct Cell {
  std::string id;
  double paper = 0.0;
  double tolerance = 0.0;
  bool gating = true;
  double value = 0.0;
  double error = 0.0;
  bool pass = false;
  bool computed = false;
};

struct SkipNote {
  std::string id;
  std::string note;
};

Eigenpair shoot_single(const Profile& p, double lo, double hi) {
  const int steps = std::max(24, static_cast<int>(std::ceil((hi - lo) * 40.0)));
  const auto cands = scan_eigenvalues(lo, hi, steps, p);
  if (cands.size() != 1) {
    std::ostringstream msg;
    msg << "expected exactly one eigenvalue in [" << lo << ", " << hi
        << "], scan found " << cands.size();
    throw numeric_error(msg.str());
  }
  return find_eigenvalue(cands[0].lambda_opt, cands[0].a_opt, p);
}

int cmd_reproduce(const RunConfig& cfg, const std::string& only_cell) {
  // The eleven populated table cells that gate the regression, plus the two
  // extra shooting values the paper lists for the first excitation.
  std::vector<Cell> cells = {
      {"groundstate/shooting/gauge", 1.0, 1e-6, true},
      {"groundstate/shooting/stable1", -0.54246, 5e-5, true},
      {"firstexcitation/shooting/unstable", 6.333625, 1e-4, true},
      {"firstexcitation/shooting/gauge", 1.0, 1e-6, false},
      {"firstexcitation/shooting/stable1", -0.5186, 1e-4, false},
      {"groundstate/evolution/level0", 1.0, 0.01, true},
      {"groundstate/evolution/level1", -0.5424, 0.005, true},
      {"groundstate/evolution/level2", -2.00, 0.05, true},
      {"groundstate/evolution/level3", -3.3, 0.2, true},
      {"firstexcitation/evolution/level0", 6.3336, 0.007, true},
      {"firstexcitation/evolution/level1", 1.0, 0.01, true},
      {"firstexcitation/evolution/level2", -0.518, 0.01, true},
      {"firstexcitation/evolution/level3", -1.7, 0.1, true},
  };
  if (!only_cell.empty()) {
    bool known = false;
    for (const Cell& c : cells) known = known || c.id == only_cell;
    if (!known)
      throw validation_error("unknown cell id: " + only_cell +
                             " (empty paper cells cannot be selected)");
  }
  auto wanted = [&](const std::string& prefix) {
    if (only_cell.empty()) return true;
    return only_cell.compare(0, prefix.size(), prefix) == 0;
  };

  std::vector<SkipNote> skips;
  Profile p0, p1;
  bool have_p0 = false, have_p1 = false;
  auto ground = [&]() -> const Profile& {
    if (!have_p0) {
      p0 = shoot_profile(0);
      have_p0 = true;
    }
    return p0;
  };
  auto first = [&]() -> const Profile& {
    if (!have_p1) {
      p1 = shoot_profile(1);
      have_p1 = true;
    }
    return p1;
  };
  auto set_value = [&](const std::string& id, double value) {
    for (Cell& c : cells)
      if (c.id == id) {
        c.value = value;
        c.error = std::abs(value - c.paper);
        c.pass = c.error <= c.tolerance;
        c.computed = true;
      }
  };

  if (wanted("groundstate/shooting")) {
    set_value("groundstate/shooting/gauge",
              shoot_single(ground(), 0.5, 1.5).lambda);
    set_value("groundstate/shooting/stable1",
              shoot_single(ground(), -0.9, -0.2).lambda);
    if (only_cell.empty()) {
      const double numer = resonance_numerator_minus2(ground());
      const ResonantMatch rm = resonant_match_minus2(ground());
      skips.push_back(
          {"groundstate/shooting/lambda=-2",
           "empty paper cell; generic shooting breaks down at the resonance, "
           "but the analytic branch confirms the eigenvalue (numerator " +
               num(numer, "%.2g") + ", match residual " +
               num(rm.solve_residual, "%.2g") + ", a=" + num(rm.a, "%.8f") + ")"});
      skips.push_back({"groundstate/shooting/lambda=-3.3",
                       "empty paper cell (no shooting value published)"});
    }
  }
  if (wanted("firstexcitation/shooting")) {
    set_value("firstexcitation/shooting/unstable",
              shoot_single(first(), 5.0, 7.0).lambda);
    set_value("firstexcitation/shooting/gauge",
              shoot_single(first(), 0.5, 1.5).lambda);
    set_value("firstexcitation/shooting/stable1",
              shoot_single(first(), -0.8, -0.3).lambda);
    if (only_cell.empty()) {
      const Eigenpair deep = shoot_single(first(), -1.85, -1.6);
      skips.push_back({"firstexcitation/shooting/lambda=-1.7",
                       "empty paper cell; shooting locates lambda=" +
                           num(deep.lambda, "%.9f") + " (defect " +
                           num(deep.defect, "%.2g") + ")"});
    }
  }
  if (wanted("groundstate/evolution")) {
    RunConfig ecfg = cfg;
    ecfg.levels = 4;
    const SpectrumResult res = extract_spectrum(ground(), spectrum_options(ecfg));
    for (int k = 0; k < 4; ++k)
      set_value("groundstate/evolution/level" + std::to_string(k),
                res.levels[k].mu);
  }
  if (wanted("firstexcitation/evolution")) {
    RunConfig ecfg = cfg;
    ecfg.levels = 4;
    const SpectrumResult res = extract_spectrum(first(), spectrum_options(ecfg));
    for (int k = 0; k < 4; ++k)
      set_value("firstexcitation/evolution/level" + std::to_string(k),
                res.levels[k].mu);
  }

  std::cout << "table reproduction (N=" << cfg.grid << ", kappa="
            << num(cfg.cfl) << ", tau_end=" << num(cfg.tau_end) << ")\n";
  std::cout << "  cell                                     paper       computed"
               "       tol      error    status\n";
  bool all_pass = true;
  for (const Cell& c : cells) {
    if (!c.computed) continue;
    if (c.gating && !c.pass) all_pass = false;
    char line[160];
    std::snprintf(line, sizeof line, "  %-40s %+9.6f  %+12.7f  %8.1e  %8.1e  %s%s",
                  c.id.c_str(), c.paper, c.value, c.tolerance, c.error,
                  c.pass ? "ok" : "FAIL", c.gating ? "" : " (bonus)");
    std::cout << line << "\n";
  }
  for (const SkipNote& s : skips)
    std::cout << "  skipped " << s.id << ": " << s.note << "\n";

  if (!cfg.out.empty()) {
    ordered_json body;
    body["format"] = kSpectrumFormat;
    ordered_json rows = ordered_json::array();
    for (const Cell& c : cells) {
      if (!c.computed) continue;
      rows.push_back({{"cell", c.id},
                      {"paper", c.paper},
                      {"computed", c.value},
                      {"tolerance", c.tolerance},
                      {"abs_error", c.error},
                      {"pass", c.pass},
                      {"gating", c.gating}});
    }
    body["cells"] = std::move(rows);
    ordered_json notes = ordered_json::array();
    for (const SkipNote& s : skips)
      notes.push_back({{"cell", s.id}, {"note", s.note}});
    body["skipped"] = std::move(notes);
    body["all_pass"] = all_pass;
    write_text_file(cfg.out,
                    make_document("reproduce-tables", std::move(body), cfg).dump(2) +
                        "\n");
    std::cout << "wrote " << cfg.out << "\n";
  }

  if (!only_cell.empty()) {
    for (const Cell& c : cells)
      if (c.id == only_cell && c.computed) return c.pass ? 0 : 4;
    return 4;
  }
  return all_pass ? 0 : 4;
}

// ---------------------------------------------------------------------------
// converge

int cmd_converge(const RunConfig& cfg) {
  Profile p = shoot_profile(cfg.n);
  if (p.rho_max() < 1.0 + 1.0 / 32.0)
    p = extend_beyond_lightcone(p, 1.0 + 1.0 / 32.0);

  const int base = cfg.grid;
  const std::vector<int> grids = {base, 2 * base, 4 * base};
  std::cout << "convergence on profile n=" << cfg.n << ", grids {" << grids[0]
            << ", " << grids[1] << ", " << grids[2] << "}, tau_end="
            << num(cfg.tau_end) << ", kappa=" << num(cfg.cfl) << "\n";

  // Smooth-data self-convergence.
  auto run = [&](int n) {
    Grid g(n);
    SchemeConfig sc(g, p, cfg.cfl);
    return evolve(seed_phi(g), sc, cfg.tau_end);
  };
  std::vector<State> sols;
  for (int n : grids) sols.push_back(run(n));
  auto grid_error = [](const State& coarse, const State& fine, int n) {
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double d1 = coarse.u1[i] - fine.u1[2 * i];
      const double d2 = coarse.u2[i] - fine.u2[2 * i];
      const double d3 = coarse.u3[i] - fine.u3[2 * i];
      const double cell = d1 * d1 + d2 * d2 + d3 * d3;
      acc += (i == 0 || i == n) ? 0.5 * cell : cell;
    }
    return std::sqrt(acc / n);
  };
  const double e1 = grid_error(sols[0], sols[1], grids[0]);
  const double e2 = grid_error(sols[1], sols[2], grids[1]);
  const double order = std::log2(e1 / e2);
  const bool order_ok = std::abs(order - 2.0) <= 0.2;
  std::cout << "  self-convergence: e(" << grids[0] << "/" << grids[1]
            << ")=" << num(e1, "%.4g") << "  e(" << grids[1] << "/" << grids[2]
            << ")=" << num(e2, "%.4g") << "  order=" << num(order, "%.3f")
            << (order_ok ? " (ok)" : " (FAIL)") << "\n";

  // Eigenmode-exponential propagation of the closed-form ground gauge mode.
  const Profile g0 =
      cfg.n == 0 ? p : extend_beyond_lightcone(shoot_profile(0), 1.0 + 1.0 / 32.0);
  bool gauge_ok = true;
  std::vector<std::pair<int, double>> gauge_slopes;
  for (int n : grids) {
    Grid g(n);
    SchemeConfig sc(g, g0, cfg.cfl);
    State s(g);
    for (int i = 0; i < g.points(); ++i) {
      const double r = g.rho(i);
      const double d = 1.0 + r * r;
      s.u1[i] = 2.0 * r / d;
      s.u2[i] = s.u1[i];
      s.u3[i] = 2.0 * (1.0 - r * r) / (d * d);
    }
    QuadratureRule q(g);
    std::vector<double> ts, ln;
    evolve(s, sc, 1.0, 8, [&](const State& st) {
      ts.push_back(st.tau);
      ln.push_back(std::log(norm(st, q)));
    });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sx += ts[i];
      sy += ln[i];
      sxx += ts[i] * ts[i];
      sxy += ts[i] * ln[i];
    }
    const double m = static_cast<double>(ts.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double tol = std::max(0.01, 5.0 / (static_cast<double>(n) * n));
    const bool ok = std::abs(slope - 1.0) <= tol;
    gauge_ok = gauge_ok && ok;
    gauge_slopes.emplace_back(n, slope);
    std::cout << "  gauge-mode slope N=" << n << ": " << num(slope, "%.6f")
              << " (target 1 +/- " << num(tol, "%.3g") << (ok ? ", ok)" : ", FAIL)")
              << "\n";
  }

  // Zero data stays exactly zero at every resolution.
  bool zero_ok = true;
  for (int n : grids) {
    Grid g(n);
    SchemeConfig sc(g, p, cfg.cfl);
    const State z = evolve(State(g), sc, 0.5);
    for (int i = 0; i < g.points(); ++i)
      zero_ok = zero_ok && z.u1[i] == 0.0 && z.u2[i] == 0.0 && z.u3[i] == 0.0;
  }
  std::cout << "  zero data: " << (zero_ok ? "exact zeros (ok)" : "FAIL") << "\n";

  if (!cfg.out.empty()) {
    ordered_json body;
    body["format"] = kEvolveFormat;
    body["grids"] = grids;
    body["errors"] = {e1, e2};
    body["order"] = order;
    ordered_json gs = ordered_json::array();
    for (const auto& [n, slope] : gauge_slopes)
      gs.push_back({{"grid", n}, {"slope", slope}});
    body["gauge_slopes"] = std::move(gs);
    body["zero_exact"] = zero_ok;
    body["pass"] = order_ok && gauge_ok && zero_ok;
    write_text_file(cfg.out,
                    make_document("converge", std::move(body), cfg).dump(2) + "\n");
    std::cout << "wrote " << cfg.out << "\n";
  }
  return (order_ok && gauge_ok && zero_ok) ? 0 : 4;
}

// ---------------------------------------------------------------------------

struct FlagBindings {
  int n = 0;
  int grid = 0;
  double cfl = 0.0;
  double tau_end = 0.0;
  int levels = 0;
  std::vector<double> lambda_range;
  std::string out;
  std::string config_path;
};

void add_common_flags(CLI::App* sub, FlagBindings* fb, bool with_evolution,
                      bool with_lambda) {
  sub->add_option("--n", fb->n, "profile index (0 = ground state)");
  sub->add_option("--out", fb->out, "write a JSON result document here");
  sub->add_option("--config", fb->config_path,
                  "JSON config file (flags given here override it)");
  if (with_evolution) {
    sub->add_option("--grid", fb->grid, "grid resolution N");
    sub->add_option("--cfl", fb->cfl, "time step in grid units (kappa)");
    sub->add_option("--tau-end", fb->tau_end, "evolution end time");
    sub->add_option("--levels", fb->levels, "filter levels (1..4)");
  }
  if (with_lambda)
    sub->add_option("--lambda-range", fb->lambda_range,
                    "eigenvalue scan range: lo hi")
        ->expected(2);
}

RunConfig resolve_config(CLI::App* sub, const FlagBindings& fb,
                         RunConfig defaults, const std::string& command) {
  auto provided = [sub](const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  defaults.command = command;
  RunConfig cfg = defaults;
  if (provided("--config")) {
    cfg = run_config_from_json(load_json_file(fb.config_path), defaults);
    cfg.command = command;
    cfg.config_path = fb.config_path;
  }
  if (provided("--n")) cfg.n = fb.n;
  if (provided("--grid")) cfg.grid = fb.grid;
  if (provided("--cfl")) cfg.cfl = fb.cfl;
  if (provided("--tau-end")) cfg.tau_end = fb.tau_end;
  if (provided("--levels")) cfg.levels = fb.levels;
  if (provided("--lambda-range")) {
    cfg.lambda_lo = fb.lambda_range[0];
    cfg.lambda_hi = fb.lambda_range[1];
  }
  if (provided("--out")) cfg.out = fb.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "wavemap: self-similar wave-map profiles and their perturbation spectra"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wavemap::kVersion));

  FlagBindings fb;
  bool check_closed_form = false;
  std::string only_cell;

  CLI::App* profile = app.add_subcommand(
      "profile", "compute a blow-up profile by two-sided shooting");
  add_common_flags(profile, &fb, false, false);
  profile->add_flag("--check-closed-form", check_closed_form,
                    "n=0 only: compare the table against the closed form");

  CLI::App* modes = app.add_subcommand(
      "modes", "perturbation eigenvalues by shooting over a lambda range");
  add_common_flags(modes, &fb, false, true);

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "perturbation growth rates from filtered evolution");
  add_common_flags(spectrum, &fb, true, false);

  CLI::App* reproduce = app.add_subcommand(
      "reproduce-tables", "regress both methods against the published tables");
  add_common_flags(reproduce, &fb, true, false);
  reproduce->add_option("--cell", only_cell,
                        "check a single cell (e.g. groundstate/shooting/gauge)");

  CLI::App* converge = app.add_subcommand(
      "converge", "self-convergence and eigenmode-propagation order checks");
  add_common_flags(converge, &fb, true, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (profile->parsed())
      return cmd_profile(resolve_config(profile, fb, RunConfig{}, "profile"),
                         check_closed_form);
    if (modes->parsed())
      return cmd_modes(resolve_config(modes, fb, RunConfig{}, "modes"));
    if (spectrum->parsed())
      return cmd_spectrum(resolve_config(spectrum, fb, RunConfig{}, "spectrum"));
    if (reproduce->parsed())
      return cmd_reproduce(
          resolve_config(reproduce, fb, RunConfig{}, "reproduce-tables"),
          only_cell);
    RunConfig converge_defaults;
    converge_defaults.grid = 256;
    converge_defaults.tau_end = 1.0;
    return cmd_converge(resolve_config(converge, fb, converge_defaults, "converge"));
  } catch (const wavemap::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const wavemap::numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
