// Acceptance gate: the ten go/no-go criteria for this project, one line of
// output each.  Exit 0 only if every criterion passes.  Tolerances are
// pinned here, in code, so the gate cannot drift without a visible diff.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "wavemap/errors.hpp"
#include "wavemap/evolve.hpp"
#include "wavemap/mode_ode.hpp"
#include "wavemap/profile.hpp"
#include "wavemap/spectra.hpp"

using namespace wavemap;

namespace {

int g_failures = 0;

// Runs one criterion, prints "[PASS|FAIL] criterion N: ..." with the
// measured quantity and elapsed time, and enforces the runtime budget
// (time_limit <= 0 means untimed).
void criterion(int number, const std::string& label, double time_limit_s,
               const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    std::tie(ok, detail) = body();
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (time_limit_s > 0.0 && elapsed > time_limit_s) {
    ok = false;
    detail += " [EXCEEDED " + std::to_string(time_limit_s) + "s budget]";
  }
  if (!ok) ++g_failures;
  std::printf("[%s] criterion %d: %s (%s) [%.2fs]\n", ok ? "PASS" : "FAIL",
              number, label.c_str(), detail.c_str(), elapsed);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0,
                double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Eigenpair shoot_in(const Profile& p, double lo, double hi) {
  const int steps = std::max(24, static_cast<int>(std::ceil((hi - lo) * 40.0)));
  const auto cands = scan_eigenvalues(lo, hi, steps, p);
  if (cands.size() != 1)
    throw numeric_error("expected one eigenvalue in bracket, found " +
                        std::to_string(cands.size()));
  return find_eigenvalue(cands[0].lambda_opt, cands[0].a_opt, p);
}

State gauge_state(const Grid& g) {
  State s(g);
  for (int i = 0; i < g.points(); ++i) {
    const double r = g.rho(i);
    const double d = 1.0 + r * r;
    s.u1[i] = 2.0 * r / d;
    s.u2[i] = s.u1[i];
    s.u3[i] = 2.0 * (1.0 - r * r) / (d * d);
  }
  return s;
}

}  // namespace

int main() {
  std::printf("wavemap acceptance gate (N=2048, kappa=0.25, tau_end=12 "
              "defaults where applicable)\n");

  Profile p0, p1;
  double shoot_gauge0 = 0, shoot_stable0 = 0, shoot_gauge1 = 0,
         shoot_stable1 = 0;
  SpectrumResult spec0, spec1;
  bool have_spec0 = false, have_spec1 = false;

  // 1. Ground-state closed form.
  criterion(1, "ground-state profile matches the closed form", 1.0, [&] {
    p0 = shoot_profile(0);
    double dev = 0.0;
    for (std::size_t k = 0; k < p0.rho.size(); ++k) {
      const auto [f, fp] = ground_state(p0.rho[k]);
      dev = std::max(dev, std::abs(p0.f[k] - f));
      dev = std::max(dev, std::abs(p0.fp[k] - fp));
    }
    return std::make_pair(dev <= 1e-8, fmt("max dev %.2e <= 1e-8", dev));
  });

  // 2. Shooting spectrum of the ground state.
  criterion(2, "ground-state shooting eigenvalues", 5.0, [&] {
    shoot_gauge0 = shoot_in(p0, 0.5, 1.5).lambda;
    shoot_stable0 = shoot_in(p0, -0.9, -0.2).lambda;
    const bool ok = std::abs(shoot_gauge0 - 1.0) <= 1e-6 &&
                    std::abs(shoot_stable0 - (-0.54246)) <= 5e-5;
    return std::make_pair(
        ok, fmt("gauge %.9f (1 +/- 1e-6), stable %.7f (-0.54246 +/- 5e-5)",
                shoot_gauge0, shoot_stable0));
  });

  // 3. Shooting spectrum of the first excitation.
  criterion(3, "first-excitation unstable eigenvalue by shooting", 30.0, [&] {
    p1 = shoot_profile(1);
    const Eigenpair unstable = shoot_in(p1, 5.0, 7.0);
    shoot_gauge1 = shoot_in(p1, 0.5, 1.5).lambda;
    shoot_stable1 = shoot_in(p1, -0.8, -0.3).lambda;
    const bool ok = std::abs(unstable.lambda - 6.333625) <= 1e-4;
    return std::make_pair(
        ok, fmt("lambda %.7f (6.333625 +/- 1e-4)", unstable.lambda));
  });

  // 4. The analytic eigenvalue at lambda = -2.  The generic one-parameter
  // shooter breaks down there (the light-cone expansion degenerates); the
  // documented route is the residual test by direct two-sided integration:
  // the breakdown numerator must vanish and the resonant-branch match must
  // close to round-off.
  criterion(4, "lambda = -2 analytic eigenvalue of the ground state", 0.0, [&] {
    const double numer = resonance_numerator_minus2(p0);
    const ResonantMatch rm = resonant_match_minus2(p0);
    const bool ok = std::abs(numer) <= 1e-8 && rm.solve_residual <= 1e-8;
    return std::make_pair(
        ok, fmt("breakdown numerator %.2e <= 1e-8, match residual %.2e <= "
                "1e-8 (shooter breakdown documented)",
                std::abs(numer), rm.solve_residual));
  });

  // 5. Evolution spectrum of the ground state, four filtered levels.
  criterion(5, "ground-state evolution spectrum (4 levels)", 120.0, [&] {
    SpectrumOptions so;
    spec0 = extract_spectrum(p0, so);
    have_spec0 = true;
    const double expect[4] = {1.0, -0.5424, -2.00, -3.3};
    const double tol[4] = {0.01, 0.005, 0.05, 0.2};
    bool ok = true;
    for (int k = 0; k < 4; ++k)
      ok = ok && std::abs(spec0.levels[k].mu - expect[k]) <= tol[k];
    return std::make_pair(
        ok, fmt("slopes %+.4f, %+.4f, %+.4f, %+.4f", spec0.levels[0].mu,
                spec0.levels[1].mu, spec0.levels[2].mu, spec0.levels[3].mu));
  });

  // 6. Evolution spectrum of the first excitation, four filtered levels.
  criterion(6, "first-excitation evolution spectrum (4 levels)", 120.0, [&] {
    SpectrumOptions so;
    spec1 = extract_spectrum(p1, so);
    have_spec1 = true;
    const double expect[4] = {6.3336, 1.0, -0.518, -1.7};
    const double tol[4] = {0.007, 0.01, 0.01, 0.1};
    bool ok = true;
    for (int k = 0; k < 4; ++k)
      ok = ok && std::abs(spec1.levels[k].mu - expect[k]) <= tol[k];
    return std::make_pair(
        ok, fmt("slopes %+.4f, %+.4f, %+.4f, %+.4f", spec1.levels[0].mu,
                spec1.levels[1].mu, spec1.levels[2].mu, spec1.levels[3].mu));
  });

  // 7. Realness: no oscillation flag on any of the eight measured levels
  // (complex eigenvalues would beat against the filter and show up here).
  criterion(7, "no oscillations in any measured level", 0.0, [&] {
    if (!have_spec0 || !have_spec1)
      return std::make_pair(false,
                            std::string("spectra unavailable (5/6 failed)"));
    int flagged = 0;
    for (const LevelEstimate& le : spec0.levels) flagged += le.oscillation;
    for (const LevelEstimate& le : spec1.levels) flagged += le.oscillation;
    return std::make_pair(flagged == 0,
                          fmt("%g of 8 levels flagged", double(flagged)));
  });

  // 8. Self-convergence order of the evolution scheme on smooth data.
  criterion(8, "second-order self-convergence", 60.0, [&] {
    const Profile px = extend_beyond_lightcone(p0, 1.0 + 1.0 / 32.0);
    auto run = [&](int n) {
      Grid g(n);
      SchemeConfig sc(g, px, 0.25);
      return evolve(seed_phi(g), sc, 1.0);
    };
    const State a = run(256), b = run(512), c = run(1024);
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
    const double order =
        std::log2(grid_error(a, b, 256) / grid_error(b, c, 512));
    return std::make_pair(std::abs(order - 2.0) <= 0.2,
                          fmt("order %.3f (2.0 +/- 0.2)", order));
  });

  // 9. Cross-method consistency: the two independent routes agree within
  // their combined tolerances on both profiles.
  criterion(9, "shooting and evolution agree", 0.0, [&] {
    if (!have_spec0 || !have_spec1)
      return std::make_pair(false,
                            std::string("spectra unavailable (5/6 failed)"));
    const double dg0 = std::abs(shoot_gauge0 - spec0.levels[0].mu);
    const double ds0 = std::abs(shoot_stable0 - spec0.levels[1].mu);
    const double dg1 = std::abs(shoot_gauge1 - spec1.levels[1].mu);
    const double ds1 = std::abs(shoot_stable1 - spec1.levels[2].mu);
    const bool ok = dg0 <= 1e-6 + 0.01 && ds0 <= 5e-5 + 0.005 &&
                    dg1 <= 1e-6 + 0.01 && ds1 <= 1e-4 + 0.01;
    return std::make_pair(ok,
                          fmt("gauge |d|=%.1e/%.1e, stable |d|=%.1e/%.1e "
                              "(ground/excited)",
                              dg0, dg1, ds0, ds1));
  });

  // 10. Paper-free property suite: structural identities any correct
  // implementation must satisfy, independent of any published number.
  criterion(10, "property suite (paper-free identities)", 0.0, [&] {
    const Profile px = extend_beyond_lightcone(p0, 1.0 + 1.0 / 32.0);
    Grid g(128);
    SchemeConfig sc(g, px, 0.25);
    const QuadratureRule q(g);
    std::string notes;

    // Projector reconstruction: lm*Pm + lp*Pp equals the principal part.
    bool proj_ok = true;
    for (double r : {0.0, 0.3, 0.7, 1.0, 1.03125}) {
      const auto [lm, lp] = characteristic_speeds(r);
      const auto [pm, pp] = characteristic_projectors(r);
      const double want[2][2] = {{-2.0 * r, 1.0 - r * r}, {1.0, 0.0}};
      for (int i = 1; i < 3; ++i)
        for (int j = 1; j < 3; ++j)
          proj_ok = proj_ok && std::abs(lm * pm[i][j] + lp * pp[i][j] -
                                        want[i - 1][j - 1]) < 1e-13;
    }
    if (!proj_ok) notes += " projector-reconstruction";

    // Linearity of one scheme step.
    const State u = seed_phi(g), v = seed_psi(g);
    State combo(g);
    for (int i = 0; i < g.points(); ++i) {
      combo.u1[i] = 1.7 * u.u1[i] - 0.3 * v.u1[i];
      combo.u2[i] = 1.7 * u.u2[i] - 0.3 * v.u2[i];
      combo.u3[i] = 1.7 * u.u3[i] - 0.3 * v.u3[i];
    }
    const State su = step(u, sc), sv = step(v, sc), scb = step(combo, sc);
    double lin_dev = 0.0;
    for (int i = 0; i < g.points(); ++i) {
      lin_dev = std::max(lin_dev, std::abs(scb.u1[i] - (1.7 * su.u1[i] - 0.3 * sv.u1[i])));
      lin_dev = std::max(lin_dev, std::abs(scb.u2[i] - (1.7 * su.u2[i] - 0.3 * sv.u2[i])));
      lin_dev = std::max(lin_dev, std::abs(scb.u3[i] - (1.7 * su.u3[i] - 0.3 * sv.u3[i])));
    }
    if (lin_dev >= 1e-9) notes += " linearity";

    // Inner-product definiteness.
    bool ip_ok = norm(u, q) > 0.0 && norm(State(g), q) == 0.0;
    State ext(g);
    ext.u1[g.points() - 1] = 1.0;  // exterior node carries zero weight
    ip_ok = ip_ok && norm(ext, q) == 0.0;
    if (!ip_ok) notes += " inner-product";

    // Projection-chain identity: filtering commutes with the filtered
    // evolution step (project after stepping == step the projected state
    // and project again, against the same evolving basis).
    const State y0 = step(u, sc);
    const State lhs = project_out(step(v, sc), {y0}, q);
    const State rhs = project_out(step(project_out(v, {u}, q), sc), {y0}, q);
    double chain_dev = 0.0;
    for (int i = 0; i < g.points(); ++i) {
      chain_dev = std::max(chain_dev, std::abs(lhs.u1[i] - rhs.u1[i]));
      chain_dev = std::max(chain_dev, std::abs(lhs.u2[i] - rhs.u2[i]));
      chain_dev = std::max(chain_dev, std::abs(lhs.u3[i] - rhs.u3[i]));
    }
    if (chain_dev >= 1e-12 * norm(v, q)) notes += " projection-chain";

    // Gauge mode grows like e^tau.
    Grid gg(64);
    SchemeConfig sgg(gg, px, 0.25);
    const QuadratureRule qg(gg);
    std::vector<double> ts, ln;
    evolve(gauge_state(gg), sgg, 1.0, 4, [&](const State& st) {
      ts.push_back(st.tau);
      ln.push_back(std::log(norm(st, qg)));
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
    if (std::abs(slope - 1.0) > 0.01) notes += " gauge-exponential";

    return std::make_pair(notes.empty(),
                          notes.empty()
                              ? fmt("all identities hold; lin dev %.1e, "
                                    "chain dev %.1e, gauge slope %.4f",
                                    lin_dev, chain_dev, slope)
                              : "failed:" + notes);
  });

  std::printf("%s: %d of 10 criteria failed\n",
              g_failures == 0 ? "ACCEPTED" : "REJECTED", g_failures);
  return g_failures == 0 ? 0 : 1;
}
