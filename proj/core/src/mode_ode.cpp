#include "wavemap/mode_ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ode_integrate.hpp"
#include "wavemap/errors.hpp"

namespace wavemap {
namespace {

using State2 = std::array<double, 2>;

// (v, v') at the matching radius from each side; the center branch is
// integrated with a = 1 and scaled afterwards (the branch is linear in a).
struct Sides {
  State2 center;     // a = 1
  State2 lightcone;  // v(1) = 1
};

void check_options(const ModeOptions& o) {
  if (!(o.series_edge > 0.0 && o.series_edge < 0.1))
    throw validation_error("mode: series_edge must lie in (0, 0.1)");
  if (!(o.match_point > o.series_edge && o.match_point < 1.0 - o.series_edge))
    throw validation_error("mode: match_point must lie between the series edges");
  if (o.lightcone_order != 2 && o.lightcone_order != 3)
    throw validation_error("mode: lightcone_order must be 2 or 3");
  if (!(o.guard_band > 0.0 && o.guard_band < 0.5))
    throw validation_error("mode: guard_band must lie in (0, 0.5)");
}

void check_guard(double lambda, double guard) {
  if (std::abs(lambda) <= guard || std::abs(lambda + 1.0) <= guard) {
    std::ostringstream msg;
    msg << "mode: lambda = " << lambda
        << " sits within the guard band of a light-cone series pole (0 or -1)";
    throw validation_error(msg.str());
  }
}

Sides integrate_sides(double lambda, const Profile& prof, const ModeOptions& o) {
  auto system = [&, lambda](const State2& y, State2& dy, double r) {
    dy[0] = y[1];
    dy[1] = mode_rhs(r, y[0], y[1], lambda, prof);
  };
  Sides s;
  auto [vc, vpc] = mode_center_series(1.0, lambda, prof.b, o.series_edge);
  s.center = detail::integrate_to<2>(system, {vc, vpc}, o.series_edge, o.match_point);
  auto [vl, vpl] = mode_lightcone_series(lambda, prof.c, 1.0 - o.series_edge,
                                         o.lightcone_order, o.guard_band);
  s.lightcone = detail::integrate_to<2>(system, {vl, vpl}, 1.0 - o.series_edge,
                                        o.match_point);
  return s;
}

double inf_norm(const std::array<double, 2>& v) {
  return std::max(std::abs(v[0]), std::abs(v[1]));
}

// Least-squares center scale aligning the two branches, and the relative
// residual it leaves.
std::pair<double, double> align(const Sides& s) {
  const double num = s.center[0] * s.lightcone[0] + s.center[1] * s.lightcone[1];
  const double den = s.center[0] * s.center[0] + s.center[1] * s.center[1];
  const double a = num / den;
  const double r = std::hypot(a * s.center[0] - s.lightcone[0],
                              a * s.center[1] - s.lightcone[1]);
  const double scale = std::max(std::hypot(s.lightcone[0], s.lightcone[1]), 1e-300);
  return {a, r / scale};
}

struct NewtonOutcome {
  Eigenpair ep;
  double last_step = 0.0;
};

NewtonOutcome newton_mode(double lambda, double a, const Profile& prof,
                          const ModeOptions& o) {
  auto defect_at = [&](double lam, double aa) {
    Sides s = integrate_sides(lam, prof, o);
    return std::array<double, 2>{aa * s.center[0] - s.lightcone[0],
                                 aa * s.center[1] - s.lightcone[1]};
  };
  std::array<double, 2> d = defect_at(lambda, a);
  double dn = inf_norm(d);
  double last_step = 0.0;
  int stalls = 0;
  for (int it = 0; it < o.max_newton_iter; ++it) {
    if (!std::isfinite(dn))
      throw numeric_error("mode shooting: non-finite defect encountered");
    if (dn <= o.defect_tol) {
      Eigenpair ep;
      ep.lambda = lambda;
      ep.a = a;
      ep.defect = dn;
      ep.newton_iterations = it;
      return {ep, last_step};
    }
    // d(lambda, a) = a * Yc(lambda) - Yl(lambda): the a-column is exact.
    Sides s = integrate_sides(lambda, prof, o);
    const double hl = 1e-6 * std::max(1.0, std::abs(lambda));
    const auto dp = defect_at(lambda + hl, a);
    const auto dm = defect_at(lambda - hl, a);
    const double j00 = (dp[0] - dm[0]) / (2 * hl), j10 = (dp[1] - dm[1]) / (2 * hl);
    const double j01 = s.center[0], j11 = s.center[1];
    const double det = j00 * j11 - j01 * j10;
    if (std::abs(det) < 1e-300) throw numeric_error("mode shooting: singular Jacobian");
    const double dl = -(j11 * d[0] - j01 * d[1]) / det;
    const double da = -(-j10 * d[0] + j00 * d[1]) / det;

    double step = 1.0;
    std::array<double, 2> dt{};
    double dtn = 0.0;
    for (; step >= 1e-3; step *= 0.5) {
      const double lt = lambda + step * dl;
      if (std::abs(lt) <= o.guard_band || std::abs(lt + 1.0) <= o.guard_band) continue;
      dt = defect_at(lt, a + step * da);
      dtn = inf_norm(dt);
      if (dtn < dn) break;
    }
    if (step < 1e-3) {
      // Take the smallest damped step anyway; oscillating residuals near a
      // root still contract over a few such moves.
      step = 1e-3;
      const double lt = lambda + step * dl;
      if (std::abs(lt) <= o.guard_band || std::abs(lt + 1.0) <= o.guard_band)
        throw numeric_error("mode shooting: iteration entered the guard band");
      dt = defect_at(lt, a + step * da);
      dtn = inf_norm(dt);
      if (++stalls > 10) {
        std::ostringstream msg;
        msg << "mode shooting stalled at defect " << dn << " (lambda=" << lambda
            << ", a=" << a << ")";
        throw numeric_error(msg.str());
      }
    } else {
      stalls = 0;
    }
    lambda += step * dl;
    a += step * da;
    d = dt;
    dn = dtn;
    last_step = std::abs(step * dl);
  }
  std::ostringstream msg;
  msg << "mode shooting did not converge: defect " << dn << " after "
      << o.max_newton_iter << " iterations (lambda=" << lambda << ", a=" << a << ")";
  throw numeric_error(msg.str());
}

}  // namespace

double mode_rhs(double rho, double v, double vp, double lambda, const Profile& prof) {
  if (rho <= 0.0 || rho == 1.0)
    throw std::domain_error("mode_rhs: singular at rho = 0 and rho = 1");
  const double den = rho * (rho + 1.0) * (rho - 1.0);
  const double cos2f = std::cos(2.0 * prof.evaluate(rho).first);
  return -2.0 * ((lambda + 1.0) * rho * rho - 1.0) / den * vp -
         (lambda * (lambda + 1.0) * rho * rho + 2.0 * cos2f) / (rho * den) * v;
}

std::pair<double, double> mode_center_series(double a, double lambda, double b,
                                             double rho) {
  const double b2 = b * b, l = lambda;
  const double v3 = -a * (4.0 * b2 - l * l - 3.0 * l - 2.0) / 10.0;
  const double v5 = a *
                    (40.0 * b2 * b2 - 8.0 * b2 * l * l - 40.0 * b2 * l - 72.0 * b2 +
                     l * l * l * l + 10.0 * l * l * l + 35.0 * l * l + 50.0 * l + 24.0) /
                    280.0;
  const double r2 = rho * rho;
  return {rho * (a + r2 * (v3 + r2 * v5)), a + r2 * (3.0 * v3 + r2 * 5.0 * v5)};
}

std::pair<double, double> mode_lightcone_series(double lambda, double c, double rho,
                                                int order, double guard_band) {
  if (order != 2 && order != 3)
    throw validation_error("mode_lightcone_series: order must be 2 or 3");
  check_guard(lambda, guard_band);
  const double l = lambda, x = rho - 1.0;
  const double v1 = -(l * l + l - 2.0) / (2.0 * l);
  const double v2 =
      (l * l * l * l + 4.0 * l * l * l + 3.0 * l * l - 12.0 * l - 4.0) /
      (8.0 * l * (l + 1.0));
  double v = 1.0 + x * (v1 + x * v2);
  double vp = v1 + 2.0 * v2 * x;
  if (order >= 3 && std::abs(l + 2.0) > 0.1) {
    const double c2 = c * c;
    const double l2 = l * l, l3 = l2 * l;
    const double v3 = -(32.0 * c2 * l2 + 32.0 * c2 * l + l3 * l3 + 9.0 * l3 * l2 +
                        31.0 * l2 * l2 + 27.0 * l3 - 104.0 * l2 - 156.0 * l - 16.0) /
                      (48.0 * l * (l + 1.0) * (l + 2.0));
    v += v3 * x * x * x;
    vp += 3.0 * v3 * x * x;
  }
  return {v, vp};
}

std::array<double, 2> mode_defect(double lambda, double a, const Profile& prof,
                                  const ModeOptions& opt) {
  check_options(opt);
  check_guard(lambda, opt.guard_band);
  Sides s = integrate_sides(lambda, prof, opt);
  return {a * s.center[0] - s.lightcone[0], a * s.center[1] - s.lightcone[1]};
}

Eigenpair find_eigenvalue(double lambda0, double a0, const Profile& prof,
                          const ModeOptions& opt) {
  check_options(opt);
  check_guard(lambda0, opt.guard_band);
  NewtonOutcome base = newton_mode(lambda0, a0, prof, opt);

  // Re-converge with the series step-off halved; the shift estimates the
  // residual series truncation systematic.
  ModeOptions refined = opt;
  refined.series_edge = opt.series_edge / 2.0;
  refined.max_newton_iter = 20;
  try {
    NewtonOutcome fine = newton_mode(base.ep.lambda, base.ep.a, prof, refined);
    fine.ep.uncertainty =
        std::max({std::abs(fine.ep.lambda - base.ep.lambda), fine.last_step, 1e-13});
    fine.ep.newton_iterations += base.ep.newton_iterations;
    return fine.ep;
  } catch (const numeric_error&) {
    // Refinement is a diagnostic; keep the converged base solution but
    // reflect the failed refinement in the error bar.
    base.ep.uncertainty = std::max(10.0 * base.last_step, 1e-11);
    return base.ep;
  }
}

std::vector<ScanCandidate> scan_eigenvalues(double lo, double hi, int steps,
                                            const Profile& prof,
                                            const ModeOptions& opt) {
  check_options(opt);
  if (!(hi > lo)) throw validation_error("mode scan: need hi > lo");
  if (steps < 2) throw validation_error("mode scan: need at least 2 steps");

  // The scan always runs at order 2: its series coefficients have poles
  // only at 0 and -1, which are handled by the guard band below.
  ModeOptions o = opt;
  o.lightcone_order = 2;
  const double g = o.guard_band;

  auto wronskian = [&](double lam, Sides* out) {
    Sides s = integrate_sides(lam, prof, o);
    if (out) *out = s;
    return s.center[0] * s.lightcone[1] - s.center[1] * s.lightcone[0];
  };
  auto in_guard = [&](double lam) {
    return std::abs(lam) <= g || std::abs(lam + 1.0) <= g;
  };

  // Panel edges, with extra edges inserted at the guard-band boundaries of
  // each pole so no evaluation lands inside a band.
  std::vector<double> edges;
  for (int i = 0; i <= steps; ++i) edges.push_back(lo + (hi - lo) * i / steps);
  for (double pole : {0.0, -1.0}) {
    for (double e : {pole - g, pole + g})
      if (e > lo && e < hi) edges.push_back(e);
  }
  std::sort(edges.begin(), edges.end());

  std::vector<ScanCandidate> found;
  double prev_lam = 0.0, prev_w = 0.0;
  bool have_prev = false;
  for (double lam : edges) {
    if (in_guard(lam)) {
      have_prev = false;  // never bridge a sign change across a pole
      continue;
    }
    const double w = wronskian(lam, nullptr);
    if (have_prev && prev_w != 0.0 && (prev_w < 0) != (w < 0)) {
      ScanCandidate cand;
      cand.lambda_lo = prev_lam;
      cand.lambda_hi = lam;
      cand.near_pole = (std::abs(std::abs(prev_lam) - g) < 1e-12) ||
                       (std::abs(std::abs(prev_lam + 1.0) - g) < 1e-12) ||
                       (std::abs(std::abs(lam) - g) < 1e-12) ||
                       (std::abs(std::abs(lam + 1.0) - g) < 1e-12);
      double a = prev_lam, b = lam, wa = prev_w;
      for (int k = 0; k < 40 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++k) {
        const double mid = 0.5 * (a + b);
        const double wm = wronskian(mid, nullptr);
        if ((wa < 0) == (wm < 0)) {
          a = mid;
          wa = wm;
        } else {
          b = mid;
        }
      }
      cand.lambda_opt = 0.5 * (a + b);
      Sides s;
      wronskian(cand.lambda_opt, &s);
      auto [aopt, res] = align(s);
      cand.a_opt = aopt;
      cand.min_residual = res;
      found.push_back(cand);
    }
    prev_lam = lam;
    prev_w = w;
    have_prev = true;
  }
  return found;
}

std::vector<std::array<double, 3>> eigenfunction_table(const Eigenpair& ep,
                                                       const Profile& prof,
                                                       int nsamp,
                                                       const ModeOptions& opt) {
  check_options(opt);
  if (nsamp < 3) throw validation_error("eigenfunction_table: nsamp must be >= 3");
  check_guard(ep.lambda, opt.guard_band);
  const double lambda = ep.lambda;
  auto system = [&, lambda](const State2& y, State2& dy, double r) {
    dy[0] = y[1];
    dy[1] = mode_rhs(r, y[0], y[1], lambda, prof);
  };

  std::vector<std::array<double, 3>> table(nsamp);
  const double eps = opt.series_edge, rm = opt.match_point;
  std::vector<double> up, down;
  std::vector<int> up_idx, down_idx;
  for (int i = 0; i < nsamp; ++i) {
    const double r = double(i) / (nsamp - 1);
    table[i][0] = r;
    if (r <= eps) {
      auto [v, vp] = mode_center_series(ep.a, lambda, prof.b, r);
      table[i] = {r, v, vp};
    } else if (r <= rm) {
      up.push_back(r);
      up_idx.push_back(i);
    } else if (r < 1.0 - eps) {
      down.push_back(r);
      down_idx.push_back(i);
    } else {
      auto [v, vp] = mode_lightcone_series(lambda, prof.c, r, opt.lightcone_order,
                                           opt.guard_band);
      table[i] = {r, v, vp};
    }
  }
  if (!up.empty()) {
    auto [v0, vp0] = mode_center_series(ep.a, lambda, prof.b, eps);
    std::size_t pos = 0;
    detail::integrate_sampled<2>(system, {v0, vp0}, eps, up,
                                 [&](const State2& y, double) {
                                   table[up_idx[pos]][1] = y[0];
                                   table[up_idx[pos]][2] = y[1];
                                   ++pos;
                                 });
  }
  if (!down.empty()) {
    std::reverse(down.begin(), down.end());
    std::reverse(down_idx.begin(), down_idx.end());
    auto [v0, vp0] = mode_lightcone_series(lambda, prof.c, 1.0 - eps,
                                           opt.lightcone_order, opt.guard_band);
    std::size_t pos = 0;
    detail::integrate_sampled<2>(system, {v0, vp0}, 1.0 - eps, down,
                                 [&](const State2& y, double) {
                                   table[down_idx[pos]][1] = y[0];
                                   table[down_idx[pos]][2] = y[1];
                                   ++pos;
                                 });
  }
  return table;
}

std::vector<std::array<double, 3>> center_branch_samples(
    double lambda, double a, const Profile& prof, const std::vector<double>& rhos,
    const ModeOptions& opt) {
  check_options(opt);
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (!(rhos[i] > 0.0 && rhos[i] < 1.0))
      throw validation_error("center_branch_samples: radii must lie in (0, 1)");
    if (i > 0 && !(rhos[i] > rhos[i - 1]))
      throw validation_error("center_branch_samples: radii must be ascending");
  }
  auto system = [&, lambda](const State2& y, State2& dy, double r) {
    dy[0] = y[1];
    dy[1] = mode_rhs(r, y[0], y[1], lambda, prof);
  };
  std::vector<std::array<double, 3>> out(rhos.size());
  std::vector<double> nodes;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    out[i][0] = rhos[i];
    if (rhos[i] <= opt.series_edge) {
      auto [v, vp] = mode_center_series(a, lambda, prof.b, rhos[i]);
      out[i] = {rhos[i], v, vp};
    } else {
      nodes.push_back(rhos[i]);
      idx.push_back(i);
    }
  }
  if (!nodes.empty()) {
    auto [v0, vp0] = mode_center_series(a, lambda, prof.b, opt.series_edge);
    std::size_t pos = 0;
    detail::integrate_sampled<2>(system, {v0, vp0}, opt.series_edge, nodes,
                                 [&](const State2& y, double) {
                                   out[idx[pos]][1] = y[0];
                                   out[idx[pos]][2] = y[1];
                                   ++pos;
                                 });
  }
  return out;
}

double resonance_numerator_minus2(const Profile& prof) {
  // General third-coefficient numerator evaluated at lambda = -2 and scaled
  // by 1/16: 4 (c^2 - 1).  The light-cone slope enters only through c^2, so
  // the negated branch gives the same value.
  const double c = prof.c;
  return 4.0 * (c * c - 1.0);
}

ResonantMatch resonant_match_minus2(const Profile& prof, const ModeOptions& opt) {
  check_options(opt);
  const double lambda = -2.0;
  auto system = [&](const State2& y, State2& dy, double r) {
    dy[0] = y[1];
    dy[1] = mode_rhs(r, y[0], y[1], lambda, prof);
  };
  const double eps = opt.series_edge, rm = opt.match_point;

  // Center branch with a = 1.
  auto [vc, vpc] = mode_center_series(1.0, lambda, prof.b, eps);
  State2 yc = detail::integrate_to<2>(system, {vc, vpc}, eps, rm);
  // Analytic light-cone branch A: the order-2 series (the third coefficient
  // is the resonant one; its regular part is absorbed into branch B).
  auto [va, vpa] = mode_lightcone_series(lambda, prof.c, 1.0 - eps, 2, opt.guard_band);
  State2 ya = detail::integrate_to<2>(system, {va, vpa}, 1.0 - eps, rm);
  // Analytic branch B: leading term (rho-1)^3, switched on at the step-off
  // edge where its truncation error is O(edge^4).
  const double x = -eps;
  State2 yb = detail::integrate_to<2>(system, {x * x * x, 3.0 * x * x}, 1.0 - eps, rm);

  // Solve a*Yc = Ya + beta*Yb for (a, beta).
  const double m00 = yc[0], m01 = -yb[0];
  const double m10 = yc[1], m11 = -yb[1];
  const double det = m00 * m11 - m01 * m10;
  if (std::abs(det) < 1e-300)
    throw numeric_error("resonant match: degenerate branch pair at the matching radius");
  ResonantMatch out;
  out.a = (m11 * ya[0] - m01 * ya[1]) / det;
  out.beta = (-m10 * ya[0] + m00 * ya[1]) / det;
  out.solve_residual =
      std::max(std::abs(out.a * yc[0] - ya[0] - out.beta * yb[0]),
               std::abs(out.a * yc[1] - ya[1] - out.beta * yb[1])) /
      std::max(1.0, std::max(std::abs(ya[0]), std::abs(ya[1])));

  // Independent normalization: carry the center branch (which on a resonant
  // profile is automatically light-cone-regular) almost to the cone and
  // normalize v(1) = 1 there.
  const double delta = 1e-5;
  State2 yn = detail::integrate_to<2>(system, {vc, vpc}, eps, 1.0 - delta);
  out.a_direct = 1.0 / yn[0];
  return out;
}

}  // namespace wavemap
