#include "wavemap/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wavemap/errors.hpp"

namespace wavemap {

namespace {

void check_same_grid(const State& x, const State& y, const QuadratureRule& q,
                     const char* who) {
  if (x.points() != y.points() ||
      static_cast<std::size_t>(x.points()) != q.weights.size()) {
    std::ostringstream msg;
    msg << who << ": states and quadrature rule must share one grid";
    throw validation_error(msg.str());
  }
}

void axpy(State& y, double a, const State& x) {
  const int m = y.points();
  for (int i = 0; i < m; ++i) {
    y.u1[i] += a * x.u1[i];
    y.u2[i] += a * x.u2[i];
    y.u3[i] += a * x.u3[i];
  }
}

void scale_state(State& y, double a) {
  const int m = y.points();
  for (int i = 0; i < m; ++i) {
    y.u1[i] *= a;
    y.u2[i] *= a;
    y.u3[i] *= a;
  }
}

// Orthonormalizes the basis by modified Gram-Schmidt; throws when a member
// is (numerically) zero or dependent on its predecessors.
std::vector<State> orthonormalize(const std::vector<State>& basis,
                                  const QuadratureRule& q, const char* who) {
  std::vector<State> ortho;
  ortho.reserve(basis.size());
  for (const State& b : basis) {
    const double n0 = norm(b, q);
    if (!(n0 > 1e-14)) {
      std::ostringstream msg;
      msg << who << ": degenerate filter (basis member with near-zero norm)";
      throw validation_error(msg.str());
    }
    State e = b;
    for (int pass = 0; pass < 2; ++pass)
      for (const State& prev : ortho) axpy(e, -inner_product(e, prev, q), prev);
    const double r = norm(e, q);
    if (r < 1e-7 * n0) {
      std::ostringstream msg;
      msg << who << ": degenerate filter (linearly dependent basis)";
      throw validation_error(msg.str());
    }
    scale_state(e, 1.0 / r);
    ortho.push_back(std::move(e));
  }
  return ortho;
}

// Least-squares sinusoid d ~ a cos(w tau) + b sin(w tau): amplitude and the
// residual scatter that remains after subtracting the best fit.
struct SinusoidFit {
  double amplitude = 0.0;
  double post_rms = 0.0;
};

SinusoidFit fit_sinusoid(const std::vector<double>& ts,
                         const std::vector<double>& d, double omega) {
  double scc = 0, sss = 0, scs = 0, rc = 0, rs = 0, dd = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double c = std::cos(omega * ts[i]);
    const double s = std::sin(omega * ts[i]);
    scc += c * c;
    sss += s * s;
    scs += c * s;
    rc += d[i] * c;
    rs += d[i] * s;
    dd += d[i] * d[i];
  }
  const double det = scc * sss - scs * scs;
  SinusoidFit out;
  if (std::abs(det) < 1e-12 * (scc + sss + 1e-300)) return out;
  const double a = (rc * sss - rs * scs) / det;
  const double b = (rs * scc - rc * scs) / det;
  out.amplitude = std::hypot(a, b);
  const double rss = std::max(0.0, dd - (a * rc + b * rs));
  out.post_rms = std::sqrt(rss / static_cast<double>(ts.size()));
  return out;
}

// Solves the 4x4 normal equations of a cubic fit in the scaled abscissa.
std::array<double, 4> cubic_coefficients(const std::vector<double>& x,
                                         const std::vector<double>& y) {
  double pw[7] = {0, 0, 0, 0, 0, 0, 0};
  double rhs[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    double xp = 1.0;
    for (int p = 0; p < 7; ++p, xp *= x[i]) {
      pw[p] += xp;
      if (p < 4) rhs[p] += y[i] * xp;
    }
  }
  double m[4][5];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m[r][c] = pw[r + c];
    m[r][4] = rhs[r];
  }
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    for (int c = 0; c < 5; ++c) std::swap(m[col][c], m[piv][c]);
    if (std::abs(m[col][col]) < 1e-300) return {0, 0, 0, 0};
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return {m[0][4] / m[0][0], m[1][4] / m[1][1], m[2][4] / m[2][2],
          m[3][4] / m[3][3]};
}

}  // namespace

QuadratureRule::QuadratureRule(const Grid& g) : weights(g.points(), 0.0) {
  const double h = g.drho();
  for (int i = 0; i <= g.N; ++i)
    weights[i] = (i == 0 || i == g.N) ? 0.5 * h : h;
}

double inner_product(const State& x, const State& y, const QuadratureRule& q) {
  check_same_grid(x, y, q, "inner_product");
  double acc = 0.0;
  const int m = x.points();
  for (int i = 0; i < m; ++i)
    acc += q.weights[i] *
           (x.u1[i] * y.u1[i] + x.u2[i] * y.u2[i] + x.u3[i] * y.u3[i]);
  return acc;
}

double norm(const State& x, const QuadratureRule& q) {
  return std::sqrt(std::max(0.0, inner_product(x, x, q)));
}

State project_out(const State& target, const std::vector<State>& basis,
                  const QuadratureRule& q) {
  if (basis.empty()) return target;
  for (const State& b : basis) check_same_grid(target, b, q, "project_out");
  const std::vector<State> ortho = orthonormalize(basis, q, "project_out");
  State t = target;
  for (int pass = 0; pass < 2; ++pass)
    for (const State& e : ortho) axpy(t, -inner_product(t, e, q), e);
  return t;
}

State seed_phi(const Grid& g) {
  State s(g);
  for (int i = 0; i < g.points(); ++i) {
    const double r = g.rho(i);
    s.u1[i] = r * r * r * (1.0 - 0.5 * r * r);
    s.u3[i] = 3.0 * r * r - 2.5 * r * r * r * r;
  }
  return s;
}

State seed_psi(const Grid& g) {
  State s(g);
  for (int i = 0; i < g.points(); ++i) {
    const double r = g.rho(i);
    const double b = 1.0 - r * r;
    s.u1[i] = r * b * b;
    s.u3[i] = b * b - 4.0 * r * r * b;
  }
  return s;
}

State seed_legendre(const Grid& g, int k) {
  if (k < 0) throw validation_error("seed_legendre: k must be non-negative");
  State st(g);
  for (int i = 0; i < g.points(); ++i) {
    const double r = g.rho(i);
    const double s = 2.0 * r * r - 1.0;
    // Legendre value and derivative in s by the standard recurrences.
    double pm1 = 1.0, p = s, dm1 = 0.0, d = 1.0;
    if (k == 0) {
      p = 1.0;
      d = 0.0;
    }
    for (int j = 2; j <= k; ++j) {
      const double pj = ((2.0 * j - 1.0) * s * p - (j - 1.0) * pm1) / j;
      const double dj = dm1 + (2.0 * j - 1.0) * p;
      pm1 = p;
      p = pj;
      dm1 = d;
      d = dj;
    }
    const double e = std::exp(-r * r);
    st.u1[i] = r * p * e;
    st.u3[i] = (p + 4.0 * r * r * d - 2.0 * r * r * p) * e;
  }
  return st;
}

std::vector<State> default_seeds(const Grid& g, int count) {
  if (count < 1) throw validation_error("default_seeds: count must be positive");
  std::vector<State> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(seed_legendre(g, k));
  return out;
}

FilterBank co_evolve_filtered(const std::vector<State>& data,
                              const SchemeConfig& cfg,
                              const CoEvolveOptions& opt) {
  const int levels = static_cast<int>(data.size());
  if (levels < 1)
    throw validation_error("co_evolve_filtered: at least one level required");
  if (opt.tau_end < 0.0)
    throw validation_error("co_evolve_filtered: tau_end must be non-negative");
  if (opt.record_stride < 1)
    throw validation_error("co_evolve_filtered: record_stride must be >= 1");
  const QuadratureRule q(cfg.grid);
  for (const State& s : data)
    check_same_grid(s, s, q, "co_evolve_filtered");
  orthonormalize(data, q, "co_evolve_filtered");  // independence pre-check

  std::vector<State> y(data);
  std::vector<double> base(levels, 0.0);
  for (int k = 0; k < levels; ++k) {
    apply_center_bc(y[k]);
    // Normalize the inputs so Lambda measures growth relative to the initial
    // norm in both modes (otherwise the first renormalization absorbs the
    // seed magnitude as a spurious jump in the series).
    scale_state(y[k], 1.0 / norm(y[k], q));
    base[k] = std::log(norm(y[k], q));
  }

  const double dt = cfg.dtau();
  const long nst = static_cast<long>(std::ceil(opt.tau_end / dt - 1e-9));
  FilterBank bank;
  bank.lognorm.assign(levels, {});
  bank.rescale_total.assign(levels, 0.0);
  std::vector<double> lam(levels, 0.0);
  auto record = [&](long n) {
    bank.taus.push_back(static_cast<double>(n) * dt);
    for (int k = 0; k < levels; ++k) bank.lognorm[k].push_back(lam[k]);
  };
  record(0);

  State k1, k2, stage;
  const double guard = std::exp(cfg.growth_guard * dt);
  for (long n = 0; n < nst; ++n) {
    for (int k = 0; k < levels; ++k) {
      const double pre = norm(y[k], q);
      detail::heun_step_inplace(y[k], cfg, dt, k1, k2, stage);
      const double post = norm(y[k], q);
      if (!std::isfinite(post) || (pre > 0.0 && post > guard * pre)) {
        std::ostringstream msg;
        msg << "co_evolve_filtered: level " << k << " unstable at tau="
            << y[k].tau << " (norm ratio " << (pre > 0 ? post / pre : post)
            << " exceeds guard " << guard << ")";
        throw numeric_error(msg.str());
      }
    }
    for (int k = 0; k < levels; ++k) {
      const double pre = norm(y[k], q);
      for (int j = 0; j < k; ++j) {
        const double denom = inner_product(y[j], y[j], q);
        axpy(y[k], -inner_product(y[k], y[j], q) / denom, y[j]);
      }
      const double nk = norm(y[k], q);
      if (!(nk > 1e-10 * std::max(pre, 1e-300))) {
        std::ostringstream msg;
        msg << "co_evolve_filtered: level " << k
            << " collapsed under projection at tau=" << y[k].tau
            << " (degenerate data)";
        throw validation_error(msg.str());
      }
      if (opt.renormalize) {
        scale_state(y[k], 1.0 / nk);
        lam[k] += std::log(nk);
        bank.rescale_total[k] += std::log(nk);
      } else {
        lam[k] = std::log(nk) - base[k];
      }
    }
    if ((n + 1) % opt.record_stride == 0 || n + 1 == nst) record(n + 1);
  }
  bank.final_states = std::move(y);
  return bank;
}

GrowthFit fit_growth_rate(const std::vector<double>& taus,
                          const std::vector<double>& lam, double window_lo,
                          double window_hi) {
  if (taus.size() != lam.size())
    throw validation_error("fit_growth_rate: series length mismatch");
  if (window_hi - window_lo < 2.0 - 1e-9)
    throw validation_error("fit_growth_rate: window must span at least 2");
  if (taus.empty() || window_lo < taus.front() - 1e-9 ||
      window_hi > taus.back() + 1e-9)
    throw validation_error("fit_growth_rate: window outside the series range");

  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < taus.size(); ++i)
    if (taus[i] >= window_lo - 1e-12 && taus[i] <= window_hi + 1e-12) {
      ts.push_back(taus[i]);
      ys.push_back(lam[i]);
    }
  const auto n = static_cast<double>(ts.size());
  if (ts.size() < 20)
    throw validation_error("fit_growth_rate: fewer than 20 samples in window");

  double tbar = 0, ybar = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tbar += ts[i];
    ybar += ys[i];
  }
  tbar /= n;
  ybar /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxx += (ts[i] - tbar) * (ts[i] - tbar);
    sxy += (ts[i] - tbar) * (ys[i] - ybar);
  }
  GrowthFit fit;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * tbar;

  std::vector<double> res(ts.size());
  double rss = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    res[i] = ys[i] - (fit.intercept + fit.slope * ts[i]);
    rss += res[i] * res[i];
  }
  fit.rms_residual = std::sqrt(rss / n);
  fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);

  // Oscillation probe: remove a cubic trend from the residual, then look for
  // a sinusoid that stands well above the remaining scatter.  The scan is
  // decimated to bound its cost on long series.
  const std::size_t stride = std::max<std::size_t>(1, ts.size() / 2048);
  std::vector<double> tsd, xd, rd;
  const double mid = 0.5 * (window_lo + window_hi);
  const double half = 0.5 * (window_hi - window_lo);
  for (std::size_t i = 0; i < ts.size(); i += stride) {
    tsd.push_back(ts[i]);
    xd.push_back((ts[i] - mid) / half);
    rd.push_back(res[i]);
  }
  const std::array<double, 4> c = cubic_coefficients(xd, rd);
  std::vector<double> d(rd.size());
  for (std::size_t i = 0; i < rd.size(); ++i) {
    const double x = xd[i];
    d[i] = rd[i] - (c[0] + x * (c[1] + x * (c[2] + x * c[3])));
  }
  const double omega_min = 2.0 * std::numbers::pi * 1.25 / (2.0 * half);
  const double dt_dec = tsd.size() > 1
                            ? (tsd.back() - tsd.front()) /
                                  static_cast<double>(tsd.size() - 1)
                            : 1.0;
  const double omega_max =
      std::min(40.0 * omega_min, 0.9 * std::numbers::pi / dt_dec);
  const int n_scan = 160;
  SinusoidFit best;
  for (int s = 0; s < n_scan; ++s) {
    const double w =
        omega_min + (omega_max - omega_min) * s / (n_scan - 1.0);
    const SinusoidFit cand = fit_sinusoid(tsd, d, w);
    if (cand.amplitude > best.amplitude) {
      best = cand;
      fit.osc_omega = w;
    }
  }
  fit.osc_amplitude = best.amplitude;
  fit.oscillation = best.amplitude > 3.0 * best.post_rms &&
                    best.amplitude > 1e-9 * std::max(1.0, std::abs(ybar));
  return fit;
}

SpectrumResult extract_spectrum(const Profile& prof,
                                const SpectrumOptions& opt) {
  if (opt.levels < 1 || opt.levels > 4)
    throw validation_error(
        "extract_spectrum: levels must lie in [1, 4] (dominant plus at most "
        "three filtered levels)");
  if (opt.tau_end <= 0.0)
    throw validation_error("extract_spectrum: tau_end must be positive");
  Grid g(opt.grid_n);
  if (opt.window_len > 0.0) {
    if (opt.window_stride <= 0.0)
      throw validation_error("extract_spectrum: window_stride must be positive");
    if (opt.settle + opt.window_len > opt.tau_end + 1e-9)
      throw validation_error(
          "extract_spectrum: settle + window_len exceeds tau_end");
  }

  Profile extended;
  const Profile* used = &prof;
  if (prof.rho_max() < 1.0 + g.drho() - 1e-12) {
    extended = extend_beyond_lightcone(prof, 1.0 + 1.0 / 32.0);
    used = &extended;
  }
  SchemeConfig cfg(g, *used, opt.kappa);

  std::vector<State> seeds;
  if (!opt.seeds.empty()) {
    if (static_cast<int>(opt.seeds.size()) != opt.levels)
      throw validation_error(
          "extract_spectrum: seed override must supply one state per level");
    for (const State& s : opt.seeds)
      if (s.points() != g.points())
        throw validation_error("extract_spectrum: seed grid mismatch");
    seeds = opt.seeds;
  } else {
    seeds = default_seeds(g, opt.levels);
  }

  CoEvolveOptions co;
  co.tau_end = opt.tau_end;
  co.renormalize = true;
  FilterBank bank = co_evolve_filtered(seeds, cfg, co);

  // Candidate fit windows: a single anchored window, or a sliding scan with
  // transient/noise-floor trimming by residual minimization.
  std::vector<std::pair<double, double>> windows;
  if (opt.window_len <= 0.0) {
    windows.emplace_back(0.5 * opt.tau_end, opt.tau_end);
  } else {
    for (double lo = opt.settle; lo + opt.window_len <= opt.tau_end + 1e-9;
         lo += opt.window_stride)
      windows.emplace_back(lo, lo + opt.window_len);
  }

  SpectrumResult out;
  out.profile_n = prof.n;
  double mu_prev = 0.0;
  for (int k = 0; k < opt.levels; ++k) {
    std::vector<GrowthFit> fits;
    fits.reserve(windows.size());
    for (const auto& [lo, hi] : windows)
      fits.push_back(fit_growth_rate(bank.taus, bank.lognorm[k], lo, hi));

    const double cap = k == 0 ? std::numeric_limits<double>::infinity()
                              : mu_prev + 0.02 * std::max(1.0, std::abs(mu_prev));
    int pick = -1;
    for (std::size_t w = 0; w < fits.size(); ++w) {
      if (fits[w].slope > cap) continue;
      if (pick < 0 || fits[w].rms_residual < fits[pick].rms_residual)
        pick = static_cast<int>(w);
    }
    if (pick < 0) {
      std::ostringstream msg;
      msg << "extract_spectrum: level " << k
          << " has no admissible fit window (all slopes above "
          << cap << ")";
      throw numeric_error(msg.str());
    }

    double spread = 0.0;
    if (pick > 0)
      spread = std::max(spread,
                        std::abs(fits[pick - 1].slope - fits[pick].slope));
    if (pick + 1 < static_cast<int>(fits.size()))
      spread = std::max(spread,
                        std::abs(fits[pick + 1].slope - fits[pick].slope));

    LevelEstimate est;
    est.level = k;
    est.mu = fits[pick].slope;
    est.uncertainty = std::max(fits[pick].slope_stderr, spread);
    est.oscillation = fits[pick].oscillation;
    est.window_lo = fits[pick].window_lo;
    est.window_hi = fits[pick].window_hi;
    est.rms_residual = fits[pick].rms_residual;
    out.levels.push_back(est);
    mu_prev = est.mu;
  }
  out.taus = std::move(bank.taus);
  out.lognorm = std::move(bank.lognorm);
  return out;
}

}  // namespace wavemap
