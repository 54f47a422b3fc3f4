#include "wavemap/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ode_integrate.hpp"
#include "wavemap/errors.hpp"

namespace wavemap {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

using State2 = std::array<double, 2>;

void profile_system(const State2& y, State2& dy, double r) {
  dy[0] = y[1];
  dy[1] = profile_rhs(r, y[0], y[1]);
}

void check_options(const ProfileOptions& o) {
  if (!(o.series_edge > 0.0 && o.series_edge < 0.1))
    throw validation_error("profile: series_edge must lie in (0, 0.1)");
  if (!(o.match_point > o.series_edge && o.match_point < 1.0 - o.series_edge))
    throw validation_error("profile: match_point must lie between the series edges");
  if (!(o.defect_tol > 0.0))
    throw validation_error("profile: defect_tol must be positive");
  if (o.scan_points < 2)
    throw validation_error("profile: scan_points must be at least 2");
}

double inf_norm(const std::array<double, 2>& v) {
  return std::max(std::abs(v[0]), std::abs(v[1]));
}

// Newton in the two free slopes with central-difference Jacobian and step
// halving; converges to defect_tol or throws numeric_error.
struct ShootResult {
  double b, c;
  std::array<double, 2> defect;
};

ShootResult newton_slopes(double b, double c, const ProfileOptions& o) {
  auto residual = [&](double bb, double cc) { return profile_defect(bb, cc, o); };
  std::array<double, 2> r = residual(b, c);
  double rn = inf_norm(r);
  for (int it = 0; it < o.max_newton_iter; ++it) {
    if (rn <= o.defect_tol) return {b, c, r};
    const double hb = 1e-6 * std::max(1.0, std::abs(b));
    const double hc = 1e-6 * std::max(1.0, std::abs(c));
    const auto rb_p = residual(b + hb, c), rb_m = residual(b - hb, c);
    const auto rc_p = residual(b, c + hc), rc_m = residual(b, c - hc);
    const double j00 = (rb_p[0] - rb_m[0]) / (2 * hb), j01 = (rc_p[0] - rc_m[0]) / (2 * hc);
    const double j10 = (rb_p[1] - rb_m[1]) / (2 * hb), j11 = (rc_p[1] - rc_m[1]) / (2 * hc);
    const double det = j00 * j11 - j01 * j10;
    if (std::abs(det) < 1e-300) throw numeric_error("profile shooting: singular Jacobian");
    const double db = -(j11 * r[0] - j01 * r[1]) / det;
    const double dc = -(-j10 * r[0] + j00 * r[1]) / det;
    double lam = 1.0;
    bool accepted = false;
    for (; lam >= 1.0 / 1024.0; lam *= 0.5) {
      auto rt = residual(b + lam * db, c + lam * dc);
      if (inf_norm(rt) < rn) {
        b += lam * db;
        c += lam * dc;
        r = rt;
        rn = inf_norm(r);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "profile shooting stalled at defect " << rn << " after " << it + 1
          << " iterations (b=" << b << ", c=" << c << ")";
      throw numeric_error(msg.str());
    }
  }
  if (rn <= o.defect_tol) return {b, c, r};
  std::ostringstream msg;
  msg << "profile shooting did not converge: defect " << rn << " after "
      << o.max_newton_iter << " iterations (b=" << b << ", c=" << c << ")";
  throw numeric_error(msg.str());
}

// Center-side overshoot g(b) = f(1 - delta; b) - pi/2, used by the scan to
// bracket excitations; also reports f'(1 - delta) as a light-cone slope seed.
double overshoot(double b, const ProfileOptions& o, double delta, double* slope_end) {
  auto [f0, fp0] = center_series(b, o.series_edge);
  State2 y = detail::integrate_to<2>(profile_system, {f0, fp0}, o.series_edge, 1.0 - delta);
  if (slope_end) *slope_end = y[1];
  return y[0] - kHalfPi;
}

// Ascending list of center slopes where the overshoot changes sign; each is
// bisected to ~1e-12 and paired with its suggested light-cone slope.
std::vector<std::pair<double, double>> scan_center_slopes(const ProfileOptions& o) {
  constexpr double kDelta = 1e-3;
  std::vector<std::pair<double, double>> roots;
  const double llo = std::log(o.scan_lo), lhi = std::log(o.scan_hi);
  double b_prev = o.scan_lo;
  double g_prev = overshoot(b_prev, o, kDelta, nullptr);
  for (int i = 1; i < o.scan_points; ++i) {
    const double b_i = std::exp(llo + (lhi - llo) * i / (o.scan_points - 1));
    const double g_i = overshoot(b_i, o, kDelta, nullptr);
    if (g_prev == 0.0 || (g_prev < 0) != (g_i < 0)) {
      double lo = b_prev, hi = b_i, glo = g_prev;
      for (int k = 0; k < 60 && hi - lo > 1e-12 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double gm = overshoot(mid, o, kDelta, nullptr);
        if ((glo < 0) == (gm < 0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      double slope_end = 0.0;
      const double b_root = 0.5 * (lo + hi);
      overshoot(b_root, o, kDelta, &slope_end);
      roots.emplace_back(b_root, slope_end);
    }
    b_prev = b_i;
    g_prev = g_i;
  }
  return roots;
}

// Interior crossings of pi/2 counted on the sample table (excludes the
// approach to f(1) = pi/2 itself).
int count_crossings(const Profile& p) {
  int count = 0;
  for (std::size_t i = 1; i + 1 < p.rho.size() && p.rho[i + 1] < 1.0; ++i) {
    const double a = p.f[i] - kHalfPi, b = p.f[i + 1] - kHalfPi;
    if (a != 0.0 && (a < 0) != (b < 0)) ++count;
  }
  return count;
}

// Fill the uniform table over [0, ~1]: series values inside the step-off
// bands, adaptive sweeps from each end to the matching radius in between.
void build_base_table(Profile& p, const ProfileOptions& o) {
  const double h = kTableStep;
  const double eps = o.series_edge, rm = o.match_point;
  // One node past the light cone so [0, 1] is fully covered.
  const int last = static_cast<int>(std::floor(1.0 / h + 1e-12)) + 1;
  p.rho_step = h;
  p.rho.resize(last + 1);
  p.f.assign(last + 1, 0.0);
  p.fp.assign(last + 1, 0.0);
  for (int i = 0; i <= last; ++i) p.rho[i] = i * h;
  p.f[0] = 0.0;
  p.fp[0] = p.b;

  std::vector<double> up_nodes, down_nodes;
  std::vector<int> up_idx, down_idx;
  for (int i = 1; i <= last; ++i) {
    const double r = p.rho[i];
    if (r <= eps) {
      auto [fv, fpv] = center_series(p.b, r);
      p.f[i] = fv;
      p.fp[i] = fpv;
    } else if (r <= rm) {
      up_nodes.push_back(r);
      up_idx.push_back(i);
    } else if (r < 1.0 - eps) {
      down_nodes.push_back(r);
      down_idx.push_back(i);
    } else {  // within the series band around the light cone (either side)
      auto [fv, fpv] = lightcone_series(p.c, r);
      p.f[i] = fv;
      p.fp[i] = fpv;
    }
  }
  if (!up_nodes.empty()) {
    auto [f0, fp0] = center_series(p.b, eps);
    std::size_t pos = 0;
    detail::integrate_sampled<2>(profile_system, {f0, fp0}, eps, up_nodes,
                                 [&](const State2& y, double) {
                                   p.f[up_idx[pos]] = y[0];
                                   p.fp[up_idx[pos]] = y[1];
                                   ++pos;
                                 });
  }
  if (!down_nodes.empty()) {
    std::reverse(down_nodes.begin(), down_nodes.end());
    std::reverse(down_idx.begin(), down_idx.end());
    auto [f0, fp0] = lightcone_series(p.c, 1.0 - eps);
    std::size_t pos = 0;
    detail::integrate_sampled<2>(profile_system, {f0, fp0}, 1.0 - eps, down_nodes,
                                 [&](const State2& y, double) {
                                   p.f[down_idx[pos]] = y[0];
                                   p.fp[down_idx[pos]] = y[1];
                                   ++pos;
                                 });
  }
}

}  // namespace

std::pair<double, double> ground_state(double rho) {
  return {2.0 * std::atan(rho), 2.0 / (1.0 + rho * rho)};
}

double profile_rhs(double rho, double f, double fp) {
  if (rho <= 0.0 || rho == 1.0)
    throw std::domain_error("profile_rhs: singular at rho = 0 and rho = 1");
  return std::sin(2.0 * f) / (rho * rho * (1.0 - rho * rho)) - 2.0 * fp / rho;
}

std::pair<double, double> center_series(double b, double rho) {
  const double f3 = b * (3.0 - 2.0 * b * b) / 15.0;
  const double f5 = b * (b * b * b * b - 3.0 * b * b + 3.0) / 35.0;
  const double r2 = rho * rho;
  return {rho * (b + r2 * (f3 + r2 * f5)), b + r2 * (3.0 * f3 + r2 * 5.0 * f5)};
}

std::pair<double, double> lightcone_series(double c, double rho) {
  const double x = rho - 1.0;
  const double c4 = (c - c * c * c) / 18.0;
  const double f = kHalfPi + x * (c + x * (-c / 2.0 + x * (c / 6.0 + x * c4)));
  const double fp = c + x * (-c + x * (c / 2.0 + x * 4.0 * c4));
  return {f, fp};
}

std::array<double, 2> profile_defect(double b, double c, const ProfileOptions& o) {
  check_options(o);
  auto [fc, fpc] = center_series(b, o.series_edge);
  State2 yc = detail::integrate_to<2>(profile_system, {fc, fpc}, o.series_edge,
                                      o.match_point);
  auto [fl, fpl] = lightcone_series(c, 1.0 - o.series_edge);
  State2 yl = detail::integrate_to<2>(profile_system, {fl, fpl},
                                      1.0 - o.series_edge, o.match_point);
  return {yc[0] - yl[0], yc[1] - yl[1]};
}

Profile shoot_profile(int n, const ProfileOptions& opt) {
  check_options(opt);
  if (n < 0) throw validation_error("profile: excitation index must be >= 0");

  // A wholly negative scan bracket (or guess) selects the sign-flipped
  // branch: solve the standard problem and negate.
  const bool mirrored =
      (opt.guess ? opt.guess->first < 0.0 : opt.scan_hi < 0.0);
  ProfileOptions o = opt;
  if (mirrored) {
    if (opt.guess) {
      o.guess = std::pair{-opt.guess->first, -opt.guess->second};
    } else {
      if (!(opt.scan_lo < 0.0))
        throw validation_error("profile: negative bracket must have both ends < 0");
      o.scan_lo = -opt.scan_hi;
      o.scan_hi = -opt.scan_lo;
    }
  } else if (!opt.guess && !(opt.scan_lo > 0.0 && opt.scan_hi > opt.scan_lo)) {
    throw validation_error("profile: scan bracket must satisfy 0 < scan_lo < scan_hi");
  }

  double b0, c0;
  if (o.guess) {
    b0 = o.guess->first;
    c0 = o.guess->second;
  } else {
    auto roots = scan_center_slopes(o);
    if (static_cast<int>(roots.size()) <= n) {
      std::ostringstream msg;
      msg << "profile scan over b in [" << o.scan_lo << ", " << o.scan_hi
          << "] found " << roots.size() << " excitation(s); index " << n
          << " requested";
      throw numeric_error(msg.str());
    }
    b0 = roots[n].first;
    c0 = roots[n].second;
  }

  ShootResult sr = newton_slopes(b0, c0, o);
  Profile p;
  p.n = n;
  p.b = sr.b;
  p.c = sr.c;
  p.defect = inf_norm(sr.defect);
  p.closed_form = (n == 0);
  build_base_table(p, o);

  const int crossings = count_crossings(p);
  if (crossings != n) {
    std::ostringstream msg;
    msg << "profile shooting converged to the wrong family member: " << crossings
        << " interior crossing(s) of pi/2, expected " << n;
    throw numeric_error(msg.str());
  }

  if (mirrored) {
    p.sign = -1.0;
    p.b = -p.b;
    p.c = -p.c;
    for (auto& v : p.f) v = -v;
    for (auto& v : p.fp) v = -v;
  }
  return p;
}

Profile extend_beyond_lightcone(Profile p, double rho_max) {
  if (p.rho.empty()) throw validation_error("extend_beyond_lightcone: empty profile");
  if (rho_max > kMaxExtension + 1e-12) {
    std::ostringstream msg;
    msg << "extend_beyond_lightcone: rho_max " << rho_max
        << " exceeds the validated exterior range " << kMaxExtension;
    throw validation_error(msg.str());
  }
  const double h = p.rho_step;
  if (rho_max <= p.rho_max() + 1e-15) return p;

  const int first = static_cast<int>(p.rho.size());
  const int last = static_cast<int>(std::ceil(rho_max / h - 1e-9));
  // Work on the standard branch; restore the sign at the end.
  const double sgn = p.sign;
  const double c = sgn * p.c;
  const double eps = 1e-4;

  std::vector<double> nodes;
  std::vector<int> idx;
  for (int i = first; i <= last; ++i) {
    const double r = i * h;
    p.rho.push_back(r);
    if (r <= 1.0 + eps) {
      auto [fv, fpv] = lightcone_series(c, r);
      p.f.push_back(sgn * fv);
      p.fp.push_back(sgn * fpv);
    } else {
      p.f.push_back(0.0);
      p.fp.push_back(0.0);
      nodes.push_back(r);
      idx.push_back(i);
    }
  }
  if (!nodes.empty()) {
    auto [f0, fp0] = lightcone_series(c, 1.0 + eps);
    std::size_t pos = 0;
    detail::integrate_sampled<2>(profile_system, {f0, fp0}, 1.0 + eps, nodes,
                                 [&](const State2& y, double) {
                                   p.f[idx[pos]] = sgn * y[0];
                                   p.fp[idx[pos]] = sgn * y[1];
                                   ++pos;
                                 });
  }
  return p;
}

std::pair<double, double> Profile::evaluate(double r) const {
  if (rho.empty()) throw std::out_of_range("Profile::evaluate: empty table");
  if (!(r >= 0.0) || r > rho_max() + 1e-12)
    throw std::out_of_range("Profile::evaluate: rho outside the sampled range");
  if (closed_form) {
    auto [fv, fpv] = ground_state(r);
    return {sign * fv, sign * fpv};
  }
  const double h = rho_step;
  int k = static_cast<int>(std::floor(r / h));
  k = std::clamp(k, 0, static_cast<int>(rho.size()) - 2);
  const double t = (r - rho[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double fv = h00 * f[k] + h10 * h * fp[k] + h01 * f[k + 1] + h11 * h * fp[k + 1];
  const double dv = (6 * t2 - 6 * t) * (f[k] - f[k + 1]) / h +
                    (3 * t2 - 4 * t + 1) * fp[k] + (3 * t2 - 2 * t) * fp[k + 1];
  return {fv, dv};
}

}  // namespace wavemap
