#pragma once

// Self-similar wave-map profiles in similarity coordinates.
//
// The profile f(rho) solves
//
//   f'' = sin(2f) / (rho^2 (1 - rho^2)) - (2/rho) f'
//
// on 0 < rho < 1 with f(0) = 0 and f(1) = pi/2, where rho = 1 is the past
// light cone of the blow-up point.  The equation is singular at both ends,
// so solutions are constructed by two-sided shooting: truncated power
// series carry the regular branch a small distance off each singular
// point, adaptive integration continues to an interior matching radius,
// and a damped Newton iteration drives the two-sided mismatch of (f, f')
// to zero in the two free slopes b = f'(0) and c = f'(1).
//
// Solutions form a discrete family f_0, f_1, ... indexed by the number of
// interior crossings of pi/2; the ground state is f_0 = 2 arctan(rho).

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace wavemap {

struct ProfileOptions {
  double match_point = 0.5;  // interior matching radius for two-sided shooting
  double series_edge = 1e-4;  // series step-off distance from each singular end
  double defect_tol = 1e-10;  // convergence threshold on the matching defect
  int max_newton_iter = 50;
  // Center-slope scan bracket used to locate the requested excitation
  // (log-spaced in |b|; pass a negative bracket for the sign-flipped branch).
  double scan_lo = 0.5;
  double scan_hi = 300.0;
  int scan_points = 160;
  // Optional direct initial guess (b, c); skips the scan when set.
  std::optional<std::pair<double, double>> guess;
};

struct Profile {
  int n = 0;        // excitation index: interior crossings of pi/2
  double b = 0.0;   // center slope f'(0)
  double c = 0.0;   // light-cone slope f'(1)
  double defect = 0.0;  // final matching defect (inf-norm over f and f')
  double sign = 1.0;    // -1 for the negated branch (f -> -f)
  bool closed_form = false;  // ground state: evaluate() uses 2 arctan(rho)

  // Uniform sample table.  The spacing is fixed (kTableStep) so a table
  // built on [0, 1] and one later extended past the light cone share
  // their nodes.
  double rho_step = 0.0;
  std::vector<double> rho, f, fp;

  double rho_max() const { return rho.empty() ? 0.0 : rho.back(); }

  // (f, f') off the table: exact closed form for the ground state, cubic
  // Hermite interpolation otherwise.  Throws std::out_of_range outside
  // [0, rho_max()].
  std::pair<double, double> evaluate(double r) const;
};

// Shared table spacing: 2048 intervals spanning [0, 1 + 1/32], the widest
// exterior margin any evolution grid (N >= 32) requires.
inline constexpr double kTableStep = (1.0 + 1.0 / 32.0) / 2048.0;

// Largest radius to which a profile table may be extended; the exterior
// continuation loses accuracy beyond this.
inline constexpr double kMaxExtension = 1.04;

// Ground state f_0 = 2 arctan(rho) and its derivative.
std::pair<double, double> ground_state(double rho);

// Right-hand side f'' of the profile equation.  Throws std::domain_error
// at the singular points rho = 0 and rho = 1 (and for rho < 0).
double profile_rhs(double rho, double f, double fp);

// Truncated regular series about the two singular ends: (f, f') at rho for
// center slope b, and at rho (near 1) for light-cone slope c.
std::pair<double, double> center_series(double b, double rho);
std::pair<double, double> lightcone_series(double c, double rho);

// Two-sided mismatch (delta f, delta f') at the matching radius for trial
// slopes (b, c).
std::array<double, 2> profile_defect(double b, double c,
                                     const ProfileOptions& opt = {});

// Two-sided shooting for the n-th excitation.  The returned table covers
// [0, 1]; extend_beyond_lightcone() appends exterior samples.  Throws
// numeric_error if the scan bracket holds no n-th excitation or Newton
// stalls; validation_error for malformed options.
Profile shoot_profile(int n, const ProfileOptions& opt = {});

// Continue a profile analytically past the light cone, appending samples
// on the shared uniform grid until the table covers [0, rho_max].  A
// rho_max at or below the current coverage returns the profile unchanged;
// rho_max > kMaxExtension throws validation_error.
Profile extend_beyond_lightcone(Profile p, double rho_max);

}  // namespace wavemap
