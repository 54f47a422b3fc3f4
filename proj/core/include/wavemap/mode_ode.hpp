#pragma once

// Linear perturbation modes of a self-similar profile.
//
// A perturbation growing like exp(lambda * tau) about the profile f_n has a
// radial amplitude v(rho) solving
//
//   v'' = -2((lambda+1) rho^2 - 1) / (rho (rho+1)(rho-1)) v'
//         - (lambda(lambda+1) rho^2 + 2 cos(2 f_n)) / (rho^2 (rho+1)(rho-1)) v
//
// with regular singular points at the center (indices {1, -2}) and the
// light cone (indices {0, 1-lambda}).  Eigenvalues are the lambda for which
// the regular branches from both ends match at an interior radius; the free
// parameters of the two-sided match are lambda and the center slope
// a = v'(0), with the light-cone branch normalized to v(1) = 1.
//
// The light-cone series coefficients have poles at lambda = 0 and -1 (and
// the third-order one at -2), so root scans keep a guard band around them
// and the order near -2 degrades gracefully.  lambda = -2 itself needs the
// dedicated resonant construction at the bottom of this header.

#include <array>
#include <utility>
#include <vector>

#include "wavemap/profile.hpp"

namespace wavemap {

struct ModeOptions {
  double match_point = 0.5;   // interior matching radius
  double series_edge = 1e-4;  // series step-off from each singular end
  double defect_tol = 1e-10;  // convergence threshold on the matching defect
  int max_newton_iter = 60;
  int lightcone_order = 3;  // 3 removes the O(edge^3) eigenvalue systematic
  double guard_band = 1e-3;  // clearance kept around the series poles 0, -1
};

struct Eigenpair {
  double lambda = 0.0;
  double a = 0.0;  // center slope v'(0) under the normalization v(1) = 1
  double defect = 0.0;
  double uncertainty = 0.0;  // max of last Newton step and step-off refinement shift
  int newton_iterations = 0;
};

struct ScanCandidate {
  double lambda_lo = 0.0, lambda_hi = 0.0;  // sign-change bracket of the Wronskian
  double lambda_opt = 0.0;                  // bisection-refined root of the Wronskian
  double a_opt = 0.0;        // least-squares center scale aligning the two branches
  double min_residual = 0.0;  // relative two-sided mismatch at (lambda_opt, a_opt)
  bool near_pole = false;     // bracket was trimmed at a series pole
};

// v'' from the mode equation; throws std::domain_error at rho = 0, 1.
double mode_rhs(double rho, double v, double vp, double lambda, const Profile& prof);

// Regular center branch: v = a rho + v3 rho^3 + v5 rho^5 with coefficients
// determined by lambda and the profile's center slope b.  Returns (v, v').
std::pair<double, double> mode_center_series(double a, double lambda, double b, double rho);

// Regular light-cone branch normalized to v(1) = 1, evaluated at rho near 1.
// order = 2 or 3; order 3 requires |lambda + 2| > 0.1 (coefficient pole) and
// silently falls back to order 2 inside that band.  Throws validation_error
// when lambda sits within guard_band of the series poles 0 or -1.
std::pair<double, double> mode_lightcone_series(double lambda, double c, double rho,
                                                int order = 3, double guard_band = 1e-3);

// Two-sided mismatch (delta v, delta v') at the matching radius.
std::array<double, 2> mode_defect(double lambda, double a, const Profile& prof,
                                  const ModeOptions& opt = {});

// Newton iteration in (lambda, a) from the given start.  Throws
// validation_error for lambda inside the guard band, numeric_error when the
// iteration stalls or leaves the usable range.
Eigenpair find_eigenvalue(double lambda0, double a0, const Profile& prof,
                          const ModeOptions& opt = {});

// Wronskian sign-change scan over [lo, hi] with `steps` uniform panels.
// Panels straddling a series pole are trimmed to the guard band on each
// side; a sign change that only appears across the pole itself is dropped
// as spurious.  The scan itself always runs with the order-2 light-cone
// series so the order-3 pole at -2 cannot inject artifacts.
std::vector<ScanCandidate> scan_eigenvalues(double lo, double hi, int steps,
                                            const Profile& prof,
                                            const ModeOptions& opt = {});

// Eigenfunction samples (rho, v, v') on a uniform nsamp-point grid over
// [0, 1], normalized to v(1) = 1.
std::vector<std::array<double, 3>> eigenfunction_table(const Eigenpair& ep,
                                                       const Profile& prof,
                                                       int nsamp = 257,
                                                       const ModeOptions& opt = {});

// Center-regular branch with slope a at the given lambda, carried outward
// and sampled at the requested radii (strictly ascending, within (0, 1)).
// Returns (rho, v, v') rows.  This is the natural probe for modes whose
// light-cone expansion is degenerate, where eigenfunction_table's two-sided
// assembly does not apply.
std::vector<std::array<double, 3>> center_branch_samples(
    double lambda, double a, const Profile& prof, const std::vector<double>& rhos,
    const ModeOptions& opt = {});

// --- the analytic eigenvalue lambda = -2 ---
//
// At lambda = -2 the light-cone indices are {0, 3}: the subleading branch
// is itself analytic, so a one-parameter shooter (which assumes the second
// branch is excluded by regularity) structurally cannot isolate this
// eigenvalue.  The obstruction to analyticity of the generic branch is the
// resonant numerator below; when it vanishes, every center-regular solution
// is light-cone-regular and lambda = -2 is an eigenvalue.

// Scaled resonant numerator of the third light-cone coefficient at
// lambda = -2, equal to 4(c^2 - 1).  Zero (to round-off) on the ground
// state where c = 1; nonzero on every excitation, whose |c| < 1.
double resonance_numerator_minus2(const Profile& prof);

struct ResonantMatch {
  double a = 0.0;     // center slope from the two-parameter light-cone match
  double beta = 0.0;  // coefficient of the analytic (rho-1)^3 branch
  double solve_residual = 0.0;  // two-sided mismatch after the 2x2 solve
  double a_direct = 0.0;  // center slope from direct normalization near the cone
};

// Constructive check: match the center branch against the two-dimensional
// analytic light-cone family {series branch, (rho-1)^3 branch} at
// lambda = -2.  On the ground state this closes with a ~ a_direct; on
// profiles with a nonzero resonant numerator the construction still returns
// numbers but represents a non-analytic mode, so callers must gate on
// resonance_numerator_minus2 first.
ResonantMatch resonant_match_minus2(const Profile& prof, const ModeOptions& opt = {});

}  // namespace wavemap
