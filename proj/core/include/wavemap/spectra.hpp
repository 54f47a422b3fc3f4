#pragma once

// Spectral extraction from linearized evolution: the L2-type inner product
// on [0, 1], per-step Gram-Schmidt filtering of co-evolving perturbations,
// and least-squares growth-rate fits with oscillation detection.

#include <vector>

#include "wavemap/evolve.hpp"
#include "wavemap/profile.hpp"

namespace wavemap {

// Composite trapezoid weights over the physical interval [0, 1] (nodes
// 0..N); the exterior node N+1 carries weight zero.  Weights are
// non-negative and sum to exactly 1.
struct QuadratureRule {
  explicit QuadratureRule(const Grid& g);
  std::vector<double> weights;
};

// <x, y> = sum_j int_0^1 x_j y_j drho under the rule: symmetric, bilinear,
// positive definite on the interior nodes.  Throws validation_error when the
// states and the rule do not share a grid.
double inner_product(const State& x, const State& y, const QuadratureRule& q);
double norm(const State& x, const QuadratureRule& q);

// Subtracts from the target its component along span(basis): the basis is
// orthonormalized internally (modified Gram-Schmidt) and the projection is
// applied twice, so the result is orthogonal to every basis member to 1e-12
// relative.  A basis member with near-zero norm, or one that is numerically
// a combination of its predecessors, is a degenerate filter: validation_error.
State project_out(const State& target, const std::vector<State>& basis,
                  const QuadratureRule& q);

// Initial-data library.  All entries satisfy the center condition
// u1(0) = u2(0) = 0 with u2 = 0 and u3 = d(u1)/d(rho) exact.
State seed_phi(const Grid& g);              // u1 = rho^3 (1 - rho^2/2)
State seed_psi(const Grid& g);              // u1 = rho (1 - rho^2)^2
State seed_legendre(const Grid& g, int k);  // u1 = rho P_k(2 rho^2 - 1) e^{-rho^2}
// The first `count` members of the Legendre family: mutually
// well-conditioned, so deep filter levels settle quickly.
std::vector<State> default_seeds(const Grid& g, int count);

struct CoEvolveOptions {
  double tau_end = 12.0;
  // Rescale every level to unit norm after each filtering pass, accumulating
  // the log factor (prevents overflow of fast-growing levels on long runs).
  bool renormalize = true;
  int record_stride = 1;  // record every k-th step (the last is always kept)
};

// Filtered co-evolution output.  lognorm[k] tracks the accumulated log-norm
// of filter level k: the recorded series is Lambda_k(tau) - Lambda_k(0), the
// same function (up to round-off) whether or not renormalization is on.
struct FilterBank {
  std::vector<double> taus;
  std::vector<std::vector<double>> lognorm;
  std::vector<State> final_states;
  std::vector<double> rescale_total;  // summed log rescale factors per level
};

// Advances all levels in lockstep with the scheme in `cfg`; after every step
// level k is orthogonalized against levels 0..k-1 under the trapezoid rule
// and optionally renormalized.  Initial data must be linearly independent
// (validation_error otherwise, as when a level collapses under projection);
// explosive norm growth raises numeric_error as in step().
FilterBank co_evolve_filtered(const std::vector<State>& data,
                              const SchemeConfig& cfg,
                              const CoEvolveOptions& opt = {});

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double slope_stderr = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool oscillation = false;
  double osc_amplitude = 0.0;
  double osc_omega = 0.0;
};

// Ordinary least squares of Lambda against tau restricted to
// [window_lo, window_hi].  The window must span at least 2 time units, lie
// inside the series, and contain at least 20 samples (validation_error).
// Oscillation flag: after removing a cubic trend from the fit residual, a
// scanned sinusoid whose amplitude exceeds three times the remaining scatter
// marks periodic structure (the complex-eigenvalue signature).
GrowthFit fit_growth_rate(const std::vector<double>& taus,
                          const std::vector<double>& lam, double window_lo,
                          double window_hi);

struct LevelEstimate {
  int level = 0;
  double mu = 0.0;
  double uncertainty = 0.0;
  bool oscillation = false;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double rms_residual = 0.0;
};

struct SpectrumOptions {
  int levels = 4;  // co-evolved filter levels: dominant plus at most three
  int grid_n = 2048;
  double kappa = 0.25;
  double tau_end = 12.0;
  // Sliding fit windows of this length are scanned from `settle` in steps of
  // `window_stride`; the admissible window with the smallest residual wins
  // (automatic transient trimming).  window_len <= 0 selects the single
  // fixed window [tau_end/2, tau_end] instead.
  double window_len = 2.5;
  double window_stride = 0.25;
  double settle = 1.0;
  std::vector<State> seeds;  // override; empty selects the Legendre library
};

struct SpectrumResult {
  int profile_n = 0;
  std::vector<LevelEstimate> levels;
  std::vector<double> taus;  // recorded log-norm series, for export
  std::vector<std::vector<double>> lognorm;
};

// Full pipeline: filtered co-evolution about `prof`, then per-level window
// scan.  Candidate windows for level k are constrained by spectrum ordering
// (slope at most mu_{k-1} + 0.02 max(1, |mu_{k-1}|), which rejects windows
// contaminated by the truncation-noise floor of a decayed level); among them
// the minimum-residual fit is chosen, with uncertainty
// max(slope stderr, spread across neighboring windows).  Throws
// numeric_error when a level has no admissible window.
SpectrumResult extract_spectrum(const Profile& prof,
                                const SpectrumOptions& opt = {});

}  // namespace wavemap
