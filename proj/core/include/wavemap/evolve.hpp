#pragma once

// Characteristic finite-difference evolution of linear perturbations about
// a self-similar profile, in similarity coordinates (tau, rho).
//
// The perturbation w(tau, rho) about f_n obeys
//
//   w_tautau = -2 rho w_taurho + (1-rho^2) w_rhorho - w_tau
//              + (2/rho)(1-rho^2) w_rho - (2/rho^2) cos(2 f_n) w
//
// written here as a first-order system u = (u1, u2, u3) = (w, w_tau, w_rho).
// The principal part acts on (u2, u3) with characteristic speeds 1 - rho
// (outgoing) and -1 - rho (ingoing): both are non-positive for rho >= 1, so
// the light cone is an outflow boundary and the grid simply continues one
// node past it.  Spatial derivatives are one-sided second-order stencils
// upwinded per characteristic; time stepping is a two-stage (Heun) scheme.
//
// Grid: nodes rho_i = i / N for i = 0 .. N+1.  Center regularity gives
// u1(0) = u2(0) = 0 and parity (u1, u2 odd, u3 even), which realizes the
// depth-2 ghost nodes by reflection.

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "wavemap/profile.hpp"

namespace wavemap {

using Mat3 = std::array<std::array<double, 3>, 3>;

struct Grid {
  explicit Grid(int n);  // throws validation_error if n < 32
  int N;
  double drho() const { return 1.0 / N; }
  int points() const { return N + 2; }
  double rho(int i) const { return static_cast<double>(i) / N; }
};

struct State {
  State() = default;
  explicit State(const Grid& g)
      : u1(g.points(), 0.0), u2(g.points(), 0.0), u3(g.points(), 0.0) {}
  double tau = 0.0;
  std::vector<double> u1, u2, u3;
  int points() const { return static_cast<int>(u1.size()); }
};

// Mirror-image value of a component at index i (which may be -1 or -2);
// parity is -1 for u1, u2 and +1 for u3.
inline double ghost_value(const std::vector<double>& q, int i, double parity) {
  return i >= 0 ? q[i] : parity * q[-i];
}

// Ingoing/outgoing characteristic speeds {-1 - rho, 1 - rho}.
std::pair<double, double> characteristic_speeds(double rho);

// Spectral projectors {P_minus, P_plus} of the principal-part matrix,
// embedded 3x3 (the u1 row and column vanish).  They reconstruct the
// principal matrix as lambda_minus P_minus + lambda_plus P_plus and satisfy
// P^2 = P, P_minus P_plus = 0, P_minus + P_plus = identity on (u2, u3).
std::pair<Mat3, Mat3> characteristic_projectors(double rho);

struct SchemeConfig {
  // Builds the coupling table cos(2 f_n) at the grid nodes; the profile
  // must cover [0, 1 + drho] (see extend_beyond_lightcone).
  SchemeConfig(const Grid& g, const Profile& prof, double kappa = 0.25);
  Grid grid;
  double kappa;                // time step in units of drho
  std::vector<double> cos2f;   // at nodes 0 .. N+1 (node 0 unused)
  double growth_guard = 20.0;  // instability detector: max e-fold rate per tau
  double dtau() const { return kappa * grid.drho(); }
};

// Dirichlet part of the center condition: u1(0) = u2(0) = 0 (parity ghosts
// are implicit in the stencils).
void apply_center_bc(State& s);

// Right-hand side du/dtau of the semi-discrete system.
State spatial_operator(const State& s, const SchemeConfig& cfg);

// One two-stage step of size cfg.dtau(); re-imposes the center condition
// after each stage and throws numeric_error if the state norm grows faster
// than exp(growth_guard * dtau) in a single step (blow-up detector).
State step(State s, const SchemeConfig& cfg);

// March to tau_end (the last step is shortened to land on it exactly).
// The observer, when given, is called on the initial state, after every
// observe_stride-th step, and on the final state.
using Observer = std::function<void(const State&)>;
State evolve(State s, const SchemeConfig& cfg, double tau_end,
             int observe_stride = 0, const Observer& observer = {});

namespace detail {
// Allocation-free core used by the drivers above and by the filtered
// co-evolution loop.
void spatial_operator_into(const State& s, const SchemeConfig& cfg, State& du);
void heun_step_inplace(State& s, const SchemeConfig& cfg, double dt, State& k1,
                       State& k2, State& stage);
double quadrature_norm(const State& s, const SchemeConfig& cfg);
}  // namespace detail

}  // namespace wavemap
