#pragma once

// Internal adaptive-integration helpers shared by the profile and mode
// solvers.  Wraps Boost.Odeint's controlled Cash-Karp 5(4) stepper so the
// public headers stay free of Boost types.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/numeric/odeint.hpp>

namespace wavemap::detail {

inline constexpr double kOdeAbsTol = 1e-12;
inline constexpr double kOdeRelTol = 1e-12;

// Integrate y' = sys(y, t) from t0 to t1 (either direction) and return the
// end state.
template <std::size_t Dim, class System>
std::array<double, Dim> integrate_to(System&& sys, std::array<double, Dim> y,
                                     double t0, double t1) {
  namespace ode = boost::numeric::odeint;
  using state_type = std::array<double, Dim>;
  if (t0 == t1) return y;
  const double dt0 = (t1 > t0 ? 1.0 : -1.0) * std::min(1e-3, std::abs(t1 - t0));
  auto stepper = ode::make_controlled<ode::runge_kutta_cash_karp54<state_type>>(
      kOdeAbsTol, kOdeRelTol);
  ode::integrate_adaptive(stepper, std::forward<System>(sys), y, t0, t1, dt0);
  return y;
}

// Integrate from t0 through a strictly monotone sequence of sample times
// (all on the far side of t0 in the direction of travel), invoking
// obs(y, t) at every sample.  Returns the state at the final sample.
template <std::size_t Dim, class System, class Obs>
std::array<double, Dim> integrate_sampled(System&& sys, std::array<double, Dim> y,
                                          double t0, const std::vector<double>& samples,
                                          Obs&& obs) {
  namespace ode = boost::numeric::odeint;
  using state_type = std::array<double, Dim>;
  if (samples.empty()) return y;
  std::vector<double> times;
  times.reserve(samples.size() + 1);
  times.push_back(t0);
  for (double t : samples)
    if (t != t0) times.push_back(t);
  const double dt0 = (times.back() > t0 ? 1.0 : -1.0) * std::min(1e-3, std::abs(times.back() - t0));
  auto stepper = ode::make_controlled<ode::runge_kutta_cash_karp54<state_type>>(
      kOdeAbsTol, kOdeRelTol);
  bool at_start = (samples.front() != t0);
  ode::integrate_times(stepper, std::forward<System>(sys), y,
                       times.begin(), times.end(), dt0,
                       [&](const state_type& s, double t) {
                         if (at_start) {
                           at_start = false;  // skip the departure point
                           return;
                         }
                         obs(s, t);
                       });
  return y;
}

}  // namespace wavemap::detail
