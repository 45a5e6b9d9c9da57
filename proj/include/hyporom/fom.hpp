#pragma once

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "hyporom/balance_laws.hpp"
#include "hyporom/errors.hpp"

namespace hyporom {

/// What the sink sees after every accepted step (and once for the initial state).
struct StepInfo {
  double t;     // time of the state just produced
  double dt;    // step that produced it (0 for the initial state)
  int step;     // number of steps taken so far
  bool last;    // true once t == t_final
};

template <class State>
struct FomResult {
  State final_state;
  std::vector<double> dts;    // ordered step sizes, last one clamped
  std::vector<double> times;  // t^0 = 0, ..., t^{N} = t_final
};

/// Advances `initial` from t = 0 to t_final with CFL-limited steps, calling
/// sink(state, StepInfo) for the initial state and after every step. The last
/// step is shortened so the run ends exactly on t_final.
template <class Scheme, class Sink>
FomResult<typename Scheme::State> run_fom(const Scheme& scheme, typename Scheme::State initial,
                                          double t_final, double cfl, Sink&& sink) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) fail(ErrorCode::ConfigError, "t_final must be > 0");
  FomResult<typename Scheme::State> result{std::move(initial), {}, {0.0}};
  auto& state = result.final_state;
  double t = 0.0;
  int step = 0;
  sink(std::as_const(state), StepInfo{0.0, 0.0, 0, false});
  while (t < t_final) {
    try {
      double dt = cfl_dt(scheme, state, cfl);
      bool last = false;
      if (t + dt >= t_final * (1.0 - 1e-14)) {
        dt = t_final - t;
        last = true;
      }
      state = scheme.step(state, dt);
      t = last ? t_final : t + dt;
      ++step;
      result.dts.push_back(dt);
      result.times.push_back(t);
      sink(std::as_const(state), StepInfo{t, dt, step, last});
    } catch (const Error& e) {
      std::ostringstream ctx;
      ctx << "FOM step " << step << " at t=" << t;
      rethrow_with_context(e, ctx.str());
    }
  }
  return result;
}

template <class Scheme>
FomResult<typename Scheme::State> run_fom(const Scheme& scheme, typename Scheme::State initial,
                                          double t_final, double cfl) {
  return run_fom(scheme, std::move(initial), t_final, cfl, [](const auto&, const StepInfo&) {});
}

}  // namespace hyporom
