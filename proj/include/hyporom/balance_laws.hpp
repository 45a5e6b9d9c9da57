#pragma once

// First-order exactly well-balanced finite-volume schemes for three 1D
// balance laws:
//   transport  w_t + c w_x = alpha w
//   Burgers    w_t + (w^2/2)_x = alpha w^2
//   shallow water with bathymetry z(x) and Manning friction n_b.
//
// Ghost cells extrapolate with the local equilibrium through the boundary
// cell (w_0 = w_1 * exp(-rate*dx), w_{N+1} = w_N * exp(rate*dx) for the
// scalar laws; h, q and z replicated for shallow water). For alpha = 0 this is
// plain zero-gradient extrapolation, and it keeps every discrete stationary
// profile an exact fixed point including the two boundary cells. The
// reconstruction jump across a boundary interface is therefore zero, and the
// scalar schemes use that zero directly rather than forming it from rounded
// ghost values. Their interface jumps are formed in extended precision: in
// double, the rounded factors exp(+-rate dx/2) shift the discrete
// equilibrium by about one ulp per cell.
//
// Each cell update adds the summed increment to the old value in one
// operation, so an increment at rounding level leaves the cell unchanged.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <variant>

#include "hyporom/errors.hpp"
#include "hyporom/grid.hpp"

namespace hyporom {

enum class FluxKind { ModifiedLaxFriedrichs, Rusanov, LaxFriedrichs, Hll };

inline std::string_view to_string(FluxKind f) {
  switch (f) {
    case FluxKind::ModifiedLaxFriedrichs: return "modified-lf";
    case FluxKind::Rusanov: return "rusanov";
    case FluxKind::LaxFriedrichs: return "lf";
    case FluxKind::Hll: return "hll";
  }
  return "?";
}

struct TransportParams {
  double c = 1.0;
  double alpha = 0.0;
  double nu = 0.9;
};

struct BurgersParams {
  double alpha = 0.0;
  double nu = 0.9;
};

struct SweParams {
  double g = 9.81;
  double n_b = 0.0;
  double nu = 0.9;
  std::function<double(double)> bathymetry = [](double) { return 0.0; };
};

struct SweState {
  Vector h;
  Vector q;

  int size() const { return static_cast<int>(h.size()); }
  Vector velocity() const { return q.cwiseQuotient(h); }
};

inline void validate_nu(double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) fail(ErrorCode::ConfigError, "nu must lie in (0, 1]");
}

// ---------------------------------------------------------------------------
// Interface helpers shared by the shallow-water schemes and the reduced models.

struct RoeAverage {
  double h;
  double u;
};

inline RoeAverage roe_averages(double h_l, double h_r, double u_l, double u_r) {
  if (!(h_l > 0.0) || !(h_r > 0.0)) {
    fail(ErrorCode::NonPositiveDepth, "Roe average needs positive depths");
  }
  const double sl = std::sqrt(h_l);
  const double sr = std::sqrt(h_r);
  return {0.5 * (h_l + h_r), (sr * u_r + sl * u_l) / (sr + sl)};
}

struct HllCoefficients {
  double alpha0;
  double alpha1;
};

/// Degree-one viscosity polynomial p(x) = alpha0 + alpha1 x of the HLL flux.
inline HllCoefficients hll_coeffs(double s_l, double s_r) {
  const double width = s_r - s_l;
  const double scale = std::max({1.0, std::abs(s_l), std::abs(s_r)});
  if (!(width >= 1e-12 * scale)) {
    fail(ErrorCode::DegenerateWaveFan,
         "S_R - S_L = " + std::to_string(width) + " is below the separation threshold");
  }
  return {(s_r * std::abs(s_l) - s_l * std::abs(s_r)) / width,
          (std::abs(s_r) - std::abs(s_l)) / width};
}

/// Davis-type bounds built from the two cell states and their Roe average.
inline std::pair<double, double> wave_speed_bounds(double h_l, double q_l, double h_r, double q_r,
                                                   double g) {
  const double u_l = q_l / h_l;
  const double u_r = q_r / h_r;
  const RoeAverage roe = roe_averages(h_l, h_r, u_l, u_r);
  const double c_l = std::sqrt(g * h_l);
  const double c_r = std::sqrt(g * h_r);
  const double c_t = std::sqrt(g * roe.h);
  return {std::min(u_l - c_l, roe.u - c_t), std::max(u_r + c_r, roe.u + c_t)};
}

/// HLL data at the N+1 interfaces, boundary interfaces built from replicated
/// ghost cells.
struct HllInterfaces {
  Vector alpha0;
  Vector alpha1;
  Vector utilde;
  Vector htilde;
};

/// HLL quantities at one interface between cells (h_l, q_l) and (h_r, q_r).
struct HllInterfaceValue {
  double alpha0;
  double alpha1;
  double utilde;
  double htilde;
};

inline HllInterfaceValue hll_interface_value(double h_l, double q_l, double h_r, double q_r,
                                             double g) {
  const auto [s_l, s_r] = wave_speed_bounds(h_l, q_l, h_r, q_r, g);
  const HllCoefficients a = hll_coeffs(s_l, s_r);
  const RoeAverage roe = roe_averages(h_l, h_r, q_l / h_l, q_r / h_r);
  return {a.alpha0, a.alpha1, roe.u, roe.h};
}

inline HllInterfaces hll_interfaces(const SweState& s, double g) {
  const int n = s.size();
  HllInterfaces out{Vector(n + 1), Vector(n + 1), Vector(n + 1), Vector(n + 1)};
  for (int j = 0; j <= n; ++j) {
    const int l = std::max(j - 1, 0);
    const int r = std::min(j, n - 1);
    const HllInterfaceValue v = hll_interface_value(s.h[l], s.q[l], s.h[r], s.q[r], g);
    out.alpha0[j] = v.alpha0;
    out.alpha1[j] = v.alpha1;
    out.utilde[j] = v.utilde;
    out.htilde[j] = v.htilde;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalar laws.

/// Transport with linear source. Only PVM-0 fluxes apply.
class TransportScheme {
 public:
  using State = Vector;

  TransportScheme(TransportParams params, Grid1D grid, FluxKind flux = FluxKind::ModifiedLaxFriedrichs)
      : params_(params), grid_(grid), flux_(flux) {
    if (params_.c == 0.0) fail(ErrorCode::ConfigError, "transport speed c must be non-zero");
    if (flux_ == FluxKind::Hll) fail(ErrorCode::ConfigError, "HLL flux applies to shallow water only");
    validate_nu(params_.nu);
  }

  const TransportParams& params() const { return params_; }
  const Grid1D& grid() const { return grid_; }
  FluxKind flux() const { return flux_; }

  /// Exponent rate of the stationary profile w* ~ exp(rate x).
  double equilibrium_rate() const { return params_.alpha / params_.c; }
  double ghost_left_factor() const { return std::exp(-equilibrium_rate() * grid_.dx()); }
  double ghost_right_factor() const { return std::exp(equilibrium_rate() * grid_.dx()); }

  double max_wave_speed(const Vector&) const { return std::abs(params_.c); }

  Vector step(const Vector& w, double dt) const {
    require_finite(w, "transport state");
    const int n = static_cast<int>(w.size());
    const long double lam = dt / grid_.dx();
    const long double c = params_.c;
    const long double ep = std::exp(0.5L * equilibrium_rate() * grid_.dx());
    const long double em = 1.0L / ep;
    const long double visc = viscosity(dt);

    Vector out(n);
    for (int i = 0; i < n; ++i) {
      // Reconstruction jumps across the right and left interfaces; the flux
      // difference minus the source is -(c/2)(jump_r + jump_l).
      const long double wi = w[i];
      const long double jump_r = i < n - 1 ? w[i + 1] * em - wi * ep : 0.0L;
      const long double jump_l = i > 0 ? wi * em - w[i - 1] * ep : 0.0L;
      out[i] = w[i] + static_cast<double>(-0.5L * lam * c * (jump_r + jump_l) + 0.5L * lam * visc * (jump_r - jump_l));
    }
    require_finite(out, "transport update");
    return out;
  }

 private:
  double viscosity(double dt) const {
    switch (flux_) {
      case FluxKind::LaxFriedrichs: return grid_.dx() / dt;
      case FluxKind::Rusanov: return std::abs(params_.c);
      default: return params_.nu * grid_.dx() / dt;
    }
  }

  TransportParams params_;
  Grid1D grid_;
  FluxKind flux_;
};

/// Burgers with quadratic source.
class BurgersScheme {
 public:
  using State = Vector;

  BurgersScheme(BurgersParams params, Grid1D grid, FluxKind flux = FluxKind::ModifiedLaxFriedrichs)
      : params_(params), grid_(grid), flux_(flux) {
    if (flux_ == FluxKind::Hll) fail(ErrorCode::ConfigError, "HLL flux applies to shallow water only");
    validate_nu(params_.nu);
  }

  const BurgersParams& params() const { return params_; }
  const Grid1D& grid() const { return grid_; }
  FluxKind flux() const { return flux_; }

  double equilibrium_rate() const { return params_.alpha; }
  double ghost_left_factor() const { return std::exp(-params_.alpha * grid_.dx()); }
  double ghost_right_factor() const { return std::exp(params_.alpha * grid_.dx()); }

  double max_wave_speed(const Vector& w) const { return w.cwiseAbs().maxCoeff(); }

  Vector step(const Vector& w, double dt) const {
    require_finite(w, "Burgers state");
    const int n = static_cast<int>(w.size());
    const long double lam = dt / grid_.dx();
    const long double big_p = std::exp(static_cast<long double>(params_.alpha) * grid_.dx());
    const long double big_m = 1.0L / big_p;
    const long double ep = std::exp(0.5L * params_.alpha * grid_.dx());
    const long double em = 1.0L / ep;

    Vector out(n);
    for (int i = 0; i < n; ++i) {
      // Flux difference minus source, written through the squared
      // reconstruction jumps: -(1/4)(sq_r + sq_l).
      const long double wi = w[i];
      long double sq_r = 0.0L, sq_l = 0.0L, diff = 0.0L;
      if (i < n - 1) {
        const long double wp = w[i + 1];
        sq_r = wp * wp * big_m - wi * wi * big_p;
        diff += viscosity(dt, w[i], w[i + 1]) * (wp * em - wi * ep);
      }
      if (i > 0) {
        const long double wm = w[i - 1];
        sq_l = wi * wi * big_m - wm * wm * big_p;
        diff -= viscosity(dt, w[i - 1], w[i]) * (wi * em - wm * ep);
      }
      out[i] = w[i] + static_cast<double>(-0.25L * lam * (sq_r + sq_l) + 0.5L * lam * diff);
    }
    require_finite(out, "Burgers update");
    return out;
  }

 private:
  double viscosity(double dt, double a, double b) const {
    switch (flux_) {
      case FluxKind::LaxFriedrichs: return grid_.dx() / dt;
      case FluxKind::Rusanov: return std::max(std::abs(a), std::abs(b));
      default: return params_.nu * grid_.dx() / dt;
    }
  }

  BurgersParams params_;
  Grid1D grid_;
  FluxKind flux_;
};

// ---------------------------------------------------------------------------
// Shallow water.

class SweScheme {
 public:
  using State = SweState;

  SweScheme(SweParams params, Grid1D grid, FluxKind flux = FluxKind::ModifiedLaxFriedrichs)
      : params_(std::move(params)), grid_(grid), flux_(flux) {
    if (!(params_.g > 0.0)) fail(ErrorCode::ConfigError, "gravity must be positive");
    if (!(params_.n_b >= 0.0)) fail(ErrorCode::ConfigError, "Manning coefficient must be >= 0");
    validate_nu(params_.nu);
    z_ = grid_.sample(params_.bathymetry);
  }

  const SweParams& params() const { return params_; }
  const Grid1D& grid() const { return grid_; }
  FluxKind flux() const { return flux_; }
  const Vector& bathymetry() const { return z_; }

  /// Same scheme with a different Manning coefficient (bathymetry is reused).
  SweScheme with_friction(double n_b) const {
    SweScheme copy = *this;
    if (!(n_b >= 0.0)) fail(ErrorCode::ConfigError, "Manning coefficient must be >= 0");
    copy.params_.n_b = n_b;
    return copy;
  }

  double max_wave_speed(const SweState& s) const {
    check_depth(s.h, "shallow-water state");
    double m = 0.0;
    for (int i = 0; i < s.size(); ++i) {
      const double u = s.q[i] / s.h[i];
      const double c = std::sqrt(params_.g * s.h[i]);
      m = std::max(m, std::abs(u) + c);
    }
    return m;
  }

  Vector froude(const SweState& s) const {
    Vector fr(s.size());
    for (int i = 0; i < s.size(); ++i) fr[i] = std::abs(s.q[i] / s.h[i]) / std::sqrt(params_.g * s.h[i]);
    return fr;
  }

  SweState step(const SweState& s, double dt) const {
    require_finite(s.h, "depth");
    require_finite(s.q, "discharge");
    check_depth(s.h, "shallow-water state");
    SweState out = flux_ == FluxKind::Hll ? step_hll(s, dt) : step_pvm0(s, dt);
    require_finite(out.h, "depth update");
    require_finite(out.q, "discharge update");
    check_depth(out.h, "shallow-water update");
    return out;
  }

 private:
  static void check_depth(const Vector& h, const char* what) {
    for (int i = 0; i < h.size(); ++i) {
      if (!(h[i] > 0.0)) {
        fail(ErrorCode::NonPositiveDepth,
             std::string(what) + ": h[" + std::to_string(i) + "] = " + std::to_string(h[i]));
      }
    }
  }

  double friction(double h, double q) const {
    if (params_.n_b == 0.0) return 0.0;
    return params_.g * params_.n_b * params_.n_b * q * std::abs(q) / std::pow(h, 7.0 / 3.0);
  }

  double pvm0_viscosity(double dt, const SweState& s, int l, int r) const {
    switch (flux_) {
      case FluxKind::LaxFriedrichs: return grid_.dx() / dt;
      case FluxKind::Rusanov: {
        const double sl = std::abs(s.q[l] / s.h[l]) + std::sqrt(params_.g * s.h[l]);
        const double sr = std::abs(s.q[r] / s.h[r]) + std::sqrt(params_.g * s.h[r]);
        return std::max(sl, sr);
      }
      default: return params_.nu * grid_.dx() / dt;
    }
  }

  // The pressure gradient and the segment-path bed-slope term are combined as
  // (g/2) * (h_{i+1} + h_i) * (eta_{i+1} - eta_i) + ..., which is algebraically
  // the sum of the two and vanishes exactly when eta is constant.
  SweState step_pvm0(const SweState& s, double dt) const {
    const int n = s.size();
    const double lam = dt / grid_.dx();
    const double g = params_.g;
    const auto& h = s.h;
    const auto& q = s.q;

    Vector alpha0(n + 1);
    for (int j = 0; j <= n; ++j) alpha0[j] = pvm0_viscosity(dt, s, std::max(j - 1, 0), std::min(j, n - 1));

    SweState out{Vector(n), Vector(n)};
    for (int i = 0; i < n; ++i) {
      const int im = std::max(i - 1, 0);
      const int ip = std::min(i + 1, n - 1);
      const double eta_m = h[im] + z_[im];
      const double eta_i = h[i] + z_[i];
      const double eta_p = h[ip] + z_[ip];
      const double a_l = alpha0[i];
      const double a_r = alpha0[i + 1];

      out.h[i] = h[i] + (-0.5 * lam * (q[ip] - q[im]) + 0.5 * lam * (a_r * (eta_p - eta_i) - a_l * (eta_i - eta_m)));

      const double conv = q[ip] * q[ip] / h[ip] - q[im] * q[im] / h[im];
      const double hydro = (h[ip] + h[i]) * (eta_p - eta_i) + (h[i] + h[im]) * (eta_i - eta_m);
      out.q[i] = q[i] + (-0.5 * lam * conv - 0.25 * g * lam * hydro +
                         0.5 * lam * (a_r * (q[ip] - q[i]) - a_l * (q[i] - q[im])) - dt * friction(h[i], q[i]));
    }
    return out;
  }

  SweState step_hll(const SweState& s, double dt) const {
    const int n = s.size();
    const double lam = dt / grid_.dx();
    const double g = params_.g;
    const auto& h = s.h;
    const auto& q = s.q;
    const HllInterfaces itf = hll_interfaces(s, g);

    SweState out{Vector(n), Vector(n)};
    for (int i = 0; i < n; ++i) {
      const int im = std::max(i - 1, 0);
      const int ip = std::min(i + 1, n - 1);
      const double eta_m = h[im] + z_[im];
      const double eta_i = h[i] + z_[i];
      const double eta_p = h[ip] + z_[ip];
      const double deta_r = eta_p - eta_i;
      const double deta_l = eta_i - eta_m;
      const double dq_r = q[ip] - q[i];
      const double dq_l = q[i] - q[im];
      const double a0_l = itf.alpha0[i], a0_r = itf.alpha0[i + 1];
      const double a1_l = itf.alpha1[i], a1_r = itf.alpha1[i + 1];
      const double ut_l = itf.utilde[i], ut_r = itf.utilde[i + 1];
      const double kappa_l = -ut_l * ut_l + g * itf.htilde[i];
      const double kappa_r = -ut_r * ut_r + g * itf.htilde[i + 1];

      out.h[i] = h[i] + (-0.5 * lam * (q[ip] - q[im]) + 0.5 * lam * (a0_r * deta_r - a0_l * deta_l) +
                         0.5 * lam * (a1_r * dq_r - a1_l * dq_l));

      const double conv = q[ip] * q[ip] / h[ip] - q[im] * q[im] / h[im];
      const double hydro = (h[ip] + h[i]) * deta_r + (h[i] + h[im]) * deta_l;
      out.q[i] = q[i] + (-0.5 * lam * conv - 0.25 * g * lam * hydro +
                         0.5 * lam * (a1_r * kappa_r * deta_r - a1_l * kappa_l * deta_l) +
                         0.5 * lam * (a0_r * dq_r - a0_l * dq_l) + lam * (a1_r * ut_r * dq_r - a1_l * ut_l * dq_l) -
                         dt * friction(h[i], q[i]));
    }
    return out;
  }

  SweParams params_;
  Grid1D grid_;
  FluxKind flux_;
  Vector z_;
};

// ---------------------------------------------------------------------------
// Free-function entry points.

/// Delta t = cfl * dx / max |lambda|.
template <class Scheme>
double cfl_dt(const Scheme& scheme, const typename Scheme::State& state, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) fail(ErrorCode::ConfigError, "cfl must lie in (0, 1]");
  if constexpr (std::is_same_v<typename Scheme::State, SweState>) {
    require_finite(state.h, "depth");
    require_finite(state.q, "discharge");
  } else {
    require_finite(state, "state");
  }
  const double speed = scheme.max_wave_speed(state);
  if (!(speed >= 1e-300)) fail(ErrorCode::ZeroWaveSpeed, "maximum wave speed is zero");
  return cfl * scheme.grid().dx() / speed;
}

inline Vector transport_step(const Vector& w, const TransportParams& p, const Grid1D& grid, double dt) {
  return TransportScheme(p, grid).step(w, dt);
}

inline Vector burgers_step(const Vector& w, const BurgersParams& p, const Grid1D& grid, double dt) {
  return BurgersScheme(p, grid).step(w, dt);
}

inline SweState swe_lf_step(const SweState& s, const SweParams& p, const Grid1D& grid, double dt) {
  return SweScheme(p, grid, FluxKind::ModifiedLaxFriedrichs).step(s, dt);
}

inline SweState swe_hll_step(const SweState& s, const SweParams& p, const Grid1D& grid, double dt) {
  return SweScheme(p, grid, FluxKind::Hll).step(s, dt);
}

// ---------------------------------------------------------------------------
// Stationary profiles.

enum class StationaryFamily { Transport, Burgers, SweRest, SweMoving };

using SystemParams = std::variant<TransportParams, BurgersParams, SweParams>;

/// Value at x of the stationary solution through (anchor_x, anchor_value).
/// For water at rest the anchor value is the free-surface level and the
/// result is the depth eta - z(x).
inline double stationary_profile(StationaryFamily family, const SystemParams& params,
                                 double anchor_value, double anchor_x, double x) {
  switch (family) {
    case StationaryFamily::Transport:
      if (const auto* p = std::get_if<TransportParams>(&params)) {
        return anchor_value * std::exp(p->alpha / p->c * (x - anchor_x));
      }
      break;
    case StationaryFamily::Burgers:
      if (const auto* p = std::get_if<BurgersParams>(&params)) {
        return anchor_value * std::exp(p->alpha * (x - anchor_x));
      }
      break;
    case StationaryFamily::SweRest:
      if (const auto* p = std::get_if<SweParams>(&params)) return anchor_value - p->bathymetry(x);
      break;
    case StationaryFamily::SweMoving:
      fail(ErrorCode::UnsupportedSystem, "moving-water equilibria are not provided");
  }
  fail(ErrorCode::UnsupportedSystem, "parameters do not match the requested stationary family");
}

}  // namespace hyporom
