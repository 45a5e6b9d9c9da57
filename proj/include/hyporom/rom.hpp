#pragma once

// Reduced models: offline construction from snapshots (bases, window means,
// DEIM interpolants, operators per time window) and online stepping.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hyporom/balance_laws.hpp"
#include "hyporom/deim.hpp"
#include "hyporom/errors.hpp"
#include "hyporom/pod.hpp"
#include "hyporom/rom_operators.hpp"
#include "hyporom/snapshots.hpp"

namespace hyporom {

// ---------------------------------------------------------------------------
// Single reduced steps.

/// w' = w - (c dt / 2dx) A w + (nu/2) B w + (c dt / dx) C w. The
/// increment is summed before it is added, so a vanishing increment leaves
/// the state bit-for-bit unchanged.
inline Vector rom_transport_step(const Vector& w, const RomOperators& ops, double dt) {
  const double lam = dt / ops.scalar("dx");
  const double c = ops.scalar("c");
  const double visc_speed = ops.scalar("visc_speed");
  const double diffusion = visc_speed > 0.0 ? 0.5 * lam * visc_speed : 0.5 * ops.scalar("nu");
  const Vector increment = -0.5 * c * lam * (ops.matrix("A") * w) + diffusion * (ops.matrix("B") * w) +
                           c * lam * (ops.matrix("C") * w);
  return w + increment;
}

/// w' = w - (dt / 4dx) w^T A w + (nu/2) B w + (dt / 2dx) w^T C w.
inline Vector rom_burgers_step(const Vector& w, const RomOperators& ops, double dt) {
  const double lam = dt / ops.scalar("dx");
  const Vector increment = -0.25 * lam * ops.tensor("A").contract(w, w) +
                           0.5 * ops.scalar("nu") * (ops.matrix("B") * w) +
                           0.5 * lam * ops.tensor("C").contract(w, w);
  return w + increment;
}

struct SweCoefficients {
  Vector h;
  Vector q;
};

/// Coefficients of the auxiliary fields for the current step. Entries a
/// treatment does not use are left empty.
struct SweAuxCoefficients {
  Vector u;
  Vector f;
  Vector alpha0;
  Vector alpha1;
};

namespace detail {

inline Vector swe_friction(const RomOperators& ops, const SweCoefficients& s, const SweAuxCoefficients& aux) {
  const double n_b = ops.scalar("n_b");
  if (n_b == 0.0) return Vector::Zero(s.q.size());
  const double k = ops.scalar("g") * n_b * n_b;
  switch (ops.linearization) {
    case Linearization::AllTimeAveraging: return k * ops.vector("H");
    case Linearization::DeimUTavF: return k * (ops.matrix("H") * s.q);
    case Linearization::DeimUDeimF: return k * ops.tensor("H").contract(s.q, aux.f);
  }
  return Vector::Zero(s.q.size());
}

inline const Vector& convective_velocity(const RomOperators& ops, const SweAuxCoefficients& aux) {
  return ops.linearization == Linearization::AllTimeAveraging ? ops.vector("u_hat") : aux.u;
}

/// Momentum increment terms shared by both fluxes.
inline Vector swe_q_common(const RomOperators& ops, const SweCoefficients& s, const SweAuxCoefficients& aux,
                           double dt) {
  const double lam = dt / ops.scalar("dx");
  const double g = ops.scalar("g");
  return -0.5 * lam * ops.tensor("D").contract(convective_velocity(ops, aux), s.q) -
         0.25 * g * lam * ops.tensor("E").contract(s.h, s.h) - 0.25 * g * lam * (ops.matrix("G") * s.h) -
         dt * swe_friction(ops, s, aux);
}

}  // namespace detail

inline SweCoefficients rom_swe_lf_step(const SweCoefficients& s, const RomOperators& ops, double dt,
                                       const SweAuxCoefficients& aux = {}) {
  const double lam = dt / ops.scalar("dx");
  const double half_nu = 0.5 * ops.scalar("nu");
  SweCoefficients out;
  const Vector dh = -0.5 * lam * (ops.matrix("A") * s.q) + half_nu * (ops.matrix("B") * s.h + ops.vector("C"));
  const Vector dq = detail::swe_q_common(ops, s, aux, dt) + half_nu * (ops.matrix("F") * s.q);
  out.h = s.h + dh;
  out.q = s.q + dq;
  return out;
}

inline SweCoefficients rom_swe_hll_step(const SweCoefficients& s, const RomOperators& ops, double dt,
                                        const SweAuxCoefficients& aux = {}) {
  const double lam = dt / ops.scalar("dx");
  Vector m_h, m_q;
  if (ops.coefficients == CoeffTreatment::Deim) {
    const auto& a0 = aux.alpha0;
    const auto& a1 = aux.alpha1;
    m_h = ops.tensor("U1").contract(a0, s.h) + ops.tensor("U2").contract(a1, s.q) + ops.matrix("U3") * a0;
    m_q = ops.tensor("U4").contract(a1, s.h) + ops.tensor("U5").contract(a0, s.q) +
          ops.tensor("U6").contract(a1, s.q) + ops.matrix("U7") * a1;
  } else {
    m_h = ops.matrix("U1") * s.h + ops.matrix("U2") * s.q + ops.vector("U3");
    m_q = ops.matrix("U4") * s.h + ops.matrix("U5") * s.q + ops.matrix("U6") * s.q + ops.vector("U7");
  }
  SweCoefficients out;
  const Vector dh = -0.5 * lam * (ops.matrix("A") * s.q) + 0.5 * lam * m_h;
  const Vector dq = detail::swe_q_common(ops, s, aux, dt) + 0.5 * lam * m_q;
  out.h = s.h + dh;
  out.q = s.q + dq;
  return out;
}

// ---------------------------------------------------------------------------
// Offline construction.

struct RomOptions {
  double eps_pod = 1e-10;
  std::optional<int> mode_cap;
  int n_windows = 1;
  Linearization linearization = Linearization::DeimUDeimF;
  CoeffTreatment coefficients = CoeffTreatment::Deim;
  bool unify_modes = true;
  /// Run whose snapshot times define the window boundaries.
  int reference_run = 0;
  /// Singular values at or below this count as zero, per variable.
  std::map<std::string, double> absolute_floor;
};

struct WindowModel {
  int index = 0;
  double t_end = std::numeric_limits<double>::infinity();
  int n_modes = 0;
  std::map<std::string, int> requested_modes;  // energy-criterion count per variable
  std::map<std::string, PodBasis> bases;
  std::map<std::string, DeimInterpolant> interpolants;
  std::map<std::string, Matrix> point_rows;    // mode rows at the DEIM points
  std::map<std::string, Matrix> transfer_in;   // from window index-1, per state variable
  RomOperators ops;
};

struct ReducedModel {
  RomSystem system = RomSystem::Transport;
  int n_cells = 0;
  double g = 9.81;
  std::vector<std::string> state_variables;
  std::vector<WindowModel> windows;

  /// Window that advances a state at time t: the first one whose last
  /// snapshot time lies after t. A state sitting on a window's last snapshot
  /// is handed to the next window before it is stepped.
  int window_for_time(double t) const {
    for (std::size_t v = 0; v + 1 < windows.size(); ++v) {
      if (t < windows[v].t_end) return static_cast<int>(v);
    }
    return static_cast<int>(windows.size()) - 1;
  }

  int max_modes() const {
    int m = 0;
    for (const auto& w : windows) m = std::max(m, w.n_modes);
    return m;
  }
};

namespace detail {

struct TrainingSlices {
  std::vector<WindowPartition> partitions;
  int reference = 0;
};

inline TrainingSlices partition_runs(std::span<const SnapshotSet> runs, const std::string& any_var, int n_windows,
                                     int reference) {
  if (runs.empty()) fail(ErrorCode::EmptySlice, "no training runs");
  if (reference < 0 || reference >= static_cast<int>(runs.size())) {
    fail(ErrorCode::ConfigError, "reference run index out of range");
  }
  TrainingSlices t;
  t.reference = reference;
  for (const auto& run : runs) {
    const auto it = run.find(any_var);
    if (it == run.end()) fail(ErrorCode::MissingAuxBasis, "training run lacks snapshots of '" + any_var + "'");
    t.partitions.push_back(partition_uniform(it->second.n_cols(), n_windows));
  }
  return t;
}

/// Window-v columns of every run, side by side.
inline Matrix window_slice(std::span<const SnapshotSet> runs, const TrainingSlices& t, const std::string& var,
                           int v) {
  Eigen::Index cols = 0;
  Eigen::Index rows = -1;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto it = runs[r].find(var);
    if (it == runs[r].end()) fail(ErrorCode::MissingAuxBasis, "no snapshots recorded for '" + var + "'");
    if (rows >= 0 && it->second.n_rows() != rows) fail(ErrorCode::ShapeMismatch, "runs differ in size of " + var);
    if (it->second.n_cols() != t.partitions[r].ranges.back().end) {
      fail(ErrorCode::ShapeMismatch, "'" + var + "' has a different column count than the state snapshots");
    }
    rows = it->second.n_rows();
    cols += t.partitions[r].ranges[v].size();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const ColumnRange range = t.partitions[r].ranges[v];
    out.middleCols(c, range.size()) = runs[r].at(var).data.middleCols(range.begin, range.size());
    c += range.size();
  }
  return out;
}

inline double window_end_time(std::span<const SnapshotSet> runs, const TrainingSlices& t, const std::string& var,
                              int v) {
  const auto& m = runs[t.reference].at(var);
  return m.times[t.partitions[t.reference].ranges[v].end - 1];
}

struct VariablePlan {
  std::vector<std::string> basis_vars;    // bases entering the operators
  std::vector<std::string> deim_vars;     // bases that also get interpolants
  std::vector<std::string> average_vars;  // window means needed
};

inline VariablePlan plan_variables(RomSystem system, const RomOptions& o) {
  VariablePlan p;
  if (system == RomSystem::Transport || system == RomSystem::Burgers) {
    p.basis_vars = {"w"};
    return p;
  }
  p.basis_vars = {"h", "q", "u"};
  switch (o.linearization) {
    case Linearization::AllTimeAveraging: p.average_vars = {"h", "u"}; break;
    case Linearization::DeimUTavF:
      p.deim_vars = {"u"};
      p.average_vars = {"h", "u"};
      break;
    case Linearization::DeimUDeimF:
      p.basis_vars.push_back("f");
      p.deim_vars = {"u", "f"};
      break;
  }
  if (system == RomSystem::SweHLL) {
    p.average_vars.push_back("utilde");
    p.average_vars.push_back("htilde");
    if (o.coefficients == CoeffTreatment::Deim) {
      p.basis_vars.push_back("alpha0");
      p.basis_vars.push_back("alpha1");
      p.deim_vars.push_back("alpha0");
      p.deim_vars.push_back("alpha1");
    } else {
      p.average_vars.push_back("alpha0");
      p.average_vars.push_back("alpha1");
    }
  }
  return p;
}

/// Bases for every planned variable of one window, sharing M when requested.
inline void build_window_bases(WindowModel& w, std::span<const SnapshotSet> runs, const TrainingSlices& t,
                               const VariablePlan& plan, const RomOptions& o) {
  std::map<std::string, PodDecomposition> dec;
  int m = 0;
  for (const auto& var : plan.basis_vars) {
    const auto floor_it = o.absolute_floor.find(var);
    const double floor = floor_it == o.absolute_floor.end() ? 0.0 : floor_it->second;
    PodDecomposition d = decompose(window_slice(runs, t, var, w.index), floor);
    const int req = required_modes(d, o.eps_pod, o.mode_cap);
    w.requested_modes[var] = req;
    m = std::max(m, req);
    dec.emplace(var, std::move(d));
  }
  w.n_modes = m;
  for (const auto& var : plan.basis_vars) {
    const int mv = o.unify_modes ? m : w.requested_modes[var];
    w.bases.emplace(var, basis_from(dec.at(var), mv, var, w.index, o.eps_pod));
  }
}

inline Matrix rows_at(const Matrix& modes, const std::vector<int>& rows) {
  Matrix out(rows.size(), modes.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(r) = modes.row(rows[r]);
  return out;
}

/// DEIM interpolants plus the h/q mode rows needed to evaluate each auxiliary
/// at its points: cells for u and f, left/right cells of each interface for
/// the HLL coefficients.
inline void build_window_interpolants(WindowModel& w, const VariablePlan& plan, int n_cells) {
  const Matrix& mh = w.bases.at("h").modes;
  const Matrix& mq = w.bases.at("q").modes;
  for (const auto& var : plan.deim_vars) {
    DeimInterpolant d = deim_offline(w.bases.at(var).modes);
    if (var == "u" || var == "f") {
      w.point_rows[var + ".h"] = rows_at(mh, d.indices);
      w.point_rows[var + ".q"] = rows_at(mq, d.indices);
    } else {
      std::vector<int> left, right;
      for (const int j : d.indices) {
        left.push_back(std::max(j - 1, 0));
        right.push_back(std::min(j, n_cells - 1));
      }
      w.point_rows[var + ".hl"] = rows_at(mh, left);
      w.point_rows[var + ".ql"] = rows_at(mq, left);
      w.point_rows[var + ".hr"] = rows_at(mh, right);
      w.point_rows[var + ".qr"] = rows_at(mq, right);
    }
    w.interpolants.emplace(var, std::move(d));
  }
}

inline void build_transfers(ReducedModel& model) {
  for (std::size_t v = 1; v < model.windows.size(); ++v) {
    for (const auto& var : model.state_variables) {
      model.windows[v].transfer_in[var] =
          transfer_matrix(model.windows[v - 1].bases.at(var), model.windows[v].bases.at(var));
    }
  }
}

template <class AssembleWindow>
ReducedModel build_model(RomSystem system, int n_cells, std::vector<std::string> state_vars,
                         std::span<const SnapshotSet> runs, const RomOptions& o, AssembleWindow&& assemble) {
  if (o.n_windows < 1) fail(ErrorCode::ConfigError, "number of windows must be >= 1");
  ReducedModel model;
  model.system = system;
  model.n_cells = n_cells;
  model.state_variables = std::move(state_vars);
  const VariablePlan plan = plan_variables(system, o);
  const TrainingSlices t = partition_runs(runs, model.state_variables.front(), o.n_windows, o.reference_run);
  for (int v = 0; v < o.n_windows; ++v) {
    try {
      WindowModel w;
      w.index = v;
      if (v + 1 < o.n_windows) w.t_end = window_end_time(runs, t, model.state_variables.front(), v);
      build_window_bases(w, runs, t, plan, o);
      std::map<std::string, Vector> averages;
      for (const auto& var : plan.average_vars) averages[var] = time_average(window_slice(runs, t, var, v));
      if (!plan.deim_vars.empty()) build_window_interpolants(w, plan, n_cells);
      w.ops = assemble(w, averages);
      w.ops.window_index = v;
      model.windows.push_back(std::move(w));
    } catch (const Error& e) {
      rethrow_with_context(e, "window " + std::to_string(v));
    }
  }
  build_transfers(model);
  return model;
}

inline SweAverages to_swe_averages(const std::map<std::string, Vector>& a) {
  SweAverages out;
  const auto get = [&](const char* k) {
    const auto it = a.find(k);
    return it == a.end() ? Vector() : it->second;
  };
  out.h = get("h");
  out.u = get("u");
  out.alpha0 = get("alpha0");
  out.alpha1 = get("alpha1");
  out.utilde = get("utilde");
  out.htilde = get("htilde");
  return out;
}

inline SweBases to_swe_bases(const WindowModel& w) {
  SweBases b;
  const auto get = [&](const char* k) {
    const auto it = w.bases.find(k);
    return it == w.bases.end() ? Matrix() : it->second.modes;
  };
  b.h = get("h");
  b.q = get("q");
  b.u = get("u");
  b.f = get("f");
  b.alpha0 = get("alpha0");
  b.alpha1 = get("alpha1");
  return b;
}

}  // namespace detail

inline ReducedModel build_reduced_model(const TransportScheme& scheme, std::span<const SnapshotSet> runs,
                                        const RomOptions& o) {
  return detail::build_model(RomSystem::Transport, scheme.grid().n_cells(), {"w"}, runs, o,
                             [&](const WindowModel& w, const auto&) {
                               return assemble_transport_rom(w.bases.at("w").modes, scheme);
                             });
}

inline ReducedModel build_reduced_model(const BurgersScheme& scheme, std::span<const SnapshotSet> runs,
                                        const RomOptions& o) {
  return detail::build_model(RomSystem::Burgers, scheme.grid().n_cells(), {"w"}, runs, o,
                             [&](const WindowModel& w, const auto&) {
                               return assemble_burgers_rom(w.bases.at("w").modes, scheme);
                             });
}

/// The scheme supplies flux, bathymetry, g and the Manning coefficient used
/// online, which need not match the coefficients of the training runs.
inline ReducedModel build_reduced_model(const SweScheme& scheme, std::span<const SnapshotSet> runs,
                                        const RomOptions& o) {
  const bool hll = scheme.flux() == FluxKind::Hll;
  ReducedModel model = detail::build_model(
      hll ? RomSystem::SweHLL : RomSystem::SweLF, scheme.grid().n_cells(), {"h", "q"}, runs, o,
      [&](const WindowModel& w, const std::map<std::string, Vector>& averages) {
        const SweBases b = detail::to_swe_bases(w);
        const SweAverages a = detail::to_swe_averages(averages);
        return hll ? assemble_swe_hll_rom(b, scheme, o.linearization, o.coefficients, a)
                   : assemble_swe_lf_rom(b, scheme, o.linearization, a);
      });
  model.g = scheme.params().g;
  return model;
}

// ---------------------------------------------------------------------------
// Online stage.

struct RomState {
  std::map<std::string, Vector> coefficients;
  int window_index = 0;
  double time = 0.0;
};

/// Projects full-order fields onto the bases of the window active at t.
inline RomState initial_rom_state(const ReducedModel& model, const std::map<std::string, Vector>& fields,
                                  double t = 0.0) {
  RomState s;
  s.window_index = model.window_for_time(t);
  s.time = t;
  const auto& w = model.windows.at(s.window_index);
  for (const auto& var : model.state_variables) {
    const auto it = fields.find(var);
    if (it == fields.end()) fail(ErrorCode::ShapeMismatch, "initial field '" + var + "' missing");
    s.coefficients[var] = project(w.bases.at(var), it->second);
  }
  return s;
}

inline std::map<std::string, Vector> lift_state(const ReducedModel& model, const RomState& s) {
  std::map<std::string, Vector> out;
  const auto& w = model.windows.at(s.window_index);
  for (const auto& [var, c] : s.coefficients) out[var] = lift(w.bases.at(var), c);
  return out;
}

namespace detail {

inline void check_point_depth(const Vector& h, const char* what) {
  for (int i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !std::isfinite(h[i])) {
      fail(ErrorCode::EvaluationError, std::string(what) + ": depth " + std::to_string(h[i]) +
                                           " at an interpolation point");
    }
  }
}

inline SweAuxCoefficients swe_aux(const ReducedModel& model, const WindowModel& w, const SweCoefficients& s) {
  SweAuxCoefficients aux;
  const auto at_points = [&](const std::string& key, const Vector& c) -> Vector {
    return w.point_rows.at(key) * c;
  };
  if (const auto it = w.interpolants.find("u"); it != w.interpolants.end()) {
    const Vector h = at_points("u.h", s.h);
    const Vector q = at_points("u.q", s.q);
    check_point_depth(h, "velocity");
    aux.u = deim_coefficients(it->second, q.cwiseQuotient(h));
  }
  if (const auto it = w.interpolants.find("f"); it != w.interpolants.end()) {
    const Vector h = at_points("f.h", s.h);
    const Vector q = at_points("f.q", s.q);
    check_point_depth(h, "friction factor");
    Vector f(h.size());
    for (int i = 0; i < h.size(); ++i) f[i] = std::abs(q[i]) / std::pow(h[i], 7.0 / 3.0);
    aux.f = deim_coefficients(it->second, f);
  }
  for (const char* var : {"alpha0", "alpha1"}) {
    const auto it = w.interpolants.find(var);
    if (it == w.interpolants.end()) continue;
    const std::string k = var;
    const Vector hl = at_points(k + ".hl", s.h), ql = at_points(k + ".ql", s.q);
    const Vector hr = at_points(k + ".hr", s.h), qr = at_points(k + ".qr", s.q);
    check_point_depth(hl, "HLL coefficient");
    check_point_depth(hr, "HLL coefficient");
    Vector values(hl.size());
    for (int m = 0; m < hl.size(); ++m) {
      const HllInterfaceValue iv = hll_interface_value(hl[m], ql[m], hr[m], qr[m], model.g);
      values[m] = k == "alpha0" ? iv.alpha0 : iv.alpha1;
    }
    (k == "alpha0" ? aux.alpha0 : aux.alpha1) = deim_coefficients(it->second, values);
  }
  return aux;
}

}  // namespace detail

/// One reduced step with the operators of the state's current window.
inline RomState rom_step(const ReducedModel& model, const RomState& s, double dt) {
  const WindowModel& w = model.windows.at(s.window_index);
  RomState out;
  out.window_index = s.window_index;
  out.time = s.time + dt;
  switch (model.system) {
    case RomSystem::Transport: out.coefficients["w"] = rom_transport_step(s.coefficients.at("w"), w.ops, dt); break;
    case RomSystem::Burgers: out.coefficients["w"] = rom_burgers_step(s.coefficients.at("w"), w.ops, dt); break;
    case RomSystem::SweLF:
    case RomSystem::SweHLL: {
      const SweCoefficients c{s.coefficients.at("h"), s.coefficients.at("q")};
      const SweAuxCoefficients aux = detail::swe_aux(model, w, c);
      const SweCoefficients next =
          model.system == RomSystem::SweLF ? rom_swe_lf_step(c, w.ops, dt, aux) : rom_swe_hll_step(c, w.ops, dt, aux);
      out.coefficients["h"] = next.h;
      out.coefficients["q"] = next.q;
      break;
    }
  }
  for (const auto& [var, c] : out.coefficients) {
    if (!c.allFinite()) fail(ErrorCode::NonFiniteState, "reduced coefficients of '" + var + "' are not finite");
  }
  return out;
}

/// Moves the state into window v by chaining the per-window transfers.
inline RomState move_to_window(const ReducedModel& model, RomState s, int v) {
  while (s.window_index < v) {
    const WindowModel& next = model.windows.at(s.window_index + 1);
    for (auto& [var, c] : s.coefficients) c = next.transfer_in.at(var) * c;
    ++s.window_index;
  }
  if (s.window_index > v) fail(ErrorCode::NonMonotoneTime, "reduced model cannot step back to an earlier window");
  return s;
}

struct RomRunResult {
  RomState final_state;
  std::map<std::string, Vector> final_fields;  // lifted
  int n_steps = 0;
};

/// Replays the step sizes `dts` from the projected initial fields. Before
/// each step the state moves to the window holding its current time. The
/// observer sees the state after the projection and after every step.
template <class Observer>
RomRunResult run_rom(const ReducedModel& model, const std::map<std::string, Vector>& initial_fields,
                     std::span<const double> dts, Observer&& observer) {
  RomRunResult r;
  RomState s = initial_rom_state(model, initial_fields);
  observer(std::as_const(s));
  for (std::size_t n = 0; n < dts.size(); ++n) {
    try {
      s = move_to_window(model, std::move(s), model.window_for_time(s.time));
      s = rom_step(model, s, dts[n]);
    } catch (const Error& e) {
      std::ostringstream ctx;
      ctx << "ROM step " << n << " at t=" << s.time << " in window " << s.window_index;
      rethrow_with_context(e, ctx.str());
    }
    observer(std::as_const(s));
  }
  r.n_steps = static_cast<int>(dts.size());
  r.final_fields = lift_state(model, s);
  r.final_state = std::move(s);
  return r;
}

inline RomRunResult run_rom(const ReducedModel& model, const std::map<std::string, Vector>& initial_fields,
                            std::span<const double> dts) {
  return run_rom(model, initial_fields, dts, [](const RomState&) {});
}

}  // namespace hyporom
