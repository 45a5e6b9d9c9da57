#pragma once

// Experiment runner: builds the scheme and initial state from a config, runs
// the FOM, the offline stage and the ROM, and reports errors and timings.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "hyporom/config.hpp"
#include "hyporom/fom.hpp"
#include "hyporom/pod.hpp"
#include "hyporom/rom.hpp"
#include "hyporom/snapshot_io.hpp"
#include "hyporom/snapshots.hpp"

namespace hyporom {

// ---------------------------------------------------------------------------
// Norms.

/// sum_i |a_i - b_i| dx, accumulated with Neumaier compensation.
inline double l1_error(const Vector& a, const Vector& b, double dx) {
  if (a.size() != b.size()) fail(ErrorCode::ShapeMismatch, "l1_error: lengths differ");
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = std::abs(a[i] - b[i]);
    const double t = sum + x;
    comp += std::abs(sum) >= x ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return (sum + comp) * dx;
}

inline double linf_error(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) fail(ErrorCode::ShapeMismatch, "linf_error: lengths differ");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Scheme and initial state from a config.

using AnyScheme = std::variant<TransportScheme, BurgersScheme, SweScheme>;
using Fields = std::map<std::string, Vector>;

inline std::function<double(double)> bathymetry_profile(const std::string& name) {
  if (name == "flat") return [](double) { return 0.0; };
  if (name == "gaussian-bump") return [](double x) { return -1.0 + 0.5 * std::exp(-x * x); };
  if (name == "dambreak-slope") return [](double x) { return 0.2 * (1.0 - x / 12.0); };
  fail(ErrorCode::ConfigError, "unknown bathymetry '" + name + "' (flat, gaussian-bump, dambreak-slope)");
}

inline Grid1D make_grid(const ExperimentConfig& c) { return Grid1D(c.x_min, c.x_max, c.n_cells); }

inline AnyScheme make_scheme(const ExperimentConfig& c) {
  const Grid1D grid = make_grid(c);
  switch (c.system) {
    case SystemKind::Transport: return TransportScheme({c.c, c.alpha, c.nu}, grid, c.flux);
    case SystemKind::Burgers: return BurgersScheme({c.alpha, c.nu}, grid, c.flux);
    case SystemKind::Swe: {
      SweParams p;
      p.g = c.g;
      p.n_b = c.n_b;
      p.nu = c.nu;
      p.bathymetry = bathymetry_profile(c.bathymetry);
      return SweScheme(p, grid, c.flux);
    }
  }
  fail(ErrorCode::UnsupportedSystem, "unknown system");
}

inline double bump(double x) { return 0.3 * std::exp(-100.0 * (x - 0.3) * (x - 0.3)); }

inline Fields initial_fields(const ExperimentConfig& c) {
  const Grid1D grid = make_grid(c);
  const std::string& ic = c.initial_condition;
  if (c.system == SystemKind::Transport) {
    const double rate = c.alpha / c.c;
    if (ic == "transport-wb") return {{"w", grid.sample([&](double x) { return std::exp(rate * x); })}};
    if (ic == "transport-pert") return {{"w", grid.sample([&](double x) { return std::exp(rate * x) + bump(x); })}};
  } else if (c.system == SystemKind::Burgers) {
    if (ic == "burgers-wb") return {{"w", grid.sample([&](double x) { return 0.1 * std::exp(c.alpha * x); })}};
    if (ic == "burgers-pert") {
      return {{"w", grid.sample([&](double x) { return 0.1 * std::exp(c.alpha * x) + bump(x); })}};
    }
  } else {
    const auto z = bathymetry_profile(c.bathymetry);
    Vector h;
    if (ic == "lake-at-rest") h = grid.sample([&](double x) { return -z(x); });
    if (ic == "dambreak") h = grid.sample([&](double x) { return (x <= 6.0 ? 2.0 : 1.0) - z(x); });
    if (h.size()) {
      if (!(h.minCoeff() > 0.0)) fail(ErrorCode::ConfigError, "initial depth is not positive everywhere");
      return {{"h", h}, {"q", Vector::Zero(h.size())}};
    }
  }
  fail(ErrorCode::ConfigError, "initial condition '" + ic + "' does not apply to system '" +
                                   std::string(to_string(c.system)) + "'");
}

namespace detail {

inline Fields to_fields(const Vector& w) { return {{"w", w}}; }
inline Fields to_fields(const SweState& s) { return {{"h", s.h}, {"q", s.q}}; }

inline Vector from_fields(const Fields& f, std::type_identity<Vector>) { return f.at("w"); }
inline SweState from_fields(const Fields& f, std::type_identity<SweState>) { return {f.at("h"), f.at("q")}; }

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// FOM trajectories.

struct FomTrajectory {
  SnapshotSet snapshots;
  std::vector<double> dts;
  Fields initial;
  Fields final_fields;
  double seconds = 0.0;         // stepping only
  double record_seconds = 0.0;  // time spent in the snapshot recorder
};

inline RecorderOptions recorder_options(const ExperimentConfig& c, const AnyScheme& scheme) {
  RecorderOptions o;
  o.stride = c.snapshot_stride;
  o.auxiliary = c.system == SystemKind::Swe;
  o.interfaces = c.system == SystemKind::Swe && std::get_if<SweScheme>(&scheme)->flux() == FluxKind::Hll;
  o.g = c.g;
  return o;
}

/// record = false skips the recorder entirely (reference runs).
inline FomTrajectory run_fom_trajectory(const AnyScheme& scheme, const Fields& initial, const ExperimentConfig& c,
                                        bool record, std::optional<double> param_tag = std::nullopt) {
  FomTrajectory out;
  out.initial = initial;
  SnapshotRecorder recorder(recorder_options(c, scheme));
  std::visit(
      [&](const auto& s) {
        using State = typename std::decay_t<decltype(s)>::State;
        State x0 = detail::from_fields(initial, std::type_identity<State>{});
        const auto t0 = detail::Clock::now();
        auto res = run_fom(s, std::move(x0), c.t_final, c.cfl, [&](const State& x, const StepInfo& info) {
          if (!record) return;
          const auto r0 = detail::Clock::now();
          recorder(x, info);
          out.record_seconds += detail::seconds_since(r0);
        });
        out.seconds = detail::seconds_since(t0) - out.record_seconds;
        out.dts = std::move(res.dts);
        out.final_fields = detail::to_fields(res.final_state);
      },
      scheme);
  if (record) out.snapshots = recorder.finish(param_tag);
  return out;
}

// ---------------------------------------------------------------------------
// Reports.

struct ErrorReport {
  std::string label;
  std::string mode;  // fom, rom, predict, sweep, wb-check
  ExperimentConfig config;
  std::optional<double> param;  // Manning coefficient the ROM was evaluated at (SWE)
  int n_steps = 0;
  std::vector<int> modes_per_window;
  std::vector<std::string> variables;
  std::map<std::string, double> l1;        // final ROM vs final FOM
  std::map<std::string, double> linf;
  std::map<std::string, double> drift_l1;  // final ROM vs initial ROM (lifted)
  double last_step_l1 = 0.0;               // between the last two lifted ROM iterates, summed over variables
  double fom_seconds = 0.0;
  double offline_seconds = 0.0;
  double online_seconds = 0.0;
  double speedup = 0.0;  // fom / online; 0 when no ROM step was taken
  std::map<std::pair<std::string, int>, Vector> spectra;
  std::map<std::pair<std::string, int>, std::vector<int>> deim_points;
  Vector x;
  Fields initial, fom_final, rom_final;

  int max_modes() const {
    int m = 0;
    for (const int v : modes_per_window) m = std::max(m, v);
    return m;
  }
  double l1_sum() const {
    double s = 0.0;
    for (const auto& [k, v] : l1) s += v;
    return s;
  }
};

inline RomOptions rom_options(const ExperimentConfig& c) {
  RomOptions o;
  o.eps_pod = c.eps_pod;
  o.mode_cap = c.mode_cap;
  o.n_windows = c.n_windows;
  o.linearization = c.linearization;
  o.coefficients = c.coefficients;
  return o;
}

inline ReducedModel build_model_for(const AnyScheme& scheme, std::span<const SnapshotSet> runs,
                                    const RomOptions& o) {
  return std::visit([&](const auto& s) { return build_reduced_model(s, runs, o); }, scheme);
}

namespace detail {

inline double fields_l1(const Fields& a, const Fields& b, double dx) {
  double s = 0.0;
  for (const auto& [k, v] : a) s += l1_error(v, b.at(k), dx);
  return s;
}

inline void record_model(ErrorReport& r, const ReducedModel& model) {
  r.modes_per_window.clear();
  for (const auto& w : model.windows) {
    r.modes_per_window.push_back(w.n_modes);
    for (const auto& [var, b] : w.bases) r.spectra[{var, w.index}] = b.singular_values;
    for (const auto& [var, d] : w.interpolants) r.deim_points[{var, w.index}] = d.indices;
  }
}

struct OnlineRun {
  Fields final_fields;
  Fields initial_lifted;
  double last_step_l1 = 0.0;
  double seconds = 0.0;
};

inline OnlineRun run_online(const ReducedModel& model, const Fields& initial, std::span<const double> dts,
                            double dx) {
  OnlineRun out;
  RomState first, prev, cur;
  int seen = 0;
  const auto t0 = Clock::now();
  RomRunResult res = run_rom(model, initial, dts, [&](const RomState& s) {
    if (seen++ == 0) first = s;
    prev = std::move(cur);
    cur = s;
  });
  out.seconds = seconds_since(t0);
  out.final_fields = std::move(res.final_fields);
  out.initial_lifted = lift_state(model, first);
  if (seen >= 2) out.last_step_l1 = fields_l1(lift_state(model, prev), lift_state(model, cur), dx);
  return out;
}

inline void fill_errors(ErrorReport& r, const Fields& fom_final, const OnlineRun& on, double dx) {
  r.fom_final = fom_final;
  r.rom_final = on.final_fields;
  r.variables.clear();
  for (const auto& [var, v] : fom_final) {
    r.variables.push_back(var);
    r.l1[var] = l1_error(on.final_fields.at(var), v, dx);
    r.linf[var] = linf_error(on.final_fields.at(var), v);
    r.drift_l1[var] = l1_error(on.final_fields.at(var), on.initial_lifted.at(var), dx);
  }
  r.last_step_l1 = on.last_step_l1;
  r.online_seconds = on.seconds;
  r.speedup = on.seconds > 0.0 ? r.fom_seconds / on.seconds : 0.0;
}

inline ErrorReport trivial_report(const ExperimentConfig& c, const std::string& mode) {
  ErrorReport r;
  r.label = c.label;
  r.mode = mode;
  r.config = c;
  r.x = make_grid(c).centers();
  r.initial = initial_fields(c);
  r.fom_final = r.initial;
  r.rom_final = r.initial;
  for (const auto& [var, v] : r.initial) {
    r.variables.push_back(var);
    r.l1[var] = r.linf[var] = r.drift_l1[var] = 0.0;
  }
  return r;
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    rethrow_with_context(e, stage);
  }
}

}  // namespace detail

/// FOM only; the report carries the final state and the FOM time.
inline ErrorReport run_fom_only(const ExperimentConfig& c, SnapshotSet* snapshots = nullptr) {
  validate(c);
  if (c.t_final == 0.0) return detail::trivial_report(c, "fom");
  ErrorReport r;
  r.label = c.label;
  r.mode = "fom";
  r.config = c;
  const AnyScheme scheme = make_scheme(c);
  r.x = make_grid(c).centers();
  r.initial = initial_fields(c);
  FomTrajectory fom =
      detail::staged("fom", [&] { return run_fom_trajectory(scheme, r.initial, c, snapshots != nullptr); });
  r.n_steps = static_cast<int>(fom.dts.size());
  r.fom_seconds = fom.seconds;
  r.fom_final = fom.final_fields;
  for (const auto& [var, v] : r.fom_final) r.variables.push_back(var);
  if (snapshots) *snapshots = std::move(fom.snapshots);
  return r;
}

/// FOM, offline stage and ROM for one configuration; errors at t_final.
inline ErrorReport run_experiment(const ExperimentConfig& c, ReducedModel* model_out = nullptr) {
  validate(c);
  if (c.t_final == 0.0) return detail::trivial_report(c, "rom");
  ErrorReport r;
  r.label = c.label;
  r.mode = "rom";
  r.config = c;
  if (c.system == SystemKind::Swe) r.param = c.n_b;
  const AnyScheme scheme = make_scheme(c);
  const double dx = make_grid(c).dx();
  r.x = make_grid(c).centers();
  r.initial = initial_fields(c);

  FomTrajectory fom = detail::staged("fom", [&] { return run_fom_trajectory(scheme, r.initial, c, true); });
  r.n_steps = static_cast<int>(fom.dts.size());
  r.fom_seconds = fom.seconds;

  const auto t_off = detail::Clock::now();
  std::vector<SnapshotSet> runs{std::move(fom.snapshots)};
  ReducedModel model = detail::staged("offline", [&] { return build_model_for(scheme, runs, rom_options(c)); });
  r.offline_seconds = detail::seconds_since(t_off) + fom.record_seconds;
  detail::record_model(r, model);

  const detail::OnlineRun on = detail::staged("online", [&] { return detail::run_online(model, r.initial, fom.dts, dx); });
  detail::staged("report", [&] {
    detail::fill_errors(r, fom.final_fields, on, dx);
    return 0;
  });
  if (model_out) *model_out = std::move(model);
  return r;
}

/// Training runs at every value of the training set, reduced model evaluated
/// at the target Manning coefficient, compared with a FOM run at the target.
inline ErrorReport run_prediction(const ExperimentConfig& c) {
  validate(c);
  if (c.system != SystemKind::Swe) fail(ErrorCode::ConfigError, "prediction varies n_b and needs system = swe");
  if (c.training_set.empty()) fail(ErrorCode::ConfigError, "prediction needs a nonempty training_set");
  if (!c.target_param) fail(ErrorCode::ConfigError, "prediction needs target_param");
  const double target = *c.target_param;
  if (!(target >= 0.0)) fail(ErrorCode::ConfigError, "target_param must be >= 0");
  for (const double mu : c.training_set) {
    if (mu == target && !c.allow_target_in_training) {
      fail(ErrorCode::ConfigError, "target_param is in the training set (set allow_target_in_training = true)");
    }
  }
  ErrorReport r;
  if (c.t_final == 0.0) {
    r = detail::trivial_report(c, "predict");
    r.param = target;
    return r;
  }
  r.label = c.label;
  r.mode = "predict";
  r.config = c;
  r.param = target;
  const Grid1D grid = make_grid(c);
  r.x = grid.centers();
  r.initial = initial_fields(c);
  const AnyScheme base = make_scheme(c);
  const SweScheme& swe = std::get<SweScheme>(base);

  const AnyScheme at_target = swe.with_friction(target);
  FomTrajectory ref = detail::staged("fom", [&] { return run_fom_trajectory(at_target, r.initial, c, false); });
  r.fom_seconds = ref.seconds;

  const auto t_off = detail::Clock::now();
  std::vector<SnapshotSet> runs;
  std::vector<std::vector<double>> dts;
  int nearest = 0;
  detail::staged("offline", [&] {
    for (std::size_t k = 0; k < c.training_set.size(); ++k) {
      const double mu = c.training_set[k];
      FomTrajectory t = run_fom_trajectory(AnyScheme(swe.with_friction(mu)), r.initial, c, true, mu);
      runs.push_back(std::move(t.snapshots));
      dts.push_back(std::move(t.dts));
      if (std::abs(mu - target) < std::abs(c.training_set[nearest] - target)) nearest = static_cast<int>(k);
    }
    return 0;
  });
  RomOptions o = rom_options(c);
  o.reference_run = nearest;
  ReducedModel model = detail::staged("offline", [&] { return build_model_for(at_target, runs, o); });
  r.offline_seconds = detail::seconds_since(t_off);
  detail::record_model(r, model);
  r.n_steps = static_cast<int>(dts[nearest].size());

  const detail::OnlineRun on =
      detail::staged("online", [&] { return detail::run_online(model, r.initial, dts[nearest], grid.dx()); });
  detail::staged("report", [&] {
    detail::fill_errors(r, ref.final_fields, on, grid.dx());
    return 0;
  });
  return r;
}

struct SweepRow {
  std::optional<int> mode_cap;
  int n_windows = 1;
  int modes_max = 0;
  std::map<std::string, double> l1;
  double online_seconds = 0.0;
  double l1_sum() const {
    double s = 0.0;
    for (const auto& [k, v] : l1) s += v;
    return s;
  }
};

/// Grid of (mode cap, window count) runs sharing one FOM trajectory. An empty
/// list falls back to the config's own value.
inline std::vector<SweepRow> sweep_modes_windows(const ExperimentConfig& c) {
  validate(c);
  if (c.t_final == 0.0) fail(ErrorCode::ConfigError, "sweep needs t_final > 0");
  std::vector<std::optional<int>> caps;
  for (const int m : c.sweep_modes) caps.push_back(m);
  if (caps.empty()) caps.push_back(c.mode_cap);
  std::vector<int> windows = c.sweep_windows;
  if (windows.empty()) windows.push_back(c.n_windows);

  const AnyScheme scheme = make_scheme(c);
  const double dx = make_grid(c).dx();
  const Fields initial = initial_fields(c);
  FomTrajectory fom = detail::staged("fom", [&] { return run_fom_trajectory(scheme, initial, c, true); });
  const std::vector<SnapshotSet> runs{std::move(fom.snapshots)};

  std::vector<SweepRow> rows;
  for (const int nv : windows) {
    for (const auto& cap : caps) {
      RomOptions o = rom_options(c);
      o.n_windows = nv;
      o.mode_cap = cap;
      const ReducedModel model = detail::staged("offline", [&] { return build_model_for(scheme, runs, o); });
      const detail::OnlineRun on = detail::staged("online", [&] { return detail::run_online(model, initial, fom.dts, dx); });
      SweepRow row;
      row.mode_cap = cap;
      row.n_windows = nv;
      row.modes_max = model.max_modes();
      for (const auto& [var, v] : fom.final_fields) row.l1[var] = l1_error(on.final_fields.at(var), v, dx);
      row.online_seconds = on.seconds;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Well-balanced check.

inline std::vector<std::string> wb_case_names() {
  return {"transport", "burgers", "swe-lf", "swe-hll-tav", "swe-hll-deim"};
}

inline ExperimentConfig wb_case_config(const std::string& name, int n_cells) {
  ExperimentConfig c;
  if (name == "transport") {
    c = make_preset("transport-wb");
  } else if (name == "burgers") {
    c = make_preset("burgers-wb");
  } else if (name == "swe-lf" || name == "swe-hll-tav" || name == "swe-hll-deim") {
    c = make_preset("swe-wb");
    c.flux = name == "swe-lf" ? FluxKind::ModifiedLaxFriedrichs : FluxKind::Hll;
    c.coefficients = name == "swe-hll-tav" ? CoeffTreatment::TimeAveraging : CoeffTreatment::Deim;
  } else {
    std::string known;
    for (const auto& n : wb_case_names()) known += " " + n;
    fail(ErrorCode::ConfigError, "unknown well-balanced case '" + name + "' (known:" + known + ", all)");
  }
  c.label = "wb-" + name + "-" + std::to_string(n_cells);
  c.n_cells = n_cells;
  c.n_windows = 1;
  c.snapshot_stride = std::max(1, n_cells / 100);
  return c;
}

inline std::vector<ErrorReport> wb_check(const std::string& name, const std::vector<int>& cells) {
  std::vector<std::string> cases = name == "all" ? wb_case_names() : std::vector<std::string>{name};
  std::vector<ErrorReport> out;
  for (const auto& k : cases) {
    for (const int n : cells) {
      ErrorReport r = run_experiment(wb_case_config(k, n));
      r.mode = "wb-check";
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV output. report.csv holds everything that is reproducible bit for bit;
// wall-clock times go to timing.csv.

inline const std::vector<std::string>& report_variables() {
  static const std::vector<std::string> v{"w", "h", "q"};
  return v;
}

inline std::string report_header() {
  std::string h =
      "label,mode,system,flux,linearization,coefficients,n_cells,t_final,cfl,nu,eps_pod,n_windows,mode_cap,"
      "param,n_steps,modes_max,modes_per_window";
  for (const char* kind : {"l1", "linf", "drift_l1"}) {
    for (const auto& v : report_variables()) h += std::string(",") + kind + "_" + v;
  }
  h += ",last_step_l1";
  return h;
}

namespace detail {

inline std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) fail(ErrorCode::IoError, "cannot write " + p.string());
  return out;
}

inline bool file_is_empty(const std::filesystem::path& p) {
  return !std::filesystem::exists(p) || std::filesystem::file_size(p) == 0;
}

}  // namespace detail

inline std::string report_row(const ErrorReport& r) {
  using detail::num;
  const ExperimentConfig& c = r.config;
  std::ostringstream s;
  s << r.label << ',' << r.mode << ',' << to_string(c.system) << ',' << to_string(c.flux) << ','
    << to_string(c.linearization) << ',' << to_string(c.coefficients) << ',' << c.n_cells << ',' << num(c.t_final)
    << ',' << num(c.cfl) << ',' << num(c.nu) << ',' << num(c.eps_pod) << ',' << c.n_windows << ','
    << (c.mode_cap ? std::to_string(*c.mode_cap) : "") << ',' << (r.param ? num(*r.param) : "") << ','
    << r.n_steps << ',' << r.max_modes() << ',';
  for (std::size_t v = 0; v < r.modes_per_window.size(); ++v) s << (v ? ";" : "") << r.modes_per_window[v];
  for (const auto* m : {&r.l1, &r.linf, &r.drift_l1}) {
    for (const auto& v : report_variables()) {
      const auto it = m->find(v);
      s << ',' << (it == m->end() ? "" : num(it->second));
    }
  }
  s << ',' << num(r.last_step_l1);
  return s.str();
}

inline std::string timing_header() { return "label,mode,fom_seconds,offline_seconds,online_seconds,speedup"; }

inline std::string timing_row(const ErrorReport& r) {
  using detail::num;
  return r.label + ',' + r.mode + ',' + num(r.fom_seconds) + ',' + num(r.offline_seconds) + ',' +
         num(r.online_seconds) + ',' + num(r.speedup);
}

/// Appends to report.csv / timing.csv (header written once) and writes the
/// per-run solution, spectrum and DEIM point files.
inline void write_report(const ErrorReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto append = [&](const std::string& name, const std::string& header, const std::string& row) {
    const auto p = dir / name;
    const bool fresh = detail::file_is_empty(p);
    std::ofstream out(p, std::ios::app);
    if (!out) fail(ErrorCode::IoError, "cannot write " + p.string());
    if (fresh) out << header << '\n';
    out << row << '\n';
  };
  append("report.csv", report_header(), report_row(r));
  append("timing.csv", timing_header(), timing_row(r));

  const std::string prefix = r.label.empty() ? "" : r.label + "_";
  for (const auto& var : r.variables) {
    auto out = detail::open_out(dir / (prefix + "solution_" + var + ".csv"));
    out << "x,initial,fom,rom,abs_diff\n";
    const Vector& fom = r.fom_final.at(var);
    const auto rom_it = r.rom_final.find(var);
    for (Eigen::Index i = 0; i < r.x.size(); ++i) {
      out << detail::num(r.x[i]) << ',' << detail::num(r.initial.at(var)[i]) << ',' << detail::num(fom[i]);
      if (rom_it != r.rom_final.end()) {
        out << ',' << detail::num(rom_it->second[i]) << ',' << detail::num(std::abs(rom_it->second[i] - fom[i]));
      } else {
        out << ",,";
      }
      out << '\n';
    }
  }
  for (const auto& [key, sigma] : r.spectra) {
    auto out = detail::open_out(dir / (prefix + "spectrum_" + key.first + "_" + std::to_string(key.second) + ".csv"));
    out << "index,sigma,energy_captured\n";
    const double total = sigma.squaredNorm();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
      acc += sigma[k] * sigma[k];
      out << k + 1 << ',' << detail::num(sigma[k]) << ',' << detail::num(total > 0.0 ? acc / total : 1.0) << '\n';
    }
  }
  for (const auto& [key, idx] : r.deim_points) {
    auto out = detail::open_out(dir / (prefix + "deim_" + key.first + "_" + std::to_string(key.second) + ".csv"));
    out << "order,index\n";
    for (std::size_t k = 0; k < idx.size(); ++k) out << k << ',' << idx[k] << '\n';
  }
}

inline void write_sweep(const std::vector<SweepRow>& rows, const std::filesystem::path& dir,
                        const std::string& name = "sweep.csv") {
  std::filesystem::create_directories(dir);
  auto out = detail::open_out(dir / name);
  out << "mode_cap,n_windows,modes_max";
  for (const auto& v : report_variables()) out << ",l1_" << v;
  out << ",online_seconds\n";
  for (const auto& r : rows) {
    out << (r.mode_cap ? std::to_string(*r.mode_cap) : "") << ',' << r.n_windows << ',' << r.modes_max;
    for (const auto& v : report_variables()) {
      const auto it = r.l1.find(v);
      out << ',' << (it == r.l1.end() ? "" : detail::num(it->second));
    }
    out << ',' << detail::num(r.online_seconds) << '\n';
  }
}

}  // namespace hyporom
