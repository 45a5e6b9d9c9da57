#pragma once

// Experiment configuration: flat key=value text, '#' starts a comment.
// A `preset` line fills every field first; the other lines then override it
// regardless of where the preset line sits.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hyporom/balance_laws.hpp"
#include "hyporom/errors.hpp"
#include "hyporom/rom_operators.hpp"

namespace hyporom {

enum class SystemKind { Transport, Burgers, Swe };

inline std::string_view to_string(SystemKind s) {
  switch (s) {
    case SystemKind::Transport: return "transport";
    case SystemKind::Burgers: return "burgers";
    case SystemKind::Swe: return "swe";
  }
  return "?";
}

struct ExperimentConfig {
  std::string preset;
  std::string label = "run";
  SystemKind system = SystemKind::Transport;
  FluxKind flux = FluxKind::ModifiedLaxFriedrichs;

  double x_min = 0.0;
  double x_max = 2.0;
  int n_cells = 200;
  std::string initial_condition = "transport-wb";
  std::string bathymetry = "flat";

  double t_final = 10.0;
  double cfl = 0.9;
  double nu = 0.9;
  double c = 1.0;
  double alpha = 1.0;
  double g = 9.81;
  double n_b = 0.0;

  double eps_pod = 1e-10;
  int n_windows = 1;
  std::optional<int> mode_cap;
  Linearization linearization = Linearization::DeimUDeimF;
  CoeffTreatment coefficients = CoeffTreatment::Deim;
  int snapshot_stride = 1;

  std::vector<double> training_set;
  std::optional<double> target_param;
  bool allow_target_in_training = false;

  std::vector<int> sweep_modes;
  std::vector<int> sweep_windows;

  std::string output_dir;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    fail(ErrorCode::ConfigError, key + ": '" + v + "' is not a finite number");
  }
  return out;
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    fail(ErrorCode::ConfigError, key + ": '" + v + "' is not an integer");
  }
  return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
  const long long x = parse_integer(key, v);
  if (x < -1000000000LL || x > 1000000000LL) fail(ErrorCode::ConfigError, key + ": out of range");
  return static_cast<int>(x);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::ConfigError, key + ": expected true/false, got '" + v + "'");
}

template <class E>
E parse_enum(const std::string& key, const std::string& v, std::initializer_list<E> options) {
  std::string known;
  for (const E e : options) {
    if (to_string(e) == v) return e;
    known += (known.empty() ? "" : ", ") + std::string(to_string(e));
  }
  fail(ErrorCode::ConfigError, key + ": unknown value '" + v + "' (expected one of " + known + ")");
}

}  // namespace detail

/// Named starting points, one per experiment family.
inline std::vector<std::string> preset_names() {
  return {"transport-wb", "transport-pert", "burgers-wb", "burgers-pert", "swe-wb", "dambreak"};
}

inline ExperimentConfig make_preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  c.label = name;
  if (name == "transport-wb" || name == "transport-pert") {
    c.system = SystemKind::Transport;
    c.x_min = 0.0;
    c.x_max = 2.0;
    c.c = 1.0;
    c.alpha = 1.0;
    c.initial_condition = name;
    c.t_final = name == "transport-wb" ? 10.0 : 0.8;
  } else if (name == "burgers-wb" || name == "burgers-pert") {
    c.system = SystemKind::Burgers;
    c.x_min = 0.0;
    c.x_max = 2.0;
    c.alpha = 1.0;
    c.initial_condition = name;
    c.t_final = name == "burgers-wb" ? 10.0 : 3.0;
  } else if (name == "swe-wb") {
    c.system = SystemKind::Swe;
    c.x_min = -5.0;
    c.x_max = 5.0;
    c.bathymetry = "gaussian-bump";
    c.initial_condition = "lake-at-rest";
    c.t_final = 10.0;
    c.n_b = 0.0;
  } else if (name == "dambreak") {
    c.system = SystemKind::Swe;
    c.x_min = 0.0;
    c.x_max = 12.0;
    c.bathymetry = "dambreak-slope";
    c.initial_condition = "dambreak";
    c.t_final = 1.0;
    c.n_b = 0.1;
    c.n_windows = 5;
    c.eps_pod = 1e-10;
  } else {
    std::string known;
    for (const auto& p : preset_names()) known += " " + p;
    fail(ErrorCode::ConfigError, "unknown preset '" + name + "' (known:" + known + ")");
  }
  return c;
}

inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  if (key == "preset") {
    return;  // handled before any other key
  } else if (key == "label") {
    c.label = v;
  } else if (key == "system") {
    c.system = parse_enum(key, v, {SystemKind::Transport, SystemKind::Burgers, SystemKind::Swe});
  } else if (key == "flux") {
    c.flux = parse_enum(key, v, {FluxKind::ModifiedLaxFriedrichs, FluxKind::LaxFriedrichs, FluxKind::Rusanov,
                                 FluxKind::Hll});
  } else if (key == "x_min") {
    c.x_min = parse_double(key, v);
  } else if (key == "x_max") {
    c.x_max = parse_double(key, v);
  } else if (key == "n_cells") {
    c.n_cells = parse_int(key, v);
  } else if (key == "initial_condition") {
    c.initial_condition = v;
  } else if (key == "bathymetry") {
    c.bathymetry = v;
  } else if (key == "t_final") {
    c.t_final = parse_double(key, v);
  } else if (key == "cfl") {
    c.cfl = parse_double(key, v);
  } else if (key == "nu") {
    c.nu = parse_double(key, v);
  } else if (key == "c") {
    c.c = parse_double(key, v);
  } else if (key == "alpha") {
    c.alpha = parse_double(key, v);
  } else if (key == "g") {
    c.g = parse_double(key, v);
  } else if (key == "n_b") {
    c.n_b = parse_double(key, v);
  } else if (key == "eps_pod") {
    c.eps_pod = parse_double(key, v);
  } else if (key == "n_windows") {
    c.n_windows = parse_int(key, v);
  } else if (key == "mode_cap") {
    if (v == "none" || v.empty()) {
      c.mode_cap.reset();
    } else {
      c.mode_cap = parse_int(key, v);
    }
  } else if (key == "linearization") {
    c.linearization = parse_enum(key, v, {Linearization::AllTimeAveraging, Linearization::DeimUTavF,
                                          Linearization::DeimUDeimF});
  } else if (key == "coefficients") {
    c.coefficients = parse_enum(key, v, {CoeffTreatment::TimeAveraging, CoeffTreatment::Deim});
  } else if (key == "snapshot_stride") {
    c.snapshot_stride = parse_int(key, v);
  } else if (key == "training_set") {
    c.training_set.clear();
    for (const auto& s : split_list(v)) c.training_set.push_back(parse_double(key, s));
  } else if (key == "target_param") {
    c.target_param = parse_double(key, v);
  } else if (key == "allow_target_in_training") {
    c.allow_target_in_training = parse_bool(key, v);
  } else if (key == "sweep_modes") {
    c.sweep_modes.clear();
    for (const auto& s : split_list(v)) c.sweep_modes.push_back(parse_int(key, s));
  } else if (key == "sweep_windows") {
    c.sweep_windows.clear();
    for (const auto& s : split_list(v)) c.sweep_windows.push_back(parse_int(key, s));
  } else if (key == "output_dir") {
    c.output_dir = v;
  } else if (key == "seed") {
    const long long s = parse_integer(key, v);
    if (s < 0) fail(ErrorCode::ConfigError, "seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  } else {
    fail(ErrorCode::ConfigError, "unknown key '" + key + "'");
  }
}

/// Range checks that do not need a run.
inline void validate(const ExperimentConfig& c) {
  const auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::ConfigError, what);
  };
  need(c.n_cells >= 3, "n_cells must be >= 3");
  need(c.x_max > c.x_min, "x_max must exceed x_min");
  need(c.t_final >= 0.0, "t_final must be >= 0");
  need(c.cfl > 0.0 && c.cfl <= 1.0, "cfl must lie in (0, 1]");
  need(c.eps_pod > 0.0 && c.eps_pod < 1.0, "eps_pod must lie in (0, 1)");
  need(c.n_windows >= 1, "n_windows must be >= 1");
  need(!c.mode_cap || *c.mode_cap >= 1, "mode_cap must be >= 1");
  need(c.snapshot_stride >= 1, "snapshot_stride must be >= 1");
  need(c.n_b >= 0.0, "n_b must be >= 0");
  need(c.g > 0.0, "g must be > 0");
  if (c.system != SystemKind::Swe) need(c.flux != FluxKind::Hll, "hll flux applies to swe only");
  for (const double mu : c.training_set) need(mu >= 0.0, "training_set values must be >= 0");
  for (const int m : c.sweep_modes) need(m >= 1, "sweep_modes entries must be >= 1");
  for (const int v : c.sweep_windows) need(v >= 1, "sweep_windows entries must be >= 1");
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  std::vector<std::pair<std::string, std::string>> entries;
  std::optional<std::string> preset;
  std::map<std::string, int> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) fail(ErrorCode::ConfigError, where + ": expected key = value");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) fail(ErrorCode::ConfigError, where + ": empty key");
    if (seen[key]++) fail(ErrorCode::ConfigError, where + ": duplicate key '" + key + "'");
    if (key == "preset") preset = value;
    entries.emplace_back(key, value);
  }

  ExperimentConfig c = preset ? make_preset(*preset) : ExperimentConfig{};
  for (const auto& [k, v] : entries) {
    try {
      apply_setting(c, k, v);
    } catch (const Error& e) {
      rethrow_with_context(e, source);
    }
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open config " + path);
  return parse_config(in, path);
}

}  // namespace hyporom
