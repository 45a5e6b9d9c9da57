#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyporom/hyporom.hpp"

namespace fs = std::filesystem;
using namespace hyporom;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

fs::path output_dir(const ExperimentConfig& c, const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (!c.output_dir.empty()) return c.output_dir;
  return "out";
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(3) << v;
  return s.str();
}

void print_report(const ErrorReport& r) {
  std::cout << r.label << " [" << r.mode << "] steps=" << r.n_steps;
  if (!r.modes_per_window.empty()) std::cout << " M=" << r.max_modes();
  std::cout << '\n';
  for (const auto& var : r.variables) {
    std::cout << "  " << var;
    if (const auto it = r.l1.find(var); it != r.l1.end()) std::cout << "  L1=" << sci(it->second);
    if (const auto it = r.linf.find(var); it != r.linf.end()) std::cout << "  Linf=" << sci(it->second);
    if (const auto it = r.drift_l1.find(var); it != r.drift_l1.end()) std::cout << "  drift=" << sci(it->second);
    std::cout << '\n';
  }
  std::cout << "  fom " << sci(r.fom_seconds) << " s, offline " << sci(r.offline_seconds) << " s, online "
            << sci(r.online_seconds) << " s, speedup " << std::setprecision(3) << r.speedup << '\n';
}

void save_model(const ReducedModel& model, const fs::path& dir) {
  for (const auto& w : model.windows) {
    for (const auto& [var, b] : w.bases) {
      save_basis(b, (dir / ("basis_" + var + "_" + std::to_string(w.index) + ".bin")).string());
    }
    save_operators(w.ops, (dir / ("operators_" + std::to_string(w.index) + ".bin")).string());
  }
}

std::vector<int> parse_cells(const std::string& list) {
  std::vector<int> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 3) fail(ErrorCode::ConfigError, "--cells: bad entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorCode::ConfigError, "--cells is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Well-balanced POD-DEIM reduced models for 1D balance laws"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_override;
  app.add_option("--out", out_override, "Output directory (overrides output_dir)");

  std::string config_path;
  bool save_bin = false;

  auto* fom = app.add_subcommand("fom", "Full-order model");
  auto* fom_run = fom->add_subcommand("run", "Run the FOM and store its snapshots");
  fom_run->add_option("config", config_path, "Config file")->required();
  fom->require_subcommand(1);
  fom->fallthrough();

  auto* rom = app.add_subcommand("rom", "Reduced-order model");
  auto* rom_run = rom->add_subcommand("run", "FOM, offline stage and ROM, errors at t_final");
  rom_run->add_option("config", config_path, "Config file")->required();
  rom_run->add_flag("--save-model", save_bin, "Write HYPBASE1/HYPROMO1 files per window");
  rom->require_subcommand(1);
  rom->fallthrough();

  auto* predict = app.add_subcommand("predict", "Parametric prediction over a training set");
  predict->add_option("config", config_path, "Config file")->required();

  auto* sweep = app.add_subcommand("sweep", "Grid of mode caps and window counts");
  sweep->add_option("config", config_path, "Config file")->required();

  std::string wb_system;
  std::string wb_cells = "200,400,800,1600";
  auto* wb = app.add_subcommand("wb-check", "Well-balanced check on the stationary presets");
  wb->add_option("system", wb_system, "transport, burgers, swe-lf, swe-hll-tav, swe-hll-deim or all")->required();
  wb->add_option("--cells", wb_cells, "Comma separated mesh sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (fom_run->parsed()) {
      const ExperimentConfig c = load_config(config_path);
      const fs::path dir = output_dir(c, out_override);
      SnapshotSet snaps;
      const ErrorReport r = run_fom_only(c, &snaps);
      write_report(r, dir);
      for (const auto& [var, m] : snaps) save_snapshots(m, (dir / ("snapshots_" + var + ".bin")).string());
      print_report(r);
    } else if (rom_run->parsed()) {
      const ExperimentConfig c = load_config(config_path);
      const fs::path dir = output_dir(c, out_override);
      ReducedModel model;
      const ErrorReport r = run_experiment(c, &model);
      write_report(r, dir);
      if (save_bin) save_model(model, dir);
      print_report(r);
    } else if (predict->parsed()) {
      const ExperimentConfig c = load_config(config_path);
      const ErrorReport r = run_prediction(c);
      write_report(r, output_dir(c, out_override));
      print_report(r);
    } else if (sweep->parsed()) {
      const ExperimentConfig c = load_config(config_path);
      const auto rows = sweep_modes_windows(c);
      write_sweep(rows, output_dir(c, out_override), c.label + "_sweep.csv");
      std::cout << "mode_cap n_windows M  L1\n";
      for (const auto& row : rows) {
        std::cout << (row.mode_cap ? std::to_string(*row.mode_cap) : "-") << ' ' << row.n_windows << ' '
                  << row.modes_max << ' ' << sci(row.l1_sum()) << '\n';
      }
    } else if (wb->parsed()) {
      const auto reports = wb_check(wb_system, parse_cells(wb_cells));
      const fs::path dir = out_override.empty() ? fs::path("out") : fs::path(out_override);
      std::cout << std::left << std::setw(28) << "case" << std::setw(4) << "M" << std::setw(12) << "drift L1"
                << std::setw(12) << "FOM s" << std::setw(12) << "ROM s" << "speedup\n";
      for (const auto& r : reports) {
        write_report(r, dir);
        double drift = 0.0;
        for (const auto& [k, v] : r.drift_l1) drift = std::max(drift, v);
        std::cout << std::left << std::setw(28) << r.label << std::setw(4) << r.max_modes() << std::setw(12)
                  << sci(drift) << std::setw(12) << sci(r.fom_seconds) << std::setw(12) << sci(r.online_seconds)
                  << std::setprecision(3) << r.speedup << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_numerical() ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
