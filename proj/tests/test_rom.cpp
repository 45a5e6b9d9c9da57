#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "hyporom/rom.hpp"
#include "test_util.hpp"

using namespace hyporom;
using testutil::error_code;
namespace fs = std::filesystem;

namespace {

template <class Scheme>
struct Recorded {
  SnapshotSet set;
  std::vector<double> dts;
  typename Scheme::State final_state;
};

template <class Scheme>
Recorded<Scheme> record(const Scheme& s, typename Scheme::State init, double t_final, bool interfaces = false) {
  SnapshotRecorder rec(RecorderOptions{1, true, interfaces, 9.81});
  auto res = run_fom(s, std::move(init), t_final, 0.9, rec);
  return {rec.finish(), res.dts, res.final_state};
}

double bump_bed(double x) { return -1.0 + 0.5 * std::exp(-x * x); }

SweScheme swe(int n, FluxKind flux, double n_b, std::function<double(double)> z) {
  SweParams p;
  p.n_b = n_b;
  p.bathymetry = std::move(z);
  return SweScheme(p, Grid1D(-5.0, 5.0, n), flux);
}

RomOptions opts(int n_windows, Linearization lin = Linearization::DeimUDeimF,
                CoeffTreatment c = CoeffTreatment::Deim) {
  RomOptions o;
  o.eps_pod = 1e-10;
  o.n_windows = n_windows;
  o.linearization = lin;
  o.coefficients = c;
  return o;
}

}  // namespace

TEST(RomTransportStep, ZeroStaysZero) {
  const TransportScheme s({1.0, 1.0, 0.9}, Grid1D(0.0, 2.0, 12));
  const RomOperators ops = assemble_transport_rom(testutil::random_basis(12, 3, 1), s);
  EXPECT_EQ(rom_transport_step(Vector::Zero(3), ops, 0.01), Vector::Zero(3));
}

TEST(RomTransportStep, FullBasisMatchesFom) {
  const int n = 16;
  const Grid1D g(0.0, 2.0, n);
  const TransportScheme s({1.0, 1.0, 0.9}, g);
  const Matrix q = testutil::random_basis(n, n, 3);
  const RomOperators ops = assemble_transport_rom(q, s);
  Vector w = g.sample([](double x) { return std::exp(x) + 0.3 * std::exp(-100 * (x - 0.3) * (x - 0.3)); });
  Vector c = q.transpose() * w;
  double worst = 0.0;
  for (int step = 0; step < 100; ++step) {
    const double dt = cfl_dt(s, w, 0.9);
    w = s.step(w, dt);
    c = rom_transport_step(c, ops, dt);
    worst = std::max(worst, (q * c - w).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-11);
}

TEST(RomTransportStep, StationaryFixedPoint) {
  const Grid1D g(0.0, 2.0, 200);
  const TransportScheme s({1.0, 1.0, 0.9}, g);
  const Vector w = g.sample([](double x) { return std::exp(x); });
  const RomOperators ops = assemble_transport_rom(w.normalized(), s);
  const Vector c = Vector::Constant(1, w.norm());
  EXPECT_NEAR(rom_transport_step(c, ops, cfl_dt(s, w, 0.9))[0], c[0], 1e-13 * c[0]);
}

TEST(RomBurgersStep, ZeroStaysZero) {
  const BurgersScheme s({1.0, 0.9}, Grid1D(0.0, 2.0, 12));
  const RomOperators ops = assemble_burgers_rom(testutil::random_basis(12, 3, 2), s);
  EXPECT_EQ(rom_burgers_step(Vector::Zero(3), ops, 0.01), Vector::Zero(3));
}

TEST(RomBurgersStep, StationaryFixedPoint) {
  const Grid1D g(0.0, 2.0, 200);
  const BurgersScheme s({1.0, 0.9}, g);
  const Vector w = g.sample([](double x) { return 0.1 * std::exp(x); });
  const RomOperators ops = assemble_burgers_rom(w.normalized(), s);
  const Vector c = Vector::Constant(1, w.norm());
  EXPECT_NEAR(rom_burgers_step(c, ops, cfl_dt(s, w, 0.9))[0], c[0], 1e-13 * c[0]);
}

TEST(RomBurgersStep, FullRankPipelineMatchesFom) {
  const Grid1D g(0.0, 2.0, 10);
  const BurgersScheme s({1.0, 0.9}, g);
  const Vector w0 = g.sample([](double x) { return 0.1 * std::exp(x) + 0.3 * std::exp(-100 * (x - 0.3) * (x - 0.3)); });
  // 50 steps
  double t_final = 0.0;
  {
    Vector w = w0;
    for (int n = 0; n < 50; ++n) {
      const double dt = cfl_dt(s, w, 0.9);
      w = s.step(w, dt);
      t_final += dt;
    }
  }
  const auto run = record(s, w0, t_final);
  ASSERT_EQ(run.dts.size(), 50u);
  const std::vector<SnapshotSet> runs{run.set};
  RomOptions o = opts(1);
  o.eps_pod = 1e-15;
  const ReducedModel model = build_reduced_model(s, runs, o);
  const auto& fom = run.set.at("w").data;
  int col = 0;
  double worst = 0.0;
  run_rom(model, {{"w", w0}}, run.dts, [&](const RomState& st) {
    worst = std::max(worst, (lift_state(model, st).at("w") - fom.col(col++)).cwiseAbs().maxCoeff());
  });
  EXPECT_LE(worst, 1e-10) << "M = " << model.max_modes();
}

TEST(RomSweLf, LakeAtRestFixedPoint) {
  for (auto lin : {Linearization::AllTimeAveraging, Linearization::DeimUTavF, Linearization::DeimUDeimF}) {
    const SweScheme s = swe(200, FluxKind::ModifiedLaxFriedrichs, 0.0, bump_bed);
    const SweState rest{-s.bathymetry(), Vector::Zero(200)};
    const auto run = record(s, rest, 1.0);
    const std::vector<SnapshotSet> runs{run.set};
    const ReducedModel model = build_reduced_model(s, runs, opts(3, lin));
    EXPECT_EQ(model.max_modes(), 1);
    const auto res = run_rom(model, {{"h", rest.h}, {"q", rest.q}}, run.dts);
    EXPECT_LE((res.final_fields.at("h") - rest.h).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE(res.final_fields.at("q").cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(RomSweLf, ZeroDischargeStaysZeroUnderFriction) {
  const int n = 12;
  const SweScheme s = swe(n, FluxKind::ModifiedLaxFriedrichs, 0.1, [](double) { return 0.0; });
  Matrix hb = testutil::random_basis(n, 3, 1);
  hb.col(0).setConstant(1.0);
  hb = Eigen::HouseholderQR<Matrix>(hb).householderQ() * Matrix::Identity(n, 3);
  SweBases b{hb, testutil::random_basis(n, 3, 2), testutil::random_basis(n, 3, 3), testutil::random_basis(n, 3, 4),
             {}, {}};
  SweAverages avg;
  avg.h = Vector::Ones(n);
  avg.u = Vector::Zero(n);
  for (auto lin : {Linearization::AllTimeAveraging, Linearization::DeimUTavF, Linearization::DeimUDeimF}) {
    const RomOperators ops = assemble_swe_lf_rom(b, s, lin, avg);
    const SweCoefficients c{b.h.transpose() * Vector::Ones(n), Vector::Zero(3)};
    SweAuxCoefficients aux{Vector::Zero(3), Vector::Zero(3), {}, {}};
    const SweCoefficients out = rom_swe_lf_step(c, ops, 0.01, aux);
    EXPECT_LE(out.q.cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(RomSweLf, NoFrictionMatchesFrictionlessAssembly) {
  const int n = 12;
  const SweScheme with = swe(n, FluxKind::ModifiedLaxFriedrichs, 0.1, bump_bed);
  const SweScheme without = with.with_friction(0.0);
  SweBases b{testutil::random_basis(n, 3, 5), testutil::random_basis(n, 3, 6), testutil::random_basis(n, 3, 7),
             testutil::random_basis(n, 3, 8), {}, {}};
  RomOperators a = assemble_swe_lf_rom(b, with, Linearization::DeimUDeimF);
  const RomOperators f = assemble_swe_lf_rom(b, without, Linearization::DeimUDeimF);
  EXPECT_FALSE(f.has("H"));
  a.scalars["n_b"] = 0.0;
  const SweCoefficients c{testutil::random_vector(3, 1), testutil::random_vector(3, 2)};
  const SweAuxCoefficients aux{testutil::random_vector(3, 3), testutil::random_vector(3, 4), {}, {}};
  const SweCoefficients x = rom_swe_lf_step(c, a, 0.01, aux), y = rom_swe_lf_step(c, f, 0.01, aux);
  EXPECT_EQ(x.h, y.h);
  EXPECT_EQ(x.q, y.q);
}

TEST(RomSweHll, LakeAtRestFixedPoint) {
  for (auto coeff : {CoeffTreatment::TimeAveraging, CoeffTreatment::Deim}) {
    const SweScheme s = swe(200, FluxKind::Hll, 0.0, bump_bed);
    const SweState rest{-s.bathymetry(), Vector::Zero(200)};
    const auto run = record(s, rest, 1.0, true);
    const std::vector<SnapshotSet> runs{run.set};
    const ReducedModel model = build_reduced_model(s, runs, opts(2, Linearization::DeimUDeimF, coeff));
    EXPECT_EQ(model.max_modes(), 1);
    const auto res = run_rom(model, {{"h", rest.h}, {"q", rest.q}}, run.dts);
    EXPECT_LE((res.final_fields.at("h") - rest.h).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE(res.final_fields.at("q").cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(RunRom, SingleWindowHasNoTransfers) {
  const Grid1D g(0.0, 2.0, 40);
  const TransportScheme s({1.0, 1.0, 0.9}, g);
  const Vector w0 = g.sample([](double x) { return std::exp(x) + 0.3 * std::exp(-100 * (x - 0.3) * (x - 0.3)); });
  const auto run = record(s, w0, 0.4);
  const std::vector<SnapshotSet> runs{run.set};
  const ReducedModel model = build_reduced_model(s, runs, opts(1));
  ASSERT_EQ(model.windows.size(), 1u);
  EXPECT_TRUE(model.windows[0].transfer_in.empty());

  // plain stepping with the single operator set gives the same trajectory
  const auto& w = model.windows[0];
  Vector c = project(w.bases.at("w"), w0);
  int windows_seen = 0;
  const auto res = run_rom(model, {{"w", w0}}, run.dts, [&](const RomState& st) { windows_seen |= 1 << st.window_index; });
  for (double dt : run.dts) c = rom_transport_step(c, w.ops, dt);
  EXPECT_EQ(windows_seen, 1);
  EXPECT_EQ(res.final_state.coefficients.at("w"), c);
}

TEST(RunRom, StationaryAnyWindowCount) {
  const Grid1D g(0.0, 2.0, 100);
  const TransportScheme s({1.0, 1.0, 0.9}, g);
  const Vector w0 = g.sample([](double x) { return std::exp(x); });
  const auto run = record(s, w0, 2.0);
  const std::vector<SnapshotSet> runs{run.set};
  for (int nv : {1, 3, 7}) {
    const ReducedModel model = build_reduced_model(s, runs, opts(nv));
    EXPECT_EQ(model.max_modes(), 1);
    for (std::size_t v = 1; v < model.windows.size(); ++v) {
      EXPECT_NEAR(model.windows[v].transfer_in.at("w")(0, 0), 1.0, 1e-13);
    }
    const auto res = run_rom(model, {{"w", w0}}, run.dts);
    EXPECT_EQ(res.final_state.window_index, nv - 1);
    EXPECT_LE((res.final_fields.at("w") - w0).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RunRom, WindowSwitchRule) {
  ReducedModel m;
  m.windows.resize(3);
  m.windows[0].t_end = 1.0;
  m.windows[1].t_end = 2.0;
  m.windows[2].t_end = 3.0;
  EXPECT_EQ(m.window_for_time(0.0), 0);
  EXPECT_EQ(m.window_for_time(0.999), 0);
  EXPECT_EQ(m.window_for_time(1.0), 1);
  EXPECT_EQ(m.window_for_time(2.5), 2);
  EXPECT_EQ(m.window_for_time(3.0), 2);
}

TEST(RunRom, MoveBackwardsFails) {
  const Grid1D g(0.0, 2.0, 40);
  const TransportScheme s({1.0, 1.0, 0.9}, g);
  const auto run = record(s, g.sample([](double x) { return std::exp(-x); }), 0.5);
  const std::vector<SnapshotSet> runs{run.set};
  const ReducedModel model = build_reduced_model(s, runs, opts(2));
  RomState st = initial_rom_state(model, {{"w", g.centers()}}, 0.5);
  EXPECT_EQ(st.window_index, 1);
  EXPECT_EQ(error_code([&] { move_to_window(model, st, 0); }), ErrorCode::NonMonotoneTime);
}

TEST(OperatorIo, RoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "hyporom_test_rom";
  fs::create_directories(dir);
  const int n = 10;
  const SweScheme s = swe(n, FluxKind::Hll, 0.05, bump_bed);
  SweBases b{testutil::random_basis(n, 2, 1), testutil::random_basis(n, 2, 2), testutil::random_basis(n, 2, 3),
             testutil::random_basis(n, 2, 4), testutil::random_basis(n + 1, 2, 5), testutil::random_basis(n + 1, 2, 6)};
  SweAverages avg;
  avg.h = Vector::Ones(n);
  avg.u = Vector::Zero(n);
  avg.utilde = testutil::random_vector(n + 1, 7);
  avg.htilde = testutil::random_vector(n + 1, 8, 0.5, 1.0);
  RomOperators ops = assemble_swe_hll_rom(b, s, Linearization::DeimUDeimF, CoeffTreatment::Deim, avg);
  ops.window_index = 3;
  const std::string p = (dir / "ops.bin").string();
  save_operators(ops, p);
  const RomOperators r = load_operators(p);
  EXPECT_EQ(r.system, ops.system);
  EXPECT_EQ(r.linearization, ops.linearization);
  EXPECT_EQ(r.coefficients, ops.coefficients);
  EXPECT_EQ(r.window_index, 3);
  EXPECT_EQ(r.scalars, ops.scalars);
  ASSERT_EQ(r.matrices.size(), ops.matrices.size());
  ASSERT_EQ(r.tensors.size(), ops.tensors.size());
  for (const auto& [k, v] : ops.matrices) EXPECT_EQ(r.matrix(k), v) << k;
  for (const auto& [k, v] : ops.vectors) EXPECT_EQ(r.vector(k), v) << k;
  for (const auto& [k, v] : ops.tensors) {
    EXPECT_EQ(r.tensor(k).data, v.data) << k;
    EXPECT_EQ(r.tensor(k).l, v.l) << k;
  }
  fs::resize_file(p, fs::file_size(p) - 1);
  EXPECT_EQ(error_code([&] { load_operators(p); }), ErrorCode::ChecksumMismatch);
}
