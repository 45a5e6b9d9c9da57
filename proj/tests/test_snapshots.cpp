#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "hyporom/snapshot_io.hpp"
#include "hyporom/snapshots.hpp"
#include "test_util.hpp"

using namespace hyporom;
using testutil::error_code;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hyporom_test_snapshots";
  fs::create_directories(dir);
  return dir / name;
}

SnapshotMatrix random_snapshots(int rows, int cols, unsigned seed, std::optional<double> tag = std::nullopt) {
  SnapshotBuilder b("h", rows);
  double t = 0.0;
  for (int n = 0; n < cols; ++n) {
    const double dt = n == 0 ? 0.0 : 0.01 + 0.001 * n;
    t += dt;
    b.record(testutil::random_vector(rows, seed + n), t, dt);
  }
  return b.finish(tag);
}

void flip_byte(const fs::path& p, std::size_t offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c;
  f.get(c);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(static_cast<char>(c ^ 0x5a));
}

}  // namespace

TEST(SnapshotBuilder, FirstColumnAndMonotoneTime) {
  SnapshotBuilder b("w", 3);
  b.record(Vector::Ones(3), 0.0, 0.0);
  EXPECT_EQ(b.finish().n_cols(), 1);
  EXPECT_EQ(error_code([&] { b.record(Vector::Ones(3), 0.0, 0.1); }), ErrorCode::NonMonotoneTime);
  EXPECT_EQ(error_code([&] { b.record(Vector::Ones(4), 1.0, 1.0); }), ErrorCode::ShapeMismatch);
}

TEST(SnapshotBuilder, TimesMatchSteps) {
  const SnapshotMatrix m = random_snapshots(4, 12, 3);
  ASSERT_EQ(m.dts.size(), 11u);
  for (int n = 0; n + 1 < m.n_cols(); ++n) EXPECT_NEAR(m.times[n + 1] - m.times[n], m.dts[n], 1e-12 * m.times[n + 1]);
}

TEST(SnapshotRecorder, AuxiliaryColumnsAreFunctionsOfPrimary) {
  const Grid1D g(0.0, 12.0, 40);
  SweParams p;
  p.n_b = 0.1;
  p.bathymetry = [](double x) { return 0.2 * (1.0 - x / 12.0); };
  const SweScheme s(p, g, FluxKind::Hll);
  SweState st{Vector(40), Vector::Zero(40)};
  for (int i = 0; i < 40; ++i) st.h[i] = (g.center(i) <= 6.0 ? 2.0 : 1.0) - s.bathymetry()[i];
  SnapshotRecorder rec(RecorderOptions{1, true, true, p.g});
  run_fom(s, st, 0.5, 0.9, rec);
  const SnapshotSet set = rec.finish(0.1);
  const auto& h = set.at("h").data;
  const auto& q = set.at("q").data;
  for (int n = 0; n < h.cols(); ++n) {
    for (int i = 0; i < h.rows(); ++i) {
      EXPECT_NEAR(set.at("f").data(i, n), std::abs(q(i, n)) / std::pow(h(i, n), 7.0 / 3.0), 1e-15);
      EXPECT_NEAR(set.at("u").data(i, n), q(i, n) / h(i, n), 1e-15);
    }
  }
  EXPECT_EQ(set.at("alpha0").n_rows(), 41);
  EXPECT_EQ(set.at("alpha1").n_rows(), 41);
  EXPECT_EQ(*set.at("h").param_tag, 0.1);
}

TEST(SnapshotRecorder, StrideKeepsFirstAndLast) {
  const Grid1D g(0.0, 1.0, 20);
  const TransportScheme s({1.0, 0.0, 0.9}, g);
  SnapshotRecorder rec(RecorderOptions{4, false, false, 9.81});
  const auto res = run_fom(s, Vector::Ones(20), 0.5, 0.9, rec);
  const SnapshotMatrix m = rec.finish().at("w");
  EXPECT_EQ(m.times.front(), 0.0);
  EXPECT_EQ(m.times.back(), 0.5);
  double sum = 0.0;
  for (double d : m.dts) sum += d;
  EXPECT_NEAR(sum, 0.5, 1e-14);
  EXPECT_LT(m.n_cols(), static_cast<int>(res.dts.size()) + 1);
}

TEST(PartitionUniform, Examples) {
  auto p = partition_uniform(10, 1);
  ASSERT_EQ(p.n_windows(), 1);
  EXPECT_EQ(p.ranges[0], (ColumnRange{0, 10}));
  p = partition_uniform(10, 5);
  for (const auto& r : p.ranges) EXPECT_EQ(r.size(), 2);
  p = partition_uniform(11, 5);
  std::vector<int> sizes;
  for (const auto& r : p.ranges) sizes.push_back(r.size());
  EXPECT_EQ(sizes, (std::vector<int>{3, 2, 2, 2, 2}));
  EXPECT_EQ(error_code([] { partition_uniform(9, 5); }), ErrorCode::TooFewSnapshots);
  EXPECT_EQ(error_code([] { partition_uniform(9, 0); }), ErrorCode::ConfigError);
}

TEST(PartitionUniform, ExhaustiveCover) {
  for (int nt = 2; nt <= 64; ++nt) {
    for (int nv = 1; nv <= nt / 2; ++nv) {
      const auto p = partition_uniform(nt, nv);
      ASSERT_EQ(p.n_windows(), nv);
      int next = 0;
      for (const auto& r : p.ranges) {
        EXPECT_EQ(r.begin, next);
        EXPECT_GE(r.size(), 2);
        next = r.end;
      }
      EXPECT_EQ(next, nt);
      for (int c = 0; c < nt; ++c) EXPECT_GE(p.window_of(c), 0);
    }
  }
}

TEST(ConcatParametric, Shapes) {
  const SnapshotMatrix a = random_snapshots(200, 50, 1, 0.03);
  const SnapshotMatrix b = random_snapshots(200, 50, 2, 0.04);
  const std::vector<SnapshotMatrix> one{a};
  const SnapshotMatrix s = concat_parametric(one);
  EXPECT_EQ(s.data, a.data);
  const std::vector<SnapshotMatrix> two{a, b};
  const SnapshotMatrix c = concat_parametric(two);
  EXPECT_EQ(c.n_rows(), 200);
  EXPECT_EQ(c.n_cols(), 100);
  EXPECT_FALSE(c.param_tag.has_value());
  ASSERT_EQ(c.blocks.size(), 2u);
  EXPECT_EQ(*c.blocks[1].param_tag, 0.04);
  EXPECT_EQ(c.blocks[1].first_col, 50);
  EXPECT_EQ(c.data.rightCols(50), b.data);

  const std::vector<SnapshotMatrix> bad{a, random_snapshots(10, 5, 3)};
  EXPECT_EQ(error_code([&] { concat_parametric(bad); }), ErrorCode::ShapeMismatch);
}

TEST(SnapshotIo, RoundTripIsBitwise) {
  for (unsigned seed : {1u, 7u, 42u}) {
    const SnapshotMatrix m = random_snapshots(13, 9, seed, seed % 2 ? std::optional<double>(0.035) : std::nullopt);
    const fs::path p = scratch("round.bin");
    save_snapshots(m, p.string());
    const SnapshotMatrix r = load_snapshots(p.string());
    EXPECT_EQ(r.variable_id, m.variable_id);
    EXPECT_EQ(r.data, m.data);
    EXPECT_EQ(r.times, m.times);
    EXPECT_EQ(r.dts, m.dts);
    EXPECT_EQ(r.param_tag, m.param_tag);
  }
}

TEST(SnapshotIo, FileSizeMatchesLayout) {
  SnapshotBuilder b("h", 200);
  for (int n = 0; n < 1112; ++n) b.record(Vector::Constant(200, n), n * 0.1, n ? 0.1 : 0.0);
  const fs::path p = scratch("size.bin");
  save_snapshots(b.finish(), p.string());
  EXPECT_EQ(fs::file_size(p), snapshot_file_size(200, 1112, 1));
  // magic, version, rows, cols, id, tag, data, times, dts, crc
  EXPECT_EQ(fs::file_size(p), 8u + 4 + 4 + 4 + 1 + 1 + 8 + 8u * 200 * 1112 + 8u * 1112 + 8u * 1111 + 4);
}

TEST(SnapshotIo, TruncatedOrCorruptFails) {
  const SnapshotMatrix m = random_snapshots(6, 5, 11);
  const fs::path p = scratch("trunc.bin");
  save_snapshots(m, p.string());
  const auto size = fs::file_size(p);
  fs::resize_file(p, size - 10);
  EXPECT_EQ(error_code([&] { load_snapshots(p.string()); }), ErrorCode::ChecksumMismatch);

  save_snapshots(m, p.string());
  flip_byte(p, 40);
  EXPECT_EQ(error_code([&] { load_snapshots(p.string()); }), ErrorCode::ChecksumMismatch);

  EXPECT_EQ(error_code([&] { load_snapshots(scratch("missing.bin").string()); }), ErrorCode::IoError);
}

TEST(SnapshotIo, ConcatenatedBlocksSurviveRoundTrip) {
  const std::vector<SnapshotMatrix> parts{random_snapshots(5, 4, 1, 0.0), random_snapshots(5, 6, 2, 1.0)};
  const SnapshotMatrix c = concat_parametric(parts);
  const fs::path p = scratch("concat.bin");
  save_snapshots(c, p.string());
  const SnapshotMatrix r = load_snapshots(p.string());
  ASSERT_EQ(r.blocks.size(), 2u);
  EXPECT_EQ(r.blocks[0].n_cols, 4);
  EXPECT_EQ(r.blocks[1].first_col, 4);
}

TEST(TimeAverage, Examples) {
  Matrix s(3, 4);
  s.colwise() = Vector::LinSpaced(3, 1.0, 3.0);
  EXPECT_EQ(time_average(s), Vector::LinSpaced(3, 1.0, 3.0));
  Matrix pm(2, 2);
  pm << 1.5, -1.5, -0.25, 0.25;
  EXPECT_EQ(time_average(pm), Vector::Zero(2));
  EXPECT_EQ(error_code([] { time_average(Matrix(3, 0)); }), ErrorCode::EmptySlice);
}

TEST(TimeAverage, KahanOracle) {
  const Matrix s = testutil::random_matrix(10, 7, 99, -5.0, 5.0);
  const Vector avg = time_average(s);
  for (int i = 0; i < 10; ++i) {
    double sum = 0.0, c = 0.0;
    for (int n = 0; n < 7; ++n) {
      const double y = s(i, n) - c;
      const double t = sum + y;
      c = (t - sum) - y;
      sum = t;
    }
    EXPECT_NEAR(avg[i], sum / 7.0, 1e-14);
  }
}
