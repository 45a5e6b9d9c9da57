#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>

#include "hyporom/binary_io.hpp"
#include "hyporom/snapshots.hpp"

namespace hyporom {

inline constexpr std::string_view kSnapshotMagic = "HYPSNAP1";

/// Bytes taken by a snapshot file for the given shape and label length.
inline std::size_t snapshot_file_size(std::size_t n_rows, std::size_t n_t, std::size_t id_length) {
  const std::size_t header = 8 + 4 + 4 + 4 + 1 + id_length + 8;
  return header + 8 * n_rows * n_t + 8 * n_t + 8 * (n_t - 1) + 4;
}

inline void save_snapshots(const SnapshotMatrix& m, const std::string& path) {
  if (m.n_cols() < 1 || static_cast<int>(m.times.size()) != m.n_cols() ||
      static_cast<int>(m.dts.size()) != m.n_cols() - 1) {
    fail(ErrorCode::ShapeMismatch, "snapshot metadata does not match " + std::to_string(m.n_cols()) + " columns");
  }
  io::ByteWriter w;
  w.magic(kSnapshotMagic);
  w.u32(io::kFormatVersion);
  w.u32(static_cast<std::uint32_t>(m.n_rows()));
  w.u32(static_cast<std::uint32_t>(m.n_cols()));
  w.label(m.variable_id);
  w.f64(m.param_tag.value_or(std::numeric_limits<double>::quiet_NaN()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = m.data;
  w.f64s(row_major.data(), static_cast<std::size_t>(row_major.size()));
  w.f64s(m.times.data(), m.times.size());
  w.f64s(m.dts.data(), m.dts.size());
  w.commit(path);
}

/// Block provenance is rebuilt from the zero-dt junctions that concatenation
/// leaves behind; per-block parameter tags are not stored.
inline SnapshotMatrix load_snapshots(const std::string& path) {
  io::ByteReader r(path, kSnapshotMagic);
  const std::uint32_t n_rows = r.u32();
  const std::uint32_t n_t = r.u32();
  if (n_t == 0) fail(ErrorCode::IoError, path + ": zero columns");
  SnapshotMatrix m;
  m.variable_id = r.label();
  const double tag = r.f64();
  if (!std::isnan(tag)) m.param_tag = tag;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(n_rows, n_t);
  r.f64s(row_major.data(), static_cast<std::size_t>(row_major.size()));
  m.data = row_major;
  m.times.resize(n_t);
  r.f64s(m.times.data(), n_t);
  m.dts.resize(n_t - 1);
  r.f64s(m.dts.data(), n_t - 1);
  if (!r.exhausted()) fail(ErrorCode::IoError, path + ": trailing bytes after payload");

  int first = 0;
  for (int n = 0; n < static_cast<int>(m.dts.size()); ++n) {
    if (m.dts[n] == 0.0) {
      m.blocks.push_back({std::nullopt, first, n + 1 - first});
      first = n + 1;
    }
  }
  m.blocks.push_back({m.blocks.empty() ? m.param_tag : std::nullopt, first, static_cast<int>(n_t) - first});
  return m;
}

/// One row per snapshot: t followed by the column's entries.
inline void export_csv(const SnapshotMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path);
  out << std::setprecision(17);
  out << "t";
  for (int i = 0; i < m.n_rows(); ++i) out << ',' << i;
  out << '\n';
  for (int n = 0; n < m.n_cols(); ++n) {
    out << m.times[n];
    for (int i = 0; i < m.n_rows(); ++i) out << ',' << m.data(i, n);
    out << '\n';
  }
}

}  // namespace hyporom
