#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyporom/balance_laws.hpp"
#include "hyporom/errors.hpp"
#include "hyporom/fom.hpp"
#include "hyporom/grid.hpp"

namespace hyporom {

/// Provenance of a contiguous column block (one FOM run) inside a matrix.
struct SnapshotBlock {
  std::optional<double> param_tag;
  int first_col = 0;
  int n_cols = 0;
};

/// One variable's trajectory: column n is the field at times[n].
///
/// Single-run matrices have dts.size() == n_cols() - 1 with
/// times[n+1] - times[n] == dts[n]. After concatenation the blocks restart at
/// their own t = 0, and the dt entry bridging two blocks is stored as 0.
struct SnapshotMatrix {
  std::string variable_id;
  Matrix data;
  std::vector<double> times;
  std::vector<double> dts;
  std::optional<double> param_tag;
  std::vector<SnapshotBlock> blocks;

  int n_rows() const { return static_cast<int>(data.rows()); }
  int n_cols() const { return static_cast<int>(data.cols()); }
};

/// Half-open column range [begin, end).
struct ColumnRange {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
  bool contains(int c) const { return c >= begin && c < end; }
  bool operator==(const ColumnRange&) const = default;
};

struct WindowPartition {
  std::vector<ColumnRange> ranges;
  int n_windows() const { return static_cast<int>(ranges.size()); }
  int window_of(int column) const {
    for (int v = 0; v < n_windows(); ++v) {
      if (ranges[v].contains(column)) return v;
    }
    return -1;
  }
};

/// Appends columns one at a time.
class SnapshotBuilder {
 public:
  SnapshotBuilder(std::string variable_id, int n_rows) : id_(std::move(variable_id)), n_rows_(n_rows) {}

  const std::string& variable_id() const { return id_; }
  int n_rows() const { return n_rows_; }
  int n_cols() const { return static_cast<int>(times_.size()); }

  /// `dt` is the time elapsed since the previously recorded column; it is
  /// ignored for the first column.
  void record(const Vector& column, double t, double dt) {
    if (column.size() != n_rows_) {
      fail(ErrorCode::ShapeMismatch, "column of length " + std::to_string(column.size()) + " for variable '" +
                                         id_ + "' with " + std::to_string(n_rows_) + " rows");
    }
    if (!times_.empty()) {
      const double last = times_.back();
      if (!(t > last)) {
        fail(ErrorCode::NonMonotoneTime, "t=" + std::to_string(t) + " not after " + std::to_string(last));
      }
      dts_.push_back(dt);
    }
    times_.push_back(t);
    buffer_.insert(buffer_.end(), column.data(), column.data() + n_rows_);
  }

  SnapshotMatrix finish(std::optional<double> param_tag = std::nullopt) const {
    SnapshotMatrix m;
    m.variable_id = id_;
    m.data = Eigen::Map<const Matrix>(buffer_.data(), n_rows_, n_cols());
    m.times = times_;
    m.dts = dts_;
    m.param_tag = param_tag;
    m.blocks = {SnapshotBlock{param_tag, 0, n_cols()}};
    return m;
  }

 private:
  std::string id_;
  int n_rows_;
  std::vector<double> buffer_;
  std::vector<double> times_;
  std::vector<double> dts_;
};

using SnapshotSet = std::map<std::string, SnapshotMatrix>;

/// Uniform split of n_t columns into n_v windows; the first (n_t mod n_v)
/// windows get one extra column.
inline WindowPartition partition_uniform(int n_t, int n_v) {
  if (n_v < 1) fail(ErrorCode::ConfigError, "number of windows must be >= 1");
  if (n_t < 2 * n_v) {
    fail(ErrorCode::TooFewSnapshots, std::to_string(n_t) + " snapshots cannot fill " + std::to_string(n_v) +
                                         " windows of at least 2 columns");
  }
  WindowPartition p;
  const int base = n_t / n_v;
  const int extra = n_t % n_v;
  int begin = 0;
  for (int v = 0; v < n_v; ++v) {
    const int size = base + (v < extra ? 1 : 0);
    p.ranges.push_back({begin, begin + size});
    begin += size;
  }
  return p;
}

/// Training-set matrix: horizontal concatenation in the given order.
inline SnapshotMatrix concat_parametric(std::span<const SnapshotMatrix> parts) {
  if (parts.empty()) fail(ErrorCode::ShapeMismatch, "nothing to concatenate");
  const auto& first = parts.front();
  int total = 0;
  for (const auto& m : parts) {
    if (m.variable_id != first.variable_id || m.n_rows() != first.n_rows()) {
      fail(ErrorCode::ShapeMismatch, "cannot concatenate '" + m.variable_id + "' (" + std::to_string(m.n_rows()) +
                                         " rows) with '" + first.variable_id + "' (" +
                                         std::to_string(first.n_rows()) + " rows)");
    }
    total += m.n_cols();
  }
  SnapshotMatrix out;
  out.variable_id = first.variable_id;
  out.data.resize(first.n_rows(), total);
  int col = 0;
  for (const auto& m : parts) {
    out.data.middleCols(col, m.n_cols()) = m.data;
    if (!out.times.empty()) out.dts.push_back(0.0);
    out.times.insert(out.times.end(), m.times.begin(), m.times.end());
    out.dts.insert(out.dts.end(), m.dts.begin(), m.dts.end());
    for (const auto& b : m.blocks) out.blocks.push_back({b.param_tag, b.first_col + col, b.n_cols});
    col += m.n_cols();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recorders: FOM sinks that fill a SnapshotSet.

struct RecorderOptions {
  int stride = 1;               // keep every stride-th step (plus first and last)
  bool auxiliary = true;        // u = q/h and f = |q|/h^{7/3}
  bool interfaces = false;      // alpha0, alpha1, utilde, htilde at N+1 interfaces
  double g = 9.81;
};

inline Vector friction_factor(const SweState& s) {
  Vector f(s.size());
  for (int i = 0; i < s.size(); ++i) f[i] = std::abs(s.q[i]) / std::pow(s.h[i], 7.0 / 3.0);
  return f;
}

class SnapshotRecorder {
 public:
  explicit SnapshotRecorder(RecorderOptions opts = {}) : opts_(opts) {
    if (opts_.stride < 1) fail(ErrorCode::ConfigError, "snapshot stride must be >= 1");
  }

  void operator()(const Vector& w, const StepInfo& info) {
    if (!keep(info)) return;
    put("w", w, info);
  }

  void operator()(const SweState& s, const StepInfo& info) {
    if (!keep(info)) return;
    put("h", s.h, info);
    put("q", s.q, info);
    if (opts_.auxiliary) {
      put("u", s.velocity(), info);
      put("f", friction_factor(s), info);
    }
    if (opts_.interfaces) {
      const HllInterfaces itf = hll_interfaces(s, opts_.g);
      put("alpha0", itf.alpha0, info);
      put("alpha1", itf.alpha1, info);
      put("utilde", itf.utilde, info);
      put("htilde", itf.htilde, info);
    }
  }

  SnapshotSet finish(std::optional<double> param_tag = std::nullopt) const {
    SnapshotSet out;
    for (const auto& [id, b] : builders_) out.emplace(id, b.finish(param_tag));
    return out;
  }

 private:
  bool keep(const StepInfo& info) {
    pending_dt_ += info.dt;
    const bool k = info.step == 0 || info.last || info.step % opts_.stride == 0;
    if (k) {
      current_dt_ = pending_dt_;
      pending_dt_ = 0.0;
    }
    return k;
  }

  void put(const std::string& id, const Vector& v, const StepInfo& info) {
    auto it = builders_.find(id);
    if (it == builders_.end()) it = builders_.emplace(id, SnapshotBuilder(id, static_cast<int>(v.size()))).first;
    it->second.record(v, info.t, current_dt_);
  }

  RecorderOptions opts_;
  std::map<std::string, SnapshotBuilder> builders_;
  double pending_dt_ = 0.0;
  double current_dt_ = 0.0;
};

/// Column mean of a slice; the per-window time average.
inline Vector time_average(const Matrix& slice) {
  if (slice.cols() == 0 || slice.rows() == 0) fail(ErrorCode::EmptySlice, "time average of an empty slice");
  return slice.rowwise().mean();
}

}  // namespace hyporom
