#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include <Eigen/SVD>

#include "hyporom/binary_io.hpp"
#include "hyporom/errors.hpp"
#include "hyporom/grid.hpp"

namespace hyporom {

/// Thin SVD of a snapshot slice, kept whole so that bases of any size up to
/// min(rows, cols) can be cut from it.
struct PodDecomposition {
  Matrix left;              // rows x min(rows, cols), orthonormal columns
  Vector singular_values;   // descending
  int rank = 0;             // count of values above the numerical-rank cutoff
};

struct PodBasis {
  std::string variable_id;
  Matrix modes;             // rows x M
  Vector singular_values;   // full spectrum of the slice
  int rank = 0;
  int window_index = 0;
  double eps_pod = 0.0;
  double energy_captured = 1.0;

  int n_rows() const { return static_cast<int>(modes.rows()); }
  int n_modes() const { return static_cast<int>(modes.cols()); }
};

/// Smallest M whose captured energy sum_{i<=M} s_i^2 / sum s_i^2 reaches
/// 1 - eps^2, optionally capped at max_modes. The test is done on the tail
/// sum so tiny eps values are not lost to rounding of the ratio.
inline int select_modes(std::span<const double> sigma, double eps_pod, std::optional<int> max_modes = {}) {
  if (!(eps_pod > 0.0 && eps_pod < 1.0)) fail(ErrorCode::ConfigError, "eps_pod must lie in (0, 1)");
  double total = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i] < 0.0 || (i > 0 && sigma[i] > sigma[i - 1])) {
      fail(ErrorCode::ConfigError, "singular values must be non-negative and non-increasing");
    }
    total += sigma[i] * sigma[i];
  }
  if (!(total > 0.0)) fail(ErrorCode::AllZeroSpectrum, "every singular value is zero");

  const int r = static_cast<int>(sigma.size());
  std::vector<double> tail(r + 1, 0.0);
  for (int i = r - 1; i >= 0; --i) tail[i] = tail[i + 1] + sigma[i] * sigma[i];
  int m = r;
  for (int k = 1; k <= r; ++k) {
    if (tail[k] <= eps_pod * eps_pod * total) {
      m = k;
      break;
    }
  }
  if (max_modes) m = std::min(m, std::max(1, *max_modes));
  return m;
}

inline double captured_energy(const Vector& sigma, int rank, int m) {
  const double total = sigma.head(rank).squaredNorm();
  if (!(total > 0.0)) return 1.0;
  return std::min(1.0, sigma.head(std::min(m, rank)).squaredNorm() / total);
}

/// Values at or below max(rows, cols) * s_1 * 1e-13, or below
/// `absolute_floor`, count as zero.
inline PodDecomposition decompose(const Matrix& slice, double absolute_floor = 0.0) {
  if (slice.rows() == 0 || slice.cols() == 0) fail(ErrorCode::EmptySlice, "empty snapshot slice");
  if (!slice.allFinite()) fail(ErrorCode::NonFiniteState, "snapshot slice contains NaN/Inf");
  PodDecomposition d;
  Eigen::BDCSVD<Matrix> svd(slice, Eigen::ComputeThinU);
  if (svd.info() == Eigen::Success && svd.matrixU().allFinite() && svd.singularValues().allFinite()) {
    d.left = svd.matrixU();
    d.singular_values = svd.singularValues();
  } else {
    // divide-and-conquer can return NaN on exactly repeated columns
    Eigen::JacobiSVD<Matrix> jac(slice, Eigen::ComputeThinU);
    if (jac.info() != Eigen::Success || !jac.matrixU().allFinite()) {
      fail(ErrorCode::BreakdownInEigensolve, "SVD did not converge");
    }
    d.left = jac.matrixU();
    d.singular_values = jac.singularValues();
  }
  const double s1 = d.singular_values.size() ? d.singular_values[0] : 0.0;
  const double cutoff =
      std::max(static_cast<double>(std::max(slice.rows(), slice.cols())) * s1 * 1e-13, absolute_floor);
  d.rank = 0;
  for (int i = 0; i < d.singular_values.size(); ++i) {
    if (d.singular_values[i] > cutoff) ++d.rank;
  }

  for (int k = 0; k < d.left.cols(); ++k) {
    Eigen::Index arg = 0;
    d.left.col(k).cwiseAbs().maxCoeff(&arg);
    if (d.left(arg, k) < 0.0) d.left.col(k) *= -1.0;
  }
  return d;
}

inline void check_orthonormal(const Matrix& modes, const std::string& what) {
  const Matrix gram = modes.transpose() * modes;
  const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (!(err <= 1e-12)) {
    fail(ErrorCode::BreakdownInEigensolve, what + ": modes not orthonormal (" + std::to_string(err) + ")");
  }
}

/// First m left singular vectors of `d`. m is clipped to the number of
/// available vectors. A slice with no value above the cutoff yields a single
/// mode, which is harmless because every field it must represent is zero.
inline PodBasis basis_from(const PodDecomposition& d, int m, std::string variable_id, int window_index,
                           double eps_pod) {
  m = std::clamp(m, 1, static_cast<int>(d.left.cols()));
  PodBasis b;
  b.variable_id = std::move(variable_id);
  b.modes = d.left.leftCols(m);
  b.singular_values = d.singular_values;
  b.rank = d.rank;
  b.window_index = window_index;
  b.eps_pod = eps_pod;
  b.energy_captured = captured_energy(d.singular_values, d.rank, m);
  check_orthonormal(b.modes, "basis '" + b.variable_id + "'");
  return b;
}

/// Mode count the energy criterion asks for on `d`, never more than the
/// numerical rank; 1 when the slice is numerically zero.
inline int required_modes(const PodDecomposition& d, double eps_pod, std::optional<int> max_modes = {}) {
  if (d.rank == 0) return 1;
  const std::span<const double> sigma(d.singular_values.data(), static_cast<std::size_t>(d.rank));
  return select_modes(sigma, eps_pod, max_modes);
}

struct PodOptions {
  std::optional<int> max_modes;
  double absolute_floor = 0.0;
};

inline PodBasis compute_basis(const Matrix& slice, double eps_pod, const PodOptions& opts = {},
                              std::string variable_id = "", int window_index = 0) {
  if (!(eps_pod > 0.0 && eps_pod < 1.0)) fail(ErrorCode::ConfigError, "eps_pod must lie in (0, 1)");
  const PodDecomposition d = decompose(slice, opts.absolute_floor);
  return basis_from(d, required_modes(d, eps_pod, opts.max_modes), std::move(variable_id), window_index, eps_pod);
}

inline Vector project(const PodBasis& basis, const Vector& field) {
  if (field.size() != basis.n_rows()) {
    fail(ErrorCode::ShapeMismatch, "field of length " + std::to_string(field.size()) + " vs basis rows " +
                                       std::to_string(basis.n_rows()));
  }
  return basis.modes.transpose() * field;
}

inline Vector lift(const PodBasis& basis, const Vector& coefficients) {
  if (coefficients.size() != basis.n_modes()) {
    fail(ErrorCode::ShapeMismatch, std::to_string(coefficients.size()) + " coefficients for " +
                                       std::to_string(basis.n_modes()) + " modes");
  }
  return basis.modes * coefficients;
}

/// (Modes_to)^T Modes_from: continuity of the projected field across a window change.
inline Matrix transfer_matrix(const PodBasis& from, const PodBasis& to) {
  if (from.n_rows() != to.n_rows()) fail(ErrorCode::ShapeMismatch, "window bases differ in row count");
  return to.modes.transpose() * from.modes;
}

inline Vector window_transfer(const Vector& coefficients, const PodBasis& from, const PodBasis& to) {
  if (coefficients.size() != from.n_modes()) fail(ErrorCode::ShapeMismatch, "coefficient length mismatch");
  return transfer_matrix(from, to) * coefficients;
}

// ---------------------------------------------------------------------------
// HYPBASE1 files.

inline constexpr std::string_view kBasisMagic = "HYPBASE1";

inline void save_basis(const PodBasis& b, const std::string& path) {
  io::ByteWriter w;
  w.magic(kBasisMagic);
  w.u32(io::kFormatVersion);
  w.u32(static_cast<std::uint32_t>(b.n_rows()));
  w.u32(static_cast<std::uint32_t>(b.n_modes()));
  w.label(b.variable_id);
  w.u32(static_cast<std::uint32_t>(b.window_index));
  w.f64(b.eps_pod);
  w.f64(b.energy_captured);
  w.u32(static_cast<std::uint32_t>(b.rank));
  w.u32(static_cast<std::uint32_t>(b.singular_values.size()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = b.modes;
  w.f64s(rm.data(), static_cast<std::size_t>(rm.size()));
  w.f64s(b.singular_values.data(), static_cast<std::size_t>(b.singular_values.size()));
  w.commit(path);
}

inline PodBasis load_basis(const std::string& path) {
  io::ByteReader r(path, kBasisMagic);
  PodBasis b;
  const std::uint32_t rows = r.u32();
  const std::uint32_t m = r.u32();
  b.variable_id = r.label();
  b.window_index = static_cast<int>(r.u32());
  b.eps_pod = r.f64();
  b.energy_captured = r.f64();
  b.rank = static_cast<int>(r.u32());
  const std::uint32_t n_sigma = r.u32();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, m);
  r.f64s(rm.data(), static_cast<std::size_t>(rm.size()));
  b.modes = rm;
  b.singular_values.resize(n_sigma);
  r.f64s(b.singular_values.data(), n_sigma);
  if (!r.exhausted()) fail(ErrorCode::IoError, path + ": trailing bytes after payload");
  return b;
}

}  // namespace hyporom
