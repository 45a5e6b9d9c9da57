#pragma once

// Discrete empirical interpolation: greedy selection of interpolation rows
// and online recovery of coefficients from point values. Indices are 0-based.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "hyporom/errors.hpp"
#include "hyporom/grid.hpp"

namespace hyporom {

struct DeimInterpolant {
  Matrix basis;                          // U, N_rows x M
  std::vector<int> indices;              // interpolation rows, in greedy order
  Eigen::PartialPivLU<Matrix> solver;    // factorization of U restricted to `indices`
  double condition = 1.0;                // 1-norm condition estimate of U_I

  int n_modes() const { return static_cast<int>(basis.cols()); }

  Matrix restricted(const Matrix& m) const {
    Matrix out(indices.size(), m.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) out.row(r) = m.row(indices[r]);
    return out;
  }
};

namespace detail {

inline int first_argmax_abs(const Vector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  return best;
}

inline Matrix rows_of(const Matrix& u, const std::vector<int>& idx, int n_cols) {
  Matrix out(idx.size(), n_cols);
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(r) = u.row(idx[r]).head(n_cols);
  return out;
}

inline double inverse_condition_guard(const Matrix& ui) {
  Eigen::JacobiSVD<Matrix> svd(ui);
  const auto& s = svd.singularValues();
  return s[s.size() - 1] / s[0];
}

}  // namespace detail

inline DeimInterpolant deim_offline(const Matrix& modes) {
  const int m_total = static_cast<int>(modes.cols());
  if (m_total < 1 || modes.rows() < m_total) {
    fail(ErrorCode::ShapeMismatch, "DEIM needs 1 <= M <= N_rows, got M=" + std::to_string(m_total));
  }
  DeimInterpolant d;
  d.basis = modes;
  d.indices.push_back(detail::first_argmax_abs(modes.col(0)));
  for (int m = 1; m < m_total; ++m) {
    const Matrix ui = detail::rows_of(modes, d.indices, m);
    Vector rhs(m);
    for (int r = 0; r < m; ++r) rhs[r] = modes(d.indices[r], m);
    const Vector c = ui.partialPivLu().solve(rhs);
    const Vector residual = modes.col(m) - modes.leftCols(m) * c;
    const int next = detail::first_argmax_abs(residual);
    if (!(std::abs(residual[next]) > 0.0)) {
      fail(ErrorCode::SingularInterpolationMatrix, "DEIM residual vanished at step " + std::to_string(m + 1));
    }
    d.indices.push_back(next);
  }

  const Matrix ui = d.restricted(modes);
  const double rcond = detail::inverse_condition_guard(ui);
  if (!(rcond > 1e-14)) {
    fail(ErrorCode::SingularInterpolationMatrix, "U_I is numerically singular (1/cond = " + std::to_string(rcond) + ")");
  }
  d.condition = 1.0 / rcond;
  d.solver.compute(ui);
  return d;
}

/// Solves U_I c = values, where values[m] is the field at indices[m].
inline Vector deim_coefficients(const DeimInterpolant& d, const Vector& values) {
  if (values.size() != d.n_modes()) fail(ErrorCode::ShapeMismatch, "DEIM value count mismatch");
  if (!values.allFinite()) fail(ErrorCode::EvaluationError, "non-finite value at a DEIM point");
  return d.solver.solve(values);
}

/// `eval(i)` returns the field at row i; it is called only at the
/// interpolation indices.
template <class Eval>
Vector deim_online(const DeimInterpolant& d, Eval&& eval) {
  Vector values(d.n_modes());
  for (int m = 0; m < d.n_modes(); ++m) values[m] = eval(d.indices[m]);
  return deim_coefficients(d, values);
}

inline Vector deim_reconstruct(const DeimInterpolant& d, const Vector& coefficients) {
  return d.basis * coefficients;
}

}  // namespace hyporom
