#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "hyporom/errors.hpp"

namespace hyporom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform cell-centred mesh on [x_min, x_max] with n_cells cells.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, int n_cells) : x_min_(x_min), x_max_(x_max), n_cells_(n_cells) {
    if (n_cells <= 0 || !(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
      fail(ErrorCode::ConfigError, "grid needs n_cells > 0 and x_max > x_min (got n_cells=" +
                                       std::to_string(n_cells) + ")");
    }
    dx_ = (x_max - x_min) / n_cells;
  }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  int n_cells() const { return n_cells_; }
  double dx() const { return dx_; }
  double length() const { return x_max_ - x_min_; }

  double center(int i) const { return x_min_ + (i + 0.5) * dx_; }
  /// Interface j sits between cells j-1 and j; j ranges over 0..n_cells.
  double interface(int j) const { return x_min_ + j * dx_; }

  Vector centers() const {
    Vector x(n_cells_);
    for (int i = 0; i < n_cells_; ++i) x[i] = center(i);
    return x;
  }

  /// Midpoint-rule cell averages of f.
  template <class F>
  Vector sample(F&& f) const {
    Vector v(n_cells_);
    for (int i = 0; i < n_cells_; ++i) v[i] = f(center(i));
    return v;
  }

 private:
  double x_min_;
  double x_max_;
  int n_cells_;
  double dx_;
};

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) fail(ErrorCode::NonFiniteState, std::string(what) + " contains NaN/Inf");
}

}  // namespace hyporom
