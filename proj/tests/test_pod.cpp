#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <algorithm>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hyporom/pod.hpp"
#include "test_util.hpp"

using namespace hyporom;
using testutil::error_code;
namespace fs = std::filesystem;

namespace {

struct DenseSvd {
  Vector sigma;
  Matrix left;
};

// Left singular vectors from the eigenpairs of M^T M.
DenseSvd eig_oracle(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
  const int n = static_cast<int>(m.cols());
  DenseSvd out{Vector(n), Matrix(m.rows(), n)};
  for (int k = 0; k < n; ++k) {
    const int src = n - 1 - k;  // ascending -> descending
    out.sigma[k] = std::sqrt(std::max(0.0, es.eigenvalues()[src]));
    out.left.col(k) = m * es.eigenvectors().col(src) / out.sigma[k];
  }
  return out;
}

// largest sine of the principal angles between two orthonormal column sets
double max_sin_angle(const Matrix& a, const Matrix& b) {
  const Matrix r = b - a * (a.transpose() * b);
  return Eigen::JacobiSVD<Matrix>(r).singularValues()[0];
}

PodBasis basis_of(const Matrix& modes) {
  PodBasis b;
  b.variable_id = "w";
  b.modes = modes;
  b.singular_values = Vector::Ones(modes.cols());
  b.rank = static_cast<int>(modes.cols());
  return b;
}

}  // namespace

TEST(SelectModes, Examples) {
  const std::vector<double> a{1, 0, 0};
  EXPECT_EQ(select_modes(a, 1e-10), 1);
  EXPECT_EQ(select_modes(a, 0.9), 1);
  const std::vector<double> b{2, 1};
  EXPECT_EQ(select_modes(b, 0.1), 2);
  EXPECT_EQ(select_modes(b, 0.5), 1);
  EXPECT_EQ(select_modes(b, 0.1, 1), 1);
  const std::vector<double> z{0, 0};
  EXPECT_EQ(error_code([&] { select_modes(z, 0.1); }), ErrorCode::AllZeroSpectrum);
  const std::vector<double> up{1, 2};
  EXPECT_EQ(error_code([&] { select_modes(up, 0.1); }), ErrorCode::ConfigError);
  EXPECT_EQ(error_code([&] { select_modes(b, 1.5); }), ErrorCode::ConfigError);
}

TEST(SelectModes, MinimalityProperty) {
  for (unsigned seed = 1; seed <= 50; ++seed) {
    Vector s = testutil::random_vector(12, seed, 0.0, 1.0);
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    const std::vector<double> sig(s.data(), s.data() + s.size());
    const double eps = std::pow(10.0, -1.0 - static_cast<double>(seed % 4));
    const int m = select_modes(sig, eps);
    auto energy = [&](int k) { return s.head(k).squaredNorm() / s.squaredNorm(); };
    EXPECT_GE(energy(m), 1 - eps * eps - 1e-15);
    if (m > 1) EXPECT_LT(energy(m - 1), 1 - eps * eps);
  }
}

TEST(Decompose, MatchesEigenOracle) {
  const std::vector<std::pair<int, int>> shapes{{50, 20}, {64, 64}, {8, 30}, {33, 5}};
  unsigned seed = 10;
  for (const auto& [r, c] : shapes) {
    const Matrix m = testutil::random_matrix(r, c, ++seed);
    const PodDecomposition d = decompose(m);
    const DenseSvd o = eig_oracle(m);
    const int k = std::min(r, c);
    ASSERT_EQ(d.singular_values.size(), k);
    for (int i = 0; i < k; ++i) EXPECT_NEAR(d.singular_values[i], o.sigma[i], 1e-10) << r << "x" << c << " i=" << i;
    for (int j = 1; j <= std::min(k, 6); ++j) {
      EXPECT_LT(max_sin_angle(d.left.leftCols(j), o.left.leftCols(j)), 1e-8) << r << "x" << c << " j=" << j;
    }
  }
}

TEST(Decompose, SignConventionAndOrthonormality) {
  const Matrix m = testutil::random_matrix(30, 12, 5);
  const PodDecomposition d = decompose(m);
  for (int k = 0; k < d.left.cols(); ++k) {
    Eigen::Index arg;
    d.left.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(d.left(arg, k), 0.0);
  }
  EXPECT_LE(testutil::max_abs_diff(d.left.transpose() * d.left, Matrix::Identity(12, 12)), 1e-12);
  // deterministic
  EXPECT_EQ(decompose(m).left, d.left);
}

TEST(ComputeBasis, RankOneSlice) {
  const Vector v = testutil::random_vector(40, 3, 0.1, 2.0);
  Matrix s(40, 25);
  s.colwise() = v;
  const PodBasis b = compute_basis(s, 1e-10);
  EXPECT_EQ(b.n_modes(), 1);
  EXPECT_EQ(b.rank, 1);
  EXPECT_NEAR(std::abs(b.modes.col(0).dot(v.normalized())), 1.0, 1e-14);
  EXPECT_NEAR(b.singular_values[0] * b.singular_values[0], 25 * v.squaredNorm(), 1e-10 * 25 * v.squaredNorm());
  EXPECT_LE((lift(b, project(b, v)) - v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ComputeBasis, DiagonalSlice) {
  const Matrix s = Vector(Eigen::Vector3d(3, 2, 1)).asDiagonal();
  const PodBasis b = compute_basis(s, 1e-12);
  EXPECT_EQ(b.n_modes(), 3);
  EXPECT_NEAR(b.singular_values[0], 3.0, 1e-15);
  EXPECT_NEAR(b.singular_values[1], 2.0, 1e-15);
  EXPECT_NEAR(b.singular_values[2], 1.0, 1e-15);
}

TEST(ComputeBasis, CapAndErrors) {
  const Matrix s = testutil::random_matrix(20, 10, 8);
  EXPECT_EQ(compute_basis(s, 1e-12, PodOptions{3, 0.0}).n_modes(), 3);
  EXPECT_EQ(error_code([] { compute_basis(Matrix(0, 0), 0.1); }), ErrorCode::EmptySlice);
  EXPECT_EQ(error_code([&] { compute_basis(s, 0.0); }), ErrorCode::ConfigError);
  // a numerically zero slice gives one harmless mode
  EXPECT_EQ(compute_basis(Matrix::Zero(5, 4), 0.1).n_modes(), 1);
}

TEST(ProjectLift, Examples) {
  const PodBasis b = basis_of(testutil::random_basis(15, 4, 2));
  for (int k = 0; k < 4; ++k) {
    const Vector c = project(b, b.modes.col(k));
    EXPECT_LE((c - Vector::Unit(4, k)).cwiseAbs().maxCoeff(), 1e-13);
  }
  const Vector f = testutil::random_vector(15, 4);
  const Vector perp = f - b.modes * (b.modes.transpose() * f);
  EXPECT_LE(project(b, perp).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_EQ(lift(b, Vector::Zero(4)), Vector::Zero(15));
  const Vector resid = f - lift(b, project(b, f));
  EXPECT_LE((b.modes.transpose() * resid).cwiseAbs().maxCoeff(), 1e-12);
  const Vector c = testutil::random_vector(4, 6);
  EXPECT_LE((project(b, lift(b, c)) - c).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_EQ(error_code([&] { project(b, Vector::Ones(3)); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(error_code([&] { lift(b, Vector::Ones(3)); }), ErrorCode::ShapeMismatch);
}

TEST(WindowTransfer, IdentityForSameBasis) {
  const PodBasis b = basis_of(testutil::random_basis(12, 3, 9));
  const Vector c = testutil::random_vector(3, 1);
  EXPECT_LE((window_transfer(c, b, b) - c).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(WindowTransfer, SuperspaceKeepsField) {
  const Matrix q = testutil::random_basis(12, 6, 10);
  const PodBasis small = basis_of(q.leftCols(3));
  const PodBasis big = basis_of(q);
  const Vector c = testutil::random_vector(3, 2);
  EXPECT_LE((lift(big, window_transfer(c, small, big)) - lift(small, c)).norm(), 1e-12);
}

TEST(WindowTransfer, TripleProductOracle) {
  const PodBasis a = basis_of(testutil::random_basis(10, 4, 11));
  const PodBasis b = basis_of(testutil::random_basis(10, 3, 12));
  const Vector c = testutil::random_vector(4, 3);
  const Vector got = window_transfer(c, a, b);
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (int i = 0; i < 10; ++i)
      for (int l = 0; l < 4; ++l) s += c[l] * a.modes(i, l) * b.modes(i, k);
    EXPECT_NEAR(got[k], s, 1e-13);
  }
  const PodBasis other = basis_of(testutil::random_basis(9, 3, 13));
  EXPECT_EQ(error_code([&] { window_transfer(c, a, other); }), ErrorCode::ShapeMismatch);
}

TEST(BasisIo, RoundTripAndCorruption) {
  const fs::path dir = fs::temp_directory_path() / "hyporom_test_pod";
  fs::create_directories(dir);
  const PodBasis b = compute_basis(testutil::random_matrix(17, 9, 21), 1e-3, {}, "q", 2);
  const std::string p = (dir / "basis.bin").string();
  save_basis(b, p);
  const PodBasis r = load_basis(p);
  EXPECT_EQ(r.modes, b.modes);
  EXPECT_EQ(r.singular_values, b.singular_values);
  EXPECT_EQ(r.variable_id, "q");
  EXPECT_EQ(r.window_index, 2);
  EXPECT_EQ(r.eps_pod, b.eps_pod);
  EXPECT_EQ(r.rank, b.rank);
  fs::resize_file(p, fs::file_size(p) - 3);
  EXPECT_EQ(error_code([&] { load_basis(p); }), ErrorCode::ChecksumMismatch);
}
