#pragma once

// Offline assembly of reduced operators. Each operator is the Galerkin
// projection of one term of the full-order update onto the POD bases.
// Boundary cells are handled by building ghost-extended copies of the mode
// matrices (the same ghost rule the full-order scheme uses), so the interior
// sums and the boundary terms come out of one expression.
//
// Third-order tensors T_{plk} are stored as P x (L*K) matrices, column
// l*K + k, so that (a^T T b)_p = sum_{l,k} a_l T_{plk} b_k is one
// matrix-vector product with kron(a, b).

#include <cmath>
#include <map>
#include <string>

#include "hyporom/balance_laws.hpp"
#include "hyporom/binary_io.hpp"
#include "hyporom/errors.hpp"
#include "hyporom/grid.hpp"

namespace hyporom {

enum class RomSystem : std::uint8_t { Transport = 0, Burgers = 1, SweLF = 2, SweHLL = 3 };

/// How the SWE nonlinear auxiliaries (u in convection, friction) enter.
enum class Linearization : std::uint8_t {
  AllTimeAveraging = 0,  // u and the friction factor from window means
  DeimUTavF = 1,         // u by DEIM, |u|/h^{4/3} from window means
  DeimUDeimF = 2,        // u and f = |q|/h^{7/3} by DEIM
};

/// How the HLL viscosity coefficients alpha0, alpha1 enter.
enum class CoeffTreatment : std::uint8_t { TimeAveraging = 0, Deim = 1 };

inline std::string_view to_string(RomSystem s) {
  switch (s) {
    case RomSystem::Transport: return "transport";
    case RomSystem::Burgers: return "burgers";
    case RomSystem::SweLF: return "swe-lf";
    case RomSystem::SweHLL: return "swe-hll";
  }
  return "?";
}

inline std::string_view to_string(Linearization l) {
  switch (l) {
    case Linearization::AllTimeAveraging: return "all-tav";
    case Linearization::DeimUTavF: return "deim-u-tav-f";
    case Linearization::DeimUDeimF: return "deim-u-deim-f";
  }
  return "?";
}

inline std::string_view to_string(CoeffTreatment c) {
  return c == CoeffTreatment::Deim ? "deim" : "tav";
}

struct Tensor3 {
  int p = 0;
  int l = 0;
  int k = 0;
  Matrix data;  // p x (l*k)

  Tensor3() = default;
  Tensor3(int p_, int l_, int k_, Matrix d) : p(p_), l(l_), k(k_), data(std::move(d)) {
    if (data.rows() != p || data.cols() != l * k) fail(ErrorCode::ShapeMismatch, "tensor storage shape");
  }

  double operator()(int ip, int il, int ik) const { return data(ip, il * k + ik); }

  /// (a^T T b)_p.
  Vector contract(const Vector& a, const Vector& b) const {
    if (a.size() != l || b.size() != k) {
      fail(ErrorCode::ShapeMismatch, "tensor contraction with vectors of length " + std::to_string(a.size()) +
                                         ", " + std::to_string(b.size()) + " for " + std::to_string(p) + "x" +
                                         std::to_string(l) + "x" + std::to_string(k));
    }
    Vector ab(l * k);
    for (int il = 0; il < l; ++il) ab.segment(il * k, k) = a[il] * b;
    return data * ab;
  }

  /// The matrix b -> a^T T b for fixed a.
  Matrix fix_first(const Vector& a) const {
    Matrix out = Matrix::Zero(p, k);
    for (int il = 0; il < l; ++il) out += a[il] * data.middleCols(il * k, k);
    return out;
  }
};

struct RomOperators {
  RomSystem system = RomSystem::Transport;
  Linearization linearization = Linearization::DeimUDeimF;
  CoeffTreatment coefficients = CoeffTreatment::Deim;
  int window_index = 0;
  std::map<std::string, Matrix> matrices;
  std::map<std::string, Vector> vectors;
  std::map<std::string, Tensor3> tensors;
  std::map<std::string, double> scalars;

  const Matrix& matrix(const std::string& name) const { return lookup(matrices, name); }
  const Vector& vector(const std::string& name) const { return lookup(vectors, name); }
  const Tensor3& tensor(const std::string& name) const { return lookup(tensors, name); }
  double scalar(const std::string& name) const { return lookup(scalars, name); }
  bool has(const std::string& name) const {
    return matrices.count(name) || vectors.count(name) || tensors.count(name);
  }

 private:
  template <class Map>
  static const typename Map::mapped_type& lookup(const Map& m, const std::string& name) {
    const auto it = m.find(name);
    if (it == m.end()) fail(ErrorCode::ShapeMismatch, "reduced operator '" + name + "' not assembled");
    return it->second;
  }
};

// ---------------------------------------------------------------------------
// Building blocks.

/// Rows i+1 and i-1 of `m` for every cell i, with ghost rows
/// left * row(0) and right * row(n-1).
template <class M>
struct Neighbours {
  M next;
  M prev;
};

template <class M>
Neighbours<M> neighbours(const M& m, typename M::Scalar left = 1, typename M::Scalar right = 1) {
  const Eigen::Index n = m.rows();
  Neighbours<M> out{M(n, m.cols()), M(n, m.cols())};
  if (n > 1) {
    out.next.topRows(n - 1) = m.bottomRows(n - 1);
    out.prev.bottomRows(n - 1) = m.topRows(n - 1);
  }
  out.next.row(n - 1) = right * m.row(n - 1);
  out.prev.row(0) = left * m.row(0);
  return out;
}

/// Row-wise Khatri-Rao product: column l*Y + k is x(:,l) .* y(:,k).
template <class M>
M row_khatri_rao(const M& x, const M& y) {
  if (x.rows() != y.rows()) fail(ErrorCode::ShapeMismatch, "Khatri-Rao row mismatch");
  const Eigen::Index kk = y.cols();
  M out(x.rows(), x.cols() * kk);
  for (Eigen::Index l = 0; l < x.cols(); ++l) out.middleCols(l * kk, kk) = y.array().colwise() * x.col(l).array();
  return out;
}

template <class M>
Tensor3 project_tensor(const M& test, const M& rows, Eigen::Index l, Eigen::Index k) {
  const M t = test.transpose() * rows;
  return Tensor3(static_cast<int>(test.cols()), static_cast<int>(l), static_cast<int>(k), t.template cast<double>());
}

inline Matrix as_column(const Vector& v) { return Matrix(v); }

/// Interface array (N+1 rows) split into the right and left interface of each cell.
struct InterfaceSides {
  Matrix right;
  Matrix left;
};

inline InterfaceSides sides(const Matrix& itf) {
  const Eigen::Index n = itf.rows() - 1;
  return {itf.bottomRows(n), itf.topRows(n)};
}

// ---------------------------------------------------------------------------
// Scalar laws.

// The scalar-law operators are summed in extended precision: on an
// exponential equilibrium the flux and source contributions cancel to
// rounding level, and a bias there compounds over thousands of steps.
using ExtMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

/// A (flux), B (numerical diffusion), C (source) for transport.
inline RomOperators assemble_transport_rom(const Matrix& phi_d, const TransportScheme& scheme) {
  const double dx = scheme.grid().dx();
  if (phi_d.rows() != scheme.grid().n_cells()) fail(ErrorCode::ShapeMismatch, "basis rows vs cells");
  const long double rate_dx = static_cast<long double>(scheme.equilibrium_rate()) * dx;
  const long double ep = std::exp(0.5L * rate_dx);
  const long double em = 1.0L / ep;
  const ExtMatrix phi = phi_d.cast<long double>();
  const auto nb = neighbours<ExtMatrix>(phi, std::exp(-rate_dx), std::exp(rate_dx));
  const ExtMatrix pt = phi.transpose();

  RomOperators ops;
  ops.system = RomSystem::Transport;
  ops.matrices["A"] = (pt * (em * nb.next + (ep - em) * phi - ep * nb.prev)).cast<double>();
  ops.matrices["B"] = (pt * (em * nb.next - (ep + em) * phi + ep * nb.prev)).cast<double>();
  ops.matrices["C"] = ((ep - em) * (pt * phi)).cast<double>();
  ops.scalars = {{"c", scheme.params().c},
                 {"nu", scheme.flux() == FluxKind::LaxFriedrichs ? 1.0 : scheme.params().nu},
                 {"visc_speed", scheme.flux() == FluxKind::Rusanov ? std::abs(scheme.params().c) : 0.0},
                 {"dx", dx}};
  return ops;
}

/// Tensors A (flux) and C (source), matrix B (diffusion) for Burgers.
inline RomOperators assemble_burgers_rom(const Matrix& phi_d, const BurgersScheme& scheme) {
  if (scheme.flux() == FluxKind::Rusanov) {
    fail(ErrorCode::UnsupportedSystem, "Burgers reduced model needs a state-independent viscosity");
  }
  const double dx = scheme.grid().dx();
  if (phi_d.rows() != scheme.grid().n_cells()) fail(ErrorCode::ShapeMismatch, "basis rows vs cells");
  const long double alpha_dx = static_cast<long double>(scheme.params().alpha) * dx;
  const long double big_p = std::exp(alpha_dx);
  const long double big_m = 1.0L / big_p;
  const long double ep = std::exp(0.5L * alpha_dx);
  const long double em = 1.0L / ep;
  const ExtMatrix phi = phi_d.cast<long double>();
  const auto nb = neighbours<ExtMatrix>(phi, big_m, big_p);
  const Eigen::Index m = phi.cols();
  const ExtMatrix sq = row_khatri_rao(phi, phi);

  RomOperators ops;
  ops.system = RomSystem::Burgers;
  ops.tensors["A"] = project_tensor<ExtMatrix>(
      phi, big_m * row_khatri_rao(nb.next, nb.next) + (big_p - big_m) * sq - big_p * row_khatri_rao(nb.prev, nb.prev),
      m, m);
  ops.matrices["B"] = (phi.transpose() * (em * nb.next - (ep + em) * phi + ep * nb.prev)).cast<double>();
  ops.tensors["C"] = project_tensor<ExtMatrix>(phi, (big_p - big_m) * sq, m, m);
  ops.scalars = {{"nu", scheme.flux() == FluxKind::LaxFriedrichs ? 1.0 : scheme.params().nu}, {"dx", dx}};
  return ops;
}

// ---------------------------------------------------------------------------
// Shallow water.

/// Mode matrices for one window. Optional entries are empty matrices.
struct SweBases {
  Matrix h;
  Matrix q;
  Matrix u;
  Matrix f;
  Matrix alpha0;  // interface bases, N+1 rows
  Matrix alpha1;
};

/// Window means used by the time-averaging treatments.
struct SweAverages {
  Vector h;
  Vector u;
  Vector alpha0;  // N+1 interface values
  Vector alpha1;
  Vector utilde;
  Vector htilde;
};

namespace detail {

inline void require_basis(const Matrix& m, const char* name, Eigen::Index rows) {
  if (m.size() == 0) fail(ErrorCode::MissingAuxBasis, std::string("basis for '") + name + "' not provided");
  if (m.rows() != rows) {
    fail(ErrorCode::ShapeMismatch, std::string("basis '") + name + "' has " + std::to_string(m.rows()) +
                                       " rows, expected " + std::to_string(rows));
  }
}

inline void require_field(const Vector& v, const char* name, Eigen::Index rows) {
  if (v.size() != rows) {
    fail(ErrorCode::MissingAuxBasis, std::string("time average of '") + name + "' missing or of wrong length");
  }
}

/// Terms shared by both SWE fluxes: A, D, E, G and the friction operator.
inline void assemble_swe_common(RomOperators& ops, const SweBases& b, const SweScheme& scheme, Linearization lin,
                                const SweAverages& avg) {
  const Eigen::Index n = scheme.grid().n_cells();
  require_basis(b.h, "h", n);
  require_basis(b.q, "q", n);
  require_basis(b.u, "u", n);
  const Vector& z = scheme.bathymetry();
  const auto nh = neighbours<Matrix>(b.h);
  const auto nq = neighbours<Matrix>(b.q);
  const auto nu = neighbours<Matrix>(b.u);
  const auto nz = neighbours<Matrix>(as_column(z));

  ops.matrices["A"] = b.h.transpose() * (nq.next - nq.prev);
  ops.tensors["D"] =
      project_tensor<Matrix>(b.q, row_khatri_rao(nu.next, nq.next) - row_khatri_rao(nu.prev, nq.prev), b.u.cols(), b.q.cols());
  ops.tensors["E"] =
      project_tensor<Matrix>(b.q, row_khatri_rao(nh.next, nh.next) - row_khatri_rao(nh.prev, nh.prev), b.h.cols(), b.h.cols());
  const Vector dz_r = nz.next.col(0) - z;
  const Vector dz_l = z - nz.prev.col(0);
  ops.matrices["G"] = b.q.transpose() * ((nh.next + b.h).array().colwise() * dz_r.array() +
                                         (b.h + nh.prev).array().colwise() * dz_l.array())
                                            .matrix();

  if (lin == Linearization::AllTimeAveraging) {
    require_field(avg.u, "u", n);
    ops.vectors["u_hat"] = b.u.transpose() * avg.u;
  }

  if (scheme.params().n_b > 0.0) {
    switch (lin) {
      case Linearization::AllTimeAveraging: {
        require_field(avg.h, "h", n);
        Vector w(n);
        for (Eigen::Index i = 0; i < n; ++i) w[i] = std::abs(avg.u[i]) * avg.u[i] / std::cbrt(avg.h[i]);
        ops.vectors["H"] = b.q.transpose() * w;
        break;
      }
      case Linearization::DeimUTavF: {
        require_field(avg.u, "u", n);
        require_field(avg.h, "h", n);
        Vector w(n);
        for (Eigen::Index i = 0; i < n; ++i) w[i] = std::abs(avg.u[i]) / std::pow(avg.h[i], 4.0 / 3.0);
        ops.matrices["H"] = b.q.transpose() * (b.q.array().colwise() * w.array()).matrix();
        break;
      }
      case Linearization::DeimUDeimF:
        require_basis(b.f, "f", n);
        ops.tensors["H"] = project_tensor<Matrix>(b.q, row_khatri_rao(b.q, b.f), b.q.cols(), b.f.cols());
        break;
    }
  }

  ops.scalars = {{"g", scheme.params().g},
                 {"n_b", scheme.params().n_b},
                 {"nu", scheme.flux() == FluxKind::LaxFriedrichs ? 1.0 : scheme.params().nu},
                 {"dx", scheme.grid().dx()}};
}

}  // namespace detail

/// Modified Lax-Friedrichs: A, B, C, D, E, F, G and the friction operator H.
inline RomOperators assemble_swe_lf_rom(const SweBases& b, const SweScheme& scheme, Linearization lin,
                                        const SweAverages& avg = {}) {
  if (scheme.flux() != FluxKind::ModifiedLaxFriedrichs && scheme.flux() != FluxKind::LaxFriedrichs) {
    fail(ErrorCode::UnsupportedSystem, "shallow-water LF reduced model needs the (modified) Lax-Friedrichs flux");
  }
  RomOperators ops;
  ops.system = RomSystem::SweLF;
  ops.linearization = lin;
  detail::assemble_swe_common(ops, b, scheme, lin, avg);
  const Vector& z = scheme.bathymetry();
  const auto nh = neighbours<Matrix>(b.h);
  const auto nq = neighbours<Matrix>(b.q);
  const auto nz = neighbours<Matrix>(as_column(z));
  ops.matrices["B"] = b.h.transpose() * (nh.next - 2.0 * b.h + nh.prev);
  ops.vectors["C"] = b.h.transpose() * (nz.next.col(0) - 2.0 * z + nz.prev.col(0));
  ops.matrices["F"] = b.q.transpose() * (nq.next - 2.0 * b.q + nq.prev);
  return ops;
}

/// HLL: A, D, E, G, friction, and U1..U7 from the viscosity polynomial. With
/// time-averaged coefficients U1, U2, U4, U5, U6 are matrices and U3, U7
/// vectors; with DEIM coefficients they gain a leading coefficient index and
/// become tensors and matrices. The Roe averages stay time-averaged in both.
inline RomOperators assemble_swe_hll_rom(const SweBases& b, const SweScheme& scheme, Linearization lin,
                                         CoeffTreatment coeff, const SweAverages& avg) {
  if (scheme.flux() != FluxKind::Hll) fail(ErrorCode::UnsupportedSystem, "HLL reduced model needs the HLL flux");
  const Eigen::Index n = scheme.grid().n_cells();
  RomOperators ops;
  ops.system = RomSystem::SweHLL;
  ops.linearization = lin;
  ops.coefficients = coeff;
  detail::assemble_swe_common(ops, b, scheme, lin, avg);

  detail::require_field(avg.utilde, "utilde", n + 1);
  detail::require_field(avg.htilde, "htilde", n + 1);
  Matrix a0, a1;
  if (coeff == CoeffTreatment::Deim) {
    detail::require_basis(b.alpha0, "alpha0", n + 1);
    detail::require_basis(b.alpha1, "alpha1", n + 1);
    a0 = b.alpha0;
    a1 = b.alpha1;
  } else {
    detail::require_field(avg.alpha0, "alpha0", n + 1);
    detail::require_field(avg.alpha1, "alpha1", n + 1);
    a0 = as_column(avg.alpha0);
    a1 = as_column(avg.alpha1);
  }
  const double g = scheme.params().g;
  const Vector kappa = (-avg.utilde.array().square() + g * avg.htilde.array()).matrix();
  const Matrix a1_kappa = a1.array().colwise() * kappa.array();
  const Matrix a1_ut = 2.0 * (a1.array().colwise() * avg.utilde.array()).matrix();

  const Vector& z = scheme.bathymetry();
  const auto nh = neighbours<Matrix>(b.h);
  const auto nq = neighbours<Matrix>(b.q);
  const auto nz = neighbours<Matrix>(as_column(z));
  const Matrix dh_r = nh.next - b.h, dh_l = b.h - nh.prev;
  const Matrix dq_r = nq.next - b.q, dq_l = b.q - nq.prev;
  const Matrix dz_r = nz.next - as_column(z), dz_l = as_column(z) - nz.prev;

  // sum_i (c_{i+1/2, l} d^R_{i, k} - c_{i-1/2, l} d^L_{i, k}) test_{i, p}
  const auto jump = [](const Matrix& test, const Matrix& coef, const Matrix& d_r, const Matrix& d_l) {
    const auto s = sides(coef);
    return project_tensor<Matrix>(test, row_khatri_rao<Matrix>(s.right, d_r) - row_khatri_rao<Matrix>(s.left, d_l), coef.cols(), d_r.cols());
  };

  const Tensor3 u1 = jump(b.h, a0, dh_r, dh_l);
  const Tensor3 u2 = jump(b.h, a1, dq_r, dq_l);
  const Tensor3 u3 = jump(b.h, a0, dz_r, dz_l);
  const Tensor3 u4 = jump(b.q, a1_kappa, dh_r, dh_l);
  const Tensor3 u5 = jump(b.q, a0, dq_r, dq_l);
  const Tensor3 u6 = jump(b.q, a1_ut, dq_r, dq_l);
  const Tensor3 u7 = jump(b.q, a1_kappa, dz_r, dz_l);

  if (coeff == CoeffTreatment::Deim) {
    ops.tensors["U1"] = u1;
    ops.tensors["U2"] = u2;
    ops.tensors["U4"] = u4;
    ops.tensors["U5"] = u5;
    ops.tensors["U6"] = u6;
    // U3, U7 have a trailing singleton z index; drop it.
    ops.matrices["U3"] = u3.data;
    ops.matrices["U7"] = u7.data;
  } else {
    ops.matrices["U1"] = u1.data;
    ops.matrices["U2"] = u2.data;
    ops.matrices["U4"] = u4.data;
    ops.matrices["U5"] = u5.data;
    ops.matrices["U6"] = u6.data;
    ops.vectors["U3"] = u3.data.col(0);
    ops.vectors["U7"] = u7.data.col(0);
  }
  return ops;
}

// ---------------------------------------------------------------------------
// HYPROMO1 files.

inline constexpr std::string_view kOperatorMagic = "HYPROMO1";

inline void save_operators(const RomOperators& ops, const std::string& path) {
  io::ByteWriter w;
  w.magic(kOperatorMagic);
  w.u32(io::kFormatVersion);
  w.u8(static_cast<std::uint8_t>(ops.system));
  w.u8(static_cast<std::uint8_t>(ops.linearization));
  w.u8(static_cast<std::uint8_t>(ops.coefficients));
  w.u32(static_cast<std::uint32_t>(ops.window_index));
  w.u32(static_cast<std::uint32_t>(ops.scalars.size() + ops.vectors.size() + ops.matrices.size() +
                                   ops.tensors.size()));
  for (const auto& [name, v] : ops.scalars) {
    w.u8(3);
    w.label(name);
    w.f64(v);
  }
  for (const auto& [name, v] : ops.vectors) {
    w.u8(0);
    w.label(name);
    w.u32(static_cast<std::uint32_t>(v.size()));
    w.f64s(v.data(), static_cast<std::size_t>(v.size()));
  }
  for (const auto& [name, m] : ops.matrices) {
    w.u8(1);
    w.label(name);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    w.f64s(m.data(), static_cast<std::size_t>(m.size()));
  }
  for (const auto& [name, t] : ops.tensors) {
    w.u8(2);
    w.label(name);
    w.u32(static_cast<std::uint32_t>(t.p));
    w.u32(static_cast<std::uint32_t>(t.l));
    w.u32(static_cast<std::uint32_t>(t.k));
    w.f64s(t.data.data(), static_cast<std::size_t>(t.data.size()));
  }
  w.commit(path);
}

inline RomOperators load_operators(const std::string& path) {
  io::ByteReader r(path, kOperatorMagic);
  RomOperators ops;
  ops.system = static_cast<RomSystem>(r.u8());
  ops.linearization = static_cast<Linearization>(r.u8());
  ops.coefficients = static_cast<CoeffTreatment>(r.u8());
  ops.window_index = static_cast<int>(r.u32());
  const std::uint32_t count = r.u32();
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint8_t kind = r.u8();
    const std::string name = r.label();
    switch (kind) {
      case 0: {
        Vector v(r.u32());
        r.f64s(v.data(), static_cast<std::size_t>(v.size()));
        ops.vectors[name] = std::move(v);
        break;
      }
      case 1: {
        const std::uint32_t rows = r.u32();
        const std::uint32_t cols = r.u32();
        Matrix m(rows, cols);
        r.f64s(m.data(), static_cast<std::size_t>(m.size()));
        ops.matrices[name] = std::move(m);
        break;
      }
      case 2: {
        const int p = static_cast<int>(r.u32());
        const int l = static_cast<int>(r.u32());
        const int k = static_cast<int>(r.u32());
        Matrix m(p, l * k);
        r.f64s(m.data(), static_cast<std::size_t>(m.size()));
        ops.tensors[name] = Tensor3(p, l, k, std::move(m));
        break;
      }
      case 3: ops.scalars[name] = r.f64(); break;
      default: fail(ErrorCode::IoError, path + ": unknown operator kind " + std::to_string(kind));
    }
  }
  if (!r.exhausted()) fail(ErrorCode::IoError, path + ": trailing bytes after payload");
  return ops;
}

}  // namespace hyporom
