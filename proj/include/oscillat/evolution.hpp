#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <lapacke.h>

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oscillat/cell.hpp"
#include "oscillat/dirichlet.hpp"
#include "oscillat/error.hpp"
#include "oscillat/mesh.hpp"

namespace oscillat {

/// Largest system handed to the dense eigensolver.
inline constexpr Eigen::Index kMaxDenseEigen = 8192;

/// Full eigendecomposition A = Q diag(mu) Q^*, mu ascending. Real
/// symmetric operators keep a real Q, which halves storage and quarters
/// the cost of every projection.
struct EigenBasis {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Qr;   // used when real
  Eigen::MatrixXcd Qc;  // used otherwise
  bool real = true;
  Mesh mesh;
  int n = 1;
  std::string source;
  bool fallback = false;  // LAPACK result rejected, Eigen solver used

  Eigen::Index size() const { return mu.size(); }

  /// Q^* Y for a block of columns.
  Eigen::MatrixXcd project(const Eigen::MatrixXcd& Y) const {
    if (!real) return Qc.adjoint() * Y;
    Eigen::MatrixXcd out(Qr.cols(), Y.cols());
    out.real() = Qr.transpose() * Y.real();
    if (Y.imag().isZero(0.0)) {
      out.imag().setZero();
    } else {
      out.imag() = Qr.transpose() * Y.imag();
    }
    return out;
  }
  Eigen::VectorXcd project(const Eigen::VectorXcd& v) const { return project(Eigen::MatrixXcd(v)).col(0); }

  Eigen::VectorXcd synthesize(const Eigen::VectorXcd& c) const {
    if (!real) return Qc * c;
    Eigen::VectorXcd out(Qr.rows());
    out.real() = Qr * c.real();
    if (c.imag().isZero(0.0)) {
      out.imag().setZero();
    } else {
      out.imag() = Qr * c.imag();
    }
    return out;
  }

  Eigen::VectorXcd column(Eigen::Index k) const {
    return real ? Eigen::VectorXcd(Qr.col(k).cast<cplx>()) : Eigen::VectorXcd(Qc.col(k));
  }

  /// Q diag(fn(mu)) Q^* v.
  Eigen::VectorXcd apply(const std::function<double(double)>& fn, const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd c = project(v);
    for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= fn(mu[k]);
    return synthesize(c);
  }

  /// max_k |A q_k - mu_k q_k| / mu_k and |Q^* Q - I|_max.
  std::pair<double, double> verify(const SparseMatrix& A) const {
    const Eigen::MatrixXcd Q = real ? Eigen::MatrixXcd(Qr.cast<cplx>()) : Qc;
    const Eigen::MatrixXcd AQ = A * Q;
    double res = 0.0;
    for (Eigen::Index k = 0; k < size(); ++k) res = std::max(res, (AQ.col(k) - mu[k] * Q.col(k)).norm() / mu[k]);
    const Eigen::MatrixXcd G = Q.adjoint() * Q;
    const double orth = (G - Eigen::MatrixXcd::Identity(size(), size())).cwiseAbs().maxCoeff();
    return {res, orth};
  }
};

namespace detail {

// Cheap O(n^2) acceptance test: eigen-residual on every column and
// orthonormality of Q on a few fixed probe vectors.
inline bool decomposition_ok(const SparseMatrix& A, const EigenBasis& eb) {
  const Eigen::Index N = eb.size();
  if (N == 0) return true;
  const double scale = std::max(std::abs(eb.mu[0]), std::abs(eb.mu[N - 1]));
  const double tol = 1e-9 * std::sqrt(static_cast<double>(N));
  for (Eigen::Index k = 0; k < N; ++k) {
    const Eigen::VectorXcd q = eb.column(k);
    if (!((A * q - eb.mu[k] * q).norm() <= tol * scale)) return false;
  }
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int probe = 0; probe < 3; ++probe) {
    Eigen::VectorXcd x(N);
    for (Eigen::Index i = 0; i < N; ++i) x[i] = normal(rng);
    const Eigen::VectorXcd y = eb.project(x);
    if (!(std::abs(y.norm() - x.norm()) <= tol * x.norm())) return false;
    if (!((eb.synthesize(y) - x).norm() <= tol * x.norm())) return false;
  }
  return true;
}

inline bool lapack_decompose(const DiscreteDirichletOperator& op, EigenBasis& eb) {
  const Eigen::Index N = op.size();
  const auto lda = static_cast<lapack_int>(N);
  if (op.is_real()) {
    Eigen::MatrixXd dense = Eigen::MatrixXd(Eigen::SparseMatrix<double>(op.matrix.real()));
    if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', lda, dense.data(), lda, eb.mu.data()) != 0) return false;
    eb.real = true;
    eb.Qr = std::move(dense);
  } else {
    Eigen::MatrixXcd dense = Eigen::MatrixXcd(op.matrix);
    if (LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', lda, reinterpret_cast<lapack_complex_double*>(dense.data()), lda,
                       eb.mu.data()) != 0)
      return false;
    eb.real = false;
    eb.Qc = std::move(dense);
  }
  return decomposition_ok(op.matrix, eb);
}

}  // namespace detail

/// Dense symmetric (real) or Hermitian eigendecomposition. LAPACK first; if
/// its result fails the residual/orthogonality test (seen with some
/// auto-selected OpenBLAS kernels) Eigen's own solver is used instead.
inline EigenBasis spectral_decompose(const DiscreteDirichletOperator& op) {
  const Eigen::Index N = op.size();
  if (N > kMaxDenseEigen) {
    throw Error(ErrorKind::EigSolverFailure, "operator of size " + std::to_string(N) +
                                                 " exceeds the dense eigensolver limit " +
                                                 std::to_string(kMaxDenseEigen) + "; coarsen mesh.h_over_eps");
  }
  EigenBasis eb;
  eb.mesh = op.mesh;
  eb.n = op.n;
  eb.source = op.tag();
  eb.mu.resize(N);
  if (!detail::lapack_decompose(op, eb)) {
    eb.fallback = true;
    if (op.is_real()) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(Eigen::SparseMatrix<double>(op.matrix.real())));
      if (es.info() != Eigen::Success) throw Error(ErrorKind::EigSolverFailure, "eigensolver did not converge");
      eb.mu = es.eigenvalues();
      eb.real = true;
      eb.Qr = es.eigenvectors();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(op.matrix));
      if (es.info() != Eigen::Success) throw Error(ErrorKind::EigSolverFailure, "eigensolver did not converge");
      eb.mu = es.eigenvalues();
      eb.real = false;
      eb.Qc = es.eigenvectors();
    }
    if (!detail::decomposition_ok(op.matrix, eb))
      throw Error(ErrorKind::EigSolverFailure, "eigendecomposition failed the residual check");
  }
  if (N > 0 && !(eb.mu[0] > 0.0)) {
    throw Error(ErrorKind::EigSolverFailure, "operator has a nonpositive eigenvalue " + std::to_string(eb.mu[0]));
  }
  return eb;
}

namespace detail {

inline double cos_sqrt(double mu, double t) { return std::cos(t * std::sqrt(mu)); }

/// sin(t sqrt(mu)) / sqrt(mu), with its Taylor series near zero.
inline double sinc_sqrt(double mu, double t) {
  const double s = std::sqrt(std::max(mu, 0.0));
  if (s * std::abs(t) < 1e-6) {
    const double x = mu * t * t;
    return t * (1.0 - x / 6.0 + x * x / 120.0);
  }
  return std::sin(t * s) / s;
}

}  // namespace detail

/// cos(t A^{1/2}) v.
inline Eigen::VectorXcd op_cosine(const EigenBasis& eb, double t, const Eigen::VectorXcd& v) {
  if (t == 0.0) return v;
  return eb.apply([t](double mu) { return detail::cos_sqrt(mu, t); }, v);
}

/// A^{-1/2} sin(t A^{1/2}) v.
inline Eigen::VectorXcd op_sine_scaled(const EigenBasis& eb, double t, const Eigen::VectorXcd& v) {
  if (t == 0.0) return Eigen::VectorXcd::Zero(v.size());
  return eb.apply([t](double mu) { return detail::sinc_sqrt(mu, t); }, v);
}

/// Vectors sampled on a uniform time grid t0 + k dt, interpolated by a
/// natural cubic spline.
class TimeSamples {
 public:
  TimeSamples() = default;
  TimeSamples(double t0, double dt, std::vector<Eigen::VectorXcd> values)
      : t0_(t0), dt_(dt), y_(std::move(values)) {
    const std::size_t K = y_.size();
    if (K < 2 || !(dt_ > 0.0)) throw Error(ErrorKind::ForcingGridTooCoarse, "forcing needs >= 2 samples");
    // Natural spline: m_0 = m_{K-1} = 0, m_{k-1} + 4 m_k + m_{k+1} = 6 (y_{k+1} - 2 y_k + y_{k-1}) / dt^2.
    m_.assign(K, Eigen::VectorXcd::Zero(y_[0].size()));
    if (K > 2) {
      std::vector<double> c(K, 0.0);
      std::vector<Eigen::VectorXcd> d(K, Eigen::VectorXcd::Zero(y_[0].size()));
      for (std::size_t k = 1; k + 1 < K; ++k) {
        const Eigen::VectorXcd rhs = 6.0 * (y_[k + 1] - 2.0 * y_[k] + y_[k - 1]) / (dt_ * dt_);
        const double denom = 4.0 - (k > 1 ? c[k - 1] : 0.0);
        c[k] = 1.0 / denom;
        d[k] = (rhs - (k > 1 ? d[k - 1] : Eigen::VectorXcd::Zero(rhs.size()))) / denom;
      }
      for (std::size_t k = K - 2; k >= 1; --k) {
        m_[k] = d[k] - c[k] * m_[k + 1];
        if (k == 1) break;
      }
    }
  }

  bool empty() const { return y_.empty(); }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double t_end() const { return t0_ + dt_ * static_cast<double>(y_.size() - 1); }
  const std::vector<Eigen::VectorXcd>& values() const { return y_; }
  const std::vector<Eigen::VectorXcd>& second_derivatives() const { return m_; }

  Eigen::VectorXcd at(double t) const {
    const double s = (t - t0_) / dt_;
    const auto K = static_cast<long>(y_.size());
    long k = static_cast<long>(std::floor(s));
    if (k < 0 || k > K - 1 || (k == K - 1 && s - k > 1e-9)) {
      if (s < -1e-9 || s > static_cast<double>(K - 1) + 1e-9)
        throw Error(ErrorKind::ForcingGridTooCoarse, "time outside the forcing grid");
    }
    k = std::clamp(k, 0L, K - 2);
    const double a = (k + 1) - s;  // weight of left node
    const double b = s - k;
    const auto i = static_cast<std::size_t>(k);
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * (dt_ * dt_ / 6.0);
  }

  /// Same spline applied to linearly mapped samples.
  TimeSamples map(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& fn) const {
    std::vector<Eigen::VectorXcd> out;
    out.reserve(y_.size());
    for (const auto& v : y_) out.push_back(fn(v));
    return TimeSamples(t0_, dt_, std::move(out));
  }

 private:
  double t0_ = 0.0;
  double dt_ = 0.0;
  std::vector<Eigen::VectorXcd> y_;
  std::vector<Eigen::VectorXcd> m_;
};

/// Samples F(t) on [0, t_end] with step dt.
inline TimeSamples sample_forcing(const std::function<Eigen::VectorXcd(double)>& F, double t_end, double dt) {
  const int K = static_cast<int>(std::ceil(t_end / dt - 1e-9));
  std::vector<Eigen::VectorXcd> values;
  for (int k = 0; k <= K; ++k) values.push_back(F(k * dt));
  return TimeSamples(0.0, dt, std::move(values));
}

struct EvolutionResult {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> u;
  std::vector<Eigen::VectorXcd> du_dt;
  std::vector<double> energy;  // (|du/dt|^2 + u^* A u) h^d
};

namespace detail {

// Spline piece on [s_j, s_j + h]: value and first three derivatives at s.
struct CubicPiece {
  cplx y0, y1, m0, m1;
  double s0, h;
  std::array<cplx, 4> at(double s) const {
    const double l = s0 + h - s, r = s - s0;
    const cplx c0 = y0 / h - m0 * (h / 6.0), c1 = y1 / h - m1 * (h / 6.0);
    return {m0 * (l * l * l) / (6.0 * h) + m1 * (r * r * r) / (6.0 * h) + c0 * l + c1 * r,
            -m0 * (l * l) / (2.0 * h) + m1 * (r * r) / (2.0 * h) - c0 + c1, (m0 * l + m1 * r) / h, (m1 - m0) / h};
  }
};

// int_a^b e^{i sigma w (t - s)} p(s) ds by four integrations by parts (exact for cubics).
inline cplx exp_moment(const CubicPiece& p, double a, double b, double t, double w, double sigma) {
  const cplx k(0.0, -sigma * w);
  auto boundary = [&](double s) {
    const auto d = p.at(s);
    const cplx e = std::exp(cplx(0.0, sigma * w * (t - s)));
    return e * (d[0] / k - d[1] / (k * k) + d[2] / (k * k * k) - d[3] / (k * k * k * k));
  };
  return boundary(b) - boundary(a);
}

// Duhamel terms int_0^t sin(w(t-s))/w f(s) ds and int_0^t cos(w(t-s)) f(s) ds
// for one mode, f the cubic spline through fy with second derivatives fm.
// Slow modes (w h < 1) use 8-point Gauss-Legendre per spline interval, fast
// modes the exact oscillatory formula.
inline std::pair<cplx, cplx> duhamel_mode(const std::vector<cplx>& fy, const std::vector<cplx>& fm, double dt,
                                          double mu, double t) {
  cplx sin_part = 0.0, cos_part = 0.0;
  if (t <= 0.0) return {sin_part, cos_part};
  const double w = std::sqrt(std::max(mu, 0.0));
  const auto& gx = gauss8_nodes();
  const auto& gw = gauss8_weights();
  const int intervals = static_cast<int>(std::ceil(t / dt - 1e-9));
  for (int j = 0; j < intervals; ++j) {
    const auto i = static_cast<std::size_t>(j);
    const CubicPiece piece{fy[i], fy[i + 1], fm[i], fm[i + 1], j * dt, dt};
    const double a = j * dt, b = std::min(t, (j + 1) * dt);
    if (b <= a) break;
    if (w * dt < 1.0) {
      const double half = 0.5 * (b - a);
      for (int q = 0; q < 8; ++q) {
        const double s = a + half * (gx[q] + 1.0);
        const cplx f = piece.at(s)[0];
        sin_part += half * gw[q] * sinc_sqrt(mu, t - s) * f;
        cos_part += half * gw[q] * cos_sqrt(mu, t - s) * f;
      }
    } else {
      const cplx jp = exp_moment(piece, a, b, t, w, 1.0);
      const cplx jm = exp_moment(piece, a, b, t, w, -1.0);
      sin_part += (jp - jm) / cplx(0.0, 2.0 * w);
      cos_part += 0.5 * (jp + jm);
    }
  }
  return {sin_part, cos_part};
}

}  // namespace detail

/// u(t) = cos(t A^{1/2}) phi + A^{-1/2} sin(t A^{1/2}) psi + int_0^t A^{-1/2} sin((t-s) A^{1/2}) F(s) ds.
inline EvolutionResult solve_ibvp(const EigenBasis& eb, const Eigen::VectorXcd& phi, const Eigen::VectorXcd& psi,
                                  const TimeSamples& F, const std::vector<double>& t_list) {
  const Eigen::VectorXcd phat = eb.project(phi);
  const Eigen::VectorXcd qhat = eb.project(psi);
  TimeSamples Fhat;
  if (!F.empty()) {
    double t_max = 0.0;
    for (double t : t_list) t_max = std::max(t_max, t);
    if (F.t0() > 1e-12 || F.t_end() < t_max - 1e-9) {
      throw Error(ErrorKind::ForcingGridTooCoarse, "forcing grid does not cover [0, t_max]");
    }
    for (double t : t_list) {
      if (t > 0.0 && F.dt() > std::min(0.1, t / 4.0) + 1e-12) {
        throw Error(ErrorKind::ForcingGridTooCoarse, "forcing step exceeds the Duhamel panel width");
      }
    }
    // One matrix product instead of a projection per sample.
    const auto& samples = F.values();
    Eigen::MatrixXcd Y(eb.size(), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t j = 0; j < samples.size(); ++j) Y.col(static_cast<Eigen::Index>(j)) = samples[j];
    const Eigen::MatrixXcd P = eb.project(Y);
    std::vector<Eigen::VectorXcd> projected;
    for (Eigen::Index j = 0; j < P.cols(); ++j) projected.push_back(P.col(j));
    Fhat = TimeSamples(F.t0(), F.dt(), std::move(projected));
  }
  const double hd = eb.mesh.volume_element();
  const Eigen::Index K = eb.size();
  EvolutionResult res;
  for (double t : t_list) {
    Eigen::VectorXcd c(K), dc(K);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double mu = eb.mu[k];
      const double s = std::sqrt(mu);
      c[k] = detail::cos_sqrt(mu, t) * phat[k] + detail::sinc_sqrt(mu, t) * qhat[k];
      dc[k] = -s * std::sin(t * s) * phat[k] + detail::cos_sqrt(mu, t) * qhat[k];
    }
    if (!Fhat.empty()) {
      std::vector<cplx> fy(Fhat.values().size()), fm(fy.size());
      for (Eigen::Index k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < fy.size(); ++j) {
          fy[j] = Fhat.values()[j][k];
          fm[j] = Fhat.second_derivatives()[j][k];
        }
        const auto [sp, cp] = detail::duhamel_mode(fy, fm, Fhat.dt(), eb.mu[k], t);
        c[k] += sp;
        dc[k] += cp;
      }
    }
    double energy = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) energy += std::norm(dc[k]) + eb.mu[k] * std::norm(c[k]);
    res.times.push_back(t);
    res.u.push_back(eb.synthesize(c));
    res.du_dt.push_back(eb.synthesize(dc));
    res.energy.push_back(energy * hd);
  }
  return res;
}

/// v_eps = u0 + eps K u0 on the box nodes, one per time of the effective path.
inline std::vector<GridFunction> first_order_approx(const EvolutionResult& u0_path, const CellSolution& cell, double eps,
                                                    const CoefficientSet& cs, const Mesh& mesh,
                                                    const ExtensionOperator& ext, bool smoothed) {
  std::vector<GridFunction> out;
  for (const auto& u0 : u0_path.u) {
    GridFunction v = embed(mesh, u0, cs.symbol.n);
    const GridFunction K = corrector_apply(cell, eps, cs.symbol, cs.lattice, extend(v, ext), mesh, smoothed);
    v.values += eps * K.values;
    out.push_back(std::move(v));
  }
  return out;
}

namespace detail {

// b(D) u at cell centres (m x cells) from staggered differences of the box values.
inline Eigen::MatrixXcd staggered_symbol(const GridFunction& U, const Symbol& sym, const Mesh& mesh) {
  Eigen::MatrixXcd out(sym.m, mesh.cell_count());
  const cplx mi(0.0, -1.0);
  Eigen::Index col = 0;
  for (int i = 0; i < mesh.cells(0); ++i)
    for (int j = 0; j < mesh.cells(1); ++j) {
      if (mesh.dim == 1) {
        out.col(col++) = sym.b[0] * (mi * (U.values.col(U.index(i + 1)) - U.values.col(U.index(i))) / mesh.h[0]);
      } else {
        const Eigen::VectorXcd d0 = (U.values.col(U.index(i + 1, j)) - U.values.col(U.index(i, j)) +
                                     U.values.col(U.index(i + 1, j + 1)) - U.values.col(U.index(i, j + 1))) /
                                    (2.0 * mesh.h[0]);
        const Eigen::VectorXcd d1 = (U.values.col(U.index(i, j + 1)) - U.values.col(U.index(i, j)) +
                                     U.values.col(U.index(i + 1, j + 1)) - U.values.col(U.index(i + 1, j))) /
                                    (2.0 * mesh.h[1]);
        out.col(col++) = sym.b[0] * (mi * d0) + sym.b[1] * (mi * d1);
      }
    }
  return out;
}

// Box values averaged to cell centres (n x cells).
inline Eigen::MatrixXcd cell_average(const GridFunction& U, const Mesh& mesh) {
  Eigen::MatrixXcd out(U.ncomp, mesh.cell_count());
  Eigen::Index col = 0;
  for (int i = 0; i < mesh.cells(0); ++i)
    for (int j = 0; j < mesh.cells(1); ++j) {
      if (mesh.dim == 1) {
        out.col(col++) = 0.5 * (U.values.col(U.index(i)) + U.values.col(U.index(i + 1)));
      } else {
        out.col(col++) = 0.25 * (U.values.col(U.index(i, j)) + U.values.col(U.index(i + 1, j)) +
                                 U.values.col(U.index(i, j + 1)) + U.values.col(U.index(i + 1, j + 1)));
      }
    }
  return out;
}

}  // namespace detail

/// p_eps = g^eps b(D) u at cell centres (m x cells), from interior values u.
inline Eigen::MatrixXcd flux(const Eigen::VectorXcd& u, const CoefficientSet& cs, double eps, const Mesh& mesh) {
  const Eigen::MatrixXcd bdu = detail::staggered_symbol(embed(mesh, u, cs.symbol.n), cs.symbol, mesh);
  const ScaledField g_eps(cs.g, cs.lattice, eps);
  const auto centers = mesh.cell_centers();
  Eigen::MatrixXcd out(cs.symbol.m, bdu.cols());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    out.col(col) = g_eps(centers[k]) * bdu.col(col);
  }
  return out;
}

/// g_tilde^eps (S_eps) b(D) u0 + g^eps (b(D) LambdaTilde)^eps (S_eps) u0 at cell centres.
/// Without smoothing, and always when the corrector vanishes (then no
/// oscillating factor multiplies u0), b(D) u0 uses the stencil of flux().
inline Eigen::MatrixXcd flux_approx(const Eigen::VectorXcd& u0, const CellSolution& cell, double eps,
                                    const CoefficientSet& cs, const Mesh& mesh, const ExtensionOperator& ext,
                                    bool smoothed) {
  const GridFunction U = embed(mesh, u0, cs.symbol.n);
  const auto centers = mesh.cell_centers();
  SmoothedData data;
  if (smoothed && !cell.corrector_vanishes()) {
    data = smoothed_data(extend(U, ext), cs.symbol, cs.lattice, eps, centers, true);
  } else {
    data.bdu = detail::staggered_symbol(U, cs.symbol, mesh);
    data.u = detail::cell_average(U, mesh);
  }
  const ScaledField gt(cell.g_tilde, cs.lattice, eps);
  const ScaledField g(cs.g, cs.lattice, eps);
  const ScaledField blt(cell.bLambdaTilde, cs.lattice, eps);
  const bool has_tilde = cell.bLambdaTilde.raw().cwiseAbs().maxCoeff() > 0.0;
  Eigen::MatrixXcd out(cs.symbol.m, static_cast<Eigen::Index>(centers.size()));
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    out.col(col) = gt(centers[k]) * data.bdu.col(col);
    if (has_tilde) out.col(col) += g(centers[k]) * blt(centers[k]) * data.u.col(col);
  }
  return out;
}

/// Largest eigenvalue estimate by power iteration.
inline double estimate_max_eigenvalue(const SparseMatrix& A, int iterations = 100) {
  Eigen::VectorXcd v(A.rows());
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = std::cos(1.3 * static_cast<double>(k)) + 0.1;
  v.normalize();
  double mu = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXcd w = A * v;
    mu = v.dot(w).real();
    w.normalize();
    v = w;
  }
  // Power iteration converges from below; a Gershgorin bound caps the estimate.
  double gersh = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) s += std::abs(it.value());
    gersh = std::max(gersh, s);
  }
  return std::min(gersh, 1.05 * mu);
}

struct LeapfrogResult {
  Eigen::VectorXcd u;
  Eigen::VectorXcd v;
  std::vector<double> energy;  // per step when requested
  int steps = 0;
  double dt = 0.0;
};

/// Stormer-Verlet for u'' = -A u + F(t) from (phi, psi) up to time t.
inline LeapfrogResult leapfrog_oracle(const DiscreteDirichletOperator& op, const Eigen::VectorXcd& phi,
                                      const Eigen::VectorXcd& psi,
                                      const std::function<Eigen::VectorXcd(double)>& F, double t, double dt,
                                      bool record_energy = false) {
  const double mu_max = estimate_max_eigenvalue(op.matrix);
  if (!(dt > 0.0) || dt > 1.9 / std::sqrt(mu_max)) {
    throw Error(ErrorKind::CFLViolation, "dt = " + std::to_string(dt) + " exceeds 1.9 / sqrt(mu_max) = " +
                                             std::to_string(1.9 / std::sqrt(mu_max)));
  }
  LeapfrogResult res;
  res.steps = std::max(1, static_cast<int>(std::ceil(t / dt - 1e-12)));
  res.dt = t / res.steps;
  const double h = res.dt;
  const double hd = op.mesh.volume_element();
  Eigen::VectorXcd u = phi, v = psi;
  auto accel = [&](const Eigen::VectorXcd& x, double time) {
    Eigen::VectorXcd a = -(op.matrix * x);
    if (F) a += F(time);
    return a;
  };
  auto energy = [&] { return (v.squaredNorm() + u.dot(op.matrix * u).real()) * hd; };
  if (record_energy) res.energy.push_back(energy());
  Eigen::VectorXcd a = accel(u, 0.0);
  for (int s = 0; s < res.steps; ++s) {
    v += 0.5 * h * a;
    u += h * v;
    a = accel(u, (s + 1) * h);
    v += 0.5 * h * a;
    if (record_energy) res.energy.push_back(energy());
  }
  res.u = std::move(u);
  res.v = std::move(v);
  return res;
}

}  // namespace oscillat
