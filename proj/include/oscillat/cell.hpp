#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "oscillat/coefficients.hpp"
#include "oscillat/error.hpp"
#include "oscillat/lattice.hpp"
#include "oscillat/spectral.hpp"

namespace oscillat {

/// Output of the cell stage.
struct CellSolution {
  int N = 0;
  PeriodicField Lambda;         // n x m
  PeriodicField LambdaTilde;    // n x n
  PeriodicField bLambda;        // m x m, samples of b(D)Lambda
  PeriodicField bLambdaTilde;   // m x n, samples of b(D)LambdaTilde
  PeriodicField g_tilde;        // m x m, g (b(D)Lambda + 1)
  Eigen::MatrixXcd g0;          // m x m
  Eigen::MatrixXcd V;           // m x n
  Eigen::MatrixXcd W;           // n x n
  double residual_lambda = 0.0;
  double residual_lambda_tilde = 0.0;
  int iterations_lambda = 0;
  int iterations_lambda_tilde = 0;
  std::vector<std::string> warnings;

  bool corrector_vanishes(double tol = 1e-12) const {
    return Lambda.raw().norm() / std::sqrt(static_cast<double>(Lambda.size())) <= tol &&
           LambdaTilde.raw().norm() / std::sqrt(static_cast<double>(LambdaTilde.size())) <= tol;
  }
};

struct VoigtReussReport {
  bool lower_ok = false;
  bool upper_ok = false;
  double lower_margin = 0.0;  // min eigenvalue of g0 - g_lower
  double upper_margin = 0.0;  // min eigenvalue of g_upper - g0
  double equality_gap = 0.0;  // |g0 - g_lower|
  Eigen::MatrixXcd g_lower;   // harmonic mean
  Eigen::MatrixXcd g_upper;   // arithmetic mean
};

struct CellSolverOptions {
  double tolerance = 1e-12;
  int max_iterations = 0;  // 0: 10 N^d
};

/// Trigonometric resampling of a field to another (even) resolution.
inline PeriodicField resample_field(const PeriodicField& f, int N) {
  if (N == f.resolution()) return f;
  if (N % 2 != 0 || N < 2) throw Error(ErrorKind::OddResolution, "resolution must be even");
  PeriodicField out(f.dim(), N, f.rows(), f.cols());
  const Eigen::MatrixXcd c = f.coefficients();
  std::vector<cplx> buf(static_cast<std::size_t>(f.size()));
  for (Eigen::Index r = 0; r < c.rows(); ++r) {
    for (Eigen::Index k = 0; k < c.cols(); ++k) buf[static_cast<std::size_t>(k)] = c(r, k);
    std::vector<cplx> moved = N > f.resolution() ? spectral::pad(buf, f.dim(), f.resolution(), N, true)
                                                 : spectral::truncate(buf, f.dim(), f.resolution(), N);
    spectral::inverse(moved, f.dim(), N);
    for (Eigen::Index k = 0; k < out.size(); ++k) out.raw()(r, k) = moved[static_cast<std::size_t>(k)];
  }
  return out;
}

namespace detail {

// Fourier-Galerkin realization of b(D)^* g b(D) on zero-mean trigonometric
// polynomials with frequencies in [-N/2, N/2)^d. Products with g are formed
// on a zero-padded grid, which makes the Galerkin projection exact.
class CellOperator {
 public:
  CellOperator(const Symbol& sym, const PeriodicField& g, const Lattice& lat, int N)
      : sym_(sym), dim_(lat.dim), N_(N) {
    if (N < 2 || N % 2 != 0) throw Error(ErrorKind::OddResolution, "cell resolution must be even");
    if (g.rows() != sym.m || g.cols() != sym.m) throw Error(ErrorKind::InvalidCoefficients, "g must be m x m");
    Np_ = (3 * N) / 2;
    if (Np_ % 2 != 0) ++Np_;
    total_ = spectral::grid_size(dim_, N_);
    total_pad_ = spectral::grid_size(dim_, Np_);
    const PeriodicField gN = resample_field(g, N_);
    g_pad_ = resample_field(gN, Np_).raw();
    g_mean_ = gN.mean();

    symbols_.resize(total_);
    precond_.resize(total_);
    int nu[3];
    for (std::size_t k = 0; k < total_; ++k) {
      spectral::unflatten(k, dim_, N_, nu);
      Eigen::VectorXd xi = Eigen::VectorXd::Zero(dim_);
      for (int j = 0; j < dim_; ++j) xi += nu[j] * lat.dual_basis.col(j);
      symbols_[k] = sym.at(xi);
      if (k == 0) {
        precond_[k] = Eigen::MatrixXcd::Zero(sym.n, sym.n);
      } else {
        precond_[k] = (symbols_[k].adjoint() * g_mean_ * symbols_[k]).inverse();
      }
    }
  }

  int n() const { return sym_.n; }
  int m() const { return sym_.m; }
  std::size_t modes() const { return total_; }
  int padded() const { return Np_; }
  const Eigen::MatrixXcd& symbol_at(std::size_t k) const { return symbols_[k]; }

  /// Coefficients of P_N (g w) for an m-vector field given by coefficients.
  Eigen::MatrixXcd flux(const Eigen::MatrixXcd& w_hat) const {
    const int m = sym_.m;
    Eigen::MatrixXcd w_phys(m, static_cast<Eigen::Index>(total_pad_));
    std::vector<cplx> buf(total_);
    for (int r = 0; r < m; ++r) {
      for (std::size_t k = 0; k < total_; ++k) buf[k] = w_hat(r, static_cast<Eigen::Index>(k));
      auto padded = spectral::pad(buf, dim_, N_, Np_, false);
      spectral::inverse(padded, dim_, Np_);
      for (std::size_t p = 0; p < total_pad_; ++p) w_phys(r, static_cast<Eigen::Index>(p)) = padded[p];
    }
    Eigen::MatrixXcd prod(m, static_cast<Eigen::Index>(total_pad_));
    for (Eigen::Index p = 0; p < prod.cols(); ++p) {
      const Eigen::Map<const Eigen::MatrixXcd> gp(g_pad_.col(p).data(), m, m);
      prod.col(p) = gp * w_phys.col(p);
    }
    Eigen::MatrixXcd out(m, static_cast<Eigen::Index>(total_));
    std::vector<cplx> pbuf(total_pad_);
    for (int r = 0; r < m; ++r) {
      for (std::size_t p = 0; p < total_pad_; ++p) pbuf[p] = prod(r, static_cast<Eigen::Index>(p));
      spectral::forward(pbuf, dim_, Np_);
      const auto tr = spectral::truncate(pbuf, dim_, Np_, N_);
      for (std::size_t k = 0; k < total_; ++k) out(r, static_cast<Eigen::Index>(k)) = tr[k];
    }
    return out;
  }

  /// b(xi_k) x_k for every mode.
  Eigen::MatrixXcd apply_symbol(const Eigen::MatrixXcd& x) const {
    Eigen::MatrixXcd out(sym_.m, x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) out.col(k) = symbols_[static_cast<std::size_t>(k)] * x.col(k);
    return out;
  }

  Eigen::MatrixXcd apply_symbol_adjoint(const Eigen::MatrixXcd& y) const {
    Eigen::MatrixXcd out(sym_.n, y.cols());
    for (Eigen::Index k = 0; k < y.cols(); ++k)
      out.col(k) = symbols_[static_cast<std::size_t>(k)].adjoint() * y.col(k);
    return out;
  }

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& x) const {
    Eigen::MatrixXcd out = apply_symbol_adjoint(flux(apply_symbol(x)));
    out.col(0).setZero();
    return out;
  }

  Eigen::MatrixXcd precondition(const Eigen::MatrixXcd& r) const {
    Eigen::MatrixXcd out(r.rows(), r.cols());
    for (Eigen::Index k = 0; k < r.cols(); ++k) out.col(k) = precond_[static_cast<std::size_t>(k)] * r.col(k);
    return out;
  }

  /// Preconditioned CG on the zero-mean subspace. Returns the relative residual.
  double solve(const Eigen::MatrixXcd& rhs, Eigen::MatrixXcd& x, int max_iter, double tol, int& iterations) const {
    x = Eigen::MatrixXcd::Zero(rhs.rows(), rhs.cols());
    Eigen::MatrixXcd r = rhs;
    r.col(0).setZero();
    const double rhs_norm = r.norm();
    iterations = 0;
    if (rhs_norm == 0.0) return 0.0;
    Eigen::MatrixXcd z = precondition(r);
    Eigen::MatrixXcd p = z;
    cplx rz = (r.conjugate().cwiseProduct(z)).sum();
    double res = 1.0;
    for (int it = 0; it < max_iter; ++it) {
      const Eigen::MatrixXcd Ap = apply(p);
      const cplx pAp = (p.conjugate().cwiseProduct(Ap)).sum();
      if (!(pAp.real() > 0.0)) {
        throw Error(ErrorKind::SolverBreakdown, "cell operator is not positive on the zero-mean subspace");
      }
      const cplx alpha = rz / pAp;
      x += alpha * p;
      r -= alpha * Ap;
      iterations = it + 1;
      res = r.norm() / rhs_norm;
      if (res <= tol) break;
      z = precondition(r);
      const cplx rz_new = (r.conjugate().cwiseProduct(z)).sum();
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    // True residual, independent of the recursion.
    res = (rhs - apply(x)).rightCols(rhs.cols() - 1).norm() / rhs_norm;
    if (!(res <= std::max(tol * 100.0, 1e-10))) {
      throw Error(ErrorKind::SolverBreakdown, "cell solve did not converge (relative residual " +
                                                  std::to_string(res) + ")");
    }
    return res;
  }

  /// Coefficients -> N-grid samples, row by row.
  Eigen::MatrixXcd synthesize(const Eigen::MatrixXcd& coeffs) const {
    Eigen::MatrixXcd out(coeffs.rows(), coeffs.cols());
    std::vector<cplx> buf(total_);
    for (Eigen::Index r = 0; r < coeffs.rows(); ++r) {
      for (std::size_t k = 0; k < total_; ++k) buf[k] = coeffs(r, static_cast<Eigen::Index>(k));
      spectral::inverse(buf, dim_, N_);
      for (std::size_t k = 0; k < total_; ++k) out(r, static_cast<Eigen::Index>(k)) = buf[k];
    }
    return out;
  }

  /// Galerkin projection of an N-grid field's interpolant (Nyquist halved).
  Eigen::MatrixXcd project(const PeriodicField& f) const {
    const PeriodicField fN = resample_field(f, N_);
    Eigen::MatrixXcd c = fN.coefficients();
    int nu[3];
    for (std::size_t k = 0; k < total_; ++k) {
      spectral::unflatten(k, dim_, N_, nu);
      double w = 1.0;
      for (int j = 0; j < dim_; ++j)
        if (nu[j] == -N_ / 2) w *= 0.5;
      if (w != 1.0) c.col(static_cast<Eigen::Index>(k)) *= w;
    }
    return c;
  }

  int dim() const { return dim_; }
  int N() const { return N_; }

 private:
  Symbol sym_;
  int dim_;
  int N_;
  int Np_;
  std::size_t total_;
  std::size_t total_pad_;
  Eigen::MatrixXcd g_pad_;
  Eigen::MatrixXcd g_mean_;
  std::vector<Eigen::MatrixXcd> symbols_;
  std::vector<Eigen::MatrixXcd> precond_;
};

// Packs per-column coefficient blocks (rows x N^d each) into a field whose
// sample k is the matrix with those columns.
inline PeriodicField assemble_columns(int dim, int N, const std::vector<Eigen::MatrixXcd>& columns) {
  const int rows = static_cast<int>(columns[0].rows());
  const int cols = static_cast<int>(columns.size());
  PeriodicField f(dim, N, rows, cols);
  for (int c = 0; c < cols; ++c) f.raw().middleRows(static_cast<Eigen::Index>(c) * rows, rows) = columns[static_cast<std::size_t>(c)];
  return f;
}

inline int max_iterations(const CellSolverOptions& opt, int dim, int N) {
  return opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(10 * spectral::grid_size(dim, N));
}

// Mean of X^* g Y over the cell, computed on a 2N grid so that the triple
// product of band-limited factors is averaged exactly.
inline Eigen::MatrixXcd exact_mean_product(const PeriodicField& X, const PeriodicField& g, const PeriodicField& Y) {
  const int N2 = 2 * X.resolution();
  const PeriodicField X2 = resample_field(X, N2);
  const PeriodicField g2 = resample_field(g, N2);
  const PeriodicField Y2 = resample_field(Y, N2);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(X.cols(), Y.cols());
  for (Eigen::Index k = 0; k < X2.size(); ++k) acc += X2.at(k).adjoint() * g2.at(k) * Y2.at(k);
  return acc / static_cast<double>(X2.size());
}

}  // namespace detail

/// Periodic solution of b(D)^* g (b(D)Lambda + 1_m) = 0 with zero mean (n x m).
/// The optional outputs receive b(D)Lambda samples and solver diagnostics.
inline PeriodicField solve_lambda(const Symbol& sym, const PeriodicField& g, const Lattice& lat, int N,
                                  PeriodicField* b_lambda = nullptr, double* residual = nullptr,
                                  int* iterations = nullptr, const CellSolverOptions& opt = {}) {
  if (N < 8) throw Error(ErrorKind::OddResolution, "cell resolution must be at least 8");
  const detail::CellOperator op(sym, g, lat, N);
  const int m = sym.m;
  const auto total = static_cast<Eigen::Index>(op.modes());
  std::vector<Eigen::MatrixXcd> cols, bcols;
  double worst = 0.0;
  int iters = 0;
  for (int c = 0; c < m; ++c) {
    Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(m, total);
    unit(c, 0) = 1.0;
    const Eigen::MatrixXcd rhs = -op.apply_symbol_adjoint(op.flux(unit));
    Eigen::MatrixXcd x;
    int it = 0;
    worst = std::max(worst, op.solve(rhs, x, detail::max_iterations(opt, lat.dim, N), opt.tolerance, it));
    iters = std::max(iters, it);
    cols.push_back(op.synthesize(x));
    bcols.push_back(op.synthesize(op.apply_symbol(x)));
  }
  if (b_lambda) *b_lambda = detail::assemble_columns(lat.dim, N, bcols);
  if (residual) *residual = worst;
  if (iterations) *iterations = iters;
  return detail::assemble_columns(lat.dim, N, cols);
}

/// Periodic solution of b(D)^* g b(D) LambdaTilde + sum_j D_j a_j^* = 0 with
/// zero mean (n x n). Empty `a` gives zero.
inline PeriodicField solve_lambda_tilde(const Symbol& sym, const PeriodicField& g, const std::vector<PeriodicField>& a,
                                        const Lattice& lat, int N, PeriodicField* b_lambda_tilde = nullptr,
                                        double* residual = nullptr, int* iterations = nullptr,
                                        const CellSolverOptions& opt = {}) {
  if (N < 8) throw Error(ErrorKind::OddResolution, "cell resolution must be at least 8");
  const detail::CellOperator op(sym, g, lat, N);
  const int n = sym.n;
  const auto total = static_cast<Eigen::Index>(op.modes());
  std::vector<Eigen::MatrixXcd> a_adj;  // coefficients of a_j^*, (n*n) x N^d
  for (const auto& aj : a) a_adj.push_back(op.project(aj.adjoint()));
  std::vector<Eigen::VectorXd> xi(static_cast<std::size_t>(total));
  {
    int nu[3];
    for (Eigen::Index k = 0; k < total; ++k) {
      spectral::unflatten(static_cast<std::size_t>(k), lat.dim, N, nu);
      xi[static_cast<std::size_t>(k)] = Eigen::VectorXd::Zero(lat.dim);
      for (int j = 0; j < lat.dim; ++j) xi[static_cast<std::size_t>(k)] += nu[j] * lat.dual_basis.col(j);
    }
  }
  std::vector<Eigen::MatrixXcd> cols, bcols;
  double worst = 0.0;
  int iters = 0;
  for (int c = 0; c < n; ++c) {
    // Column c of D_j a_j^* has coefficients xi_j * (a_j^*)_{., c}.
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, total);
    for (std::size_t j = 0; j < a_adj.size(); ++j) {
      for (Eigen::Index k = 0; k < total; ++k) {
        rhs.col(k) -= xi[static_cast<std::size_t>(k)][static_cast<Eigen::Index>(j)] *
                      a_adj[j].block(static_cast<Eigen::Index>(c) * n, k, n, 1);
      }
    }
    Eigen::MatrixXcd x;
    int it = 0;
    worst = std::max(worst, op.solve(rhs, x, detail::max_iterations(opt, lat.dim, N), opt.tolerance, it));
    iters = std::max(iters, it);
    cols.push_back(op.synthesize(x));
    bcols.push_back(op.synthesize(op.apply_symbol(x)));
  }
  if (b_lambda_tilde) *b_lambda_tilde = detail::assemble_columns(lat.dim, N, bcols);
  if (residual) *residual = worst;
  if (iterations) *iterations = iters;
  return detail::assemble_columns(lat.dim, N, cols);
}

/// g_tilde = g (b(D)Lambda + 1) on the grid, and g0 = its exact cell mean,
/// hermitized. `b_lambda` holds samples of b(D)Lambda.
inline std::pair<PeriodicField, Eigen::MatrixXcd> effective_matrix(const PeriodicField& g, const PeriodicField& b_lambda,
                                                                   std::vector<std::string>* warnings = nullptr) {
  const int N = b_lambda.resolution();
  const PeriodicField gN = resample_field(g, N);
  const int m = g.rows();
  PeriodicField g_tilde(g.dim(), N, m, m);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, m);
  for (Eigen::Index k = 0; k < g_tilde.size(); ++k) g_tilde.set(k, gN.at(k) * (b_lambda.at(k) + eye));
  // mean(g (bL + 1)) = mean(1^* g (bL + 1)), averaged without aliasing.
  const PeriodicField ones = PeriodicField::constant(g.dim(), N, eye);
  PeriodicField shifted = b_lambda;
  for (Eigen::Index k = 0; k < shifted.size(); ++k) shifted.set(k, b_lambda.at(k) + eye);
  Eigen::MatrixXcd g0 = detail::exact_mean_product(ones, gN, shifted);
  const double skew = (g0 - g0.adjoint()).norm() * 0.5;
  if (skew > 1e-8 * g0.norm() && warnings) {
    warnings->push_back("g0 skew part " + std::to_string(skew) + " exceeds 1e-8 |g0|");
  }
  g0 = 0.5 * (g0 + g0.adjoint());
  return {g_tilde, g0};
}

/// Convenience overload that recomputes b(D)Lambda spectrally from Lambda.
inline std::pair<PeriodicField, Eigen::MatrixXcd> effective_matrix(const PeriodicField& g, const PeriodicField& Lambda,
                                                                   const Symbol& sym, const Lattice& lat) {
  const int N = Lambda.resolution();
  const detail::CellOperator op(sym, g, lat, N);
  std::vector<Eigen::MatrixXcd> bcols;
  const Eigen::MatrixXcd c = Lambda.coefficients();
  for (int col = 0; col < Lambda.cols(); ++col) {
    bcols.push_back(op.synthesize(op.apply_symbol(c.middleRows(static_cast<Eigen::Index>(col) * sym.n, sym.n))));
  }
  return effective_matrix(g, detail::assemble_columns(lat.dim, N, bcols));
}

/// V = mean((bD Lambda)^* g (bD LambdaTilde)), m x n;
/// W = mean((bD LambdaTilde)^* g (bD LambdaTilde)), n x n, hermitized.
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> interaction_matrices(const PeriodicField& g,
                                                                          const PeriodicField& b_lambda,
                                                                          const PeriodicField& b_lambda_tilde) {
  const PeriodicField gN = resample_field(g, b_lambda.resolution());
  Eigen::MatrixXcd V = detail::exact_mean_product(b_lambda, gN, b_lambda_tilde);
  Eigen::MatrixXcd W = detail::exact_mean_product(b_lambda_tilde, gN, b_lambda_tilde);
  W = 0.5 * (W + W.adjoint());
  return {V, W};
}

/// Checks g_lower <= g0 <= g_upper with tolerance -1e-9 |g|.
inline VoigtReussReport voigt_reuss(const PeriodicField& g, const Eigen::MatrixXcd& g0) {
  VoigtReussReport rep;
  rep.g_upper = g.mean();
  rep.g_lower = g.harmonic_mean();
  rep.g_upper = 0.5 * (rep.g_upper + rep.g_upper.adjoint());
  rep.g_lower = 0.5 * (rep.g_lower + rep.g_lower.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  es.compute(g0 - rep.g_lower, Eigen::EigenvaluesOnly);
  rep.lower_margin = es.eigenvalues().minCoeff();
  es.compute(rep.g_upper - g0, Eigen::EigenvaluesOnly);
  rep.upper_margin = es.eigenvalues().minCoeff();
  const double tol = -1e-9 * g.norm_inf();
  rep.lower_ok = rep.lower_margin >= tol;
  rep.upper_ok = rep.upper_margin >= tol;
  rep.equality_gap = (g0 - rep.g_lower).norm();
  return rep;
}

/// Full cell stage for a coefficient set at resolution N (0: the g grid).
inline CellSolution solve_cell(const CoefficientSet& cs, int N = 0, const CellSolverOptions& opt = {}) {
  if (N == 0) N = cs.resolution();
  CellSolution sol;
  sol.N = N;
  sol.Lambda = solve_lambda(cs.symbol, cs.g, cs.lattice, N, &sol.bLambda, &sol.residual_lambda,
                            &sol.iterations_lambda, opt);
  sol.LambdaTilde = solve_lambda_tilde(cs.symbol, cs.g, cs.a, cs.lattice, N, &sol.bLambdaTilde,
                                       &sol.residual_lambda_tilde, &sol.iterations_lambda_tilde, opt);
  auto [g_tilde, g0] = effective_matrix(cs.g, sol.bLambda, &sol.warnings);
  sol.g_tilde = std::move(g_tilde);
  sol.g0 = std::move(g0);
  auto [V, W] = interaction_matrices(cs.g, sol.bLambda, sol.bLambdaTilde);
  sol.V = std::move(V);
  sol.W = std::move(W);
  return sol;
}

}  // namespace oscillat
