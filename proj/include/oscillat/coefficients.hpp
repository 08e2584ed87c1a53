#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oscillat/error.hpp"
#include "oscillat/lattice.hpp"
#include "oscillat/spectral.hpp"

namespace oscillat {

/// First-order symbol b(xi) = sum_j b_j xi_j with constant m x n matrices b_j.
struct Symbol {
  int d = 0;
  int m = 0;
  int n = 0;
  std::vector<Eigen::MatrixXcd> b;
  double alpha0 = 0.0;
  double alpha1 = 0.0;

  Eigen::MatrixXcd at(const Eigen::VectorXd& xi) const {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(m, n);
    for (int j = 0; j < d; ++j) s += xi[j] * b[j];
    return s;
  }
};

namespace detail {

// Deterministic quasi-uniform unit vectors: +-1 (d=1), 360 angles (d=2),
// a 360^2-point Fibonacci sphere otherwise.
inline std::vector<Eigen::VectorXd> unit_sphere_samples(int d) {
  std::vector<Eigen::VectorXd> out;
  if (d == 1) {
    out.push_back(Eigen::VectorXd::Constant(1, 1.0));
    out.push_back(Eigen::VectorXd::Constant(1, -1.0));
  } else if (d == 2) {
    for (int k = 0; k < 360; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / 360.0;
      Eigen::VectorXd v(2);
      v << std::cos(phi), std::sin(phi);
      out.push_back(v);
    }
  } else {
    const int count = 360 * 360;
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    for (int k = 0; k < count; ++k) {
      Eigen::VectorXd v(d);
      if (d == 3) {
        const double z = 1.0 - (2.0 * k + 1.0) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = k * std::numbers::pi * (3.0 - std::sqrt(5.0));
        v << r * std::cos(phi), r * std::sin(phi), z;
      } else {
        for (int j = 0; j < d; ++j) v[j] = normal(rng);
        v.normalize();
      }
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace detail

/// Extremal eigenvalues of b(theta)^* b(theta) over sampled unit theta.
inline std::pair<double, double> symbol_bounds(const std::vector<Eigen::MatrixXcd>& mats) {
  if (mats.empty()) throw Error(ErrorKind::RankDeficientSymbol, "empty symbol");
  const int d = static_cast<int>(mats.size());
  const auto m = mats[0].rows();
  const auto n = mats[0].cols();
  if (m < n) throw Error(ErrorKind::RankDeficientSymbol, "symbol needs m >= n");
  for (const auto& bj : mats) {
    if (bj.rows() != m || bj.cols() != n)
      throw Error(ErrorKind::RankDeficientSymbol, "inconsistent symbol shapes");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  for (const auto& theta : detail::unit_sphere_samples(d)) {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(m, n);
    for (int j = 0; j < d; ++j) s += theta[j] * mats[j];
    es.compute(s.adjoint() * s, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  if (!(lo > 1e-10 * hi)) {
    throw Error(ErrorKind::RankDeficientSymbol, "b(theta) loses rank on the unit sphere");
  }
  return {lo, hi};
}

inline Symbol make_symbol(std::vector<Eigen::MatrixXcd> mats) {
  Symbol s;
  auto [lo, hi] = symbol_bounds(mats);
  s.d = static_cast<int>(mats.size());
  s.m = static_cast<int>(mats[0].rows());
  s.n = static_cast<int>(mats[0].cols());
  s.b = std::move(mats);
  s.alpha0 = lo;
  s.alpha1 = hi;
  return s;
}

/// b(D) = grad: n = 1, m = d, b_j = e_j.
inline Symbol gradient_symbol(int d) {
  std::vector<Eigen::MatrixXcd> mats;
  for (int j = 0; j < d; ++j) {
    Eigen::MatrixXcd bj = Eigen::MatrixXcd::Zero(d, 1);
    bj(j, 0) = 1.0;
    mats.push_back(bj);
  }
  return make_symbol(std::move(mats));
}

class TrigInterpolant;

/// Gamma-periodic matrix-valued field sampled on the N^d cell grid.
///
/// Column k of `data` holds the column-major entries of the sample at grid
/// index k (see spectral.hpp for the grid layout).
class PeriodicField {
 public:
  PeriodicField() = default;
  PeriodicField(int dim, int N, int rows, int cols)
      : dim_(dim), N_(N), rows_(rows), cols_(cols),
        data_(Eigen::MatrixXcd::Zero(rows * cols, static_cast<Eigen::Index>(spectral::grid_size(dim, N)))) {
    if (N % 2 != 0) throw Error(ErrorKind::OddResolution, "field resolution must be even");
  }

  static PeriodicField constant(int dim, int N, const Eigen::MatrixXcd& value) {
    PeriodicField f(dim, N, static_cast<int>(value.rows()), static_cast<int>(value.cols()));
    for (Eigen::Index k = 0; k < f.data_.cols(); ++k) f.set(k, value);
    return f;
  }

  /// Samples fn(x) at the grid points x = A tau of the lattice cell.
  template <class Fn>
  static PeriodicField from_function(const Lattice& lat, int N, int rows, int cols, Fn&& fn) {
    PeriodicField f(lat.dim, N, rows, cols);
    Eigen::VectorXd tau(lat.dim);
    int nu[3];
    for (Eigen::Index k = 0; k < f.data_.cols(); ++k) {
      std::size_t flat = static_cast<std::size_t>(k);
      for (int j = lat.dim - 1; j >= 0; --j) {
        nu[j] = static_cast<int>(flat % N);
        flat /= N;
      }
      for (int j = 0; j < lat.dim; ++j) tau[j] = static_cast<double>(nu[j]) / N;
      f.set(k, fn(lat.from_cell_coords(tau)));
    }
    return f;
  }

  int dim() const { return dim_; }
  int resolution() const { return N_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Eigen::Index size() const { return data_.cols(); }
  bool empty() const { return data_.size() == 0; }

  Eigen::MatrixXcd at(Eigen::Index k) const {
    return Eigen::Map<const Eigen::MatrixXcd>(data_.col(k).data(), rows_, cols_);
  }
  void set(Eigen::Index k, const Eigen::MatrixXcd& value) {
    data_.col(k) = Eigen::Map<const Eigen::VectorXcd>(value.data(), rows_ * cols_);
  }

  std::vector<cplx> component(int r, int c) const {
    std::vector<cplx> out(static_cast<std::size_t>(size()));
    for (Eigen::Index k = 0; k < size(); ++k) out[static_cast<std::size_t>(k)] = data_(r + rows_ * c, k);
    return out;
  }
  void set_component(int r, int c, const std::vector<cplx>& values) {
    for (Eigen::Index k = 0; k < size(); ++k) data_(r + rows_ * c, k) = values[static_cast<std::size_t>(k)];
  }

  const Eigen::MatrixXcd& raw() const { return data_; }
  Eigen::MatrixXcd& raw() { return data_; }

  /// Cell mean |Omega|^{-1} int f (exact for fields band-limited to the grid).
  Eigen::MatrixXcd mean() const {
    Eigen::VectorXcd m = data_.rowwise().mean();
    return Eigen::Map<Eigen::MatrixXcd>(m.data(), rows_, cols_);
  }

  Eigen::MatrixXcd harmonic_mean() const {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rows_, cols_);
    for (Eigen::Index k = 0; k < size(); ++k) acc += at(k).inverse();
    acc /= static_cast<double>(size());
    return acc.inverse();
  }

  /// max_k |f(x_k)| in the spectral norm.
  double norm_inf() const {
    double out = 0.0;
    for (Eigen::Index k = 0; k < size(); ++k) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(at(k));
      out = std::max(out, svd.singularValues().size() ? svd.singularValues()[0] : 0.0);
    }
    return out;
  }

  /// (|Omega|^{-1} int |f|^2)^{1/2}, entrywise (Frobenius) norm.
  double rms() const { return std::sqrt(data_.squaredNorm() / static_cast<double>(size())); }

  bool is_zero(double tol = 0.0) const { return data_.cwiseAbs().maxCoeff() <= tol; }

  bool is_hermitian(double rel_tol = 1e-12) const {
    if (rows_ != cols_) return false;
    for (Eigen::Index k = 0; k < size(); ++k) {
      const Eigen::MatrixXcd m = at(k);
      if ((m - m.adjoint()).norm() > rel_tol * std::max(m.norm(), 1e-300)) return false;
    }
    return true;
  }

  double min_eigenvalue() const {
    double lo = std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
    for (Eigen::Index k = 0; k < size(); ++k) {
      es.compute(at(k), Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
  }

  /// Fourier coefficients per component, same layout as the samples.
  Eigen::MatrixXcd coefficients() const {
    Eigen::MatrixXcd out(data_.rows(), data_.cols());
    std::vector<cplx> buf(static_cast<std::size_t>(size()));
    for (Eigen::Index r = 0; r < data_.rows(); ++r) {
      for (Eigen::Index k = 0; k < size(); ++k) buf[static_cast<std::size_t>(k)] = data_(r, k);
      spectral::forward(buf, dim_, N_);
      for (Eigen::Index k = 0; k < size(); ++k) out(r, k) = buf[static_cast<std::size_t>(k)];
    }
    return out;
  }

  /// Field whose samples are the pointwise adjoints.
  PeriodicField adjoint() const {
    PeriodicField f(dim_, N_, cols_, rows_);
    for (Eigen::Index k = 0; k < size(); ++k) f.set(k, at(k).adjoint());
    return f;
  }

  TrigInterpolant interpolant(const Lattice& lat) const;

 private:
  int dim_ = 0;
  int N_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  Eigen::MatrixXcd data_;
};

/// Trigonometric interpolant sum_nu c_nu exp(2 pi i nu . tau) of a field.
/// The Nyquist coefficient is split symmetrically, so real samples give a
/// real interpolant and Hermitian samples a Hermitian one.
class TrigInterpolant {
 public:
  TrigInterpolant(const PeriodicField& field, const Lattice& lat)
      : lat_(lat), dim_(field.dim()), N_(field.resolution()), rows_(field.rows()), cols_(field.cols()) {
    if (lat.dim != dim_) throw Error(ErrorKind::InvalidCoefficients, "lattice/field dimension mismatch");
    real_ = field.raw().imag().isZero(0.0);
    const Eigen::MatrixXcd c = field.coefficients();
    // Reorder into centered layout: flat index over (nu_j + N/2), row-major.
    coeffs_.resize(c.cols(), c.rows());
    int nu[3];
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      spectral::unflatten(static_cast<std::size_t>(k), dim_, N_, nu);
      std::size_t centered = 0;
      for (int j = 0; j < dim_; ++j) centered = centered * N_ + static_cast<std::size_t>(nu[j] + N_ / 2);
      coeffs_.row(static_cast<Eigen::Index>(centered)) = c.col(k).transpose();
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  /// Value at y given in physical cell units (pass x / eps for f^eps(x)).
  Eigen::MatrixXcd operator()(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd tau = lat_.to_cell_coords(y);
    Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(coeffs_.cols());
    phases_.resize(dim_);
    for (int j = 0; j < dim_; ++j) {
      auto& p = phases_[j];
      p.resize(N_);
      for (int q = 0; q < N_; ++q) {
        const int nu = q - N_ / 2;
        p[q] = (q == 0) ? cplx(std::cos(std::numbers::pi * N_ * tau[j]), 0.0)
                        : std::polar(1.0, 2.0 * std::numbers::pi * nu * tau[j]);
      }
    }
    if (dim_ == 1) {
      for (int q = 0; q < N_; ++q) acc += phases_[0][q] * coeffs_.row(q);
    } else if (dim_ == 2) {
      Eigen::RowVectorXcd inner(coeffs_.cols());
      for (int q0 = 0; q0 < N_; ++q0) {
        inner.setZero();
        for (int q1 = 0; q1 < N_; ++q1) inner += phases_[1][q1] * coeffs_.row(q0 * N_ + q1);
        acc += phases_[0][q0] * inner;
      }
    } else {
      for (Eigen::Index flat = 0; flat < coeffs_.rows(); ++flat) {
        std::size_t rest = static_cast<std::size_t>(flat);
        cplx w(1.0);
        for (int j = dim_ - 1; j >= 0; --j) {
          w *= phases_[j][rest % N_];
          rest /= N_;
        }
        acc += w * coeffs_.row(flat);
      }
    }
    // Real samples: drop the round-off imaginary part so assembled operators stay real.
    if (real_) acc = acc.real().cast<cplx>();
    return Eigen::Map<const Eigen::MatrixXcd>(acc.data(), rows_, cols_);
  }

 private:
  Lattice lat_;
  int dim_;
  int N_;
  int rows_;
  int cols_;
  bool real_ = false;
  Eigen::MatrixXcd coeffs_;  // (N^d) x (rows*cols), centered frequency layout
  mutable std::vector<std::vector<cplx>> phases_;
};

inline TrigInterpolant PeriodicField::interpolant(const Lattice& lat) const { return TrigInterpolant(*this, lat); }

/// f^eps(x) = f(x / eps) by trigonometric interpolation.
inline std::vector<Eigen::MatrixXcd> eval_scaled(const PeriodicField& field, const Lattice& lat, double eps,
                                                 const std::vector<Eigen::VectorXd>& points) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidCoefficients, "eps must be positive");
  const TrigInterpolant interp(field, lat);
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    if (x.size() != lat.dim) throw Error(ErrorKind::InvalidCoefficients, "point dimension mismatch");
    out.push_back(interp(x / eps));
  }
  return out;
}

/// Full operator data: symbol, g, optional a_j and Q, and the shift lambda.
struct CoefficientSet {
  std::string name;
  Lattice lattice;
  Symbol symbol;
  PeriodicField g;
  std::vector<PeriodicField> a;  // empty, or d fields of size n x n
  std::optional<PeriodicField> Q;
  double lambda = 0.0;

  int dim() const { return lattice.dim; }
  int resolution() const { return g.resolution(); }

  bool has_first_order() const {
    for (const auto& aj : a)
      if (!aj.is_zero()) return true;
    return false;
  }
  bool has_potential() const { return Q.has_value() && !Q->is_zero(); }

  /// C_a = (sum_j int_Omega |a_j|^2)^{1/2}.
  double c_a() const {
    double acc = 0.0;
    for (const auto& aj : a) {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < aj.size(); ++k) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(aj.at(k));
        const double s = svd.singularValues()[0];
        sum += s * s;
      }
      acc += sum * lattice.cell_volume / static_cast<double>(aj.size());
    }
    return std::sqrt(acc);
  }

  /// ||g^{-1}||_inf estimated over samples.
  double g_inverse_norm_inf() const { return 1.0 / g.min_eigenvalue(); }

  void validate() const {
    const int d = lattice.dim;
    if (symbol.d != d) throw Error(ErrorKind::InvalidCoefficients, "symbol dimension differs from lattice");
    if (g.dim() != d || g.rows() != symbol.m || g.cols() != symbol.m)
      throw Error(ErrorKind::InvalidCoefficients, "g must be m x m on the lattice grid");
    if (!g.is_hermitian(1e-12)) throw Error(ErrorKind::InvalidCoefficients, "g is not Hermitian");
    if (!(g.min_eigenvalue() >= 1e-8)) throw Error(ErrorKind::InvalidCoefficients, "g is not positive definite");
    if (!a.empty()) {
      if (static_cast<int>(a.size()) != d) throw Error(ErrorKind::InvalidCoefficients, "need d fields a_j");
      for (const auto& aj : a)
        if (aj.rows() != symbol.n || aj.cols() != symbol.n || aj.resolution() != g.resolution())
          throw Error(ErrorKind::InvalidCoefficients, "a_j must be n x n on the g grid");
    }
    if (Q) {
      if (Q->rows() != symbol.n || Q->cols() != symbol.n || Q->resolution() != g.resolution())
        throw Error(ErrorKind::InvalidCoefficients, "Q must be n x n on the g grid");
      if (!Q->is_zero() && !Q->is_hermitian(1e-12))
        throw Error(ErrorKind::InvalidCoefficients, "Q is not Hermitian");
    }
    if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidCoefficients, "lambda must be nonnegative");
  }
};

using CatalogParams = std::map<std::string, double>;

inline int default_cell_resolution(int d) { return d == 1 ? 128 : 64; }

namespace detail {

inline double param(const CatalogParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

// Lower-order terms shared by every catalog entry:
//   a_1 += a_amp sin(2 pi x_1) I_n,  a_j += a_const I_n,  Q = (q + q_amp cos(2 pi x_1)) I_n.
inline void attach_lower_order(CoefficientSet& cs, const CatalogParams& p, int N) {
  const double a_amp = param(p, "a_amp", 0.0);
  const double a_const = param(p, "a_const", 0.0);
  const double q = param(p, "q", 0.0);
  const double q_amp = param(p, "q_amp", 0.0);
  const int n = cs.symbol.n;
  const int d = cs.lattice.dim;
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  if (a_amp != 0.0 || a_const != 0.0) {
    for (int j = 0; j < d; ++j) {
      const double amp = j == 0 ? a_amp : 0.0;
      cs.a.push_back(PeriodicField::from_function(cs.lattice, N, n, n, [&](const Eigen::VectorXd& x) {
        return Eigen::MatrixXcd((amp * std::sin(2.0 * std::numbers::pi * x[0]) + a_const) * eye);
      }));
    }
  }
  if (q != 0.0 || q_amp != 0.0) {
    cs.Q = PeriodicField::from_function(cs.lattice, N, n, n, [&](const Eigen::VectorXd& x) {
      return Eigen::MatrixXcd((q + q_amp * std::cos(2.0 * std::numbers::pi * x[0])) * eye);
    });
  }
  cs.lambda = param(p, "lambda", 0.0);
}

inline PeriodicField scalar_times_identity(const Lattice& lat, int N, int m,
                                           const std::function<double(const Eigen::VectorXd&)>& s) {
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(m, m);
  return PeriodicField::from_function(lat, N, m, m,
                                      [&](const Eigen::VectorXd& x) { return Eigen::MatrixXcd(s(x) * eye); });
}

}  // namespace detail

/// Named coefficient fixtures. Every entry takes `N` (cell resolution) and
/// the lower-order parameters `a_amp`, `a_const`, `q`, `q_amp`, `lambda`.
inline CoefficientSet catalog(const std::string& name, const CatalogParams& p = {}) {
  using detail::param;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  CoefficientSet cs;
  cs.name = name;
  int d = 1;
  if (name == "const") {
    d = static_cast<int>(param(p, "d", 1));
  } else if (name == "sine1d") {
    d = 1;
  } else if (name == "laminate2d" || name == "checkerboard-smooth") {
    d = 2;
  } else if (name == "random-bandlimited") {
    d = static_cast<int>(param(p, "d", 1));
  } else {
    throw Error(ErrorKind::UnknownCatalogEntry, "unknown catalog entry '" + name + "'");
  }
  if (d < 1 || d > 2) throw Error(ErrorKind::InvalidCoefficients, "catalog fields support d in {1, 2}");
  const int N = static_cast<int>(param(p, "N", default_cell_resolution(d)));
  cs.lattice = unit_lattice(d);
  cs.symbol = gradient_symbol(d);
  const int m = cs.symbol.m;
  const double base = param(p, "base", 2.0);
  const double amp = param(p, "amp", 1.0);

  if (name == "const") {
    const double c = param(p, "g", 1.0);
    cs.g = PeriodicField::constant(d, N, Eigen::MatrixXcd(c * Eigen::MatrixXcd::Identity(m, m)));
  } else if (name == "sine1d") {
    cs.g = detail::scalar_times_identity(cs.lattice, N, m,
                                         [&](const Eigen::VectorXd& x) { return base + amp * std::sin(two_pi * x[0]); });
  } else if (name == "laminate2d") {
    cs.g = detail::scalar_times_identity(cs.lattice, N, m,
                                         [&](const Eigen::VectorXd& x) { return base + amp * std::sin(two_pi * x[0]); });
  } else if (name == "checkerboard-smooth") {
    cs.g = detail::scalar_times_identity(cs.lattice, N, m, [&](const Eigen::VectorXd& x) {
      return base + amp * std::sin(two_pi * x[0]) * std::sin(two_pi * x[1]);
    });
  } else {
    // Random trigonometric polynomial base + sum c_k phi_k with sum |c_k| = amp.
    const int modes = static_cast<int>(param(p, "modes", 3));
    const bool layered = param(p, "layered", 1.0) != 0.0;
    std::mt19937_64 rng(static_cast<std::uint64_t>(param(p, "seed", 1)));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    struct Term {
      int k1, k2;
      double c, s;
    };
    std::vector<Term> terms;
    double total = 0.0;
    for (int k1 = 0; k1 <= modes; ++k1) {
      const int k2max = (d == 2 && !layered) ? modes : 0;
      for (int k2 = (d == 2 && !layered) ? -modes : 0; k2 <= k2max; ++k2) {
        if (k1 == 0 && k2 <= 0) continue;
        Term t{k1, k2, unif(rng), unif(rng)};
        total += std::abs(t.c) + std::abs(t.s);
        terms.push_back(t);
      }
    }
    const double scale = total > 0.0 ? amp / total : 0.0;
    cs.g = detail::scalar_times_identity(cs.lattice, N, m, [&](const Eigen::VectorXd& x) {
      double v = base;
      for (const auto& t : terms) {
        const double arg = two_pi * (t.k1 * x[0] + (d == 2 ? t.k2 * x[1] : 0.0));
        v += scale * (t.c * std::cos(arg) + t.s * std::sin(arg));
      }
      return v;
    });
  }
  detail::attach_lower_order(cs, p, N);
  cs.validate();
  return cs;
}

/// Reads a g field from CSV: a header line `rows,cols,dim,N`, one shape line,
/// then N^d sample lines in grid order with rows*cols real values or
/// 2*rows*cols interleaved (re, im) values, column-major within a sample.
inline PeriodicField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::string line;
  std::getline(in, line);  // header names
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidConfig, "missing shape line in " + path);
  auto split = [](const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) vals.push_back(std::stod(tok));
    }
    return vals;
  };
  const auto shape = split(line);
  if (shape.size() != 4) throw Error(ErrorKind::InvalidConfig, "shape line must be rows,cols,dim,N");
  const int rows = static_cast<int>(shape[0]);
  const int cols = static_cast<int>(shape[1]);
  const int dim = static_cast<int>(shape[2]);
  const int N = static_cast<int>(shape[3]);
  PeriodicField f(dim, N, rows, cols);
  const auto count = static_cast<std::size_t>(rows * cols);
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (!std::getline(in, line)) throw Error(ErrorKind::InvalidConfig, "too few samples in " + path);
    const auto vals = split(line);
    Eigen::VectorXcd entry(static_cast<Eigen::Index>(count));
    if (vals.size() == count) {
      for (std::size_t i = 0; i < count; ++i) entry[static_cast<Eigen::Index>(i)] = vals[i];
    } else if (vals.size() == 2 * count) {
      for (std::size_t i = 0; i < count; ++i) entry[static_cast<Eigen::Index>(i)] = cplx(vals[2 * i], vals[2 * i + 1]);
    } else {
      throw Error(ErrorKind::InvalidConfig, "bad sample line in " + path);
    }
    f.raw().col(k) = entry;
  }
  return f;
}

}  // namespace oscillat
