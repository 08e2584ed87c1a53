#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oscillat/cell.hpp"
#include "oscillat/coefficients.hpp"
#include "oscillat/error.hpp"
#include "oscillat/lattice.hpp"
#include "oscillat/mesh.hpp"

namespace oscillat {

using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

/// f(x / eps) with evaluations memoized by fractional cell position, so
/// periodic repetitions across the mesh cost one interpolation each.
class ScaledField {
 public:
  ScaledField(const PeriodicField& f, const Lattice& lat, double eps)
      : interp_(std::make_shared<TrigInterpolant>(f, lat)), lat_(lat), eps_(eps) {}

  Eigen::MatrixXcd operator()(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd y = x / eps_;
    const Eigen::VectorXd tau = lat_.to_cell_coords(y);
    std::array<long long, 2> key{0, 0};
    constexpr double scale = 17592186044416.0;  // 2^44
    for (int j = 0; j < tau.size() && j < 2; ++j) {
      const double frac = tau[j] - std::floor(tau[j]);
      long long k = std::llround(frac * scale);
      if (k >= static_cast<long long>(scale)) k = 0;
      key[static_cast<std::size_t>(j)] = k;
    }
    if (tau.size() <= 2) {
      auto it = cache_->find(key);
      if (it != cache_->end()) return it->second;
      Eigen::MatrixXcd v = (*interp_)(y);
      cache_->emplace(key, v);
      return v;
    }
    return (*interp_)(y);
  }

  double eps() const { return eps_; }

 private:
  std::shared_ptr<TrigInterpolant> interp_;
  Lattice lat_;
  double eps_;
  std::shared_ptr<std::map<std::array<long long, 2>, Eigen::MatrixXcd>> cache_ =
      std::make_shared<std::map<std::array<long long, 2>, Eigen::MatrixXcd>>();
};

/// Hermitian matrix of B_{D,eps} or B_D^0 acting on interior nodal values
/// (n components per node, node-major).
struct DiscreteDirichletOperator {
  SparseMatrix matrix;
  Mesh mesh;
  int n = 1;
  std::optional<double> eps;  // empty for the effective operator
  double lambda = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();

  Eigen::Index size() const { return matrix.rows(); }
  std::string tag() const { return eps ? "eps=" + std::to_string(*eps) : "effective"; }
  bool is_real() const {
    for (int k = 0; k < matrix.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(matrix, k); it; ++it)
        if (it.value().imag() != 0.0) return false;
    return true;
  }
};

struct AssemblyOptions {
  double h_over_eps = 1.0 / 16.0;
  bool check_positive = true;
};

namespace detail {

// Centered difference D_j^h = -i (u(x + h e_j) - u(x - h e_j)) / (2 h) on
// interior nodes with zero Dirichlet values, expanded by a constant block:
// entries block * D_j^h, block of size r x c.
inline void add_difference(std::vector<Triplet>& trip, const Mesh& mesh, int axis, const Eigen::MatrixXcd& block,
                           const std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)>* nodal = nullptr) {
  const cplx coef(0.0, -1.0 / (2.0 * mesh.h[axis]));
  const auto r = block.rows();
  const auto c = block.cols();
  for (int i = 1; i <= mesh.M[0]; ++i) {
    for (int j = (mesh.dim == 2 ? 1 : 0); j <= (mesh.dim == 2 ? mesh.M[1] : 0); ++j) {
      const Eigen::Index row = mesh.interior_index(i, j);
      Eigen::MatrixXcd b = nodal ? Eigen::MatrixXcd((*nodal)(mesh.node(i, j))) : block;
      for (int s = -1; s <= 1; s += 2) {
        const int ii = axis == 0 ? i + s : i;
        const int jj = axis == 1 ? j + s : j;
        const Eigen::Index col = mesh.interior_index(ii, jj);
        if (col < 0) continue;
        for (Eigen::Index p = 0; p < r; ++p)
          for (Eigen::Index q = 0; q < c; ++q)
            if (b(p, q) != cplx(0.0)) trip.emplace_back(row * r + p, col * c + q, static_cast<double>(s) * coef * b(p, q));
      }
    }
  }
}

// Reference gradient integrals int dphi_a/dx_j dphi_b/dx_l over one cell
// for P1 (d=1) or Q1 with 2x2 Gauss quadrature (d=2).
inline std::vector<Eigen::MatrixXd> element_gradients(const Mesh& mesh) {
  std::vector<Eigen::MatrixXd> S;
  if (mesh.dim == 1) {
    Eigen::MatrixXd s(2, 2);
    s << 1.0, -1.0, -1.0, 1.0;
    S.push_back(s / mesh.h[0]);
    return S;
  }
  const double h1 = mesh.h[0], h2 = mesh.h[1];
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  // local nodes: 0=(0,0), 1=(0,1), 2=(1,0), 3=(1,1) in (xi, eta)
  auto grad = [&](int a, double xi, double eta) {
    const int ax = a / 2, ay = a % 2;
    const double fx = ax ? xi : 1.0 - xi;
    const double fy = ay ? eta : 1.0 - eta;
    const double dfx = ax ? 1.0 : -1.0;
    const double dfy = ay ? 1.0 : -1.0;
    return Eigen::Vector2d(dfx * fy / h1, fx * dfy / h2);
  };
  S.assign(4, Eigen::MatrixXd::Zero(4, 4));
  for (double xi : gp)
    for (double eta : gp)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const Eigen::Vector2d ga = grad(a, xi, eta), gb = grad(b, xi, eta);
          for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l) S[static_cast<std::size_t>(2 * j + l)](a, b) += 0.25 * h1 * h2 * ga[j] * gb[l];
        }
  return S;
}

// Stiffness of sum_jl (D_j u)^* G_jl (D_l u), G_jl = b_j^* g b_l with g taken
// at cell centres, divided by the lumped mass h^d.
inline void add_principal(std::vector<Triplet>& trip, const Mesh& mesh, const Symbol& sym,
                          const std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)>& g_at) {
  const int n = sym.n;
  const int d = mesh.dim;
  const auto S = element_gradients(mesh);
  const double inv_mass = 1.0 / mesh.volume_element();
  const int local = d == 1 ? 2 : 4;
  std::vector<Eigen::MatrixXcd> G(static_cast<std::size_t>(d * d));
  for (int ci = 0; ci < mesh.cells(0); ++ci) {
    for (int cj = 0; cj < mesh.cells(1); ++cj) {
      const Eigen::MatrixXcd g = g_at(mesh.cell_center(ci, cj));
      for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) G[static_cast<std::size_t>(j * d + l)] = sym.b[j].adjoint() * g * sym.b[l];
      Eigen::Index idx[4];
      for (int a = 0; a < local; ++a) {
        const int ii = d == 1 ? ci + a : ci + a / 2;
        const int jj = d == 1 ? 0 : cj + a % 2;
        idx[a] = mesh.interior_index(ii, jj);
      }
      for (int a = 0; a < local; ++a) {
        if (idx[a] < 0) continue;
        for (int b = 0; b < local; ++b) {
          if (idx[b] < 0) continue;
          Eigen::MatrixXcd blk = Eigen::MatrixXcd::Zero(n, n);
          for (int jl = 0; jl < d * d; ++jl) blk += S[static_cast<std::size_t>(jl)](a, b) * G[static_cast<std::size_t>(jl)];
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
              if (blk(p, q) != cplx(0.0)) trip.emplace_back(idx[a] * n + p, idx[b] * n + q, inv_mass * blk(p, q));
        }
      }
    }
  }
}

inline void add_nodal(std::vector<Triplet>& trip, const Mesh& mesh, int n,
                      const std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)>& q_at) {
  for (int i = 1; i <= mesh.M[0]; ++i)
    for (int j = (mesh.dim == 2 ? 1 : 0); j <= (mesh.dim == 2 ? mesh.M[1] : 0); ++j) {
      const Eigen::Index row = mesh.interior_index(i, j);
      const Eigen::MatrixXcd q = q_at(mesh.node(i, j));
      for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r)
          if (q(p, r) != cplx(0.0)) trip.emplace_back(row * n + p, row * n + r, q(p, r));
    }
}

inline SparseMatrix from_triplets(Eigen::Index size, const std::vector<Triplet>& trip) {
  SparseMatrix A(size, size);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

// Sum of the symmetrized pair T + T^* with T = sum_j diag(a_j(x)) D_j^h.
inline SparseMatrix first_order_pair(const Mesh& mesh, int n,
                                     const std::vector<std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)>>& a_at) {
  std::vector<Triplet> trip;
  const Eigen::MatrixXcd dummy = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < mesh.dim && j < static_cast<int>(a_at.size()); ++j) {
    add_difference(trip, mesh, j, dummy, &a_at[static_cast<std::size_t>(j)]);
  }
  const SparseMatrix T = from_triplets(mesh.interior_count() * n, trip);
  return SparseMatrix(T + SparseMatrix(T.adjoint()));
}

}  // namespace detail

/// Smallest eigenvalue of a Hermitian sparse matrix by inverse power
/// iteration on its Cholesky factor; -inf when the factorization fails.
inline double probe_min_eigenvalue(const SparseMatrix& A, int iterations = 200, double rel_tol = 1e-8) {
  Eigen::SimplicialLLT<SparseMatrix> llt(A);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(A.rows());
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] += 1e-3 * std::sin(0.37 * static_cast<double>(k));
  v.normalize();
  double mu = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXcd w = llt.solve(v);
    const double rq = v.dot(w).real();  // v^* A^{-1} v
    const double mu_new = 1.0 / rq;
    w.normalize();
    v = w;
    if (it > 0 && std::abs(mu_new - mu) <= rel_tol * std::abs(mu_new)) {
      mu = mu_new;
      break;
    }
    mu = mu_new;
  }
  const Eigen::VectorXcd Av = A * v;
  return v.dot(Av).real();
}

inline void check_resolution(const Mesh& mesh, double eps, double h_over_eps) {
  if (!(eps > 0.0) || eps > 1.0) throw Error(ErrorKind::ResolutionViolation, "eps must lie in (0, 1]");
  if (mesh.max_h() > h_over_eps * eps * (1.0 + 1e-12)) {
    throw Error(ErrorKind::ResolutionViolation, "mesh spacing " + std::to_string(mesh.max_h()) +
                                                    " exceeds h_over_eps * eps = " + std::to_string(h_over_eps * eps));
  }
}

/// B_{D,eps}: b(D)^* g^eps b(D) + sum_j (a_j^eps D_j + D_j (a_j^eps)^*) + Q^eps + lambda.
inline DiscreteDirichletOperator assemble_b_eps(const Mesh& mesh, const CoefficientSet& cs, double eps,
                                                const AssemblyOptions& opt = {}) {
  if (mesh.dim != cs.dim()) throw Error(ErrorKind::InvalidConfig, "mesh and coefficients differ in dimension");
  check_resolution(mesh, eps, opt.h_over_eps);
  const int n = cs.symbol.n;
  std::vector<Triplet> trip;
  const ScaledField g_eps(cs.g, cs.lattice, eps);
  detail::add_principal(trip, mesh, cs.symbol, [&](const Eigen::VectorXd& x) { return g_eps(x); });
  if (cs.has_potential()) {
    const ScaledField q_eps(*cs.Q, cs.lattice, eps);
    detail::add_nodal(trip, mesh, n, [&](const Eigen::VectorXd& x) { return q_eps(x); });
  }
  if (cs.lambda != 0.0) {
    detail::add_nodal(trip, mesh, n, [&](const Eigen::VectorXd&) {
      return Eigen::MatrixXcd(cs.lambda * Eigen::MatrixXcd::Identity(n, n));
    });
  }
  DiscreteDirichletOperator op;
  op.matrix = detail::from_triplets(mesh.interior_count() * n, trip);
  if (cs.has_first_order()) {
    std::vector<ScaledField> a_eps;
    std::vector<std::function<Eigen::MatrixXcd(const Eigen::VectorXd&)>> a_at;
    for (const auto& aj : cs.a) a_eps.emplace_back(aj, cs.lattice, eps);
    for (const auto& f : a_eps) a_at.emplace_back([&f](const Eigen::VectorXd& x) { return f(x); });
    op.matrix += detail::first_order_pair(mesh, n, a_at);
  }
  op.mesh = mesh;
  op.n = n;
  op.eps = eps;
  op.lambda = cs.lambda;
  if (opt.check_positive) {
    op.min_eigenvalue = probe_min_eigenvalue(op.matrix);
    if (!(op.min_eigenvalue > 0.0)) {
      throw Error(ErrorKind::NotPositiveDefinite, "B_eps at " + op.tag() + " is not positive definite; raise lambda");
    }
  }
  return op;
}

/// B_D^0 = b(D)^* g0 b(D) - b(D)^* V - V^* b(D) + sum_j (abar_j + abar_j^*) D_j - W + Qbar + lambda.
inline DiscreteDirichletOperator assemble_b0(const Mesh& mesh, const CellSolution& cell, const CoefficientSet& cs,
                                             bool check_positive = true) {
  if (mesh.dim != cs.dim()) throw Error(ErrorKind::InvalidConfig, "mesh and coefficients differ in dimension");
  const int n = cs.symbol.n;
  const int m = cs.symbol.m;
  const Eigen::Index size = mesh.interior_count() * n;
  std::vector<Triplet> trip;
  detail::add_principal(trip, mesh, cs.symbol, [&](const Eigen::VectorXd&) { return cell.g0; });
  Eigen::MatrixXcd diag = cs.lambda * Eigen::MatrixXcd::Identity(n, n) - cell.W;
  if (cs.Q) diag += cs.Q->mean();
  detail::add_nodal(trip, mesh, n, [&](const Eigen::VectorXd&) { return diag; });
  // sum_j (abar_j + abar_j^*) D_j^h
  for (int j = 0; j < mesh.dim && j < static_cast<int>(cs.a.size()); ++j) {
    const Eigen::MatrixXcd abar = cs.a[static_cast<std::size_t>(j)].mean();
    const Eigen::MatrixXcd sym_part = abar + abar.adjoint();
    if (sym_part.norm() > 0.0) detail::add_difference(trip, mesh, j, sym_part);
  }
  SparseMatrix A = detail::from_triplets(size, trip);
  if (cell.V.norm() > 0.0) {
    // B_h = sum_j b_j (x) D_j^h maps n-vectors to m-vectors per node.
    std::vector<Triplet> bt;
    for (int j = 0; j < mesh.dim; ++j) detail::add_difference(bt, mesh, j, cs.symbol.b[static_cast<std::size_t>(j)]);
    SparseMatrix Bh(mesh.interior_count() * m, size);
    Bh.setFromTriplets(bt.begin(), bt.end());
    std::vector<Triplet> vt;
    for (Eigen::Index q = 0; q < mesh.interior_count(); ++q)
      for (int p = 0; p < m; ++p)
        for (int r = 0; r < n; ++r)
          if (cell.V(p, r) != cplx(0.0)) vt.emplace_back(q * m + p, q * n + r, cell.V(p, r));
    SparseMatrix IV(mesh.interior_count() * m, size);
    IV.setFromTriplets(vt.begin(), vt.end());
    const SparseMatrix cross = SparseMatrix(Bh.adjoint()) * IV;
    A -= cross;
    A -= SparseMatrix(cross.adjoint());
  }
  A.makeCompressed();
  DiscreteDirichletOperator op;
  op.matrix = std::move(A);
  op.mesh = mesh;
  op.n = n;
  op.lambda = cs.lambda;
  if (check_positive) {
    op.min_eigenvalue = probe_min_eigenvalue(op.matrix);
    if (!(op.min_eigenvalue > 0.0)) {
      throw Error(ErrorKind::NotPositiveDefinite, "B_0 is not positive definite; raise lambda");
    }
  }
  return op;
}

/// Coercivity estimate c_* = alpha0 / (4 |g^{-1}|_inf).
inline double coercivity_estimate(const CoefficientSet& cs) {
  return 0.25 * cs.symbol.alpha0 / cs.g_inverse_norm_inf();
}

/// Smallest lambda in {0, 1, 2, 4, ..., 2^16} for which B_eps (every eps) and
/// B_0 have smallest eigenvalue >= 0.25 c_* pi^2 / max(L_k)^2.
inline double choose_lambda(const Mesh& mesh, const CoefficientSet& cs, const CellSolution& cell,
                            const std::vector<double>& eps_list, const AssemblyOptions& opt = {}) {
  if (eps_list.empty()) throw Error(ErrorKind::InvalidConfig, "choose_lambda needs at least one eps");
  const double margin = 0.25 * coercivity_estimate(cs) * std::numbers::pi * std::numbers::pi /
                        (mesh.max_L() * mesh.max_L());
  CoefficientSet base = cs;
  base.lambda = 0.0;
  AssemblyOptions no_check = opt;
  no_check.check_positive = false;
  std::vector<SparseMatrix> mats;
  for (double eps : eps_list) mats.push_back(assemble_b_eps(mesh, base, eps, no_check).matrix);
  mats.push_back(assemble_b0(mesh, cell, base, false).matrix);
  SparseMatrix eye(mats[0].rows(), mats[0].cols());
  eye.setIdentity();
  for (int k = -1; k <= 16; ++k) {
    const double lambda = k < 0 ? 0.0 : std::ldexp(1.0, k);
    bool ok = true;
    for (const auto& A : mats) {
      const double mu = probe_min_eigenvalue(SparseMatrix(A + lambda * eye));
      if (!(mu >= margin)) {
        ok = false;
        break;
      }
    }
    if (ok) return lambda;
  }
  throw Error(ErrorKind::LambdaSearchFailed, "no lambda <= 2^16 makes the operators positive definite");
}

/// Hestenes reflection extension of box functions onto an enlarged grid.
struct ExtensionOperator {
  Mesh mesh;
  std::array<int, 2> margin{0, 0};  // extra nodes per side, per axis
};

/// Margin of ceil(2 r1 eps / h) + 2 nodes, enough for S_eps and b(D).
inline ExtensionOperator make_extension(const Mesh& mesh, const Lattice& lat, double eps_max) {
  ExtensionOperator ext;
  ext.mesh = mesh;
  for (int k = 0; k < mesh.dim; ++k) {
    const int p = static_cast<int>(std::ceil(2.0 * lat.r1 * eps_max / mesh.h[k] - 1e-9)) + 2;
    if (3 * p > mesh.M[k] + 1) {
      throw Error(ErrorKind::MarginTooSmall, "box too small to hold the reflection stencil for eps = " +
                                                 std::to_string(eps_max));
    }
    ext.margin[static_cast<std::size_t>(k)] = p;
  }
  return ext;
}

namespace detail {

inline double cutoff(double s) {
  // 1 at s = 0, 0 at s = 1, C^2 in between.
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

}  // namespace detail

/// Extends a box function to the enlarged grid. Restriction to O returns u.
inline GridFunction extend(const GridFunction& u, const ExtensionOperator& op) {
  const Mesh& mesh = op.mesh;
  if (u.count[0] != mesh.nodes(0) || u.count[1] != mesh.nodes(1))
    throw Error(ErrorKind::InvalidConfig, "extension input must live on the box nodes");
  GridFunction cur = u;
  for (int axis = 0; axis < mesh.dim; ++axis) {
    const int p = op.margin[static_cast<std::size_t>(axis)];
    const int nb = cur.count[axis];  // nodes along axis, 0..nb-1
    GridFunction next = cur;
    next.count[axis] = nb + 2 * p;
    next.origin[axis] = cur.origin[axis] - p * cur.h[axis];
    next.values = Eigen::MatrixXcd::Zero(cur.ncomp, next.size());
    const int other = axis == 0 ? 1 : 0;
    const int n_other = cur.count[other];
    auto at = [&](const GridFunction& g, int along, int across) {
      return axis == 0 ? g.index(along, across) : g.index(across, along);
    };
    for (int t = 0; t < n_other; ++t) {
      for (int s = 0; s < nb; ++s) next.values.col(at(next, s + p, t)) = cur.values.col(at(cur, s, t));
      for (int k = 1; k <= p; ++k) {
        const double chi = detail::cutoff(static_cast<double>(k) / p);
        // left face at s = 0, right face at s = nb - 1
        const Eigen::VectorXcd left = 6.0 * cur.values.col(at(cur, k, t)) - 8.0 * cur.values.col(at(cur, 2 * k, t)) +
                                      3.0 * cur.values.col(at(cur, 3 * k, t));
        const Eigen::VectorXcd right = 6.0 * cur.values.col(at(cur, nb - 1 - k, t)) -
                                       8.0 * cur.values.col(at(cur, nb - 1 - 2 * k, t)) +
                                       3.0 * cur.values.col(at(cur, nb - 1 - 3 * k, t));
        next.values.col(at(next, p - k, t)) = chi * left;
        next.values.col(at(next, nb - 1 + p + k, t)) = chi * right;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

/// Restriction of an extended function back to the box nodes.
inline GridFunction restrict_to_box(const GridFunction& ext, const ExtensionOperator& op) {
  GridFunction out = box_function(op.mesh, ext.ncomp);
  const int p0 = op.margin[0], p1 = op.mesh.dim == 2 ? op.margin[1] : 0;
  for (int i = 0; i < out.count[0]; ++i)
    for (int j = 0; j < out.count[1]; ++j) out.values.col(out.index(i, j)) = ext.values.col(ext.index(i + p0, j + p1));
  return out;
}

namespace detail {

inline const std::array<double, 8>& gauss8_nodes() {
  static const std::array<double, 8> x = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                          -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                          0.7966664774136267,  0.9602898564975363};
  return x;
}
inline const std::array<double, 8>& gauss8_weights() {
  static const std::array<double, 8> w = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                          0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                          0.2223810344533745, 0.1012285362903763};
  return w;
}

}  // namespace detail

/// (S_eps u)(x) = |Omega|^{-1} int_Omega u(x - eps z) dz by 8-point Gauss
/// quadrature per axis in cell coordinates.
inline Eigen::VectorXcd steklov_point(const GridFunction& u, const Lattice& lat, double eps, const Eigen::VectorXd& x) {
  const auto& gx = detail::gauss8_nodes();
  const auto& gw = detail::gauss8_weights();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(u.ncomp);
  Eigen::VectorXd tau(lat.dim);
  if (lat.dim == 1) {
    for (int a = 0; a < 8; ++a) {
      tau[0] = 0.5 * gx[a];
      acc += 0.5 * gw[a] * u.sample(x - eps * lat.from_cell_coords(tau));
    }
  } else if (lat.dim == 2) {
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) {
        tau << 0.5 * gx[a], 0.5 * gx[b];
        acc += 0.25 * gw[a] * gw[b] * u.sample(x - eps * lat.from_cell_coords(tau));
      }
  } else {
    throw Error(ErrorKind::InvalidConfig, "Steklov smoothing supports d in {1, 2}");
  }
  return acc;
}

/// S_eps on a periodic grid (same grid out), or onto the nodes of `box`
/// for an extended grid.
inline GridFunction steklov(const GridFunction& u, const Lattice& lat, double eps, const Mesh* box = nullptr) {
  if (u.periodic) {
    GridFunction out = u;
    for (int i = 0; i < u.count[0]; ++i)
      for (int j = 0; j < u.count[1]; ++j) out.values.col(u.index(i, j)) = steklov_point(u, lat, eps, u.point(i, j));
    return out;
  }
  if (!box) throw Error(ErrorKind::InvalidConfig, "non-periodic Steklov smoothing needs a target box");
  for (int k = 0; k < box->dim; ++k) {
    // The stencil reaches eps * max|A tau|_k <= eps * r1 beyond each node.
    const double reach = eps * lat.r1 + box->h[k];
    if (u.origin[k] > -reach || u.origin[k] + (u.count[k] - 1) * u.h[k] < box->L[k] + reach) {
      throw Error(ErrorKind::MarginTooSmall, "extension margin cannot hold the Steklov stencil");
    }
  }
  GridFunction out = box_function(*box, u.ncomp);
  for (int i = 0; i < out.count[0]; ++i)
    for (int j = 0; j < out.count[1]; ++j) out.values.col(out.index(i, j)) = steklov_point(u, lat, eps, box->node(i, j));
  return out;
}

/// b(D)u = sum_j b_j (-i d_j) u by centered differences on the grid. The
/// outermost layer uses one-sided differences.
inline GridFunction apply_symbol_fd(const GridFunction& u, const Symbol& sym) {
  GridFunction out = u;
  out.ncomp = sym.m;
  out.values = Eigen::MatrixXcd::Zero(sym.m, u.size());
  for (int j = 0; j < u.dim; ++j) {
    const cplx coef(0.0, -1.0 / u.h[j]);
    for (int a = 0; a < u.count[0]; ++a)
      for (int b = 0; b < u.count[1]; ++b) {
        int lo[2] = {a, b}, hi[2] = {a, b};
        lo[j] -= 1;
        hi[j] += 1;
        double scale = 0.5;
        if (lo[j] < 0) {
          lo[j] = j == 0 ? a : b;
          scale = 1.0;
        }
        if (hi[j] >= u.count[j]) {
          hi[j] = j == 0 ? a : b;
          scale = 1.0;
        }
        const Eigen::VectorXcd du = scale * coef * (u.values.col(u.index(hi[0], hi[1])) - u.values.col(u.index(lo[0], lo[1])));
        out.values.col(u.index(a, b)) += sym.b[static_cast<std::size_t>(j)] * du;
      }
  }
  return out;
}

/// Ingredients of the corrector at a set of points: (S_eps or I) b(D)u and
/// (S_eps or I) u, sampled from an extended grid function.
struct SmoothedData {
  Eigen::MatrixXcd bdu;  // m x points
  Eigen::MatrixXcd u;    // n x points
};

inline SmoothedData smoothed_data(const GridFunction& u_ext, const Symbol& sym, const Lattice& lat, double eps,
                                  const std::vector<Eigen::VectorXd>& points, bool smoothed) {
  const GridFunction bdu = apply_symbol_fd(u_ext, sym);
  SmoothedData out;
  out.bdu.resize(sym.m, static_cast<Eigen::Index>(points.size()));
  out.u.resize(u_ext.ncomp, static_cast<Eigen::Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    if (smoothed) {
      out.bdu.col(col) = steklov_point(bdu, lat, eps, points[k]);
      out.u.col(col) = steklov_point(u_ext, lat, eps, points[k]);
    } else {
      out.bdu.col(col) = bdu.sample(points[k]);
      out.u.col(col) = u_ext.sample(points[k]);
    }
  }
  return out;
}

/// Scaled corrector fields Lambda^eps and LambdaTilde^eps, memoized.
struct ScaledCorrectors {
  ScaledField Lambda;
  ScaledField LambdaTilde;
  ScaledCorrectors(const CellSolution& cell, const Lattice& lat, double eps)
      : Lambda(cell.Lambda, lat, eps), LambdaTilde(cell.LambdaTilde, lat, eps) {}
};

/// K u = R_O[(Lambda^eps b(D) + LambdaTilde^eps)(S_eps or I) u_ext] on the box nodes.
inline GridFunction corrector_apply(const CellSolution& cell, double eps, const Symbol& sym, const Lattice& lat,
                                    const GridFunction& u_ext, const Mesh& mesh, bool smoothed) {
  const ScaledCorrectors sc(cell, lat, eps);
  const auto points = mesh.all_points();
  const SmoothedData data = smoothed_data(u_ext, sym, lat, eps, points, smoothed);
  GridFunction out = box_function(mesh, sym.n);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    out.values.col(col) = sc.Lambda(points[k]) * data.bdu.col(col) + sc.LambdaTilde(points[k]) * data.u.col(col);
  }
  return out;
}

/// Factorized (A - zeta I) for repeated solves.
class Resolvent {
 public:
  Resolvent(const DiscreteDirichletOperator& op, cplx zeta) : zeta_(zeta), size_(op.size()) {
    SparseMatrix eye(op.size(), op.size());
    eye.setIdentity();
    shifted_ = op.matrix - zeta * eye;
    for (int k = 0; k < shifted_.outerSize(); ++k) {
      double col = 0.0;
      for (SparseMatrix::InnerIterator it(shifted_, k); it; ++it) col += std::abs(it.value());
      norm1_ = std::max(norm1_, col);
    }
    double mu = op.min_eigenvalue;
    if (std::isnan(mu)) mu = probe_min_eigenvalue(op.matrix);
    const bool below = zeta.imag() == 0.0 && zeta.real() < mu - 1e-8;
    if (std::abs(zeta - cplx(mu)) < 1e-8) throw Error(ErrorKind::NearSpectrumShift, "zeta is an eigenvalue estimate");
    if (below) {
      llt_ = std::make_unique<Eigen::SimplicialLLT<SparseMatrix>>(shifted_);
      if (llt_->info() != Eigen::Success) llt_.reset();
    }
    if (!llt_) {
      lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
      lu_->analyzePattern(shifted_);
      lu_->factorize(shifted_);
      if (lu_->info() != Eigen::Success) throw Error(ErrorKind::NearSpectrumShift, "A - zeta I is singular");
    }
  }

  Eigen::VectorXcd solve(const Eigen::VectorXcd& f) const {
    if (f.size() != size_) throw Error(ErrorKind::InvalidConfig, "right-hand side has the wrong length");
    Eigen::VectorXcd u = llt_ ? Eigen::VectorXcd(llt_->solve(f)) : Eigen::VectorXcd(lu_->solve(f));
    // One step of iterative refinement keeps the residual near machine precision.
    const Eigen::VectorXcd r = f - shifted_ * u;
    u += llt_ ? Eigen::VectorXcd(llt_->solve(r)) : Eigen::VectorXcd(lu_->solve(r));
    // Normwise backward error.
    const double res = (f - shifted_ * u).norm();
    if (!(res <= 1e-12 * (norm1_ * u.norm() + f.norm()) + 1e-300)) {
      throw Error(ErrorKind::NearSpectrumShift, "resolvent residual too large; zeta too close to the spectrum");
    }
    return u;
  }

  cplx zeta() const { return zeta_; }

 private:
  cplx zeta_;
  Eigen::Index size_;
  double norm1_ = 0.0;
  SparseMatrix shifted_;
  std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

/// Solves (A - zeta I) u = f.
inline Eigen::VectorXcd resolvent(const DiscreteDirichletOperator& op, cplx zeta, const Eigen::VectorXcd& f) {
  return Resolvent(op, zeta).solve(f);
}

}  // namespace oscillat
