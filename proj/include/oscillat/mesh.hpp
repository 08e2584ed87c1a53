#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "oscillat/error.hpp"
#include "oscillat/spectral.hpp"

namespace oscillat {

/// Uniform mesh of the box O = prod (0, L_k), d in {1, 2}.
///
/// Node (i_1, ..., i_d) with 0 <= i_k <= M_k + 1 sits at x_k = i_k h_k; the
/// interior nodes are 1..M_k. Flat indices are row-major, last axis fastest.
struct Mesh {
  int dim = 1;
  std::array<double, 2> L{1.0, 1.0};
  std::array<int, 2> M{0, 1};
  std::array<double, 2> h{0.0, 1.0};

  int nodes(int axis) const { return axis < dim ? M[axis] + 2 : 1; }
  int inner(int axis) const { return axis < dim ? M[axis] : 1; }
  int cells(int axis) const { return axis < dim ? M[axis] + 1 : 1; }
  Eigen::Index node_count() const { return static_cast<Eigen::Index>(nodes(0)) * nodes(1); }
  Eigen::Index interior_count() const { return static_cast<Eigen::Index>(inner(0)) * inner(1); }
  Eigen::Index cell_count() const { return static_cast<Eigen::Index>(cells(0)) * cells(1); }
  double volume_element() const { return dim == 1 ? h[0] : h[0] * h[1]; }
  double max_h() const { return dim == 1 ? h[0] : std::max(h[0], h[1]); }
  double max_L() const { return dim == 1 ? L[0] : std::max(L[0], L[1]); }
  double diameter() const { return dim == 1 ? L[0] : std::hypot(L[0], L[1]); }

  Eigen::Index node_index(int i, int j = 0) const { return static_cast<Eigen::Index>(i) * nodes(1) + j; }
  /// Interior flat index of node (i, j); -1 for boundary nodes.
  Eigen::Index interior_index(int i, int j = 0) const {
    if (i < 1 || i > M[0]) return -1;
    if (dim == 1) return i - 1;
    if (j < 1 || j > M[1]) return -1;
    return static_cast<Eigen::Index>(i - 1) * M[1] + (j - 1);
  }
  Eigen::VectorXd node(int i, int j = 0) const {
    Eigen::VectorXd x(dim);
    x[0] = i * h[0];
    if (dim == 2) x[1] = j * h[1];
    return x;
  }
  Eigen::VectorXd cell_center(int i, int j = 0) const {
    Eigen::VectorXd x(dim);
    x[0] = (i + 0.5) * h[0];
    if (dim == 2) x[1] = (j + 0.5) * h[1];
    return x;
  }

  std::vector<Eigen::VectorXd> interior_points() const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(interior_count()));
    for (int i = 1; i <= M[0]; ++i)
      for (int j = (dim == 2 ? 1 : 0); j <= (dim == 2 ? M[1] : 0); ++j) out.push_back(node(i, j));
    return out;
  }
  std::vector<Eigen::VectorXd> all_points() const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(node_count()));
    for (int i = 0; i < nodes(0); ++i)
      for (int j = 0; j < nodes(1); ++j) out.push_back(node(i, j));
    return out;
  }
  std::vector<Eigen::VectorXd> cell_centers() const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(cell_count()));
    for (int i = 0; i < cells(0); ++i)
      for (int j = 0; j < cells(1); ++j) out.push_back(cell_center(i, j));
    return out;
  }
};

inline Mesh make_mesh(const std::vector<double>& box, const std::vector<int>& interior) {
  if (box.empty() || box.size() > 2 || interior.size() != box.size()) {
    throw Error(ErrorKind::InvalidConfig, "meshes support boxes in 1 or 2 dimensions");
  }
  Mesh mesh;
  mesh.dim = static_cast<int>(box.size());
  for (int k = 0; k < mesh.dim; ++k) {
    if (!(box[k] > 0.0)) throw Error(ErrorKind::InvalidConfig, "box sides must be positive");
    if (interior[k] < 3) throw Error(ErrorKind::InvalidConfig, "need at least 3 interior nodes per axis");
    mesh.L[k] = box[k];
    mesh.M[k] = interior[k];
    mesh.h[k] = box[k] / (interior[k] + 1);
  }
  return mesh;
}

/// Coarsest mesh with h_k <= h_max on every axis.
inline Mesh mesh_with_spacing(const std::vector<double>& box, double h_max) {
  std::vector<int> interior;
  for (double Lk : box) interior.push_back(std::max(3, static_cast<int>(std::ceil(Lk / h_max - 1e-9)) - 1));
  return make_mesh(box, interior);
}

/// Vector-valued function on a tensor grid. Node (i, j) sits at
/// origin + (i h_0, j h_1); values are stored as ncomp x (count_0 count_1).
struct GridFunction {
  int dim = 1;
  int ncomp = 1;
  std::array<int, 2> count{1, 1};
  std::array<double, 2> origin{0.0, 0.0};
  std::array<double, 2> h{1.0, 1.0};
  bool periodic = false;  // periodic grids cover [origin, origin + count h)
  Eigen::MatrixXcd values;

  Eigen::Index size() const { return static_cast<Eigen::Index>(count[0]) * count[1]; }
  Eigen::Index index(int i, int j = 0) const { return static_cast<Eigen::Index>(i) * count[1] + j; }
  Eigen::VectorXd point(int i, int j = 0) const {
    Eigen::VectorXd x(dim);
    x[0] = origin[0] + i * h[0];
    if (dim == 2) x[1] = origin[1] + j * h[1];
    return x;
  }

  /// Multilinear interpolation at x.
  Eigen::VectorXcd sample(const Eigen::VectorXd& x) const {
    int base[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int k = 0; k < dim; ++k) {
      const double s = (x[k] - origin[k]) / h[k];
      double fl = std::floor(s);
      int b = static_cast<int>(fl);
      frac[k] = s - fl;
      if (periodic) {
        b = ((b % count[k]) + count[k]) % count[k];
      } else if (b < 0 || b >= count[k] - 1) {
        if (b == count[k] - 1 && frac[k] < 1e-9) {
          b = count[k] - 2;
          frac[k] = 1.0;
        } else {
          throw Error(ErrorKind::MarginTooSmall, "sample point outside the grid");
        }
      }
      base[k] = b;
    }
    auto wrap = [&](int k, int i) { return periodic ? i % count[k] : i; };
    if (dim == 1) {
      return (1.0 - frac[0]) * values.col(index(base[0])) + frac[0] * values.col(index(wrap(0, base[0] + 1)));
    }
    const int i0 = base[0], i1 = wrap(0, base[0] + 1);
    const int j0 = base[1], j1 = wrap(1, base[1] + 1);
    return (1.0 - frac[0]) * ((1.0 - frac[1]) * values.col(index(i0, j0)) + frac[1] * values.col(index(i0, j1))) +
           frac[0] * ((1.0 - frac[1]) * values.col(index(i1, j0)) + frac[1] * values.col(index(i1, j1)));
  }
};

/// Grid function over all nodes of the closed box.
inline GridFunction box_function(const Mesh& mesh, int ncomp) {
  GridFunction f;
  f.dim = mesh.dim;
  f.ncomp = ncomp;
  f.count = {mesh.nodes(0), mesh.nodes(1)};
  f.h = {mesh.h[0], mesh.dim == 2 ? mesh.h[1] : 1.0};
  f.values = Eigen::MatrixXcd::Zero(ncomp, f.size());
  return f;
}

/// Interior vector (node-major, ncomp per node) -> box function, zero on the boundary.
inline GridFunction embed(const Mesh& mesh, const Eigen::VectorXcd& interior, int ncomp) {
  if (interior.size() != mesh.interior_count() * ncomp)
    throw Error(ErrorKind::InvalidConfig, "interior vector has the wrong length");
  GridFunction f = box_function(mesh, ncomp);
  for (int i = 0; i < mesh.nodes(0); ++i)
    for (int j = 0; j < mesh.nodes(1); ++j) {
      const Eigen::Index q = mesh.interior_index(i, j);
      if (q >= 0) f.values.col(mesh.node_index(i, j)) = interior.segment(q * ncomp, ncomp);
    }
  return f;
}

inline Eigen::VectorXcd restrict_interior(const Mesh& mesh, const GridFunction& f) {
  Eigen::VectorXcd out(mesh.interior_count() * f.ncomp);
  for (int i = 0; i < mesh.nodes(0); ++i)
    for (int j = 0; j < mesh.nodes(1); ++j) {
      const Eigen::Index q = mesh.interior_index(i, j);
      if (q >= 0) out.segment(q * f.ncomp, f.ncomp) = f.values.col(mesh.node_index(i, j));
    }
  return out;
}

/// Interior samples of fn (node-major, ncomp per node).
inline Eigen::VectorXcd interior_samples(const Mesh& mesh, int ncomp,
                                         const std::function<Eigen::VectorXcd(const Eigen::VectorXd&)>& fn) {
  Eigen::VectorXcd out(mesh.interior_count() * ncomp);
  Eigen::Index q = 0;
  for (const auto& x : mesh.interior_points()) out.segment((q++) * ncomp, ncomp) = fn(x);
  return out;
}

/// Discrete L2(O) norm with trapezoid weights over all box nodes.
inline double l2_norm(const Mesh& mesh, const GridFunction& f) {
  double acc = 0.0;
  for (int i = 0; i < mesh.nodes(0); ++i) {
    const double wi = (i == 0 || i == mesh.nodes(0) - 1) ? 0.5 : 1.0;
    for (int j = 0; j < mesh.nodes(1); ++j) {
      double w = wi;
      if (mesh.dim == 2 && (j == 0 || j == mesh.nodes(1) - 1)) w *= 0.5;
      acc += w * f.values.col(mesh.node_index(i, j)).squaredNorm();
    }
  }
  return std::sqrt(acc * mesh.volume_element());
}

/// L2 norm of an interior vector (zero boundary values).
inline double l2_norm(const Mesh& mesh, const Eigen::VectorXcd& interior) {
  return std::sqrt(mesh.volume_element()) * interior.norm();
}

/// ||Du||_{L2(O)} by forward differences along every grid edge.
inline double gradient_norm(const Mesh& mesh, const GridFunction& f) {
  double acc = 0.0;
  for (int axis = 0; axis < mesh.dim; ++axis) {
    const double hk = mesh.h[axis];
    for (int i = 0; i < mesh.nodes(0); ++i) {
      for (int j = 0; j < mesh.nodes(1); ++j) {
        const int i1 = axis == 0 ? i + 1 : i;
        const int j1 = axis == 1 ? j + 1 : j;
        if (i1 >= mesh.nodes(0) || j1 >= mesh.nodes(1)) continue;
        // Trapezoid weight in the transverse direction.
        double w = 1.0;
        if (mesh.dim == 2) {
          const int t = axis == 0 ? j : i;
          const int tn = axis == 0 ? mesh.nodes(1) : mesh.nodes(0);
          if (t == 0 || t == tn - 1) w = 0.5;
        }
        const Eigen::VectorXcd diff =
            (f.values.col(mesh.node_index(i1, j1)) - f.values.col(mesh.node_index(i, j))) / hk;
        acc += w * diff.squaredNorm();
      }
    }
  }
  return std::sqrt(acc * mesh.volume_element());
}

inline double h1_norm(const Mesh& mesh, const GridFunction& f) {
  const double a = l2_norm(mesh, f);
  const double b = gradient_norm(mesh, f);
  return std::sqrt(a * a + b * b);
}

inline GridFunction difference(const GridFunction& a, const GridFunction& b) {
  GridFunction out = a;
  out.values = a.values - b.values;
  return out;
}

/// L2 norm of a cell-centred field (ncomp x cells) by the midpoint rule.
inline double cell_l2_norm(const Mesh& mesh, const Eigen::MatrixXcd& cellwise) {
  return std::sqrt(cellwise.squaredNorm() * mesh.volume_element());
}

}  // namespace oscillat
