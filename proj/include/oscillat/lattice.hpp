#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "oscillat/error.hpp"

namespace oscillat {

/// Bravais lattice with its elementary cell and dual lattice.
///
/// Columns of `basis` are the generators a_1..a_d; columns of `dual_basis`
/// are b_1..b_d with <b_j, a_i> = 2*pi*delta_ji. The cell is the open
/// parallelepiped { sum tau_j a_j : -1/2 < tau_j < 1/2 }.
struct Lattice {
  int dim = 0;
  Eigen::MatrixXd basis;
  Eigen::MatrixXd dual_basis;
  double cell_volume = 0.0;
  double r1 = 0.0;  // half the cell diameter
  double r0 = 0.0;  // half the shortest nonzero dual vector

  /// Cell (fractional) coordinates of a point: tau = A^{-1} x.
  Eigen::VectorXd to_cell_coords(const Eigen::VectorXd& x) const {
    return dual_basis.transpose() * x / (2.0 * std::numbers::pi);
  }

  Eigen::VectorXd from_cell_coords(const Eigen::VectorXd& tau) const { return basis * tau; }
};

namespace detail {

// Enumerates integer vectors in [-radius, radius]^dim, row-major.
template <class Fn>
void for_each_integer_vector(int dim, int lo, int hi, Fn&& fn) {
  std::vector<int> nu(dim, lo);
  while (true) {
    fn(nu);
    int k = dim - 1;
    while (k >= 0 && nu[k] == hi) {
      nu[k] = lo;
      --k;
    }
    if (k < 0) return;
    ++nu[k];
  }
}

}  // namespace detail

inline Lattice build_lattice(const Eigen::MatrixXd& basis) {
  const int d = static_cast<int>(basis.rows());
  if (d < 1 || basis.cols() != d) {
    throw Error(ErrorKind::DegenerateBasis, "basis must be d vectors in R^d");
  }
  double norm_product = 1.0;
  for (int j = 0; j < d; ++j) norm_product *= basis.col(j).norm();
  const double det = basis.determinant();
  if (!(std::abs(det) > 1e-12 * norm_product)) {
    throw Error(ErrorKind::DegenerateBasis, "basis vectors are linearly dependent");
  }

  Lattice lat;
  lat.dim = d;
  lat.basis = basis;
  lat.dual_basis = 2.0 * std::numbers::pi * basis.inverse().transpose();
  lat.cell_volume = std::abs(det);

  // Diameter of the parallelepiped: largest |sum sigma_j a_j| over sign vectors.
  double diam = 0.0;
  for (int mask = 0; mask < (1 << d); ++mask) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < d; ++j) v += ((mask >> j) & 1 ? 1.0 : -1.0) * basis.col(j);
    diam = std::max(diam, v.norm());
  }
  lat.r1 = 0.5 * diam;

  // Shortest nonzero dual vector, searched over |nu_j| <= 3.
  double shortest = std::numeric_limits<double>::infinity();
  detail::for_each_integer_vector(d, -3, 3, [&](const std::vector<int>& nu) {
    bool zero = true;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < d; ++j) {
      if (nu[j] != 0) zero = false;
      v += nu[j] * lat.dual_basis.col(j);
    }
    if (!zero) shortest = std::min(shortest, v.norm());
  });
  lat.r0 = 0.5 * shortest;
  return lat;
}

inline Lattice unit_lattice(int d) { return build_lattice(Eigen::MatrixXd::Identity(d, d)); }

/// Dual-lattice points sum nu_j b_j with nu_j in [-N/2, N/2), row-major in nu.
inline std::vector<Eigen::VectorXd> frequencies(const Lattice& lat, int N) {
  if (N < 2) throw Error(ErrorKind::OddResolution, "resolution must be at least 2");
  if (N % 2 != 0) throw Error(ErrorKind::OddResolution, "resolution must be even");
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(std::pow(N, lat.dim)));
  detail::for_each_integer_vector(lat.dim, -N / 2, N / 2 - 1, [&](const std::vector<int>& nu) {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(lat.dim);
    for (int j = 0; j < lat.dim; ++j) xi += nu[j] * lat.dual_basis.col(j);
    out.push_back(std::move(xi));
  });
  return out;
}

}  // namespace oscillat
