#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "oscillat/coefficients.hpp"

using namespace oscillat;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd col2(double a, double b) {
  Eigen::MatrixXcd m(2, 1);
  m << a, b;
  return m;
}

Eigen::MatrixXcd scalar(double v) { return Eigen::MatrixXcd::Constant(1, 1, v); }

}  // namespace

TEST(SymbolBounds, ScalarGradient) {
  const auto [lo, hi] = symbol_bounds({scalar(1.0)});
  EXPECT_NEAR(lo, 1.0, 1e-14);
  EXPECT_NEAR(hi, 1.0, 1e-14);
}

TEST(SymbolBounds, PlanarGradient) {
  const auto [lo, hi] = symbol_bounds({col2(1, 0), col2(0, 1)});
  EXPECT_NEAR(lo, 1.0, 1e-12);
  EXPECT_NEAR(hi, 1.0, 1e-12);
}

TEST(SymbolBounds, WeightedGradientMatchesAngleSweep) {
  const auto [lo, hi] = symbol_bounds({col2(1, 0), col2(0, 2)});
  // Oracle: b(theta)^* b(theta) = cos^2 + 4 sin^2 over a finer sweep.
  double olo = INFINITY, ohi = 0.0;
  for (int k = 0; k < 7200; ++k) {
    const double t = 2 * kPi * k / 7200;
    const double v = std::cos(t) * std::cos(t) + 4 * std::sin(t) * std::sin(t);
    olo = std::min(olo, v);
    ohi = std::max(ohi, v);
  }
  EXPECT_NEAR(lo, olo, 1e-9);
  EXPECT_NEAR(hi, ohi, 1e-9);
  EXPECT_NEAR(lo, 1.0, 1e-9);
  EXPECT_NEAR(hi, 4.0, 1e-9);
}

TEST(SymbolBounds, RankDeficientRejected) {
  try {
    symbol_bounds({col2(1, 0), col2(-1, 0)});
    FAIL() << "expected RankDeficientSymbol";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficientSymbol);
  }
}

TEST(EvalScaled, ConstantField) {
  const Lattice lat = unit_lattice(2);
  Eigen::MatrixXcd c(2, 2);
  c << 3.0, cplx(0.5, 1.0), cplx(0.5, -1.0), 2.0;
  const auto f = PeriodicField::constant(2, 8, c);
  std::vector<Eigen::VectorXd> pts;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 10; ++k) pts.push_back(Eigen::Vector2d(u(rng), u(rng)));
  for (double eps : {1.0, 0.3, 1e-3})
    for (const auto& v : eval_scaled(f, lat, eps, pts)) EXPECT_LE((v - c).norm(), 1e-12);
}

TEST(EvalScaled, SineAtGridAlignedPoint) {
  const auto cs = catalog("sine1d", {{"N", 64}});
  const auto v = eval_scaled(cs.g, cs.lattice, 0.25, {Eigen::VectorXd::Constant(1, 0.125)});
  EXPECT_NEAR(v[0](0, 0).real(), 2.0, 1e-12);
  EXPECT_NEAR(v[0](0, 0).imag(), 0.0, 1e-14);
}

TEST(EvalScaled, SineOffGrid) {
  for (int N : {64, 128}) {
    const auto cs = catalog("sine1d", {{"N", N}});
    const auto v = eval_scaled(cs.g, cs.lattice, 0.3, {Eigen::VectorXd::Constant(1, 0.2)});
    EXPECT_NEAR(v[0](0, 0).real(), 2.0 + std::sin(4 * kPi / 3), 1e-10);
  }
}

TEST(EvalScaled, CheckerboardMatchesClosedForm) {
  const auto cs = catalog("checkerboard-smooth", {{"N", 16}});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < 20; ++k) pts.push_back(Eigen::Vector2d(u(rng), u(rng)));
  const double eps = 0.37;
  const auto vals = eval_scaled(cs.g, cs.lattice, eps, pts);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Eigen::VectorXd y = pts[k] / eps;
    const double expect = 2.0 + std::sin(2 * kPi * y[0]) * std::sin(2 * kPi * y[1]);
    EXPECT_LE((vals[k] - expect * Eigen::MatrixXcd::Identity(2, 2)).norm(), 1e-10);
  }
}

TEST(EvalScaled, HermitianFieldStaysHermitian) {
  const Lattice lat = unit_lattice(1);
  // Non-band-limited Hermitian field, so the Nyquist mode is populated.
  const auto f = PeriodicField::from_function(lat, 16, 2, 2, [](const Eigen::VectorXd& x) {
    Eigen::MatrixXcd m(2, 2);
    const double s = std::exp(std::sin(2 * kPi * x[0]));
    m << 2.0 + s, cplx(0.3 * s, 0.2 * std::cos(6 * kPi * x[0])), cplx(0.3 * s, -0.2 * std::cos(6 * kPi * x[0])), 3.0;
    return m;
  });
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < 50; ++k) pts.push_back(Eigen::VectorXd::Constant(1, 0.0137 * k));
  for (const auto& v : eval_scaled(f, lat, 0.7, pts)) EXPECT_LE((v - v.adjoint()).norm(), 1e-10);
}

TEST(EvalScaled, RejectsNonPositiveEps) {
  const auto cs = catalog("const", {{"N", 8}});
  EXPECT_THROW(eval_scaled(cs.g, cs.lattice, 0.0, {Eigen::VectorXd::Zero(1)}), Error);
}

TEST(Catalog, ConstEntry) {
  const auto cs = catalog("const", {{"g", 3}, {"d", 1}, {"N", 8}});
  EXPECT_EQ(cs.dim(), 1);
  for (Eigen::Index k = 0; k < cs.g.size(); ++k) EXPECT_EQ(cs.g.at(k)(0, 0), cplx(3.0));
  EXPECT_FALSE(cs.has_first_order());
  EXPECT_FALSE(cs.has_potential());
  EXPECT_DOUBLE_EQ(cs.c_a(), 0.0);
}

TEST(Catalog, SineEntrySamples) {
  const auto cs = catalog("sine1d", {{"base", 2}, {"amp", 1}, {"N", 32}});
  for (Eigen::Index k = 0; k < cs.g.size(); ++k) {
    const double x = static_cast<double>(k) / 32;
    EXPECT_NEAR(cs.g.at(k)(0, 0).real(), 2.0 + std::sin(2 * kPi * x), 1e-14);
  }
}

TEST(Catalog, LaminateIsScalarTimesIdentity) {
  const auto cs = catalog("laminate2d", {{"N", 16}});
  EXPECT_EQ(cs.g.rows(), 2);
  for (Eigen::Index k = 0; k < cs.g.size(); ++k) {
    const Eigen::MatrixXcd v = cs.g.at(k);
    EXPECT_EQ(v(0, 1), cplx(0.0));
    EXPECT_EQ(v(1, 0), cplx(0.0));
    EXPECT_EQ(v(0, 0), v(1, 1));
  }
  // Depends on x_1 only: samples equal along the second grid axis.
  const auto c = cs.g.component(0, 0);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      EXPECT_NEAR(c[i * 16 + j].real(), 2.0 + std::sin(2 * kPi * i / 16.0), 1e-14);
    }
}

TEST(Catalog, RandomIsSeededAndPositive) {
  const auto a = catalog("random-bandlimited", {{"seed", 5}, {"N", 16}});
  const auto b = catalog("random-bandlimited", {{"seed", 5}, {"N", 16}});
  const auto c = catalog("random-bandlimited", {{"seed", 6}, {"N", 16}});
  EXPECT_EQ(a.g.raw(), b.g.raw());
  EXPECT_GT((a.g.raw() - c.g.raw()).norm(), 1e-3);
  EXPECT_GE(a.g.min_eigenvalue(), 1.0 - 1e-12);  // base 2, sum |c_k| = 1
}

TEST(Catalog, LowerOrderTerms) {
  const auto cs = catalog("sine1d", {{"N", 32}, {"a_amp", 0.1}, {"q", -0.5}, {"lambda", 2}});
  ASSERT_EQ(cs.a.size(), 1u);
  EXPECT_TRUE(cs.has_first_order());
  EXPECT_TRUE(cs.has_potential());
  EXPECT_DOUBLE_EQ(cs.lambda, 2.0);
  // C_a^2 = int_0^1 0.01 sin^2 = 0.005.
  EXPECT_NEAR(cs.c_a(), std::sqrt(0.005), 1e-12);
}

TEST(Catalog, UnknownEntry) {
  try {
    catalog("nope");
    FAIL() << "expected UnknownCatalogEntry";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownCatalogEntry);
  }
}

TEST(Catalog, NonPositiveFieldRejected) {
  EXPECT_THROW(catalog("sine1d", {{"base", 1.0}, {"amp", 1.5}, {"N", 16}}), Error);
}

TEST(Coefficients, NormProductAtLeastOne) {
  for (const char* name : {"sine1d", "laminate2d", "checkerboard-smooth", "random-bandlimited"}) {
    const auto cs = catalog(name, {{"N", 16}});
    EXPECT_GE(cs.g.norm_inf() * cs.g_inverse_norm_inf(), 1.0 - 1e-14) << name;
  }
}

TEST(Coefficients, MeansOfSine) {
  const auto cs = catalog("sine1d", {{"N", 128}});
  EXPECT_NEAR(cs.g.mean()(0, 0).real(), 2.0, 1e-13);
  // Harmonic mean of 2 + sin is sqrt(3); the trapezoid rule is spectrally accurate.
  EXPECT_NEAR(cs.g.harmonic_mean()(0, 0).real(), std::sqrt(3.0), 1e-12);
}

TEST(Coefficients, SamplesFileRoundTrip) {
  const std::string path = ::testing::TempDir() + "oscillat_field.csv";
  {
    std::ofstream out(path);
    out << "rows,cols,dim,N\n1,1,1,8\n";
    for (int k = 0; k < 8; ++k) out << 2.0 + 0.5 * std::cos(2 * kPi * k / 8) << "\n";
  }
  const auto f = read_field_csv(path);
  EXPECT_EQ(f.resolution(), 8);
  EXPECT_NEAR(f.at(2)(0, 0).real(), 2.0, 1e-12);
  EXPECT_NEAR(f.mean()(0, 0).real(), 2.0, 1e-12);
  std::remove(path.c_str());
}
