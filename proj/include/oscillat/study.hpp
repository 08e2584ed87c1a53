#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oscillat/cell.hpp"
#include "oscillat/coefficients.hpp"
#include "oscillat/config.hpp"
#include "oscillat/dirichlet.hpp"
#include "oscillat/evolution.hpp"
#include "oscillat/lattice.hpp"
#include "oscillat/mesh.hpp"
#include "oscillat/rates.hpp"

namespace oscillat {

struct SweepConfig {
  std::string fixture = "sine1d";
  CatalogParams params;
  std::string samples_file;               // overrides the catalog g when set
  std::vector<std::vector<double>> basis;  // empty: unit lattice
  std::vector<double> box;                 // empty: unit box
  double h_over_eps = 1.0 / 16.0;
  std::vector<double> eps;  // empty: default grid for d
  std::vector<double> t = {0.5, 1.0, 2.0};
  bool smoothed = true;
  double zeta = -1.0;
  int samples = 5;
  std::uint64_t seed = 1;
  std::optional<double> lambda;  // empty: choose_lambda
  std::string phi = "sine";
  std::string psi = "poly";
  std::string forcing = "mixed";
  double forcing_dt = 0.01;
  std::string output = ".";

  static SweepConfig from_config(const Config& c) {
    SweepConfig s;
    s.fixture = c.get_string("coeff.catalog", s.fixture);
    for (const auto& [k, v] : c.section("coeff.params")) s.params[k] = Config::parse_number(v, "coeff.params." + k);
    if (c.has("coeff.N")) s.params["N"] = c.get_double("coeff.N", 0.0);
    s.samples_file = c.get_string("coeff.samples_file", "");
    s.basis = c.get_matrix("lattice.basis");
    s.box = c.get_list("domain.box");
    s.h_over_eps = c.get_double("mesh.h_over_eps", s.h_over_eps);
    s.smoothed = c.get_bool("corrector.smoothed", s.smoothed);
    s.eps = c.get_list("sweep.eps");
    s.t = c.get_list("sweep.t", s.t);
    s.zeta = c.get_double("sweep.zeta", s.zeta);
    s.samples = static_cast<int>(c.get_double("sweep.samples", s.samples));
    s.seed = static_cast<std::uint64_t>(c.get_double("sweep.seed", static_cast<double>(s.seed)));
    const std::string lam = c.get_string("sweep.lambda", "auto");
    if (lam != "auto") s.lambda = Config::parse_number(lam, "sweep.lambda");
    s.phi = c.get_string("data.phi", s.phi);
    s.psi = c.get_string("data.psi", s.psi);
    s.forcing = c.get_string("data.forcing", s.forcing);
    s.forcing_dt = c.get_double("data.forcing_dt", s.forcing_dt);
    s.output = c.get_string("sweep.output", s.output);
    return s;
  }
};

/// One estimate's (eps, error) series with its fit and verdict.
struct EstimateSeries {
  std::string tag;
  std::string norm;  // L2 or H1
  double t = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, double>> points;
  bool has_verdict = true;
  double threshold = 0.0;
  std::optional<RateFit> fit;
  std::string verdict;  // pass, fail, exact, reported, insufficient
  bool indicative = false;

  bool ok() const { return !has_verdict || verdict == "pass" || verdict == "exact"; }
  double max_error() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.second);
    return m;
  }
};

struct RateReport {
  std::string sweep;
  std::vector<EstimateSeries> estimates;
  std::vector<std::string> notes;
  double wall_time = 0.0;
  bool strict = true;  // false for d = 2 (verdicts indicative)

  bool passed() const {
    for (const auto& e : estimates)
      if (!e.indicative && !e.ok()) return false;
    return true;
  }
  const EstimateSeries* find(const std::string& tag) const {
    for (const auto& e : estimates)
      if (e.tag == tag) return &e;
    return nullptr;
  }
};

inline std::string format_t(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

/// Fits the series and sets the verdict.
inline void finalize(EstimateSeries& s, bool strict) {
  s.indicative = !strict;
  if (s.max_error() <= 1e-10) {
    s.verdict = "exact";
    return;
  }
  std::vector<std::pair<double, double>> nonzero;
  for (const auto& p : s.points)
    if (p.second > 0.0) nonzero.push_back(p);
  if (nonzero.size() >= 2) s.fit = fit_rate(nonzero);
  if (!s.has_verdict) {
    s.verdict = "reported";
  } else if (nonzero.size() < 4) {
    s.verdict = "insufficient";
  } else {
    s.verdict = s.fit->slope >= s.threshold ? "pass" : "fail";
  }
}

/// Everything shared by the sweeps: coefficients, cell solution, mesh, B_0.
struct Problem {
  SweepConfig cfg;
  CoefficientSet cs;
  CellSolution cell;
  Mesh mesh;
  ExtensionOperator ext;
  DiscreteDirichletOperator B0;
  AssemblyOptions assembly;
  bool strict = true;
};

inline CoefficientSet build_coefficients(const SweepConfig& cfg) {
  CoefficientSet cs;
  if (!cfg.samples_file.empty()) {
    const PeriodicField g = read_field_csv(cfg.samples_file);
    CatalogParams p = cfg.params;
    p["d"] = g.dim();
    p["N"] = g.resolution();
    cs = catalog("const", p);
    cs.name = cfg.samples_file;
    cs.g = g;
  } else {
    cs = catalog(cfg.fixture, cfg.params);
  }
  if (!cfg.basis.empty()) {
    // Catalog fields are defined in cell coordinates; only the geometry changes.
    const int d = static_cast<int>(cfg.basis.size());
    Eigen::MatrixXd A(d, d);
    for (int j = 0; j < d; ++j) {
      if (static_cast<int>(cfg.basis[static_cast<std::size_t>(j)].size()) != d)
        throw Error(ErrorKind::InvalidConfig, "lattice.basis must list d vectors of length d");
      for (int i = 0; i < d; ++i) A(i, j) = cfg.basis[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    cs.lattice = build_lattice(A);
  }
  cs.validate();
  return cs;
}

inline std::vector<double> default_eps(int d) {
  std::vector<double> out;
  const int lo = d == 1 ? 3 : 2;
  const int hi = d == 1 ? 7 : 5;
  for (int k = lo; k <= hi; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

inline Problem prepare(SweepConfig cfg) {
  Problem pb;
  pb.cs = build_coefficients(cfg);
  const int d = pb.cs.dim();
  if (cfg.box.empty()) cfg.box.assign(static_cast<std::size_t>(d), 1.0);
  if (static_cast<int>(cfg.box.size()) != d) throw Error(ErrorKind::InvalidConfig, "domain.box must have d entries");
  if (cfg.eps.empty()) cfg.eps = default_eps(d);
  std::sort(cfg.eps.begin(), cfg.eps.end(), std::greater<>());
  if (std::adjacent_find(cfg.eps.begin(), cfg.eps.end()) != cfg.eps.end())
    throw Error(ErrorKind::InvalidConfig, "eps values must be distinct");
  if (cfg.eps.size() < 4) throw Error(ErrorKind::InsufficientPoints, "rate fits need at least 4 eps values");
  const double min_side = *std::min_element(cfg.box.begin(), cfg.box.end());
  if (cfg.eps.front() > min_side / 4.0 * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidConfig, "eps must not exceed a quarter of the shortest box side");
  if (cfg.samples < 1) throw Error(ErrorKind::InvalidConfig, "sweep.samples must be positive");
  pb.cfg = cfg;
  pb.strict = d == 1;
  pb.assembly.h_over_eps = cfg.h_over_eps;
  pb.cell = solve_cell(pb.cs);
  pb.mesh = mesh_with_spacing(cfg.box, cfg.h_over_eps * cfg.eps.back());
  pb.ext = make_extension(pb.mesh, pb.cs.lattice, cfg.eps.front());
  pb.cs.lambda = cfg.lambda ? *cfg.lambda : choose_lambda(pb.mesh, pb.cs, pb.cell, cfg.eps, pb.assembly);
  pb.B0 = assemble_b0(pb.mesh, pb.cell, pb.cs);
  return pb;
}

/// Smooth data profiles on the box, the same value in every component.
inline Eigen::VectorXcd data_function(const Mesh& mesh, int n, const std::string& name) {
  const double pi = std::numbers::pi;
  std::function<double(const Eigen::VectorXd&)> f;
  if (name == "sine") {
    f = [&](const Eigen::VectorXd& x) {
      double v = 1.0;
      for (int k = 0; k < mesh.dim; ++k) v *= std::sin(pi * x[k] / mesh.L[k]);
      return v;
    };
  } else if (name == "poly") {
    f = [&](const Eigen::VectorXd& x) {
      double v = 1.0;
      for (int k = 0; k < mesh.dim; ++k) v *= 4.0 * x[k] * (mesh.L[k] - x[k]) / (mesh.L[k] * mesh.L[k]);
      return v;
    };
  } else if (name == "mixed") {
    f = [&](const Eigen::VectorXd& x) {
      double v = 1.0;
      for (int k = 0; k < mesh.dim; ++k) {
        const double s = x[k] / mesh.L[k];
        v *= std::sin(pi * s) + 0.5 * std::sin(2.0 * pi * s) + s * (1.0 - s);
      }
      return v;
    };
  } else if (name == "zero") {
    f = [](const Eigen::VectorXd&) { return 0.0; };
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown data profile '" + name + "' (sine, poly, mixed, zero)");
  }
  return interior_samples(mesh, n, [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXcd(Eigen::VectorXcd::Constant(n, f(x)));
  });
}

/// Seeded random sine series with the first 8 modes per axis, unit L2 norm.
inline Eigen::VectorXcd random_sine_series(const Mesh& mesh, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int K = 8;
  const int K2 = mesh.dim == 2 ? K : 1;
  std::vector<double> coef(static_cast<std::size_t>(n * K * K2));
  for (auto& c : coef) c = unif(rng);
  const double pi = std::numbers::pi;
  Eigen::VectorXcd f = interior_samples(mesh, n, [&](const Eigen::VectorXd& x) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    for (int c = 0; c < n; ++c)
      for (int k = 1; k <= K; ++k)
        for (int l = 1; l <= K2; ++l) {
          double basis = std::sin(k * pi * x[0] / mesh.L[0]);
          if (mesh.dim == 2) basis *= std::sin(l * pi * x[1] / mesh.L[1]);
          v[c] += coef[static_cast<std::size_t>((c * K + (k - 1)) * K2 + (l - 1))] * basis;
        }
    return v;
  });
  return f / l2_norm(mesh, f);
}

/// (B_0)^{-2} applied through two sparse solves.
inline Eigen::VectorXcd apply_b0_inverse_squared(const Resolvent& R0, const Eigen::VectorXcd& f) {
  return R0.solve(R0.solve(f));
}

struct HyperbolicData {
  Eigen::VectorXcd phi;
  Eigen::VectorXcd psi;
  TimeSamples F;
};

/// phi = B0^{-2} f_phi, psi = B0^{-2} f_psi, F(t) = B0^{-2} f_F cos t.
inline HyperbolicData hyperbolic_data(const Problem& pb) {
  const int n = pb.cs.symbol.n;
  const Resolvent R0(pb.B0, 0.0);
  HyperbolicData data;
  data.phi = apply_b0_inverse_squared(R0, data_function(pb.mesh, n, pb.cfg.phi));
  data.psi = apply_b0_inverse_squared(R0, data_function(pb.mesh, n, pb.cfg.psi));
  const Eigen::VectorXcd fF = apply_b0_inverse_squared(R0, data_function(pb.mesh, n, pb.cfg.forcing));
  double t_max = 0.0;
  for (double t : pb.cfg.t) t_max = std::max(t_max, std::abs(t));
  data.F = sample_forcing([&](double s) { return Eigen::VectorXcd(fF * std::cos(s)); }, std::max(t_max, pb.cfg.forcing_dt),
                          pb.cfg.forcing_dt);
  return data;
}

namespace detail {

inline double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline EstimateSeries& series(RateReport& rep, const std::string& tag, const std::string& norm, double t,
                              bool verdict, double threshold) {
  for (auto& e : rep.estimates)
    if (e.tag == tag) return e;
  EstimateSeries s;
  s.tag = tag;
  s.norm = norm;
  s.t = t;
  s.has_verdict = verdict;
  s.threshold = threshold;
  rep.estimates.push_back(s);
  return rep.estimates.back();
}

}  // namespace detail

/// The same path with phi = 0, by linearity: u - cos(t A^{1/2}) phi.
inline EvolutionResult without_phi(const EvolutionResult& full, const EigenBasis& eb, const Eigen::VectorXcd& phi,
                                   const std::vector<double>& t_list) {
  EvolutionResult out;
  out.times = full.times;
  for (std::size_t k = 0; k < t_list.size(); ++k) out.u.push_back(full.u[k] - op_cosine(eb, t_list[k], phi));
  return out;
}

/// Hyperbolic solution errors: |u_eps - u_0|_L2 (full data), and with phi = 0
/// |u_eps - v_eps|_H1 and the flux error.
inline RateReport convergence_sweep(const Problem& pb) {
  const auto start = std::chrono::steady_clock::now();
  RateReport rep;
  rep.sweep = "sweep";
  rep.strict = pb.strict;
  const auto& cfg = pb.cfg;
  for (double t : cfg.t)
    if (t < 0.0) throw Error(ErrorKind::InvalidConfig, "sweep.t must be nonnegative");
  const int n = pb.cs.symbol.n;
  const HyperbolicData data = hyperbolic_data(pb);
  const EigenBasis eb0 = spectral_decompose(pb.B0);
  const EvolutionResult u0 = solve_ibvp(eb0, data.phi, data.psi, data.F, cfg.t);
  const EvolutionResult u0_nophi = without_phi(u0, eb0, data.phi, cfg.t);
  std::vector<std::vector<GridFunction>> v_by_eps;
  for (double eps : cfg.eps) {
    const DiscreteDirichletOperator B = assemble_b_eps(pb.mesh, pb.cs, eps, pb.assembly);
    const EigenBasis eb = spectral_decompose(B);
    const EvolutionResult ue = solve_ibvp(eb, data.phi, data.psi, data.F, cfg.t);
    const EvolutionResult ue_nophi = without_phi(ue, eb, data.phi, cfg.t);
    const auto v = first_order_approx(u0_nophi, pb.cell, eps, pb.cs, pb.mesh, pb.ext, cfg.smoothed);
    for (std::size_t k = 0; k < cfg.t.size(); ++k) {
      const std::string ts = format_t(cfg.t[k]);
      const double l2 = l2_norm(pb.mesh, Eigen::VectorXcd(ue.u[k] - u0.u[k]));
      detail::series(rep, "sol-L2@t=" + ts, "L2", cfg.t[k], true, 0.9).points.emplace_back(eps, l2);
      const double h1 = h1_norm(pb.mesh, difference(embed(pb.mesh, ue_nophi.u[k], n), v[k]));
      detail::series(rep, "sol-H1-corr@t=" + ts, "H1", cfg.t[k], true, 0.45).points.emplace_back(eps, h1);
      const Eigen::MatrixXcd p = flux(ue_nophi.u[k], pb.cs, eps, pb.mesh);
      const Eigen::MatrixXcd pa = flux_approx(u0_nophi.u[k], pb.cell, eps, pb.cs, pb.mesh, pb.ext, cfg.smoothed);
      detail::series(rep, "flux@t=" + ts, "L2", cfg.t[k], true, 0.45)
          .points.emplace_back(eps, cell_l2_norm(pb.mesh, Eigen::MatrixXcd(p - pa)));
    }
  }
  for (auto& e : rep.estimates) finalize(e, rep.strict);
  if (!cfg.smoothed) rep.notes.push_back("corrector without Steklov smoothing");
  rep.wall_time = detail::elapsed(start);
  return rep;
}

/// Resolvent errors at zeta over seeded normalized f (max over samples):
/// L2, H1 with corrector, and the square root B^{-1/2}.
inline RateReport resolvent_sweep(const Problem& pb) {
  const auto start = std::chrono::steady_clock::now();
  RateReport rep;
  rep.sweep = "resolvent-sweep";
  rep.strict = pb.strict;
  const auto& cfg = pb.cfg;
  if (cfg.zeta > 0.0) throw Error(ErrorKind::InvalidConfig, "sweep.zeta must be real and <= 0");
  const int n = pb.cs.symbol.n;
  std::vector<Eigen::VectorXcd> fs;
  for (int s = 0; s < cfg.samples; ++s) fs.push_back(random_sine_series(pb.mesh, n, cfg.seed + static_cast<std::uint64_t>(s)));
  const Resolvent R0(pb.B0, cfg.zeta);
  std::vector<Eigen::VectorXcd> u0, u0_sqrt;
  std::vector<GridFunction> u0_ext;
  for (const auto& f : fs) {
    u0.push_back(R0.solve(f));
    u0_ext.push_back(extend(embed(pb.mesh, u0.back(), n), pb.ext));
  }
  const bool with_sqrt = pb.B0.size() <= kMaxDenseEigen;
  if (with_sqrt) {
    const EigenBasis eb0 = spectral_decompose(pb.B0);
    for (const auto& f : fs) u0_sqrt.push_back(eb0.apply([](double mu) { return 1.0 / std::sqrt(mu); }, f));
  } else {
    rep.notes.push_back("square-root estimate skipped: operator too large for the dense eigensolver");
  }
  for (double eps : cfg.eps) {
    const DiscreteDirichletOperator B = assemble_b_eps(pb.mesh, pb.cs, eps, pb.assembly);
    const Resolvent R(B, cfg.zeta);
    double l2 = 0.0, h1 = 0.0, sq = 0.0;
    std::optional<EigenBasis> eb;
    if (with_sqrt) eb = spectral_decompose(B);
    for (std::size_t s = 0; s < fs.size(); ++s) {
      const Eigen::VectorXcd ue = R.solve(fs[s]);
      l2 = std::max(l2, l2_norm(pb.mesh, Eigen::VectorXcd(ue - u0[s])));
      GridFunction v = embed(pb.mesh, u0[s], n);
      v.values += eps * corrector_apply(pb.cell, eps, pb.cs.symbol, pb.cs.lattice, u0_ext[s], pb.mesh, cfg.smoothed).values;
      h1 = std::max(h1, h1_norm(pb.mesh, difference(embed(pb.mesh, ue, n), v)));
      if (eb) {
        const Eigen::VectorXcd r = eb->apply([](double mu) { return 1.0 / std::sqrt(mu); }, fs[s]);
        sq = std::max(sq, l2_norm(pb.mesh, Eigen::VectorXcd(r - u0_sqrt[s])));
      }
    }
    detail::series(rep, "resolvent-L2", "L2", std::numeric_limits<double>::quiet_NaN(), true, 0.9).points.emplace_back(eps, l2);
    detail::series(rep, "resolvent-H1-corr", "H1", std::numeric_limits<double>::quiet_NaN(), true, 0.45)
        .points.emplace_back(eps, h1);
    if (eb) detail::series(rep, "sqrt-L2", "L2", std::numeric_limits<double>::quiet_NaN(), true, 0.45).points.emplace_back(eps, sq);
  }
  for (auto& e : rep.estimates) finalize(e, rep.strict);
  rep.wall_time = detail::elapsed(start);
  return rep;
}

/// H1 error of cos(t B^{1/2}) B^{-1} B0^{-1} f against the effective
/// analogue plus corrector (verdict), and of the plain cosine (no verdict).
inline RateReport cosine_corrector_sweep(const Problem& pb) {
  const auto start = std::chrono::steady_clock::now();
  RateReport rep;
  rep.sweep = "cos-sweep";
  rep.strict = pb.strict;
  const auto& cfg = pb.cfg;
  for (double t : cfg.t)
    if (t == 0.0) throw Error(ErrorKind::InvalidConfig, "the cosine corrector sweep needs t != 0");
  const int n = pb.cs.symbol.n;
  std::vector<Eigen::VectorXcd> fs;
  for (int s = 0; s < cfg.samples; ++s) fs.push_back(random_sine_series(pb.mesh, n, cfg.seed + static_cast<std::uint64_t>(s)));
  const EigenBasis eb0 = spectral_decompose(pb.B0);
  // g = B0^{-1} f; targets y0 = cos(t B0^{1/2}) B0^{-1} g and c0 = cos(t B0^{1/2}) f.
  std::vector<Eigen::VectorXcd> gs;
  std::vector<std::vector<Eigen::VectorXcd>> y0(cfg.t.size()), c0(cfg.t.size());
  std::vector<std::vector<GridFunction>> y0_ext(cfg.t.size()), c0_ext(cfg.t.size());
  for (const auto& f : fs) gs.push_back(eb0.apply([](double mu) { return 1.0 / mu; }, f));
  for (std::size_t k = 0; k < cfg.t.size(); ++k) {
    const double t = cfg.t[k];
    for (std::size_t s = 0; s < fs.size(); ++s) {
      y0[k].push_back(eb0.apply([t](double mu) { return std::cos(t * std::sqrt(mu)) / mu; }, gs[s]));
      c0[k].push_back(op_cosine(eb0, t, fs[s]));
      y0_ext[k].push_back(extend(embed(pb.mesh, y0[k].back(), n), pb.ext));
      c0_ext[k].push_back(extend(embed(pb.mesh, c0[k].back(), n), pb.ext));
    }
  }
  for (double eps : cfg.eps) {
    const DiscreteDirichletOperator B = assemble_b_eps(pb.mesh, pb.cs, eps, pb.assembly);
    const EigenBasis eb = spectral_decompose(B);
    for (std::size_t k = 0; k < cfg.t.size(); ++k) {
      const double t = cfg.t[k];
      double corr = 0.0, plain = 0.0;
      for (std::size_t s = 0; s < fs.size(); ++s) {
        const Eigen::VectorXcd ye = eb.apply([t](double mu) { return std::cos(t * std::sqrt(mu)) / mu; }, gs[s]);
        GridFunction v = embed(pb.mesh, y0[k][s], n);
        v.values += eps * corrector_apply(pb.cell, eps, pb.cs.symbol, pb.cs.lattice, y0_ext[k][s], pb.mesh, cfg.smoothed).values;
        corr = std::max(corr, h1_norm(pb.mesh, difference(embed(pb.mesh, ye, n), v)));
        const Eigen::VectorXcd ce = op_cosine(eb, t, fs[s]);
        GridFunction w = embed(pb.mesh, c0[k][s], n);
        w.values += eps * corrector_apply(pb.cell, eps, pb.cs.symbol, pb.cs.lattice, c0_ext[k][s], pb.mesh, cfg.smoothed).values;
        plain = std::max(plain, h1_norm(pb.mesh, difference(embed(pb.mesh, ce, n), w)));
      }
      const std::string ts = format_t(t);
      detail::series(rep, "cos-corr-H1@t=" + ts, "H1", t, true, 0.45).points.emplace_back(eps, corr);
      detail::series(rep, "cos-plain-H1@t=" + ts, "H1", t, false, 0.0).points.emplace_back(eps, plain);
    }
  }
  for (auto& e : rep.estimates) finalize(e, rep.strict);
  rep.wall_time = detail::elapsed(start);
  return rep;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_rates_csv(const std::vector<RateReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "estimate,eps,t,error,norm\n";
  for (const auto& rep : reports)
    for (const auto& e : rep.estimates)
      for (const auto& [eps, err] : e.points)
        out << e.tag << ',' << format_double(eps) << ',' << format_double(e.t) << ',' << format_double(err) << ','
            << e.norm << '\n';
}

inline std::string report_text(const std::vector<RateReport>& reports) {
  std::ostringstream out;
  for (const auto& rep : reports) {
    for (const auto& e : rep.estimates) {
      std::string verdict = e.verdict;
      if (e.indicative && e.has_verdict) verdict += "(indicative)";
      out << e.tag << ' ' << (e.fit ? format_double(e.fit->slope) : "nan") << ' '
          << (e.fit ? format_double(e.fit->intercept) : "nan") << ' ' << verdict << '\n';
    }
  }
  return out.str();
}

inline void write_report_txt(const std::vector<RateReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << report_text(reports);
}

}  // namespace oscillat
