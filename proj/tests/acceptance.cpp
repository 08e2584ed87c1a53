// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oscillat/oscillat.hpp"

using namespace oscillat;

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " |" << o.detail.str() << std::endl;
  if (!o.pass) ++failures;
}

template <class Fn>
void criterion(int id, const std::string& title, Fn&& fn) {
  Outcome o;
  try {
    fn(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  report(id, title, o);
}

SweepConfig load(const std::string& name) {
  return SweepConfig::from_config(Config::load(std::string(OSCILLAT_CONFIG_DIR) + "/" + name));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void summarize(Outcome& o, const RateReport& rep) {
  for (const auto& e : rep.estimates) {
    o.detail << ' ' << e.tag << '=' << (e.fit ? e.fit->slope : std::nan("")) << '(' << e.verdict << ')';
  }
  o.detail << " time=" << rep.wall_time << "s";
}

void require_series(Outcome& o, const RateReport& rep, const std::string& prefix) {
  int seen = 0;
  for (const auto& e : rep.estimates) {
    if (e.tag.rfind(prefix, 0) != 0) continue;
    ++seen;
    o.require(e.fit.has_value() && e.verdict == "pass", e.tag + " slope below " + std::to_string(e.threshold));
  }
  o.require(seen > 0, "no series " + prefix);
}

// Band-limited periodic function on [0, 1) with analytic derivative norm.
struct BandLimited {
  std::vector<std::pair<int, cplx>> modes;

  cplx operator()(double x) const {
    cplx v = 0.0;
    for (const auto& [k, c] : modes) v += c * std::exp(cplx(0.0, 2 * kPi * k * x));
    return v;
  }
  double derivative_norm() const {
    double s = 0.0;
    for (const auto& [k, c] : modes) s += std::norm(2 * kPi * k * c);
    return std::sqrt(s);
  }
};

GridFunction periodic_samples(int N, const BandLimited& f) {
  GridFunction u;
  u.dim = 1;
  u.ncomp = 1;
  u.count = {N, 1};
  u.h = {1.0 / N, 1.0};
  u.periodic = true;
  u.values.resize(1, N);
  for (int i = 0; i < N; ++i) u.values(0, i) = f(static_cast<double>(i) / N);
  return u;
}

std::vector<RateReport> full_suite(const SweepConfig& cfg) {
  const Problem pb = prepare(cfg);
  return {resolvent_sweep(pb), convergence_sweep(pb), cosine_corrector_sweep(pb)};
}

}  // namespace

int main() {
  // 1. Effective coefficient of 2 + sin(2 pi x) in d = 1.
  criterion(1, "effective coefficient exactness (d=1)", [](Outcome& o) {
    const auto t0 = Clock::now();
    const CoefficientSet cs = catalog("sine1d", {{"N", 256}});
    const CellSolution cell = solve_cell(cs);
    const double elapsed = seconds_since(t0);
    const double g0_err = std::abs(cell.g0(0, 0) - std::sqrt(3.0));
    double flux_err = 0.0;
    for (Eigen::Index k = 0; k < cs.g.size(); ++k) {
      const cplx expect = std::sqrt(3.0) / cs.g.at(k)(0, 0).real() - 1.0;
      flux_err = std::max(flux_err, std::abs(cell.bLambda.at(k)(0, 0) - expect));
    }
    o.detail << " |g0-sqrt3|=" << g0_err << " max|Lambda'-(g0/g-1)|=" << flux_err << " time=" << elapsed << "s";
    o.require(g0_err <= 1e-8, "g0");
    o.require(flux_err <= 1e-8, "Lambda'");
    o.require(elapsed < 1.0, "runtime");
  });

  // 2. Voigt-Reuss bracketing on seeded random fields.
  criterion(2, "Voigt-Reuss bracketing on 20 seeded fields per family", [](Outcome& o) {
    double worst_lower = INFINITY, worst_upper = INFINITY, worst_gap = 0.0;
    for (int seed = 1; seed <= 20; ++seed) {
      for (int d : {1, 2}) {
        const CoefficientSet cs = catalog("random-bandlimited", {{"d", d}, {"seed", seed}, {"N", d == 1 ? 64 : 32}});
        const CellSolution cell = solve_cell(cs);
        const VoigtReussReport vr = voigt_reuss(cs.g, cell.g0);
        const double scale = cs.g.norm_inf();
        worst_lower = std::min(worst_lower, vr.lower_margin / scale);
        worst_upper = std::min(worst_upper, vr.upper_margin / scale);
        o.require(vr.lower_margin >= -1e-9 * scale, "lower bound seed " + std::to_string(seed));
        o.require(vr.upper_margin >= -1e-9 * scale, "upper bound seed " + std::to_string(seed));
        if (cs.symbol.m == cs.symbol.n) {
          worst_gap = std::max(worst_gap, vr.equality_gap / scale);
          o.require(vr.equality_gap <= 1e-8 * scale, "m=n equality seed " + std::to_string(seed));
        }
      }
    }
    o.detail << " min lower margin/|g|=" << worst_lower << " min upper margin/|g|=" << worst_upper
             << " max m=n gap/|g|=" << worst_gap;
  });

  // 3. Constant coefficients: vanishing correctors and round-off sweep errors.
  criterion(3, "zero-corrector consistency", [](Outcome& o) {
    const SweepConfig cfg = load("const1d.cfg");
    const Problem pb = prepare(cfg);
    const double lam = pb.cell.Lambda.raw().cwiseAbs().maxCoeff();
    const double lamt = pb.cell.LambdaTilde.raw().cwiseAbs().maxCoeff();
    o.require(lam <= 1e-12 && lamt <= 1e-12, "corrector norms");
    double worst = 0.0;
    for (const RateReport& rep : {convergence_sweep(pb), resolvent_sweep(pb), cosine_corrector_sweep(pb)})
      for (const auto& e : rep.estimates) worst = std::max(worst, e.max_error());
    o.require(worst <= 1e-9, "sweep errors");
    o.detail << " |Lambda|=" << lam << " |LambdaTilde|=" << lamt << " max sweep error=" << worst;
  });

  // 4. Steklov smoothing bounds on seeded band-limited functions.
  criterion(4, "Steklov smoothing bounds on 50 seeded functions", [](Outcome& o) {
    const Lattice lat = unit_lattice(1);
    const CoefficientSet phi_cs = catalog("random-bandlimited", {{"seed", 11}, {"N", 64}});
    const PeriodicField& Phi = phi_cs.g;
    const double phi_l2 = Phi.rms();  // |Omega| = 1
    const int N = 1024;
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n01;
    std::uniform_int_distribution<int> nmodes(1, 8);
    double worst_a = 0.0, worst_b = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      BandLimited f;
      const int K = nmodes(rng);
      for (int k = -K; k <= K; ++k) f.modes.emplace_back(k, cplx(n01(rng), n01(rng)));
      const GridFunction u = periodic_samples(N, f);
      const double u_l2 = u.values.norm() / std::sqrt(double(N));
      for (double eps : {0.25, 1.0 / 16}) {
        const GridFunction s = steklov(u, lat, eps);
        const double lhs_a = (s.values - u.values).norm() / std::sqrt(double(N));
        const double rhs_a = eps * lat.r1 * f.derivative_norm();
        worst_a = std::max(worst_a, lhs_a / rhs_a);
        std::vector<Eigen::VectorXd> pts;
        for (int i = 0; i < N; ++i) pts.push_back(Eigen::VectorXd::Constant(1, static_cast<double>(i) / N));
        const auto phi_eps = eval_scaled(Phi, lat, eps, pts);
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += std::norm(phi_eps[i](0, 0) * s.values(0, i));
        const double lhs_b = std::sqrt(acc / N);
        worst_b = std::max(worst_b, lhs_b / (phi_l2 * u_l2));
      }
    }
    o.detail << " max ratio (S-I)=" << worst_a << " max ratio product=" << worst_b << " (limit 1.1)";
    o.require(worst_a <= 1.1, "smoothing error bound");
    o.require(worst_b <= 1.1, "product bound");
  });

  // 5. Spectral evolution against the leapfrog oracle and functional identities.
  criterion(5, "evolution correctness", [](Outcome& o) {
    struct Fixture {
      std::string name;
      CatalogParams params;
      std::vector<double> box;
      std::vector<int> inner;
      double eps;
    };
    const std::vector<Fixture> fixtures = {
        {"const", {{"g", 2}, {"N", 16}}, {1.0}, {127}, 0.125},
        {"sine1d", {{"N", 128}}, {1.0}, {127}, 0.125},
        {"sine1d", {{"N", 128}, {"a_amp", 0.2}, {"lambda", 1}}, {1.0}, {127}, 0.125},
        {"random-bandlimited", {{"seed", 3}, {"N", 64}}, {1.0}, {127}, 0.125},
        {"laminate2d", {{"N", 32}}, {1.0, 1.0}, {31, 31}, 0.5},
        {"checkerboard-smooth", {{"N", 32}}, {1.0, 1.0}, {31, 31}, 0.5},
    };
    double worst_lf = 0.0, worst_drift = 0.0, worst_lf_drift = 0.0, worst_cos = 0.0, worst_int = 0.0;
    for (const auto& fx : fixtures) {
      const CoefficientSet cs = catalog(fx.name, fx.params);
      const Mesh mesh = make_mesh(fx.box, fx.inner);
      const DiscreteDirichletOperator op = assemble_b_eps(mesh, cs, fx.eps);
      const EigenBasis eb = spectral_decompose(op);
      const Eigen::VectorXcd phi = interior_samples(mesh, 1, [&](const Eigen::VectorXd& x) {
        double v = 1.0;
        for (int k = 0; k < mesh.dim; ++k) v *= std::sin(kPi * x[k]);
        return Eigen::VectorXcd::Constant(1, v);
      });
      const Eigen::VectorXcd psi = interior_samples(mesh, 1, [&](const Eigen::VectorXd& x) {
        double v = 1.0;
        for (int k = 0; k < mesh.dim; ++k) v *= x[k] * (1 - x[k]);
        return Eigen::VectorXcd::Constant(1, cplx(v, 0.5 * v));
      });
      const auto spectral = solve_ibvp(eb, phi, psi, {}, {0.0, 1.0, 10.0});
      const double cfl = 1.9 / std::sqrt(eb.mu[eb.size() - 1]);
      const auto lf = leapfrog_oracle(op, phi, psi, nullptr, 1.0, 1e-3 * cfl);
      worst_lf = std::max(worst_lf, (lf.u - spectral.u[1]).norm() / spectral.u[1].norm());
      for (double e : spectral.energy) worst_drift = std::max(worst_drift, std::abs(e - spectral.energy[0]) / spectral.energy[0]);
      const auto lfe = leapfrog_oracle(op, phi, psi, nullptr, 10.0, 0.01 * cfl, true);
      for (double e : lfe.energy) worst_lf_drift = std::max(worst_lf_drift, std::abs(e - lfe.energy[0]) / lfe.energy[0]);
      const double t = 0.9, s = 0.35;
      const Eigen::VectorXcd lhs = op_cosine(eb, t + s, phi);
      const Eigen::VectorXcd rhs = 2.0 * op_cosine(eb, t, op_cosine(eb, s, phi)) - op_cosine(eb, t - s, phi);
      worst_cos = std::max(worst_cos, (lhs - rhs).norm() / phi.norm());
      // A^{-1/2} sin(t A^{1/2}) = int_0^t cos(s A^{1/2}) ds by composite Gauss-Legendre.
      const auto& gx = detail::gauss8_nodes();
      const auto& gw = detail::gauss8_weights();
      const int panels = static_cast<int>(std::ceil(t * std::sqrt(eb.mu[eb.size() - 1]))) + 8;
      const double hp = t / panels;
      Eigen::VectorXcd integral = Eigen::VectorXcd::Zero(phi.size());
      for (int p = 0; p < panels; ++p)
        for (int k = 0; k < 8; ++k) integral += 0.5 * hp * gw[k] * op_cosine(eb, (p + 0.5 + 0.5 * gx[k]) * hp, phi);
      const Eigen::VectorXcd sine = op_sine_scaled(eb, t, phi);
      worst_int = std::max(worst_int, (integral - sine).norm() / sine.norm());
    }
    o.detail << " leapfrog rel=" << worst_lf << " spectral drift=" << worst_drift << " leapfrog drift=" << worst_lf_drift
             << " cosine eq=" << worst_cos << " sine integral=" << worst_int;
    o.require(worst_lf <= 1e-4, "leapfrog agreement");
    o.require(worst_drift <= 1e-8, "spectral energy");
    o.require(worst_lf_drift <= 1e-3, "leapfrog energy");
    o.require(worst_cos <= 1e-8, "cosine functional equation");
    o.require(worst_int <= 1e-8, "sine integral identity");
  });

  // 6-8 share one prepared problem; the suite is rerun from scratch for 10.
  const SweepConfig sine = load("sine1d.cfg");
  std::vector<RateReport> first;
  double suite_time = 0.0;
  std::string prep_error;
  try {
    const auto t0 = Clock::now();
    first = full_suite(sine);
    suite_time = seconds_since(t0);
  } catch (const std::exception& e) {
    prep_error = e.what();
  }
  auto need_suite = [&](Outcome& o) {
    if (!prep_error.empty()) throw std::runtime_error(prep_error);
    (void)o;
  };

  criterion(6, "resolvent rates, sine1d, zeta=-1", [&](Outcome& o) {
    need_suite(o);
    const RateReport& rep = first[0];
    summarize(o, rep);
    require_series(o, rep, "resolvent-L2");
    require_series(o, rep, "resolvent-H1-corr");
    require_series(o, rep, "sqrt-L2");
    o.require(rep.wall_time < 120.0, "runtime");
  });

  criterion(7, "hyperbolic rates, sine1d, t in {0.5, 1, 2}", [&](Outcome& o) {
    need_suite(o);
    const RateReport& rep = first[1];
    summarize(o, rep);
    require_series(o, rep, "sol-L2@");
    require_series(o, rep, "sol-H1-corr@");
    require_series(o, rep, "flux@");
    o.require(rep.wall_time < 180.0, "runtime");
  });

  criterion(8, "cosine-corrector rate, sine1d, t=1", [&](Outcome& o) {
    need_suite(o);
    const RateReport& rep = first[2];
    summarize(o, rep);
    const auto* corr = rep.find("cos-corr-H1@t=1");
    const auto* plain = rep.find("cos-plain-H1@t=1");
    o.require(corr && corr->verdict == "pass", "corrected H1 slope");
    o.require(plain && !plain->has_verdict && plain->verdict == "reported", "plain cosine reported without verdict");
  });

  criterion(9, "hyperbolic H1 rate without Steklov smoothing", [&](Outcome& o) {
    SweepConfig cfg = sine;
    cfg.smoothed = false;
    const RateReport rep = convergence_sweep(prepare(cfg));
    summarize(o, rep);
    require_series(o, rep, "sol-H1-corr@");
  });

  criterion(10, "determinism and suite wall time", [&](Outcome& o) {
    need_suite(o);
    const std::filesystem::path dir = std::filesystem::path("acceptance_out");
    std::filesystem::create_directories(dir);
    write_rates_csv(first, (dir / "rates_run1.csv").string());
    const auto second = full_suite(sine);
    write_rates_csv(second, (dir / "rates_run2.csv").string());
    const std::string a = slurp(dir / "rates_run1.csv"), b = slurp(dir / "rates_run2.csv");
    o.detail << " csv bytes=" << a.size() << " identical=" << (a == b ? "yes" : "no") << " suite time=" << suite_time
             << "s";
    o.require(!a.empty() && a == b, "bit-identical rates.csv");
    o.require(suite_time < 360.0, "suite wall time");
  });

  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
