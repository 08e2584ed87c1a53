#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "oscillat/study.hpp"

namespace oscillat {

namespace cli_detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXcd& A) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      rr.push_back(A(i, j).real());
      ri.push_back(A(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"re", re}, {"im", im}};
}

inline std::filesystem::path output_dir(const std::string& dir) {
  std::filesystem::path p(dir.empty() ? "." : dir);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_cell(const CoefficientSet& cs, const CellSolution& cell, const std::filesystem::path& dir) {
  std::ofstream csv(dir / "cell_solution.csv");
  if (!csv) throw Error(ErrorKind::Io, "cannot write cell_solution.csv");
  const int d = cs.dim();
  const int N = cell.N;
  for (int k = 0; k < d; ++k) csv << (k ? "," : "") << "tau" << k;
  auto header = [&](const std::string& name, const PeriodicField& f) {
    for (int r = 0; r < f.rows(); ++r)
      for (int c = 0; c < f.cols(); ++c)
        csv << ',' << name << r << c << "_re," << name << r << c << "_im";
  };
  header("Lambda", cell.Lambda);
  header("LambdaTilde", cell.LambdaTilde);
  header("gtilde", cell.g_tilde);
  csv << '\n';
  for (Eigen::Index q = 0; q < cell.Lambda.size(); ++q) {
    int nu[2] = {0, 0};
    spectral::unflatten(static_cast<std::size_t>(q), d, N, nu);
    for (int k = 0; k < d; ++k) csv << (k ? "," : "") << format_double(static_cast<double>(nu[k]) / N);
    for (const PeriodicField* f : {&cell.Lambda, &cell.LambdaTilde, &cell.g_tilde}) {
      const Eigen::MatrixXcd v = f->at(q);
      for (int r = 0; r < f->rows(); ++r)
        for (int c = 0; c < f->cols(); ++c)
          csv << ',' << format_double(v(r, c).real()) << ',' << format_double(v(r, c).imag());
    }
    csv << '\n';
  }
  const VoigtReussReport vr = voigt_reuss(cs.g, cell.g0);
  nlohmann::json j;
  j["coefficients"] = cs.name;
  j["resolution"] = N;
  j["g0"] = matrix_json(cell.g0);
  j["V"] = matrix_json(cell.V);
  j["W"] = matrix_json(cell.W);
  j["g_lower"] = matrix_json(vr.g_lower);
  j["g_upper"] = matrix_json(vr.g_upper);
  j["voigt_reuss"] = {{"lower_margin", vr.lower_margin},
                      {"upper_margin", vr.upper_margin},
                      {"lower_ok", vr.lower_ok},
                      {"upper_ok", vr.upper_ok}};
  j["residuals"] = {{"Lambda", cell.residual_lambda}, {"LambdaTilde", cell.residual_lambda_tilde}};
  j["iterations"] = {{"Lambda", cell.iterations_lambda}, {"LambdaTilde", cell.iterations_lambda_tilde}};
  j["warnings"] = cell.warnings;
  std::ofstream js(dir / "effective.json");
  if (!js) throw Error(ErrorKind::Io, "cannot write effective.json");
  js << j.dump(2) << '\n';
}

// Cell-centred values averaged onto box nodes.
inline GridFunction cells_to_nodes(const Mesh& mesh, const Eigen::MatrixXcd& cellwise) {
  GridFunction out = box_function(mesh, static_cast<int>(cellwise.rows()));
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(out.size());
  for (int i = 0; i < mesh.cells(0); ++i)
    for (int j = 0; j < mesh.cells(1); ++j) {
      const Eigen::Index c = static_cast<Eigen::Index>(i) * mesh.cells(1) + j;
      for (int di = 0; di <= 1; ++di)
        for (int dj = 0; dj <= (mesh.dim == 2 ? 1 : 0); ++dj) {
          const Eigen::Index q = mesh.node_index(i + di, j + dj);
          out.values.col(q) += cellwise.col(c);
          weight[q] += 1.0;
        }
    }
  for (Eigen::Index q = 0; q < out.size(); ++q) out.values.col(q) /= weight[q];
  return out;
}

inline void write_solution(const std::filesystem::path& path, const Mesh& mesh,
                           const std::vector<std::pair<std::string, GridFunction>>& columns) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "x";
  if (mesh.dim == 2) out << ",y";
  for (const auto& [name, f] : columns)
    for (int c = 0; c < f.ncomp; ++c) {
      const std::string suffix = f.ncomp > 1 ? "_" + std::to_string(c) : "";
      out << ',' << name << suffix << "_re," << name << suffix << "_im";
    }
  out << '\n';
  for (int i = 0; i < mesh.nodes(0); ++i)
    for (int j = 0; j < mesh.nodes(1); ++j) {
      const Eigen::VectorXd x = mesh.node(i, j);
      out << format_double(x[0]);
      if (mesh.dim == 2) out << ',' << format_double(x[1]);
      const Eigen::Index q = mesh.node_index(i, j);
      for (const auto& col : columns)
        for (int c = 0; c < col.second.ncomp; ++c)
          out << ',' << format_double(col.second.values(c, q).real()) << ','
              << format_double(col.second.values(c, q).imag());
      out << '\n';
    }
}

inline void run_evolve(const Problem& pb, double eps, const std::filesystem::path& dir) {
  const auto& cfg = pb.cfg;
  const int n = pb.cs.symbol.n;
  const HyperbolicData data = hyperbolic_data(pb);
  const EigenBasis eb0 = spectral_decompose(pb.B0);
  const EigenBasis eb = spectral_decompose(assemble_b_eps(pb.mesh, pb.cs, eps, pb.assembly));
  const EvolutionResult u0 = solve_ibvp(eb0, data.phi, data.psi, data.F, cfg.t);
  const EvolutionResult ue = solve_ibvp(eb, data.phi, data.psi, data.F, cfg.t);
  const auto v = first_order_approx(u0, pb.cell, eps, pb.cs, pb.mesh, pb.ext, cfg.smoothed);
  for (std::size_t k = 0; k < cfg.t.size(); ++k) {
    const GridFunction p = cells_to_nodes(pb.mesh, flux(ue.u[k], pb.cs, eps, pb.mesh));
    const GridFunction pa =
        cells_to_nodes(pb.mesh, flux_approx(u0.u[k], pb.cell, eps, pb.cs, pb.mesh, pb.ext, cfg.smoothed));
    write_solution(dir / ("solution_t" + format_t(cfg.t[k]) + ".csv"), pb.mesh,
                   {{"u_eps", embed(pb.mesh, ue.u[k], n)},
                    {"u0", embed(pb.mesh, u0.u[k], n)},
                    {"v_eps", v[k]},
                    {"p_eps", p},
                    {"flux_approx", pa}});
  }
}

inline int emit(const std::vector<RateReport>& reports, const std::filesystem::path& dir) {
  write_rates_csv(reports, (dir / "rates.csv").string());
  write_report_txt(reports, (dir / "report.txt").string());
  std::cout << report_text(reports);
  bool ok = true;
  for (const auto& r : reports) {
    for (const auto& note : r.notes) std::cout << "# " << note << '\n';
    std::cout << "# " << r.sweep << " wall time " << r.wall_time << " s\n";
    ok = ok && r.passed();
  }
  return ok ? 0 : 2;
}

}  // namespace cli_detail

/// Fast checks of the trivial fixtures; returns the number of failures.
inline int selftest(std::ostream& log) {
  int failures = 0;
  auto check = [&](const std::string& name, auto&& fn) {
    bool ok = false;
    std::string msg;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      msg = e.what();
    }
    log << (ok ? "ok   " : "FAIL ") << name << (msg.empty() ? "" : " (" + msg + ")") << '\n';
    if (!ok) ++failures;
  };
  check("unit lattice", [] {
    const Lattice lat = unit_lattice(2);
    return std::abs(lat.cell_volume - 1.0) < 1e-15 && (lat.dual_basis - 2.0 * std::numbers::pi * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12;
  });
  check("degenerate basis rejected", [] {
    try {
      build_lattice(Eigen::MatrixXd::Zero(2, 2));
    } catch (const Error& e) {
      return e.kind() == ErrorKind::DegenerateBasis;
    }
    return false;
  });
  check("unknown catalog entry", [] {
    try {
      catalog("no-such-entry");
    } catch (const Error& e) {
      return e.kind() == ErrorKind::UnknownCatalogEntry;
    }
    return false;
  });
  check("constant g has zero corrector", [] {
    const CoefficientSet cs = catalog("const", {{"d", 1}, {"g", 2.0}, {"N", 16}});
    const CellSolution cell = solve_cell(cs);
    return cell.corrector_vanishes() && std::abs(cell.g0(0, 0) - 2.0) < 1e-12;
  });
  check("fit of err = eps", [] {
    return std::abs(fit_rate({{0.5, 0.5}, {0.25, 0.25}, {0.125, 0.125}, {0.0625, 0.0625}}).slope - 1.0) < 1e-12;
  });
  check("zero error rejected by fit", [] {
    try {
      fit_rate({{0.5, 0.0}, {0.25, 1.0}});
    } catch (const Error& e) {
      return e.kind() == ErrorKind::ZeroError;
    }
    return false;
  });
  check("cosine at t = 0 is the identity", [] {
    DiscreteDirichletOperator op;
    op.mesh = make_mesh({1.0}, {3});
    op.n = 1;
    std::vector<Eigen::Triplet<cplx>> trip = {{0, 0, 1.0}, {1, 1, 4.0}, {2, 2, 9.0}};
    op.matrix.resize(3, 3);
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    const EigenBasis eb = spectral_decompose(op);
    const Eigen::VectorXcd v = Eigen::VectorXcd::LinSpaced(3, 1.0, 3.0);
    return (op_cosine(eb, 0.0, v) - v).norm() < 1e-15 && op_sine_scaled(eb, 0.0, v).norm() == 0.0 &&
           std::abs(eb.mu[2] - 9.0) < 1e-12;
  });
  check("zero data gives zero solution", [] {
    DiscreteDirichletOperator op;
    op.mesh = make_mesh({1.0}, {3});
    op.n = 1;
    std::vector<Eigen::Triplet<cplx>> trip = {{0, 0, 2.0}, {1, 1, 3.0}, {2, 2, 5.0}};
    op.matrix.resize(3, 3);
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    const EigenBasis eb = spectral_decompose(op);
    const Eigen::VectorXcd z = Eigen::VectorXcd::Zero(3);
    const auto r = solve_ibvp(eb, z, z, TimeSamples(), {0.5, 1.0});
    return r.u[0].norm() == 0.0 && r.u[1].norm() == 0.0;
  });
  return failures;
}

/// Entry point of the `oscillat` command; returns the process exit code.
inline int run_cli(int argc, char** argv) {
  CLI::App app{"oscillat: homogenization of hyperbolic systems with periodic coefficients"};
  app.require_subcommand(1);
  std::string config_path, output;
  std::optional<bool> smoothed;
  double eps = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,-c", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--output,-o", output, "output directory (overrides sweep.output)");
  };
  auto* cell = app.add_subcommand("cell", "solve the cell problems, write cell_solution.csv and effective.json");
  add_common(cell);
  auto* evolve = app.add_subcommand("evolve", "solve one eps and the effective problem, write solution_t<t>.csv");
  add_common(evolve);
  evolve->add_option("--eps", eps, "period (default: smallest eps of the sweep)");
  std::vector<CLI::App*> sweeps;
  for (const char* name : {"sweep", "resolvent-sweep", "cos-sweep"}) {
    auto* s = app.add_subcommand(name, "run a convergence sweep, write rates.csv and report.txt");
    add_common(s);
    s->add_option("--smoothed", smoothed, "override corrector.smoothed");
    sweeps.push_back(s);
  }
  auto* self = app.add_subcommand("selftest", "run the built-in trivial fixtures");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return 1;
  }
  try {
    if (self->parsed()) return selftest(std::cout) == 0 ? 0 : 1;
    const Config c = Config::load(config_path);
    SweepConfig cfg = SweepConfig::from_config(c);
    if (!output.empty()) cfg.output = output;
    if (smoothed) cfg.smoothed = *smoothed;
    const auto dir = cli_detail::output_dir(cfg.output);
    if (cell->parsed()) {
      const CoefficientSet cs = build_coefficients(cfg);
      const CellSolution sol = solve_cell(cs);
      cli_detail::write_cell(cs, sol, dir);
      for (const auto& w : sol.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "g0 =\n" << sol.g0 << '\n';
      return 0;
    }
    const Problem pb = prepare(cfg);
    if (evolve->parsed()) {
      cli_detail::run_evolve(pb, eps > 0.0 ? eps : pb.cfg.eps.back(), dir);
      return 0;
    }
    std::vector<RateReport> reports;
    if (sweeps[0]->parsed()) reports.push_back(convergence_sweep(pb));
    if (sweeps[1]->parsed()) reports.push_back(resolvent_sweep(pb));
    if (sweeps[2]->parsed()) reports.push_back(cosine_corrector_sweep(pb));
    return cli_detail::emit(reports, dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace oscillat
