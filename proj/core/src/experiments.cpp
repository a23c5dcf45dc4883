#include "homog/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "homog/homog1d.hpp"
#include "homog/macro2d.hpp"

#ifndef HOMOG_VERSION
#define HOMOG_VERSION "0.0.0"
#endif

namespace homog {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string eta_label(double eta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", eta);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out << content;
  if (!out) throw Error("failed while writing file: " + path.string());
}

// Fixed CSV format: header row, 17 significant digits, LF line endings.
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out.push_back(',');
    out += header[c];
  }
  out.push_back('\n');
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(',');
      out += format_value(row[c]);
    }
    out.push_back('\n');
  }
  write_text(path, out);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Periodicity spot-check for cell coefficients; failing it is a validation
// error (exit code 1), not a solver error.
void check_cell_periodicity(const ScalarCoefficient& c, double period,
                            std::optional<double> eta, std::uint64_t seed,
                            const std::string& what) {
  for (Var v : {Var::Y1, Var::Y2}) {
    if (!c.expr.references(v)) continue;
    const PeriodicityReport rep =
        validate_periodicity(c, period, 64, v, eta, seed);
    if (!rep.pass)
      throw ConfigError(what + " is not periodic in " + std::string(var_name(v)) +
                        " with period " + eta_label(period) +
                        " (worst violation " + std::to_string(rep.worst_violation) +
                        " at " + std::to_string(rep.worst_point) + ")");
  }
}

struct Emitter {
  fs::path dir;
  std::vector<fs::path> outputs;

  fs::path file(const std::string& name) {
    outputs.push_back(dir / name);
    return outputs.back();
  }
};

// ---------------------------------------------------------------------------
// experiment runners
// ---------------------------------------------------------------------------

void run_cell1d(const Cell1dSpec& s, const RunOptions& opt, Emitter& em,
                json& manifest) {
  check_cell_periodicity(s.kappa, s.length, s.eta, opt.seed, "[cell] kappa");
  const auto kappa = coefficient_callable(s.kappa, {}, s.eta);
  const Grid1D grid = Grid1D::uniform(0.0, s.length, s.nodes);

  const double kh = harmonic_mean(kappa, s.n_quad, s.length);
  const Corrector1D chi = corrector_1d(kappa, grid, s.n_quad);
  const double kf = flux_form_mean(kappa, chi, s.n_quad);

  std::vector<std::vector<double>> rows(grid.n);
  for (int i = 0; i < grid.n; ++i) rows[i] = {grid.node(i), chi.chi[i]};
  write_csv(em.file("corrector.csv"), {"Y1", "chi1"}, rows);

  json eff;
  eff["length"] = s.length;
  eff["harmonic_mean"] = kh;
  eff["flux_form_mean"] = kf;
  write_text(em.file("effective.json"), eff.dump(2) + "\n");
  manifest["diagnostics"]["harmonic_mean"] = kh;
  manifest["diagnostics"]["flux_form_mean"] = kf;
}

void run_cell2d(const Cell2dSpec& s, const RunOptions& opt, Emitter& em,
                json& manifest) {
  check_cell_periodicity(s.kappa, s.length, s.eta, opt.seed, "[cell] kappa");
  CellProblem2D p;
  p.grid = PeriodicGrid2D::sized(s.length, s.resolution);
  p.kappa = sample_scalar(s.kappa, p.grid, {}, s.eta);

  const Corrector2D chi1 = solve_cell_2d(p, 1, s.tol);
  const Corrector2D chi2 = solve_cell_2d(p, 2, s.tol);
  const HomogenizedTensor t = assemble_tensor(p, chi1, chi2);

  std::vector<std::vector<double>> rows;
  rows.reserve(p.grid.cells());
  for (int j = 0; j < p.grid.n; ++j)
    for (int i = 0; i < p.grid.n; ++i)
      rows.push_back({p.grid.center(i), p.grid.center(j),
                      p.kappa[p.grid.index(i, j)], chi1.chi[p.grid.index(i, j)],
                      chi2.chi[p.grid.index(i, j)]});
  write_csv(em.file("cell.csv"), {"Y1", "Y2", "kappa", "chi1", "chi2"}, rows);

  json tj;
  tj["k11"] = t.k11;
  tj["k12"] = t.k12;
  tj["k21"] = t.k21;
  tj["k22"] = t.k22;
  write_text(em.file("tensor.json"), tj.dump(2) + "\n");

  double worst_spread = 0.0;
  for (const auto* chi : {&chi1, &chi2})
    for (int dir : {1, 2})
      worst_spread = std::max(
          worst_spread, cross_section_flux_spread(p, *chi, dir).rel_spread);
  manifest["diagnostics"]["iterations_chi1"] = chi1.iterations;
  manifest["diagnostics"]["iterations_chi2"] = chi2.iterations;
  manifest["diagnostics"]["worst_flux_spread"] = worst_spread;
  manifest["diagnostics"]["symmetry_gap"] = verify_symmetry(t, 1e-8).gap;
}

void write_error_report(const std::vector<ConvergenceRow>& rows, Emitter& em,
                        json& manifest) {
  std::vector<std::vector<double>> table;
  for (const auto& r : rows) table.push_back({r.eta, r.max_err, r.l2_err});
  write_csv(em.file("errors.csv"), {"eta", "max_err", "l2_err"}, table);
  const ConvergenceReport rep = report_convergence(rows);
  write_text(em.file("report.txt"), rep.text);
  manifest["diagnostics"]["monotone_decreasing"] = rep.monotone_decreasing;
}

void run_solve1d(const Solve1dSpec& s, const RunOptions& opt, Emitter& em,
                 json& manifest) {
  check_cell_periodicity(s.cell_kappa, 1.0, {}, opt.seed, "[cell] kappa");
  const double khat = harmonic_mean(s.cell_kappa, 64, 1.0);
  manifest["diagnostics"]["khat"] = khat;

  const Grid1D grid = Grid1D::uniform(0.0, 1.0, s.output_nodes);
  const SolutionField1D hom = solve_homogenized_1d(khat, s.u0, s.flux_h, grid);

  std::vector<SolutionField1D> exact(s.etas.size());
  std::vector<ConvergenceRow> rows(s.etas.size());
  parallel_for(s.etas.size(), opt.threads, [&](std::size_t k) {
    const double eta = s.etas[k];
    const int n_quad =
        std::max(s.n_quad, static_cast<int>(std::ceil(20.0 / eta)));
    BVP1D bvp{s.kappa, eta, s.u0, s.flux_h};
    exact[k] = solve_bvp_1d(bvp, n_quad, grid);
    const ErrorNorms1D e = error_norms(exact[k], hom);
    rows[k] = {eta, e.max_norm, e.l2_norm};
  });

  for (std::size_t k = 0; k < s.etas.size(); ++k) {
    std::vector<std::vector<double>> table(grid.n);
    for (int i = 0; i < grid.n; ++i)
      table[i] = {grid.node(i), exact[k].values[i], hom.values[i]};
    write_csv(em.file("solution_eta_" + eta_label(s.etas[k]) + ".csv"),
              {"X1", "u_exact", "u_homogenized"}, table);
  }
  write_error_report(rows, em, manifest);
}

void run_solve2d(const Solve2dSpec& s, const RunOptions& opt, Emitter& em,
                 json& manifest) {
  check_cell_periodicity(s.cell_kappa, 1.0, {}, opt.seed, "[cell] kappa");
  CellProblem2D cell;
  cell.grid = PeriodicGrid2D::unit(s.cell_resolution);
  cell.kappa = sample_scalar(s.cell_kappa, cell.grid);
  const Corrector2D chi1 = solve_cell_2d(cell, 1, s.cell_tol);
  const Corrector2D chi2 = solve_cell_2d(cell, 2, s.cell_tol);
  const HomogenizedTensor t = assemble_tensor(cell, chi1, chi2);

  json tj;
  tj["k11"] = t.k11;
  tj["k12"] = t.k12;
  tj["k21"] = t.k21;
  tj["k22"] = t.k22;
  write_text(em.file("tensor.json"), tj.dump(2) + "\n");

  const MacroProblem2D macro{s.m, s.flux_h, s.tol};
  const SolutionField2D hom = solve_homogenized_2d(macro, t);

  auto write_field = [&](const std::string& name, const SolutionField2D& f) {
    std::vector<std::vector<double>> table;
    table.reserve(f.grid.cells());
    for (int j = 0; j < f.grid.m; ++j)
      for (int i = 0; i < f.grid.m; ++i)
        table.push_back({f.grid.center(i), f.grid.center(j), f.u[f.grid.index(i, j)]});
    write_csv(em.file(name), {"X1", "X2", "U"}, table);
  };

  std::vector<SolutionField2D> exact(s.etas.size());
  std::vector<ConvergenceRow> rows(s.etas.size());
  parallel_for(s.etas.size(), opt.threads, [&](std::size_t k) {
    exact[k] = solve_multiscale_2d(macro, s.kappa, s.etas[k]);
    const ErrorNorms2D e = error_norms(exact[k], hom);
    rows[k] = {s.etas[k], e.max_norm, e.l2_norm};
  });

  write_field("homogenized.csv", hom);
  for (std::size_t k = 0; k < s.etas.size(); ++k)
    write_field("multiscale_eta_" + eta_label(s.etas[k]) + ".csv", exact[k]);
  write_error_report(rows, em, manifest);
}

void run_lb1d(const Lb1dSpec& s, const RunOptions& opt, Emitter& em,
              json& manifest) {
  SurfaceChart chart;
  if (s.builtin_curve) {
    chart = SurfaceChart::curve(parse("sin(pi*X1) + ETA*sin(2*pi*Y1)"));
  } else {
    chart.dim = 1;
    chart.components = {*s.x1, *s.x2};
  }

  const Grid1D grid = Grid1D::uniform(0.0, 1.0, s.output_nodes);
  const Grid1D macro = Grid1D::uniform(0.0, 1.0, s.macro_nodes);

  struct PerEta {
    SolutionField1D exact, hom;
    std::vector<double> khat;
    std::vector<double> kappa;
  };
  std::vector<PerEta> results(s.etas.size());
  std::vector<ConvergenceRow> rows(s.etas.size());

  parallel_for(s.etas.size(), opt.threads, [&](std::size_t k) {
    const double eta = s.etas[k];
    const TwoScaleMetric1D metric = s.builtin_curve
                                        ? TwoScaleMetric1D::wrinkled_sine_curve()
                                        : TwoScaleMetric1D::from_chart(chart, eta);
    PerEta& r = results[k];
    r.exact = solve_lb_1d(metric, eta, s.flux_h, LbMode::exact, grid, s.n_quad);
    r.hom = solve_lb_1d(metric, eta, s.flux_h, LbMode::homogenized, grid, s.n_quad);
    r.khat = homogenize_pointwise_1d(metric, macro, s.n_quad);
    r.kappa.resize(grid.n);
    for (int i = 0; i < grid.n; ++i)
      r.kappa[i] = lb_coefficient_1d(metric, grid.node(i), grid.node(i) / eta);
    const ErrorNorms1D e = error_norms(r.exact, r.hom);
    rows[k] = {eta, e.max_norm, e.l2_norm};
  });

  Bindings b;
  for (std::size_t k = 0; k < s.etas.size(); ++k) {
    const double eta = s.etas[k];
    const std::string label = eta_label(eta);

    std::vector<std::vector<double>> curve(grid.n);
    for (int i = 0; i < grid.n; ++i) {
      const double x = grid.node(i);
      b.set(Var::X1, x).set(Var::Y1, x / eta).set(Var::Eta, eta);
      curve[i] = {x, chart.components[0].eval(b), chart.components[1].eval(b)};
    }
    write_csv(em.file("curve_eta_" + label + ".csv"), {"X1", "c1", "c2"}, curve);

    std::vector<std::vector<double>> kap(grid.n);
    for (int i = 0; i < grid.n; ++i)
      kap[i] = {grid.node(i), results[k].kappa[i]};
    write_csv(em.file("kappa_eta_" + label + ".csv"), {"X1", "kappa"}, kap);

    std::vector<std::vector<double>> kh(macro.n);
    for (int i = 0; i < macro.n; ++i)
      kh[i] = {macro.node(i), results[k].khat[i]};
    write_csv(em.file("khat_eta_" + label + ".csv"), {"X1", "khat"}, kh);

    std::vector<std::vector<double>> sol(grid.n);
    for (int i = 0; i < grid.n; ++i)
      sol[i] = {grid.node(i), results[k].exact.values[i], results[k].hom.values[i]};
    write_csv(em.file("solution_eta_" + label + ".csv"),
              {"X1", "u_exact", "u_homogenized"}, sol);
  }
  write_error_report(rows, em, manifest);
}

void run_lb2d(const Lb2dSpec& s, const RunOptions& opt, Emitter& em,
              json& manifest) {
  const SurfaceChart chart = SurfaceChart::graph(s.f);
  std::vector<std::array<double, 2>> points;
  points.reserve(s.xs1.size() * s.xs2.size());
  for (double x2 : s.xs2)
    for (double x1 : s.xs1) points.push_back({x1, x2});

  const auto table =
      homogenize_lb_2d(chart, points, s.eta, s.resolution, s.tol, opt.threads);

  std::vector<std::vector<double>> rows;
  rows.reserve(table.size());
  double worst_gap = 0.0;
  for (const PointTensor& pt : table) {
    rows.push_back({pt.x1, pt.x2, pt.tensor.k11, pt.tensor.k12, pt.tensor.k21,
                    pt.tensor.k22});
    worst_gap = std::max(worst_gap, verify_symmetry(pt.tensor, 1e-8).gap);
  }
  write_csv(em.file("tensors.csv"), {"X1", "X2", "k11", "k12", "k21", "k22"},
            rows);
  manifest["diagnostics"]["worst_symmetry_gap"] = worst_gap;
}

void run_convergence(const ConvergenceSpec& s, Emitter& em, json& manifest) {
  std::ifstream in(s.table, std::ios::binary);
  if (!in) throw ConfigError("cannot open error table: " + s.table.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("eta,max_err,l2_err", 0) != 0)
    throw ConfigError("error table must start with header 'eta,max_err,l2_err'");
  std::vector<ConvergenceRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ConvergenceRow r;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r.eta, &r.max_err, &r.l2_err) != 3)
      throw ConfigError(s.table.string() + ":" + std::to_string(line_no) +
                        ": malformed row");
    rows.push_back(r);
  }
  const ConvergenceReport rep = report_convergence(rows);
  write_text(em.file("report.txt"), rep.text);
  std::vector<std::vector<double>> table;
  for (const auto& r : rep.rows) table.push_back({r.eta, r.max_err, r.l2_err});
  write_csv(em.file("summary.csv"), {"eta", "max_err", "l2_err"}, table);
  manifest["diagnostics"]["monotone_decreasing"] = rep.monotone_decreasing;
}

}  // namespace

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ConvergenceReport report_convergence(const std::vector<ConvergenceRow>& rows) {
  if (rows.size() < 2)
    throw ConfigError("report_convergence: need at least two eta entries");
  ConvergenceReport rep;
  rep.rows = rows;
  rep.monotone_decreasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].max_err < rows[i - 1].max_err)) rep.monotone_decreasing = false;

  std::ostringstream out;
  out << "eta,max_err,l2_err\n";
  for (const auto& r : rows)
    out << format_value(r.eta) << "," << format_value(r.max_err) << ","
        << format_value(r.l2_err) << "\n";
  out << "monotone decrease (max_err): "
      << (rep.monotone_decreasing ? "PASS" : "FAIL") << "\n";
  rep.text = out.str();
  return rep;
}

RunResult run_experiment(const std::filesystem::path& config_path,
                         const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;

  json manifest;
  manifest["schema_version"] = 1;
  manifest["tool"] = "homogenize";
  manifest["version"] = HOMOG_VERSION;
  manifest["config"] = config_path.string();
  manifest["threads"] = options.threads;
  manifest["seed"] = options.seed;

  Emitter em;
  em.dir = options.out_dir;

  auto finalize = [&](int code, const std::string& error) {
    manifest["status"] = (code == 0) ? "ok" : "error";
    if (!error.empty()) manifest["error"] = error;
    json files = json::array();
    for (const auto& p : em.outputs) files.push_back(p.filename().string());
    manifest["outputs"] = files;
    manifest["runtime_seconds"] = seconds_since(t0);
    std::error_code ec;
    fs::create_directories(em.dir, ec);
    try {
      write_text(em.dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (...) {
      // out dir unusable; nothing else to record
    }
    result.exit_code = code;
    result.error = error;
    result.outputs = em.outputs;
    return result;
  };

  try {
    const ConfigFile file = ConfigFile::parse_file(config_path);
    manifest["config_hash"] = "fnv1a64:" + fnv1a_hex(file.text());
    const ExperimentConfig cfg = ExperimentConfig::load(file);
    manifest["kind"] = std::string(kind_name(cfg.kind));
    manifest["name"] = cfg.name;

    std::error_code ec;
    fs::create_directories(em.dir, ec);
    if (ec && !fs::exists(em.dir))
      throw ConfigError("cannot create output directory: " + em.dir.string());

    switch (cfg.kind) {
      case ExperimentKind::cell1d:
        run_cell1d(std::get<Cell1dSpec>(cfg.spec), options, em, manifest);
        break;
      case ExperimentKind::cell2d:
        run_cell2d(std::get<Cell2dSpec>(cfg.spec), options, em, manifest);
        break;
      case ExperimentKind::solve1d:
        run_solve1d(std::get<Solve1dSpec>(cfg.spec), options, em, manifest);
        break;
      case ExperimentKind::solve2d:
        run_solve2d(std::get<Solve2dSpec>(cfg.spec), options, em, manifest);
        break;
      case ExperimentKind::lb1d:
        run_lb1d(std::get<Lb1dSpec>(cfg.spec), options, em, manifest);
        break;
      case ExperimentKind::lb2d:
        run_lb2d(std::get<Lb2dSpec>(cfg.spec), options, em, manifest);
        break;
      case ExperimentKind::convergence:
        run_convergence(std::get<ConvergenceSpec>(cfg.spec), em, manifest);
        break;
    }
    return finalize(0, "");
  } catch (const ConfigError& e) {
    return finalize(1, e.what());
  } catch (const std::exception& e) {
    return finalize(2, e.what());
  }
}

}  // namespace homog
