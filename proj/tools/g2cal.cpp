// Command-line driver: FHN trajectories, moment maps, level-set tracing and
// the tau flow, sharing one solution CSV format (written by solve-fhn,
// consumed by moments / trace / fibration-test / render).

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "g2cal/fhn.hpp"
#include "g2cal/linear.hpp"
#include "g2cal/moments.hpp"
#include "g2cal/tracer.hpp"
#include "g2cal/trisymplectic.hpp"

using json = nlohmann::json;
using namespace g2cal;

namespace {

std::string diagramName(fhn::Diagram d) {
  switch (d) {
    case fhn::Diagram::kDeltaSU2: return "delta";
    case fhn::Diagram::kOneTimesSU2: return "one-su2";
    case fhn::Diagram::kKmn: return "kmn";
    default: return "none";
  }
}

fhn::Params parseDiagram(const std::string& spec, double c1, double c2) {
  fhn::Params p;
  p.c1 = c1;
  p.c2 = c2;
  if (spec == "delta") {
    p.diagram = fhn::Diagram::kDeltaSU2;
  } else if (spec == "one-su2") {
    p.diagram = fhn::Diagram::kOneTimesSU2;
  } else if (spec.rfind("kmn:", 0) == 0) {
    p.diagram = fhn::Diagram::kKmn;
    const auto comma = spec.find(',', 4);
    if (comma == std::string::npos)
      throw CLI::ValidationError("--diagram", "expected kmn:m,n");
    p.m = std::stoi(spec.substr(4, comma - 4));
    p.n = std::stoi(spec.substr(comma + 1));
  } else if (spec == "none") {
    p.diagram = fhn::Diagram::kNoSingularOrbit;
  } else {
    throw CLI::ValidationError("--diagram", "unknown diagram '" + spec + "'");
  }
  return p;
}

void writeSolutionCsv(std::ostream& out, const fhn::Solution& sol) {
  const fhn::Params& p = sol.params();
  out << "# c1=" << std::setprecision(17) << p.c1 << " c2=" << p.c2
      << " diagram=" << diagramName(p.diagram) << " m=" << p.m << " n=" << p.n
      << " from_singular_orbit=" << (sol.fromSingularOrbit() ? 1 : 0)
      << " cone_exit=" << (sol.termination() == fhn::Termination::kConeExit ? 1 : 0) << "\n";
  out << "t,a,b,adot,bdot,H,Lambda\n";
  out << std::setprecision(17);
  for (const auto& sample : sol.samples()) {
    const fhn::State s{sample.t, sample.y[0], sample.y[1], sample.y[2], sample.y[3]};
    out << s.t << "," << s.a << "," << s.b << "," << s.adot() << "," << s.bdot() << ","
        << fhn::hamiltonian(s, p) << "," << -fhn::minusLambda(s.a, s.b, p) << "\n";
  }
}

fhn::Solution loadSolutionCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--solution", "cannot open " + path);
  std::string line;
  std::getline(in, line);
  fhn::Params p;
  bool from_singular = false;
  bool cone_exit = false;
  {
    std::istringstream header(line);
    std::string token;
    while (header >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
      if (key == "c1") p.c1 = std::stod(value);
      else if (key == "c2") p.c2 = std::stod(value);
      else if (key == "m") p.m = std::stoi(value);
      else if (key == "n") p.n = std::stoi(value);
      else if (key == "from_singular_orbit") from_singular = value == "1";
      else if (key == "cone_exit") cone_exit = value == "1";
      else if (key == "diagram") {
        if (value == "delta") p.diagram = fhn::Diagram::kDeltaSU2;
        else if (value == "one-su2") p.diagram = fhn::Diagram::kOneTimesSU2;
        else if (value == "kmn") p.diagram = fhn::Diagram::kKmn;
        else p.diagram = fhn::Diagram::kNoSingularOrbit;
      }
    }
  }
  std::getline(in, line);  // column header
  std::vector<ode::Sample> samples;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::array<double, 7> col{};
    char comma;
    for (int i = 0; i < 7; ++i) {
      row >> col[i];
      if (i < 6) row >> comma;
    }
    const double adot = col[3], bdot = col[4];
    const fhn::State s{col[0], col[1], col[2], adot * bdot, adot * adot};
    const auto d = fhn::enhancedOdeRhs(s, p);
    samples.push_back({s.t, {s.a, s.b, s.x1, s.x2}, {d[0], d[1], d[2], d[3]}});
  }
  if (samples.size() < 2)
    throw CLI::ValidationError("--solution", "file holds fewer than two samples");
  const double exit_time = cone_exit ? samples.back().t : 0.0;
  return fhn::Solution(p, std::move(samples),
                       cone_exit ? fhn::Termination::kConeExit
                                 : fhn::Termination::kReachedEnd,
                       exit_time, from_singular);
}

Quaternion parseQuaternion(const std::vector<double>& q, const char* flag) {
  if (q.size() != 4) throw CLI::ValidationError(flag, "expected 4 components w,x,y,z");
  Quaternion out{q[0], q[1], q[2], q[3]};
  const double n = out.norm();
  if (n < 1e-12) throw CLI::ValidationError(flag, "zero quaternion");
  return Quaternion{out.w / n, out.x / n, out.y / n, out.z / n};
}

trisym::TMatrixPath parseTPath(const std::string& spec) {
  if (spec == "identity" || spec == "builtin:identity") return trisym::TMatrixPath::identity();
  const std::string scaled_prefix = "scaled:";
  auto body = spec;
  if (body.rfind("builtin:", 0) == 0) body = body.substr(8);
  if (body.rfind(scaled_prefix, 0) == 0) {
    const auto args = body.substr(scaled_prefix.size());
    const auto comma = args.find(',');
    const double c0 = std::stod(args.substr(0, comma));
    const double c1 = comma == std::string::npos ? 0.0 : std::stod(args.substr(comma + 1));
    return trisym::TMatrixPath::scaled(c0, c1);
  }
  if (body.rfind("file:", 0) == 0) {
    const std::string path = body.substr(5);
    auto table = std::make_shared<std::vector<std::array<double, 4>>>();
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--T", "cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream row(line);
      std::array<double, 4> rec{};
      char comma;
      row >> rec[0] >> comma >> rec[1] >> comma >> rec[2] >> comma >> rec[3];
      table->push_back(rec);
    }
    if (table->size() < 2) throw CLI::ValidationError("--T", "need at least two rows");
    auto value = [table](double R) {
      std::size_t hi = 1;
      while (hi + 1 < table->size() && (*table)[hi][0] < R) ++hi;
      const auto& a = (*table)[hi - 1];
      const auto& b = (*table)[hi];
      const double s = (R - a[0]) / (b[0] - a[0]);
      Eigen::Matrix2d m;
      m << a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2]),
           a[2] + s * (b[2] - a[2]), a[3] + s * (b[3] - a[3]);
      return m;
    };
    auto derivative = [table](double R) {
      std::size_t hi = 1;
      while (hi + 1 < table->size() && (*table)[hi][0] < R) ++hi;
      const auto& a = (*table)[hi - 1];
      const auto& b = (*table)[hi];
      Eigen::Matrix2d m;
      const double dr = b[0] - a[0];
      m << (b[1] - a[1]) / dr, (b[2] - a[2]) / dr, (b[2] - a[2]) / dr, (b[3] - a[3]) / dr;
      return m;
    };
    return trisym::TMatrixPath(value, derivative);
  }
  throw CLI::ValidationError("--T", "expected identity, scaled:c0,c1 or file:path");
}

std::ostream& openOrStdout(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw CLI::ValidationError("--output", "cannot write " + path);
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for G2 geometry with T^2 x SU(2) symmetry"};
  app.require_subcommand(1);
  app.set_config("--config");

  // ---- verify-g2-tables ----------------------------------------------
  auto* tables = app.add_subcommand("verify-g2-tables",
                                    "print the phi0 / *phi0 coefficient tables as CSV");

  // ---- solve-fhn ------------------------------------------------------
  auto* solve = app.add_subcommand("solve-fhn", "integrate the enhanced FHN system");
  double c1 = 0, c2 = 0, alpha = 0, alpha_b = 0, r0 = 0, t_end = 1.0, tol = 1e-10;
  double epsilon = 0;
  std::string diagram = "none", output;
  std::vector<double> initial;
  solve->add_option("--c1", c1, "constant c1");
  solve->add_option("--c2", c2, "constant c2");
  solve->add_option("--diagram", diagram, "delta | one-su2 | kmn:m,n | none");
  solve->add_option("--alpha", alpha, "series coefficient at the singular orbit");
  solve->add_option("--alpha-b", alpha_b, "{1}xSU(2): separate alpha_1 for the b-series");
  solve->add_option("--r0", r0, "K_{m,n}: singular-orbit radius");
  solve->add_option("--epsilon", epsilon, "seed offset from the singular orbit");
  solve->add_option("--t-end", t_end, "integration endpoint");
  solve->add_option("--tol", tol, "integrator relative tolerance");
  solve->add_option("--initial", initial,
                    "diagram=none seed: t0,a,b,x1,x2 (x1 = adot bdot, x2 = adot^2)")
      ->delimiter(',');
  solve->add_option("--output,-o", output, "CSV path (default stdout)");

  // ---- moments --------------------------------------------------------
  auto* mom = app.add_subcommand("moments", "multi-moment maps at a group point");
  std::string solution_path;
  std::vector<double> pq_p{1, 0, 0, 0}, pq_q{1, 0, 0, 0};
  double mom_t = 0;
  mom->add_option("--solution", solution_path, "solution CSV from solve-fhn")->required();
  mom->add_option("--p", pq_p, "quaternion p (w,x,y,z)")->delimiter(',');
  mom->add_option("--q", pq_q, "quaternion q (w,x,y,z)")->delimiter(',');
  mom->add_option("--t", mom_t, "time along the trajectory")->required();

  // ---- trace ----------------------------------------------------------
  auto* trace = app.add_subcommand("trace", "trace a calibrated level set on B");
  std::string trace_kind = "assoc", trace_solution, trace_csv, nu_convention = "fhn";
  double trace_level = 0, trace_step = 0;
  trace->add_option("--solution", trace_solution, "solution CSV")->required();
  trace->add_option("--kind", trace_kind, "assoc | coassoc");
  trace->add_option("--level", trace_level, "level value")->required();
  trace->add_option("--step", trace_step, "continuation step (default span/1000)");
  trace->add_option("--nu-convention", nu_convention, "fhn | bs (coassociative only)");
  trace->add_option("--csv", trace_csv, "write the polyline as CSV");

  // ---- fibration-test -------------------------------------------------
  auto* fib = app.add_subcommand("fibration-test", "alpha-map convexity dichotomy");
  std::string fib_solution;
  fib->add_option("--solution", fib_solution, "solution CSV")->required();

  // ---- render ---------------------------------------------------------
  auto* render = app.add_subcommand("render", "level-set families as CSV + SVG");
  std::string render_solution, render_svg = "levelsets.svg", render_csv = "levelsets.csv";
  std::string render_convention = "fhn";
  std::vector<double> mu_levels, nu_levels;
  double render_bs_c = 0;
  render->add_option("--solution", render_solution, "solution CSV")->required();
  render->add_option("--mu-levels", mu_levels, "associative |mu| levels")->delimiter(',');
  render->add_option("--nu-levels", nu_levels, "coassociative nu levels")->delimiter(',');
  render->add_option("--svg", render_svg, "SVG output path");
  render->add_option("--csv", render_csv, "CSV output path");
  render->add_option("--nu-convention", render_convention, "fhn | bs");
  render->add_option("--bs-c", render_bs_c, "flag the Bryant-Salamon singular fibres for c");

  // ---- tau-flow -------------------------------------------------------
  auto* tau = app.add_subcommand("tau-flow", "integrate the tri-symplectic tau ODE");
  std::string t_spec = "identity", tau_output;
  std::vector<double> tau0_entries;
  double R0 = 0, R1 = 1, tau_tol = 1e-10;
  tau->add_option("--T", t_spec, "identity | scaled:c0,c1 | file:path");
  tau->add_option("--tau0", tau0_entries, "nine entries, row-major")->expected(9)->required();
  tau->add_option("--R0", R0, "initial R")->required();
  tau->add_option("--R1", R1, "final R")->required();
  tau->add_option("--tol", tau_tol, "integrator tolerance");
  tau->add_option("--output,-o", tau_output, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tables) {
      const AlternatingForm phi = standardPhi0();
      const AlternatingForm sp = standardStarPhi0();
      std::cout << "form,indices,coefficient\n";
      for (std::size_t r = 0; r < phi.size(); ++r) {
        const auto idx = phi.indicesAtRank(r);
        std::cout << "phi0," << idx[0] << idx[1] << idx[2] << "," << phi.coeff(r) << "\n";
      }
      for (std::size_t r = 0; r < sp.size(); ++r) {
        const auto idx = sp.indicesAtRank(r);
        std::cout << "star_phi0," << idx[0] << idx[1] << idx[2] << idx[3] << ","
                  << sp.coeff(r) << "\n";
      }
      return 0;
    }

    if (*solve) {
      const fhn::Params params = parseDiagram(diagram, c1, c2);
      std::optional<fhn::Solution> sol;
      if (params.diagram == fhn::Diagram::kNoSingularOrbit) {
        if (initial.size() != 5)
          throw CLI::ValidationError("--initial",
                                     "diagram=none needs --initial t0,a,b,x1,x2");
        const fhn::State seed{initial[0], initial[1], initial[2], initial[3], initial[4]};
        sol = fhn::integrate(params, seed, t_end, tol);
      } else {
        fhn::SingularData data;
        data.alpha = alpha;
        data.alpha_b = alpha_b;
        data.r0 = r0;
        sol = fhn::integrateFromSingularOrbit(params, data, t_end, tol, epsilon);
      }
      std::ofstream file;
      writeSolutionCsv(openOrStdout(file, output), *sol);
      if (sol->termination() == fhn::Termination::kConeExit)
        std::cerr << "cone exit at t = " << sol->coneExitTime() << "\n";
      return 0;
    }

    if (*mom) {
      const fhn::Solution sol = loadSolutionCsv(solution_path);
      const Quaternion p = parseQuaternion(pq_p, "--p");
      const Quaternion q = parseQuaternion(pq_q, "--q");
      const auto values = moments::momentValues(moments::hopfPair(p, q), sol, mom_t);
      json out;
      out["nu"] = values.nu;
      out["theta1"] = {values.theta1(0), values.theta1(1), values.theta1(2)};
      out["theta2"] = {values.theta2(0), values.theta2(1), values.theta2(2)};
      out["mu"] = {values.mu(0), values.mu(1), values.mu(2)};
      out["eta"] = values.eta;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*trace) {
      const fhn::Solution sol = loadSolutionCsv(trace_solution);
      const double step =
          trace_step > 0 ? trace_step : 1e-3 * (sol.tEnd() - sol.tBegin());
      std::vector<tracer::LevelSetCurve> curves;
      if (trace_kind == "assoc") {
        curves = tracer::traceAssociative(sol, trace_level, step);
      } else if (trace_kind == "coassoc") {
        const auto conv = nu_convention == "bs" ? tracer::NuConvention::kBsCase0
                                                : tracer::NuConvention::kFhn;
        curves.push_back(tracer::traceCoassociative(sol, trace_level, step, conv));
      } else {
        throw CLI::ValidationError("--kind", "expected assoc or coassoc");
      }
      std::ofstream csv;
      if (!trace_csv.empty()) {
        csv.open(trace_csv);
        csv << "curve_id,kind,level,theta,t\n" << std::setprecision(12);
      }
      int id = 0;
      for (auto& curve : curves) {
        std::string topology = "-";
        if (curve.kind == tracer::CurveKind::kAssociative) {
          try {
            topology = tracer::classifyAssociative(curve, sol.params());
          } catch (const tracer::UnclassifiableError& e) {
            topology = e.what();
          }
        }
        std::cout << "curve " << id << ": " << curve.points.size()
                  << " points, topology " << topology << "\n";
        if (csv.is_open())
          for (const auto& pt : curve.points)
            csv << id << "," << (curve.kind == tracer::CurveKind::kAssociative ? "assoc"
                                                                               : "coassoc")
                << "," << curve.level << "," << pt.theta << "," << pt.t << "\n";
        ++id;
      }
      return 0;
    }

    if (*fib) {
      const fhn::Solution sol = loadSolutionCsv(fib_solution);
      const auto result = tracer::alphaFibrationTest(sol);
      if (result.status == tracer::FibrationStatus::kGlobalFibration)
        std::cout << "global_fibration\n";
      else
        std::cout << "split_required\n";
      std::cout << "u in [" << result.u_min << ", " << result.u_max << "], v in ["
                << result.v_min << ", " << result.v_max << "]\n";
      return 0;
    }

    if (*render) {
      const fhn::Solution sol = loadSolutionCsv(render_solution);
      const auto conv = render_convention == "bs" ? tracer::NuConvention::kBsCase0
                                                  : tracer::NuConvention::kFhn;
      const auto result = tracer::renderLevelsets(
          sol, mu_levels, nu_levels, render_csv, render_svg, conv,
          render_bs_c > 0 ? std::optional<double>(render_bs_c) : std::nullopt);
      std::cout << result.curve_count << " curves, " << result.point_count << " points -> "
                << render_csv << ", " << render_svg << "\n";
      for (const auto& fiber : result.singular_fibers)
        std::cout << "singular fibre at (" << fiber(0) << ", " << fiber(1) << ", "
                  << fiber(2) << ")\n";
      return 0;
    }

    if (*tau) {
      const trisym::TMatrixPath T = parseTPath(t_spec);
      Eigen::Matrix3d tau0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) tau0(i, j) = tau0_entries[3 * i + j];
      const trisym::TauSolution sol = trisym::integrateTau(T, tau0, R0, R1, tau_tol);
      std::ofstream file;
      std::ostream& out = openOrStdout(file, tau_output);
      out << "R,tau11,tau12,tau13,tau21,tau22,tau23,tau31,tau32,tau33,det_tau,"
             "closedness_residual\n";
      out << std::setprecision(17);
      const double h = 1e-5 * std::max(1.0, std::abs(R1 - R0));
      for (const auto& sample : sol.samples()) {
        const Eigen::Matrix3d m = sol.at(sample.t);
        out << sample.t;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) out << "," << m(i, j);
        double residual = std::numeric_limits<double>::quiet_NaN();
        if (sample.t - h > sol.rBegin() && sample.t + h < sol.rEnd()) {
          residual = 0.0;
          for (int i = 0; i < 3; ++i)
            residual =
                std::max(residual, trisym::closednessResidualTriple(sol, T, i, sample.t, h));
        }
        out << "," << m.determinant() << "," << residual << "\n";
      }
      if (sol.termination() == trisym::TauTermination::kSingularTau)
        std::cerr << "singular tau at R = " << sol.singularR() << "\n";
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
