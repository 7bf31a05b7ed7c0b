#include "inveldes/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "inveldes/config.hpp"
#include "inveldes/log.hpp"
#include "inveldes/selfcheck.hpp"
#include "inveldes/vtk.hpp"

namespace inveldes {

namespace {

const char* kUsage =
    "usage: inveldes <forward|inverse|iterate|heat-init|check> <config>\n"
    "               [--output-dir D] [--mesh-refine N] [--load-steps N]\n"
    "\n"
    "  forward    solve for the equilibrium shape of a given initial shape\n"
    "  inverse    recover the initial shape producing a prescribed equilibrium shape\n"
    "  iterate    outer loop alternating field correction, forward check, inverse solve\n"
    "  heat-init  transient heat conduction producing the reference temperature field\n"
    "  check      run the built-in constitutive and Jacobian consistency checks\n"
    "\n"
    "  environment: INVELDES_LOG = error | info | debug\n";

struct Args {
  std::string subcommand;
  std::string config;
  std::optional<std::string> output_dir;
  int mesh_refine = 0;
  std::optional<int> load_steps;
};

Args parse_args(int argc, const char* const* argv) {
  Args a;
  if (argc < 2) throw ConfigError("missing subcommand");
  a.subcommand = argv[1];
  const bool known = a.subcommand == "forward" || a.subcommand == "inverse" ||
                     a.subcommand == "iterate" || a.subcommand == "heat-init" ||
                     a.subcommand == "check";
  if (!known) throw ConfigError("unknown subcommand '" + a.subcommand + "'");
  int i = 2;
  auto need_value = [&](const std::string& flag) -> std::string {
    if (i + 1 >= argc) throw ConfigError(flag + " requires a value");
    return argv[++i];
  };
  for (; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--output-dir")
      a.output_dir = need_value(arg);
    else if (arg == "--mesh-refine")
      a.mesh_refine = std::stoi(need_value(arg));
    else if (arg == "--load-steps")
      a.load_steps = std::stoi(need_value(arg));
    else if (!arg.empty() && arg[0] == '-')
      throw ConfigError("unknown option '" + arg + "'");
    else if (a.config.empty())
      a.config = arg;
    else
      throw ConfigError("unexpected argument '" + arg + "'");
  }
  if (a.subcommand != "check" && a.config.empty())
    throw ConfigError("subcommand '" + a.subcommand + "' requires a config file");
  return a;
}

std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void print_report(const std::string& what, const SolveReport& rep) {
  std::cout << what << ": " << (rep.converged ? "converged" : "NOT converged") << " in "
            << rep.iterations << " iterations, residual "
            << g6(rep.residual_history.empty() ? 0.0 : rep.residual_history.back()) << " ("
            << rep.step_rejections << " step rejections)\n";
}

// Displacements at the nodes nearest the bounding-box corners, plus the
// overall extremes, as a compact result summary.
void print_corners(const Mesh& mesh, const Vector& field, const char* name) {
  const int d = mesh.dim;
  if (d != 2) return;
  const Eigen::VectorXd lo = mesh.bbox_min(), hi = mesh.bbox_max();
  const double xs[2] = {lo[0], hi[0]}, ys[2] = {lo[1], hi[1]};
  for (double cx : xs)
    for (double cy : ys) {
      Eigen::VectorXd p(2);
      p << cx, cy;
      const int node = nearest_node(mesh, p);
      std::cout << "  " << name << " at corner (" << g6(cx) << ", " << g6(cy) << "): ("
                << g6(field[2 * node]) << ", " << g6(field[2 * node + 1]) << ")\n";
    }
  int arg = 0;
  double best = -1.0;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const double n2 = std::hypot(field[2 * i], field[2 * i + 1]);
    if (n2 > best) {
      best = n2;
      arg = i;
    }
  }
  std::cout << "  max |" << name << "| = " << g6(best) << " at node " << arg << " ("
            << g6(mesh.coords[2 * static_cast<std::size_t>(arg)]) << ", "
            << g6(mesh.coords[2 * static_cast<std::size_t>(arg) + 1]) << ")\n";
}

void write_fields(const Mesh& mesh, const RunConfig::OutputSection& output,
                  const std::string& outdir, const SolveResult& res, const Vector& theta0) {
  if (!output.vtk) return;
  FieldOutput f;
  f.u = res.u;
  f.r = res.r;
  f.theta = res.theta;
  f.theta0 = theta0;
  f.cauchy = res.cauchy;
  f.snorm = res.snorm;
  std::filesystem::create_directories(outdir);
  const std::string base = outdir + "/" + output.prefix;
  write_vtk(mesh, PositionVariant::Reference, f, base + "_reference.vtk");
  write_vtk(mesh, PositionVariant::Initial, f, base + "_initial.vtk");
  write_vtk(mesh, PositionVariant::Equilibrium, f, base + "_equilibrium.vtk");
  std::cout << "wrote " << base << "_{reference,initial,equilibrium}.vtk\n";
}

int run(const Args& args) {
  if (args.subcommand == "check") return run_self_checks(std::cout) ? 0 : 1;

  const RunConfig cfg = parse_config(args.config);
  log_info("parsed " + args.config + " (mesh " + cfg.mesh.source + ", law " + cfg.material.law +
           ", " + std::to_string(cfg.bc.size()) + " tagged boundaries)");
  log_debug("effective configuration with defaults applied:\n" + cfg.to_string());
  auto setup = build_setup(cfg, args.mesh_refine);
  if (args.load_steps) setup->spec.load_steps = *args.load_steps;
  const std::string outdir = args.output_dir.value_or(setup->output.dir);

  if (args.subcommand == "heat-init") {
    const Vector theta0 = heat_presim(setup->mesh, setup->presim);
    std::cout << "heat presimulation: " << setup->presim.steps << " steps, theta0 range ["
              << g6(theta0.minCoeff()) << ", " << g6(theta0.maxCoeff()) << "]\n";
    if (setup->output.vtk) {
      FieldOutput f;
      const int nn = setup->mesh.num_nodes(), ne = setup->mesh.num_elements(), d = setup->mesh.dim;
      f.u = Vector::Zero(static_cast<Eigen::Index>(nn) * d);
      f.r = f.u;
      f.theta = theta0;
      f.theta0 = theta0;
      f.cauchy.assign(static_cast<std::size_t>(ne) * d * d, 0.0);
      f.snorm = Vector::Zero(ne);
      std::filesystem::create_directories(outdir);
      const std::string path = outdir + "/" + setup->output.prefix + "_theta0.vtk";
      write_vtk(setup->mesh, PositionVariant::Reference, f, path);
      std::cout << "wrote " << path << "\n";
    }
    return 0;
  }

  if (args.subcommand == "forward" || args.subcommand == "inverse") {
    setup->spec.mode = args.subcommand == "forward" ? Mode::Forward : Mode::Inverse;
    const SolveResult res =
        setup->spec.mode == Mode::Forward ? run_forward(setup->spec) : run_inverse(setup->spec);
    print_report(args.subcommand + " solve", res.report);
    print_corners(setup->mesh, res.u, "u");
    print_corners(setup->mesh, res.r, "r");
    if (setup->spec.mode == Mode::Inverse)
      std::cout << "  boundary traction residual: " << g6(res.boundary_traction_residual) << "\n";
    write_fields(setup->mesh, setup->output, outdir, res, setup->spec.initial_state.theta0);
    return 0;
  }

  // iterate
  setup->spec.mode = Mode::Inverse;
  const IterationResult res = run_iteration(setup->spec, setup->iteration);
  std::cout << "outer iteration: " << (res.converged ? "converged" : "stopped") << " after "
            << res.mismatch_history.size() << " forward checks\n";
  for (std::size_t k = 0; k < res.mismatch_history.size(); ++k)
    std::cout << "  check " << k + 1 << ": shape mismatch " << g6(res.mismatch_history[k]) << "\n";
  print_corners(setup->mesh, res.r, "r");
  if (res.last_forward.x.size() > 0) {
    SolveResult fields = res.last_forward;
    fields.r = res.r;
    write_fields(setup->mesh, setup->output, outdir, fields, res.state.theta0);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run(parse_args(argc, argv));
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n" << kUsage;
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace inveldes
