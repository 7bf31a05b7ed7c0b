#pragma once

#include <memory>
#include <string>

#include "inveldes/scenario.hpp"

namespace inveldes {

/// Parsed run configuration, mirroring the INI-style config file. Values are
/// normalized (defaults filled in); to_string() emits the canonical form.
struct RunConfig {
  struct MeshSection {
    std::string source = "rect";  // rect | hexagon | file
    std::string path;
    double length = 0.35, height = 0.02;
    int nx = 70, ny = 4;
    bool crossed = true;
    double side = 1.0;
    int divisions = 12;
    int refine = 0;
  } mesh;

  struct MaterialSection {
    std::string law = "stvk";  // stvk | neo-hooke
    double lambda = 0.0, mu = 0.0, d1 = 0.0, c1 = 0.0;
    double alpha = 0.0, kappa = 1.0;
    double lambda_phi = 1.0, mu_phi = 1.0;
    double theta0 = 0.0;
    std::string theta0_source = "uniform";  // uniform | presim
  } material;

  struct LoadsSection {
    std::vector<double> body_force = {0.0, 0.0};
    double heat_source = 0.0;
  } loads;

  struct BcEntry {
    std::optional<std::vector<double>> u, r, traction;
    std::optional<double> theta;
    double heat_flux = 0.0;
  };
  std::map<std::string, BcEntry> bc;  // by tag

  struct PinEntry {
    std::string field;  // u | r | fu | fr  (f* apply to iterate's forward checks)
    std::vector<double> at;
    std::string comps;  // e.g. "xy", "y"
  };
  std::vector<PinEntry> pins;

  struct SolverSection {
    int max_iters = 50;
    double abs_tol = 1e-10;
    double rel_tol = 1e-7;
    std::string damping = "backtracking";  // none | backtracking
    int load_steps = 0;
  } solver;

  struct IterationSection {
    int max_outer = 10;
    double shape_tol = -1.0;
    std::string correction = "heat-presim";  // identity | heat-presim
    double presim_kappa = 0.41;
    double presim_theta_init = 0.0;
    double presim_theta_boundary = -50.0;
    double presim_dt = 0.01;
    int presim_steps = 5;
    std::vector<std::string> forward_u_tags;
  } iteration;

  struct OutputSection {
    std::string dir = ".";
    std::string prefix = "run";
    bool vtk = true;
  } output;

  std::string to_string() const;
};

/// Strict INI parse: unknown sections or keys, duplicate keys, and malformed
/// values raise ConfigError with the offending line. The [mesh] section is
/// required.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

/// Everything needed to run a scenario, with the mesh owning storage and the
/// spec pointing at it.
struct RunSetup {
  Mesh mesh;
  ProblemSpec spec;  // mode left at Forward; callers set it per subcommand
  IterationConfig iteration;
  HeatPresimParams presim;
  RunConfig::OutputSection output;
};

/// Builds mesh, problem spec, iteration setup, and presim parameters from a
/// parsed config. `extra_refine` applies additional uniform refinements.
std::unique_ptr<RunSetup> build_setup(const RunConfig& cfg, int extra_refine = 0);

}  // namespace inveldes
