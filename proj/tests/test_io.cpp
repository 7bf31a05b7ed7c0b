#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "inveldes/cli.hpp"
#include "inveldes/config.hpp"
#include "inveldes/vtk.hpp"

using namespace inveldes;

namespace {

const char* kBeamConfig = R"(
[mesh]
source = rect
length = 0.35
height = 0.02
nx = 8
ny = 2

[material]
law = stvk
lambda = 2e6
mu = 0.5e6

[loads]
body_force = 0 -2000

[bc.left]
u = 0 0
r = 0 0
theta = 0

[bc.right]
r = 0 0
theta = 0

[bc.top]
r = 0 0
theta = 0

[bc.bottom]
r = 0 0
theta = 0

[output]
prefix = beam_test
)";

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Minimal validating legacy-VTK reader used as the round-trip oracle for the
// writer. Tracks the active POINT_DATA / CELL_DATA block to size arrays.
struct VtkData {
  std::vector<double> points;
  std::vector<int> cells;
  std::map<std::string, std::vector<double>> arrays;
};

VtkData read_vtk(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  VtkData d;
  std::string tok;
  int current_n = 0;
  auto read_doubles = [&](std::vector<double>& out, std::size_t count) {
    out.resize(count);
    for (double& v : out) REQUIRE((in >> v));
  };
  while (in >> tok) {
    if (tok == "POINTS") {
      int n;
      std::string type;
      REQUIRE((in >> n >> type));
      read_doubles(d.points, static_cast<std::size_t>(n) * 3);
    } else if (tok == "CELLS") {
      int m, total;
      REQUIRE((in >> m >> total));
      d.cells.resize(total);
      for (int& v : d.cells) REQUIRE((in >> v));
    } else if (tok == "POINT_DATA" || tok == "CELL_DATA") {
      REQUIRE((in >> current_n));
    } else if (tok == "VECTORS") {
      std::string name, type;
      REQUIRE((in >> name >> type));
      read_doubles(d.arrays[name], static_cast<std::size_t>(current_n) * 3);
    } else if (tok == "SCALARS") {
      std::string name, type, comps, lut, lutname;
      REQUIRE((in >> name >> type >> comps >> lut >> lutname));
      read_doubles(d.arrays[name], current_n);
    } else if (tok == "TENSORS") {
      std::string name, type;
      REQUIRE((in >> name >> type));
      read_doubles(d.arrays[name], static_cast<std::size_t>(current_n) * 9);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("config parsing: reference beam values") {
  const RunConfig cfg = parse_config_text(kBeamConfig);
  CHECK(cfg.material.lambda == doctest::Approx(2e6));
  CHECK(cfg.material.mu == doctest::Approx(0.5e6));
  CHECK(cfg.loads.body_force[1] == doctest::Approx(-2000.0));
  CHECK(cfg.mesh.length == doctest::Approx(0.35));
  CHECK(cfg.bc.at("left").u.has_value());
  CHECK(!cfg.bc.at("right").u.has_value());
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config_text("[material]\nlambda = 1\n"), ConfigError);  // no [mesh]
  CHECK_THROWS_WITH_AS(parse_config_text("[mesh]\nnx = 4\nnx = 5\n"),
                       doctest::Contains("duplicate key 'nx'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[mesh]\nwhatever = 1\n"),
                       doctest::Contains("unknown key 'whatever'"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[mesh]\nnx = four\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[nonsense]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[mesh]\nsource = file\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("x = 1\n"), ConfigError);  // key outside section
}

TEST_CASE("config round trip: parse(write(parse(x))) == parse(x)") {
  const RunConfig a = parse_config_text(kBeamConfig);
  const RunConfig b = parse_config_text(a.to_string());
  CHECK(a.to_string() == b.to_string());
}

TEST_CASE("build_setup produces a consistent problem") {
  const RunConfig cfg = parse_config_text(kBeamConfig);
  const auto setup = build_setup(cfg);
  CHECK(setup->mesh.num_elements() == 4 * 8 * 2);  // crossed cells by default
  CHECK(setup->spec.mesh == &setup->mesh);
  CHECK(setup->spec.material.lambda == doctest::Approx(2e6));
  CHECK(setup->spec.bc.size() == 4);
  const auto refined = build_setup(cfg, 1);
  CHECK(refined->mesh.num_elements() == 4 * setup->mesh.num_elements());
}

TEST_CASE("vtk writer: parseable, deterministic, round-trippable") {
  std::istringstream in(
      "dim 2\nnodes 3\n0 0\n1 0\n0 1\nelements 1\n0 1 2\nfacets 3\nw 0 1\nw 1 2\nw 2 0\n");
  const Mesh mesh = Mesh::parse(in);
  FieldOutput f;
  f.u = Vector::Zero(6);
  f.u[2] = 0.25;  // u_x of node 1
  f.r = Vector::Zero(6);
  f.theta = Vector::Zero(3);
  f.theta[1] = -3.5;
  f.theta0 = Vector::Zero(3);
  f.cauchy = {1.0, 0.5, 0.5, -2.0};
  f.snorm = Vector::Zero(1);
  f.snorm[0] = 2.125;

  write_vtk(mesh, PositionVariant::Reference, f, "unit_tri.vtk");
  const std::string text1 = slurp("unit_tri.vtk");
  write_vtk(mesh, PositionVariant::Reference, f, "unit_tri_b.vtk");
  CHECK(text1 == slurp("unit_tri_b.vtk"));  // byte-identical reruns

  const VtkData d = read_vtk("unit_tri.vtk");
  REQUIRE(d.points.size() == 9);
  CHECK(d.points[3] == doctest::Approx(1.0));
  REQUIRE(d.cells.size() == 4);
  CHECK(d.cells[0] == 3);
  REQUIRE(d.arrays.count("u"));
  CHECK(d.arrays.at("u")[3] == doctest::Approx(0.25));
  REQUIRE(d.arrays.count("theta"));
  CHECK(d.arrays.at("theta")[1] == doctest::Approx(-3.5));
  REQUIRE(d.arrays.count("sigma"));
  CHECK(d.arrays.at("sigma")[0] == doctest::Approx(1.0));
  CHECK(d.arrays.at("sigma")[1] == doctest::Approx(0.5));
  CHECK(d.arrays.at("sigma")[4] == doctest::Approx(-2.0));
  CHECK(d.arrays.at("sigma")[8] == doctest::Approx(0.0));
  REQUIRE(d.arrays.count("sigma_snorm"));
  CHECK(d.arrays.at("sigma_snorm")[0] == doctest::Approx(2.125));

  // equilibrium positions shift by u
  write_vtk(mesh, PositionVariant::Equilibrium, f, "unit_tri_eq.vtk");
  const VtkData de = read_vtk("unit_tri_eq.vtk");
  CHECK(de.points[3] == doctest::Approx(1.25));

  std::remove("unit_tri.vtk");
  std::remove("unit_tri_b.vtk");
  std::remove("unit_tri_eq.vtk");
}

TEST_CASE("vtk writer rejects inconsistent sizes") {
  std::istringstream in(
      "dim 2\nnodes 3\n0 0\n1 0\n0 1\nelements 1\n0 1 2\nfacets 3\nw 0 1\nw 1 2\nw 2 0\n");
  const Mesh mesh = Mesh::parse(in);
  FieldOutput f;
  f.u = Vector::Zero(4);  // wrong
  f.r = Vector::Zero(6);
  f.theta = Vector::Zero(3);
  f.theta0 = Vector::Zero(3);
  f.cauchy = {0, 0, 0, 0};
  f.snorm = Vector::Zero(1);
  CHECK_THROWS_AS(write_vtk(mesh, PositionVariant::Reference, f, "bad.vtk"), IoError);
}

TEST_CASE("cli: forward run end to end, usage errors, check") {
  namespace fs = std::filesystem;
  fs::create_directories("cli_test_out");
  {
    std::ofstream cfg("cli_test_out/beam.cfg");
    cfg << kBeamConfig;
  }

  SUBCASE("forward run writes outputs and exits 0") {
    const char* argv[] = {"inveldes", "forward", "cli_test_out/beam.cfg", "--output-dir",
                          "cli_test_out"};
    CHECK(cli_main(5, argv) == 0);
    CHECK(fs::exists("cli_test_out/beam_test_reference.vtk"));
    CHECK(fs::exists("cli_test_out/beam_test_initial.vtk"));
    CHECK(fs::exists("cli_test_out/beam_test_equilibrium.vtk"));

    // the node with the largest displacement in the written file is the
    // free-end corner of the beam
    const VtkData d = read_vtk("cli_test_out/beam_test_reference.vtk");
    const auto& u = d.arrays.at("u");
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t i = 0; i * 3 < u.size(); ++i) {
      const double n2 = u[3 * i] * u[3 * i] + u[3 * i + 1] * u[3 * i + 1];
      if (n2 > best_norm) {
        best_norm = n2;
        best = i;
      }
    }
    CHECK(d.points[3 * best] == doctest::Approx(0.35));
    CHECK(u[3 * best + 1] < 0.0);
  }

  SUBCASE("inverse run exits 0") {
    std::ofstream cfg("cli_test_out/beam_inv.cfg");
    cfg << R"(
[mesh]
source = rect
length = 0.35
height = 0.02
nx = 8
ny = 2

[material]
lambda = 2e6
mu = 0.5e6

[loads]
body_force = 0 -2000

[bc.left]
u = 0 0
r = 0 0
theta = 0

[bc.right]
u = 0 0
theta = 0

[bc.top]
u = 0 0
theta = 0

[bc.bottom]
u = 0 0
theta = 0

[output]
prefix = beam_inv
dir = cli_test_out
)";
    cfg.close();
    const char* argv[] = {"inveldes", "inverse", "cli_test_out/beam_inv.cfg"};
    CHECK(cli_main(3, argv) == 0);
    CHECK(fs::exists("cli_test_out/beam_inv_initial.vtk"));
  }

  SUBCASE("bad subcommand exits 1") {
    const char* argv[] = {"inveldes", "badflag"};
    CHECK(cli_main(2, argv) == 1);
  }

  SUBCASE("missing config exits 1") {
    const char* argv[] = {"inveldes", "forward"};
    CHECK(cli_main(2, argv) == 1);
    const char* argv2[] = {"inveldes", "forward", "cli_test_out/nope.cfg"};
    CHECK(cli_main(3, argv2) == 1);
  }

  SUBCASE("check subcommand passes") {
    const char* argv[] = {"inveldes", "check"};
    CHECK(cli_main(2, argv) == 0);
  }

  SUBCASE("non-convergence exits 2") {
    std::string text = kBeamConfig;
    text += "\n[solver]\nmax_iters = 1\nload_steps = 1\n";
    std::ofstream cfg("cli_test_out/starved.cfg");
    cfg << text;
    cfg.close();
    const char* argv[] = {"inveldes", "forward", "cli_test_out/starved.cfg", "--output-dir",
                          "cli_test_out"};
    CHECK(cli_main(5, argv) == 2);
  }

  SUBCASE("heat-init and iterate run on the free body") {
    std::ofstream cfg("cli_test_out/body.cfg");
    cfg << R"(
[mesh]
source = hexagon
side = 1.0
divisions = 4

[material]
law = stvk
lambda = 0.01
mu = 100.0
alpha = 1.0
kappa = 0.2
theta0_source = presim

[bc.rim]
u = 0 0
theta = -50

[pins]
r0 = 0 1 x
r1 = 1 0 y
r2 = -1 0 y
fu0 = 0 1 x
fu1 = 1 0 y
fu2 = -1 0 y

[iteration]
max_outer = 4
correction = heat-presim

[output]
prefix = body
dir = cli_test_out
)";
    cfg.close();
    const char* heat[] = {"inveldes", "heat-init", "cli_test_out/body.cfg"};
    CHECK(cli_main(3, heat) == 0);
    CHECK(fs::exists("cli_test_out/body_theta0.vtk"));
    const char* iter[] = {"inveldes", "iterate", "cli_test_out/body.cfg", "--load-steps", "5"};
    CHECK(cli_main(5, iter) == 0);
    CHECK(fs::exists("cli_test_out/body_initial.vtk"));
  }

  SUBCASE("mesh refinement flag") {
    const char* argv[] = {"inveldes", "forward", "cli_test_out/beam.cfg", "--output-dir",
                          "cli_test_out", "--mesh-refine", "1"};
    CHECK(cli_main(7, argv) == 0);
  }

  fs::remove_all("cli_test_out");
}
