#include "inveldes/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace inveldes {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s;
}

struct RawEntry {
  std::string value;
  std::size_t line;
};
using RawSection = std::vector<std::pair<std::string, RawEntry>>;  // ordered

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class SectionReader {
public:
  SectionReader(const std::string& name, const RawSection* raw) : name_(name) {
    if (raw)
      for (const auto& [k, v] : *raw) entries_.emplace(k, v);
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& def) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return def;
    used_.insert(key);
    return it->second.value;
  }
  double num(const std::string& key, double def) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return def;
    used_.insert(key);
    return parse_num(it->second);
  }
  int integer(const std::string& key, int def) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return def;
    used_.insert(key);
    const double v = parse_num(it->second);
    if (v != static_cast<int>(v)) fail(it->second.line, "expected an integer for '" + key + "'");
    return static_cast<int>(v);
  }
  bool flag(const std::string& key, bool def) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return def;
    used_.insert(key);
    const std::string& v = it->second.value;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(it->second.line, "expected true/false for '" + key + "'");
    return def;
  }
  std::vector<double> numbers(const std::string& key, const std::vector<double>& def) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return def;
    used_.insert(key);
    std::istringstream iss(it->second.value);
    std::vector<double> out;
    std::string tok;
    while (iss >> tok) {
      RawEntry e{tok, it->second.line};
      out.push_back(parse_num(e));
    }
    if (out.empty()) fail(it->second.line, "expected numbers for '" + key + "'");
    return out;
  }
  std::vector<std::string> words(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return {};
    used_.insert(key);
    std::istringstream iss(it->second.value);
    return {std::istream_iterator<std::string>(iss), {}};
  }

  void finish() const {
    for (const auto& [k, v] : entries_)
      if (!used_.count(k))
        throw ConfigError("unknown key '" + k + "' in section [" + name_ + "] (line " +
                          std::to_string(v.line) + ")");
  }

  const std::map<std::string, RawEntry>& entries() const { return entries_; }

private:
  double parse_num(const RawEntry& e) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(e.value, &pos);
    } catch (const std::exception&) {
      fail(e.line, "malformed number '" + e.value + "'");
    }
    if (pos != e.value.size()) fail(e.line, "malformed number '" + e.value + "'");
    if (!std::isfinite(v)) fail(e.line, "value must be finite");
    return v;
  }
  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw ConfigError("[" + name_ + "]: " + what + " (line " + std::to_string(line) + ")");
  }

  std::string name_;
  std::map<std::string, RawEntry> entries_;
  mutable std::set<std::string> used_;
};

RunConfig build_config(const std::map<std::string, RawSection>& sections) {
  static const std::set<std::string> known = {"mesh", "material", "loads", "solver",
                                              "iteration", "output", "pins"};
  for (const auto& [name, _] : sections)
    if (!known.count(name) && name.rfind("bc.", 0) != 0)
      throw ConfigError("unknown section [" + name + "]");
  if (!sections.count("mesh")) throw ConfigError("missing required section [mesh]");

  auto section = [&](const std::string& n) -> const RawSection* {
    auto it = sections.find(n);
    return it == sections.end() ? nullptr : &it->second;
  };

  RunConfig c;
  {
    SectionReader s("mesh", section("mesh"));
    c.mesh.source = s.str("source", c.mesh.source);
    if (c.mesh.source != "rect" && c.mesh.source != "hexagon" && c.mesh.source != "file")
      throw ConfigError("[mesh]: source must be rect, hexagon, or file");
    c.mesh.path = s.str("path", "");
    c.mesh.length = s.num("length", c.mesh.length);
    c.mesh.height = s.num("height", c.mesh.height);
    c.mesh.nx = s.integer("nx", c.mesh.nx);
    c.mesh.ny = s.integer("ny", c.mesh.ny);
    c.mesh.crossed = s.flag("crossed", c.mesh.crossed);
    c.mesh.side = s.num("side", c.mesh.side);
    c.mesh.divisions = s.integer("divisions", c.mesh.divisions);
    c.mesh.refine = s.integer("refine", c.mesh.refine);
    if (c.mesh.source == "file" && c.mesh.path.empty())
      throw ConfigError("[mesh]: source=file requires a path");
    s.finish();
  }
  {
    SectionReader s("material", section("material"));
    c.material.law = s.str("law", c.material.law);
    if (c.material.law != "stvk" && c.material.law != "neo-hooke")
      throw ConfigError("[material]: law must be stvk or neo-hooke");
    c.material.lambda = s.num("lambda", c.material.lambda);
    c.material.mu = s.num("mu", c.material.mu);
    c.material.d1 = s.num("d1", c.material.d1);
    c.material.c1 = s.num("c1", c.material.c1);
    c.material.alpha = s.num("alpha", c.material.alpha);
    c.material.kappa = s.num("kappa", c.material.kappa);
    c.material.lambda_phi = s.num("lambda_phi", c.material.lambda_phi);
    c.material.mu_phi = s.num("mu_phi", c.material.mu_phi);
    c.material.theta0 = s.num("theta0", c.material.theta0);
    c.material.theta0_source = s.str("theta0_source", c.material.theta0_source);
    if (c.material.theta0_source != "uniform" && c.material.theta0_source != "presim")
      throw ConfigError("[material]: theta0_source must be uniform or presim");
    s.finish();
  }
  {
    SectionReader s("loads", section("loads"));
    c.loads.body_force = s.numbers("body_force", c.loads.body_force);
    c.loads.heat_source = s.num("heat_source", c.loads.heat_source);
    s.finish();
  }
  {
    SectionReader s("solver", section("solver"));
    c.solver.max_iters = s.integer("max_iters", c.solver.max_iters);
    c.solver.abs_tol = s.num("abs_tol", c.solver.abs_tol);
    c.solver.rel_tol = s.num("rel_tol", c.solver.rel_tol);
    c.solver.damping = s.str("damping", c.solver.damping);
    if (c.solver.damping != "none" && c.solver.damping != "backtracking")
      throw ConfigError("[solver]: damping must be none or backtracking");
    c.solver.load_steps = s.integer("load_steps", c.solver.load_steps);
    s.finish();
  }
  {
    SectionReader s("iteration", section("iteration"));
    c.iteration.max_outer = s.integer("max_outer", c.iteration.max_outer);
    c.iteration.shape_tol = s.num("shape_tol", c.iteration.shape_tol);
    c.iteration.correction = s.str("correction", c.iteration.correction);
    if (c.iteration.correction != "identity" && c.iteration.correction != "heat-presim")
      throw ConfigError("[iteration]: correction must be identity or heat-presim");
    c.iteration.presim_kappa = s.num("presim_kappa", c.iteration.presim_kappa);
    c.iteration.presim_theta_init = s.num("presim_theta_init", c.iteration.presim_theta_init);
    c.iteration.presim_theta_boundary =
        s.num("presim_theta_boundary", c.iteration.presim_theta_boundary);
    c.iteration.presim_dt = s.num("presim_dt", c.iteration.presim_dt);
    c.iteration.presim_steps = s.integer("presim_steps", c.iteration.presim_steps);
    c.iteration.forward_u_tags = s.words("forward_u_tags");
    s.finish();
  }
  {
    SectionReader s("output", section("output"));
    c.output.dir = s.str("dir", c.output.dir);
    c.output.prefix = s.str("prefix", c.output.prefix);
    c.output.vtk = s.flag("vtk", c.output.vtk);
    s.finish();
  }
  {
    SectionReader s("pins", section("pins"));
    for (const auto& [key, e] : s.entries()) {
      std::string field;
      for (const char* f : {"fu", "fr", "u", "r"})
        if (key.rfind(f, 0) == 0) {
          field = f;
          break;
        }
      bool numbered = !field.empty() && key.size() > field.size();
      for (std::size_t i = field.size(); numbered && i < key.size(); ++i)
        numbered = std::isdigit(static_cast<unsigned char>(key[i]));
      if (!numbered)
        throw ConfigError("[pins]: keys must look like u0, r0, fu0, fr0 (got '" + key +
                          "', line " + std::to_string(e.line) + ")");
      std::istringstream iss(e.value);
      std::vector<std::string> toks{std::istream_iterator<std::string>(iss), {}};
      if (toks.size() < 2)
        throw ConfigError("[pins]: expected '<x> <y> [<z>] <components>' (line " +
                          std::to_string(e.line) + ")");
      RunConfig::PinEntry pin;
      pin.field = field;
      pin.comps = toks.back();
      for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        try {
          pin.at.push_back(std::stod(toks[i]));
        } catch (const std::exception&) {
          throw ConfigError("[pins]: malformed coordinate '" + toks[i] + "' (line " +
                            std::to_string(e.line) + ")");
        }
      }
      for (char ch : pin.comps)
        if (ch != 'x' && ch != 'y' && ch != 'z')
          throw ConfigError("[pins]: components must be a combination of xyz (line " +
                            std::to_string(e.line) + ")");
      c.pins.push_back(std::move(pin));
    }
    // pins are consumed directly from entries(); mark everything as used
    for (const auto& [key, e] : s.entries()) (void)s.str(key, "");
    s.finish();
  }

  for (const auto& [name, raw] : sections) {
    if (name.rfind("bc.", 0) != 0) continue;
    const std::string tag = name.substr(3);
    if (tag.empty()) throw ConfigError("empty tag in section [" + name + "]");
    SectionReader s(name, &raw);
    RunConfig::BcEntry e;
    if (s.has("u")) e.u = s.numbers("u", {});
    if (s.has("r")) e.r = s.numbers("r", {});
    if (s.has("traction")) e.traction = s.numbers("traction", {});
    if (s.has("theta")) e.theta = s.num("theta", 0.0);
    e.heat_flux = s.num("heat_flux", 0.0);
    s.finish();
    c.bc[tag] = std::move(e);
  }
  return c;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  std::map<std::string, RawSection> sections;
  std::istringstream in(text);
  std::string line, current;
  std::size_t lineno = 0;
  std::set<std::string> seen_keys;

  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of(";#");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ": malformed section header (line " + std::to_string(lineno) + ")");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty())
        throw ConfigError(origin + ": empty section name (line " + std::to_string(lineno) + ")");
      sections[current];  // allow re-opening, duplicate keys are caught below
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ": expected 'key = value' (line " + std::to_string(lineno) + ")");
    if (current.empty())
      throw ConfigError(origin + ": key outside any section (line " + std::to_string(lineno) + ")");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ": empty key (line " + std::to_string(lineno) + ")");
    if (!seen_keys.insert(current + "\n" + key).second)
      throw ConfigError(origin + ": duplicate key '" + key + "' in section [" + current +
                        "] (line " + std::to_string(lineno) + ")");
    sections[current].emplace_back(key, RawEntry{value, lineno});
  }
  return build_config(sections);
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string RunConfig::to_string() const {
  std::ostringstream o;
  o << "[mesh]\n";
  o << "source = " << mesh.source << "\n";
  if (!mesh.path.empty()) o << "path = " << mesh.path << "\n";
  o << "length = " << fmt(mesh.length) << "\nheight = " << fmt(mesh.height) << "\n";
  o << "nx = " << mesh.nx << "\nny = " << mesh.ny << "\n";
  o << "crossed = " << (mesh.crossed ? "true" : "false") << "\n";
  o << "side = " << fmt(mesh.side) << "\ndivisions = " << mesh.divisions << "\n";
  o << "refine = " << mesh.refine << "\n";
  o << "\n[material]\n";
  o << "law = " << material.law << "\n";
  o << "lambda = " << fmt(material.lambda) << "\nmu = " << fmt(material.mu) << "\n";
  o << "d1 = " << fmt(material.d1) << "\nc1 = " << fmt(material.c1) << "\n";
  o << "alpha = " << fmt(material.alpha) << "\nkappa = " << fmt(material.kappa) << "\n";
  o << "lambda_phi = " << fmt(material.lambda_phi) << "\nmu_phi = " << fmt(material.mu_phi) << "\n";
  o << "theta0 = " << fmt(material.theta0) << "\n";
  o << "theta0_source = " << material.theta0_source << "\n";
  o << "\n[loads]\n";
  o << "body_force = " << fmt_list(loads.body_force) << "\n";
  o << "heat_source = " << fmt(loads.heat_source) << "\n";
  o << "\n[solver]\n";
  o << "max_iters = " << solver.max_iters << "\n";
  o << "abs_tol = " << fmt(solver.abs_tol) << "\nrel_tol = " << fmt(solver.rel_tol) << "\n";
  o << "damping = " << solver.damping << "\n";
  o << "load_steps = " << solver.load_steps << "\n";
  o << "\n[iteration]\n";
  o << "max_outer = " << iteration.max_outer << "\n";
  o << "shape_tol = " << fmt(iteration.shape_tol) << "\n";
  o << "correction = " << iteration.correction << "\n";
  o << "presim_kappa = " << fmt(iteration.presim_kappa) << "\n";
  o << "presim_theta_init = " << fmt(iteration.presim_theta_init) << "\n";
  o << "presim_theta_boundary = " << fmt(iteration.presim_theta_boundary) << "\n";
  o << "presim_dt = " << fmt(iteration.presim_dt) << "\n";
  o << "presim_steps = " << iteration.presim_steps << "\n";
  if (!iteration.forward_u_tags.empty()) {
    o << "forward_u_tags =";
    for (const auto& t : iteration.forward_u_tags) o << " " << t;
    o << "\n";
  }
  o << "\n[output]\n";
  o << "dir = " << output.dir << "\nprefix = " << output.prefix << "\n";
  o << "vtk = " << (output.vtk ? "true" : "false") << "\n";
  if (!pins.empty()) {
    o << "\n[pins]\n";
    std::map<std::string, int> counters;
    for (const auto& p : pins) {
      o << p.field << counters[p.field]++ << " = ";
      for (double v : p.at) o << fmt(v) << " ";
      o << p.comps << "\n";
    }
  }
  for (const auto& [tag, e] : bc) {
    o << "\n[bc." << tag << "]\n";
    if (e.u) o << "u = " << fmt_list(*e.u) << "\n";
    if (e.r) o << "r = " << fmt_list(*e.r) << "\n";
    if (e.theta) o << "theta = " << fmt(*e.theta) << "\n";
    if (e.traction) o << "traction = " << fmt_list(*e.traction) << "\n";
    o << "heat_flux = " << fmt(e.heat_flux) << "\n";
  }
  return o.str();
}

std::unique_ptr<RunSetup> build_setup(const RunConfig& cfg, int extra_refine) {
  auto setup = std::make_unique<RunSetup>();

  if (cfg.mesh.source == "rect")
    setup->mesh = Mesh::rectangle(cfg.mesh.length, cfg.mesh.height, cfg.mesh.nx, cfg.mesh.ny,
                                  cfg.mesh.crossed);
  else if (cfg.mesh.source == "hexagon")
    setup->mesh = Mesh::hexagon(cfg.mesh.side, cfg.mesh.divisions);
  else
    setup->mesh = Mesh::load(cfg.mesh.path);
  for (int i = 0; i < cfg.mesh.refine + extra_refine; ++i) setup->mesh = setup->mesh.refined();

  const Mesh& mesh = setup->mesh;
  const int d = mesh.dim;

  ProblemSpec& spec = setup->spec;
  spec.mesh = &mesh;
  spec.material.law = cfg.material.law == "stvk" ? Law::StVenantKirchhoff : Law::NeoHooke;
  spec.material.lambda = cfg.material.lambda;
  spec.material.mu = cfg.material.mu;
  spec.material.d1 = cfg.material.d1;
  spec.material.c1 = cfg.material.c1;
  spec.material.alpha = cfg.material.alpha;
  spec.material.kappa = cfg.material.kappa;
  spec.material.lambda_phi = cfg.material.lambda_phi;
  spec.material.mu_phi = cfg.material.mu_phi;
  spec.material.validate();

  if (static_cast<int>(cfg.loads.body_force.size()) != d)
    throw ConfigError("[loads]: body_force needs " + std::to_string(d) + " components");
  spec.loads.body_force =
      Eigen::Map<const Eigen::VectorXd>(cfg.loads.body_force.data(), d);
  spec.loads.heat_source = cfg.loads.heat_source;

  for (const auto& [tag, e] : cfg.bc) {
    if (!mesh.has_tag(tag)) throw ConfigError("[bc." + tag + "]: mesh has no such tag");
    TagBC t;
    auto vec = [&](const std::vector<double>& v, const char* what) {
      if (static_cast<int>(v.size()) != d)
        throw ConfigError("[bc." + tag + "]: " + what + " needs " + std::to_string(d) +
                          " components");
      return Eigen::Map<const Eigen::VectorXd>(v.data(), d).eval();
    };
    if (e.u) t.u = vec(*e.u, "u");
    if (e.r) t.r = vec(*e.r, "r");
    if (e.traction) t.traction = vec(*e.traction, "traction");
    t.theta = e.theta;
    t.heat_flux = e.heat_flux;
    spec.bc[tag] = std::move(t);
  }

  auto make_pin = [&](const RunConfig::PinEntry& p) {
    Pin pin;
    pin.field = (p.field == "u" || p.field == "fu") ? Pin::Field::U : Pin::Field::R;
    if (static_cast<int>(p.at.size()) != d)
      throw ConfigError("[pins]: coordinates need " + std::to_string(d) + " components");
    pin.at = Eigen::Map<const Eigen::VectorXd>(p.at.data(), d);
    for (char ch : p.comps) {
      const int c = ch - 'x';
      if (c >= d) throw ConfigError("[pins]: component out of range for dimension");
      pin.comps.push_back(c);
    }
    return pin;
  };
  for (const auto& p : cfg.pins) {
    if (p.field == "u" || p.field == "r")
      spec.pins.push_back(make_pin(p));
    else
      setup->iteration.forward_pins.push_back(make_pin(p));
  }

  spec.solver.max_iters = cfg.solver.max_iters;
  spec.solver.abs_tol = cfg.solver.abs_tol;
  spec.solver.rel_tol = cfg.solver.rel_tol;
  spec.solver.damping = cfg.solver.damping == "none" ? SolverConfig::Damping::None
                                                     : SolverConfig::Damping::Backtracking;
  spec.solver.validate();
  spec.load_steps = cfg.solver.load_steps;

  setup->presim.kappa = cfg.iteration.presim_kappa;
  setup->presim.theta_init = cfg.iteration.presim_theta_init;
  setup->presim.theta_boundary = cfg.iteration.presim_theta_boundary;
  setup->presim.dt = cfg.iteration.presim_dt;
  setup->presim.steps = cfg.iteration.presim_steps;

  spec.initial_state = InitialState::rest(mesh);
  if (cfg.material.theta0_source == "presim")
    spec.initial_state.theta0 = heat_presim(mesh, setup->presim);
  else
    spec.initial_state.theta0.setConstant(cfg.material.theta0);

  IterationConfig& iter = setup->iteration;
  iter.max_outer = cfg.iteration.max_outer;
  iter.shape_tol = cfg.iteration.shape_tol;
  // Forward checks keep u only on the named tags; every tag gets a (node-wise
  // overridden) r value so the forward invariant holds.
  for (const std::string& tag : mesh.tags) {
    TagBC t;
    auto it = spec.bc.find(tag);
    if (it != spec.bc.end()) t = it->second;
    const bool keep_u = std::find(cfg.iteration.forward_u_tags.begin(),
                                  cfg.iteration.forward_u_tags.end(),
                                  tag) != cfg.iteration.forward_u_tags.end();
    if (!keep_u) t.u.reset();
    t.r = Eigen::VectorXd::Zero(d);
    iter.forward_bc[tag] = std::move(t);
  }
  if (cfg.iteration.correction == "heat-presim") {
    const HeatPresimParams presim = setup->presim;
    iter.correction = [presim](const Mesh& m, const Vector& r) {
      std::vector<double> positions = m.coords;
      for (int i = 0; i < m.num_nodes(); ++i)
        for (int c = 0; c < m.dim; ++c)
          positions[static_cast<std::size_t>(i) * m.dim + c] += r[static_cast<Eigen::Index>(i) * m.dim + c];
      InitialState st = InitialState::rest(m);
      st.theta0 = heat_presim(m, presim, &positions);
      return st;
    };
  }

  setup->output = cfg.output;
  return setup;
}

}  // namespace inveldes
