// Command-line driver: solve single minimization problems, run convergence
// studies, and export field dumps for visualization.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "glfem/optimizer.hpp"
#include "glfem/parallel.hpp"
#include "glfem/study.hpp"

namespace {

using namespace glfem;

struct RunConfig {
  std::string kappa = "1";
  std::string degree = "2";
  std::string level = "5";
  int ref_level = 7;
  std::string potential = "paper_trig";
  std::string init = "const_phase";
  double energy_tol = 1e-15;
  double grad_tol = 1e-9;
  int max_iter = 20000;
  int threads = 0;
  std::string out = "glfem_out";
  std::string config_file;
  std::string reference_file;
  bool compute_reference = false;
  bool homotopy = false;
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
  static const std::map<std::string, int> known = {
      {"kappa", 0},     {"degree", 0},    {"level", 0},     {"ref_level", 0},
      {"potential", 0}, {"init", 0},      {"energy_tol", 0}, {"grad_tol", 0},
      {"max_iter", 0},  {"threads", 0},   {"out", 0},       {"reference", 0},
      {"compute_reference", 0}, {"homotopy", 0}};
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
      value.erase(value.begin());
    if (!known.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                        "'");
    if (key == "kappa") cfg.kappa = value;
    else if (key == "degree") cfg.degree = value;
    else if (key == "level") cfg.level = value;
    else if (key == "ref_level") cfg.ref_level = std::stoi(value);
    else if (key == "potential") cfg.potential = value;
    else if (key == "init") cfg.init = value;
    else if (key == "energy_tol") cfg.energy_tol = std::stod(value);
    else if (key == "grad_tol") cfg.grad_tol = std::stod(value);
    else if (key == "max_iter") cfg.max_iter = std::stoi(value);
    else if (key == "threads") cfg.threads = std::stoi(value);
    else if (key == "out") cfg.out = value;
    else if (key == "reference") cfg.reference_file = value;
    else if (key == "compute_reference")
      cfg.compute_reference = (value == "1" || value == "true");
    else if (key == "homotopy") cfg.homotopy = (value == "1" || value == "true");
  }
}

std::vector<std::string> effective_config_lines(const RunConfig& cfg, const std::string& cmd) {
  std::vector<std::string> lines;
  auto add = [&lines](const std::string& k, const std::string& v) {
    lines.push_back(k + "=" + v);
  };
  std::ostringstream os;
  os.precision(17);
  lines.push_back("command=" + cmd);
  add("kappa", cfg.kappa);
  add("degree", cfg.degree);
  add("level", cfg.level);
  add("ref_level", std::to_string(cfg.ref_level));
  add("potential", cfg.potential);
  add("init", cfg.init);
  os.str("");
  os << cfg.energy_tol;
  add("energy_tol", os.str());
  os.str("");
  os << cfg.grad_tol;
  add("grad_tol", os.str());
  add("max_iter", std::to_string(cfg.max_iter));
  add("homotopy", cfg.homotopy ? "1" : "0");
  return lines;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw ConfigError("empty list value");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw ConfigError("empty list value");
  return out;
}

// "lo:hi" or a single level.
std::pair<int, int> parse_level_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    const int l = std::stoi(s);
    return {l, l};
  }
  return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
}

SolverConfig make_solver_config(const RunConfig& cfg) {
  SolverConfig sc;
  sc.energy_tol = cfg.energy_tol;
  sc.grad_tol = cfg.grad_tol;
  sc.max_iter = cfg.max_iter;
  sc.init_preset = cfg.init;
  return sc;
}

ModelParams make_params(const RunConfig& cfg, double kappa) {
  ModelParams mp;
  mp.kappa = kappa;
  mp.potential = MagneticPotential::from_name(cfg.potential);
  if (mp.kappa < 1.0) throw ConfigError("kappa must be >= 1");
  return mp;
}

int cmd_solve(const RunConfig& cfg) {
  const auto kappas = parse_double_list(cfg.kappa);
  if (kappas.size() != 1) throw ConfigError("solve expects a single --kappa");
  const auto params = make_params(cfg, kappas[0]);
  const int degree = std::stoi(cfg.degree);
  const auto [level_lo, level_hi] = parse_level_range(cfg.level);
  if (level_lo != level_hi) throw ConfigError("solve expects a single --level");
  const int level = level_lo;
  if (level > Mesh::kMaxLevel) throw ConfigError("level exceeds capacity guard");

  std::ofstream log(cfg.out + ".log");
  for (const auto& line : effective_config_lines(cfg, "solve")) log << "# " << line << "\n";
  log << "iter,energy,energy_diff,beta,tau,residual\n";

  SolverConfig sc = make_solver_config(cfg);
  sc.iteration_log = &log;

  MinimizerResult res;
  if (cfg.homotopy) {
    ComplexField carry;
    for (int l = std::min(2, level); l <= level; ++l) {
      auto s = FESpace::build(Mesh::build_uniform(l), degree);
      if (carry.size() > 0) {
        const ComplexField lifted = prolongate(carry, s);
        res = ncg_minimize(s, params, sc, &lifted);
      } else {
        res = ncg_minimize(s, params, sc, nullptr);
      }
      carry = res.state;
    }
  } else {
    auto space = FESpace::build(Mesh::build_uniform(level), degree);
    res = ncg_minimize(space, params, sc, nullptr);
  }

  std::ofstream field(cfg.out + ".field");
  res.state.dump(field);
  for (const auto& line : effective_config_lines(cfg, "solve")) field << "# " << line << "\n";
  field << "# energy=" << std::setprecision(17) << res.energy << "\n";

  const double lambda1 = res.eigenvalues.empty() ? 0.0 : res.eigenvalues[0];
  const char* status = res.classification == StateClass::minimizer ? "minimizer" : "saddle";
  std::cout.precision(10);
  std::cout << "kappa=" << params.kappa << " p=" << degree << " level=" << level
            << " energy=" << res.energy << " lambda1=" << lambda1 << " status=" << status
            << std::endl;
  return res.classification == StateClass::minimizer ? 0 : 2;
}

int cmd_study(const RunConfig& cfg) {
  StudyOptions opts;
  opts.kappas = parse_double_list(cfg.kappa);
  opts.degrees = parse_int_list(cfg.degree);
  const auto [lo, hi] = parse_level_range(cfg.level);
  opts.level_min = lo;
  opts.level_max = hi;
  opts.level_ref = cfg.ref_level;
  opts.base = make_params(cfg, opts.kappas[0]);
  opts.solver = make_solver_config(cfg);

  ReferenceSolution ref;
  const ReferenceSolution* ref_ptr = nullptr;
  if (!cfg.reference_file.empty()) {
    if (opts.kappas.size() != 1)
      throw ConfigError("a reference file applies to a single --kappa");
    std::ifstream is(cfg.reference_file);
    if (!is) throw ConfigError("cannot open reference file " + cfg.reference_file);
    ComplexField state = ComplexField::load(is, nullptr);
    if (state.space().mesh().level() != cfg.ref_level || state.space().degree() != 2)
      throw ConfigError("reference file does not match --ref-level P2 space");
    const Assembler asm_(state.space_ptr(), opts.base);
    ref.state = std::move(state);
    ref.energy = asm_.energy(ref.state);
    ref.kappa = opts.kappas[0];
    ref.level = cfg.ref_level;
    ref.provenance = "loaded from " + cfg.reference_file;
    ref_ptr = &ref;
  } else if (!cfg.compute_reference) {
    throw ConfigError("study requires --reference <file> or --compute-reference");
  }

  const auto rows = run_study(opts, ref_ptr);

  std::ofstream csv(cfg.out + ".csv");
  write_csv(csv, rows, effective_config_lines(cfg, "study"));

  bool all_ok = true;
  for (const auto& r : rows) all_ok = all_ok && r.status == "ok";
  return all_ok ? 0 : 3;
}

int cmd_export_vtk(const std::string& in_path, const std::string& out_path) {
  std::ifstream is(in_path);
  if (!is) throw InputError("cannot open field dump " + in_path);
  const ComplexField f = ComplexField::load(is, nullptr);
  const FESpace& s = f.space();
  const Mesh& mesh = s.mesh();

  std::ofstream os(out_path);
  os.precision(17);
  os << "# vtk DataFile Version 3.0\n";
  os << "glfem field p=" << s.degree() << " level=" << mesh.level() << "\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << s.dof_count() << " double\n";
  for (std::size_t j = 0; j < s.dof_count(); ++j) {
    const Vec2 x = s.dof_point(j);
    os << x.x << " " << x.y << " 0\n";
  }
  const int nd = s.dofs_per_element();
  os << "CELLS " << mesh.element_count() << " " << mesh.element_count() * (nd + 1) << "\n";
  for (std::size_t k = 0; k < mesh.element_count(); ++k) {
    os << nd;
    const std::uint32_t* dofs = s.element_dofs(k);
    for (int l = 0; l < nd; ++l) os << " " << dofs[l];
    os << "\n";
  }
  os << "CELL_TYPES " << mesh.element_count() << "\n";
  const int vtk_type = s.degree() == 1 ? 5 : 22;  // triangle / quadratic triangle
  for (std::size_t k = 0; k < mesh.element_count(); ++k) os << vtk_type << "\n";
  os << "POINT_DATA " << s.dof_count() << "\n";
  auto scalar_array = [&os, &f](const char* name, auto&& get) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t j = 0; j < f.size(); ++j) os << get(f[j]) << "\n";
  };
  scalar_array("re", [](cplx c) { return c.real(); });
  scalar_array("im", [](cplx c) { return c.imag(); });
  scalar_array("abs", [](cplx c) { return std::abs(c); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ginzburg-Landau finite element minimization"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string vtk_in, vtk_out;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--kappa", cfg.kappa, "Ginzburg-Landau parameter(s), comma list for study");
    sub->add_option("--degree", cfg.degree, "FE degree: 1, 2, or comma list (study)");
    sub->add_option("--level", cfg.level, "mesh level, or lo:hi range (study)");
    sub->add_option("--ref-level", cfg.ref_level, "reference mesh level");
    sub->add_option("--potential", cfg.potential, "zero | paper_trig");
    sub->add_option("--init", cfg.init, "const_phase | linear | vortex");
    sub->add_option("--energy-tol", cfg.energy_tol, "energy-difference stop");
    sub->add_option("--grad-tol", cfg.grad_tol, "residual safeguard stop");
    sub->add_option("--max-iter", cfg.max_iter, "iteration budget");
    sub->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
    sub->add_option("--out", cfg.out, "output path prefix");
    sub->add_option("--config", cfg.config_file, "key=value config file");
  };

  CLI::App* solve = app.add_subcommand("solve", "minimize at one level and verify");
  add_common(solve);
  solve->add_flag("--homotopy", cfg.homotopy, "seed from coarser-level solves");

  CLI::App* study = app.add_subcommand("study", "convergence study against a reference");
  add_common(study);
  study->add_option("--reference", cfg.reference_file, "reference field dump");
  study->add_flag("--compute-reference", cfg.compute_reference,
                  "compute the reference if no file is given");

  CLI::App* vtk = app.add_subcommand("export-vtk", "field dump -> legacy VTK");
  vtk->add_option("input", vtk_in, "field dump path")->required();
  vtk->add_option("output", vtk_out, "VTK output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!cfg.config_file.empty()) {
      // File values become the new defaults, then flags reapply on top.
      RunConfig merged;
      apply_config_file(merged, cfg.config_file);
      merged.config_file = cfg.config_file;
      cfg = merged;
      app.clear();
      CLI11_PARSE(app, argc, argv);
    }
    if (cfg.threads > 0) set_num_threads(cfg.threads);

    if (solve->parsed()) return cmd_solve(cfg);
    if (study->parsed()) return cmd_study(cfg);
    if (vtk->parsed()) return cmd_export_vtk(vtk_in, vtk_out);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << std::endl;
    return 1;
  }
  return 1;
}
