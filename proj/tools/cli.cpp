#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fanning/convergence.hpp"
#include "fanning/hamiltonian.hpp"
#include "fanning/oracle.hpp"
#include "fanning/point_io.hpp"
#include "fanning/registration.hpp"
#include "fanning/transport.hpp"

namespace fanning::cli {

namespace fs = std::filesystem;

namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Flat `key=value` file; `#` starts a comment. Keys may repeat.
KeyValues read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io::FormatError(path.string() + ": cannot open file");
  KeyValues out;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw io::FormatError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

std::string option_key(const std::string& arg) {
  if (arg.rfind("--", 0) != 0) return {};
  const auto eq = arg.find('=');
  return arg.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
}

// Removes `--config FILE` from args and appends the file's entries as flags for every key
// not already given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> config_path;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config requires a file argument");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!config_path) return kept;

  std::set<std::string> given;
  for (const auto& a : kept) {
    const auto key = option_key(a);
    if (!key.empty()) given.insert(key);
  }
  for (const auto& [key, value] : read_key_values(*config_path)) {
    if (given.count(key)) continue;
    if (value == "true") {
      kept.push_back("--" + key);
    } else if (value != "false") {
      kept.push_back("--" + key);
      kept.push_back(value);
    }
  }
  return kept;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string node_name(const char* stem, int k) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.txt", stem, k);
  return buf;
}

struct KernelOptions {
  double sigma = 1.0;
  double ridge = 0.0;

  void add_to(CLI::App& app) {
    app.add_option("--sigma", sigma, "Gaussian kernel width")->capture_default_str();
    app.add_option("--ridge", ridge, "Ridge added to the kernel matrix in solves")->capture_default_str();
  }
  KernelConfig config() const {
    KernelConfig k{sigma, ridge};
    k.validate();
    return k;
  }
};

// Parameters needed to rebuild a reference geodesic from an output directory.
struct ReferenceInfo {
  KernelConfig kernel;
  int steps = 10;
  int order = 2;
  double time_start = 0.0;
  double time_end = 1.0;
};

void write_reference(const fs::path& dir, const GeodesicState& s0, const ShapePoints* baseline,
                     const ReferenceInfo& info) {
  io::write_point_set(dir / "initial_cp.txt", s0.c);
  io::write_point_set(dir / "initial_mom.txt", s0.alpha);
  if (baseline) io::write_point_set(dir / "baseline.txt", *baseline);
  std::ostringstream cfg;
  cfg << "sigma=" << io::format_double(info.kernel.sigma) << '\n'
      << "ridge=" << io::format_double(info.kernel.ridge) << '\n'
      << "steps=" << info.steps << '\n'
      << "order=" << info.order << '\n'
      << "time_start=" << io::format_double(info.time_start) << '\n'
      << "time_end=" << io::format_double(info.time_end) << '\n';
  write_text(dir / "reference.cfg", cfg.str());
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw std::invalid_argument(what + ": not a number '" + text + "'");
  return v;
}

ReferenceInfo read_reference(const fs::path& dir) {
  ReferenceInfo info;
  for (const auto& [key, value] : read_key_values(dir / "reference.cfg")) {
    if (key == "sigma") info.kernel.sigma = parse_double(value, key);
    else if (key == "ridge") info.kernel.ridge = parse_double(value, key);
    else if (key == "steps") info.steps = static_cast<int>(parse_double(value, key));
    else if (key == "order") info.order = static_cast<int>(parse_double(value, key));
    else if (key == "time_start") info.time_start = parse_double(value, key);
    else if (key == "time_end") info.time_end = parse_double(value, key);
    else throw io::FormatError((dir / "reference.cfg").string() + ": unknown key '" + key + "'");
  }
  info.kernel.validate();
  return info;
}

void write_loss_csv(const fs::path& path, const std::vector<double>& history) {
  std::ostringstream csv;
  csv << "iteration,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) csv << i << ',' << io::format_double(history[i]) << '\n';
  write_text(path, csv.str());
}

std::vector<Variant> parse_variants(const std::vector<std::string>& names) {
  std::vector<Variant> out;
  for (const auto& n : names) out.push_back(parse_variant(n));
  return out;
}

// ---------------------------------------------------------------------------------------

struct ShootCmd {
  std::string cp, mom, shape, out;
  KernelOptions kernel;
  IntegratorConfig icfg;
  double time = 1.0;

  void add_to(CLI::App& app) {
    app.add_option("--cp", cp, "Control points file")->required();
    app.add_option("--mom", mom, "Momenta file")->required();
    kernel.add_to(app);
    app.add_option("--steps", icfg.steps, "Number of integration steps")->capture_default_str();
    app.add_option("--order", icfg.order, "Integrator order (2 or 4)")->capture_default_str();
    app.add_option("--time", time, "Integration horizon, applied by scaling the momenta")->capture_default_str();
    app.add_option("--shape", shape, "Shape points carried by the flow");
    app.add_option("--out", out, "Output directory")->required();
  }

  void run() const {
    const KernelConfig kcfg = kernel.config();
    icfg.validate();
    if (!(time > 0.0) || !std::isfinite(time)) throw std::invalid_argument("--time must be positive");
    const GeodesicState s0{io::read_point_set(cp), time * io::read_point_set(mom)};
    s0.validate();
    std::optional<ShapePoints> y0;
    if (!shape.empty()) y0 = io::read_point_set(shape);

    const GeodesicPath path = fanning::shoot(s0, icfg, kcfg);
    fs::create_directories(out);
    const fs::path dir(out);
    for (int k = 0; k <= path.steps(); ++k) {
      io::write_point_set(dir / node_name("cp", k), path.states[k].c);
      io::write_point_set(dir / node_name("mom", k), path.states[k].alpha);
    }
    io::write_point_set(dir / "final_cp.txt", path.final().c);
    io::write_point_set(dir / "final_mom.txt", path.final().alpha);
    if (y0) {
      const auto shapes = flow_shape(path, *y0);
      for (int k = 0; k <= path.steps(); ++k) io::write_point_set(dir / node_name("shape", k), shapes[k]);
      io::write_point_set(dir / "final_shape.txt", shapes.back());
    }
    write_reference(dir, s0, y0 ? &*y0 : nullptr, {kcfg, icfg.steps, icfg.order, 0.0, 1.0});
  }
};

struct TransportCmd {
  std::string cp, mom, omega, variant = "main", out;
  KernelOptions kernel;
  int steps = 10;

  void add_to(CLI::App& app) {
    app.add_option("--cp", cp, "Control points file")->required();
    app.add_option("--mom", mom, "Geodesic momenta file")->required();
    app.add_option("--omega", omega, "Momenta to transport")->required();
    kernel.add_to(app);
    app.add_option("--steps", steps, "Number of transport steps")->capture_default_str();
    app.add_option("--variant", variant, "main, wec, rk4 or spg")->capture_default_str();
    app.add_option("--out", out, "Output directory")->required();
  }

  void run() const {
    const KernelConfig kcfg = kernel.config();
    const TransportConfig tcfg = TransportConfig::for_variant(parse_variant(variant), steps);
    const GeodesicState s0{io::read_point_set(cp), io::read_point_set(mom)};
    s0.validate();
    const Momenta w0 = io::read_point_set(omega);
    require_same_shape(s0.c, w0, "omega");

    const TransportResult result = parallel_transport(s0, w0, tcfg, kcfg);
    fs::create_directories(out);
    const fs::path dir(out);
    std::ostringstream csv;
    csv << "step,norm,pairing\n";
    for (int k = 0; k <= steps; ++k) {
      io::write_point_set(dir / node_name("omega", k), result.per_step[k].omega);
      csv << k << ',' << io::format_double(result.diagnostics[k].sq_norm) << ','
          << io::format_double(result.diagnostics[k].pairing) << '\n';
    }
    io::write_point_set(dir / "final_omega.txt", result.omega_final);
    write_text(dir / "diagnostics.csv", csv.str());
  }
};

struct FitOptions {
  FitConfig fit;
  KernelOptions kernel;

  void add_to(CLI::App& app) {
    kernel.add_to(app);
    app.add_option("--steps", fit.integrator.steps, "Number of integration steps")->capture_default_str();
    app.add_option("--order", fit.integrator.order, "Integrator order (2 or 4)")->capture_default_str();
    app.add_option("--max-iters", fit.max_iters, "Maximum gradient iterations")->capture_default_str();
    app.add_option("--step-size", fit.step_size, "Initial gradient step")->capture_default_str();
    app.add_option("--tolerance", fit.tolerance, "Relative loss decrease stopping threshold")
        ->capture_default_str();
    app.add_flag("--optimize-cp", fit.optimize_control_points, "Also optimize control points");
  }
};

struct RegisterCmd {
  std::string source, target, cp, out;
  FitOptions opts;

  void add_to(CLI::App& app) {
    app.add_option("--source", source, "Source shape")->required();
    app.add_option("--target", target, "Target shape, corresponded with the source")->required();
    app.add_option("--cp", cp, "Initial control points")->required();
    opts.add_to(app);
    app.add_option("--out", out, "Output directory")->required();
  }

  void run() const {
    const KernelConfig kcfg = opts.kernel.config();
    opts.fit.validate();
    const ShapePoints src = io::read_point_set(source);
    const ShapePoints tgt = io::read_point_set(target);
    const ControlPoints c0 = io::read_point_set(cp);

    const FitResult fit = register_shapes(src, tgt, c0, opts.fit, kcfg);
    const GeodesicPath path = fanning::shoot(fit.state, opts.fit.integrator, kcfg);
    const auto shapes = flow_shape(path, src);

    fs::create_directories(out);
    const fs::path dir(out);
    io::write_point_set(dir / "momenta.txt", fit.state.alpha);
    io::write_point_set(dir / "cp.txt", fit.state.c);
    io::write_point_set(dir / "deformed.txt", shapes.back());
    write_loss_csv(dir / "loss.csv", fit.loss_history);
    write_reference(dir, fit.state, &src, {kcfg, opts.fit.integrator.steps, opts.fit.integrator.order, 0.0, 1.0});
  }
};

struct RegressCmd {
  std::string baseline, cp, out;
  std::vector<std::string> obs;
  FitOptions opts;

  void add_to(CLI::App& app) {
    app.add_option("--baseline", baseline, "Baseline shape")->required();
    app.add_option("--obs", obs, "Observation as FILE,TIME (repeatable)")->required()->take_all();
    app.add_option("--cp", cp, "Initial control points")->required();
    opts.add_to(app);
    app.add_option("--out", out, "Output directory")->required();
  }

  void run() const {
    const KernelConfig kcfg = opts.kernel.config();
    opts.fit.validate();
    const ShapePoints y0 = io::read_point_set(baseline);
    const ControlPoints c0 = io::read_point_set(cp);
    std::vector<TimedShape> observations;
    for (const auto& item : obs) {
      const auto comma = item.rfind(',');
      if (comma == std::string::npos) throw std::invalid_argument("--obs expects FILE,TIME, got '" + item + "'");
      const std::string file = item.substr(0, comma);
      observations.push_back({io::read_point_set(file), parse_double(item.substr(comma + 1), "--obs time"), file});
    }

    const FitResult fit = geodesic_regression(y0, observations, c0, opts.fit, kcfg);
    const GeodesicPath path = fanning::shoot(fit.state, opts.fit.integrator, kcfg);
    const auto shapes = flow_shape(path, y0);

    double t_min = observations.front().time;
    double t_max = t_min;
    for (const auto& o : observations) {
      t_min = std::min(t_min, o.time);
      t_max = std::max(t_max, o.time);
    }

    fs::create_directories(out);
    const fs::path dir(out);
    for (std::size_t j = 0; j < observations.size(); ++j) {
      const double u = (observations[j].time - t_min) / (t_max - t_min);
      io::write_point_set(dir / ("fit_" + std::to_string(j) + ".txt"),
                          shapes[nearest_node(u, opts.fit.integrator.steps)]);
    }
    write_loss_csv(dir / "loss.csv", fit.loss_history);
    write_reference(dir, fit.state, &y0,
                    {kcfg, opts.fit.integrator.steps, opts.fit.integrator.order, t_min, t_max});
  }
};

struct ExpParallelizeCmd {
  std::string reference, omega, shape, variant = "main", out;
  std::vector<double> times;
  TimeReparam reparam;
  double ref_baseline = 0.0;

  void add_to(CLI::App& app) {
    app.add_option("--reference", reference, "Directory written by shoot, register or regress")->required();
    app.add_option("--omega", omega, "Momenta at the reference start")->required();
    app.add_option("--times", times, "Comma-separated subject times")->required()->delimiter(',');
    app.add_option("--onset", reparam.onset, "Subject onset time")->capture_default_str();
    app.add_option("--pace", reparam.pace, "Subject pace relative to the reference")->capture_default_str();
    app.add_option("--ref-baseline", ref_baseline, "Reference time matched to the onset")->capture_default_str();
    app.add_option("--shape", shape, "Shape at the reference start (default: the reference baseline)");
    app.add_option("--variant", variant, "Transport variant")->capture_default_str();
    app.add_option("--out", out, "Output directory")->required();
  }

  void run() const {
    reparam.validate();
    const fs::path ref_dir(reference);
    const ReferenceInfo info = read_reference(ref_dir);
    const GeodesicState s0{io::read_point_set(ref_dir / "initial_cp.txt"),
                           io::read_point_set(ref_dir / "initial_mom.txt")};
    const ShapePoints y0 = io::read_point_set(shape.empty() ? ref_dir / "baseline.txt" : fs::path(shape));
    const Momenta w0 = io::read_point_set(omega);
    const Variant v = parse_variant(variant);

    const double span = info.time_end - info.time_start;
    if (!(span > 0.0)) throw std::invalid_argument("reference time span must be positive");
    std::vector<double> ref_times;
    std::vector<double> unit_times;
    for (const double t : times) {
      const double tr = reparametrize_time(t, reparam, ref_baseline);
      const double u = (tr - info.time_start) / span;
      if (u < -1e-12 || u > 1.0 + 1e-12) {
        throw std::invalid_argument("time " + io::format_double(t) + " maps outside the reference geodesic");
      }
      ref_times.push_back(tr);
      unit_times.push_back(std::clamp(u, 0.0, 1.0));
    }

    const GeodesicPath path = fanning::shoot(s0, {info.steps, info.order}, info.kernel);
    const auto predictions =
        exp_parallelize(path, w0, unit_times, y0, TransportConfig::for_variant(v, info.steps), info.kernel);

    fs::create_directories(out);
    const fs::path dir(out);
    std::ostringstream csv;
    csv << "index,time,reference_time,node,file\n";
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const std::string file = node_name("prediction", static_cast<int>(i));
      io::write_point_set(dir / file, predictions[i]);
      csv << i << ',' << io::format_double(times[i]) << ',' << io::format_double(ref_times[i]) << ','
          << nearest_node(unit_times[i], info.steps) << ',' << file << '\n';
    }
    write_text(dir / "predictions.csv", csv.str());
  }
};

struct ConvergenceCmd {
  std::string cp, mom, omega, out;
  KernelOptions kernel;
  std::vector<int> grid{10, 25, 50, 100, 200, 400, 800, 1600};
  std::vector<std::string> variants{"main", "wec", "rk4", "spg"};

  void add_to(CLI::App& app) {
    app.add_option("--cp", cp, "Control points file")->required();
    app.add_option("--mom", mom, "Geodesic momenta file")->required();
    app.add_option("--omega", omega, "Momenta to transport")->required();
    kernel.add_to(app);
    app.add_option("--grid", grid, "Comma-separated step counts")->delimiter(',')->capture_default_str();
    app.add_option("--variants", variants, "Comma-separated variants")->delimiter(',')->capture_default_str();
    app.add_option("--out", out, "Output CSV")->required();
  }

  void run() const {
    const KernelConfig kcfg = kernel.config();
    const GeodesicState s0{io::read_point_set(cp), io::read_point_set(mom)};
    s0.validate();
    const Momenta w0 = io::read_point_set(omega);
    require_same_shape(s0.c, w0, "omega");
    const auto records = convergence_study(s0, w0, grid, parse_variants(variants), kcfg);
    std::ostringstream csv;
    write_convergence_csv(csv, records);
    write_text(out, csv.str());
  }
};

struct OracleCmd {
  std::string cp, mom, omega, variant = "main", out;
  KernelOptions kernel;
  int fine = 10000;
  std::vector<int> grid{10, 25, 50, 100, 200, 400};

  void add_to(CLI::App& app) {
    app.add_option("--cp", cp, "Control points file")->required();
    app.add_option("--mom", mom, "Geodesic momenta file")->required();
    app.add_option("--omega", omega, "Momenta to transport")->required();
    kernel.add_to(app);
    app.add_option("--fine", fine, "Steps of the reference ODE integration")->capture_default_str();
    app.add_option("--grid", grid, "Comma-separated step counts")->delimiter(',')->capture_default_str();
    app.add_option("--variant", variant, "Transport variant")->capture_default_str();
    app.add_option("--out", out, "Output CSV")->required();
  }

  void run() const {
    const KernelConfig kcfg = kernel.config();
    const GeodesicState s0{io::read_point_set(cp), io::read_point_set(mom)};
    s0.validate();
    const Momenta w0 = io::read_point_set(omega);
    require_same_shape(s0.c, w0, "omega");
    if (s0.c.size() > oracle::kMaxDimension) {
      throw std::invalid_argument("oracle-check supports n*d <= " + std::to_string(oracle::kMaxDimension));
    }
    const auto records = oracle_study(s0, w0, grid, fine, parse_variant(variant), kcfg);
    std::ostringstream csv;
    write_oracle_csv(csv, records);
    write_text(out, csv.str());
  }
};

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Parallel transport of momenta along LDDMM geodesics", "fanning"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  ShootCmd shoot;
  TransportCmd transport;
  RegisterCmd reg;
  RegressCmd regress;
  ExpParallelizeCmd expp;
  ConvergenceCmd convergence;
  OracleCmd oracle_check;

  auto* shoot_app = app.add_subcommand("shoot", "Integrate a geodesic and flow a shape along it");
  shoot.add_to(*shoot_app);
  auto* transport_app = app.add_subcommand("transport", "Parallel transport momenta along a geodesic");
  transport.add_to(*transport_app);
  auto* reg_app = app.add_subcommand("register", "Fit momenta carrying a source shape onto a target");
  reg.add_to(*reg_app);
  auto* regress_app = app.add_subcommand("regress", "Geodesic regression through time-indexed shapes");
  regress.add_to(*regress_app);
  auto* expp_app = app.add_subcommand("exp-parallelize", "Predict shapes along a transported trajectory");
  expp.add_to(*expp_app);
  auto* conv_app = app.add_subcommand("convergence", "Transport error against the number of steps");
  convergence.add_to(*conv_app);
  auto* oracle_app = app.add_subcommand("oracle-check", "Compare transport with the Christoffel ODE");
  oracle_check.add_to(*oracle_app);

  try {
    const std::vector<std::string> expanded = expand_config(args);
    std::vector<const char*> argv;
    for (const auto& a : expanded) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("fanning");
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (shoot_app->parsed()) shoot.run();
    else if (transport_app->parsed()) transport.run();
    else if (reg_app->parsed()) reg.run();
    else if (regress_app->parsed()) regress.run();
    else if (expp_app->parsed()) expp.run();
    else if (conv_app->parsed()) convergence.run();
    else if (oracle_app->parsed()) oracle_check.run();
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace fanning::cli
