// hopic: command-line driver.
//
//   hopic run      --problem landau1d --order 4 [--preset paper] [overrides] --out dir
//   hopic converge --problem landau1d --order 4 --levels 4 --times 1,2,5 --out dir
//   hopic fit      --input dir/amplitude.csv --window 0 20

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hopic/hopic.hpp"

namespace fs = std::filesystem;
using namespace hopic;

namespace {

struct Overrides {
  std::string problem = "landau1d";
  int order = 4;
  std::string preset = "paper";
  int n_cells = 0, n_x = 0, n_v = 0;
  double dt = 0, t_final = -1, v_max = 0, alpha = -1, k = 0, threshold = -1;
  int remap_interval = -1;
  bool no_positivity = false;
  int max_redistribution_iters = 5;
  double tolerance = 1e-9;
  std::string norm = "max";
  std::string out = "out";
  std::vector<double> snapshot_times;
  bool snapshot_times_given = false;
  bool write_particles = false;
  int image_nx = 0, image_nv = 0;
  // converge
  int levels = 4;
  std::vector<double> times{1.0, 2.0, 5.0};
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--problem", o.problem, "landau1d | twostream1d | landau2d | twostream2d")
      ->check(CLI::IsMember({"landau1d", "twostream1d", "landau2d", "twostream2d"}));
  cmd->add_option("--order", o.order, "scheme order")->check(CLI::IsMember({2, 4}));
  cmd->add_option("--preset", o.preset, "parameter preset")->check(CLI::IsMember({"paper"}));
  cmd->add_option("--n-cells", o.n_cells, "mesh cells per dimension (power of two >= 4)");
  cmd->add_option("--nx", o.n_x, "phase-space lattice cells per spatial dimension");
  cmd->add_option("--nv", o.n_v, "phase-space lattice cells per velocity dimension");
  cmd->add_option("--dt", o.dt, "time step");
  cmd->add_option("--t-final", o.t_final, "final time");
  cmd->add_option("--v-max", o.v_max, "velocity lattice bound");
  cmd->add_option("--alpha", o.alpha, "perturbation amplitude");
  cmd->add_option("--k", o.k, "wavenumber (all spatial dimensions)");
  cmd->add_option("--remap-interval", o.remap_interval, "steps between remaps, 0 disables");
  cmd->add_option("--threshold", o.threshold, "minimum particle charge");
  cmd->add_flag("--no-positivity", o.no_positivity, "disable negative-f redistribution");
  cmd->add_option("--max-redistribution-iters", o.max_redistribution_iters, "redistribution sweeps per remap");
  cmd->add_option("--tolerance", o.tolerance, "multigrid relative residual tolerance");
  cmd->add_option("--norm", o.norm, "amplitude norm")->check(CLI::IsMember({"max", "l2"}));
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--config", "flat key = value file mirroring the long flags; command-line flags win")->type_name("FILE");
}

SimulationConfig resolve(const Overrides& o) {
  const auto id = parse_problem(o.problem);
  auto cfg = SimulationConfig::from_paper(id, o.order);
  if (o.n_cells) cfg.resolution.n_cells = o.n_cells;
  if (o.n_x) cfg.resolution.n_x = o.n_x;
  if (o.n_v) cfg.resolution.n_v = o.n_v;
  if (o.dt) cfg.resolution.dt = o.dt;
  if (o.t_final >= 0) cfg.t_final = o.t_final;
  if (o.v_max) cfg.problem.v_max = o.v_max;
  if (o.alpha >= 0) cfg.problem.alpha = o.alpha;
  if (o.k) cfg.problem.k = {o.k, o.k};
  if (o.remap_interval >= 0) cfg.remap_interval = o.remap_interval;
  if (o.threshold >= 0) cfg.threshold = o.threshold;
  cfg.positivity = !o.no_positivity;
  cfg.max_redistribution_iters = o.max_redistribution_iters;
  cfg.multigrid.tolerance = o.tolerance;
  cfg.norm = o.norm == "l2" ? AmplitudeNorm::L2 : AmplitudeNorm::Max;
  return cfg;
}

void write_config(const fs::path& path, const SimulationConfig& c, const Overrides& o, const std::string& extra = "") {
  std::ofstream os(path);
  os << std::setprecision(17);
  os << "problem = " << problem_name(c.problem.id) << '\n'
     << "order = " << c.order << '\n'
     << "preset = " << o.preset << '\n'
     << "n-cells = " << c.resolution.n_cells << '\n'
     << "nx = " << c.resolution.n_x << '\n'
     << "nv = " << c.resolution.n_v << '\n'
     << "dt = " << c.resolution.dt << '\n'
     << "t-final = " << c.t_final << '\n'
     << "v-max = " << c.problem.v_max << '\n'
     << "alpha = " << c.problem.alpha << '\n'
     << "k = " << c.problem.k[0] << '\n'
     << "remap-interval = " << c.remap_interval << '\n'
     << "threshold = " << c.threshold << '\n'
     << "no-positivity = " << (c.positivity ? "false" : "true") << '\n'
     << "max-redistribution-iters = " << c.max_redistribution_iters << '\n'
     << "tolerance = " << c.multigrid.tolerance << '\n'
     << "norm = " << (c.norm == AmplitudeNorm::Max ? "max" : "l2") << '\n'
     << extra;
}

std::string list(const std::vector<double>& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

std::string time_tag(double t) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << t;
  return os.str();
}

template <int D>
int cmd_run(const Overrides& o) {
  auto cfg = resolve(o);
  const auto id = cfg.problem.id;
  if (o.snapshot_times_given) {
    cfg.snapshot_times = o.snapshot_times;
  } else if (id == ProblemId::TwoStream1D || id == ProblemId::TwoStream2D) {
    for (double f : {0.25, 0.5, 0.75, 1.0}) cfg.snapshot_times.push_back(f * cfg.t_final);
  }
  cfg.validate();
  fs::create_directories(o.out);
  const fs::path out(o.out);
  std::ostringstream extra;
  extra << "snapshot-times = " << list(cfg.snapshot_times) << '\n'
        << "write-particles = " << (o.write_particles ? "true" : "false") << '\n'
        << "image-nx = " << (o.image_nx ? o.image_nx : cfg.resolution.n_x) << '\n'
        << "image-nv = " << (o.image_nv ? o.image_nv : cfg.resolution.n_v) << '\n';
  write_config(out / "config.txt", cfg, o, extra.str());

  std::ofstream progress(out / "progress.log");
  progress << std::setprecision(10);
  RunObserver<D> obs;
  obs.on_progress = [&](const ProgressRecord& r) { progress << r << '\n'; };
  obs.on_remap = [&](long long step, const RemapReport& r) {
    progress << "remap step=" << step << std::setprecision(17) << " charge_before=" << r.charge_before
             << " charge_after=" << r.charge_after << " truncated=" << r.truncated_charge << " dropped=" << r.dropped_charge
             << " dropped_count=" << r.dropped_count << " clamp_defect=" << r.clamp_defect
             << " redistribution_iterations=" << r.redistribution_iterations << std::setprecision(10) << '\n';
  };
  const int inx = o.image_nx ? o.image_nx : cfg.resolution.n_x;
  const int inv = o.image_nv ? o.image_nv : cfg.resolution.n_v;
  obs.on_snapshot = [&](double t, const ParticleSet<D>& ps) {
    const auto tag = time_tag(t);
    std::ofstream img(out / ("phase_space_t" + tag + ".csv"));
    io::write_phase_space_image(img, phase_space_image(ps, 0, 0, inx, inv, cfg.problem.v_max));
    if (o.write_particles) {
      std::ofstream pf(out / ("particles_t" + tag + ".csv"));
      io::write_particles(pf, ps);
    }
  };

  const auto result = run<D>(cfg, obs);
  std::ofstream amp(out / "amplitude.csv");
  io::write_amplitude_csv(amp, result.series);
  std::cout << "steps=" << result.series.size() - 1 << " evaluations=" << result.pipeline_evaluations
            << " remaps=" << result.remaps << " particles=" << result.final_state.particles.size()
            << " final_amplitude=" << result.series.amplitude.back() << '\n'
            << "wrote " << (out / "amplitude.csv").string() << '\n';
  return 0;
}

template <int D>
int cmd_converge(const Overrides& o, bool base_given) {
  auto cfg = resolve(o);
  if (!base_given) {
    const auto base = paper_config(cfg.problem.id).ladder_base;
    if (!o.n_cells) cfg.resolution.n_cells = base.n_cells;
    if (!o.n_x) cfg.resolution.n_x = base.n_x;
    if (!o.n_v) cfg.resolution.n_v = base.n_v;
    if (!o.dt) cfg.resolution.dt = base.dt;
  }
  if (o.t_final < 0) cfg.t_final = *std::max_element(o.times.begin(), o.times.end());
  fs::create_directories(o.out);
  const fs::path out(o.out);
  std::ostringstream extra;
  extra << "levels = " << o.levels << '\n' << "times = " << list(o.times) << '\n';
  write_config(out / "config.txt", cfg, o, extra.str());

  std::ofstream ladder_log(out / "ladder.txt");
  const auto report = run_ladder<D>(cfg, o.levels, o.times, [&](int l, const Resolution& r) {
    ladder_log << "level " << l << " n_cells=" << r.n_cells << " n_x=" << r.n_x << " n_v=" << r.n_v << " dt=" << r.dt
               << std::endl;
    std::cerr << "level " << l << " n_cells=" << r.n_cells << " n_x=" << r.n_x << " n_v=" << r.n_v << " dt=" << r.dt
              << std::endl;
  });
  std::ofstream csv(out / "convergence.csv");
  io::write_convergence_csv(csv, report);
  io::write_convergence_csv(std::cout, report);
  return 0;
}

int cmd_fit(const std::string& input, const std::vector<double>& window, bool keep_first) {
  std::ifstream is(input);
  if (!is) throw std::runtime_error("cannot open " + input);
  const auto series = io::read_amplitude_csv(is);
  if (series.size() == 0) throw std::runtime_error(input + ": no amplitude samples");
  FitOptions fo;
  fo.t_begin = window.at(0);
  fo.t_end = window.at(1);
  fo.exclude_first_peak = !keep_first;
  const auto fit = fit_damping(series, fo);
  std::cout << std::setprecision(8) << "gamma=" << fit.gamma << " omega=" << fit.omega
            << " peaks=" << fit.peak_times.size() << '\n';
  for (std::size_t i = 0; i < fit.peak_times.size(); ++i)
    std::cout << "peak t=" << fit.peak_times[i] << " amplitude=" << fit.peak_values[i] << '\n';
  return 0;
}

// Splices the entries of a --config file into the argument list ahead of the
// command-line options, skipping keys that are also given explicitly.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end() || it + 1 == args.end()) return args;
  const std::string path = *(it + 1);
  args.erase(it, it + 2);
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  const auto items = CLI::ConfigTOML().from_config(is);
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
  };
  std::vector<std::string> spliced;
  for (const auto& item : items) {
    if (item.name.empty() || item.name == "++" || item.name == "--") continue;
    const std::string flag = "--" + item.name;
    if (given(flag) || item.inputs.empty()) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") spliced.push_back(flag);
      continue;
    }
    spliced.push_back(flag);
    for (const auto& v : item.inputs) spliced.push_back(v);
  }
  const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return !a.starts_with("-"); });
  args.insert(sub == args.end() ? args.begin() : sub + 1, spliced.begin(), spliced.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"high-order particle-in-cell Vlasov-Poisson solver", "hopic"};
  app.require_subcommand(1);

  Overrides run_o;
  auto* run_cmd = app.add_subcommand("run", "single simulation");
  add_common(run_cmd, run_o);
  auto* snap_opt = run_cmd->add_option("--snapshot-times", run_o.snapshot_times, "times for phase-space images")
                       ->delimiter(',');
  run_cmd->add_flag("--write-particles", run_o.write_particles, "also dump particle snapshots");
  run_cmd->add_option("--image-nx", run_o.image_nx, "phase-space image cells along x");
  run_cmd->add_option("--image-nv", run_o.image_nv, "phase-space image cells along v");

  Overrides conv_o;
  auto* conv_cmd = app.add_subcommand("converge", "Richardson convergence ladder");
  add_common(conv_cmd, conv_o);
  conv_cmd->add_option("--levels", conv_o.levels, "number of resolutions (>= 3)");
  conv_cmd->add_option("--times", conv_o.times, "sample times")->delimiter(',');

  std::string fit_input;
  std::vector<double> window{0.0, 20.0};
  bool keep_first = false;
  auto* fit_cmd = app.add_subcommand("fit", "damping rate and frequency from an amplitude CSV");
  fit_cmd->add_option("--input", fit_input, "amplitude CSV")->required();
  fit_cmd->add_option("--window", window, "fit window t0 t1")->expected(2);
  fit_cmd->add_flag("--keep-first-peak", keep_first, "include the first peak in the fit");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) {
      run_o.snapshot_times_given = snap_opt->count() > 0;
      return problem_dims(parse_problem(run_o.problem)) == 1 ? cmd_run<1>(run_o) : cmd_run<2>(run_o);
    }
    if (conv_cmd->parsed()) {
      const bool base_given = conv_o.n_cells || conv_o.n_x || conv_o.n_v || conv_o.dt;
      return problem_dims(parse_problem(conv_o.problem)) == 1 ? cmd_converge<1>(conv_o, base_given)
                                                              : cmd_converge<2>(conv_o, base_given);
    }
    if (fit_cmd->parsed()) return cmd_fit(fit_input, window, keep_first);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
