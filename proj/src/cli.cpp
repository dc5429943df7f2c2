#include "kfield/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "kfield/errors.hpp"
#include "kfield/field_sim.hpp"
#include "kfield/linalg.hpp"
#include "kfield/numfmt.hpp"
#include "kfield/observer.hpp"

namespace kfield {

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_logger_st("kernel-field");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("KERNEL_FIELD_LOG");
    const std::string level = env ? env : "info";
    if (level == "error") {
      l->set_level(spdlog::level::err);
    } else if (level == "debug") {
      l->set_level(spdlog::level::debug);
    } else {
      l->set_level(spdlog::level::info);
    }
    return l;
  }();
  return log;
}

// Output file with a provenance comment line; refuses to clobber unless
// forced.
class OutputFile {
 public:
  OutputFile(const CommandOptions& options, const std::string& name, const ExperimentConfig& config,
             const std::string& command, bool header = true)
      : path_(options.out_dir / name) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + options.out_dir.string() + ": " + ec.message());
    if (std::filesystem::exists(path_) && !options.force) {
      throw IoError(path_.string() + " exists; pass --force to overwrite");
    }
    out_.open(path_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot write " + path_.string());
    if (header) out_ << "# kernel-field " << command << " config_hash=" << config.hash << " seed=" << config.seed << '\n';
    logger()->debug("writing {}", path_.string());
  }

  std::ostream& stream() { return out_; }
  const std::filesystem::path& path() const { return path_; }

  void close() {
    out_.close();
    if (!out_) throw IoError("write failed for " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

ModelFile require_model(const ExperimentConfig& config) {
  if (!config.model) throw ConfigError("[model] path is required for this command");
  return load_model(*config.model);
}

PointList placement_candidates(const ExperimentConfig& config) {
  PointList c = parse_point_list(config.placement_candidates, config.kernel.input_dim, config.lower, config.upper);
  if (c.empty()) throw ConfigError("[placement] candidates is empty");
  return c;
}

PlacementResult propose(const ExperimentConfig& config, const Dictionary& dict, const Eigen::MatrixXd& a,
                        PlacementMode mode) {
  PlacementOptions opts;
  opts.mode = mode;
  opts.max_tries = config.max_tries;
  opts.seed = config.seed;
  opts.times = config.times;
  return propose_placement(dict, a, placement_candidates(config), opts);
}

TimeIndexSet analysis_times(const ExperimentConfig& config, Eigen::Index m) {
  return config.times.empty() ? TimeIndexSet::consecutive(static_cast<int>(m)) : TimeIndexSet(config.times);
}

Eigen::MatrixXd design_or_empty(const Dictionary& dict, const PointList& pts) {
  if (pts.empty()) return Eigen::MatrixXd(0, dict.size());
  return dict.design(pts);
}

std::string join_points(const PointList& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += "; ";
    for (Eigen::Index d = 0; d < pts[i].size(); ++d) s += (d ? " " : "") + format_double(pts[i](d));
  }
  return s;
}

std::string complex_text(std::complex<double> z) {
  if (z.imag() == 0.0) return format_double(z.real());
  return format_double(z.real()) + (z.imag() < 0 ? "-" : "+") + format_double(std::abs(z.imag())) + "i";
}

// Index of the data point equal to x (within a relative 1e-9), or npos.
std::size_t find_location(const PointList& locations, const Point& x) {
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if ((locations[i] - x).norm() <= 1e-9 * std::max(1.0, x.norm())) return i;
  }
  return static_cast<std::size_t>(-1);
}

Dictionary build_dictionary(const ExperimentConfig& config, const std::vector<SampleSet>& snapshots) {
  PointList centers;
  switch (config.dictionary) {
    case DictionarySource::uniform:
      centers = uniform_points(config.center_count, config.lower, config.upper);
      break;
    case DictionarySource::explicit_centers:
      centers = config.centers;
      break;
    case DictionarySource::sparsify: {
      PointList candidates;
      if (config.sparsify_candidates == "data") {
        for (const auto& s : snapshots) candidates.insert(candidates.end(), s.locations.begin(), s.locations.end());
      } else {
        candidates = parse_point_list(config.sparsify_candidates, config.kernel.input_dim, config.lower, config.upper);
      }
      centers = sparsify_dictionary(candidates, config.kernel, static_cast<std::size_t>(config.budget), config.nu)
                    .centers();
      break;
    }
  }
  KernelSpec spec = config.kernel;
  if (!config.bandwidth_grid.empty() && !snapshots.empty()) {
    const auto choice = select_bandwidth(centers, spec, snapshots, config.bandwidth_grid);
    logger()->info("bandwidth search picked {} (max residual {})", choice.bandwidth, choice.max_abs_error);
    spec.bandwidth = choice.bandwidth;
  }
  return Dictionary(std::move(centers), spec);
}

}  // namespace

CommandOptions default_options(const ExperimentConfig& config) { return {config.out_dir, false}; }

SimulateResult cmd_simulate(const ExperimentConfig& config, const CommandOptions& options) {
  const DiffusionControlSetup setup = config.control_setup();
  const int sub = substeps_per_model_step(setup);
  const double dt = setup.model_dt / sub;

  Grid1D g = Grid1D::uniform(config.grid_points, config.lower, config.upper, config.boundary);
  for (int i = 0; i < g.n_points; ++i) g.values(i) = config.initial(g.x(i), config.lower, config.upper);
  if (g.boundary == Boundary::dirichlet_zero) {
    g.values(0) = 0.0;
    g.values(g.n_points - 1) = 0.0;
  }
  SimulateResult result;
  result.states.push_back(g);
  for (int k = 0; k < config.simulate_steps; ++k) {
    g = simulate_diffusion(g, config.diffusivity, dt, sub).back();
    result.states.push_back(g);
  }

  OutputFile traj(options, "trajectory.csv", config, "simulate");
  traj.stream() << "step,x,value\n";
  for (std::size_t k = 0; k < result.states.size(); ++k) {
    const auto& s = result.states[k];
    for (int i = 0; i < s.n_points; ++i) traj.stream() << k << ',' << format_double(s.x(i)) << ',' << format_double(s.values(i)) << '\n';
  }
  traj.close();
  result.trajectory = traj.path();

  OutputFile meta(options, "simulate_meta.txt", config, "simulate");
  meta.stream() << "diffusivity=" << format_double(config.diffusivity) << "\nmodel_dt=" << format_double(config.model_dt)
                << "\npde_dt=" << format_double(dt) << "\nsubsteps=" << sub << "\nsteps=" << config.simulate_steps
                << "\ngrid_points=" << config.grid_points << '\n';
  meta.close();
  logger()->info("simulate: {} states written to {}", result.states.size(), result.trajectory.string());
  return result;
}

LearnResult cmd_learn(const ExperimentConfig& config, const CommandOptions& options) {
  if (!config.data) throw ConfigError("[data] path is required for learn");
  const std::vector<SampleSet> snapshots = ingest_grid_csv(*config.data);
  if (snapshots.size() < 2) {
    throw InputError("learn: data has " + std::to_string(snapshots.size()) + " time steps, need at least 2");
  }
  const Dictionary dict = build_dictionary(config, snapshots);
  LearnResult result;
  result.weights.resize(dict.size(), static_cast<Eigen::Index>(snapshots.size()));
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    result.weights.col(static_cast<Eigen::Index>(k)) =
        config.ridge ? infer_weights(dict, snapshots[k], *config.ridge) : infer_weights(dict, snapshots[k]);
  }
  result.model.kernel = dict.spec();
  result.model.centers = dict.centers();
  result.model.model = learn_transition(result.weights);
  result.model.config_hash = config.hash;
  result.model.seed = config.seed;

  OutputFile out(options, "model.txt", config, "learn", false);
  write_model(out.stream(), result.model);
  out.close();
  result.model_path = out.path();
  logger()->info("learn: M={} from {} snapshots, model written to {}", dict.size(), snapshots.size(),
                 result.model_path.string());
  return result;
}

CheckReport cmd_check(const ExperimentConfig& config, const CommandOptions& options) {
  const ModelFile file = require_model(config);
  const Dictionary dict = file.dictionary();
  const Eigen::MatrixXd& a = file.model.A;
  const TimeIndexSet times = analysis_times(config, a.rows());

  CheckReport rep;
  rep.spectrum = spectral_summary(a);
  const Eigen::MatrixXd k = design_or_empty(dict, config.sensors);
  rep.sensors = static_cast<int>(k.rows());
  if (k.rows() > 0) {
    const ShadeReport shade = is_shaded(k, default_shade_tol(k));
    rep.shaded = shade.shaded;
    rep.row_sum_nonzero = shade.row_sum_nonzero;
    if (rep.spectrum.cyclic_index <= k.rows() && rep.spectrum.cyclic_index <= k.cols()) {
      rep.l_shaded = is_l_shaded(k, rep.spectrum.cyclic_index, default_shade_tol(k)).l_shaded;
    }
  }
  rep.observability = is_observable(a, k, times);
  const Eigen::MatrixXd kd = design_or_empty(dict, config.actuators).transpose();
  rep.actuators = static_cast<int>(kd.cols());
  rep.controllability = is_controllable(a, kd, times);

  std::ostringstream ss;
  ss << "dimension=" << a.rows() << '\n';
  ss << "cyclic_index=" << rep.spectrum.cyclic_index << '\n';
  ss << "full_rank_distinct=" << (rep.spectrum.full_rank_distinct ? "true" : "false") << '\n';
  ss << "spectral_radius=" << format_double(spectral_radius(a)) << '\n';
  ss << "eigenvalue_clusters=" << rep.spectrum.clusters.size() << '\n';
  for (std::size_t i = 0; i < rep.spectrum.clusters.size(); ++i) {
    const auto& c = rep.spectrum.clusters[i];
    ss << "cluster." << i << "=" << complex_text(c.centroid) << " algebraic=" << c.algebraic_multiplicity
       << " geometric=" << c.geometric_multiplicity << '\n';
  }
  ss << "sensors=" << rep.sensors << '\n';
  ss << "shaded=" << (rep.shaded ? "true" : "false") << '\n';
  ss << "row_sum_nonzero=" << (rep.row_sum_nonzero ? "true" : "false") << '\n';
  ss << "l_shaded=" << (rep.l_shaded ? "true" : "false") << '\n';
  ss << "observability_rank=" << rep.observability.rank << '\n';
  ss << "observable=" << (rep.observability.full_rank ? "true" : "false") << '\n';
  ss << "actuators=" << rep.actuators << '\n';
  ss << "controllability_rank=" << rep.controllability.rank << '\n';
  ss << "controllable=" << (rep.controllability.full_rank ? "true" : "false") << '\n';
  rep.text = ss.str();

  OutputFile out(options, "check_report.txt", config, "check");
  out.stream() << rep.text;
  out.close();
  rep.report_path = out.path();
  return rep;
}

ObserveResult cmd_observe(const ExperimentConfig& config, const CommandOptions& options) {
  const ModelFile file = require_model(config);
  const Dictionary dict = file.dictionary();
  const LinearModel& model = file.model;
  const Eigen::Index m = model.dim();

  ObserveResult result;
  PointList sensors = config.sensors;
  if (config.placement == PlacementChoice::propose) {
    sensors = propose(config, dict, model.A, PlacementMode::sensing).locations;
  }
  if (sensors.empty()) throw ConfigError("observe: no sensors ([placement] sensors or mode = propose)");
  const Eigen::MatrixXd k = dict.design(sensors);
  result.certificate = is_observable(model.A, k, analysis_times(config, m));
  result.observable = result.certificate.full_rank;
  if (!result.observable) {
    logger()->warn("observe: sensor placement is not observable (rank {} of {}); running anyway",
                   result.certificate.rank, m);
  }

  // Truth weights and measurements per step.
  std::vector<WeightVector> truth;
  std::vector<Eigen::VectorXd> measurements;
  if (config.data) {
    const auto snapshots = ingest_grid_csv(*config.data);
    for (const auto& snap : snapshots) {
      Eigen::VectorXd y(static_cast<Eigen::Index>(sensors.size()));
      for (std::size_t j = 0; j < sensors.size(); ++j) {
        const std::size_t at = find_location(snap.locations, sensors[j]);
        if (at == static_cast<std::size_t>(-1)) {
          throw ConfigError("observe: sensor " + join_points({sensors[j]}) + " is not a data location at t=" +
                            std::to_string(snap.time.value_or(0)));
        }
        y(static_cast<Eigen::Index>(j)) = snap.values[at];
      }
      measurements.push_back(std::move(y));
      truth.push_back(config.ridge ? infer_weights(dict, snap, *config.ridge) : infer_weights(dict, snap));
    }
  } else {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    WeightVector w(m);
    for (Eigen::Index i = 0; i < m; ++i) w(i) = config.initial_scale * normal(rng);
    Eigen::MatrixXd q_root = Eigen::MatrixXd::Zero(m, m);
    if (config.synthetic_process_noise) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.Q);
      q_root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    for (int step = 0; step < config.observe_steps; ++step) {
      Eigen::VectorXd y = k * w;
      if (config.synthetic_measurement_std > 0.0) {
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += config.synthetic_measurement_std * normal(rng);
      }
      truth.push_back(w);
      measurements.push_back(std::move(y));
      WeightVector eta = WeightVector::Zero(m);
      if (config.synthetic_process_noise) {
        for (Eigen::Index i = 0; i < m; ++i) eta(i) = normal(rng);
        eta = q_root * eta;
      }
      w = model.A * w + eta;
    }
  }

  LinearModel filter_model = model;
  filter_model.Q += config.process_noise_floor * Eigen::MatrixXd::Identity(m, m);
  const ObserverConfig cfg = make_observer_config(filter_model, k, config.measurement_variance);
  ObserverState state = observer_init(cfg);
  for (std::size_t step = 0; step < measurements.size(); ++step) {
    state = step == 0 ? observer_update(cfg, state, measurements[step]) : observer_step(cfg, state, measurements[step]);
    result.trace.push_back({static_cast<long>(step), (state.estimate - truth[step]).norm(), state.covariance.trace()});
  }

  OutputFile out(options, "observe_trace.csv", config, "observe");
  out.stream() << "step,error_norm,trace_P\n";
  for (const auto& r : result.trace) {
    out.stream() << r.step << ',' << format_double(r.error_norm) << ',' << format_double(r.trace_p) << '\n';
  }
  out.close();
  result.trace_path = out.path();

  OutputFile meta(options, "observe_meta.txt", config, "observe");
  meta.stream() << "sensors=" << join_points(sensors) << "\nobservability_rank=" << result.certificate.rank
                << "\nobservable=" << (result.observable ? "true" : "false") << '\n';
  if (!result.observable) meta.stream() << "warning=placement is not observable; estimates may not converge\n";
  meta.close();
  return result;
}

ControlResult cmd_control(const ExperimentConfig& config, const CommandOptions& options) {
  const DiffusionControlSetup setup = config.control_setup();
  std::optional<IdentifiedModel> identified;
  if (config.model) {
    ModelFile file = load_model(*config.model);
    identified.emplace(IdentifiedModel{file.dictionary(), file.model, 0.0});
  } else {
    identified.emplace(identify_diffusion_model(setup));
    logger()->info("control: identified M={} model, bandwidth {}, projection residual {}", identified->dict.size(),
                   identified->dict.spec().bandwidth, identified->fit_error);
  }
  const Dictionary& dict = identified->dict;

  PointList actuators = config.actuators;
  if (config.placement == PlacementChoice::propose) {
    actuators = propose(config, dict, identified->model.A, PlacementMode::actuation).locations;
  } else if (actuators.empty() && config.actuator_count > 0) {
    actuators = midpoint_points(config.actuator_count, config.lower, config.upper);
  }

  ControlResult result;
  result.run = run_diffusion_control(setup, dict, identified->model, actuators);

  OutputFile out(options, "control_trace.csv", config, "control");
  out.stream() << "step,weight_error,control_norm,residual,field_error\n";
  for (const auto& r : result.run.trace) {
    out.stream() << r.step << ',' << format_double(r.weight_error) << ',' << format_double(r.control_norm) << ','
                 << format_double(r.residual) << ',' << format_double(r.field_error) << '\n';
  }
  out.close();
  result.trace_path = out.path();

  OutputFile meta(options, "control_meta.txt", config, "control");
  meta.stream() << "bandwidth=" << format_double(dict.spec().bandwidth) << "\ncenters=" << dict.size()
                << "\nactuators=" << join_points(actuators) << "\nstate_cost=" << format_double(config.state_cost)
                << "\ninput_cost=" << format_double(config.input_cost)
                << "\nfeedforward=" << (config.feedforward ? "true" : "false")
                << "\nfeedforward_residual=" << format_double(result.run.gains.feedforward_residual)
                << "\ncontrollability_rank=" << result.run.controllability.rank
                << "\nobservability_rank=" << result.run.observability.rank
                << "\nclosed_loop_spectral_radius="
                << format_double(spectral_radius(identified->model.A -
                                                 control_operator(dict, ActuatorSet(actuators, dict.spec().input_dim)).B *
                                                     result.run.gains.gain))
                << '\n';
  meta.close();
  return result;
}

PlacementCommandResult cmd_placement(const ExperimentConfig& config, const CommandOptions& options) {
  const ModelFile file = require_model(config);
  const Dictionary dict = file.dictionary();
  PlacementCommandResult result;
  result.placement = propose(config, dict, file.model.A, config.placement_kind);

  OutputFile out(options, "placement.txt", config, "placement");
  const auto& p = result.placement;
  out.stream() << "kind=" << (config.placement_kind == PlacementMode::sensing ? "sensing" : "actuation")
               << "\ncyclic_index=" << p.cyclic_index << "\ncount=" << p.count << "\ndraws=" << p.draws
               << "\nrank=" << p.certificate.rank << "\nrequired=" << p.certificate.required
               << "\nlocations=" << join_points(p.locations) << '\n';
  out.close();
  result.path = out.path();
  return result;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Kernel models of spatiotemporal fields: simulate, learn, check, observe, control, placement"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool force = false;
  const char* names[] = {"simulate", "learn", "check", "observe", "control", "placement"};
  for (const char* name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [run] out)");
    sub->add_option("--seed", seed, "seed (overrides [run] seed)");
    sub->add_flag("--force", force, "overwrite existing outputs");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const ExperimentConfig config = load_experiment_config(config_path, seed);
    CommandOptions options = default_options(config);
    if (!out_dir.empty()) options.out_dir = out_dir;
    options.force = force;
    if (command == "simulate") {
      cmd_simulate(config, options);
    } else if (command == "learn") {
      cmd_learn(config, options);
    } else if (command == "check") {
      std::cout << cmd_check(config, options).text;
    } else if (command == "observe") {
      const auto r = cmd_observe(config, options);
      if (!r.trace.empty()) {
        logger()->info("observe: {} steps, final error {}", r.trace.size(), r.trace.back().error_norm);
      }
    } else if (command == "control") {
      const auto r = cmd_control(config, options);
      logger()->info("control: initial field error {}, final {}", r.run.trace.front().field_error,
                     r.run.trace.back().field_error);
    } else {
      const auto r = cmd_placement(config, options);
      logger()->info("placement: {} locations", r.placement.count);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    logger()->error("{}", e.what());
    return kExitConfig;
  } catch (const InputError& e) {
    logger()->error("{}", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    logger()->error("{}", e.what());
    return kExitNumerical;
  } catch (const Error& e) {
    // IoError, ParseError, SchemaError
    logger()->error("{}", e.what());
    return kExitIo;
  }
}

}  // namespace kfield
