#include "kfield/diffusion_control.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "kfield/errors.hpp"
#include "kfield/linalg.hpp"

namespace kfield {

double Profile::operator()(double x, double lower, double upper) const {
  switch (kind) {
    case Kind::sine:
      return amplitude * std::sin(mode * std::numbers::pi * (x - lower) / (upper - lower));
    case Kind::bump: {
      const double z = (x - center) / width;
      return amplitude * std::exp(-0.5 * z * z);
    }
    case Kind::zero:
      return 0.0;
  }
  return 0.0;
}

PointList uniform_points(int count, double lower, double upper) {
  if (count < 1) throw InputError("uniform_points: count must be positive");
  PointList pts;
  for (int i = 0; i < count; ++i) {
    const double x = count == 1 ? 0.5 * (lower + upper) : lower + (upper - lower) * i / (count - 1);
    pts.push_back(Point::Constant(1, x));
  }
  return pts;
}

PointList midpoint_points(int count, double lower, double upper) {
  if (count < 1) throw InputError("midpoint_points: count must be positive");
  PointList pts;
  const double h = (upper - lower) / count;
  for (int j = 0; j < count; ++j) pts.push_back(Point::Constant(1, lower + (j + 0.5) * h));
  return pts;
}

namespace {

Grid1D empty_grid(const DiffusionControlSetup& s) {
  return Grid1D::uniform(s.grid_points, s.lower, s.upper, s.boundary);
}

double pde_dt(const DiffusionControlSetup& s) {
  return s.model_dt / substeps_per_model_step(s);
}

Grid1D profile_grid(const DiffusionControlSetup& s, const Profile& p) {
  Grid1D g = empty_grid(s);
  for (int i = 0; i < g.n_points; ++i) g.values(i) = p(g.x(i), s.lower, s.upper);
  if (s.boundary == Boundary::dirichlet_zero) {
    g.values(0) = 0.0;
    g.values(g.n_points - 1) = 0.0;
  }
  return g;
}

// Advances the plant by one model step; `source` (may be empty) is added as
// a forcing over the final substep so that its full amount lands in the
// state at the end of the step.
Grid1D advance(const DiffusionControlSetup& s, Grid1D g, const Eigen::VectorXd& source) {
  const int sub = substeps_per_model_step(s);
  const double dt = pde_dt(s);
  for (int j = 0; j < sub; ++j) {
    if (j == sub - 1 && source.size() != 0) {
      g = diffusion_step(g, s.diffusivity, dt, source / dt);
    } else {
      g = diffusion_step(g, s.diffusivity, dt);
    }
  }
  return g;
}

// Linear interpolation of the grid at x.
double sample_grid(const Grid1D& g, double x) {
  const double pos = (x - g.lower) / g.dx;
  int i = static_cast<int>(std::floor(pos));
  i = std::clamp(i, 0, g.n_points - 2);
  const double t = std::clamp(pos - i, 0.0, 1.0);
  return (1.0 - t) * g.values(i) + t * g.values(i + 1);
}

}  // namespace

int substeps_per_model_step(const DiffusionControlSetup& s) {
  if (!(s.model_dt > 0.0) || !(s.diffusivity > 0.0)) throw InputError("model_dt and diffusivity must be positive");
  if (s.grid_points < 3) throw InputError("grid needs at least 3 points");
  const double dx = (s.upper - s.lower) / (s.grid_points - 1);
  return std::max(1, static_cast<int>(std::ceil(s.model_dt / max_stable_dt(s.diffusivity, dx) - 1e-9)));
}

SampleSet snapshot_samples(const Grid1D& grid) {
  SampleSet s;
  s.locations = grid.locations();
  s.values.assign(grid.values.data(), grid.values.data() + grid.values.size());
  return s;
}

IdentifiedModel identify_diffusion_model(const DiffusionControlSetup& setup) {
  if (setup.id_episodes < 1 || setup.id_steps < 2) throw InputError("identification needs episodes >= 1, steps >= 2");
  const PointList centers = uniform_points(setup.centers, setup.lower, setup.upper);

  // Random initial conditions: smooth fields drawn from the dictionary span
  // with a wider kernel, tapered by a sine window under Dirichlet boundaries.
  std::mt19937_64 rng(setup.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  KernelSpec smooth = setup.kernel;
  smooth.family = KernelFamily::gaussian;
  smooth.bandwidth = 2.0 * (setup.upper - setup.lower) / std::max(setup.centers - 1, 1);
  const Dictionary smooth_dict(centers, smooth);

  std::vector<std::vector<SampleSet>> episodes;
  for (int e = 0; e < setup.id_episodes; ++e) {
    WeightVector w(setup.centers);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
    Grid1D g = empty_grid(setup);
    g.values = evaluate_field(smooth_dict, w, g.locations());
    if (setup.boundary == Boundary::dirichlet_zero) {
      for (int i = 0; i < g.n_points; ++i) {
        g.values(i) *= std::sin(std::numbers::pi * (g.x(i) - setup.lower) / (setup.upper - setup.lower));
      }
      g.values(0) = 0.0;
      g.values(g.n_points - 1) = 0.0;
    }
    std::vector<SampleSet> snaps;
    for (int k = 0; k < setup.id_steps; ++k) {
      snaps.push_back(snapshot_samples(g));
      g = advance(setup, g, {});
    }
    episodes.push_back(std::move(snaps));
  }

  KernelSpec spec = setup.kernel;
  if (!setup.bandwidth_grid.empty()) {
    std::vector<SampleSet> all;
    for (const auto& ep : episodes) all.insert(all.end(), ep.begin(), ep.end());
    spec.bandwidth = select_bandwidth(centers, spec, all, setup.bandwidth_grid).bandwidth;
  }
  Dictionary dict(centers, spec);

  std::vector<Eigen::MatrixXd> trajectories;
  double fit_error = 0.0;
  const Eigen::MatrixXd design = dict.design(episodes.front().front().locations);
  for (const auto& ep : episodes) {
    Eigen::MatrixXd traj(dict.size(), static_cast<Eigen::Index>(ep.size()));
    for (std::size_t k = 0; k < ep.size(); ++k) {
      traj.col(static_cast<Eigen::Index>(k)) = infer_weights(dict, ep[k]);
      const Eigen::VectorXd fit = design * traj.col(static_cast<Eigen::Index>(k));
      fit_error = std::max(fit_error, (fit - ep[k].value_vector()).cwiseAbs().maxCoeff());
    }
    trajectories.push_back(std::move(traj));
  }
  LinearModel model = learn_transition(trajectories);
  return {std::move(dict), std::move(model), fit_error};
}

ControlRun run_diffusion_control(const DiffusionControlSetup& setup, const Dictionary& dict,
                                 const LinearModel& model, const PointList& actuators) {
  model.validate();
  if (model.dim() != dict.size()) throw InputError("control: model and dictionary sizes differ");
  if (setup.control_steps < 0) throw InputError("control: steps must be nonnegative");
  if (actuators.empty()) throw SynthesisError("control: no actuators, (A, B) cannot be controllable", static_cast<int>(dict.size()));
  const ActuatorSet act(actuators, dict.spec().input_dim);
  const Eigen::Index m = dict.size();
  const Eigen::MatrixXd b = control_operator(dict, act).B;

  ControlRun run;
  run.actuator_locations = actuators;
  const TimeIndexSet times = TimeIndexSet::consecutive(static_cast<int>(m));
  run.controllability = is_controllable(model.A, b, times);

  // Reference weights: projection of the reference profile onto the span.
  const Grid1D ref_grid = profile_grid(setup, setup.reference);
  const SampleSet ref_samples = snapshot_samples(ref_grid);
  run.reference_weights = infer_weights(dict, ref_samples);
  const Eigen::VectorXd ref_field = evaluate_field(dict, run.reference_weights, ref_grid.locations());

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  run.gains = synthesize_tracking(model.A, b, setup.state_cost * eye,
                                  setup.input_cost * Eigen::MatrixXd::Identity(b.cols(), b.cols()),
                                  run.reference_weights, setup.feedforward);

  // Sensors share the actuator locations.
  const Eigen::MatrixXd k = dict.design(actuators);
  run.observability = is_observable(model.A, k, times);
  LinearModel filter_model = model;
  filter_model.Q += setup.process_noise_floor * eye;
  const ObserverConfig cfg = make_observer_config(filter_model, k, setup.measurement_variance);
  ObserverState state = observer_init(cfg);

  Grid1D plant = profile_grid(setup, setup.initial);
  const PointList grid_pts = plant.locations();
  const Eigen::MatrixXd grid_design = dict.design(grid_pts);
  const SampleSet plant_samples = snapshot_samples(plant);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(b.cols());
  for (int step = 0; step <= setup.control_steps; ++step) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(actuators.size()));
    for (std::size_t j = 0; j < actuators.size(); ++j) y(static_cast<Eigen::Index>(j)) = sample_grid(plant, actuators[j](0));
    state = step == 0 ? observer_update(cfg, state, y) : observer_step(cfg, state, y, b * u);

    SampleSet snap = plant_samples;
    snap.values.assign(plant.values.data(), plant.values.data() + plant.values.size());
    const WeightVector w_true = infer_weights(dict, snap);
    ControlTraceRow row;
    row.step = step;
    row.weight_error = (w_true - run.reference_weights).norm();
    row.residual = run.gains.feedforward_residual;
    row.field_error = (plant.values - ref_field).cwiseAbs().maxCoeff();
    row.estimate_error = (state.estimate - w_true).norm();
    if (step == setup.control_steps) {
      row.control_norm = 0.0;
      run.trace.push_back(row);
      break;
    }
    u = tracking_command(run.gains, state.estimate);
    row.control_norm = u.norm();
    run.trace.push_back(row);
    plant = advance(setup, plant, grid_design * (b * u));
  }
  return run;
}

}  // namespace kfield
