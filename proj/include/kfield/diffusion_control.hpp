#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "kfield/controller.hpp"
#include "kfield/field_sim.hpp"
#include "kfield/observer.hpp"
#include "kfield/rkhs.hpp"
#include "kfield/sysid.hpp"

namespace kfield {

/// Shape of an initial or reference profile on the grid.
struct Profile {
  enum class Kind { sine, bump, zero };
  Kind kind = Kind::sine;
  double amplitude = 1.0;
  double center = 0.5;  // bump only
  double width = 0.1;   // bump only
  int mode = 1;         // sine only: amplitude * sin(mode * pi * (x - lower) / (upper - lower))

  double operator()(double x, double lower, double upper) const;
};

/// Closed-loop diffusion control: u_t = b u_xx plus a source term, observed
/// and actuated at kernel locations.
struct DiffusionControlSetup {
  double diffusivity = 0.25;
  double lower = 0.0;
  double upper = 1.0;
  int grid_points = 101;
  Boundary boundary = Boundary::dirichlet_zero;

  int centers = 25;
  int actuators = 13;
  KernelSpec kernel{KernelFamily::gaussian, 0.07, 1.0, 1};
  /// When nonempty, the bandwidth is picked from this grid by fit error on
  /// the identification snapshots.
  std::vector<double> bandwidth_grid{0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1, 0.12};

  /// PDE time covered by one model step.
  double model_dt = 0.01;

  int id_episodes = 20;
  int id_steps = 30;
  std::uint64_t seed = 1;

  double state_cost = 1.0;
  double input_cost = 0.1;
  double measurement_variance = 1e-6;
  double process_noise_floor = 1e-8;
  bool feedforward = true;

  int control_steps = 100;
  Profile initial{Profile::Kind::sine, 1.0, 0.5, 0.1, 1};
  Profile reference{Profile::Kind::bump, 0.5, 0.5, 0.1, 1};
};

/// Uniform centers on [lower, upper] (endpoints included).
PointList uniform_points(int count, double lower, double upper);
/// Cell midpoints lower + (j + 1/2) h, h = (upper - lower) / count.
PointList midpoint_points(int count, double lower, double upper);

/// PDE substeps per model step (smallest count that satisfies the CFL bound).
int substeps_per_model_step(const DiffusionControlSetup& setup);

/// Field samples of a grid snapshot.
SampleSet snapshot_samples(const Grid1D& grid);

struct IdentifiedModel {
  Dictionary dict;
  LinearModel model;
  double fit_error = 0.0;  // worst absolute projection residual over snapshots
};

/// Open-loop identification: simulates seeded random initial conditions,
/// projects every model-step snapshot onto the dictionary and fits the
/// transition from the pooled weight trajectories.
IdentifiedModel identify_diffusion_model(const DiffusionControlSetup& setup);

struct ControlTraceRow {
  int step = 0;
  double weight_error = 0.0;  // ||w_k - w_ref||, w_k the projection of the PDE state
  double control_norm = 0.0;  // ||u_k||
  double residual = 0.0;      // feedforward residual
  double field_error = 0.0;   // max over grid of |u_k(x) - f_ref(x)|
  double estimate_error = 0.0;  // ||w_hat_k - w_k||
};

struct ControlRun {
  std::vector<ControlTraceRow> trace;
  ControllerGains gains;
  PointList actuator_locations;
  RankReport observability;
  RankReport controllability;
  WeightVector reference_weights;
};

/// Closed loop: FTCS plant, Kalman observer on the actuator locations,
/// LQR tracking law. The command u_k enters the plant as the source that
/// adds sum_i (B u_k)_i k(c_i, x) over the last substep of the model step.
/// Throws SynthesisError when the actuation is not controllable.
ControlRun run_diffusion_control(const DiffusionControlSetup& setup, const Dictionary& dict,
                                 const LinearModel& model, const PointList& actuators);

}  // namespace kfield
