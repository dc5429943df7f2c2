#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kfield/kernel.hpp"
#include "kfield/rkhs.hpp"

namespace kfield {

enum class Boundary { dirichlet_zero, neumann_zero };

/// Uniform 1-D grid on [lower, lower + (n_points - 1) dx].
struct Grid1D {
  int n_points = 0;
  double dx = 0.0;
  double lower = 0.0;
  Eigen::VectorXd values;
  Boundary boundary = Boundary::dirichlet_zero;

  /// n_points >= 3 nodes spanning [lower, upper], values zero.
  static Grid1D uniform(int n_points, double lower, double upper, Boundary boundary);

  double x(int i) const { return lower + dx * i; }
  PointList locations() const;
  void validate() const;
};

/// Largest dt with b dt / dx^2 <= 1/2.
double max_stable_dt(double b, double dx);

/// One explicit FTCS step of u_t = b u_xx + forcing. `forcing` is either
/// empty or one value per node; boundary nodes follow `grid.boundary`.
/// Throws InputError if b dt / dx^2 > 1/2.
Grid1D diffusion_step(const Grid1D& grid, double b, double dt, const Eigen::VectorXd& forcing = {});

/// Returns [initial, u_1, ..., u_steps]. `controls`, if nonempty, holds one
/// forcing vector per step.
std::vector<Grid1D> simulate_diffusion(const Grid1D& initial, double b, double dt, int steps,
                                       std::span<const Eigen::VectorXd> controls = {});

struct NoiseLevels {
  double process_std = 0.0;
  double measurement_std = 0.0;
};

struct SyntheticDataset {
  std::vector<long> times;
  std::vector<SampleSet> samples;
  /// M x T weights actually simulated.
  Eigen::MatrixXd true_weights;
  Eigen::MatrixXd a_true;
  NoiseLevels noise;
  std::uint64_t seed = 0;
};

/// Simulates w_{k+1} = A w_k + eta_k for T steps starting from w0 and
/// samples the field with additive measurement noise. Sensor locations are
/// redrawn uniformly in the box [lower, upper]^d at every step. Requires
/// spectral radius(A) <= 1.05.
SyntheticDataset generate_synthetic_field_data(const Dictionary& dict, const Eigen::MatrixXd& a_true,
                                               const WeightVector& w0, int steps, int n_sensors,
                                               const NoiseLevels& noise, std::uint64_t seed, double lower = 0.0,
                                               double upper = 1.0);

/// Same with fixed sensor locations.
SyntheticDataset generate_synthetic_field_data(const Dictionary& dict, const Eigen::MatrixXd& a_true,
                                               const WeightVector& w0, int steps, const PointList& sensors,
                                               const NoiseLevels& noise, std::uint64_t seed);

/// Reads `t,x[,y...],value` CSV text (`step` is accepted for `t`). Lines
/// starting with '#' are comments. Rows are grouped by t in increasing order.
std::vector<SampleSet> read_grid_csv(std::istream& in);
std::vector<SampleSet> ingest_grid_csv(const std::filesystem::path& path);

/// Writes the same schema; coordinate columns are named x, y, z, x3, ...
void write_grid_csv(std::ostream& out, std::span<const SampleSet> sets);

}  // namespace kfield
