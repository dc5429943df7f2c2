#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kfield/diffusion_control.hpp"
#include "kfield/kernel.hpp"
#include "kfield/sysid.hpp"

namespace kfield {

/// A list of points given in config text. Accepted forms:
///   ""                  empty list
///   "uniform:N"         N points spanning [lower, upper], endpoints included
///   "midpoint:N"        N cell midpoints of [lower, upper]
///   "0.1 0.5, 0.9"      explicit 1-D coordinates (spaces or commas)
///   "0 0; 1 0.5"        explicit points separated by ';'
PointList parse_point_list(const std::string& text, int input_dim, double lower, double upper);

enum class DictionarySource { uniform, explicit_centers, sparsify };
enum class PlacementChoice { explicit_locations, propose };

/// Every setting the CLI reads, validated at load. See README for the file
/// format and defaults.
struct ExperimentConfig {
  std::filesystem::path source;  // the config file itself
  std::string hash;              // provenance hash of file bytes and seed
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";

  KernelSpec kernel{KernelFamily::gaussian, 0.07, 1.0, 1};
  std::vector<double> bandwidth_grid;

  double lower = 0.0;
  double upper = 1.0;
  int grid_points = 101;
  Boundary boundary = Boundary::dirichlet_zero;

  DictionarySource dictionary = DictionarySource::uniform;
  int center_count = 25;
  PointList centers;     // explicit
  std::string sparsify_candidates = "data";
  int budget = 25;
  double nu = 1e-3;

  double diffusivity = 0.25;
  double model_dt = 0.01;
  int simulate_steps = 100;
  Profile initial{Profile::Kind::sine, 1.0, 0.5, 0.1, 1};

  std::optional<std::filesystem::path> data;
  std::optional<double> ridge;  // unset: scale-relative default

  PlacementChoice placement = PlacementChoice::explicit_locations;
  PointList sensors;
  PointList actuators;
  std::string placement_candidates = "uniform:50";
  PlacementMode placement_kind = PlacementMode::sensing;
  int max_tries = 200;
  std::vector<int> times;  // empty: {0..M-1}

  int id_episodes = 20;
  int id_steps = 30;

  double measurement_variance = 1e-6;
  double process_noise_floor = 0.0;
  double initial_scale = 1.0;
  int observe_steps = 75;
  double synthetic_measurement_std = 0.0;
  bool synthetic_process_noise = false;

  std::optional<std::filesystem::path> model;
  double state_cost = 1.0;
  double input_cost = 0.1;
  bool feedforward = true;
  int control_steps = 100;
  int actuator_count = 13;
  double control_process_noise_floor = 1e-8;
  Profile reference{Profile::Kind::bump, 0.5, 0.5, 0.1, 1};

  /// Diffusion control setup assembled from the fields above.
  DiffusionControlSetup control_setup() const;
};

/// Reads an INI-style file. `seed_override` replaces [run] seed. Throws
/// ConfigError on unknown keys, bad values, or missing referenced files.
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        std::optional<std::uint64_t> seed_override = std::nullopt);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace kfield
