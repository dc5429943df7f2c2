#include "kfield/field_sim.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "kfield/errors.hpp"
#include "kfield/linalg.hpp"
#include "kfield/numfmt.hpp"

namespace kfield {

Grid1D Grid1D::uniform(int n_points, double lower, double upper, Boundary boundary) {
  if (n_points < 3) throw InputError("grid needs at least 3 points");
  if (!(upper > lower)) throw InputError("grid needs upper > lower");
  Grid1D g;
  g.n_points = n_points;
  g.lower = lower;
  g.dx = (upper - lower) / (n_points - 1);
  g.values = Eigen::VectorXd::Zero(n_points);
  g.boundary = boundary;
  return g;
}

PointList Grid1D::locations() const {
  PointList pts;
  pts.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) pts.push_back(Point::Constant(1, x(i)));
  return pts;
}

void Grid1D::validate() const {
  if (n_points < 3) throw InputError("grid needs at least 3 points");
  if (!(dx > 0.0)) throw InputError("grid spacing must be positive");
  if (values.size() != n_points) throw InputError("grid values length must equal n_points");
  if (!values.allFinite()) throw InputError("grid values must be finite");
}

double max_stable_dt(double b, double dx) { return 0.5 * dx * dx / b; }

Grid1D diffusion_step(const Grid1D& grid, double b, double dt, const Eigen::VectorXd& forcing) {
  grid.validate();
  if (!(b > 0.0) || !(dt > 0.0)) throw InputError("diffusion_step: b and dt must be positive");
  const double r = b * dt / (grid.dx * grid.dx);
  if (r > 0.5 * (1.0 + 1e-12)) {
    throw InputError("diffusion_step: b*dt/dx^2 = " + format_double(r) + " exceeds 1/2; need dt <= " +
                     format_double(max_stable_dt(b, grid.dx)));
  }
  if (forcing.size() != 0 && forcing.size() != grid.n_points) {
    throw InputError("diffusion_step: forcing must have one value per grid node");
  }
  const Eigen::VectorXd& u = grid.values;
  const int n = grid.n_points;
  Grid1D next = grid;
  Eigen::VectorXd& v = next.values;
  for (int i = 1; i < n - 1; ++i) v(i) = u(i) + r * (u(i + 1) - 2.0 * u(i) + u(i - 1));
  if (grid.boundary == Boundary::neumann_zero) {
    // Mirror ghost nodes: u_{-1} = u_1, u_n = u_{n-2}.
    v(0) = u(0) + 2.0 * r * (u(1) - u(0));
    v(n - 1) = u(n - 1) + 2.0 * r * (u(n - 2) - u(n - 1));
  }
  if (forcing.size() != 0) v += dt * forcing;
  if (grid.boundary == Boundary::dirichlet_zero) {
    v(0) = 0.0;
    v(n - 1) = 0.0;
  }
  return next;
}

std::vector<Grid1D> simulate_diffusion(const Grid1D& initial, double b, double dt, int steps,
                                       std::span<const Eigen::VectorXd> controls) {
  if (steps < 0) throw InputError("simulate_diffusion: steps must be nonnegative");
  if (!controls.empty() && controls.size() != static_cast<std::size_t>(steps)) {
    throw InputError("simulate_diffusion: need one control per step");
  }
  initial.validate();
  std::vector<Grid1D> traj;
  traj.reserve(static_cast<std::size_t>(steps) + 1);
  traj.push_back(initial);
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd none;
    const Eigen::VectorXd& f = controls.empty() ? none : controls[static_cast<std::size_t>(k)];
    traj.push_back(diffusion_step(traj.back(), b, dt, f));
  }
  return traj;
}

namespace {

SyntheticDataset simulate_dataset(const Dictionary& dict, const Eigen::MatrixXd& a_true, const WeightVector& w0,
                                  int steps, const NoiseLevels& noise, std::uint64_t seed,
                                  const std::function<PointList(std::mt19937_64&)>& sensors) {
  const Eigen::Index m = dict.size();
  if (a_true.rows() != m || a_true.cols() != m) throw InputError("synthetic data: A_true must be M x M");
  if (w0.size() != m) throw InputError("synthetic data: w0 must have length M");
  if (steps < 1) throw InputError("synthetic data: need at least one step");
  if (!(noise.process_std >= 0.0) || !(noise.measurement_std >= 0.0)) {
    throw InputError("synthetic data: noise levels must be nonnegative");
  }
  const double rho = spectral_radius(a_true);
  if (rho > 1.05) throw InputError("synthetic data: spectral radius " + format_double(rho) + " exceeds 1.05");

  SyntheticDataset ds;
  ds.a_true = a_true;
  ds.noise = noise;
  ds.seed = seed;
  ds.true_weights.resize(m, steps);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  WeightVector w = w0;
  for (int k = 0; k < steps; ++k) {
    ds.true_weights.col(k) = w;
    SampleSet s;
    s.time = k;
    s.locations = sensors(rng);
    const Eigen::VectorXd clean = evaluate_field(dict, w, s.locations);
    s.values.resize(static_cast<std::size_t>(clean.size()));
    for (Eigen::Index i = 0; i < clean.size(); ++i) {
      const double z = noise.measurement_std > 0.0 ? noise.measurement_std * normal(rng) : 0.0;
      s.values[static_cast<std::size_t>(i)] = clean(i) + z;
    }
    ds.times.push_back(k);
    ds.samples.push_back(std::move(s));
    WeightVector eta = WeightVector::Zero(m);
    if (noise.process_std > 0.0) {
      for (Eigen::Index i = 0; i < m; ++i) eta(i) = noise.process_std * normal(rng);
    }
    w = a_true * w + eta;
  }
  return ds;
}

}  // namespace

SyntheticDataset generate_synthetic_field_data(const Dictionary& dict, const Eigen::MatrixXd& a_true,
                                               const WeightVector& w0, int steps, int n_sensors,
                                               const NoiseLevels& noise, std::uint64_t seed, double lower,
                                               double upper) {
  if (n_sensors < 1) throw InputError("synthetic data: need at least one sensor");
  if (!(upper > lower)) throw InputError("synthetic data: need upper > lower");
  const int dim = dict.spec().input_dim;
  return simulate_dataset(dict, a_true, w0, steps, noise, seed, [=](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(lower, upper);
    PointList pts;
    for (int i = 0; i < n_sensors; ++i) {
      Point p(dim);
      for (int d = 0; d < dim; ++d) p(d) = uni(rng);
      pts.push_back(std::move(p));
    }
    return pts;
  });
}

SyntheticDataset generate_synthetic_field_data(const Dictionary& dict, const Eigen::MatrixXd& a_true,
                                               const WeightVector& w0, int steps, const PointList& sensors,
                                               const NoiseLevels& noise, std::uint64_t seed) {
  if (sensors.empty()) throw InputError("synthetic data: need at least one sensor");
  return simulate_dataset(dict, a_true, w0, steps, noise, seed, [&](std::mt19937_64&) { return sensors; });
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<SampleSet> read_grid_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto head = split_commas(t);
    if (head.size() < 3 || (head.front() != "t" && head.front() != "step") || head.back() != "value") {
      throw ParseError("expected header 't,x[,y...],value'", lineno);
    }
    columns = head.size();
    break;
  }
  std::map<long, SampleSet> groups;
  if (columns == 0) return {};
  const int dim = static_cast<int>(columns) - 2;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split_commas(t);
    if (cells.size() != columns) {
      throw SchemaError("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                        " columns, got " + std::to_string(cells.size()));
    }
    long time = 0;
    if (!parse_long(cells.front(), time)) throw ParseError("bad time index '" + std::string(cells.front()) + "'", lineno);
    Point p(dim);
    for (int d = 0; d < dim; ++d) {
      double v = 0.0;
      if (!parse_double(cells[static_cast<std::size_t>(d) + 1], v) || !std::isfinite(v)) {
        throw ParseError("bad coordinate '" + std::string(cells[static_cast<std::size_t>(d) + 1]) + "'", lineno);
      }
      p(d) = v;
    }
    double value = 0.0;
    if (!parse_double(cells.back(), value) || !std::isfinite(value)) {
      throw ParseError("bad value '" + std::string(cells.back()) + "'", lineno);
    }
    auto& set = groups[time];
    set.time = time;
    set.locations.push_back(std::move(p));
    set.values.push_back(value);
  }
  std::vector<SampleSet> out;
  out.reserve(groups.size());
  for (auto& [time, set] : groups) out.push_back(std::move(set));
  return out;
}

std::vector<SampleSet> ingest_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_grid_csv(in);
}

void write_grid_csv(std::ostream& out, std::span<const SampleSet> sets) {
  int dim = 1;
  for (const auto& s : sets) {
    if (!s.locations.empty()) {
      dim = static_cast<int>(s.locations.front().size());
      break;
    }
  }
  static const char* names[] = {"x", "y", "z"};
  out << "t";
  for (int d = 0; d < dim; ++d) out << ',' << (d < 3 ? std::string(names[d]) : "x" + std::to_string(d));
  out << ",value\n";
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const auto& s = sets[k];
    const long time = s.time.value_or(static_cast<long>(k));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.locations[i].size() != dim) throw SchemaError("write_grid_csv: inconsistent point dimension");
      out << time;
      for (int d = 0; d < dim; ++d) out << ',' << format_double(s.locations[i](d));
      out << ',' << format_double(s.values[i]) << '\n';
    }
  }
}

}  // namespace kfield
