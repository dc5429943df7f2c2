#include "kfield/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kfield/errors.hpp"
#include "kfield/numfmt.hpp"

namespace kfield {

namespace pt = boost::property_tree;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

namespace {

std::vector<double> parse_numbers(std::string_view text, const std::string& what) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    double v = 0.0;
    if (!parse_double(token, v) || !std::isfinite(v)) throw ConfigError(what + ": bad number '" + token + "'");
    out.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ' ' || c == ',' || c == '\t') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

int parse_count(std::string_view text, const std::string& what) {
  long n = 0;
  if (!parse_long(text, n) || n < 0 || n > 1000000) throw ConfigError(what + ": bad count '" + std::string(text) + "'");
  return static_cast<int>(n);
}

}  // namespace

PointList parse_point_list(const std::string& text, int input_dim, double lower, double upper) {
  const std::string_view t = trim(text);
  if (t.empty()) return {};
  auto grid = [&](std::string_view prefix, bool midpoints) -> std::optional<PointList> {
    if (t.substr(0, prefix.size()) != prefix) return std::nullopt;
    if (input_dim != 1) throw ConfigError("'" + std::string(prefix) + "N' point lists are 1-D only");
    const int n = parse_count(t.substr(prefix.size()), std::string(prefix));
    if (n == 0) return PointList{};
    return midpoints ? midpoint_points(n, lower, upper) : uniform_points(n, lower, upper);
  };
  if (auto pts = grid("uniform:", false)) return *pts;
  if (auto pts = grid("midpoint:", true)) return *pts;

  PointList out;
  if (input_dim == 1 && t.find(';') == std::string_view::npos) {
    for (double v : parse_numbers(t, "point list")) out.push_back(Point::Constant(1, v));
    return out;
  }
  std::size_t start = 0;
  while (start <= t.size()) {
    const auto pos = t.find(';', start);
    const auto chunk = trim(t.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!chunk.empty()) {
      const auto coords = parse_numbers(chunk, "point list");
      if (static_cast<int>(coords.size()) != input_dim) {
        throw ConfigError("point '" + std::string(chunk) + "' does not have " + std::to_string(input_dim) +
                          " coordinates");
      }
      out.push_back(Eigen::Map<const Eigen::VectorXd>(coords.data(), input_dim));
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

namespace {

// Typed access to the parsed tree; records which keys were read so that
// unknown keys can be reported.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    known_[section].insert(key);
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return std::string(trim(*v));
  }

  std::string str(const std::string& section, const std::string& key, const std::string& fallback) {
    return raw(section, key).value_or(fallback);
  }

  double real(const std::string& section, const std::string& key, double fallback) {
    const auto v = raw(section, key);
    if (!v) return fallback;
    double out = 0.0;
    if (!parse_double(*v, out) || !std::isfinite(out)) throw ConfigError(name(section, key) + ": bad number '" + *v + "'");
    return out;
  }

  double positive(const std::string& section, const std::string& key, double fallback) {
    const double v = real(section, key, fallback);
    if (!(v > 0.0)) throw ConfigError(name(section, key) + " must be > 0");
    return v;
  }

  double nonnegative(const std::string& section, const std::string& key, double fallback) {
    const double v = real(section, key, fallback);
    if (!(v >= 0.0)) throw ConfigError(name(section, key) + " must be >= 0");
    return v;
  }

  long integer(const std::string& section, const std::string& key, long fallback, long lo, long hi) {
    const auto v = raw(section, key);
    if (!v) return fallback;
    long out = 0;
    if (!parse_long(*v, out)) throw ConfigError(name(section, key) + ": bad integer '" + *v + "'");
    if (out < lo || out > hi) {
      throw ConfigError(name(section, key) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return out;
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) {
    const auto v = raw(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError(name(section, key) + ": expected a boolean, got '" + *v + "'");
  }

  template <typename Enum>
  Enum choice(const std::string& section, const std::string& key, Enum fallback,
              const std::map<std::string, Enum>& options) {
    const auto v = raw(section, key);
    if (!v) return fallback;
    const auto it = options.find(*v);
    if (it == options.end()) throw ConfigError(name(section, key) + ": unknown value '" + *v + "'");
    return it->second;
  }

  void reject_unknown() const {
    for (const auto& [section, keys] : tree_) {
      const auto known = known_.find(section);
      if (known == known_.end()) throw ConfigError("unknown config section [" + section + "]");
      for (const auto& [key, value] : keys) {
        if (!known->second.count(key)) throw ConfigError("unknown config key " + name(section, key));
      }
    }
  }

  static std::string name(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

 private:
  const pt::ptree& tree_;
  std::map<std::string, std::set<std::string>> known_;
};

Profile read_profile(Reader& r, const std::string& section, const std::string& prefix, Profile p) {
  p.kind = r.choice<Profile::Kind>(section, prefix, p.kind,
                                   {{"sine", Profile::Kind::sine}, {"bump", Profile::Kind::bump}, {"zero", Profile::Kind::zero}});
  p.amplitude = r.real(section, prefix + "_amplitude", p.amplitude);
  p.center = r.real(section, prefix + "_center", p.center);
  p.width = r.positive(section, prefix + "_width", p.width);
  p.mode = static_cast<int>(r.integer(section, prefix + "_mode", p.mode, 1, 1000));
  return p;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value, const std::string& what) {
  std::filesystem::path p(value);
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) throw ConfigError(what + ": file " + p.string() + " does not exist");
  return p;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  pt::ptree tree;
  try {
    std::istringstream text(bytes);
    pt::ini_parser::read_ini(text, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, child] : tree) {
    if (!child.data().empty() && child.empty()) throw ConfigError("config key '" + section + "' outside any section");
  }

  Reader r(tree);
  ExperimentConfig c;
  c.source = path;
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

  c.seed = static_cast<std::uint64_t>(r.integer("run", "seed", 1, 0, std::numeric_limits<long>::max()));
  if (seed_override) c.seed = *seed_override;
  c.out_dir = r.str("run", "out", "out");
  if (c.out_dir.is_relative()) c.out_dir = base / c.out_dir;
  c.hash = fnv1a_hex(bytes + "\nseed=" + std::to_string(c.seed));

  try {
    c.kernel.family = parse_kernel_family(r.str("kernel", "family", "gaussian"));
  } catch (const InputError& e) {
    throw ConfigError(std::string("[kernel] family: ") + e.what());
  }
  c.kernel.bandwidth = r.positive("kernel", "bandwidth", c.kernel.bandwidth);
  c.kernel.period = r.positive("kernel", "period", c.kernel.period);
  c.kernel.input_dim = static_cast<int>(r.integer("kernel", "input_dim", 1, 1, 16));
  c.bandwidth_grid = parse_numbers(r.str("kernel", "bandwidth_grid", ""), "[kernel] bandwidth_grid");
  for (double s : c.bandwidth_grid) {
    if (!(s > 0.0)) throw ConfigError("[kernel] bandwidth_grid entries must be > 0");
  }

  c.lower = r.real("domain", "lower", c.lower);
  c.upper = r.real("domain", "upper", c.upper);
  if (!(c.upper > c.lower)) throw ConfigError("[domain] upper must exceed lower");
  c.grid_points = static_cast<int>(r.integer("domain", "grid_points", c.grid_points, 3, 100000));
  c.boundary = r.choice<Boundary>("domain", "boundary", c.boundary,
                                  {{"dirichlet_zero", Boundary::dirichlet_zero}, {"neumann_zero", Boundary::neumann_zero}});

  auto points = [&](const std::string& section, const std::string& key, const std::string& fallback) {
    return parse_point_list(r.str(section, key, fallback), c.kernel.input_dim, c.lower, c.upper);
  };

  c.dictionary = r.choice<DictionarySource>(
      "dictionary", "source", c.dictionary,
      {{"uniform", DictionarySource::uniform}, {"explicit", DictionarySource::explicit_centers},
       {"sparsify", DictionarySource::sparsify}});
  c.center_count = static_cast<int>(r.integer("dictionary", "count", c.center_count, 1, 100000));
  c.centers = points("dictionary", "centers", "");
  if (c.dictionary == DictionarySource::explicit_centers && c.centers.empty()) {
    throw ConfigError("[dictionary] source = explicit requires centers");
  }
  if (c.dictionary == DictionarySource::uniform && c.kernel.input_dim != 1) {
    throw ConfigError("[dictionary] source = uniform is 1-D only; use explicit or sparsify");
  }
  c.sparsify_candidates = r.str("dictionary", "candidates", c.sparsify_candidates);
  c.budget = static_cast<int>(r.integer("dictionary", "budget", c.budget, 1, 100000));
  c.nu = r.positive("dictionary", "nu", c.nu);

  c.diffusivity = r.positive("pde", "diffusivity", c.diffusivity);
  c.model_dt = r.positive("pde", "model_dt", c.model_dt);
  c.simulate_steps = static_cast<int>(r.integer("pde", "steps", c.simulate_steps, 0, 10000000));
  c.initial = read_profile(r, "pde", "initial", c.initial);

  if (auto d = r.raw("data", "path")) c.data = resolve(base, *d, "[data] path");
  if (auto v = r.raw("data", "ridge"); v && *v != "default") c.ridge = r.nonnegative("data", "ridge", 0.0);

  c.placement = r.choice<PlacementChoice>("placement", "mode", c.placement,
                                          {{"explicit", PlacementChoice::explicit_locations}, {"propose", PlacementChoice::propose}});
  c.sensors = points("placement", "sensors", "");
  c.actuators = points("placement", "actuators", "");
  c.placement_candidates = r.str("placement", "candidates", c.placement_candidates);
  c.placement_kind = r.choice<PlacementMode>("placement", "kind", c.placement_kind,
                                             {{"sensing", PlacementMode::sensing}, {"actuation", PlacementMode::actuation}});
  c.max_tries = static_cast<int>(r.integer("placement", "max_tries", c.max_tries, 1, 10000000));
  for (double t : parse_numbers(r.str("placement", "times", ""), "[placement] times")) {
    if (t < 0 || t != std::floor(t)) throw ConfigError("[placement] times must be nonnegative integers");
    c.times.push_back(static_cast<int>(t));
  }
  if (!c.times.empty()) {
    try {
      TimeIndexSet check(c.times);
    } catch (const InputError& e) {
      throw ConfigError(std::string("[placement] times: ") + e.what());
    }
  }

  c.id_episodes = static_cast<int>(r.integer("identification", "episodes", c.id_episodes, 1, 100000));
  c.id_steps = static_cast<int>(r.integer("identification", "steps", c.id_steps, 2, 1000000));

  c.measurement_variance = r.positive("observer", "measurement_variance", c.measurement_variance);
  c.process_noise_floor = r.nonnegative("observer", "process_noise_floor", c.process_noise_floor);
  c.initial_scale = r.nonnegative("observer", "initial_scale", c.initial_scale);
  c.observe_steps = static_cast<int>(r.integer("observer", "steps", c.observe_steps, 0, 10000000));
  c.synthetic_measurement_std = r.nonnegative("observer", "measurement_std", c.synthetic_measurement_std);
  c.synthetic_process_noise = r.boolean("observer", "process_noise", c.synthetic_process_noise);

  if (auto m = r.raw("model", "path")) c.model = resolve(base, *m, "[model] path");
  c.state_cost = r.positive("control", "state_cost", c.state_cost);
  c.input_cost = r.positive("control", "input_cost", c.input_cost);
  c.feedforward = r.boolean("control", "feedforward", c.feedforward);
  c.control_steps = static_cast<int>(r.integer("control", "steps", c.control_steps, 0, 10000000));
  c.actuator_count = static_cast<int>(r.integer("control", "actuators", c.actuator_count, 0, 100000));
  c.control_process_noise_floor = r.nonnegative("control", "process_noise_floor", c.control_process_noise_floor);
  c.reference = read_profile(r, "control", "reference", c.reference);

  r.reject_unknown();
  try {
    c.kernel.validate();
  } catch (const InputError& e) {
    throw ConfigError(std::string("[kernel] ") + e.what());
  }
  return c;
}

DiffusionControlSetup ExperimentConfig::control_setup() const {
  DiffusionControlSetup s;
  s.diffusivity = diffusivity;
  s.lower = lower;
  s.upper = upper;
  s.grid_points = grid_points;
  s.boundary = boundary;
  s.centers = center_count;
  s.actuators = actuator_count;
  s.kernel = kernel;
  s.bandwidth_grid = bandwidth_grid;
  s.model_dt = model_dt;
  s.id_episodes = id_episodes;
  s.id_steps = id_steps;
  s.seed = seed;
  s.state_cost = state_cost;
  s.input_cost = input_cost;
  s.measurement_variance = measurement_variance;
  s.process_noise_floor = control_process_noise_floor;
  s.feedforward = feedforward;
  s.control_steps = control_steps;
  s.initial = initial;
  s.reference = reference;
  return s;
}

}  // namespace kfield
