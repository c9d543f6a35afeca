#include "cco/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace cco::scenario {

using netsim::CellConfig;
using netsim::NetworkState;
using netsim::UserEquipment;
using nlohmann::json;

std::string to_string(SiteLayout l) {
  return l == SiteLayout::HexGridJittered ? "hex_grid_jittered" : "uniform_random";
}

SiteLayout site_layout_from_string(const std::string& s) {
  if (s == "hex_grid_jittered") return SiteLayout::HexGridJittered;
  if (s == "uniform_random") return SiteLayout::UniformRandom;
  fail("unknown site layout: " + s);
}

void RandomizationSpec::validate() const {
  require(cell_count.lo >= 1 && cell_count.lo <= cell_count.hi, "spec: bad cell_count range");
  require(ue_count.lo >= 1 && ue_count.lo <= ue_count.hi, "spec: bad ue_count range");
  require(area_side_m > 0, "spec: area must be positive");
  require(sectors_per_site >= 1, "spec: sectors_per_site must be >= 1");
  require(tilt_init_range.lo <= tilt_init_range.hi, "spec: bad tilt_init range");
  require(indoor_fraction >= 0 && indoor_fraction <= 1, "spec: indoor_fraction in [0,1]");
}

namespace {

double jittered(double value, const FracRange& r, Rng& rng) {
  return value * (1.0 + rng.uniform(r.lo, r.hi));
}

// Hex lattice points covering the square, nearest to the center first.
std::vector<std::pair<double, double>> hex_sites(double side, int n_sites, double spacing) {
  std::vector<std::pair<double, double>> pts;
  double row_h = spacing * std::sqrt(3.0) / 2.0;
  int rows = int(side / row_h) + 2;
  int cols = int(side / spacing) + 2;
  for (int r = 0; r < rows; ++r) {
    double y = r * row_h + row_h / 2.0;
    double x0 = (r % 2 == 0) ? spacing / 2.0 : spacing;
    for (int c = 0; c < cols; ++c) {
      double x = x0 + c * spacing;
      if (x < side && y < side) pts.emplace_back(x, y);
    }
  }
  double cx = side / 2.0, cy = side / 2.0;
  std::sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
    double da = (a.first - cx) * (a.first - cx) + (a.second - cy) * (a.second - cy);
    double db = (b.first - cx) * (b.first - cx) + (b.second - cy) * (b.second - cy);
    if (da != db) return da < db;
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  if (int(pts.size()) > n_sites) pts.resize(n_sites);
  return pts;
}

}  // namespace

NetworkState generate_network(const RandomizationSpec& spec, uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, "network"));

  NetworkState state;
  state.propagation = spec.variant == netsim::PropagationVariant::ModelA
                          ? netsim::PropagationModel::model_a()
                          : netsim::PropagationModel::model_b();
  state.propagation.pathloss_intercept_db =
      jittered(state.propagation.pathloss_intercept_db, spec.intercept_jitter, rng);
  state.propagation.pathloss_slope_db_per_decade =
      jittered(state.propagation.pathloss_slope_db_per_decade, spec.slope_jitter, rng);
  state.propagation.shadowing_sigma_db =
      jittered(state.propagation.shadowing_sigma_db, spec.sigma_jitter, rng);
  double tx_power = jittered(46.0, spec.tx_power_jitter, rng);
  state.shadowing_seed = rng.next_u64();

  int n_cells = rng.uniform_int(spec.cell_count.lo, spec.cell_count.hi);
  int n_sites = (n_cells + spec.sectors_per_site - 1) / spec.sectors_per_site;

  std::vector<std::pair<double, double>> sites;
  if (spec.layout == SiteLayout::HexGridJittered) {
    // spacing chosen so n_sites hexagonal cells tile the square
    double spacing = std::sqrt(spec.area_side_m * spec.area_side_m /
                               (n_sites * std::sqrt(3.0) / 2.0));
    sites = hex_sites(spec.area_side_m, n_sites, spacing);
    for (auto& [x, y] : sites) {
      x = std::clamp(x + rng.uniform(-0.15, 0.15) * spacing, 0.0, spec.area_side_m);
      y = std::clamp(y + rng.uniform(-0.15, 0.15) * spacing, 0.0, spec.area_side_m);
    }
    while (int(sites.size()) < n_sites) {  // lattice underflow on tiny areas
      sites.emplace_back(rng.uniform(0, spec.area_side_m), rng.uniform(0, spec.area_side_m));
    }
  } else {
    for (int s = 0; s < n_sites; ++s) {
      sites.emplace_back(rng.uniform(0, spec.area_side_m), rng.uniform(0, spec.area_side_m));
    }
  }

  for (int i = 0; i < n_cells; ++i) {
    const auto& [sx, sy] = sites[i / spec.sectors_per_site];
    int sector = i % spec.sectors_per_site;
    CellConfig c;
    c.id = i;
    c.x_m = sx;
    c.y_m = sy;
    c.height_m = rng.uniform(25.0, 35.0);
    double base_az = 360.0 * sector / spec.sectors_per_site;
    c.azimuth_deg = std::fmod(base_az + rng.uniform(-10.0, 10.0) + 360.0, 360.0);
    c.tilt_deg = rng.uniform_int(spec.tilt_init_range.lo, spec.tilt_init_range.hi);
    c.tx_power_dbm = tx_power;
    state.cells.push_back(c);
  }

  int n_ues = rng.uniform_int(spec.ue_count.lo, spec.ue_count.hi);
  for (int u = 0; u < n_ues; ++u) {
    UserEquipment ue;
    ue.id = u;
    ue.x_m = rng.uniform(0, spec.area_side_m);
    ue.y_m = rng.uniform(0, spec.area_side_m);
    ue.indoor = rng.uniform() < spec.indoor_fraction;
    state.ues.push_back(ue);
  }

  state.validate();
  return state;
}

std::vector<CCOTask> generate_taskset(const NetworkState& network,
                                      const std::string& network_id,
                                      const RandomizationSpec& spec, int n_states,
                                      uint64_t seed) {
  require(n_states >= 1, "taskset: n_states must be >= 1");
  std::vector<CCOTask> tasks;
  tasks.reserve(n_states);
  Rng rng(derive_seed(seed, "taskset"));
  for (int i = 0; i < n_states; ++i) {
    CCOTask t;
    t.task_id = network_id + "/s" + std::to_string(i);
    t.network = network_id;
    t.seed = rng.next_u64();
    t.initial_tilts.reserve(network.cells.size());
    for (size_t c = 0; c < network.cells.size(); ++c) {
      t.initial_tilts.push_back(
          rng.uniform_int(spec.tilt_init_range.lo, spec.tilt_init_range.hi));
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

NetworkState task_initial_state(const NetworkState& network, const CCOTask& task) {
  require(task.initial_tilts.size() == network.cells.size(),
          "task " + task.task_id + ": tilt list length mismatch");
  NetworkState s = network;
  for (size_t c = 0; c < s.cells.size(); ++c) {
    double t = task.initial_tilts[c];
    require(t >= s.tilt_min_deg && t <= s.tilt_max_deg,
            "task " + task.task_id + ": initial tilt out of bounds");
    s.cells[c].tilt_deg = t;
  }
  return s;
}

const NetworkState& TaskSuite::network_of(const CCOTask& task) const {
  auto it = networks.find(task.network);
  if (it == networks.end()) fail("suite: unknown network id " + task.network);
  return it->second;
}

TaskSuite generate_suite(const RandomizationSpec& spec, int n_networks,
                         int states_per_network, const std::string& id_prefix,
                         uint64_t seed) {
  require(n_networks >= 1, "suite: n_networks must be >= 1");
  TaskSuite suite;
  for (int n = 0; n < n_networks; ++n) {
    std::string id = id_prefix + "net" + std::to_string(n);
    uint64_t net_seed = derive_seed(seed, "suite-network", uint64_t(n));
    NetworkState network = generate_network(spec, net_seed);
    std::vector<CCOTask> tasks = generate_taskset(
        network, id, spec, states_per_network, derive_seed(seed, "suite-tasks", uint64_t(n)));
    suite.networks.emplace(id, std::move(network));
    suite.tasks.insert(suite.tasks.end(), tasks.begin(), tasks.end());
  }
  return suite;
}

// --- serialization -----------------------------------------------------------

namespace {

json range_json(const IntRange& r) { return json{{"lo", r.lo}, {"hi", r.hi}}; }
IntRange range_from_json(const json& j) {
  return IntRange{j.at("lo").get<int>(), j.at("hi").get<int>()};
}
json frac_json(const FracRange& r) { return json{{"lo", r.lo}, {"hi", r.hi}}; }
FracRange frac_from_json(const json& j) {
  return FracRange{j.at("lo").get<double>(), j.at("hi").get<double>()};
}

}  // namespace

std::string spec_to_json_string(const RandomizationSpec& spec) {
  json doc{{"cell_count", range_json(spec.cell_count)},
           {"ue_count", range_json(spec.ue_count)},
           {"area_side_m", spec.area_side_m},
           {"site_layout", to_string(spec.layout)},
           {"sectors_per_site", spec.sectors_per_site},
           {"tilt_init_range", range_json(spec.tilt_init_range)},
           {"propagation_variant", netsim::to_string(spec.variant)},
           {"intercept_jitter", frac_json(spec.intercept_jitter)},
           {"slope_jitter", frac_json(spec.slope_jitter)},
           {"sigma_jitter", frac_json(spec.sigma_jitter)},
           {"tx_power_jitter", frac_json(spec.tx_power_jitter)},
           {"indoor_fraction", spec.indoor_fraction}};
  return doc.dump(2) + "\n";
}

RandomizationSpec spec_from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("spec json parse error: ") + e.what());
  }
  RandomizationSpec spec;  // absent fields keep their defaults
  if (doc.contains("cell_count")) spec.cell_count = range_from_json(doc.at("cell_count"));
  if (doc.contains("ue_count")) spec.ue_count = range_from_json(doc.at("ue_count"));
  spec.area_side_m = doc.value("area_side_m", spec.area_side_m);
  if (doc.contains("site_layout"))
    spec.layout = site_layout_from_string(doc.at("site_layout").get<std::string>());
  spec.sectors_per_site = doc.value("sectors_per_site", spec.sectors_per_site);
  if (doc.contains("tilt_init_range"))
    spec.tilt_init_range = range_from_json(doc.at("tilt_init_range"));
  if (doc.contains("propagation_variant"))
    spec.variant = netsim::propagation_variant_from_string(
        doc.at("propagation_variant").get<std::string>());
  if (doc.contains("intercept_jitter"))
    spec.intercept_jitter = frac_from_json(doc.at("intercept_jitter"));
  if (doc.contains("slope_jitter")) spec.slope_jitter = frac_from_json(doc.at("slope_jitter"));
  if (doc.contains("sigma_jitter")) spec.sigma_jitter = frac_from_json(doc.at("sigma_jitter"));
  if (doc.contains("tx_power_jitter"))
    spec.tx_power_jitter = frac_from_json(doc.at("tx_power_jitter"));
  spec.indoor_fraction = doc.value("indoor_fraction", spec.indoor_fraction);
  spec.validate();
  return spec;
}

void save_suite(const std::filesystem::path& dir, const TaskSuite& suite) {
  std::filesystem::create_directories(dir / "networks");
  json networks = json::array();
  for (const auto& [id, network] : suite.networks) {
    std::string file = "networks/" + id + ".json";
    // network ids become file names; keep them path-safe
    std::string safe = file;
    std::replace(safe.begin(), safe.end(), '/', '_');
    safe = "networks/" + safe.substr(9);
    netsim::save_network(dir / safe, network);
    networks.push_back(json{{"id", id}, {"path", safe}});
  }
  json tasks = json::array();
  for (const CCOTask& t : suite.tasks) {
    tasks.push_back(json{{"task_id", t.task_id},
                         {"network", t.network},
                         {"initial_tilts", t.initial_tilts},
                         {"seed", t.seed}});
  }
  json doc{{"version", 1}, {"networks", std::move(networks)}, {"tasks", std::move(tasks)}};
  write_file(dir / "tasks.json", doc.dump(2) + "\n");
}

TaskSuite load_suite(const std::filesystem::path& manifest_path) {
  std::filesystem::path dir = manifest_path.parent_path();
  json doc;
  try {
    doc = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    fail(std::string("task manifest parse error: ") + e.what());
  }
  require(doc.value("version", 0) == 1, "task manifest: unsupported version");
  TaskSuite suite;
  for (const json& jn : doc.at("networks")) {
    std::string id = jn.at("id").get<std::string>();
    suite.networks.emplace(id, netsim::load_network(dir / jn.at("path").get<std::string>()));
  }
  for (const json& jt : doc.at("tasks")) {
    CCOTask t;
    t.task_id = jt.at("task_id").get<std::string>();
    t.network = jt.at("network").get<std::string>();
    t.initial_tilts = jt.at("initial_tilts").get<std::vector<double>>();
    t.seed = jt.at("seed").get<uint64_t>();
    require(suite.networks.count(t.network) > 0,
            "task manifest: task " + t.task_id + " references unknown network");
    suite.tasks.push_back(std::move(t));
  }
  return suite;
}

}  // namespace cco::scenario
