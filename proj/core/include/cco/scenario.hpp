#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cco/netsim.hpp"

namespace cco::scenario {

struct IntRange {
  int lo = 0;
  int hi = 0;
  bool contains(int v) const { return v >= lo && v <= hi; }
};

// fractional jitter applied multiplicatively: value *= 1 + uniform(lo, hi)
struct FracRange {
  double lo = 0.0;
  double hi = 0.0;
};

enum class SiteLayout { HexGridJittered, UniformRandom };

std::string to_string(SiteLayout l);
SiteLayout site_layout_from_string(const std::string& s);

// Domain-randomization knobs for one family of networks.
struct RandomizationSpec {
  IntRange cell_count{30, 60};
  IntRange ue_count{400, 620};
  double area_side_m = 5000.0;
  SiteLayout layout = SiteLayout::HexGridJittered;
  int sectors_per_site = 3;
  IntRange tilt_init_range{0, 10};  // integer degrees
  netsim::PropagationVariant variant = netsim::PropagationVariant::ModelA;
  FracRange intercept_jitter{-0.02, 0.02};
  FracRange slope_jitter{-0.03, 0.03};
  FracRange sigma_jitter{-0.10, 0.10};
  FracRange tx_power_jitter{-0.02, 0.02};
  double indoor_fraction = 0.2;

  void validate() const;
};

// One CCO problem instance: a network plus the tilt assignment it starts from.
struct CCOTask {
  std::string task_id;
  std::string network;  // id of the network in the owning suite
  std::vector<double> initial_tilts;
  uint64_t seed = 0;
};

netsim::NetworkState generate_network(const RandomizationSpec& spec, uint64_t seed);

std::vector<CCOTask> generate_taskset(const netsim::NetworkState& network,
                                      const std::string& network_id,
                                      const RandomizationSpec& spec, int n_states,
                                      uint64_t seed);

// Applies a task's initial tilts to its network.
netsim::NetworkState task_initial_state(const netsim::NetworkState& network,
                                        const CCOTask& task);

// A set of networks plus the tasks defined over them.
struct TaskSuite {
  std::map<std::string, netsim::NetworkState> networks;
  std::vector<CCOTask> tasks;

  const netsim::NetworkState& network_of(const CCOTask& task) const;
};

TaskSuite generate_suite(const RandomizationSpec& spec, int n_networks,
                         int states_per_network, const std::string& id_prefix,
                         uint64_t seed);

// Manifest + per-network json files under `dir`.
void save_suite(const std::filesystem::path& dir, const TaskSuite& suite);
TaskSuite load_suite(const std::filesystem::path& manifest_path);

std::string spec_to_json_string(const RandomizationSpec& spec);
RandomizationSpec spec_from_json_string(const std::string& text);

}  // namespace cco::scenario
