#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cco/netsim.hpp"
#include "cco/reward.hpp"

namespace cco::graphdistill {

// Heterogeneous abstraction of one observed network: cell nodes with
// aggregated features, UE detection edges, and dense cell-cell relation
// matrices (distance, directed interference coupling, UE overlap, received
// power statistics). All matrices are row-major n_cells x n_cells.
struct NetworkGraph {
  struct CellNode {
    double x_m = 0, y_m = 0, height_m = 0;
    double azimuth_deg = 0, tilt_deg = 0, tx_power_dbm = 0;
    int served_count = 0;
    double mean_served_rsrp_dbm = 0;  // NaN when no served UEs
    double mean_served_sinr_db = 0;   // NaN when no served UEs
    double health = 1.0;              // fraction of served UEs passing both thresholds
  };

  int n_cells = 0;
  int n_ues = 0;
  double detection_floor_dbm = -130.0;
  std::vector<CellNode> cells;
  std::vector<double> distance_m;      // symmetric
  std::vector<double> coupling_lin;    // [i][j]: sum of linear RSRP from j over UEs served by i
  std::vector<double> overlap_count;   // [i][j]: UEs detecting both i and j
  std::vector<double> mean_rsrp_dbm;   // [i][j]: mean RSRP from j over UEs served by i (NaN if none)
  std::vector<double> p10_rsrp_dbm;    // [i][j]: lower 10th percentile of the same (NaN if none)
  std::vector<std::vector<int>> ue_detected;  // per UE: cell ids with RSRP above floor (serving always included)

  double at(const std::vector<double>& m, int i, int j) const {
    return m[size_t(i) * n_cells + j];
  }
};

struct GraphOptions {
  double detection_floor_dbm = -130.0;
  reward::RewardWeights weights;  // thresholds used for cell health
};

NetworkGraph build_graph(const netsim::NetworkState& state,
                         const netsim::MeasurementSet& meas,
                         const GraphOptions& opts = {});

// affinity(i, j) = 0.5 exp(-d_ij / 500 m) + 0.5 coupling_ij / max_k coupling_ik
double compute_affinity(const NetworkGraph& graph, int i, int j);

// Dense affinity of every ordered pair; the diagonal is zero.
std::vector<double> affinity_matrix(const NetworkGraph& graph);

// Center cell plus its highest-affinity neighbors, capacity k_fov = n + 1.
struct FieldOfView {
  int center = 0;
  int k_fov = 0;
  std::vector<int> members;  // center first, then descending (affinity, id asc); size <= k_fov

  int valid_count() const { return int(members.size()); }
};

FieldOfView select_fov(const NetworkGraph& graph, int center, int n_neighbors);

// The k cells with the lowest health (fraction of served UEs passing both
// thresholds; cells serving nothing count as healthy). Ties break on id.
std::vector<int> select_top_k(const netsim::NetworkState& state,
                              const netsim::MeasurementSet& meas, int k,
                              const reward::RewardWeights& w);

// --- channels -----------------------------------------------------------------

// Per-cell channels live on the tensor diagonal, pairwise channels off it.
// Every channel is normalized to [-1, 1] with fixed absolute scales so inputs
// from different networks stay commensurable.
enum class Channel {
  Mask,
  Tilt,
  AzimuthSin,
  AzimuthCos,
  Height,
  TxPower,
  ServedLoad,
  MeanServedRsrp,
  MeanServedSinr,
  Health,
  Distance,
  BearingSin,
  BearingCos,
  HeightDelta,
  CouplingFwd,
  CouplingRev,
  Affinity,
  OverlapLoad,
  MeanRsrpFromOther,
  P10RsrpFromOther,
  TiltDifference,
};

const char* channel_name(Channel c);
bool channel_is_diagonal(Channel c);

class ChannelRegistry {
 public:
  static ChannelRegistry defaults();
  // Throws on unknown channel names.
  static ChannelRegistry from_names(const std::vector<std::string>& names);

  int size() const { return int(channels_.size()); }
  Channel at(int i) const { return channels_[i]; }
  std::vector<std::string> names() const;

 private:
  std::vector<Channel> channels_;
};

// Fixed-shape local view: (k_fov, k_fov, m) row-major, float32. Rows/columns
// beyond the field of view's validity are zero with mask 0.
struct LocalTensor {
  int k_fov = 0;
  int m = 0;
  int center_cell = 0;
  int valid_count = 0;
  std::vector<float> data;

  float at(int j, int k, int c) const {
    return data[(size_t(j) * k_fov + k) * m + c];
  }
  size_t size() const { return data.size(); }
};

LocalTensor distill(const NetworkGraph& graph, const FieldOfView& fov,
                    const ChannelRegistry& registry);

// --- the full perception pipeline ---------------------------------------------

struct PerceptionConfig {
  int top_k = 8;
  int k_fov = 32;
  ChannelRegistry registry = ChannelRegistry::defaults();
  GraphOptions graph;
};

struct Perception {
  netsim::MeasurementSet meas;
  NetworkGraph graph;
  std::vector<int> top_cells;
  std::vector<FieldOfView> fovs;
  std::vector<LocalTensor> tensors;
};

Perception perceive(const netsim::NetworkState& state, netsim::MeasurementSet meas,
                    const PerceptionConfig& cfg);
Perception perceive(const netsim::NetworkState& state, const PerceptionConfig& cfg);

// Cells whose served UEs count toward a cell's local reward: the cell itself
// plus its first `n_neighbors` field-of-view neighbors.
std::vector<int> local_reward_cells(const FieldOfView& fov, int n_neighbors = 8);

// --- serialization --------------------------------------------------------------

// stem.bin: flat little-endian float32; stem.json: shape, channels, center id.
void save_tensor(const std::filesystem::path& stem, const LocalTensor& tensor,
                 const ChannelRegistry& registry);
LocalTensor load_tensor(const std::filesystem::path& stem);

// Labeled training data in the same binary layout: records concatenated in
// data.bin, metadata (including per-record labels) in data.json.
struct LabeledTensorDataset {
  struct Meta {
    std::string task_id;
    int cell_id = 0;
    int center_cell = 0;
    int label = 0;  // tilt class 0..10 (delta + 5)
  };

  int k_fov = 0;
  int m = 0;
  std::vector<std::string> channels;
  std::vector<Meta> meta;
  std::vector<float> data;  // meta.size() records of k_fov*k_fov*m floats

  size_t record_size() const { return size_t(k_fov) * k_fov * m; }
  size_t size() const { return meta.size(); }
  std::span<const float> tensor_data(size_t i) const {
    return {data.data() + i * record_size(), record_size()};
  }
  void append(const LocalTensor& tensor, const Meta& m);
};

void save_dataset(const std::filesystem::path& stem, const LabeledTensorDataset& ds);
LabeledTensorDataset load_dataset(const std::filesystem::path& stem);

}  // namespace cco::graphdistill
