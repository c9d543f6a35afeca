#include "cco/graphdistill.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <tuple>

#include "cco/common.hpp"
#include "json.hpp"

namespace cco::graphdistill {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Health of every cell: fraction of its served UEs passing both the RSRP and
// SINR thresholds. A cell serving no UEs is perfectly healthy.
std::vector<double> served_health(const netsim::MeasurementSet& meas,
                                  const reward::RewardWeights& w) {
  std::vector<double> pass(meas.n_cells, 0.0);
  std::vector<double> total(meas.n_cells, 0.0);
  for (int u = 0; u < meas.ue_count(); ++u) {
    const int s = meas.serving[u];
    total[s] += 1.0;
    if (meas.rsrp(u, s) >= w.rsrp_threshold_dbm && meas.sinr_db[u] >= w.sinr_threshold_db)
      pass[s] += 1.0;
  }
  std::vector<double> health(meas.n_cells, 1.0);
  for (int c = 0; c < meas.n_cells; ++c)
    if (total[c] > 0) health[c] = pass[c] / total[c];
  return health;
}

double percentile10(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const size_t idx = size_t(0.10 * double(values.size() - 1));
  return values[idx];
}

double clip1(double v) { return std::clamp(v, -1.0, 1.0); }

double rsrp_norm(double dbm) {
  if (std::isnan(dbm)) return -1.0;
  return clip1((dbm + 90.0) / 50.0);
}

double sinr_norm(double db) {
  if (std::isnan(db)) return -1.0;
  return clip1((db - 5.0) / 25.0);
}

}  // namespace

NetworkGraph build_graph(const netsim::NetworkState& state,
                         const netsim::MeasurementSet& meas,
                         const GraphOptions& opts) {
  require(meas.n_cells == state.cell_count(), "graph: measurement/cell count mismatch");
  require(meas.ue_count() == state.ue_count(), "graph: measurement/ue count mismatch");
  const int n = state.cell_count();
  const int n_ues = state.ue_count();

  NetworkGraph g;
  g.n_cells = n;
  g.n_ues = n_ues;
  g.detection_floor_dbm = opts.detection_floor_dbm;
  g.cells.resize(n);
  g.distance_m.assign(size_t(n) * n, 0.0);
  g.coupling_lin.assign(size_t(n) * n, 0.0);
  g.overlap_count.assign(size_t(n) * n, 0.0);
  g.mean_rsrp_dbm.assign(size_t(n) * n, kNaN);
  g.p10_rsrp_dbm.assign(size_t(n) * n, kNaN);
  g.ue_detected.resize(n_ues);

  for (int i = 0; i < n; ++i) {
    const auto& c = state.cells[i];
    auto& node = g.cells[i];
    node.x_m = c.x_m;
    node.y_m = c.y_m;
    node.height_m = c.height_m;
    node.azimuth_deg = c.azimuth_deg;
    node.tilt_deg = c.tilt_deg;
    node.tx_power_dbm = c.tx_power_dbm;
    for (int j = 0; j < n; ++j) {
      const auto& d = state.cells[j];
      g.distance_m[size_t(i) * n + j] = std::hypot(c.x_m - d.x_m, c.y_m - d.y_m);
    }
  }

  std::vector<std::vector<int>> served(n);
  for (int u = 0; u < n_ues; ++u) {
    const int s = meas.serving[u];
    served[s].push_back(u);
    auto& det = g.ue_detected[u];
    for (int c = 0; c < n; ++c)
      if (meas.rsrp(u, c) >= opts.detection_floor_dbm) det.push_back(c);
    if (!std::binary_search(det.begin(), det.end(), s))
      det.insert(std::lower_bound(det.begin(), det.end(), s), s);
    for (int a : det)
      for (int b : det) g.overlap_count[size_t(a) * n + b] += 1.0;
  }

  // Aggregate served UEs in ue-id order so the sums are byte-stable no matter
  // how the UE list is stored.
  for (auto& list : served) {
    std::sort(list.begin(), list.end(),
              [&](int a, int b) { return state.ues[a].id < state.ues[b].id; });
  }

  const auto health = served_health(meas, opts.weights);
  std::vector<double> column;
  for (int i = 0; i < n; ++i) {
    auto& node = g.cells[i];
    node.served_count = int(served[i].size());
    node.health = health[i];
    if (served[i].empty()) {
      node.mean_served_rsrp_dbm = kNaN;
      node.mean_served_sinr_db = kNaN;
      continue;
    }
    double rsrp_sum = 0, sinr_sum = 0;
    for (int u : served[i]) {
      rsrp_sum += meas.rsrp(u, i);
      sinr_sum += meas.sinr_db[u];
    }
    node.mean_served_rsrp_dbm = rsrp_sum / double(served[i].size());
    node.mean_served_sinr_db = sinr_sum / double(served[i].size());
    for (int j = 0; j < n; ++j) {
      column.clear();
      double lin_sum = 0, db_sum = 0;
      for (int u : served[i]) {
        const double dbm = meas.rsrp(u, j);
        lin_sum += db_to_linear(dbm);
        db_sum += dbm;
        column.push_back(dbm);
      }
      g.coupling_lin[size_t(i) * n + j] = lin_sum;
      g.mean_rsrp_dbm[size_t(i) * n + j] = db_sum / double(column.size());
      g.p10_rsrp_dbm[size_t(i) * n + j] = percentile10(column);
    }
  }
  return g;
}

double compute_affinity(const NetworkGraph& g, int i, int j) {
  if (i == j) return 0.0;
  const int n = g.n_cells;
  double max_coupling = 0.0;
  for (int k = 0; k < n; ++k)
    if (k != i) max_coupling = std::max(max_coupling, g.coupling_lin[size_t(i) * n + k]);
  const double coupling_term =
      max_coupling > 0 ? g.coupling_lin[size_t(i) * n + j] / max_coupling : 0.0;
  const double distance_term = std::exp(-g.distance_m[size_t(i) * n + j] / 500.0);
  return 0.5 * distance_term + 0.5 * coupling_term;
}

std::vector<double> affinity_matrix(const NetworkGraph& g) {
  const int n = g.n_cells;
  std::vector<double> a(size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) a[size_t(i) * n + j] = compute_affinity(g, i, j);
  return a;
}

FieldOfView select_fov(const NetworkGraph& g, int center, int n_neighbors) {
  require(center >= 0 && center < g.n_cells, "fov: center out of range");
  require(n_neighbors >= 0, "fov: negative neighbor count");
  FieldOfView fov;
  fov.center = center;
  fov.k_fov = n_neighbors + 1;
  fov.members.push_back(center);

  // Affinity ties (co-sited sectors of a distant site all couple at zero) are
  // broken by physical identity, not cell id, so relabeling cannot reorder the
  // field of view. The id is a last resort for exact physical duplicates.
  using Key = std::tuple<double, double, double, double, double, int>;
  std::vector<Key> ranked;
  for (int j = 0; j < g.n_cells; ++j)
    if (j != center) {
      const auto& c = g.cells[j];
      ranked.emplace_back(-compute_affinity(g, center, j), c.x_m, c.y_m,
                          c.azimuth_deg, c.tilt_deg, j);
    }
  std::sort(ranked.begin(), ranked.end());
  const int take = std::min<int>(n_neighbors, int(ranked.size()));
  for (int i = 0; i < take; ++i) fov.members.push_back(std::get<int>(ranked[i]));
  return fov;
}

std::vector<int> select_top_k(const netsim::NetworkState& state,
                              const netsim::MeasurementSet& meas, int k,
                              const reward::RewardWeights& w) {
  require(k >= 1, "top-k: k must be positive");
  require(meas.n_cells == state.cell_count(), "top-k: measurement/cell count mismatch");
  const auto health = served_health(meas, w);
  std::vector<int> ids(state.cell_count());
  for (int i = 0; i < state.cell_count(); ++i) ids[i] = i;
  std::stable_sort(ids.begin(), ids.end(),
                   [&](int a, int b) { return health[a] < health[b]; });
  ids.resize(std::min<size_t>(ids.size(), size_t(k)));
  return ids;
}

// --- channels -------------------------------------------------------------------

namespace {

struct ChannelInfo {
  Channel channel;
  const char* name;
  bool diagonal;
};

constexpr ChannelInfo kChannels[] = {
    {Channel::Mask, "mask", false},
    {Channel::Tilt, "tilt", true},
    {Channel::AzimuthSin, "azimuth_sin", true},
    {Channel::AzimuthCos, "azimuth_cos", true},
    {Channel::Height, "height", true},
    {Channel::TxPower, "tx_power", true},
    {Channel::ServedLoad, "served_load", true},
    {Channel::MeanServedRsrp, "mean_served_rsrp", true},
    {Channel::MeanServedSinr, "mean_served_sinr", true},
    {Channel::Health, "health", true},
    {Channel::Distance, "distance", false},
    {Channel::BearingSin, "bearing_sin", false},
    {Channel::BearingCos, "bearing_cos", false},
    {Channel::HeightDelta, "height_delta", false},
    {Channel::CouplingFwd, "coupling_fwd", false},
    {Channel::CouplingRev, "coupling_rev", false},
    {Channel::Affinity, "affinity", false},
    {Channel::OverlapLoad, "overlap_load", false},
    {Channel::MeanRsrpFromOther, "mean_rsrp_from_other", false},
    {Channel::P10RsrpFromOther, "p10_rsrp_from_other", false},
    {Channel::TiltDifference, "tilt_difference", false},
};

const ChannelInfo& info(Channel c) {
  for (const auto& ci : kChannels)
    if (ci.channel == c) return ci;
  fail("unknown channel");
}

}  // namespace

const char* channel_name(Channel c) { return info(c).name; }
bool channel_is_diagonal(Channel c) { return info(c).diagonal; }

ChannelRegistry ChannelRegistry::defaults() {
  ChannelRegistry r;
  for (const auto& ci : kChannels) r.channels_.push_back(ci.channel);
  return r;
}

ChannelRegistry ChannelRegistry::from_names(const std::vector<std::string>& names) {
  ChannelRegistry r;
  for (const auto& name : names) {
    bool found = false;
    for (const auto& ci : kChannels) {
      if (name == ci.name) {
        r.channels_.push_back(ci.channel);
        found = true;
        break;
      }
    }
    if (!found) fail("unknown channel name: " + name);
  }
  return r;
}

std::vector<std::string> ChannelRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(channels_.size());
  for (Channel c : channels_) out.emplace_back(channel_name(c));
  return out;
}

// --- distillation ---------------------------------------------------------------

namespace {

// Mean linear coupling from `to` at UEs served by `from`, as normalized dBm.
double coupling_norm(const NetworkGraph& g, int from, int to) {
  const auto& node = g.cells[from];
  if (node.served_count == 0) return -1.0;
  const double lin = g.coupling_lin[size_t(from) * g.n_cells + to] / node.served_count;
  if (lin <= 0) return -1.0;
  return rsrp_norm(linear_to_db(lin));
}

double eval_channel(const NetworkGraph& g, Channel c, int a, int b) {
  const int n = g.n_cells;
  const auto& na = g.cells[a];
  const auto& nb = g.cells[b];
  switch (c) {
    case Channel::Mask:
      return 1.0;
    case Channel::Tilt:
      return na.tilt_deg / 15.0;
    case Channel::AzimuthSin:
      return std::sin(deg_to_rad(na.azimuth_deg));
    case Channel::AzimuthCos:
      return std::cos(deg_to_rad(na.azimuth_deg));
    case Channel::Height:
      return na.height_m / 100.0;
    case Channel::TxPower:
      return na.tx_power_dbm / 60.0;
    case Channel::ServedLoad:
      return double(na.served_count) * n / std::max(1, g.n_ues) / 4.0;
    case Channel::MeanServedRsrp:
      return rsrp_norm(na.mean_served_rsrp_dbm);
    case Channel::MeanServedSinr:
      return sinr_norm(na.mean_served_sinr_db);
    case Channel::Health:
      return na.health;
    case Channel::Distance:
      return g.distance_m[size_t(a) * n + b] / 2000.0;
    case Channel::BearingSin:
    case Channel::BearingCos: {
      const double dx = nb.x_m - na.x_m, dy = nb.y_m - na.y_m;
      if (dx == 0 && dy == 0) return 0.0;
      const double ang = std::atan2(dy, dx);
      return c == Channel::BearingSin ? std::sin(ang) : std::cos(ang);
    }
    case Channel::HeightDelta:
      return (na.height_m - nb.height_m) / 100.0;
    case Channel::CouplingFwd:
      return coupling_norm(g, a, b);
    case Channel::CouplingRev:
      return coupling_norm(g, b, a);
    case Channel::Affinity:
      return compute_affinity(g, a, b);
    case Channel::OverlapLoad:
      return g.overlap_count[size_t(a) * n + b] * n / std::max(1, g.n_ues) / 4.0;
    case Channel::MeanRsrpFromOther:
      return rsrp_norm(g.mean_rsrp_dbm[size_t(a) * n + b]);
    case Channel::P10RsrpFromOther:
      return rsrp_norm(g.p10_rsrp_dbm[size_t(a) * n + b]);
    case Channel::TiltDifference:
      return (na.tilt_deg - nb.tilt_deg) / 15.0;
  }
  fail("unknown channel");
}

}  // namespace

LocalTensor distill(const NetworkGraph& g, const FieldOfView& fov,
                    const ChannelRegistry& registry) {
  require(fov.valid_count() >= 1 && fov.valid_count() <= fov.k_fov,
          "distill: invalid field of view");
  LocalTensor t;
  t.k_fov = fov.k_fov;
  t.m = registry.size();
  t.center_cell = fov.center;
  t.valid_count = fov.valid_count();
  t.data.assign(size_t(t.k_fov) * t.k_fov * t.m, 0.0f);

  const int valid = fov.valid_count();
  for (int j = 0; j < valid; ++j) {
    for (int k = 0; k < valid; ++k) {
      const int a = fov.members[j];
      const int b = fov.members[k];
      float* cell = t.data.data() + (size_t(j) * t.k_fov + k) * t.m;
      for (int c = 0; c < t.m; ++c) {
        const Channel ch = registry.at(c);
        if (ch != Channel::Mask && channel_is_diagonal(ch) != (j == k)) continue;
        cell[c] = float(clip1(eval_channel(g, ch, a, b)));
      }
    }
  }
  return t;
}

// --- perception -----------------------------------------------------------------

Perception perceive(const netsim::NetworkState& state, netsim::MeasurementSet meas,
                    const PerceptionConfig& cfg) {
  require(cfg.k_fov >= 1, "perceive: k_fov must be positive");
  Perception p;
  p.meas = std::move(meas);
  p.graph = build_graph(state, p.meas, cfg.graph);
  p.top_cells = select_top_k(state, p.meas, cfg.top_k, cfg.graph.weights);
  for (int center : p.top_cells) {
    p.fovs.push_back(select_fov(p.graph, center, cfg.k_fov - 1));
    p.tensors.push_back(distill(p.graph, p.fovs.back(), cfg.registry));
  }
  return p;
}

Perception perceive(const netsim::NetworkState& state, const PerceptionConfig& cfg) {
  return perceive(state, netsim::compute_measurements(state), cfg);
}

std::vector<int> local_reward_cells(const FieldOfView& fov, int n_neighbors) {
  std::vector<int> out;
  const int take = std::min<int>(1 + n_neighbors, fov.valid_count());
  out.assign(fov.members.begin(), fov.members.begin() + take);
  return out;
}

// --- serialization ---------------------------------------------------------------

namespace {

using nlohmann::json;

void write_floats(const std::filesystem::path& path, const std::vector<float>& data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(bool(out), "cannot open for write: " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            std::streamsize(data.size() * sizeof(float)));
  require(bool(out), "write failed: " + path.string());
}

std::vector<float> read_floats(const std::filesystem::path& path, size_t expected) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  require(bool(in), "cannot open: " + path.string());
  const auto bytes = size_t(in.tellg());
  require(bytes == expected * sizeof(float),
          "tensor data size mismatch: " + path.string());
  in.seekg(0);
  std::vector<float> data(expected);
  in.read(reinterpret_cast<char*>(data.data()), std::streamsize(bytes));
  require(bool(in), "read failed: " + path.string());
  return data;
}

}  // namespace

void save_tensor(const std::filesystem::path& stem, const LocalTensor& tensor,
                 const ChannelRegistry& registry) {
  require(registry.size() == tensor.m, "save_tensor: registry/channel mismatch");
  json sidecar{{"version", 1},
               {"dtype", "float32_le"},
               {"k_fov", tensor.k_fov},
               {"m", tensor.m},
               {"center_cell", tensor.center_cell},
               {"valid_count", tensor.valid_count},
               {"channels", registry.names()}};
  write_floats(std::filesystem::path(stem).concat(".bin"), tensor.data);
  write_file(std::filesystem::path(stem).concat(".json"), sidecar.dump(2) + "\n");
}

LocalTensor load_tensor(const std::filesystem::path& stem) {
  const auto text = read_file(std::filesystem::path(stem).concat(".json"));
  json sidecar = json::parse(text, nullptr, true);
  LocalTensor t;
  t.k_fov = sidecar.at("k_fov").get<int>();
  t.m = sidecar.at("m").get<int>();
  t.center_cell = sidecar.at("center_cell").get<int>();
  t.valid_count = sidecar.at("valid_count").get<int>();
  require(t.k_fov >= 1 && t.m >= 1, "load_tensor: bad shape");
  t.data = read_floats(std::filesystem::path(stem).concat(".bin"),
                       size_t(t.k_fov) * t.k_fov * t.m);
  return t;
}

void LabeledTensorDataset::append(const LocalTensor& tensor, const Meta& record) {
  if (meta.empty() && data.empty()) {
    k_fov = tensor.k_fov;
    m = tensor.m;
  }
  require(tensor.k_fov == k_fov && tensor.m == m, "dataset: shape mismatch on append");
  require(record.label >= 0 && record.label < netsim::kTiltActionCount,
          "dataset: label out of range");
  meta.push_back(record);
  data.insert(data.end(), tensor.data.begin(), tensor.data.end());
}

void save_dataset(const std::filesystem::path& stem, const LabeledTensorDataset& ds) {
  require(ds.data.size() == ds.size() * ds.record_size(), "dataset: inconsistent sizes");
  json records = json::array();
  for (const auto& m : ds.meta)
    records.push_back(json{{"task_id", m.task_id},
                           {"cell_id", m.cell_id},
                           {"center_cell", m.center_cell},
                           {"label", m.label}});
  json sidecar{{"version", 1},
               {"dtype", "float32_le"},
               {"k_fov", ds.k_fov},
               {"m", ds.m},
               {"channels", ds.channels},
               {"examples", std::move(records)}};
  write_floats(std::filesystem::path(stem).concat(".bin"), ds.data);
  write_file(std::filesystem::path(stem).concat(".json"), sidecar.dump(2) + "\n");
}

LabeledTensorDataset load_dataset(const std::filesystem::path& stem) {
  const auto text = read_file(std::filesystem::path(stem).concat(".json"));
  json sidecar = json::parse(text, nullptr, true);
  LabeledTensorDataset ds;
  ds.k_fov = sidecar.at("k_fov").get<int>();
  ds.m = sidecar.at("m").get<int>();
  require(ds.k_fov >= 1 && ds.m >= 1, "load_dataset: bad shape");
  ds.channels = sidecar.at("channels").get<std::vector<std::string>>();
  for (const auto& rec : sidecar.at("examples")) {
    LabeledTensorDataset::Meta m;
    m.task_id = rec.at("task_id").get<std::string>();
    m.cell_id = rec.at("cell_id").get<int>();
    m.center_cell = rec.at("center_cell").get<int>();
    m.label = rec.at("label").get<int>();
    require(m.label >= 0 && m.label < netsim::kTiltActionCount,
            "load_dataset: label out of range");
    ds.meta.push_back(std::move(m));
  }
  ds.data = read_floats(std::filesystem::path(stem).concat(".bin"),
                        ds.size() * ds.record_size());
  return ds;
}

}  // namespace cco::graphdistill
