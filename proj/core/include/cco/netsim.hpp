#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cco/common.hpp"

namespace cco::netsim {

// Antenna + radio configuration of one sector. Positions are meters in a flat
// 2-D plane, the antenna sits at `height_m` above it. Tilt is mechanical
// downtilt: positive angles point the main lobe toward the ground.
struct CellConfig {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double height_m = 30.0;
  double azimuth_deg = 0.0;  // [0, 360), bearing of the boresight in the plane
  double tilt_deg = 0.0;
  double tx_power_dbm = 46.0;
  double max_gain_dbi = 15.0;
  double vertical_beamwidth_deg = 10.0;
  double horizontal_beamwidth_deg = 65.0;
};

struct UserEquipment {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  bool indoor = false;
};

constexpr double kUeHeightM = 1.5;

enum class PropagationVariant { ModelA, ModelB };

std::string to_string(PropagationVariant v);
PropagationVariant propagation_variant_from_string(const std::string& s);

// Log-distance pathloss with frozen lognormal shadowing. The two variants are
// deliberately different parameterizations used for cross-model transfer
// experiments.
struct PropagationModel {
  PropagationVariant variant = PropagationVariant::ModelA;
  double pathloss_intercept_db = 128.1;   // at 1 km
  double pathloss_slope_db_per_decade = 37.6;
  double shadowing_sigma_db = 6.0;
  double indoor_penetration_loss_db = 0.0;
  double min_coupling_distance_m = 10.0;

  static PropagationModel model_a();
  static PropagationModel model_b();

  void validate() const;
};

struct NetworkState {
  std::vector<CellConfig> cells;  // ids dense 0..n-1, in order
  std::vector<UserEquipment> ues;
  PropagationModel propagation;
  double noise_floor_dbm = -110.0;
  uint64_t shadowing_seed = 0;
  double tilt_min_deg = 0.0;
  double tilt_max_deg = 15.0;

  void validate() const;  // throws cco::Error on violated invariants
  int cell_count() const { return int(cells.size()); }
  int ue_count() const { return int(ues.size()); }
};

// Per-UE measurement report. Stored as flat arrays indexed by the UE's
// position in NetworkState::ues; rsrp is row-major (ue, cell).
struct MeasurementSet {
  int n_cells = 0;
  std::vector<int> serving;       // serving cell id per UE
  std::vector<double> sinr_db;    // per UE
  std::vector<double> rsrp_dbm;   // n_ues * n_cells

  int ue_count() const { return int(serving.size()); }
  double rsrp(int ue, int cell) const { return rsrp_dbm[size_t(ue) * n_cells + cell]; }
};

// Joint one-shot tilt adjustment: integer per-cell deltas in [-5, +5].
struct ActionVector {
  struct Entry {
    int cell_id = 0;
    int tilt_delta_deg = 0;
  };
  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
  void validate(int n_cells) const;
};

constexpr int kTiltDeltaMin = -5;
constexpr int kTiltDeltaMax = +5;
constexpr int kTiltActionCount = 11;  // deltas -5..+5, class index = delta + 5

// --- radio primitives -------------------------------------------------------

// Separable quadratic pattern with 20/25 dB attenuation floors.
double antenna_gain_db(const CellConfig& cell, const UserEquipment& ue);

// Log-distance pathloss + frozen shadowing keyed by (seed, cell id, ue id).
double path_loss_db(const PropagationModel& model, const CellConfig& cell,
                    const UserEquipment& ue, uint64_t shadowing_seed);

MeasurementSet compute_measurements(const NetworkState& state);

// Returns a new state with deltas added to tilts (clamped to the state's tilt
// bounds); the input is untouched. Unknown cell ids are rejected.
NetworkState apply_action(const NetworkState& state, const ActionVector& action);

// --- incremental evaluation -------------------------------------------------

// Caches everything about a network that does not depend on tilt (geometry,
// pathloss, horizontal attenuation) so that optimizers can sweep tilt vectors
// cheaply. measurements() matches compute_measurements on the equivalent
// state; compute_measurements is implemented on top of this engine so there is
// exactly one code path for the radio arithmetic.
class MeasurementEngine {
 public:
  explicit MeasurementEngine(const NetworkState& state);

  int cell_count() const { return n_cells_; }
  int ue_count() const { return n_ues_; }
  double tilt(int cell_id) const { return tilts_[cell_id]; }
  const std::vector<double>& tilts() const { return tilts_; }
  double tilt_min() const { return tilt_min_; }
  double tilt_max() const { return tilt_max_; }

  void set_tilt(int cell_id, double tilt_deg);
  void set_tilts(const std::vector<double>& tilts_deg);

  MeasurementSet measurements() const;

  // Threshold pass counts over all UEs at the current tilts (coverage counts
  // serving RSRP, quality counts SINR).
  int coverage_pass_count(double rsrp_threshold_dbm) const;
  int quality_pass_count(double sinr_threshold_db) const;

 private:
  void refresh() const;

  int n_cells_ = 0;
  int n_ues_ = 0;
  double noise_lin_mw_ = 0.0;
  double tilt_min_ = 0.0;
  double tilt_max_ = 15.0;
  std::vector<double> tilts_;
  std::vector<double> vbw_;            // per cell
  std::vector<double> theta_deg_;      // (cell, ue) depression angle
  std::vector<double> const_dbm_;      // (cell, ue) tilt-independent rsrp part
  std::vector<double> rsrp_dbm_;       // (cell, ue) at current tilts
  std::vector<double> rsrp_lin_;       // (cell, ue)
  mutable bool dirty_ = true;
  mutable std::vector<int> serving_;   // per ue
  mutable std::vector<double> sinr_db_;
  mutable std::vector<double> scratch_;
};

// --- serialization -----------------------------------------------------------

std::string to_json_string(const NetworkState& state);
NetworkState network_from_json_string(const std::string& text);
void save_network(const std::filesystem::path& path, const NetworkState& state);
NetworkState load_network(const std::filesystem::path& path);

// CSV columns: ue_id, serving_cell, sinr_db, rsrp_<cellid>...
void write_measurements_csv(const std::filesystem::path& path,
                            const NetworkState& state, const MeasurementSet& meas);

}  // namespace cco::netsim
