#include "cco/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cco::netsim {

PropagationModel PropagationModel::model_a() {
  PropagationModel m;
  m.variant = PropagationVariant::ModelA;
  m.pathloss_intercept_db = 128.1;
  m.pathloss_slope_db_per_decade = 37.6;
  m.shadowing_sigma_db = 6.0;
  m.indoor_penetration_loss_db = 0.0;
  m.min_coupling_distance_m = 10.0;
  return m;
}

PropagationModel PropagationModel::model_b() {
  PropagationModel m;
  m.variant = PropagationVariant::ModelB;
  m.pathloss_intercept_db = 120.9;
  m.pathloss_slope_db_per_decade = 37.6;
  m.shadowing_sigma_db = 8.0;
  m.indoor_penetration_loss_db = 20.0;
  m.min_coupling_distance_m = 10.0;
  return m;
}

std::string to_string(PropagationVariant v) {
  return v == PropagationVariant::ModelA ? "model_a" : "model_b";
}

PropagationVariant propagation_variant_from_string(const std::string& s) {
  if (s == "model_a") return PropagationVariant::ModelA;
  if (s == "model_b") return PropagationVariant::ModelB;
  fail("unknown propagation variant: " + s);
}

void PropagationModel::validate() const {
  require(pathloss_slope_db_per_decade > 0, "propagation: pathloss_slope must be > 0");
  require(shadowing_sigma_db >= 0, "propagation: shadowing_sigma must be >= 0");
  require(min_coupling_distance_m > 0, "propagation: min_coupling_distance must be > 0");
  require(std::isfinite(pathloss_intercept_db), "propagation: intercept must be finite");
}

void NetworkState::validate() const {
  require(!cells.empty(), "network: needs at least one cell");
  require(!ues.empty(), "network: needs at least one UE");
  require(tilt_min_deg < tilt_max_deg, "network: tilt bounds inverted");
  propagation.validate();
  require(std::isfinite(noise_floor_dbm), "network: noise floor must be finite");
  for (size_t i = 0; i < cells.size(); ++i) {
    const CellConfig& c = cells[i];
    require(c.id == int(i), "network: cell ids must be dense 0..n-1 in order");
    require(c.tilt_deg >= tilt_min_deg && c.tilt_deg <= tilt_max_deg,
            "network: cell " + std::to_string(c.id) + " tilt out of bounds");
    require(c.vertical_beamwidth_deg > 0 && c.horizontal_beamwidth_deg > 0,
            "network: beamwidths must be > 0");
    require(std::isfinite(c.tx_power_dbm), "network: tx_power must be finite");
  }
  std::set<int> ue_ids;
  for (const UserEquipment& u : ues) {
    require(ue_ids.insert(u.id).second,
            "network: duplicate UE id " + std::to_string(u.id));
  }
}

void ActionVector::validate(int n_cells) const {
  std::set<int> seen;
  for (const Entry& e : entries) {
    require(e.cell_id >= 0 && e.cell_id < n_cells,
            "action: unknown cell id " + std::to_string(e.cell_id));
    require(seen.insert(e.cell_id).second,
            "action: duplicate cell id " + std::to_string(e.cell_id));
    require(e.tilt_delta_deg >= kTiltDeltaMin && e.tilt_delta_deg <= kTiltDeltaMax,
            "action: tilt delta out of [-5, +5] for cell " + std::to_string(e.cell_id));
  }
}

namespace {

struct Geometry {
  double theta_deg;  // depression angle toward the UE, positive down
  double phi_deg;    // horizontal bearing difference to boresight, (-180, 180]
  double dist3_m;
};

Geometry geometry(const CellConfig& cell, const UserEquipment& ue) {
  double dx = ue.x_m - cell.x_m;
  double dy = ue.y_m - cell.y_m;
  double dz = cell.height_m - kUeHeightM;
  double d2 = std::sqrt(dx * dx + dy * dy);
  Geometry g;
  g.dist3_m = std::sqrt(d2 * d2 + dz * dz);
  if (d2 < 1e-9) {
    // UE directly under the mast: straight down, no horizontal preference
    g.theta_deg = 90.0;
    g.phi_deg = 0.0;
  } else {
    g.theta_deg = rad_to_deg(std::atan2(dz, d2));
    double bearing = rad_to_deg(std::atan2(dy, dx));
    g.phi_deg = wrap_deg(bearing - cell.azimuth_deg);
  }
  return g;
}

double vertical_attenuation_db(double theta_deg, double tilt_deg, double vbw_deg) {
  double r = (theta_deg - tilt_deg) / vbw_deg;
  return std::min(12.0 * r * r, 20.0);
}

double horizontal_attenuation_db(double phi_deg, double hbw_deg) {
  double r = phi_deg / hbw_deg;
  return std::min(12.0 * r * r, 25.0);
}

uint64_t shadow_key(uint64_t seed, int cell_id, int ue_id) {
  return mix64(mix64(seed, uint64_t(cell_id) + 1), uint64_t(ue_id) + 1);
}

}  // namespace

double antenna_gain_db(const CellConfig& cell, const UserEquipment& ue) {
  Geometry g = geometry(cell, ue);
  return cell.max_gain_dbi -
         vertical_attenuation_db(g.theta_deg, cell.tilt_deg, cell.vertical_beamwidth_deg) -
         horizontal_attenuation_db(g.phi_deg, cell.horizontal_beamwidth_deg);
}

double path_loss_db(const PropagationModel& model, const CellConfig& cell,
                    const UserEquipment& ue, uint64_t shadowing_seed) {
  Geometry g = geometry(cell, ue);
  double d = std::max(g.dist3_m, model.min_coupling_distance_m);
  double pl = model.pathloss_intercept_db +
              model.pathloss_slope_db_per_decade * std::log10(d / 1000.0);
  if (model.shadowing_sigma_db > 0) {
    pl += model.shadowing_sigma_db *
          gaussian_from_hash(shadow_key(shadowing_seed, cell.id, ue.id));
  }
  if (ue.indoor) pl += model.indoor_penetration_loss_db;
  return pl;
}

// --- MeasurementEngine -------------------------------------------------------

MeasurementEngine::MeasurementEngine(const NetworkState& state) {
  state.validate();
  n_cells_ = state.cell_count();
  n_ues_ = state.ue_count();
  noise_lin_mw_ = db_to_linear(state.noise_floor_dbm);
  tilt_min_ = state.tilt_min_deg;
  tilt_max_ = state.tilt_max_deg;
  tilts_.resize(n_cells_);
  vbw_.resize(n_cells_);
  theta_deg_.resize(size_t(n_cells_) * n_ues_);
  const_dbm_.resize(size_t(n_cells_) * n_ues_);
  rsrp_dbm_.resize(size_t(n_cells_) * n_ues_);
  rsrp_lin_.resize(size_t(n_cells_) * n_ues_);
  serving_.resize(n_ues_);
  sinr_db_.resize(n_ues_);

  for (int c = 0; c < n_cells_; ++c) {
    const CellConfig& cell = state.cells[c];
    tilts_[c] = cell.tilt_deg;
    vbw_[c] = cell.vertical_beamwidth_deg;
    for (int u = 0; u < n_ues_; ++u) {
      const UserEquipment& ue = state.ues[u];
      Geometry g = geometry(cell, ue);
      double pl = path_loss_db(state.propagation, cell, ue, state.shadowing_seed);
      theta_deg_[size_t(c) * n_ues_ + u] = g.theta_deg;
      const_dbm_[size_t(c) * n_ues_ + u] =
          cell.tx_power_dbm + cell.max_gain_dbi -
          horizontal_attenuation_db(g.phi_deg, cell.horizontal_beamwidth_deg) - pl;
    }
    set_tilt(c, cell.tilt_deg);
  }
}

void MeasurementEngine::set_tilt(int cell_id, double tilt_deg) {
  require(cell_id >= 0 && cell_id < n_cells_,
          "engine: unknown cell id " + std::to_string(cell_id));
  tilts_[cell_id] = tilt_deg;
  const double vbw = vbw_[cell_id];
  const size_t row = size_t(cell_id) * n_ues_;
  for (int u = 0; u < n_ues_; ++u) {
    double rsrp = const_dbm_[row + u] -
                  vertical_attenuation_db(theta_deg_[row + u], tilt_deg, vbw);
    rsrp_dbm_[row + u] = rsrp;
    rsrp_lin_[row + u] = db_to_linear(rsrp);
  }
  dirty_ = true;
}

void MeasurementEngine::set_tilts(const std::vector<double>& tilts_deg) {
  require(int(tilts_deg.size()) == n_cells_, "engine: tilt vector length mismatch");
  for (int c = 0; c < n_cells_; ++c) set_tilt(c, tilts_deg[c]);
}

void MeasurementEngine::refresh() const {
  if (!dirty_) return;
  scratch_.resize(n_cells_);
  for (int u = 0; u < n_ues_; ++u) {
    int best = 0;
    double best_dbm = rsrp_dbm_[u];
    scratch_[0] = rsrp_lin_[u];
    for (int c = 1; c < n_cells_; ++c) {
      double v = rsrp_dbm_[size_t(c) * n_ues_ + u];
      scratch_[c] = rsrp_lin_[size_t(c) * n_ues_ + u];
      if (v > best_dbm) {  // strict: ties stay with the lowest id
        best_dbm = v;
        best = c;
      }
    }
    // The interference total is summed in ascending value order so the result
    // does not depend on how the cell list happens to be ordered.
    std::sort(scratch_.begin(), scratch_.end());
    double total_lin = 0.0;
    for (double v : scratch_) total_lin += v;
    double serving_lin = rsrp_lin_[size_t(best) * n_ues_ + u];
    serving_[u] = best;
    sinr_db_[u] = linear_to_db(serving_lin / (noise_lin_mw_ + total_lin - serving_lin));
  }
  dirty_ = false;
}

MeasurementSet MeasurementEngine::measurements() const {
  refresh();
  MeasurementSet out;
  out.n_cells = n_cells_;
  out.serving = serving_;
  out.sinr_db = sinr_db_;
  out.rsrp_dbm.resize(size_t(n_ues_) * n_cells_);
  for (int u = 0; u < n_ues_; ++u) {
    for (int c = 0; c < n_cells_; ++c) {
      out.rsrp_dbm[size_t(u) * n_cells_ + c] = rsrp_dbm_[size_t(c) * n_ues_ + u];
    }
  }
  return out;
}

int MeasurementEngine::coverage_pass_count(double rsrp_threshold_dbm) const {
  refresh();
  int n = 0;
  for (int u = 0; u < n_ues_; ++u) {
    if (rsrp_dbm_[size_t(serving_[u]) * n_ues_ + u] >= rsrp_threshold_dbm) ++n;
  }
  return n;
}

int MeasurementEngine::quality_pass_count(double sinr_threshold_db) const {
  refresh();
  int n = 0;
  for (int u = 0; u < n_ues_; ++u) {
    if (sinr_db_[u] >= sinr_threshold_db) ++n;
  }
  return n;
}

MeasurementSet compute_measurements(const NetworkState& state) {
  return MeasurementEngine(state).measurements();
}

NetworkState apply_action(const NetworkState& state, const ActionVector& action) {
  action.validate(state.cell_count());
  NetworkState out = state;
  for (const ActionVector::Entry& e : action.entries) {
    double t = out.cells[e.cell_id].tilt_deg + e.tilt_delta_deg;
    out.cells[e.cell_id].tilt_deg = std::clamp(t, state.tilt_min_deg, state.tilt_max_deg);
  }
  return out;
}

}  // namespace cco::netsim
