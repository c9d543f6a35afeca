#include <cstdio>

#include "cco/netsim.hpp"
#include "json.hpp"

namespace cco::netsim {

using nlohmann::json;

namespace {

json to_json(const PropagationModel& m) {
  return json{{"variant", to_string(m.variant)},
              {"pathloss_intercept_db", m.pathloss_intercept_db},
              {"pathloss_slope_db_per_decade", m.pathloss_slope_db_per_decade},
              {"shadowing_sigma_db", m.shadowing_sigma_db},
              {"indoor_penetration_loss_db", m.indoor_penetration_loss_db},
              {"min_coupling_distance_m", m.min_coupling_distance_m}};
}

PropagationModel propagation_from_json(const json& j) {
  PropagationModel m;
  m.variant = propagation_variant_from_string(j.at("variant").get<std::string>());
  m.pathloss_intercept_db = j.at("pathloss_intercept_db").get<double>();
  m.pathloss_slope_db_per_decade = j.at("pathloss_slope_db_per_decade").get<double>();
  m.shadowing_sigma_db = j.at("shadowing_sigma_db").get<double>();
  m.indoor_penetration_loss_db = j.at("indoor_penetration_loss_db").get<double>();
  m.min_coupling_distance_m = j.at("min_coupling_distance_m").get<double>();
  return m;
}

}  // namespace

std::string to_json_string(const NetworkState& state) {
  json cells = json::array();
  for (const CellConfig& c : state.cells) {
    cells.push_back(json{{"id", c.id},
                         {"x_m", c.x_m},
                         {"y_m", c.y_m},
                         {"height_m", c.height_m},
                         {"azimuth_deg", c.azimuth_deg},
                         {"tilt_deg", c.tilt_deg},
                         {"tx_power_dbm", c.tx_power_dbm},
                         {"max_gain_dbi", c.max_gain_dbi},
                         {"vertical_beamwidth_deg", c.vertical_beamwidth_deg},
                         {"horizontal_beamwidth_deg", c.horizontal_beamwidth_deg}});
  }
  json ues = json::array();
  for (const UserEquipment& u : state.ues) {
    ues.push_back(json{{"id", u.id}, {"x_m", u.x_m}, {"y_m", u.y_m}, {"indoor", u.indoor}});
  }
  json doc{{"version", 1},
           {"cells", std::move(cells)},
           {"ues", std::move(ues)},
           {"propagation", to_json(state.propagation)},
           {"noise_floor_dbm", state.noise_floor_dbm},
           {"shadowing_seed", state.shadowing_seed},
           {"tilt_min_deg", state.tilt_min_deg},
           {"tilt_max_deg", state.tilt_max_deg}};
  return doc.dump(2) + "\n";
}

NetworkState network_from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("network json parse error: ") + e.what());
  }
  require(doc.value("version", 0) == 1, "network json: unsupported version");
  NetworkState s;
  for (const json& jc : doc.at("cells")) {
    CellConfig c;
    c.id = jc.at("id").get<int>();
    c.x_m = jc.at("x_m").get<double>();
    c.y_m = jc.at("y_m").get<double>();
    c.height_m = jc.at("height_m").get<double>();
    c.azimuth_deg = jc.at("azimuth_deg").get<double>();
    c.tilt_deg = jc.at("tilt_deg").get<double>();
    c.tx_power_dbm = jc.at("tx_power_dbm").get<double>();
    c.max_gain_dbi = jc.at("max_gain_dbi").get<double>();
    c.vertical_beamwidth_deg = jc.at("vertical_beamwidth_deg").get<double>();
    c.horizontal_beamwidth_deg = jc.at("horizontal_beamwidth_deg").get<double>();
    s.cells.push_back(c);
  }
  for (const json& ju : doc.at("ues")) {
    UserEquipment u;
    u.id = ju.at("id").get<int>();
    u.x_m = ju.at("x_m").get<double>();
    u.y_m = ju.at("y_m").get<double>();
    u.indoor = ju.at("indoor").get<bool>();
    s.ues.push_back(u);
  }
  s.propagation = propagation_from_json(doc.at("propagation"));
  s.noise_floor_dbm = doc.at("noise_floor_dbm").get<double>();
  s.shadowing_seed = doc.at("shadowing_seed").get<uint64_t>();
  s.tilt_min_deg = doc.at("tilt_min_deg").get<double>();
  s.tilt_max_deg = doc.at("tilt_max_deg").get<double>();
  s.validate();
  return s;
}

void save_network(const std::filesystem::path& path, const NetworkState& state) {
  write_file(path, to_json_string(state));
}

NetworkState load_network(const std::filesystem::path& path) {
  return network_from_json_string(read_file(path));
}

void write_measurements_csv(const std::filesystem::path& path,
                            const NetworkState& state, const MeasurementSet& meas) {
  require(meas.ue_count() == state.ue_count(), "measurements csv: UE count mismatch");
  std::string out = "ue_id,serving_cell,sinr_db";
  for (int c = 0; c < meas.n_cells; ++c) {
    out += ",rsrp_" + std::to_string(c);
  }
  out += "\n";
  char buf[64];
  for (int u = 0; u < meas.ue_count(); ++u) {
    out += std::to_string(state.ues[u].id);
    out += "," + std::to_string(meas.serving[u]);
    std::snprintf(buf, sizeof(buf), ",%.17g", meas.sinr_db[u]);
    out += buf;
    for (int c = 0; c < meas.n_cells; ++c) {
      std::snprintf(buf, sizeof(buf), ",%.17g", meas.rsrp(u, c));
      out += buf;
    }
    out += "\n";
  }
  write_file(path, out);
}

}  // namespace cco::netsim
