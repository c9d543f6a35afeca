#include "cco/reward.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace cco::reward {

using netsim::MeasurementSet;
using nlohmann::json;

void RewardWeights::validate() const {
  require(w_cov >= 0 && w_qual >= 0, "reward: weights must be non-negative");
  require(std::abs(w_cov + w_qual - 1.0) <= 1e-9, "reward: w_cov + w_qual must equal 1");
  require(std::isfinite(rsrp_threshold_dbm) && std::isfinite(sinr_threshold_db),
          "reward: thresholds must be finite");
}

namespace {

bool covered(const MeasurementSet& m, int ue, const RewardWeights& w) {
  return m.rsrp(ue, m.serving[ue]) >= w.rsrp_threshold_dbm;
}

bool quality_ok(const MeasurementSet& m, int ue, const RewardWeights& w) {
  return m.sinr_db[ue] >= w.sinr_threshold_db;
}

}  // namespace

double coverage_fraction(const MeasurementSet& meas, const RewardWeights& w) {
  if (meas.ue_count() == 0) return 0.0;
  int n = 0;
  for (int u = 0; u < meas.ue_count(); ++u) n += covered(meas, u, w);
  return double(n) / meas.ue_count();
}

double quality_fraction(const MeasurementSet& meas, const RewardWeights& w) {
  if (meas.ue_count() == 0) return 0.0;
  int n = 0;
  for (int u = 0; u < meas.ue_count(); ++u) n += quality_ok(meas, u, w);
  return double(n) / meas.ue_count();
}

RewardBreakdown global_reward(const MeasurementSet& before, const MeasurementSet& after,
                              const RewardWeights& w) {
  w.validate();
  require(before.ue_count() == after.ue_count() && before.n_cells == after.n_cells,
          "reward: before/after UE populations differ");
  RewardBreakdown out;
  out.coverage_delta = 100.0 * (coverage_fraction(after, w) - coverage_fraction(before, w));
  out.quality_delta = 100.0 * (quality_fraction(after, w) - quality_fraction(before, w));
  out.global_reward = w.w_cov * out.coverage_delta + w.w_qual * out.quality_delta;
  return out;
}

double cell_reward(const MeasurementSet& before, const MeasurementSet& after,
                   std::span<const int> local_cells, const RewardWeights& w) {
  w.validate();
  require(before.ue_count() == after.ue_count() && before.n_cells == after.n_cells,
          "reward: before/after UE populations differ");
  int n = 0, cov_before = 0, cov_after = 0, qual_before = 0, qual_after = 0;
  for (int u = 0; u < before.ue_count(); ++u) {
    int serving = before.serving[u];
    if (std::find(local_cells.begin(), local_cells.end(), serving) == local_cells.end())
      continue;
    ++n;
    cov_before += covered(before, u, w);
    cov_after += covered(after, u, w);
    qual_before += quality_ok(before, u, w);
    qual_after += quality_ok(after, u, w);
  }
  if (n == 0) return 0.0;
  double cov_delta = 100.0 * double(cov_after - cov_before) / n;
  double qual_delta = 100.0 * double(qual_after - qual_before) / n;
  return w.w_cov * cov_delta + w.w_qual * qual_delta;
}

bool BestRecordStore::update(const std::string& task_id, double reward,
                             const netsim::ActionVector& action, long episode) {
  auto it = records_.find(task_id);
  if (it != records_.end() && reward <= it->second.best_reward) return false;
  records_[task_id] = Record{reward, action, episode};
  return true;
}

const BestRecordStore::Record* BestRecordStore::find(const std::string& task_id) const {
  auto it = records_.find(task_id);
  return it == records_.end() ? nullptr : &it->second;
}

void BestRecordStore::save_jsonl(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& [task_id, rec] : records_) {
    json actions = json::array();
    for (const auto& e : rec.action.entries) {
      actions.push_back(json{{"cell", e.cell_id}, {"delta", e.tilt_delta_deg}});
    }
    json line{{"task_id", task_id},
              {"best_reward", rec.best_reward},
              {"action", std::move(actions)},
              {"episode", rec.episode}};
    out += line.dump() + "\n";
  }
  write_file(path, out);
}

BestRecordStore BestRecordStore::load_jsonl(const std::filesystem::path& path) {
  BestRecordStore store;
  std::string text = read_file(path);
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(std::string("record store parse error: ") + e.what());
    }
    netsim::ActionVector action;
    for (const json& ja : j.at("action")) {
      action.entries.push_back({ja.at("cell").get<int>(), ja.at("delta").get<int>()});
    }
    store.update(j.at("task_id").get<std::string>(), j.at("best_reward").get<double>(),
                 action, j.at("episode").get<long>());
  }
  return store;
}

}  // namespace cco::reward
