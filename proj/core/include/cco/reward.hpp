#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>

#include "cco/netsim.hpp"

namespace cco::reward {

// Weighted percent-point change in the fraction of UEs passing the coverage
// (serving RSRP) and quality (SINR) thresholds.
struct RewardWeights {
  double w_cov = 0.5;
  double w_qual = 0.5;
  double rsrp_threshold_dbm = -105.0;
  double sinr_threshold_db = -3.0;

  void validate() const;
};

struct RewardBreakdown {
  double global_reward = 0.0;    // percent points
  double coverage_delta = 0.0;   // percent points
  double quality_delta = 0.0;    // percent points
};

double coverage_fraction(const netsim::MeasurementSet& meas, const RewardWeights& w);
double quality_fraction(const netsim::MeasurementSet& meas, const RewardWeights& w);

// Requires identical UE populations in both sets.
RewardBreakdown global_reward(const netsim::MeasurementSet& before,
                              const netsim::MeasurementSet& after,
                              const RewardWeights& w);

// Same formula restricted to the UEs served (in `before`) by any of
// `local_cells` — the adjusted cell plus its top affinity neighbors. An empty
// restricted population yields 0.
double cell_reward(const netsim::MeasurementSet& before,
                   const netsim::MeasurementSet& after,
                   std::span<const int> local_cells, const RewardWeights& w);

// Per-task best record for the self-play competition. Best rewards are
// monotone non-decreasing per key.
class BestRecordStore {
 public:
  struct Record {
    double best_reward = 0.0;
    netsim::ActionVector action;
    long episode = 0;
  };

  // Stores iff the task is new or the reward beats the stored best.
  // Returns whether the entry was (re)placed.
  bool update(const std::string& task_id, double reward,
              const netsim::ActionVector& action, long episode);

  const Record* find(const std::string& task_id) const;
  size_t size() const { return records_.size(); }

  // JSON-lines persistence; loading replays records through update() so the
  // monotonicity invariant holds for mixed files.
  void save_jsonl(const std::filesystem::path& path) const;
  static BestRecordStore load_jsonl(const std::filesystem::path& path);

 private:
  std::map<std::string, Record> records_;
};

}  // namespace cco::reward
