#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cco/graphdistill.hpp"
#include "cco/neural.hpp"
#include "cco/reward.hpp"
#include "cco/scenario.hpp"

namespace cco::eval {

struct TaskRow {
  std::string task_id;
  std::string network_id;
  std::string model_variant;
  double global_reward = 0;   // percent points
  double coverage_delta = 0;  // percent points
  double quality_delta = 0;   // percent points
  int n_cells = 0;
  int n_ues = 0;
  int k = 0;  // top-K cells acted on
};

struct EvalReport {
  std::string source_model;  // propagation the policy was trained on
  std::string target_model;  // propagation evaluated here
  std::string policy_digest;
  std::string config_digest;
  std::vector<TaskRow> rows;  // task_id order
  double avg_global_reward = 0;
  double ratio_positive_reward = 0;
};

// Aggregates are pure functions of the rows, re-derivable from the CSV.
double avg_global_reward(std::span<const TaskRow> rows);
double ratio_positive_reward(std::span<const TaskRow> rows);

// One-shot greedy protocol: per task, select top-K cells, distill, take the
// argmax tilt class per cell (eval-mode forward), apply all deltas jointly
// once, score against the initial state.
EvalReport evaluate_one_shot(const neural::PolicyNetwork<float>& net,
                             const scenario::TaskSuite& suite,
                             const graphdistill::PerceptionConfig& pcfg,
                             const reward::RewardWeights& w);

// Same protocol on a foreign propagation model, tagged with both identities.
EvalReport transfer_eval(const neural::PolicyNetwork<float>& net,
                         const scenario::TaskSuite& suite,
                         const graphdistill::PerceptionConfig& pcfg,
                         const reward::RewardWeights& w,
                         const std::string& source_model,
                         const std::string& target_model);

void write_report_csv(const std::filesystem::path& path, const EvalReport& report);
std::vector<TaskRow> read_report_csv(const std::filesystem::path& path);

void write_report_json(const std::filesystem::path& path, const EvalReport& report);
EvalReport read_report_json(const std::filesystem::path& path);

// Self-contained bar chart of both aggregate metrics per labeled policy.
void write_report_svg(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, EvalReport>>& reports);

}  // namespace cco::eval
