#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cco/graphdistill.hpp"
#include "cco/netsim.hpp"
#include "cco/neural.hpp"
#include "cco/reward.hpp"
#include "cco/scenario.hpp"

namespace cco::optimize {

struct AnnealSchedule {
  double t0 = 1.0;
  double gamma = 0.999;  // geometric decay per episode
  double t_min = 0.01;

  double at(std::int64_t episode) const;
  void validate() const;
};

enum class SignMode {
  PaperLiteral,  // P = 1/(1+exp(+x/T)): verbatim formula
  Flipped,       // P = 1/(1+exp(-x/T)): acceptance grows with improvement
};
std::string to_string(SignMode m);
SignMode sign_mode_from_string(const std::string& s);

struct SelfPlayConfig {
  double th_ge = 0.1;    // percent points; accept outright above this
  double th_gp = -0.1;   // reject outright at or below this
  double th_ce = 0.05;
  double th_cp = -0.05;
  AnnealSchedule global_schedule;
  AnnealSchedule cell_schedule;
  SignMode acceptance_sign = SignMode::PaperLiteral;
  double baseline_decay = 0.99;
  int top_k = 8;

  void validate() const;
};

enum class Decision { AcceptEncourage, RejectPenalize };
std::string to_string(Decision d);

// The SA middle-band acceptance law shared by both decision levels.
double acceptance_probability(double delta, double temperature, SignMode mode);

Decision decide_global(double delta_r_g, const SelfPlayConfig& cfg, double temperature,
                       Rng& rng);
Decision decide_cell(double r_ci, const SelfPlayConfig& cfg, double temperature,
                     Rng& rng);

// --- simulated-annealing baseline ----------------------------------------------

struct SAConfig {
  int n_shots = 10;         // checkpoints in the reward trajectory
  int steps_per_shot = 200; // Metropolis steps between checkpoints
  AnnealSchedule schedule;
  int max_net_delta = 5;    // |net tilt delta| cap per cell, degrees
  int top_k = 8;            // cells optimized (lowest health)

  void validate() const;
};

struct SAResult {
  netsim::ActionVector action;      // nonzero net deltas of the best visited state
  std::vector<double> shot_rewards; // best-so-far reward after each shot
  std::vector<int> top_cells;
  std::vector<int> net_deltas;      // aligned with top_cells, zeros included
  double best_reward = 0;
  std::int64_t steps = 0;
};

SAResult sa_optimize(const netsim::NetworkState& initial, const SAConfig& cfg,
                     const reward::RewardWeights& w, uint64_t seed);

// --- supervised learning on SA labels --------------------------------------------

struct LabeledExample {
  graphdistill::LocalTensor tensor;
  int label = 0;  // tilt class 0..10 (net delta + 5)
  std::string task_id;
  int cell_id = 0;
};

// One example per optimized cell, tensor distilled at the INITIAL state.
std::vector<LabeledExample> extract_labels(const netsim::NetworkState& initial,
                                           const SAResult& sa,
                                           const graphdistill::PerceptionConfig& pcfg,
                                           const std::string& task_id);

void append_to_dataset(graphdistill::LabeledTensorDataset& ds,
                       const std::vector<LabeledExample>& examples);

struct SLConfig {
  int epochs = 12;
  int batch_size = 32;
  double holdout_fraction = 0.2;  // split by task-id hash, tasks stay disjoint
  neural::SgdConfig sgd;
  uint64_t seed = 1;
  std::function<void(int epoch, double mean_loss)> on_epoch;  // progress hook

  void validate() const;
};

struct SLReport {
  int n_train = 0;
  int n_holdout = 0;
  double exact = 0;    // hold-out argmax == label
  double within1 = 0;  // |argmax - label| <= 1
  double within2 = 0;
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

SLReport train_supervised(const graphdistill::LabeledTensorDataset& ds,
                          neural::PolicyNetwork<float>& net, const SLConfig& cfg);

// --- S2C self-play ----------------------------------------------------------------

struct EpisodeLog {
  std::int64_t episode = 0;
  std::string task_id;
  double r_new = 0;
  double r_best_before = 0;
  double delta_r_g = 0;
  double baseline_before = 0;
  double t_g = 0, t_c = 0;
  Decision global_decision = Decision::RejectPenalize;
  bool record_updated = false;
  struct CellLog {
    int cell = 0;
    int action_class = 0;
    double r_ci = 0;
    Decision decision = Decision::RejectPenalize;
    double scale = 0;
  };
  std::vector<CellLog> cells;
};

// One self-play episode: sample joint action, judge globally against the best
// record, judge per cell, accumulate scaled log-prob gradients. Mutates the
// record store, the EMA baseline, and the accumulator; parameters unchanged.
EpisodeLog s2c_episode(const netsim::NetworkState& initial, const std::string& task_id,
                       neural::PolicyNetwork<float>& net, reward::BestRecordStore& store,
                       const SelfPlayConfig& cfg,
                       const graphdistill::PerceptionConfig& pcfg,
                       const reward::RewardWeights& w, std::int64_t episode,
                       double& baseline, neural::GradAccumulator<float>& acc, Rng& rng);

struct TrainingLog {
  std::vector<EpisodeLog> episodes;
  struct Snapshot {
    std::int64_t episode = 0;
    double mean_recent_reward = 0;
    double baseline = 0;
    double t_g = 0;
  };
  std::vector<Snapshot> snapshots;
};

struct S2CConfig {
  SelfPlayConfig self_play;
  graphdistill::PerceptionConfig perception;
  reward::RewardWeights weights;
  neural::SgdConfig sgd;
  std::int64_t episodes = 5000;
  int batch_episodes = 4;  // parameter update cadence
  int snapshot_every = 500;
  uint64_t seed = 1;
  std::function<void(const TrainingLog::Snapshot&)> on_snapshot;  // progress hook

  void validate() const;
};

TrainingLog s2c_train(const scenario::TaskSuite& suite, neural::PolicyNetwork<float>& net,
                      reward::BestRecordStore& store, const S2CConfig& cfg);

void save_training_log(const std::filesystem::path& path, const TrainingLog& log);

}  // namespace cco::optimize
