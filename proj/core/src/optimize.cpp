#include "cco/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace cco::optimize {

double AnnealSchedule::at(std::int64_t episode) const {
  return std::max(t0 * std::pow(gamma, double(episode)), t_min);
}

void AnnealSchedule::validate() const {
  require(t_min > 0, "schedule: t_min must be positive");
  require(t0 >= t_min, "schedule: t0 below t_min");
  require(gamma > 0 && gamma <= 1, "schedule: gamma out of (0,1]");
}

std::string to_string(SignMode m) {
  return m == SignMode::PaperLiteral ? "paper_literal" : "flipped";
}

SignMode sign_mode_from_string(const std::string& s) {
  if (s == "paper_literal") return SignMode::PaperLiteral;
  if (s == "flipped") return SignMode::Flipped;
  fail("unknown acceptance sign mode: " + s);
}

std::string to_string(Decision d) {
  return d == Decision::AcceptEncourage ? "accept_encourage" : "reject_penalize";
}

void SelfPlayConfig::validate() const {
  require(th_gp < th_ge, "self-play: th_gp must lie below th_ge");
  require(th_cp < th_ce, "self-play: th_cp must lie below th_ce");
  global_schedule.validate();
  cell_schedule.validate();
  require(baseline_decay > 0 && baseline_decay < 1, "self-play: baseline decay out of (0,1)");
  require(top_k >= 1, "self-play: top_k must be positive");
}

void SAConfig::validate() const {
  require(n_shots >= 1, "sa: n_shots must be positive");
  require(steps_per_shot >= 0, "sa: negative step count");
  schedule.validate();
  require(max_net_delta >= 0 && max_net_delta <= netsim::kTiltDeltaMax,
          "sa: max_net_delta out of range");
  require(top_k >= 1, "sa: top_k must be positive");
}

double acceptance_probability(double delta, double temperature, SignMode mode) {
  require(temperature > 0, "acceptance: temperature must be positive");
  const double x = delta / temperature;
  return mode == SignMode::PaperLiteral ? 1.0 / (1.0 + std::exp(x))
                                        : 1.0 / (1.0 + std::exp(-x));
}

namespace {

Decision decide(double value, double th_accept, double th_reject, SignMode mode,
                double temperature, Rng& rng) {
  if (value > th_accept) return Decision::AcceptEncourage;
  if (value <= th_reject) return Decision::RejectPenalize;
  const double p = acceptance_probability(value, temperature, mode);
  return rng.uniform() < p ? Decision::AcceptEncourage : Decision::RejectPenalize;
}

}  // namespace

Decision decide_global(double delta_r_g, const SelfPlayConfig& cfg, double temperature,
                       Rng& rng) {
  return decide(delta_r_g, cfg.th_ge, cfg.th_gp, cfg.acceptance_sign, temperature, rng);
}

Decision decide_cell(double r_ci, const SelfPlayConfig& cfg, double temperature,
                     Rng& rng) {
  return decide(r_ci, cfg.th_ce, cfg.th_cp, cfg.acceptance_sign, temperature, rng);
}

// --- simulated annealing --------------------------------------------------------

SAResult sa_optimize(const netsim::NetworkState& initial, const SAConfig& cfg,
                     const reward::RewardWeights& w, uint64_t seed) {
  cfg.validate();
  w.validate();
  netsim::MeasurementEngine engine(initial);
  const auto meas0 = engine.measurements();
  const double n = double(initial.ue_count());
  const double cov0 = double(engine.coverage_pass_count(w.rsrp_threshold_dbm)) / n;
  const double qual0 = double(engine.quality_pass_count(w.sinr_threshold_db)) / n;
  const auto reward_now = [&] {
    const double cov = double(engine.coverage_pass_count(w.rsrp_threshold_dbm)) / n;
    const double qual = double(engine.quality_pass_count(w.sinr_threshold_db)) / n;
    return w.w_cov * 100.0 * (cov - cov0) + w.w_qual * 100.0 * (qual - qual0);
  };

  SAResult res;
  res.top_cells = graphdistill::select_top_k(initial, meas0, cfg.top_k, w);
  const int k = int(res.top_cells.size());
  std::vector<double> base(k);
  for (int i = 0; i < k; ++i) base[i] = initial.cells[res.top_cells[i]].tilt_deg;

  std::vector<int> cur(k, 0), best(k, 0);
  double cur_reward = 0, best_reward = 0;
  int cur_l1 = 0, best_l1 = 0;  // total |net delta|: tie-break prefers less intervention
  Rng rng(seed);
  std::int64_t step = 0;
  for (int shot = 0; shot < cfg.n_shots; ++shot) {
    for (int s = 0; s < cfg.steps_per_shot; ++s, ++step) {
      const int i = k == 1 ? 0 : rng.uniform_int(0, k - 1);
      const int dir = rng.uniform_int(0, 1) == 0 ? -1 : 1;
      const int nd = cur[i] + dir;
      if (std::abs(nd) > cfg.max_net_delta) continue;
      const double tilt = base[i] + nd;
      if (tilt < initial.tilt_min_deg || tilt > initial.tilt_max_deg) continue;

      engine.set_tilt(res.top_cells[i], tilt);
      const double r_new = reward_now();
      const double dr = r_new - cur_reward;
      const double t = cfg.schedule.at(step);
      if (dr > 0 || rng.uniform() < std::exp(dr / t)) {
        cur_l1 += std::abs(nd) - std::abs(cur[i]);
        cur[i] = nd;
        cur_reward = r_new;
        // Rewards are exact functions of pass counts, so plateau ties compare
        // equal; among them the smallest total tilt change wins.
        if (cur_reward > best_reward ||
            (cur_reward == best_reward && cur_l1 < best_l1)) {
          best_reward = cur_reward;
          best = cur;
          best_l1 = cur_l1;
        }
      } else {
        engine.set_tilt(res.top_cells[i], base[i] + cur[i]);
      }
    }
    res.shot_rewards.push_back(best_reward);
  }

  res.net_deltas = best;
  res.best_reward = best_reward;
  res.steps = step;
  for (int i = 0; i < k; ++i)
    if (best[i] != 0) res.action.entries.push_back({res.top_cells[i], best[i]});
  return res;
}

// --- label extraction and supervised learning -------------------------------------

std::vector<LabeledExample> extract_labels(const netsim::NetworkState& initial,
                                           const SAResult& sa,
                                           const graphdistill::PerceptionConfig& pcfg,
                                           const std::string& task_id) {
  const auto meas = netsim::compute_measurements(initial);
  const auto graph = graphdistill::build_graph(initial, meas, pcfg.graph);
  std::vector<LabeledExample> out;
  for (size_t i = 0; i < sa.top_cells.size(); ++i) {
    const int cell = sa.top_cells[i];
    const auto fov = graphdistill::select_fov(graph, cell, pcfg.k_fov - 1);
    LabeledExample ex;
    ex.tensor = graphdistill::distill(graph, fov, pcfg.registry);
    ex.label = sa.net_deltas[i] - netsim::kTiltDeltaMin;
    ex.task_id = task_id;
    ex.cell_id = cell;
    out.push_back(std::move(ex));
  }
  return out;
}

void append_to_dataset(graphdistill::LabeledTensorDataset& ds,
                       const std::vector<LabeledExample>& examples) {
  for (const auto& ex : examples)
    ds.append(ex.tensor, {ex.task_id, ex.cell_id, ex.tensor.center_cell, ex.label});
}

void SLConfig::validate() const {
  require(epochs >= 1, "sl: epochs must be positive");
  require(batch_size >= 1, "sl: batch size must be positive");
  require(holdout_fraction >= 0 && holdout_fraction < 1, "sl: holdout fraction out of [0,1)");
  sgd.validate();
}

namespace {

bool in_holdout(const std::string& task_id, double fraction) {
  return double(fnv1a64(task_id) % 10000) < fraction * 10000.0;
}

}  // namespace

SLReport train_supervised(const graphdistill::LabeledTensorDataset& ds,
                          neural::PolicyNetwork<float>& net, const SLConfig& cfg) {
  cfg.validate();
  require(ds.size() >= 1, "sl: empty dataset");
  require(net.config().k_fov == ds.k_fov && net.config().m == ds.m,
          "sl: network/dataset shape mismatch");

  std::vector<size_t> train_idx, holdout_idx;
  for (size_t i = 0; i < ds.size(); ++i)
    (in_holdout(ds.meta[i].task_id, cfg.holdout_fraction) ? holdout_idx : train_idx)
        .push_back(i);
  require(!train_idx.empty(), "sl: training split is empty");

  SLReport report;
  report.n_train = int(train_idx.size());
  report.n_holdout = int(holdout_idx.size());

  auto sgd_cfg = cfg.sgd;
  const std::int64_t batches_per_epoch =
      (std::int64_t(train_idx.size()) + cfg.batch_size - 1) / cfg.batch_size;
  if (sgd_cfg.total_steps == 0) sgd_cfg.total_steps = cfg.epochs * batches_per_epoch;

  neural::SgdMomentum<float> opt(sgd_cfg, net.param_count());
  neural::GradAccumulator<float> acc(net.param_count());
  Rng rng(derive_seed(cfg.seed, "sl-train"));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train_idx);
    double loss_sum = 0;
    for (size_t i : train_idx) {
      const auto pass = net.forward_pass(ds.tensor_data(i));
      const int label = ds.meta[i].label;
      loss_sum += -std::log(std::max(pass.dist.probs[label], 1e-12));
      net.accumulate_from_pass(pass, label, 1.0f, acc);
      net.absorb_stats(pass);
      if (acc.count >= cfg.batch_size) opt.apply(net, acc);
    }
    if (acc.count > 0) opt.apply(net, acc);
    report.epoch_loss.push_back(loss_sum / double(train_idx.size()));
    if (cfg.on_epoch) cfg.on_epoch(epoch, report.epoch_loss.back());
  }

  if (!holdout_idx.empty()) {
    std::int64_t exact = 0, w1 = 0, w2 = 0;
    for (size_t i : holdout_idx) {
      const auto dist = net.forward(ds.tensor_data(i));
      const int diff = std::abs(neural::argmax_action(dist) - ds.meta[i].label);
      exact += diff == 0;
      w1 += diff <= 1;
      w2 += diff <= 2;
    }
    const double n = double(holdout_idx.size());
    report.exact = double(exact) / n;
    report.within1 = double(w1) / n;
    report.within2 = double(w2) / n;
  }
  return report;
}

// --- S2C ---------------------------------------------------------------------------

namespace {

constexpr int kCellRewardNeighbors = 8;

}  // namespace

EpisodeLog s2c_episode(const netsim::NetworkState& initial, const std::string& task_id,
                       neural::PolicyNetwork<float>& net, reward::BestRecordStore& store,
                       const SelfPlayConfig& cfg,
                       const graphdistill::PerceptionConfig& pcfg,
                       const reward::RewardWeights& w, std::int64_t episode,
                       double& baseline, neural::GradAccumulator<float>& acc, Rng& rng) {
  require(pcfg.top_k == cfg.top_k, "s2c: perception/self-play top_k mismatch");
  const auto p = graphdistill::perceive(initial, pcfg);
  const int k = int(p.top_cells.size());

  std::vector<typename neural::PolicyNetwork<float>::ForwardPass> passes;
  passes.reserve(k);
  netsim::ActionVector action;
  std::vector<int> classes(k);
  for (int i = 0; i < k; ++i) {
    passes.push_back(net.forward_pass(p.tensors[i].data));
    classes[i] = neural::sample_action(passes.back().dist, rng);
    action.entries.push_back({p.top_cells[i], classes[i] + netsim::kTiltDeltaMin});
  }

  const auto after_state = netsim::apply_action(initial, action);
  const auto after = netsim::compute_measurements(after_state);
  const double r_new = reward::global_reward(p.meas, after, w).global_reward;

  EpisodeLog log;
  log.episode = episode;
  log.task_id = task_id;
  log.r_new = r_new;
  const auto* rec = store.find(task_id);
  log.r_best_before = rec ? rec->best_reward : 0.0;
  log.delta_r_g = r_new - log.r_best_before;
  log.baseline_before = baseline;
  log.t_g = cfg.global_schedule.at(episode);
  log.t_c = cfg.cell_schedule.at(episode);
  log.global_decision = decide_global(log.delta_r_g, cfg, log.t_g, rng);

  const double scale_base = std::abs(r_new - baseline);
  for (int i = 0; i < k; ++i) {
    EpisodeLog::CellLog cl;
    cl.cell = p.top_cells[i];
    cl.action_class = classes[i];
    if (log.global_decision == Decision::RejectPenalize) {
      cl.decision = Decision::RejectPenalize;
      cl.r_ci = 0;
      cl.scale = -scale_base;
    } else {
      const auto local = graphdistill::local_reward_cells(p.fovs[i], kCellRewardNeighbors);
      cl.r_ci = reward::cell_reward(p.meas, after, local, w);
      cl.decision = decide_cell(cl.r_ci, cfg, log.t_c, rng);
      cl.scale = cl.decision == Decision::AcceptEncourage ? scale_base : -scale_base;
    }
    net.accumulate_from_pass(passes[i], classes[i], float(cl.scale), acc);
    net.absorb_stats(passes[i]);
    log.cells.push_back(cl);
  }

  log.record_updated = store.update(task_id, r_new, action, episode);
  baseline = cfg.baseline_decay * baseline + (1.0 - cfg.baseline_decay) * r_new;
  return log;
}

void S2CConfig::validate() const {
  self_play.validate();
  weights.validate();
  sgd.validate();
  require(episodes >= 0, "s2c: negative episode budget");
  require(batch_episodes >= 1, "s2c: batch_episodes must be positive");
  require(snapshot_every >= 0, "s2c: negative snapshot cadence");
}

TrainingLog s2c_train(const scenario::TaskSuite& suite, neural::PolicyNetwork<float>& net,
                      reward::BestRecordStore& store, const S2CConfig& cfg) {
  cfg.validate();
  require(!suite.tasks.empty(), "s2c: empty task suite");

  auto pcfg = cfg.perception;
  pcfg.top_k = cfg.self_play.top_k;
  auto sgd_cfg = cfg.sgd;
  if (sgd_cfg.total_steps == 0)
    sgd_cfg.total_steps = (cfg.episodes + cfg.batch_episodes - 1) / cfg.batch_episodes;

  neural::SgdMomentum<float> opt(sgd_cfg, net.param_count());
  neural::GradAccumulator<float> acc(net.param_count());
  Rng rng(derive_seed(cfg.seed, "s2c-train"));

  TrainingLog log;
  double baseline = 0;
  double window_sum = 0;
  std::int64_t window_count = 0;
  std::vector<size_t> order(suite.tasks.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::int64_t e = 0; e < cfg.episodes; ++e) {
    const size_t slot = size_t(e % std::int64_t(order.size()));
    if (slot == 0) rng.shuffle(order);
    const auto& task = suite.tasks[order[slot]];
    const auto initial = scenario::task_initial_state(suite.network_of(task), task);

    log.episodes.push_back(s2c_episode(initial, task.task_id, net, store, cfg.self_play,
                                       pcfg, cfg.weights, e, baseline, acc, rng));
    window_sum += log.episodes.back().r_new;
    ++window_count;

    if ((e + 1) % cfg.batch_episodes == 0 && acc.count > 0) opt.apply(net, acc);
    if (cfg.snapshot_every > 0 && (e + 1) % cfg.snapshot_every == 0) {
      log.snapshots.push_back({e + 1, window_sum / double(window_count), baseline,
                               cfg.self_play.global_schedule.at(e)});
      if (cfg.on_snapshot) cfg.on_snapshot(log.snapshots.back());
      window_sum = 0;
      window_count = 0;
    }
  }
  if (acc.count > 0) opt.apply(net, acc);
  return log;
}

void save_training_log(const std::filesystem::path& path, const TrainingLog& log) {
  using nlohmann::json;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  require(bool(out), "cannot open for write: " + path.string());
  for (const auto& ep : log.episodes) {
    json cells = json::array();
    for (const auto& c : ep.cells)
      cells.push_back(json{{"cell", c.cell},
                           {"class", c.action_class},
                           {"r_ci", c.r_ci},
                           {"decision", to_string(c.decision)},
                           {"scale", c.scale}});
    const json line{{"episode", ep.episode},
                    {"task_id", ep.task_id},
                    {"r_new", ep.r_new},
                    {"r_best_before", ep.r_best_before},
                    {"delta_r_g", ep.delta_r_g},
                    {"baseline", ep.baseline_before},
                    {"t_g", ep.t_g},
                    {"t_c", ep.t_c},
                    {"global_decision", to_string(ep.global_decision)},
                    {"record_updated", ep.record_updated},
                    {"cells", cells}};
    out << line.dump() << "\n";
  }
  for (const auto& s : log.snapshots) {
    const json line{{"snapshot", s.episode},
                    {"mean_recent_reward", s.mean_recent_reward},
                    {"baseline", s.baseline},
                    {"t_g", s.t_g}};
    out << line.dump() << "\n";
  }
  require(bool(out), "write failed: " + path.string());
}

}  // namespace cco::optimize
