#include "cco/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cco/common.hpp"
#include "cco/eval.hpp"
#include "cco/graphdistill.hpp"
#include "cco/netsim.hpp"
#include "cco/neural.hpp"
#include "cco/optimize.hpp"
#include "cco/reward.hpp"
#include "cco/scenario.hpp"
#include "json.hpp"

namespace cco {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  return json::parse(read_file(path), nullptr, true);
}

std::string config_digest(const std::string& path) {
  return path.empty() ? hex64(fnv1a64(std::string_view("{}"))) : file_digest(path);
}

reward::RewardWeights parse_weights(const json& j) {
  reward::RewardWeights w;
  w.w_cov = j.value("w_cov", w.w_cov);
  w.w_qual = j.value("w_qual", w.w_qual);
  w.rsrp_threshold_dbm = j.value("rsrp_threshold_dbm", w.rsrp_threshold_dbm);
  w.sinr_threshold_db = j.value("sinr_threshold_db", w.sinr_threshold_db);
  w.validate();
  return w;
}

optimize::AnnealSchedule parse_schedule(const json& j, optimize::AnnealSchedule s) {
  s.t0 = j.value("t0", s.t0);
  s.gamma = j.value("gamma", s.gamma);
  s.t_min = j.value("t_min", s.t_min);
  s.validate();
  return s;
}

optimize::SAConfig parse_sa(const json& j) {
  optimize::SAConfig cfg;
  cfg.n_shots = j.value("n_shots", cfg.n_shots);
  cfg.steps_per_shot = j.value("steps_per_shot", cfg.steps_per_shot);
  cfg.max_net_delta = j.value("max_net_delta", cfg.max_net_delta);
  cfg.top_k = j.value("top_k", cfg.top_k);
  if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"), cfg.schedule);
  cfg.validate();
  return cfg;
}

optimize::SelfPlayConfig parse_self_play(const json& j) {
  optimize::SelfPlayConfig cfg;
  cfg.th_ge = j.value("th_ge", cfg.th_ge);
  cfg.th_gp = j.value("th_gp", cfg.th_gp);
  cfg.th_ce = j.value("th_ce", cfg.th_ce);
  cfg.th_cp = j.value("th_cp", cfg.th_cp);
  if (j.contains("global_schedule"))
    cfg.global_schedule = parse_schedule(j.at("global_schedule"), cfg.global_schedule);
  if (j.contains("cell_schedule"))
    cfg.cell_schedule = parse_schedule(j.at("cell_schedule"), cfg.cell_schedule);
  cfg.acceptance_sign =
      optimize::sign_mode_from_string(j.value("acceptance_sign", to_string(cfg.acceptance_sign)));
  cfg.baseline_decay = j.value("baseline_decay", cfg.baseline_decay);
  cfg.top_k = j.value("top_k", cfg.top_k);
  cfg.validate();
  return cfg;
}

neural::SgdConfig parse_sgd(const json& j) {
  neural::SgdConfig cfg;
  cfg.lr = j.value("lr", cfg.lr);
  cfg.momentum = j.value("momentum", cfg.momentum);
  cfg.lr_min = j.value("lr_min", cfg.lr_min);
  cfg.total_steps = j.value("total_steps", cfg.total_steps);
  cfg.validate();
  return cfg;
}

graphdistill::PerceptionConfig parse_perception(const json& j) {
  graphdistill::PerceptionConfig cfg;
  cfg.top_k = j.value("top_k", cfg.top_k);
  cfg.k_fov = j.value("k_fov", cfg.k_fov);
  cfg.graph.detection_floor_dbm =
      j.value("detection_floor_dbm", cfg.graph.detection_floor_dbm);
  if (j.contains("channels"))
    cfg.registry = graphdistill::ChannelRegistry::from_names(
        j.at("channels").get<std::vector<std::string>>());
  return cfg;
}

neural::NetConfig parse_net(const json& j, int k_fov, int m) {
  neural::NetConfig cfg;
  cfg.k_fov = k_fov;
  cfg.m = m;
  cfg.channels = j.value("channels", cfg.channels);
  cfg.blocks = j.value("blocks", cfg.blocks);
  cfg.l2 = j.value("l2", cfg.l2);
  cfg.validate();
  return cfg;
}

// --- commands -----------------------------------------------------------------------

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 1;
};

int cmd_gen(const CommonArgs& a) {
  const json cfg = load_config(a.config_path);
  scenario::RandomizationSpec spec;
  if (cfg.contains("spec")) spec = scenario::spec_from_json_string(cfg.at("spec").dump());
  const int n_networks = cfg.value("n_networks", 3);
  const int states = cfg.value("states_per_network", 5);
  const std::string prefix = cfg.value("id_prefix", std::string{});

  const auto suite = scenario::generate_suite(spec, n_networks, states, prefix, a.seed);
  scenario::save_suite(a.out_dir, suite);
  std::printf("gen: %zu networks, %zu tasks -> %s\n", suite.networks.size(),
              suite.tasks.size(), a.out_dir.c_str());
  return 0;
}

int cmd_sa(const CommonArgs& a, const std::string& suite_path, std::int64_t max_tasks) {
  const json cfg = load_config(a.config_path);
  const auto suite = scenario::load_suite(suite_path);
  const auto sa_cfg = parse_sa(cfg.value("sa", json::object()));
  const auto w = parse_weights(cfg.value("weights", json::object()));
  auto pcfg = parse_perception(cfg.value("perception", json::object()));
  pcfg.top_k = sa_cfg.top_k;
  pcfg.graph.weights = w;

  graphdistill::LabeledTensorDataset ds;
  ds.k_fov = pcfg.k_fov;
  ds.m = pcfg.registry.size();
  ds.channels = pcfg.registry.names();

  json task_reports = json::array();
  double reward_sum = 0;
  std::int64_t positive = 0, done = 0;
  for (const auto& task : suite.tasks) {
    if (max_tasks > 0 && done >= max_tasks) break;
    const auto initial = scenario::task_initial_state(suite.network_of(task), task);
    const auto res =
        optimize::sa_optimize(initial, sa_cfg, w, derive_seed(a.seed, task.task_id));
    optimize::append_to_dataset(ds, optimize::extract_labels(initial, res, pcfg, task.task_id));
    task_reports.push_back(json{{"task_id", task.task_id},
                                {"best_reward", res.best_reward},
                                {"shot_rewards", res.shot_rewards},
                                {"steps", res.steps}});
    reward_sum += res.best_reward;
    positive += res.best_reward > 0;
    ++done;
    if (done % 50 == 0)
      std::fprintf(stderr, "sa: %lld tasks done, avg best %.3f\n",
                   (long long)done, reward_sum / double(done));
  }
  require(done > 0, "sa: no tasks processed");

  const fs::path out(a.out_dir);
  graphdistill::save_dataset(out / "labels", ds);
  const json report{{"version", 1},
                    {"n_tasks", done},
                    {"avg_best_reward", reward_sum / double(done)},
                    {"ratio_positive", double(positive) / double(done)},
                    {"tasks", std::move(task_reports)}};
  write_file(out / "sa_report.json", report.dump(2) + "\n");
  std::printf("sa: %lld tasks, %zu labels, avg best reward %.4f pp -> %s\n",
              (long long)done, ds.size(), reward_sum / double(done), a.out_dir.c_str());
  return 0;
}

int cmd_train_sl(const CommonArgs& a, const std::string& data_stem) {
  const json cfg = load_config(a.config_path);
  const auto ds = graphdistill::load_dataset(data_stem);
  const auto net_cfg = parse_net(cfg.value("net", json::object()), ds.k_fov, ds.m);

  optimize::SLConfig sl;
  const json sj = cfg.value("sl", json::object());
  sl.epochs = sj.value("epochs", sl.epochs);
  sl.batch_size = sj.value("batch_size", sl.batch_size);
  sl.holdout_fraction = sj.value("holdout_fraction", sl.holdout_fraction);
  sl.sgd = parse_sgd(sj.value("sgd", json::object()));
  sl.seed = a.seed;
  sl.on_epoch = [](int epoch, double loss) {
    std::fprintf(stderr, "sl: epoch %d mean loss %.4f\n", epoch, loss);
  };

  neural::PolicyNetwork<float> net(net_cfg, derive_seed(a.seed, "net-init"));
  const auto report = optimize::train_supervised(ds, net, sl);

  const fs::path out(a.out_dir);
  neural::save_checkpoint(out / "policy_sl.ckpt", net);
  const json doc{{"version", 1},
                 {"n_train", report.n_train},
                 {"n_holdout", report.n_holdout},
                 {"exact", report.exact},
                 {"within1", report.within1},
                 {"within2", report.within2},
                 {"epoch_loss", report.epoch_loss}};
  write_file(out / "sl_report.json", doc.dump(2) + "\n");
  std::printf("train-sl: %d train / %d holdout, within1 %.4f within2 %.4f -> %s\n",
              report.n_train, report.n_holdout, report.within1, report.within2,
              a.out_dir.c_str());
  return 0;
}

int cmd_train_s2c(const CommonArgs& a, const std::string& suite_path,
                  const std::string& init_ckpt) {
  const json cfg = load_config(a.config_path);
  const auto suite = scenario::load_suite(suite_path);

  optimize::S2CConfig s2c;
  const json sj = cfg.value("s2c", json::object());
  s2c.self_play = parse_self_play(cfg.value("self_play", json::object()));
  s2c.perception = parse_perception(cfg.value("perception", json::object()));
  s2c.weights = parse_weights(cfg.value("weights", json::object()));
  s2c.perception.graph.weights = s2c.weights;
  s2c.sgd = parse_sgd(sj.value("sgd", json::object()));
  s2c.episodes = sj.value("episodes", s2c.episodes);
  s2c.batch_episodes = sj.value("batch_episodes", s2c.batch_episodes);
  s2c.snapshot_every = sj.value("snapshot_every", s2c.snapshot_every);
  s2c.seed = a.seed;
  s2c.on_snapshot = [](const optimize::TrainingLog::Snapshot& s) {
    std::fprintf(stderr, "s2c: episode %lld mean recent reward %.4f baseline %.4f\n",
                 (long long)s.episode, s.mean_recent_reward, s.baseline);
  };

  const json nj = cfg.value("net", json::object());
  auto net = init_ckpt.empty()
                 ? neural::PolicyNetwork<float>(
                       parse_net(nj, s2c.perception.k_fov, s2c.perception.registry.size()),
                       derive_seed(a.seed, "net-init"))
                 : neural::load_checkpoint<float>(init_ckpt, nj.value("l2", 1e-4));
  require(net.config().k_fov == s2c.perception.k_fov &&
              net.config().m == s2c.perception.registry.size(),
          "train-s2c: checkpoint shape does not match perception config");

  reward::BestRecordStore store;
  const auto log = optimize::s2c_train(suite, net, store, s2c);

  const fs::path out(a.out_dir);
  neural::save_checkpoint(out / "policy_s2c.ckpt", net);
  optimize::save_training_log(out / "train_log.jsonl", log);
  store.save_jsonl(out / "records.jsonl");
  const json doc{{"version", 1},
                 {"episodes", std::int64_t(log.episodes.size())},
                 {"tasks", std::int64_t(suite.tasks.size())},
                 {"records", std::int64_t(store.size())}};
  write_file(out / "train_summary.json", doc.dump(2) + "\n");
  std::printf("train-s2c: %zu episodes over %zu tasks -> %s\n", log.episodes.size(),
              suite.tasks.size(), a.out_dir.c_str());
  return 0;
}

int emit_eval_outputs(const fs::path& out, const std::string& base,
                      const eval::EvalReport& report) {
  eval::write_report_csv(out / (base + ".csv"), report);
  eval::write_report_json(out / (base + ".json"), report);
  eval::write_report_svg(out / (base + ".svg"), {{base, report}});
  std::printf("%s: %zu tasks, AvgGlobalReward %.4f pp, RatioPositiveReward %.4f\n",
              base.c_str(), report.rows.size(), report.avg_global_reward,
              report.ratio_positive_reward);
  return 0;
}

int cmd_eval(const CommonArgs& a, const std::string& suite_path,
             const std::string& ckpt_path) {
  const json cfg = load_config(a.config_path);
  const auto suite = scenario::load_suite(suite_path);
  const auto w = parse_weights(cfg.value("weights", json::object()));
  auto pcfg = parse_perception(cfg.value("perception", json::object()));
  pcfg.graph.weights = w;
  const auto net = neural::load_checkpoint<float>(ckpt_path);

  auto report = eval::evaluate_one_shot(net, suite, pcfg, w);
  report.policy_digest = file_digest(ckpt_path);
  report.config_digest = config_digest(a.config_path);
  return emit_eval_outputs(a.out_dir, "eval_report", report);
}

int cmd_transfer(const CommonArgs& a, const std::string& suite_path,
                 const std::string& ckpt_path, const std::string& source,
                 const std::string& target) {
  const json cfg = load_config(a.config_path);
  const auto suite = scenario::load_suite(suite_path);
  const auto w = parse_weights(cfg.value("weights", json::object()));
  auto pcfg = parse_perception(cfg.value("perception", json::object()));
  pcfg.graph.weights = w;
  const auto net = neural::load_checkpoint<float>(ckpt_path);

  auto report = eval::transfer_eval(net, suite, pcfg, w, source, target);
  report.policy_digest = file_digest(ckpt_path);
  report.config_digest = config_digest(a.config_path);
  return emit_eval_outputs(a.out_dir, "transfer_report", report);
}

int cmd_report(const CommonArgs& a, const std::vector<std::string>& inputs,
               std::vector<std::string> labels) {
  require(!inputs.empty(), "report: no input reports");
  require(labels.empty() || labels.size() == inputs.size(),
          "report: label count does not match input count");
  std::vector<std::pair<std::string, eval::EvalReport>> reports;
  for (size_t i = 0; i < inputs.size(); ++i) {
    const std::string label =
        i < labels.size() ? labels[i] : fs::path(inputs[i]).stem().string();
    reports.emplace_back(label, eval::read_report_json(inputs[i]));
  }

  const fs::path out(a.out_dir);
  std::ostringstream csv;
  csv << "policy,source_model,target_model,n_tasks,avg_global_reward,ratio_positive_reward\n";
  for (const auto& [label, r] : reports) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.avg_global_reward,
                  r.ratio_positive_reward);
    csv << label << ',' << r.source_model << ',' << r.target_model << ','
        << r.rows.size() << ',' << buf << "\n";
  }
  write_file(out / "summary.csv", csv.str());
  eval::write_report_svg(out / "summary.svg", reports);
  std::printf("report: %zu policies -> %s\n", reports.size(), a.out_dir.c_str());
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"cco: one-shot cellular coverage & capacity optimization"};
  app.require_subcommand(1);

  CommonArgs a;
  std::string suite_path, data_stem, ckpt_path, init_ckpt;
  std::string source_model = "model_a", target_model = "model_b";
  std::int64_t max_tasks = 0;
  std::vector<std::string> inputs, labels;

  const auto add_common = [&](CLI::App* cmd, bool needs_out = true) {
    cmd->add_option("--config", a.config_path, "JSON config file");
    cmd->add_option("--seed", a.seed, "master seed")->capture_default_str();
    auto* out = cmd->add_option("--out", a.out_dir, "output directory");
    if (needs_out) out->required();
  };

  auto* gen = app.add_subcommand("gen", "generate a randomized network/task suite");
  add_common(gen);

  auto* sa = app.add_subcommand("sa", "run the SA baseline and emit labeled tensors");
  add_common(sa);
  sa->add_option("--suite", suite_path, "tasks.json manifest")->required();
  sa->add_option("--max-tasks", max_tasks, "cap on processed tasks (0 = all)");

  auto* tsl = app.add_subcommand("train-sl", "supervised training on SA labels");
  add_common(tsl);
  tsl->add_option("--data", data_stem, "dataset stem (expects <stem>.bin/.json)")
      ->required();

  auto* ts2c = app.add_subcommand("train-s2c", "self-play competitive/cooperative DRL");
  add_common(ts2c);
  ts2c->add_option("--suite", suite_path, "tasks.json manifest")->required();
  ts2c->add_option("--init", init_ckpt, "warm-start checkpoint");

  auto* ev = app.add_subcommand("eval", "one-shot greedy evaluation");
  add_common(ev);
  ev->add_option("--suite", suite_path, "tasks.json manifest")->required();
  ev->add_option("--checkpoint", ckpt_path, "policy checkpoint")->required();

  auto* tr = app.add_subcommand("transfer", "cross-model one-shot evaluation");
  add_common(tr);
  tr->add_option("--suite", suite_path, "tasks.json manifest")->required();
  tr->add_option("--checkpoint", ckpt_path, "policy checkpoint")->required();
  tr->add_option("--source-model", source_model)->capture_default_str();
  tr->add_option("--target-model", target_model)->capture_default_str();

  auto* rep = app.add_subcommand("report", "summary CSV/SVG from report JSONs");
  add_common(rep);
  rep->add_option("--in", inputs, "eval/transfer report JSON files")->required();
  rep->add_option("--label", labels, "policy labels aligned with --in");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) return cmd_gen(a);
    if (sa->parsed()) return cmd_sa(a, suite_path, max_tasks);
    if (tsl->parsed()) return cmd_train_sl(a, data_stem);
    if (ts2c->parsed()) return cmd_train_s2c(a, suite_path, init_ckpt);
    if (ev->parsed()) return cmd_eval(a, suite_path, ckpt_path);
    if (tr->parsed()) return cmd_transfer(a, suite_path, ckpt_path, source_model, target_model);
    if (rep->parsed()) return cmd_report(a, inputs, labels);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace cco
