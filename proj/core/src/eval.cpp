#include "cco/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cco/common.hpp"
#include "cco/netsim.hpp"
#include "json.hpp"

namespace cco::eval {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

constexpr const char* kCsvHeader =
    "task_id,network_id,model_variant,global_reward,coverage_delta,quality_delta,"
    "n_cells,n_ues,k";

}  // namespace

double avg_global_reward(std::span<const TaskRow> rows) {
  require(!rows.empty(), "eval: no rows to aggregate");
  double sum = 0;
  for (const auto& r : rows) sum += r.global_reward;
  return sum / double(rows.size());
}

double ratio_positive_reward(std::span<const TaskRow> rows) {
  require(!rows.empty(), "eval: no rows to aggregate");
  std::int64_t pos = 0;
  for (const auto& r : rows) pos += r.global_reward > 0;
  return double(pos) / double(rows.size());
}

namespace {

EvalReport run_eval(const neural::PolicyNetwork<float>& net,
                    const scenario::TaskSuite& suite,
                    const graphdistill::PerceptionConfig& pcfg,
                    const reward::RewardWeights& w) {
  require(!suite.tasks.empty(), "eval: empty task suite");
  require(net.config().k_fov == pcfg.k_fov, "eval: checkpoint k_fov does not match config");
  require(net.config().m == pcfg.registry.size(),
          "eval: checkpoint channel count does not match registry");
  w.validate();

  EvalReport report;
  std::string variant;
  bool mixed = false;
  for (const auto& task : suite.tasks) {
    const auto& network = suite.network_of(task);
    const auto initial = scenario::task_initial_state(network, task);
    const auto p = graphdistill::perceive(initial, pcfg);

    netsim::ActionVector action;
    for (size_t i = 0; i < p.top_cells.size(); ++i) {
      const auto dist = net.forward(p.tensors[i].data);
      const int cls = neural::argmax_action(dist);
      action.entries.push_back({p.top_cells[i], cls + netsim::kTiltDeltaMin});
    }
    const auto after = netsim::compute_measurements(netsim::apply_action(initial, action));
    const auto breakdown = reward::global_reward(p.meas, after, w);

    TaskRow row;
    row.task_id = task.task_id;
    row.network_id = task.network;
    row.model_variant = netsim::to_string(initial.propagation.variant);
    row.global_reward = breakdown.global_reward;
    row.coverage_delta = breakdown.coverage_delta;
    row.quality_delta = breakdown.quality_delta;
    row.n_cells = initial.cell_count();
    row.n_ues = initial.ue_count();
    row.k = int(p.top_cells.size());
    report.rows.push_back(std::move(row));

    if (variant.empty())
      variant = report.rows.back().model_variant;
    else if (variant != report.rows.back().model_variant)
      mixed = true;
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const TaskRow& a, const TaskRow& b) { return a.task_id < b.task_id; });
  report.source_model = report.target_model = mixed ? "mixed" : variant;
  report.avg_global_reward = avg_global_reward(report.rows);
  report.ratio_positive_reward = ratio_positive_reward(report.rows);
  return report;
}

}  // namespace

EvalReport evaluate_one_shot(const neural::PolicyNetwork<float>& net,
                             const scenario::TaskSuite& suite,
                             const graphdistill::PerceptionConfig& pcfg,
                             const reward::RewardWeights& w) {
  return run_eval(net, suite, pcfg, w);
}

EvalReport transfer_eval(const neural::PolicyNetwork<float>& net,
                         const scenario::TaskSuite& suite,
                         const graphdistill::PerceptionConfig& pcfg,
                         const reward::RewardWeights& w,
                         const std::string& source_model,
                         const std::string& target_model) {
  EvalReport report = run_eval(net, suite, pcfg, w);
  report.source_model = source_model;
  report.target_model = target_model;
  return report;
}

// --- CSV ---------------------------------------------------------------------------

void write_report_csv(const std::filesystem::path& path, const EvalReport& report) {
  require(!report.rows.empty(), "eval: refusing to emit empty report");
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& r : report.rows) {
    out << r.task_id << ',' << r.network_id << ',' << r.model_variant << ','
        << fmt(r.global_reward) << ',' << fmt(r.coverage_delta) << ','
        << fmt(r.quality_delta) << ',' << r.n_cells << ',' << r.n_ues << ',' << r.k
        << "\n";
  }
  write_file(path, out.str());
}

std::vector<TaskRow> read_report_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  require(bool(std::getline(in, line)) && line == kCsvHeader,
          "eval: unrecognized CSV header in " + path.string());
  std::vector<TaskRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    size_t start = 0;
    while (true) {
      const size_t pos = line.find(',', start);
      f.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    require(f.size() == 9, "eval: malformed CSV row in " + path.string());
    TaskRow r;
    r.task_id = f[0];
    r.network_id = f[1];
    r.model_variant = f[2];
    r.global_reward = std::stod(f[3]);
    r.coverage_delta = std::stod(f[4]);
    r.quality_delta = std::stod(f[5]);
    r.n_cells = std::stoi(f[6]);
    r.n_ues = std::stoi(f[7]);
    r.k = std::stoi(f[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- JSON --------------------------------------------------------------------------

void write_report_json(const std::filesystem::path& path, const EvalReport& report) {
  require(!report.rows.empty(), "eval: refusing to emit empty report");
  using nlohmann::json;
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back(json{{"task_id", r.task_id},
                        {"network_id", r.network_id},
                        {"model_variant", r.model_variant},
                        {"global_reward", r.global_reward},
                        {"coverage_delta", r.coverage_delta},
                        {"quality_delta", r.quality_delta},
                        {"n_cells", r.n_cells},
                        {"n_ues", r.n_ues},
                        {"k", r.k}});
  const json doc{{"version", 1},
                 {"source_model", report.source_model},
                 {"target_model", report.target_model},
                 {"policy_digest", report.policy_digest},
                 {"config_digest", report.config_digest},
                 {"avg_global_reward", report.avg_global_reward},
                 {"ratio_positive_reward", report.ratio_positive_reward},
                 {"rows", std::move(rows)}};
  write_file(path, doc.dump(2) + "\n");
}

EvalReport read_report_json(const std::filesystem::path& path) {
  using nlohmann::json;
  const json doc = json::parse(read_file(path), nullptr, true);
  require(doc.at("version").get<int>() == 1, "eval: unsupported report version");
  EvalReport report;
  report.source_model = doc.at("source_model").get<std::string>();
  report.target_model = doc.at("target_model").get<std::string>();
  report.policy_digest = doc.at("policy_digest").get<std::string>();
  report.config_digest = doc.at("config_digest").get<std::string>();
  report.avg_global_reward = doc.at("avg_global_reward").get<double>();
  report.ratio_positive_reward = doc.at("ratio_positive_reward").get<double>();
  for (const auto& jr : doc.at("rows")) {
    TaskRow r;
    r.task_id = jr.at("task_id").get<std::string>();
    r.network_id = jr.at("network_id").get<std::string>();
    r.model_variant = jr.at("model_variant").get<std::string>();
    r.global_reward = jr.at("global_reward").get<double>();
    r.coverage_delta = jr.at("coverage_delta").get<double>();
    r.quality_delta = jr.at("quality_delta").get<double>();
    r.n_cells = jr.at("n_cells").get<int>();
    r.n_ues = jr.at("n_ues").get<int>();
    r.k = jr.at("k").get<int>();
    report.rows.push_back(std::move(r));
  }
  return report;
}

// --- SVG ---------------------------------------------------------------------------

namespace {

constexpr const char* kPalette[] = {"#4c78a8", "#f58518", "#54a24b", "#e45756",
                                    "#72b7b2", "#b279a2"};

// One panel: bars for `values`, zero-anchored vertical scale.
void svg_panel(std::ostringstream& out, double x0, double y0, double width,
               double height, const std::string& title,
               const std::vector<std::pair<std::string, double>>& values,
               const std::string& unit) {
  double lo = 0, hi = 0;
  for (const auto& [_, v] : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-9) hi = lo + 1.0;
  const double span = hi - lo;
  const auto ypos = [&](double v) { return y0 + height - (v - lo) / span * height; };

  out << "<text x=\"" << fmt3(x0 + width / 2) << "\" y=\"" << fmt3(y0 - 12)
      << "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">"
      << title << "</text>\n";
  out << "<line x1=\"" << fmt3(x0) << "\" y1=\"" << fmt3(ypos(0)) << "\" x2=\""
      << fmt3(x0 + width) << "\" y2=\"" << fmt3(ypos(0))
      << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";

  const double slot = width / double(values.size());
  const double bar_w = slot * 0.6;
  for (size_t i = 0; i < values.size(); ++i) {
    const auto& [label, v] = values[i];
    const double bx = x0 + slot * double(i) + (slot - bar_w) / 2;
    const double top = std::min(ypos(v), ypos(0));
    const double bh = std::abs(ypos(v) - ypos(0));
    out << "<rect x=\"" << fmt3(bx) << "\" y=\"" << fmt3(top) << "\" width=\""
        << fmt3(bar_w) << "\" height=\"" << fmt3(std::max(bh, 0.5))
        << "\" fill=\"" << kPalette[i % std::size(kPalette)] << "\"/>\n";
    out << "<text x=\"" << fmt3(bx + bar_w / 2) << "\" y=\"" << fmt3(top - 4)
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << fmt3(v) << unit << "</text>\n";
    out << "<text x=\"" << fmt3(bx + bar_w / 2) << "\" y=\""
        << fmt3(y0 + height + 16)
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << label << "</text>\n";
  }
}

}  // namespace

void write_report_svg(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, EvalReport>>& reports) {
  require(!reports.empty(), "eval: no reports to plot");
  std::vector<std::pair<std::string, double>> avg, ratio;
  for (const auto& [label, r] : reports) {
    avg.emplace_back(label, r.avg_global_reward);
    ratio.emplace_back(label, r.ratio_positive_reward * 100.0);
  }
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"380\" "
         "viewBox=\"0 0 760 380\">\n";
  out << "<rect width=\"760\" height=\"380\" fill=\"white\"/>\n";
  svg_panel(out, 50, 60, 300, 260, "AvgGlobalReward (pp)", avg, "");
  svg_panel(out, 420, 60, 300, 260, "RatioPositiveReward (%)", ratio, "");
  out << "</svg>\n";
  write_file(path, out.str());
}

}  // namespace cco::eval
