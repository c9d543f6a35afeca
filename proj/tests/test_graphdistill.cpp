#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "cco/common.hpp"
#include "cco/graphdistill.hpp"
#include "cco/netsim.hpp"
#include "cco/reward.hpp"
#include "cco/scenario.hpp"
#include "doctest.h"

using namespace cco;
using namespace cco::graphdistill;

namespace {

netsim::NetworkState fixture_network(uint64_t seed = 3, double sigma = 6.0) {
  scenario::RandomizationSpec spec;
  spec.cell_count = {8, 8};
  spec.ue_count = {60, 60};
  spec.area_side_m = 3000.0;
  netsim::NetworkState st = scenario::generate_network(spec, seed);
  st.propagation.shadowing_sigma_db = sigma;
  return st;
}

bool bytes_equal(const LocalTensor& a, const LocalTensor& b) {
  return a.data.size() == b.data.size() &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("build_graph matches brute-force aggregation") {
  netsim::NetworkState st = fixture_network();
  netsim::MeasurementSet meas = netsim::compute_measurements(st);
  GraphOptions opts;
  NetworkGraph g = build_graph(st, meas, opts);
  const int n = st.cell_count();
  REQUIRE(g.n_cells == n);
  REQUIRE(g.n_ues == st.ue_count());

  for (int i = 0; i < n; ++i) {
    // node features copied straight off the cells
    CHECK(g.cells[i].x_m == st.cells[i].x_m);
    CHECK(g.cells[i].tilt_deg == st.cells[i].tilt_deg);
    CHECK(g.cells[i].tx_power_dbm == st.cells[i].tx_power_dbm);

    std::vector<int> served;
    for (int u = 0; u < st.ue_count(); ++u)
      if (meas.serving[u] == i) served.push_back(u);
    CHECK(g.cells[i].served_count == int(served.size()));

    int pass = 0;
    double rsrp_sum = 0, sinr_sum = 0;
    for (int u : served) {
      rsrp_sum += meas.rsrp(u, i);
      sinr_sum += meas.sinr_db[u];
      if (meas.rsrp(u, i) >= opts.weights.rsrp_threshold_dbm &&
          meas.sinr_db[u] >= opts.weights.sinr_threshold_db)
        ++pass;
    }
    if (served.empty()) {
      CHECK(std::isnan(g.cells[i].mean_served_rsrp_dbm));
      CHECK(std::isnan(g.cells[i].mean_served_sinr_db));
      CHECK(g.cells[i].health == 1.0);
    } else {
      CHECK(g.cells[i].mean_served_rsrp_dbm ==
            doctest::Approx(rsrp_sum / served.size()).epsilon(1e-12));
      CHECK(g.cells[i].mean_served_sinr_db ==
            doctest::Approx(sinr_sum / served.size()).epsilon(1e-12));
      CHECK(g.cells[i].health == doctest::Approx(double(pass) / served.size()));
    }

    for (int j = 0; j < n; ++j) {
      const double d = std::hypot(st.cells[i].x_m - st.cells[j].x_m,
                                  st.cells[i].y_m - st.cells[j].y_m);
      CHECK(g.at(g.distance_m, i, j) == doctest::Approx(d).epsilon(1e-12));

      double lin = 0;
      std::vector<double> col;
      for (int u : served) {
        lin += db_to_linear(meas.rsrp(u, j));
        col.push_back(meas.rsrp(u, j));
      }
      if (served.empty()) {
        CHECK(g.at(g.coupling_lin, i, j) == 0.0);
        CHECK(std::isnan(g.at(g.mean_rsrp_dbm, i, j)));
        CHECK(std::isnan(g.at(g.p10_rsrp_dbm, i, j)));
      } else {
        CHECK(g.at(g.coupling_lin, i, j) == doctest::Approx(lin).epsilon(1e-12));
        double mean = 0;
        for (double v : col) mean += v;
        mean /= double(col.size());
        CHECK(g.at(g.mean_rsrp_dbm, i, j) == doctest::Approx(mean).epsilon(1e-12));
        std::sort(col.begin(), col.end());
        CHECK(g.at(g.p10_rsrp_dbm, i, j) == col[size_t(0.10 * double(col.size() - 1))]);
      }
    }
  }

  // overlap counts against a direct detection scan
  std::vector<double> overlap(size_t(n) * n, 0.0);
  for (int u = 0; u < st.ue_count(); ++u) {
    std::set<int> det;
    for (int c = 0; c < n; ++c)
      if (meas.rsrp(u, c) >= opts.detection_floor_dbm) det.insert(c);
    det.insert(meas.serving[u]);
    for (int a : det)
      for (int b : det) overlap[size_t(a) * n + b] += 1.0;
  }
  CHECK(g.overlap_count == overlap);
  for (int u = 0; u < st.ue_count(); ++u) {
    CHECK(std::binary_search(g.ue_detected[u].begin(), g.ue_detected[u].end(),
                             meas.serving[u]));
  }
}

TEST_CASE("affinity combines distance decay and normalized coupling") {
  netsim::NetworkState st = fixture_network();
  NetworkGraph g = build_graph(st, netsim::compute_measurements(st), {});
  const int n = g.n_cells;
  auto A = affinity_matrix(g);
  for (int i = 0; i < n; ++i) {
    CHECK(compute_affinity(g, i, i) == 0.0);
    CHECK(A[size_t(i) * n + i] == 0.0);
    double max_c = 0.0;
    for (int k = 0; k < n; ++k)
      if (k != i) max_c = std::max(max_c, g.at(g.coupling_lin, i, k));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double expect =
          0.5 * std::exp(-g.at(g.distance_m, i, j) / 500.0) +
          0.5 * (max_c > 0 ? g.at(g.coupling_lin, i, j) / max_c : 0.0);
      CHECK(compute_affinity(g, i, j) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(A[size_t(i) * n + j] == compute_affinity(g, i, j));
      CHECK(compute_affinity(g, i, j) >= 0.0);
      CHECK(compute_affinity(g, i, j) <= 1.0);
    }
  }
}

TEST_CASE("affinity of a cell serving nothing falls back to distance only") {
  netsim::NetworkState st = fixture_network();
  // Cell 0 transmits so weakly that it serves nobody.
  st.cells[0].tx_power_dbm = -80.0;
  netsim::MeasurementSet meas = netsim::compute_measurements(st);
  NetworkGraph g = build_graph(st, meas, {});
  REQUIRE(g.cells[0].served_count == 0);
  for (int j = 1; j < g.n_cells; ++j) {
    CHECK(compute_affinity(g, 0, j) ==
          doctest::Approx(0.5 * std::exp(-g.at(g.distance_m, 0, j) / 500.0)));
  }
}

TEST_CASE("select_fov ranks by descending affinity with id tie-break") {
  netsim::NetworkState st = fixture_network();
  NetworkGraph g = build_graph(st, netsim::compute_measurements(st), {});
  const int center = 2;
  FieldOfView fov = select_fov(g, center, 5);
  CHECK(fov.k_fov == 6);
  REQUIRE(fov.valid_count() == 6);
  CHECK(fov.members[0] == center);
  for (int i = 1; i + 1 < fov.valid_count(); ++i) {
    const double ai = compute_affinity(g, center, fov.members[i]);
    const double an = compute_affinity(g, center, fov.members[i + 1]);
    CHECK(ai >= an);
    if (ai == an) CHECK(fov.members[i] < fov.members[i + 1]);
  }
  // every non-member neighbor has affinity <= the last member
  const double last = compute_affinity(g, center, fov.members.back());
  for (int j = 0; j < g.n_cells; ++j) {
    if (j == center) continue;
    if (std::find(fov.members.begin(), fov.members.end(), j) == fov.members.end())
      CHECK(compute_affinity(g, center, j) <= last);
  }
}

TEST_CASE("select_fov truncates when the network is smaller than the view") {
  netsim::NetworkState st = fixture_network();
  NetworkGraph g = build_graph(st, netsim::compute_measurements(st), {});
  FieldOfView fov = select_fov(g, 0, 31);
  CHECK(fov.k_fov == 32);
  CHECK(fov.valid_count() == g.n_cells);
  std::set<int> uniq(fov.members.begin(), fov.members.end());
  CHECK(int(uniq.size()) == g.n_cells);
}

TEST_CASE("select_top_k picks the sickest cells with id tie-break") {
  netsim::NetworkState st = fixture_network();
  netsim::MeasurementSet meas = netsim::compute_measurements(st);
  reward::RewardWeights w;
  auto top = select_top_k(st, meas, 4, w);
  REQUIRE(top.size() == 4);

  // recompute health directly
  const int n = st.cell_count();
  std::vector<double> pass(n, 0), tot(n, 0);
  for (int u = 0; u < st.ue_count(); ++u) {
    int s = meas.serving[u];
    tot[s] += 1;
    if (meas.rsrp(u, s) >= w.rsrp_threshold_dbm && meas.sinr_db[u] >= w.sinr_threshold_db)
      pass[s] += 1;
  }
  std::vector<double> health(n, 1.0);
  for (int c = 0; c < n; ++c)
    if (tot[c] > 0) health[c] = pass[c] / tot[c];

  for (size_t i = 0; i + 1 < top.size(); ++i) {
    CHECK(health[top[i]] <= health[top[i + 1]]);
    if (health[top[i]] == health[top[i + 1]]) CHECK(top[i] < top[i + 1]);
  }
  // nothing outside the selection is strictly sicker than anything inside
  double worst_in = health[top.back()];
  for (int c = 0; c < n; ++c)
    if (std::find(top.begin(), top.end(), c) == top.end())
      CHECK(health[c] >= worst_in);
  // k larger than the network returns everything
  CHECK(select_top_k(st, meas, 100, w).size() == size_t(n));
}

TEST_CASE("channel registry: defaults, names, diagonal split") {
  ChannelRegistry reg = ChannelRegistry::defaults();
  CHECK(reg.size() == 21);
  auto names = reg.names();
  std::set<std::string> uniq(names.begin(), names.end());
  CHECK(uniq.size() == names.size());
  CHECK(reg.at(0) == Channel::Mask);
  ChannelRegistry back = ChannelRegistry::from_names(names);
  CHECK(back.size() == reg.size());
  for (int i = 0; i < reg.size(); ++i) CHECK(back.at(i) == reg.at(i));
  CHECK_THROWS_AS((void)ChannelRegistry::from_names({"tilt", "no_such_channel"}), Error);
  CHECK(channel_is_diagonal(Channel::Tilt));
  CHECK(channel_is_diagonal(Channel::Health));
  CHECK_FALSE(channel_is_diagonal(Channel::Distance));
  CHECK_FALSE(channel_is_diagonal(Channel::Mask));
  CHECK(std::string(channel_name(Channel::CouplingFwd)) == "coupling_fwd");
}

TEST_CASE("distill produces a masked, bounded, diagonally-structured tensor") {
  netsim::NetworkState st = fixture_network();
  NetworkGraph g = build_graph(st, netsim::compute_measurements(st), {});
  ChannelRegistry reg = ChannelRegistry::defaults();
  const int k_fov = 12;  // > n_cells(8): forces padding
  FieldOfView fov = select_fov(g, 1, k_fov - 1);
  LocalTensor t = distill(g, fov, reg);
  CHECK(t.k_fov == k_fov);
  CHECK(t.m == reg.size());
  CHECK(t.center_cell == 1);
  CHECK(t.valid_count == g.n_cells);
  CHECK(t.size() == size_t(k_fov) * k_fov * reg.size());

  int mask_idx = -1, tilt_idx = -1, dist_idx = -1;
  for (int c = 0; c < reg.size(); ++c) {
    if (reg.at(c) == Channel::Mask) mask_idx = c;
    if (reg.at(c) == Channel::Tilt) tilt_idx = c;
    if (reg.at(c) == Channel::Distance) dist_idx = c;
  }
  for (int j = 0; j < k_fov; ++j) {
    for (int k = 0; k < k_fov; ++k) {
      const bool valid = j < t.valid_count && k < t.valid_count;
      CHECK(t.at(j, k, mask_idx) == (valid ? 1.0f : 0.0f));
      for (int c = 0; c < t.m; ++c) {
        CHECK(t.at(j, k, c) >= -1.0f);
        CHECK(t.at(j, k, c) <= 1.0f);
        if (!valid) CHECK(t.at(j, k, c) == 0.0f);
      }
      if (valid && j != k) CHECK(t.at(j, k, tilt_idx) == 0.0f);  // diagonal-only
      if (valid && j == k) CHECK(t.at(j, k, dist_idx) == 0.0f);  // pairwise-only
    }
  }
  // spot-check values against the graph
  for (int j = 0; j < t.valid_count; ++j) {
    const int a = fov.members[j];
    CHECK(t.at(j, j, tilt_idx) == doctest::Approx(g.cells[a].tilt_deg / 15.0));
    for (int k = 0; k < t.valid_count; ++k) {
      if (j == k) continue;
      const int b = fov.members[k];
      const double expect = std::clamp(g.at(g.distance_m, a, b) / 2000.0, -1.0, 1.0);
      CHECK(t.at(j, k, dist_idx) == doctest::Approx(expect).epsilon(1e-6));
    }
  }
}

TEST_CASE("local tensors are byte-identical under cell permutation") {
  // Shadowing is keyed on cell ids, so geometry-only propagation isolates the
  // relabeling invariance.
  netsim::NetworkState st = fixture_network(11, 0.0);
  const int n = st.cell_count();
  std::vector<int> old_of_new(n);
  for (int i = 0; i < n; ++i) old_of_new[i] = i;
  Rng rng(99);
  rng.shuffle(old_of_new);

  netsim::NetworkState perm = st;
  for (int j = 0; j < n; ++j) {
    perm.cells[j] = st.cells[old_of_new[j]];
    perm.cells[j].id = j;
  }
  std::vector<int> new_of_old(n);
  for (int j = 0; j < n; ++j) new_of_old[old_of_new[j]] = j;

  NetworkGraph g0 = build_graph(st, netsim::compute_measurements(st), {});
  NetworkGraph g1 = build_graph(perm, netsim::compute_measurements(perm), {});
  ChannelRegistry reg = ChannelRegistry::defaults();
  for (int center = 0; center < n; ++center) {
    LocalTensor a = distill(g0, select_fov(g0, center, 5), reg);
    LocalTensor b = distill(g1, select_fov(g1, new_of_old[center], 5), reg);
    CHECK(bytes_equal(a, b));
  }
}

TEST_CASE("local tensors are byte-identical under UE shuffling") {
  netsim::NetworkState st = fixture_network(12, 6.0);  // shadowing on: keyed by UE id
  netsim::NetworkState shuffled = st;
  Rng rng(5);
  rng.shuffle(shuffled.ues);
  NetworkGraph g0 = build_graph(st, netsim::compute_measurements(st), {});
  NetworkGraph g1 = build_graph(shuffled, netsim::compute_measurements(shuffled), {});
  ChannelRegistry reg = ChannelRegistry::defaults();
  for (int center = 0; center < st.cell_count(); ++center) {
    LocalTensor a = distill(g0, select_fov(g0, center, 7), reg);
    LocalTensor b = distill(g1, select_fov(g1, center, 7), reg);
    CHECK(bytes_equal(a, b));
  }
}

TEST_CASE("tensor shape depends only on (k_fov, m), not on network size") {
  ChannelRegistry reg = ChannelRegistry::defaults();
  scenario::RandomizationSpec spec;
  spec.ue_count = {50, 50};
  for (int cells : {3, 10, 24}) {
    spec.cell_count = {cells, cells};
    netsim::NetworkState st = scenario::generate_network(spec, 7);
    PerceptionConfig cfg;
    cfg.top_k = 2;
    cfg.k_fov = 16;
    Perception p = perceive(st, cfg);
    REQUIRE(!p.tensors.empty());
    for (const auto& t : p.tensors) {
      CHECK(t.k_fov == 16);
      CHECK(t.m == reg.size());
      CHECK(t.size() == size_t(16) * 16 * reg.size());
      CHECK(t.valid_count == std::min(cells, 16));
    }
  }
}

TEST_CASE("perceive wires top-k, fovs and tensors together") {
  netsim::NetworkState st = fixture_network();
  PerceptionConfig cfg;
  cfg.top_k = 3;
  cfg.k_fov = 6;
  Perception p = perceive(st, cfg);
  REQUIRE(p.top_cells.size() == 3);
  REQUIRE(p.fovs.size() == 3);
  REQUIRE(p.tensors.size() == 3);
  auto expect_top = select_top_k(st, p.meas, 3, cfg.graph.weights);
  CHECK(p.top_cells == expect_top);
  for (size_t i = 0; i < p.fovs.size(); ++i) {
    CHECK(p.fovs[i].center == p.top_cells[i]);
    CHECK(p.tensors[i].center_cell == p.top_cells[i]);
  }
}

TEST_CASE("local_reward_cells takes the center plus leading neighbors") {
  FieldOfView fov;
  fov.center = 4;
  fov.k_fov = 6;
  fov.members = {4, 2, 9, 1, 7};
  auto cells = local_reward_cells(fov, 3);
  CHECK(cells == std::vector<int>{4, 2, 9, 1});
  CHECK(local_reward_cells(fov, 8) == fov.members);
  CHECK(local_reward_cells(fov, 0) == std::vector<int>{4});
}

TEST_CASE("tensor save/load round-trips bit-exactly") {
  auto dir = std::filesystem::temp_directory_path() / "cco_test_tensor";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  netsim::NetworkState st = fixture_network();
  NetworkGraph g = build_graph(st, netsim::compute_measurements(st), {});
  ChannelRegistry reg = ChannelRegistry::defaults();
  LocalTensor t = distill(g, select_fov(g, 3, 9), reg);
  save_tensor(dir / "t0", t, reg);
  LocalTensor back = load_tensor(dir / "t0");
  CHECK(back.k_fov == t.k_fov);
  CHECK(back.m == t.m);
  CHECK(back.center_cell == t.center_cell);
  CHECK(back.valid_count == t.valid_count);
  CHECK(bytes_equal(back, t));
  std::filesystem::remove_all(dir);
}

TEST_CASE("truncated tensor payload is rejected") {
  auto dir = std::filesystem::temp_directory_path() / "cco_test_tensor_bad";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  netsim::NetworkState st = fixture_network();
  NetworkGraph g = build_graph(st, netsim::compute_measurements(st), {});
  ChannelRegistry reg = ChannelRegistry::defaults();
  LocalTensor t = distill(g, select_fov(g, 0, 4), reg);
  save_tensor(dir / "t0", t, reg);
  std::filesystem::resize_file(dir / "t0.bin", 16);
  CHECK_THROWS_AS((void)load_tensor(dir / "t0"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("labeled dataset: append, round-trip, label validation") {
  auto dir = std::filesystem::temp_directory_path() / "cco_test_dataset";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  netsim::NetworkState st = fixture_network();
  NetworkGraph g = build_graph(st, netsim::compute_measurements(st), {});
  ChannelRegistry reg = ChannelRegistry::defaults();

  LabeledTensorDataset ds;
  ds.channels = reg.names();
  for (int c = 0; c < 4; ++c) {
    LocalTensor t = distill(g, select_fov(g, c, 5), reg);
    ds.append(t, {"task/" + std::to_string(c), c, c, c % netsim::kTiltActionCount});
  }
  CHECK(ds.size() == 4);
  CHECK(ds.record_size() == size_t(6) * 6 * reg.size());
  CHECK(ds.data.size() == 4 * ds.record_size());

  save_dataset(dir / "data", ds);
  LabeledTensorDataset back = load_dataset(dir / "data");
  CHECK(back.size() == ds.size());
  CHECK(back.k_fov == ds.k_fov);
  CHECK(back.m == ds.m);
  CHECK(back.channels == ds.channels);
  for (size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.meta[i].task_id == ds.meta[i].task_id);
    CHECK(back.meta[i].label == ds.meta[i].label);
    auto a = ds.tensor_data(i);
    auto b = back.tensor_data(i);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
  }

  LocalTensor t = distill(g, select_fov(g, 0, 5), reg);
  CHECK_THROWS_AS(ds.append(t, {"bad", 0, 0, 11}), Error);
  CHECK_THROWS_AS(ds.append(t, {"bad", 0, 0, -1}), Error);
  LocalTensor wrong = distill(g, select_fov(g, 0, 3), reg);
  CHECK_THROWS_AS(ds.append(wrong, {"bad", 0, 0, 5}), Error);
  std::filesystem::remove_all(dir);
}
