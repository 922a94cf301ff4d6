// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "autost/detail/parallel_map.hpp"
#include "autost/eval_harness.hpp"
#include "autost/gradcheck_suite.hpp"
#include "autost/losses.hpp"
#include "autost/ops.hpp"
#include "autost/poi_embedding.hpp"
#include "autost/run_config.hpp"
#include "autost/trainer.hpp"
#include "autost/view_generator.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace autost;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details.push_back("violated: " + what);
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.summary = std::string("threw: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %s: %s (%s; %.1f s)\n", id, o.pass ? "PASS" : "FAIL", name, o.summary.c_str(),
              seconds_since(t));
  for (const std::string& d : o.details) std::printf("    %s\n", d.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------

Outcome gradient_integrity() {
  Outcome o;
  const auto t = Clock::now();
  const auto entries = run_gradcheck_suite(20, 0);
  const double elapsed = seconds_since(t);
  double worst = 0.0;
  for (const SuiteEntry& e : entries) {
    worst = std::max(worst, e.max_relative_error);
    o.details.push_back(fmt("%-15s max rel err %.3e over %zu points (%zu entries)", e.name.c_str(),
                            e.max_relative_error, e.points, e.entries));
    o.check(e.max_relative_error < 1e-4, e.name + " relative error >= 1e-4");
    o.check(e.points == 20, e.name + " checked at fewer than 20 points");
  }
  o.check(entries.size() == 7, "suite does not cover all 7 operations");
  o.check(elapsed < 60.0, "suite took longer than 60 s");
  o.summary = fmt("worst %.2e < 1e-4, suite %.2f s < 60 s", worst, elapsed);
  return o;
}

// All labelled connected graphs on n nodes, as edge lists.
std::vector<std::vector<Edge>> connected_graphs(std::size_t n) {
  std::vector<Edge> all;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) all.push_back({u, v});
  std::vector<std::vector<Edge>> out;
  for (std::uint64_t mask = 0; mask < (1ull << all.size()); ++mask) {
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < all.size(); ++k)
      if (mask >> k & 1) edges.push_back(all[k]);
    std::vector<std::size_t> comp(n);
    for (std::size_t i = 0; i < n; ++i) comp[i] = i;
    std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
      return comp[x] == x ? x : comp[x] = root(comp[x]);
    };
    for (const Edge& e : edges) comp[root(e.u)] = root(e.v);
    bool connected = true;
    for (std::size_t i = 1; i < n; ++i) connected = connected && root(i) == root(0);
    if (connected) out.push_back(edges);
  }
  return out;
}

Outcome oracle_equivalence() {
  Outcome o;
  Rng rng(2024);
  std::size_t graphs = 0, encodes = 0;
  double worst_encode = 0.0;
  for (std::size_t n = 1; n <= 5; ++n) {
    for (const std::vector<Edge>& g : connected_graphs(n)) {
      ++graphs;
      // One relation carrying the whole graph, then the same graph split
      // randomly over two relations (their union stays connected).
      std::vector<std::vector<Edge>> split(2);
      for (const Edge& e : g) split[rng() % 2].push_back(e);
      for (const auto& rel : {std::vector<std::vector<Edge>>{g}, split}) {
        EncoderParams params = EncoderParams::glorot(3, 2, rng);
        const Tensor h0 = gaussian(n, 3, 0.0, 1.0, rng);
        Tape tape;
        const Tensor got =
            encode(tape, testing::relation_inputs_for(n, rel), tape.constant(h0), params).value();
        const Tensor want = testing::per_node_oracle(n, rel, h0, params);
        for (std::size_t k = 0; k < got.size(); ++k)
          worst_encode = std::max(worst_encode, std::abs(got.data()[k] - want.data()[k]));
        ++encodes;
      }
    }
  }
  o.check(worst_encode <= 1e-9, "encode() differs from the per-node oracle by more than 1e-9");

  double worst_nce = 0.0, worst_bn = 0.0;
  for (std::size_t trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 7, m = 1 + trial % 5, d = 1 + trial % 6;
    const Tensor a = gaussian(n, d, 0.0, 1.0, rng), b = gaussian(n, d, 0.0, 1.0, rng);
    const Tensor c = gaussian(m, d, 0.0, 1.0, rng), e = gaussian(m, d, 0.0, 1.0, rng);
    const double tau = 0.2 + 0.1 * static_cast<double>(trial % 8);
    Tape tape;
    auto k = [&](const Tensor& t) { return tape.constant(t); };
    worst_nce = std::max(worst_nce, std::abs(info_nce(k(a), k(b), tau).value().item() -
                                             testing::nce_oracle(a, b, tau)));
    worst_bn = std::max(worst_bn, std::abs(info_bn(k(a), k(b), k(c), k(e), tau).value().item() -
                                           testing::bn_oracle(a, b, c, e, tau)));
  }
  o.check(worst_nce <= 1e-10, "InfoNCE differs from the double loop by more than 1e-10");
  o.check(worst_bn <= 1e-10, "InfoBN differs from the double loop by more than 1e-10");
  o.summary = fmt("%zu connected graphs, %zu encodes, max |diff| %.1e; InfoNCE %.1e, InfoBN %.1e over 300 cases",
                  graphs, encodes, worst_encode, worst_nce, worst_bn);
  return o;
}

Outcome closed_forms() {
  Outcome o;
  double worst_nce = 0.0;
  for (std::size_t n = 2; n <= 64; n *= 2) {
    Tensor h(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      h(i, 0) = 1.0;
      h(i, 1) = -2.0;
      h(i, 2) = 0.5;
    }
    Tape tape;
    const double nce = info_nce(tape.constant(h), tape.constant(h), 0.5).value().item();
    worst_nce = std::max(worst_nce, std::abs(nce - static_cast<double>(n) * std::log(static_cast<double>(n))));
  }
  o.check(worst_nce <= 1e-9, "InfoNCE of identical views != N ln N");

  Rng rng(3);
  const Tensor v = gaussian(7, 4, 0.0, 1.0, rng);
  const double r2 = reward_r2(v, v);
  o.check(std::abs(r2) <= 1e-12, "R2 of identical views != 0");

  const double r1 = reward_r1(1.2, 1.2, 0.1);
  o.check(r1 == 0.1, "R1 at L = eps' did not return xi");
  o.check(reward_r1(std::nextafter(1.2, 2.0), 1.2, 0.1) == 1.0, "R1 just above eps' did not return 1");

  Tape tape;
  const double bce = reconstruction_loss(tape.constant(Tensor(1, 1, 0.0)), {1}).value().item();
  const double bce_neg = reconstruction_loss(tape.constant(Tensor(1, 1, 0.0)), {0}).value().item();
  o.check(std::abs(bce - std::log(2.0)) <= 1e-12, "single positive edge BCE at score 0 != ln 2");
  o.check(std::abs(bce_neg - std::log(2.0)) <= 1e-12, "single negative edge BCE at score 0 != ln 2");
  o.summary = fmt("N ln N err %.1e, R2 %.1e, R1(eps')=%g, BCE(0) err %.1e", worst_nce, r2, r1,
                  std::abs(bce - std::log(2.0)));
  return o;
}

// ---------------------------------------------------------------------------

Outcome convergence() {
  Outcome o;
  const auto t = Clock::now();
  double m_first = 0.0, m_last = 0.0, l_first = 0.0, l_last = 0.0;
  int summed_down = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthConfig s;
    s.seed = seed;
    TrainConfig c;
    c.seed = seed;
    const auto history = train(synth_dataset(s), c).history;
    const EpochRecord& a = history.front();
    const EpochRecord& b = history.back();
    o.details.push_back(fmt("seed %llu: epoch-mean L %.4f -> %.4f; summed L %.1f -> %.1f over %zu -> %zu shared nodes",
                            static_cast<unsigned long long>(seed), a.mean_total, b.mean_total, a.total,
                            b.total, a.shared_nodes, b.shared_nodes));
    o.check(history.size() == 50, "history does not have 50 epochs");
    o.check(b.mean_total < a.mean_total, fmt("seed %llu epoch-mean L did not decrease",
                                              static_cast<unsigned long long>(seed)));
    summed_down += b.total < a.total;
    m_first += a.mean_total / 5;
    m_last += b.mean_total / 5;
    l_first += a.total / 5;
    l_last += b.total / 5;
  }
  const double elapsed = seconds_since(t);
  o.check(elapsed < 300.0, "5 seeds took longer than 5 min");
  o.details.push_back(fmt("info (not gated): seed-averaged summed L %.1f -> %.1f, lower at epoch 50 for %d of 5 seeds",
                          l_first, l_last, summed_down));
  o.summary = fmt("seed-averaged epoch-mean L %.4f -> %.4f, every seed decreases, %.0f s < 300 s", m_first,
                  m_last, elapsed);
  return o;
}

// Noisy fixture arms shared by criteria 5 and 6.
struct NoisyArms {
  static constexpr AblationVariant kArms[] = {AblationVariant::Full, AblationVariant::RandomAug,
                                              AblationVariant::NoInfoMin};
  std::vector<Dataset> datasets;  // one per seed
  std::vector<ArmResult> results; // seed-major, kArms order
  double seconds = 0.0;

  const ArmResult& at(std::size_t seed, std::size_t arm) const { return results[seed * 3 + arm]; }
};

const NoisyArms& noisy_arms() {
  static const NoisyArms arms = [] {
    NoisyArms a;
    const auto t = Clock::now();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SynthConfig s;
      s.noise_rate = 0.3;
      s.seed = seed;
      a.datasets.push_back(synth_dataset(s));
    }
    a.results = parallel_map<ArmResult>(15, std::max(1u, std::thread::hardware_concurrency()),
                                        [&](std::size_t k) {
                                          TrainConfig c;
                                          c.seed = k / 3;
                                          ProbeConfig p;
                                          p.seed = k / 3;
                                          return run_ablation(a.datasets[k / 3], NoisyArms::kArms[k % 3], c, p);
                                        });
    a.seconds = seconds_since(t);
    return a;
  }();
  return arms;
}

Outcome augmentation_value() {
  Outcome o;
  const NoisyArms& arms = noisy_arms();
  double mean[3] = {0, 0, 0};
  std::map<Task, double> task_mae[3];
  for (std::size_t seed = 0; seed < 5; ++seed) {
    std::string line = fmt("seed %zu:", seed);
    for (std::size_t a = 0; a < 3; ++a) {
      const ArmResult& r = arms.at(seed, a);
      const double nmae = normalized_mae(r.predictions);
      mean[a] += nmae / 5;
      for (const TaskMetrics& m : r.metrics) task_mae[a][m.task] += m.metrics.mae / 5;
      line += fmt(" %s %.4f", std::string(variant_name(NoisyArms::kArms[a])).c_str(), nmae);
    }
    o.details.push_back(line);
  }
  for (const auto& [task, mae] : task_mae[0]) {
    o.details.push_back(fmt("mean raw MAE %s: FULL %.4f RANDOM_AUG %.4f NO_INFOMIN %.4f",
                            std::string(task_name(task)).c_str(), mae, task_mae[1][task], task_mae[2][task]));
  }
  o.check(mean[0] <= mean[1], fmt("FULL %.4f > RANDOM_AUG %.4f", mean[0], mean[1]));
  o.details.push_back(fmt("advisory: FULL <= NO_INFOMIN is %s (%.4f vs %.4f)",
                          mean[0] <= mean[2] ? "met" : "not met", mean[0], mean[2]));
  o.summary = fmt("mean normalized probe MAE over 5 seeds: FULL %.4f, RANDOM_AUG %.4f, NO_INFOMIN %.4f; 15 arms in %.0f s",
                  mean[0], mean[1], mean[2], arms.seconds);
  return o;
}

Outcome density_robustness() {
  Outcome o;
  const NoisyArms& arms = noisy_arms();
  const DensityBin sparse = kDensityBins[0];
  double sparse_mae[2] = {0, 0};
  for (std::size_t seed = 0; seed < 5; ++seed) {
    const Dataset& ds = arms.datasets[seed];
    std::set<std::string> labels;
    std::string counts;
    for (const RegionBin& b : density_bins(ds)) {
      labels.insert(bin_label(b.bin));
      counts += fmt(" %s n=%zu", bin_label(b.bin).c_str(), b.regions.size());
    }
    o.check(labels.count(bin_label(kDensityBins[0])) && labels.count(bin_label(kDensityBins[1])),
            fmt("seed %zu does not populate both sparse bins", seed));
    std::string line = fmt("seed %zu:%s; sparse crime MAE", seed, counts.c_str());
    for (std::size_t a = 0; a < 2; ++a) {
      for (const BinMetrics& m : robustness_by_density(ds, arms.at(seed, a).predictions)) {
        if (m.task == Task::Crime && m.bin.upper == sparse.upper) {
          sparse_mae[a] += m.metrics.mae / 5;
          line += fmt(" %s %.4f", std::string(variant_name(NoisyArms::kArms[a])).c_str(), m.metrics.mae);
        }
      }
    }
    o.details.push_back(line);
  }
  o.check(sparse_mae[0] <= sparse_mae[1], fmt("FULL %.4f > RANDOM_AUG %.4f", sparse_mae[0], sparse_mae[1]));
  o.summary = fmt("both sparse bins populated; mean %s crime MAE FULL %.4f vs RANDOM_AUG %.4f",
                  bin_label(sparse).c_str(), sparse_mae[0], sparse_mae[1]);
  return o;
}

Outcome sweep_harness() {
  Outcome o;
  RunConfig base;
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{{"synth.regions", "20"},
                                                                             {"synth.slots", "2"},
                                                                             {"synth.trips", "600"},
                                                                             {"train.epochs", "3"},
                                                                             {"model.dim", "16"},
                                                                             {"attn.heads", "2"},
                                                                             {"poi.epochs", "1"},
                                                                             {"eval.folds", "3"}})
    base.set(k, v);
  const std::vector<std::string> grid{"0.0", "0.1", "0.3", "0.5"};
  const auto rows = sweep(base, "loss.beta", grid, nullptr, 1);
  o.check(rows.size() == grid.size(), "sweep did not return one row per value");
  for (std::size_t k = 0; k < rows.size() && k < grid.size(); ++k) {
    o.check(rows[k].value == grid[k], "row " + std::to_string(k) + " is not " + grid[k]);
    o.check(rows[k].metrics.size() == 3, "row " + grid[k] + " lacks a task");
    RunConfig c = base;
    c.set("loss.beta", rows[k].value);
    o.check(c.train.loss.beta == std::stod(grid[k]), "beta did not parse exactly for " + grid[k]);
  }
  std::ostringstream csv;
  write_sweep_csv(csv, "loss.beta", rows);
  std::vector<std::string> lines;
  std::istringstream in(csv.str());
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  o.check(!lines.empty() && lines[0] == "param,value,task,mae,mape,rmse", "bad sweep CSV header");
  std::string grid_seen;
  for (std::size_t k = 1; k < lines.size(); k += 3) {
    const auto a = lines[k].find(',') + 1;
    grid_seen += (k > 1 ? "," : "") + lines[k].substr(a, lines[k].find(',', a) - a);
  }
  o.check(grid_seen == "0.0,0.1,0.3,0.5", "CSV grid is " + grid_seen);
  o.summary = fmt("beta grid {%s}: %zu rows, %zu CSV lines", grid_seen.c_str(), rows.size(), lines.size() - 1);
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / fmt("autost_acceptance_%llu",
                                                       static_cast<unsigned long long>(std::random_device{}()));
  fs::create_directories(dir);
  SynthConfig s;
  s.seed = 11;
  const Dataset ds = synth_dataset(s);
  TrainConfig c;
  c.seed = 11;
  c.epochs = 5;
  auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  for (const char* name : {"a.bin", "b.bin"}) export_embeddings(train(ds, c), 0xfeedULL, dir / name);
  const std::string a = bytes(dir / "a.bin"), b = bytes(dir / "b.bin");
  o.check(!a.empty() && a == b, "two trainings with one seed wrote different files");

  const EmbeddingFile loaded = load_embeddings(dir / "a.bin");
  const fs::path again = dir / "again.bin";
  export_embeddings(loaded.embeddings, loaded.header.config_hash, again);
  o.check(bytes(again) == a, "export(load(f)) is not byte-identical to f");
  const EmbeddingFile reloaded = load_embeddings(again);
  o.check(reloaded.embeddings == loaded.embeddings, "round-tripped embeddings differ");
  o.check(loaded.header.config_hash == 0xfeedULL, "config hash not preserved");
  fs::remove_all(dir);
  o.summary = fmt("%zu-byte files identical across runs; %llux%llu round trip bit-exact", a.size(),
                  static_cast<unsigned long long>(loaded.header.regions),
                  static_cast<unsigned long long>(loaded.header.dim));
  return o;
}

Outcome invariants() {
  Outcome o;
  std::size_t checks = 0;
  Rng rng(99);
  for (std::size_t trial = 0; trial < 50; ++trial) {
    // Softmax and attention rows sum to one.
    Tape tape;
    const Tensor x = gaussian(1 + trial % 6, 1 + trial % 5, 0.0, 3.0, rng);
    const Tensor sm = softmax_rows(tape.constant(x)).value();
    for (std::size_t i = 0; i < sm.rows(); ++i) {
      double s = 0.0;
      for (double v : sm.row(i)) s += v;
      o.check(std::abs(s - 1.0) <= 1e-12, "softmax row does not sum to 1");
    }
    AttentionParams att = AttentionParams::glorot(4, 2, rng);
    for (const Tensor& alpha : attention_weights(gaussian(5, 4, 0.0, 1.0, rng), att)) {
      for (std::size_t i = 0; i < alpha.rows(); ++i) {
        double s = 0.0;
        for (double v : alpha.row(i)) s += v;
        o.check(std::abs(s - 1.0) <= 1e-12, "attention row does not sum to 1");
      }
    }

    // A-hat symmetric with entries in [0, 1].
    const std::size_t n = 2 + trial % 9;
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        if (rng() % 3 == 0) edges.push_back({u, v});
    const Tensor a = normalized_adjacency(n, edges)->to_dense();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        o.check(a(i, j) == a(j, i), "A-hat not symmetric");
        o.check(a(i, j) >= 0.0 && a(i, j) <= 1.0, "A-hat entry outside [0, 1]");
      }

    // Sparsification yields exactly the thresholded pairs, each once.
    std::vector<Edge> pairs;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v) pairs.push_back({u, v});
    const Tensor scores = gaussian(pairs.size(), 1, 0.0, 2.0, rng);
    const double eps = 0.1 + 0.8 * static_cast<double>(trial % 10) / 10.0;
    const std::vector<Edge> kept = sparsify(scores, pairs, eps);
    std::set<std::pair<std::size_t, std::size_t>> expect, got;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if (1.0 / (1.0 + std::exp(-scores(k, 0))) >= eps) expect.insert({pairs[k].u, pairs[k].v});
    for (const Edge& e : kept) got.insert({e.u, e.v});
    o.check(got.size() == kept.size(), "sparsify emitted a duplicate edge");
    o.check(got == expect, "sparsify does not match the threshold");

    // Both views contain every seed.
    if (!edges.empty()) {
      Tensor h = gaussian(n, 4, 0.0, 1.0, rng);
      VgaeParams s1 = VgaeParams::glorot("s1", 4, rng), s2 = VgaeParams::glorot("s2", 4, rng);
      ViewConfig vc;
      vc.seed_frac = 0.4;
      for (const GeneratedViews& g :
           {generate_views(n, edges, h, s1, s2, vc, trial, 0), generate_random_views(n, edges, 0.2, vc, trial, 0)}) {
        for (const ViewSample& sample : g.samples)
          for (std::size_t seed : g.seeds)
            o.check(std::binary_search(sample.view.nodes.begin(), sample.view.nodes.end(), seed),
                    "a seed is missing from a view");
      }
    }

    // RMSE >= MAE.
    const Tensor p = gaussian(1 + trial % 20, 1, 0.0, 5.0, rng), t = gaussian(p.rows(), 1, 0.0, 5.0, rng);
    const Metrics m = metrics(p.data(), t.data());
    o.check(m.rmse >= m.mae, "RMSE < MAE");

    // Cosine-based losses ignore positive rescaling.
    const Tensor u = gaussian(5, 3, 0.0, 1.0, rng), w = gaussian(5, 3, 0.0, 1.0, rng);
    Tensor us = u, ws = w;
    const double factor = 0.01 + static_cast<double>(trial);
    for (double& v : us.data()) v *= factor;
    for (double& v : ws.data()) v *= 1.0 / factor;
    o.check(std::abs(info_nce(tape.constant(u), tape.constant(w), 0.5).value().item() -
                     info_nce(tape.constant(us), tape.constant(ws), 0.5).value().item()) <= 1e-9,
            "InfoNCE changed under rescaling");
    o.check(std::abs(info_bn(tape.constant(u), tape.constant(w), tape.constant(w), tape.constant(u), 0.5)
                         .value()
                         .item() -
                     info_bn(tape.constant(us), tape.constant(ws), tape.constant(ws), tape.constant(us), 0.5)
                         .value()
                         .item()) <= 1e-9,
            "InfoBN changed under rescaling");
    o.check(std::abs(reward_r2(u, w) - reward_r2(us, ws)) <= 1e-12, "R2 changed under rescaling");
    ++checks;
  }
  o.summary = fmt("%zu randomized rounds of softmax, attention, A-hat, sparsify, seed inclusion, RMSE>=MAE, scale invariance",
                  checks);
  return o;
}

}  // namespace

int main() {
  report(1, "gradient integrity", gradient_integrity);
  report(2, "oracle equivalence", oracle_equivalence);
  report(3, "closed forms", closed_forms);
  report(4, "convergence", convergence);
  report(5, "augmentation value", augmentation_value);
  report(6, "density robustness", density_robustness);
  report(7, "sweep harness", sweep_harness);
  report(8, "determinism", determinism);
  report(9, "invariant suites", invariants);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
