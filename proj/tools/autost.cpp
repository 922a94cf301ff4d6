#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "autost/detail/parallel_map.hpp"
#include "autost/errors.hpp"
#include "autost/eval_harness.hpp"
#include "autost/gradcheck_suite.hpp"
#include "autost/hetero_graph.hpp"
#include "autost/region_data.hpp"
#include "autost/run_config.hpp"
#include "autost/trainer.hpp"

namespace fs = std::filesystem;
using namespace autost;

namespace {

constexpr double kGradTolerance = 1e-4;

// Flags shared by every command.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 1;
  std::vector<std::string> sets;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
  cmd->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--out", c.out, out_help);
  cmd->add_option("--jobs", c.jobs, "worker threads for independent runs")->check(CLI::PositiveNumber);
  cmd->add_option("--set", c.sets, "override one key, e.g. --set loss.beta=0.3");
  cmd->add_flag("--print-config", c.print_config, "print the resolved config to stderr");
}

RunConfig resolve(const Common& c, const std::optional<fs::path>& base = {}) {
  RunConfig cfg;
  if (base) cfg.load_file(*base);
  if (!c.config.empty()) cfg.load_file(c.config);
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  cfg.train_config().validate();
  cfg.probe_config().validate();
  if (c.print_config) std::cerr << cfg.canonical();
  return cfg;
}

const std::string& require_out(const Common& c) {
  if (c.out.empty()) throw ConfigError("--out is required");
  return c.out;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string shortest(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// A dataset from --data, or the synthetic city of the config.
Dataset dataset_for(const std::string& data, const RunConfig& cfg) {
  return data.empty() ? synth_dataset(cfg.synth_config()) : load_dataset_dir(data);
}

// Artifacts written by `train` into a model directory.
struct ModelDir {
  fs::path dir;
  fs::path manifest() const { return dir / "manifest.json"; }
  fs::path config() const { return dir / "config.txt"; }
  fs::path embeddings() const { return dir / "embeddings.bin"; }
  fs::path checkpoint() const { return dir / "checkpoint.json"; }
  fs::path loss() const { return dir / "loss.csv"; }

  nlohmann::json read_manifest() const {
    std::ifstream in(manifest());
    if (!in) throw IoError("cannot read " + manifest().string() + " (is this a train output dir?)");
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(manifest().string() + ": " + e.what());
    }
  }

  // --data wins; otherwise the dataset recorded at training time.
  Dataset dataset(const std::string& data, const RunConfig& cfg) const {
    if (!data.empty()) return load_dataset_dir(data);
    const nlohmann::json m = read_manifest();
    const std::string recorded = m.value("data", "");
    return recorded.empty() ? synth_dataset(cfg.synth_config()) : load_dataset_dir(recorded);
  }
};

int cmd_synth(const Common& c) {
  const RunConfig cfg = resolve(c);
  const Dataset ds = synth_dataset(cfg.synth_config());
  save_dataset(ds, require_out(c));
  std::cout << "wrote " << ds.regions() << " regions, " << ds.trajectories.size() << " trips to "
            << c.out << "\n";
  return 0;
}

struct IngestArgs {
  std::string poi, trips, centroids, targets, clusters;
  std::optional<std::size_t> slots;
};

int cmd_ingest(const Common& c, const IngestArgs& a) {
  resolve(c);
  DatasetPaths paths{a.poi, a.trips, a.centroids, {}, {}};
  if (!a.targets.empty()) paths.targets = a.targets;
  if (!a.clusters.empty()) paths.clusters = a.clusters;
  const Dataset ds = load_dataset(paths, a.slots);
  save_dataset(ds, require_out(c));
  std::cout << "validated " << ds.regions() << " regions, " << ds.slots << " slots, "
            << ds.trajectories.size() << " trips\n";
  return 0;
}

int cmd_build_graph(const Common& c, const std::string& data) {
  const RunConfig cfg = resolve(c);
  const Dataset ds = dataset_for(data, cfg);
  const Trainer trainer(ds, cfg.train_config());
  auto out = open_out(require_out(c));
  write_graph_jsonl(trainer.graph(), out);
  for (const Relation rel : kRelations) {
    std::cout << relation_name(rel) << " " << trainer.graph().edges(rel).size() << " edges\n";
  }
  return 0;
}

int cmd_train(const Common& c, const std::string& data, const std::string& resume) {
  const RunConfig cfg = resolve(c);
  const ModelDir model{require_out(c)};
  const Dataset ds = dataset_for(data, cfg);
  TrainConfig tc = cfg.train_config();
  tc.checkpoint_dir = model.dir / "checkpoints";
  if (tc.checkpoint_every > 0) fs::create_directories(tc.checkpoint_dir);
  fs::create_directories(model.dir);

  Trainer trainer(ds, tc);
  if (!resume.empty()) trainer.load_checkpoint(resume);
  while (trainer.epochs_done() < tc.epochs) {
    const EpochRecord r = trainer.run_epoch();
    std::cerr << "epoch " << r.epoch << " L=" << shortest(r.total) << " reward=" << shortest(r.reward)
              << "\n";
  }
  trainer.save_checkpoint(model.checkpoint());
  const TrainedModel trained = std::move(trainer).finish();

  export_embeddings(trained, cfg.hash(), model.embeddings());
  {
    auto out = open_out(model.loss());
    write_loss_csv(trained.history, out);
  }
  {
    auto out = open_out(model.config());
    out << cfg.canonical();
  }
  const EmbeddingFile written = load_embeddings(model.embeddings());
  nlohmann::ordered_json manifest;
  manifest["format"] = "autost-model";
  manifest["data"] = data.empty() ? "" : fs::absolute(data).lexically_normal().string();
  manifest["seed"] = cfg.seed;
  manifest["epochs"] = trained.history.size();
  manifest["config_hash"] = hex(cfg.hash());
  manifest["embeddings"] = model.embeddings().filename().string();
  manifest["embeddings_checksum"] = hex(written.header.checksum);
  open_out(model.manifest()) << manifest.dump(2) << "\n";
  std::cout << "trained " << trained.history.size() << " epochs; embeddings "
            << written.header.regions << "x" << written.header.dim << " -> " << model.embeddings().string()
            << "\n";
  return 0;
}

int cmd_embed(const Common& c, const std::string& model_dir, const std::string& data,
              const std::string& format) {
  const ModelDir model{model_dir};
  const RunConfig cfg = resolve(c, model.config());
  const Dataset ds = model.dataset(data, cfg);
  Trainer trainer(ds, cfg.train_config());
  trainer.load_checkpoint(model.checkpoint());
  const Tensor emb = region_embeddings(std::move(trainer).finish());
  const fs::path out = require_out(c);
  if (format == "bin") {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    export_embeddings(emb, cfg.hash(), out);
  } else {
    auto f = open_out(out);
    f << "region";
    for (std::size_t j = 0; j < emb.cols(); ++j) f << ",e" << j;
    f << "\n";
    for (std::size_t i = 0; i < emb.rows(); ++i) {
      f << i;
      for (double v : emb.row(i)) f << ',' << shortest(v);
      f << "\n";
    }
  }
  std::cout << "embedded " << emb.rows() << " regions -> " << out.string() << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& model_dir, const std::string& data,
             const std::string& label) {
  const ModelDir model{model_dir};
  const RunConfig cfg = resolve(c, model.config());
  const Dataset ds = model.dataset(data, cfg);
  const EmbeddingFile emb = load_embeddings(model.embeddings());
  const auto metrics = score(probe(emb.embeddings, ds.targets, cfg.probe_config()));
  const fs::path out = c.out.empty() ? model.dir / "metrics.csv" : fs::path(c.out);
  auto f = open_out(out);
  write_metrics_header(f);
  write_metrics_rows(f, label, cfg.seed, metrics);
  write_metrics_header(std::cout);
  write_metrics_rows(std::cout, label, cfg.seed, metrics);
  return 0;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_ablate(const Common& c, const std::string& data, const std::string& variants,
               std::size_t seeds) {
  const RunConfig cfg = resolve(c);
  std::vector<AblationVariant> arms;
  if (variants.empty()) {
    arms.assign(std::begin(kAblationVariants), std::end(kAblationVariants));
  } else {
    for (const std::string& v : split(variants, ',')) arms.push_back(parse_variant(v));
  }
  std::vector<std::uint64_t> seed_list;
  for (std::size_t k = 0; k < seeds; ++k) seed_list.push_back(cfg.seed + k);

  // One dataset per seed; loaded data is shared by all seeds.
  std::vector<Dataset> datasets;
  for (std::uint64_t s : seed_list) {
    RunConfig per = cfg;
    per.seed = s;
    datasets.push_back(data.empty() || datasets.empty() ? dataset_for(data, per) : datasets.front());
  }
  const std::size_t runs = seed_list.size() * arms.size();
  const auto results = parallel_map<std::vector<TaskMetrics>>(runs, c.jobs, [&](std::size_t k) {
    RunConfig per = cfg;
    per.seed = seed_list[k / arms.size()];
    return run_ablation(datasets[k / arms.size()], arms[k % arms.size()], per.train_config(),
                        per.probe_config())
        .metrics;
  });
  auto f = open_out(require_out(c));
  write_metrics_header(f);
  for (std::size_t k = 0; k < runs; ++k) {
    write_metrics_rows(f, variant_name(arms[k % arms.size()]), seed_list[k / arms.size()], results[k]);
  }
  std::cout << "wrote " << runs << " arms to " << c.out << "\n";
  return 0;
}

int cmd_robustness(const Common& c, const std::string& data, const std::string& variant) {
  const RunConfig cfg = resolve(c);
  const Dataset ds = dataset_for(data, cfg);
  const TrainConfig tc = apply_variant(cfg.train_config(), parse_variant(variant));
  const auto bins = robustness_by_density(ds, tc, cfg.probe_config());
  auto f = open_out(require_out(c));
  write_bin_csv(f, bins);
  for (const RegionBin& b : density_bins(ds)) {
    std::cout << bin_label(b.bin) << " " << b.regions.size() << " regions\n";
  }
  return 0;
}

int cmd_case(const Common& c, const std::string& model_dir, const std::string& pairs_text) {
  const ModelDir model{model_dir};
  resolve(c, model.config());
  const EmbeddingFile emb = load_embeddings(model.embeddings());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const std::string& p : split(pairs_text, ',')) {
    const auto dash = p.find('-');
    std::size_t u = 0, v = 0;
    const bool ok = dash != std::string::npos &&
                    std::from_chars(p.data(), p.data() + dash, u).ptr == p.data() + dash &&
                    std::from_chars(p.data() + dash + 1, p.data() + p.size(), v).ptr == p.data() + p.size();
    if (!ok) throw ConfigError("--pairs expects u-v[,u-v...], got '" + p + "'");
    pairs.emplace_back(u, v);
  }
  if (pairs.empty()) throw ConfigError("--pairs is empty");
  const auto sims = pair_similarity(emb.embeddings, pairs);
  std::ostringstream text;
  text << "u,v,cosine\n";
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    text << pairs[k].first << ',' << pairs[k].second << ',' << shortest(sims[k]) << "\n";
  }
  if (!c.out.empty()) open_out(c.out) << text.str();
  std::cout << text.str();
  return 0;
}

int cmd_gradcheck(const Common& c, std::size_t points) {
  const RunConfig cfg = resolve(c);
  const auto entries = run_gradcheck_suite(points, cfg.seed);
  std::ostringstream text;
  text << "op,max_relative_error,points,entries\n";
  double worst = 0.0;
  std::string worst_name;
  for (const SuiteEntry& e : entries) {
    text << e.name << ',' << shortest(e.max_relative_error) << ',' << e.points << ',' << e.entries
         << "\n";
    if (e.max_relative_error >= worst) {
      worst = e.max_relative_error;
      worst_name = e.name;
    }
  }
  if (!c.out.empty()) open_out(c.out) << text.str();
  std::cout << text.str();
  if (worst >= kGradTolerance) {
    std::cerr << "autost: gradcheck: " << worst_name << " max relative error " << shortest(worst)
              << " >= " << shortest(kGradTolerance) << "\n";
    return 1;
  }
  return 0;
}

int cmd_sweep(const Common& c, const std::string& data, const std::string& param,
              const std::string& values) {
  const RunConfig cfg = resolve(c);
  std::optional<Dataset> ds;
  if (!data.empty()) ds = load_dataset_dir(data);
  const auto rows = sweep(cfg, param, split(values, ','), ds ? &*ds : nullptr, c.jobs);
  std::ostringstream text;
  write_sweep_csv(text, param, rows);
  if (!c.out.empty()) open_out(c.out) << text.str();
  std::cout << text.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal contrastive region embeddings"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  std::string data, model, resume, variants, variant = "FULL", pairs, param, values;
  std::string format = "bin", label = "FULL";
  std::size_t seeds = 5, points = 20;
  IngestArgs ingest;

  auto* synth = app.add_subcommand("synth", "write a synthetic clustered city");
  add_common(synth, common, "dataset directory");

  auto* ing = app.add_subcommand("ingest", "validate raw CSVs into a dataset directory");
  add_common(ing, common, "dataset directory");
  ing->add_option("--poi", ingest.poi, "region,<category counts...>")->required()->check(CLI::ExistingFile);
  ing->add_option("--trips", ingest.trips, "src,dst,t_start,t_end")->required()->check(CLI::ExistingFile);
  ing->add_option("--centroids", ingest.centroids, "region,lat,lon")->required()->check(CLI::ExistingFile);
  ing->add_option("--targets", ingest.targets, "region-level targets CSV")->check(CLI::ExistingFile);
  ing->add_option("--clusters", ingest.clusters, "optional region,cluster CSV")->check(CLI::ExistingFile);
  ing->add_option("--slots", ingest.slots, "time slots (default: from the trips)");

  auto* graph = app.add_subcommand("build-graph", "dump the heterogeneous region graph as JSON lines");
  add_common(graph, common, "JSONL output file");
  graph->add_option("--data", data, "dataset directory (default: synthetic)")->check(CLI::ExistingDirectory);

  auto* train = app.add_subcommand("train", "train region embeddings");
  add_common(train, common, "model directory");
  train->add_option("--data", data, "dataset directory (default: synthetic)")->check(CLI::ExistingDirectory);
  train->add_option("--resume", resume, "checkpoint to resume from")->check(CLI::ExistingFile);

  auto* embed = app.add_subcommand("embed", "recompute region embeddings from a model checkpoint");
  add_common(embed, common, "embedding output file");
  embed->add_option("--model", model, "train output directory")->required()->check(CLI::ExistingDirectory);
  embed->add_option("--data", data, "dataset directory (default: the one used in training)")
      ->check(CLI::ExistingDirectory);
  embed->add_option("--format", format, "bin or csv")->check(CLI::IsMember({"bin", "csv"}));

  auto* eval = app.add_subcommand("eval", "linear-probe a trained model");
  add_common(eval, common, "metrics CSV (default: <model>/metrics.csv)");
  eval->add_option("--model", model, "train output directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--data", data, "dataset directory (default: the one used in training)")
      ->check(CLI::ExistingDirectory);
  eval->add_option("--label", label, "variant column of the CSV");

  auto* ablate = app.add_subcommand("ablate", "train and probe each ablation variant over seeds");
  add_common(ablate, common, "metrics CSV");
  ablate->add_option("--data", data, "dataset directory (default: synthetic per seed)")
      ->check(CLI::ExistingDirectory);
  ablate->add_option("--variants", variants, "comma list (default: all)");
  ablate->add_option("--seeds", seeds, "seeds seed..seed+n-1")->check(CLI::PositiveNumber);

  auto* robust = app.add_subcommand("robustness", "probe metrics per crime-density bin");
  add_common(robust, common, "bin CSV");
  robust->add_option("--data", data, "dataset directory (default: synthetic)")->check(CLI::ExistingDirectory);
  robust->add_option("--variant", variant, "ablation variant");

  auto* cs = app.add_subcommand("case", "cosine similarity of chosen region pairs");
  add_common(cs, common, "similarity CSV (also printed)");
  cs->add_option("--model", model, "train output directory")->required()->check(CLI::ExistingDirectory);
  cs->add_option("--pairs", pairs, "pairs as u-v,u-v")->required();

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every trainable operation");
  add_common(grad, common, "CSV (also printed)");
  grad->add_option("--points", points, "random points per operation")->check(CLI::PositiveNumber);

  auto* sw = app.add_subcommand("sweep", "train and probe once per value of one key");
  add_common(sw, common, "sweep CSV (also printed)");
  sw->add_option("--data", data, "dataset directory (default: synthetic per config)")
      ->check(CLI::ExistingDirectory);
  sw->add_option("--param", param, "config key")->required();
  sw->add_option("--values", values, "comma list of values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "autost: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*synth) return cmd_synth(common);
    if (*ing) return cmd_ingest(common, ingest);
    if (*graph) return cmd_build_graph(common, data);
    if (*train) return cmd_train(common, data, resume);
    if (*embed) return cmd_embed(common, model, data, format);
    if (*eval) return cmd_eval(common, model, data, label);
    if (*ablate) return cmd_ablate(common, data, variants, seeds);
    if (*robust) return cmd_robustness(common, data, variant);
    if (*cs) return cmd_case(common, model, pairs);
    if (*grad) return cmd_gradcheck(common, points);
    if (*sw) return cmd_sweep(common, data, param, values);
  } catch (const Error& e) {
    std::cerr << "autost: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "autost: io: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "autost: internal: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
