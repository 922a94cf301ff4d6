#include "autost/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "autost/errors.hpp"
#include "autost/random.hpp"
#include "csv.hpp"

namespace autost {
namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError(std::string(key) + ": bad value '" + std::string(value) + "' (expected " +
                    std::string(expected) + ")");
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(key, v, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  ConfigKey doc;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Field>
Entry size_entry(ConfigKey doc, Field field) {
  return {doc,
          [doc, field](RunConfig& c, std::string_view v) {
            field(c) = static_cast<std::size_t>(parse_uint(doc.key, v));
          },
          [field](const RunConfig& c) { return std::to_string(field(c)); }};
}

template <typename Field>
Entry double_entry(ConfigKey doc, Field field) {
  return {doc, [doc, field](RunConfig& c, std::string_view v) { field(c) = parse_double(doc.key, v); },
          [field](const RunConfig& c) {
            return csv::format_double(field(c));
          }};
}

template <typename Field>
Entry bool_entry(ConfigKey doc, Field field) {
  return {doc, [doc, field](RunConfig& c, std::string_view v) { field(c) = parse_bool(doc.key, v); },
          [field](const RunConfig& c) {
            return std::string(field(c) ? "true" : "false");
          }};
}

#define FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"seed", "0", "master seed for data synthesis, training and probe folds"},
       [](RunConfig& c, std::string_view v) { c.seed = parse_uint("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      size_entry({"train.epochs", "50", "training epochs"}, FIELD(train.epochs)),
      double_entry({"train.lr", "0.0005", "Adam learning rate"}, FIELD(train.optimizer.learning_rate)),
      double_entry({"train.weight_decay", "0.01", "decoupled weight decay"},
                   FIELD(train.optimizer.weight_decay)),
      size_entry({"train.checkpoint_every", "0", "checkpoint cadence in epochs, 0 disables"},
                 FIELD(train.checkpoint_every)),
      size_entry({"model.dim", "96", "embedding width d"}, FIELD(train.dim)),
      size_entry({"model.layers", "3", "encoder depth L"}, FIELD(train.layers)),
      size_entry({"attn.heads", "4", "attention heads; must divide model.dim"}, FIELD(train.heads)),
      size_entry({"poi.d_sg", "0", "skip-gram width, 0 means model.dim"}, FIELD(train.skipgram.dim)),
      size_entry({"poi.window_cap", "20", "max repeats of one category per region sentence"},
                 FIELD(train.skipgram.window_cap)),
      size_entry({"poi.negatives", "5", "negative samples per context"},
                 FIELD(train.skipgram.negatives)),
      size_entry({"poi.epochs", "5", "skip-gram passes over the corpus"}, FIELD(train.skipgram.epochs)),
      size_entry({"poi.contexts", "5", "contexts drawn per centre token"},
                 FIELD(train.skipgram.contexts_per_token)),
      double_entry({"poi.lr", "0.025", "skip-gram initial learning rate"},
                   FIELD(train.skipgram.learning_rate)),
      double_entry({"graph.eps_p", "0.5", "POI edge iff cosine > eps_p"}, FIELD(train.graph.eps_p)),
      double_entry({"graph.eps_d", "2.5", "distance edge iff km < eps_d"}, FIELD(train.graph.eps_d_km)),
      bool_entry({"graph.use_poi", "true", "include the POI relation"}, FIELD(train.graph.use_poi)),
      bool_entry({"graph.use_distance", "true", "include the distance relation"},
                 FIELD(train.graph.use_distance)),
      double_entry({"view.eps", "0.5", "keep decoded pairs with sigmoid(score) >= eps"},
                   FIELD(train.view.eps)),
      size_entry({"view.walk_len", "8", "random-walk length"}, FIELD(train.view.walk.walk_length)),
      size_entry({"view.walks_per_seed", "4", "walks per seed node"},
                 FIELD(train.view.walk.walks_per_seed)),
      double_entry({"view.seed_frac", "0.25", "fraction of nodes drawn as walk seeds per epoch"},
                   FIELD(train.view.seed_frac)),
      size_entry({"view.neg_per_node", "5", "sampled non-edges per node in the candidate set"},
                 FIELD(train.view.neg_per_node)),
      double_entry({"view.noise_mu", "0", "reparameterisation noise mean"}, FIELD(train.view.noise.mu)),
      double_entry({"view.noise_sigma", "1", "reparameterisation noise std"},
                   FIELD(train.view.noise.sigma)),
      {{"view.mode", "learned", "learned (VGAE samplers) or random (edge-drop views)"},
       [](RunConfig& c, std::string_view v) {
         if (v == "learned") {
           c.train.augmentation = Augmentation::Learned;
         } else if (v == "random") {
           c.train.augmentation = Augmentation::Random;
         } else {
           bad_value("view.mode", v, "learned or random");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.train.augmentation == Augmentation::Learned ? "learned" : "random");
       }},
      double_entry({"view.random_drop", "0.2", "edge-drop rate of random views"},
                   FIELD(train.random_drop)),
      double_entry({"loss.beta", "0.1", "weight of InfoNCE against InfoBN"}, FIELD(train.loss.beta)),
      double_entry({"loss.tau", "0.5", "cosine temperature"}, FIELD(train.loss.tau)),
      double_entry({"loss.eps_prime", "1.2", "InfoMin reward threshold"}, FIELD(train.loss.eps_prime)),
      double_entry({"loss.xi", "0.1", "reward when the loss is at or below loss.eps_prime"},
                   FIELD(train.loss.xi)),
      double_entry({"loss.w1", "0.5", "weight of R1 against R2"}, FIELD(train.loss.w1)),
      double_entry({"loss.infobn_drop", "0.2", "edge-drop rate of the InfoBN augmentation"},
                   FIELD(train.loss.infobn_drop)),
      bool_entry({"loss.fixed_reward", "false", "hold the sampler reward at 1"},
                 FIELD(train.fixed_reward)),
      double_entry({"eval.lambda", "0.01", "Lasso penalty on standardised data"}, FIELD(probe.lambda)),
      size_entry({"eval.folds", "5", "probe cross-validation folds"}, FIELD(probe.folds)),
      size_entry({"synth.regions", "60", "synthetic regions I"}, FIELD(synth.regions)),
      size_entry({"synth.categories", "12", "synthetic POI categories"}, FIELD(synth.categories)),
      size_entry({"synth.slots", "4", "synthetic time slots T"}, FIELD(synth.slots)),
      size_entry({"synth.trips", "3000", "synthetic trips"}, FIELD(synth.trips)),
      double_entry({"synth.noise_rate", "0", "fraction of trips rewired uniformly"},
                   FIELD(synth.noise_rate)),
      double_entry({"synth.skew", "1", "Zipf exponent of region activity"}, FIELD(synth.skew_exponent)),
      size_entry({"synth.clusters", "3", "latent region clusters"}, FIELD(synth.clusters)),
  };
  return table;
}

#undef FIELD

const Entry& find(std::string_view key) {
  for (const Entry& e : entries()) {
    if (e.doc.key == key) return e;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

TrainConfig RunConfig::train_config() const {
  TrainConfig c = train;
  c.seed = seed;
  return c;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig c = synth;
  c.seed = seed;
  return c;
}

ProbeConfig RunConfig::probe_config() const {
  ProbeConfig c = probe;
  c.seed = seed;
  return c;
}

void RunConfig::set(std::string_view key, std::string_view value) { find(key).set(*this, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return find(key).get(*this); }

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = path.string() + ":" + std::to_string(n) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    try {
      set(trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

std::string RunConfig::canonical() const {
  std::vector<std::string> lines;
  for (const Entry& e : entries()) lines.push_back(std::string(e.doc.key) + " = " + e.get(*this));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const Entry& e : entries()) out.push_back(e.doc);
    return out;
  }();
  return keys;
}

std::vector<SweepRow> sweep(const RunConfig& base, std::string_view key,
                            const std::vector<std::string>& values, const Dataset* dataset,
                            std::size_t jobs) {
  if (values.empty()) throw ConfigError("sweep: no values for " + std::string(key));
  std::vector<RunConfig> configs;
  for (const std::string& v : values) {
    RunConfig c = base;
    c.set(key, v);
    c.train_config().validate();
    configs.push_back(std::move(c));
  }
  return parallel_map<SweepRow>(values.size(), jobs, [&](std::size_t k) {
    const RunConfig& c = configs[k];
    const ArmResult arm =
        dataset ? run_pipeline(*dataset, c.train_config(), c.probe_config())
                : run_pipeline(synth_dataset(c.synth_config()), c.train_config(), c.probe_config());
    return SweepRow{values[k], arm.metrics};
  });
}

void write_sweep_csv(std::ostream& out, std::string_view key, const std::vector<SweepRow>& rows) {
  out << "param,value,task,mae,mape,rmse\n";
  for (const SweepRow& row : rows) {
    for (const TaskMetrics& m : row.metrics) {
      out << key << ',' << row.value << ',' << task_name(m.task) << ','
          << csv::format_double(m.metrics.mae) << ',' << csv::format_double(m.metrics.mape) << ','
          << csv::format_double(m.metrics.rmse) << '\n';
    }
  }
}

}  // namespace autost
