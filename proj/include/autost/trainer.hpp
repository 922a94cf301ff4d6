#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "autost/adam.hpp"
#include "autost/hetero_graph.hpp"
#include "autost/hgnn_encoder.hpp"
#include "autost/losses.hpp"
#include "autost/poi_embedding.hpp"
#include "autost/region_data.hpp"
#include "autost/view_generator.hpp"

namespace autost {

enum class Augmentation {
  Learned,  // VGAE samplers decode the views and are trained on the reward
  Random,   // uniform edge-drop views; samplers stay untouched
};

struct TrainConfig {
  std::size_t epochs = 50;
  AdamConfig optimizer;  // learning rate 5e-4, weight decay 0.01
  std::size_t dim = 96;
  std::size_t layers = 3;
  std::size_t heads = 4;
  SkipGramConfig skipgram = {.dim = 0};  // dim 0 means `dim`; seed is derived from `seed`
  GraphConfig graph;
  ViewConfig view;
  LossConfig loss;
  Augmentation augmentation = Augmentation::Learned;
  double random_drop = 0.2;
  bool fixed_reward = false;  // reward := 1 every epoch
  std::uint64_t seed = 0;
  /// Write a checkpoint every this many epochs into `checkpoint_dir` (0 disables).
  std::size_t checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double nce = 0.0;
  double bn = 0.0;
  double total = 0.0;
  double reward = 0.0;
  double rec1 = 0.0;
  double rec2 = 0.0;
  std::size_t shared_nodes = 0;  // rows contrasted by InfoNCE
  std::size_t view_nodes = 0;    // |V'_1| + |V'_2|, rows contrasted by InfoBN
  /// beta * nce / shared_nodes + (1 - beta) * bn / view_nodes: the loss per
  /// contrasted node, comparable across epochs whose views differ in size.
  double mean_total = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainedModel {
  PoiEncoder poi;
  EncoderParams encoder;
  std::array<VgaeParams, 2> samplers;
  /// H over the unified node index; rows [0, regions) are the Base nodes.
  Tensor node_embeddings;
  std::size_t regions = 0;
  std::vector<EpochRecord> history;

  std::vector<Parameter*> encoder_parameters();
  std::vector<Parameter*> sampler_parameters();
};

/// The alternating optimisation loop. Holds a reference to the dataset, which
/// must outlive it. Each epoch draws its randomness from streams keyed by
/// (seed, epoch), so a resumed run replays an uninterrupted one exactly.
class Trainer {
 public:
  Trainer(const Dataset& dataset, TrainConfig config);

  /// Runs one epoch and returns its record. Throws TrainingAborted on a
  /// non-finite loss.
  EpochRecord run_epoch();
  /// Runs until `config().epochs` epochs are complete.
  void run();

  /// H of the current parameters on the fused graph.
  Tensor node_embeddings();
  /// Computes the final H and hands over the model.
  TrainedModel finish() &&;

  std::size_t epochs_done() const { return model_.history.size(); }
  const TrainConfig& config() const { return config_; }
  const HeteroGraph& graph() const { return graph_; }
  const TrainedModel& model() const { return model_; }

  void save_checkpoint(const std::filesystem::path& path);
  /// Restores parameters, optimiser state and history. The checkpoint must
  /// come from a trainer with the same dataset and config.
  void load_checkpoint(const std::filesystem::path& path);

 private:
  struct Terms {
    Var nce;
    Var bn;
    Var total;
    Var first_shared;
    Var second_shared;
  };
  Terms contrastive_terms(Tape& tape, const GeneratedViews& views, std::uint64_t epoch);

  const Dataset& dataset_;
  TrainConfig config_;
  HeteroGraph graph_;
  std::vector<Edge> graph_edges_;
  TrainedModel model_;
  Adam encoder_opt_;
  Adam sampler_opt_;
};

TrainedModel train(const Dataset& dataset, const TrainConfig& config);

/// Base-node rows of H, [I x d].
Tensor region_embeddings(const TrainedModel& model);

/// FNV-1a over every parameter value, in order.
std::uint64_t parameter_checksum(const std::vector<Parameter*>& params);

void write_loss_csv(const std::vector<EpochRecord>& history, std::ostream& out);

// Embedding file: "ASTE", u32 version, u64 regions, u64 dim, u64 config hash,
// u64 checksum, then regions*dim little-endian doubles, row-major.
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

struct EmbeddingHeader {
  std::uint32_t version = kEmbeddingFormatVersion;
  std::uint64_t regions = 0;
  std::uint64_t dim = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t checksum = 0;
};

struct EmbeddingFile {
  EmbeddingHeader header;
  Tensor embeddings;
};

/// Throws IoError naming the path.
void export_embeddings(const Tensor& embeddings, std::uint64_t config_hash,
                       const std::filesystem::path& path);
void export_embeddings(const TrainedModel& model, std::uint64_t config_hash,
                       const std::filesystem::path& path);
/// Throws IoError on unreadable or truncated files and ChecksumError when the
/// payload does not match the recorded checksum.
EmbeddingFile load_embeddings(const std::filesystem::path& path);

}  // namespace autost
