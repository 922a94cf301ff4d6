#include <bit>
#include <cmath>
#include <sstream>

#include "autost/errors.hpp"
#include "autost/trainer.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace autost {
namespace {

using testing::TempDir;

Dataset small_dataset(std::size_t regions = 3, std::size_t slots = 1, std::uint64_t seed = 1) {
  SynthConfig s;
  s.regions = regions;
  s.slots = slots;
  s.categories = 4;
  s.trips = 40 * regions;
  s.clusters = std::min<std::size_t>(3, regions);
  s.seed = seed;
  return synth_dataset(s);
}

TrainConfig small_config(std::size_t epochs = 2) {
  TrainConfig c;
  c.epochs = epochs;
  c.dim = 8;
  c.heads = 2;
  c.layers = 2;
  c.skipgram.epochs = 2;
  return c;
}

TEST(TrainConfig, DefaultsMatchTheReferenceSettings) {
  const TrainConfig c;
  EXPECT_EQ(c.optimizer.learning_rate, 0.0005);
  EXPECT_EQ(c.optimizer.weight_decay, 0.01);
  EXPECT_EQ(c.dim, 96u);
  EXPECT_EQ(c.layers, 3u);
  EXPECT_EQ(c.heads, 4u);
  EXPECT_NO_THROW(c.validate());
}

TEST(TrainConfig, RejectsInvalidValuesByKey) {
  auto expect_key = [](TrainConfig c, const std::string& key) {
    try {
      c.validate();
      FAIL() << "accepted invalid " << key;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos) << e.what();
    }
  };
  TrainConfig c;
  c.epochs = 0;
  expect_key(c, "train.epochs");
  c = {};
  c.optimizer.learning_rate = 0.0;
  expect_key(c, "train.lr");
  c = {};
  c.heads = 5;
  expect_key(c, "attn.heads");
  c = {};
  c.loss.beta = 1.5;
  expect_key(c, "loss.beta");
  c = {};
  c.checkpoint_every = 3;
  expect_key(c, "train.checkpoint_every");
}

TEST(Train, SingleEpochOnSixNodesCompletes) {
  const Dataset ds = small_dataset(3, 1);
  Trainer trainer(ds, small_config(1));
  EXPECT_EQ(trainer.graph().num_nodes(), 6u);
  trainer.run();
  const TrainedModel m = std::move(trainer).finish();
  ASSERT_EQ(m.history.size(), 1u);
  EXPECT_EQ(m.history[0].epoch, 1u);
  EXPECT_TRUE(std::isfinite(m.history[0].total));
  EXPECT_EQ(m.node_embeddings.rows(), 6u);
  EXPECT_EQ(m.node_embeddings.cols(), 8u);
}

TEST(Train, HistoryLengthEqualsCompletedEpochs) {
  const Dataset ds = small_dataset(6, 2);
  Trainer trainer(ds, small_config(3));
  for (std::size_t e = 1; e <= 3; ++e) {
    const EpochRecord r = trainer.run_epoch();
    EXPECT_EQ(r.epoch, e);
    EXPECT_EQ(trainer.epochs_done(), e);
    EXPECT_DOUBLE_EQ(r.total, 0.1 * r.nce + 0.9 * r.bn);
    EXPECT_GE(r.rec1, 0.0);
    EXPECT_GE(r.rec2, 0.0);
    EXPECT_GE(r.shared_nodes, 2u);
    EXPECT_GE(r.view_nodes, 2 * r.shared_nodes);
    EXPECT_DOUBLE_EQ(r.mean_total, 0.1 * r.nce / static_cast<double>(r.shared_nodes) +
                                       0.9 * r.bn / static_cast<double>(r.view_nodes));
  }
}

TEST(Train, IsDeterministicForAFixedSeed) {
  const Dataset ds = small_dataset(6, 2);
  const TrainedModel a = train(ds, small_config(3));
  const TrainedModel b = train(ds, small_config(3));
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.node_embeddings, b.node_embeddings);

  TrainConfig other = small_config(3);
  other.seed = 9;
  EXPECT_NE(train(ds, other).node_embeddings, a.node_embeddings);
}

TEST(Train, LearnedEpochUpdatesBothParameterGroups) {
  const Dataset ds = small_dataset(6, 2);
  Trainer trainer(ds, small_config(1));
  TrainedModel before = trainer.model();
  trainer.run_epoch();
  TrainedModel after = trainer.model();
  EXPECT_NE(parameter_checksum(after.encoder_parameters()),
            parameter_checksum(before.encoder_parameters()));
  EXPECT_NE(parameter_checksum(after.sampler_parameters()),
            parameter_checksum(before.sampler_parameters()));
}

TEST(Train, RandomAugmentationNeverTouchesSamplers) {
  const Dataset ds = small_dataset(6, 2);
  TrainConfig c = small_config(2);
  c.augmentation = Augmentation::Random;
  Trainer trainer(ds, c);
  TrainedModel before = trainer.model();
  trainer.run();
  TrainedModel after = trainer.model();
  EXPECT_EQ(parameter_checksum(after.sampler_parameters()),
            parameter_checksum(before.sampler_parameters()));
  for (const EpochRecord& r : trainer.model().history) {
    EXPECT_EQ(r.rec1, 0.0);
    EXPECT_EQ(r.rec2, 0.0);
  }
}

TEST(Train, FixedRewardRecordsOne) {
  const Dataset ds = small_dataset(6, 2);
  TrainConfig c = small_config(2);
  c.fixed_reward = true;
  for (const EpochRecord& r : train(ds, c).history) EXPECT_EQ(r.reward, 1.0);
}

TEST(Train, RewardStaysWithinItsRange) {
  const Dataset ds = small_dataset(6, 2);
  for (const EpochRecord& r : train(ds, small_config(3)).history) {
    // R1 in {xi, 1}, R2 in [0, 2].
    EXPECT_GE(r.reward, 0.5 * 0.1);
    EXPECT_LE(r.reward, 0.5 * 1.0 + 0.5 * 2.0);
  }
}

TEST(Train, NonFiniteLossAbortsWithEpochAndTerms) {
  const Dataset ds = small_dataset(6, 2);
  TrainConfig c = small_config(1);
  c.loss.tau = 1e-320;
  try {
    train(ds, c);
    FAIL() << "expected TrainingAborted";
  } catch (const TrainingAborted& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("L_NCE"), std::string::npos) << msg;
    EXPECT_NE(msg.find("L_BN"), std::string::npos) << msg;
  }
}

TEST(RegionEmbeddings, TakesBaseRowsOfTheUnifiedIndex) {
  const Dataset ds = small_dataset(2, 3);
  const TrainedModel m = train(ds, small_config(1));
  ASSERT_EQ(m.node_embeddings.rows(), 2u + 2u * 3u);
  const Tensor e = region_embeddings(m);
  ASSERT_EQ(e.rows(), 2u);
  ASSERT_EQ(e.cols(), 8u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(e(i, c), m.node_embeddings(i, c));
}

TEST(EmbeddingFile, RoundTripsBitExactly) {
  TempDir dir;
  const Dataset ds = small_dataset(6, 2);
  const TrainedModel m = train(ds, small_config(1));
  export_embeddings(m, 0x1234abcdULL, dir / "emb.bin");
  const EmbeddingFile f = load_embeddings(dir / "emb.bin");
  EXPECT_EQ(f.embeddings, region_embeddings(m));
  EXPECT_EQ(f.header.version, kEmbeddingFormatVersion);
  EXPECT_EQ(f.header.regions, 6u);
  EXPECT_EQ(f.header.dim, 8u);
  EXPECT_EQ(f.header.config_hash, 0x1234abcdULL);
}

TEST(EmbeddingFile, PreservesSpecialValuesAndNegativeZero) {
  TempDir dir;
  Tensor t = Tensor::from_rows({{-0.0, 1e-300, -2.5}, {3.0, 1e300, 0.1}});
  export_embeddings(t, 7, dir / "e.bin");
  const Tensor back = load_embeddings(dir / "e.bin").embeddings;
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back.data()[k]), std::bit_cast<std::uint64_t>(t.data()[k]));
  }
}

TEST(EmbeddingFile, CorruptionIsDetected) {
  TempDir dir;
  const Tensor t = Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  export_embeddings(t, 1, dir / "e.bin");
  std::string bytes = testing::read_file(dir / "e.bin");
  bytes[bytes.size() - 3] ^= 0x10;
  testing::write_file(dir / "bad.bin", bytes);
  EXPECT_THROW(load_embeddings(dir / "bad.bin"), ChecksumError);

  testing::write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 8));
  EXPECT_THROW(load_embeddings(dir / "short.bin"), ChecksumError);

  std::string hashed = testing::read_file(dir / "e.bin");
  hashed[4 + 4 + 16] ^= 0x01;  // config hash byte
  testing::write_file(dir / "hash.bin", hashed);
  EXPECT_THROW(load_embeddings(dir / "hash.bin"), ChecksumError);
}

TEST(EmbeddingFile, IoErrorsNameThePath) {
  TempDir dir;
  const auto missing = dir / "missing.bin";
  try {
    load_embeddings(missing);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(missing.string()), std::string::npos);
  }
  const auto unwritable = dir / "no_such_dir" / "e.bin";
  try {
    export_embeddings(Tensor(1, 1), 0, unwritable);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(unwritable.string()), std::string::npos);
  }
  testing::write_file(dir / "text.bin", "hello world, definitely not embeddings at all....");
  EXPECT_THROW(load_embeddings(dir / "text.bin"), IoError);
}

TEST(Checkpoint, ResumeReplaysAnUninterruptedRun) {
  TempDir dir;
  const Dataset ds = small_dataset(6, 2);
  const TrainedModel straight = train(ds, small_config(4));

  Trainer first(ds, small_config(4));
  first.run_epoch();
  first.run_epoch();
  first.save_checkpoint(dir / "ck.json");

  Trainer resumed(ds, small_config(4));
  resumed.load_checkpoint(dir / "ck.json");
  EXPECT_EQ(resumed.epochs_done(), 2u);
  resumed.run();
  const TrainedModel m = std::move(resumed).finish();
  EXPECT_EQ(m.history, straight.history);
  EXPECT_EQ(m.node_embeddings, straight.node_embeddings);
}

TEST(Checkpoint, CadenceWritesFiles) {
  TempDir dir;
  const Dataset ds = small_dataset(3, 1);
  TrainConfig c = small_config(4);
  c.checkpoint_every = 2;
  c.checkpoint_dir = dir / "ck";
  train(ds, c);
  EXPECT_TRUE(std::filesystem::exists(dir / "ck" / "checkpoint-0002.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "ck" / "checkpoint-0004.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "ck" / "checkpoint-0003.json"));
}

TEST(Checkpoint, RejectsMismatchedShapesAndGarbage) {
  TempDir dir;
  const Dataset ds = small_dataset(3, 1);
  Trainer a(ds, small_config(1));
  a.save_checkpoint(dir / "ck.json");
  TrainConfig wide = small_config(1);
  wide.dim = 12;
  Trainer b(ds, wide);
  EXPECT_THROW(b.load_checkpoint(dir / "ck.json"), ValidationError);
  testing::write_file(dir / "junk.json", "{not json");
  EXPECT_THROW(a.load_checkpoint(dir / "junk.json"), ParseError);
  EXPECT_THROW(a.load_checkpoint(dir / "absent.json"), IoError);
}

TEST(LossCsv, HasOneRowPerEpochAndTheDocumentedHeader) {
  std::vector<EpochRecord> h = {{1, 2.0, 10.0, 9.2, 0.5, 3.0, 4.0}, {2, 1.5, 9.0, 8.25, 0.6, 2.5, 3.5}};
  std::ostringstream out;
  write_loss_csv(h, out);
  EXPECT_EQ(out.str(),
            "epoch,L_NCE,L_BN,L,reward,L_Rec1,L_Rec2\n"
            "1,2,10,9.2,0.5,3,4\n"
            "2,1.5,9,8.25,0.6,2.5,3.5\n");
}

}  // namespace
}  // namespace autost
