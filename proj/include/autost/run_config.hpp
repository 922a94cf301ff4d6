#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autost/eval_harness.hpp"
#include "autost/region_data.hpp"
#include "autost/trainer.hpp"

namespace autost {

/// Every tunable of a run. One master seed feeds data synthesis, training and
/// probe folds.
struct RunConfig {
  std::uint64_t seed = 0;
  TrainConfig train;
  SynthConfig synth;
  ProbeConfig probe;

  TrainConfig train_config() const;
  SynthConfig synth_config() const;
  ProbeConfig probe_config() const;

  /// Sets one key from its text form. Throws ConfigError on an unknown key or
  /// a malformed value.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  /// `key = value` lines; '#' starts a comment. Throws ConfigError naming the
  /// file and line, IoError if the file cannot be read.
  void load_file(const std::filesystem::path& path);

  /// Sorted `key = value` lines of every key.
  std::string canonical() const;
  /// FNV-1a of canonical().
  std::uint64_t hash() const;
};

struct ConfigKey {
  std::string_view key;
  std::string_view default_value;
  std::string_view description;
};

/// All keys in documentation order.
const std::vector<ConfigKey>& config_keys();

struct SweepRow {
  std::string value;
  std::vector<TaskMetrics> metrics;
};

/// One train+probe run per value of `key`. Without a dataset each run uses
/// the synthetic city of its own config, so `synth.*` keys can be swept too.
/// Runs fan out over `jobs` threads; rows keep the order of `values`.
std::vector<SweepRow> sweep(const RunConfig& base, std::string_view key,
                            const std::vector<std::string>& values, const Dataset* dataset,
                            std::size_t jobs = 1);

/// CSV with header `param,value,task,mae,mape,rmse`.
void write_sweep_csv(std::ostream& out, std::string_view key, const std::vector<SweepRow>& rows);

}  // namespace autost
