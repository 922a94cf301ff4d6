#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autost/detail/parallel_map.hpp"
#include "autost/region_data.hpp"
#include "autost/tensor.hpp"
#include "autost/trainer.hpp"

namespace autost {

/// rmse >= mae >= 0 on every input.
struct Metrics {
  double mae = 0.0;
  double mape = 0.0;  // |err| / max(|truth|, 1), averaged
  double rmse = 0.0;
};

/// Throws ContractError on a length mismatch or empty input.
Metrics metrics(std::span<const double> pred, std::span<const double> truth);

struct LassoFit {
  std::vector<double> weights;
  double intercept = 0.0;
  /// (1/2n)|y - Xw - b|^2 + lambda |w|_1 after each sweep; never increases.
  std::vector<double> objective;
  bool converged = false;

  double predict(std::span<const double> x) const;
};

/// Coordinate descent on centred data with an unpenalised intercept. Stops
/// once a full sweep moves no weight by more than `tol`. Throws ConfigError if
/// lambda < 0 and ContractError unless rows(X) = len(y) >= 2.
LassoFit lasso_fit(const Tensor& x, std::span<const double> y, double lambda,
                   double tol = 1e-8, std::size_t max_sweeps = 100000);

struct ProbeConfig {
  double lambda = 0.01;   // on standardised features and targets
  std::size_t folds = 5;  // cross-validation folds over regions
  std::uint64_t seed = 0; // fold assignment

  void validate() const;
};

/// Out-of-fold predictions for one task, same shape as its targets.
struct TaskPrediction {
  Task task;
  Tensor truth;
  Tensor pred;
};

/// One Lasso per (task, target column), k-fold over regions. Features and
/// targets are standardised with training-fold statistics.
std::vector<TaskPrediction> probe(const Tensor& embeddings, const Targets& targets,
                                  const ProbeConfig& config);

struct TaskMetrics {
  Task task;
  Metrics metrics;
};

std::vector<TaskMetrics> score(const std::vector<TaskPrediction>& predictions);

/// Mean over tasks of MAE / std(truth): one scale-free number per run.
double normalized_mae(const std::vector<TaskPrediction>& predictions);

enum class AblationVariant { Full, NoGp, NoGd, NoInfoMin, RandomAug };

inline constexpr AblationVariant kAblationVariants[] = {
    AblationVariant::Full, AblationVariant::NoGp, AblationVariant::NoGd,
    AblationVariant::NoInfoMin, AblationVariant::RandomAug};

std::string_view variant_name(AblationVariant v);
/// Accepts the names printed by variant_name; throws ConfigError otherwise.
AblationVariant parse_variant(std::string_view name);

/// The training config of a variant; Full returns `config` unchanged.
TrainConfig apply_variant(TrainConfig config, AblationVariant variant);

struct ArmResult {
  Tensor embeddings;
  std::vector<EpochRecord> history;
  std::vector<TaskPrediction> predictions;
  std::vector<TaskMetrics> metrics;
};

/// train -> region_embeddings -> probe -> score.
ArmResult run_pipeline(const Dataset& dataset, const TrainConfig& train_config,
                       const ProbeConfig& probe_config);
ArmResult run_ablation(const Dataset& dataset, AblationVariant variant,
                       const TrainConfig& train_config, const ProbeConfig& probe_config);

struct DensityBin {
  double lower;  // exclusive
  double upper;  // inclusive
};
inline constexpr DensityBin kDensityBins[] = {{0.0, 0.25}, {0.25, 0.5}, {0.5, 1.0}};

struct BinMetrics {
  DensityBin bin;
  Task task;
  std::size_t regions = 0;
  Metrics metrics;
};

struct RegionBin {
  DensityBin bin;
  std::vector<std::size_t> regions;
};

/// Regions grouped by crime density in kDensityBins order. Bins without
/// regions are left out; density 0 falls in no bin.
std::vector<RegionBin> density_bins(const Dataset& dataset);
/// Per-bin metrics of existing predictions. Throws UnsupportedTaskError
/// without crime targets.
std::vector<BinMetrics> robustness_by_density(const Dataset& dataset,
                                              const std::vector<TaskPrediction>& predictions);
std::vector<BinMetrics> robustness_by_density(const Dataset& dataset,
                                              const TrainConfig& train_config,
                                              const ProbeConfig& probe_config);

/// Row-wise cosine per pair. Throws ContractError on an out-of-range index.
std::vector<double> pair_similarity(const Tensor& embeddings,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// CSV writers; doubles use the shortest round-trip form.
void write_metrics_header(std::ostream& out);  // variant,task,seed,mae,mape,rmse
void write_metrics_rows(std::ostream& out, std::string_view variant, std::uint64_t seed,
                        const std::vector<TaskMetrics>& metrics);
void write_bin_csv(std::ostream& out, const std::vector<BinMetrics>& bins);  // bin,task,...
std::string bin_label(const DensityBin& bin);

}  // namespace autost
