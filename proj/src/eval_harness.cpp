#include "autost/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "autost/errors.hpp"
#include "autost/random.hpp"
#include "csv.hpp"

namespace autost {

Metrics metrics(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw ContractError("metrics: " + std::to_string(pred.size()) + " predictions vs " +
                        std::to_string(truth.size()) + " targets");
  }
  if (pred.empty()) throw ContractError("metrics: no predictions");
  double abs_sum = 0.0, pct_sum = 0.0, sq_sum = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double err = std::abs(pred[k] - truth[k]);
    abs_sum += err;
    pct_sum += err / std::max(std::abs(truth[k]), 1.0);
    sq_sum += err * err;
  }
  const double n = static_cast<double>(pred.size());
  return {abs_sum / n, pct_sum / n, std::sqrt(sq_sum / n)};
}

// ---------------------------------------------------------------- lasso

double LassoFit::predict(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw ContractError("lasso predict: " + std::to_string(x.size()) + " features, model has " +
                        std::to_string(weights.size()));
  }
  double y = intercept;
  for (std::size_t j = 0; j < x.size(); ++j) y += weights[j] * x[j];
  return y;
}

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

LassoFit lasso_fit(const Tensor& x, std::span<const double> y, double lambda, double tol,
                   std::size_t max_sweeps) {
  if (!(lambda >= 0.0)) throw ConfigError("lasso: lambda must be non-negative");
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n != y.size()) {
    throw ContractError("lasso: " + std::to_string(n) + " rows vs " + std::to_string(y.size()) +
                        " targets");
  }
  if (n < 2) throw ContractError("lasso: needs at least 2 rows");
  const double inv_n = 1.0 / static_cast<double>(n);

  // Column-major centred copy of X.
  std::vector<double> mean_x(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) mean_x[j] += x(i, j) * inv_n;
  std::vector<double> xc(n * p);
  std::vector<double> col_sq(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x(i, j) - mean_x[j];
      xc[j * n + i] = v;
      col_sq[j] += v * v * inv_n;
    }
  }
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) * inv_n;
  std::vector<double> r(n);  // residual of the centred problem
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - mean_y;

  LassoFit fit;
  fit.weights.assign(p, 0.0);
  auto objective = [&] {
    double sq = 0.0;
    for (double v : r) sq += v * v;
    double l1 = 0.0;
    for (double w : fit.weights) l1 += std::abs(w);
    return 0.5 * sq * inv_n + lambda * l1;
  };

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_step = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double* col = &xc[j * n];
      const double w_old = fit.weights[j];
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) rho += col[i] * r[i];
      rho = rho * inv_n + col_sq[j] * w_old;
      const double w_new = soft_threshold(rho, lambda) / col_sq[j];
      const double step = w_new - w_old;
      if (step != 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= step * col[i];
        fit.weights[j] = w_new;
        max_step = std::max(max_step, std::abs(step));
      }
    }
    fit.objective.push_back(objective());
    if (max_step < tol) {
      fit.converged = true;
      break;
    }
  }
  fit.intercept = mean_y;
  for (std::size_t j = 0; j < p; ++j) fit.intercept -= fit.weights[j] * mean_x[j];
  return fit;
}

// ---------------------------------------------------------------- probe

void ProbeConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("eval.lambda must be non-negative");
  if (folds < 2) throw ConfigError("eval.folds must be at least 2");
}

namespace {

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 1 where the training spread is zero
};

Standardizer fit_columns(const Tensor& x, const std::vector<std::size_t>& rows) {
  const std::size_t p = x.cols();
  Standardizer s{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t i : rows)
    for (std::size_t j = 0; j < p; ++j) s.mean[j] += x(i, j) * inv;
  for (std::size_t i : rows)
    for (std::size_t j = 0; j < p; ++j) s.scale[j] += (x(i, j) - s.mean[j]) * (x(i, j) - s.mean[j]) * inv;
  for (double& v : s.scale) v = v > 0.0 ? std::sqrt(v) : 1.0;
  return s;
}

Tensor apply_columns(const Tensor& x, const std::vector<std::size_t>& rows, const Standardizer& s) {
  Tensor out(rows.size(), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t j = 0; j < x.cols(); ++j) out(r, j) = (x(rows[r], j) - s.mean[j]) / s.scale[j];
  return out;
}

}  // namespace

std::vector<TaskPrediction> probe(const Tensor& embeddings, const Targets& targets,
                                  const ProbeConfig& config) {
  config.validate();
  const std::size_t n = embeddings.rows();
  if (n < config.folds || n - (n + config.folds - 1) / config.folds < 2) {
    throw ContractError("probe: " + std::to_string(n) + " regions are too few for " +
                        std::to_string(config.folds) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(config.seed, "probe.folds");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> test(config.folds), train(config.folds);
  for (std::size_t k = 0; k < n; ++k) test[k % config.folds].push_back(order[k]);
  for (std::size_t f = 0; f < config.folds; ++f) {
    std::sort(test[f].begin(), test[f].end());
    for (std::size_t g = 0; g < config.folds; ++g)
      if (g != f) train[f].insert(train[f].end(), test[g].begin(), test[g].end());
    std::sort(train[f].begin(), train[f].end());
  }

  std::vector<TaskPrediction> out;
  for (Task task : targets.available()) {
    const Tensor& y = targets.get(task);
    if (y.rows() != n) {
      throw ShapeError("probe: " + std::string(task_name(task)) + " targets have " +
                       std::to_string(y.rows()) + " rows for " + std::to_string(n) + " regions");
    }
    TaskPrediction tp{task, y, Tensor(y.rows(), y.cols())};
    for (std::size_t f = 0; f < config.folds; ++f) {
      const Standardizer sx = fit_columns(embeddings, train[f]);
      const Tensor x_train = apply_columns(embeddings, train[f], sx);
      const Tensor x_test = apply_columns(embeddings, test[f], sx);
      const Standardizer sy = fit_columns(y, train[f]);
      const Tensor y_train = apply_columns(y, train[f], sy);
      for (std::size_t c = 0; c < y.cols(); ++c) {
        std::vector<double> target(train[f].size());
        for (std::size_t r = 0; r < target.size(); ++r) target[r] = y_train(r, c);
        const LassoFit fit = lasso_fit(x_train, target, config.lambda);
        for (std::size_t r = 0; r < test[f].size(); ++r) {
          tp.pred(test[f][r], c) = sy.mean[c] + sy.scale[c] * fit.predict(x_test.row(r));
        }
      }
    }
    out.push_back(std::move(tp));
  }
  return out;
}

std::vector<TaskMetrics> score(const std::vector<TaskPrediction>& predictions) {
  std::vector<TaskMetrics> out;
  for (const TaskPrediction& p : predictions) {
    out.push_back({p.task, metrics(p.pred.data(), p.truth.data())});
  }
  return out;
}

double normalized_mae(const std::vector<TaskPrediction>& predictions) {
  if (predictions.empty()) throw ContractError("normalized_mae: no tasks");
  double total = 0.0;
  for (const TaskPrediction& p : predictions) {
    const auto t = p.truth.data();
    const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
    double var = 0.0;
    for (double v : t) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(t.size()));
    total += metrics(p.pred.data(), t).mae / (sd > 0.0 ? sd : 1.0);
  }
  return total / static_cast<double>(predictions.size());
}

// ---------------------------------------------------------------- ablation

std::string_view variant_name(AblationVariant v) {
  switch (v) {
    case AblationVariant::Full: return "FULL";
    case AblationVariant::NoGp: return "NO_GP";
    case AblationVariant::NoGd: return "NO_GD";
    case AblationVariant::NoInfoMin: return "NO_INFOMIN";
    case AblationVariant::RandomAug: return "RANDOM_AUG";
  }
  return "?";
}

AblationVariant parse_variant(std::string_view name) {
  for (AblationVariant v : kAblationVariants) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown ablation variant '" + std::string(name) +
                    "' (expected FULL, NO_GP, NO_GD, NO_INFOMIN or RANDOM_AUG)");
}

TrainConfig apply_variant(TrainConfig config, AblationVariant variant) {
  switch (variant) {
    case AblationVariant::Full: break;
    case AblationVariant::NoGp: config.graph.use_poi = false; break;
    case AblationVariant::NoGd: config.graph.use_distance = false; break;
    case AblationVariant::NoInfoMin: config.fixed_reward = true; break;
    case AblationVariant::RandomAug: config.augmentation = Augmentation::Random; break;
  }
  return config;
}

ArmResult run_pipeline(const Dataset& dataset, const TrainConfig& train_config,
                       const ProbeConfig& probe_config) {
  TrainedModel model = train(dataset, train_config);
  ArmResult out;
  out.embeddings = region_embeddings(model);
  out.history = std::move(model.history);
  out.predictions = probe(out.embeddings, dataset.targets, probe_config);
  out.metrics = score(out.predictions);
  return out;
}

ArmResult run_ablation(const Dataset& dataset, AblationVariant variant,
                       const TrainConfig& train_config, const ProbeConfig& probe_config) {
  return run_pipeline(dataset, apply_variant(train_config, variant), probe_config);
}

// ---------------------------------------------------------------- density

std::vector<RegionBin> density_bins(const Dataset& dataset) {
  const std::size_t regions = dataset.targets.get(Task::Crime).rows();
  std::vector<RegionBin> out;
  for (const DensityBin& bin : kDensityBins) {
    RegionBin rb{bin, {}};
    for (std::size_t i = 0; i < regions; ++i) {
      const double d = crime_density(dataset, i);
      if (d > bin.lower && d <= bin.upper) rb.regions.push_back(i);
    }
    if (!rb.regions.empty()) out.push_back(std::move(rb));
  }
  return out;
}

std::vector<BinMetrics> robustness_by_density(const Dataset& dataset,
                                              const std::vector<TaskPrediction>& predictions) {
  if (!dataset.targets.has(Task::Crime)) {
    throw UnsupportedTaskError("density bins need crime targets");
  }
  std::vector<BinMetrics> out;
  for (const RegionBin& rb : density_bins(dataset)) {
    for (const TaskPrediction& p : predictions) {
      std::vector<double> pred, truth;
      for (std::size_t i : rb.regions) {
        pred.insert(pred.end(), p.pred.row(i).begin(), p.pred.row(i).end());
        truth.insert(truth.end(), p.truth.row(i).begin(), p.truth.row(i).end());
      }
      out.push_back({rb.bin, p.task, rb.regions.size(), metrics(pred, truth)});
    }
  }
  return out;
}

std::vector<BinMetrics> robustness_by_density(const Dataset& dataset,
                                              const TrainConfig& train_config,
                                              const ProbeConfig& probe_config) {
  if (!dataset.targets.has(Task::Crime)) {
    throw UnsupportedTaskError("density bins need crime targets");
  }
  return robustness_by_density(dataset, run_pipeline(dataset, train_config, probe_config).predictions);
}

std::vector<double> pair_similarity(const Tensor& embeddings,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    if (a >= embeddings.rows() || b >= embeddings.rows()) {
      throw ContractError("pair (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") outside " + std::to_string(embeddings.rows()) + " regions");
    }
    out.push_back(cosine(embeddings.row(a), embeddings.row(b)));
  }
  return out;
}

// ---------------------------------------------------------------- csv

void write_metrics_header(std::ostream& out) { out << "variant,task,seed,mae,mape,rmse\n"; }

void write_metrics_rows(std::ostream& out, std::string_view variant, std::uint64_t seed,
                        const std::vector<TaskMetrics>& rows) {
  for (const TaskMetrics& m : rows) {
    out << variant << ',' << task_name(m.task) << ',' << seed << ','
        << csv::format_double(m.metrics.mae) << ',' << csv::format_double(m.metrics.mape) << ','
        << csv::format_double(m.metrics.rmse) << '\n';
  }
}

std::string bin_label(const DensityBin& bin) {
  return "(" + csv::format_double(bin.lower) + ";" + csv::format_double(bin.upper) + "]";
}

void write_bin_csv(std::ostream& out, const std::vector<BinMetrics>& bins) {
  out << "bin,task,mae,mape,rmse\n";
  for (const BinMetrics& b : bins) {
    out << bin_label(b.bin) << ',' << task_name(b.task) << ','
        << csv::format_double(b.metrics.mae) << ',' << csv::format_double(b.metrics.mape) << ','
        << csv::format_double(b.metrics.rmse) << '\n';
  }
}

}  // namespace autost
