#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autost/tensor.hpp"

namespace autost {

/// Region-by-category POI counts, row i is the POI vector of region i.
struct PoiMatrix {
  std::size_t regions = 0;
  std::size_t categories = 0;
  std::vector<std::int64_t> counts;  // regions x categories, row-major
  std::vector<std::string> category_names;

  std::int64_t operator()(std::size_t region, std::size_t category) const {
    return counts[region * categories + category];
  }
  std::int64_t& operator()(std::size_t region, std::size_t category) {
    return counts[region * categories + category];
  }
};

/// One trip (r_s, r_d, t_s, t_d).
struct TrajectoryRecord {
  std::size_t source = 0;
  std::size_t dest = 0;
  std::size_t t_start = 0;
  std::size_t t_end = 0;

  auto operator<=>(const TrajectoryRecord&) const = default;
};

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

/// Pairwise great-circle distances (km) between region centroids.
struct DistanceMatrix {
  std::vector<LatLon> centroids;
  Tensor km;
};

enum class Task { Crime, Traffic, HousePrice };

std::string_view task_name(Task task);
/// Accepts "crime", "traffic", "house_price".
Task parse_task(std::string_view name);

/// Downstream labels. Crime and traffic are [I x T], house price is [I x 1].
struct Targets {
  std::optional<Tensor> crime;
  std::optional<Tensor> traffic;
  std::optional<Tensor> house_price;

  bool has(Task task) const;
  /// Throws UnsupportedTaskError when the task has no labels.
  const Tensor& get(Task task) const;
  std::vector<Task> available() const;
};

struct Dataset {
  PoiMatrix poi;
  std::vector<TrajectoryRecord> trajectories;
  DistanceMatrix dist;
  std::size_t slots = 1;
  Targets targets;
  /// Latent cluster per region; only known for synthetic data (else empty).
  std::vector<std::size_t> clusters;

  std::size_t regions() const noexcept { return poi.regions; }
  /// Cross-checks every dimension; throws ValidationError naming both sides.
  void validate() const;
};

inline constexpr double kEarthRadiusKm = 6371.0;

double haversine_km(LatLon a, LatLon b);
/// Computes the upper triangle once and mirrors it, so the result is exactly symmetric.
DistanceMatrix distance_from_centroids(std::vector<LatLon> centroids);

struct DatasetPaths {
  std::filesystem::path poi;
  std::filesystem::path trajectories;
  std::filesystem::path centroids;
  std::optional<std::filesystem::path> targets;
  std::optional<std::filesystem::path> clusters;
};

/// Reads the CSV inputs and validates them. The number of time slots is
/// `slots` when given, otherwise one past the largest slot referenced.
Dataset load_dataset(const DatasetPaths& paths, std::optional<std::size_t> slots = {});

/// Standard file names inside a dataset directory (as written by save_dataset).
DatasetPaths dataset_paths(const std::filesystem::path& dir);
/// Loads a directory written by save_dataset (reads meta.csv for the slot count).
Dataset load_dataset_dir(const std::filesystem::path& dir);
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

struct SynthConfig {
  std::size_t regions = 60;
  std::size_t categories = 12;
  std::size_t slots = 4;
  std::size_t trips = 3000;
  double noise_rate = 0.0;
  double skew_exponent = 1.0;
  std::size_t clusters = 3;
  std::uint64_t seed = 0;
};

/// Clustered synthetic city. Regions get a latent cluster that drives their
/// location, POI profile, trip destinations and all three targets. Pure
/// function of the config.
Dataset synth_dataset(const SynthConfig& config);

/// Fraction of time slots with a non-zero crime count for one region.
double crime_density(const Dataset& dataset, std::size_t region);

}  // namespace autost
