#include "autost/region_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "autost/errors.hpp"
#include "autost/random.hpp"
#include "csv.hpp"

namespace autost {

namespace fs = std::filesystem;

std::string_view task_name(Task task) {
  switch (task) {
    case Task::Crime: return "crime";
    case Task::Traffic: return "traffic";
    case Task::HousePrice: return "house_price";
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  if (name == "crime") return Task::Crime;
  if (name == "traffic") return Task::Traffic;
  if (name == "house_price") return Task::HousePrice;
  throw UnsupportedTaskError("unknown task '" + std::string(name) + "'");
}

bool Targets::has(Task task) const {
  switch (task) {
    case Task::Crime: return crime.has_value();
    case Task::Traffic: return traffic.has_value();
    case Task::HousePrice: return house_price.has_value();
  }
  return false;
}

const Tensor& Targets::get(Task task) const {
  const std::optional<Tensor>* t = nullptr;
  switch (task) {
    case Task::Crime: t = &crime; break;
    case Task::Traffic: t = &traffic; break;
    case Task::HousePrice: t = &house_price; break;
  }
  if (t == nullptr || !t->has_value()) {
    throw UnsupportedTaskError("dataset has no targets for task '" +
                               std::string(task_name(task)) + "'");
  }
  return **t;
}

std::vector<Task> Targets::available() const {
  std::vector<Task> out;
  for (Task t : {Task::Crime, Task::Traffic, Task::HousePrice}) {
    if (has(t)) out.push_back(t);
  }
  return out;
}

namespace {

void mismatch(const std::string& what, std::size_t a, std::size_t b) {
  throw ValidationError(what + " (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace

void Dataset::validate() const {
  const std::size_t n = poi.regions;
  if (n == 0) throw ValidationError("dataset has no regions");
  if (poi.categories == 0) throw ValidationError("POI matrix has no categories");
  if (poi.counts.size() != n * poi.categories) {
    mismatch("POI counts length vs regions*categories", poi.counts.size(), n * poi.categories);
  }
  if (poi.category_names.size() != poi.categories) {
    mismatch("POI category names vs categories", poi.category_names.size(), poi.categories);
  }
  for (auto c : poi.counts) {
    if (c < 0) throw ValidationError("negative POI count");
  }
  if (slots == 0) throw ValidationError("dataset has zero time slots");
  if (dist.centroids.size() != n) {
    mismatch("POI regions vs centroid regions", n, dist.centroids.size());
  }
  if (dist.km.rows() != n || dist.km.cols() != n) {
    mismatch("POI regions vs distance matrix size", n, dist.km.rows());
  }
  for (const auto& r : trajectories) {
    if (r.source >= n || r.dest >= n) throw ValidationError("region index out of range");
    if (r.t_start >= slots || r.t_end >= slots) throw ValidationError("time slot out of range");
    if (r.t_start > r.t_end) throw ValidationError("trajectory with t_start > t_end");
  }
  auto check_target = [&](const std::optional<Tensor>& t, const char* name, std::size_t cols) {
    if (!t) return;
    if (t->rows() != n) mismatch(std::string(name) + " target rows vs POI regions", t->rows(), n);
    if (t->cols() != cols) mismatch(std::string(name) + " target columns vs slots", t->cols(), cols);
    for (double v : t->data()) {
      if (std::isnan(v)) throw ValidationError(std::string(name) + " target contains NaN");
    }
  };
  check_target(targets.crime, "crime", slots);
  check_target(targets.traffic, "traffic", slots);
  check_target(targets.house_price, "house_price", 1);
  if (!clusters.empty() && clusters.size() != n) {
    mismatch("cluster labels vs POI regions", clusters.size(), n);
  }
}

double haversine_km(LatLon a, LatLon b) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  const double p1 = a.lat * kDeg, p2 = b.lat * kDeg;
  const double dp = (b.lat - a.lat) * kDeg;
  const double dl = (b.lon - a.lon) * kDeg;
  const double s1 = std::sin(dp / 2.0), s2 = std::sin(dl / 2.0);
  const double h = s1 * s1 + std::cos(p1) * std::cos(p2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

DistanceMatrix distance_from_centroids(std::vector<LatLon> centroids) {
  DistanceMatrix d;
  const std::size_t n = centroids.size();
  d.km = Tensor(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = haversine_km(centroids[i], centroids[j]);
      d.km(i, j) = v;
      d.km(j, i) = v;
    }
  }
  d.centroids = std::move(centroids);
  return d;
}

// ---------------------------------------------------------------------------
// CSV loading

namespace {

std::size_t region_field(const csv::Reader& r, const std::string& field, std::size_t regions) {
  const auto v = r.to_int(field);
  if (v < 0 || static_cast<std::size_t>(v) >= regions) r.fail("region index out of range");
  return static_cast<std::size_t>(v);
}

PoiMatrix read_poi(const fs::path& path) {
  csv::Reader r(path);
  std::vector<std::string> fields;
  if (!r.next(fields)) r.fail("missing header");
  if (fields.size() < 2 || fields[0] != "region") {
    r.fail("unexpected header, expected 'region,cat_0,...'");
  }
  PoiMatrix poi;
  poi.category_names.assign(fields.begin() + 1, fields.end());
  poi.categories = poi.category_names.size();

  std::map<std::size_t, std::vector<std::int64_t>> rows;
  while (r.next(fields)) {
    if (fields.size() != poi.categories + 1) {
      r.fail("expected " + std::to_string(poi.categories + 1) + " fields, got " +
             std::to_string(fields.size()));
    }
    const auto id = r.to_int(fields[0]);
    if (id < 0) r.fail("negative region index");
    std::vector<std::int64_t> counts;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto v = r.to_int(fields[c]);
      if (v < 0) r.fail("negative POI count");
      counts.push_back(v);
    }
    if (!rows.emplace(static_cast<std::size_t>(id), std::move(counts)).second) {
      r.fail("duplicate region " + std::to_string(id));
    }
  }
  poi.regions = rows.size();
  std::size_t expect = 0;
  for (auto& [id, counts] : rows) {
    if (id != expect) {
      throw ValidationError(path.string() + ": regions must be 0..I-1, missing region " +
                            std::to_string(expect));
    }
    poi.counts.insert(poi.counts.end(), counts.begin(), counts.end());
    ++expect;
  }
  return poi;
}

std::vector<LatLon> read_centroids(const fs::path& path) {
  csv::Reader r(path);
  r.expect_header({"region", "lat", "lon"});
  std::map<std::size_t, LatLon> rows;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != 3) r.fail("expected 3 fields, got " + std::to_string(f.size()));
    const auto id = r.to_int(f[0]);
    if (id < 0) r.fail("negative region index");
    LatLon ll{r.to_double(f[1]), r.to_double(f[2])};
    if (!(std::abs(ll.lat) <= 90.0) || !(std::abs(ll.lon) <= 180.0)) {
      r.fail("coordinate out of range");
    }
    if (!rows.emplace(static_cast<std::size_t>(id), ll).second) {
      r.fail("duplicate region " + std::to_string(id));
    }
  }
  std::vector<LatLon> out;
  for (const auto& [id, ll] : rows) {
    if (id != out.size()) {
      throw ValidationError(path.string() + ": regions must be 0..I-1, missing region " +
                            std::to_string(out.size()));
    }
    out.push_back(ll);
  }
  return out;
}

std::vector<TrajectoryRecord> read_trajectories(const fs::path& path, std::size_t regions) {
  csv::Reader r(path);
  r.expect_header({"src", "dst", "t_start", "t_end"});
  std::vector<TrajectoryRecord> out;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != 4) r.fail("expected 4 fields, got " + std::to_string(f.size()));
    TrajectoryRecord rec;
    rec.source = region_field(r, f[0], regions);
    rec.dest = region_field(r, f[1], regions);
    const auto ts = r.to_int(f[2]);
    const auto te = r.to_int(f[3]);
    if (ts < 0 || te < 0) r.fail("negative time slot");
    if (ts > te) r.fail("t_start > t_end");
    rec.t_start = static_cast<std::size_t>(ts);
    rec.t_end = static_cast<std::size_t>(te);
    out.push_back(rec);
  }
  return out;
}

struct TargetRow {
  std::size_t region;
  Task task;
  std::int64_t slot;
  double value;
  std::size_t line;
};

std::vector<TargetRow> read_target_rows(const fs::path& path, std::size_t regions) {
  csv::Reader r(path);
  r.expect_header({"region", "task", "slot", "value"});
  std::vector<TargetRow> out;
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != 4) r.fail("expected 4 fields, got " + std::to_string(f.size()));
    TargetRow row;
    row.region = region_field(r, f[0], regions);
    try {
      row.task = parse_task(f[1]);
    } catch (const UnsupportedTaskError&) {
      r.fail("unknown task '" + f[1] + "'");
    }
    row.slot = r.to_int(f[2]);
    row.value = r.to_double(f[3]);
    if (std::isnan(row.value)) r.fail("NaN target value");
    const bool is_static = row.task == Task::HousePrice;
    if (is_static && row.slot != -1) r.fail("static task requires slot -1");
    if (!is_static && row.slot < 0) r.fail("per-slot task requires slot >= 0");
    row.line = r.line();
    out.push_back(row);
  }
  return out;
}

Targets assemble_targets(const std::vector<TargetRow>& rows, std::size_t regions,
                         std::size_t slots, const fs::path& path) {
  Targets t;
  std::map<Task, Tensor> tensors;
  std::map<Task, std::vector<bool>> seen;
  for (const auto& row : rows) {
    const std::size_t cols = row.task == Task::HousePrice ? 1 : slots;
    auto [it, fresh] = tensors.try_emplace(row.task, regions, cols);
    if (fresh) seen[row.task].assign(regions * cols, false);
    const std::size_t col = row.task == Task::HousePrice ? 0 : static_cast<std::size_t>(row.slot);
    if (col >= cols) {
      throw ParseError(path.string() + ":" + std::to_string(row.line) + ": slot " +
                       std::to_string(row.slot) + " out of range for " + std::to_string(slots) +
                       " slots");
    }
    auto flag = seen[row.task][row.region * cols + col];
    if (flag) {
      throw ParseError(path.string() + ":" + std::to_string(row.line) + ": duplicate target");
    }
    flag = true;
    it->second(row.region, col) = row.value;
  }
  for (auto& [task, tensor] : tensors) {
    const auto& s = seen[task];
    const auto missing = std::count(s.begin(), s.end(), false);
    if (missing > 0) {
      throw ValidationError(path.string() + ": task '" + std::string(task_name(task)) +
                            "' is missing " + std::to_string(missing) + " of " +
                            std::to_string(s.size()) + " entries");
    }
    switch (task) {
      case Task::Crime: t.crime = std::move(tensor); break;
      case Task::Traffic: t.traffic = std::move(tensor); break;
      case Task::HousePrice: t.house_price = std::move(tensor); break;
    }
  }
  return t;
}

std::vector<std::size_t> read_clusters(const fs::path& path, std::size_t regions) {
  csv::Reader r(path);
  r.expect_header({"region", "cluster"});
  std::vector<std::size_t> out(regions, 0);
  std::vector<bool> seen(regions, false);
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != 2) r.fail("expected 2 fields, got " + std::to_string(f.size()));
    const auto region = region_field(r, f[0], regions);
    const auto c = r.to_int(f[1]);
    if (c < 0) r.fail("negative cluster");
    out[region] = static_cast<std::size_t>(c);
    seen[region] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ValidationError(path.string() + ": cluster labels do not cover every region");
  }
  return out;
}

}  // namespace

Dataset load_dataset(const DatasetPaths& paths, std::optional<std::size_t> slots) {
  Dataset ds;
  ds.poi = read_poi(paths.poi);
  auto centroids = read_centroids(paths.centroids);
  if (centroids.size() != ds.poi.regions) {
    mismatch("POI regions vs centroid regions", ds.poi.regions, centroids.size());
  }
  ds.dist = distance_from_centroids(std::move(centroids));
  ds.trajectories = read_trajectories(paths.trajectories, ds.poi.regions);

  std::vector<TargetRow> target_rows;
  if (paths.targets) target_rows = read_target_rows(*paths.targets, ds.poi.regions);

  std::size_t inferred = 1;
  for (const auto& r : ds.trajectories) inferred = std::max(inferred, r.t_end + 1);
  for (const auto& r : target_rows) {
    if (r.slot >= 0) inferred = std::max(inferred, static_cast<std::size_t>(r.slot) + 1);
  }
  ds.slots = slots.value_or(inferred);
  if (ds.slots < inferred) {
    mismatch("declared slots vs largest referenced slot + 1", ds.slots, inferred);
  }
  if (paths.targets) ds.targets = assemble_targets(target_rows, ds.poi.regions, ds.slots, *paths.targets);
  if (paths.clusters) ds.clusters = read_clusters(*paths.clusters, ds.poi.regions);
  ds.validate();
  return ds;
}

DatasetPaths dataset_paths(const fs::path& dir) {
  DatasetPaths p{dir / "poi.csv", dir / "trips.csv", dir / "centroids.csv", std::nullopt,
                 std::nullopt};
  if (fs::exists(dir / "targets.csv")) p.targets = dir / "targets.csv";
  if (fs::exists(dir / "clusters.csv")) p.clusters = dir / "clusters.csv";
  return p;
}

Dataset load_dataset_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  std::optional<std::size_t> slots;
  if (fs::exists(dir / "meta.csv")) {
    csv::Reader r(dir / "meta.csv");
    r.expect_header({"key", "value"});
    std::vector<std::string> f;
    while (r.next(f)) {
      if (f.size() != 2) r.fail("expected 2 fields");
      if (f[0] == "slots") slots = static_cast<std::size_t>(r.to_int(f[1]));
    }
  }
  return load_dataset(dataset_paths(dir), slots);
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("meta.csv");
    out << "key,value\nregions," << ds.regions() << "\nslots," << ds.slots << "\n";
  }
  {
    auto out = open("poi.csv");
    out << "region";
    for (const auto& name : ds.poi.category_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < ds.poi.regions; ++i) {
      out << i;
      for (std::size_t c = 0; c < ds.poi.categories; ++c) out << ',' << ds.poi(i, c);
      out << '\n';
    }
  }
  {
    auto out = open("trips.csv");
    out << "src,dst,t_start,t_end\n";
    for (const auto& r : ds.trajectories) {
      out << r.source << ',' << r.dest << ',' << r.t_start << ',' << r.t_end << '\n';
    }
  }
  {
    auto out = open("centroids.csv");
    out << "region,lat,lon\n";
    for (std::size_t i = 0; i < ds.dist.centroids.size(); ++i) {
      out << i << ',' << csv::format_double(ds.dist.centroids[i].lat) << ','
          << csv::format_double(ds.dist.centroids[i].lon) << '\n';
    }
  }
  const auto tasks = ds.targets.available();
  if (!tasks.empty()) {
    auto out = open("targets.csv");
    out << "region,task,slot,value\n";
    for (Task task : tasks) {
      const Tensor& t = ds.targets.get(task);
      for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t s = 0; s < t.cols(); ++s) {
          const long slot = task == Task::HousePrice ? -1L : static_cast<long>(s);
          out << i << ',' << task_name(task) << ',' << slot << ',' << csv::format_double(t(i, s))
              << '\n';
        }
      }
    }
  } else {
    fs::remove(dir / "targets.csv");
  }
  if (!ds.clusters.empty()) {
    auto out = open("clusters.csv");
    out << "region,cluster\n";
    for (std::size_t i = 0; i < ds.clusters.size(); ++i) out << i << ',' << ds.clusters[i] << '\n';
  } else {
    fs::remove(dir / "clusters.csv");
  }
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace {

constexpr double kKmPerDegree = kEarthRadiusKm * 3.14159265358979323846 / 180.0;
constexpr LatLon kOrigin{40.70, -73.95};
constexpr double kClusterSpacingKm = 6.0;
constexpr double kRegionJitterKm = 1.0;
constexpr double kIntraClusterTripShare = 0.8;

std::size_t sample_weighted(const std::vector<double>& cumulative, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, cumulative.back());
  const double x = u(rng);
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
      it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

std::vector<double> cumsum(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  std::partial_sum(w.begin(), w.end(), c.begin());
  return c;
}

// Per-cluster coefficients spread over [lo, hi): one uniform draw per stratum.
std::vector<double> stratified(std::size_t k, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(k);
  for (std::size_t i = 0; i < k; ++i) {
    v[i] = lo + (hi - lo) * (static_cast<double>(i) + u(rng)) / static_cast<double>(k);
  }
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

}  // namespace

Dataset synth_dataset(const SynthConfig& cfg) {
  if (cfg.regions == 0 || cfg.categories == 0 || cfg.slots == 0) {
    throw ConfigError("synth: regions, categories and slots must be >= 1");
  }
  if (cfg.clusters == 0 || cfg.clusters > cfg.regions) {
    throw ConfigError("synth: need 1 <= clusters <= regions (clusters=" +
                      std::to_string(cfg.clusters) + ", regions=" + std::to_string(cfg.regions) +
                      ")");
  }
  if (!(cfg.noise_rate >= 0.0 && cfg.noise_rate <= 1.0)) {
    throw ConfigError("synth: noise_rate must lie in [0, 1]");
  }
  if (!(cfg.skew_exponent >= 0.0)) throw ConfigError("synth: skew_exponent must be >= 0");

  const std::size_t n = cfg.regions, k = cfg.clusters, c = cfg.categories, t = cfg.slots;
  Dataset ds;
  ds.slots = t;

  // Latent clusters: balanced, randomly placed.
  {
    Rng rng = make_rng(cfg.seed, "synth.clusters");
    ds.clusters.resize(n);
    for (std::size_t i = 0; i < n; ++i) ds.clusters[i] = i % k;
    std::shuffle(ds.clusters.begin(), ds.clusters.end(), rng);
  }

  // Geography: cluster centres on a grid, regions jittered around them.
  {
    Rng rng = make_rng(cfg.seed, "synth.geo");
    std::normal_distribution<double> jitter(0.0, kRegionJitterKm);
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k))));
    const double lon_scale = kKmPerDegree * std::cos(kOrigin.lat * 3.14159265358979323846 / 180.0);
    std::vector<LatLon> centroids(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t cl = ds.clusters[i];
      const double north = static_cast<double>(cl / side) * kClusterSpacingKm + jitter(rng);
      const double east = static_cast<double>(cl % side) * kClusterSpacingKm + jitter(rng);
      centroids[i] = {kOrigin.lat + north / kKmPerDegree, kOrigin.lon + east / lon_scale};
    }
    ds.dist = distance_from_centroids(std::move(centroids));
  }

  // POIs: each cluster has a category profile with a few dominant categories.
  {
    Rng rng = make_rng(cfg.seed, "synth.poi");
    std::normal_distribution<double> lognormal(0.0, 1.0);
    std::normal_distribution<double> intensity(0.0, 0.3);
    std::vector<std::vector<double>> profile(k, std::vector<double>(c));
    for (std::size_t cl = 0; cl < k; ++cl) {
      double total = 0.0;
      for (std::size_t cat = 0; cat < c; ++cat) {
        profile[cl][cat] = std::exp(lognormal(rng)) * (cat % k == cl ? 4.0 : 1.0);
        total += profile[cl][cat];
      }
      for (double& w : profile[cl]) w *= static_cast<double>(c) / total;
    }
    ds.poi.regions = n;
    ds.poi.categories = c;
    ds.poi.counts.assign(n * c, 0);
    for (std::size_t cat = 0; cat < c; ++cat) ds.poi.category_names.push_back("cat_" + std::to_string(cat));
    constexpr double kMeanPerCategory = 5.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = std::exp(intensity(rng));
      for (std::size_t cat = 0; cat < c; ++cat) {
        std::poisson_distribution<std::int64_t> draw(kMeanPerCategory * scale *
                                                     profile[ds.clusters[i]][cat]);
        ds.poi(i, cat) = draw(rng);
      }
    }
  }

  // Trips: power-law activity, mostly intra-cluster, a fixed fraction rewired.
  {
    Rng rng = make_rng(cfg.seed, "synth.trips");
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), 0);
    std::shuffle(rank.begin(), rank.end(), rng);
    std::vector<double> activity(n);
    for (std::size_t i = 0; i < n; ++i) {
      activity[i] = std::pow(static_cast<double>(rank[i] + 1), -cfg.skew_exponent);
    }
    const auto all = cumsum(activity);
    std::vector<std::vector<std::size_t>> members(k);
    std::vector<std::vector<double>> member_cum(k);
    for (std::size_t i = 0; i < n; ++i) members[ds.clusters[i]].push_back(i);
    for (std::size_t cl = 0; cl < k; ++cl) {
      std::vector<double> w;
      for (auto i : members[cl]) w.push_back(activity[i]);
      member_cum[cl] = cumsum(w);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> slot(0, t - 1);
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    ds.trajectories.reserve(cfg.trips);
    for (std::size_t m = 0; m < cfg.trips; ++m) {
      TrajectoryRecord r;
      r.source = sample_weighted(all, rng);
      if (u(rng) < kIntraClusterTripShare) {
        const auto cl = ds.clusters[r.source];
        r.dest = members[cl][sample_weighted(member_cum[cl], rng)];
      } else {
        r.dest = sample_weighted(all, rng);
      }
      r.t_start = slot(rng);
      r.t_end = std::min(t - 1, r.t_start + (u(rng) < 0.5 ? 1 : 0));
      ds.trajectories.push_back(r);
    }
    const auto rewired = static_cast<std::size_t>(
        std::llround(cfg.noise_rate * static_cast<double>(cfg.trips)));
    std::vector<std::size_t> order(cfg.trips);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t m = 0; m < rewired; ++m) {
      auto& r = ds.trajectories[order[m]];
      r.source = any(rng);
      r.dest = any(rng);
    }
  }

  // Targets: per-cluster coefficients plus slot effects plus Gaussian noise.
  {
    Rng rng = make_rng(cfg.seed, "synth.targets");
    const auto crime_level = stratified(k, -1.5, 2.5, rng);
    const auto traffic_level = stratified(k, -1.0, 1.0, rng);
    const auto price_level = stratified(k, -1.0, 1.0, rng);
    std::normal_distribution<double> slot_effect(0.0, 0.3);
    std::vector<double> crime_slot(t), traffic_slot(t);
    for (std::size_t s = 0; s < t; ++s) {
      crime_slot[s] = slot_effect(rng);
      traffic_slot[s] = slot_effect(rng);
    }
    std::normal_distribution<double> crime_noise(0.0, 0.8);
    std::normal_distribution<double> traffic_noise(0.0, 1.0);
    std::normal_distribution<double> price_noise(0.0, 15.0);
    Tensor crime(n, t), traffic(n, t), price(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t cl = ds.clusters[i];
      for (std::size_t s = 0; s < t; ++s) {
        crime(i, s) = std::max(0.0, std::round(crime_level[cl] + crime_slot[s] + crime_noise(rng)));
        traffic(i, s) = 20.0 + 5.0 * traffic_level[cl] + 2.0 * traffic_slot[s] + traffic_noise(rng);
      }
      price(i, 0) = 500.0 + 100.0 * price_level[cl] + price_noise(rng);
    }
    ds.targets.crime = std::move(crime);
    ds.targets.traffic = std::move(traffic);
    ds.targets.house_price = std::move(price);
  }

  ds.validate();
  return ds;
}

double crime_density(const Dataset& dataset, std::size_t region) {
  const Tensor& crime = dataset.targets.get(Task::Crime);
  if (region >= crime.rows()) {
    throw ContractError("crime_density: region " + std::to_string(region) + " out of range");
  }
  std::size_t nonzero = 0;
  for (double v : crime.row(region)) {
    if (v != 0.0) ++nonzero;
  }
  return static_cast<double>(nonzero) / static_cast<double>(crime.cols());
}

}  // namespace autost
