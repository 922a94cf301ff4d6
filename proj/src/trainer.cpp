#include "autost/trainer.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "autost/errors.hpp"
#include "autost/ops.hpp"
#include "csv.hpp"

namespace autost {

using nlohmann::json;

void TrainConfig::validate() const {
  auto fail = [](const std::string& message) { throw ConfigError(message); };
  if (epochs < 1) fail("train.epochs must be at least 1");
  if (!(optimizer.learning_rate > 0.0)) fail("train.lr must be positive");
  if (!(optimizer.weight_decay >= 0.0)) fail("train.weight_decay must be non-negative");
  if (dim < 1) fail("model.dim must be at least 1");
  if (heads < 1 || dim % heads != 0) {
    fail("attn.heads (" + std::to_string(heads) + ") must divide model.dim (" +
         std::to_string(dim) + ")");
  }
  if (!(view.eps > 0.0 && view.eps < 1.0)) fail("view.eps must lie in (0, 1)");
  if (!(view.seed_frac > 0.0 && view.seed_frac <= 1.0)) fail("view.seed_frac must lie in (0, 1]");
  if (!(view.noise.sigma >= 0.0)) fail("view.noise_sigma must be non-negative");
  if (!(random_drop >= 0.0 && random_drop < 1.0)) fail("view.random_drop must lie in [0, 1)");
  if (checkpoint_every > 0 && checkpoint_dir.empty()) {
    fail("train.checkpoint_every needs a checkpoint directory");
  }
  loss.validate();
}

std::vector<Parameter*> TrainedModel::encoder_parameters() {
  auto out = poi.parameters();
  for (Parameter* p : encoder.parameters()) out.push_back(p);
  return out;
}

std::vector<Parameter*> TrainedModel::sampler_parameters() {
  auto out = samplers[0].parameters();
  for (Parameter* p : samplers[1].parameters()) out.push_back(p);
  return out;
}

std::uint64_t parameter_checksum(const std::vector<Parameter*>& params) {
  std::uint64_t h = kFnvOffset;
  for (const Parameter* p : params) h = fnv1a64(p->value.data(), fnv1a64(p->name, h));
  return h;
}

namespace {

SkipGramConfig skipgram_config(const TrainConfig& c) {
  SkipGramConfig s = c.skipgram;
  if (s.dim == 0) s.dim = c.dim;
  s.seed = derive_seed(c.seed, "skipgram");
  return s;
}

std::vector<Tensor> gradients(const Tape& tape, const std::vector<Parameter*>& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back(tape.grad(*p));
  return out;
}

[[noreturn]] void abort_epoch(std::uint64_t epoch, const std::string& terms) {
  throw TrainingAborted("non-finite loss at epoch " + std::to_string(epoch) + " (" + terms + ")");
}

}  // namespace

Trainer::Trainer(const Dataset& dataset, TrainConfig config)
    : dataset_(dataset),
      config_(std::move(config)),
      graph_(0, 0),
      encoder_opt_(config_.optimizer),
      sampler_opt_(config_.optimizer) {
  config_.validate();
  dataset_.validate();
  Rng rng = make_rng(config_.seed, "init");
  model_.poi = PoiEncoder::create(dataset_.poi, skipgram_config(config_), config_.dim,
                                  config_.heads, rng);
  model_.encoder = EncoderParams::glorot(config_.dim, config_.layers, rng);
  model_.samplers[0] = VgaeParams::glorot("sampler1", config_.dim, rng);
  model_.samplers[1] = VgaeParams::glorot("sampler2", config_.dim, rng);
  model_.regions = dataset_.regions();
  // The POI view compares the frozen pooled skip-gram vectors.
  graph_ = build_hetero_graph(dataset_, pool_regions(model_.poi.table, dataset_.poi), config_.graph);
  graph_edges_ = graph_.union_edges();
}

Tensor Trainer::node_embeddings() {
  Tape tape;
  Var h0 = init_features(tape, model_.poi.forward(tape, dataset_.poi), graph_);
  return encode(tape, graph_, h0, model_.encoder).value();
}

Trainer::Terms Trainer::contrastive_terms(Tape& tape, const GeneratedViews& views,
                                          std::uint64_t epoch) {
  Var h0 = init_features(tape, model_.poi.forward(tape, dataset_.poi), graph_);
  std::array<Var, 2> z;
  std::array<Var, 2> z_aug;
  for (std::size_t v = 0; v < 2; ++v) {
    const ContrastiveView& view = views.samples[v].view;
    Var x = view_features(h0, view);
    z[v] = encode(tape, view_relations(view, view.edges), x, model_.encoder);
    Rng rng = make_rng(config_.seed, "infobn." + std::to_string(v + 1), epoch);
    z_aug[v] = infobn_augment(tape, x, view, config_.loss.infobn_drop, rng, model_.encoder);
  }
  const SharedNodes shared = shared_nodes(views.samples[0].view, views.samples[1].view);
  Terms t;
  t.first_shared = gather_rows(z[0], shared.first);
  t.second_shared = gather_rows(z[1], shared.second);
  t.nce = info_nce(t.first_shared, t.second_shared, config_.loss.tau);
  t.bn = info_bn(z[0], z_aug[0], z[1], z_aug[1], config_.loss.tau);
  t.total = overall_loss(t.nce, t.bn, config_.loss.beta);
  return t;
}

EpochRecord Trainer::run_epoch() {
  const std::uint64_t epoch = epochs_done() + 1;
  const std::size_t n = graph_.num_nodes();
  const bool learned = config_.augmentation == Augmentation::Learned;
  const Tensor h = node_embeddings();
  const GeneratedViews views =
      learned ? generate_views(n, graph_edges_, h, model_.samplers[0], model_.samplers[1],
                               config_.view, config_.seed, epoch)
              : generate_random_views(n, graph_edges_, config_.random_drop, config_.view,
                                      config_.seed, epoch);

  EpochRecord rec;
  rec.epoch = epoch;
  auto encoder_params = model_.encoder_parameters();
  auto sampler_params = model_.sampler_parameters();

  {
    Tape tape;
    const Terms t = contrastive_terms(tape, views, epoch);
    rec.nce = t.nce.value().item();
    rec.bn = t.bn.value().item();
    rec.total = t.total.value().item();
    rec.shared_nodes = t.first_shared.rows();
    rec.view_nodes = views.samples[0].view.nodes.size() + views.samples[1].view.nodes.size();
    rec.mean_total = config_.loss.beta * rec.nce / static_cast<double>(rec.shared_nodes) +
                     (1.0 - config_.loss.beta) * rec.bn / static_cast<double>(rec.view_nodes);
    if (!std::isfinite(rec.total)) {
      abort_epoch(epoch, "L_NCE=" + std::to_string(rec.nce) + ", L_BN=" + std::to_string(rec.bn));
    }
    tape.backward(t.total);
    const auto grads = gradients(tape, encoder_params);
    const std::uint64_t before = parameter_checksum(sampler_params);
    encoder_opt_.step(encoder_params, grads);
    if (parameter_checksum(sampler_params) != before) {
      throw ContractError("encoder step modified sampler parameters");
    }
  }

  if (config_.fixed_reward) {
    rec.reward = 1.0;
  } else {
    // Reward is measured on the post-step encoder.
    Tape tape;
    const Terms t = contrastive_terms(tape, views, epoch);
    const double r1 = reward_r1(t.total.value().item(), config_.loss.eps_prime, config_.loss.xi);
    const double r2 = reward_r2(t.first_shared.value(), t.second_shared.value());
    rec.reward = combined_reward(r1, r2, config_.loss.w1);
  }

  if (learned) {
    Tape tape;
    Var l1 = sampler_reconstruction(tape, h, model_.samplers[0], views.samples[0]);
    Var l2 = sampler_reconstruction(tape, h, model_.samplers[1], views.samples[1]);
    rec.rec1 = l1.value().item();
    rec.rec2 = l2.value().item();
    if (!std::isfinite(rec.rec1) || !std::isfinite(rec.rec2) || !std::isfinite(rec.reward)) {
      abort_epoch(epoch, "L_Rec1=" + std::to_string(rec.rec1) + ", L_Rec2=" +
                             std::to_string(rec.rec2) + ", reward=" + std::to_string(rec.reward));
    }
    tape.backward(sampler_objective(rec.reward, l1, l2));
    const auto grads = gradients(tape, sampler_params);
    const std::uint64_t before = parameter_checksum(encoder_params);
    sampler_opt_.step(sampler_params, grads);
    if (parameter_checksum(encoder_params) != before) {
      throw ContractError("sampler step modified encoder parameters");
    }
  }

  model_.history.push_back(rec);
  if (config_.checkpoint_every > 0 && epoch % config_.checkpoint_every == 0) {
    char name[40];
    std::snprintf(name, sizeof name, "checkpoint-%04llu.json",
                  static_cast<unsigned long long>(epoch));
    save_checkpoint(config_.checkpoint_dir / name);
  }
  return rec;
}

void Trainer::run() {
  while (epochs_done() < config_.epochs) run_epoch();
}

TrainedModel Trainer::finish() && {
  model_.node_embeddings = node_embeddings();
  return std::move(model_);
}

TrainedModel train(const Dataset& dataset, const TrainConfig& config) {
  Trainer trainer(dataset, config);
  trainer.run();
  return std::move(trainer).finish();
}

Tensor region_embeddings(const TrainedModel& model) {
  const Tensor& h = model.node_embeddings;
  if (h.rows() < model.regions) {
    throw ContractError("model holds " + std::to_string(h.rows()) + " node embeddings for " +
                        std::to_string(model.regions) + " regions");
  }
  Tensor out(model.regions, h.cols());
  for (std::size_t i = 0; i < model.regions; ++i) {
    std::copy(h.row(i).begin(), h.row(i).end(), out.row(i).begin());
  }
  return out;
}

void write_loss_csv(const std::vector<EpochRecord>& history, std::ostream& out) {
  out << "epoch,L_NCE,L_BN,L,reward,L_Rec1,L_Rec2\n";
  for (const EpochRecord& r : history) {
    out << r.epoch;
    for (double v : {r.nce, r.bn, r.total, r.reward, r.rec1, r.rec2}) {
      out << ',' << csv::format_double(v);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------- checkpoint

namespace {

json tensor_json(const Tensor& t) {
  return {{"rows", t.rows()},
          {"cols", t.cols()},
          {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

Tensor tensor_from_json(const json& j, const std::string& what) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) {
    throw ValidationError("checkpoint tensor " + what + " holds " + std::to_string(data.size()) +
                          " values for shape " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Tensor(rows, cols, std::move(data));
}

json params_json(const std::vector<Parameter*>& params) {
  json out = json::object();
  for (const Parameter* p : params) out[p->name] = tensor_json(p->value);
  return out;
}

void restore_params(const json& j, const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    if (!j.contains(p->name)) throw ValidationError("checkpoint lacks parameter " + p->name);
    Tensor t = tensor_from_json(j.at(p->name), p->name);
    if (t.rows() != p->value.rows() || t.cols() != p->value.cols()) {
      throw ValidationError("checkpoint parameter " + p->name + " is " + shape_string(t) +
                            ", model expects " + shape_string(p->value));
    }
    p->value = std::move(t);
  }
}

json adam_json(const Adam& opt) {
  json moments = json::object();
  for (const auto& [name, m] : opt.moments()) {
    moments[name] = {{"first", tensor_json(m.first)}, {"second", tensor_json(m.second)}};
  }
  return {{"steps", opt.steps()}, {"moments", moments}};
}

void restore_adam(const json& j, Adam& opt) {
  opt.set_steps(j.at("steps").get<std::size_t>());
  opt.moments().clear();
  for (const auto& [name, m] : j.at("moments").items()) {
    opt.moments()[name] = {tensor_from_json(m.at("first"), name),
                           tensor_from_json(m.at("second"), name)};
  }
}

}  // namespace

void Trainer::save_checkpoint(const std::filesystem::path& path) {
  json history = json::array();
  for (const EpochRecord& r : model_.history) {
    history.push_back({r.epoch, r.nce, r.bn, r.total, r.reward, r.rec1, r.rec2, r.shared_nodes,
                       r.view_nodes, r.mean_total});
  }
  const json doc = {{"format", "autost-checkpoint"},
                    {"version", 1},
                    {"epoch", epochs_done()},
                    {"poi_table", tensor_json(model_.poi.table)},
                    {"encoder", params_json(model_.encoder_parameters())},
                    {"samplers", params_json(model_.sampler_parameters())},
                    {"encoder_optimizer", adam_json(encoder_opt_)},
                    {"sampler_optimizer", adam_json(sampler_opt_)},
                    {"history", history}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << doc.dump();
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

void Trainer::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    if (doc.at("format") != "autost-checkpoint") {
      throw ValidationError(path.string() + " is not a checkpoint");
    }
    Tensor table = tensor_from_json(doc.at("poi_table"), "poi_table");
    if (!(table.rows() == model_.poi.table.rows() && table.cols() == model_.poi.table.cols())) {
      throw ValidationError("checkpoint POI table " + shape_string(table) + " does not match " +
                            shape_string(model_.poi.table));
    }
    model_.poi.table = std::move(table);
    restore_params(doc.at("encoder"), model_.encoder_parameters());
    restore_params(doc.at("samplers"), model_.sampler_parameters());
    restore_adam(doc.at("encoder_optimizer"), encoder_opt_);
    restore_adam(doc.at("sampler_optimizer"), sampler_opt_);
    model_.history.clear();
    for (const json& r : doc.at("history")) {
      model_.history.push_back({r.at(0).get<std::size_t>(), r.at(1).get<double>(),
                                r.at(2).get<double>(), r.at(3).get<double>(),
                                r.at(4).get<double>(), r.at(5).get<double>(),
                                r.at(6).get<double>(), r.at(7).get<std::size_t>(),
                                r.at(8).get<std::size_t>(), r.at(9).get<double>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------------ embedding file

namespace {

constexpr char kMagic[4] = {'A', 'S', 'T', 'E'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 * 4;

template <typename U>
void put(std::string& buf, U v) {
  for (std::size_t k = 0; k < sizeof(U); ++k) buf.push_back(static_cast<char>((v >> (8 * k)) & 0xffU));
}

template <typename U>
U get(const std::string& buf, std::size_t& pos) {
  U v = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k) {
    v |= static_cast<U>(static_cast<unsigned char>(buf[pos + k])) << (8 * k);
  }
  pos += sizeof(U);
  return v;
}

std::uint64_t payload_checksum(const EmbeddingHeader& h, std::span<const double> data) {
  std::string dims;
  put(dims, h.regions);
  put(dims, h.dim);
  put(dims, h.config_hash);
  return fnv1a64(data, fnv1a64(dims));
}

}  // namespace

void export_embeddings(const Tensor& embeddings, std::uint64_t config_hash,
                       const std::filesystem::path& path) {
  EmbeddingHeader h;
  h.regions = embeddings.rows();
  h.dim = embeddings.cols();
  h.config_hash = config_hash;
  h.checksum = payload_checksum(h, embeddings.data());

  std::string buf(kMagic, 4);
  put(buf, h.version);
  put(buf, h.regions);
  put(buf, h.dim);
  put(buf, h.config_hash);
  put(buf, h.checksum);
  for (double v : embeddings.data()) put(buf, std::bit_cast<std::uint64_t>(v));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embeddings " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing embeddings " + path.string());
}

void export_embeddings(const TrainedModel& model, std::uint64_t config_hash,
                       const std::filesystem::path& path) {
  export_embeddings(region_embeddings(model), config_hash, path);
}

EmbeddingFile load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read embeddings " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < kHeaderBytes || buf.compare(0, 4, kMagic, 4) != 0) {
    throw IoError(path.string() + " is not an embedding file");
  }
  EmbeddingFile f;
  std::size_t pos = 4;
  f.header.version = get<std::uint32_t>(buf, pos);
  f.header.regions = get<std::uint64_t>(buf, pos);
  f.header.dim = get<std::uint64_t>(buf, pos);
  f.header.config_hash = get<std::uint64_t>(buf, pos);
  f.header.checksum = get<std::uint64_t>(buf, pos);
  if (f.header.version != kEmbeddingFormatVersion) {
    throw IoError(path.string() + ": unsupported embedding format version " +
                  std::to_string(f.header.version));
  }
  const std::uint64_t count = f.header.regions * f.header.dim;
  if (f.header.dim != 0 && count / f.header.dim != f.header.regions) {
    throw ChecksumError(path.string() + ": corrupted header");
  }
  if ((buf.size() - kHeaderBytes) / 8 != count || (buf.size() - kHeaderBytes) % 8 != 0) {
    throw ChecksumError(path.string() + ": payload size does not match " +
                        std::to_string(f.header.regions) + "x" + std::to_string(f.header.dim));
  }
  Tensor t(f.header.regions, f.header.dim);
  for (double& v : t.data()) v = std::bit_cast<double>(get<std::uint64_t>(buf, pos));
  if (payload_checksum(f.header, t.data()) != f.header.checksum) {
    throw ChecksumError(path.string() + ": checksum mismatch");
  }
  f.embeddings = std::move(t);
  return f;
}

}  // namespace autost
