#include "gesticulate/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "gesticulate/errors.hpp"

namespace gesticulate {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'G', 'S', 'T', 'C', 'K', 'P', 'T', '1'};

json net_to_json(const NetConfig& c) {
  return json{{"audio_dim", c.audio_dim},
              {"text_dim", c.text_dim},
              {"frame_encoding_dim", c.frame_encoding_dim},
              {"window_past", c.window_past},
              {"window_future", c.window_future},
              {"trunk_widths", c.trunk_widths},
              {"output_dim", c.output_dim},
              {"pose_context", c.pose_context},
              {"conditioning_dim", c.conditioning_dim},
              {"dropout_trunk", c.dropout_trunk},
              {"dropout_pose", c.dropout_pose},
              {"use_audio", c.use_audio},
              {"use_text", c.use_text},
              {"use_film", c.use_film},
              {"use_autoregression", c.use_autoregression},
              {"use_pca", c.use_pca}};
}

NetConfig net_from_json(const json& j) {
  NetConfig c;
  j.at("audio_dim").get_to(c.audio_dim);
  j.at("text_dim").get_to(c.text_dim);
  j.at("frame_encoding_dim").get_to(c.frame_encoding_dim);
  j.at("window_past").get_to(c.window_past);
  j.at("window_future").get_to(c.window_future);
  j.at("trunk_widths").get_to(c.trunk_widths);
  j.at("output_dim").get_to(c.output_dim);
  j.at("pose_context").get_to(c.pose_context);
  j.at("conditioning_dim").get_to(c.conditioning_dim);
  j.at("dropout_trunk").get_to(c.dropout_trunk);
  j.at("dropout_pose").get_to(c.dropout_pose);
  j.at("use_audio").get_to(c.use_audio);
  j.at("use_text").get_to(c.use_text);
  j.at("use_film").get_to(c.use_film);
  j.at("use_autoregression").get_to(c.use_autoregression);
  j.at("use_pca").get_to(c.use_pca);
  return c;
}

void write_doubles(std::ostream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, std::size_t n) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw SchemaError("checkpoint: truncated parameter data");
}

void write_weights(std::ostream& out, const ModelWeights& w) {
  for (const auto* p : param_list(w)) write_doubles(out, p->data(), static_cast<std::size_t>(p->size()));
}

void read_weights(std::istream& in, ModelWeights& w) {
  for (auto* p : param_list(w)) read_doubles(in, p->data(), static_cast<std::size_t>(p->size()));
}

}  // namespace

std::uint64_t fnv1a_bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a_bytes(bytes.data(), bytes.size());
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json manifest;
  manifest["net"] = net_to_json(ckpt.net);
  manifest["optimizer"] = {{"learning_rate", ckpt.opt.learning_rate},
                           {"beta1", ckpt.opt.beta1},
                           {"beta2", ckpt.opt.beta2},
                           {"epsilon", ckpt.opt.epsilon},
                           {"batch_size", ckpt.opt.batch_size}};
  manifest["loss"] = {{"lambda_velocity", ckpt.loss.lambda_velocity}};
  manifest["schedule"] = {{"total_epochs", ckpt.sched.total_epochs},
                          {"pretrain_epochs", ckpt.sched.pretrain_epochs}};
  manifest["seed"] = ckpt.seed;
  manifest["epoch"] = ckpt.epoch;
  manifest["adam_step"] = ckpt.adam_step;
  manifest["rng_state"] = ckpt.rng_state;
  manifest["pca_hash"] = ckpt.pca_hash;
  manifest["variant"] = ckpt.variant;
  manifest["mean_pose_dim"] = ckpt.mean_pose.size();
  manifest["filler_dim"] = ckpt.filler_vector.size();
  if (ckpt.pca)
    manifest["pca"] = {{"components", ckpt.pca->components.rows()},
                       {"dim", ckpt.pca->components.cols()}};

  std::string mstr = manifest.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  std::uint64_t len = mstr.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));

  write_weights(out, ckpt.weights);
  write_weights(out, ckpt.adam_m);
  write_weights(out, ckpt.adam_v);
  write_doubles(out, ckpt.mean_pose.data(), static_cast<std::size_t>(ckpt.mean_pose.size()));
  write_doubles(out, ckpt.filler_vector.data(),
                static_cast<std::size_t>(ckpt.filler_vector.size()));
  if (ckpt.pca) {
    write_doubles(out, ckpt.pca->mean.data(), static_cast<std::size_t>(ckpt.pca->mean.size()));
    write_doubles(out, ckpt.pca->components.data(),
                  static_cast<std::size_t>(ckpt.pca->components.size()));
    write_doubles(out, ckpt.pca->explained_variance_ratio.data(),
                  static_cast<std::size_t>(ckpt.pca->explained_variance_ratio.size()));
  }
  if (!out) throw IoError("short write to checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw SchemaError(path.string() + ": not a checkpoint file");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string mstr(len, '\0');
  in.read(mstr.data(), static_cast<std::streamsize>(len));
  if (!in) throw SchemaError(path.string() + ": truncated manifest");

  json manifest;
  try {
    manifest = json::parse(mstr);
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": bad manifest: " + e.what());
  }

  Checkpoint ckpt;
  ckpt.net = net_from_json(manifest.at("net"));
  const json& opt = manifest.at("optimizer");
  opt.at("learning_rate").get_to(ckpt.opt.learning_rate);
  opt.at("beta1").get_to(ckpt.opt.beta1);
  opt.at("beta2").get_to(ckpt.opt.beta2);
  opt.at("epsilon").get_to(ckpt.opt.epsilon);
  opt.at("batch_size").get_to(ckpt.opt.batch_size);
  manifest.at("loss").at("lambda_velocity").get_to(ckpt.loss.lambda_velocity);
  manifest.at("schedule").at("total_epochs").get_to(ckpt.sched.total_epochs);
  manifest.at("schedule").at("pretrain_epochs").get_to(ckpt.sched.pretrain_epochs);
  manifest.at("seed").get_to(ckpt.seed);
  manifest.at("epoch").get_to(ckpt.epoch);
  manifest.at("adam_step").get_to(ckpt.adam_step);
  manifest.at("rng_state").get_to(ckpt.rng_state);
  manifest.at("pca_hash").get_to(ckpt.pca_hash);
  manifest.at("variant").get_to(ckpt.variant);

  ckpt.weights = make_weights(ckpt.net);
  ckpt.adam_m = make_weights(ckpt.net);
  ckpt.adam_v = make_weights(ckpt.net);
  read_weights(in, ckpt.weights);
  read_weights(in, ckpt.adam_m);
  read_weights(in, ckpt.adam_v);

  ckpt.mean_pose.resize(manifest.at("mean_pose_dim").get<Eigen::Index>());
  read_doubles(in, ckpt.mean_pose.data(), static_cast<std::size_t>(ckpt.mean_pose.size()));
  ckpt.filler_vector.resize(manifest.at("filler_dim").get<Eigen::Index>());
  read_doubles(in, ckpt.filler_vector.data(),
               static_cast<std::size_t>(ckpt.filler_vector.size()));

  if (manifest.contains("pca")) {
    PcaSpace pca;
    auto k = manifest.at("pca").at("components").get<Eigen::Index>();
    auto d = manifest.at("pca").at("dim").get<Eigen::Index>();
    pca.mean.resize(d);
    pca.components.resize(k, d);
    pca.explained_variance_ratio.resize(k);
    read_doubles(in, pca.mean.data(), static_cast<std::size_t>(d));
    read_doubles(in, pca.components.data(), static_cast<std::size_t>(k * d));
    read_doubles(in, pca.explained_variance_ratio.data(), static_cast<std::size_t>(k));
    ckpt.pca = std::move(pca);
  }
  return ckpt;
}

}  // namespace gesticulate
