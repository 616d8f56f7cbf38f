#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "gesticulate/checkpoint.hpp"
#include "gesticulate/errors.hpp"
#include "gesticulate/rng.hpp"
#include "synthetic.hpp"

using namespace gesticulate;
using testsupport::TempDir;
using testsupport::files_equal;

namespace {

NetConfig odd_config() {
  NetConfig cfg;
  cfg.audio_dim = 4;
  cfg.text_dim = 5;
  cfg.frame_encoding_dim = 6;
  cfg.window_past = 1;
  cfg.window_future = 2;
  cfg.trunk_widths = {7, 5};
  cfg.output_dim = 3;
  cfg.pose_context = 2;
  cfg.conditioning_dim = 4;
  cfg.dropout_trunk = 0.15;
  cfg.dropout_pose = 0.6;
  cfg.use_text = false;
  cfg.use_pca = true;
  return cfg;
}

void fill_weights(ModelWeights& w, unsigned seed) {
  std::mt19937_64 rng(seed);
  for (auto* p : param_list(w))
    for (Eigen::Index i = 0; i < p->size(); ++i) (*p)(i) = rand_range(rng, -2.0, 2.0);
}

bool weights_bitwise_equal(const ModelWeights& a, const ModelWeights& b) {
  auto pa = param_list(a);
  auto pb = param_list(b);
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i]->rows() != pb[i]->rows() || pa[i]->cols() != pb[i]->cols()) return false;
    if (std::memcmp(pa[i]->data(), pb[i]->data(),
                    static_cast<std::size_t>(pa[i]->size()) * sizeof(double)) != 0)
      return false;
  }
  return true;
}

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.net = odd_config();
  c.opt.learning_rate = 3e-4;
  c.opt.beta1 = 0.88;
  c.opt.beta2 = 0.997;
  c.opt.epsilon = 1e-9;
  c.opt.batch_size = 17;
  c.loss.lambda_velocity = 0.35;
  c.sched.total_epochs = 42;
  c.sched.pretrain_epochs = 5;
  c.seed = 0xDEADBEEFCAFEull;
  c.epoch = 13;
  c.adam_step = 2047;
  c.pca_hash = 0x123456789ABCDEFull;
  c.variant = "no_text";

  std::mt19937_64 rng(321);
  for (int i = 0; i < 1000; ++i) rng();
  c.rng_state = rng_state_to_string(rng);

  c.weights = make_weights(c.net);
  c.adam_m = make_weights(c.net);
  c.adam_v = make_weights(c.net);
  fill_weights(c.weights, 1);
  fill_weights(c.adam_m, 2);
  fill_weights(c.adam_v, 3);

  PcaSpace pca;
  pca.mean = Eigen::VectorXd::LinSpaced(9, -0.4, 0.4);
  pca.components = Eigen::MatrixXd::Zero(3, 9);
  pca.components(0, 0) = 1.0;
  pca.components(1, 3) = 1.0;
  pca.components(2, 7) = 1.0;
  pca.explained_variance_ratio.resize(3);
  pca.explained_variance_ratio << 0.6, 0.3, 0.05;
  c.pca = pca;

  c.mean_pose = Eigen::VectorXd::LinSpaced(9, 0.0, 8.0);
  c.filler_vector = Eigen::VectorXd::LinSpaced(768, -1.0, 1.0);
  return c;
}

}  // namespace

TEST_CASE("checkpoint round trip restores every field bitwise") {
  TempDir tmp("ckpt");
  auto path = tmp.path() / "model.ckpt";
  Checkpoint c = sample_checkpoint();
  save_checkpoint(path, c);
  Checkpoint r = load_checkpoint(path);

  CHECK(r.net.audio_dim == c.net.audio_dim);
  CHECK(r.net.text_dim == c.net.text_dim);
  CHECK(r.net.frame_encoding_dim == c.net.frame_encoding_dim);
  CHECK(r.net.window_past == c.net.window_past);
  CHECK(r.net.window_future == c.net.window_future);
  CHECK(r.net.trunk_widths == c.net.trunk_widths);
  CHECK(r.net.output_dim == c.net.output_dim);
  CHECK(r.net.pose_context == c.net.pose_context);
  CHECK(r.net.conditioning_dim == c.net.conditioning_dim);
  CHECK(r.net.dropout_trunk == c.net.dropout_trunk);
  CHECK(r.net.dropout_pose == c.net.dropout_pose);
  CHECK(r.net.use_audio == c.net.use_audio);
  CHECK(r.net.use_text == c.net.use_text);
  CHECK(r.net.use_film == c.net.use_film);
  CHECK(r.net.use_autoregression == c.net.use_autoregression);
  CHECK(r.net.use_pca == c.net.use_pca);

  CHECK(r.opt.learning_rate == c.opt.learning_rate);
  CHECK(r.opt.beta1 == c.opt.beta1);
  CHECK(r.opt.beta2 == c.opt.beta2);
  CHECK(r.opt.epsilon == c.opt.epsilon);
  CHECK(r.opt.batch_size == c.opt.batch_size);
  CHECK(r.loss.lambda_velocity == c.loss.lambda_velocity);
  CHECK(r.sched.total_epochs == c.sched.total_epochs);
  CHECK(r.sched.pretrain_epochs == c.sched.pretrain_epochs);

  CHECK(r.seed == c.seed);
  CHECK(r.epoch == c.epoch);
  CHECK(r.adam_step == c.adam_step);
  CHECK(r.rng_state == c.rng_state);
  CHECK(r.pca_hash == c.pca_hash);
  CHECK(r.variant == c.variant);

  CHECK(weights_bitwise_equal(r.weights, c.weights));
  CHECK(weights_bitwise_equal(r.adam_m, c.adam_m));
  CHECK(weights_bitwise_equal(r.adam_v, c.adam_v));

  REQUIRE(r.pca.has_value());
  CHECK((r.pca->mean.array() == c.pca->mean.array()).all());
  CHECK((r.pca->components.array() == c.pca->components.array()).all());
  CHECK((r.pca->explained_variance_ratio.array() ==
         c.pca->explained_variance_ratio.array())
            .all());
  CHECK((r.mean_pose.array() == c.mean_pose.array()).all());
  CHECK((r.filler_vector.array() == c.filler_vector.array()).all());

  // The restored rng state replays the stream the original would produce.
  std::mt19937_64 a = rng_state_from_string(c.rng_state);
  std::mt19937_64 b = rng_state_from_string(r.rng_state);
  for (int i = 0; i < 20; ++i) CHECK(a() == b());
}

TEST_CASE("checkpoint without a pca space loads with pca absent") {
  TempDir tmp("ckpt");
  auto path = tmp.path() / "plain.ckpt";
  Checkpoint c = sample_checkpoint();
  c.net.use_pca = false;
  c.pca.reset();
  save_checkpoint(path, c);
  auto r = load_checkpoint(path);
  CHECK_FALSE(r.pca.has_value());
  CHECK(weights_bitwise_equal(r.weights, c.weights));
}

TEST_CASE("saving twice produces identical bytes") {
  TempDir tmp("ckpt");
  auto p1 = tmp.path() / "a.ckpt";
  auto p2 = tmp.path() / "b.ckpt";
  Checkpoint c = sample_checkpoint();
  save_checkpoint(p1, c);
  save_checkpoint(p2, c);
  CHECK(files_equal(p1, p2));
}

TEST_CASE("corrupt checkpoint files are rejected") {
  TempDir tmp("ckpt");
  CHECK_THROWS_AS(load_checkpoint(tmp.path() / "absent.ckpt"), IoError);

  auto bad_magic = tmp.path() / "magic.ckpt";
  {
    std::ofstream out(bad_magic, std::ios::binary);
    out << "NOTACKPTxxxxxxxxxxxxxxxxxxxx";
  }
  CHECK_THROWS_AS(load_checkpoint(bad_magic), SchemaError);

  // Valid file cut short inside the parameter block.
  auto truncated = tmp.path() / "short.ckpt";
  Checkpoint c = sample_checkpoint();
  save_checkpoint(truncated, c);
  auto full_size = std::filesystem::file_size(truncated);
  std::filesystem::resize_file(truncated, full_size - 64);
  CHECK_THROWS_AS(load_checkpoint(truncated), SchemaError);

  // Magic intact but manifest bytes mangled.
  auto mangled = tmp.path() / "mangled.ckpt";
  save_checkpoint(mangled, c);
  {
    std::fstream io(mangled, std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(20);
    io.write("\xff\xfe\xfd", 3);
  }
  CHECK_THROWS_AS(load_checkpoint(mangled), SchemaError);
}

TEST_CASE("fnv1a matches the reference test vectors") {
  CHECK(fnv1a_bytes(nullptr, 0) == 0xcbf29ce484222325ull);
  CHECK(fnv1a_bytes("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a_bytes("foobar", 6) == 0x85944171f73967e8ull);
}

TEST_CASE("fnv1a_file hashes content and signals missing files with zero") {
  TempDir tmp("fnv");
  auto path = tmp.path() / "blob.bin";
  const char payload[] = "foobar";
  {
    std::ofstream out(path, std::ios::binary);
    out.write(payload, 6);
  }
  CHECK(fnv1a_file(path) == fnv1a_bytes(payload, 6));
  CHECK(fnv1a_file(tmp.path() / "missing.bin") == 0);

  // Different content, different hash.
  auto other = tmp.path() / "other.bin";
  {
    std::ofstream out(other, std::ios::binary);
    out.write("foobaz", 6);
  }
  CHECK(fnv1a_file(other) != fnv1a_file(path));
}
