#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

namespace gesticulate {

// Architecture of the gesture generator.  Ablation flags never change
// parameter shapes: disabled inputs are zero-filled and the conditioning
// slot in the trunk input is always allocated, so checkpoints stay
// compatible across variants.
struct NetConfig {
  int audio_dim = 64;
  int text_dim = 773;
  int frame_encoding_dim = 124;
  int window_past = 10;
  int window_future = 20;
  std::vector<int> trunk_widths = {612, 256};  // hidden layer sizes
  int output_dim = 12;                         // 12 in PCA space, 45 raw
  int pose_context = 3;
  int conditioning_dim = 512;
  double dropout_trunk = 0.2;
  double dropout_pose = 0.8;

  bool use_audio = true;
  bool use_text = true;
  bool use_film = true;          // false: conditioning concatenated instead
  bool use_autoregression = true;
  bool use_pca = true;

  // The window spans [t - window_past, t + window_future - 1]: the future
  // block includes the current frame, giving 10 + 20 = 30 frames total.
  int window_frames() const { return window_past + window_future; }
  int concat_dim() const { return window_frames() * frame_encoding_dim; }
  int input_dim() const { return audio_dim + text_dim; }
  // Conditioning slot is always present; zero when FiLM carries the signal.
  int trunk_input_dim() const { return concat_dim() + conditioning_dim; }
  int pose_input_dim() const { return pose_context * output_dim; }

  void validate() const;  // throws ConfigError
};

// Every parameter is a MatrixXd (biases are n x 1) so optimizer state and
// serialization can treat them uniformly.
struct ModelWeights {
  Eigen::MatrixXd enc_w, enc_b;                      // frame encoder
  std::vector<Eigen::MatrixXd> trunk_w, trunk_b;     // hidden layers + output
  Eigen::MatrixXd cond_w, cond_b;                    // pose-context encoder
  std::vector<Eigen::MatrixXd> alpha_w, alpha_b;     // FiLM scale heads
  std::vector<Eigen::MatrixXd> beta_w, beta_b;       // FiLM shift heads
};

// Fixed traversal order shared by init, Adam, checkpoints and grad checks.
std::vector<Eigen::MatrixXd*> param_list(ModelWeights& w);
std::vector<const Eigen::MatrixXd*> param_list(const ModelWeights& w);
std::vector<std::string> param_names(const ModelWeights& w);

ModelWeights make_weights(const NetConfig& cfg);        // zero-initialized
std::size_t param_count(const NetConfig& cfg);          // pure in the config

// Forward-pass caches holding what the manual backward pass needs.
struct EncodeCache {
  Eigen::MatrixXd input;      // (audio+text) x batch, disabled blocks zeroed
  Eigen::MatrixXd tanh_out;   // before dropout
  Eigen::MatrixXd drop_mask;  // inverted-dropout scale, empty in eval mode
};

struct StepCache {
  bool autoregressive = false;
  Eigen::MatrixXd window;                      // concat_dim x batch
  Eigen::MatrixXd poses;                       // pose_input_dim x batch
  Eigen::MatrixXd pose_drop_mask;
  Eigen::MatrixXd cond_h;                      // tanh conditioning vector
  std::vector<Eigen::MatrixXd> layer_in;       // input to each trunk linear
  std::vector<Eigen::MatrixXd> act;            // tanh outputs
  std::vector<Eigen::MatrixXd> alpha, beta;    // FiLM coefficients
  std::vector<Eigen::MatrixXd> film_out;       // act .* alpha + beta
  std::vector<Eigen::MatrixXd> drop_mask;
};

struct StepMode {
  bool training = false;        // enables dropout (needs rng)
  bool autoregression = true;   // false during non-autoregressive pretraining
};

class GesticulatorNet {
public:
  explicit GesticulatorNet(NetConfig cfg);

  const NetConfig& config() const { return cfg_; }
  ModelWeights& weights() { return w_; }
  const ModelWeights& weights() const { return w_; }
  std::size_t parameters() const;

  // Fan-in-scaled uniform weights; FiLM scale-head biases start at one so
  // freshly enabled modulation is the identity.
  void init_params(std::mt19937_64& rng);

  // Columns are batch samples throughout.
  Eigen::MatrixXd encode_frames(const Eigen::MatrixXd& audio, const Eigen::MatrixXd& text,
                                const StepMode& mode, std::mt19937_64* rng,
                                EncodeCache* cache = nullptr) const;
  void encode_backward(const EncodeCache& cache, const Eigen::MatrixXd& d_enc,
                       ModelWeights& grad) const;

  // One generation step: sliding window of frame encodings plus the
  // pose-context vector (ignored when autoregression is off).
  Eigen::MatrixXd step_forward(const Eigen::MatrixXd& window, const Eigen::MatrixXd& poses,
                               const StepMode& mode, std::mt19937_64* rng,
                               StepCache* cache = nullptr) const;
  void step_backward(const StepCache& cache, const Eigen::MatrixXd& d_out, ModelWeights& grad,
                     Eigen::MatrixXd* d_window, Eigen::MatrixXd* d_poses) const;

  // Single-frame conveniences (eval mode).
  Eigen::VectorXd encode_frame(const Eigen::VectorXd& audio, const Eigen::VectorXd& text) const;

  // Stacks encodings [t - past .. t + future] (columns of `encodings`,
  // one per frame) into one window vector, substituting `pad` outside
  // [0, T).
  Eigen::VectorXd assemble_window(const Eigen::MatrixXd& encodings, int t,
                                  const Eigen::VectorXd& pad) const;

private:
  NetConfig cfg_;
  ModelWeights w_;
};

}  // namespace gesticulate
