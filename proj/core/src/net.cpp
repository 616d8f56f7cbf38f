#include "gesticulate/net.hpp"

#include <cmath>

#include "gesticulate/errors.hpp"
#include "gesticulate/rng.hpp"

namespace gesticulate {

namespace {

void check_finite(const Eigen::MatrixXd& m, const char* where) {
  if (!m.allFinite()) throw NumericError(std::string(where) + " produced non-finite values");
}

// Inverted-dropout mask: entries are 0 or 1/(1-rate).  Drawn in storage
// order so streams are reproducible.
Eigen::MatrixXd draw_dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                                  std::mt19937_64& rng) {
  Eigen::MatrixXd mask(rows, cols);
  const double scale = 1.0 / (1.0 - rate);
  double* data = mask.data();
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    data[i] = rand_unit(rng) < rate ? 0.0 : scale;
  return mask;
}

void fill_uniform(Eigen::MatrixXd& m, double limit, std::mt19937_64& rng) {
  double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = rand_range(rng, -limit, limit);
}

Eigen::MatrixXd colsum(const Eigen::MatrixXd& m) { return m.rowwise().sum(); }

}  // namespace

void NetConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string("NetConfig: ") + name + " must be positive");
  };
  positive(audio_dim, "audio_dim");
  positive(text_dim, "text_dim");
  positive(frame_encoding_dim, "frame_encoding_dim");
  positive(window_future, "window_future");
  positive(output_dim, "output_dim");
  positive(pose_context, "pose_context");
  positive(conditioning_dim, "conditioning_dim");
  if (window_past < 0) throw ConfigError("NetConfig: window_past must be non-negative");
  if (trunk_widths.empty()) throw ConfigError("NetConfig: need at least one hidden layer");
  for (int w : trunk_widths) positive(w, "trunk width");
  if (dropout_trunk < 0 || dropout_trunk >= 1 || dropout_pose < 0 || dropout_pose >= 1)
    throw ConfigError("NetConfig: dropout rates must be in [0, 1)");
}

std::vector<Eigen::MatrixXd*> param_list(ModelWeights& w) {
  std::vector<Eigen::MatrixXd*> out = {&w.enc_w, &w.enc_b, &w.cond_w, &w.cond_b};
  for (std::size_t l = 0; l < w.alpha_w.size(); ++l) {
    out.push_back(&w.alpha_w[l]);
    out.push_back(&w.alpha_b[l]);
    out.push_back(&w.beta_w[l]);
    out.push_back(&w.beta_b[l]);
  }
  for (std::size_t l = 0; l < w.trunk_w.size(); ++l) {
    out.push_back(&w.trunk_w[l]);
    out.push_back(&w.trunk_b[l]);
  }
  return out;
}

std::vector<const Eigen::MatrixXd*> param_list(const ModelWeights& w) {
  auto mut = param_list(const_cast<ModelWeights&>(w));
  return {mut.begin(), mut.end()};
}

std::vector<std::string> param_names(const ModelWeights& w) {
  std::vector<std::string> out = {"enc_w", "enc_b", "cond_w", "cond_b"};
  for (std::size_t l = 0; l < w.alpha_w.size(); ++l) {
    out.push_back("alpha_w" + std::to_string(l));
    out.push_back("alpha_b" + std::to_string(l));
    out.push_back("beta_w" + std::to_string(l));
    out.push_back("beta_b" + std::to_string(l));
  }
  for (std::size_t l = 0; l < w.trunk_w.size(); ++l) {
    out.push_back("trunk_w" + std::to_string(l));
    out.push_back("trunk_b" + std::to_string(l));
  }
  return out;
}

ModelWeights make_weights(const NetConfig& cfg) {
  cfg.validate();
  ModelWeights w;
  w.enc_w = Eigen::MatrixXd::Zero(cfg.frame_encoding_dim, cfg.input_dim());
  w.enc_b = Eigen::MatrixXd::Zero(cfg.frame_encoding_dim, 1);
  w.cond_w = Eigen::MatrixXd::Zero(cfg.conditioning_dim, cfg.pose_input_dim());
  w.cond_b = Eigen::MatrixXd::Zero(cfg.conditioning_dim, 1);

  const std::size_t hidden = cfg.trunk_widths.size();
  w.alpha_w.resize(hidden);
  w.alpha_b.resize(hidden);
  w.beta_w.resize(hidden);
  w.beta_b.resize(hidden);
  for (std::size_t l = 0; l < hidden; ++l) {
    int width = cfg.trunk_widths[l];
    w.alpha_w[l] = Eigen::MatrixXd::Zero(width, cfg.conditioning_dim);
    w.alpha_b[l] = Eigen::MatrixXd::Zero(width, 1);
    w.beta_w[l] = Eigen::MatrixXd::Zero(width, cfg.conditioning_dim);
    w.beta_b[l] = Eigen::MatrixXd::Zero(width, 1);
  }

  w.trunk_w.resize(hidden + 1);
  w.trunk_b.resize(hidden + 1);
  int in_dim = cfg.trunk_input_dim();
  for (std::size_t l = 0; l < hidden; ++l) {
    w.trunk_w[l] = Eigen::MatrixXd::Zero(cfg.trunk_widths[l], in_dim);
    w.trunk_b[l] = Eigen::MatrixXd::Zero(cfg.trunk_widths[l], 1);
    in_dim = cfg.trunk_widths[l];
  }
  w.trunk_w[hidden] = Eigen::MatrixXd::Zero(cfg.output_dim, in_dim);
  w.trunk_b[hidden] = Eigen::MatrixXd::Zero(cfg.output_dim, 1);
  return w;
}

std::size_t param_count(const NetConfig& cfg) {
  cfg.validate();
  auto dense = [](int rows, int cols) {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(rows);
  };
  std::size_t n = dense(cfg.frame_encoding_dim, cfg.input_dim());
  n += dense(cfg.conditioning_dim, cfg.pose_input_dim());
  for (int width : cfg.trunk_widths) n += 2 * dense(width, cfg.conditioning_dim);
  int in_dim = cfg.trunk_input_dim();
  for (int width : cfg.trunk_widths) {
    n += dense(width, in_dim);
    in_dim = width;
  }
  n += dense(cfg.output_dim, in_dim);
  return n;
}

GesticulatorNet::GesticulatorNet(NetConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  w_ = make_weights(cfg_);
}

std::size_t GesticulatorNet::parameters() const {
  std::size_t n = 0;
  for (const auto* p : param_list(w_)) n += static_cast<std::size_t>(p->size());
  return n;
}

void GesticulatorNet::init_params(std::mt19937_64& rng) {
  auto params = param_list(w_);
  auto names = param_names(w_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd& p = *params[i];
    if (p.cols() == 1) {
      // Biases: zero, except FiLM scale heads which start at identity so
      // enabling modulation mid-training is a no-op.
      p.setConstant(names[i].rfind("alpha_b", 0) == 0 ? 1.0 : 0.0);
    } else {
      fill_uniform(p, 1.0 / std::sqrt(static_cast<double>(p.cols())), rng);
    }
  }
}

Eigen::MatrixXd GesticulatorNet::encode_frames(const Eigen::MatrixXd& audio,
                                               const Eigen::MatrixXd& text, const StepMode& mode,
                                               std::mt19937_64* rng, EncodeCache* cache) const {
  if (audio.rows() != cfg_.audio_dim || text.rows() != cfg_.text_dim)
    throw ShapeError("encode_frames: feature dimensions do not match the config");
  if (audio.cols() != text.cols())
    throw ShapeError("encode_frames: audio and text batch sizes differ");

  const Eigen::Index B = audio.cols();
  Eigen::MatrixXd input(cfg_.input_dim(), B);
  input.topRows(cfg_.audio_dim) =
      cfg_.use_audio ? audio : Eigen::MatrixXd::Zero(cfg_.audio_dim, B);
  input.bottomRows(cfg_.text_dim) =
      cfg_.use_text ? text : Eigen::MatrixXd::Zero(cfg_.text_dim, B);

  Eigen::MatrixXd out = ((w_.enc_w * input).colwise() + w_.enc_b.col(0)).array().tanh();
  check_finite(out, "frame encoder");

  Eigen::MatrixXd mask;
  if (mode.training && cfg_.dropout_trunk > 0) {
    if (!rng) throw ConfigError("encode_frames: training mode needs an rng");
    mask = draw_dropout_mask(out.rows(), out.cols(), cfg_.dropout_trunk, *rng);
  }
  if (cache) {
    cache->input = input;
    cache->tanh_out = out;
    cache->drop_mask = mask;
  }
  if (mask.size()) out = out.cwiseProduct(mask);
  return out;
}

void GesticulatorNet::encode_backward(const EncodeCache& cache, const Eigen::MatrixXd& d_enc,
                                      ModelWeights& grad) const {
  Eigen::MatrixXd de = cache.drop_mask.size() ? d_enc.cwiseProduct(cache.drop_mask) : d_enc;
  Eigen::MatrixXd dz =
      de.cwiseProduct((1.0 - cache.tanh_out.array().square()).matrix());
  grad.enc_w += dz * cache.input.transpose();
  grad.enc_b += colsum(dz);
}

Eigen::MatrixXd GesticulatorNet::step_forward(const Eigen::MatrixXd& window,
                                              const Eigen::MatrixXd& poses, const StepMode& mode,
                                              std::mt19937_64* rng, StepCache* cache) const {
  if (window.rows() != cfg_.concat_dim())
    throw ShapeError("step_forward: window must have " + std::to_string(cfg_.concat_dim()) +
                     " rows");
  const Eigen::Index B = window.cols();
  const bool ar = mode.autoregression && cfg_.use_autoregression;
  const bool film = ar && cfg_.use_film;
  const std::size_t hidden = cfg_.trunk_widths.size();

  if (mode.training && !rng) throw ConfigError("step_forward: training mode needs an rng");
  if (cache) {
    cache->autoregressive = ar;
    cache->window = window;
    cache->layer_in.assign(hidden + 1, {});
    cache->act.assign(hidden, {});
    cache->alpha.assign(hidden, {});
    cache->beta.assign(hidden, {});
    cache->film_out.assign(hidden, {});
    cache->drop_mask.assign(hidden, {});
  }

  Eigen::MatrixXd h;  // conditioning vector
  if (ar) {
    if (poses.rows() != cfg_.pose_input_dim() || poses.cols() != B)
      throw ShapeError("step_forward: pose context must be " +
                       std::to_string(cfg_.pose_input_dim()) + " x batch");
    Eigen::MatrixXd pose_mask;
    if (mode.training && cfg_.dropout_pose > 0)
      pose_mask = draw_dropout_mask(poses.rows(), poses.cols(), cfg_.dropout_pose, *rng);
    Eigen::MatrixXd p = pose_mask.size() ? poses.cwiseProduct(pose_mask).eval() : poses;
    h = ((w_.cond_w * p).colwise() + w_.cond_b.col(0)).array().tanh();
    check_finite(h, "pose conditioning");
    if (cache) {
      cache->poses = poses;
      cache->pose_drop_mask = pose_mask;
      cache->cond_h = h;
    }
  }

  // The conditioning slot carries h only in concatenation mode; FiLM routes
  // the signal through the per-layer heads instead.
  Eigen::MatrixXd x(cfg_.trunk_input_dim(), B);
  x.topRows(cfg_.concat_dim()) = window;
  if (ar && !cfg_.use_film)
    x.bottomRows(cfg_.conditioning_dim) = h;
  else
    x.bottomRows(cfg_.conditioning_dim).setZero();

  for (std::size_t l = 0; l < hidden; ++l) {
    if (cache) cache->layer_in[l] = x;
    Eigen::MatrixXd a =
        ((w_.trunk_w[l] * x).colwise() + w_.trunk_b[l].col(0)).array().tanh();
    check_finite(a, "trunk layer");
    Eigen::MatrixXd f;
    if (film) {
      Eigen::MatrixXd alpha = (w_.alpha_w[l] * h).colwise() + w_.alpha_b[l].col(0);
      Eigen::MatrixXd beta = (w_.beta_w[l] * h).colwise() + w_.beta_b[l].col(0);
      f = a.cwiseProduct(alpha) + beta;
      if (cache) {
        cache->alpha[l] = std::move(alpha);
        cache->beta[l] = std::move(beta);
      }
    } else {
      f = a;
    }
    Eigen::MatrixXd mask;
    if (mode.training && cfg_.dropout_trunk > 0)
      mask = draw_dropout_mask(f.rows(), f.cols(), cfg_.dropout_trunk, *rng);
    if (cache) {
      cache->act[l] = std::move(a);
      cache->film_out[l] = f;
      cache->drop_mask[l] = mask;
    }
    x = mask.size() ? f.cwiseProduct(mask).eval() : std::move(f);
  }

  if (cache) cache->layer_in[hidden] = x;
  Eigen::MatrixXd y = (w_.trunk_w[hidden] * x).colwise() + w_.trunk_b[hidden].col(0);
  check_finite(y, "output layer");
  return y;
}

void GesticulatorNet::step_backward(const StepCache& cache, const Eigen::MatrixXd& d_out,
                                    ModelWeights& grad, Eigen::MatrixXd* d_window,
                                    Eigen::MatrixXd* d_poses) const {
  const std::size_t hidden = cfg_.trunk_widths.size();
  const bool ar = cache.autoregressive;
  const bool film = ar && cfg_.use_film;
  const Eigen::Index B = cache.window.cols();

  grad.trunk_w[hidden] += d_out * cache.layer_in[hidden].transpose();
  grad.trunk_b[hidden] += colsum(d_out);
  Eigen::MatrixXd dx = w_.trunk_w[hidden].transpose() * d_out;

  Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(cfg_.conditioning_dim, B);
  for (std::size_t l = hidden; l-- > 0;) {
    Eigen::MatrixXd df =
        cache.drop_mask[l].size() ? dx.cwiseProduct(cache.drop_mask[l]).eval() : std::move(dx);
    Eigen::MatrixXd da;
    if (film) {
      da = df.cwiseProduct(cache.alpha[l]);
      Eigen::MatrixXd dalpha = df.cwiseProduct(cache.act[l]);
      grad.alpha_w[l] += dalpha * cache.cond_h.transpose();
      grad.alpha_b[l] += colsum(dalpha);
      grad.beta_w[l] += df * cache.cond_h.transpose();
      grad.beta_b[l] += colsum(df);
      dh += w_.alpha_w[l].transpose() * dalpha + w_.beta_w[l].transpose() * df;
    } else {
      da = std::move(df);
    }
    Eigen::MatrixXd dz = da.cwiseProduct((1.0 - cache.act[l].array().square()).matrix());
    grad.trunk_w[l] += dz * cache.layer_in[l].transpose();
    grad.trunk_b[l] += colsum(dz);
    dx = w_.trunk_w[l].transpose() * dz;
  }

  if (d_window) *d_window = dx.topRows(cfg_.concat_dim());

  if (ar) {
    if (!cfg_.use_film) dh += dx.bottomRows(cfg_.conditioning_dim);
    Eigen::MatrixXd dh_pre =
        dh.cwiseProduct((1.0 - cache.cond_h.array().square()).matrix());
    Eigen::MatrixXd p = cache.pose_drop_mask.size()
                            ? cache.poses.cwiseProduct(cache.pose_drop_mask).eval()
                            : cache.poses;
    grad.cond_w += dh_pre * p.transpose();
    grad.cond_b += colsum(dh_pre);
    if (d_poses) {
      Eigen::MatrixXd dp = w_.cond_w.transpose() * dh_pre;
      *d_poses = cache.pose_drop_mask.size() ? dp.cwiseProduct(cache.pose_drop_mask).eval()
                                             : std::move(dp);
    }
  } else if (d_poses) {
    *d_poses = Eigen::MatrixXd::Zero(cfg_.pose_input_dim(), B);
  }
}

Eigen::VectorXd GesticulatorNet::encode_frame(const Eigen::VectorXd& audio,
                                              const Eigen::VectorXd& text) const {
  return encode_frames(audio, text, StepMode{}, nullptr, nullptr).col(0);
}

Eigen::VectorXd GesticulatorNet::assemble_window(const Eigen::MatrixXd& encodings, int t,
                                                 const Eigen::VectorXd& pad) const {
  const int enc = cfg_.frame_encoding_dim;
  if (encodings.rows() != enc || pad.size() != enc)
    throw ShapeError("assemble_window: encoding dimension mismatch");
  const int T = static_cast<int>(encodings.cols());
  Eigen::VectorXd window(cfg_.concat_dim());
  for (int s = 0; s < cfg_.window_frames(); ++s) {
    int src = t - cfg_.window_past + s;
    window.segment(static_cast<Eigen::Index>(s) * enc, enc) =
        (src >= 0 && src < T) ? encodings.col(src) : pad;
  }
  return window;
}

}  // namespace gesticulate
