#include "gesticulate/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <deque>
#include <fstream>

#include "gesticulate/checkpoint.hpp"
#include "gesticulate/errors.hpp"
#include "gesticulate/rng.hpp"

namespace gesticulate {

double motion_loss(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred,
                   const LossConfig& cfg) {
  auto [pos, vel] = motion_loss_terms(truth, pred);
  return pos + cfg.lambda_velocity * vel;
}

std::pair<double, double> motion_loss_terms(const Eigen::MatrixXd& truth,
                                            const Eigen::MatrixXd& pred) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols())
    throw ShapeError("motion_loss: shape mismatch");
  if (truth.size() == 0) throw ShapeError("motion_loss: empty input");

  double pos = (pred - truth).squaredNorm() / static_cast<double>(truth.size());
  double vel = 0.0;
  const Eigen::Index T = truth.rows();
  if (T > 1) {
    Eigen::MatrixXd dv = (pred.bottomRows(T - 1) - pred.topRows(T - 1)) -
                         (truth.bottomRows(T - 1) - truth.topRows(T - 1));
    vel = dv.squaredNorm() / static_cast<double>(dv.size());
  }
  return {pos, vel};
}

Eigen::MatrixXd motion_loss_grad(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred,
                                 const LossConfig& cfg) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols())
    throw ShapeError("motion_loss_grad: shape mismatch");
  const Eigen::Index T = truth.rows();
  Eigen::MatrixXd grad = 2.0 * (pred - truth) / static_cast<double>(truth.size());
  if (T > 1 && cfg.lambda_velocity != 0.0) {
    Eigen::MatrixXd dv = (pred.bottomRows(T - 1) - pred.topRows(T - 1)) -
                         (truth.bottomRows(T - 1) - truth.topRows(T - 1));
    double scale = 2.0 * cfg.lambda_velocity / static_cast<double>(dv.size());
    grad.topRows(T - 1) -= scale * dv;
    grad.bottomRows(T - 1) += scale * dv;
  }
  return grad;
}

EpochPhase phase_for_epoch(int epoch, const ScheduleConfig& cfg) {
  if (epoch < 1) throw ConfigError("phase_for_epoch: epochs are 1-based");
  EpochPhase p;
  if (epoch <= cfg.pretrain_epochs) {
    p.phase = Phase::pretraining;
    p.ar_epoch = 0;
  } else {
    p.phase = Phase::autoregressive;
    p.ar_epoch = epoch - cfg.pretrain_epochs;
  }
  return p;
}

std::vector<char> teacher_forcing_mask(int ar_epoch, int core_frames) {
  if (core_frames < 0) throw ConfigError("teacher_forcing_mask: negative frame count");
  std::vector<char> mask(static_cast<std::size_t>(core_frames), 0);
  if (ar_epoch <= 1) return mask;  // first autoregressive epoch: none
  int period;
  switch (ar_epoch) {
    case 2: period = 16; break;
    case 3: period = 8; break;
    case 4: period = 4; break;
    default: period = 1; break;
  }
  for (int start = 0; start < core_frames; start += period) {
    mask[static_cast<std::size_t>(start)] = 1;
    if (start + 1 < core_frames) mask[static_cast<std::size_t>(start) + 1] = 1;
  }
  return mask;
}

AdamState make_adam_state(const NetConfig& cfg) {
  AdamState s;
  s.m = make_weights(cfg);
  s.v = make_weights(cfg);
  s.step = 0;
  return s;
}

void adam_update(ModelWeights& w, const ModelWeights& grad, AdamState& state,
                 const OptimizerConfig& cfg) {
  ++state.step;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  auto ws = param_list(w);
  auto gs = param_list(grad);
  auto ms = param_list(state.m);
  auto vs = param_list(state.v);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const Eigen::MatrixXd& g = *gs[i];
    Eigen::MatrixXd& m = *ms[i];
    Eigen::MatrixXd& v = *vs[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    ws[i]->array() -=
        cfg.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.epsilon);
  }
}

namespace {

struct HistoryEntry {
  Eigen::MatrixXd value;  // output_dim x batch
  int pred_step;          // core step that produced it, -1 for ground truth
};

struct UnrollState {
  int core = 0;
  std::vector<EncodeCache> enc_caches;          // per sequence frame
  std::vector<StepCache> step_caches;           // per core step
  std::vector<std::vector<int>> history_src;    // per step: provenance per context slot
  std::vector<Eigen::MatrixXd> preds, truths;   // per core step, out x B
};

// Runs the full unroll over a batch.  With `caches` set, everything needed
// for the backward pass is retained.
BatchStats run_unroll(const GesticulatorNet& net, const std::vector<const SequenceData*>& batch,
                      bool autoregressive, const std::vector<char>& tf_mask,
                      const LossConfig& loss_cfg, bool training, std::mt19937_64* rng,
                      UnrollState* caches) {
  const NetConfig& cfg = net.config();
  if (batch.empty()) throw ShapeError("training batch is empty");
  const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index T = batch[0]->audio.rows();
  for (const SequenceData* s : batch) {
    if (s->audio.rows() != T || s->text.rows() != T || s->pose.rows() != T)
      throw ShapeError("training batch mixes sequence lengths");
    if (s->audio.cols() != cfg.audio_dim || s->text.cols() != cfg.text_dim ||
        s->pose.cols() != cfg.output_dim)
      throw ShapeError("sequence feature dimensions do not match the net config");
  }
  const int core = static_cast<int>(T) - cfg.window_past - cfg.window_future;
  if (core < 1)
    throw ShapeError("sequences too short: " + std::to_string(T) + " frames leave no core");
  if (!tf_mask.empty() && static_cast<int>(tf_mask.size()) != core)
    throw ShapeError("teacher forcing mask does not match the core length");

  StepMode enc_mode{training, autoregressive};
  const int ctx = cfg.pose_context;
  const int out = cfg.output_dim;

  // Ground-truth pose stack per absolute frame.
  auto truth_at = [&](int frame) {
    Eigen::MatrixXd g(out, B);
    for (Eigen::Index b = 0; b < B; ++b)
      g.col(b) = batch[static_cast<std::size_t>(b)]->pose.row(frame).transpose();
    return g;
  };

  // Encode every frame of the batch up front (fixed RNG draw order).
  std::vector<Eigen::MatrixXd> encodings(static_cast<std::size_t>(T));
  if (caches) caches->enc_caches.resize(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::MatrixXd audio(cfg.audio_dim, B), text(cfg.text_dim, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      audio.col(b) = batch[static_cast<std::size_t>(b)]->audio.row(t).transpose();
      text.col(b) = batch[static_cast<std::size_t>(b)]->text.row(t).transpose();
    }
    encodings[static_cast<std::size_t>(t)] =
        net.encode_frames(audio, text, enc_mode, rng,
                          caches ? &caches->enc_caches[static_cast<std::size_t>(t)] : nullptr);
  }

  // Seed the pose history with ground truth from the past context; when the
  // context does not reach back far enough the earliest frame is repeated.
  std::deque<HistoryEntry> history;
  if (autoregressive && cfg.use_autoregression)
    for (int j = 1; j <= ctx; ++j)
      history.push_back({truth_at(std::max(cfg.window_past - j, 0)), -1});

  if (caches) {
    caches->core = core;
    caches->step_caches.resize(static_cast<std::size_t>(core));
    caches->history_src.assign(static_cast<std::size_t>(core), {});
    caches->preds.resize(static_cast<std::size_t>(core));
    caches->truths.resize(static_cast<std::size_t>(core));
  }

  const int enc = cfg.frame_encoding_dim;
  std::vector<Eigen::MatrixXd> preds(static_cast<std::size_t>(core));
  for (int k = 0; k < core; ++k) {
    Eigen::MatrixXd window(cfg.concat_dim(), B);
    for (int s = 0; s < cfg.window_frames(); ++s)
      window.middleRows(static_cast<Eigen::Index>(s) * enc, enc) =
          encodings[static_cast<std::size_t>(k + s)];

    Eigen::MatrixXd poses;
    if (autoregressive && cfg.use_autoregression) {
      poses.resize(static_cast<Eigen::Index>(ctx) * out, B);
      for (int j = 0; j < ctx; ++j)  // newest first
        poses.middleRows(static_cast<Eigen::Index>(j) * out, out) =
            history[static_cast<std::size_t>(j)].value;
      if (caches) {
        auto& src = caches->history_src[static_cast<std::size_t>(k)];
        for (int j = 0; j < ctx; ++j)
          src.push_back(history[static_cast<std::size_t>(j)].pred_step);
      }
    }

    preds[static_cast<std::size_t>(k)] = net.step_forward(
        window, poses, StepMode{training, autoregressive}, rng,
        caches ? &caches->step_caches[static_cast<std::size_t>(k)] : nullptr);

    if (autoregressive && cfg.use_autoregression) {
      bool inject = !tf_mask.empty() && tf_mask[static_cast<std::size_t>(k)];
      history.push_front(inject
                             ? HistoryEntry{truth_at(cfg.window_past + k), -1}
                             : HistoryEntry{preds[static_cast<std::size_t>(k)], k});
      history.pop_back();
    }
  }

  // Loss over the supervised core, averaged over frames, dims and batch.
  double pos_acc = 0.0, vel_acc = 0.0;
  for (int k = 0; k < core; ++k) {
    Eigen::MatrixXd truth = truth_at(cfg.window_past + k);
    pos_acc += (preds[static_cast<std::size_t>(k)] - truth).squaredNorm();
    if (caches) caches->truths[static_cast<std::size_t>(k)] = std::move(truth);
  }
  if (core > 1) {
    for (int k = 1; k < core; ++k) {
      Eigen::MatrixXd dtruth = (caches ? caches->truths[static_cast<std::size_t>(k)]
                                       : truth_at(cfg.window_past + k)) -
                               (caches ? caches->truths[static_cast<std::size_t>(k) - 1]
                                       : truth_at(cfg.window_past + k - 1));
      Eigen::MatrixXd dpred =
          preds[static_cast<std::size_t>(k)] - preds[static_cast<std::size_t>(k) - 1];
      vel_acc += (dpred - dtruth).squaredNorm();
    }
  }

  BatchStats stats;
  stats.mse_pos = pos_acc / (static_cast<double>(core) * out * B);
  stats.mse_vel = core > 1 ? vel_acc / (static_cast<double>(core - 1) * out * B) : 0.0;
  stats.loss = stats.mse_pos + loss_cfg.lambda_velocity * stats.mse_vel;

  if (caches) caches->preds = std::move(preds);
  return stats;
}

// Backpropagates the core loss through the unroll, including paths through
// fed-back predictions, filling `grad` (which must be zero-initialized).
void backward_unroll(const GesticulatorNet& net, UnrollState& st, const LossConfig& loss_cfg,
                     ModelWeights& grad) {
  const NetConfig& cfg = net.config();
  const int core = st.core;
  const Eigen::Index B = st.preds[0].cols();
  const int out = cfg.output_dim;
  const int enc = cfg.frame_encoding_dim;
  const double denom_pos = static_cast<double>(core) * out * B;
  const double denom_vel = core > 1 ? static_cast<double>(core - 1) * out * B : 1.0;

  // d(loss)/d(pred_k): position term plus velocity coupling to neighbours.
  std::vector<Eigen::MatrixXd> d_pred(static_cast<std::size_t>(core));
  for (int k = 0; k < core; ++k)
    d_pred[static_cast<std::size_t>(k)] =
        2.0 * (st.preds[static_cast<std::size_t>(k)] - st.truths[static_cast<std::size_t>(k)]) /
        denom_pos;
  if (core > 1 && loss_cfg.lambda_velocity != 0.0) {
    for (int k = 0; k < core - 1; ++k) {
      Eigen::MatrixXd d =
          (st.preds[static_cast<std::size_t>(k) + 1] - st.preds[static_cast<std::size_t>(k)]) -
          (st.truths[static_cast<std::size_t>(k) + 1] - st.truths[static_cast<std::size_t>(k)]);
      Eigen::MatrixXd term = (2.0 * loss_cfg.lambda_velocity / denom_vel) * d;
      d_pred[static_cast<std::size_t>(k) + 1] += term;
      d_pred[static_cast<std::size_t>(k)] -= term;
    }
  }

  const Eigen::Index T =
      static_cast<Eigen::Index>(core + cfg.window_past + cfg.window_future);
  std::vector<Eigen::MatrixXd> d_enc(static_cast<std::size_t>(T));

  for (int k = core - 1; k >= 0; --k) {
    Eigen::MatrixXd d_window, d_poses;
    net.step_backward(st.step_caches[static_cast<std::size_t>(k)],
                      d_pred[static_cast<std::size_t>(k)], grad, &d_window, &d_poses);

    for (int s = 0; s < cfg.window_frames(); ++s) {
      auto& slot = d_enc[static_cast<std::size_t>(k + s)];
      Eigen::MatrixXd piece = d_window.middleRows(static_cast<Eigen::Index>(s) * enc, enc);
      if (slot.size())
        slot += piece;
      else
        slot = std::move(piece);
    }

    if (!st.history_src[static_cast<std::size_t>(k)].empty()) {
      for (int j = 0; j < cfg.pose_context; ++j) {
        int src = st.history_src[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        if (src >= 0)
          d_pred[static_cast<std::size_t>(src)] +=
              d_poses.middleRows(static_cast<Eigen::Index>(j) * out, out);
      }
    }
  }

  for (Eigen::Index t = 0; t < T; ++t)
    if (d_enc[static_cast<std::size_t>(t)].size())
      net.encode_backward(st.enc_caches[static_cast<std::size_t>(t)],
                          d_enc[static_cast<std::size_t>(t)], grad);
}

}  // namespace

BatchStats train_batch(GesticulatorNet& net, const std::vector<const SequenceData*>& batch,
                       bool autoregressive, const std::vector<char>& tf_mask, AdamState& adam,
                       const OptimizerConfig& opt, const LossConfig& loss, std::mt19937_64& rng) {
  UnrollState st;
  BatchStats stats = run_unroll(net, batch, autoregressive, tf_mask, loss, true, &rng, &st);
  ModelWeights grad = make_weights(net.config());
  backward_unroll(net, st, loss, grad);
  adam_update(net.weights(), grad, adam, opt);
  return stats;
}

BatchStats evaluate_batch(const GesticulatorNet& net,
                          const std::vector<const SequenceData*>& batch, bool autoregressive,
                          const std::vector<char>& tf_mask, const LossConfig& loss) {
  return run_unroll(net, batch, autoregressive, tf_mask, loss, false, nullptr, nullptr);
}

ModelWeights batch_gradient(const GesticulatorNet& net,
                            const std::vector<const SequenceData*>& batch, bool autoregressive,
                            const std::vector<char>& tf_mask, const LossConfig& loss,
                            BatchStats* stats) {
  UnrollState st;
  BatchStats s = run_unroll(net, batch, autoregressive, tf_mask, loss, false, nullptr, &st);
  if (stats) *stats = s;
  ModelWeights grad = make_weights(net.config());
  backward_unroll(net, st, loss, grad);
  return grad;
}

std::vector<std::string> variant_names() {
  return {"full",    "no_pca",           "no_audio",          "no_text",
          "no_film", "no_velocity_loss", "no_autoregression"};
}

void apply_variant(const std::string& name, NetConfig& net, LossConfig& loss) {
  if (name == "full") return;
  if (name == "no_pca") { net.use_pca = false; return; }
  if (name == "no_audio") { net.use_audio = false; return; }
  if (name == "no_text") { net.use_text = false; return; }
  if (name == "no_film") { net.use_film = false; return; }
  if (name == "no_velocity_loss") { loss.lambda_velocity = 0.0; return; }
  if (name == "no_autoregression") { net.use_autoregression = false; return; }
  std::string known;
  for (const auto& v : variant_names()) known += (known.empty() ? "" : ", ") + v;
  throw ConfigError("unknown variant '" + name + "' (known: " + known + ")");
}

SequenceData slice_sequence(const Eigen::MatrixXd& audio, const Eigen::MatrixXd& text,
                            const Eigen::MatrixXd& pose, int start) {
  if (start < 0 || start + kSequenceFrames > audio.rows() ||
      audio.rows() != text.rows() || audio.rows() != pose.rows())
    throw ShapeError("slice_sequence: window [" + std::to_string(start) + ", " +
                     std::to_string(start + kSequenceFrames) + ") out of range");
  SequenceData s;
  s.audio = audio.middleRows(start, kSequenceFrames);
  s.text = text.middleRows(start, kSequenceFrames);
  s.pose = pose.middleRows(start, kSequenceFrames);
  return s;
}

Checkpoint train_model(const TrainRun& run, const std::vector<SequenceData>& data,
                       const Checkpoint* resume,
                       std::vector<EpochStats>* history) {
  run.net.validate();
  if (data.empty()) throw ConfigError("train_model: no training sequences");

  GesticulatorNet net(run.net);
  std::mt19937_64 rng(run.seed);
  AdamState adam = make_adam_state(run.net);
  int start_epoch = 1;

  if (resume) {
    const Checkpoint& c = *resume;
    if (param_count(c.net) != param_count(run.net) || c.net.output_dim != run.net.output_dim)
      throw ConfigError("resume checkpoint does not match the requested architecture");
    net.weights() = c.weights;
    adam.m = c.adam_m;
    adam.v = c.adam_v;
    adam.step = c.adam_step;
    rng = rng_state_from_string(c.rng_state);
    start_epoch = c.epoch + 1;
  } else {
    net.init_params(rng);
  }

  std::filesystem::create_directories(run.out_dir);
  const std::filesystem::path log_path = run.out_dir / "training_log.csv";
  std::ofstream log;
  if (resume && std::filesystem::exists(log_path)) {
    log.open(log_path, std::ios::app);
  } else {
    log.open(log_path);
    log << "epoch,loss,mse_pos,mse_vel,seconds\n";
  }
  if (!log) throw IoError("cannot write " + log_path.string());

  const int core =
      static_cast<int>(data[0].audio.rows()) - run.net.window_past - run.net.window_future;

  auto snapshot = [&](int epoch) {
    Checkpoint c;
    c.net = run.net;
    c.opt = run.opt;
    c.loss = run.loss;
    c.sched = run.sched;
    c.seed = resume ? resume->seed : run.seed;
    c.epoch = epoch;
    c.adam_step = adam.step;
    c.rng_state = rng_state_to_string(rng);
    c.pca_hash = run.pca_hash;
    c.variant = run.variant;
    c.weights = net.weights();
    c.adam_m = adam.m;
    c.adam_v = adam.v;
    c.pca = run.pca;
    c.mean_pose = run.mean_pose;
    c.filler_vector = run.filler_vector;
    return c;
  };

  std::filesystem::path last_good = "(none)";
  std::vector<std::size_t> order(data.size());

  Checkpoint out;
  for (int epoch = start_epoch; epoch <= run.sched.total_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    EpochPhase phase = phase_for_epoch(epoch, run.sched);
    const bool ar = phase.phase == Phase::autoregressive;
    std::vector<char> mask =
        ar ? teacher_forcing_mask(phase.ar_epoch, core) : std::vector<char>{};
    // Shuffle from identity each epoch so the order is a pure function of
    // the RNG state entering the epoch; resumed runs then replay it.
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    // Fisher-Yates from the run RNG keeps resumed runs on the same stream.
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

    BatchStats epoch_stats;
    std::size_t seen = 0;
    for (std::size_t pos = 0; pos < order.size();
         pos += static_cast<std::size_t>(run.opt.batch_size)) {
      std::vector<const SequenceData*> batch;
      for (std::size_t i = pos;
           i < std::min(order.size(), pos + static_cast<std::size_t>(run.opt.batch_size)); ++i)
        batch.push_back(&data[order[i]]);
      BatchStats s = train_batch(net, batch, ar, mask, adam, run.opt, run.loss, rng);
      double w = static_cast<double>(batch.size());
      epoch_stats.loss += s.loss * w;
      epoch_stats.mse_pos += s.mse_pos * w;
      epoch_stats.mse_vel += s.mse_vel * w;
      seen += batch.size();
    }
    epoch_stats.loss /= static_cast<double>(seen);
    epoch_stats.mse_pos /= static_cast<double>(seen);
    epoch_stats.mse_vel /= static_cast<double>(seen);

    if (!std::isfinite(epoch_stats.loss))
      throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                         "; last good checkpoint: " + last_good.string());

    double seconds = 0.0;
    if (run.timing)
      seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    char line[160];
    std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.10g,%.3f\n", epoch, epoch_stats.loss,
                  epoch_stats.mse_pos, epoch_stats.mse_vel, seconds);
    log << line;
    log.flush();

    if (history) history->push_back({epoch, epoch_stats, seconds});

    if (epoch % run.checkpoint_every == 0 || epoch == run.sched.total_epochs) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%04d.ckpt", epoch);
      std::filesystem::path p = run.out_dir / name;
      out = snapshot(epoch);
      save_checkpoint(p, out);
      last_good = p;
    }
  }

  if (out.epoch == 0) out = snapshot(start_epoch - 1);  // nothing to do: already trained
  save_checkpoint(run.out_dir / "final.ckpt", out);
  return out;
}

}  // namespace gesticulate
