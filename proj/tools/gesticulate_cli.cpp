// Command-line front end: preprocess, train, generate, evaluate, embed and
// feature dumps, wired to the gesticulate core library.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gesticulate/array_io.hpp"
#include "gesticulate/audio_features.hpp"
#include "gesticulate/checkpoint.hpp"
#include "gesticulate/config.hpp"
#include "gesticulate/corpus.hpp"
#include "gesticulate/errors.hpp"
#include "gesticulate/evaluation.hpp"
#include "gesticulate/inference.hpp"
#include "gesticulate/motion.hpp"
#include "gesticulate/net.hpp"
#include "gesticulate/pca.hpp"
#include "gesticulate/text_features.hpp"
#include "gesticulate/training.hpp"
#include "gesticulate/transcript.hpp"
#include "gesticulate/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gesticulate;

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads.  Exceptions are
// rethrown on the caller thread.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min<int>(jobs, static_cast<int>(n)); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

fs::path default_cache_dir() {
  if (const char* env = std::getenv("GESTICULATE_CACHE")) return env;
  return "cache";
}

std::set<std::string> parse_id_list(const std::string& csv) {
  std::set<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

std::vector<std::string> parse_name_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Shells out for embeddings: sentences go to the command's stdin (one word
// per line, blank line between sentences), raw float32 rows come back.
class ExecEmbeddingProvider : public EmbeddingProvider {
public:
  explicit ExecEmbeddingProvider(std::string command) : command_(std::move(command)) {}

  std::vector<Eigen::VectorXd> embed_sentence(const std::vector<std::string>& words) override {
    fs::path in_path = fs::temp_directory_path() / "gesticulate_embed_in.txt";
    fs::path out_path = fs::temp_directory_path() / "gesticulate_embed_out.bin";
    {
      std::ofstream out(in_path);
      for (const auto& w : words) out << w << "\n";
    }
    std::string cmd = command_ + " < " + in_path.string() + " > " + out_path.string();
    if (std::system(cmd.c_str()) != 0)
      throw FeatureError("embedding command failed: " + command_);

    std::ifstream in(out_path, std::ios::binary | std::ios::ate);
    auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != words.size() * kEmbeddingDim * sizeof(float))
      throw FeatureError("embedding command returned " + std::to_string(bytes) +
                         " bytes, expected " +
                         std::to_string(words.size() * kEmbeddingDim * sizeof(float)));
    in.seekg(0);
    std::vector<float> buf(words.size() * kEmbeddingDim);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));

    std::vector<Eigen::VectorXd> out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      Eigen::VectorXd v(kEmbeddingDim);
      for (int d = 0; d < kEmbeddingDim; ++d) v[d] = buf[i * kEmbeddingDim + static_cast<std::size_t>(d)];
      out.push_back(std::move(v));
    }
    return out;
  }

private:
  std::string command_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& embeddings_file,
                                                 const std::string& exec_cmd,
                                                 std::uint64_t seed) {
  if (!embeddings_file.empty()) return std::make_unique<FileEmbeddingProvider>(embeddings_file);
  if (!exec_cmd.empty()) return std::make_unique<ExecEmbeddingProvider>(exec_cmd);
  return std::make_unique<HashEmbeddingProvider>(seed);
}

void ensure_parent(const fs::path& out_path) {
  fs::path parent = out_path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

struct RecordingFiles {
  std::string id;
  fs::path audio, transcript, motion, embeddings;  // embeddings may be empty
};

std::vector<RecordingFiles> discover_recordings(const fs::path& data_dir) {
  if (!fs::is_directory(data_dir)) throw IoError("data dir not found: " + data_dir.string());
  std::vector<RecordingFiles> out;
  std::vector<fs::path> wavs;
  for (const auto& entry : fs::directory_iterator(data_dir))
    if (entry.path().extension() == ".wav") wavs.push_back(entry.path());
  std::sort(wavs.begin(), wavs.end());
  for (const auto& wav : wavs) {
    RecordingFiles rf;
    rf.id = wav.stem().string();
    rf.audio = wav;
    rf.transcript = wav.parent_path() / (rf.id + ".jsonl");
    rf.motion = wav.parent_path() / (rf.id + ".bvh");
    if (!fs::exists(rf.transcript))
      throw IoError(rf.id + ": missing transcript " + rf.transcript.string());
    if (!fs::exists(rf.motion)) throw IoError(rf.id + ": missing motion " + rf.motion.string());
    fs::path emb = wav.parent_path() / (rf.id + ".emb.bin");
    if (fs::exists(emb)) rf.embeddings = emb;
    out.push_back(std::move(rf));
  }
  if (out.empty()) throw IoError("no recordings (*.wav) in " + data_dir.string());
  return out;
}

// ---------------------------------------------------------------- preprocess

int cmd_preprocess(const fs::path& data_dir, const fs::path& cache_dir,
                   const std::string& holdout_csv, std::uint64_t seed, int jobs,
                   double variance_target) {
  auto files = discover_recordings(data_dir);
  fs::create_directories(cache_dir);

  struct Item {
    RecordingFiles files;
    Recording rec;
    FeatureTrack audio;
    Eigen::MatrixXd text;
    MotionTrack motion;
    int frames = 0;
  };
  std::vector<Item> items(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) items[i].files = files[i];

  parallel_for(items.size(), jobs, [&](std::size_t i) {
    Item& it = items[i];
    it.rec = load_recording(it.files.audio, it.files.transcript, it.files.motion);
    it.audio = extract_mel(it.rec.audio.samples, it.rec.audio.sample_rate);
    it.motion = to_expmap(it.rec.motion, Skeleton::from_bvh(it.rec.motion, default_joint_names()),
                          kFrameRate);
    it.frames = std::min(it.audio.length(), it.motion.length());
  });

  std::vector<std::string> ids;
  for (const auto& it : items) ids.push_back(it.rec.id);
  DatasetSplit split = split_dataset(ids, parse_id_list(holdout_csv));
  std::set<std::string> train_ids(split.train.begin(), split.train.end());

  // Filler vector over the training split (file-provider recordings bring
  // their own, which must agree; the first one wins).
  Eigen::VectorXd filler = Eigen::VectorXd::Zero(kEmbeddingDim);
  {
    std::vector<std::vector<WordToken>> train_tokens;
    for (const auto& it : items)
      if (train_ids.count(it.rec.id)) train_tokens.push_back(it.rec.words);
    bool have_fixed = false;
    for (const auto& it : items) {
      if (it.files.embeddings.empty()) continue;
      FileEmbeddingProvider p(it.files.embeddings);
      if (auto fixed = p.fixed_filler_vector()) {
        filler = *fixed;
        have_fixed = true;
        break;
      }
    }
    if (!have_fixed) {
      HashEmbeddingProvider hash(seed);
      filler = compute_filler_vector(train_tokens, hash);
    }
  }

  parallel_for(items.size(), jobs, [&](std::size_t i) {
    Item& it = items[i];
    auto provider = it.files.embeddings.empty()
                        ? make_provider("", "", seed)
                        : make_provider(it.files.embeddings.string(), "", seed);
    it.text = extract_text_features(it.rec.words, *provider, filler, it.frames);
  });

  // Pose PCA over all training-split frames.
  Eigen::Index total = 0;
  for (const auto& it : items)
    if (train_ids.count(it.rec.id)) total += it.frames;
  if (total == 0) throw ConfigError("training split is empty");
  const Eigen::Index pose_dim = items[0].motion.frames.cols();
  Eigen::MatrixXd all_poses(total, pose_dim);
  Eigen::VectorXd mean_pose;
  {
    Eigen::Index row = 0;
    for (const auto& it : items) {
      if (!train_ids.count(it.rec.id)) continue;
      all_poses.middleRows(row, it.frames) = it.motion.frames.topRows(it.frames);
      row += it.frames;
    }
    mean_pose = all_poses.colwise().mean();
  }
  PcaSpace pca = fit_pca(all_poses, variance_target);
  save_pca(cache_dir / "pca.bin", pca);

  for (const auto& it : items) {
    ArraySidecar meta;
    meta.fps = kFrameRate;
    save_array(cache_dir / (it.rec.id + ".audio.bin"), it.audio.frames.topRows(it.frames), meta);
    save_array(cache_dir / (it.rec.id + ".text.bin"), it.text.topRows(it.frames), meta);
    save_array(cache_dir / (it.rec.id + ".motion.bin"), it.motion.frames.topRows(it.frames),
               meta);
  }

  json manifest;
  manifest["fps"] = kFrameRate;
  manifest["seed"] = seed;
  manifest["train"] = split.train;
  manifest["holdout"] = split.holdout;
  json frames = json::object();
  for (const auto& it : items) frames[it.rec.id] = it.frames;
  manifest["frames"] = frames;
  manifest["pca_hash"] = fnv1a_file(cache_dir / "pca.bin");
  manifest["filler_vector"] = std::vector<double>(filler.data(), filler.data() + filler.size());
  manifest["mean_pose"] =
      std::vector<double>(mean_pose.data(), mean_pose.data() + mean_pose.size());
  std::ofstream out(cache_dir / "corpus.json");
  out << manifest.dump(2) << "\n";

  std::cout << "preprocessed " << items.size() << " recordings (" << split.train.size()
            << " train, " << split.holdout.size() << " holdout), pca components "
            << pca.num_components() << "\n";
  return 0;
}

// --------------------------------------------------------------------- train

int cmd_train(const fs::path& cache_dir, const fs::path& out_dir, const std::string& variant,
              std::uint64_t seed, const std::map<std::string, std::string>& overrides,
              const std::string& resume_path, bool timing) {
  std::ifstream mf(cache_dir / "corpus.json");
  if (!mf) throw IoError("missing corpus manifest in " + cache_dir.string() + " (run preprocess)");
  json manifest;
  mf >> manifest;

  NetConfig net;
  LossConfig loss;
  OptimizerConfig opt;
  ScheduleConfig sched;
  apply_variant(variant, net, loss);
  int stride = kCoreFrames;

  auto get_int = [&](const char* key, int& target) {
    auto it = overrides.find(key);
    if (it != overrides.end()) target = std::stoi(it->second);
  };
  auto get_double = [&](const char* key, double& target) {
    auto it = overrides.find(key);
    if (it != overrides.end()) target = std::stod(it->second);
  };
  for (const auto& [key, value] : overrides) {
    static const std::set<std::string> known = {
        "epochs",     "pretrain_epochs", "batch_size", "learning_rate", "lambda_velocity",
        "stride",     "frame_encoding_dim", "window_past", "window_future", "conditioning_dim",
        "trunk_widths", "dropout_trunk", "dropout_pose", "pose_context"};
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    (void)value;
  }
  get_int("epochs", sched.total_epochs);
  get_int("pretrain_epochs", sched.pretrain_epochs);
  get_int("batch_size", opt.batch_size);
  get_double("learning_rate", opt.learning_rate);
  get_double("lambda_velocity", loss.lambda_velocity);
  get_int("stride", stride);
  get_int("frame_encoding_dim", net.frame_encoding_dim);
  get_int("window_past", net.window_past);
  get_int("window_future", net.window_future);
  get_int("conditioning_dim", net.conditioning_dim);
  get_int("pose_context", net.pose_context);
  get_double("dropout_trunk", net.dropout_trunk);
  get_double("dropout_pose", net.dropout_pose);
  if (auto it = overrides.find("trunk_widths"); it != overrides.end()) {
    net.trunk_widths.clear();
    for (const auto& w : parse_name_list(it->second)) net.trunk_widths.push_back(std::stoi(w));
  }

  TrainRun run;
  run.variant = variant;
  run.seed = seed;
  run.out_dir = out_dir;
  run.timing = timing;
  run.opt = opt;
  run.loss = loss;
  run.sched = sched;

  run.pca_hash = manifest.at("pca_hash").get<std::uint64_t>();
  {
    auto mp = manifest.at("mean_pose").get<std::vector<double>>();
    run.mean_pose = Eigen::Map<Eigen::VectorXd>(mp.data(), static_cast<Eigen::Index>(mp.size()));
    auto fv = manifest.at("filler_vector").get<std::vector<double>>();
    run.filler_vector =
        Eigen::Map<Eigen::VectorXd>(fv.data(), static_cast<Eigen::Index>(fv.size()));
  }

  PcaSpace pca = load_pca(cache_dir / "pca.bin");
  if (net.use_pca) {
    net.output_dim = pca.num_components();
    run.pca = pca;
  } else {
    net.output_dim = static_cast<int>(run.mean_pose.size());
  }
  run.net = net;

  std::vector<SequenceData> data;
  for (const auto& id : manifest.at("train").get<std::vector<std::string>>()) {
    Eigen::MatrixXd audio = load_array(cache_dir / (id + ".audio.bin")).data;
    Eigen::MatrixXd text = load_array(cache_dir / (id + ".text.bin")).data;
    Eigen::MatrixXd pose_raw = load_array(cache_dir / (id + ".motion.bin")).data;
    Eigen::MatrixXd pose = net.use_pca ? pca.project_rows(pose_raw) : pose_raw;
    for (int start : sequence_starts(static_cast<int>(audio.rows()), stride))
      data.push_back(slice_sequence(audio, text, pose, start));
  }
  if (data.empty()) throw ConfigError("no training sequences; recordings shorter than 70 frames?");

  std::optional<Checkpoint> resume;
  if (!resume_path.empty()) resume = load_checkpoint(resume_path);

  std::vector<EpochStats> history;
  Checkpoint final = train_model(run, data, resume ? &*resume : nullptr, &history);
  if (!history.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "trained %s to epoch %d, final loss %.10g\n",
                  variant.c_str(), final.epoch, history.back().stats.loss);
    std::cout << buf;
  } else {
    std::cout << "nothing to train (checkpoint already at target epoch)\n";
  }
  return 0;
}

// ------------------------------------------------------------------ generate

int cmd_generate(const std::string& checkpoint_path, const fs::path& audio_path,
                 const fs::path& transcript_path, const fs::path& out_path,
                 const std::string& embeddings_file, std::uint64_t seed,
                 const std::string& seed_mode) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);

  WavData wav = read_wav(audio_path);
  FeatureTrack audio = extract_mel(wav.samples, wav.sample_rate);

  auto tokens = materialize_silence(read_transcript(transcript_path), wav.duration());
  auto provider = make_provider(embeddings_file, "", seed);
  Eigen::VectorXd filler = ckpt.filler_vector.size() == kEmbeddingDim
                               ? ckpt.filler_vector
                               : Eigen::VectorXd::Zero(kEmbeddingDim);
  Eigen::MatrixXd text = extract_text_features(tokens, *provider, filler, audio.length());

  GenerateOptions opts;
  if (seed_mode == "mean") opts.seed = SeedMode::mean_pose;
  else if (seed_mode == "zeros") opts.seed = SeedMode::zeros;
  else throw ConfigError("unknown seed mode '" + seed_mode + "' (mean|zeros)");

  MotionTrack motion = generate_motion(ckpt, audio.frames, text, opts);
  ensure_parent(out_path);
  export_motion(out_path, motion, Skeleton::default_upper_body());
  std::cout << "generated " << motion.length() << " frames -> " << out_path.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ evaluate

Eigen::MatrixXd load_positions(const fs::path& path) {
  if (path.extension() == ".bvh") {
    BvhData bvh = read_bvh(path);
    Skeleton skel = Skeleton::from_bvh(bvh, default_joint_names());
    return forward_kinematics(to_expmap(bvh, skel, kFrameRate), skel);
  }
  Skeleton skel = Skeleton::default_upper_body();
  return forward_kinematics(import_motion(path, skel, kFrameRate), skel);
}

int cmd_evaluate(const std::string& systems_csv, const fs::path& motion_dir, const fs::path& gt_dir,
                 const fs::path& out_dir, int jobs, const std::string& wrists_csv) {
  auto systems = parse_name_list(systems_csv);
  if (systems.empty()) throw ConfigError("no systems given");

  std::vector<fs::path> gt_files;
  for (const auto& entry : fs::directory_iterator(gt_dir))
    if (entry.path().extension() == ".bvh") gt_files.push_back(entry.path());
  std::sort(gt_files.begin(), gt_files.end());
  if (gt_files.empty()) throw IoError("no ground-truth .bvh files in " + gt_dir.string());

  std::vector<Eigen::MatrixXd> gt_positions(gt_files.size());
  parallel_for(gt_files.size(), jobs,
               [&](std::size_t i) { gt_positions[i] = load_positions(gt_files[i]); });

  std::vector<int> stat_joints;
  for (int j = 1; j < static_cast<int>(default_joint_names().size()); ++j)
    stat_joints.push_back(j);  // root excluded: pinned at the origin
  std::vector<int> wrists;
  for (const auto& name : parse_name_list(wrists_csv)) {
    auto& names = default_joint_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown wrist joint '" + name + "'");
    wrists.push_back(static_cast<int>(it - names.begin()));
  }

  fs::create_directories(out_dir);
  std::vector<SystemReport> reports;

  for (const auto& system : systems) {
    fs::path dir = motion_dir / system;
    if (!fs::is_directory(dir)) throw IoError("missing system directory " + dir.string());
    std::vector<SequenceMetrics> per_seq(gt_files.size());
    std::vector<Eigen::MatrixXd> positions(gt_files.size());
    parallel_for(gt_files.size(), jobs, [&](std::size_t i) {
      fs::path gen = dir / gt_files[i].filename();
      if (!fs::exists(gen)) {
        gen.replace_extension(".csv");
        if (!fs::exists(gen))
          throw IoError(system + ": no generated motion for " + gt_files[i].filename().string());
      }
      positions[i] = load_positions(gen);
      Eigen::Index n = std::min(positions[i].rows(), gt_positions[i].rows());
      Eigen::MatrixXd a = positions[i].topRows(n), b = gt_positions[i].topRows(n);
      per_seq[i] = sequence_metrics(a, &b, kFrameRate, stat_joints);
      positions[i] = a;
    });
    SystemReport report;
    report.name = system;
    report.metrics = aggregate_metrics(per_seq);
    report.histogram = velocity_histogram(positions, wrists, kFrameRate);
    reports.push_back(std::move(report));
  }

  {
    std::vector<SequenceMetrics> per_seq;
    for (const auto& gp : gt_positions)
      per_seq.push_back(sequence_metrics(gp, nullptr, kFrameRate, stat_joints));
    SystemReport gt;
    gt.name = "ground_truth";
    gt.metrics = aggregate_metrics(per_seq);
    gt.histogram = velocity_histogram(gt_positions, wrists, kFrameRate);
    reports.push_back(std::move(gt));
  }

  std::string table = format_report_table(reports);
  std::cout << table;
  std::ofstream(out_dir / "report.txt") << table;
  std::ofstream(out_dir / "report.csv") << format_report_csv(reports);
  for (const auto& r : reports)
    std::ofstream(out_dir / ("hist_" + r.name + ".csv")) << format_histogram_csv(r.histogram);
  return 0;
}

// --------------------------------------------------------------------- embed

int cmd_embed(const fs::path& transcript_path, const fs::path& out_path, std::uint64_t seed,
              const std::string& exec_cmd) {
  auto tokens = read_transcript(transcript_path);
  auto provider = make_provider("", exec_cmd, seed);
  ensure_parent(out_path);
  write_embedding_file(out_path, tokens, *provider);
  std::size_t n = 0;
  for (const auto& t : tokens)
    if (t.kind == TokenKind::word) ++n;
  std::cout << "wrote " << n << " word vectors -> " << out_path.string() << "\n";
  return 0;
}

// ------------------------------------------------------------- feature dumps

int cmd_features_audio(const fs::path& audio_path, const fs::path& out_path) {
  WavData wav = read_wav(audio_path);
  FeatureTrack track = extract_mel(wav.samples, wav.sample_rate);
  ArraySidecar meta;
  meta.fps = track.fps;
  ensure_parent(out_path);
  save_array(out_path, track.frames, meta);
  std::cout << "wrote " << track.length() << "x" << track.dim() << " mel track -> "
            << out_path.string() << "\n";
  return 0;
}

int cmd_features_text(const fs::path& transcript_path, const fs::path& out_path,
                      const std::string& embeddings_file, std::uint64_t seed, int frames) {
  auto raw = read_transcript(transcript_path);
  double duration = raw.empty() ? 0.0 : raw.back().end;
  auto tokens = materialize_silence(raw, duration);
  int n_frames = frames > 0 ? frames : static_cast<int>(duration * kFrameRate + 1e-9);

  auto provider = make_provider(embeddings_file, "", seed);
  Eigen::VectorXd filler = compute_filler_vector({tokens}, *provider);
  Eigen::MatrixXd track = extract_text_features(tokens, *provider, filler, n_frames);
  ArraySidecar meta;
  meta.fps = kFrameRate;
  ensure_parent(out_path);
  save_array(out_path, track, meta);
  std::cout << "wrote " << track.rows() << "x" << track.cols() << " text track -> "
            << out_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech-to-gesture toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--seed", seed, "RNG seed (all commands are deterministic under it)")
      ->capture_default_str();
  app.add_option("--jobs", jobs, "worker threads for per-recording stages")
      ->capture_default_str();

  std::string data_dir, cache_dir, out, variant = "full", holdout, checkpoint;

  auto* pre = app.add_subcommand("preprocess", "extract features and fit the pose space");
  double variance_target = 0.92;
  pre->add_option("--data-dir", data_dir, "directory with <id>.wav/.jsonl/.bvh")->required();
  pre->add_option("--cache-dir", cache_dir, "feature cache (default $GESTICULATE_CACHE or ./cache)");
  pre->add_option("--holdout", holdout, "comma-separated recording ids kept out of training");
  pre->add_option("--variance", variance_target, "pca explained-variance target")
      ->capture_default_str();

  auto* train = app.add_subcommand("train", "train a model variant on the cache");
  std::string config_file, resume;
  bool timing = false;
  std::vector<std::string> sets;
  train->add_option("--cache-dir", cache_dir, "feature cache to read");
  train->add_option("--out", out, "run directory for checkpoints and the log")->required();
  train->add_option("--variant", variant, "model variant, or 'list'")->capture_default_str();
  train->add_option("--config", config_file, "flat key: value config file");
  train->add_option("--set", sets, "config overrides as key=value (repeatable)");
  train->add_option("--resume", resume, "checkpoint to continue from");
  train->add_flag("--timing", timing, "log real wall-clock seconds (breaks reproducibility)");

  auto* gen = app.add_subcommand("generate", "synthesize motion for new speech");
  std::string audio_file, transcript_file, embeddings_file, seed_mode = "mean";
  gen->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  gen->add_option("--audio", audio_file, "input .wav")->required();
  gen->add_option("--transcript", transcript_file, "input .jsonl transcript")->required();
  gen->add_option("--out", out, "output motion (.bvh or .csv)")->required();
  gen->add_option("--embeddings", embeddings_file, "precomputed embedding file (.bin)");
  gen->add_option("--seed-pose", seed_mode, "initial pose context: mean|zeros")
      ->capture_default_str();

  auto* eval = app.add_subcommand("evaluate", "objective metrics against ground truth");
  std::string systems, gt_dir, motion_dir = ".", wrists = "RightHand,LeftHand";
  eval->add_option("--systems", systems, "comma-separated system names")->required();
  eval->add_option("--motion-dir", motion_dir, "directory with <system>/<clip>.bvh")
      ->capture_default_str();
  eval->add_option("--gt", gt_dir, "directory with ground-truth .bvh clips")->required();
  eval->add_option("--out", out, "report directory")->required();
  eval->add_option("--wrists", wrists, "joints for the velocity histogram")
      ->capture_default_str();

  auto* embed = app.add_subcommand("embed", "precompute word embeddings for a transcript");
  std::string exec_cmd;
  embed->add_option("--transcript", transcript_file, "input .jsonl transcript")->required();
  embed->add_option("--out", out, "output embedding file (.bin)")->required();
  embed->add_option("--exec", exec_cmd, "external embedder command reading words on stdin");

  auto* features = app.add_subcommand("features", "dump feature tracks");
  auto* fa = features->add_subcommand("audio", "log-mel spectrogram of a .wav");
  fa->add_option("--audio", audio_file, "input .wav")->required();
  fa->add_option("--out", out, "output .bin (sidecar .json alongside)")->required();
  auto* ft = features->add_subcommand("text", "773-dim text track of a transcript");
  int text_frames = 0;
  ft->add_option("--transcript", transcript_file, "input .jsonl transcript")->required();
  ft->add_option("--out", out, "output .bin (sidecar .json alongside)")->required();
  ft->add_option("--embeddings", embeddings_file, "precomputed embedding file (.bin)");
  ft->add_option("--frames", text_frames, "frame count (default: transcript duration * 20)");

  CLI11_PARSE(app, argc, argv);

  try {
    fs::path cache = cache_dir.empty() ? default_cache_dir() : fs::path(cache_dir);

    if (pre->parsed())
      return cmd_preprocess(data_dir, cache, holdout, seed, jobs, variance_target);

    if (train->parsed()) {
      if (variant == "list") {
        for (const auto& name : variant_names()) std::cout << name << "\n";
        return 0;
      }
      std::map<std::string, std::string> overrides;
      if (!config_file.empty()) overrides = read_config_file(config_file);
      for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      return cmd_train(cache, out, variant, seed, overrides, resume, timing);
    }

    if (gen->parsed())
      return cmd_generate(checkpoint, audio_file, transcript_file, out, embeddings_file, seed,
                          seed_mode);

    if (eval->parsed()) return cmd_evaluate(systems, motion_dir, gt_dir, out, jobs, wrists);

    if (embed->parsed()) return cmd_embed(transcript_file, out, seed, exec_cmd);

    if (features->parsed()) {
      if (fa->parsed()) return cmd_features_audio(audio_file, out);
      if (ft->parsed())
        return cmd_features_text(transcript_file, out, embeddings_file, seed, text_frames);
      throw ConfigError("features needs a subcommand (audio|text)");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
