#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gesticulate/transcript.hpp"

namespace gesticulate {

inline constexpr int kEmbeddingDim = 768;
inline constexpr int kDurationDim = 5;
inline constexpr int kTextDim = kEmbeddingDim + kDurationDim;  // 773
inline constexpr double kSilenceFill = -15.0;

// Source of per-word sentence embeddings.  Implementations must be
// deterministic: the same sentence always yields the same vectors.
class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;

  // One kEmbeddingDim vector per word, in order.
  virtual std::vector<Eigen::VectorXd> embed_sentence(const std::vector<std::string>& words) = 0;

  // Providers backed by precomputed files may ship a ready filler vector.
  virtual std::optional<Eigen::VectorXd> fixed_filler_vector() const { return std::nullopt; }
};

// Deterministic stand-in for a real language model: every word maps to a
// pseudo-random unit-scale vector derived from (seed, normalized word).
// Context independent, which is all the tests need.
class HashEmbeddingProvider : public EmbeddingProvider {
public:
  explicit HashEmbeddingProvider(std::uint64_t seed = 0) : seed_(seed) {}
  std::vector<Eigen::VectorXd> embed_sentence(const std::vector<std::string>& words) override;
  Eigen::VectorXd embed_word(const std::string& word) const;

private:
  std::uint64_t seed_;
};

// Reads vectors precomputed offline (shape [num_words, 768] float32 plus a
// sidecar listing token order).  Words are consumed in file order; each
// embed_sentence call must match the next rows' words or FeatureError is
// thrown.  The sidecar may carry a "filler_vector" used for V_f.
class FileEmbeddingProvider : public EmbeddingProvider {
public:
  explicit FileEmbeddingProvider(const std::filesystem::path& bin_path);
  std::vector<Eigen::VectorXd> embed_sentence(const std::vector<std::string>& words) override;
  std::optional<Eigen::VectorXd> fixed_filler_vector() const override;
  void rewind() { cursor_ = 0; }
  std::size_t size() const { return words_.size(); }

private:
  Eigen::MatrixXd rows_;
  std::vector<std::string> words_;
  std::optional<Eigen::VectorXd> filler_vector_;
  std::size_t cursor_ = 0;
};

struct TextEncodingConfig {
  std::set<std::string> fillers = default_filler_vocabulary();
  int filler_top_k = 10;           // how many most-common fillers feed V_f
  double silence_fill = kSilenceFill;
};

// V_f: mean embedding of the k most common filler tokens across the given
// transcripts (ties broken lexicographically).  Falls back to the provider's
// fixed vector when available; a corpus without fillers yields zeros and a
// warning on stderr.
Eigen::VectorXd compute_filler_vector(const std::vector<std::vector<WordToken>>& transcripts,
                                      EmbeddingProvider& provider,
                                      const TextEncodingConfig& cfg = {});

// Per-token 768-dim vectors: provider embeddings for words (sentence by
// sentence), V_f for fillers, V_s (all silence_fill) for silence.
std::vector<Eigen::VectorXd> embed_tokens(const std::vector<WordToken>& tokens,
                                          EmbeddingProvider& provider,
                                          const Eigen::VectorXd& filler_vector,
                                          const TextEncodingConfig& cfg = {});

// The five word-timing scalars at time t within `tok`: elapsed seconds,
// remaining seconds, total duration, progress percent, syllables per second.
// Silence and filler frames get all zeros.
Eigen::Matrix<double, 5, 1> duration_scalars(const WordToken& tok, double t);

// 773-dim track at 20 fps with exactly `n_frames` rows.  Frame i (time
// i/20 s) carries the vector of the token whose [start, end) interval
// contains that time, concatenated with the duration scalars.  Token
// intervals must cover every frame time.
struct FeatureTrack;  // audio_features.hpp
Eigen::MatrixXd build_text_track(const std::vector<WordToken>& tokens,
                                 const std::vector<Eigen::VectorXd>& token_vectors,
                                 int n_frames);

// Convenience: embeddings + upsampling in one call.
Eigen::MatrixXd extract_text_features(const std::vector<WordToken>& tokens,
                                      EmbeddingProvider& provider,
                                      const Eigen::VectorXd& filler_vector, int n_frames,
                                      const TextEncodingConfig& cfg = {});

// Writes a provider file for the given transcript: content words in
// transcript order (float32 rows) plus the filler vector in the sidecar.
void write_embedding_file(const std::filesystem::path& bin_path,
                          const std::vector<WordToken>& tokens, EmbeddingProvider& provider,
                          const TextEncodingConfig& cfg = {});

}  // namespace gesticulate
