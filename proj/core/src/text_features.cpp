#include "gesticulate/text_features.hpp"

#include <algorithm>
#include <iostream>
#include <map>

#include "gesticulate/array_io.hpp"
#include "gesticulate/errors.hpp"
#include "gesticulate/rng.hpp"

namespace gesticulate {

namespace {

std::uint64_t fnv1a_string(std::uint64_t seed, const std::string& s) {
  std::uint64_t h = 14695981039346656037ull ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::vector<Eigen::VectorXd> HashEmbeddingProvider::embed_sentence(
    const std::vector<std::string>& words) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(embed_word(w));
  return out;
}

Eigen::VectorXd HashEmbeddingProvider::embed_word(const std::string& word) const {
  std::mt19937_64 g(fnv1a_string(seed_, normalize_word(word)));
  Eigen::VectorXd v(kEmbeddingDim);
  for (int i = 0; i < kEmbeddingDim; ++i) v[i] = rand_range(g, -1.0, 1.0);
  return v;
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::filesystem::path& bin_path) {
  LoadedArray arr = load_array(bin_path);
  if (arr.meta.shape.size() != 2 || arr.meta.shape[1] != kEmbeddingDim)
    throw SchemaError(bin_path.string() + ": embedding file must be (num_words, " +
                      std::to_string(kEmbeddingDim) + ")");
  if (arr.meta.words.size() != arr.meta.shape[0])
    throw SchemaError(bin_path.string() + ": sidecar word list does not match row count");
  rows_ = std::move(arr.data);
  words_ = std::move(arr.meta.words);
  if (!arr.meta.filler_vector.empty()) {
    if (arr.meta.filler_vector.size() != kEmbeddingDim)
      throw SchemaError(bin_path.string() + ": filler_vector has wrong dimension");
    filler_vector_ = Eigen::Map<const Eigen::VectorXd>(arr.meta.filler_vector.data(),
                                                       kEmbeddingDim);
  }
}

std::vector<Eigen::VectorXd> FileEmbeddingProvider::embed_sentence(
    const std::vector<std::string>& words) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    if (cursor_ >= words_.size())
      throw FeatureError("embedding file exhausted at word '" + w + "'");
    if (words_[cursor_] != w)
      throw FeatureError("embedding file order mismatch: expected '" + words_[cursor_] +
                         "', transcript has '" + w + "'");
    out.push_back(rows_.row(static_cast<Eigen::Index>(cursor_)).transpose());
    ++cursor_;
  }
  return out;
}

std::optional<Eigen::VectorXd> FileEmbeddingProvider::fixed_filler_vector() const {
  return filler_vector_;
}

Eigen::VectorXd compute_filler_vector(const std::vector<std::vector<WordToken>>& transcripts,
                                      EmbeddingProvider& provider,
                                      const TextEncodingConfig& cfg) {
  if (auto fixed = provider.fixed_filler_vector()) return *fixed;

  std::map<std::string, int> counts;
  for (const auto& tokens : transcripts)
    for (const auto& tok : tokens)
      if (tok.kind == TokenKind::filler) ++counts[normalize_word(tok.text)];

  if (counts.empty()) {
    std::cerr << "warning: no filler tokens in corpus, V_f falls back to zeros\n";
    return Eigen::VectorXd::Zero(kEmbeddingDim);
  }

  // Most frequent first; lexicographic on ties (the map iterates sorted, and
  // stable_sort keeps that order within equal counts).
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::size_t k = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(cfg.filler_top_k));

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(kEmbeddingDim);
  for (std::size_t i = 0; i < k; ++i) {
    auto vecs = provider.embed_sentence({ranked[i].first});
    if (vecs.size() != 1 || vecs[0].size() != kEmbeddingDim)
      throw ShapeError("provider returned a bad embedding for filler '" + ranked[i].first + "'");
    acc += vecs[0];
  }
  return acc / static_cast<double>(k);
}

std::vector<Eigen::VectorXd> embed_tokens(const std::vector<WordToken>& tokens,
                                          EmbeddingProvider& provider,
                                          const Eigen::VectorXd& filler_vector,
                                          const TextEncodingConfig& cfg) {
  if (filler_vector.size() != kEmbeddingDim)
    throw ShapeError("filler vector must have dimension " + std::to_string(kEmbeddingDim));

  std::vector<Eigen::VectorXd> out(tokens.size());
  Eigen::VectorXd silence = Eigen::VectorXd::Constant(kEmbeddingDim, cfg.silence_fill);

  for (const auto& sentence : split_sentences(tokens)) {
    std::vector<std::size_t> word_idx;
    std::vector<std::string> words;
    for (std::size_t i : sentence) {
      if (tokens[i].kind == TokenKind::word) {
        word_idx.push_back(i);
        words.push_back(tokens[i].text);
      }
    }
    std::vector<Eigen::VectorXd> vecs;
    if (!words.empty()) vecs = provider.embed_sentence(words);
    if (vecs.size() != words.size())
      throw ShapeError("provider returned " + std::to_string(vecs.size()) + " vectors for " +
                       std::to_string(words.size()) + " words");
    for (std::size_t i = 0; i < word_idx.size(); ++i) {
      if (vecs[i].size() != kEmbeddingDim)
        throw ShapeError("provider embedding has wrong dimension");
      out[word_idx[i]] = std::move(vecs[i]);
    }
  }

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == TokenKind::filler) out[i] = filler_vector;
    else if (tokens[i].kind == TokenKind::silence) out[i] = silence;
  }
  return out;
}

Eigen::Matrix<double, 5, 1> duration_scalars(const WordToken& tok, double t) {
  Eigen::Matrix<double, 5, 1> s = Eigen::Matrix<double, 5, 1>::Zero();
  if (tok.kind != TokenKind::word) return s;
  double duration = tok.duration();
  if (duration <= 0) return s;
  double elapsed = t - tok.start;
  s[0] = elapsed;
  s[1] = tok.end - t;
  s[2] = duration;
  s[3] = 100.0 * elapsed / duration;
  s[4] = syllable_count(tok.text) / duration;
  return s;
}

Eigen::MatrixXd build_text_track(const std::vector<WordToken>& tokens,
                                 const std::vector<Eigen::VectorXd>& token_vectors, int n_frames) {
  if (tokens.size() != token_vectors.size())
    throw ShapeError("build_text_track: token/vector count mismatch");
  Eigen::MatrixXd track(n_frames, kTextDim);
  std::size_t j = 0;
  for (int i = 0; i < n_frames; ++i) {
    double t = i / 20.0;
    while (j < tokens.size() && t >= tokens[j].end) ++j;
    if (j >= tokens.size() || t < tokens[j].start - 1e-9)
      throw FeatureError("frame time " + std::to_string(t) +
                         "s is not covered by any transcript token");
    track.row(i).head(kEmbeddingDim) = token_vectors[j].transpose();
    track.row(i).tail(kDurationDim) = duration_scalars(tokens[j], t).transpose();
  }
  return track;
}

Eigen::MatrixXd extract_text_features(const std::vector<WordToken>& tokens,
                                      EmbeddingProvider& provider,
                                      const Eigen::VectorXd& filler_vector, int n_frames,
                                      const TextEncodingConfig& cfg) {
  return build_text_track(tokens, embed_tokens(tokens, provider, filler_vector, cfg), n_frames);
}

void write_embedding_file(const std::filesystem::path& bin_path,
                          const std::vector<WordToken>& tokens, EmbeddingProvider& provider,
                          const TextEncodingConfig& cfg) {
  std::vector<std::size_t> word_idx;
  std::vector<std::string> words;
  std::vector<Eigen::VectorXd> vectors(tokens.size());

  for (const auto& sentence : split_sentences(tokens)) {
    std::vector<std::size_t> idx;
    std::vector<std::string> sent_words;
    for (std::size_t i : sentence)
      if (tokens[i].kind == TokenKind::word) {
        idx.push_back(i);
        sent_words.push_back(tokens[i].text);
      }
    if (sent_words.empty()) continue;
    auto vecs = provider.embed_sentence(sent_words);
    if (vecs.size() != sent_words.size())
      throw ShapeError("provider returned wrong vector count for a sentence");
    for (std::size_t i = 0; i < idx.size(); ++i) {
      vectors[idx[i]] = std::move(vecs[i]);
      word_idx.push_back(idx[i]);
      words.push_back(tokens[idx[i]].text);
    }
  }

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(word_idx.size()), kEmbeddingDim);
  for (std::size_t i = 0; i < word_idx.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) = vectors[word_idx[i]].transpose();

  Eigen::VectorXd vf = compute_filler_vector({tokens}, provider, cfg);

  ArraySidecar meta;
  meta.dtype = "float32";
  meta.words = words;
  meta.filler_vector.assign(vf.data(), vf.data() + vf.size());
  save_array(bin_path, rows, std::move(meta));
}

}  // namespace gesticulate
