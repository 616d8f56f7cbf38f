#include <doctest.h>

#include <cmath>
#include <vector>

#include "gesticulate/errors.hpp"
#include "gesticulate/text_features.hpp"
#include "synthetic.hpp"

using namespace gesticulate;

namespace {

WordToken word(const char* text, double start, double end, TokenKind kind = TokenKind::word) {
  return {text, start, end, kind};
}

// Provider that records every sentence it is asked to embed.
class RecordingProvider : public EmbeddingProvider {
public:
  std::vector<std::vector<std::string>> calls;
  std::vector<Eigen::VectorXd> embed_sentence(const std::vector<std::string>& words) override {
    calls.push_back(words);
    std::vector<Eigen::VectorXd> out;
    for (const auto& w : words) {
      Eigen::VectorXd v = Eigen::VectorXd::Constant(kEmbeddingDim, static_cast<double>(w.size()));
      out.push_back(v);
    }
    return out;
  }
};

}  // namespace

TEST_CASE("duration scalars reproduce the hand example") {
  WordToken tok = word("basket", 0.4, 0.9);
  auto s = duration_scalars(tok, 0.5);
  CHECK(s(0) == doctest::Approx(0.1).epsilon(1e-9));   // elapsed
  CHECK(s(1) == doctest::Approx(0.4).epsilon(1e-9));   // remaining
  CHECK(s(2) == doctest::Approx(0.5).epsilon(1e-9));   // duration
  CHECK(s(3) == doctest::Approx(20.0).epsilon(1e-9));  // progress %
  CHECK(s(4) == doctest::Approx(4.0).epsilon(1e-9));   // syllables / s
}

TEST_CASE("duration scalars at word start and identities") {
  WordToken tok = word("cake", 1.0, 1.5);
  auto s0 = duration_scalars(tok, 1.0);
  CHECK(s0(0) == 0.0);
  CHECK(s0(3) == 0.0);

  for (double t : {1.0, 1.1, 1.25, 1.45}) {
    auto s = duration_scalars(tok, t);
    CHECK(s(0) + s(1) == doctest::Approx(s(2)).epsilon(1e-9));
    CHECK(s(3) == doctest::Approx(100.0 * s(0) / s(2)).epsilon(1e-9));
  }
}

TEST_CASE("silence and filler frames carry zero scalars") {
  auto sil = duration_scalars(word("", 0.0, 1.0, TokenKind::silence), 0.5);
  CHECK(sil.isZero(0.0));
  auto fil = duration_scalars(word("um", 0.0, 1.0, TokenKind::filler), 0.5);
  CHECK(fil.isZero(0.0));
}

TEST_CASE("embed_tokens substitutes the filler and silence vectors") {
  RecordingProvider provider;
  Eigen::VectorXd vf = Eigen::VectorXd::Constant(kEmbeddingDim, 7.0);
  std::vector<WordToken> tokens = {
      word("nice", 0.0, 0.3),
      word("um", 0.3, 0.5, TokenKind::filler),
      word("work.", 0.5, 0.9),
      word("", 0.9, 1.2, TokenKind::silence),
  };
  auto vectors = embed_tokens(tokens, provider, vf);
  REQUIRE(vectors.size() == 4);
  CHECK(vectors[0](0) == doctest::Approx(4.0));  // "nice" -> length 4
  CHECK((vectors[1].array() == 7.0).all());
  CHECK(vectors[2](0) == doctest::Approx(5.0));  // "work."
  CHECK((vectors[3].array() == kSilenceFill).all());

  // One sentence, fillers and silence excluded from the provider call.
  REQUIRE(provider.calls.size() == 1);
  CHECK(provider.calls[0] == std::vector<std::string>{"nice", "work."});
}

TEST_CASE("embed_tokens splits provider calls at sentence boundaries") {
  RecordingProvider provider;
  Eigen::VectorXd vf = Eigen::VectorXd::Zero(kEmbeddingDim);
  std::vector<WordToken> tokens = {
      word("one", 0.0, 0.2), word("two.", 0.2, 0.4),
      word("three", 0.4, 0.6), word("four", 0.6, 0.8), word("five.", 0.8, 1.0),
  };
  auto vectors = embed_tokens(tokens, provider, vf);
  CHECK(vectors.size() == 5);
  REQUIRE(provider.calls.size() == 2);
  CHECK(provider.calls[0].size() == 2);
  CHECK(provider.calls[1].size() == 3);
}

TEST_CASE("compute_filler_vector averages the top fillers") {
  HashEmbeddingProvider provider(3);
  std::vector<std::vector<WordToken>> transcripts = {{
      word("um", 0.0, 0.1, TokenKind::filler),
      word("um", 0.2, 0.3, TokenKind::filler),
      word("uh", 0.4, 0.5, TokenKind::filler),
      word("speech", 0.6, 0.9),
  }};

  TextEncodingConfig cfg;
  cfg.filler_top_k = 2;
  auto vf2 = compute_filler_vector(transcripts, provider, cfg);
  Eigen::VectorXd expect2 = 0.5 * (provider.embed_word("um") + provider.embed_word("uh"));
  CHECK((vf2 - expect2).cwiseAbs().maxCoeff() < 1e-12);

  cfg.filler_top_k = 1;
  auto vf1 = compute_filler_vector(transcripts, provider, cfg);
  CHECK((vf1 - provider.embed_word("um")).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("compute_filler_vector breaks frequency ties lexicographically") {
  HashEmbeddingProvider provider(3);
  std::vector<std::vector<WordToken>> transcripts = {{
      word("um", 0.0, 0.1, TokenKind::filler),
      word("eh", 0.2, 0.3, TokenKind::filler),
      word("um", 0.4, 0.5, TokenKind::filler),
      word("eh", 0.6, 0.7, TokenKind::filler),
  }};
  TextEncodingConfig cfg;
  cfg.filler_top_k = 1;
  auto vf = compute_filler_vector(transcripts, provider, cfg);
  CHECK((vf - provider.embed_word("eh")).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("compute_filler_vector falls back to zeros without fillers") {
  HashEmbeddingProvider provider(3);
  std::vector<std::vector<WordToken>> transcripts = {{word("only", 0.0, 0.5)}};
  auto vf = compute_filler_vector(transcripts, provider);
  CHECK(vf.size() == kEmbeddingDim);
  CHECK(vf.isZero(0.0));
}

TEST_CASE("build_text_track upsamples with half-open token intervals") {
  Eigen::VectorXd vf = Eigen::VectorXd::Zero(kEmbeddingDim);
  std::vector<WordToken> tokens = {
      word("", 0.0, 0.4, TokenKind::silence),
      word("basket", 0.4, 0.9),
      word("", 0.9, 2.0, TokenKind::silence),
  };
  std::vector<Eigen::VectorXd> vectors = {
      Eigen::VectorXd::Constant(kEmbeddingDim, kSilenceFill),
      Eigen::VectorXd::Constant(kEmbeddingDim, 2.0),
      Eigen::VectorXd::Constant(kEmbeddingDim, kSilenceFill),
  };
  auto track = build_text_track(tokens, vectors, 40);
  REQUIRE(track.rows() == 40);
  REQUIRE(track.cols() == kTextDim);
  // Word over [0.4 s, 0.9 s) covers frames 8..17 at 20 fps.
  for (int t = 8; t <= 17; ++t) CHECK(track(t, 0) == doctest::Approx(2.0));
  CHECK(track(7, 0) == doctest::Approx(kSilenceFill));
  CHECK(track(18, 0) == doctest::Approx(kSilenceFill));
  // Scalar block: zero on silence frames, the worked values mid-word.
  CHECK(track.row(0).tail(kDurationDim).isZero(0.0));
  CHECK(track(10, kEmbeddingDim + 0) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(track(10, kEmbeddingDim + 3) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("equal-duration words split the second evenly") {
  Eigen::VectorXd va = Eigen::VectorXd::Constant(kEmbeddingDim, 1.0);
  Eigen::VectorXd vb = Eigen::VectorXd::Constant(kEmbeddingDim, 2.0);
  std::vector<WordToken> tokens = {word("aa", 0.0, 0.5), word("bb", 0.5, 1.0)};
  auto track = build_text_track(tokens, {va, vb}, 20);
  for (int t = 0; t <= 9; ++t) CHECK(track(t, 5) == doctest::Approx(1.0));
  for (int t = 10; t <= 19; ++t) CHECK(track(t, 5) == doctest::Approx(2.0));
}

TEST_CASE("all-silence input fills every frame with the silence vector") {
  HashEmbeddingProvider provider(1);
  std::vector<WordToken> tokens = {word("", 0.0, 1.0, TokenKind::silence)};
  Eigen::VectorXd vf = Eigen::VectorXd::Zero(kEmbeddingDim);
  auto track = extract_text_features(tokens, provider, vf, 20);
  REQUIRE(track.rows() == 20);
  CHECK((track.leftCols(kEmbeddingDim).array() == kSilenceFill).all());
  CHECK(track.rightCols(kDurationDim).isZero(0.0));
}

TEST_CASE("build_text_track rejects coverage gaps") {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kEmbeddingDim);
  std::vector<WordToken> tokens = {word("a", 0.0, 0.3)};
  CHECK_THROWS_AS(build_text_track(tokens, {v}, 20), FeatureError);
}

TEST_CASE("hash provider is deterministic per (seed, word)") {
  HashEmbeddingProvider a(11), b(11), c(12);
  auto va = a.embed_word("gesture");
  auto vb = b.embed_word("gesture");
  auto vc = c.embed_word("gesture");
  CHECK(va.size() == kEmbeddingDim);
  CHECK((va.array() == vb.array()).all());
  CHECK((va.array() != vc.array()).any());
  auto sent = a.embed_sentence({"gesture", "speech"});
  REQUIRE(sent.size() == 2);
  CHECK((sent[0].array() == va.array()).all());
}

TEST_CASE("embedding files round trip through the file provider") {
  testsupport::TempDir tmp;
  HashEmbeddingProvider hash(5);
  std::vector<WordToken> tokens = {
      word("alpha", 0.0, 0.3),
      word("um", 0.3, 0.5, TokenKind::filler),
      word("beta.", 0.5, 0.8),
      word("gamma", 0.8, 1.1),
  };
  auto bin = tmp.path() / "t.emb.bin";
  write_embedding_file(bin, tokens, hash);

  FileEmbeddingProvider file(bin);
  CHECK(file.size() == 3);  // content words only
  REQUIRE(file.fixed_filler_vector().has_value());

  auto sent1 = file.embed_sentence({"alpha", "beta."});
  auto ref1 = hash.embed_sentence({"alpha", "beta."});
  REQUIRE(sent1.size() == 2);
  // float32 storage: round trip within single precision.
  CHECK((sent1[0] - ref1[0]).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((sent1[1] - ref1[1]).cwiseAbs().maxCoeff() < 1e-6);

  auto sent2 = file.embed_sentence({"gamma"});
  CHECK(sent2.size() == 1);

  // Words consumed in order; a mismatch is a provider error.
  file.rewind();
  CHECK_THROWS_AS(file.embed_sentence({"beta."}), FeatureError);
}

TEST_CASE("extract_text_features is reproducible bit for bit") {
  HashEmbeddingProvider provider(9);
  std::vector<WordToken> tokens = {
      word("steady", 0.0, 0.5),
      word("", 0.5, 0.7, TokenKind::silence),
      word("hands.", 0.7, 1.0),
  };
  Eigen::VectorXd vf = Eigen::VectorXd::Constant(kEmbeddingDim, 0.25);
  auto a = extract_text_features(tokens, provider, vf, 20);
  HashEmbeddingProvider provider2(9);
  auto b = extract_text_features(tokens, provider2, vf, 20);
  CHECK((a.array() == b.array()).all());
}
