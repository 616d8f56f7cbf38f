#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace gesticulate {

enum class TokenKind { word, filler, silence };

// One time-aligned token.  Times are seconds from recording start; intervals
// are half-open [start, end).
struct WordToken {
  std::string text;
  double start = 0.0;
  double end = 0.0;
  TokenKind kind = TokenKind::word;

  double duration() const { return end - start; }
};

// Hesitation sounds treated as non-lexical.
const std::set<std::string>& default_filler_vocabulary();

// Lowercases and strips surrounding punctuation; used for filler matching and
// frequency counting.
std::string normalize_word(const std::string& word);

// Reads a JSON-lines transcript: one object per line with "word" (string),
// "start" and "end" (seconds).  Tokens must be non-overlapping and sorted;
// end must be > start.  Violations raise SchemaError.  Tokens whose
// normalized text is in `fillers` are tagged TokenKind::filler.
std::vector<WordToken> read_transcript(
    const std::filesystem::path& path,
    const std::set<std::string>& fillers = default_filler_vocabulary());

void write_transcript(const std::filesystem::path& path,
                      const std::vector<WordToken>& tokens);

// Fills every gap (and the stretch after the last word up to `duration`)
// with explicit silence tokens so the result covers [0, duration] without
// holes.  Gaps shorter than min_gap are merged into the preceding token.
std::vector<WordToken> materialize_silence(const std::vector<WordToken>& tokens,
                                           double duration, double min_gap = 1e-6);

// Splits into sentences at tokens whose text ends with '.', '!' or '?'.
// Silence tokens never start or end a sentence on their own; they stay with
// the sentence in progress.  Each element holds indices into `tokens`.
std::vector<std::vector<std::size_t>> split_sentences(const std::vector<WordToken>& tokens);

// Crude syllable estimate: contiguous vowel groups (aeiouy) with a silent-e
// correction, never less than 1.
int syllable_count(const std::string& word);

}  // namespace gesticulate
