#include "gesticulate/transcript.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gesticulate/errors.hpp"

namespace gesticulate {

namespace {
using nlohmann::json;

bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      return false;
  }
}
}  // namespace

const std::set<std::string>& default_filler_vocabulary() {
  static const std::set<std::string> kFillers = {
      "um", "uh", "eh", "er", "ah", "mm", "hmm", "mhm", "uhum", "erm", "umm", "uhh",
  };
  return kFillers;
}

std::string normalize_word(const std::string& word) {
  std::size_t lo = 0, hi = word.size();
  while (lo < hi && !std::isalnum(static_cast<unsigned char>(word[lo]))) ++lo;
  while (hi > lo && !std::isalnum(static_cast<unsigned char>(word[hi - 1]))) --hi;
  std::string out = word.substr(lo, hi - lo);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<WordToken> read_transcript(const std::filesystem::path& path,
                                       const std::set<std::string>& fillers) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transcript " + path.string());

  std::vector<WordToken> tokens;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
    }
    if (!j.contains("word") || !j.contains("start") || !j.contains("end"))
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": token needs word/start/end");
    WordToken tok;
    tok.text = j.at("word").get<std::string>();
    tok.start = j.at("start").get<double>();
    tok.end = j.at("end").get<double>();
    if (!(tok.end > tok.start))
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": token end must exceed start");
    if (tok.start < 0)
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": negative start time");
    tok.kind = fillers.count(normalize_word(tok.text)) ? TokenKind::filler : TokenKind::word;
    tokens.push_back(std::move(tok));
  }

  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i].start < tokens[i - 1].end - 1e-9)
      throw SchemaError(path.string() + ": tokens overlap or are unsorted near '" +
                        tokens[i].text + "' (" + std::to_string(tokens[i].start) + "s)");
  }
  return tokens;
}

void write_transcript(const std::filesystem::path& path, const std::vector<WordToken>& tokens) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write transcript " + path.string());
  for (const auto& tok : tokens) {
    if (tok.kind == TokenKind::silence) continue;
    json j{{"word", tok.text}, {"start", tok.start}, {"end", tok.end}};
    out << j.dump() << "\n";
  }
}

std::vector<WordToken> materialize_silence(const std::vector<WordToken>& tokens, double duration,
                                           double min_gap) {
  std::vector<WordToken> out;
  double cursor = 0.0;
  auto push_silence = [&](double from, double to) {
    if (to - from <= min_gap) return;
    WordToken s;
    s.text = "";
    s.start = from;
    s.end = to;
    s.kind = TokenKind::silence;
    out.push_back(std::move(s));
  };

  for (const auto& tok : tokens) {
    if (tok.start > duration) break;
    push_silence(cursor, tok.start);
    WordToken copy = tok;
    copy.end = std::min(copy.end, duration);
    if (copy.end > copy.start) out.push_back(std::move(copy));
    cursor = std::max(cursor, std::min(tok.end, duration));
  }
  push_silence(cursor, duration);

  // Close sub-min_gap holes by extending the previous token.
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].start > out[i - 1].end) out[i - 1].end = out[i].start;
  if (!out.empty()) {
    out.front().start = 0.0;
    out.back().end = std::max(out.back().end, duration);
  }
  return out;
}

std::vector<std::vector<std::size_t>> split_sentences(const std::vector<WordToken>& tokens) {
  std::vector<std::vector<std::size_t>> sentences;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    current.push_back(i);
    if (tokens[i].kind == TokenKind::silence) continue;
    const std::string& t = tokens[i].text;
    if (!t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == '?')) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

int syllable_count(const std::string& word) {
  std::string w = normalize_word(word);
  if (w.empty()) return 1;
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    if (is_vowel(c)) {
      if (!in_group) ++groups;
      in_group = true;
    } else {
      in_group = false;
    }
  }
  // Silent trailing 'e' ("time", "care"), except the syllabic "-le" as in
  // "table".
  if (groups > 1 && w.size() >= 2 && w.back() == 'e' && !is_vowel(w[w.size() - 2])) {
    bool syllabic_le = w.size() >= 3 && w[w.size() - 2] == 'l' && !is_vowel(w[w.size() - 3]);
    if (!syllabic_le) --groups;
  }
  return std::max(groups, 1);
}

}  // namespace gesticulate
