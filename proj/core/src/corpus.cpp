#include "gesticulate/corpus.hpp"

#include <algorithm>
#include <cmath>

#include "gesticulate/errors.hpp"

namespace gesticulate {

Recording load_recording(const std::filesystem::path& audio_path,
                         const std::filesystem::path& transcript_path,
                         const std::filesystem::path& motion_path, const LoadOptions& options) {
  Recording rec;
  rec.id = audio_path.stem().string();
  rec.audio = read_wav(audio_path);
  rec.motion = read_bvh(motion_path);

  double audio_dur = rec.audio.duration();
  double motion_dur = rec.motion.duration();
  double mismatch = std::abs(audio_dur - motion_dur);
  if (mismatch > options.duration_tolerance && !options.force_truncate)
    throw AlignmentError(rec.id + ": audio runs " + std::to_string(audio_dur) +
                         "s but motion runs " + std::to_string(motion_dur) +
                         "s (tolerance " + std::to_string(options.duration_tolerance) + "s)");

  auto tokens = read_transcript(transcript_path, options.fillers);
  for (const auto& tok : tokens)
    if (tok.end > audio_dur + options.duration_tolerance)
      throw AlignmentError(rec.id + ": token '" + tok.text + "' ends at " +
                           std::to_string(tok.end) + "s, past the audio");
  rec.words = materialize_silence(tokens, audio_dur);
  return rec;
}

int frame_count(const Recording& rec) {
  int audio_frames = static_cast<int>(std::floor(rec.audio_duration() * kFrameRate + 1e-9));
  int motion_frames = static_cast<int>(std::floor(rec.motion_duration() * kFrameRate + 1e-9));
  return std::min(audio_frames, motion_frames);
}

std::vector<int> sequence_starts(int n_frames, int stride) {
  if (stride <= 0) throw ConfigError("sequence stride must be positive");
  std::vector<int> starts;
  for (int s = 0; s + kSequenceFrames <= n_frames; s += stride) starts.push_back(s);
  return starts;
}

std::vector<SequenceRef> make_sequences(const Recording& rec, int stride) {
  std::vector<SequenceRef> refs;
  for (int s : sequence_starts(frame_count(rec), stride)) refs.push_back({rec.id, s});
  return refs;
}

DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::set<std::string>& holdout_ids) {
  for (const auto& h : holdout_ids)
    if (std::find(ids.begin(), ids.end(), h) == ids.end())
      throw ConfigError("holdout id '" + h + "' is not in the dataset");
  DatasetSplit split;
  for (const auto& id : ids) {
    if (holdout_ids.count(id))
      split.holdout.push_back(id);
    else
      split.train.push_back(id);
  }
  return split;
}

}  // namespace gesticulate
