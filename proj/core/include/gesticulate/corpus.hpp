#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gesticulate/bvh.hpp"
#include "gesticulate/transcript.hpp"
#include "gesticulate/wav.hpp"

namespace gesticulate {

// Pipeline frame rate.  Audio, text and motion tracks all live at 20 fps.
inline constexpr double kFrameRate = 20.0;
inline constexpr double kFrameHop = 1.0 / kFrameRate;

// Sliding-window geometry of one training sequence: 10 past-context frames,
// 40 supervised core frames, 20 future-context frames.
inline constexpr int kPastFrames = 10;
inline constexpr int kCoreFrames = 40;
inline constexpr int kFutureFrames = 20;
inline constexpr int kSequenceFrames = kPastFrames + kCoreFrames + kFutureFrames;

struct LoadOptions {
  std::set<std::string> fillers = default_filler_vocabulary();
  // Audio and motion durations may disagree by at most this many seconds.
  double duration_tolerance = 0.25;
  // When true a larger mismatch truncates to the shorter stream instead of
  // raising AlignmentError.
  bool force_truncate = false;
};

struct Recording {
  std::string id;
  WavData audio;
  std::vector<WordToken> words;  // silence materialized, fillers tagged
  BvhData motion;                // joint channels at the source frame rate

  double audio_duration() const { return audio.duration(); }
  double motion_duration() const { return motion.duration(); }
};

// Loads one recording from its three files and cross-checks alignment.
Recording load_recording(const std::filesystem::path& audio_path,
                         const std::filesystem::path& transcript_path,
                         const std::filesystem::path& motion_path,
                         const LoadOptions& options = {});

// Number of whole 20 fps frames covered by both streams.
int frame_count(const Recording& rec);

// Start offsets of every training sequence in a recording with `n_frames`
// frames: 0, stride, 2*stride, ... while start + 70 <= n_frames.
std::vector<int> sequence_starts(int n_frames, int stride);

struct SequenceRef {
  std::string recording_id;
  int start = 0;  // first frame (past context included)
};

std::vector<SequenceRef> make_sequences(const Recording& rec, int stride);

// Splits by recording id.  Holdout ids must exist; order is preserved.
struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> holdout;
};
DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::set<std::string>& holdout_ids);

}  // namespace gesticulate
