// Microbenchmarks for the hot paths: mel extraction, the forward pass of one
// autoregressive step, and forward kinematics.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "gesticulate/audio_features.hpp"
#include "gesticulate/inference.hpp"
#include "gesticulate/motion.hpp"
#include "gesticulate/net.hpp"
#include "gesticulate/rng.hpp"

using namespace gesticulate;

namespace {

std::vector<double> sine_wave(double seconds, int rate) {
  std::vector<double> s(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = 0.5 * std::sin(2.0 * M_PI * 220.0 * static_cast<double>(i) / rate);
  return s;
}

void bench_mel(benchmark::State& state) {
  auto wave = sine_wave(static_cast<double>(state.range(0)), 16000);
  for (auto _ : state) {
    auto track = extract_mel(wave, 16000);
    benchmark::DoNotOptimize(track.frames.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * kFrameRate);
}

NetConfig bench_config() {
  NetConfig cfg;
  cfg.output_dim = 12;
  return cfg;
}

void bench_forward_step(benchmark::State& state) {
  GesticulatorNet net(bench_config());
  std::mt19937_64 rng(11);
  net.init_params(rng);
  StepMode mode;
  mode.training = false;
  mode.autoregression = true;

  const NetConfig& cfg = net.config();
  Eigen::MatrixXd window(cfg.concat_dim(), 1);
  for (Eigen::Index i = 0; i < window.size(); ++i) window.data()[i] = rand_range(rng, -1.0, 1.0);
  Eigen::MatrixXd poses = Eigen::MatrixXd::Zero(cfg.pose_input_dim(), 1);
  for (auto _ : state) {
    Eigen::MatrixXd out = net.step_forward(window, poses, mode, nullptr);
    benchmark::DoNotOptimize(out.data());
  }
}

void bench_forward_kinematics(benchmark::State& state) {
  Skeleton skel = Skeleton::default_upper_body();
  MotionTrack track;
  track.fps = kFrameRate;
  track.frames = Eigen::MatrixXd::Zero(state.range(0), 3 * skel.size());
  std::mt19937_64 fill(5);
  for (Eigen::Index i = 0; i < track.frames.size(); ++i)
    track.frames.data()[i] = rand_range(fill, -0.4, 0.4);
  for (auto _ : state) {
    Eigen::MatrixXd pos = forward_kinematics(track, skel);
    benchmark::DoNotOptimize(pos.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(bench_mel)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_forward_step)->Unit(benchmark::kMicrosecond);
BENCHMARK(bench_forward_kinematics)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
