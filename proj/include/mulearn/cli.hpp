#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mulearn/data.hpp"
#include "mulearn/learn.hpp"

namespace mulearn::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2, kInvariant = 3 };

/// Git blob object id (SHA-1 of "blob <size>\0" + bytes) of a file.
std::string git_blob_hash(const std::string& path);
std::string git_blob_hash_bytes(const std::string& bytes);

enum class TrainMode { Strong, MultiUtility, Hallucinated };

WeakKind parse_weak_kind(const std::string& name);
std::string weak_kind_name(WeakKind kind);
TrainMode parse_train_mode(const std::string& name);
std::string train_mode_name(TrainMode mode);

/// Number of fully labelled instances kept out of `n`: floor(fraction * n),
/// but at least one whenever the fraction is positive.
std::size_t full_count(double fraction, std::size_t n);

/// Keeps a sampled subset fully labelled and replaces the rest by derived
/// weak annotations. Returns the indices kept fully labelled.
std::vector<std::size_t> apply_annotation_mix(Dataset& dataset, double full_fraction, WeakKind kind,
                                              std::uint64_t seed);

struct SynthRun {
  SynthConfig synth;
  int train_count = 40;
  int test_count = 40;
  double full_fraction = 0.1;
  WeakKind weak = WeakKind::ImageLevel;
  std::string out_dir;
};

struct DeriveRun {
  std::string input;
  std::string output;
  double full_fraction = 0.0;
  WeakKind weak = WeakKind::ImageLevel;
  std::uint64_t seed = 0;
};

struct TrainRun {
  std::string dataset;
  std::string model_out;
  std::string report_out;
  TrainMode mode = TrainMode::MultiUtility;
  TrainConfig train;
  bool timing = false;  // wall time breaks byte-identical reports
};

struct PredictRun {
  std::string model;
  std::string dataset;
  std::string output;
};

struct EvalRun {
  std::string model;
  std::string dataset;
  std::string output;
  std::string experiment_id = "eval";
  std::string split = "test";
  std::vector<int> excluded;  // 0-based label ids, as on disk
};

enum class SweepParameter { Alpha, Beta, FullFraction };

struct SweepRun {
  std::string train;  // fully labelled
  std::string test;
  std::string output;
  SweepParameter parameter = SweepParameter::Alpha;
  std::vector<double> values;
  double full_fraction = 0.1;
  WeakKind weak = WeakKind::ImageLevel;
  std::uint64_t seed = 0;
  TrainConfig train_config;
};

SweepParameter parse_sweep_parameter(const std::string& name);
std::string sweep_parameter_name(SweepParameter p);

void cmd_synth(const SynthRun& run);
void cmd_derive(const DeriveRun& run);
void cmd_train(const TrainRun& run);
void cmd_predict(const PredictRun& run);
void cmd_eval(const EvalRun& run);
void cmd_sweep(const SweepRun& run);

/// Trains with the selected mode; Strong uses fully labelled instances only.
TrainResult train_with_mode(std::span<const Instance> data, TrainMode mode, const TrainConfig& config);

/// Predictions by MAP inference, evaluated against fully labelled instances.
Metrics evaluate_model(const Model& model, std::span<const Instance> data, const std::vector<Label>& excluded = {});

/// Parses arguments, runs the command and maps failures to exit codes.
int run(int argc, char** argv);

}  // namespace mulearn::cli
