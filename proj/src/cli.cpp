#include "mulearn/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mulearn/inference.hpp"

namespace mulearn::cli {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json input_entry(const std::string& path) { return Json{{"path", path}, {"sha1", git_blob_hash(path)}}; }

Json train_config_json(const TrainConfig& c) {
  Json j;
  j["C"] = c.C;
  j["alpha_balance"] = c.alpha_balance;
  j["epsilon"] = c.epsilon ? Json(*c.epsilon) : Json("auto");
  j["max_cutting_plane_iters"] = c.max_cutting_plane_iters;
  j["max_cccp_iters"] = c.max_cccp_iters;
  j["warm_start"] = c.warm_start;
  j["beta"] = c.loss.beta;
  j["threads"] = c.threads;
  j["qp_tolerance"] = c.qp_tolerance;
  j["qp_max_sweeps"] = c.qp_max_sweeps;
  return j;
}

Json synth_config_json(const SynthConfig& c) {
  return Json{{"grid_size", c.grid_size}, {"pixel_scale", c.pixel_scale}, {"num_stuff", c.num_stuff},
              {"num_things", c.num_things}, {"extra_dims", c.extra_dims},   {"noise", c.noise},
              {"count", c.count},           {"seed", c.seed}};
}

Json report_json(const TrainReport& r) {
  Json j;
  j["epsilon"] = r.epsilon;
  j["capped_out"] = r.capped_out;
  j["qp_nonconverged"] = r.qp_nonconverged;
  j["loose_boxes"] = r.loose_boxes;
  j["final_objective"] = r.final_objective;
  j["final_max_violation"] = r.final_max_violation;
  j["cccp_monotone"] = r.cccp_monotone;
  Json iters = Json::array();
  for (const auto& it : r.iterations) {
    iters.push_back(Json{{"phase", it.phase},
                         {"round", it.round},
                         {"iteration", it.iteration},
                         {"objective", it.objective},
                         {"max_violation", it.max_violation},
                         {"cuts_added", it.cuts_added},
                         {"total_cuts", it.total_cuts},
                         {"kkt_residual", it.kkt_residual},
                         {"qp_converged", it.qp_converged}});
  }
  j["iterations"] = iters;
  Json rounds = Json::array();
  for (const auto& c : r.cccp) {
    rounds.push_back(Json{{"round", c.round},
                          {"objective", c.objective},
                          {"previous_reevaluated", c.previous_reevaluated ? Json(*c.previous_reevaluated) : Json()},
                          {"imputation_changes", c.imputation_changes},
                          {"imputations_rejected", c.imputations_rejected},
                          {"monotone", c.monotone}});
  }
  j["cccp"] = rounds;
  if (r.wall_seconds) j["wall_seconds"] = *r.wall_seconds;
  return j;
}

std::vector<Label> to_internal(const std::vector<int>& disk, int num_labels) {
  std::vector<Label> out;
  for (int k : disk) {
    if (k < 0 || k >= num_labels) throw ValidationError("label id " + std::to_string(k) + " out of range");
    out.push_back(k + 1);
  }
  return out;
}

void add_train_options(CLI::App& app, TrainConfig& c) {
  app.add_option("--C", c.C, "Regularization constant")->capture_default_str();
  app.add_option("--alpha", c.alpha_balance, "Weight of weak-instance slacks")->capture_default_str();
  app.add_option("--beta", c.loss.beta, "Weight of box and seed loss terms")->capture_default_str();
  app.add_option("--epsilon", c.epsilon, "Cutting-plane tolerance in pixels (default: 1e-3 x mean pixels)");
  app.add_option("--max-cp-iters", c.max_cutting_plane_iters, "Cutting-plane iteration cap")->capture_default_str();
  app.add_option("--max-cccp-iters", c.max_cccp_iters, "CCCP round cap")->capture_default_str();
  app.add_option("--warm-start", c.warm_start, "Initialize from fully labelled data")->capture_default_str();
  app.add_option("--threads", c.threads, "Parallel separation workers")->capture_default_str();
  app.add_option("--qp-tolerance", c.qp_tolerance, "Relative KKT tolerance of the QP")->capture_default_str();
}

}  // namespace

std::string git_blob_hash_bytes(const std::string& bytes) {
  const std::string data = "blob " + std::to_string(bytes.size()) + std::string(1, '\0') + bytes;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha1(), nullptr) != 1) throw Error("SHA-1 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string git_blob_hash(const std::string& path) { return git_blob_hash_bytes(read_file(path)); }

WeakKind parse_weak_kind(const std::string& name) {
  if (name == "il") return WeakKind::ImageLevel;
  if (name == "bb") return WeakKind::Boxes;
  if (name == "os") return WeakKind::Seeds;
  throw ValidationError("unknown weak annotation kind '" + name + "' (expected il, bb or os)");
}

std::string weak_kind_name(WeakKind kind) {
  switch (kind) {
    case WeakKind::ImageLevel: return "il";
    case WeakKind::Boxes: return "bb";
    case WeakKind::Seeds: return "os";
  }
  return "il";
}

TrainMode parse_train_mode(const std::string& name) {
  if (name == "strong") return TrainMode::Strong;
  if (name == "multi") return TrainMode::MultiUtility;
  if (name == "hallucinated") return TrainMode::Hallucinated;
  throw ValidationError("unknown training mode '" + name + "' (expected strong, multi or hallucinated)");
}

std::string train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::Strong: return "strong";
    case TrainMode::MultiUtility: return "multi";
    case TrainMode::Hallucinated: return "hallucinated";
  }
  return "multi";
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "alpha") return SweepParameter::Alpha;
  if (name == "beta") return SweepParameter::Beta;
  if (name == "full_fraction") return SweepParameter::FullFraction;
  throw ValidationError("unknown sweep parameter '" + name + "' (expected alpha, beta or full_fraction)");
}

std::string sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::Alpha: return "alpha";
    case SweepParameter::Beta: return "beta";
    case SweepParameter::FullFraction: return "full_fraction";
  }
  return "alpha";
}

std::size_t full_count(double fraction, std::size_t n) {
  if (!(fraction >= 0 && fraction <= 1)) throw ValidationError("full fraction must lie in [0, 1]");
  if (fraction == 0 || n == 0) return 0;
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

std::vector<std::size_t> apply_annotation_mix(Dataset& dataset, double full_fraction, WeakKind kind,
                                              std::uint64_t seed) {
  for (const auto& inst : dataset.instances)
    if (is_weak(inst.annotation)) throw ValidationError("instance '" + inst.id + "' is not fully labelled");
  const auto keep = sample_subset(dataset, full_count(full_fraction, dataset.instances.size()), seed);
  std::vector<char> is_kept(dataset.instances.size(), 0);
  for (std::size_t i : keep) is_kept[i] = 1;
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    if (is_kept[i]) continue;
    auto& inst = dataset.instances[i];
    const Labelling y = std::get<FullAnnotation>(inst.annotation).labels;
    inst.annotation = derive_weak(inst, y, dataset.header, kind);
  }
  return keep;
}

TrainResult train_with_mode(std::span<const Instance> data, TrainMode mode, const TrainConfig& config) {
  switch (mode) {
    case TrainMode::Strong: {
      const Model zero = zero_model_for(data);
      const auto items = strong_items(data);
      if (items.empty()) throw ValidationError("strong training needs fully labelled instances");
      return train_ssvm(items, config, zero);
    }
    case TrainMode::MultiUtility: return train_multi_utility(data, config);
    case TrainMode::Hallucinated: return hallucinated_baseline(data, config);
  }
  throw ValidationError("unknown training mode");
}

Metrics evaluate_model(const Model& model, std::span<const Instance> data, const std::vector<Label>& excluded) {
  std::vector<Labelling> predictions, truths;
  std::vector<std::vector<double>> counts;
  for (const auto& inst : data) {
    const auto* full = std::get_if<FullAnnotation>(&inst.annotation);
    if (!full) throw ValidationError("evaluation instance '" + inst.id + "' is not fully labelled");
    predictions.push_back(map_inference(model, inst));
    truths.push_back(full->labels);
    counts.push_back(inst.pixel_counts());
  }
  if (data.empty()) throw ValidationError("nothing to evaluate");
  return evaluate(predictions, truths, counts, data.front().num_labels, excluded);
}

void cmd_synth(const SynthRun& run) {
  if (run.train_count < 0 || run.test_count < 0) throw ValidationError("instance counts must be nonnegative");
  if (run.out_dir.empty()) throw ValidationError("missing output directory");
  SynthConfig cfg = run.synth;
  cfg.count = run.train_count + run.test_count;
  const Dataset all = synth_generate(cfg);
  Dataset train{all.header, {all.instances.begin(), all.instances.begin() + run.train_count}};
  Dataset test{all.header, {all.instances.begin() + run.train_count, all.instances.end()}};
  const auto kept = apply_annotation_mix(train, run.full_fraction, run.weak, cfg.seed);

  fs::create_directories(run.out_dir);
  const std::string train_path = (fs::path(run.out_dir) / "train.jsonl").string();
  const std::string test_path = (fs::path(run.out_dir) / "test.jsonl").string();
  save_dataset(train_path, train);
  save_dataset(test_path, test);

  Json manifest;
  manifest["command"] = "synth";
  Json config = synth_config_json(cfg);
  config["train_count"] = run.train_count;
  config["test_count"] = run.test_count;
  config["full_fraction"] = run.full_fraction;
  config["weak"] = weak_kind_name(run.weak);
  manifest["config"] = config;
  Json full_ids = Json::array();
  for (std::size_t i : kept) full_ids.push_back(train.instances[i].id);
  manifest["full_instances"] = full_ids;
  manifest["outputs"] = Json{{"train", input_entry(train_path)}, {"test", input_entry(test_path)}};
  write_file((fs::path(run.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

void cmd_derive(const DeriveRun& run) {
  Dataset ds = load_dataset(run.input);
  apply_annotation_mix(ds, run.full_fraction, run.weak, run.seed);
  save_dataset(run.output, ds);
}

void cmd_train(const TrainRun& run) {
  run.train.validate();
  const Dataset ds = load_dataset(run.dataset);
  const auto start = std::chrono::steady_clock::now();
  TrainResult result = train_with_mode(ds.instances, run.mode, run.train);
  if (run.timing)
    result.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_model(run.model_out, result.model);
  if (!run.report_out.empty()) {
    Json report;
    report["command"] = "train";
    Json config = train_config_json(run.train);
    config["mode"] = train_mode_name(run.mode);
    report["config"] = config;
    report["inputs"] = Json{{"dataset", input_entry(run.dataset)}};
    report["report"] = report_json(result.report);
    write_file(run.report_out, report.dump(2) + "\n");
  }
}

void cmd_predict(const PredictRun& run) {
  const Model model = load_model(run.model);
  const Dataset ds = load_dataset(run.dataset);
  std::string out;
  for (const auto& inst : ds.instances) {
    Json labels = Json::array();
    for (Label k : map_inference(model, inst)) labels.push_back(k - 1);
    out += Json{{"id", inst.id}, {"labels", labels}}.dump() + "\n";
  }
  write_file(run.output, out);
}

void cmd_eval(const EvalRun& run) {
  const Model model = load_model(run.model);
  const Dataset ds = load_dataset(run.dataset);
  const Metrics m = evaluate_model(model, ds.instances, to_internal(run.excluded, ds.header.num_labels));
  std::ostringstream csv;
  write_metrics_csv(csv, {{run.experiment_id, run.split, m}}, ds.header.num_labels, ds.header.label_names);
  write_file(run.output, csv.str());
}

void cmd_sweep(const SweepRun& run) {
  if (run.values.empty()) throw ValidationError("sweep grid is empty");
  run.train_config.validate();
  const Dataset train = load_dataset(run.train);
  const Dataset test = load_dataset(run.test);
  const std::string name = sweep_parameter_name(run.parameter);

  std::set<std::string> done;
  const bool exists = fs::exists(run.output);
  if (exists) {
    std::ifstream in(run.output);
    std::string line;
    std::getline(in, line);
    if (line != "parameter,value,accuracy,recall")
      throw ValidationError("'" + run.output + "' is not a sweep CSV with the expected header");
    while (std::getline(in, line)) {
      const auto a = line.find(','), b = line.find(',', a + 1);
      if (a == std::string::npos || b == std::string::npos) continue;
      if (line.substr(0, a) == name) done.insert(line.substr(a + 1, b - a - 1));
    }
  }
  std::ofstream out(run.output, std::ios::app);
  if (!out) throw ValidationError("cannot open '" + run.output + "' for writing");
  if (!exists) out << "parameter,value,accuracy,recall\n";

  for (double v : run.values) {
    const std::string key = shortest(v);
    if (done.count(key)) continue;
    TrainConfig config = run.train_config;
    double fraction = run.full_fraction;
    if (run.parameter == SweepParameter::Alpha) config.alpha_balance = v;
    if (run.parameter == SweepParameter::Beta) config.loss.beta = v;
    if (run.parameter == SweepParameter::FullFraction) fraction = v;
    Dataset mixed = train;
    apply_annotation_mix(mixed, fraction, run.weak, run.seed);
    const TrainResult result = train_multi_utility(mixed.instances, config);
    const Metrics m = evaluate_model(result.model, test.instances);
    char acc[32], rec[32];
    std::snprintf(acc, sizeof acc, "%.6f", m.accuracy);
    std::snprintf(rec, sizeof rec, "%.6f", m.recall);
    out << name << "," << key << "," << acc << "," << rec << "\n";
    out.flush();
    done.insert(key);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Multi-utility structured SVM training for weakly annotated segmentation"};
  app.require_subcommand(1);

  SynthRun synth;
  std::string synth_weak = "il";
  auto* s = app.add_subcommand("synth", "Generate synthetic train/test datasets");
  s->add_option("--out", synth.out_dir, "Output directory")->required();
  s->add_option("--grid", synth.synth.grid_size, "Superpixels per side")->capture_default_str();
  s->add_option("--scale", synth.synth.pixel_scale, "Pixels per superpixel side")->capture_default_str();
  s->add_option("--stuff", synth.synth.num_stuff, "Number of stuff labels")->capture_default_str();
  s->add_option("--things", synth.synth.num_things, "Number of thing labels")->capture_default_str();
  s->add_option("--extra-dims", synth.synth.extra_dims, "Pure-noise feature dimensions")->capture_default_str();
  s->add_option("--noise", synth.synth.noise, "Feature noise level")->capture_default_str();
  s->add_option("--seed", synth.synth.seed, "Random seed")->capture_default_str();
  s->add_option("--train", synth.train_count, "Training instances")->capture_default_str();
  s->add_option("--test", synth.test_count, "Test instances")->capture_default_str();
  s->add_option("--full-fraction", synth.full_fraction, "Fraction kept fully labelled")->capture_default_str();
  s->add_option("--weak", synth_weak, "Weak annotation kind: il, bb or os")->capture_default_str();

  DeriveRun derive;
  std::string derive_weak_name = "il";
  auto* d = app.add_subcommand("derive", "Replace full labellings by derived weak annotations");
  d->add_option("--in", derive.input, "Fully labelled dataset")->required();
  d->add_option("--out", derive.output, "Output dataset")->required();
  d->add_option("--full-fraction", derive.full_fraction, "Fraction kept fully labelled")->capture_default_str();
  d->add_option("--weak", derive_weak_name, "Weak annotation kind: il, bb or os")->capture_default_str();
  d->add_option("--seed", derive.seed, "Subset sampling seed")->capture_default_str();

  TrainRun train;
  std::string mode = "multi";
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--data", train.dataset, "Training dataset")->required();
  t->add_option("--model", train.model_out, "Output model file")->required();
  t->add_option("--report", train.report_out, "Output report JSON");
  t->add_option("--mode", mode, "strong, multi or hallucinated")->capture_default_str();
  t->add_flag("--timing", train.timing, "Record wall time in the report");
  add_train_options(*t, train.train);

  PredictRun predict;
  auto* p = app.add_subcommand("predict", "Label a dataset with a trained model");
  p->add_option("--model", predict.model, "Model file")->required();
  p->add_option("--data", predict.dataset, "Dataset")->required();
  p->add_option("--out", predict.output, "Output JSONL of labellings")->required();

  EvalRun eval;
  auto* e = app.add_subcommand("eval", "Evaluate a model on a fully labelled dataset");
  e->add_option("--model", eval.model, "Model file")->required();
  e->add_option("--data", eval.dataset, "Dataset")->required();
  e->add_option("--out", eval.output, "Output metrics CSV")->required();
  e->add_option("--experiment-id", eval.experiment_id, "Experiment id column")->capture_default_str();
  e->add_option("--split", eval.split, "Split column")->capture_default_str();
  e->add_option("--exclude", eval.excluded, "Labels left out of the recall mean");

  SweepRun sweep;
  std::string sweep_param = "alpha", sweep_weak = "il";
  auto* w = app.add_subcommand("sweep", "Train and evaluate over a parameter grid (resumable)");
  w->add_option("--train", sweep.train, "Fully labelled training dataset")->required();
  w->add_option("--test", sweep.test, "Fully labelled test dataset")->required();
  w->add_option("--out", sweep.output, "Output CSV")->required();
  w->add_option("--param", sweep_param, "alpha, beta or full_fraction")->capture_default_str();
  w->add_option("--values", sweep.values, "Grid of values")->required();
  w->add_option("--full-fraction", sweep.full_fraction, "Fraction kept fully labelled")->capture_default_str();
  w->add_option("--weak", sweep_weak, "Weak annotation kind: il, bb or os")->capture_default_str();
  w->add_option("--seed", sweep.seed, "Subset sampling seed")->capture_default_str();
  add_train_options(*w, sweep.train_config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*s) {
      synth.weak = parse_weak_kind(synth_weak);
      cmd_synth(synth);
    } else if (*d) {
      derive.weak = parse_weak_kind(derive_weak_name);
      cmd_derive(derive);
    } else if (*t) {
      train.mode = parse_train_mode(mode);
      cmd_train(train);
    } else if (*p) {
      cmd_predict(predict);
    } else if (*e) {
      cmd_eval(eval);
    } else if (*w) {
      sweep.parameter = parse_sweep_parameter(sweep_param);
      sweep.weak = parse_weak_kind(sweep_weak);
      cmd_sweep(sweep);
    }
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kValidation;
  } catch (const InfeasibleError& err) {
    std::cerr << "infeasible annotation: " << err.what() << "\n";
    return kValidation;
  } catch (const InvariantError& err) {
    std::cerr << "invariant breach: " << err.what() << "\n";
    return kInvariant;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kRuntime;
  }
  return kOk;
}

}  // namespace mulearn::cli
