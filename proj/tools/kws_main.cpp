// Command-line front end: footprint | train | eval | infer | features.
// Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kws/attn/pooled_attention.hpp"
#include "kws/data/batcher.hpp"
#include "kws/data/dataset.hpp"
#include "kws/dsp/feature_cache.hpp"
#include "kws/eval/report.hpp"
#include "kws/model/checkpoint.hpp"
#include "kws/model/footprint.hpp"
#include "kws/train/trainer.hpp"
#include "kws/util/errors.hpp"
#include "kws/util/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string variant = "ST-AttNet4";
  std::string dataset_root;
  std::string output_dir = "out";
  std::string checkpoint;
  std::string wav_path;
  std::string attention_csv;
  std::string csv_path;
  std::string split = "test";
  std::uint64_t seed = 1;
  int epochs = 80;
  int batch_size = 100;
  double lr = 1e-3;
  bool no_cache = false;
  bool augment = false;
};

std::string default_cache_dir(const Options& opt) {
  return (fs::path(opt.output_dir) / "feature_cache").string();
}

void write_run_manifest(const Options& opt, const std::string& subcommand,
                        const std::string& checkpoint_path) {
  json manifest = {
      {"subcommand", subcommand},
      {"variant", opt.variant},
      {"dataset_root", opt.dataset_root},
      {"seed", opt.seed},
      {"epochs", opt.epochs},
      {"batch_size", opt.batch_size},
      {"initial_lr", opt.lr},
      {"augment", opt.augment},
      {"cache", !opt.no_cache},
  };
  if (!checkpoint_path.empty())
    manifest["checkpoint_sha256"] = kws::sha256_file_hex(checkpoint_path);
  std::ofstream out(fs::path(opt.output_dir) / "run_manifest.json");
  out << manifest.dump(2) << '\n';
}

int cmd_footprint(const Options& opt) {
  const auto spec = kws::model::ModelSpec::for_variant(opt.variant);
  const auto fp = kws::model::footprint(spec);
  std::cout << opt.variant << "\n" << kws::model::footprint_table(fp);
  if (!opt.csv_path.empty()) kws::model::write_footprint_csv(fp, opt.csv_path);
  return 0;
}

int cmd_train(const Options& opt) {
  fs::create_directories(opt.output_dir);
  const auto manifest = kws::data::scan_dataset(opt.dataset_root);
  std::cout << "dataset: " << manifest.raw_train << " train / "
            << manifest.raw_dev << " dev / " << manifest.raw_test
            << " test word files; final splits " << manifest.train.size()
            << " / " << manifest.dev.size() << " / " << manifest.test.size()
            << "\n";
  kws::data::write_manifest_csv(
      manifest, (fs::path(opt.output_dir) / "dataset_manifest.csv").string());

  std::optional<std::string> cache;
  if (!opt.no_cache) cache = default_cache_dir(opt);
  kws::data::PipelineSource train_source(opt.dataset_root, cache, opt.augment,
                                         opt.seed);
  kws::data::PipelineSource eval_source(opt.dataset_root, cache, false, 0);

  kws::model::Model model(kws::model::ModelSpec::for_variant(opt.variant),
                          opt.seed);
  kws::train::TrainConfig config;
  config.epochs = opt.epochs;
  config.batch_size = opt.batch_size;
  config.initial_lr = opt.lr;
  config.seed = opt.seed;

  const auto result = kws::train::fit(model, manifest.train, manifest.dev,
                                      train_source, eval_source, config,
                                      &std::cout);

  const std::string ckpt = (fs::path(opt.output_dir) / "checkpoint.kws").string();
  kws::model::save_checkpoint(ckpt, model);
  kws::train::write_history_csv(
      result.history, (fs::path(opt.output_dir) / "history.csv").string());
  write_run_manifest(opt, "train", ckpt);

  if (result.best_epoch >= 0)
    std::cout << "best epoch " << result.best_epoch << " dev_acc "
              << result.best_dev_acc << "\n";
  if (result.aborted) {
    std::cerr << "aborted: " << result.abort_reason << "\n";
    return 1;
  }
  return 0;
}

const std::vector<kws::data::Entry>& pick_split(
    const kws::data::SplitManifest& m, const std::string& name) {
  if (name == "train") return m.train;
  if (name == "dev") return m.dev;
  if (name == "test") return m.test;
  throw kws::ConfigError("unknown split '" + name + "'");
}

int cmd_eval(const Options& opt) {
  fs::create_directories(opt.output_dir);
  auto model = kws::model::load_checkpoint(opt.checkpoint);
  const auto manifest = kws::data::scan_dataset(opt.dataset_root);

  std::optional<std::string> cache;
  if (!opt.no_cache) cache = default_cache_dir(opt);
  kws::data::PipelineSource source(opt.dataset_root, cache, false, 0);

  const auto report = kws::eval::evaluate(
      model, pick_split(manifest, opt.split), source, opt.batch_size);
  kws::eval::write_report_files(report, opt.output_dir);
  write_run_manifest(opt, "eval", opt.checkpoint);
  std::cout << "split " << opt.split << ": accuracy " << report.accuracy
            << " over " << report.total << " examples, averaged AUC "
            << report.averaged.auc << "\n";
  return 0;
}

int cmd_infer(const Options& opt) {
  auto model = kws::model::load_checkpoint(opt.checkpoint);
  auto clip = kws::dsp::read_wav(opt.wav_path);
  if (clip.sample_rate_hz != 16000)
    throw kws::ValueError(opt.wav_path + ": expected a 16 kHz clip, got " +
                          std::to_string(clip.sample_rate_hz) +
                          " Hz (resampling is not applied)");
  clip = kws::dsp::pad_or_trim(std::move(clip), 16000);
  clip = kws::dsp::band_limit(clip, 20.0, 7800.0);
  const auto fm = kws::dsp::quantize_f32(kws::dsp::mfcc(clip));

  kws::Tensor batch({1, fm.frames(), fm.coeffs()});
  std::copy(fm.values.data(), fm.values.data() + fm.values.size(),
            batch.data());
  const kws::Tensor probs = model.predict_probs(batch);

  int best = 0;
  for (int j = 1; j < probs.dim(1); ++j)
    if (probs.at(0, j) > probs.at(0, best)) best = j;
  std::cout << "prediction: " << kws::data::label_name(best) << "\n";
  for (int j = 0; j < probs.dim(1); ++j)
    std::cout << "  " << kws::data::label_name(j) << " " << probs.at(0, j)
              << "\n";

  if (!opt.attention_csv.empty()) {
    if (model.spec().reduction != kws::model::Reduction::kPooledAttention)
      throw kws::ConfigError("this variant has no attention module");
    // re-run the conv stack to expose the attention input
    kws::Tape tape;
    kws::Tape::NodeId h = kws::nn::separable_unit(tape, tape.constant(batch),
                                             model.input_unit, kws::nn::Mode::kInfer);
    for (auto& blk : model.blocks)
      h = kws::nn::residual_block(tape, h, blk, kws::nn::Mode::kInfer);
    const kws::Tensor& seq3 = tape.value(h);
    const kws::Tensor seq = seq3.reshaped({seq3.dim(1), seq3.dim(2)});
    std::ofstream out(opt.attention_csv);
    if (!out) throw kws::IoError("cannot write " + opt.attention_csv);
    out << "frame";
    for (int head = 0; head < model.spec().heads; ++head)
      out << ",head" << head;
    out << "\n";
    std::vector<std::vector<double>> weights;
    for (int head = 0; head < model.spec().heads; ++head)
      weights.push_back(kws::attn::attention_weights(
          seq, model.attention_w.value, model.spec().heads, head));
    for (int t = 0; t < seq.dim(0); ++t) {
      out << t;
      for (const auto& w : weights) out << ',' << w[size_t(t)];
      out << "\n";
    }
  }
  return 0;
}

int cmd_features(const Options& opt) {
  const auto manifest = kws::data::scan_dataset(opt.dataset_root);
  const std::string cache = default_cache_dir(opt);
  kws::data::PipelineSource source(opt.dataset_root, cache, false, 0);
  long built = 0;
  for (const auto* split : {&manifest.train, &manifest.dev, &manifest.test})
    for (const auto& entry : *split) {
      source.features(entry);
      ++built;
    }
  kws::data::write_manifest_csv(
      manifest, (fs::path(opt.output_dir) / "dataset_manifest.csv").string());
  std::cout << "cached features for " << built << " examples under " << cache
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"small-footprint keyword spotting: separable temporal "
               "convolutions with temporally pooled attention"};
  app.require_subcommand(1);
  Options opt;

  auto add_variant = [&opt](CLI::App* cmd) {
    cmd->add_option("--variant", opt.variant,
                    "ST-AttNet4 | ST-AttNet4-wide | ST-AttNet7 | ST-Net4");
  };

  CLI::App* footprint = app.add_subcommand(
      "footprint", "per-layer parameter and multiplier table");
  footprint->add_option("variant", opt.variant)->required();
  footprint->add_option("--csv", opt.csv_path, "also write the table as CSV");

  CLI::App* train = app.add_subcommand("train", "train a variant");
  add_variant(train);
  train->add_option("--data", opt.dataset_root, "dataset root")->required();
  train->add_option("--output-dir", opt.output_dir);
  train->add_option("--epochs", opt.epochs);
  train->add_option("--batch-size", opt.batch_size);
  train->add_option("--lr", opt.lr);
  train->add_option("--seed", opt.seed);
  train->add_flag("--no-cache", opt.no_cache, "recompute features every epoch");
  train->add_flag("--augment", opt.augment,
                  "time-shift/noise augmentation (off by default)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", opt.checkpoint)
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", opt.dataset_root)->required();
  eval_cmd->add_option("--output-dir", opt.output_dir);
  eval_cmd->add_option("--split", opt.split, "train | dev | test");
  eval_cmd->add_option("--batch-size", opt.batch_size);
  eval_cmd->add_flag("--no-cache", opt.no_cache);

  CLI::App* infer = app.add_subcommand("infer", "classify one WAV clip");
  infer->add_option("--checkpoint", opt.checkpoint)
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("wav", opt.wav_path)->required();
  infer->add_option("--attention", opt.attention_csv,
                    "dump per-head attention weights as CSV");

  CLI::App* features = app.add_subcommand("features", "build the feature cache");
  features->add_option("--data", opt.dataset_root)->required();
  features->add_option("--output-dir", opt.output_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (footprint->parsed()) return cmd_footprint(opt);
    if (train->parsed()) return cmd_train(opt);
    if (eval_cmd->parsed()) return cmd_eval(opt);
    if (infer->parsed()) return cmd_infer(opt);
    if (features->parsed()) return cmd_features(opt);
  } catch (const kws::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
