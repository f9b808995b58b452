#include "hapauth/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hapauth/checkpoint.hpp"
#include "hapauth/dataset_io.hpp"
#include "hapauth/error.hpp"
#include "hapauth/experiment.hpp"
#include "hapauth/gradcheck.hpp"
#include "hapauth/report.hpp"
#include "hapauth/rng.hpp"
#include "hapauth/signal.hpp"

namespace fs = std::filesystem;

namespace hapauth::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path default_output(const std::string& leaf) {
  const char* root = std::getenv(kOutputRootEnv);
  return fs::path(root != nullptr && *root != '\0' ? root : "hapauth_out") / leaf;
}

// Refuses to reuse a non-empty directory unless --force was given.
void prepare_dir(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw UsageError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir, ec) && !force) {
      throw UsageError(dir.string() + " is not empty; pass --force to overwrite");
    }
  }
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".hapauth_write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw UsageError(dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

void prepare_file(const fs::path& file, bool force) {
  std::error_code ec;
  if (fs::exists(file, ec) && !force) throw UsageError(file.string() + " exists; pass --force to overwrite");
  if (file.has_parent_path()) {
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw UsageError("cannot create " + file.parent_path().string() + ": " + ec.message());
  }
}

std::string trace_file_name(const TraceKey& key) {
  return key.user_id + "_" + key.task_id + "_" + std::to_string(key.trial_index) + ".csv";
}

std::vector<std::string> task_labels(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    if (i < 26) {
      out.emplace_back(1, static_cast<char>('a' + i));
    } else {
      out.push_back("t" + std::to_string(i));
    }
  }
  return out;
}

TraceCollection load_from_manifest(const fs::path& manifest_path, DatasetManifest* manifest_out = nullptr) {
  auto manifest = read_manifest(manifest_path);
  auto data = load_dataset(manifest, manifest_path.parent_path());
  if (manifest_out != nullptr) *manifest_out = std::move(manifest);
  return data;
}

// Optional overrides shared by the training subcommands.
struct TrainFlags {
  std::string kind = "user-id";
  std::string variant = "raw";
  std::uint64_t seed = 0;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> d_model;
  std::optional<std::size_t> heads;
  std::optional<std::size_t> ffn;
  std::optional<std::size_t> layers;
  std::optional<std::size_t> seq_len;
  std::optional<std::size_t> train_per_class;
  std::optional<std::size_t> test_per_class;
  std::optional<double> dropout;
  bool no_normalize = false;
  bool raw_force_channels = false;
  unsigned workers = 0;

  void add_to(CLI::App* app) {
    app->add_option("--kind", kind, "Experiment kind: user-id | task")->check(CLI::IsMember({"user-id", "task"}));
    app->add_option("--variant", variant, "Force data variant: raw | filtered")
        ->check(CLI::IsMember({"raw", "filtered"}));
    app->add_option("--seed", seed, "Base seed (model i uses seed + i)");
    app->add_option("--epochs", epochs, "Training epochs (default 100)");
    app->add_option("--lr", lr, "Base learning rate (default 1e-4)");
    app->add_option("--batch-size", batch_size, "Batch size (default 16)");
    app->add_option("--d-model", d_model, "Model width (default 256)");
    app->add_option("--heads", heads, "Attention heads (default 16)");
    app->add_option("--ffn", ffn, "Feed-forward width (default 256)");
    app->add_option("--layers", layers, "Encoder layers (default 2)");
    app->add_option("--seq-len", seq_len, "Resampled length (default 512 user-id, 64 task)");
    app->add_option("--train-per-class", train_per_class, "Training trials per (user, task) group (default 100)");
    app->add_option("--test-per-class", test_per_class, "Test trials per (user, task) group (default 20)");
    app->add_option("--dropout", dropout, "Dropout probability (default 0)");
    app->add_flag("--no-normalize", no_normalize, "Skip z-score normalization of features");
    app->add_flag("--raw-force-channels", raw_force_channels, "Append fx, fy, fz to the 13 derived channels");
    app->add_option("--workers", workers, "Parallel model trainings (0 = all cores)");
  }

  ExperimentConfig build() const {
    auto cfg = default_experiment_config(parse_experiment_kind(kind));
    cfg.variant = parse_variant(variant);
    cfg.train.seed = seed;
    if (epochs) cfg.train.epochs = *epochs;
    if (lr) cfg.train.learning_rate = *lr;
    if (batch_size) cfg.train.batch_size = *batch_size;
    if (train_per_class) cfg.train.train_per_class = *train_per_class;
    if (test_per_class) cfg.train.test_per_class = *test_per_class;
    cfg.train.normalize = !no_normalize;
    if (d_model) cfg.model.d_model = *d_model;
    if (heads) cfg.model.num_heads = *heads;
    if (ffn) cfg.model.ffn_dim = *ffn;
    if (layers) cfg.model.num_layers = *layers;
    if (seq_len) cfg.model.seq_len = *seq_len;
    if (dropout) cfg.model.dropout = *dropout;
    cfg.append_raw_force = raw_force_channels;
    cfg.model.input_channels = pipeline_channels({cfg.model.seq_len, cfg.append_raw_force});
    cfg.workers = workers;
    cfg.train.validate();
    ModelConfig probe = cfg.model;
    probe.num_classes = 2;
    probe.validate();
    return cfg;
  }
};

nlohmann::ordered_json experiment_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(cfg.kind));
  j["variant"] = std::string(to_string(cfg.variant));
  j["append_raw_force"] = cfg.append_raw_force;
  j["train"] = to_json(cfg.train);
  j["model"] = to_json(cfg.model);
  return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    cfg.kind = parse_experiment_kind(j.at("kind").get<std::string>());
    cfg.variant = parse_variant(j.at("variant").get<std::string>());
    cfg.append_raw_force = j.at("append_raw_force").get<bool>();
    cfg.train = train_config_from_json(j.at("train"));
    cfg.model = model_config_from_json(j.at("model"));
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("invalid experiment file: ") + ex.what());
  }
  return cfg;
}

// ---- subcommands ----

struct SynthFlags {
  fs::path out;
  int users = 15;
  int tasks = 7;
  int trials = 120;
  std::uint64_t seed = 1;
  double duration_min = 1.5;
  double duration_max = 3.0;
  bool force = false;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  SynthConfig cfg;
  cfg.num_users = f.users;
  if (f.tasks < 1) throw ConfigError("--tasks must be >= 1");
  cfg.tasks = task_labels(f.tasks);
  cfg.trials_per_task = f.trials;
  cfg.seed = f.seed;
  cfg.duration_range = {f.duration_min, f.duration_max};
  cfg.validate();

  const fs::path dir = f.out.empty() ? default_output("dataset") : f.out;
  prepare_dir(dir, f.force);
  fs::create_directories(dir / "raw");

  auto data = synth_dataset(cfg);
  DatasetManifest manifest;
  manifest.sample_rate = cfg.sample_rate;
  for (const auto& trace : data.traces()) {
    const fs::path rel = fs::path("raw") / trace_file_name(trace.key);
    write_text_file(dir / rel, write_trace_csv(trace));
    manifest.entries.push_back({rel, trace.key});
  }
  write_manifest(manifest, dir / "manifest.json");
  out << "wrote " << data.size() << " traces (" << cfg.num_users << " users x " << cfg.tasks.size() << " tasks x "
      << cfg.trials_per_task << " trials) to " << dir.string() << "\n";
  return kOk;
}

struct FilterFlags {
  fs::path manifest;
  fs::path out;
  float alpha = kDefaultEmaAlpha;
  bool force = false;
};

int cmd_filter(const FilterFlags& f, std::ostream& out) {
  if (!(f.alpha > 0.0f && f.alpha <= 1.0f)) throw ConfigError("--alpha must lie in (0, 1]");
  DatasetManifest in_manifest;
  auto data = load_from_manifest(f.manifest, &in_manifest);
  const fs::path dir = f.out.empty() ? default_output("filtered") : f.out;
  prepare_dir(dir, f.force);
  fs::create_directories(dir / "filtered");

  const fs::path in_dir = fs::absolute(f.manifest).parent_path();
  const fs::path out_dir = fs::absolute(dir);
  DatasetManifest manifest;
  manifest.sample_rate = in_manifest.sample_rate;
  std::size_t filtered = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& entry = in_manifest.entries[i];
    const fs::path src = entry.path.is_absolute() ? entry.path : in_dir / entry.path;
    manifest.entries.push_back({fs::relative(src, out_dir), entry.key});
    if (entry.key.variant != Variant::raw) continue;

    const auto& trace = data[i];
    TraceKey key = trace.key;
    key.variant = Variant::filtered;
    if (data.find(key)) continue;  // already present in the input
    const Matrix smoothed = ema_filter(trace.forces(), f.alpha);
    ForceTrace ft;
    ft.key = key;
    ft.sample_rate = trace.sample_rate;
    ft.samples = trace.samples;
    for (std::size_t t = 0; t < ft.samples.size(); ++t) {
      ft.samples[t].fx = smoothed(t, 0);
      ft.samples[t].fy = smoothed(t, 1);
      ft.samples[t].fz = smoothed(t, 2);
    }
    const fs::path rel = fs::path("filtered") / trace_file_name(key);
    write_text_file(dir / rel, write_trace_csv(ft));
    manifest.entries.push_back({rel, key});
    ++filtered;
  }
  write_manifest(manifest, dir / "manifest.json");
  out << "filtered " << filtered << " traces (alpha " << f.alpha << ") into " << dir.string() << "\n";
  return kOk;
}

struct TrainExperimentFlags {
  fs::path manifest;
  fs::path out;
  bool force = false;
  TrainFlags train;
};

int cmd_train_experiment(const TrainExperimentFlags& f, std::ostream& out) {
  const auto cfg = f.train.build();
  auto data = load_from_manifest(f.manifest);
  const fs::path dir = f.out.empty() ? default_output("experiment") : f.out;
  prepare_dir(dir, f.force);

  auto result = run_experiment(data, cfg);
  nlohmann::ordered_json exp = experiment_json(cfg);
  auto models = nlohmann::ordered_json::array();
  for (const auto& run : result.runs) {
    Checkpoint ckpt;
    ckpt.model = run.model;
    ckpt.metadata["model_id"] = run.model_id;
    ckpt.metadata["labels"] = run.labels;
    ckpt.metadata["seed"] = run.seed;
    if (run.norm) ckpt.metadata["normalization"] = norm_stats_json(*run.norm);
    save_checkpoint(ckpt, dir / (run.model_id + ".ckpt"));

    TrainConfig tcfg = cfg.train;
    tcfg.seed = run.seed;
    write_text_file(dir / (run.model_id + ".history.json"),
                    history_json(run.model_id, tcfg, run.model.config, run.history).dump(1) + "\n");
    models.push_back({{"id", run.model_id}, {"checkpoint", run.model_id + ".ckpt"}, {"labels", run.labels},
                      {"train_size", run.train_keys.size()}, {"test_size", run.test.size()}});
    const auto& last = run.history.epochs.back();
    out << run.model_id << ": " << run.train_keys.size() << " train / " << run.test.size()
        << " test, final loss " << last.loss << ", train acc " << last.accuracy << "\n";
  }
  exp["models"] = std::move(models);
  write_text_file(dir / "experiment.json", exp.dump(1) + "\n");
  out << "trained " << result.runs.size() << " models into " << dir.string() << "\n";
  return kOk;
}

struct EvalExperimentFlags {
  fs::path experiment;
  fs::path manifest;
  fs::path out;
  bool force = false;
  unsigned workers = 0;
};

int cmd_eval_experiment(const EvalExperimentFlags& f, std::ostream& out) {
  const auto exp = nlohmann::json::parse(read_text_file(f.experiment / "experiment.json"), nullptr, false);
  if (exp.is_discarded()) throw DataError((f.experiment / "experiment.json").string() + ": invalid JSON");
  auto cfg = experiment_from_json(exp);
  cfg.workers = f.workers;

  std::vector<Checkpoint> checkpoints;
  for (const auto& m : exp.at("models")) {
    const auto id = m.at("id").get<std::string>();
    const fs::path file = f.experiment / m.at("checkpoint").get<std::string>();
    if (!fs::exists(file)) throw DataError("missing checkpoint for model " + id + " (" + file.string() + ")");
    checkpoints.push_back(load_checkpoint(file));
  }

  auto data = load_from_manifest(f.manifest);
  const auto prepared = prepare_experiment(data, cfg);
  if (prepared.size() != checkpoints.size()) {
    throw DataError("experiment lists " + std::to_string(checkpoints.size()) + " models but the dataset implies " +
                    std::to_string(prepared.size()));
  }

  const fs::path dir = f.out.empty() ? default_output("reports") : f.out;
  prepare_dir(dir, f.force);

  std::vector<std::vector<FeatureSequence>> tests(prepared.size());
  std::vector<ModelUnderTest> models;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    const auto& ckpt = checkpoints[i];
    const auto id = ckpt.metadata.at("model_id").get<std::string>();
    if (id != prepared[i].model_id) throw DataError("checkpoint " + id + " does not pair with " + prepared[i].model_id);
    tests[i] = prepared[i].test;
    if (ckpt.metadata.contains("normalization")) {
      const auto stats = norm_stats_from_json(ckpt.metadata["normalization"]);
      for (auto& s : tests[i]) s.values = zscore_apply(s.values, stats);
    }
    models.push_back({id, &ckpt.model, ckpt.metadata.at("labels").get<std::vector<std::string>>(), tests[i]});
  }
  const auto agg = evaluate_experiment(std::string(to_string(cfg.kind)), models);
  for (const auto& r : agg.reports) {
    write_text_file(dir / (r.model_id + ".json"), report_json(r).dump(1) + "\n");
    write_text_file(dir / (r.model_id + ".csv"), matrix_csv(r));
    write_text_file(dir / (r.model_id + ".svg"), matrix_svg(r));
    out << r.model_id << ": accuracy " << r.accuracy << "\n";
  }
  write_text_file(dir / "aggregate.json", aggregate_json(agg).dump(1) + "\n");
  write_text_file(dir / "aggregate_models.csv", aggregate_models_csv(agg));
  write_text_file(dir / "aggregate_classes.csv", aggregate_classes_csv(agg));
  out << "mean accuracy " << agg.mean_accuracy << ", mean precision " << agg.mean_precision << "\n";
  return kOk;
}

struct SweepFlags {
  fs::path manifest;
  fs::path out;
  std::vector<std::size_t> sizes;
  bool force = false;
  TrainFlags train;
};

int cmd_sweep(SweepFlags f, std::ostream& out) {
  if (f.sizes.empty()) f.sizes = default_sweep_sizes();
  const auto cfg = f.train.build();
  const fs::path file = f.out.empty() ? default_output("sweep.csv") : f.out;
  prepare_file(file, f.force);
  auto data = load_from_manifest(f.manifest);
  const auto points = sweep_training_size(data, cfg, f.sizes);
  write_text_file(file, sweep_csv(points));
  for (const auto& p : points) out << p.size << "," << p.mean_accuracy << "\n";
  return kOk;
}

struct GradcheckFlags {
  std::size_t d_model = 256;
  std::size_t heads = 16;
  std::size_t ffn = 256;
  std::size_t layers = 2;
  std::size_t classes = 7;
  std::size_t batch = 2;
  std::size_t seq_len = 8;
  std::size_t samples = 200;
  double eps = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
  bool quadratic = false;
  bool inject_fault = false;
};

int cmd_gradcheck(const GradcheckFlags& f, std::ostream& out) {
  ad::GradCheckOptions opts;
  opts.eps = f.eps;
  opts.samples = f.samples;
  opts.seed = f.seed;

  std::optional<ad::InjectBackwardFault> fault;
  if (f.inject_fault) fault.emplace();

  ad::GradCheckResult res;
  if (f.quadratic) {
    Rng rng(f.seed);
    std::vector<double> v(64);
    // random signs, magnitudes in [0.5, 2]
    for (auto& x : v) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
    auto theta = ad::Tensor<double>::from({64}, v, true);
    // sum of squares as a 1x64 by 64x1 product
    auto loss_fn = [&] {
      auto row = ad::reshape(theta, {1, 64});
      auto col = ad::reshape(theta, {64, 1});
      return ad::sum(ad::matmul(row, col));
    };
    res = ad::grad_check(loss_fn, {theta}, opts);
  } else {
    ModelConfig cfg;
    cfg.input_channels = kFeatureChannels;
    cfg.d_model = f.d_model;
    cfg.num_heads = f.heads;
    cfg.ffn_dim = f.ffn;
    cfg.num_layers = f.layers;
    cfg.num_classes = f.classes;
    cfg.seq_len = f.seq_len;
    cfg.validate();
    auto params = build_model<double>(cfg, f.seed);
    Rng rng(derive_seed(f.seed, "gradcheck-batch"));
    std::vector<double> x(f.batch * f.seq_len * cfg.input_channels);
    for (auto& v : x) v = rng.normal();
    std::vector<int> labels(f.batch);
    for (auto& y : labels) y = static_cast<int>(rng.below(cfg.num_classes));
    auto input = ad::Tensor<double>::from({f.batch, f.seq_len, cfg.input_channels}, std::move(x));
    auto loss_fn = [&] { return ad::cross_entropy(forward(params, cfg, input), std::span<const int>(labels)); };
    res = ad::grad_check(loss_fn, params.tensors(), opts);
  }
  const bool pass = res.checked >= std::min<std::size_t>(f.samples, 1) && res.max_rel_error < f.tolerance;
  out << (pass ? "PASS" : "FAIL") << " max_rel_error=" << res.max_rel_error << " checked=" << res.checked
      << " skipped_kinks=" << res.skipped_kinks << " tolerance=" << f.tolerance << "\n";
  return pass ? kOk : kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Haptic force-trace biometrics toolkit", "hapauth"};
  app.require_subcommand(1);

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic force-trace dataset");
  synth_cmd->add_option("--out", synth.out, "Output directory (CSV files + manifest.json)");
  synth_cmd->add_option("--users", synth.users, "Number of users (>= 2)");
  synth_cmd->add_option("--tasks", synth.tasks, "Number of tasks, labelled a, b, c, ...");
  synth_cmd->add_option("--trials", synth.trials, "Trials per (user, task)");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--duration-min", synth.duration_min, "Shortest trial duration in seconds");
  synth_cmd->add_option("--duration-max", synth.duration_max, "Longest trial duration in seconds");
  synth_cmd->add_flag("--force", synth.force, "Overwrite a non-empty output directory");

  FilterFlags filter;
  auto* filter_cmd = app.add_subcommand("filter", "Write EMA-filtered copies of the raw traces");
  filter_cmd->add_option("--manifest", filter.manifest, "Input manifest")->required();
  filter_cmd->add_option("--out", filter.out, "Output directory");
  filter_cmd->add_option("--alpha", filter.alpha, "Smoothing constant in (0, 1]");
  filter_cmd->add_flag("--force", filter.force, "Overwrite a non-empty output directory");

  TrainExperimentFlags train_exp;
  auto* train_cmd = app.add_subcommand("train-experiment", "Train the user-id (per task) or task (per user) models");
  train_cmd->add_option("--manifest", train_exp.manifest, "Dataset manifest")->required();
  train_cmd->add_option("--out", train_exp.out, "Checkpoint directory");
  train_cmd->add_flag("--force", train_exp.force, "Overwrite a non-empty output directory");
  train_exp.train.add_to(train_cmd);

  EvalExperimentFlags eval_exp;
  auto* eval_cmd = app.add_subcommand("eval-experiment", "Evaluate trained checkpoints on their test splits");
  eval_cmd->add_option("--checkpoints", eval_exp.experiment, "Directory written by train-experiment")->required();
  eval_cmd->add_option("--manifest", eval_exp.manifest, "Dataset manifest")->required();
  eval_cmd->add_option("--out", eval_exp.out, "Report directory");
  eval_cmd->add_option("--workers", eval_exp.workers, "Parallel workers for feature extraction");
  eval_cmd->add_flag("--force", eval_exp.force, "Overwrite a non-empty output directory");

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy as a function of training instances per class");
  sweep_cmd->add_option("--manifest", sweep.manifest, "Dataset manifest")->required();
  sweep_cmd->add_option("--out", sweep.out, "Output CSV file");
  sweep_cmd->add_option("--sizes", sweep.sizes, "Comma-separated sizes (default 5,10,...,100)")->delimiter(',');
  sweep_cmd->add_flag("--force", sweep.force, "Overwrite an existing output file");
  sweep.train.kind = "task";
  sweep.train.add_to(sweep_cmd);

  GradcheckFlags gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Compare backprop against central differences in 64-bit");
  gc_cmd->add_option("--d-model", gc.d_model);
  gc_cmd->add_option("--heads", gc.heads);
  gc_cmd->add_option("--ffn", gc.ffn);
  gc_cmd->add_option("--layers", gc.layers);
  gc_cmd->add_option("--classes", gc.classes);
  gc_cmd->add_option("--batch", gc.batch);
  gc_cmd->add_option("--seq-len", gc.seq_len);
  gc_cmd->add_option("--samples", gc.samples, "Coordinates to check");
  gc_cmd->add_option("--eps", gc.eps, "Central-difference step");
  gc_cmd->add_option("--tolerance", gc.tolerance, "Maximum allowed relative error");
  gc_cmd->add_option("--seed", gc.seed);
  gc_cmd->add_flag("--quadratic", gc.quadratic, "Self-test on sum of squares instead of the model");
  gc_cmd->add_flag("--inject-fault", gc.inject_fault, "Corrupt relu backward (negative control)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (filter_cmd->parsed()) return cmd_filter(filter, out);
    if (train_cmd->parsed()) return cmd_train_experiment(train_exp, out);
    if (eval_cmd->parsed()) return cmd_eval_experiment(eval_exp, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, out);
    if (gc_cmd->parsed()) return cmd_gradcheck(gc, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsageError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace hapauth::cli
