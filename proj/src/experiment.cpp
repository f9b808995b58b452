#include "hapauth/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "hapauth/error.hpp"
#include "hapauth/rng.hpp"

namespace hapauth {

std::string_view to_string(ExperimentKind kind) { return kind == ExperimentKind::user_id ? "user-id" : "task"; }

ExperimentKind parse_experiment_kind(std::string_view s) {
  if (s == "user-id") return ExperimentKind::user_id;
  if (s == "task") return ExperimentKind::task;
  throw ConfigError("unknown experiment kind '" + std::string(s) + "' (expected user-id|task)");
}

std::map<GroupKey, GroupSplit> split_dataset(const std::map<GroupKey, std::vector<std::size_t>>& groups,
                                             std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  std::map<GroupKey, GroupSplit> out;
  for (const auto& [key, members] : groups) {
    if (members.size() < n_train + n_test) {
      throw CoverageError("group (" + key.first + ", " + key.second + ") has " + std::to_string(members.size()) +
                          " trials, needs " + std::to_string(n_train + n_test));
    }
    std::vector<std::size_t> shuffled = members;
    Rng rng(derive_seed(seed, key.first + "/" + key.second));
    rng.shuffle(shuffled.begin(), shuffled.end());
    GroupSplit split;
    split.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train),
                      shuffled.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
    out.emplace(key, std::move(split));
  }
  return out;
}

ExperimentConfig default_experiment_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.model.seq_len = kind == ExperimentKind::user_id ? 512 : 64;
  return cfg;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<ModelData> prepare_experiment(const TraceCollection& data, const ExperimentConfig& cfg) {
  const auto users = data.users();
  const auto tasks = data.tasks();
  if (users.empty() || tasks.empty()) throw CoverageError("dataset is empty");
  const auto groups = data.groups(cfg.variant);
  for (const auto& u : users) {
    for (const auto& t : tasks) {
      if (!groups.contains({u, t})) {
        throw CoverageError("no " + std::string(to_string(cfg.variant)) + " traces for user " + u + ", task " + t);
      }
    }
  }
  const auto split = split_dataset(groups, cfg.train.train_per_class, cfg.train.test_per_class, cfg.train.seed);

  const bool by_task = cfg.kind == ExperimentKind::user_id;
  const auto& outer = by_task ? tasks : users;  // one model each
  const auto& classes = by_task ? users : tasks;
  if (classes.size() < 2) {
    throw CoverageError("experiment " + std::string(to_string(cfg.kind)) + " needs at least 2 classes, dataset has " +
                        std::to_string(classes.size()));
  }

  PipelineOptions popts;
  popts.target_len = cfg.model.seq_len;
  popts.append_raw_force = cfg.append_raw_force;

  std::vector<ModelData> models(outer.size());
  for (std::size_t m = 0; m < outer.size(); ++m) {
    auto& md = models[m];
    md.model_index = m;
    md.model_id = by_task ? "user-id_task-" + outer[m] : "task_user-" + outer[m];
    md.labels = classes;
  }
  parallel_for(outer.size(), cfg.workers, [&](std::size_t m) {
    auto& md = models[m];
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const GroupKey key = by_task ? GroupKey{classes[c], outer[m]} : GroupKey{outer[m], classes[c]};
      const auto& gs = split.at(key);
      for (std::size_t idx : gs.train) {
        auto seq = pipeline(data[idx], popts);
        seq.label = static_cast<int>(c);
        md.train.push_back(std::move(seq));
      }
      for (std::size_t idx : gs.test) {
        auto seq = pipeline(data[idx], popts);
        seq.label = static_cast<int>(c);
        md.test.push_back(std::move(seq));
      }
    }
  });
  return models;
}

ModelRun train_model(const ExperimentConfig& cfg, const ModelData& data) {
  ModelRun run;
  run.model_id = data.model_id;
  run.labels = data.labels;
  run.seed = cfg.train.seed + data.model_index;

  ModelConfig mcfg = cfg.model;
  mcfg.num_classes = data.labels.size();
  mcfg.input_channels = pipeline_channels({cfg.model.seq_len, cfg.append_raw_force});

  std::vector<FeatureSequence> train_set = data.train;
  run.test = data.test;
  if (cfg.train.normalize) {
    std::vector<const Matrix*> mats;
    for (const auto& s : train_set) mats.push_back(&s.values);
    run.norm = zscore_fit(std::span<const Matrix* const>(mats));
    for (auto& s : train_set) s.values = zscore_apply(s.values, *run.norm);
    for (auto& s : run.test) s.values = zscore_apply(s.values, *run.norm);
  }
  for (const auto& s : train_set) run.train_keys.push_back(s.source);

  TrainConfig tcfg = cfg.train;
  tcfg.seed = run.seed;
  auto trained = train(tcfg, mcfg, train_set);
  run.model = std::move(trained.model);
  run.history = std::move(trained.history);
  return run;
}

namespace {

ExperimentResult run_models(const std::vector<ModelData>& prepared, const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.config = cfg;
  result.runs.resize(prepared.size());
  parallel_for(prepared.size(), cfg.workers,
               [&](std::size_t i) { result.runs[i] = train_model(cfg, prepared[i]); });
  return result;
}

}  // namespace

ExperimentResult train_user_id_models(const TraceCollection& data, ExperimentConfig cfg) {
  cfg.kind = ExperimentKind::user_id;
  return run_models(prepare_experiment(data, cfg), cfg);
}

ExperimentResult train_task_models(const TraceCollection& data, ExperimentConfig cfg) {
  cfg.kind = ExperimentKind::task;
  return run_models(prepare_experiment(data, cfg), cfg);
}

ExperimentResult run_experiment(const TraceCollection& data, const ExperimentConfig& cfg) {
  return cfg.kind == ExperimentKind::user_id ? train_user_id_models(data, cfg) : train_task_models(data, cfg);
}

AggregateReport evaluate_runs(const ExperimentResult& result) {
  std::vector<ModelUnderTest> models;
  for (const auto& r : result.runs) models.push_back({r.model_id, &r.model, r.labels, r.test});
  return evaluate_experiment(std::string(to_string(result.config.kind)), models);
}

std::vector<std::size_t> default_sweep_sizes() {
  std::vector<std::size_t> sizes;
  for (std::size_t s = 5; s <= 100; s += 5) sizes.push_back(s);
  return sizes;
}

std::vector<FeatureSequence> subsample_per_class(const std::vector<FeatureSequence>& seqs, std::size_t per_class,
                                                 std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < seqs.size(); ++i) by_class[seqs[i].label].push_back(i);
  std::vector<std::size_t> keep;
  for (auto& [label, idx] : by_class) {
    if (idx.size() < per_class) {
      throw CoverageError("class " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                          " training sequences, sweep size needs " + std::to_string(per_class));
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
    std::vector<std::size_t> perm = idx;
    rng.shuffle(perm.begin(), perm.end());
    keep.insert(keep.end(), perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  std::sort(keep.begin(), keep.end());
  std::vector<FeatureSequence> out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(seqs[i]);
  return out;
}

std::vector<SweepPoint> sweep_training_size(const TraceCollection& data, const ExperimentConfig& cfg,
                                            std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw ConfigError("sweep needs at least one training size");
  const std::size_t max_size = *std::max_element(sizes.begin(), sizes.end());
  if (*std::min_element(sizes.begin(), sizes.end()) == 0) throw ConfigError("sweep sizes must be positive");
  if (max_size > cfg.train.train_per_class) {
    throw ConfigError("sweep size " + std::to_string(max_size) + " exceeds the train split of " +
                      std::to_string(cfg.train.train_per_class) + " per class");
  }
  const auto prepared = prepare_experiment(data, cfg);

  std::vector<SweepPoint> points(sizes.size());
  const std::size_t jobs = sizes.size() * prepared.size();
  std::vector<double> acc(jobs, 0.0);
  parallel_for(jobs, cfg.workers, [&](std::size_t job) {
    const std::size_t si = job / prepared.size();
    const auto& md = prepared[job % prepared.size()];
    ModelData sub = md;
    sub.train = subsample_per_class(md.train, sizes[si], derive_seed(cfg.train.seed, "sweep/" + md.model_id));
    auto run = train_model(cfg, sub);
    acc[job] = evaluate_model(run.model, run.test, run.labels, run.model_id).accuracy;
  });
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    auto& p = points[si];
    p.size = sizes[si];
    p.model_accuracy.assign(acc.begin() + static_cast<std::ptrdiff_t>(si * prepared.size()),
                            acc.begin() + static_cast<std::ptrdiff_t>((si + 1) * prepared.size()));
    p.mean_accuracy = std::accumulate(p.model_accuracy.begin(), p.model_accuracy.end(), 0.0) /
                      static_cast<double>(p.model_accuracy.size());
  }
  return points;
}

}  // namespace hapauth
