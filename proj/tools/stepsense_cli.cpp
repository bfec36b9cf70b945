// Command-line front end for the footstep-vibration emotion pipeline:
// synth -> preprocess -> extract -> train-general -> personalize ->
// evaluate / ablate / heatmap, all operating on one workspace directory.
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "stepsense/checkpoint.hpp"
#include "stepsense/error.hpp"
#include "stepsense/feature_io.hpp"
#include "stepsense/harness.hpp"
#include "stepsense/heatmap.hpp"
#include "stepsense/personalize.hpp"
#include "stepsense/pipeline_config.hpp"
#include "stepsense/preprocess.hpp"
#include "stepsense/signal_io.hpp"
#include "stepsense/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stepsense;

namespace {

struct GlobalArgs {
  std::string workspace = ".";
  std::string config_path;
  std::int64_t seed_override = -1;
};

PipelineConfig effective_config(const GlobalArgs& args) {
  PipelineConfig config;
  fs::path path = args.config_path.empty()
                      ? fs::path(args.workspace) / "config.json"
                      : fs::path(args.config_path);
  if (!args.config_path.empty() || fs::exists(path))
    config = load_pipeline_config(path);
  if (args.seed_override >= 0)
    config.seed = static_cast<std::uint64_t>(args.seed_override);
  // the seed feeds every seeded component
  config.corpus.seed = config.seed;
  config.network.seed = config.seed;
  config.training.seed = config.seed;
  return config;
}

void write_manifest(const fs::path& path, const std::string& fingerprint,
                    const std::vector<std::string>& files) {
  json j;
  j["config_fingerprint"] = fingerprint;
  j["files"] = files;
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<std::string> read_manifest(const fs::path& path,
                                       const std::string& fingerprint) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "missing manifest: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": bad manifest JSON: " + e.what());
  }
  if (j.value("config_fingerprint", "") != fingerprint)
    fail(ErrorKind::Config,
         path.string() + " was produced with a different config (fingerprint " +
             j.value("config_fingerprint", "?") + ", expected " + fingerprint +
             ")");
  return j.at("files").get<std::vector<std::string>>();
}

FeatureDataset load_features(const fs::path& workspace,
                             const PipelineConfig& config) {
  const fs::path path = workspace / "features.ftab";
  if (!fs::exists(path))
    fail(ErrorKind::Io, "missing feature table: " + path.string());
  FeatureDataset dataset = read_feature_table(path);
  if (dataset.fingerprint != config.fingerprint())
    fail(ErrorKind::Config,
         "feature table fingerprint " + dataset.fingerprint +
             " does not match the current config " + config.fingerprint());
  return dataset;
}

int cmd_synth(const GlobalArgs& args, int persons, double minutes) {
  PipelineConfig config = effective_config(args);
  if (persons > 0) config.corpus.n_persons = persons;
  if (minutes > 0.0)
    config.corpus.trials_per_person = std::max(
        1, static_cast<int>(minutes * 60.0 / config.corpus.trial_duration_s +
                            0.5));
  const fs::path raw = fs::path(args.workspace) / "raw";
  fs::create_directories(raw);
  const std::vector<VibrationSignal> corpus = generate_corpus(config.corpus);
  std::vector<std::string> files;
  for (const VibrationSignal& signal : corpus) {
    const std::string name = signal.trajectory_id + ".vibs";
    write_signal(signal, raw / name);
    files.push_back(name);
  }
  write_manifest(raw / "manifest.json", config.fingerprint(), files);
  std::cout << "wrote " << files.size() << " trajectories ("
            << config.corpus.n_persons << " persons x "
            << config.corpus.trials_per_person << " trials) to "
            << raw.string() << "\n";
  return 0;
}

int cmd_preprocess(const GlobalArgs& args) {
  const PipelineConfig config = effective_config(args);
  const fs::path raw = fs::path(args.workspace) / "raw";
  const fs::path seg_dir = fs::path(args.workspace) / "segments";
  fs::create_directories(seg_dir);
  const std::vector<std::string> files =
      read_manifest(raw / "manifest.json", config.fingerprint());
  SegmentationOptions options = config.segmentation;
  if (!options.clip_limit && config.corpus.base_profile.clip_limit)
    options.clip_limit = config.corpus.base_profile.clip_limit;
  std::vector<std::string> out_files;
  std::size_t n_segments = 0;
  for (const std::string& file : files) {
    const VibrationSignal signal = read_signal(raw / file);
    const std::vector<FootstepSegment> segments =
        preprocess_signal(signal, options);
    const std::string name = signal.trajectory_id + ".segs";
    write_segments(segments, seg_dir / name);
    out_files.push_back(name);
    n_segments += segments.size();
  }
  write_manifest(seg_dir / "manifest.json", config.fingerprint(), out_files);
  std::cout << "segmented " << files.size() << " trajectories into "
            << n_segments << " footsteps\n";
  return 0;
}

int cmd_extract(const GlobalArgs& args) {
  const PipelineConfig config = effective_config(args);
  const fs::path seg_dir = fs::path(args.workspace) / "segments";
  const std::vector<std::string> files =
      read_manifest(seg_dir / "manifest.json", config.fingerprint());

  struct Item {
    FootstepSegment segment;
    TrajectoryContext context;
  };
  std::vector<Item> items;
  for (const std::string& file : files) {
    const std::vector<FootstepSegment> segments =
        read_segments(seg_dir / file);
    TrajectoryContext context;
    for (const FootstepSegment& s : segments)
      context.peak_times_s.push_back(
          static_cast<double>(s.peak_index_in_signal) / s.sample_rate_hz);
    for (const FootstepSegment& s : segments) items.push_back({s, context});
  }
  if (items.empty()) fail(ErrorKind::Io, "no segments to extract from");

  FeatureDataset dataset;
  dataset.sample_rate_hz = items.front().segment.sample_rate_hz;
  dataset.layout = bundle_layout(config.features, dataset.sample_rate_hz);
  dataset.fingerprint = config.fingerprint();
  dataset.samples.resize(items.size());

  const unsigned n_threads =
      config.extract_threads > 0
          ? static_cast<unsigned>(config.extract_threads)
          : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size() || failed.load()) return;
      try {
        const Item& item = items[i];
        FeatureSample& sample = dataset.samples[i];
        sample.bundle =
            extract_bundle(item.segment, item.context, config.features).bundle;
        sample.label = item.segment.label.value_or(EmotionLabel{});
        sample.person_id = item.segment.person_id;
        sample.trajectory_id = item.segment.trajectory_id;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error_message = e.what();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failed.load()) fail(ErrorKind::Numeric, error_message);

  write_feature_table(dataset, fs::path(args.workspace) / "features.ftab");
  export_feature_csv(dataset, fs::path(args.workspace) / "features.csv");
  std::cout << "extracted " << dataset.samples.size() << " feature rows ("
            << dataset.layout.scalar_dim() << " scalars, "
            << dataset.layout.sequences.size() << " sequences, "
            << dataset.layout.images.size() << " images per row)\n";
  return 0;
}

int cmd_train_general(const GlobalArgs& args) {
  const PipelineConfig config = effective_config(args);
  const fs::path workspace(args.workspace);
  const FeatureDataset combined = load_features(workspace, config);
  const FeatureDataset dataset = restrict_dataset(
      combined, config.study_options().feature_set);

  const SplitIndices split = split_holdout(dataset, config.seed);
  const Standardizer standardizer = Standardizer::fit(dataset, split.train);
  Network network(dataset.layout, config.network);
  TrainingView view;
  view.train_indices = split.train;
  view.valid_indices = split.valid;
  const TrainResult result =
      train_network(network, standardizer, dataset, view, config.training,
                    config.pruning_enabled ? &config.pruning : nullptr);

  save_checkpoint(network, standardizer, config.fingerprint(),
                  workspace / "general.ckpt");
  write_loss_trace_csv(result.trace, workspace / "loss_trace.csv");
  std::vector<SparsityRecord> sparsity;
  for (const EpochRecord& r : result.trace)
    sparsity.push_back(
        {r.epoch, r.phase, r.nonzero_weights, r.train_loss, r.valid_loss});
  write_sparsity_trace_csv(sparsity, workspace / "sparsity_trace.csv");
  std::cout << "trained general model: " << result.trace.size() << " epochs, "
            << network.unmasked_weight_count() << "/"
            << network.prunable_weight_count() << " weights kept\n";
  return 0;
}

int cmd_personalize(const GlobalArgs& args, const std::string& target) {
  const PipelineConfig config = effective_config(args);
  const fs::path workspace(args.workspace);
  const FeatureDataset combined = load_features(workspace, config);
  const StudyOptions study = config.study_options();
  const FeatureDataset dataset = restrict_dataset(combined, study.feature_set);

  LoadedCheckpoint loaded = load_checkpoint(workspace / "general.ckpt");
  if (loaded.fingerprint != config.fingerprint())
    fail(ErrorKind::Config,
         "general model was trained with a different config");

  const SplitIndices split =
      config.scenario == "A"
          ? split_scenario_a(dataset, target, config.seed)
          : split_scenario_b(dataset, target, config.target_seconds,
                             config.trajectory_seconds, config.seed);
  std::vector<int> target_rows;
  for (int row : config.scenario == "B" ? split.train : split.test)
    if (dataset.samples[static_cast<std::size_t>(row)].person_id == target ||
        config.scenario == "A")
      target_rows.push_back(row);

  const std::vector<EmbeddingSet> train_sets = embed_dataset(
      loaded.network, loaded.standardizer, dataset, split.train);
  const std::vector<EmbeddingSet> target_sets = embed_dataset(
      loaded.network, loaded.standardizer, dataset, target_rows);
  if (target_sets.empty())
    fail(ErrorKind::InvalidArgument, "no data for target person " + target);
  std::vector<std::pair<std::string, double>> distances;
  for (const EmbeddingSet& set : train_sets)
    if (set.person_id != target)
      distances.emplace_back(set.person_id,
                             person_distance(target_sets.front(), set));
  const std::vector<GaitSimilarity> gsi =
      gsi_all(distances, config.gsi_epsilon);
  write_gsi_csv(gsi, workspace / ("gsi_" + target + ".csv"));

  TrainingView view;
  view.train_indices = split.train;
  view.valid_indices = split.valid;
  view.weights = personalization_weights(dataset, split.train, gsi, target);
  TrainOptions options = config.training;
  options.epochs = config.personalize_epochs;
  options.seed = config.seed ^ 0xf17e701eULL;
  const TrainResult result = fine_tune(loaded.network, loaded.standardizer,
                                       dataset, view, options);
  save_checkpoint(loaded.network, loaded.standardizer, config.fingerprint(),
                  workspace / ("personalized_" + target + ".ckpt"));
  write_loss_trace_csv(result.trace,
                       workspace / ("personalize_loss_" + target + ".csv"));
  std::cout << "personalized model for " << target << " over "
            << result.trace.size() << " epochs\n";
  return 0;
}

int cmd_evaluate(const GlobalArgs& args, const std::string& scenario) {
  PipelineConfig config = effective_config(args);
  if (!scenario.empty()) config.scenario = scenario;
  config.validate();
  const fs::path workspace(args.workspace);
  const FeatureDataset dataset = load_features(workspace, config);
  const EvaluationReport report = run_study(dataset, config.study_options());
  write_report_json(report, workspace / "report.json");
  write_report_summary_csv({report}, workspace / "report_summary.csv");
  write_person_bar_svg(report, workspace / "person_mae.svg");
  std::cout << "scenario " << report.scenario << " (" << report.feature_set
            << (report.personalized ? ", personalized" : ", general")
            << "): MAE valence " << report.overall.mae_valence << ", arousal "
            << report.overall.mae_arousal << "\n";
  return 0;
}

int cmd_ablate(const GlobalArgs& args) {
  const PipelineConfig config = effective_config(args);
  const fs::path workspace(args.workspace);
  const fs::path dir = workspace / "ablation";
  fs::create_directories(dir);
  const FeatureDataset dataset = load_features(workspace, config);
  const std::vector<EvaluationReport> reports =
      run_ablations(dataset, config.study_options());
  for (const EvaluationReport& report : reports) {
    const std::string name = report.feature_set +
                             std::string(report.personalized ? "_personalized"
                                                             : "_general") +
                             (report.pruned ? "_pruned" : "_unpruned") +
                             ".json";
    write_report_json(report, dir / name);
  }
  write_report_summary_csv(reports, workspace / "ablation_summary.csv");
  std::cout << "wrote " << reports.size() << " ablation reports\n";
  return 0;
}

int cmd_heatmap(const GlobalArgs& args) {
  const PipelineConfig config = effective_config(args);
  const fs::path workspace(args.workspace);
  const FeatureDataset dataset = load_features(workspace, config);
  const HeatmapResult heatmap = feature_deviation_heatmap(dataset);
  write_heatmap_csv(heatmap, workspace / "heatmap.csv", config.fingerprint());
  write_heatmap_svg(heatmap, workspace / "heatmap.svg", config.fingerprint());
  for (const std::string& warning : heatmap.warnings)
    std::cerr << "warning: " << warning << "\n";
  std::cout << "wrote heatmap for " << heatmap.feature_names.size()
            << " features\n";
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument:
      return 2;
    case ErrorKind::Io:
    case ErrorKind::Parse:
      return 3;
    case ErrorKind::Numeric:
      return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Footstep-vibration emotion estimation pipeline"};
  app.require_subcommand(1);
  GlobalArgs args;
  app.add_option("--workspace", args.workspace, "Workspace directory");
  app.add_option("--config", args.config_path,
                 "Pipeline config JSON (default: <workspace>/config.json)");
  app.add_option("--seed", args.seed_override, "Override the config seed");

  int persons = 0;
  double minutes = 0.0;
  std::string target, scenario;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--persons", persons, "Number of simulated walkers");
  synth->add_option("--minutes", minutes, "Minutes of walking per person");
  auto* preprocess =
      app.add_subcommand("preprocess", "Detect and segment footsteps");
  auto* extract = app.add_subcommand("extract", "Extract feature bundles");
  auto* train = app.add_subcommand("train-general", "Train the general model");
  auto* personalize =
      app.add_subcommand("personalize", "Similarity-weighted fine-tuning");
  personalize->add_option("--target", target, "Target person id")->required();
  auto* evaluate = app.add_subcommand("evaluate", "Run the evaluation study");
  evaluate->add_option("--scenario", scenario, "A or B (overrides config)");
  auto* ablate = app.add_subcommand("ablate", "Run the 3x2x2 ablation grid");
  auto* heatmap =
      app.add_subcommand("heatmap", "Feature/quadrant deviation heatmap");

  CLI11_PARSE(app, argc, argv);
  try {
    if (synth->parsed()) return cmd_synth(args, persons, minutes);
    if (preprocess->parsed()) return cmd_preprocess(args);
    if (extract->parsed()) return cmd_extract(args);
    if (train->parsed()) return cmd_train_general(args);
    if (personalize->parsed()) return cmd_personalize(args, target);
    if (evaluate->parsed()) return cmd_evaluate(args, scenario);
    if (ablate->parsed()) return cmd_ablate(args);
    if (heatmap->parsed()) return cmd_heatmap(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
