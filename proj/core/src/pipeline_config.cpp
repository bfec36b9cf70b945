#include "stepsense/pipeline_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stepsense/error.hpp"

namespace stepsense {

namespace {

using nlohmann::json;

json to_json(const PipelineConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["seed"] = c.seed;

  j["corpus"] = {{"n_persons", c.corpus.n_persons},
                 {"trials_per_person", c.corpus.trials_per_person},
                 {"trial_duration_s", c.corpus.trial_duration_s},
                 {"sample_rate_hz", c.corpus.sample_rate_hz},
                 {"label_jitter", c.corpus.label_jitter},
                 {"noise_rms", c.corpus.base_profile.noise_rms},
                 {"clip_limit", c.corpus.base_profile.clip_limit
                                    ? json(*c.corpus.base_profile.clip_limit)
                                    : json()}};

  const DetectionConfig& d = c.segmentation.detection;
  j["detection"] = {{"band_low_hz", d.band_low_hz},
                    {"band_high_hz", d.band_high_hz},
                    {"band_step_hz", d.band_step_hz},
                    {"mad_factor", d.mad_factor},
                    {"min_step_period_s", d.min_step_period_s}};

  j["repair"] = {{"clip_limit", c.segmentation.clip_limit
                                    ? json(*c.segmentation.clip_limit)
                                    : json()},
                 {"before_segmentation", c.segmentation.repair_before_segmentation},
                 {"poly_order", c.segmentation.repair_poly_order},
                 {"neighbors", c.segmentation.repair_n_neighbors}};

  const FeatureConfig& f = c.features;
  j["features"] = {{"hs_band_low", f.hs_band_low},
                   {"hs_band_high", f.hs_band_high},
                   {"to_band_low", f.to_band_low},
                   {"to_band_high", f.to_band_high},
                   {"ds_high_low", f.ds_high_low},
                   {"ds_high_high", f.ds_high_high},
                   {"ds_low_low", f.ds_low_low},
                   {"ds_low_high", f.ds_low_high},
                   {"energy_window_s", f.energy_window_s},
                   {"energy_smooth_span_s", f.energy_smooth_span_s},
                   {"log_epsilon", f.log_epsilon},
                   {"stft_frame", f.stft_frame},
                   {"stft_hop", f.stft_hop},
                   {"cepstrum_len", f.cepstrum_len},
                   {"lpc_order", f.lpc_order},
                   {"legendre_order", f.legendre_order},
                   {"image_rows", f.image_rows},
                   {"image_cols", f.image_cols},
                   {"cwt_freq_low", f.cwt_freq_low},
                   {"peak_ratio_cap", f.peak_ratio_cap},
                   {"fundamental_low", f.fundamental_low},
                   {"fundamental_high", f.fundamental_high},
                   {"emd_max_imfs", f.emd.max_imfs},
                   {"emd_max_sift_iterations", f.emd.max_sift_iterations},
                   {"emd_sd_threshold", f.emd.sd_threshold}};

  const NetworkConfig& n = c.network;
  j["network"] = {{"dense_widths", n.dense_widths},
                  {"lstm_units", n.lstm_units},
                  {"seq_timesteps", n.seq_timesteps},
                  {"conv_channels", n.conv_channels},
                  {"conv_kernel", n.conv_kernel},
                  {"dropout_rate", n.dropout_rate},
                  {"head_widths", n.head_widths},
                  {"activation",
                   n.activation == Activation::Relu ? "relu" : "tanh"}};

  j["training"] = {{"epochs", c.training.epochs},
                   {"learning_rate", c.training.learning_rate},
                   {"batch_size", c.training.batch_size},
                   {"best_validation", c.training.best_validation}};

  j["pruning"] = {{"enabled", c.pruning_enabled},
                  {"warmup_epochs", c.pruning.warmup_epochs},
                  {"prune_epochs", c.pruning.prune_epochs},
                  {"finetune_epochs", c.pruning.finetune_epochs},
                  {"prune_fraction_per_epoch", c.pruning.prune_fraction_per_epoch},
                  {"prune_lstm", c.pruning.prune_lstm}};

  j["personalization"] = {{"enabled", c.personalized},
                          {"epochs", c.personalize_epochs},
                          {"gsi_epsilon", c.gsi_epsilon},
                          {"target_seconds", c.target_seconds}};

  j["evaluation"] = {{"scenario", c.scenario},
                     {"feature_set", c.feature_set},
                     {"target_persons", c.target_persons},
                     {"trajectory_seconds", c.trajectory_seconds}};

  j["extract_threads"] = c.extract_threads;
  return j;
}

PipelineConfig from_json(const json& j) {
  PipelineConfig c;
  c.schema_version = j.at("schema_version").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();

  const json& co = j.at("corpus");
  c.corpus.n_persons = co.at("n_persons").get<int>();
  c.corpus.trials_per_person = co.at("trials_per_person").get<int>();
  c.corpus.trial_duration_s = co.at("trial_duration_s").get<double>();
  c.corpus.sample_rate_hz = co.at("sample_rate_hz").get<double>();
  c.corpus.label_jitter = co.at("label_jitter").get<double>();
  c.corpus.base_profile.noise_rms = co.at("noise_rms").get<double>();
  if (!co.at("clip_limit").is_null())
    c.corpus.base_profile.clip_limit = co.at("clip_limit").get<double>();
  c.corpus.seed = c.seed;

  const json& d = j.at("detection");
  c.segmentation.detection.band_low_hz = d.at("band_low_hz").get<double>();
  c.segmentation.detection.band_high_hz = d.at("band_high_hz").get<double>();
  c.segmentation.detection.band_step_hz = d.at("band_step_hz").get<double>();
  c.segmentation.detection.mad_factor = d.at("mad_factor").get<double>();
  c.segmentation.detection.min_step_period_s =
      d.at("min_step_period_s").get<double>();

  const json& r = j.at("repair");
  if (!r.at("clip_limit").is_null())
    c.segmentation.clip_limit = r.at("clip_limit").get<double>();
  c.segmentation.repair_before_segmentation =
      r.at("before_segmentation").get<bool>();
  c.segmentation.repair_poly_order = r.at("poly_order").get<int>();
  c.segmentation.repair_n_neighbors = r.at("neighbors").get<int>();

  const json& f = j.at("features");
  c.features.hs_band_low = f.at("hs_band_low").get<double>();
  c.features.hs_band_high = f.at("hs_band_high").get<double>();
  c.features.to_band_low = f.at("to_band_low").get<double>();
  c.features.to_band_high = f.at("to_band_high").get<double>();
  c.features.ds_high_low = f.at("ds_high_low").get<double>();
  c.features.ds_high_high = f.at("ds_high_high").get<double>();
  c.features.ds_low_low = f.at("ds_low_low").get<double>();
  c.features.ds_low_high = f.at("ds_low_high").get<double>();
  c.features.energy_window_s = f.at("energy_window_s").get<double>();
  c.features.energy_smooth_span_s = f.at("energy_smooth_span_s").get<double>();
  c.features.log_epsilon = f.at("log_epsilon").get<double>();
  c.features.stft_frame = f.at("stft_frame").get<int>();
  c.features.stft_hop = f.at("stft_hop").get<int>();
  c.features.cepstrum_len = f.at("cepstrum_len").get<int>();
  c.features.lpc_order = f.at("lpc_order").get<int>();
  c.features.legendre_order = f.at("legendre_order").get<int>();
  c.features.image_rows = f.at("image_rows").get<int>();
  c.features.image_cols = f.at("image_cols").get<int>();
  c.features.cwt_freq_low = f.at("cwt_freq_low").get<double>();
  c.features.peak_ratio_cap = f.at("peak_ratio_cap").get<double>();
  c.features.fundamental_low = f.at("fundamental_low").get<double>();
  c.features.fundamental_high = f.at("fundamental_high").get<double>();
  c.features.emd.max_imfs = f.at("emd_max_imfs").get<int>();
  c.features.emd.max_sift_iterations =
      f.at("emd_max_sift_iterations").get<int>();
  c.features.emd.sd_threshold = f.at("emd_sd_threshold").get<double>();

  const json& n = j.at("network");
  c.network.dense_widths = n.at("dense_widths").get<std::vector<int>>();
  c.network.lstm_units = n.at("lstm_units").get<int>();
  c.network.seq_timesteps = n.at("seq_timesteps").get<int>();
  c.network.conv_channels = n.at("conv_channels").get<std::vector<int>>();
  c.network.conv_kernel = n.at("conv_kernel").get<int>();
  c.network.dropout_rate = n.at("dropout_rate").get<double>();
  c.network.head_widths = n.at("head_widths").get<std::vector<int>>();
  const std::string act = n.at("activation").get<std::string>();
  if (act != "relu" && act != "tanh")
    fail(ErrorKind::Config, "network.activation must be relu or tanh");
  c.network.activation = act == "relu" ? Activation::Relu : Activation::Tanh;
  c.network.seed = c.seed;

  const json& t = j.at("training");
  c.training.epochs = t.at("epochs").get<int>();
  c.training.learning_rate = t.at("learning_rate").get<double>();
  c.training.batch_size = t.at("batch_size").get<int>();
  c.training.best_validation = t.at("best_validation").get<bool>();
  c.training.seed = c.seed;

  const json& p = j.at("pruning");
  c.pruning_enabled = p.at("enabled").get<bool>();
  c.pruning.warmup_epochs = p.at("warmup_epochs").get<int>();
  c.pruning.prune_epochs = p.at("prune_epochs").get<int>();
  c.pruning.finetune_epochs = p.at("finetune_epochs").get<int>();
  c.pruning.prune_fraction_per_epoch =
      p.at("prune_fraction_per_epoch").get<double>();
  c.pruning.prune_lstm = p.at("prune_lstm").get<bool>();

  const json& pe = j.at("personalization");
  c.personalized = pe.at("enabled").get<bool>();
  c.personalize_epochs = pe.at("epochs").get<int>();
  c.gsi_epsilon = pe.at("gsi_epsilon").get<double>();
  c.target_seconds = pe.at("target_seconds").get<double>();

  const json& e = j.at("evaluation");
  c.scenario = e.at("scenario").get<std::string>();
  c.feature_set = e.at("feature_set").get<std::string>();
  c.target_persons = e.at("target_persons").get<std::vector<std::string>>();
  c.trajectory_seconds = e.at("trajectory_seconds").get<double>();

  c.extract_threads = j.at("extract_threads").get<int>();
  return c;
}

void check_keys(const json& input, const json& schema, const std::string& path) {
  if (!input.is_object()) return;
  for (const auto& [key, value] : input.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!schema.is_object() || !schema.contains(key))
      fail(ErrorKind::Config, "unknown config key: " + full);
    if (value.is_object()) check_keys(value, schema.at(key), full);
  }
}

// Deep merge of input onto the defaults. Unlike JSON Merge Patch, an
// explicit null is kept as a value (clip_limit: null means "no limit"),
// not treated as a key deletion.
void overlay(json& base, const json& input) {
  for (const auto& [key, value] : input.items()) {
    if (value.is_object() && base.contains(key) && base.at(key).is_object())
      overlay(base.at(key), value);
    else
      base[key] = value;
  }
}

FeatureSet parse_feature_set(const std::string& name) {
  if (name == "combined") return FeatureSet::Combined;
  if (name == "gait_only") return FeatureSet::GaitOnly;
  if (name == "vibration_only") return FeatureSet::VibrationOnly;
  fail(ErrorKind::Config,
       "evaluation.feature_set must be combined, gait_only or vibration_only");
}

}  // namespace

void PipelineConfig::validate() const {
  if (schema_version != 1)
    fail(ErrorKind::Config, "unsupported schema_version " +
                                std::to_string(schema_version));
  if (corpus.n_persons < 1 || corpus.trials_per_person < 1)
    fail(ErrorKind::Config, "corpus sizes must be >= 1");
  if (corpus.trial_duration_s <= 0.0 || corpus.sample_rate_hz <= 0.0)
    fail(ErrorKind::Config, "corpus durations and rates must be positive");
  if (segmentation.detection.band_low_hz >= segmentation.detection.band_high_hz)
    fail(ErrorKind::Config, "detection band must satisfy low < high");
  if (scenario != "A" && scenario != "B")
    fail(ErrorKind::Config, "evaluation.scenario must be A or B");
  parse_feature_set(feature_set);
  network.validate();
  if (training.epochs < 1 || training.batch_size < 1)
    fail(ErrorKind::Config, "training.epochs and batch_size must be >= 1");
  if (personalize_epochs < 0)
    fail(ErrorKind::Config, "personalization.epochs must be >= 0");
  if (extract_threads < 0)
    fail(ErrorKind::Config, "extract_threads must be >= 0");
}

StudyOptions PipelineConfig::study_options() const {
  StudyOptions options;
  options.scenario = scenario;
  options.feature_set = parse_feature_set(feature_set);
  options.personalized = personalized;
  options.pruned = pruning_enabled;
  options.network = network;
  options.training = training;
  options.schedule = pruning;
  options.finetune_epochs = personalize_epochs;
  options.gsi_epsilon = gsi_epsilon;
  options.target_seconds = target_seconds;
  options.trajectory_seconds = trajectory_seconds;
  options.target_persons = target_persons;
  options.seed = seed;
  return options;
}

std::string PipelineConfig::fingerprint() const {
  const std::string canonical = pipeline_config_json(*this);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string pipeline_config_json(const PipelineConfig& config) {
  return to_json(config).dump(2);
}

PipelineConfig pipeline_config_from_json(const std::string& text,
                                         const std::string& where) {
  json input;
  try {
    input = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, where + ": bad JSON: " + e.what());
  }
  if (!input.is_object())
    fail(ErrorKind::Config, where + ": config must be a JSON object");
  const json schema = to_json(PipelineConfig{});
  check_keys(input, schema, "");
  json merged = schema;
  overlay(merged, input);
  PipelineConfig config = from_json(merged);
  config.validate();
  return config;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return pipeline_config_from_json(text.str(), path.string());
}

void save_pipeline_config(const PipelineConfig& config,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << pipeline_config_json(config) << "\n";
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace stepsense
