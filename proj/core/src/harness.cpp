#include "stepsense/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "stepsense/error.hpp"
#include "stepsense/svg.hpp"

namespace stepsense {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Trajectory {
  std::string id, person;
  std::vector<int> rows;
};

std::vector<Trajectory> group_trajectories(const FeatureDataset& dataset) {
  std::vector<Trajectory> trajectories;
  std::map<std::string, std::size_t> by_id;
  for (int row = 0; row < static_cast<int>(dataset.samples.size()); ++row) {
    const FeatureSample& s = dataset.samples[static_cast<std::size_t>(row)];
    auto it = by_id.find(s.trajectory_id);
    if (it == by_id.end()) {
      it = by_id.emplace(s.trajectory_id, trajectories.size()).first;
      trajectories.push_back({s.trajectory_id, s.person_id, {}});
    }
    trajectories[it->second].rows.push_back(row);
  }
  return trajectories;
}

/// Shuffles the pool and fills valid until it holds ~1/10 of the rows.
void nine_one_split(std::vector<Trajectory> pool, std::uint64_t seed,
                    std::vector<int>* train, std::vector<int>* valid) {
  std::size_t total = 0;
  for (const Trajectory& t : pool) total += t.rows.size();
  const std::size_t valid_target = total / 10;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::size_t valid_rows = 0;
  for (const Trajectory& t : pool) {
    if (valid_rows < valid_target && pool.size() > 1) {
      valid->insert(valid->end(), t.rows.begin(), t.rows.end());
      valid_rows += t.rows.size();
    } else {
      train->insert(train->end(), t.rows.begin(), t.rows.end());
    }
  }
  if (train->empty())
    fail(ErrorKind::InvalidArgument, "split left the training set empty");
}

double pearson(const std::vector<double>& x, const std::vector<double>& y,
               bool* defined) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    *defined = false;
    return std::numeric_limits<double>::quiet_NaN();
  }
  *defined = true;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::string> unique_persons(const FeatureDataset& dataset) {
  std::vector<std::string> persons;
  std::set<std::string> seen;
  for (const FeatureSample& s : dataset.samples)
    if (seen.insert(s.person_id).second) persons.push_back(s.person_id);
  return persons;
}

json metrics_to_json(const Metrics& m) {
  json j;
  j["mae_valence"] = m.mae_valence;
  j["mae_arousal"] = m.mae_arousal;
  j["pearson_valence"] =
      std::isfinite(m.pearson_valence) ? json(m.pearson_valence) : json();
  j["pearson_arousal"] =
      std::isfinite(m.pearson_arousal) ? json(m.pearson_arousal) : json();
  j["error_rate_valence"] = m.error_rate_valence;
  j["error_rate_arousal"] = m.error_rate_arousal;
  j["warnings"] = m.warnings;
  return j;
}

}  // namespace

SplitIndices split_scenario_a(const FeatureDataset& dataset,
                              const std::string& target_person,
                              std::uint64_t seed) {
  SplitIndices split;
  std::vector<Trajectory> others;
  bool target_seen = false;
  for (Trajectory& t : group_trajectories(dataset)) {
    if (t.person == target_person) {
      target_seen = true;
      split.test.insert(split.test.end(), t.rows.begin(), t.rows.end());
    } else {
      others.push_back(std::move(t));
    }
  }
  if (!target_seen)
    fail(ErrorKind::InvalidArgument,
         "target person not in dataset: " + target_person);
  if (others.empty())
    fail(ErrorKind::InvalidArgument, "need at least two persons to split");
  nine_one_split(std::move(others), seed, &split.train, &split.valid);
  return split;
}

SplitIndices split_scenario_b(const FeatureDataset& dataset,
                              const std::string& target_person,
                              double target_seconds, double trajectory_seconds,
                              std::uint64_t seed) {
  if (target_seconds <= 0.0)
    return split_scenario_a(dataset, target_person, seed);
  if (trajectory_seconds <= 0.0)
    fail(ErrorKind::InvalidArgument, "trajectory_seconds must be positive");
  const int n_pool = static_cast<int>(target_seconds / trajectory_seconds + 1e-9);
  if (n_pool == 0) return split_scenario_a(dataset, target_person, seed);

  std::vector<Trajectory> pool, target_trajs;
  for (Trajectory& t : group_trajectories(dataset)) {
    if (t.person == target_person)
      target_trajs.push_back(std::move(t));
    else
      pool.push_back(std::move(t));
  }
  if (target_trajs.empty())
    fail(ErrorKind::InvalidArgument,
         "target person not in dataset: " + target_person);
  if (n_pool >= static_cast<int>(target_trajs.size()))
    fail(ErrorKind::InvalidArgument,
         "insufficient target data: " + std::to_string(target_trajs.size()) +
             " trajectories, " + std::to_string(n_pool) +
             " requested for training");

  std::mt19937_64 rng(seed ^ fnv1a(target_person));
  std::shuffle(target_trajs.begin(), target_trajs.end(), rng);
  SplitIndices split;
  for (int i = 0; i < static_cast<int>(target_trajs.size()); ++i) {
    if (i < n_pool)
      pool.push_back(target_trajs[static_cast<std::size_t>(i)]);
    else
      split.test.insert(split.test.end(),
                        target_trajs[static_cast<std::size_t>(i)].rows.begin(),
                        target_trajs[static_cast<std::size_t>(i)].rows.end());
  }
  nine_one_split(std::move(pool), seed, &split.train, &split.valid);
  return split;
}

SplitIndices split_holdout(const FeatureDataset& dataset, std::uint64_t seed) {
  SplitIndices split;
  nine_one_split(group_trajectories(dataset), seed, &split.train, &split.valid);
  return split;
}

Eigen::Vector2d trajectory_score(const std::vector<Eigen::Vector2d>& preds) {
  if (preds.empty())
    fail(ErrorKind::InvalidArgument, "trajectory_score needs predictions");
  Eigen::Vector2d score;
  std::vector<double> values(preds.size());
  for (int dim = 0; dim < 2; ++dim) {
    for (std::size_t i = 0; i < preds.size(); ++i) values[i] = preds[i](dim);
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    score(dim) = n % 2 == 1 ? values[n / 2]
                            : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  }
  return score;
}

Metrics compute_metrics(const std::vector<Eigen::Vector2d>& predictions,
                        const std::vector<Eigen::Vector2d>& truths) {
  if (predictions.size() != truths.size() || predictions.empty())
    fail(ErrorKind::InvalidArgument,
         "metrics need matched, non-empty prediction/truth lists");
  Metrics m;
  std::vector<double> pv, pa, tv, ta;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    m.mae_valence += std::abs(predictions[i](0) - truths[i](0));
    m.mae_arousal += std::abs(predictions[i](1) - truths[i](1));
    pv.push_back(predictions[i](0));
    pa.push_back(predictions[i](1));
    tv.push_back(truths[i](0));
    ta.push_back(truths[i](1));
  }
  const double n = static_cast<double>(predictions.size());
  m.mae_valence /= n;
  m.mae_arousal /= n;
  m.error_rate_valence = m.mae_valence / 8.0;
  m.error_rate_arousal = m.mae_arousal / 8.0;
  bool defined = true;
  m.pearson_valence = pearson(pv, tv, &defined);
  if (!defined)
    m.warnings.push_back("valence truth has zero variance; Pearson undefined");
  m.pearson_arousal = pearson(pa, ta, &defined);
  if (!defined)
    m.warnings.push_back("arousal truth has zero variance; Pearson undefined");
  return m;
}

EvaluationReport run_study(const FeatureDataset& dataset,
                           const StudyOptions& options) {
  if (options.scenario != "A" && options.scenario != "B")
    fail(ErrorKind::Config, "scenario must be A or B");
  const FeatureDataset restricted =
      restrict_dataset(dataset, options.feature_set);

  EvaluationReport report;
  report.scenario = options.scenario;
  report.feature_set = feature_set_name(options.feature_set);
  report.personalized = options.personalized;
  report.pruned = options.pruned;
  report.fingerprint = dataset.fingerprint;

  std::vector<std::string> targets = options.target_persons.empty()
                                         ? unique_persons(dataset)
                                         : options.target_persons;
  std::vector<Eigen::Vector2d> all_preds, all_truths;

  for (const std::string& person : targets) {
    const std::uint64_t person_seed = options.seed ^ fnv1a(person);
    const SplitIndices split =
        options.scenario == "A"
            ? split_scenario_a(restricted, person, options.seed)
            : split_scenario_b(restricted, person, options.target_seconds,
                               options.trajectory_seconds, options.seed);

    const Standardizer standardizer =
        Standardizer::fit(restricted, split.train);
    NetworkConfig net_config = options.network;
    net_config.seed = person_seed;
    net_config.output_dim = 2;
    Network network(restricted.layout, net_config);

    TrainOptions train_options = options.training;
    train_options.seed = person_seed;
    TrainingView view;
    view.train_indices = split.train;
    view.valid_indices = split.valid;
    train_network(network, standardizer, restricted, view, train_options,
                  options.pruned ? &options.schedule : nullptr);

    if (options.personalized) {
      // GSI needs target embeddings but no target labels: scenario B uses
      // the target's enrolled trajectories, scenario A the test recordings.
      std::vector<int> target_rows;
      const std::vector<int>& candidates =
          options.scenario == "B" ? split.train : split.test;
      for (int row : candidates)
        if (restricted.samples[static_cast<std::size_t>(row)].person_id ==
            person)
          target_rows.push_back(row);
      if (options.scenario == "A") target_rows = split.test;

      const std::vector<EmbeddingSet> train_sets =
          embed_dataset(network, standardizer, restricted, split.train);
      const std::vector<EmbeddingSet> target_sets =
          embed_dataset(network, standardizer, restricted, target_rows);
      if (!target_sets.empty()) {
        std::vector<std::pair<std::string, double>> distances;
        for (const EmbeddingSet& set : train_sets)
          if (set.person_id != person)
            distances.emplace_back(
                set.person_id, person_distance(target_sets.front(), set));
        const std::vector<GaitSimilarity> gsi =
            gsi_all(distances, options.gsi_epsilon);
        TrainingView ft_view = view;
        ft_view.weights =
            personalization_weights(restricted, split.train, gsi, person);
        TrainOptions ft_options = train_options;
        ft_options.epochs = options.finetune_epochs;
        ft_options.learning_rate = options.finetune_learning_rate;
        // The shared validation pool measures the general population, so
        // reverting to its best epoch would veto target adaptation.
        ft_options.best_validation = false;
        ft_options.seed = person_seed ^ 0xf17e701eULL;
        fine_tune(network, standardizer, restricted, ft_view, ft_options);
      }
    }

    // trajectory-median predictions over the test rows
    std::map<std::string, std::vector<Eigen::Vector2d>> by_trajectory;
    std::map<std::string, const FeatureSample*> sample_of;
    std::vector<std::string> order;
    for (int row : split.test) {
      const FeatureSample& s = restricted.samples[static_cast<std::size_t>(row)];
      const NetInput input = network.adapt(s.bundle, standardizer);
      const Eigen::VectorXd out = network.forward(input).output;
      if (by_trajectory.find(s.trajectory_id) == by_trajectory.end()) {
        order.push_back(s.trajectory_id);
        sample_of[s.trajectory_id] = &s;
      }
      by_trajectory[s.trajectory_id].push_back(Eigen::Vector2d(out(0), out(1)));
    }

    PersonResult person_result;
    person_result.person_id = person;
    std::vector<Eigen::Vector2d> preds, truths;
    for (const std::string& trajectory : order) {
      const FeatureSample& s = *sample_of[trajectory];
      const Eigen::Vector2d score = trajectory_score(by_trajectory[trajectory]);
      preds.push_back(score);
      truths.push_back(Eigen::Vector2d(s.label.valence, s.label.arousal));
      person_result.trajectories.push_back(
          {trajectory, person, score(0), score(1), s.label.valence,
           s.label.arousal,
           static_cast<int>(by_trajectory[trajectory].size())});
    }
    person_result.metrics = compute_metrics(preds, truths);
    report.per_person.push_back(std::move(person_result));
    all_preds.insert(all_preds.end(), preds.begin(), preds.end());
    all_truths.insert(all_truths.end(), truths.begin(), truths.end());
  }

  report.overall = compute_metrics(all_preds, all_truths);
  return report;
}

EvaluationReport run_baseline(const FeatureDataset& dataset,
                              const StudyOptions& options) {
  StudyOptions baseline = options;
  baseline.feature_set = FeatureSet::GaitOnly;
  baseline.personalized = false;
  return run_study(dataset, baseline);
}

std::vector<EvaluationReport> run_ablations(const FeatureDataset& dataset,
                                            const StudyOptions& options) {
  std::vector<EvaluationReport> reports;
  for (FeatureSet set : {FeatureSet::Combined, FeatureSet::GaitOnly,
                         FeatureSet::VibrationOnly}) {
    for (bool personalized : {true, false}) {
      for (bool pruned : {true, false}) {
        StudyOptions cell = options;
        cell.feature_set = set;
        cell.personalized = personalized;
        cell.pruned = pruned;
        reports.push_back(run_study(dataset, cell));
      }
    }
  }
  return reports;
}

ClassificationReport classify_quadrants(const FeatureDataset& dataset,
                                        const StudyOptions& options,
                                        bool weight_classes) {
  const FeatureDataset restricted =
      restrict_dataset(dataset, options.feature_set);
  std::vector<int> class_of(restricted.samples.size());
  for (std::size_t i = 0; i < restricted.samples.size(); ++i)
    class_of[i] = static_cast<int>(quadrant_of(restricted.samples[i].label));

  // trajectory-atomic 8:1:1 split
  std::vector<Trajectory> trajectories = group_trajectories(restricted);
  std::mt19937_64 rng(options.seed ^ 0xc1a55ULL);
  std::shuffle(trajectories.begin(), trajectories.end(), rng);
  const std::size_t hold = trajectories.size() / 10;
  SplitIndices split;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    auto* dest = i < std::max<std::size_t>(hold, 1)
                     ? &split.test
                     : (i < 2 * std::max<std::size_t>(hold, 1) ? &split.valid
                                                               : &split.train);
    dest->insert(dest->end(), trajectories[i].rows.begin(),
                 trajectories[i].rows.end());
  }
  if (split.train.empty())
    fail(ErrorKind::InvalidArgument, "classification split left no train data");

  std::vector<double> counts(4, 0.0);
  for (int row : split.train) counts[static_cast<std::size_t>(class_of[static_cast<std::size_t>(row)])] += 1.0;
  for (int q = 0; q < 4; ++q)
    if (counts[static_cast<std::size_t>(q)] == 0.0)
      fail(ErrorKind::InvalidArgument,
           std::string("class absent from training data: ") +
               quadrant_name(static_cast<EmotionQuadrant>(q)));

  const Standardizer standardizer = Standardizer::fit(restricted, split.train);
  NetworkConfig net_config = options.network;
  net_config.seed = options.seed ^ 0xc1a55ULL;
  net_config.output_dim = 4;
  Network network(restricted.layout, net_config);

  TrainOptions train_options = options.training;
  train_options.seed = net_config.seed;
  train_options.loss = LossMode::CrossEntropy;
  if (weight_classes) {
    const double total = static_cast<double>(split.train.size());
    train_options.class_weights.assign(4, 0.0);
    for (int q = 0; q < 4; ++q)
      train_options.class_weights[static_cast<std::size_t>(q)] =
          total / counts[static_cast<std::size_t>(q)];
  }
  TrainingView view;
  view.train_indices = split.train;
  view.valid_indices = split.valid;
  view.class_targets = class_of;
  train_network(network, standardizer, restricted, view, train_options,
                options.pruned ? &options.schedule : nullptr);

  ClassificationReport report;
  report.fingerprint = dataset.fingerprint;
  report.confusion = Eigen::MatrixXd::Zero(4, 4);
  double correct = 0.0;
  for (int row : split.test) {
    const FeatureSample& s = restricted.samples[static_cast<std::size_t>(row)];
    const Eigen::VectorXd out =
        network.forward(network.adapt(s.bundle, standardizer)).output;
    Eigen::Index predicted;
    out.maxCoeff(&predicted);
    const int truth = class_of[static_cast<std::size_t>(row)];
    report.confusion(truth, predicted) += 1.0;
    if (predicted == truth) correct += 1.0;
  }
  const double n_test = static_cast<double>(split.test.size());
  report.accuracy = n_test > 0.0 ? correct / n_test : 0.0;
  double f1_sum = 0.0;
  for (int q = 0; q < 4; ++q) {
    const double tp = report.confusion(q, q);
    const double fp = report.confusion.col(q).sum() - tp;
    const double fn = report.confusion.row(q).sum() - tp;
    f1_sum += tp > 0.0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
  }
  report.macro_f1 = f1_sum / 4.0;
  return report;
}

void write_report_json(const EvaluationReport& report,
                       const std::filesystem::path& path) {
  json j;
  j["scenario"] = report.scenario;
  j["feature_set"] = report.feature_set;
  j["personalized"] = report.personalized;
  j["pruned"] = report.pruned;
  j["fingerprint"] = report.fingerprint;
  j["overall"] = metrics_to_json(report.overall);
  j["per_person"] = json::array();
  for (const PersonResult& p : report.per_person) {
    json jp;
    jp["person_id"] = p.person_id;
    jp["metrics"] = metrics_to_json(p.metrics);
    jp["trajectories"] = json::array();
    for (const TrajectoryPrediction& t : p.trajectories)
      jp["trajectories"].push_back({{"trajectory_id", t.trajectory_id},
                                    {"predicted_valence", t.predicted_valence},
                                    {"predicted_arousal", t.predicted_arousal},
                                    {"true_valence", t.true_valence},
                                    {"true_arousal", t.true_arousal},
                                    {"n_footsteps", t.n_footsteps}});
    j["per_person"].push_back(std::move(jp));
  }
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

void write_report_summary_csv(const std::vector<EvaluationReport>& reports,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << "scenario,feature_set,personalized,pruned,mae_valence,mae_arousal,"
         "pearson_valence,pearson_arousal,error_rate_valence,error_rate_"
         "arousal\n";
  char buf[160];
  for (const EvaluationReport& r : reports) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.scenario.c_str(), r.feature_set.c_str(),
                  r.personalized ? 1 : 0, r.pruned ? 1 : 0,
                  r.overall.mae_valence, r.overall.mae_arousal,
                  r.overall.pearson_valence, r.overall.pearson_arousal,
                  r.overall.error_rate_valence, r.overall.error_rate_arousal);
    out << buf;
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

void write_confusion_csv(const ClassificationReport& report,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out << "truth\\prediction";
  for (int q = 0; q < 4; ++q)
    out << "," << quadrant_name(static_cast<EmotionQuadrant>(q));
  out << "\n";
  for (int r = 0; r < 4; ++r) {
    out << quadrant_name(static_cast<EmotionQuadrant>(r));
    for (int c = 0; c < 4; ++c)
      out << "," << static_cast<long long>(report.confusion(r, c));
    out << "\n";
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "# accuracy %.6g macro_f1 %.6g\n",
                report.accuracy, report.macro_f1);
  out << buf;
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

void write_person_bar_svg(const EvaluationReport& report,
                          const std::filesystem::path& path) {
  const int n = static_cast<int>(report.per_person.size());
  const double bar = 16.0, group = 44.0, left = 50.0, top = 20.0;
  const double chart_h = 160.0;
  SvgWriter svg(left + group * n + 40.0, top + chart_h + 40.0);
  double max_mae = 0.5;
  for (const PersonResult& p : report.per_person)
    max_mae = std::max({max_mae, p.metrics.mae_valence, p.metrics.mae_arousal});
  svg.line(left, top, left, top + chart_h);
  svg.line(left, top + chart_h, left + group * n + 10.0, top + chart_h);
  for (int i = 0; i < n; ++i) {
    const PersonResult& p = report.per_person[static_cast<std::size_t>(i)];
    const double x = left + group * i + 6.0;
    const double hv = chart_h * p.metrics.mae_valence / max_mae;
    const double ha = chart_h * p.metrics.mae_arousal / max_mae;
    svg.rect(x, top + chart_h - hv, bar, hv, "#4477aa");
    svg.rect(x + bar + 2.0, top + chart_h - ha, bar, ha, "#ee6677");
    svg.text(x, top + chart_h + 14.0, p.person_id, 9);
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "MAE max %.2f", max_mae);
  svg.text(left, top - 6.0, buf, 10);
  svg.text(left, top + chart_h + 30.0,
           "valence (blue)  arousal (red), per target person", 10);
  svg.save(path);
}

}  // namespace stepsense
