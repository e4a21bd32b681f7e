#include "hct/eval/cv.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "hct/eval/diagnosis.hpp"
#include "hct/log.hpp"

namespace hct {

std::string_view to_string(CvTask task) {
  switch (task) {
    case CvTask::detection: return "detection";
    case CvTask::staging: return "staging";
    case CvTask::two_step: return "two_step";
  }
  return "?";
}

CvTask parse_cv_task(std::string_view text) {
  if (text == "detection" || text == "two_class") return CvTask::detection;
  if (text == "staging" || text == "multi_class") return CvTask::staging;
  if (text == "two_step" || text == "two-step") return CvTask::two_step;
  fail(ErrorKind::config, "unknown task '" + std::string(text) + "' (expected detection, staging or two_step)");
}

namespace {

std::uint64_t fold_seed(std::uint64_t seed, Index fold, std::uint64_t stream) {
  Rng rng = make_rng(seed, stream * 1000 + static_cast<std::uint64_t>(fold));
  return rng();
}

TrainResult train_fold(std::span<const PreparedWalk> walks, const FoldPlan& plan, Index fold, DatasetTask task,
                       TrainConfig train_config, const HctConfig& model, std::uint64_t seed) {
  const DatasetSplit split = build_dataset(walks, plan, fold, task);
  train_config.seed = seed;
  if (split.train.empty()) {
    fail(ErrorKind::contract, "fold " + std::to_string(fold) + ": no training segments for " +
                                  (task == DatasetTask::detection ? "detection" : "staging"));
  }
  return train(split.train, train_config, model);
}

FoldReport run_fold(std::span<const PreparedWalk> walks, const FoldPlan& plan, Index fold, CvTask task,
                    const CvOptions& o) {
  FoldReport r;
  r.fold = fold;
  const DatasetTask primary = task == CvTask::staging ? DatasetTask::staging : DatasetTask::detection;
  const DatasetSplit split = build_dataset(walks, plan, fold, primary);
  r.train_walks = static_cast<Index>(split.train_walks.size());

  std::optional<TrainResult> detection;
  std::optional<TrainResult> staging;
  if (task != CvTask::staging) {
    detection = train_fold(walks, plan, fold, DatasetTask::detection, o.detection_train, o.detection_model,
                           fold_seed(o.seed, fold, 1));
    r.histories.emplace_back("detection", detection->history);
  }
  if (task != CvTask::detection) {
    staging = train_fold(walks, plan, fold, DatasetTask::staging, o.staging_train, o.staging_model,
                         fold_seed(o.seed, fold, 2));
    r.histories.emplace_back("staging", staging->history);
  }

  switch (task) {
    case CvTask::detection: r.counts = ConfusionCounts::binary(); break;
    case CvTask::staging: r.counts = ConfusionCounts::staging(); break;
    case CvTask::two_step:
      r.counts = ConfusionCounts::four_class();
      r.detection_counts = ConfusionCounts::binary();
      r.staging_counts = ConfusionCounts::staging();
      break;
  }

  for (std::size_t w : split.test_walks) {
    const PreparedWalk& walk = walks[w];
    if (walk.segments.empty()) {
      warn("fold " + std::to_string(fold) + ": walk " + walk.subject_id() + "_" + walk.record.walk_id +
           " has no segments; not scored");
      continue;
    }
    const std::span<const SegmentSet> segments(walk.segments);
    r.evaluated_walks.push_back(w);
    if (task == CvTask::detection) {
      r.counts.add(walk.is_pd ? 1 : 0, predict_walk(segments, detection->params).predicted);
    } else if (task == CvTask::staging) {
      r.counts.add(*task_label(walk, DatasetTask::staging), predict_walk(segments, staging->params).predicted);
    } else {
      const Diagnosis d = two_step_diagnose(segments, detection->params, staging->params);
      r.detection_counts->add(walk.is_pd ? 1 : 0, d.detection.predicted);
      if (walk.is_pd && !walk.stageable()) continue;  // no four-class truth
      const int truth = walk.is_pd ? 1 + *task_label(walk, DatasetTask::staging) : 0;
      r.counts.add(truth, d.composed);
      if (walk.stageable()) {
        const int staged = d.staging ? d.staging->predicted : predict_walk(segments, staging->params).predicted;
        r.staging_counts->add(truth - 1, staged);
      }
    }
  }
  if (r.counts.total() > 0) {
    r.metrics = compute_metrics(r.counts);
  } else {
    warn("fold " + std::to_string(fold) + ": no walks scored");
  }
  return r;
}

void add_metric(std::map<std::string, std::vector<double>>& values, const std::string& name, double v) {
  values[name].push_back(v);
}

}  // namespace

CvReport cross_validate(std::span<const PreparedWalk> walks, CvTask task, const CvOptions& options) {
  CvOptions o = options;
  o.detection_model.task = Task::two_class;
  o.staging_model.task = Task::multi_class;
  if (o.jobs < 1) fail(ErrorKind::config, "jobs must be at least 1");
  if (task != CvTask::staging) {
    o.detection_train.validate();
    o.detection_model.validate();
  }
  if (task != CvTask::detection) {
    o.staging_train.validate();
    o.staging_model.validate();
  }
  const DatasetTask fold_task = task == CvTask::staging ? DatasetTask::staging : DatasetTask::detection;
  const std::vector<SubjectLabel> subjects = subject_labels(walks, fold_task);
  if (subjects.empty()) fail(ErrorKind::contract, "cross_validate: no labelled walks for this task");

  CvReport report;
  report.task = task;
  report.k = o.k;
  report.seed = o.seed;
  report.plan = make_folds(subjects, o.k, o.seed);

  std::vector<std::optional<FoldReport>> results(static_cast<std::size_t>(o.k));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(o.k));
  std::atomic<Index> next{0};
  const auto worker = [&] {
    for (Index f = next++; f < o.k; f = next++) {
      try {
        results[static_cast<std::size_t>(f)] = run_fold(walks, report.plan, f, task, o);
      } catch (...) {
        errors[static_cast<std::size_t>(f)] = std::current_exception();
      }
    }
  };
  const Index threads = std::min(o.jobs, o.k);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (Index t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::map<std::string, std::vector<double>> values;
  for (auto& fr : results) {
    FoldReport& r = *fr;
    if (report.folds.empty()) {
      report.pooled = ConfusionCounts(r.counts.labels());
      if (r.detection_counts) report.pooled_detection = ConfusionCounts::binary();
      if (r.staging_counts) report.pooled_staging = ConfusionCounts::staging();
    }
    report.pooled += r.counts;
    if (r.detection_counts) *report.pooled_detection += *r.detection_counts;
    if (r.staging_counts) *report.pooled_staging += *r.staging_counts;
    if (r.metrics) {
      add_metric(values, "accuracy", r.metrics->accuracy);
      if (r.metrics->sensitivity) add_metric(values, "sensitivity", *r.metrics->sensitivity);
      if (r.metrics->specificity) add_metric(values, "specificity", *r.metrics->specificity);
      add_metric(values, "macro_precision", r.metrics->macro_precision);
      add_metric(values, "macro_recall", r.metrics->macro_recall);
      add_metric(values, "macro_f1", r.metrics->macro_f1);
    }
    if (r.detection_counts && r.detection_counts->total() > 0) {
      add_metric(values, "detection_accuracy", compute_metrics(*r.detection_counts).accuracy);
    }
    if (r.staging_counts && r.staging_counts->total() > 0) {
      add_metric(values, "staging_accuracy", compute_metrics(*r.staging_counts).accuracy);
    }
    report.folds.push_back(std::move(r));
  }
  if (report.pooled.total() == 0) fail(ErrorKind::contract, "cross_validate: no walk could be scored");
  report.pooled_metrics = compute_metrics(report.pooled);
  for (const auto& [name, v] : values) report.aggregate[name] = mean_sd(v);
  return report;
}

nlohmann::ordered_json CvReport::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = std::string(hct::to_string(task));
  j["k"] = k;
  j["seed"] = seed;
  nlohmann::ordered_json agg = nlohmann::ordered_json::object();
  for (const auto& [name, ms] : aggregate) agg[name] = {{"mean", ms.mean}, {"sd", ms.sd}};
  j["aggregate"] = agg;
  j["pooled"] = {{"confusion", hct::to_json(pooled)}, {"metrics", hct::to_json(pooled_metrics)}};
  if (pooled_detection) j["pooled_detection"] = hct::to_json(*pooled_detection);
  if (pooled_staging) j["pooled_staging"] = hct::to_json(*pooled_staging);
  auto fold_list = nlohmann::ordered_json::array();
  for (const auto& f : folds) {
    nlohmann::ordered_json fj;
    fj["fold"] = f.fold;
    fj["train_walks"] = f.train_walks;
    fj["test_walks"] = f.evaluated_walks.size();
    fj["confusion"] = hct::to_json(f.counts);
    fj["metrics"] = f.metrics ? hct::to_json(*f.metrics) : nlohmann::ordered_json();
    if (f.detection_counts) fj["detection_confusion"] = hct::to_json(*f.detection_counts);
    if (f.staging_counts) fj["staging_confusion"] = hct::to_json(*f.staging_counts);
    auto hist = nlohmann::ordered_json::array();
    for (const auto& [model, h] : f.histories) {
      hist.push_back({{"model", model},
                      {"epochs", h.epochs.size()},
                      {"best_epoch", h.best_epoch},
                      {"stopped_epoch", h.stopped_epoch},
                      {"early_stopped", h.early_stopped}});
    }
    fj["training"] = hist;
    fold_list.push_back(fj);
  }
  j["folds"] = fold_list;
  return j;
}

std::string CvReport::fold_table_csv() const {
  std::ostringstream out;
  out.precision(9);
  const bool binary = pooled.classes() == 2;
  out << "fold,train_walks,test_walks,accuracy";
  if (binary) out << ",sensitivity,specificity";
  out << ",macro_precision,macro_recall,macro_f1\n";
  for (const auto& f : folds) {
    out << f.fold << ',' << f.train_walks << ',' << f.evaluated_walks.size();
    if (!f.metrics) {
      out << (binary ? ",,,,,," : ",,,,") << '\n';
      continue;
    }
    const MetricsReport& m = *f.metrics;
    out << ',' << m.accuracy;
    if (binary) out << ',' << m.sensitivity.value_or(0.0) << ',' << m.specificity.value_or(0.0);
    out << ',' << m.macro_precision << ',' << m.macro_recall << ',' << m.macro_f1 << '\n';
  }
  for (const char* stat : {"mean", "sd"}) {
    out << stat << ",,";
    for (const char* name : {"accuracy", "sensitivity", "specificity", "macro_precision", "macro_recall", "macro_f1"}) {
      const std::string key = name;
      if (!binary && (key == "sensitivity" || key == "specificity")) continue;
      out << ',';
      if (const auto it = aggregate.find(key); it != aggregate.end()) {
        out << (stat[0] == 'm' ? it->second.mean : it->second.sd);
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string CvReport::fold_plan_csv() const {
  std::string out = "subject,fold\n";
  for (const auto& [subject, fold] : plan.fold_of) out += subject + "," + std::to_string(fold) + "\n";
  return out;
}

std::vector<std::string> write_cv_report(const CvReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!(f << text)) fail(ErrorKind::io, "cannot write " + (dir / name).string());
    written.push_back(name);
  };
  write("aggregate.json", report.to_json().dump(2) + "\n");
  write("folds.csv", report.fold_table_csv());
  write("fold_plan.csv", report.fold_plan_csv());
  write("confusion.csv", report.pooled.to_csv());
  if (report.pooled_detection) write("confusion_detection.csv", report.pooled_detection->to_csv());
  if (report.pooled_staging) write("confusion_staging.csv", report.pooled_staging->to_csv());
  for (const auto& f : report.folds) {
    char name[48];
    std::snprintf(name, sizeof name, "confusion_fold%02lld.csv", static_cast<long long>(f.fold));
    write(name, f.counts.to_csv());
  }
  return written;
}

}  // namespace hct
