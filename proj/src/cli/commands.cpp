#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "hct/cli/commands.hpp"
#include "hct/eval/diagnosis.hpp"
#include "hct/log.hpp"
#include "hct/model/checkpoint.hpp"

namespace hct::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!(f << text)) fail(ErrorKind::io, "cannot write " + path.string());
}

fs::path require_out(const RunConfig& config) {
  if (config.out.empty()) fail(ErrorKind::config, "an output directory is required (--out or 'out = DIR')");
  return config.out;
}

// Refuses to reuse a directory holding a previous run unless asked to.
void prepare_out(const fs::path& dir, const std::vector<std::string>& markers, bool overwrite) {
  for (const auto& m : markers) {
    if (fs::exists(dir / m) && !overwrite) {
      fail(ErrorKind::config, dir.string() + " already holds a run (" + m + "); pass --overwrite to replace it");
    }
  }
  fs::create_directories(dir);
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string stage_text(double stage) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%g", stage);
  return buf;
}

}  // namespace

int cmd_ingest(const RunConfig& config, std::ostream& out) {
  const LoadedDataset data = load_dataset(config, false);
  struct Counts {
    std::set<std::string> subjects;
    Index walks = 0;
    Index segments = 0;
  };
  std::map<std::string, Counts> by_class;
  const auto count = [&](const std::string& cls, const WalkRecord& r, Index segments) {
    auto& c = by_class[cls];
    c.subjects.insert(r.subject_id);
    ++c.walks;
    c.segments += segments;
  };
  Index unlabeled = 0;
  for (const auto& r : data.records) {
    const Index segments = r.length() / config.model.segment_length;
    if (data.labels) {
      if (const auto it = data.labels->labels.find(r.subject_id); it != data.labels->labels.end()) {
        count(it->second.is_pd ? "PD" : "control", r, segments);
        if (it->second.is_pd) count("stage " + stage_text(it->second.hy_stage), r, segments);
      } else if (data.labels->unstaged_pd.count(r.subject_id) != 0) {
        count("PD", r, segments);
        count("stage unknown", r, segments);
      } else {
        ++unlabeled;
      }
    } else {
      const auto name = parse_walk_filename(r.subject_id + "_" + r.walk_id + ".txt");
      count(name && name->is_pd_group ? "PD" : "control", r, segments);
    }
  }

  std::set<std::string> subjects;
  Index segments = 0;
  for (const auto& r : data.records) {
    subjects.insert(r.subject_id);
    segments += r.length() / config.model.segment_length;
  }
  out << "walks: " << data.records.size() << " parsed, " << data.malformed.size() << " malformed\n";
  out << "subjects: " << subjects.size() << "\n";
  out << "segments: " << segments << " of " << config.model.segment_length << " samples\n";
  out << "labels: "
      << (data.labels ? data.label_path.string() : std::string("none found, classes taken from file names")) << "\n";
  out << "class,subjects,walks,segments\n";
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (const auto& [cls, c] : by_class) {
    out << cls << ',' << c.subjects.size() << ',' << c.walks << ',' << c.segments << '\n';
    classes[cls] = {{"subjects", c.subjects.size()}, {"walks", c.walks}, {"segments", c.segments}};
  }
  if (unlabeled > 0) out << "walks of subjects missing from the label table: " << unlabeled << "\n";
  if (!data.malformed.empty()) {
    out << "warnings:\n";
    for (const auto& m : data.malformed) out << "  " << m << "\n";
  }

  if (!config.out.empty()) {
    fs::create_directories(config.out);
    nlohmann::ordered_json summary;
    summary["walks"] = data.records.size();
    summary["subjects"] = subjects.size();
    summary["segments"] = segments;
    summary["classes"] = classes;
    summary["unlabeled_walks"] = unlabeled;
    summary["malformed"] = data.malformed;
    write_text(config.out / "summary.json", summary.dump(2) + "\n");
    write_text(config.out / "manifest.json",
               make_manifest("ingest", config, data.inputs, {"summary.json"}).dump(2) + "\n");
  }
  return 0;
}

int cmd_train(const RunConfig& config, bool overwrite, std::ostream& out) {
  config.require_seed();
  if (config.task == CvTask::two_step) {
    fail(ErrorKind::config, "train builds one model; use task detection or staging");
  }
  const fs::path dir = require_out(config);
  const Task task = config.task == CvTask::detection ? Task::two_class : Task::multi_class;
  const HctConfig model = config.model_config(task);
  const TrainConfig train_config = config.train_config(task);
  model.validate();
  train_config.validate();

  const LoadedDataset data = load_dataset(config, true);
  const std::vector<PreparedWalk> walks = prepare_walks(data, model.segment_length);
  const DatasetTask dtask = task == Task::two_class ? DatasetTask::detection : DatasetTask::staging;
  const std::vector<LabeledSegment> items = labeled_segments(walks, dtask);
  if (items.empty()) {
    fail(ErrorKind::contract, dtask == DatasetTask::staging ? "no PD walks with a usable stage to train on"
                                                            : "no labelled segments to train on");
  }
  prepare_out(dir, {"checkpoint.hct", "manifest.json"}, overwrite);

  const TrainResult result = train(items, train_config, model);
  save_checkpoint(result.params, dir / "checkpoint.hct");
  write_text(dir / "history.csv", result.history.to_csv());
  write_text(dir / "manifest.json",
             make_manifest("train", config, data.inputs, {"checkpoint.hct", "history.csv"}).dump(2) + "\n");
  out << "trained " << to_string(task) << " model on " << items.size() << " segments; best epoch "
      << result.history.best_epoch << " of " << result.history.stopped_epoch << "\n";
  out << "wrote " << (dir / "checkpoint.hct").string() << "\n";
  return 0;
}

int cmd_cv(const RunConfig& config, bool overwrite, std::ostream& out) {
  const CvOptions options = config.cv_options();
  const fs::path dir = require_out(config);
  const LoadedDataset data = load_dataset(config, true);
  const std::vector<PreparedWalk> walks = prepare_walks(data, config.model.segment_length);
  prepare_out(dir, {"aggregate.json", "manifest.json"}, overwrite);

  const CvReport report = cross_validate(walks, config.task, options);
  std::vector<std::string> written = write_cv_report(report, dir);
  write_text(dir / "manifest.json", make_manifest("cv", config, data.inputs, written).dump(2) + "\n");

  out << to_string(config.task) << " " << report.k << "-fold cross-validation, "
      << report.pooled.total() << " walks scored\n";
  out << "metric,mean(%),sd(%)\n";
  for (const auto& [name, ms] : report.aggregate) out << name << ',' << percent(ms.mean) << ',' << percent(ms.sd) << '\n';
  out << "wrote " << written.size() + 1 << " files to " << dir.string() << "\n";
  return 0;
}

int cmd_diagnose(const RunConfig& config, const CheckpointPaths& paths, std::ostream& out) {
  if (paths.binary.empty() || paths.staging.empty() || paths.walk.empty()) {
    fail(ErrorKind::config, "diagnose needs --binary-ckpt, --staging-ckpt and --walk");
  }
  const HctParams<float> binary = load_checkpoint(paths.binary, Task::two_class);
  const HctParams<float> staging = load_checkpoint(paths.staging, Task::multi_class);
  std::ifstream f(paths.walk, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot read walk file " + paths.walk.string());
  const std::string contents{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  WalkRecord walk = parse_walk_file(contents, paths.walk.filename().string());
  const Diagnosis d = two_step_diagnose(std::move(walk), binary, staging);

  const auto votes = [](const WalkPrediction& p, const std::vector<std::string>& names) {
    std::string s;
    for (std::size_t c = 0; c < p.tally.size(); ++c) s += (c ? " " : "") + names[c] + "=" + std::to_string(p.tally[c]);
    return s;
  };
  const auto scores = [](const WalkPrediction& p, const std::vector<std::string>& names) {
    std::string s;
    for (std::size_t c = 0; c < p.mean_scores.size(); ++c) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", p.mean_scores[c]);
      s += (c ? " " : "") + names[c] + "=" + buf;
    }
    return s;
  };
  const std::vector<std::string> binary_names{"healthy", "PD"};
  const std::vector<std::string> stage_names{"2", "2.5", "3"};
  out << "diagnosis: " << d.label() << "\n";
  out << "segments: " << d.detection.segments << "\n";
  out << "detection votes: " << votes(d.detection, binary_names) << "\n";
  out << "detection scores: " << scores(d.detection, {"PD"}) << "\n";
  if (d.staging) {
    out << "staging votes: " << votes(*d.staging, stage_names) << "\n";
    out << "staging scores: " << scores(*d.staging, stage_names) << "\n";
  } else {
    out << "staging: not run (walk detected as healthy)\n";
  }

  if (!config.out.empty()) {
    fs::create_directories(config.out);
    nlohmann::ordered_json j;
    j["walk"] = paths.walk.filename().string();
    j["diagnosis"] = d.label();
    j["detection"] = {{"votes", d.detection.tally}, {"scores", d.detection.mean_scores}};
    j["staging"] = d.staging ? nlohmann::ordered_json{{"votes", d.staging->tally}, {"scores", d.staging->mean_scores}}
                             : nlohmann::ordered_json();
    write_text(config.out / "diagnosis.json", j.dump(2) + "\n");
    const std::vector<InputDigest> inputs{{paths.binary.filename().string(), sha256_file(paths.binary)},
                                          {paths.staging.filename().string(), sha256_file(paths.staging)},
                                          {paths.walk.filename().string(), sha256_hex(contents)}};
    write_text(config.out / "manifest.json", make_manifest("diagnose", config, inputs, {"diagnosis.json"}).dump(2) + "\n");
  }
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::format: return 3;
    case ErrorKind::contract: return 4;
    case ErrorKind::validation: return 5;
    case ErrorKind::range: return 6;
    case ErrorKind::task_mismatch: return 7;
    case ErrorKind::io: return 8;
    case ErrorKind::shape: return 9;
    case ErrorKind::oracle: return 10;
  }
  return 1;
}

}  // namespace hct::cli
