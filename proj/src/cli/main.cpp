#include <exception>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "hct/cli/commands.hpp"

namespace hct::cli {

namespace {

struct Flags {
  std::string config;
  std::string data;
  std::string labels;
  std::string task;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<Index> folds;
  std::optional<Index> jobs;
  bool overwrite = false;
  std::vector<std::string> set;
  CheckpointPaths checkpoints;
};

RunConfig resolve(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
  if (!f.data.empty()) c.data_dir = f.data;
  if (!f.labels.empty()) c.labels = f.labels;
  if (!f.task.empty()) c.set("task", f.task);
  if (!f.out.empty()) c.out = f.out;
  if (f.seed) c.seed = f.seed;
  if (f.folds) c.folds = *f.folds;
  if (f.jobs) c.jobs = *f.jobs;
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorKind::config, "--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parkinson's gait diagnosis with a hybrid ConvNet-Transformer", "hct"};
  app.require_subcommand(1);
  Flags f;
  const auto common = [&f](CLI::App* sub, bool dataset) {
    sub->add_option("--config", f.config, "flat key = value config file or a previous run's manifest.json");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--set", f.set, "override one config key (key=value), repeatable");
    if (dataset) {
      sub->add_option("--data", f.data, "dataset directory (default: $HCT_DATA_DIR)");
      sub->add_option("--labels", f.labels, "label table (default: demographics.txt in the dataset)");
    }
  };
  CLI::App* ingest = app.add_subcommand("ingest", "summarize a dataset directory");
  common(ingest, true);
  CLI::App* train = app.add_subcommand("train", "train one model on the whole dataset");
  common(train, true);
  CLI::App* cv = app.add_subcommand("cv", "subject-level k-fold cross-validation");
  common(cv, true);
  for (CLI::App* sub : {train, cv}) {
    sub->add_option("--seed", f.seed, "random seed (required)");
    sub->add_option("--task", f.task, "detection, staging (or two_step for cv)");
    sub->add_flag("--overwrite", f.overwrite, "replace an existing run in --out");
  }
  cv->add_option("--folds", f.folds, "number of folds (default 10)");
  cv->add_option("--jobs", f.jobs, "worker threads (default: one per fold, capped at the core count)");
  CLI::App* diagnose = app.add_subcommand("diagnose", "two-step diagnosis of one walk file");
  common(diagnose, false);
  diagnose->add_option("--binary-ckpt", f.checkpoints.binary, "detection checkpoint")->required();
  diagnose->add_option("--staging-ckpt", f.checkpoints.staging, "staging checkpoint")->required();
  diagnose->add_option("--walk", f.checkpoints.walk, "walk file to diagnose")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[config]: " << e.what() << "\n";
    return exit_code(ErrorKind::config);
  }

  try {
    const RunConfig config = resolve(f);
    if (ingest->parsed()) return cmd_ingest(config, out);
    if (train->parsed()) return cmd_train(config, f.overwrite, out);
    if (cv->parsed()) return cmd_cv(config, f.overwrite, out);
    return cmd_diagnose(config, f.checkpoints, out);
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hct::cli
