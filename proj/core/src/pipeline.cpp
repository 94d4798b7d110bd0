#include "careflow/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "careflow/discovery.hpp"
#include "careflow/dream.hpp"
#include "careflow/eval.hpp"
#include "careflow/explain.hpp"
#include "careflow/pnml.hpp"

namespace careflow {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return kExitConfig;
  if (dynamic_cast<const DataError*>(&error)) return kExitData;
  if (dynamic_cast<const NumericError*>(&error)) return kExitNumeric;
  if (dynamic_cast<const std::invalid_argument*>(&error) ||
      dynamic_cast<const std::domain_error*>(&error)) {
    return kExitData;
  }
  return kExitInternal;
}

void RunConfig::validate() const {
  if (events.empty()) throw ConfigError("events path is required");
  if (demographics.empty()) throw ConfigError("demographics path is required");
  if (out_dir.empty()) throw ConfigError("out_dir is required");
  for (const auto& p : {events, demographics}) {
    if (!fs::is_regular_file(p)) throw ConfigError("input file not found: " + p.string());
  }
  if (!net.empty() && !fs::is_regular_file(net)) {
    throw ConfigError("net file not found: " + net.string());
  }
  if (!(cutoff_hours > 0.0) || !std::isfinite(cutoff_hours)) {
    throw ConfigError("cutoff_hours must be positive");
  }
  if (!(edge_threshold >= 0.0 && edge_threshold <= 1.0)) {
    throw ConfigError("edge_threshold must lie in [0, 1]");
  }
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError("ci_level must lie in (0, 1)");
  if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0)) {
    throw ConfigError("threshold must lie in [0, 1]");
  }
  train.validate();
}

RunConfig run_config_from_settings(const std::map<std::string, std::string>& settings,
                                   const fs::path& base_dir) {
  RunConfig cfg;
  std::map<std::string, std::string> train_settings;
  auto path = [&](const std::string& v) {
    const fs::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  auto number = [](const std::string& key, const std::string& v) {
    double d = 0;
    if (!parse_double(v, d)) throw ConfigError(key + ": expected a number");
    return d;
  };
  for (const auto& [key, value] : settings) {
    if (key == "events") {
      cfg.events = path(value);
    } else if (key == "demographics") {
      cfg.demographics = path(value);
    } else if (key == "net") {
      cfg.net = value.empty() ? fs::path() : path(value);
    } else if (key == "out_dir") {
      cfg.out_dir = path(value);
    } else if (key == "seed") {
      std::int64_t s = 0;
      if (!parse_int64(value, s) || s < 0) throw ConfigError("seed: expected a non-negative integer");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "cutoff_hours") {
      cfg.cutoff_hours = number(key, value);
    } else if (key == "edge_threshold") {
      cfg.edge_threshold = number(key, value);
    } else if (key == "ci_level") {
      cfg.ci_level = number(key, value);
    } else if (key == "threshold") {
      cfg.decision_threshold = number(key, value);
    } else {
      train_settings.emplace(key, value);
    }
  }
  apply_train_settings(cfg.train, train_settings);
  cfg.train.seed = cfg.seed;
  return cfg;
}

std::string format_run_config(const RunConfig& cfg) {
  std::map<std::string, std::string> kv{
      {"events", cfg.events.string()},
      {"demographics", cfg.demographics.string()},
      {"net", cfg.net.string()},
      {"out_dir", cfg.out_dir.string()},
      {"seed", std::to_string(cfg.seed)},
      {"cutoff_hours", format_double(cfg.cutoff_hours)},
      {"edge_threshold", format_double(cfg.edge_threshold)},
      {"ci_level", format_double(cfg.ci_level)},
      {"threshold", format_double(cfg.decision_threshold)},
      {"epochs", std::to_string(cfg.train.epochs)},
      {"batch_size", std::to_string(cfg.train.batch_size)},
      {"learning_rate", format_double(cfg.train.learning_rate)},
      {"dropout", format_double(cfg.train.dropout)},
      {"rmsprop_decay", format_double(cfg.train.rmsprop_decay)},
      {"rmsprop_epsilon", format_double(cfg.train.rmsprop_epsilon)},
      {"class_weighting", cfg.train.class_weighting ? "true" : "false"},
  };
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

void write_file_atomically(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    writer(out);
    out.flush();
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

EventLog read_event_log(const fs::path& events, const fs::path& demographics) {
  auto ev = open_input(events);
  auto demo = open_input(demographics);
  return parse_event_log(ev, demo);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomically(path, [&](std::ostream& out) { out << text; });
}

void write_dataset(const fs::path& path, const PredictionDataset& data) {
  write_file_atomically(path, [&](std::ostream& out) { write_dataset_csv(out, data); });
}

}  // namespace

RunOutcome run_pipeline(const RunConfig& cfg, std::ostream& log) {
  RunOutcome outcome;
  std::string stage = "config";
  try {
    cfg.validate();
    const fs::path& dir = cfg.out_dir;
    fs::create_directories(dir);
    write_text(dir / "run.cfg", format_run_config(cfg));

    stage = "validate";
    const EventLog full = read_event_log(cfg.events, cfg.demographics);
    log << "validate: " << full.traces.size() << " traces, " << full.vocabulary.size()
        << " event types\n";

    stage = "filter";
    const EventLog cohort = filter_cohort(full, cfg.cutoff_hours);
    log << "filter: kept " << cohort.traces.size() << " of " << full.traces.size() << " traces\n";

    stage = "split";
    const CohortSplit split = split_cohort(cohort, cfg.seed);
    log << "split: train " << split.train.traces.size() << ", validation "
        << split.validation.traces.size() << ", test " << split.test.traces.size() << "\n";

    stage = "discover";
    PetriNet net;
    if (cfg.net.empty()) {
      net = discover(split.train, cfg.edge_threshold);
    } else {
      auto in = open_input(cfg.net);
      net = parse_pnml(in);
    }
    write_file_atomically(dir / "net.pnml", [&](std::ostream& out) { write_pnml(out, net); });
    write_text(dir / "net.dot", to_dot(net));
    log << "discover: " << net.place_count() << " places, " << net.transition_count()
        << " transitions\n";

    stage = "decay";
    const DecayParams params = estimate_decay_params(net, split.train);
    write_file_atomically(dir / "decay.json", [&](std::ostream& out) {
      write_decay_params_json(out, params, cfg.cutoff_hours);
    });
    log << "decay: fitted " << params.size() << " places\n";

    stage = "enhance";
    const auto train_data = build_dataset(net, params, split.train, cfg.cutoff_hours);
    const auto validation_data = build_dataset(net, params, split.validation, cfg.cutoff_hours);
    const auto test_data = build_dataset(net, params, split.test, cfg.cutoff_hours);
    write_dataset(dir / "train.csv", train_data);
    write_dataset(dir / "validation.csv", validation_data);
    write_dataset(dir / "test.csv", test_data);
    log << "enhance: " << train_data.samples.cols() << " sample columns at "
        << format_double(cfg.cutoff_hours) << " h\n";

    stage = "train";
    const TrainResult trained = train(train_data, validation_data, cfg.train);
    write_file_atomically(dir / "weights.txt",
                          [&](std::ostream& out) { write_weights(out, trained.weights); });
    write_file_atomically(dir / "history.csv", [&](std::ostream& out) {
      out << "epoch,train_loss,validation_auc\n";
      for (const auto& h : trained.history) {
        out << h.epoch << ',' << format_double(h.train_loss) << ','
            << format_double(h.validation_auc) << '\n';
      }
    });
    log << "train: best epoch " << trained.best_epoch << " of " << cfg.train.epochs
        << ", validation AUC " << format_double(trained.history[trained.best_epoch].validation_auc)
        << "\n";

    stage = "evaluate";
    const auto scores = predict_proba(trained.weights, test_data);
    const auto report = evaluate(scores, test_data.labels, cfg.decision_threshold, cfg.ci_level);
    write_text(dir / "report.json", report_to_json(report));
    log << "evaluate: " << format_auc_summary(report) << "\n";

    stage = "explain";
    const auto groups = assign_groups(net, place_provenance(net));
    write_file_atomically(dir / "groups.json",
                          [&](std::ostream& out) { write_groups_json(out, groups); });
    const auto baseline = column_means(train_data);
    const auto attribution = shapley_groups(trained.weights, test_data, groups, baseline);
    write_text(dir / "shap.json", attribution_to_json(attribution));
    log << "explain: top group " << rank_groups(attribution).front() << "\n";
  } catch (const std::exception& e) {
    outcome.exit_code = exit_code_for(e);
    outcome.failed_stage = stage;
    outcome.message = e.what();
    log << stage << " failed: " << e.what() << "\n";
  }
  return outcome;
}

}  // namespace careflow
