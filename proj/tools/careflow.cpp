#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "careflow/discovery.hpp"
#include "careflow/dream.hpp"
#include "careflow/eval.hpp"
#include "careflow/explain.hpp"
#include "careflow/pipeline.hpp"
#include "careflow/pnml.hpp"
#include "careflow/synthcohort.hpp"

namespace fs = std::filesystem;
using namespace careflow;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomically(path, [&](std::ostream& out) { out << text; });
}

PetriNet read_net(const fs::path& path) {
  auto in = open_input(path);
  return parse_pnml(in);
}

PredictionDataset read_dataset(const fs::path& path) {
  auto in = open_input(path);
  return read_dataset_csv(in);
}

NetworkWeights read_weight_file(const fs::path& path) {
  auto in = open_input(path);
  return read_weights(in);
}

void write_log_pair(const fs::path& dir, const std::string& stem, const EventLog& log) {
  write_file_atomically(dir / (stem + "_events.csv"),
                        [&](std::ostream& out) { write_events_csv(out, log); });
  write_file_atomically(dir / (stem + "_demographics.csv"),
                        [&](std::ostream& out) { write_demographics_csv(out, log); });
}

std::size_t deaths(const EventLog& log) {
  std::size_t n = 0;
  for (const auto& t : log.traces) n += t.outcome == Outcome::Death;
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"careflow: process-mining mortality prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "careflow 0.1.0");

  std::string events, demo, net_path, out, out_dir, config, data, weights, groups_path,
      params_path, validation_path, baseline_path;
  std::uint64_t seed = 7;
  double cutoff_hours = 24.0, threshold = 0.0, decision_threshold = 0.5, level = 0.95;
  bool apply_filter = false, class_weighting = false;
  CohortConfig synth_cfg;

  auto* validate_cmd = app.add_subcommand("validate", "Parse and check an event log");
  validate_cmd->add_option("--events", events, "Events CSV")->required();
  validate_cmd->add_option("--demo", demo, "Demographics CSV")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth_cmd->add_option("--n", synth_cfg.n_patients, "Number of patients");
  synth_cmd->add_option("--seed", synth_cfg.seed, "Generator seed");
  synth_cmd->add_option("--signal", synth_cfg.signal_strength, "Mortality signal strength");
  synth_cmd->add_option("--death-rate", synth_cfg.death_rate, "Target mean death probability");
  synth_cmd->add_option("--mean-events", synth_cfg.mean_events_per_patient,
                        "Mean events per patient");
  synth_cmd->add_option("--horizon-hours", synth_cfg.horizon_hours,
                        "Window holding the lab and care-unit events");
  synth_cmd->add_option("--age-weight", synth_cfg.age_weight, "Age term in the risk score");
  synth_cmd->add_option("--violations", synth_cfg.n_violations,
                        "Patients planted to fail the cohort filter");
  synth_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* split_cmd = app.add_subcommand("split", "Seeded train/validation/test split");
  split_cmd->add_option("--events", events, "Events CSV")->required();
  split_cmd->add_option("--demo", demo, "Demographics CSV")->required();
  split_cmd->add_option("--seed", seed, "Permutation seed");
  split_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  split_cmd->add_flag("--filter", apply_filter, "Apply the cohort filter before splitting");
  split_cmd->add_option("--cutoff-hours", cutoff_hours, "Filter cutoff");

  auto* discover_cmd = app.add_subcommand("discover", "Discover a Petri net from events");
  discover_cmd->add_option("--events", events, "Events CSV")->required();
  discover_cmd->add_option("--threshold", threshold, "Relative edge threshold in [0, 1]");
  discover_cmd->add_option("--out", out, "Output PNML")->required();

  auto* enhance_cmd = app.add_subcommand("enhance", "Build timed state samples");
  enhance_cmd->add_option("--net", net_path, "PNML net")->required();
  enhance_cmd->add_option("--events", events, "Events CSV")->required();
  enhance_cmd->add_option("--demo", demo, "Demographics CSV")->required();
  enhance_cmd->add_option("--cutoff-hours", cutoff_hours, "Prediction cutoff");
  enhance_cmd->add_option("--params", params_path,
                          "Decay parameters JSON (default: fit on these events)");
  enhance_cmd->add_option("--out", out, "Output dataset CSV")->required();

  auto* train_cmd = app.add_subcommand("train", "Train the classifier");
  train_cmd->add_option("--data", data, "Training dataset CSV")->required();
  train_cmd->add_option("--validation", validation_path,
                        "Validation dataset CSV (default: the training data)");
  train_cmd->add_option("--config", config, "key=value training config");
  train_cmd->add_option("--seed", seed, "Seed (overrides the config)");
  train_cmd->add_flag("--class-weighting", class_weighting, "Inverse-frequency class weights");
  train_cmd->add_option("--out", out, "Output weight file")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "AUC, DeLong interval and confusion");
  evaluate_cmd->add_option("--weights", weights, "Weight file")->required();
  evaluate_cmd->add_option("--data", data, "Dataset CSV")->required();
  evaluate_cmd->add_option("--threshold", decision_threshold, "Decision threshold");
  evaluate_cmd->add_option("--level", level, "Confidence level");
  evaluate_cmd->add_option("--out", out, "Output report JSON")->required();

  auto* explain_cmd = app.add_subcommand("explain", "Exact grouped Shapley attribution");
  explain_cmd->add_option("--weights", weights, "Weight file")->required();
  explain_cmd->add_option("--data", data, "Dataset CSV to explain")->required();
  explain_cmd->add_option("--groups", groups_path, "Group definition JSON")->required();
  explain_cmd->add_option("--baseline", baseline_path,
                          "Dataset CSV whose column means replace masked groups");
  explain_cmd->add_option("--out", out, "Output JSON")->required();

  auto* dot_cmd = app.add_subcommand("export-dot", "Render a PNML net as DOT");
  dot_cmd->add_option("--net", net_path, "PNML net")->required();
  dot_cmd->add_option("--out", out, "Output DOT file")->required();

  auto* run_cmd = app.add_subcommand("run", "Run the whole pipeline from a config file");
  run_cmd->add_option("--config", config, "key=value run config")->required();
  auto* run_seed = run_cmd->add_option("--seed", seed, "Seed (overrides the config)");
  run_cmd->add_option("--out-dir", out_dir, "Output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (validate_cmd->parsed()) {
      const auto log = read_event_log(events, demo);
      std::cout << "ok: " << log.traces.size() << " traces, " << log.vocabulary.size()
                << " event types, " << deaths(log) << " deaths\n";
    } else if (synth_cmd->parsed()) {
      const auto cohort = generate_cohort(synth_cfg);
      write_file_atomically(fs::path(out_dir) / "events.csv",
                            [&](std::ostream& o) { write_events_csv(o, cohort.log); });
      write_file_atomically(fs::path(out_dir) / "demographics.csv",
                            [&](std::ostream& o) { write_demographics_csv(o, cohort.log); });
      std::cout << "synth: " << cohort.log.traces.size() << " patients, " << deaths(cohort.log)
                << " deaths\n";
    } else if (split_cmd->parsed()) {
      auto log = read_event_log(events, demo);
      if (apply_filter) log = filter_cohort(log, cutoff_hours);
      const auto split = split_cohort(log, seed);
      write_log_pair(out_dir, "train", split.train);
      write_log_pair(out_dir, "validation", split.validation);
      write_log_pair(out_dir, "test", split.test);
      std::cout << "split: train " << split.train.traces.size() << ", validation "
                << split.validation.traces.size() << ", test " << split.test.traces.size()
                << "\n";
    } else if (discover_cmd->parsed()) {
      auto in = open_input(events);
      const auto net = discover(parse_events_only(in), threshold);
      write_file_atomically(out, [&](std::ostream& o) { write_pnml(o, net); });
      std::cout << "discover: " << net.place_count() << " places, " << net.transition_count()
                << " transitions\n";
    } else if (enhance_cmd->parsed()) {
      const auto net = read_net(net_path);
      const auto log = read_event_log(events, demo);
      DecayParams params;
      if (params_path.empty()) {
        params = estimate_decay_params(net, log);
      } else {
        auto in = open_input(params_path);
        params = read_decay_params_json(in);
      }
      const auto dataset = build_dataset(net, params, log, cutoff_hours);
      write_file_atomically(out, [&](std::ostream& o) { write_dataset_csv(o, dataset); });
      write_file_atomically(out + ".meta.json", [&](std::ostream& o) {
        write_decay_params_json(o, params, cutoff_hours);
      });
      const auto groups = assign_groups(net, place_provenance(net));
      write_file_atomically(out + ".groups.json",
                            [&](std::ostream& o) { write_groups_json(o, groups); });
      std::cout << "enhance: " << dataset.size() << " rows, " << dataset.samples.cols()
                << " sample columns\n";
    } else if (train_cmd->parsed()) {
      TrainConfig cfg;
      if (!config.empty()) {
        auto in = open_input(config);
        apply_train_settings(cfg, parse_key_values(in));
      }
      if (train_cmd->count("--seed") > 0) cfg.seed = seed;
      if (class_weighting) cfg.class_weighting = true;
      cfg.validate();
      const auto train_data = read_dataset(data);
      const auto validation_data =
          validation_path.empty() ? train_data : read_dataset(validation_path);
      const auto result = train(train_data, validation_data, cfg);
      write_file_atomically(out, [&](std::ostream& o) { write_weights(o, result.weights); });
      std::cout << "train: best epoch " << result.best_epoch << ", validation AUC "
                << format_double(result.history[result.best_epoch].validation_auc) << "\n";
    } else if (evaluate_cmd->parsed()) {
      const auto w = read_weight_file(weights);
      const auto dataset = read_dataset(data);
      const auto report =
          evaluate(predict_proba(w, dataset), dataset.labels, decision_threshold, level);
      write_text(out, report_to_json(report));
      std::cout << format_auc_summary(report) << "\n";
    } else if (explain_cmd->parsed()) {
      const auto w = read_weight_file(weights);
      const auto dataset = read_dataset(data);
      auto in = open_input(groups_path);
      const auto groups = read_groups_json(in);
      const auto baseline =
          column_means(baseline_path.empty() ? dataset : read_dataset(baseline_path));
      const auto attribution = shapley_groups(w, dataset, groups, baseline);
      write_text(out, attribution_to_json(attribution));
      for (std::size_t g = 0; g < attribution.groups.size(); ++g) {
        std::cout << attribution.groups[g] << ' ' << format_double(attribution.phi[g]) << "\n";
      }
    } else if (dot_cmd->parsed()) {
      write_text(out, to_dot(read_net(net_path)));
    } else if (run_cmd->parsed()) {
      auto in = open_input(config);
      auto settings = parse_key_values(in);
      if (*run_seed) settings["seed"] = std::to_string(seed);
      if (!out_dir.empty()) settings["out_dir"] = fs::absolute(out_dir).string();
      const auto cfg =
          run_config_from_settings(settings, fs::absolute(config).parent_path());
      const auto outcome = run_pipeline(cfg, std::cout);
      if (outcome.exit_code != kExitOk) {
        std::cerr << "careflow: stage '" << outcome.failed_stage << "' failed: " << outcome.message
                  << "\n";
      }
      return outcome.exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << "careflow: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}
