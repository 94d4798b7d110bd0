#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>

#include "careflow/eventlog.hpp"
#include "careflow/model.hpp"

namespace careflow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// ConfigError -> 2, DataError and invalid inputs -> 3, NumericError -> 4,
/// anything else -> 1.
int exit_code_for(const std::exception& error);

struct RunConfig {
  std::filesystem::path events;
  std::filesystem::path demographics;
  std::filesystem::path net;  // optional; discovery runs when empty
  std::filesystem::path out_dir;
  std::uint64_t seed = 7;
  double cutoff_hours = 24.0;
  double edge_threshold = 0.0;
  double ci_level = 0.95;
  double decision_threshold = 0.5;
  TrainConfig train;

  /// Required paths are set and inputs exist; numeric fields are in range.
  /// Throws ConfigError.
  void validate() const;
};

/// Keys: events, demographics, net, out_dir, seed, cutoff_hours,
/// edge_threshold, ci_level, threshold, plus the training keys (epochs,
/// batch_size, learning_rate, dropout, rmsprop_decay, rmsprop_epsilon,
/// class_weighting). `seed` also seeds training. Relative paths are taken
/// relative to `base_dir`. Unknown keys throw ConfigError.
RunConfig run_config_from_settings(const std::map<std::string, std::string>& settings,
                                   const std::filesystem::path& base_dir = {});

/// Every field as key=value lines, sorted by key.
std::string format_run_config(const RunConfig& cfg);

/// Opens a file for reading; ConfigError if it cannot be opened.
std::ifstream open_input(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, so a failure never
/// leaves a half-written artifact. Throws DataError on I/O failure.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& writer);

EventLog read_event_log(const std::filesystem::path& events,
                        const std::filesystem::path& demographics);

struct RunOutcome {
  int exit_code = kExitOk;
  std::string failed_stage;  // empty on success
  std::string message;
};

/// validate -> filter -> split -> discover -> decay -> enhance -> train ->
/// evaluate -> explain. Writes into out_dir: run.cfg, net.pnml, net.dot,
/// decay.json, train.csv, validation.csv, test.csv, weights.txt,
/// history.csv, report.json, groups.json, shap.json. Each stage logs one
/// line to `log`. An invalid config fails before anything is written.
RunOutcome run_pipeline(const RunConfig& cfg, std::ostream& log);

}  // namespace careflow
