#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabolas/benchmarks.hpp"
#include "fabolas/search_space.hpp"
#include "fabolas/strategies.hpp"

namespace fabolas {

/// Invalid configuration; `path()` names the offending field, e.g.
/// "budget.total_seconds" or "space.dimensions[1].lower".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ObjectiveKind { synthetic, surrogate, subprocess };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::synthetic;
  bool noisy = true;                 // synthetic only
  std::string surrogate_path;        // surrogate only
  std::string command;               // subprocess only
  double timeout_seconds = 3600.0;   // subprocess only

  bool operator==(const ObjectiveSpec&) const = default;
};

struct ExperimentConfig {
  SearchSpace space;
  std::string strategy = "fabolas";
  StrategyParams params;
  ObjectiveSpec objective;
  Budget budget;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "runs";
};

bool operator==(const StrategyParams& a, const StrategyParams& b);
bool operator==(const Budget& a, const Budget& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Parses a JSON configuration; throws ConfigError with a field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

std::unique_ptr<Objective> make_objective(const ObjectiveSpec& spec, const SearchSpace& space);

/// Record file name for one run.
std::string record_file_name(const std::string& strategy, std::uint64_t seed);

/// One JSON object per line; includes strategy and seed so files are self-describing.
std::string row_to_json_line(const ExperimentRecord& record, const RecordRow& row);
ExperimentRecord read_record(const std::string& path);
void write_record(const ExperimentRecord& record, const std::string& path);

/// Runs the configured strategy once per seed, appending each completed row
/// to `<output_dir>/<strategy>_seed<N>.jsonl` and flushing immediately.
/// Returns the written file paths.
std::vector<std::string> run_experiment(const ExperimentConfig& config, const StopPredicate& stop = {});

struct ReportRow {
  std::string strategy;
  double time = 0.0;
  std::optional<double> median, q25, q75;
};

/// Linear-interpolation percentile (q in [0, 1]) of unsorted values.
double percentile(std::vector<double> values, double q);

/// Per strategy and grid time: quantiles over seeds of the last incumbent
/// quality at or before t (true_loss when validated, else the predicted
/// loss). A time before some record's first incumbent is missing.
std::vector<ReportRow> report(const std::vector<ExperimentRecord>& records, const std::vector<double>& grid);

/// `n` log-spaced points from the smallest to the largest elapsed time.
std::vector<double> default_grid(const std::vector<ExperimentRecord>& records, int n = 30);

/// CSV with header strategy,time,median,q25,q75 and NA for missing values.
std::string report_csv(const std::vector<ReportRow>& rows);

/// Re-evaluates every logged incumbent at s = 1 with `validation_seed` and
/// stores the result as true_loss; failures mark the row invalid.
ExperimentRecord offline_validate(const ExperimentRecord& record, Objective& objective, std::uint64_t validation_seed);

}  // namespace fabolas
