#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "silab/trainer.h"

namespace silab::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Bad input from the user: missing files, invalid configs, unsafe overwrites.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// $SILAB_OUTPUT_ROOT, or ./runs when unset.
std::filesystem::path OutputRoot();

nlohmann::json ReadJsonFile(const std::filesystem::path& path);
RunConfig LoadRunConfig(const std::filesystem::path& path,
                        const std::vector<std::string>& overrides);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

// Reads a CSV and checks its header; a mismatch is an error naming the file.
CsvTable ReadCsv(const std::filesystem::path& path,
                 const std::vector<std::string>& expected_header);

// First env_steps whose windowed mean return reaches the threshold with a
// full window, from a run's metrics.csv.
std::optional<std::int64_t> StepsToThreshold(const CsvTable& metrics, double threshold,
                                             int window);

int CmdRun(const std::string& config_path, const std::vector<std::string>& overrides,
           const std::optional<std::string>& out_dir, bool force, std::ostream& out,
           std::ostream& err);

struct SweepCell {
  std::string name;
  nlohmann::json config;  // effective config document without seed
};

struct ExperimentMatrix {
  std::string name;
  std::filesystem::path output_root;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepCell> cells;
  double threshold = 0.6;
  int jobs = 1;

  std::filesystem::path run_dir(const SweepCell& cell, std::uint64_t seed) const;
};

ExperimentMatrix LoadMatrix(const std::filesystem::path& path);

struct CellSummary {
  std::string name;
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_returns;  // completed seeds only
  std::vector<std::optional<std::int64_t>> steps_to_threshold;
  std::vector<std::string> failures;
  double mean = 0.0;
  double std = 0.0;
  bool best = false;
};

// Executes every (cell, seed) run. Existing outputs are refused unless force.
std::vector<CellSummary> RunSweep(const ExperimentMatrix& matrix, bool force,
                                  std::ostream& log);
// Rebuilds the summary from finished run directories.
std::vector<CellSummary> SummarizeSweep(const ExperimentMatrix& matrix);
std::string FormatSummaryCsv(const std::vector<CellSummary>& cells);

int CmdSweep(const std::string& matrix_path, std::optional<int> jobs, bool force,
             std::ostream& out, std::ostream& err);

struct Curve {
  std::string name;
  std::vector<double> env_steps;
  std::vector<double> mean;
  std::vector<double> std;
  std::size_t runs = 0;
};

// Per config name: windowed mean return of each run at its iteration ends,
// linearly interpolated onto the first run's env_steps grid and truncated to
// the shortest run. Mean and population std across runs.
std::vector<Curve> AggregateCurves(const std::vector<std::filesystem::path>& run_dirs,
                                   int window, std::ostream& warn);
std::string FormatCurveCsv(const Curve& curve);
std::string RenderCurveSvg(const Curve& curve);

int CmdCurves(const std::vector<std::string>& run_dirs, int window,
              const std::optional<std::string>& out_dir, std::ostream& out, std::ostream& err);

int CmdRenderLevel(const std::string& task, std::int64_t level_id, bool json,
                   std::ostream& out, std::ostream& err);

int CmdDumpBuffer(const std::string& run_dir, bool json, std::ostream& out, std::ostream& err);

}  // namespace silab::harness
