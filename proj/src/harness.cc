#include "silab/harness.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace silab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string ReadText(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  for (std::string field; std::getline(ss, field, ',');) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double ParseDouble(const std::string& text, const fs::path& file) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(file.string() + ": malformed number '" + text + "'");
  }
}

void MeanStd(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  for (double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(xs.size()));
}

// Linear interpolation of (xs, ys) at x, clamped to the end points.
double Interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

bool DirHasContent(const fs::path& dir) {
  return fs::exists(dir) && fs::is_directory(dir) && !fs::is_empty(dir);
}

}  // namespace

fs::path OutputRoot() {
  const char* env = std::getenv("SILAB_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

json ReadJsonFile(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("file not found: " + path.string());
  try {
    return json::parse(ReadText(path));
  } catch (const json::parse_error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

RunConfig LoadRunConfig(const fs::path& path, const std::vector<std::string>& overrides) {
  json doc = ReadJsonFile(path);
  try {
    for (const std::string& o : overrides) ApplyOverride(doc, o);
    return ConfigFromJson(doc);
  } catch (const std::invalid_argument& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::runtime_error("missing column " + name);
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable ReadCsv(const fs::path& path, const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  table.header = SplitCsvLine(line);
  if (!expected_header.empty() && table.header != expected_header) {
    throw std::runtime_error(path.string() + ": unexpected columns");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = SplitCsvLine(line);
    if (fields.size() != table.header.size()) {
      throw std::runtime_error(path.string() + ": row has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::optional<std::int64_t> StepsToThreshold(const CsvTable& metrics, double threshold,
                                             int window) {
  const std::size_t steps = metrics.column("env_steps");
  const std::size_t episodes = metrics.column("episodes");
  const std::size_t ret = metrics.column("return_mean");
  for (const auto& row : metrics.rows) {
    if (std::stoll(row[episodes]) >= window && std::stod(row[ret]) >= threshold) {
      return std::stoll(row[steps]);
    }
  }
  return std::nullopt;
}

int CmdRun(const std::string& config_path, const std::vector<std::string>& overrides,
           const std::optional<std::string>& out_dir, bool force, std::ostream& out,
           std::ostream& err) {
  RunConfig cfg;
  fs::path dir;
  try {
    cfg = LoadRunConfig(config_path, overrides);
    dir = out_dir ? fs::path(*out_dir) : OutputRoot() / cfg.name;
    if (DirHasContent(dir) && !force) {
      throw UsageError("output directory " + dir.string() +
                       " is not empty; pass --force to overwrite");
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    if (force && fs::exists(dir)) fs::remove_all(dir);
    const TrainResult result = Train(cfg, dir, &err);
    out << "run " << cfg.name << ": " << result.iterations << " iterations, " << result.env_steps
        << " env steps, final return " << FormatDouble(result.final_return_mean) << '\n';
    out << "outputs in " << dir.string() << '\n';
  } catch (const std::exception& e) {
    err << "run aborted: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

fs::path ExperimentMatrix::run_dir(const SweepCell& cell, std::uint64_t seed) const {
  return output_root / cell.name / ("seed_" + std::to_string(seed));
}

ExperimentMatrix LoadMatrix(const fs::path& path) {
  const json doc = ReadJsonFile(path);
  ExperimentMatrix matrix;
  try {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      static const std::vector<std::string> kKeys = {
          "name", "output_root", "seeds", "num_seeds", "base", "cells", "grid", "threshold", "jobs"};
      if (std::find(kKeys.begin(), kKeys.end(), it.key()) == kKeys.end()) {
        throw std::invalid_argument("unknown matrix key '" + it.key() + "'");
      }
    }
    matrix.name = doc.value("name", path.stem().string());
    matrix.output_root = doc.contains("output_root")
                             ? fs::path(doc.at("output_root").get<std::string>())
                             : OutputRoot() / matrix.name;
    if (doc.contains("seeds")) {
      matrix.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
      const int n = doc.value("num_seeds", 3);
      for (int s = 0; s < n; ++s) matrix.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (matrix.seeds.empty()) throw std::invalid_argument("matrix needs at least one seed");
    matrix.threshold = doc.value("threshold", 0.6);
    matrix.jobs = doc.value("jobs", 1);
    const json base = doc.value("base", json::object());

    // Named cells, each optionally crossed with the grid.
    std::vector<std::pair<std::string, std::vector<std::string>>> cells;
    if (doc.contains("cells")) {
      for (const json& c : doc.at("cells")) {
        std::vector<std::string> overrides;
        const json cell_overrides = c.value("overrides", json::object());
        for (const auto& [key, value] : cell_overrides.items()) {
          overrides.push_back(key + "=" + value.dump());
        }
        cells.emplace_back(c.at("name").get<std::string>(), overrides);
      }
    } else {
      cells.emplace_back(doc.contains("grid") ? "" : "base", std::vector<std::string>{});
    }
    if (doc.contains("grid")) {
      for (const auto& [key, values] : doc.at("grid").items()) {
        std::vector<std::pair<std::string, std::vector<std::string>>> expanded;
        for (const auto& [name, overrides] : cells) {
          for (const json& v : values) {
            auto o = overrides;
            o.push_back(key + "=" + v.dump());
            const std::string label = key + "=" + v.dump();
            expanded.emplace_back(name.empty() ? label : name + "," + label, o);
          }
        }
        cells = std::move(expanded);
      }
    }

    std::vector<std::string> names;
    for (const auto& [name, overrides] : cells) {
      json config = base;
      for (const std::string& o : overrides) ApplyOverride(config, o);
      config["name"] = name;
      config["seed"] = 0;
      ConfigFromJson(config);  // validates
      config.erase("seed");
      if (std::find(names.begin(), names.end(), name) != names.end()) {
        throw std::invalid_argument("duplicate cell name '" + name + "'");
      }
      names.push_back(name);
      matrix.cells.push_back({name, config});
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  return matrix;
}

namespace {

RunConfig CellConfig(const SweepCell& cell, std::uint64_t seed) {
  json config = cell.config;
  config["seed"] = seed;
  return ConfigFromJson(config);
}

}  // namespace

std::vector<CellSummary> SummarizeSweep(const ExperimentMatrix& matrix) {
  std::vector<CellSummary> summaries;
  for (const SweepCell& cell : matrix.cells) {
    CellSummary summary;
    summary.name = cell.name;
    summary.seeds = matrix.seeds;
    for (std::uint64_t seed : matrix.seeds) {
      const fs::path dir = matrix.run_dir(cell, seed);
      if (fs::exists(dir / "error.txt")) {
        std::string msg = ReadText(dir / "error.txt");
        while (!msg.empty() && msg.back() == '\n') msg.pop_back();
        summary.failures.push_back("seed " + std::to_string(seed) + ": " + msg);
        summary.steps_to_threshold.push_back(std::nullopt);
        continue;
      }
      if (!fs::exists(dir / "checkpoint.json") || !fs::exists(dir / "buffer.json")) {
        summary.failures.push_back("seed " + std::to_string(seed) + ": incomplete run");
        summary.steps_to_threshold.push_back(std::nullopt);
        continue;
      }
      const RunConfig cfg = CellConfig(cell, seed);
      const CsvTable metrics = ReadCsv(dir / "metrics.csv", MetricsColumns());
      summary.final_returns.push_back(
          metrics.rows.empty() ? 0.0 : std::stod(metrics.rows.back()[metrics.column("return_mean")]));
      summary.steps_to_threshold.push_back(StepsToThreshold(metrics, matrix.threshold, cfg.return_window));
    }
    MeanStd(summary.final_returns, summary.mean, summary.std);
    summaries.push_back(std::move(summary));
  }
  CellSummary* best = nullptr;
  for (CellSummary& s : summaries) {
    if (s.final_returns.empty()) continue;
    if (!best || s.mean > best->mean) best = &s;
  }
  if (best) best->best = true;
  return summaries;
}

std::vector<CellSummary> RunSweep(const ExperimentMatrix& matrix, bool force, std::ostream& log) {
  const fs::path summary_path = matrix.output_root / "summary.csv";
  std::vector<fs::path> dirs;
  for (const SweepCell& cell : matrix.cells) {
    for (std::uint64_t seed : matrix.seeds) dirs.push_back(matrix.run_dir(cell, seed));
  }
  bool exists = fs::exists(summary_path);
  for (const fs::path& d : dirs) exists = exists || DirHasContent(d);
  if (exists && !force) {
    throw UsageError("sweep outputs already exist under " + matrix.output_root.string() +
                     "; pass --force to overwrite");
  }
  fs::remove(summary_path);
  for (const fs::path& d : dirs) {
    fs::remove_all(d);
    fs::create_directories(d);
  }

  struct Job {
    const SweepCell* cell;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const SweepCell& cell : matrix.cells) {
    for (std::uint64_t seed : matrix.seeds) jobs.push_back({&cell, seed});
  }

  auto run_one = [&](const Job& job) {
    const fs::path dir = matrix.run_dir(*job.cell, job.seed);
    try {
      const TrainResult r = Train(CellConfig(*job.cell, job.seed), dir);
      return r.iterations >= 0;
    } catch (const std::exception& e) {
      // Train already wrote error.txt for runtime failures.
      if (!fs::exists(dir / "error.txt")) WriteText(dir / "error.txt", std::string(e.what()) + "\n");
      return false;
    }
  };

  if (matrix.jobs <= 1) {
    for (const Job& job : jobs) {
      log << "[sweep] " << job.cell->name << " seed " << job.seed << '\n' << std::flush;
      if (!run_one(job)) log << "[sweep]   failed, continuing\n";
    }
  } else {
    // Each run is an isolated child process.
    std::size_t next = 0;
    int running = 0;
    log << std::flush;
    while (next < jobs.size() || running > 0) {
      while (running < matrix.jobs && next < jobs.size()) {
        const Job& job = jobs[next++];
        log << "[sweep] " << job.cell->name << " seed " << job.seed << '\n' << std::flush;
        const pid_t pid = fork();
        if (pid < 0) throw std::runtime_error("fork failed");
        if (pid == 0) _exit(run_one(job) ? 0 : 1);
        ++running;
      }
      int status = 0;
      if (wait(&status) > 0) --running;
    }
  }

  std::vector<CellSummary> summaries = SummarizeSweep(matrix);
  WriteText(summary_path, FormatSummaryCsv(summaries));
  return summaries;
}

std::string FormatSummaryCsv(const std::vector<CellSummary>& cells) {
  std::ostringstream os;
  os << "cell,seeds,completed,final_return_mean,final_return_std,reached_threshold,"
        "steps_to_threshold_mean,steps_to_threshold,best\n";
  for (const CellSummary& c : cells) {
    std::vector<double> reached;
    std::string per_seed;
    for (const auto& s : c.steps_to_threshold) {
      if (!per_seed.empty()) per_seed += ';';
      per_seed += s ? std::to_string(*s) : "NA";
      if (s) reached.push_back(static_cast<double>(*s));
    }
    double reached_mean = 0.0, reached_std = 0.0;
    MeanStd(reached, reached_mean, reached_std);
    os << c.name << ',' << c.seeds.size() << ',' << c.final_returns.size() << ','
       << FormatDouble(c.mean) << ',' << FormatDouble(c.std) << ',' << reached.size() << ','
       << (reached.empty() ? std::string("NA") : FormatDouble(reached_mean)) << ','
       << per_seed << ',' << (c.best ? 1 : 0) << '\n';
  }
  return os.str();
}

int CmdSweep(const std::string& matrix_path, std::optional<int> jobs, bool force,
             std::ostream& out, std::ostream& err) {
  ExperimentMatrix matrix;
  try {
    matrix = LoadMatrix(matrix_path);
    if (jobs) matrix.jobs = *jobs;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const auto summaries = RunSweep(matrix, force, err);
    out << FormatSummaryCsv(summaries);
    for (const CellSummary& s : summaries) {
      for (const std::string& f : s.failures) err << "cell " << s.name << " " << f << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "sweep aborted: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

std::vector<Curve> AggregateCurves(const std::vector<fs::path>& run_dirs, int window,
                                   std::ostream& warn) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  struct Series {
    std::vector<double> steps;
    std::vector<double> values;
  };
  std::map<std::string, std::vector<Series>> groups;
  std::vector<std::string> order;
  for (const fs::path& dir : run_dirs) {
    const json config = ReadJsonFile(dir / "config.json");
    const std::string name = config.value("name", dir.filename().string());
    const CsvTable metrics = ReadCsv(dir / "metrics.csv", MetricsColumns());
    const CsvTable episodes = ReadCsv(dir / "episodes.csv", EpisodeColumns());
    const std::size_t ep_steps = episodes.column("env_steps");
    const std::size_t ep_ret = episodes.column("return");
    const std::size_t m_steps = metrics.column("env_steps");

    Series series;
    std::size_t next_episode = 0;
    std::vector<double> finished;
    for (const auto& row : metrics.rows) {
      const double at = ParseDouble(row[m_steps], dir / "metrics.csv");
      while (next_episode < episodes.rows.size() &&
             ParseDouble(episodes.rows[next_episode][ep_steps], dir / "episodes.csv") <= at) {
        finished.push_back(ParseDouble(episodes.rows[next_episode][ep_ret], dir / "episodes.csv"));
        ++next_episode;
      }
      const std::size_t n = std::min<std::size_t>(finished.size(), static_cast<std::size_t>(window));
      double mean = 0.0;
      for (std::size_t k = finished.size() - n; k < finished.size(); ++k) mean += finished[k];
      series.steps.push_back(at);
      series.values.push_back(n > 0 ? mean / static_cast<double>(n) : 0.0);
    }
    if (series.steps.empty()) throw std::runtime_error(dir.string() + ": metrics.csv has no rows");
    if (!groups.contains(name)) order.push_back(name);
    groups[name].push_back(std::move(series));
  }

  std::vector<Curve> curves;
  for (const std::string& name : order) {
    const auto& runs = groups[name];
    double shortest = runs.front().steps.back();
    bool uneven = false;
    for (const Series& s : runs) {
      if (s.steps.back() != runs.front().steps.back()) uneven = true;
      shortest = std::min(shortest, s.steps.back());
    }
    if (uneven) {
      warn << "warning: runs of '" << name << "' differ in length; curve truncated to "
           << static_cast<std::int64_t>(shortest) << " env steps\n";
    }
    Curve curve;
    curve.name = name;
    curve.runs = runs.size();
    for (double x : runs.front().steps) {
      if (x > shortest) break;
      std::vector<double> ys;
      for (const Series& s : runs) ys.push_back(Interpolate(s.steps, s.values, x));
      double mean, sd;
      MeanStd(ys, mean, sd);
      curve.env_steps.push_back(x);
      curve.mean.push_back(mean);
      curve.std.push_back(sd);
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::string FormatCurveCsv(const Curve& curve) {
  std::ostringstream os;
  os << "env_steps,mean,std,runs\n";
  for (std::size_t i = 0; i < curve.env_steps.size(); ++i) {
    os << static_cast<std::int64_t>(curve.env_steps[i]) << ',' << FormatDouble(curve.mean[i])
       << ',' << FormatDouble(curve.std[i]) << ',' << curve.runs << '\n';
  }
  return os.str();
}

std::string RenderCurveSvg(const Curve& curve) {
  constexpr double kW = 640, kH = 400, kPad = 50;
  double max_x = 1.0, min_y = 0.0, max_y = 1.0;
  for (std::size_t i = 0; i < curve.env_steps.size(); ++i) {
    max_x = std::max(max_x, curve.env_steps[i]);
    min_y = std::min(min_y, curve.mean[i] - curve.std[i]);
    max_y = std::max(max_y, curve.mean[i] + curve.std[i]);
  }
  auto px = [&](double x) { return kPad + (kW - 2 * kPad) * x / max_x; };
  auto py = [&](double y) { return kH - kPad - (kH - 2 * kPad) * (y - min_y) / (max_y - min_y); };
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad << "\" y2=\""
     << kH - kPad << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
     << kH - kPad << "\" stroke=\"black\"/>\n";
  if (!curve.env_steps.empty()) {
    os << "<polygon fill=\"steelblue\" fill-opacity=\"0.25\" points=\"";
    for (std::size_t i = 0; i < curve.env_steps.size(); ++i) {
      os << px(curve.env_steps[i]) << ',' << py(curve.mean[i] + curve.std[i]) << ' ';
    }
    for (std::size_t i = curve.env_steps.size(); i-- > 0;) {
      os << px(curve.env_steps[i]) << ',' << py(curve.mean[i] - curve.std[i]) << ' ';
    }
    os << "\"/>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.env_steps.size(); ++i) {
      os << px(curve.env_steps[i]) << ',' << py(curve.mean[i]) << ' ';
    }
    os << "\"/>\n";
  }
  os << "<text x=\"" << kPad << "\" y=\"" << kPad / 2 << "\" font-family=\"sans-serif\" "
     << "font-size=\"14\">" << curve.name << " (" << curve.runs << " runs)</text>\n";
  os << "<text x=\"" << kW - kPad << "\" y=\"" << kH - kPad / 3 << "\" text-anchor=\"end\" "
     << "font-family=\"sans-serif\" font-size=\"12\">env steps (max "
     << static_cast<std::int64_t>(max_x) << ")</text>\n";
  os << "</svg>\n";
  return os.str();
}

int CmdCurves(const std::vector<std::string>& run_dirs, int window,
              const std::optional<std::string>& out_dir, std::ostream& out, std::ostream& err) {
  if (run_dirs.empty()) {
    err << "error: curves needs at least one run directory\n";
    return kExitUsage;
  }
  try {
    std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
    for (const fs::path& d : dirs) {
      if (!fs::is_directory(d)) throw UsageError("not a run directory: " + d.string());
    }
    const auto curves = AggregateCurves(dirs, window, err);
    const fs::path target = out_dir ? fs::path(*out_dir) : OutputRoot() / "curves";
    fs::create_directories(target);
    for (const Curve& c : curves) {
      WriteText(target / (c.name + ".curve.csv"), FormatCurveCsv(c));
      WriteText(target / (c.name + ".svg"), RenderCurveSvg(c));
      out << c.name << ": " << c.runs << " runs, " << c.env_steps.size() << " points -> "
          << (target / (c.name + ".curve.csv")).string() << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int CmdRenderLevel(const std::string& task, std::int64_t level_id, bool json_output,
                   std::ostream& out, std::ostream& err) {
  TaskSpec spec;
  try {
    spec = ParseTaskSpec(task);
    if (level_id < 0) throw std::invalid_argument("level id must be >= 0");
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const Level level = GenerateLevel(spec, level_id);
    if (json_output) {
      out << LevelToJson(level, 2) << '\n';
    } else {
      out << RenderAscii(level);
      out << "task " << spec.name() << " level " << level_id << ": optimal_steps "
          << level.optimal_steps << ", max_steps " << level.max_steps << '\n';
    }
  } catch (const GenerationError& e) {
    err << "generation failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int CmdDumpBuffer(const std::string& run_dir, bool json_output, std::ostream& out,
                  std::ostream& err) {
  json doc;
  try {
    doc = ReadJsonFile(fs::path(run_dir) / "buffer.json");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (json_output) {
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  struct LevelStats {
    int episodes = 0;
    std::int64_t transitions = 0;
    double best = -1e300;
  };
  std::map<std::int64_t, LevelStats> levels;
  for (const json& ep : doc.at("episodes")) {
    LevelStats& s = levels[ep.at("level_id").get<std::int64_t>()];
    ++s.episodes;
    s.transitions += ep.at("length").get<std::int64_t>();
    s.best = std::max(s.best, ep.at("score").at("total").get<double>());
  }
  out << "episodes " << doc.at("episodes").size() << ", transitions "
      << doc.at("total_transitions") << "/" << doc.at("capacity_transitions") << ", levels "
      << levels.size() << '\n';
  out << "level_id,episodes,transitions,best_score\n";
  for (const auto& [id, s] : levels) {
    out << id << ',' << s.episodes << ',' << s.transitions << ',' << FormatDouble(s.best) << '\n';
  }
  return kExitOk;
}

}  // namespace silab::harness
