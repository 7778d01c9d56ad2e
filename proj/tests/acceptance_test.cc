// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails. Usage: acceptance_test [output_dir] [criterion...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "silab/gridworld.h"
#include "silab/harness.h"
#include "silab/intrinsic.h"
#include "silab/policy.h"
#include "silab/replay.h"
#include "silab/sampling.h"
#include "silab/scoring.h"
#include "silab/trainer.h"
#include "test_support.h"

namespace fs = std::filesystem;
using namespace silab;
using silab::testing::MakeEpisode;
using silab::testing::RandomEpisode;

namespace {

fs::path g_out;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// 1. Sampler frequencies against the analytic distribution.
Verdict SamplerFidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240101);
  constexpr std::size_t kDraws = 100000;
  double worst_l1 = 0.0;
  int worst_n = 0;
  double worst_floor = 0.0;
  int cases = 0, failures = 0;
  bool alpha0_uniform = true;
  std::vector<int> lengths = {3, 5, 10, 16, 25, 50, 100};
  for (int k = 0; k < 5; ++k) lengths.push_back(static_cast<int>(rng.uniform_int(3, 100)));
  for (int n : lengths) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (double& v : p) v = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e4));
    for (double alpha : {0.0, 0.2, 0.6, 1.0}) {
      const auto probs = SamplingProbabilities(p, alpha);
      // Analytic P(i) computed here independently.
      std::vector<double> expect(p.size());
      double z = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) z += alpha == 0.0 ? 1.0 : std::pow(p[i], alpha);
      for (std::size_t i = 0; i < p.size(); ++i) {
        expect[i] = (alpha == 0.0 ? 1.0 : std::pow(p[i], alpha)) / z;
      }
      if (alpha == 0.0) {
        for (double q : probs) alpha0_uniform = alpha0_uniform && q == 1.0 / n;
      }
      const auto idx = DrawIndices(probs, kDraws, rng);
      std::vector<double> freq(p.size(), 0.0);
      for (std::size_t i : idx) freq[i] += 1.0 / kDraws;
      double l1 = 0.0, floor = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        l1 += std::abs(freq[i] - expect[i]);
        // Expected L1 of an ideal multinomial sample of this size.
        floor += std::sqrt(2.0 * expect[i] * (1.0 - expect[i]) / (M_PI * kDraws));
      }
      ++cases;
      if (l1 > 0.01) ++failures;
      if (l1 > worst_l1) {
        worst_l1 = l1;
        worst_n = n;
        worst_floor = floor;
      }
    }
  }
  const double secs = Seconds(t0);
  std::ostringstream os;
  os << cases << " cases, " << failures << " over L1 0.01; worst L1 " << Fmt("%.4f", worst_l1)
     << " at n=" << worst_n << " (ideal-sampler expectation " << Fmt("%.4f", worst_floor)
     << "); alpha=0 exact uniform " << (alpha0_uniform ? "yes" : "no") << "; "
     << Fmt("%.2f", secs) << " s";
  return {failures == 0 && alpha0_uniform && secs < 5.0, os.str()};
}

// Reference for the capacity rule: re-run the stream, each time sorting the
// kept episodes plus the arrival and keeping the longest fitting rank prefix.
std::vector<std::int64_t> ReferenceBuffer(const std::vector<Episode>& stream, std::size_t cap) {
  struct E {
    double score;
    std::size_t seq;
    std::size_t len;
    std::int64_t id;
  };
  std::vector<E> kept;
  for (std::size_t s = 0; s < stream.size(); ++s) {
    if (stream[s].size() > cap) continue;
    kept.push_back({stream[s].score.total, s, stream[s].size(), stream[s].episode_id});
    std::sort(kept.begin(), kept.end(), [](const E& a, const E& b) {
      return a.score != b.score ? a.score > b.score : a.seq > b.seq;
    });
    std::size_t total = 0, keep = 0;
    while (keep < kept.size() && total + kept[keep].len <= cap) total += kept[keep++].len;
    kept.resize(keep);
  }
  std::vector<std::int64_t> ids;
  for (const E& e : kept) ids.push_back(e.id);
  return ids;
}

// 2. Buffer contents against the reference.
Verdict BufferOracle() {
  const auto t0 = std::chrono::steady_clock::now();
  int matches = 0;
  constexpr int kStreams = 50;
  for (int s = 0; s < kStreams; ++s) {
    Rng rng(1000 + static_cast<std::uint64_t>(s));
    std::vector<Episode> stream;
    for (int e = 0; e < 1000; ++e) {
      Episode ep = RandomEpisode(rng, static_cast<int>(rng.uniform_int(1, 60)), 50, 0.3, e % 7, e);
      // Coarse scores make ties frequent.
      ep.score.total = std::round(rng.uniform() * 20.0) / 20.0;
      stream.push_back(std::move(ep));
    }
    RankedBuffer buffer(500);
    bool ok = true;
    for (const Episode& ep : stream) {
      buffer.insert(ep);
      ok = ok && buffer.total_transitions() <= 500;
    }
    std::vector<std::int64_t> got;
    for (const Episode* ep : buffer.episodes()) got.push_back(ep->episode_id);
    if (ok && got == ReferenceBuffer(stream, 500)) ++matches;
  }
  const double secs = Seconds(t0);
  std::ostringstream os;
  os << matches << "/" << kStreams << " streams identical to reference; " << Fmt("%.2f", secs)
     << " s";
  return {matches == kStreams && secs < 10.0, os.str()};
}

// 3. Per-level quota never exceeded.
Verdict QuotaSafety() {
  const auto t0 = std::chrono::steady_clock::now();
  int worst_excess = 0;
  std::size_t checks = 0;
  for (int k : {1, 4}) {
    Rng rng(77 + static_cast<std::uint64_t>(k));
    RankedBuffer buffer(500, k);
    for (int e = 0; e < 10000; ++e) {
      Episode ep = RandomEpisode(rng, static_cast<int>(rng.uniform_int(1, 30)), 30, 0.3,
                                 rng.uniform_int(0, 19), e);
      ep.score.total = rng.uniform();
      buffer.insert(std::move(ep));
      std::map<std::int64_t, int> per_level;
      for (const Episode* stored : buffer.episodes()) ++per_level[stored->level_id];
      for (const auto& [level, count] : per_level) {
        worst_excess = std::max(worst_excess, count - k);
        ++checks;
      }
    }
  }
  const double secs = Seconds(t0);
  std::ostringstream os;
  os << checks << " level checks, max count above quota " << std::max(worst_excess, 0) << "; "
     << Fmt("%.2f", secs) << " s";
  return {worst_excess <= 0 && secs < 10.0, os.str()};
}

// 4. Filters against direct scans.
Verdict FilterOracles() {
  int ok_unique = 0, ok_adv = 0, ok_nzr = 0, fallbacks = 0;
  constexpr int kBuffers = 100;
  for (int b = 0; b < kBuffers; ++b) {
    Rng rng(5000 + static_cast<std::uint64_t>(b));
    RankedBuffer buffer(400);
    const double success_rate = b % 4 == 0 ? 0.0 : 0.3;
    for (int e = 0; e < 30; ++e) {
      Episode ep = RandomEpisode(rng, static_cast<int>(rng.uniform_int(1, 25)), 12, success_rate,
                                 e % 5, e);
      ep.score.total = rng.uniform();
      buffer.insert(std::move(ep));
    }
    const PolicyParams agent = silab::testing::RandomParams({}, rng, 0.3);
    const TransitionView view = buffer.all_transitions();

    // UniqueStates: keep t unless an earlier kept entry of its episode has
    // byte-equal next_obs.
    std::vector<std::size_t> want;
    for (std::size_t i = 0; i < view.size(); ++i) {
      bool seen = false;
      for (std::size_t j = 0; j < i; ++j) {
        if (&view.episode(j) == &view.episode(i) && view[j].next_obs.data == view[i].next_obs.data) {
          seen = true;
        }
      }
      if (!seen) want.push_back(i);
    }
    auto same = [&](const TransitionView& got, const std::vector<std::size_t>& idx) {
      if (got.size() != idx.size()) return false;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (&got[k] != &view[idx[k]]) return false;
      }
      return true;
    };
    if (same(ApplyFilter(view, ReplayFilter::kUniqueStates, agent), want)) ++ok_unique;

    want.clear();
    for (std::size_t i = 0; i < view.size(); ++i) {
      const auto out = silab::testing::NaiveForward(agent, silab::testing::NaiveFeatures(view[i].obs));
      if (view[i].mc_return - out.value > 0.0) want.push_back(i);
    }
    if (same(ApplyFilter(view, ReplayFilter::kPositiveAdvantage, agent), want)) ++ok_adv;

    want.clear();
    for (std::size_t i = 0; i < view.size(); ++i) {
      double ret = 0.0;
      for (const Transition& t : view.episode(i).transitions) ret += t.reward;
      if (ret > 0.0) want.push_back(i);
    }
    if (want.empty()) {
      ++fallbacks;
      for (std::size_t i = 0; i < view.size(); ++i) want.push_back(i);
    }
    if (same(ApplyFilter(view, ReplayFilter::kNonZeroReturn, agent), want)) ++ok_nzr;
  }
  std::ostringstream os;
  os << "unique " << ok_unique << "/" << kBuffers << ", positive-advantage " << ok_adv << "/"
     << kBuffers << ", non-zero-return " << ok_nzr << "/" << kBuffers << " (" << fallbacks
     << " all-failure buffers)";
  return {ok_unique == kBuffers && ok_adv == kBuffers && ok_nzr == kBuffers && fallbacks > 0,
          os.str()};
}

double RelErr(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// 5. Analytic gradients against central differences.
Verdict GradientChecks() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr double h = 1e-5;
  double worst_ppo = 0.0, worst_bc = 0.0;
  for (int net = 0; net < 20; ++net) {
    Rng rng(900 + static_cast<std::uint64_t>(net));
    const NetworkShape shape{static_cast<int>(rng.uniform_int(3, 8)),
                             static_cast<int>(rng.uniform_int(3, 8)),
                             static_cast<int>(rng.uniform_int(2, 7))};
    PolicyParams params = silab::testing::RandomParams(shape, rng, 0.7);
    const int n = static_cast<int>(rng.uniform_int(4, 16));
    PpoBatch batch;
    batch.features = Eigen::MatrixXd(shape.inputs, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < shape.inputs; ++i) batch.features(i, j) = rng.uniform();
      batch.actions.push_back(static_cast<int>(rng.uniform_int(0, shape.actions - 1)));
    }
    const Eigen::MatrixXd logp = LogSoftmax(Forward(params, batch.features).logits);
    batch.old_log_probs.resize(n);
    batch.advantages.resize(n);
    batch.returns.resize(n);
    for (int j = 0; j < n; ++j) {
      batch.old_log_probs(j) = logp(batch.actions[static_cast<std::size_t>(j)], j) + 0.3 * rng.normal();
      batch.advantages(j) = rng.normal();
      batch.returns(j) = rng.normal();
    }
    PpoConfig cfg;
    cfg.entropy_coef = 0.05 * rng.uniform();

    std::vector<double> weights, returns;
    for (int j = 0; j < n; ++j) {
      weights.push_back(0.5 + rng.uniform());
      returns.push_back(rng.normal());
    }
    const double value_coef = net % 2 == 0 ? 0.0 : 0.5;

    Eigen::VectorXd g_ppo, g_bc;
    EvaluatePpoLoss(params, batch, cfg, &g_ppo);
    EvaluateBcLoss(params, batch.features, batch.actions, weights, returns, value_coef, &g_bc);
    for (Eigen::Index k = 0; k < params.size(); ++k) {
      const double orig = params.flat()(k);
      params.flat()(k) = orig + h;
      const double ppo_plus = EvaluatePpoLoss(params, batch, cfg, nullptr).total;
      const double bc_plus = EvaluateBcLoss(params, batch.features, batch.actions, weights, returns,
                                            value_coef, nullptr);
      params.flat()(k) = orig - h;
      const double ppo_minus = EvaluatePpoLoss(params, batch, cfg, nullptr).total;
      const double bc_minus = EvaluateBcLoss(params, batch.features, batch.actions, weights, returns,
                                             value_coef, nullptr);
      params.flat()(k) = orig;
      worst_ppo = std::max(worst_ppo, RelErr(g_ppo(k), (ppo_plus - ppo_minus) / (2 * h)));
      worst_bc = std::max(worst_bc, RelErr(g_bc(k), (bc_plus - bc_minus) / (2 * h)));
    }
  }
  const double secs = Seconds(t0);
  std::ostringstream os;
  os << "max rel err PPO " << Fmt("%.2e", worst_ppo) << ", BC " << Fmt("%.2e", worst_bc)
     << " (denominator floor 1e-6); " << Fmt("%.2f", secs) << " s";
  return {worst_ppo <= 1e-4 && worst_bc <= 1e-4 && secs < 30.0, os.str()};
}

// 6. Score arithmetic and the flexible normalization bracket.
Verdict ScoringIdentities() {
  Rng rng(606);
  const Level level = GenerateLevel(TaskSpec::MultiRoom(4, 6), 3);
  double worst = 0.0;
  for (int e = 0; e < 200; ++e) {
    const int len = static_cast<int>(rng.uniform_int(1, 70));
    Episode ep = RandomEpisode(rng, len, 20, 0.5, level.level_id, e);
    if (ep.succeeded()) ep.transitions.back().reward = SuccessReward(len, level.max_steps);
    CountTable counts;
    for (int r = 0; r < 1 + e % 3; ++r) {
      for (const Transition& t : ep.transitions) counts.record(t.obs);
    }
    ScoreWeights w{rng.uniform(), rng.uniform(), rng.uniform()};
    const double gamma = 0.9 + 0.1 * rng.uniform();
    for (auto mode : {NormalizationMode::kDefault, NormalizationMode::kNormalized,
                      NormalizationMode::kNormalizedFlex}) {
      const EpisodeScore s = ScoreEpisode(ep, w, counts, gamma, mode, level);
      double g = 0.0;
      for (std::size_t t = 0; t < ep.size(); ++t) {
        g += std::pow(gamma, static_cast<double>(t)) * ep.transitions[t].reward;
      }
      std::set<std::vector<std::uint8_t>> distinct;
      double novelty = 0.0;
      for (const Transition& t : ep.transitions) {
        distinct.insert({t.obs.data.begin(), t.obs.data.end()});
        novelty += 1.0 / std::sqrt(static_cast<double>(counts.lifelong(t.obs)));
      }
      novelty /= static_cast<double>(ep.size());
      double ext = g;
      if (mode != NormalizationMode::kDefault) {
        const double g_opt = 1.0 - 0.9 * level.optimal_steps / static_cast<double>(level.max_steps);
        ext = std::clamp(g / g_opt, 0.0, 1.0);
        const int extra = len - level.optimal_steps;
        if (mode == NormalizationMode::kNormalizedFlex && g > 0 && extra >= 0 && extra <= 20) ext = 1.0;
      }
      const double expect = w.w0 * ext + w.w1 * distinct.size() / static_cast<double>(ep.size()) +
                            w.w2 * novelty;
      worst = std::max({worst, std::abs(s.total - expect),
                        std::abs(s.total - (w.w0 * s.s_ext + w.w1 * s.s_local + w.w2 * s.s_global))});
    }
  }
  // Bracket sweep over episode lengths for a successful return.
  bool bracket_ok = true;
  const int opt = level.optimal_steps;
  for (int steps = 1; steps <= level.max_steps; ++steps) {
    const double g = SuccessReward(steps, level.max_steps);
    const double flex = NormalizeReturn(g, steps, opt, level.max_steps, NormalizationMode::kNormalizedFlex);
    const double norm = NormalizeReturn(g, steps, opt, level.max_steps, NormalizationMode::kNormalized);
    if (steps >= opt && steps <= opt + 20) {
      bracket_ok = bracket_ok && flex == 1.0;
    } else {
      bracket_ok = bracket_ok && flex == norm;
    }
    bracket_ok = bracket_ok &&
                 NormalizeReturn(0.0, steps, opt, level.max_steps, NormalizationMode::kNormalizedFlex) ==
                     NormalizeReturn(0.0, steps, opt, level.max_steps, NormalizationMode::kNormalized);
  }
  std::ostringstream os;
  os << "max |score - recomputed| " << Fmt("%.1e", worst) << "; flex bracket "
     << (bracket_ok ? "exact" : "violated") << " (optimal " << opt << ")";
  return {worst <= 1e-12 && bracket_ok, os.str()};
}

// 7. Intrinsic reward of a replayed trajectory.
Verdict BeboldDecay() {
  // Fixed 50-step trajectory: seeded random actions on a level long enough not
  // to time out.
  auto level = std::make_shared<const Level>(GenerateLevel(TaskSpec::ObstructedMazeLite(), 1));
  GridEnv env(level);
  Rng rng(4242);
  std::vector<Observation> traj{env.observe()};
  for (int t = 0; t < 50; ++t) traj.push_back(env.step(static_cast<int>(rng.uniform_int(0, 2))).obs);

  CountTable counts;
  std::vector<double> sums;
  for (int pass = 0; pass < 100; ++pass) {
    counts.begin_episode();
    counts.record(traj[0]);
    double sum = 0.0;
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      counts.record(traj[t + 1]);
      sum += BeboldReward(counts, traj[t], traj[t + 1]);
    }
    sums.push_back(sum);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < sums.size(); ++k) monotone = monotone && sums[k] <= sums[k - 1];
  const double ratio = sums.front() > 0 ? sums.back() / sums.front() : 0.0;
  std::set<std::uint64_t> distinct;
  for (const auto& o : traj) distinct.insert(o.hash());
  std::ostringstream os;
  os << distinct.size() << " distinct states; pass sums " << Fmt("%.4f", sums[0]) << ", "
     << Fmt("%.4f", sums[1]) << ", " << Fmt("%.4f", sums[9]) << " (10th), "
     << Fmt("%.6f", sums.back()) << " (100th); last/first " << Fmt("%.2e", ratio)
     << "; non-increasing " << (monotone ? "yes" : "no");
  return {sums.front() > 0 && monotone && ratio < 1e-3, os.str()};
}

// 8. Learning on MultiRoom(2, 4) with three replay variants.
Verdict DeskLearning() {
  const fs::path root = g_out / "learning";
  fs::create_directories(root);
  const fs::path matrix_path = root / "matrix.json";
  nlohmann::json matrix = {
      {"name", "desk_learning"},
      {"output_root", (root / "sweep").string()},
      {"seeds", {0, 1, 2}},
      {"threshold", 0.6},
      {"base",
       {{"task", "multiroom:2:4"},
        {"total_steps", 1500000},
        {"return_window", 100},
        {"success_threshold", 0.6},
        {"stop_at_threshold", true},
        {"imitation", {{"batch_size", 256}}}}},
      {"cells",
       {{{"name", "uniform"}, {"overrides", nlohmann::json::object()}},
        {{"name", "novelty"}, {"overrides", {{"sampling.proxy", "novelty"}}}},
        {{"name", "unique_states"}, {"overrides", {{"sampling.filter", "unique_states"}}}}}}};
  std::ofstream(matrix_path) << matrix.dump(2) << '\n';

  const auto t0 = std::chrono::steady_clock::now();
  const harness::ExperimentMatrix m = harness::LoadMatrix(matrix_path);
  std::ostringstream log;
  const auto cells = harness::RunSweep(m, true, log);
  const double secs = Seconds(t0);

  bool pass = true;
  std::ostringstream os;
  for (const auto& c : cells) {
    int reached = 0;
    os << c.name << " [";
    for (std::size_t i = 0; i < c.steps_to_threshold.size(); ++i) {
      if (i) os << ' ';
      if (c.steps_to_threshold[i]) {
        ++reached;
        os << *c.steps_to_threshold[i];
      } else {
        os << "NA";
      }
    }
    os << "] ";
    pass = pass && reached >= 2;
  }
  const double per_run = secs / static_cast<double>(m.seeds.size() * m.cells.size());
  os << "; mean " << Fmt("%.1f", per_run) << " s per run; summary "
     << (m.output_root / "summary.csv").string();
  return {pass && per_run <= 1800.0, os.str()};
}

// 9. Byte-identical metrics for repeated runs.
Verdict Determinism() {
  std::vector<nlohmann::json> configs = {
      {{"name", "det_default"}, {"seed", 11}, {"total_steps", 12000}, {"rollout_length", 1024}},
      {{"name", "det_variants"},
       {"seed", 5},
       {"task", "obstructedmaze"},
       {"level_seeds", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}},
       {"total_steps", 8000},
       {"rollout_length", 1024},
       {"replay", {{"capacity", 3000}, {"quota", 2}}},
       {"scoring", {{"normalization", "normalized_flex"}}},
       {"sampling", {{"proxy", "td_error"}, {"filter", "positive_advantage"},
                     {"importance_weights", true}}},
       {"intrinsic", {{"enabled", true}}}},
      {{"name", "det_novelty"},
       {"seed", 2},
       {"task", "multiroom:3:5"},
       {"total_steps", 8000},
       {"rollout_length", 1024},
       {"sampling", {{"proxy", "novelty"}, {"filter", "unique_states"}}}}};
  int identical = 0;
  for (const auto& doc : configs) {
    const RunConfig cfg = ConfigFromJson(doc);
    const fs::path a = g_out / "determinism" / (cfg.name + "_a");
    const fs::path b = g_out / "determinism" / (cfg.name + "_b");
    fs::remove_all(a);
    fs::remove_all(b);
    Train(cfg, a);
    Train(cfg, b);
    const std::string ma = silab::testing::Slurp(a / "metrics.csv");
    if (!ma.empty() && ma == silab::testing::Slurp(b / "metrics.csv")) ++identical;
  }
  std::ostringstream os;
  os << identical << "/" << configs.size() << " configs produced identical metrics.csv";
  return {identical == static_cast<int>(configs.size()), os.str()};
}

// 10. Solver plans replayed through the environment.
Verdict OracleSoundness() {
  int levels = 0, exact = 0, skipped = 0;
  for (std::int64_t id = 0; levels < 100; ++id) {
    Level level;
    try {
      level = GenerateLevel(TaskSpec::MultiRoom(2, 4), id);
    } catch (const GenerationError&) {
      ++skipped;
      continue;
    }
    ++levels;
    const Solution plan = Solve(level);
    GridEnv env(std::make_shared<const Level>(level));
    StepResult r;
    int steps = 0;
    for (Action a : plan.actions) {
      r = env.step(a);
      ++steps;
      if (r.done) break;
    }
    if (r.success && steps == level.optimal_steps &&
        static_cast<int>(plan.actions.size()) == level.optimal_steps) {
      ++exact;
    }
  }
  std::ostringstream os;
  os << exact << "/" << levels << " plans reach the goal in exactly optimal_steps";
  if (skipped) os << " (" << skipped << " ids failed generation)";
  return {exact == levels, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "silab_acceptance";
  fs::create_directories(g_out);
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::stoi(argv[i]));

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"sampler fidelity", SamplerFidelity},
      {"buffer oracle equivalence", BufferOracle},
      {"forced-diversity quota", QuotaSafety},
      {"filter oracles", FilterOracles},
      {"gradient checks", GradientChecks},
      {"scoring identities", ScoringIdentities},
      {"BeBold decay", BeboldDecay},
      {"desk-scale learning", DeskLearning},
      {"determinism", Determinism},
      {"oracle soundness", OracleSoundness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int num = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(num)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << num << " (" << criteria[i].first
              << "): " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
