#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rqs/distributions.hpp"
#include "rqs/errors.hpp"
#include "rqs/io.hpp"
#include "rqs/marginals.hpp"
#include "rqs/parallel.hpp"
#include "rqs/state.hpp"
#include "rqs/stats.hpp"
#include "rqs/xeb.hpp"

namespace rqs {

inline constexpr int kSummarySchemaVersion = 1;

enum class Analysis { Full, Subsystem, Conditional, Xeb, Gap };

inline std::string_view to_string(Analysis a) {
  switch (a) {
  case Analysis::Full:
    return "full";
  case Analysis::Subsystem:
    return "subsystem";
  case Analysis::Conditional:
    return "conditional";
  case Analysis::Xeb:
    return "xeb";
  case Analysis::Gap:
    return "gap";
  }
  return "unknown";
}

inline Analysis analysis_from_string(std::string_view s) {
  for (Analysis a : {Analysis::Full, Analysis::Subsystem, Analysis::Conditional,
                     Analysis::Xeb, Analysis::Gap})
    if (to_string(a) == s)
      return a;
  throw ArgumentError("unknown analysis '" + std::string(s) + "'");
}

/// One experiment: which states to generate, how to noise and sample them,
/// and which statistic to report.
struct ExperimentConfig {
  int n = 12;
  std::vector<int> partition_a_bits; ///< empty = subsystem A is every qubit
  double lambda = 0.0;
  std::uint64_t trials = 100;
  std::uint64_t shots = 10000;
  std::uint64_t seed = 1;
  Analysis analysis = Analysis::Full;
  std::optional<std::uint64_t> condition_b;
  std::size_t bins = kDefaultBins;
  std::filesystem::path out_dir;
  unsigned threads = 0; ///< 0 = hardware concurrency; never affects output

  Partition partition() const {
    if (partition_a_bits.empty())
      return Partition::leading(n, n);
    return Partition(n, partition_a_bits);
  }

  void validate() const {
    if (n < 1 || n > kDefaultMaxQubits)
      throw ArgumentError("n must lie in [1, " + std::to_string(kDefaultMaxQubits) + "]");
    const auto part = partition();
    if (!(lambda >= 0.0 && lambda <= 1.0))
      throw ArgumentError("lambda must lie in [0, 1]");
    if (trials < 1)
      throw ArgumentError("trials must be >= 1");
    if (shots < 1)
      throw ArgumentError("shots must be >= 1");
    if (bins < 1)
      throw ArgumentError("bins must be >= 1");
    if (condition_b && *condition_b >= part.K())
      throw ArgumentError("condition_b must lie in [0, " + std::to_string(part.K()) + ")");
    if (analysis == Analysis::Subsystem || analysis == Analysis::Conditional) {
      if (part.k() == 0)
        throw ArgumentError(std::string(to_string(analysis)) +
                            " analysis needs a proper subsystem (set a_bits)");
      if (part.m() < 1 || part.M() < 2)
        throw ArgumentError("subsystem A needs at least one qubit");
    }
  }
};

inline nlohmann::json to_json(const ExperimentConfig &c) {
  nlohmann::json j{{"n", c.n},
                   {"a_bits", c.partition_a_bits},
                   {"lambda", c.lambda},
                   {"trials", c.trials},
                   {"shots", c.shots},
                   {"seed", c.seed},
                   {"analysis", to_string(c.analysis)},
                   {"bins", c.bins}};
  j["condition_b"] = c.condition_b ? nlohmann::json(*c.condition_b) : nlohmann::json();
  return j;
}

/// Reads a config document; absent fields keep their defaults. The output
/// directory is a run-time setting and is read from "out_dir" if present.
inline ExperimentConfig config_from_json(const nlohmann::json &j) {
  ExperimentConfig c;
  try {
    if (j.contains("n"))
      c.n = j.at("n").get<int>();
    if (j.contains("a_bits"))
      c.partition_a_bits = j.at("a_bits").get<std::vector<int>>();
    if (j.contains("lambda"))
      c.lambda = j.at("lambda").get<double>();
    if (j.contains("trials"))
      c.trials = j.at("trials").get<std::uint64_t>();
    if (j.contains("shots"))
      c.shots = j.at("shots").get<std::uint64_t>();
    if (j.contains("seed"))
      c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("analysis"))
      c.analysis = analysis_from_string(j.at("analysis").get<std::string>());
    if (j.contains("condition_b") && !j.at("condition_b").is_null())
      c.condition_b = j.at("condition_b").get<std::uint64_t>();
    if (j.contains("bins"))
      c.bins = j.at("bins").get<std::size_t>();
    if (j.contains("out_dir"))
      c.out_dir = j.at("out_dir").get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

inline nlohmann::json to_json(const GofReport &r) {
  return {{"ks_statistic", r.ks_statistic},
          {"ks_critical_1pct", r.ks_critical_1pct},
          {"n_samples", r.n_samples},
          {"passed", r.passed},
          {"sup_location", r.sup_location}};
}

inline nlohmann::json to_json(const XebResult &r) {
  return {{"fidelity", r.fidelity},
          {"std_error", r.std_error},
          {"kind", to_string(r.kind)},
          {"m_eff", r.m_eff},
          {"samples", r.samples}};
}

inline nlohmann::json to_json(const AnalyticLaw &law) {
  return {{"family", to_string(law.family)}, {"N", law.N}, {"M", law.M},
          {"K", law.K}, {"lambda", law.lambda}, {"scaled", law.scaled}};
}

/// Ensemble expectation of the full XEB when sampling from a state
/// depolarized by lambda: (1 - lambda)(N - 1)/(N + 1).
inline double expected_xeb_full(std::uint64_t N, double lambda) {
  const auto n = static_cast<double>(N);
  return (1.0 - lambda) * (n - 1.0) / (n + 1.0);
}

/// Ensemble expectation of the subsystem XEB: (1 - lambda)(M - 1)/(N + 1),
/// from the second moment of Dir(K, ..., K).
inline double expected_xeb_subsystem(std::uint64_t N, std::uint64_t M, double lambda) {
  return (1.0 - lambda) * (static_cast<double>(M) - 1.0) / (static_cast<double>(N) + 1.0);
}

/// Ensemble expectation of the conditional XEB under the affine noisy
/// conditional law: (1 - lambda)(M - 1)/(M + 1). Exact at lambda = 0.
inline double expected_xeb_conditional(std::uint64_t M, double lambda) {
  const auto m = static_cast<double>(M);
  return (1.0 - lambda) * (m - 1.0) / (m + 1.0);
}

/// Substream layout: trial t draws its state from stream t and its shots
/// from kShotStreamBase + t; the uniform baseline uses kUniformStreamBase + t.
inline constexpr std::uint64_t kShotStreamBase = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kUniformStreamBase = std::uint64_t{2} << 40;

/// Ideal probabilities of trial `t`.
inline ProbVector trial_state(int n, std::uint64_t seed, std::uint64_t t) {
  return probabilities(sample_haar_state(n, RngSpec{seed, t}));
}

/// Result of run_experiment: the summary document plus the overall verdict.
struct ExperimentSummary {
  nlohmann::json document;
  bool ok = true;

  std::string text() const { return document.dump(2) + "\n"; }
};

namespace detail {

class InvariantLog {
public:
  void record(std::string name, bool passed, bool asserted) {
    entries_.push_back({{"name", std::move(name)}, {"passed", passed}, {"asserted", asserted}});
    if (asserted && !passed)
      ok_ = false;
  }
  nlohmann::json json() const { return entries_; }
  bool ok() const { return ok_; }

private:
  nlohmann::json entries_ = nlohmann::json::array();
  bool ok_ = true;
};

template <class Pool>
std::vector<double> concat(const std::vector<Pool> &parts) {
  std::size_t size = 0;
  for (const auto &p : parts)
    size += p.size();
  std::vector<double> out;
  out.reserve(size);
  for (const auto &p : parts)
    out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Observed (possibly noisy) probability vectors, one per trial.
struct Source {
  std::uint64_t trials;
  bool simulated;
  std::function<DepolarizedProbVector(std::uint64_t)> make;
};

inline void write_histogram(const ExperimentConfig &cfg, const Histogram &h,
                            const std::string &name, nlohmann::json &results) {
  results["histogram"] = {{"file", name},
                          {"bins", h.bins()},
                          {"lo", h.edges.front()},
                          {"hi", h.edges.back()},
                          {"count", h.count},
                          {"overflow", h.overflow}};
  if (!cfg.out_dir.empty())
    write_histogram_csv(h, cfg.out_dir / name);
}

inline void add_law_fit(const std::vector<double> &pool, double lambda,
                        const AnalyticLaw &law_if_valid, bool assert_fit,
                        const std::string &name, nlohmann::json &results,
                        InvariantLog &log) {
  results["law"] = to_json(law_if_valid);
  if (lambda >= 1.0) {
    results["ks"] = nullptr;
    results["note"] = "lambda = 1 is a point mass at x = 1; no density to test against";
    return;
  }
  const auto report = ks_one_sample(pool, law_if_valid);
  results["ks"] = to_json(report);
  log.record(name, report.passed, assert_fit);
}

inline double pool_min(const std::vector<double> &pool) {
  return *std::min_element(pool.begin(), pool.end());
}

inline double pool_max(const std::vector<double> &pool) {
  return *std::max_element(pool.begin(), pool.end());
}

inline void run_distribution(const ExperimentConfig &cfg, const Source &src,
                             nlohmann::json &results, InvariantLog &log) {
  const auto part = cfg.partition();
  const double lambda = cfg.lambda;
  const bool exact_law = src.simulated;
  std::vector<double> pool;
  AnalyticLaw law;
  std::string law_check;
  bool assert_fit = exact_law;

  switch (cfg.analysis) {
  case Analysis::Full: {
    const auto dim = static_cast<double>(part.N());
    auto parts = parallel_map(
        src.trials, [&](std::uint64_t t) { return scaled(src.make(t).probs, dim); },
        cfg.threads);
    pool = concat(parts);
    law = full_beta(part.N(), lambda, true);
    law_check = "ks_full_beta";
    break;
  }
  case Analysis::Subsystem: {
    const auto dim = static_cast<double>(part.M());
    auto parts = parallel_map(
        src.trials,
        [&](std::uint64_t t) { return scaled(marginalize(src.make(t), part), dim); },
        cfg.threads);
    pool = concat(parts);
    law = subsystem_beta(part.N(), part.K(), lambda, true);
    law_check = "ks_subsystem_beta";
    break;
  }
  case Analysis::Conditional: {
    const auto dim = static_cast<double>(part.M());
    const std::uint64_t b = cfg.condition_b.value_or(0);
    struct TrialOut {
      std::vector<double> conditional;
      std::vector<double> marginal;
      double typicality_gap = 0.0;
    };
    auto parts = parallel_map(
        src.trials,
        [&](std::uint64_t t) {
          const auto p = src.make(t);
          TrialOut out;
          const auto exact = noisy_conditional_exact(p, part, b);
          out.conditional = scaled(exact.cond_probs, dim);
          out.marginal = scaled(marginalize(p, part), dim);
          if (src.simulated) {
            const auto ideal = conditional_slice(p.base, part, b);
            const auto approx = noisy_conditional_affine(ideal, p.lambda);
            out.typicality_gap = mean_abs_deviation(exact.cond_probs, approx);
          }
          return out;
        },
        cfg.threads);
    std::vector<double> marginal_pool;
    double gap_sum = 0.0;
    for (const auto &p : parts) {
      pool.insert(pool.end(), p.conditional.begin(), p.conditional.end());
      marginal_pool.insert(marginal_pool.end(), p.marginal.begin(), p.marginal.end());
      gap_sum += p.typicality_gap;
    }
    law = conditional_beta(part.M(), lambda, true);
    law_check = "ks_conditional_beta";
    // the affine noisy conditional law is an approximation
    assert_fit = exact_law && lambda == 0.0;
    results["condition_b"] = b;
    if (src.simulated)
      results["typicality_gap_mean_abs"] = gap_sum / static_cast<double>(src.trials);
    if (lambda < 1.0)
      results["marginal_vs_conditional_law"] = to_json(ks_one_sample(marginal_pool, law));
    break;
  }
  default:
    throw ArgumentError("not a distribution analysis");
  }

  results["pooled_values"] = pool.size();
  results["min_scaled"] = pool_min(pool);
  results["max_scaled"] = pool_max(pool);
  add_law_fit(pool, lambda, law, assert_fit, law_check, results, log);

  if (src.simulated) {
    const double floor = lambda;
    const double ceiling = cfg.analysis == Analysis::Full
                               ? std::numeric_limits<double>::infinity()
                               : (1.0 - lambda) * static_cast<double>(part.M()) + lambda;
    std::uint64_t violations = 0;
    for (double x : pool)
      if (x < floor || x > ceiling)
        ++violations;
    results["support_violations"] = violations;
    log.record("support_bounds", violations == 0, cfg.analysis != Analysis::Conditional);
  }

  const double upper = default_histogram_upper(lambda);
  const auto h = histogram(pool, cfg.bins, 0.0, upper);
  write_histogram(cfg, h, std::string(to_string(cfg.analysis)) + "_histogram.csv", results);
}

inline void run_gap(const ExperimentConfig &cfg, const Source &src,
                    nlohmann::json &results, InvariantLog &log) {
  const auto dim = static_cast<double>(std::uint64_t{1} << cfg.n);
  auto parts = parallel_map(
      src.trials, [&](std::uint64_t t) { return scaled(src.make(t).probs, dim); },
      cfg.threads);
  const auto pool = concat(parts);
  const auto N = std::uint64_t{1} << cfg.n;
  const double gap = estimate_gap(pool);
  results["pooled_values"] = pool.size();
  results["lambda_true"] = cfg.lambda;
  results["lambda_hat_gap"] = gap;
  results["lambda_hat_mean"] = pool.size() >= 2 ? estimate_lambda_mean(pool, {N, N, 1}) : 0.0;
  std::uint64_t violations = 0;
  for (double x : pool)
    if (x < cfg.lambda)
      ++violations;
  results["gap_violations"] = violations;
  log.record("gap_estimate_above_lambda", gap >= cfg.lambda, src.simulated);
  const auto h = histogram(pool, cfg.bins, 0.0, default_histogram_upper(cfg.lambda));
  write_histogram(cfg, h, "gap_histogram.csv", results);
}

inline void run_xeb(const ExperimentConfig &cfg, nlohmann::json &results, InvariantLog &log) {
  const auto part = cfg.partition();
  const bool proper = part.k() > 0;
  const std::uint64_t b = cfg.condition_b.value_or(0);
  struct TrialOut {
    XebTally full, subsystem, conditional, uniform;
  };
  auto parts = parallel_map(
      cfg.trials,
      [&](std::uint64_t t) {
        const auto ideal = trial_state(cfg.n, cfg.seed, t);
        const auto noisy = depolarize(ideal, cfg.lambda);
        const auto shots = draw_samples(noisy, cfg.shots, RngSpec{cfg.seed, kShotStreamBase + t});
        const auto uniform =
            draw_uniform_samples(cfg.n, cfg.shots, RngSpec{cfg.seed, kUniformStreamBase + t});
        TrialOut out;
        out.full = tally_full(shots, ideal);
        out.uniform = tally_full(uniform, ideal);
        if (proper) {
          out.subsystem = tally_subsystem(shots, ideal, part);
          out.conditional = tally_conditional(shots, ideal, part, b);
        }
        return out;
      },
      cfg.threads);

  XebTally full{XebKind::Full, cfg.n}, uniform{XebKind::Full, cfg.n};
  XebTally sub{XebKind::Subsystem, part.m()}, cond{XebKind::Conditional, part.m()};
  for (const auto &p : parts) {
    full.merge(p.full);
    uniform.merge(p.uniform);
    sub.merge(p.subsystem);
    cond.merge(p.conditional);
  }

  const auto z_score = [](const XebResult &r, double expected) {
    return r.std_error > 0.0 ? (r.fidelity - expected) / r.std_error : 0.0;
  };
  const auto N = part.N();
  const auto f = full.result();
  const double f_exp = expected_xeb_full(N, cfg.lambda);
  results["full"] = to_json(f);
  results["full"]["expected"] = f_exp;
  results["full"]["z"] = z_score(f, f_exp);
  const auto u = uniform.result();
  results["uniform_baseline"] = to_json(u);
  results["uniform_baseline"]["expected"] = 0.0;
  results["uniform_baseline"]["z"] = z_score(u, 0.0);
  log.record("uniform_baseline_within_3se", std::abs(u.fidelity) <= 3.0 * u.std_error, true);

  if (proper) {
    const auto s = sub.result();
    const double s_exp = expected_xeb_subsystem(N, part.M(), cfg.lambda);
    results["subsystem"] = to_json(s);
    results["subsystem"]["expected"] = s_exp;
    results["subsystem"]["z"] = z_score(s, s_exp);
    results["condition_b"] = b;
    results["conditional_yield"] = cond.count;
    if (cond.count >= kDefaultMinPostSelected) {
      const auto c = cond.result();
      const double c_exp = expected_xeb_conditional(part.M(), cfg.lambda);
      results["conditional"] = to_json(c);
      results["conditional"]["expected"] = c_exp;
      results["conditional"]["z"] = z_score(c, c_exp);
    } else {
      results["conditional"] = nullptr;
    }
  }
}

inline ExperimentSummary finish(const ExperimentConfig &cfg, nlohmann::json results,
                                const InvariantLog &log, std::string source) {
  ExperimentSummary s;
  s.document = {{"schema_version", kSummarySchemaVersion},
                {"analysis", to_string(cfg.analysis)},
                {"source", std::move(source)},
                {"config", to_json(cfg)},
                {"results", std::move(results)},
                {"invariants", log.json()},
                {"ok", log.ok()}};
  s.ok = log.ok();
  if (!cfg.out_dir.empty())
    detail::write_text(cfg.out_dir / "summary.json", s.text());
  return s;
}

inline void prepare_out_dir(const ExperimentConfig &cfg) {
  if (cfg.out_dir.empty())
    return;
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw IoError("cannot create '" + cfg.out_dir.string() + "': " + ec.message());
}

} // namespace detail

/// Runs a simulated experiment: `trials` Haar states, depolarized by lambda,
/// analysed per cfg.analysis. Writes the histogram CSV and summary.json to
/// cfg.out_dir when it is set. `ok` is false iff an asserted invariant failed.
inline ExperimentSummary run_experiment(const ExperimentConfig &cfg) {
  cfg.validate();
  detail::prepare_out_dir(cfg);
  detail::InvariantLog log;
  nlohmann::json results = nlohmann::json::object();

  if (cfg.analysis == Analysis::Xeb) {
    detail::run_xeb(cfg, results, log);
    return detail::finish(cfg, std::move(results), log, "simulated");
  }

  detail::Source src{cfg.trials, true, [&cfg](std::uint64_t t) {
                       return depolarize(trial_state(cfg.n, cfg.seed, t), cfg.lambda);
                     }};
  if (cfg.analysis == Analysis::Gap)
    detail::run_gap(cfg, src, results, log);
  else
    detail::run_distribution(cfg, src, results, log);
  return detail::finish(cfg, std::move(results), log, "simulated");
}

/// Analyses measured bit-strings: the empirical frequencies stand in for the
/// probability vector and cfg.lambda selects the law they are compared with.
/// Nothing is asserted because hardware data need not follow the model.
inline ExperimentSummary analyze_samples(const SampleSet &samples, ExperimentConfig cfg) {
  cfg.n = samples.n;
  cfg.trials = 1;
  cfg.validate();
  detail::prepare_out_dir(cfg);
  const auto freq = empirical_probabilities(samples);
  detail::InvariantLog log;
  nlohmann::json results = nlohmann::json::object();
  results["shots"] = samples.total;
  results["distinct_outcomes"] = samples.counts.size();
  detail::Source src{1, false, [&freq](std::uint64_t) {
                       return DepolarizedProbVector{freq, 0.0, freq.probs};
                     }};
  switch (cfg.analysis) {
  case Analysis::Gap:
    detail::run_gap(cfg, src, results, log);
    break;
  case Analysis::Xeb:
    throw ArgumentError("use xeb_against_ideal for sample files");
  default:
    detail::run_distribution(cfg, src, results, log);
  }
  return detail::finish(cfg, std::move(results), log, "samples");
}

/// Full, subsystem and conditional XEB of a sample set against an ideal
/// vector. Conditional values are reported per b with post-selection yields.
inline ExperimentSummary xeb_against_ideal(const SampleSet &samples, const ProbVector &ideal,
                                           ExperimentConfig cfg) {
  cfg.n = samples.n;
  cfg.analysis = Analysis::Xeb;
  cfg.validate();
  detail::prepare_out_dir(cfg);
  const auto part = cfg.partition();
  detail::InvariantLog log;
  nlohmann::json results = nlohmann::json::object();
  results["shots"] = samples.total;
  results["full"] = to_json(xeb_full(samples, ideal));
  if (part.k() > 0) {
    results["subsystem"] = to_json(xeb_subsystem(samples, ideal, part));
    const auto breakdown = xeb_conditional_breakdown(samples, ideal, part);
    nlohmann::json per_b = nlohmann::json::array();
    for (std::size_t b = 0; b < breakdown.per_b.size(); ++b) {
      nlohmann::json entry{{"b", b}, {"yield", breakdown.yields[b]}};
      entry["result"] = breakdown.per_b[b] ? to_json(*breakdown.per_b[b]) : nlohmann::json();
      per_b.push_back(entry);
    }
    results["conditional"] = per_b;
    results["conditional_weighted_fidelity"] = breakdown.weighted_fidelity;
    results["conditional_reported_yield"] = breakdown.reported_yield;
  }
  return detail::finish(cfg, std::move(results), log, "samples");
}

} // namespace rqs
