// Command-line front end: simulate random states, sample them, and compare
// the results with the analytic laws.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rqs/rqs.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<int> n;
  std::optional<std::string> a_bits;
  std::optional<double> lambda;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> condition_b;
  std::optional<std::size_t> bins;
  std::optional<std::string> out_dir;
  unsigned threads = 0;
};

void add_common(CLI::App *app, CommonFlags &f) {
  app->add_option("--config", f.config_path, "Experiment config document (JSON)");
  app->add_option("--n", f.n, "Number of qubits");
  app->add_option("--a-bits", f.a_bits, "Subsystem A qubits, comma separated (qubit 0 = leftmost bit)");
  app->add_option("--lambda", f.lambda, "Depolarizing strength in [0, 1]");
  app->add_option("--trials", f.trials, "Number of random states");
  app->add_option("--shots", f.shots, "Bit-strings drawn per state");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--condition-b", f.condition_b, "Outcome b of subsystem B to condition on");
  app->add_option("--bins", f.bins, "Histogram bins");
  app->add_option("--out-dir", f.out_dir, "Output directory (default: $RQS_OUT_DIR)");
  app->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

std::vector<int> parse_bits(const std::string &s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto comma = s.find(',', pos);
    const auto tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty())
      out.push_back(std::stoi(tok));
    if (comma == std::string::npos)
      break;
    pos = comma + 1;
  }
  return out;
}

rqs::ExperimentConfig build_config(const CommonFlags &f, rqs::Analysis analysis) {
  rqs::ExperimentConfig cfg;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in)
      throw rqs::IoError("cannot open config '" + f.config_path + "'");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception &e) {
      throw rqs::FormatError(std::string("config: ") + e.what());
    }
    cfg = rqs::config_from_json(doc);
  } else {
    cfg.analysis = analysis;
  }
  if (const char *env = std::getenv("RQS_OUT_DIR"); env && cfg.out_dir.empty())
    cfg.out_dir = env;
  if (f.n)
    cfg.n = *f.n;
  if (f.a_bits)
    cfg.partition_a_bits = parse_bits(*f.a_bits);
  if (f.lambda)
    cfg.lambda = *f.lambda;
  if (f.trials)
    cfg.trials = *f.trials;
  if (f.shots)
    cfg.shots = *f.shots;
  if (f.seed)
    cfg.seed = *f.seed;
  if (f.condition_b)
    cfg.condition_b = *f.condition_b;
  if (f.bins)
    cfg.bins = *f.bins;
  if (f.out_dir)
    cfg.out_dir = *f.out_dir;
  cfg.threads = f.threads;
  return cfg;
}

int emit(const rqs::ExperimentSummary &s) {
  std::cout << s.text();
  return s.ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Random-state bit-string statistics and cross-entropy benchmarking"};
  app.require_subcommand(1);

  // sample
  CommonFlags sample_flags;
  std::string sample_output;
  std::string sample_format = "counts";
  std::uint64_t sample_trial = 0;
  auto *sample = app.add_subcommand("sample", "Draw bit-strings from a simulated random state");
  add_common(sample, sample_flags);
  sample->add_option("--output,-o", sample_output, "Output file")->required();
  sample->add_option("--format", sample_format, "counts (JSON) or text")
      ->check(CLI::IsMember({"counts", "text"}));
  sample->add_option("--trial", sample_trial, "Which trial state of the seed to sample");

  // analyze
  CommonFlags analyze_flags;
  std::string analyze_kind = "full";
  std::string analyze_samples;
  auto *analyze = app.add_subcommand("analyze", "Histogram and KS test against the analytic law");
  add_common(analyze, analyze_flags);
  analyze->add_option("--analysis", analyze_kind, "full, subsystem or conditional")
      ->check(CLI::IsMember({"full", "subsystem", "conditional"}));
  analyze->add_option("--samples", analyze_samples,
                      "Analyse a sample file (empirical frequencies) instead of simulating");

  // xeb
  CommonFlags xeb_flags;
  std::string xeb_samples;
  auto *xeb = app.add_subcommand("xeb", "Full, subsystem and conditional linear XEB");
  add_common(xeb, xeb_flags);
  xeb->add_option("--samples", xeb_samples,
                  "Score a sample file against the ideal state of its seed (meta.seed or --seed)");

  // gap
  CommonFlags gap_flags;
  std::string gap_samples;
  auto *gap = app.add_subcommand("gap", "Estimate the depolarizing strength");
  add_common(gap, gap_flags);
  gap->add_option("--samples", gap_samples, "Estimate from a sample file");

  // laws
  std::string law_family = "full-beta";
  std::uint64_t law_N = 4096, law_K = 1, law_M = 0;
  double law_lambda = 0.0, law_lo = 0.0, law_hi = 10.0;
  std::size_t law_points = 201;
  bool law_raw = false;
  std::string law_output;
  auto *laws = app.add_subcommand("laws", "Tabulate an analytic pdf and cdf as CSV");
  laws->add_option("--family", law_family,
                   "full-beta, subsystem-beta, exp-limit, gamma-limit, shifted-exp-limit, "
                   "shifted-subsystem-beta, conditional-beta");
  laws->add_option("--N", law_N, "Full dimension 2^n");
  laws->add_option("--K", law_K, "Dimension of subsystem B");
  laws->add_option("--M", law_M, "Dimension of subsystem A (default N / K)");
  laws->add_option("--lambda", law_lambda, "Depolarizing strength in [0, 1)");
  laws->add_option("--lo", law_lo, "Grid start");
  laws->add_option("--hi", law_hi, "Grid end");
  laws->add_option("--points", law_points, "Grid points")->check(CLI::Range(2, 10000000));
  laws->add_flag("--raw", law_raw, "Raw probabilities p instead of scaled x");
  laws->add_option("--output,-o", law_output, "Output file (default stdout)");

  // run
  CommonFlags run_flags;
  auto *run = app.add_subcommand("run", "Run the experiment described by --config");
  add_common(run, run_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      auto cfg = build_config(sample_flags, rqs::Analysis::Xeb);
      cfg.validate();
      const auto ideal = rqs::trial_state(cfg.n, cfg.seed, sample_trial);
      const auto noisy = rqs::depolarize(ideal, cfg.lambda);
      auto shots = rqs::draw_samples(
          noisy, cfg.shots, rqs::RngSpec{cfg.seed, rqs::kShotStreamBase + sample_trial});
      if (!cfg.partition_a_bits.empty())
        shots.meta.partition = cfg.partition();
      if (sample_format == "text")
        rqs::write_samples_text(shots, sample_output);
      else
        rqs::write_samples_counts(shots, sample_output);
      std::cerr << "wrote " << shots.total << " shots to " << sample_output << "\n";
      return 0;
    }
    if (*analyze) {
      auto cfg = build_config(analyze_flags, rqs::analysis_from_string(analyze_kind));
      if (analyze_flags.config_path.empty() || analyze->count("--analysis"))
        cfg.analysis = rqs::analysis_from_string(analyze_kind);
      if (!analyze_samples.empty())
        return emit(rqs::analyze_samples(rqs::read_samples(analyze_samples), cfg));
      return emit(rqs::run_experiment(cfg));
    }
    if (*xeb) {
      auto cfg = build_config(xeb_flags, rqs::Analysis::Xeb);
      cfg.analysis = rqs::Analysis::Xeb;
      if (!xeb_samples.empty()) {
        const auto samples = rqs::read_samples(xeb_samples);
        if (!xeb_flags.seed && samples.meta.seed)
          cfg.seed = *samples.meta.seed;
        if (!xeb_flags.a_bits && samples.meta.partition)
          cfg.partition_a_bits = samples.meta.partition->a_bits();
        const auto ideal = rqs::trial_state(samples.n, cfg.seed, 0);
        return emit(rqs::xeb_against_ideal(samples, ideal, cfg));
      }
      return emit(rqs::run_experiment(cfg));
    }
    if (*gap) {
      auto cfg = build_config(gap_flags, rqs::Analysis::Gap);
      cfg.analysis = rqs::Analysis::Gap;
      if (!gap_samples.empty())
        return emit(rqs::analyze_samples(rqs::read_samples(gap_samples), cfg));
      return emit(rqs::run_experiment(cfg));
    }
    if (*laws) {
      const auto family = rqs::family_from_string(law_family);
      const std::uint64_t M = law_M ? law_M : (law_K ? law_N / law_K : 0);
      rqs::AnalyticLaw law{family, law_N, M, law_K, law_lambda, !law_raw};
      if (family == rqs::Family::FullBeta)
        law = rqs::full_beta(law_N, law_lambda, !law_raw);
      else if (family == rqs::Family::ConditionalBeta)
        law = rqs::conditional_beta(law_M ? law_M : law_N, law_lambda, !law_raw);
      rqs::validate(law);
      std::ofstream file;
      if (!law_output.empty()) {
        file.open(law_output);
        if (!file)
          throw rqs::IoError("cannot write '" + law_output + "'");
      }
      std::ostream &out = law_output.empty() ? std::cout : file;
      out << "x,pdf,cdf\n";
      char buf[128];
      for (std::size_t i = 0; i < law_points; ++i) {
        const double x =
            law_lo + (law_hi - law_lo) * static_cast<double>(i) / static_cast<double>(law_points - 1);
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", x, rqs::pdf(law, x),
                      rqs::cdf(law, x));
        out << buf;
      }
      return 0;
    }
    if (*run) {
      if (run_flags.config_path.empty())
        throw rqs::ArgumentError("run needs --config");
      return emit(rqs::run_experiment(build_config(run_flags, rqs::Analysis::Full)));
    }
  } catch (const rqs::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
