#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "bellrand/entropy.hpp"
#include "bellrand/errors.hpp"
#include "bellrand/extractor.hpp"
#include "bellrand/io.hpp"
#include "bellrand/pbr.hpp"
#include "bellrand/pmcompare.hpp"
#include "bellrand/polytope.hpp"
#include "bellrand/sim.hpp"
#include "bellrand/soundness.hpp"
#include "bellrand/stats.hpp"

namespace bellrand::cli {

namespace {

namespace fs = std::filesystem;

enum class Level { quiet = 0, info = 1, debug = 2 };

Level log_level() {
  const char* env = std::getenv("BELLRAND_LOG");
  if (env == nullptr) return Level::info;
  const std::string v(env);
  if (v == "quiet" || v == "0" || v == "error") return Level::quiet;
  if (v == "debug" || v == "2") return Level::debug;
  return Level::info;
}

void log(Level level, const std::string& msg) {
  if (level <= log_level()) std::cerr << msg << '\n';
}

std::string sci(double v, int digits = 6) {
  std::ostringstream out;
  out << std::setprecision(digits) << v;
  return out.str();
}

constexpr std::size_t kChunk = 1 << 20;

struct FitArgs {
  std::string input;
  std::string output;
  std::uint64_t train = 5'000'000;
};

struct PlanArgs {
  std::string distribution;
  std::string output;
  std::string bell_function;
  std::uint64_t n = 0;
  double eps_fin = 0.0;
  double alpha = 0.0;
  double z = kDefaultThresholdQuantile;
  std::optional<double> v_thresh;
  std::uint64_t t = 0;
  std::uint64_t train = 0;
};

struct CertifyArgs {
  std::string trials;
  std::string plan;
  std::string output;
  bool adaptive = false;
};

struct ExtractArgs {
  std::string trials;
  std::string plan;
  std::string certificate;
  std::string seed;
  std::string output;
  unsigned threads = 0;
};

struct SignalingArgs {
  std::string input;
  std::optional<std::uint64_t> limit;
};

struct SimulateArgs {
  std::string distribution;
  std::string output;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
};

struct SeedArgs {
  std::string output;
  std::string plan;
  std::uint64_t bits = 0;
  std::optional<std::uint64_t> rng_seed;
};

int cmd_fit(const FitArgs& a) {
  if (a.train == 0) throw InputError("--train must be positive");
  const bool trials = io::is_trial_file(a.input);
  const auto counts = io::load_counts(a.input, trials ? std::optional<std::uint64_t>(a.train) : std::nullopt);
  const auto fit = ml_nonsignaling_fit(counts);
  log(Level::info, "fit: " + std::to_string(counts.total()) + " trials, " + std::to_string(fit.newton_steps) +
                       " Newton steps, certified residual " + sci(fit.residual, 3));
  io::write_distribution(a.output, fit.distribution, "maximum-likelihood non-signaling fit of " + a.input);
  return kExitPass;
}

int cmd_plan(const PlanArgs& a) {
  if (a.n == 0) throw InputError("--n must be positive");
  const auto split = error_split(a.eps_fin);
  JointDistribution q = io::read_distribution(a.distribution);
  if (!q.flags().nonsignaling) {
    const auto projected = ml_nonsignaling_projection(q);
    log(Level::info, "plan: distribution not flagged non-signaling; using its likelihood projection (max cell change " +
                         sci((projected.distribution.table() - q.table()).abs().maxCoeff(), 3) + ")");
    q = projected.distribution;
  }

  io::PlanRecord plan;
  plan.alpha = a.alpha;
  plan.quantile_z = a.z;
  plan.train = a.train;
  plan.eps_fin = a.eps_fin;
  plan.q_sha256 = io::sha256_hex(io::read_text(a.distribution));

  std::optional<BellFunction> t;
  if (!a.bell_function.empty()) {
    const auto given = io::read_bell_function(a.bell_function);
    const double m = compute_m(given.values(), a.alpha);
    t.emplace(given.values(), m, a.alpha);
    plan.m_raw = m;
    log(Level::info, "plan: Bell function from " + a.bell_function + ", m = " + sci(m, 9));
  } else {
    const auto pbr = optimize_bell_function(q, a.alpha);
    if (!pbr.violation) {
      throw DomainError("the distribution shows no certifiable violation; no Bell function gains entropy");
    }
    t.emplace(pbr.function);
    plan.m_raw = pbr.m_raw;
    log(Level::info, "plan: optimized Bell function, m = " + sci(t->m(), 9) + " (before rounding " +
                         sci(pbr.m_raw, 9) + "), E(ln T) = " + sci(pbr.objective, 6));
  }
  plan.t_values = t->values();

  plan.threshold = choose_threshold(q, *t, a.n, a.z);
  if (plan.threshold.no_expected_violation) {
    log(Level::info, "plan: warning: E(ln T) <= 0, the threshold is not expected to be met");
  }
  double log_v = plan.threshold.log_v_thresh;
  if (a.v_thresh) {
    if (!(*a.v_thresh > 0.0)) throw DomainError("--v-thresh must be positive");
    log_v = std::log(*a.v_thresh);
    plan.v_thresh_override = true;
  }
  plan.expected_log_t = plan.threshold.mu;
  plan.rate = asymptotic_rate(*t, q);

  plan.params = derive_protocol_params(a.n, log_v, split.eps_p, split.kappa, split.eps_ext, t->m(), a.t);
  if (plan.params.t == 0) {
    throw DomainError("no output bits are admissible for these parameters (-log2 delta = " +
                      sci(plan.params.neg_log2_delta, 6) + ")");
  }
  plan.extractor = make_extractor_spec(plan.params.q, plan.params.t, plan.params.eps_1bit);
  plan.params.d = plan.extractor.d;

  io::write_plan(a.output, plan);
  std::cout << "n = " << a.n << "\nm = " << sci(plan.params.m, 9) << "\nln v_thresh = " << sci(log_v, 10)
            << (plan.v_thresh_override ? " (override)" : " (95% rule)") << "\n-log2 delta = "
            << sci(plan.params.neg_log2_delta, 10) << "\nt = " << plan.params.t << "\nd = " << plan.params.d
            << "\nw = " << plan.extractor.w << "\nrate = " << sci(plan.rate, 6) << " bits/trial\n";
  return kExitPass;
}

int cmd_certify(const CertifyArgs& a) {
  const auto plan = io::read_plan(a.plan);
  const BellFunction t = plan.bell_function();
  io::TrialReader reader(a.trials);
  reader.skip(plan.train);
  EntropyAccumulator acc(t, plan.params.log_v_thresh, a.adaptive);
  std::uint64_t remaining = plan.params.n;
  while (remaining > 0) {
    const auto chunk = reader.next(static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kChunk)));
    if (chunk.empty()) break;
    acc.add(chunk);
    remaining -= chunk.size();
  }
  if (remaining > 0) {
    throw InputError("trial file holds " + std::to_string(plan.params.n - remaining) +
                     " protocol trials after the training prefix; the plan needs " + std::to_string(plan.params.n));
  }
  io::CertificateRecord cert;
  cert.run = acc.result();
  cert.adaptive = a.adaptive;
  cert.first_trial = plan.train;
  cert.plan_sha256 = io::plan_hash(plan);
  cert.trials_path = a.trials;
  io::write_certificate(a.output, cert);

  const bool ok = cert.run.passed && !cert.run.marginal;
  std::cout << (ok ? "PASS" : "ABORT") << ": ln V = " << sci(cert.run.log_v, 10)
            << ", ln v_thresh = " << sci(cert.run.log_v_thresh, 10);
  if (cert.run.crossing_index) std::cout << ", first crossing at trial " << *cert.run.crossing_index;
  if (cert.run.marginal) std::cout << " (within the guard band; treated as abort)";
  std::cout << '\n';
  return ok ? kExitPass : kExitAbort;
}

int cmd_extract(const ExtractArgs& a) {
  const auto plan = io::read_plan(a.plan);
  const auto cert = io::read_certificate(a.certificate);
  if (cert.plan_sha256 != io::plan_hash(plan)) {
    throw InputError("certificate was issued for a different plan");
  }
  if (!cert.run.passed || cert.run.marginal) {
    std::cerr << "refusing to extract: the certificate records an abort\n";
    return kExitAbort;
  }
  if (cert.run.n != plan.params.n || cert.first_trial != plan.train) {
    throw InputError("certificate does not cover the planned trials");
  }
  const BitVector seed = io::read_bits(a.seed, plan.extractor.d);
  const std::optional<std::uint64_t> freeze =
      cert.run.frozen ? cert.run.crossing_index : std::optional<std::uint64_t>{};

  io::TrialReader reader(a.trials);
  reader.skip(plan.train);
  StreamingExtractor ext(plan.extractor, seed, a.threads);
  std::uint64_t index = 1;
  std::uint64_t remaining = plan.params.n;
  while (remaining > 0) {
    const auto chunk = reader.next(static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kChunk)));
    if (chunk.empty()) throw InputError("trial file ends before the planned trials");
    ext.append(outcome_bits(chunk, index, freeze));
    index += chunk.size();
    remaining -= chunk.size();
  }
  const BitVector out = ext.finish();
  io::write_bits(a.output, out,
                 {{"plan_sha256", cert.plan_sha256},
                  {"seed_sha256", io::sha256_hex(seed.to_bytes())},
                  {"spec_sha256", io::extractor_spec_hash(plan.extractor)},
                  {"modulus", plan.extractor.modulus.to_string()}});
  log(Level::info, "extract: wrote " + std::to_string(out.size()) + " bits to " + a.output);
  return kExitPass;
}

int cmd_check_signaling(const SignalingArgs& a) {
  const auto counts = io::load_counts(a.input, a.limit);
  const auto tests = signaling_tests(counts);
  const char* names[4] = {"P(A|X=0,Y) = P(A|X=0)", "P(A|X=1,Y) = P(A|X=1)", "P(B|X,Y=0) = P(B|Y=0)",
                          "P(B|X,Y=1) = P(B|Y=1)"};
  std::cout << "test  equality                 z           p (two-tailed)\n";
  for (int i = 0; i < 4; ++i) {
    std::cout << (i + 1) << "     " << names[i] << "   " << std::setw(10) << sci(tests[i].z, 5) << "  "
              << sci(tests[i].p_value, 6) << '\n';
  }
  return kExitPass;
}

int cmd_simulate(const SimulateArgs& a) {
  if (a.n == 0) throw InputError("-n must be positive");
  const auto q = io::read_distribution(a.distribution);
  const TrialSimulator sim(q, SettingsDistribution::uniform(), a.seed);
  io::TrialWriter writer(a.output, io::format_for_path(a.output));
  for (std::uint64_t begin = 0; begin < a.n; begin += kChunk) {
    writer.write(sim.range(begin, std::min<std::uint64_t>(kChunk, a.n - begin)));
  }
  writer.close();
  log(Level::info, "simulate: " + std::to_string(a.n) + " trials (rng seed " + std::to_string(a.seed) +
                       ", not for cryptographic use) -> " + a.output);
  return kExitPass;
}

int cmd_gen_seed(const SeedArgs& a) {
  std::uint64_t bits = a.bits;
  if (!a.plan.empty()) bits = io::read_plan(a.plan).extractor.d;
  if (bits == 0) throw InputError("give --bits or --plan");
  BitVector seed(bits);
  std::map<std::string, std::string> extra;
  if (a.rng_seed) {
    for (std::uint64_t i = 0; i < bits; ++i) seed.set(i, (counter_hash(*a.rng_seed, i) >> 63) != 0);
    extra["source"] = "counter-hash pseudorandom (seed " + std::to_string(*a.rng_seed) + "), testing only";
  } else {
    std::random_device rd;
    for (std::uint64_t i = 0; i < bits; i += 32) {
      const std::uint32_t word = rd();
      for (unsigned k = 0; k < 32 && i + k < bits; ++k) seed.set(i + k, (word >> k) & 1u);
    }
    extra["source"] = "std::random_device";
  }
  io::write_bits(a.output, seed, extra);
  log(Level::info, "gen-seed: " + std::to_string(bits) + " bits -> " + a.output);
  return kExitPass;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Device-independent randomness: fit, plan, certify and extract from Bell-test trials"};
  app.set_config("--config", "", "TOML/INI file mirroring the command-line flags");
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood non-signaling distribution from training trials");
  fit_cmd->add_option("input", fit.input, "Trial file (binary or .csv) or counts table")->required();
  fit_cmd->add_option("-o,--output", fit.output, "Distribution table to write")->required();
  fit_cmd->add_option("--train", fit.train, "Leading trials used for training (trial files)")
      ->capture_default_str();

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Choose T, threshold and protocol parameters");
  plan_cmd->add_option("distribution", plan.distribution, "Distribution table")->required();
  plan_cmd->add_option("-o,--output", plan.output, "Plan record (JSON) to write")->required();
  plan_cmd->add_option("--n", plan.n, "Number of protocol trials")->required();
  plan_cmd->add_option("--eps-fin", plan.eps_fin, "Target final error")->required();
  plan_cmd->add_option("--alpha", plan.alpha, "Settings bias bound")->capture_default_str();
  plan_cmd->add_option("--z", plan.z, "Normal quantile of the threshold rule")->capture_default_str();
  plan_cmd->add_option("--v-thresh", plan.v_thresh, "Manual threshold (linear scale) instead of the rule");
  plan_cmd->add_option("--t", plan.t, "Output length (default: largest admissible)");
  plan_cmd->add_option("--train", plan.train, "Training trials preceding the protocol trials in the data file")
      ->capture_default_str();
  plan_cmd->add_option("--bell-function", plan.bell_function, "Use this Bell function instead of optimizing");

  CertifyArgs certify;
  auto* certify_cmd = app.add_subcommand("certify", "Run the entropy-production test on protocol trials");
  certify_cmd->add_option("trials", certify.trials, "Trial file")->required();
  certify_cmd->add_option("--plan", certify.plan, "Plan record")->required();
  certify_cmd->add_option("-o,--output", certify.output, "Certificate (JSON) to write")->required();
  certify_cmd->add_flag("--adaptive", certify.adaptive, "Freeze T = 1 after the threshold is first exceeded");

  ExtractArgs extract;
  auto* extract_cmd = app.add_subcommand("extract", "Extract the planned output bits after a pass");
  extract_cmd->add_option("trials", extract.trials, "Trial file")->required();
  extract_cmd->add_option("--plan", extract.plan, "Plan record")->required();
  extract_cmd->add_option("--certificate", extract.certificate, "Certificate from certify")->required();
  extract_cmd->add_option("--seed", extract.seed, "Raw seed bit file")->required();
  extract_cmd->add_option("-o,--output", extract.output, "Output bit file")->required();
  extract_cmd->add_option("--threads", extract.threads, "Worker threads (0 = all cores)")->capture_default_str();

  SignalingArgs sig;
  auto* sig_cmd = app.add_subcommand("check-signaling", "Two-proportion z-tests of the no-signaling equalities");
  sig_cmd->add_option("input", sig.input, "Trial file or counts table")->required();
  sig_cmd->add_option("--limit", sig.limit, "Use only the first N trials");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate i.i.d. trials from a distribution (testing only)");
  sim_cmd->add_option("distribution", sim.distribution, "Distribution table")->required();
  sim_cmd->add_option("-o,--output", sim.output, "Trial file to write (.csv for text)")->required();
  sim_cmd->add_option("-n", sim.n, "Number of trials")->required();
  sim_cmd->add_option("--seed", sim.seed, "Generator seed")->capture_default_str();

  SeedArgs seed;
  auto* seed_cmd = app.add_subcommand("gen-seed", "Write a seed bit file for the extractor");
  seed_cmd->add_option("-o,--output", seed.output, "Seed file to write")->required();
  seed_cmd->add_option("--bits", seed.bits, "Seed length");
  seed_cmd->add_option("--plan", seed.plan, "Take the seed length from a plan");
  seed_cmd->add_option("--rng-seed", seed.rng_seed, "Deterministic pseudorandom seed (testing only)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*plan_cmd) return cmd_plan(plan);
    if (*certify_cmd) return cmd_certify(certify);
    if (*extract_cmd) return cmd_extract(extract);
    if (*sig_cmd) return cmd_check_signaling(sig);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*seed_cmd) return cmd_gen_seed(seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace bellrand::cli
