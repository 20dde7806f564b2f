// Command-line harness: loads measure/Q specs, runs the verification suites,
// curves, path simulations and the pinning comparison, and writes JSON
// reports and CSV curves. Exit codes: 0 pass, 1 input/usage error,
// 2 statistical/diagnostic failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sloc/channel.hpp"
#include "sloc/errors.hpp"
#include "sloc/io.hpp"
#include "sloc/linalg.hpp"
#include "sloc/mc.hpp"
#include "sloc/measure.hpp"
#include "sloc/sde.hpp"
#include "sloc/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using sloc::io::format_double;
using sloc::io::ordered_json;

namespace {

enum class Mutation { kNone, kShrinkQ, kDoubleDrift, kMismatchT };

enum : std::uint64_t {
  kTagCurvePoint = 0x41,
  kTagPinning = 0x42,
  kTagLawCheck = 0x43,
};

constexpr double kScaledCovFloor = 1e-9;
constexpr double kShrinkQFactor = 50.0;
constexpr double kMismatchTFactor = 1.2;

struct CommandOptions {
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 0;  // resolved from --threads, then SLOC_THREADS, then hardware
  Mutation mutation = Mutation::kNone;
};

json load_spec(const std::string& path) {
  std::string text = sloc::io::read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw sloc::ParseError(std::string("spec is not valid JSON: ") + e.what());
  }
}

double number_or(const json& spec, const std::string& key, double fallback) {
  if (!spec.contains(key)) return fallback;
  if (!spec.at(key).is_number()) throw sloc::ParseError("spec field '" + key + "' must be a number");
  return spec.at(key).get<double>();
}

std::int64_t integer_or(const json& spec, const std::string& key, std::int64_t fallback) {
  if (!spec.contains(key)) return fallback;
  if (!spec.at(key).is_number_integer()) {
    throw sloc::ParseError("spec field '" + key + "' must be an integer");
  }
  return spec.at(key).get<std::int64_t>();
}

std::vector<double> number_list(const json& spec, const std::string& key) {
  if (!spec.contains(key) || !spec.at(key).is_array()) {
    throw sloc::ParseError("spec field '" + key + "' must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& cell : spec.at(key)) {
    if (!cell.is_number()) throw sloc::ParseError("spec field '" + key + "' must hold numbers");
    out.push_back(cell.get<double>());
  }
  return out;
}

sloc::measures::Geometry parse_geometry(const std::string& name) {
  if (name == "cube") return sloc::measures::Geometry::kCube;
  if (name == "sphere") return sloc::measures::Geometry::kSphere;
  if (name == "ising") return sloc::measures::Geometry::kIsing;
  if (name == "clustered") return sloc::measures::Geometry::kClustered;
  throw sloc::InvalidGeometry("unknown geometry '" + name +
                              "' (expected cube|sphere|ising|clustered)");
}

sloc::measures::DiscreteMeasure resolve_measure(const json& spec, std::uint64_t run_seed) {
  if (!spec.contains("measure") || !spec.at("measure").is_object()) {
    throw sloc::ParseError("spec needs a 'measure' object");
  }
  const json& src = spec.at("measure");
  const int n_sources = static_cast<int>(src.contains("inline")) +
                        static_cast<int>(src.contains("path")) +
                        static_cast<int>(src.contains("generator"));
  if (n_sources != 1) {
    throw sloc::ParseError("measure needs exactly one of inline | path | generator");
  }
  if (src.contains("inline")) return sloc::io::measure_from_json(src.at("inline"));
  if (src.contains("path")) {
    return sloc::io::measure_from_json(load_spec(src.at("path").get<std::string>()));
  }
  const json& gen = src.at("generator");
  const auto seed = gen.contains("seed")
                        ? static_cast<std::uint64_t>(integer_or(gen, "seed", 0))
                        : run_seed;
  const int n = static_cast<int>(integer_or(gen, "n", -1));
  const int k = static_cast<int>(integer_or(gen, "k", -1));
  if (n < 1 || k < 1) throw sloc::ParseError("generator needs integer fields n >= 1 and k >= 1");
  if (!gen.contains("geometry") || !gen.at("geometry").is_string()) {
    throw sloc::ParseError("generator needs a string field 'geometry'");
  }
  return sloc::measures::random_measure(seed, n, k,
                                        parse_geometry(gen.at("geometry").get<std::string>()));
}

sloc::linalg::PsdMatrix resolve_q(const json& spec, const sloc::measures::DiscreteMeasure& mu) {
  if (!spec.contains("q_matrix")) throw sloc::ParseError("spec needs a 'q_matrix' field");
  const json& qj = spec.at("q_matrix");
  const int n = mu.dim();
  if (qj.is_array()) {
    const Eigen::MatrixXd m = sloc::io::matrix_from_json(qj);
    if (m.rows() != n) {
      throw sloc::DimensionMismatch("q_matrix is " + std::to_string(m.rows()) +
                                    "-dimensional, measure is " + std::to_string(n));
    }
    return sloc::linalg::PsdMatrix(m);
  }
  if (qj.is_object() && qj.contains("scaled_identity")) {
    const double c = qj.at("scaled_identity").get<double>();
    if (!(c > 0.0)) throw sloc::ParseError("scaled_identity needs a positive scale");
    return sloc::linalg::PsdMatrix(Eigen::MatrixXd(c * Eigen::MatrixXd::Identity(n, n)));
  }
  if (qj.is_object() && qj.contains("scaled_cov")) {
    const double c = qj.at("scaled_cov").get<double>();
    if (!(c > 0.0)) throw sloc::ParseError("scaled_cov needs a positive scale");
    // Floor keeps Q strictly PD even for degenerate covariances.
    return sloc::linalg::PsdMatrix(
        Eigen::MatrixXd(c * sloc::measures::cov(mu).entries() +
                        kScaledCovFloor * Eigen::MatrixXd::Identity(n, n)));
  }
  throw sloc::ParseError(
      "q_matrix must be a matrix literal, {scaled_identity: c} or {scaled_cov: c}");
}

std::uint64_t resolve_seed(const json& spec, const CommandOptions& opt) {
  if (opt.seed) return *opt.seed;
  if (spec.contains("seed")) {
    if (!spec.at("seed").is_number_integer()) {
      throw sloc::ParseError("spec field 'seed' must be an integer");
    }
    return spec.at("seed").get<std::uint64_t>();
  }
  throw sloc::ParseError("a seed is required (spec field 'seed' or --seed)");
}

fs::path resolve_out(const json& spec, const CommandOptions& opt) {
  std::string dir = ".";
  if (spec.contains("out")) dir = spec.at("out").get<std::string>();
  if (opt.out) dir = *opt.out;
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw sloc::Error("E_IO", "cannot create output directory " + p.string());
  return p;
}

int resolve_threads(const CommandOptions& opt) {
  if (opt.threads > 0) return opt.threads;
  if (const char* env = std::getenv("SLOC_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (...) {
      throw sloc::ParseError("SLOC_THREADS must be a positive integer");
    }
  }
  return 0;  // library resolves to hardware concurrency
}

void dump_json(const fs::path& path, const ordered_json& j) {
  sloc::io::write_text_file(path.string(), j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const json& spec, const CommandOptions& opt) {
  const std::uint64_t seed = resolve_seed(spec, opt);
  const fs::path out = resolve_out(spec, opt);
  const auto mu = resolve_measure(spec, seed);
  const auto q = resolve_q(spec, mu);

  sloc::McConfig cfg;
  cfg.n_samples = integer_or(spec, "n_samples", 100000);
  cfg.n_batches = static_cast<int>(integer_or(spec, "n_batches", 50));
  cfg.seed = seed;
  cfg.threads = resolve_threads(opt);

  sloc::verify::TheoremReport rep = sloc::verify::verify_theorem(mu, q, cfg);
  if (opt.mutation == Mutation::kShrinkQ) {
    // Self-test hook: compare cov1 against a shrunk bound; the estimate is
    // untouched, so a correct checker must reject.
    sloc::McEstimate<Eigen::MatrixXd> est;
    est.value = rep.cov1.lhs;
    est.std_error =
        Eigen::MatrixXd::Constant(mu.dim(), mu.dim(), rep.cov1.ci_slack / (3.0 * mu.dim()));
    est.n_samples = rep.cov1.n_samples;
    est.seed = rep.cov1.seed;
    rep.cov1 = sloc::verify::make_loewner_report("cov1", est,
                                                 Eigen::MatrixXd(q.entries() / kShrinkQFactor));
    rep.all_pass = rep.cov1.pass && rep.entropy.pass && rep.cov2.pass;
  }

  ordered_json j;
  j["command"] = "verify";
  j["seed"] = seed;
  j["n_samples"] = cfg.n_samples;
  j["reports"] =
      ordered_json::array({sloc::io::report_to_json(rep.cov1), sloc::io::report_to_json(rep.entropy),
                           sloc::io::report_to_json(rep.cov2)});
  j["all_pass"] = rep.all_pass;
  dump_json(out / "report.json", j);

  for (const auto* r : {&rep.cov1, &rep.entropy, &rep.cov2}) {
    std::cout << "[verify] " << r->which << ": " << (r->pass ? "pass" : "FAIL")
              << " slack=" << format_double(r->slack)
              << " ci_slack=" << format_double(r->ci_slack) << "\n";
  }
  return rep.all_pass ? 0 : 2;
}

// ---------------------------------------------------------------------------
// mmse-curve

int cmd_mmse_curve(const json& spec, const CommandOptions& opt) {
  const std::uint64_t seed = resolve_seed(spec, opt);
  const fs::path out = resolve_out(spec, opt);
  const auto mu = resolve_measure(spec, seed);
  const auto q = resolve_q(spec, mu);

  const std::vector<double> grid = number_list(spec, "t_grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || (i > 0 && grid[i] < grid[i - 1])) {
      throw sloc::InvalidParameter("t_grid must be sorted and nonnegative");
    }
  }
  sloc::linalg::PsdMatrix r = sloc::linalg::PsdMatrix::identity(mu.dim());
  if (spec.contains("r_matrix") && !(spec.at("r_matrix").is_string() &&
                                     spec.at("r_matrix").get<std::string>() == "identity")) {
    r = sloc::linalg::PsdMatrix(sloc::io::matrix_from_json(spec.at("r_matrix")));
  }

  sloc::McConfig base;
  base.n_samples = integer_or(spec, "n_samples", 100000);
  base.n_batches = static_cast<int>(integer_or(spec, "n_batches", 50));
  base.threads = resolve_threads(opt);

  std::string csv = "t,value,std_error\n";
  const sloc::RngStream root(seed);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sloc::McConfig cfg = base;
    cfg.seed = root.split(kTagCurvePoint, i).next_u64();
    const auto est = sloc::verify::mmse(mu, q, grid[i], r, cfg);
    csv += sloc::io::csv_row({grid[i], est.value, est.std_error});
    std::cout << "[mmse-curve] t=" << format_double(grid[i])
              << " mmse=" << format_double(est.value) << "\n";
  }
  sloc::io::write_text_file((out / "mmse_curve.csv").string(), csv);
  return 0;
}

// ---------------------------------------------------------------------------
// sde

sloc::sde::Driver parse_driver(const std::string& name) {
  if (name == "exact_channel") return sloc::sde::Driver::kExactChannel;
  if (name == "innovations") return sloc::sde::Driver::kInnovations;
  if (name == "likelihood_sde") return sloc::sde::Driver::kLikelihoodSde;
  throw sloc::ParseError("unknown driver '" + name +
                         "' (expected exact_channel|innovations|likelihood_sde)");
}

std::string path_csv(const sloc::sde::Path& path, int n, int k) {
  std::string csv = "t";
  for (int j = 0; j < n; ++j) csv += ",ybar_" + std::to_string(j);
  for (int i = 0; i < k; ++i) csv += ",w_" + std::to_string(i);
  for (int j = 0; j < n; ++j) csv += ",a_" + std::to_string(j);
  csv += '\n';
  for (const auto& s : path) {
    std::vector<double> cells;
    cells.push_back(s.t);
    for (int j = 0; j < n; ++j) cells.push_back(s.ybar(j));
    for (int i = 0; i < k; ++i) cells.push_back(std::exp(s.log_weights(i)));
    for (int j = 0; j < n; ++j) cells.push_back(s.a(j));
    csv += sloc::io::csv_row(cells);
  }
  return csv;
}

ordered_json law_report_json(const sloc::sde::LawEquivalenceReport& rep) {
  auto moment = [](const sloc::sde::MomentComparison& m) {
    ordered_json j;
    j["path"] = sloc::io::matrix_to_json(m.path_value);
    j["channel"] = sloc::io::matrix_to_json(m.channel_value);
    j["tolerance"] = sloc::io::matrix_to_json(m.tolerance);
    j["pass"] = m.pass;
    return j;
  };
  ordered_json j;
  j["ybar_mean"] = moment(rep.ybar_mean);
  j["ybar_cov"] = moment(rep.ybar_cov);
  j["posterior_mean_mean"] = moment(rep.posterior_mean_mean);
  j["posterior_mean_cov"] = moment(rep.posterior_mean_cov);
  j["pass"] = rep.pass;
  return j;
}

int cmd_sde(const json& spec, const CommandOptions& opt) {
  const std::uint64_t seed = resolve_seed(spec, opt);
  const fs::path out = resolve_out(spec, opt);
  const auto mu = resolve_measure(spec, seed);
  const auto q = resolve_q(spec, mu);
  const int threads = resolve_threads(opt);

  sloc::sde::PathConfig cfg;
  cfg.dt = number_or(spec, "dt", 1e-3);
  cfg.t_max = number_or(spec, "t_max", 50.0);
  cfg.record_every = static_cast<int>(integer_or(spec, "record_every", 100));
  cfg.seed = seed;
  cfg.driver = parse_driver(spec.contains("driver") ? spec.at("driver").get<std::string>()
                                                    : "exact_channel");
  double drift_scale = 1.0;
  if (opt.mutation == Mutation::kDoubleDrift) {
    cfg.driver = sloc::sde::Driver::kInnovations;
    drift_scale = 2.0;
  }
  const int n_paths = static_cast<int>(integer_or(spec, "n_paths", 500));
  const double threshold = number_or(spec, "threshold", 0.99);
  const int dump_paths =
      std::min<int>(n_paths, static_cast<int>(integer_or(spec, "dump_paths", 8)));

  std::vector<double> checkpoints;
  if (spec.contains("checkpoints")) {
    checkpoints = number_list(spec, "checkpoints");
  } else {
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      if (t <= cfg.t_max) checkpoints.push_back(t);
    }
  }

  std::vector<sloc::sde::Path> paths;
  try {
    paths = sloc::sde::run_paths(mu, q, cfg, n_paths, threads, std::nullopt, drift_scale);
  } catch (const sloc::StepTooLarge& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 2;
  }

  for (int p = 0; p < dump_paths; ++p) {
    char name[32];
    std::snprintf(name, sizeof(name), "path_%03d.csv", p);
    sloc::io::write_text_file((out / name).string(),
                              path_csv(paths[static_cast<std::size_t>(p)], mu.dim(), mu.size()));
  }

  const auto martingale = sloc::sde::martingale_diagnostic(paths, mu, checkpoints);
  const auto localization = sloc::sde::localization_diagnostic(paths, threshold);

  ordered_json diag;
  diag["command"] = "sde";
  diag["seed"] = seed;
  diag["n_paths"] = n_paths;
  ordered_json cps = ordered_json::array();
  for (const auto& cs : martingale.checkpoints) {
    ordered_json cj;
    cj["t"] = cs.t;
    cj["mean_a"] = sloc::io::matrix_to_json(cs.mean_a);
    cj["se_a"] = sloc::io::matrix_to_json(cs.se_a);
    cj["mean_w"] = sloc::io::matrix_to_json(cs.mean_w);
    cj["se_w"] = sloc::io::matrix_to_json(cs.se_w);
    cj["a_ok"] = cs.a_ok;
    cj["w_ok"] = cs.w_ok;
    cps.push_back(std::move(cj));
  }
  diag["martingale"] = ordered_json{{"checkpoints", std::move(cps)}, {"pass", martingale.pass}};
  diag["localization"] = ordered_json{{"threshold", threshold},
                                      {"median_hit_time", localization.median_hit_time},
                                      {"fraction_localized", localization.fraction_localized}};

  bool law_pass = true;
  if (spec.contains("law_check") || opt.mutation == Mutation::kMismatchT) {
    json law = spec.contains("law_check") ? spec.at("law_check") : json::object();
    const double t_law = number_or(law, "t", 1.0);
    const int n_law = static_cast<int>(integer_or(law, "n_paths", 1000));
    const std::uint64_t law_seed = sloc::RngStream(seed).split(kTagLawCheck).next_u64();
    const double t_channel =
        opt.mutation == Mutation::kMismatchT ? kMismatchTFactor * t_law : t_law;
    const auto law_rep =
        sloc::sde::detail::law_equivalence_mismatched(mu, q, t_law, t_channel, n_law, law_seed);
    diag["law_check"] = law_report_json(law_rep);
    law_pass = law_rep.pass;
  }

  const bool pass = martingale.pass && law_pass;
  diag["pass"] = pass;
  dump_json(out / "diagnostics.json", diag);

  std::cout << "[sde] martingale: " << (martingale.pass ? "pass" : "FAIL") << "\n";
  std::cout << "[sde] localization fraction=" << format_double(localization.fraction_localized)
            << " median_hit_time=" << format_double(localization.median_hit_time) << "\n";
  if (diag.contains("law_check")) {
    std::cout << "[sde] law_check: " << (law_pass ? "pass" : "FAIL") << "\n";
  }
  return pass ? 0 : 2;
}

// ---------------------------------------------------------------------------
// pinning-compare

int cmd_pinning_compare(const json& spec, const CommandOptions& opt) {
  const std::uint64_t seed = resolve_seed(spec, opt);
  const fs::path out = resolve_out(spec, opt);
  const auto mu = resolve_measure(spec, seed);

  const std::vector<double> eps_grid = number_list(spec, "epsilon_grid");
  for (double e : eps_grid) {
    if (!(e >= 0.0 && e <= 1.0)) throw sloc::InvalidParameter("epsilon_grid must lie in [0,1]");
  }
  std::vector<double> q_grid;
  if (spec.contains("q_scale_grid")) {
    q_grid = number_list(spec, "q_scale_grid");
    for (double c : q_grid) {
      if (!(c > 0.0)) throw sloc::InvalidParameter("q_scale_grid must be positive");
    }
  } else {
    const double base =
        std::max(sloc::measures::cov(mu).entries().trace() / mu.dim(), kScaledCovFloor);
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) q_grid.push_back(f * base);
  }

  sloc::McConfig base_cfg;
  base_cfg.n_samples = integer_or(spec, "n_samples", 100000);
  base_cfg.n_batches = static_cast<int>(integer_or(spec, "n_batches", 50));
  base_cfg.threads = resolve_threads(opt);

  const sloc::RngStream root(seed);
  std::string csv = "channel,param,mi,mi_se,cov_eig_max,cov_eig_max_se\n";

  // Erasure channel: per draw, the KL of the pinned posterior and its covariance.
  const int n = mu.dim();
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double eps = eps_grid[i];
    sloc::McConfig cfg = base_cfg;
    cfg.seed = root.split(kTagPinning, 2 * i).next_u64();
    // Rows 0..n-1 accumulate the posterior covariance; the trailing row's
    // first entry carries the KL, so one batch pass returns both statistics.
    const auto est = sloc::mc_batch_estimate<Eigen::MatrixXd>(
        cfg, kTagPinning,
        [&](int, sloc::RngStream& rs, std::int64_t bs) {
          Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n + 1, n);
          for (std::int64_t s = 0; s < bs; ++s) {
            auto [x, draw] = sloc::channel::sample_erasure(mu, eps, rs);
            const auto post = sloc::channel::erasure_posterior(mu, draw);
            acc.topRows(n) += sloc::measures::cov(post).entries();
            acc(n, 0) += sloc::measures::kl_divergence(post, mu);
          }
          return Eigen::MatrixXd(acc / static_cast<double>(bs));
        },
        Eigen::MatrixXd::Zero(n + 1, n));
    const Eigen::MatrixXd cov_mean = est.value.topRows(n);
    const Eigen::MatrixXd cov_se = est.std_error.topRows(n);
    const double eig_max = -sloc::linalg::min_sym_eigenvalue(-cov_mean);
    csv += "pinning," + format_double(eps) + "," + format_double(est.value(n, 0)) + "," +
           format_double(est.std_error(n, 0)) + "," + format_double(eig_max) + "," +
           format_double(cov_se.norm()) + "\n";
  }

  // Gaussian channel over the matched Q grid, tau ~ Unif[1,2].
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const auto q = sloc::linalg::PsdMatrix(
        Eigen::MatrixXd(q_grid[i] * Eigen::MatrixXd::Identity(n, n)));
    sloc::McConfig cfg = base_cfg;
    cfg.seed = root.split(kTagPinning, 2 * i + 1).next_u64();
    const auto mi = sloc::verify::estimate_mutual_information(mu, q, cfg);
    const auto cov_est = sloc::verify::estimate_mixture_cov(mu, q, cfg);
    const double eig_max = -sloc::linalg::min_sym_eigenvalue(-cov_est.value);
    csv += "gaussian," + format_double(q_grid[i]) + "," + format_double(mi.value) + "," +
           format_double(mi.std_error) + "," + format_double(eig_max) + "," +
           format_double(cov_est.std_error.norm()) + "\n";
  }

  sloc::io::write_text_file((out / "pinning_compare.csv").string(), csv);
  std::cout << "[pinning-compare] wrote " << (out / "pinning_compare.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gen-measure

int cmd_gen_measure(const json& spec, const CommandOptions& opt) {
  const std::uint64_t seed = resolve_seed(spec, opt);
  const fs::path out = resolve_out(spec, opt);
  const auto mu = resolve_measure(spec, seed);
  dump_json(out / "measure.json", sloc::io::measure_to_json(mu));
  std::cout << "[gen-measure] wrote " << (out / "measure.json").string() << " (k=" << mu.size()
            << ", n=" << mu.dim() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic localization toolkit"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::string mutate = "none";
  std::string seed_str, out_str;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("spec", opt.spec_path, "experiment spec (JSON)")->required();
    sub->add_option("--seed", seed_str, "override the spec seed");
    sub->add_option("--out", out_str, "output directory (default: spec 'out' field or .)");
    sub->add_option("--threads", opt.threads,
                    "worker threads (default: SLOC_THREADS or hardware)");
    sub->add_option("--mutate", mutate, "testing hook: none|shrink-q|double-drift|mismatch-t")
        ->check(CLI::IsMember({"none", "shrink-q", "double-drift", "mismatch-t"}));
  };

  CLI::App* verify = app.add_subcommand("verify", "run the three-inequality verification suite");
  CLI::App* curve = app.add_subcommand("mmse-curve", "estimate mmse over a t grid, write CSV");
  CLI::App* sde = app.add_subcommand("sde", "simulate localization paths and run diagnostics");
  CLI::App* pinning =
      app.add_subcommand("pinning-compare", "erasure vs Gaussian channel trade-off CSV");
  CLI::App* gen = app.add_subcommand("gen-measure", "generate a measure JSON file");
  for (CLI::App* sub : {verify, curve, sde, pinning, gen}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (mutate == "shrink-q") opt.mutation = Mutation::kShrinkQ;
  else if (mutate == "double-drift") opt.mutation = Mutation::kDoubleDrift;
  else if (mutate == "mismatch-t") opt.mutation = Mutation::kMismatchT;

  try {
    if (!seed_str.empty()) opt.seed = std::stoull(seed_str);
    if (!out_str.empty()) opt.out = out_str;
    const json spec = load_spec(opt.spec_path);
    if (verify->parsed()) return cmd_verify(spec, opt);
    if (curve->parsed()) return cmd_mmse_curve(spec, opt);
    if (sde->parsed()) return cmd_sde(spec, opt);
    if (pinning->parsed()) return cmd_pinning_compare(spec, opt);
    if (gen->parsed()) return cmd_gen_measure(spec, opt);
    return 1;
  } catch (const sloc::Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument&) {
    std::cerr << "error: E_PARSE: --seed must be an unsigned integer\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: E_INTERNAL: " << e.what() << "\n";
    return 1;
  }
}
