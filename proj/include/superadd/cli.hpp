#pragma once

// Command-line front end. Kept header-only so tests can drive run_cli in
// process; tools/superadd_cli.cpp is a thin main around it.
//
// Exit codes: 0 success without violations, 1 usage or validation error,
// 2 the experiment ran and found violations.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "superadd/bounds_lab.hpp"
#include "superadd/ensemble_opt.hpp"
#include "superadd/kraus_io.hpp"
#include "superadd/parallel.hpp"
#include "superadd/weyl_channels.hpp"

#ifndef SUPERADD_VERSION
#define SUPERADD_VERSION "0.1.0"
#endif

namespace superadd::cli {

using json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolations = 2;

/// Rounds to 12 significant digits so the serialized form is stable and short.
inline json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // no "-0.0"
}

struct RunConfig {
  std::string command;
  int d = 2;
  double r = 0.0;
  double p = 0.0;
  double q = 0.5;
  double lambda = 1.0;
  std::string channel = "dep";
  std::string psi = "id";
  std::string state = "random";
  int dim_k = 2;
  int samples = 0;  // 0 = command default
  int restarts = 32;
  std::optional<int> k;
  int max_iters = 500;
  double obj_tol = 1e-9;
  std::uint64_t seed = 0;
  std::optional<double> tolerance;
  int threads = 1;
  bool product_probe = false;
  int probes = 3;
  bool timing = false;
  std::string json_path;
  std::string csv_path;
};

inline json echo(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["d"] = c.d;
  if (c.command == "channel-show") {
    j["r"] = num(c.r);
    j["p"] = num(c.p);
    j["qDep"] = num(static_cast<double>(c.d) * c.d * c.p);
  } else if (c.command == "verify-bound") {
    j["q"] = num(c.q);
    j["dimK"] = c.dim_k;
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["tolerance"] = num(c.tolerance.value_or(tol::kBoundViolation));
    j["threads"] = c.threads;
  } else {
    if (c.command == "hhat") {
      j["channel"] = c.channel;
      j["q"] = num(c.q);
      j["r"] = num(c.r);
      j["p"] = num(c.p);
      j["lambda"] = num(c.lambda);
      j["state"] = c.state;
    } else {
      j["r"] = num(c.r);
      j["p"] = num(c.p);
      j["qDep"] = num(static_cast<double>(c.d) * c.d * c.p);
      j["psi"] = c.psi;
      j["dimK"] = c.dim_k;
      j["samples"] = c.samples;
      j["tolerance"] = num(c.tolerance.value_or(tol::kSuperaddGap));
      j["productProbe"] = c.product_probe;
      j["probes"] = c.probes;
    }
    j["restarts"] = c.restarts;
    j["k"] = c.k ? json(*c.k) : json("auto");
    j["maxIters"] = c.max_iters;
    j["objTol"] = num(c.obj_tol);
    j["seed"] = c.seed;
    j["threads"] = c.threads;
  }
  return j;
}

/// Inverse of echo(); used by `replay`.
inline RunConfig config_from_echo(const json& j) {
  RunConfig c;
  c.command = j.at("command").get<std::string>();
  c.d = j.at("d").get<int>();
  auto opt_num = [&](const char* key, double& dst) {
    if (j.contains(key) && j[key].is_number()) dst = j[key].get<double>();
  };
  opt_num("r", c.r);
  opt_num("p", c.p);
  opt_num("q", c.q);
  opt_num("lambda", c.lambda);
  opt_num("objTol", c.obj_tol);
  if (j.contains("tolerance")) c.tolerance = j["tolerance"].get<double>();
  if (j.contains("channel")) c.channel = j["channel"].get<std::string>();
  if (j.contains("psi")) c.psi = j["psi"].get<std::string>();
  if (j.contains("state")) c.state = j["state"].get<std::string>();
  if (j.contains("dimK")) c.dim_k = j["dimK"].get<int>();
  if (j.contains("samples")) c.samples = j["samples"].get<int>();
  if (j.contains("restarts")) c.restarts = j["restarts"].get<int>();
  if (j.contains("k") && j["k"].is_number()) c.k = j["k"].get<int>();
  if (j.contains("maxIters")) c.max_iters = j["maxIters"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j["threads"].get<int>();
  if (j.contains("productProbe")) c.product_probe = j["productProbe"].get<bool>();
  if (j.contains("probes")) c.probes = j["probes"].get<int>();
  return c;
}

struct CommandResult {
  json rows = json::array();
  json summary = json::object();
  int exit_code = kExitOk;
  std::string csv;  // written when csv_path is set
};

inline OptimizerConfig optimizer_config(const RunConfig& c, std::uint64_t seed) {
  OptimizerConfig o;
  o.k = c.k;
  o.restarts = c.restarts;
  o.max_iters = c.max_iters;
  o.obj_tol = c.obj_tol;
  o.seed = seed;
  o.threads = c.threads;
  validate(o);
  return o;
}

inline CommandResult cmd_channel_show(const RunConfig& c) {
  const WeylParams w{c.d, c.r, c.p};
  const QuantumChannel ch = weyl_channel(w);
  CommandResult res;
  json row;
  json weights = json::array();
  for (int m = 0; m < c.d; ++m) {
    for (int n = 0; n < c.d; ++n) {
      double weight = 0.0;
      if (m == 0 && n == 0) weight = w.identity_weight();
      else if (n == 0) weight = w.r;
      else weight = w.p;
      weights.push_back(json{{"m", m}, {"n", n}, {"weight", num(weight)}});
    }
  }
  row["krausWeights"] = weights;
  row["krausCount"] = ch.kraus().size();
  const ChoiMatrix j = choi(ch);
  row["choiMinEigenvalue"] = num(j.min_eigenvalue());
  row["tpDefect"] = num(ch.tp_defect());
  row["bistochasticDefect"] =
      num(max_abs_diff(ch.apply(DensityMatrix::maximally_mixed(c.d).matrix()),
                       DensityMatrix::maximally_mixed(c.d).matrix()));
  if (in_mixture_regime(w)) {
    const double lambda = lambda_for_params(w);
    const double q_dep = w.q_dep();
    const QuantumChannel dep = depolarizing(c.d, q_dep, {});
    const QuantumChannel qc = qc_channel(c.d, q_dep);
    const QuantumChannel mix = mixture({{lambda, &dep}, {1.0 - lambda, &qc}});
    row["lambda"] = num(lambda);
    row["mixtureResidual"] = num(j.distance(choi(mix)));
    row["compositionResidual"] = num(j.distance(choi(compose(phase_damping(c.d, lambda), dep))));
  } else {
    row["lambda"] = "outside regime";
    row["mixtureResidual"] = nullptr;
    row["compositionResidual"] = nullptr;
  }
  res.rows.push_back(row);
  res.summary["minGap"] = nullptr;
  res.summary["violations"] = 0;
  return res;
}

inline CommandResult cmd_verify_bound(const RunConfig& c) {
  BoundConfig b;
  b.d = c.d;
  b.q = c.q;
  b.dim_k = c.dim_k;
  b.samples = c.samples;
  b.seed = c.seed;
  b.tolerance = c.tolerance.value_or(tol::kBoundViolation);
  b.threads = c.threads;
  const BoundReport rep = verify_mub_bound(b);
  CommandResult res;
  res.csv = "sample,lhs,rhs,gap\n";
  for (const auto& s : rep.samples) {
    res.rows.push_back(json{{"sample", s.index}, {"kind", to_string(s.kind)}, {"lhs", num(s.lhs)},
                            {"rhs", num(s.rhs)}, {"gap", num(s.gap)}});
    char line[160];
    std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g\n", s.index, s.lhs, s.rhs, s.gap);
    res.csv += line;
  }
  res.summary["minGap"] = num(rep.min_gap);
  res.summary["violations"] = rep.violations;
  res.exit_code = rep.violations == 0 ? kExitOk : kExitViolations;
  return res;
}

inline QuantumChannel hhat_channel(const RunConfig& c) {
  if (c.channel == "dep") return depolarizing(c.d, c.q);
  if (c.channel == "qc") return qc_channel(c.d, c.q);
  if (c.channel == "id") return identity_channel(c.d);
  if (c.channel == "phase") return phase_damping(c.d, c.lambda);
  if (c.channel == "weyl") return weyl_channel({c.d, c.r, c.p});
  if (c.channel == "ce") return conditional_expectation(c.d);
  return parse_channel_spec(c.channel, c.d);
}

inline DensityMatrix hhat_state(const RunConfig& c, int dim) {
  RandomStream stream(c.seed);
  if (c.state == "random") return random_density(dim, dim, stream);
  if (c.state == "pure") return random_pure_state(dim, stream);
  if (c.state == "maxmixed") return DensityMatrix::maximally_mixed(dim);
  throw invalid_input("unknown --state '" + c.state + "' (expected random, pure or maxmixed)");
}

inline CommandResult cmd_hhat(const RunConfig& c) {
  const QuantumChannel ch = hhat_channel(c);
  const DensityMatrix sigma = hhat_state(c, ch.dim_in());
  const HhatEstimate est = estimate_h_hat(ch, sigma, optimizer_config(c, derive_seed(c.seed, 1)));
  CommandResult res;
  json row;
  row["value"] = num(est.value);
  row["singletonValue"] = num(est.singleton_value);
  row["rank"] = numerical_rank(sigma);
  row["ensembleSize"] = est.best_ensemble.size();
  row["iterations"] = est.iterations;
  json restarts = json::array();
  for (double v : est.restart_values) restarts.push_back(num(v));
  row["restartValues"] = restarts;
  if (c.channel == "dep") row["closedForm"] = num(h_dep_const(c.d, c.q));
  res.rows.push_back(row);
  res.summary["minGap"] = nullptr;
  res.summary["violations"] = 0;
  return res;
}

inline CommandResult cmd_superadd(const RunConfig& c) {
  SuperaddConfig s;
  s.weyl = {c.d, c.r, c.p};
  s.psi_label = c.psi;
  s.dim_k = c.dim_k;
  s.samples = c.samples;
  s.opt = optimizer_config(c, c.seed);
  s.gap_tolerance = c.tolerance.value_or(tol::kSuperaddGap);
  s.product_probes = c.product_probe ? c.probes : 0;
  s.threads = c.threads;
  const QuantumChannel psi = parse_channel_spec(c.psi, c.dim_k);
  if (psi.dim_in() != c.dim_k) throw invalid_input("--psi channel input dimension does not match --dimk");
  const SuperaddReport rep = superadditivity_experiment(s, psi);
  CommandResult res;
  res.csv = "sample,lhsEstimate,rhsConstant,rhsHhatPsi,gap\n";
  for (const auto& x : rep.samples) {
    res.rows.push_back(json{{"sample", x.index},
                            {"kind", to_string(x.kind)},
                            {"lhsEstimate", num(x.lhs_estimate)},
                            {"rhsConstant", num(x.rhs_constant)},
                            {"rhsHhatPsi", num(x.rhs_hhat_psi)},
                            {"gap", num(x.gap)},
                            {"rerun", x.rerun},
                            {"optimizerFailure", x.optimizer_failure}});
    char line[200];
    std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g,%.12g\n", x.index, x.lhs_estimate, x.rhs_constant,
                  x.rhs_hhat_psi, x.gap);
    res.csv += line;
  }
  int violations = rep.optimizer_failures;
  const bool residual_breach =
      rep.product_equality_residual && *rep.product_equality_residual > s.gap_tolerance;
  if (residual_breach) ++violations;
  res.summary["minGap"] = rep.samples.empty() ? json(nullptr) : num(rep.min_gap);
  res.summary["violations"] = violations;
  res.summary["p"] = num(c.p);
  res.summary["qDep"] = num(rep.q_dep);
  res.summary["reruns"] = rep.reruns;
  res.summary["optimizerFailures"] = rep.optimizer_failures;
  res.summary["productEqualityResidual"] =
      rep.product_equality_residual ? num(*rep.product_equality_residual) : json(nullptr);
  res.exit_code = violations == 0 ? kExitOk : kExitViolations;
  return res;
}

inline CommandResult dispatch(const RunConfig& c) {
  if (c.command == "channel-show") return cmd_channel_show(c);
  if (c.command == "verify-bound") return cmd_verify_bound(c);
  if (c.command == "hhat") return cmd_hhat(c);
  if (c.command == "superadd") return cmd_superadd(c);
  throw invalid_input("unknown command '" + c.command + "'");
}

/// Runs one configured command and writes its JSON (and CSV) outputs.
inline int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    CommandResult res = dispatch(c);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.summary["runtimeSeconds"] = c.timing ? num(seconds) : json(nullptr);
    json report;
    report["toolVersion"] = SUPERADD_VERSION;
    report["configEcho"] = echo(c);
    report["resultRows"] = std::move(res.rows);
    report["summary"] = std::move(res.summary);
    const std::string text = report.dump(2) + "\n";
    if (c.json_path.empty()) {
      out << text;
    } else {
      std::ofstream f(c.json_path, std::ios::binary);
      if (!f) throw invalid_input("cannot write JSON report to '" + c.json_path + "'");
      f << text;
    }
    if (!c.csv_path.empty()) {
      if (res.csv.empty()) throw invalid_input("--csv is not supported by '" + c.command + "'");
      std::ofstream f(c.csv_path, std::ios::binary);
      if (!f) throw invalid_input("cannot write CSV to '" + c.csv_path + "'");
      f << res.csv;
    }
    return res.exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Weyl channel entropy-bound toolkit", "superadd"};
  app.set_version_flag("--version", SUPERADD_VERSION);
  app.require_subcommand(1);

  RunConfig c;
  c.threads = default_thread_count(1);
  std::string replay_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--d", c.d, "Dimension of H");
    sub->add_option("--json", c.json_path, "Write the JSON report here instead of stdout");
    sub->add_flag("--timing", c.timing, "Record runtimeSeconds in the summary (breaks byte-stability)");
  };
  auto add_optimizer = [&](CLI::App* sub) {
    sub->add_option("--restarts", c.restarts, "Optimizer restarts")->check(CLI::PositiveNumber);
    sub->add_option("--k", c.k, "Ensemble size (default rank^2)")->check(CLI::PositiveNumber);
    sub->add_option("--max-iters", c.max_iters, "Sweeps per restart")->check(CLI::PositiveNumber);
    sub->add_option("--obj-tol", c.obj_tol, "Stop when a sweep improves less than this")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* show = app.add_subcommand("channel-show", "Inspect a Weyl channel and its dep/qc decomposition");
  add_common(show);
  show->add_option("--r", c.r, "Weight of W_{m,0}, m >= 1");
  show->add_option("--p", c.p, "Weight of W_{m,n}, n >= 1");

  auto* bound = app.add_subcommand("verify-bound", "Check the MUB entropy lower bound on random states");
  add_common(bound);
  bound->add_option("--q", c.q, "Depolarizing parameter");
  bound->add_option("--dimk", c.dim_k, "Dimension of K")->check(CLI::PositiveNumber);
  bound->add_option("--samples", c.samples, "Number of random states")->check(CLI::PositiveNumber);
  bound->add_option("--seed", c.seed, "Random seed");
  bound->add_option("--tolerance", c.tolerance, "Gap below -tolerance counts as a violation");
  bound->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  bound->add_option("--csv", c.csv_path, "Write sample,lhs,rhs,gap rows here");

  auto* hhat = app.add_subcommand("hhat", "Estimate the output-entropy roof of a channel at a state");
  add_common(hhat);
  add_optimizer(hhat);
  hhat->add_option("--channel", c.channel, "dep | qc | id | phase | weyl | ce, or a channel spec");
  hhat->add_option("--q", c.q, "Depolarizing / q-c parameter");
  hhat->add_option("--r", c.r, "Weyl r");
  hhat->add_option("--p", c.p, "Weyl p");
  hhat->add_option("--lambda", c.lambda, "Phase damping parameter");
  hhat->add_option("--state", c.state, "random | pure | maxmixed");

  auto* sup = app.add_subcommand("superadd", "Run the strong-superadditivity experiment");
  add_common(sup);
  add_optimizer(sup);
  sup->add_option("--r", c.r, "Weyl r");
  sup->add_option("--p", c.p, "Weyl p");
  sup->add_option("--psi", c.psi, "dep:<q> | qc:<q> | id | kraus:<path>");
  sup->add_option("--dimk", c.dim_k, "Dimension of K")->check(CLI::PositiveNumber);
  sup->add_option("--samples", c.samples, "Number of random states")->check(CLI::NonNegativeNumber);
  sup->add_option("--tolerance", c.tolerance, "Gap below -tolerance triggers a rerun");
  sup->add_flag("--product-probe", c.product_probe, "Also measure the product-state equality residual");
  sup->add_option("--probes", c.probes, "Product states used by --product-probe")->check(CLI::PositiveNumber);
  sup->add_option("--csv", c.csv_path, "Write per-sample rows here");

  auto* replay = app.add_subcommand("replay", "Rerun the configuration echoed in a JSON report");
  replay->add_option("report", replay_path, "JSON report")->required();
  replay->add_option("--json", c.json_path, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (replay->parsed()) {
    try {
      std::ifstream in(replay_path);
      if (!in) throw invalid_input("cannot open report '" + replay_path + "'");
      const json report = json::parse(in);
      RunConfig rc = config_from_echo(report.at("configEcho"));
      rc.json_path = c.json_path;
      return execute(rc, out, err);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
  }

  c.command = app.get_subcommands().front()->get_name();
  if (c.samples == 0) c.samples = c.command == "verify-bound" ? 200 : 20;
  return execute(c, out, err);
}

}  // namespace superadd::cli
