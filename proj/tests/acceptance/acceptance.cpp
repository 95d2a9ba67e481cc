// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "superadd/superadd.hpp"

using namespace superadd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %d. %s:%s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.str().c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::vector<WeylParams> regime_grid() {
  std::vector<WeylParams> grid{{2, 0.25, 0.125}};
  for (int d : {2, 3, 5}) {
    for (double pf : {0.0, 0.15, 0.4, 0.8}) {
      const double p = pf / (d * d);
      const double upper = (1.0 - d * (d - 1) * p) / d;
      for (double t : {0.0, 0.5, 1.0}) grid.push_back({d, p + t * (upper - p), p});
    }
  }
  return grid;
}

DensityMatrix max_entangled(int d) {
  ComplexVector omega = ComplexVector::Zero(d * d);
  for (int i = 0; i < d; ++i) omega(i * d + i) = 1.0 / std::sqrt(double(d));
  return DensityMatrix::pure(omega);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SUPERADD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main() {
  criterion(1, "Weyl algebra", [](Outcome& o) {
    double unit = 0, fact = 0, comm = 0, compl_ = 0;
    RandomStream rs(1);
    for (int d : {2, 3, 5}) {
      const complex w = std::polar(1.0, 2 * std::numbers::pi / d);
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) {
          const ComplexMatrix a = weyl_operator(d, m, n);
          unit = std::max(unit, unitarity_defect(a));
          fact = std::max(fact, max_abs_diff(a, weyl_operator(d, m, 0) * weyl_operator(d, 0, n)));
          for (int m2 = 0; m2 < d; ++m2)
            for (int n2 = 0; n2 < d; ++n2) {
              const ComplexMatrix b = weyl_operator(d, m2, n2);
              const complex ph = std::pow(w, double((m2 * n - m * n2) % d + d));
              comm = std::max(comm, max_abs_diff(a * b, ph * b * a));
            }
        }
      for (int t = 0; t < 10; ++t) {
        const DensityMatrix rho = random_density(d, 1 + t % d, rs);
        ComplexMatrix sum = ComplexMatrix::Zero(d, d);
        for (int m = 0; m < d; ++m)
          for (int n = 0; n < d; ++n) sum += weyl_operator(d, m, n) * rho.matrix() * weyl_operator(d, m, n).adjoint();
        compl_ = std::max(compl_, max_abs_diff(sum, double(d) * ComplexMatrix::Identity(d, d)));
      }
    }
    o.detail << " unitarity " << fmt(unit) << ", factorization " << fmt(fact) << ", commutation " << fmt(comm)
             << ", completeness " << fmt(compl_);
    o.require(unit <= 1e-12, "unitarity <= 1e-12");
    o.require(fact <= 1e-12, "factorization <= 1e-12");
    o.require(comm <= 1e-12, "commutation <= 1e-12");
    o.require(compl_ <= 1e-10, "completeness <= 1e-10");
  });

  criterion(2, "channel validity, MUB, shift and covariance", [](Outcome& o) {
    double tp = 0, choi_min = 1, mub = 0, shift = 0, cov = 0;
    int count = 0;
    RandomStream rs(2);
    for (int d : {2, 3, 5}) {
      std::vector<QuantumChannel> chans;
      for (double q : {0.0, 0.25, 0.5, 0.75, 1.0, depolarizing_q_max(d)}) chans.push_back(depolarizing(d, q, {}));
      for (double q : {0.0, 0.25, 0.5, 1.0, qc_q_max(d)}) chans.push_back(qc_channel(d, q));
      for (double l : {0.0, 0.25, 0.5, 1.0}) chans.push_back(phase_damping(d, l));
      chans.push_back(conditional_expectation(d));
      chans.push_back(identity_channel(d));
      std::vector<QuantumChannel> weyls;
      for (const auto& wp : regime_grid())
        if (wp.d == d) weyls.push_back(weyl_channel(wp));
      weyls.push_back(weyl_channel({d, 1.0 / (d - 1), 0.0}));
      weyls.push_back(weyl_channel({d, 0.0, 1.0 / (d * (d - 1))}));
      chans.insert(chans.end(), weyls.begin(), weyls.end());
      for (const auto& ch : chans) {
        tp = std::max(tp, ch.tp_defect());
        choi_min = std::min(choi_min, choi(ch).min_eigenvalue());
        ++count;
      }
      mub = std::max(mub, unbiasedness_defect(fourier_basis(d), computational_basis(d)));
      mub = std::max(mub, family_unbiasedness_defect(mub_family(d)));
      for (int n = 0; n < d; ++n) shift = std::max(shift, shift_defect(d, n));
      const Basis f = fourier_basis(d);
      for (int t = 0; t < 5; ++t) {
        Eigen::VectorXcd ph(d);
        for (int j = 0; j < d; ++j) ph(j) = std::polar(1.0, 2 * std::numbers::pi * rs.uniform());
        const ComplexMatrix u = f.vectors() * ph.asDiagonal() * f.vectors().adjoint();
        for (const auto& ch : weyls) cov = std::max(cov, covariance_defect(ch, u));
      }
    }
    o.detail << " " << count << " channels, TP " << fmt(tp) << ", Choi min " << fmt(choi_min) << ", MUB "
             << fmt(mub) << ", shift " << fmt(shift) << ", covariance " << fmt(cov);
    o.require(tp <= 1e-10, "TP <= 1e-10");
    o.require(choi_min >= -1e-10, "Choi min >= -1e-10");
    o.require(mub <= 1e-12, "MUB <= 1e-12");
    o.require(shift <= 1e-12, "shift <= 1e-12");
    o.require(cov <= 1e-10, "covariance <= 1e-10");
  });

  criterion(3, "dep/qc mixture and phase-damping composition", [](Outcome& o) {
    const auto grid = regime_grid();
    double mix = 0, comp = 0;
    for (const auto& w : grid) {
      const double lambda = lambda_for_params(w);
      const QuantumChannel dep = depolarizing(w.d, w.q_dep(), {});
      const QuantumChannel qc = qc_channel(w.d, w.q_dep());
      const QuantumChannel m = mixture({{lambda, &dep}, {1 - lambda, &qc}});
      const ChoiMatrix j = choi(weyl_channel(w));
      mix = std::max(mix, j.distance(choi(m)));
      comp = std::max(comp, j.distance(choi(compose(phase_damping(w.d, lambda), dep))));
    }
    const double worked = lambda_for_params({2, 0.25, 0.125});
    o.detail << " " << grid.size() << " points, mixture " << fmt(mix) << ", composition " << fmt(comp)
             << ", worked-point lambda " << worked;
    o.require(grid.size() >= 20, ">= 20 grid points");
    o.require(mix <= 1e-10, "mixture <= 1e-10");
    o.require(comp <= 1e-10, "composition <= 1e-10");
    o.require(std::abs(worked - 0.5) <= 1e-12, "lambda = 1/2 at the worked point");
  });

  criterion(4, "minimal output entropy of depolarizing channels", [](Outcome& o) {
    double worst = 0;
    double at_half = 0;
    for (int d : {2, 3}) {
      for (double q : {0.25, 0.5, 0.75, 1.0}) {
        OptimizerConfig cfg;
        cfg.restarts = 8;
        cfg.seed = 400 + d;
        const double chi = estimate_chi(depolarizing(d, q), cfg);
        worst = std::max(worst, std::abs(chi - chi_dep_closed_form(d, q)));
        if (d == 2 && q == 0.5) at_half = chi;
      }
    }
    o.detail << " max |chi - closed form| " << fmt(worst) << ", chi(2, 1/2) = " << at_half;
    o.require(worst <= 1e-4, "within 1e-4");
    o.require(std::abs(at_half - 0.811278) <= 1e-4, "0.811278 at (2, 1/2)");
  });

  criterion(5, "roof of depolarizing channels is constant", [](Outcome& o) {
    double worst = 0;
    int n = 0;
    for (int d : {2, 3}) {
      for (double q : {0.25, 0.5, 0.75, 1.0}) {
        const QuantumChannel dep = depolarizing(d, q, {});
        RandomStream rs = RandomStream::substream(500 + d, static_cast<std::uint64_t>(q * 100));
        for (int t = 0; t < 20; ++t, ++n) {
          const DensityMatrix sigma = random_density(d, 1 + t % d, rs);
          OptimizerConfig cfg;
          cfg.restarts = 8;
          cfg.obj_tol = 1e-8;
          cfg.seed = derive_seed(5, static_cast<std::uint64_t>(n));
          worst = std::max(worst, std::abs(estimate_h_hat(dep, sigma, cfg).value - h_dep_const(d, q)));
        }
      }
    }
    o.detail << " " << n << " states, max deviation " << fmt(worst);
    o.require(worst <= 1e-3, "within 1e-3");
  });

  criterion(6, "MUB entropy lower bound", [](Outcome& o) {
    int violations = 0, runs = 0, products = 0;
    double min_gap = 1e9, product_gap = 0;
    for (int d : {2, 3}) {
      for (double q : {0.25, 0.5, 0.75, 1.0}) {
        for (int dk : {2, 3}) {
          BoundConfig cfg;
          cfg.d = d;
          cfg.q = q;
          cfg.dim_k = dk;
          cfg.samples = 200;
          cfg.seed = 600 + runs++;
          const BoundReport r = verify_mub_bound(cfg);
          violations += r.violations;
          min_gap = std::min(min_gap, r.min_gap);
          for (const auto& s : r.samples) {
            if (s.kind != SampleKind::pure_product) continue;
            ++products;
            product_gap = std::max(product_gap, std::abs(s.gap));
          }
        }
      }
    }
    const BoundSample me = evaluate_bound(max_entangled(2), 0.5, mub_family(2));
    o.detail << " " << runs * 200 << " states, violations " << violations << ", min gap " << fmt(min_gap) << ", "
             << products << " pure products max |gap| " << fmt(product_gap) << ", entangled lhs " << me.lhs
             << " rhs " << me.rhs;
    o.require(violations == 0, "no gap below -1e-9");
    o.require(product_gap <= 1e-9, "pure products |gap| <= 1e-9");
    o.require(std::abs(me.lhs - 1.548795) <= 1e-6, "lhs 1.548795");
    o.require(std::abs(me.rhs - 0.811278) <= 1e-6, "rhs 0.811278");
  });

  criterion(7, "strong superadditivity experiment", [](Outcome& o) {
    const double q = 0.5;
    SuperaddConfig cfg;
    cfg.weyl = {2, q / 4, q / 4};
    cfg.dim_k = 2;
    cfg.samples = 20;
    cfg.opt.restarts = 8;
    cfg.opt.obj_tol = 1e-7;
    cfg.product_probes = 3;
    double min_gap = 1e9, residual = 0;
    int failures_seen = 0, reruns = 0;
    const std::vector<std::pair<std::string, QuantumChannel>> psis = {
        {"id", identity_channel(2)}, {"dep:0.5", depolarizing(2, 0.5)}, {"qc:0.5", qc_channel(2, 0.5)}};
    std::uint64_t seed = 700;
    for (const auto& [label, psi] : psis) {
      cfg.psi_label = label;
      cfg.opt.seed = seed++;
      const SuperaddReport r = superadditivity_experiment(cfg, psi);
      min_gap = std::min(min_gap, r.min_gap);
      residual = std::max(residual, r.product_equality_residual.value_or(1e9));
      failures_seen += r.optimizer_failures;
      reruns += r.reruns;
    }
    // Failure path: an estimator that falls short until given 4x restarts.
    SuperaddConfig fcfg = cfg;
    fcfg.samples = 2;
    fcfg.product_probes = 0;
    int calls_at_4x = 0;
    HhatEstimator shortfall = [&](const QuantumChannel& ch, const DensityMatrix& sigma, const OptimizerConfig& c) {
      if (c.restarts == 4 * cfg.opt.restarts) ++calls_at_4x;
      const double v = estimate_h_hat(ch, sigma, c).value;
      return ch.dim_in() == 4 && c.restarts < 4 * cfg.opt.restarts ? v - 10.0 : v;
    };
    const SuperaddReport fr = superadditivity_experiment(fcfg, identity_channel(2), shortfall);
    o.detail << " 3x20 samples, min gap " << fmt(min_gap) << ", product residual " << fmt(residual) << ", reruns "
             << reruns << "; forced shortfall: reruns " << fr.reruns << ", failures " << fr.optimizer_failures;
    o.require(min_gap >= -2e-3, "gaps >= -2e-3");
    o.require(failures_seen == 0, "no optimizer failures");
    o.require(residual <= 2e-3, "product residual <= 2e-3");
    o.require(fr.reruns == 2 && calls_at_4x == 4 && fr.optimizer_failures == 0, "rerun at 4x restarts exercised");
  });

  criterion(8, "determinism and exit codes", [](Outcome& o) {
    const fs::path dir = fs::temp_directory_path() / "superadd_acceptance";
    fs::create_directories(dir);
    const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string(), c = (dir / "c.json").string();
    const std::string bound = "verify-bound --d 2 --q 0.5 --dimk 2 --samples 200 --seed 42";
    const std::string sup = "superadd --d 2 --r 0.125 --p 0.125 --psi dep:0.5 --samples 2 --product-probe --probes 1 "
                            "--restarts 4 --obj-tol 1e-7 --seed 8";
    const int e1 = run_cli(bound + " --json " + a);
    const int e2 = run_cli(bound + " --json " + b);
    const bool same_bound = slurp(a) == slurp(b) && !slurp(a).empty();
    const int e3 = run_cli(sup + " --json " + a);
    const int e4 = run_cli(sup + " --json " + b);
    const bool same_sup = slurp(a) == slurp(b) && !slurp(a).empty();
    const int e5 = run_cli("replay " + a + " --json " + c);
    const bool same_replay = slurp(a) == slurp(c);
    const int usage_prime = run_cli("verify-bound --d 4");
    const int usage_params = run_cli("channel-show --d 2 --r 0.9 --p 0.4");
    const int usage_psi = run_cli("superadd --psi kraus:/nonexistent");
    const int violated = run_cli("verify-bound --d 2 --samples 20 --tolerance -0.5");
    o.detail << " verify-bound identical " << same_bound << ", superadd identical " << same_sup << ", replay identical "
             << same_replay << "; exits ok " << e1 << e2 << e3 << e4 << e5 << ", usage " << usage_prime
             << usage_params << usage_psi << ", violations " << violated;
    o.require(same_bound && same_sup && same_replay, "byte-identical reports");
    o.require(e1 == 0 && e2 == 0 && e3 == 0 && e4 == 0 && e5 == 0, "exit 0");
    o.require(usage_prime == 1 && usage_params == 1 && usage_psi == 1, "exit 1");
    o.require(violated == 2, "exit 2");
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
