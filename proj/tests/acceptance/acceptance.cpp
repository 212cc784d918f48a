// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lp.hpp"
#include "pm.hpp"
#include "rounding.hpp"
#include "scaling.hpp"
#include "set_distance.hpp"
#include "test_support.hpp"
#include "tot.hpp"

namespace {

using namespace mmtot;
using mmtot::testing::Rng;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Independent iteration bound.
double stop_bound(std::size_t n, double eps, double mass, double eta) {
  const double r = std::sqrt(static_cast<double>(n)) + 1.0;
  return 2.0 * r * r / (eps * eps) * std::log(mass / eta);
}

struct TotInstance {
  std::size_t d, n;
  double delta;
  Tensor cost;
  MarginalFamily p;
};

std::vector<TotInstance> transport_instances() {
  Rng rng(20260101);
  std::vector<TotInstance> out;
  const std::size_t ns[] = {2, 3};
  const std::size_t ds[] = {2, 3, 4};
  const double deltas[] = {0.1, 0.25};
  for (std::size_t k = 0; k < 50; ++k) {
    TotInstance t;
    t.n = ns[k % 2];
    t.d = ds[(k / 2) % 3];
    t.delta = deltas[(k / 6) % 2];
    t.cost = testing::random_tensor(t.d, t.n, rng);
    t.p = testing::random_marginals(t.d, t.n, rng);
    out.push_back(std::move(t));
  }
  return out;
}

Outcome approximation_guarantee() {
  Outcome o;
  double worst_gap = -1e300;
  double slowest = 0.0;
  for (const TotInstance& t : transport_instances()) {
    const auto start = std::chrono::steady_clock::now();
    const ApproxTot approx = approx_tot(t.cost, t.p, t.delta);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double tau = lp::solve_exact_tot(t.cost, t.p).value;
    const double value = inner(t.cost, approx.plan);
    const double gap = value - tau;
    worst_gap = std::max(worst_gap, gap - t.delta);
    slowest = std::max(slowest, seconds);
    if (gap > t.delta || seconds >= 10.0 || testing::brute_marginal_linf(approx.plan, t.p) > 1e-10) {
      o.pass = false;
      o.detail += fmt(" [d=%zu n=%zu delta=%g gap=%.3g time=%.2fs]", t.d, t.n, t.delta, gap, seconds);
    }
  }
  o.detail = fmt("max(gap - delta)=%.3g slowest=%.2fs", worst_gap, slowest) + o.detail;
  return o;
}

struct ScaleRun {
  std::size_t n;
  double epsilon, bound, marginal_l1;
  std::size_t k_stop;
  bool converged;
};

std::vector<ScaleRun> positive_scaling_runs() {
  Rng rng(777);
  std::vector<ScaleRun> runs;
  const double eps[] = {0.05, 0.1};
  for (std::size_t k = 0; k < 50; ++k) {
    const std::size_t n = 2 + k % 3;
    const std::size_t d = 2 + (k / 3) % 3;
    const double e = eps[(k / 9) % 2];
    const Tensor a = testing::random_tensor(d, n, rng, 0.01, 1.0);
    const MarginalFamily p = testing::random_marginals(d, n, rng);
    ScaleRun r{n, e, stop_bound(n, e, l1_norm(a), min_positive(a)), 0.0, 0, false};
    try {
      const ScalingResult res = sinkhorn_scale(a, p, {e, 0, ScalingVariant::kPositive});
      r.k_stop = res.trace.k_stop;
      r.converged = res.trace.converged;
      r.marginal_l1 = testing::brute_marginal_l1(res.scaled, p);
    } catch (const ScalingNonConvergence& err) {
      r.k_stop = err.partial().trace.k_stop;
      r.marginal_l1 = testing::brute_marginal_l1(err.partial().scaled, p);
    }
    runs.push_back(r);
  }
  return runs;
}

Outcome iteration_bound_check(const std::vector<ScaleRun>& runs) {
  Outcome o;
  std::size_t violations = 0;
  double worst = 0.0;
  for (const ScaleRun& r : runs) {
    worst = std::max(worst, static_cast<double>(r.k_stop) / r.bound);
    if (!r.converged || static_cast<double>(r.k_stop) > r.bound) ++violations;
  }
  o.pass = violations == 0;
  o.detail = fmt("violations=%zu/%zu max k_stop/bound=%.3g", violations, runs.size(), worst);
  return o;
}

Outcome stopping_marginal_check(const std::vector<ScaleRun>& runs) {
  Outcome o;
  std::size_t violations = 0;
  double worst = 0.0;
  for (const ScaleRun& r : runs) {
    worst = std::max(worst, r.marginal_l1 / (2.0 * r.epsilon));
    if (!(r.marginal_l1 < 2.0 * r.epsilon)) ++violations;
  }
  o.pass = violations == 0;
  o.detail = fmt("violations=%zu/%zu max ||s_j - p_j||_1 / 2eps=%.3g", violations, runs.size(), worst);
  return o;
}

Outcome rounding_certificate() {
  Outcome o;
  Rng rng(4242);
  double worst_feas = 0.0;
  double worst_slack = -1e300;
  for (std::size_t k = 0; k < 200; ++k) {
    const std::size_t d = 2 + k % 3;
    const std::size_t n = 2 + (k / 3) % 4;
    const MarginalFamily p = testing::random_marginals(d, n, rng);
    // A feasible plan with every entry multiplicatively perturbed, so the
    // marginals r_j of F are close to but not equal to p_j.
    Tensor f = testing::northwest_corner_plan(p, rng);
    for (double& x : f.values()) x = (x + 1e-3) * rng.uniform(0.8, 1.2);
    const Tensor b = round_to_polytope(f, p);
    double budget = 0.0;
    for (std::size_t j = 0; j < d; ++j) budget += testing::brute_l1(p[j], testing::brute_marginal(f, j));
    const double moved = testing::brute_l1(b.raw(), f.raw());
    const double feas = testing::brute_marginal_linf(b, p);
    worst_feas = std::max(worst_feas, feas);
    worst_slack = std::max(worst_slack, moved - 2.0 * budget);
    bool nonneg = true;
    for (double x : b.values()) nonneg = nonneg && x >= 0.0;
    if (feas > 1e-10 || moved > 2.0 * budget + 1e-10 || !nonneg) o.pass = false;
  }
  o.detail = fmt("max marginal error=%.3g max(||B-F||_1 - 2 sum||p_j - r_j||_1)=%.3g", worst_feas,
                 worst_slack);
  return o;
}

Outcome entropic_bracket_check() {
  Outcome o;
  const double lambdas[] = {5.0, 20.0, 80.0};
  const double eps = 0.01;
  std::size_t misses = 0;
  std::size_t non_monotone = 0;
  double worst = -1e300;
  for (const TotInstance& t : transport_instances()) {
    const double tau = lp::solve_exact_tot(t.cost, t.p).value;
    const double slack = 8.0 * static_cast<double>(t.d) * max_abs(t.cost) * eps;
    double last_width = 1e300;
    for (double lambda : lambdas) {
      const EntropicSolution sol = entropic_tot(t.cost, t.p, lambda, eps);
      const double lo = sol.value - slack;
      const double hi = sol.value + static_cast<double>(t.d) * std::log(static_cast<double>(t.n)) / lambda + slack;
      worst = std::max({worst, lo - tau, tau - hi});
      if (tau < lo || tau > hi) ++misses;
      if (!(hi - lo < last_width)) ++non_monotone;
      last_width = hi - lo;
    }
  }
  o.pass = misses == 0 && non_monotone == 0;
  o.detail = fmt("misses=%zu non-monotone widths=%zu max outside distance=%.3g", misses,
                 non_monotone, worst);
  return o;
}

Outcome closed_form_entropic() {
  Outcome o;
  const Tensor c(2, 2, {0.0, 1.0, 1.0, 0.0});
  const MarginalFamily p({{0.5, 0.5}, {0.5, 0.5}});
  double worst = 0.0;
  for (double lambda : {1.0, 5.0, 10.0}) {
    const EntropicSolution sol = entropic_tot(c, p, lambda, 0.01);
    const double expected = std::exp(-lambda) / (1.0 + std::exp(-lambda));
    const double err = std::abs(inner(c, sol.plan) - expected);
    worst = std::max(worst, err);
    if (err > 1e-9) o.pass = false;
  }
  o.detail = fmt("max |<C,U> - e^-l/(1+e^-l)|=%.3g", worst);
  return o;
}

Outcome metric_axioms() {
  Outcome o;
  Rng rng(99);
  const std::size_t n = 3;
  // Ground metric from random points in the plane.
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(rng.uniform(), rng.uniform());
  Eigen::MatrixXd g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      g(i, j) = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
    }
  }
  const Tensor c = lift_ground_metric(g, 4, LiftMode::kMatching);
  auto list = [&] {
    return std::vector<Vector>{testing::random_probability(n, rng), testing::random_probability(n, rng)};
  };
  auto dist = [&](const std::vector<Vector>& a, const std::vector<Vector>& b) {
    return set_distance(c, a, b).distance;
  };
  double worst_self = 0.0;
  double min_pos = 1e300;
  double worst_tri = -1e300;
  for (std::size_t k = 0; k < 20; ++k) {
    const auto a = list();
    const auto b = list();
    worst_self = std::max(worst_self, std::abs(dist(a, a)));
    min_pos = std::min(min_pos, dist(a, b));
  }
  for (std::size_t k = 0; k < 50; ++k) {
    const auto a = list();
    const auto b = list();
    const auto e = list();
    worst_tri = std::max(worst_tri, dist(a, e) - dist(a, b) - dist(b, e));
  }
  o.pass = worst_self <= 1e-9 && min_pos > 0.0 && worst_tri <= 1e-8;
  o.detail = fmt("max self=%.3g min positive=%.3g max triangle excess=%.3g", worst_self, min_pos, worst_tri);
  return o;
}

Outcome telescoping_identity() {
  Outcome o;
  Rng rng(31337);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t k = 0; k < 12; ++k) {
    const std::size_t d = 2 + k % 3;
    const std::size_t n = 2 + (k / 3) % 3;
    const Tensor a = testing::random_tensor(d, n, rng, 0.05, 1.0);
    const MarginalFamily p = testing::random_marginals(d, n, rng);
    const Tensor a0 = scaled(a, 1.0 / l1_norm(a));
    // g_A and KL recomputed from the observed iterates, not from the trace.
    std::vector<double> g;
    std::vector<double> kl;
    std::vector<std::size_t> modes;
    auto observe = [&](std::size_t, const Tensor& it, const ScalingVectors& x) {
      double gv = 0.0;
      for (double v : it.values()) gv += v;
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) gv -= p[j][i] * x[j][i];
      }
      g.push_back(gv);
      std::vector<double> per_mode;
      for (std::size_t j = 0; j < d; ++j) per_mode.push_back(testing::brute_kl(p[j], testing::brute_marginal(it, j)));
      kl.insert(kl.end(), per_mode.begin(), per_mode.end());
    };
    const ScalingResult res = sinkhorn_scale(a0, p, {0.01, 0, ScalingVariant::kPositive}, observe);
    for (const TraceRecord& r : res.trace.records) modes.push_back(r.mode);
    for (std::size_t i = 1; i + 1 < g.size() && i < modes.size(); ++i) {
      const double err = std::abs((g[i] - g[i + 1]) - kl[i * d + modes[i]]);
      worst = std::max(worst, err);
      ++checked;
    }
  }
  o.pass = worst <= 1e-8 && checked > 0;
  o.detail = fmt("steps=%zu max |g_k - g_k+1 - KL|=%.3g", checked, worst);
  return o;
}

Outcome projection_inequalities() {
  Outcome o;
  Rng rng(5150);
  std::size_t violations = 0;
  for (std::size_t k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + k % 7;
    const Vector p = testing::random_simplex(n, rng);
    const Vector q = testing::random_simplex(n, rng);
    if (!pm::projection_kl_bounds(p, q).violations.empty()) ++violations;
  }
  // Extremal pair for n = 4: p = (1/2, 1/6, 1/6, 1/6), q = e_1.
  const Vector p{0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
  const Vector q{1.0, 0.0, 0.0, 0.0};
  const pm::ProjectionBounds ext = pm::projection_kl_bounds(p, q);
  const double target = (std::sqrt(4.0) + 1.0) / 2.0;
  const double err = std::abs(ext.s - target);
  o.pass = violations == 0 && err <= 1e-12 && ext.violations.empty();
  o.detail = fmt("violations=%zu/1000 extremal |s - 3/2|=%.3g", violations, err);
  return o;
}

Outcome nonnegative_variant() {
  Outcome o;
  Rng rng(8080);
  std::size_t fails = 0;
  double worst_marg = 0.0;
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    const std::size_t d = 2 + k % 3;
    const std::size_t n = 2 + (k / 3) % 3;
    const double eps = k % 2 == 0 ? 0.05 : 0.1;
    const MarginalFamily p = testing::random_marginals(d, n, rng);
    const Tensor u = lp::solve_exact_tot(testing::random_tensor(d, n, rng), p).plan;
    Tensor a(d, n);
    for (std::size_t f = 0; f < a.size(); ++f) a[f] = u[f] > 1e-12 ? rng.uniform(0.05, 1.0) : 0.0;
    const double bound = stop_bound(n, eps, l1_norm(a), min_positive(a));
    try {
      const ScalingResult res = sinkhorn_scale(a, p, {eps, 0, ScalingVariant::kNonnegativeSupport});
      const double marg = testing::brute_marginal_l1(res.scaled, p);
      worst_marg = std::max(worst_marg, marg / (2.0 * eps));
      worst_ratio = std::max(worst_ratio, static_cast<double>(res.trace.k_stop) / bound);
      if (!(marg < 2.0 * eps) || static_cast<double>(res.trace.k_stop) > bound) ++fails;
    } catch (const Error& e) {
      ++fails;
      o.detail += std::string(" [") + e.what() + "]";
    }
  }
  o.pass = fails == 0;
  o.detail = fmt("failures=%zu/20 max ||s_j - p_j||_1 / 2eps=%.3g max k_stop/bound=%.3g", fails,
                 worst_marg, worst_ratio) + o.detail;
  return o;
}

Outcome pm_rate_bound() {
  Outcome o;
  Rng rng(2718);
  std::size_t violations = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    const std::size_t d = 2 + k % 3;
    const std::size_t n = 2 + (k / 3) % 2;
    const Tensor a = testing::random_tensor(d, n, rng, 0.1, 1.0);
    const MarginalFamily p = testing::random_marginals(d, n, rng);
    pm::PmProblem prob = pm::g_problem(a, p);
    prob.keep_iterates = true;
    const pm::PmResult res = pm::pm_minimize(prob);
    std::vector<double> f;
    for (const pm::PmStep& s : res.trace) f.push_back(s.f);
    const double f_star = f.back();
    const Eigen::MatrixXd basis = pm::marginal_orthogonal_basis(p);
    const double kappa =
        pm::sublevel_condition_number(a, p, res.x, f.front(), basis, res.iterates, 24, 1000 + k);
    const pm::RateReport rep = pm::rate_bound(f, {1.0, kappa, n, 1.0}, d, f_star);
    worst = std::max(worst, rep.worst_ratio);
    if (rep.first_violation) ++violations;
  }
  o.pass = violations == 0;
  o.detail = fmt("violations=%zu/20 max (f_k - f*)/bound_k=%.3g", violations, worst);
  return o;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<ScaleRun> runs = positive_scaling_runs();
  const std::vector<Entry> criteria = {
      {"delta-approximation guarantee", approximation_guarantee},
      {"scaling iteration bound", [&] { return iteration_bound_check(runs); }},
      {"marginal error at stop below 2 eps", [&] { return stopping_marginal_check(runs); }},
      {"rounding certificate", rounding_certificate},
      {"entropic bracket contains the LP value", entropic_bracket_check},
      {"closed-form entropic 2x2 cost", closed_form_entropic},
      {"metric axioms of the set distance", metric_axioms},
      {"telescoping g decrease equals KL", telescoping_identity},
      {"projection and KL inequalities", projection_inequalities},
      {"nonnegative-support scaling", nonnegative_variant},
      {"block minimization rate bound", pm_rate_bound},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("criterion %2zu: %s  %s  (%s)\n", i + 1, out.pass ? "PASS" : "FAIL", criteria[i].name,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
