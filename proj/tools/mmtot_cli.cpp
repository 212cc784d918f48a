// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Each subcommand reads JSON inputs, calls the C API,
// and prints one JSON object on stdout.
//
// Exit codes: 0 success, 1 unreadable or malformed input file, 2 contract or
// argument violation (including bad flags), 3 non-convergence, 4 internal.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmtot/mmtot.h"

namespace {

using Json = nlohmann::ordered_json;

struct TensorDeleter {
  void operator()(mmtot_tensor* t) const { mmtot_tensor_free(t); }
};
struct MarginalsDeleter {
  void operator()(mmtot_marginals* p) const { mmtot_marginals_free(p); }
};
struct ScaleDeleter {
  void operator()(mmtot_scale_result* r) const { mmtot_scale_result_free(r); }
};
using TensorPtr = std::unique_ptr<mmtot_tensor, TensorDeleter>;
using MarginalsPtr = std::unique_ptr<mmtot_marginals, MarginalsDeleter>;
using ScalePtr = std::unique_ptr<mmtot_scale_result, ScaleDeleter>;

// Carries a failed status out of a subcommand.
struct Failure {
  mmtot_status status;
  std::string message;
};

void check(mmtot_status s) {
  if (s != MMTOT_OK) throw Failure{s, mmtot_last_error()};
}

int exit_code(mmtot_status s) {
  switch (s) {
    case MMTOT_OK: return 0;
    case MMTOT_ERR_FORMAT: return 1;
    case MMTOT_ERR_NON_CONVERGENCE: return 3;
    case MMTOT_ERR_INTERNAL: return 4;
    default: return 2;
  }
}

TensorPtr read_tensor(const std::string& path) {
  mmtot_tensor* t = nullptr;
  check(mmtot_tensor_read_json(path.c_str(), &t));
  return TensorPtr(t);
}

MarginalsPtr read_marginals(const std::string& path) {
  mmtot_marginals* p = nullptr;
  check(mmtot_marginals_read_json(path.c_str(), &p));
  return MarginalsPtr(p);
}

void write_plan(mmtot_tensor* plan, const std::string& path, Json& out, const char* key) {
  if (path.empty()) return;
  check(mmtot_tensor_write_json(plan, path.c_str()));
  out[key] = path;
}

const char* trace_or_null(const std::string& path) { return path.empty() ? nullptr : path.c_str(); }

// Largest |s_j(T)_i - p_{i,j}| over all modes and indices.
double max_violation(const mmtot_tensor* t, const mmtot_marginals* p) {
  const std::size_t n = mmtot_tensor_side(t);
  double worst = 0.0;
  std::vector<double> s(n);
  for (std::size_t mode = 0; mode < mmtot_marginals_count(p); ++mode) {
    check(mmtot_tensor_marginal(t, mode, s.data()));
    const double* target = mmtot_marginals_vector(p, mode);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(s[i] - target[i]));
  }
  return worst;
}

struct Options {
  std::string cost, marginals, tensor, left, right, plan_out, trace;
  double lambda = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t max_iter = 0;
  bool nonnegative = false;
  std::string solver = "exact";
};

Json run_solve_exact(const Options& o) {
  TensorPtr c = read_tensor(o.cost);
  MarginalsPtr p = read_marginals(o.marginals);
  double value = 0.0;
  mmtot_tensor* plan = nullptr;
  check(mmtot_solve_exact(c.get(), p.get(), &value, &plan));
  TensorPtr owned(plan);
  Json out;
  out["value"] = value;
  write_plan(plan, o.plan_out, out, "plan_file");
  return out;
}

Json run_solve_entropic(const Options& o) {
  TensorPtr c = read_tensor(o.cost);
  MarginalsPtr p = read_marginals(o.marginals);
  double value = 0.0;
  double transport = 0.0;
  mmtot_tensor* plan = nullptr;
  check(mmtot_entropic_tot(c.get(), p.get(), o.lambda, o.epsilon, &value, &transport, &plan,
                           trace_or_null(o.trace)));
  TensorPtr owned(plan);
  double lo = 0.0;
  double hi = 0.0;
  check(mmtot_entropic_bracket(value, o.lambda, mmtot_tensor_side(c.get()),
                               mmtot_tensor_order(c.get()), &lo, &hi));
  Json out;
  out["value"] = value;
  out["transport_cost"] = transport;
  out["bracket"] = {lo, hi};
  out["lambda"] = o.lambda;
  out["epsilon"] = o.epsilon;
  write_plan(plan, o.plan_out, out, "plan_file");
  return out;
}

Json run_approx(const Options& o) {
  TensorPtr c = read_tensor(o.cost);
  MarginalsPtr p = read_marginals(o.marginals);
  mmtot_certificate cert{};
  mmtot_tensor* plan = nullptr;
  check(mmtot_approx_tot(c.get(), p.get(), o.delta, o.lambda, o.epsilon, &cert, &plan,
                         trace_or_null(o.trace)));
  TensorPtr owned(plan);
  Json out;
  out["value"] = cert.value;
  out["bracket"] = {cert.lower, cert.upper};
  out["delta"] = cert.delta;
  out["lambda"] = cert.lambda;
  out["epsilon"] = cert.epsilon;
  out["k_stop"] = cert.k_stop;
  out["movement_l1"] = cert.movement_l1;
  out["error_budget"] = cert.error_budget;
  out["entropic_value"] = cert.entropic_value;
  out["entropic_bracket"] = {cert.entropic_lower, cert.entropic_upper};
  out["exact"] = cert.exact != 0;
  write_plan(plan, o.plan_out, out, "plan_file");
  return out;
}

Json run_scale(const Options& o) {
  TensorPtr a = read_tensor(o.tensor);
  MarginalsPtr p = read_marginals(o.marginals);
  mmtot_scale_options opt{o.epsilon, o.max_iter, o.nonnegative ? 1 : 0};
  mmtot_scale_result* raw = nullptr;
  const mmtot_status s = mmtot_scale(a.get(), p.get(), &opt, &raw);
  const std::string message = s == MMTOT_OK ? "" : mmtot_last_error();
  ScalePtr r(raw);
  if (r && !o.trace.empty()) check(mmtot_scale_result_write_trace(r.get(), o.trace.c_str()));
  if (s != MMTOT_OK) throw Failure{s, message};
  Json out;
  out["k_stop"] = mmtot_scale_result_k_stop(r.get());
  out["bound"] = mmtot_scale_result_bound(r.get());
  out["converged"] = mmtot_scale_result_converged(r.get()) != 0;
  out["max_marginal_violation"] =
      max_violation(mmtot_scale_result_tensor(r.get()), p.get());
  const std::size_t dn = mmtot_tensor_order(a.get()) * mmtot_tensor_side(a.get());
  std::vector<double> x(dn);
  check(mmtot_scale_result_exponents(r.get(), x.data()));
  out["exponents"] = x;
  if (!o.plan_out.empty()) {
    check(mmtot_tensor_write_json(mmtot_scale_result_tensor(r.get()), o.plan_out.c_str()));
    out["tensor_file"] = o.plan_out;
  }
  return out;
}

Json run_round(const Options& o) {
  TensorPtr f = read_tensor(o.tensor);
  MarginalsPtr p = read_marginals(o.marginals);
  mmtot_tensor* b = nullptr;
  check(mmtot_round(f.get(), p.get(), &b));
  TensorPtr owned(b);
  const double* fb = mmtot_tensor_data(f.get());
  const double* bb = mmtot_tensor_data(b);
  double moved = 0.0;
  for (std::size_t i = 0; i < mmtot_tensor_size(b); ++i) moved += std::abs(bb[i] - fb[i]);
  Json out;
  out["movement_l1"] = moved;
  out["max_marginal_violation"] = max_violation(b, p.get());
  write_plan(b, o.plan_out, out, "plan_file");
  return out;
}

Json profile_json(const mmtot_cost_profile& prof) {
  Json out;
  out["bisymmetric"] = prof.bisymmetric != 0;
  out["weak_bisymmetric"] = prof.weak_bisymmetric != 0;
  out["distance_matrix"] = prof.distance_matrix != 0;
  out["strict_distance_matrix"] = prof.strict_distance_matrix != 0;
  out["bisymmetric_distance_matrix"] = prof.bisymmetric_distance_matrix != 0;
  return out;
}

Json run_validate_cost(const Options& o) {
  TensorPtr c = read_tensor(o.cost);
  mmtot_cost_profile prof{};
  check(mmtot_cost_profile_of(c.get(), &prof));
  return profile_json(prof);
}

Json run_set_distance(const Options& o) {
  TensorPtr c = read_tensor(o.cost);
  MarginalsPtr l = read_marginals(o.left);
  MarginalsPtr r = read_marginals(o.right);
  const double delta = o.solver == "exact" ? 0.0 : o.delta;
  if (o.solver != "exact" && !(delta > 0.0)) {
    throw Failure{MMTOT_ERR_ARGUMENT, "cli: --solver entropic needs --delta > 0"};
  }
  double distance = 0.0;
  std::vector<std::size_t> perm(mmtot_marginals_count(l.get()));
  int multiset_equal = 0;
  check(mmtot_set_distance(c.get(), l.get(), r.get(), delta, &distance, perm.data(), &multiset_equal));
  mmtot_cost_profile prof{};
  check(mmtot_cost_profile_of(c.get(), &prof));
  Json out;
  out["distance"] = distance;
  out["best_permutation"] = perm;
  Json flags = profile_json(prof);
  flags["multiset_equal"] = multiset_equal != 0;
  out["flags"] = flags;
  return out;
}

Json run_scalable(const Options& o) {
  TensorPtr a = read_tensor(o.tensor);
  MarginalsPtr p = read_marginals(o.marginals);
  int scalable = 0;
  double t = 0.0;
  check(mmtot_scalable(a.get(), p.get(), &scalable, &t));
  Json out;
  out["scalable"] = scalable != 0;
  out["min_support_entry"] = t;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-marginal optimal transport on dense tensors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mmtot_version()));
  Options o;

  auto* exact = app.add_subcommand("solve-exact", "exact LP value and optimal plan");
  exact->add_option("--cost", o.cost, "cost tensor JSON")->required();
  exact->add_option("--marginals", o.marginals, "marginals JSON")->required();
  exact->add_option("--plan", o.plan_out, "write the optimal plan here");

  auto* ent = app.add_subcommand("solve-entropic", "entropic relaxation via Sinkhorn on exp(-lambda C)");
  ent->add_option("--cost", o.cost)->required();
  ent->add_option("--marginals", o.marginals)->required();
  ent->add_option("--lambda", o.lambda)->required();
  ent->add_option("--epsilon", o.epsilon)->required();
  ent->add_option("--plan", o.plan_out);
  ent->add_option("--trace", o.trace, "JSON-lines scaling trace");

  auto* approx = app.add_subcommand("approx", "delta-approximate plan with certificate");
  approx->add_option("--cost", o.cost)->required();
  approx->add_option("--marginals", o.marginals)->required();
  approx->add_option("--delta", o.delta)->required();
  approx->add_option("--lambda", o.lambda, "override 2 d log n / delta");
  approx->add_option("--epsilon", o.epsilon, "override min(1/4, delta / (16 d omega))");
  approx->add_option("--plan", o.plan_out);
  approx->add_option("--trace", o.trace);

  auto* scale = app.add_subcommand("scale", "greedy Sinkhorn scaling to the marginals");
  scale->add_option("--tensor", o.tensor)->required();
  scale->add_option("--marginals", o.marginals)->required();
  scale->add_option("--epsilon", o.epsilon)->required();
  scale->add_option("--max-iter", o.max_iter);
  scale->add_flag("--nonnegative", o.nonnegative, "support-restricted variant for A >= 0");
  scale->add_option("--out", o.plan_out, "write the scaled tensor here");
  scale->add_option("--trace", o.trace);

  auto* round = app.add_subcommand("round", "round a near-feasible plan onto U(P)");
  round->add_option("--tensor", o.tensor)->required();
  round->add_option("--marginals", o.marginals)->required();
  round->add_option("--out", o.plan_out);

  auto* setd = app.add_subcommand("set-distance", "distance between two lists of measures");
  setd->add_option("--cost", o.cost)->required();
  setd->add_option("--left", o.left)->required();
  setd->add_option("--right", o.right)->required();
  setd->add_option("--solver", o.solver)->check(CLI::IsMember({"exact", "entropic"}));
  setd->add_option("--delta", o.delta);

  auto* validate = app.add_subcommand("validate-cost", "distance and symmetry flags of a cost tensor");
  validate->add_option("--cost", o.cost)->required();

  auto* scalable = app.add_subcommand("scalable", "is the zero pattern achievable in U(P)?");
  scalable->add_option("--tensor", o.tensor)->required();
  scalable->add_option("--marginals", o.marginals)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Json out;
    if (*exact) out = run_solve_exact(o);
    else if (*ent) out = run_solve_entropic(o);
    else if (*approx) out = run_approx(o);
    else if (*scale) out = run_scale(o);
    else if (*round) out = run_round(o);
    else if (*setd) out = run_set_distance(o);
    else if (*validate) out = run_validate_cost(o);
    else if (*scalable) out = run_scalable(o);
    std::cout << out.dump(2) << '\n';
    return 0;
  } catch (const Failure& f) {
    std::cerr << "mmtot: " << mmtot_status_string(f.status) << ": " << f.message << '\n';
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "mmtot: internal error: cli: " << e.what() << '\n';
    return 4;
  }
}
