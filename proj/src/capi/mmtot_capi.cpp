// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "mmtot/mmtot.h"

#include <algorithm>
#include <exception>
#include <new>
#include <string>

#include "errors.hpp"
#include "lp.hpp"
#include "rounding.hpp"
#include "scaling.hpp"
#include "set_distance.hpp"
#include "tensor.hpp"
#include "tensor_io.hpp"
#include "tot.hpp"

struct mmtot_tensor {
  mmtot::Tensor value;
};

struct mmtot_marginals {
  mmtot::MarginalFamily value;
};

struct mmtot_scale_result {
  mmtot::ScalingResult value;
  mmtot_tensor tensor;
};

namespace {

thread_local std::string last_error;

mmtot_status status_of(mmtot::ErrorKind kind) {
  switch (kind) {
    case mmtot::ErrorKind::kArgument: return MMTOT_ERR_ARGUMENT;
    case mmtot::ErrorKind::kDegenerateSlice: return MMTOT_ERR_DEGENERATE_SLICE;
    case mmtot::ErrorKind::kDomain: return MMTOT_ERR_DOMAIN;
    case mmtot::ErrorKind::kContract: return MMTOT_ERR_CONTRACT;
    case mmtot::ErrorKind::kNonConvergence: return MMTOT_ERR_NON_CONVERGENCE;
    case mmtot::ErrorKind::kCapExceeded: return MMTOT_ERR_CAP_EXCEEDED;
    case mmtot::ErrorKind::kFormat: return MMTOT_ERR_FORMAT;
    case mmtot::ErrorKind::kInternal: return MMTOT_ERR_INTERNAL;
  }
  return MMTOT_ERR_INTERNAL;
}

mmtot_status fail_with(mmtot_status s, std::string what) {
  last_error = std::move(what);
  return s;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
mmtot_status guarded(F&& body) {
  try {
    body();
    return MMTOT_OK;
  } catch (const mmtot::Error& e) {
    return fail_with(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(MMTOT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(MMTOT_ERR_INTERNAL, e.what());
  }
}

#define MMTOT_REQUIRE(cond, what) \
  do {                            \
    if (!(cond)) return fail_with(MMTOT_ERR_ARGUMENT, what); \
  } while (0)

mmtot_tensor* wrap(mmtot::Tensor t) { return new mmtot_tensor{std::move(t)}; }

}  // namespace

extern "C" {

const char* mmtot_version(void) { return "0.1.0"; }

const char* mmtot_status_string(mmtot_status status) {
  switch (status) {
    case MMTOT_OK: return "ok";
    case MMTOT_ERR_ARGUMENT: return "argument error";
    case MMTOT_ERR_DEGENERATE_SLICE: return "degenerate slice";
    case MMTOT_ERR_DOMAIN: return "domain error";
    case MMTOT_ERR_CONTRACT: return "contract violation";
    case MMTOT_ERR_NON_CONVERGENCE: return "non-convergence";
    case MMTOT_ERR_CAP_EXCEEDED: return "size cap exceeded";
    case MMTOT_ERR_FORMAT: return "format error";
    case MMTOT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mmtot_last_error(void) { return last_error.c_str(); }

mmtot_status mmtot_tensor_create(size_t order, size_t side, const double* data, mmtot_tensor** out) {
  MMTOT_REQUIRE(out != nullptr, "out must not be NULL");
  return guarded([&] {
    const std::size_t size = mmtot::tensor_size(order, side);
    mmtot::Vector values(size, 0.0);
    if (data != nullptr) std::copy(data, data + size, values.begin());
    *out = wrap(mmtot::Tensor(order, side, std::move(values)));
  });
}

mmtot_status mmtot_tensor_read_json(const char* path, mmtot_tensor** out) {
  MMTOT_REQUIRE(path != nullptr && out != nullptr, "path and out must not be NULL");
  return guarded([&] { *out = wrap(mmtot::io::read_tensor(path)); });
}

mmtot_status mmtot_tensor_write_json(const mmtot_tensor* t, const char* path) {
  MMTOT_REQUIRE(t != nullptr && path != nullptr, "tensor and path must not be NULL");
  return guarded([&] { mmtot::io::write_tensor(path, t->value); });
}

void mmtot_tensor_free(mmtot_tensor* t) { delete t; }

size_t mmtot_tensor_order(const mmtot_tensor* t) { return t ? t->value.order() : 0; }
size_t mmtot_tensor_side(const mmtot_tensor* t) { return t ? t->value.side() : 0; }
size_t mmtot_tensor_size(const mmtot_tensor* t) { return t ? t->value.size() : 0; }
const double* mmtot_tensor_data(const mmtot_tensor* t) { return t ? t->value.raw().data() : nullptr; }

mmtot_status mmtot_tensor_marginal(const mmtot_tensor* t, size_t mode, double* out) {
  MMTOT_REQUIRE(t != nullptr && out != nullptr, "tensor and out must not be NULL");
  return guarded([&] {
    const mmtot::Vector m = mmtot::marginal(t->value, mode);
    std::copy(m.begin(), m.end(), out);
  });
}

mmtot_status mmtot_marginals_create(size_t count, size_t side, const double* data,
                                    mmtot_marginals** out) {
  MMTOT_REQUIRE(data != nullptr && out != nullptr, "data and out must not be NULL");
  return guarded([&] {
    std::vector<mmtot::Vector> v(count);
    for (std::size_t j = 0; j < count; ++j) v[j].assign(data + j * side, data + (j + 1) * side);
    *out = new mmtot_marginals{mmtot::MarginalFamily(std::move(v))};
  });
}

mmtot_status mmtot_marginals_read_json(const char* path, mmtot_marginals** out) {
  MMTOT_REQUIRE(path != nullptr && out != nullptr, "path and out must not be NULL");
  return guarded([&] { *out = new mmtot_marginals{mmtot::io::read_marginals(path)}; });
}

void mmtot_marginals_free(mmtot_marginals* p) { delete p; }
size_t mmtot_marginals_count(const mmtot_marginals* p) { return p ? p->value.count() : 0; }
size_t mmtot_marginals_side(const mmtot_marginals* p) { return p ? p->value.side() : 0; }

const double* mmtot_marginals_vector(const mmtot_marginals* p, size_t index) {
  if (p == nullptr || index >= p->value.count()) return nullptr;
  return p->value[index].data();
}

mmtot_status mmtot_solve_exact(const mmtot_tensor* cost, const mmtot_marginals* p, double* value,
                               mmtot_tensor** plan) {
  MMTOT_REQUIRE(cost != nullptr && p != nullptr && value != nullptr, "cost, marginals and value must not be NULL");
  return guarded([&] {
    mmtot::lp::ExactTot r = mmtot::lp::solve_exact_tot(cost->value, p->value);
    *value = r.value;
    if (plan != nullptr) *plan = wrap(std::move(r.plan));
  });
}

mmtot_status mmtot_scalable(const mmtot_tensor* pattern, const mmtot_marginals* p, int* scalable,
                            double* min_support_entry) {
  MMTOT_REQUIRE(pattern != nullptr && p != nullptr && scalable != nullptr,
                "pattern, marginals and scalable must not be NULL");
  return guarded([&] {
    const mmtot::lp::Scalability s = mmtot::lp::scalability(pattern->value, p->value);
    *scalable = s.scalable ? 1 : 0;
    if (min_support_entry != nullptr) *min_support_entry = s.min_support_entry;
  });
}

mmtot_status mmtot_scale(const mmtot_tensor* a, const mmtot_marginals* p,
                         const mmtot_scale_options* options, mmtot_scale_result** out) {
  MMTOT_REQUIRE(a != nullptr && p != nullptr && options != nullptr && out != nullptr,
                "tensor, marginals, options and out must not be NULL");
  *out = nullptr;
  mmtot::SinkhornConfig cfg;
  cfg.epsilon = options->epsilon;
  cfg.max_iter = options->max_iter;
  cfg.variant = options->nonnegative ? mmtot::ScalingVariant::kNonnegativeSupport
                                     : mmtot::ScalingVariant::kPositive;
  auto store = [&](mmtot::ScalingResult r) {
    auto* res = new mmtot_scale_result{std::move(r), {}};
    res->tensor.value = res->value.scaled;
    *out = res;
  };
  try {
    store(mmtot::sinkhorn_scale(a->value, p->value, cfg));
    return MMTOT_OK;
  } catch (const mmtot::ScalingNonConvergence& e) {
    store(e.partial());
    return fail_with(MMTOT_ERR_NON_CONVERGENCE, e.what());
  } catch (...) {
    return guarded([] { throw; });
  }
}

void mmtot_scale_result_free(mmtot_scale_result* r) { delete r; }

const mmtot_tensor* mmtot_scale_result_tensor(const mmtot_scale_result* r) {
  return r ? &r->tensor : nullptr;
}
size_t mmtot_scale_result_k_stop(const mmtot_scale_result* r) { return r ? r->value.trace.k_stop : 0; }
double mmtot_scale_result_bound(const mmtot_scale_result* r) { return r ? r->value.trace.bound : 0.0; }
int mmtot_scale_result_converged(const mmtot_scale_result* r) {
  return r && r->value.trace.converged ? 1 : 0;
}

mmtot_status mmtot_scale_result_exponents(const mmtot_scale_result* r, double* out) {
  MMTOT_REQUIRE(r != nullptr && out != nullptr, "result and out must not be NULL");
  const mmtot::Vector flat = r->value.x.flatten();
  std::copy(flat.begin(), flat.end(), out);
  return MMTOT_OK;
}

mmtot_status mmtot_scale_result_write_trace(const mmtot_scale_result* r, const char* path) {
  MMTOT_REQUIRE(r != nullptr && path != nullptr, "result and path must not be NULL");
  return guarded([&] { mmtot::io::write_trace_file(path, r->value.trace); });
}

mmtot_status mmtot_round(const mmtot_tensor* f, const mmtot_marginals* p, mmtot_tensor** out) {
  MMTOT_REQUIRE(f != nullptr && p != nullptr && out != nullptr, "plan, marginals and out must not be NULL");
  return guarded([&] { *out = wrap(mmtot::round_to_polytope(f->value, p->value)); });
}

mmtot_status mmtot_entropic_tot(const mmtot_tensor* cost, const mmtot_marginals* p, double lambda,
                                double epsilon, double* value, double* transport_cost,
                                mmtot_tensor** plan, const char* trace_path) {
  MMTOT_REQUIRE(cost != nullptr && p != nullptr && value != nullptr, "cost, marginals and value must not be NULL");
  return guarded([&] {
    mmtot::EntropicSolution s = mmtot::entropic_tot(cost->value, p->value, lambda, epsilon);
    if (trace_path != nullptr) mmtot::io::write_trace_file(trace_path, s.trace);
    *value = s.value;
    if (transport_cost != nullptr) *transport_cost = s.transport_cost;
    if (plan != nullptr) *plan = wrap(std::move(s.plan));
  });
}

mmtot_status mmtot_entropic_bracket(double f_lambda, double lambda, size_t n, size_t d,
                                    double* lower, double* upper) {
  MMTOT_REQUIRE(lower != nullptr && upper != nullptr, "lower and upper must not be NULL");
  return guarded([&] {
    const auto [lo, hi] = mmtot::entropic_bracket(f_lambda, lambda, n, d);
    *lower = lo;
    *upper = hi;
  });
}

mmtot_status mmtot_approx_tot(const mmtot_tensor* cost, const mmtot_marginals* p, double delta,
                              double lambda, double epsilon, mmtot_certificate* certificate,
                              mmtot_tensor** plan, const char* trace_path) {
  MMTOT_REQUIRE(cost != nullptr && p != nullptr && certificate != nullptr,
                "cost, marginals and certificate must not be NULL");
  return guarded([&] {
    mmtot::ApproxOptions opt;
    if (lambda > 0.0) opt.lambda = lambda;
    if (epsilon > 0.0) opt.epsilon = epsilon;
    mmtot::ApproxTot r = mmtot::approx_tot(cost->value, p->value, delta, opt);
    if (trace_path != nullptr && !r.certificate.exact) {
      mmtot::io::write_trace_file(trace_path, r.trace);
    }
    const mmtot::TotCertificate& c = r.certificate;
    *certificate = mmtot_certificate{c.value,          c.lower,          c.upper,
                                     c.error_budget,   c.entropic_value, c.entropic_lower,
                                     c.entropic_upper, c.delta,          c.lambda,
                                     c.epsilon,        c.k_stop,         c.movement_l1,
                                     c.exact ? 1 : 0};
    if (plan != nullptr) *plan = wrap(std::move(r.plan));
  });
}

mmtot_status mmtot_cost_profile_of(const mmtot_tensor* cost, mmtot_cost_profile* out) {
  MMTOT_REQUIRE(cost != nullptr && out != nullptr, "cost and out must not be NULL");
  return guarded([&] {
    const mmtot::CostProfile p = mmtot::cost_profile(cost->value);
    *out = mmtot_cost_profile{p.distance_matrix ? 1 : 0, p.strict_distance_matrix ? 1 : 0,
                              p.bisymmetric_distance_matrix ? 1 : 0, p.bisymmetric ? 1 : 0,
                              p.weak_bisymmetric ? 1 : 0};
  });
}

mmtot_status mmtot_lift_ground_metric(const double* ground, size_t n, size_t order,
                                      mmtot_lift_mode mode, mmtot_tensor** out) {
  MMTOT_REQUIRE(ground != nullptr && out != nullptr, "ground and out must not be NULL");
  MMTOT_REQUIRE(mode == MMTOT_LIFT_SUM || mode == MMTOT_LIFT_MATCHING, "unknown lift mode");
  return guarded([&] {
    Eigen::MatrixXd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ground[i * n + j];
    }
    *out = wrap(mmtot::lift_ground_metric(
        g, order, mode == MMTOT_LIFT_SUM ? mmtot::LiftMode::kSum : mmtot::LiftMode::kMatching));
  });
}

mmtot_status mmtot_set_distance(const mmtot_tensor* cost, const mmtot_marginals* left,
                                const mmtot_marginals* right, double delta, double* distance,
                                size_t* best_permutation, int* multiset_equal) {
  MMTOT_REQUIRE(cost != nullptr && left != nullptr && right != nullptr && distance != nullptr,
                "cost, left, right and distance must not be NULL");
  return guarded([&] {
    mmtot::SolverChoice solver;
    if (delta > 0.0) {
      solver.kind = mmtot::SolverKind::kEntropic;
      solver.delta = delta;
    }
    const mmtot::SetDistance r =
        mmtot::set_distance(cost->value, left->value.vectors(), right->value.vectors(), solver);
    *distance = r.distance;
    if (multiset_equal != nullptr) *multiset_equal = r.multiset_equal ? 1 : 0;
    if (best_permutation != nullptr) {
      std::copy(r.best_permutation.begin(), r.best_permutation.end(), best_permutation);
    }
  });
}

}  // extern "C"
