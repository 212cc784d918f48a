// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

// JSON file formats:
//   tensor:    {"d": int, "n": int, "data": [n^d numbers, row-major]}
//   marginals: {"p": [[...], [...], ...]}
// Doubles are written in shortest round-trip form, so read(write(x)) == x
// bit for bit.

#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "scaling.hpp"
#include "tensor.hpp"

namespace mmtot::io {

using Json = nlohmann::ordered_json;

Tensor tensor_from_json(const Json& j);
Json tensor_to_json(const Tensor& t);

MarginalFamily marginals_from_json(const Json& j);
Json marginals_to_json(const MarginalFamily& p);

/// Raw vectors under "p" without the positivity/equal-mass checks.
std::vector<Vector> vectors_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

Tensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const Tensor& t);
MarginalFamily read_marginals(const std::string& path);
void write_marginals(const std::string& path, const MarginalFamily& p);

/// Iteration records {k, mode, residual_l1, residual_l2, marginal_l1, kl,
/// g_value}, one JSON object per line, then {k_stop, bound, eta, mass,
/// converged}.
void write_trace(std::ostream& out, const SinkhornTrace& trace);
void write_trace_file(const std::string& path, const SinkhornTrace& trace);

}  // namespace mmtot::io
