// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include "tensor_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace mmtot::io {

namespace {

constexpr const char* kModule = "tensor-core";

[[noreturn]] void bad(const std::string& what) { fail(ErrorKind::kFormat, kModule, what); }

std::size_t read_positive_int(const Json& j, const char* field) {
  if (!j.contains(field)) bad(std::string("missing field \"") + field + "\"");
  const Json& v = j.at(field);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    bad(std::string("field \"") + field + "\" must be a positive integer");
  }
  return v.get<std::size_t>();
}

double read_number(const Json& v, const std::string& where) {
  if (!v.is_number()) bad("field \"" + where + "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad("field \"" + where + "\" is not finite");
  return x;
}

}  // namespace

Tensor tensor_from_json(const Json& j) {
  if (!j.is_object()) bad("tensor file must hold a JSON object");
  const std::size_t d = read_positive_int(j, "d");
  const std::size_t n = read_positive_int(j, "n");
  if (!j.contains("data") || !j.at("data").is_array()) bad("field \"data\" must be an array");
  const Json& data = j.at("data");
  std::size_t expected = 0;
  try {
    expected = tensor_size(d, n);
  } catch (const Error&) {
    bad("fields \"d\"/\"n\" describe a tensor that is too large");
  }
  if (data.size() != expected) {
    bad("field \"data\" has " + std::to_string(data.size()) + " entries, expected n^d = " +
        std::to_string(expected));
  }
  Vector values(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    values[i] = read_number(data[i], "data[" + std::to_string(i) + "]");
  }
  return Tensor(d, n, std::move(values));
}

Json tensor_to_json(const Tensor& t) {
  Json j;
  j["d"] = t.order();
  j["n"] = t.side();
  j["data"] = t.raw();
  return j;
}

std::vector<Vector> vectors_from_json(const Json& j) {
  if (!j.is_object()) bad("marginals file must hold a JSON object");
  if (!j.contains("p") || !j.at("p").is_array()) bad("field \"p\" must be an array of arrays");
  const Json& rows = j.at("p");
  std::vector<Vector> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = "p[" + std::to_string(r) + "]";
    if (!rows[r].is_array()) bad("field \"" + where + "\" must be an array");
    Vector v;
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      v.push_back(read_number(rows[r][i], where + "[" + std::to_string(i) + "]"));
    }
    out.push_back(std::move(v));
  }
  return out;
}

MarginalFamily marginals_from_json(const Json& j) {
  std::vector<Vector> vectors = vectors_from_json(j);
  try {
    return MarginalFamily(std::move(vectors));
  } catch (const Error& e) {
    bad(std::string("field \"p\": ") + e.what());
  }
}

Json marginals_to_json(const MarginalFamily& p) {
  Json j;
  j["p"] = p.vectors();
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open \"" + path + "\"");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    bad("\"" + path + "\" is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) bad("cannot write \"" + path + "\"");
  out << j.dump() << '\n';
}

Tensor read_tensor(const std::string& path) { return tensor_from_json(read_json_file(path)); }

void write_tensor(const std::string& path, const Tensor& t) {
  write_json_file(path, tensor_to_json(t));
}

MarginalFamily read_marginals(const std::string& path) {
  return marginals_from_json(read_json_file(path));
}

void write_marginals(const std::string& path, const MarginalFamily& p) {
  write_json_file(path, marginals_to_json(p));
}

void write_trace(std::ostream& out, const SinkhornTrace& trace) {
  for (const TraceRecord& r : trace.records) {
    Json j;
    j["k"] = r.k;
    j["mode"] = r.mode;
    j["residual_l1"] = r.residual_l1;
    j["residual_l2"] = r.residual_l2;
    j["marginal_l1"] = r.marginal_l1;
    j["kl"] = r.kl;
    j["g_value"] = r.g_value;
    out << j.dump() << '\n';
  }
  Json last;
  last["k_stop"] = trace.k_stop;
  last["bound"] = trace.bound;
  last["eta"] = trace.eta;
  last["mass"] = trace.mass;
  last["converged"] = trace.converged;
  out << last.dump() << '\n';
}

void write_trace_file(const std::string& path, const SinkhornTrace& trace) {
  std::ofstream out(path);
  if (!out) bad("cannot write \"" + path + "\"");
  write_trace(out, trace);
}

}  // namespace mmtot::io
