// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <sstream>
#include <string>

#include "scaling.hpp"
#include "tensor_io.hpp"
#include "test_support.hpp"

using namespace mmtot;
using mmtot::io::Json;
using mmtot::testing::Rng;

namespace {

std::string error_text(const Json& j, bool tensor) {
  try {
    if (tensor) {
      io::tensor_from_json(j);
    } else {
      io::marginals_from_json(j);
    }
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kFormat);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("tensor JSON round trip is bit exact") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor t = testing::random_tensor(1 + rng.index(3), 1 + rng.index(4), rng);
    t[0] = 0.1;
    t[t.size() - 1] = 1.0 / 3.0;
    const std::string text = io::tensor_to_json(t).dump();
    const Tensor back = io::tensor_from_json(Json::parse(text));
    REQUIRE(back.size() == t.size());
    CHECK(std::memcmp(back.raw().data(), t.raw().data(), t.size() * sizeof(double)) == 0);
    CHECK(io::tensor_to_json(back).dump() == text);
  }
}

TEST_CASE("marginals JSON round trip") {
  const MarginalFamily p({{0.1, 0.2, 0.7}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}});
  const MarginalFamily back = io::marginals_from_json(Json::parse(io::marginals_to_json(p).dump()));
  CHECK(back.vectors() == p.vectors());
}

TEST_CASE("malformed tensor files name the offending field") {
  CHECK(error_text(Json::parse(R"({"n": 2, "data": [1, 2]})"), true).find("\"d\"") != std::string::npos);
  CHECK(error_text(Json::parse(R"({"d": 2, "n": 2, "data": [1, 2, 3]})"), true).find("\"data\"") !=
        std::string::npos);
  CHECK(error_text(Json::parse(R"({"d": 1, "n": 2, "data": [1, "x"]})"), true).find("data[1]") !=
        std::string::npos);
  CHECK(error_text(Json::parse(R"({"d": -1, "n": 2, "data": []})"), true).find("\"d\"") !=
        std::string::npos);
  CHECK(error_text(Json::parse(R"([1, 2])"), true).find("object") != std::string::npos);
}

TEST_CASE("malformed marginal files name the offending field") {
  CHECK(error_text(Json::parse(R"({"q": []})"), false).find("\"p\"") != std::string::npos);
  CHECK(error_text(Json::parse(R"({"p": [[0.5, 0.5], 3]})"), false).find("p[1]") != std::string::npos);
  CHECK(error_text(Json::parse(R"({"p": [[0.5, 0.5], [0.5, null]]})"), false).find("p[1][1]") !=
        std::string::npos);
  CHECK(error_text(Json::parse(R"({"p": [[0.5, 0.5], [0.9, 0.5]]})"), false).find("\"p\"") !=
        std::string::npos);
}

TEST_CASE("missing files are format errors") {
  CHECK(MMTOT_ERROR_KIND(io::read_tensor("/nonexistent/t.json")) == ErrorKind::kFormat);
}

TEST_CASE("trace is written as JSON lines with a summary record") {
  SinkhornTrace trace;
  trace.records.push_back({0, 1, 0.5, 0.25, 0.75, 0.125, 1.0});
  trace.records.push_back({1, 0, 0.01, 0.005, 0.02, 0.0001, 0.875});
  trace.k_stop = 1;
  trace.bound = 123.5;
  trace.eta = 0.01;
  trace.mass = 2.0;
  trace.converged = true;
  std::ostringstream out;
  io::write_trace(out, trace);
  std::istringstream in(out.str());
  std::string line;
  std::vector<Json> rows;
  while (std::getline(in, line)) rows.push_back(Json::parse(line));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["mode"] == 1);
  CHECK(rows[0]["residual_l1"] == 0.5);
  CHECK(rows[1]["g_value"] == 0.875);
  CHECK(rows[2]["k_stop"] == 1);
  CHECK(rows[2]["bound"] == 123.5);
  CHECK(rows[2]["converged"] == true);
}
