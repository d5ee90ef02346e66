#include "doctest.h"

#include "fixtures.hpp"
#include "switchstab/io.hpp"
#include "switchstab/model.hpp"
#include "switchstab/rng.hpp"

#include <cstdio>
#include <string>
#include <vector>

using namespace switchstab;

namespace {

bool throws_parse_error_containing(const std::string& text,
                                   const std::string& needle) {
  try {
    (void)parse_problem(text);
  } catch (const ParseError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

ProblemFile random_problem(Rng& rng, int n, int N, bool complex_entries,
                           bool with_gains, bool with_params) {
  ProblemFile pf;
  for (int i = 0; i < N; ++i) {
    Mat A(n, n), B(n, 1);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c)
        A(r, c) = complex_entries ? Complex(rng.normal(), rng.normal())
                                  : Complex(rng.normal(), 0.0);
      B(r, 0) = complex_entries ? Complex(rng.normal(), rng.normal())
                                : Complex(rng.normal(), 0.0);
    }
    pf.spec.modes.push_back({A, B, i + 1});
  }
  if (with_gains) {
    for (int i = 0; i < N; ++i) {
      Mat K(1, n);
      for (int c = 0; c < n; ++c)
        K(0, c) = complex_entries ? Complex(rng.normal(), rng.normal())
                                  : Complex(rng.normal(), 0.0);
      pf.gains.push_back(K);
    }
  }
  if (with_params) {
    pf.params.eps_c = 1e-4;
    pf.params.eps_d = 2e-4;
    pf.params.multistart = 16;
    pf.params.seed = 9u;
    pf.params.horizon = 250;
    pf.params.cert_floor = 1e-7;
  }
  return pf;
}

bool same_problem(const ProblemFile& a, const ProblemFile& b) {
  if (a.spec.N() != b.spec.N() || a.gains.size() != b.gains.size())
    return false;
  for (int i = 0; i < a.spec.N(); ++i) {
    if ((a.spec.modes[i].A - b.spec.modes[i].A).norm() != 0.0) return false;
    if ((a.spec.modes[i].B - b.spec.modes[i].B).norm() != 0.0) return false;
    if (a.spec.modes[i].index != b.spec.modes[i].index) return false;
  }
  for (std::size_t i = 0; i < a.gains.size(); ++i)
    if ((a.gains[i] - b.gains[i]).norm() != 0.0) return false;
  return a.params.eps_c == b.params.eps_c && a.params.eps_d == b.params.eps_d &&
         a.params.multistart == b.params.multistart &&
         a.params.seed == b.params.seed &&
         a.params.horizon == b.params.horizon &&
         a.params.cert_floor == b.params.cert_floor;
}

}  // namespace

TEST_CASE("problem files round-trip bit for bit") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 4.0);
    const int N = 1 + static_cast<int>(rng.uniform() * 3.0);
    const bool cx = rng.uniform() < 0.5;
    const bool wg = rng.uniform() < 0.5;
    const bool wp = rng.uniform() < 0.5;
    const ProblemFile pf = random_problem(rng, n, N, cx, wg, wp);
    const ProblemFile back = parse_problem(emit_problem(pf));
    CHECK(same_problem(pf, back));
    // Emission is canonical: a second trip reproduces the same text.
    CHECK(emit_problem(back) == emit_problem(pf));
  }
}

TEST_CASE("complex entries parse from [re, im] pairs") {
  const std::string text = R"({
    "systems": [
      {"A": [[[0.1, -0.2], 0.3], [0.0, [0.4, 0.5]]],
       "B": [[1.0, 0.0], [0.0, -1.0]]}
    ]
  })";
  const ProblemFile pf = parse_problem(text);
  REQUIRE(pf.spec.N() == 1);
  CHECK(pf.spec.modes[0].A(0, 0) == Complex(0.1, -0.2));
  CHECK(pf.spec.modes[0].A(0, 1) == Complex(0.3, 0.0));
  CHECK(pf.spec.modes[0].A(1, 1) == Complex(0.4, 0.5));
  CHECK(pf.spec.modes[0].B(0, 0) == Complex(1.0, 0.0));
  CHECK(pf.spec.modes[0].B(1, 0) == Complex(0.0, -1.0));
}

TEST_CASE("input columns parse flat or as one-element rows") {
  const std::string flat = R"({
    "systems": [{"A": [[0.5, 0.0], [0.0, 0.5]], "B": [1.0, 2.0]}]
  })";
  const std::string nested = R"({
    "systems": [{"A": [[0.5, 0.0], [0.0, 0.5]], "B": [[1.0], [2.0]]}]
  })";
  const ProblemFile a = parse_problem(flat);
  const ProblemFile b = parse_problem(nested);
  CHECK((a.spec.modes[0].B - b.spec.modes[0].B).norm() == 0.0);
  CHECK(a.spec.modes[0].B(1, 0) == Complex(2.0, 0.0));
}

TEST_CASE("gain rows parse flat or as one-row nested matrices") {
  // Reports emit each gain as a 1xn matrix; problem files must accept that
  // shape back so reported gains can be checked without reformatting.
  const std::string flat = R"({
    "systems": [{"A": [[0.5, 0.0], [0.0, 0.5]], "B": [1.0, 2.0]}],
    "gains": [[0.25, [0.5, -1.0]]]
  })";
  const std::string nested = R"({
    "systems": [{"A": [[0.5, 0.0], [0.0, 0.5]], "B": [1.0, 2.0]}],
    "gains": [[[0.25, [0.5, -1.0]]]]
  })";
  const ProblemFile a = parse_problem(flat);
  const ProblemFile b = parse_problem(nested);
  REQUIRE(a.gains.size() == 1);
  REQUIRE(b.gains.size() == 1);
  CHECK((a.gains[0] - b.gains[0]).norm() == 0.0);
  CHECK(a.gains[0](0, 1) == Complex(0.5, -1.0));

  // Scalar systems: a top-level [re, im] pair stays one complex entry, while
  // the nested one-row shape unwraps.
  const std::string scalar_pair = R"({
    "systems": [{"A": [[0.5]], "B": [1.0]}], "gains": [[[0.5, -1.0]]]
  })";
  const std::string scalar_nested = R"({
    "systems": [{"A": [[0.5]], "B": [1.0]}], "gains": [[[0.25]]]
  })";
  CHECK(parse_problem(scalar_pair).gains[0](0, 0) == Complex(0.5, -1.0));
  CHECK(parse_problem(scalar_nested).gains[0](0, 0) == Complex(0.25, 0.0));
}

TEST_CASE("parse errors carry field context") {
  CHECK(throws_parse_error_containing("not json at all", "not valid JSON"));
  CHECK(throws_parse_error_containing("[1, 2]", "top level"));
  CHECK(throws_parse_error_containing("{}", "systems"));
  CHECK(throws_parse_error_containing(R"({"systems": []})", "non-empty"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1, 0]], "B": [1]}]})", "square"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1, 0], [0]], "B": [1, 0]}]})",
      "systems[0].A[1]"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1, "x"], [0, 1]], "B": [1, 0]}]})",
      "systems[0].A[0][1]"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1, 0], [0, 1]], "B": [[1, 2, 3], [0, 0, 0]]}]})",
      "single-input"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1, 0], [0, 1]], "B": [1]}]})", "expected 2"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1]], "B": [1]}, {"A": [[1, 0], [0, 1]], "B": [1, 0]}]})",
      "disagrees"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1]], "B": [1]}], "gains": [[1], [2]]})",
      "gains"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1]], "B": [1]}], "gains": [[1, 2]]})",
      "gains[0]"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1]], "B": [1]}], "params": {"epsc": 1}})",
      "unknown parameter"));
  CHECK(throws_parse_error_containing(
      R"({"systems": [{"A": [[1]], "B": [1]}], "params": {"eps_c": "big"}})",
      "params.eps_c"));
}

TEST_CASE("real matrices are emitted as bare numbers") {
  Rng rng(103);
  const ProblemFile pf = random_problem(rng, 2, 1, false, true, false);
  const json root = problem_to_json(pf);
  CHECK(root["systems"][0]["A"][0][0].is_number());
  CHECK(root["systems"][0]["B"][0].is_number());
  CHECK(root["gains"][0][0].is_number());

  ProblemFile cpf = pf;
  cpf.spec.modes[0].A(0, 0) += Complex(0.0, 0.25);
  const json croot = problem_to_json(cpf);
  CHECK(croot["systems"][0]["A"][0][0].is_array());  // one imag entry flips A
  CHECK(croot["systems"][0]["B"][0].is_number());    // B stays real
}

TEST_CASE("matrix_from_json reports its location on malformed input") {
  try {
    (void)matrix_from_json(json::parse("[[1, 2], 3]"), "somewhere");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("somewhere[1]") != std::string::npos);
  }
  CHECK_THROWS_AS(matrix_from_json(json::parse("42"), "x"), ParseError);
  CHECK_THROWS_AS(matrix_from_json(json::parse("[[]]"), "x"), ParseError);
}

TEST_CASE("text files round-trip and missing paths raise ParseError") {
  const std::string path = "/tmp/switchstab_io_test.json";
  const std::string payload = "{\"k\": [1, 2, 3]}\n";
  write_text_file(path, payload);
  CHECK(read_text_file(path) == payload);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_problem("/tmp/definitely_missing_switchstab.json"),
                  ParseError);
}

TEST_CASE("mutated problem texts never escape the parse-error contract") {
  Rng rng(107);
  const ProblemFile pf = random_problem(rng, 3, 2, true, true, true);
  const std::string base = emit_problem(pf);
  const std::string pool = "0123456789.,:[]{}\"eE+-nulltrue ";
  int parsed = 0;
  int rejected = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::string text = base;
    const int edits = 1 + static_cast<int>(rng.uniform() * 5.0);
    for (int e = 0; e < edits; ++e) {
      const auto pos =
          static_cast<std::size_t>(rng.uniform() * double(text.size()));
      text[pos] = pool[static_cast<std::size_t>(rng.uniform() * double(pool.size()))];
    }
    try {
      (void)parse_problem(text);
      ++parsed;
    } catch (const ParseError&) {
      ++rejected;
    }
    // Any other exception type escapes and fails the test case.
  }
  CHECK(parsed + rejected == 200);
  CHECK(rejected > 50);  // most single-char damage must be caught
}
