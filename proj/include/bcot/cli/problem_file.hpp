// Problem files: a single JSON document
//
//   {
//     "states":   ["a", "b"],
//     "P":        [[0.9, 0.1], [0.2, 0.8]],
//     "P_prime":  [[...]],          // optional, defaults to P
//     "x0":       "a",
//     "x0_prime": "b",
//     "beta":     1.0,              // optional, defaults to 1
//     "cost":     "discrete"        // optional; or an explicit n x n matrix
//   }
#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bcot/bicausal_dp.hpp"
#include "bcot/chain.hpp"
#include "bcot/errors.hpp"

namespace bcot::cli {

/// Malformed input; the message names the offending field or position.
class InputError : public Error {
 public:
  using Error::Error;
};

struct ProblemFile {
  StateSpace space;
  ProblemSpec spec;
  bool discrete_cost = true;
  bool same_kernel = true;  ///< P_prime absent or equal to P
};

ProblemFile parse_problem(const nlohmann::json& doc);
ProblemFile load_problem(const std::filesystem::path& path);

/// Reads and parses any JSON file, turning I/O and syntax errors into InputError.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace bcot::cli
