#include "bcot/cli/problem_file.hpp"

#include <fstream>
#include <optional>
#include <sstream>

namespace bcot::cli {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw InputError("field '" + field + "': " + what);
}

std::vector<std::vector<double>> read_matrix(const json& doc, const std::string& field, std::size_t n) {
  const json& value = doc.at(field);
  if (!value.is_array()) field_error(field, "expected an array of rows");
  if (value.size() != n) {
    field_error(field, "expected " + std::to_string(n) + " rows, found " + std::to_string(value.size()));
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const json& row = value[i];
    if (!row.is_array() || row.size() != n) {
      field_error(field, "row " + std::to_string(i) + " must be an array of " + std::to_string(n) + " numbers");
    }
    std::vector<double> r;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j].is_number()) {
        field_error(field, "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not a number");
      }
      r.push_back(row[j].get<double>());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

TransitionKernel read_kernel(const json& doc, const std::string& field, std::size_t n) {
  const auto rows = read_matrix(doc, field, n);
  try {
    return validate_kernel(rows);
  } catch (const Error& e) {
    field_error(field, e.what());
  }
}

std::size_t read_state(const json& doc, const std::string& field, const StateSpace& space) {
  if (!doc.contains(field)) field_error(field, "missing");
  const json& v = doc.at(field);
  if (!v.is_string()) field_error(field, "expected a state label");
  const auto label = v.get<std::string>();
  if (!space.contains(label)) field_error(field, "unknown state label '" + label + "'");
  return space.index_of(label);
}

}  // namespace

ProblemFile parse_problem(const json& doc) {
  if (!doc.is_object()) throw InputError("problem file must be a JSON object");

  if (!doc.contains("states")) field_error("states", "missing");
  const json& states = doc.at("states");
  if (!states.is_array() || states.empty()) field_error("states", "expected a non-empty array of labels");
  std::vector<std::string> labels;
  for (const auto& s : states) {
    if (!s.is_string()) field_error("states", "labels must be strings");
    labels.push_back(s.get<std::string>());
  }
  std::optional<StateSpace> space;
  try {
    space.emplace(std::move(labels));
  } catch (const Error& e) {
    field_error("states", e.what());
  }
  const std::size_t n = space->size();

  if (!doc.contains("P")) field_error("P", "missing");
  TransitionKernel P = read_kernel(doc, "P", n);
  const bool has_prime = doc.contains("P_prime") && !doc.at("P_prime").is_null();
  TransitionKernel P_prime = has_prime ? read_kernel(doc, "P_prime", n) : P;

  const std::size_t x0 = read_state(doc, "x0", *space);
  const std::size_t x0_prime = read_state(doc, "x0_prime", *space);

  double beta = 1.0;
  if (doc.contains("beta")) {
    if (!doc.at("beta").is_number()) field_error("beta", "expected a number");
    beta = doc.at("beta").get<double>();
    if (!(beta > 0.0 && beta <= 1.0)) field_error("beta", "must lie in (0, 1]");
  }

  bool discrete = true;
  Matrix cost = discrete_metric(n);
  if (doc.contains("cost")) {
    const json& c = doc.at("cost");
    if (c.is_string()) {
      if (c.get<std::string>() != "discrete") field_error("cost", "expected \"discrete\" or a matrix");
    } else {
      cost = Matrix::from_rows(read_matrix(doc, "cost", n));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (!(cost(i, j) >= 0.0)) {
            field_error("cost", "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is negative");
          }
        }
      }
      discrete = cost == discrete_metric(n);
    }
  }

  const bool same = P == P_prime;
  ProblemSpec spec = ProblemSpec::make(std::move(P), std::move(P_prime), x0, x0_prime, std::move(cost), beta);
  return ProblemFile{std::move(*space), std::move(spec), discrete, same};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

ProblemFile load_problem(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return parse_problem(doc);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace bcot::cli
