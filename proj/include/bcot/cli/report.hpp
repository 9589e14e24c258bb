// Serialization of value tables and couplings for CLI reports.
//
// JSON numbers are written in shortest round-trip form so a table read back
// is bit-identical; +inf is written as the string "inf".
#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "bcot/chain.hpp"
#include "bcot/couplings.hpp"
#include "bcot/matrix.hpp"

namespace bcot::cli {

nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& v, const std::string& field);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& doc, const std::string& field, std::size_t n);

/// {"x": {"x'": plan rows}} keyed by state labels.
nlohmann::json coupling_to_json(const CouplingKernel& Q, const StateSpace& space);
CouplingKernel coupling_from_json(const nlohmann::json& doc, const StateSpace& space);

/// Fixed-width table with state labels on both axes, 6 decimals.
void print_table(std::ostream& out, const Matrix& m, const StateSpace& space);

/// Comma separated table with 17 significant digits.
void write_csv(std::ostream& out, const Matrix& m, const StateSpace& space);

/// Fixed 6-decimal rendering; "inf" / "nan" for non-finite values.
std::string fixed6(double v);

}  // namespace bcot::cli
