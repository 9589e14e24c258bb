#include "bcot/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>

#include "bcot/cli/problem_file.hpp"

namespace bcot::cli {

using nlohmann::json;

json number_to_json(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

double number_from_json(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  throw InputError("field '" + field + "': expected a number or \"inf\"");
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (double v : m.row(i)) row.push_back(number_to_json(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& doc, const std::string& field, std::size_t n) {
  if (!doc.is_array() || doc.size() != n) {
    throw InputError("field '" + field + "': expected " + std::to_string(n) + " rows");
  }
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const json& row = doc[i];
    if (!row.is_array() || row.size() != n) {
      throw InputError("field '" + field + "': row " + std::to_string(i) + " must have " + std::to_string(n) +
                       " entries");
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) = number_from_json(row[j], field);
  }
  return m;
}

json coupling_to_json(const CouplingKernel& Q, const StateSpace& space) {
  json out = json::object();
  for (std::size_t x = 0; x < Q.size(); ++x) {
    json inner = json::object();
    for (std::size_t xp = 0; xp < Q.size(); ++xp) inner[space.label(xp)] = matrix_to_json(Q.plan(x, xp));
    out[space.label(x)] = std::move(inner);
  }
  return out;
}

CouplingKernel coupling_from_json(const json& doc, const StateSpace& space) {
  if (!doc.is_object()) throw InputError("field 'coupling': expected an object keyed by state labels");
  const std::size_t n = space.size();
  CouplingKernel Q(n);
  for (std::size_t x = 0; x < n; ++x) {
    const std::string& lx = space.label(x);
    if (!doc.contains(lx) || !doc.at(lx).is_object()) throw InputError("field 'coupling': missing state '" + lx + "'");
    for (std::size_t xp = 0; xp < n; ++xp) {
      const std::string& lxp = space.label(xp);
      const std::string where = "coupling." + lx + "." + lxp;
      if (!doc.at(lx).contains(lxp)) throw InputError("field '" + where + "': missing");
      Q.plan(x, xp) = matrix_from_json(doc.at(lx).at(lxp), where, n);
    }
  }
  return Q;
}

std::string fixed6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void print_table(std::ostream& out, const Matrix& m, const StateSpace& space) {
  std::size_t label_width = 1;
  for (const auto& l : space.labels()) label_width = std::max(label_width, l.size());
  std::size_t cell_width = 12;
  for (const auto& l : space.labels()) cell_width = std::max(cell_width, l.size() + 2);
  out << std::string(label_width, ' ');
  for (const auto& l : space.labels()) out << std::setw(static_cast<int>(cell_width)) << l;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << std::left << std::setw(static_cast<int>(label_width)) << space.label(i) << std::right;
    for (std::size_t j = 0; j < m.cols(); ++j) out << std::setw(static_cast<int>(cell_width)) << fixed6(m(i, j));
    out << '\n';
  }
}

void write_csv(std::ostream& out, const Matrix& m, const StateSpace& space) {
  out << "state";
  for (const auto& l : space.labels()) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << space.label(i);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (std::isinf(v)) {
        out << ",inf";
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace bcot::cli
