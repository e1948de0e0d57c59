#include "pareig/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pareig {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json grid_to_json(const SpaceTimeGrid& grid) {
  return {{"T", grid.horizon()},       {"L_lo", grid.space_lo()},
          {"L_hi", grid.space_hi()},   {"N", grid.time_steps()},
          {"M", grid.space_steps()},   {"dt", grid.dt()},
          {"dx", grid.dx()}};
}

SpaceTimeGrid grid_from_json(const json& j) {
  return SpaceTimeGrid(j.at("T").get<double>(), j.at("L_lo").get<double>(),
                       j.at("L_hi").get<double>(), j.at("N").get<int>(),
                       j.at("M").get<int>());
}

std::string field_to_csv(const ScalarField& f) {
  std::ostringstream os;
  for (int i = 0; i < f.rows(); ++i) {
    for (int j = 0; j < f.cols(); ++j) {
      if (j) os << ',';
      os << format_number(f.values()(i, j));
    }
    os << '\n';
  }
  return os.str();
}

json field_to_json(const ScalarField& f) {
  json rows = json::array();
  for (int i = 0; i < f.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < f.cols(); ++j) row.push_back(f.values()(i, j));
    rows.push_back(std::move(row));
  }
  return {{"grid", grid_to_json(f.grid())}, {"values", std::move(rows)}};
}

ScalarField field_from_json(const json& j) {
  const SpaceTimeGrid grid = grid_from_json(j.at("grid"));
  const auto& rows = j.at("values");
  if (static_cast<int>(rows.size()) != grid.space_steps())
    throw GridMismatch("field_from_json: row count must equal M");
  Eigen::MatrixXd v(grid.space_steps(), grid.time_steps());
  for (int i = 0; i < grid.space_steps(); ++i) {
    if (static_cast<int>(rows[i].size()) != grid.time_steps())
      throw GridMismatch("field_from_json: column count must equal N");
    for (int k = 0; k < grid.time_steps(); ++k) v(i, k) = rows[i][k].get<double>();
  }
  return {grid, std::move(v)};
}

std::string profile_to_csv(const TimeProfile& c) {
  std::ostringstream os;
  os << "t,value\n";
  for (int j = 0; j < c.size(); ++j)
    os << format_number(c.grid().time(j)) << ',' << format_number(c.values()[j])
       << '\n';
  return os.str();
}

std::string table_to_csv(const std::vector<std::string>& header,
                         const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
  os << '\n';
  for (const auto& row : rows) {
    for (size_t k = 0; k < row.size(); ++k)
      os << (k ? "," : "") << format_number(row[k]);
    os << '\n';
  }
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

// nlohmann prints doubles with max_digits10 already; this walks the tree so
// integers stay integers and NaN/Inf become null explicitly.
void emit(std::ostringstream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) os << format_number(v);
      else os << "null";
      break;
    }
    case json::value_t::object: {
      if (j.empty()) { os << "{}"; break; }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << json(it.key()).dump() << ": ";
        emit(os, it.value(), indent, depth + 1);
      }
      os << '\n' << close << '}';
      break;
    }
    case json::value_t::array: {
      if (j.empty()) { os << "[]"; break; }
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      if (flat) {
        os << '[';
        for (size_t k = 0; k < j.size(); ++k) {
          if (k) os << ", ";
          emit(os, j[k], indent, depth + 1);
        }
        os << ']';
        break;
      }
      os << "[\n";
      for (size_t k = 0; k < j.size(); ++k) {
        if (k) os << ",\n";
        os << pad;
        emit(os, j[k], indent, depth + 1);
      }
      os << '\n' << close << ']';
      break;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump_json(const json& j) {
  std::ostringstream os;
  emit(os, j, 2, 0);
  os << '\n';
  return os.str();
}

}  // namespace pareig
