#pragma once

#include "pareig/grid.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace pareig {

using json = nlohmann::json;

/// Shortest text that round-trips; at most 17 significant digits.
std::string format_number(double v);

json grid_to_json(const SpaceTimeGrid& grid);
SpaceTimeGrid grid_from_json(const json& j);

/// M rows x N columns, row-major.
std::string field_to_csv(const ScalarField& f);
json field_to_json(const ScalarField& f);
ScalarField field_from_json(const json& j);

/// Columns t, value.
std::string profile_to_csv(const TimeProfile& c);

/// Header line followed by rows.
std::string table_to_csv(const std::vector<std::string>& header,
                         const std::vector<std::vector<double>>& rows);

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

/// Serializes with 17-significant-digit floats.
std::string dump_json(const json& j);

}  // namespace pareig
