#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace pscwarp {

/// Serialize with every floating-point number printed at 17 significant
/// digits so identical runs produce byte-identical reports.
std::string dump_deterministic(const nlohmann::ordered_json& j, int indent = 2);

void write_json_file(const nlohmann::ordered_json& j, const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace pscwarp
