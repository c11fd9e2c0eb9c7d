#include "pscwarp/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pscwarp {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump(const nlohmann::ordered_json& j, std::ostringstream& os, int indent, int depth) {
  const std::string pad(size_t(indent) * depth, ' ');
  const std::string pad_in(size_t(indent) * (depth + 1), ' ');
  using value_t = nlohmann::ordered_json::value_t;
  switch (j.type()) {
    case value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        os << pad_in << nlohmann::ordered_json(it.key()).dump() << ": ";
        dump(it.value(), os, indent, depth + 1);
        if (i + 1 < j.size()) os << ",";
        os << "\n";
      }
      os << pad << "}";
      return;
    }
    case value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        os << pad_in;
        dump(j[i], os, indent, depth + 1);
        if (i + 1 < j.size()) os << ",";
        os << "\n";
      }
      os << pad << "]";
      return;
    }
    case value_t::number_float:
      os << fmt_double(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace

std::string dump_deterministic(const nlohmann::ordered_json& j, int indent) {
  std::ostringstream os;
  dump(j, os, indent, 0);
  os << "\n";
  return os.str();
}

void write_json_file(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << dump_deterministic(j);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt_double(row[i]);
    out << "\n";
  }
}

}  // namespace pscwarp
