#pragma once

#include <cstdio>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qid {

inline constexpr const char* version = "0.1.0";

/// Fixed 17-significant-digit rendering; the same value always produces the
/// same bytes, which is what makes the emitted files reproducible.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Rectangular numeric table with an ordered metadata block. Every emitter
/// embeds the metadata so a figure can be rebuilt from the file alone.
struct OutputTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_metadata(const std::string& key, const std::string& value) {
    metadata.emplace_back(key, value);
  }

  void add_row(std::initializer_list<double> values) {
    if (values.size() != columns.size())
      throw std::logic_error("OutputTable: row width does not match header");
    rows.emplace_back(values);
  }

  std::string to_csv() const {
    std::string out = "# qid " + title + "\n";
    out += "# version = ";
    out += version;
    out += '\n';
    for (const auto& [k, v] : metadata) out += "# " + k + " = " + v + "\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += columns[c];
    }
    out += '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        out += format_value(row[c]);
      }
      out += '\n';
    }
    return out;
  }

  std::string to_json() const {
    nlohmann::ordered_json doc;
    doc["command"] = title;
    doc["version"] = version;
    nlohmann::ordered_json meta;
    for (const auto& [k, v] : metadata) meta[k] = v;
    doc["metadata"] = std::move(meta);
    doc["columns"] = columns;
    nlohmann::ordered_json data;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      std::vector<double> col;
      col.reserve(rows.size());
      for (const auto& row : rows) col.push_back(row[c]);
      data[columns[c]] = std::move(col);
    }
    doc["data"] = std::move(data);
    return doc.dump(2) + "\n";
  }
};

}  // namespace qid
