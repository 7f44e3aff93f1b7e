#pragma once

#include <string>
#include <vector>

namespace corrlasso {

// Tiny CSV layer: numeric tables with a header row, written with enough
// digits to round-trip doubles exactly.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string format_double(double v);

void write_csv(const CsvTable& table, const std::string& path);
std::string csv_to_string(const CsvTable& table);
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

}  // namespace corrlasso
