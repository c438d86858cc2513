#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sindykf {

// All CSV output uses 17 significant digits so doubles round-trip exactly and
// repeated seeded runs are byte-identical.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> comments;  // leading '#' lines, without the '#'
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

// FNV-1a 64-bit over the file bytes, hex-encoded; used for manifest checksums.
std::string file_checksum(const std::string& path);

}  // namespace sindykf
