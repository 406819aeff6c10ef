#pragma once

#include <string>
#include <vector>

#include "kdx/linalg.hpp"

namespace kdx {

// Shortest decimal representation that round-trips the exact double.
std::string format_shortest(double v);

// Fixed 8 significant digits for human-facing stdout.
std::string format_g8(double v);

struct Table {
    std::vector<std::string> header;
    Matrix data;  // rows x header.size()
};

// Strict CSV: one header row, comma separation, every cell a finite number.
// Throws CsvError with the offending 1-based line number.
Table read_table(const std::string& path);

void write_table(const std::string& path,
                 const std::vector<std::string>& header, const Matrix& data);

// Feature/target dataset with the column convention x1..xd [+ y | label].
struct Dataset {
    enum class Target { None, Y, Label };
    Matrix X;
    Vector y;  // empty when target == None
    Target target = Target::None;
};

// Validates the header convention; "label" values must be -1/+1.
Dataset read_dataset(const std::string& path);

void write_dataset(const std::string& path, const Dataset& data);

}  // namespace kdx
