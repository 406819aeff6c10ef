#include "kdx/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "kdx/errors.hpp"

namespace kdx {

namespace {

std::vector<std::string> split_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no,
                  std::size_t col) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (cell.empty() || end != begin + cell.size())
        throw CsvError("csv line " + std::to_string(line_no) + ": cell " +
                       std::to_string(col + 1) + " ('" + cell +
                       "') is not a number");
    if (!std::isfinite(v))
        throw CsvError("csv line " + std::to_string(line_no) + ": cell " +
                       std::to_string(col + 1) + " is not finite");
    return v;
}

bool is_feature_header(const std::vector<std::string>& header,
                       std::size_t count) {
    for (std::size_t i = 0; i < count; ++i)
        if (header[i] != "x" + std::to_string(i + 1)) return false;
    return true;
}

}  // namespace

std::string format_shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_g8(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return std::string(buf);
}

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw CsvError("csv: '" + path + "' is empty");
    Table table;
    table.header = split_line(line);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (table.header[i].empty())
            throw CsvError("csv line 1: empty header cell " +
                           std::to_string(i + 1));
    const std::size_t cols = table.header.size();

    std::vector<double> values;
    std::size_t rows = 0, line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        if (cells.size() != cols)
            throw CsvError("csv line " + std::to_string(line_no) +
                           ": expected " + std::to_string(cols) +
                           " cells, got " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cols; ++c)
            values.push_back(parse_cell(cells[c], line_no, c));
        ++rows;
    }

    table.data.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            table.data(static_cast<Index>(r), static_cast<Index>(c)) =
                values[r * cols + c];
    return table;
}

void write_table(const std::string& path,
                 const std::vector<std::string>& header, const Matrix& data) {
    if (static_cast<Index>(header.size()) != data.cols())
        throw DimensionMismatch("csv: " + std::to_string(header.size()) +
                                " header cells for " +
                                std::to_string(data.cols()) + " columns");
    if (!data.allFinite())
        throw NonFiniteInput("csv: refusing to write non-finite values");

    std::ofstream out(path);
    if (!out) throw CsvError("csv: cannot write '" + path + "'");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (Index r = 0; r < data.rows(); ++r) {
        for (Index c = 0; c < data.cols(); ++c) {
            if (c) out << ',';
            out << format_shortest(data(r, c));
        }
        out << '\n';
    }
    if (!out) throw CsvError("csv: write to '" + path + "' failed");
}

Dataset read_dataset(const std::string& path) {
    Table table = read_table(path);
    if (table.data.rows() == 0)
        throw CsvError("csv: dataset '" + path + "' has no rows");
    const std::size_t cols = table.header.size();

    Dataset data;
    std::size_t features = cols;
    if (table.header.back() == "y") {
        data.target = Dataset::Target::Y;
        features = cols - 1;
    } else if (table.header.back() == "label") {
        data.target = Dataset::Target::Label;
        features = cols - 1;
    }
    if (features == 0)
        throw CsvError("csv: dataset '" + path + "' has no feature columns");
    if (!is_feature_header(table.header, features))
        throw CsvError("csv: dataset header must be x1..x" +
                       std::to_string(features) +
                       (data.target == Dataset::Target::None
                            ? ""
                            : std::string(" followed by '") +
                                  table.header.back() + "'"));

    data.X = table.data.leftCols(static_cast<Index>(features));
    if (data.target != Dataset::Target::None) {
        data.y = table.data.col(static_cast<Index>(features));
        if (data.target == Dataset::Target::Label)
            for (Index i = 0; i < data.y.size(); ++i)
                if (data.y[i] != 1.0 && data.y[i] != -1.0)
                    throw CsvError("csv line " + std::to_string(i + 2) +
                                   ": label must be -1 or +1, got " +
                                   format_shortest(data.y[i]));
    }
    return data;
}

void write_dataset(const std::string& path, const Dataset& data) {
    std::vector<std::string> header;
    for (Index j = 0; j < data.X.cols(); ++j)
        header.push_back("x" + std::to_string(j + 1));

    Matrix out = data.X;
    if (data.target != Dataset::Target::None) {
        header.push_back(data.target == Dataset::Target::Y ? "y" : "label");
        if (data.y.size() != data.X.rows())
            throw SampleCountMismatch(
                "csv: dataset target length does not match the sample count");
        out.conservativeResize(Eigen::NoChange, out.cols() + 1);
        out.col(out.cols() - 1) = data.y;
    }
    write_table(path, header, out);
}

}  // namespace kdx
