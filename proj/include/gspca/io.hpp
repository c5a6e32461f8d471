#pragma once

#include "gspca/bench.hpp"
#include "gspca/error.hpp"
#include "gspca/groups.hpp"
#include "gspca/linalg.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace gspca::io {

/// A data file that cannot be read or parsed. The message names the
/// offending file, row and column (1-based).
class DataError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

struct CsvTable {
    Matrix data;
    std::vector<std::string> header;   // empty when the file has none
};

/// Comma-separated numbers, '.' decimal separator, optional header row.
CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv(const std::string& path);

/// Shortest decimal text that reads back to exactly `v`.
std::string format_double(double v);

void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header = {});
void write_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header = {});

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);

/// Group sizes stored as a JSON array of positive integers, e.g. [4,4,4,4,4].
GroupStructure groups_from_json(const nlohmann::json& j);
GroupStructure read_groups(const std::string& path);

/// algorithm,lambda,replicate,metric,component,value
void write_long_csv(std::ostream& out, const std::vector<bench::LongRow>& rows);
void write_long_csv(const std::string& path, const std::vector<bench::LongRow>& rows);

} // namespace gspca::io
