#include "gspca/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gspca::io {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

bool parse_number(const std::string& s, double& v)
{
    if (s.empty())
        return false;
    const char* first = s.data();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    return out;
}

} // namespace

CsvTable parse_csv(std::istream& in, const std::string& source)
{
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            line.erase(0, 3);
        if (trim(line).empty())
            continue;
        const auto fields = split(line);
        std::vector<double> values(fields.size());
        std::size_t bad = fields.size();
        for (std::size_t k = 0; k < fields.size(); ++k)
            if (!parse_number(fields[k], values[k])) {
                bad = k;
                break;
            }
        if (rows.empty() && table.header.empty() && bad < fields.size()) {
            table.header = fields;
            width = fields.size();
            continue;
        }
        if (bad < fields.size())
            throw DataError(source + ": row " + std::to_string(line_no) + ", column " +
                            std::to_string(bad + 1) + ": cannot parse '" + fields[bad] +
                            "' as a number");
        for (std::size_t k = 0; k < values.size(); ++k)
            if (!std::isfinite(values[k]))
                throw DataError(source + ": row " + std::to_string(line_no) + ", column " +
                                std::to_string(k + 1) + ": non-finite value");
        if (width == 0)
            width = values.size();
        if (values.size() != width)
            throw DataError(source + ": row " + std::to_string(line_no) + " has " +
                            std::to_string(values.size()) + " columns, expected " +
                            std::to_string(width));
        rows.push_back(std::move(values));
    }
    if (rows.empty())
        throw DataError(source + ": no numeric rows");
    table.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < width; ++k)
            table.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    return table;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    return parse_csv(in, path);
}

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header)
{
    for (std::size_t k = 0; k < header.size(); ++k)
        out << (k ? "," : "") << header[k];
    if (!header.empty())
        out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            out << (k ? "," : "") << format_double(m(i, k));
        out << '\n';
    }
}

void write_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header)
{
    auto out = open_out(path);
    write_csv(out, m, header);
}

nlohmann::json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const nlohmann::json& j)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

GroupStructure groups_from_json(const nlohmann::json& j)
{
    if (!j.is_array())
        throw DataError("group spec must be a JSON array of positive integers");
    std::vector<Eigen::Index> sizes;
    for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<long long>() < 1)
            throw DataError("group spec entries must be positive integers");
        sizes.push_back(v.get<Eigen::Index>());
    }
    return GroupStructure(std::move(sizes));
}

GroupStructure read_groups(const std::string& path)
{
    try {
        return groups_from_json(read_json(path));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_long_csv(std::ostream& out, const std::vector<bench::LongRow>& rows)
{
    out << "algorithm,lambda,replicate,metric,component,value\n";
    for (const auto& r : rows)
        out << r.algorithm << ',' << format_double(r.lambda) << ',' << r.replicate << ','
            << r.metric << ',' << r.component << ',' << format_double(r.value) << '\n';
}

void write_long_csv(const std::string& path, const std::vector<bench::LongRow>& rows)
{
    auto out = open_out(path);
    write_long_csv(out, rows);
}

} // namespace gspca::io
