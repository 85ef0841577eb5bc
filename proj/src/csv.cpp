// csv.cpp: CSV reading and writing

#include "qpi/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace qpi {

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    throw CsvError("no column named '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[c]);
    return out;
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const CsvTable& table) {
    for (std::size_t k = 0; k < table.header.size(); ++k) out << (k ? "," : "") << table.header[k];
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw CsvError("row width does not match header");
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
        out << '\n';
    }
}

void write_csv(const std::string& file, const CsvTable& table) {
    std::ofstream out(file);
    if (!out) throw CsvError("cannot open '" + file + "' for writing");
    write_csv(out, table);
    if (!out) throw CsvError("write to '" + file + "' failed");
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != table.header.size())
            throw CsvError("line " + std::to_string(lineno) + ": expected " + std::to_string(table.header.size()) +
                           " fields");
        std::vector<double> row;
        for (const auto& f : fields) {
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size())
                throw CsvError("line " + std::to_string(lineno) + ": '" + f + "' is not a number");
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable read_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw CsvError("cannot read '" + file + "'");
    return read_csv(in);
}

} // namespace qpi
