// csv.hpp: Comma-separated tables with a header row, written at full double precision

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpi {

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    // Index of a named column; throws CsvError when absent.
    std::size_t column(const std::string& name) const;
    std::vector<double> values(const std::string& name) const;
};

// Floats are printed with 17 significant digits so they round-trip exactly.
std::string format_double(double value);

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv(const std::string& file, const CsvTable& table);

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& file);

} // namespace qpi
