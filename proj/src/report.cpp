#include "bsdelab/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bsdelab {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[40];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
        if (std::strtod(buffer, nullptr) == value) break;
    }
    return buffer;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
    std::string out = "name,value,stderr,method\n";
    for (const ResultRow& row : rows) {
        out += row.name;
        out += ',';
        out += format_double(row.value);
        out += ',';
        out += format_double(row.std_error);
        out += ',';
        out += row.method;
        out += '\n';
    }
    return out;
}

std::string summary_text(const std::vector<std::pair<std::string, std::string>>& echo,
                         const std::vector<ResultRow>& rows, double wall_seconds) {
    std::ostringstream out;
    out << kArtifactVersion << "\n\nconfiguration:\n";
    for (const auto& [key, value] : echo) {
        out << "  " << key << " = " << value << "\n";
    }
    out << "\nresults:\n";
    for (const ResultRow& row : rows) {
        out << "  " << row.name << " = " << format_double(row.value);
        if (row.std_error != 0.0) out << " +/- " << format_double(row.std_error);
        out << "  [" << row.method << "]\n";
    }
    char wall[64];
    std::snprintf(wall, sizeof wall, "%.3f", wall_seconds);
    out << "\nwall time: " << wall << " s\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace bsdelab
