#pragma once

#include <string>
#include <utility>
#include <vector>

namespace bsdelab {

inline constexpr const char* kArtifactVersion = "bsdelab 0.1.0";

struct ResultRow {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
    std::string method;
};

// Shortest decimal string that round-trips to exactly the same double; the
// same value always renders to the same bytes.
std::string format_double(double value);

// Header `name,value,stderr,method` then one row per quantity, '\n' endings.
std::string results_csv(const std::vector<ResultRow>& rows);

// Version banner, effective configuration echo, rows, wall time.  The wall
// time lives only here: the csv must stay byte-identical across reruns.
std::string summary_text(const std::vector<std::pair<std::string, std::string>>& echo,
                         const std::vector<ResultRow>& rows, double wall_seconds);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace bsdelab
