#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "techstop/checks.hpp"
#include "techstop/comparative_statics.hpp"
#include "techstop/monte_carlo.hpp"

namespace techstop {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest form that still carries 17 significant digits.
std::string format_double(double v);

/// CSV file with a version comment line and a header row.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    CsvWriter& cell(double v);
    CsvWriter& cell(const std::string& s);
    void end_row();

private:
    std::ofstream out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

/// Columns m, b, E(b, m), m_x(b) at every grid node.
void write_boundary_csv(const std::string& path, const BoundarySolution& sol, const BoundaryField& field);

/// Reads the m and b columns (and E, used as the node slope, when present).
FreeBoundary read_boundary_csv(const std::string& path, double horizon);

nlohmann::json boundary_summary(const BoundarySolution& sol, const Problem& problem);
nlohmann::json to_json(const CheckReport& rep);
nlohmann::json to_json(const ComparisonReport& rep);
nlohmann::json to_json(const SimResult& res);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace techstop
