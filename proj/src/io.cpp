#include "techstop/io.hpp"

#include <cstdio>
#include <sstream>

namespace techstop {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot write " + path);
    out_ << "# techstop " << kVersion << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
    out_ << (filled_ ? "," : "") << s;
    ++filled_;
    return *this;
}

void CsvWriter::end_row() {
    for (; filled_ < columns_; ++filled_) out_ << ",";
    out_ << "\n";
    filled_ = 0;
}

void write_boundary_csv(const std::string& path, const BoundarySolution& sol, const BoundaryField& field) {
    CsvWriter csv(path, {"m", "b", "E", "m_x"});
    const FreeBoundary& fb = sol.boundary;
    for (std::size_t i = 0; i < fb.m_grid().size(); ++i) {
        const double m = fb.m_grid()[i];
        const double b = fb.b_grid()[i];
        csv.cell(m).cell(b).cell(field.E(b, m)).cell(field.null_curve(b));
        csv.end_row();
    }
}

FreeBoundary read_boundary_csv(const std::string& path, double horizon) {
    std::ifstream in(path);
    if (!in) throw DomainError(path + ": cannot open");
    std::string line;
    std::vector<std::string> header;
    std::vector<double> m;
    std::vector<double> b;
    std::vector<double> e;
    int im = -1;
    int ib = -1;
    int ie = -1;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (header.empty()) {
            header = cells;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i] == "m") im = static_cast<int>(i);
                if (cells[i] == "b") ib = static_cast<int>(i);
                if (cells[i] == "E") ie = static_cast<int>(i);
            }
            if (im < 0 || ib < 0) throw DomainError(path + ": header must contain columns m and b");
            continue;
        }
        try {
            m.push_back(std::stod(cells.at(im)));
            b.push_back(std::stod(cells.at(ib)));
            if (ie >= 0) e.push_back(std::stod(cells.at(ie)));
        } catch (const std::exception&) {
            throw DomainError(path + ": malformed row at line " + std::to_string(line_no));
        }
    }
    if (ie >= 0) return FreeBoundary(std::move(m), std::move(b), std::move(e), horizon);
    return FreeBoundary::from_samples(std::move(m), std::move(b), horizon);
}

json boundary_summary(const BoundarySolution& sol, const Problem& problem) {
    const EndpointReport& r = sol.report;
    return json{
        {"version", kVersion},
        {"m_low", r.m_low},
        {"x_R", r.x_R},
        {"x_U", problem.payoffs.x_U()},
        {"m_xR", r.m_xR},
        {"horizon", r.horizon},
        {"iterations", r.iterations},
        {"retries", r.retries},
        {"bracket", {r.bracket_lo, r.bracket_hi}},
        {"splice_m", r.splice_m},
        {"tail_start", r.tail_start},
        {"tail_spread", r.tail_spread},
        {"m_max", sol.boundary.m_max()},
        {"grid_points", sol.boundary.m_grid().size()},
    };
}

json to_json(const CheckReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.results) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"max_residual", c.max_residual},
                          {"tolerance", c.tolerance},
                          {"samples", c.samples},
                          {"detail", c.detail}});
    }
    return json{{"version", kVersion}, {"passed", rep.passed()}, {"checks", checks}};
}

json to_json(const ComparisonReport& rep) {
    return json{{"version", kVersion},
                {"verdict", to_string(rep.verdict)},
                {"direction", rep.direction},
                {"reason", rep.reason},
                {"m_low_1", rep.m_low_1},
                {"m_low_2", rep.m_low_2},
                {"margin", rep.margin},
                {"min_gap", rep.min_gap},
                {"side_checks", rep.side_checks},
                {"side_failures", rep.side_failures}};
}

json to_json(const SimResult& res) {
    return json{{"estimate", res.estimate},
                {"std_error", res.std_error},
                {"n_paths", res.n_paths},
                {"n_stopped", res.n_stopped},
                {"n_truncated", res.n_truncated}};
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace techstop
