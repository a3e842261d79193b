#include "diffmean/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

namespace diffmean {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& cell, std::size_t line_no) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != cell.size() || !std::isfinite(v)) {
        throw DomainError("line " + std::to_string(line_no) + ": '" + cell + "' is not a finite number");
    }
    return v;
}

// Index of the column named prefix+i for i = 0, 1, ...; empty if none.
std::vector<std::size_t> numbered_columns(const std::vector<std::string>& header, const std::string& prefix) {
    std::vector<std::size_t> idx;
    for (int i = 0;; ++i) {
        auto it = std::find(header.begin(), header.end(), prefix + std::to_string(i));
        if (it == header.end()) break;
        idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    return idx;
}

}  // namespace

Sample parse_dataset(std::istream& in, std::optional<ManifoldKind> kind) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv(trim(line));
            break;
        }
    }
    if (header.empty()) throw DomainError("dataset is empty (no header row)");

    const auto find = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto weight_col = find("weight");
    const auto deg_col = find("angle_deg");
    const auto rad_col = find("angle_rad");
    const auto v_cols = numbered_columns(header, "v");
    const auto x_cols = numbered_columns(header, "x");

    std::optional<ManifoldSpec> spec;
    std::vector<std::size_t> cols;
    bool degrees = false;
    if (deg_col || rad_col) {
        if (deg_col && rad_col) throw DomainError("dataset has both angle_deg and angle_rad columns");
        if (kind && *kind != ManifoldKind::Circle) throw DomainError("angle columns describe circle data");
        spec = ManifoldSpec::circle();
        cols = {deg_col ? *deg_col : *rad_col};
        degrees = deg_col.has_value();
    } else if (!v_cols.empty()) {
        if (kind && *kind != ManifoldKind::Euclidean) throw DomainError("v columns describe Euclidean data");
        spec = ManifoldSpec::euclidean(static_cast<int>(v_cols.size()));
        cols = v_cols;
    } else if (!x_cols.empty()) {
        if (!kind || (*kind != ManifoldKind::Sphere && *kind != ManifoldKind::Hyperbolic)) {
            throw DomainError("x0..xm columns need the manifold set to sphere or hyperbolic");
        }
        spec = ManifoldSpec(*kind, static_cast<int>(x_cols.size()) - 1);
        cols = x_cols;
    } else {
        throw DomainError("dataset header has no angle_deg, angle_rad, v0.. or x0.. columns");
    }

    std::vector<Point> points;
    std::vector<double> weights;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(trim(line));
        if (cells.size() != header.size()) {
            throw DomainError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(cells.size()));
        }
        Eigen::VectorXd v(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_number(cells[cols[i]], line_no);
        if (degrees) v[0] *= std::numbers::pi / 180.0;
        if (spec->kind() == ManifoldKind::Sphere && std::abs(v.norm() - 1.0) > 1e-6) {
            throw DomainError("line " + std::to_string(line_no) + ": sphere point is not a unit vector");
        }
        if (spec->kind() == ManifoldKind::Hyperbolic &&
            (std::abs(minkowski_dot(v, v) + 1.0) > 1e-6 || v[0] <= 0.0)) {
            throw DomainError("line " + std::to_string(line_no) + ": point is not on the upper hyperboloid");
        }
        points.emplace_back(*spec, std::move(v));
        if (weight_col) {
            const double w = parse_number(cells[*weight_col], line_no);
            if (!(w >= 0.0)) throw DomainError("line " + std::to_string(line_no) + ": weight must be nonnegative");
            weights.push_back(w);
        }
    }
    if (points.empty()) throw DomainError("dataset has a header but no rows");
    return Sample(*spec, std::move(points), std::move(weights));
}

Sample read_dataset(const std::string& path, std::optional<ManifoldKind> kind) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open dataset '" + path + "'");
    return parse_dataset(in, kind);
}

void write_dataset(std::ostream& out, const Sample& s, bool degrees) {
    const ManifoldSpec& m = s.manifold();
    const bool uniform = std::all_of(s.weights().begin(), s.weights().end(),
                                     [&](double w) { return w == s.weights().front(); });
    std::vector<std::string> header;
    switch (m.kind()) {
    case ManifoldKind::Circle: header.push_back(degrees ? "angle_deg" : "angle_rad"); break;
    case ManifoldKind::Euclidean:
        for (int i = 0; i < m.dim(); ++i) header.push_back("v" + std::to_string(i));
        break;
    default:
        for (int i = 0; i <= m.dim(); ++i) header.push_back("x" + std::to_string(i));
        break;
    }
    if (!uniform) header.push_back("weight");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';

    std::ostringstream row;
    row.precision(17);
    for (std::size_t j = 0; j < s.size(); ++j) {
        row.str("");
        const auto& c = s.points()[j].coords();
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            const double v = (m.kind() == ManifoldKind::Circle && degrees) ? c[i] * 180.0 / std::numbers::pi : c[i];
            row << (i ? "," : "") << v;
        }
        if (!uniform) row << ',' << s.weights()[j];
        out << row.str() << '\n';
    }
}

}  // namespace diffmean
