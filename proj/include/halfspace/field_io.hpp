#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "halfspace/core.hpp"
#include "halfspace/grid.hpp"

namespace halfspace {

/// Write-then-rename so consumers never observe a half-written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw numeric_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw numeric_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with header x1,...,xn,u; one node per row in row-major order (first
/// axis slowest, vertical axis fastest); full-precision decimal floats.
template <int N>
inline std::string field_to_csv(const ScalarField<N>& f) {
    std::ostringstream out;
    for (int i = 0; i < N; ++i) out << 'x' << i + 1 << ',';
    out << "u\n";
    f.grid.for_each_node([&](const typename HalfSpaceGrid<N>::Index& idx, std::size_t lin) {
        const Point<N> p = f.grid.node(idx);
        for (int i = 0; i < N; ++i) out << format_full(p[i]) << ',';
        out << format_full(f.values[lin]) << '\n';
    });
    return out.str();
}

template <int N>
inline void write_field_csv(const std::filesystem::path& path, const ScalarField<N>& f) {
    atomic_write(path, field_to_csv<N>(f));
}

/// Rebuild a field from its CSV, inferring the grid from the coordinates.
/// The weight exponent is not stored in the file and must be supplied.
template <int N>
inline ScalarField<N> read_field_csv(const std::filesystem::path& path, WeightExponent a) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open field file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw validation_error("empty field file");

    std::vector<std::array<double, N + 1>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<double, N + 1> row{};
        std::size_t pos = 0;
        for (int c = 0; c <= N; ++c) {
            const std::size_t next = line.find(',', pos);
            row[c] = std::stod(line.substr(pos, next - pos));
            pos = (next == std::string::npos) ? line.size() : next + 1;
        }
        rows.push_back(row);
    }
    if (rows.empty()) throw validation_error("field file has no rows");

    std::array<std::vector<double>, N> axes;
    for (int c = 0; c < N; ++c) {
        std::vector<double> vals;
        for (const auto& r : rows) vals.push_back(r[c]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end(),
                               [](double x, double y) { return std::abs(x - y) < 1e-12; }),
                   vals.end());
        axes[c] = std::move(vals);
    }
    const int m_t = static_cast<int>(axes[0].size());
    const int m_v = static_cast<int>(axes[N - 1].size());
    const double L = axes[0].back();
    const double H = axes[N - 1].back();
    HalfSpaceGrid<N> grid(L, H, m_t, m_v);
    if (rows.size() != grid.node_count())
        throw validation_error("field file row count does not match the inferred grid");

    ScalarField<N> f(grid, a);
    std::vector<bool> seen(grid.node_count(), false);
    for (const auto& r : rows) {
        typename HalfSpaceGrid<N>::Index idx;
        for (int c = 0; c < N; ++c) {
            const double origin = (c < N - 1) ? -L : 0.0;
            const double s = (r[c] - origin) / grid.spacing;
            const int k = static_cast<int>(std::lround(s));
            if (std::abs(s - k) > 1e-6) throw validation_error("field file is not on a uniform lattice");
            idx[c] = k;
        }
        const std::size_t lin = grid.linear_index(idx);
        if (seen[lin]) throw validation_error("field file repeats a node");
        seen[lin] = true;
        f.values[lin] = r[N];
    }
    for (bool s : seen)
        if (!s) throw validation_error("field file misses nodes of the inferred grid");
    return f;
}

}  // namespace halfspace
