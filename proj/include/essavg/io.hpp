#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cover.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "nview.hpp"

namespace essavg {

struct MeasurementRecord {
    int i, j;
    Mat3 E;
    double weight;
};

struct MeasurementFile {
    int n = 0;
    std::vector<MeasurementRecord> records;
};

struct PoseRecord {
    int view;
    CameraPose pose;
};

struct PoseFile {
    int n = 0;
    std::vector<PoseRecord> records;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void atomic_write(const std::string& path, const std::string& body) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out << body;
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path + " (" + ec.message() + ")");
}

}  // namespace detail

inline void write_measurements(const std::string& path,
                               const MeasurementFile& f) {
    std::ostringstream out;
    out << "emeas 1 " << f.n << "\n";
    for (const auto& r : f.records) {
        out << r.i << " " << r.j;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) out << " " << detail::fmt(r.E(a, b));
        out << " " << detail::fmt(r.weight) << "\n";
    }
    detail::atomic_write(path, out.str());
}

inline MeasurementFile read_measurements(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    int version = 0;
    MeasurementFile f;
    if (!(in >> magic >> version >> f.n) || magic != "emeas" || version != 1 ||
        f.n < 2)
        throw InvalidInputError(path + ": bad measurement header");
    std::set<std::pair<int, int>> seen;
    MeasurementRecord r;
    while (in >> r.i >> r.j) {
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (!(in >> r.E(a, b)))
                    throw InvalidInputError(path + ": truncated record");
        if (!(in >> r.weight))
            throw InvalidInputError(path + ": truncated record");
        if (r.i < 0 || r.j <= r.i || r.j >= f.n)
            throw InvalidInputError(path + ": bad index pair");
        if (!seen.insert({r.i, r.j}).second)
            throw InvalidInputError(path + ": duplicate pair");
        if (!r.E.allFinite() || !std::isfinite(r.weight))
            throw InvalidInputError(path + ": non-finite entry");
        f.records.push_back(r);
    }
    return f;
}

inline void write_poses(const std::string& path, const PoseFile& f) {
    std::ostringstream out;
    out << "eposes 1 " << f.n << "\n";
    for (const auto& r : f.records) {
        out << r.view;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                out << " " << detail::fmt(r.pose.R(a, b));
        for (int a = 0; a < 3; ++a) out << " " << detail::fmt(r.pose.c(a));
        out << "\n";
    }
    detail::atomic_write(path, out.str());
}

inline PoseFile read_poses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    int version = 0;
    PoseFile f;
    if (!(in >> magic >> version >> f.n) || magic != "eposes" || version != 1 ||
        f.n < 1)
        throw InvalidInputError(path + ": bad pose header");
    std::set<int> seen;
    PoseRecord r;
    while (in >> r.view) {
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (!(in >> r.pose.R(a, b)))
                    throw InvalidInputError(path + ": truncated record");
        for (int a = 0; a < 3; ++a)
            if (!(in >> r.pose.c(a)))
                throw InvalidInputError(path + ": truncated record");
        if (r.view < 0 || r.view >= f.n)
            throw InvalidInputError(path + ": view index out of range");
        if (!seen.insert(r.view).second)
            throw InvalidInputError(path + ": duplicate view");
        if (!r.pose.R.allFinite() || !r.pose.c.allFinite())
            throw InvalidInputError(path + ": non-finite entry");
        if (!is_rotation(r.pose.R))
            throw InvalidInputError(path + ": record rotation is not in SO(3)");
        f.records.push_back(r);
    }
    return f;
}

inline ViewingGraph to_viewing_graph(const MeasurementFile& f) {
    ViewingGraph G;
    G.n = f.n;
    for (const auto& r : f.records) G.edges.push_back({r.i, r.j, r.weight, r.E});
    return G;
}

inline MultiviewEssential to_multiview(const MeasurementFile& f) {
    MultiviewEssential E(f.n);
    for (const auto& r : f.records) E.set_block(r.i, r.j, r.E);
    return E;
}

inline MeasurementFile measurements_from_graph(const ViewingGraph& G) {
    MeasurementFile f;
    f.n = G.n;
    for (const auto& e : G.edges) f.records.push_back({e.i, e.j, e.E, e.weight});
    return f;
}

inline MeasurementFile measurements_from_multiview(const MultiviewEssential& E,
                                                   double weight = 1.0) {
    MeasurementFile f;
    f.n = E.n;
    for (auto [i, j] : E.mask) f.records.push_back({i, j, E.block(i, j), weight});
    return f;
}

}  // namespace essavg
