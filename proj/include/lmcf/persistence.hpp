#pragma once

// On-disk trajectory layout:
//
//   <dir>/manifest.json         format_version, grid, theta0, dt, times,
//                               snapshot file names, sha256 per file, config
//   <dir>/snapshot_00000.bin    node values as little-endian float64, in the
//   <dir>/snapshot_00001.bin    row-major node order of GridSpec
//   ...

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "lmcf/errors.hpp"
#include "lmcf/grid.hpp"
#include "lmcf/initial_data.hpp"
#include "lmcf/trajectory.hpp"

namespace lmcf {

inline constexpr int kTrajectoryFormatVersion = 1;

struct TrajectoryManifest {
    int format_version = kTrajectoryFormatVersion;
    GridSpec grid;
    double theta0 = 0.0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::string> snapshot_files;
    std::vector<std::string> checksums;  // sha256, lowercase hex
    nlohmann::json config = nlohmann::json::object();
};

inline std::string sha256_hex(const std::vector<unsigned char>& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

inline std::vector<unsigned char> encode_le(const ScalarField& f) {
    std::vector<unsigned char> out(f.size() * 8);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(f.values[i]);
        for (int b = 0; b < 8; ++b) out[i * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
    }
    return out;
}

inline void write_raw_field(const ScalarField& f, const std::filesystem::path& path) {
    const auto bytes = encode_le(f);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

inline nlohmann::json grid_to_json(const GridSpec& g) {
    return {{"dim", g.dim()}, {"half_width", g.half_width()}, {"nodes_per_axis", g.nodes_per_axis()}};
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
    return GridSpec(j.at("dim").get<int>(), j.at("half_width").get<double>(), j.at("nodes_per_axis").get<int>());
}

inline nlohmann::json to_json(const TrajectoryManifest& m) {
    return {{"format_version", m.format_version},
            {"grid", grid_to_json(m.grid)},
            {"theta0", m.theta0},
            {"dt", m.dt},
            {"times", m.times},
            {"snapshots", m.snapshot_files},
            {"checksums", m.checksums},
            {"config", m.config}};
}

inline TrajectoryManifest save_trajectory(const Trajectory& traj, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    TrajectoryManifest m;
    m.grid = traj.grid;
    m.theta0 = traj.theta0;
    m.dt = traj.dt;
    m.times = traj.times;
    m.config = traj.provenance;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%05zu.bin", k);
        const auto bytes = encode_le(traj.snapshots[k]);
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + (dir / name).string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("short write to " + (dir / name).string());
        m.snapshot_files.emplace_back(name);
        m.checksums.push_back(sha256_hex(bytes));
    }
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw Error("cannot write manifest in " + dir.string());
    out << to_json(m).dump(2) << '\n';
    return m;
}

inline TrajectoryManifest read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw LoadError(LoadError::Kind::io, "cannot open " + (dir / "manifest.json").string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(LoadError::Kind::format, "manifest.json is not valid JSON: " + std::string(e.what()));
    }
    TrajectoryManifest m;
    try {
        m.format_version = j.at("format_version").get<int>();
        if (m.format_version != kTrajectoryFormatVersion)
            throw LoadError(LoadError::Kind::version, "unsupported trajectory format version " +
                                                          std::to_string(m.format_version));
        m.grid = grid_from_json(j.at("grid"));
        m.theta0 = j.at("theta0").get<double>();
        m.dt = j.value("dt", 0.0);
        m.times = j.at("times").get<std::vector<double>>();
        m.snapshot_files = j.at("snapshots").get<std::vector<std::string>>();
        m.checksums = j.at("checksums").get<std::vector<std::string>>();
        m.config = j.value("config", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(LoadError::Kind::format, "malformed manifest: " + std::string(e.what()));
    } catch (const ConfigError& e) {
        throw LoadError(LoadError::Kind::format, "manifest grid is invalid: " + std::string(e.what()));
    }
    if (m.times.size() != m.snapshot_files.size() || m.checksums.size() != m.snapshot_files.size())
        throw LoadError(LoadError::Kind::format, "manifest times, snapshots and checksums differ in length");
    return m;
}

inline Trajectory load_trajectory(const std::filesystem::path& dir) {
    const auto m = read_manifest(dir);
    Trajectory traj;
    traj.grid = m.grid;
    traj.theta0 = m.theta0;
    traj.dt = m.dt;
    traj.times = m.times;
    traj.provenance = m.config;
    const std::size_t want = m.grid.node_count() * 8;
    for (std::size_t k = 0; k < m.snapshot_files.size(); ++k) {
        const auto path = dir / m.snapshot_files[k];
        std::ifstream in(path, std::ios::binary);
        if (!in) throw LoadError(LoadError::Kind::io, "cannot open snapshot " + path.string());
        std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (bytes.size() < want)
            throw LoadError(LoadError::Kind::truncated, "snapshot " + m.snapshot_files[k] + " is truncated: " +
                                                            std::to_string(bytes.size()) + " of " +
                                                            std::to_string(want) + " bytes");
        if (bytes.size() > want)
            throw LoadError(LoadError::Kind::format, "snapshot " + m.snapshot_files[k] + " has trailing bytes");
        if (sha256_hex(bytes) != m.checksums[k])
            throw LoadError(LoadError::Kind::checksum, "checksum mismatch for snapshot " + m.snapshot_files[k]);
        ScalarField f(m.grid);
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(b)]) << (8 * b);
            f.values[i] = std::bit_cast<double>(bits);
        }
        traj.snapshots.push_back(std::move(f));
    }
    return traj;
}

}  // namespace lmcf
