#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "fstnet/check.hpp"
#include "fstnet/tensor.hpp"

namespace fstnet {

// FSTN binary tensor format:
//   "FSTN" | version u8 = 1 | dtype u8 = 0 (float32) | rank u8 | reserved u8 = 0
//   rank x extent u32 LE | row-major payload, float32 LE
namespace detail {

inline void put_u32le(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                       static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    os.write(b, 4);
}

inline std::uint32_t get_u32le(std::istream& is, const std::string& what) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    require_data(is.good(), "fstn: truncated ", what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

inline void save_tensor_fstn(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require_data(os.good(), "fstn: cannot open ", path.string(), " for writing");
    os.write("FSTN", 4);
    const char header[4] = {1, 0, static_cast<char>(t.rank()), 0};
    os.write(header, 4);
    for (int d : t.dims) detail::put_u32le(os, static_cast<std::uint32_t>(d));
    for (float v : t.data) detail::put_u32le(os, std::bit_cast<std::uint32_t>(v));
    require_data(os.good(), "fstn: write failed for ", path.string());
}

inline Tensor load_tensor_fstn(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    require_data(is.good(), "fstn: cannot open ", path.string());
    char magic[4];
    is.read(magic, 4);
    require_data(is.good() && std::string(magic, 4) == "FSTN", "fstn: bad magic in ",
                 path.string());
    unsigned char header[4];
    is.read(reinterpret_cast<char*>(header), 4);
    require_data(is.good(), "fstn: truncated header in ", path.string());
    require_data(header[0] == 1, "fstn: unsupported version ", static_cast<int>(header[0]),
                 " in ", path.string());
    require_data(header[1] == 0, "fstn: unsupported dtype ", static_cast<int>(header[1]), " in ",
                 path.string());
    require_data(header[3] == 0, "fstn: nonzero reserved byte in ", path.string());
    const int rank = header[2];
    std::vector<int> dims(static_cast<std::size_t>(rank));
    for (int i = 0; i < rank; ++i) {
        dims[static_cast<std::size_t>(i)] =
            static_cast<int>(detail::get_u32le(is, "extent in " + path.string()));
        require_data(dims[static_cast<std::size_t>(i)] > 0, "fstn: zero extent in ",
                     path.string());
    }
    Tensor t(dims);
    for (auto& v : t.data)
        v = std::bit_cast<float>(detail::get_u32le(is, "payload in " + path.string()));
    return t;
}

// Checkpoint = directory of FSTN tensors plus a plain-text manifest:
//   line "config <key> <value>" for each model-config field
//   line "param <name> <file>" for each parameter, in registration order
struct CheckpointConfig {
    std::map<std::string, std::string> config;
    std::vector<std::pair<std::string, std::string>> params;  // name -> relative file
};

inline std::string checkpoint_file_name(const std::string& param_name) {
    return param_name + ".fstn";
}

inline void save_checkpoint_manifest(const std::filesystem::path& dir,
                                     const CheckpointConfig& cp) {
    std::ofstream os(dir / "manifest.txt", std::ios::trunc);
    require_data(os.good(), "checkpoint: cannot write manifest in ", dir.string());
    for (const auto& [k, v] : cp.config) os << "config\t" << k << "\t" << v << "\n";
    for (const auto& [name, file] : cp.params) os << "param\t" << name << "\t" << file << "\n";
    require_data(os.good(), "checkpoint: manifest write failed in ", dir.string());
}

inline CheckpointConfig load_checkpoint_manifest(const std::filesystem::path& dir) {
    std::ifstream is(dir / "manifest.txt");
    require_data(is.good(), "checkpoint: missing manifest in ", dir.string());
    CheckpointConfig cp;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
        require_data(t1 != std::string::npos && t2 != std::string::npos,
                     "checkpoint: malformed manifest line '", line, "' in ", dir.string());
        const std::string kind = line.substr(0, t1);
        const std::string key = line.substr(t1 + 1, t2 - t1 - 1);
        const std::string val = line.substr(t2 + 1);
        if (kind == "config")
            cp.config[key] = val;
        else if (kind == "param")
            cp.params.emplace_back(key, val);
        else
            throw DataError("checkpoint: unknown manifest entry '" + kind + "' in " +
                            dir.string());
    }
    return cp;
}

}  // namespace fstnet
