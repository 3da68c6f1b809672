#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ortho/core/error.hpp"
#include "ortho/core/image.hpp"

namespace ortho {

using json = nlohmann::json;

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_json: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("load_json: parse error in " + path + ": " + e.what());
    }
    return j;
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("save_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

/// Atomic-replace write for manifests: write to a temp name, then rename.
inline void save_json_atomic(const std::string& path, const json& j) {
    const std::string tmp = path + ".tmp";
    save_json(tmp, j);
    std::filesystem::rename(tmp, path);
}

// 32-bit float map sidecar ("ORF1"): magic, u32 h, w, c, then h*w*c floats LE.
inline void write_float_map(const std::string& path, const ImageF& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_float_map: cannot open " + path);
    const char magic[4] = {'O', 'R', 'F', '1'};
    std::uint32_t dims[3] = {std::uint32_t(img.h), std::uint32_t(img.w), std::uint32_t(img.c)};
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(img.v.data()),
              std::streamsize(img.v.size() * sizeof(float)));
    if (!out) throw IoError("write_float_map: write failed for " + path);
}

inline ImageF read_float_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_float_map: cannot open " + path);
    char magic[4];
    std::uint32_t dims[3];
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in || std::memcmp(magic, "ORF1", 4) != 0)
        throw IoError("read_float_map: bad header in " + path);
    ImageF img(int(dims[0]), int(dims[1]), int(dims[2]));
    in.read(reinterpret_cast<char*>(img.v.data()), std::streamsize(img.v.size() * sizeof(float)));
    if (!in) throw IoError("read_float_map: truncated " + path);
    return img;
}

}  // namespace ortho
