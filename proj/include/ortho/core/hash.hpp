#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "ortho/core/error.hpp"
#include "ortho/core/rng.hpp"

namespace ortho {

inline std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << h;
    return os.str();
}

inline std::uint64_t hash_bytes(const void* data, size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_file(const std::string& path, std::uint64_t h = 0xcbf29ce484222325ULL) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("hash_file: cannot open " + path);
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = hash_bytes(buf, size_t(in.gcount()), h);
    return h;
}

/// Order-dependent hash of a file list (relative names + contents).
inline std::uint64_t hash_files(const std::vector<std::string>& names,
                                const std::vector<std::string>& paths) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (size_t i = 0; i < names.size(); ++i) {
        h = hash_bytes(names[i].data(), names[i].size(), h);
        h = hash_file(paths[i], h);
    }
    return h;
}

}  // namespace ortho
