#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "ortho/core/error.hpp"
#include "ortho/core/png_io.hpp"
#include "ortho/core/serial.hpp"
#include "ortho/synth/arch.hpp"
#include "ortho/synth/face.hpp"

namespace ortho::synth {

/// Posed triangle soup grouped by tooth name, as read back from OBJ.
struct PosedArch {
    struct Group {
        std::string name;
        TriMesh mesh;  // vertices already posed (arch frame, mm)
    };
    std::vector<Group> groups;
};

inline PosedArch pose_arch(const ToothArch& arch) {
    PosedArch out;
    for (const auto& tooth : arch.teeth) {
        PosedArch::Group g;
        g.name = tooth.id.name();
        g.mesh.tris = tooth.mesh.tris;
        g.mesh.vertices.reserve(tooth.mesh.vertices.size());
        for (const auto& v : tooth.mesh.vertices) g.mesh.vertices.push_back(tooth.pose.apply(v));
        out.groups.push_back(std::move(g));
    }
    return out;
}

/// OBJ with one `g` group per tooth; vertices are posed arch-frame mm.
inline void write_arch_obj(const std::string& path, const ToothArch& arch) {
    std::ofstream out(path);
    if (!out) throw IoError("write_arch_obj: cannot open " + path);
    out << std::setprecision(17);
    const PosedArch posed = pose_arch(arch);
    int base = 1;
    for (const auto& g : posed.groups) {
        out << "g " << g.name << "\n";
        for (const auto& v : g.mesh.vertices)
            out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
        for (const auto& t : g.mesh.tris)
            out << "f " << base + t[0] << " " << base + t[1] << " " << base + t[2] << "\n";
        base += int(g.mesh.vertices.size());
    }
}

inline PosedArch read_arch_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_arch_obj: cannot open " + path);
    PosedArch arch;
    std::vector<Vector3d> all_vertices;
    PosedArch::Group* cur = nullptr;
    std::map<const PosedArch::Group*, int> base_of;
    std::string line;
    int group_base = 0;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "g") {
            std::string name;
            ss >> name;
            arch.groups.push_back({name, {}});
            cur = &arch.groups.back();
            group_base = int(all_vertices.size());
        } else if (tag == "v") {
            double x, y, z;
            ss >> x >> y >> z;
            all_vertices.emplace_back(x, y, z);
            if (cur) cur->mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            if (!cur) throw IoError("read_arch_obj: face outside group in " + path);
            int a, b, c;
            ss >> a >> b >> c;
            cur->mesh.tris.push_back({a - 1 - group_base, b - 1 - group_base, c - 1 - group_base});
        }
    }
    return arch;
}

inline void write_landmarks_json(const std::string& path, const CuspLandmarks& lm) {
    json j;
    for (int k = 0; k < 4; ++k) {
        const auto& p = lm.points[size_t(k)];
        j[CuspLandmarks::names()[size_t(k)]] = {p.x(), p.y(), p.z()};
    }
    save_json(path, j);
}

inline CuspLandmarks read_landmarks_json(const std::string& path) {
    const json j = load_json(path);
    CuspLandmarks lm;
    for (int k = 0; k < 4; ++k) {
        const auto& a = j.at(CuspLandmarks::names()[size_t(k)]);
        lm.points[size_t(k)] = Vector3d(a.at(0).get<double>(), a.at(1).get<double>(),
                                        a.at(2).get<double>());
    }
    return lm;
}

inline void write_face(const std::string& png_path, const std::string& json_path,
                       const std::string& mask_path, const FaceSurrogate& face) {
    write_png(png_path, face.image);
    write_png(mask_path, to_u8(face.oral_mask));
    json j;
    j["mouth_box"] = {{"x", face.mouth_box.x}, {"y", face.mouth_box.y},
                      {"w", face.mouth_box.w}, {"h", face.mouth_box.h}};
    json lms;
    static const char* names[4] = {"central_l", "central_r", "lateral_l", "lateral_r"};
    for (int k = 0; k < 4; ++k)
        lms[names[k]] = {face.landmarks_2d[size_t(k)].x, face.landmarks_2d[size_t(k)].y};
    j["landmarks_2d"] = lms;
    j["skin_tone"] = {face.skin_tone[0], face.skin_tone[1], face.skin_tone[2]};
    j["cavity"] = {{"cx", face.cavity_center.x}, {"cy", face.cavity_center.y},
                   {"rx", face.cavity_rx}, {"ry", face.cavity_ry}};
    save_json(json_path, j);
}

inline FaceSurrogate read_face(const std::string& png_path, const std::string& json_path,
                               const std::string& mask_path) {
    FaceSurrogate face;
    face.image = read_png(png_path);
    ImageU8 mask = read_png(mask_path);
    face.oral_mask = ImageF(mask.h, mask.w, 1);
    for (size_t i = 0; i < mask.v.size(); ++i)
        face.oral_mask.v[i] = mask.v[i] >= 128 ? 1.0f : 0.0f;

    const json j = load_json(json_path);
    const auto& b = j.at("mouth_box");
    face.mouth_box = Rect{b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(),
                          b.at("h").get<int>()};
    static const char* names[4] = {"central_l", "central_r", "lateral_l", "lateral_r"};
    for (int k = 0; k < 4; ++k) {
        const auto& a = j.at("landmarks_2d").at(names[k]);
        face.landmarks_2d[size_t(k)] = Vec2{a.at(0).get<double>(), a.at(1).get<double>()};
    }
    const auto& st = j.at("skin_tone");
    face.skin_tone = {st.at(0).get<float>(), st.at(1).get<float>(), st.at(2).get<float>()};
    if (j.contains("cavity")) {
        const auto& cj = j.at("cavity");
        face.cavity_center = {cj.at("cx").get<double>(), cj.at("cy").get<double>()};
        face.cavity_rx = cj.at("rx").get<double>();
        face.cavity_ry = cj.at("ry").get<double>();
    }
    return face;
}

}  // namespace ortho::synth
