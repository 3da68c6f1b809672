#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "ortho/core/hash.hpp"
#include "ortho/core/serial.hpp"
#include "ortho/diffusion/ema.hpp"
#include "ortho/diffusion/schedule.hpp"
#include "ortho/nn/adam.hpp"
#include "ortho/nn/unet.hpp"

namespace ortho::diffusion {

namespace fs = std::filesystem;

// Checkpoint directory layout:
//   manifest.json  - format version, network config, schedule constants,
//                    step counter, config hash, tensor index, extra metadata
//   weights.bin    - live parameters, float32, registry order
//   ema.bin        - EMA shadow, float64, registry order
//   optim.bin      - optional Adam moments for resumable training

inline std::uint64_t config_hash(const json& cfg) {
    const std::string s = cfg.dump();
    return hash_bytes(s.data(), s.size());
}

namespace detail {

template <typename T>
void write_blobs(const std::string& path, const std::vector<std::vector<T>>& blobs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot open " + path);
    for (const auto& b : blobs)
        out.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size() * sizeof(T)));
    if (!out) throw IoError("checkpoint: write failed for " + path);
}

template <typename T>
void read_blobs(const std::string& path, std::vector<std::vector<T>>& blobs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path);
    for (auto& b : blobs) {
        in.read(reinterpret_cast<char*>(b.data()), std::streamsize(b.size() * sizeof(T)));
        if (!in) throw IoError("checkpoint: truncated " + path);
    }
}

}  // namespace detail

inline json unet_config_json(const nn::UNetConfig& c) {
    return json{{"in_ch", c.in_ch}, {"out_ch", c.out_ch}, {"base", c.base},
                {"emb_dim", c.emb_dim}, {"groups", c.groups}};
}

inline nn::UNetConfig unet_config_from_json(const json& j) {
    nn::UNetConfig c;
    c.in_ch = j.at("in_ch").get<int>();
    c.out_ch = j.at("out_ch").get<int>();
    c.base = j.at("base").get<int>();
    c.emb_dim = j.at("emb_dim").get<int>();
    c.groups = j.at("groups").get<int>();
    return c;
}

inline void save_checkpoint(const std::string& dir, const std::string& task,
                            const nn::UNet& net, const EmaState* ema,
                            const NoiseSchedule* sched, long step, const json& extra,
                            const nn::Adam* optim = nullptr) {
    fs::create_directories(dir);

    json manifest;
    manifest["format_version"] = 1;
    manifest["task"] = task;
    manifest["unet"] = unet_config_json(net.cfg);
    if (sched)
        manifest["schedule"] = {{"T", sched->T}, {"beta_start", sched->beta_start},
                                {"beta_end", sched->beta_end}};
    manifest["step"] = step;
    manifest["extra"] = extra;
    if (ema) manifest["ema_decay"] = ema->decay;

    json tensors = json::array();
    std::vector<std::vector<float>> weight_blobs;
    for (const auto& r : net.registry.refs) {
        tensors.push_back({{"name", r.name}, {"size", r.w->size()}});
        weight_blobs.push_back(*r.w);
    }
    manifest["tensors"] = tensors;

    json cfg_for_hash;
    cfg_for_hash["task"] = task;
    cfg_for_hash["unet"] = manifest["unet"];
    if (sched) cfg_for_hash["schedule"] = manifest["schedule"];
    cfg_for_hash["extra"] = extra;
    manifest["config_hash"] = hash_hex(config_hash(cfg_for_hash));

    detail::write_blobs((fs::path(dir) / "weights.bin").string(), weight_blobs);
    if (ema) detail::write_blobs((fs::path(dir) / "ema.bin").string(), ema->shadow);
    if (optim) {
        std::vector<std::vector<float>> moments = optim->m;
        moments.insert(moments.end(), optim->v.begin(), optim->v.end());
        detail::write_blobs((fs::path(dir) / "optim.bin").string(), moments);
        manifest["optim"] = {{"type", "adam"}, {"step_count", optim->step_count},
                             {"lr", optim->lr}};
    }
    save_json_atomic((fs::path(dir) / "manifest.json").string(), manifest);
}

struct LoadedCheckpoint {
    json manifest;
    nn::UNet net;
    EmaState ema;
    bool has_ema = false;
    NoiseSchedule sched;
    bool has_sched = false;
    long step = 0;

    /// Weights with the EMA shadow applied when present (inference default).
    void use_ema_weights() {
        if (has_ema) ema.load_into(net.registry);
    }
};

inline LoadedCheckpoint load_checkpoint(const std::string& dir,
                                        nn::Adam* optim_out = nullptr) {
    const fs::path p(dir);
    if (!fs::exists(p / "manifest.json"))
        throw StateError("checkpoint: missing manifest in " + dir);
    LoadedCheckpoint ck;
    ck.manifest = load_json((p / "manifest.json").string());

    ck.net.init(unet_config_from_json(ck.manifest.at("unet")), 0);
    const auto& tensors = ck.manifest.at("tensors");
    if (tensors.size() != ck.net.registry.refs.size())
        throw ConfigError("checkpoint: tensor count mismatch in " + dir);
    for (size_t i = 0; i < ck.net.registry.refs.size(); ++i) {
        const auto& r = ck.net.registry.refs[i];
        if (tensors.at(i).at("name").get<std::string>() != r.name ||
            tensors.at(i).at("size").get<size_t>() != r.w->size())
            throw ConfigError("checkpoint: tensor layout mismatch at " + r.name);
    }

    std::vector<std::vector<float>> weight_blobs;
    for (const auto& r : ck.net.registry.refs) weight_blobs.emplace_back(r.w->size());
    detail::read_blobs((p / "weights.bin").string(), weight_blobs);
    for (size_t i = 0; i < weight_blobs.size(); ++i)
        *ck.net.registry.refs[i].w = std::move(weight_blobs[i]);

    if (fs::exists(p / "ema.bin")) {
        ck.ema.attach(ck.net.registry, ck.manifest.value("ema_decay", 0.9999));
        detail::read_blobs((p / "ema.bin").string(), ck.ema.shadow);
        ck.has_ema = true;
    }
    if (ck.manifest.contains("schedule")) {
        const auto& sj = ck.manifest.at("schedule");
        ck.sched = build_schedule(sj.at("T").get<int>(), sj.at("beta_start").get<double>(),
                                  sj.at("beta_end").get<double>());
        ck.has_sched = true;
    }
    ck.step = ck.manifest.at("step").get<long>();

    if (optim_out && fs::exists(p / "optim.bin")) {
        optim_out->attach(ck.net.registry);
        std::vector<std::vector<float>> moments = optim_out->m;
        moments.insert(moments.end(), optim_out->v.begin(), optim_out->v.end());
        detail::read_blobs((p / "optim.bin").string(), moments);
        const size_t np = ck.net.registry.refs.size();
        for (size_t i = 0; i < np; ++i) {
            optim_out->m[i] = moments[i];
            optim_out->v[i] = moments[np + i];
        }
        optim_out->step_count = ck.manifest.at("optim").at("step_count").get<long>();
        optim_out->lr = ck.manifest.at("optim").at("lr").get<double>();
    }
    return ck;
}

}  // namespace ortho::diffusion
