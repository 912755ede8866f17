#include "taskaug/train/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "taskaug/core/errors.hpp"

namespace taskaug::train {

using nlohmann::json;

namespace {
constexpr char kMagic[8] = {'T', 'A', 'C', 'K', 'P', 'T', '1', '\n'};
}

void save_state(const std::string& path, const std::string& kind, const json& config,
                const std::vector<std::pair<std::string, Tensor*>>& tensors) {
    json manifest = json::array();
    for (const auto& [name, t] : tensors)
        manifest.push_back({{"name", name}, {"shape", t->shape()}});
    json header = {{"kind", kind}, {"config", config}, {"manifest", manifest}};
    const std::string hs = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write checkpoint " + path);
    const std::uint64_t hlen = hs.size();
    os.write(kMagic, 8);
    os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : tensors)
        os.write(reinterpret_cast<const char*>(t->data()),
                 static_cast<std::streamsize>(t->size() * sizeof(float)));
    if (!os) throw IoError("short write on checkpoint " + path);
}

namespace {

json read_full_header(std::ifstream& is, const std::string& path) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad checkpoint magic: " + path);
    std::uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw IoError("truncated checkpoint header: " + path);
    return json::parse(hs);
}

}  // namespace

json read_header(const std::string& path, std::string* kind) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read checkpoint " + path);
    json header = read_full_header(is, path);
    if (kind) *kind = header.at("kind").get<std::string>();
    return header.at("config");
}

void load_state(const std::string& path, const std::map<std::string, Tensor*>& tensors) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read checkpoint " + path);
    json header = read_full_header(is, path);
    for (const auto& entry : header.at("manifest")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
        auto it = tensors.find(name);
        if (it == tensors.end()) throw IoError("checkpoint tensor has no target: " + name);
        if (it->second->shape() != shape) throw ShapeMismatch("checkpoint tensor " + name);
        is.read(reinterpret_cast<char*>(it->second->data()),
                static_cast<std::streamsize>(it->second->size() * sizeof(float)));
    }
    if (!is) throw IoError("truncated checkpoint data: " + path);
}

namespace {

json gen_config(const gan::GeneratorNetwork& net) {
    return {{"generator_kind", kind_name(net.kind())},
            {"grid", net.grid()},
            {"z_dim", net.z_dim()},
            {"x_path", net.widths().x_path},
            {"z_path", net.widths().z_path},
            {"common", net.widths().common}};
}

}  // namespace

void save_generator(const std::string& path, gan::GeneratorNetwork& net) {
    save_state(path, "generator", gen_config(net), net.state_tensors());
}

gan::GeneratorNetwork load_generator(const std::string& path) {
    std::string kind;
    const json cfg = read_header(path, &kind);
    if (kind != "generator") throw IoError("not a generator checkpoint: " + path);
    gan::GenWidths widths;
    widths.x_path = cfg.at("x_path").get<std::array<int, 2>>();
    widths.z_path = cfg.at("z_path").get<std::array<int, 5>>();
    widths.common = cfg.at("common").get<std::array<int, 3>>();
    gan::GeneratorNetwork net(gan::kind_from_name(cfg.at("generator_kind").get<std::string>()),
                              cfg.at("grid").get<int>(), widths, cfg.at("z_dim").get<int>());
    std::map<std::string, Tensor*> targets;
    for (auto& [name, t] : net.state_tensors()) targets[name] = t;
    load_state(path, targets);
    return net;
}

void save_segmenter(const std::string& path, seg::SegmentationNetwork& net, int grid) {
    const json cfg = {{"enc", net.widths().enc}, {"grid", grid}};
    save_state(path, "segmenter", cfg, net.state_tensors());
}

seg::SegmentationNetwork load_segmenter(const std::string& path, int* grid_out) {
    std::string kind;
    const json cfg = read_header(path, &kind);
    if (kind != "segmenter") throw IoError("not a segmenter checkpoint: " + path);
    seg::UNetWidths widths;
    widths.enc = cfg.at("enc").get<std::array<int, 4>>();
    if (grid_out) *grid_out = cfg.at("grid").get<int>();
    seg::SegmentationNetwork net(widths);
    std::map<std::string, Tensor*> targets;
    for (auto& [name, t] : net.state_tensors()) targets[name] = t;
    load_state(path, targets);
    return net;
}

}  // namespace taskaug::train
