#include "taskaug/train/config.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "taskaug/core/errors.hpp"

namespace taskaug::train {

namespace {

template <size_t N>
std::string join(const std::array<int, N>& a) {
    std::ostringstream os;
    for (size_t i = 0; i < N; ++i) os << (i ? "," : "") << a[static_cast<size_t>(i)];
    return os.str();
}

template <size_t N>
void parse_list(const std::string& s, std::array<int, N>& out) {
    std::istringstream is(s);
    std::string tok;
    size_t i = 0;
    while (std::getline(is, tok, ',')) {
        if (i >= N) throw std::invalid_argument("too many entries in width list: " + s);
        out[i++] = std::stoi(tok);
    }
    if (i != N) throw std::invalid_argument("expected " + std::to_string(N) + " entries: " + s);
}

void parse_range(const std::string& s, double& lo, double& hi) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("expected lo,hi range: " + s);
    lo = std::stod(s.substr(0, comma));
    hi = std::stod(s.substr(comma + 1));
}

}  // namespace

TrainConfig desk_scale_config() {
    TrainConfig cfg;
    cfg.batch_size = 10;
    cfg.iterations = 500;
    cfg.val_interval = 25;
    cfg.grid = 32;
    cfg.unet.enc = {8, 16, 32, 64};
    cfg.gen.x_path = {8, 8};
    cfg.gen.z_path = {16, 16, 16, 8, 8};
    cfg.gen.common = {16, 16, 8};
    cfg.disc.conv = {8, 16, 32, 32, 32};
    cfg.disc.fc = {32, 16};
    return cfg;
}

void apply_config_line(TrainConfig& cfg, const std::string& raw) {
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) return;  // blank
        throw std::invalid_argument("bad config line: " + raw);
    }
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        const auto e = s.find_last_not_of(" \t\r\n");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "train.batch_size") cfg.batch_size = std::stoi(val);
    else if (key == "train.iterations") cfg.iterations = std::stoi(val);
    else if (key == "train.lr") cfg.lr = std::stod(val);
    else if (key == "train.beta1") cfg.beta1 = std::stod(val);
    else if (key == "train.beta2") cfg.beta2 = std::stod(val);
    else if (key == "train.lambda_adv") cfg.lambda_adv = std::stod(val);
    else if (key == "train.lambda_big") cfg.lambda_big = std::stod(val);
    else if (key == "train.val_interval") cfg.val_interval = std::stoi(val);
    else if (key == "train.seed") cfg.seed = std::stoull(val);
    else if (key == "train.grid") cfg.grid = std::stoi(val);
    else if (key == "train.z_dim") cfg.z_dim = std::stoi(val);
    else if (key == "aug.affine.enabled") cfg.affine_enabled = (val == "1" || val == "true");
    else if (key == "aug.elastic.sigma") cfg.elastic_sigma = std::stod(val);
    else if (key == "aug.intensity.c_range") parse_range(val, cfg.intensity_c_lo, cfg.intensity_c_hi);
    else if (key == "aug.intensity.b_range") parse_range(val, cfg.intensity_b_lo, cfg.intensity_b_hi);
    else if (key == "aug.mixup.alpha") cfg.mixup_alpha = std::stod(val);
    else if (key == "net.unet.enc") parse_list(val, cfg.unet.enc);
    else if (key == "net.gen.x") parse_list(val, cfg.gen.x_path);
    else if (key == "net.gen.z") parse_list(val, cfg.gen.z_path);
    else if (key == "net.gen.common") parse_list(val, cfg.gen.common);
    else if (key == "net.disc.conv") parse_list(val, cfg.disc.conv);
    else if (key == "net.disc.fc") parse_list(val, cfg.disc.fc);
    else throw std::invalid_argument("unknown config key: " + key);
}

TrainConfig load_config(const std::string& path, TrainConfig base) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read config " + path);
    std::string line;
    while (std::getline(is, line)) apply_config_line(base, line);
    return base;
}

void dump_config(const TrainConfig& cfg, std::ostream& os) {
    os << "train.batch_size = " << cfg.batch_size << "\n";
    os << "train.iterations = " << cfg.iterations << "\n";
    os << "train.lr = " << cfg.lr << "\n";
    os << "train.beta1 = " << cfg.beta1 << "\n";
    os << "train.beta2 = " << cfg.beta2 << "\n";
    os << "train.lambda_adv = " << cfg.lambda_adv << "\n";
    os << "train.lambda_big = " << cfg.lambda_big << "\n";
    os << "train.val_interval = " << cfg.val_interval << "\n";
    os << "train.seed = " << cfg.seed << "\n";
    os << "train.grid = " << cfg.grid << "\n";
    os << "train.z_dim = " << cfg.z_dim << "\n";
    os << "aug.affine.enabled = " << (cfg.affine_enabled ? "true" : "false") << "\n";
    os << "aug.elastic.sigma = " << cfg.elastic_sigma << "\n";
    os << "aug.intensity.c_range = " << cfg.intensity_c_lo << "," << cfg.intensity_c_hi << "\n";
    os << "aug.intensity.b_range = " << cfg.intensity_b_lo << "," << cfg.intensity_b_hi << "\n";
    os << "aug.mixup.alpha = " << cfg.mixup_alpha << "\n";
    os << "net.unet.enc = " << join(cfg.unet.enc) << "\n";
    os << "net.gen.x = " << join(cfg.gen.x_path) << "\n";
    os << "net.gen.z = " << join(cfg.gen.z_path) << "\n";
    os << "net.gen.common = " << join(cfg.gen.common) << "\n";
    os << "net.disc.conv = " << join(cfg.disc.conv) << "\n";
    os << "net.disc.fc = " << join(cfg.disc.fc) << "\n";
}

}  // namespace taskaug::train
