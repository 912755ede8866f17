#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "taskaug/gan/discriminator.hpp"
#include "taskaug/gan/generator.hpp"
#include "taskaug/seg/unet.hpp"

namespace taskaug::train {

// Training hyper-parameters. Defaults are the production values: batch 20,
// 10000 iterations, Adam(1e-3, 0.9, 0.999) for every network, lambda_adv 1,
// lambda_big 1e-3, class weights 0.1/0.3.
struct TrainConfig {
    int batch_size = 20;
    int iterations = 10000;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double lambda_adv = 1.0;
    double lambda_big = 1e-3;
    int val_interval = 100;
    std::uint64_t seed = 0;
    int grid = 224;  // network input size; divisible by 32
    int z_dim = 100;

    bool affine_enabled = true;
    double elastic_sigma = 10.0;
    double intensity_c_lo = 0.8, intensity_c_hi = 1.2;
    double intensity_b_lo = -0.1, intensity_b_hi = 0.1;
    double mixup_alpha = 0.2;

    seg::UNetWidths unet;
    gan::GenWidths gen;
    gan::DiscWidths disc;
};

// Reduced preset for the synthetic 32x32 phantom pipeline: small widths and
// batch so a full two-phase run fits on a CPU.
TrainConfig desk_scale_config();

// Flat key=value config file (lines, '#' comments). Unknown keys are errors.
TrainConfig load_config(const std::string& path, TrainConfig base = {});
void apply_config_line(TrainConfig& cfg, const std::string& line);
void dump_config(const TrainConfig& cfg, std::ostream& os);

}  // namespace taskaug::train
