#pragma once

#include <map>
#include <string>
#include <vector>

#include "taskaug/data/splits.hpp"
#include "taskaug/data/volume.hpp"
#include "taskaug/train/config.hpp"
#include "taskaug/train/trainer.hpp"

namespace taskaug::xp {

// Method id: an aug-mode name, optionally with the "-ablation" suffix which
// trains the generators with lambda_adv = lambda_big = 0.
struct MethodSpec {
    std::string id;
    train::AugMode mode = train::AugMode::None;
    bool ablation = false;
};

MethodSpec parse_method(const std::string& id);

struct RunResult {
    std::string method_id;
    int n_labelled = 1;
    int subset_index = 0;
    int restart_index = 0;
    // structure name -> (subject id, dice) over the test set
    std::map<std::string, std::vector<std::pair<std::string, double>>> dice;
    bool failed = false;
    std::string error;
    double best_val_dice = -1.0;
};

void save_run_result(const RunResult& r, const std::string& path);
RunResult load_run_result(const std::string& path);

struct MatrixConfig {
    std::vector<std::string> methods;
    std::vector<int> n_labelled{1};
    int n_subsets = 5;
    int n_restarts = 3;
    std::string out_dir;
    int jobs = 1;
    bool save_segmenters = true;
};

// Executes n_subsets x n_restarts runs per (method, n_labelled). Completed
// run files under out_dir/runs are loaded instead of recomputed; generators
// are cached per (kind, n_labelled, subset, restart, lambda-config) under
// out_dir/gens and shared between methods. A failed run is persisted with
// its error and excluded from statistics by summarize().
std::vector<RunResult> run_matrix(const MatrixConfig& mc,
                                  const std::vector<data::VolumeRecord>& records,
                                  const data::DatasetSplit& split, const train::TrainConfig& cfg);

std::string run_file_path(const std::string& out_dir, const std::string& method, int n_labelled,
                          int subset, int restart);
std::string generator_cache_path(const std::string& out_dir, gan::GeneratorKind kind,
                                 int n_labelled, int subset, int restart, bool ablation);
std::string segmenter_cache_path(const std::string& out_dir, const std::string& method,
                                 int n_labelled, int subset, int restart);

}  // namespace taskaug::xp
