#include "taskaug/xp/matrix.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "taskaug/core/errors.hpp"
#include "taskaug/seg/dice.hpp"
#include "taskaug/train/checkpoint.hpp"

namespace taskaug::xp {

namespace fs = std::filesystem;
using nlohmann::json;

MethodSpec parse_method(const std::string& id) {
    MethodSpec spec;
    spec.id = id;
    std::string base = id;
    const std::string suffix = "-ablation";
    if (base.size() > suffix.size() && base.ends_with(suffix)) {
        spec.ablation = true;
        base = base.substr(0, base.size() - suffix.size());
    }
    spec.mode = train::aug_mode_from_name(base);
    return spec;
}

void save_run_result(const RunResult& r, const std::string& path) {
    json j = {{"method_id", r.method_id},   {"n_labelled", r.n_labelled},
              {"subset_index", r.subset_index}, {"restart_index", r.restart_index},
              {"failed", r.failed},         {"error", r.error},
              {"best_val_dice", r.best_val_dice}};
    json dice = json::object();
    for (const auto& [structure, values] : r.dice) {
        json list = json::array();
        for (const auto& [subject, d] : values) list.push_back({{"subject", subject}, {"dice", d}});
        dice[structure] = list;
    }
    j["dice"] = dice;
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream os(path);
    if (!os) throw IoError("cannot write run result " + path);
    os << j.dump(2) << "\n";
}

RunResult load_run_result(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read run result " + path);
    json j = json::parse(is);
    RunResult r;
    r.method_id = j.at("method_id").get<std::string>();
    r.n_labelled = j.at("n_labelled").get<int>();
    r.subset_index = j.at("subset_index").get<int>();
    r.restart_index = j.at("restart_index").get<int>();
    r.failed = j.at("failed").get<bool>();
    r.error = j.at("error").get<std::string>();
    r.best_val_dice = j.value("best_val_dice", -1.0);
    for (const auto& [structure, list] : j.at("dice").items()) {
        auto& vec = r.dice[structure];
        for (const auto& e : list)
            vec.emplace_back(e.at("subject").get<std::string>(), e.at("dice").get<double>());
    }
    return r;
}

std::string run_file_path(const std::string& out_dir, const std::string& method, int n_labelled,
                          int subset, int restart) {
    return (fs::path(out_dir) / "runs" /
            (method + "_nl" + std::to_string(n_labelled) + "_s" + std::to_string(subset) + "_r" +
             std::to_string(restart) + ".json"))
        .string();
}

std::string generator_cache_path(const std::string& out_dir, gan::GeneratorKind kind,
                                 int n_labelled, int subset, int restart, bool ablation) {
    return (fs::path(out_dir) / "gens" /
            (std::string(gan::kind_name(kind)) + "_nl" + std::to_string(n_labelled) + "_s" +
             std::to_string(subset) + "_r" + std::to_string(restart) +
             (ablation ? "_ablation" : "") + ".ckpt"))
        .string();
}

std::string segmenter_cache_path(const std::string& out_dir, const std::string& method,
                                 int n_labelled, int subset, int restart) {
    return (fs::path(out_dir) / "segs" /
            (method + "_nl" + std::to_string(n_labelled) + "_s" + std::to_string(subset) + "_r" +
             std::to_string(restart) + ".ckpt"))
        .string();
}

namespace {

struct RunTask {
    MethodSpec method;
    int n_labelled, subset, restart;
};

struct GenTask {
    gan::GeneratorKind kind;
    bool ablation;
    int n_labelled, subset, restart;

    bool operator<(const GenTask& o) const {
        return std::tie(kind, ablation, n_labelled, subset, restart) <
               std::tie(o.kind, o.ablation, o.n_labelled, o.subset, o.restart);
    }
};

std::uint64_t run_seed(const train::TrainConfig& cfg, int n_labelled, int subset, int restart) {
    return derive_seed(cfg.seed, static_cast<std::uint64_t>(n_labelled),
                       static_cast<std::uint64_t>(subset), static_cast<std::uint64_t>(restart));
}

train::TrainData make_run_data(const std::vector<data::VolumeRecord>& records,
                               const data::DatasetSplit& split, int n_labelled, int subset) {
    std::vector<std::pair<std::string, std::string>> id_group;
    for (const auto& r : records) id_group.emplace_back(r.subject_id, r.group);
    train::TrainData data;
    data.records = &records;
    data.split = split;
    data.labelled_ids = data::sample_labelled_subset(split, id_group, n_labelled, subset);
    return data;
}

// Runs tasks over a small thread pool; exceptions propagate after join.
template <typename Task, typename Fn>
void parallel_for(const std::vector<Task>& tasks, int jobs, Fn&& fn) {
    if (jobs <= 1) {
        for (const auto& t : tasks) fn(t);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::future<void>> workers;
    const int n_workers = std::min<int>(jobs, static_cast<int>(tasks.size()));
    for (int i = 0; i < n_workers; ++i)
        workers.push_back(std::async(std::launch::async, [&] {
            for (;;) {
                const size_t k = next.fetch_add(1);
                if (k >= tasks.size()) return;
                fn(tasks[k]);
            }
        }));
    for (auto& w : workers) w.get();
}

}  // namespace

std::vector<RunResult> run_matrix(const MatrixConfig& mc,
                                  const std::vector<data::VolumeRecord>& records,
                                  const data::DatasetSplit& split, const train::TrainConfig& cfg) {
    if (records.empty()) throw EmptySplit("no preprocessed records available");
    fs::create_directories(fs::path(mc.out_dir) / "runs");
    fs::create_directories(fs::path(mc.out_dir) / "gens");
    if (mc.save_segmenters) fs::create_directories(fs::path(mc.out_dir) / "segs");

    std::vector<RunTask> runs;
    std::set<GenTask> gen_set;
    for (const auto& mid : mc.methods) {
        const MethodSpec method = parse_method(mid);
        for (int nl : mc.n_labelled)
            for (int s = 0; s < mc.n_subsets; ++s)
                for (int r = 0; r < mc.n_restarts; ++r) {
                    runs.push_back({method, nl, s, r});
                    if (fs::exists(run_file_path(mc.out_dir, method.id, nl, s, r))) continue;
                    if (train::aug_mode_needs_gd(method.mode))
                        gen_set.insert({gan::GeneratorKind::Deformation, method.ablation, nl, s, r});
                    if (train::aug_mode_needs_gi(method.mode))
                        gen_set.insert({gan::GeneratorKind::Intensity, method.ablation, nl, s, r});
                }
    }

    // First train any missing generators (shared across methods), then the
    // runs. A generator-training failure is logged here; the runs that need
    // the missing checkpoint fail at load time and are recorded as failed.
    std::vector<GenTask> gens(gen_set.begin(), gen_set.end());
    parallel_for(gens, mc.jobs, [&](const GenTask& t) {
        const std::string path = generator_cache_path(mc.out_dir, t.kind, t.n_labelled, t.subset,
                                                      t.restart, t.ablation);
        if (fs::exists(path)) return;
        try {
            train::TrainConfig run_cfg = cfg;
            run_cfg.seed = run_seed(cfg, t.n_labelled, t.subset, t.restart);
            if (t.ablation) {
                run_cfg.lambda_adv = 0.0;
                run_cfg.lambda_big = 0.0;
            }
            const auto data = make_run_data(records, split, t.n_labelled, t.subset);
            auto res = train::train_augmentor_joint(t.kind, data, run_cfg);
            train::save_generator(path, *res.generator);
        } catch (const std::exception& e) {
            std::cerr << "[run_matrix] generator " << gan::kind_name(t.kind) << " nl="
                      << t.n_labelled << " s=" << t.subset << " r=" << t.restart
                      << " failed: " << e.what() << "\n";
        }
    });

    std::vector<RunResult> results(runs.size());
    std::vector<size_t> order(runs.size());
    for (size_t i = 0; i < runs.size(); ++i) order[i] = i;
    parallel_for(order, mc.jobs, [&](size_t idx) {
        const RunTask& t = runs[idx];
        const std::string path =
            run_file_path(mc.out_dir, t.method.id, t.n_labelled, t.subset, t.restart);
        if (fs::exists(path)) {
            results[idx] = load_run_result(path);
            return;
        }
        RunResult r;
        r.method_id = t.method.id;
        r.n_labelled = t.n_labelled;
        r.subset_index = t.subset;
        r.restart_index = t.restart;
        try {
            train::TrainConfig run_cfg = cfg;
            run_cfg.seed = run_seed(cfg, t.n_labelled, t.subset, t.restart);
            const auto data = make_run_data(records, split, t.n_labelled, t.subset);

            std::vector<gan::GeneratorNetwork> gen_storage;
            gen_storage.reserve(2);
            std::vector<gan::GeneratorNetwork*> gen_ptrs;
            for (gan::GeneratorKind kind :
                 {gan::GeneratorKind::Deformation, gan::GeneratorKind::Intensity}) {
                const bool needed = kind == gan::GeneratorKind::Deformation
                                        ? train::aug_mode_needs_gd(t.method.mode)
                                        : train::aug_mode_needs_gi(t.method.mode);
                if (!needed) continue;
                gen_storage.push_back(train::load_generator(generator_cache_path(
                    mc.out_dir, kind, t.n_labelled, t.subset, t.restart, t.method.ablation)));
            }
            for (auto& g : gen_storage) gen_ptrs.push_back(&g);

            auto phase2 = train::train_segmenter_augmented(gen_ptrs, t.method.mode, data, run_cfg);
            r.best_val_dice = phase2.best_val_dice;

            for (const auto* rec : train::select_records(records, split.test_ids)) {
                const auto pred = train::predict_volume(*phase2.best, *rec);
                for (int structure : {data::kRV, data::kMyo, data::kLV})
                    r.dice[data::structure_name(structure)].emplace_back(
                        rec->subject_id, seg::dice_score(pred, rec->labels, structure));
            }
            if (mc.save_segmenters)
                train::save_segmenter(segmenter_cache_path(mc.out_dir, t.method.id, t.n_labelled,
                                                           t.subset, t.restart),
                                      *phase2.best, run_cfg.grid);
        } catch (const std::exception& e) {
            r.failed = true;
            r.error = e.what();
            std::cerr << "[run_matrix] run " << t.method.id << " nl=" << t.n_labelled
                      << " s=" << t.subset << " r=" << t.restart << " failed: " << e.what()
                      << "\n";
        }
        save_run_result(r, path);
        results[idx] = r;
    });
    return results;
}

}  // namespace taskaug::xp
