#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "taskaug/core/errors.hpp"
#include "taskaug/data/pipeline.hpp"
#include "taskaug/data/splits.hpp"
#include "taskaug/data/synthetic.hpp"
#include "taskaug/data/volume_io.hpp"
#include "taskaug/train/checkpoint.hpp"
#include "taskaug/train/config.hpp"
#include "taskaug/train/trainer.hpp"
#include "taskaug/xp/matrix.hpp"
#include "taskaug/xp/report.hpp"

namespace fs = std::filesystem;
using namespace taskaug;

namespace {

train::TrainConfig resolve_config(const std::string& config_path, bool desk_preset) {
    train::TrainConfig cfg = desk_preset ? train::desk_scale_config() : train::TrainConfig{};
    if (!config_path.empty()) cfg = train::load_config(config_path, cfg);
    return cfg;
}

train::TrainData make_train_data(const std::vector<data::VolumeRecord>& records,
                                 const data::DatasetSplit& split, int n_labelled, int run_index) {
    std::vector<std::pair<std::string, std::string>> id_group;
    for (const auto& r : records) id_group.emplace_back(r.subject_id, r.group);
    train::TrainData data;
    data.records = &records;
    data.split = split;
    data.labelled_ids = data::sample_labelled_subset(split, id_group, n_labelled, run_index);
    return data;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"taskaug: task-driven augmentation for cardiac MR segmentation"};
    app.require_subcommand(1);

    // --- synth-data -------------------------------------------------------
    auto* synth = app.add_subcommand("synth-data", "generate the synthetic phantom dataset");
    int synth_n = 60, synth_size = 32, synth_slices = 6;
    std::uint64_t synth_seed = 1;
    std::string synth_out = "synth_data";
    synth->add_option("--n", synth_n, "number of subjects (>= 12)");
    synth->add_option("--seed", synth_seed, "dataset seed");
    synth->add_option("--size", synth_size, "grid size (divisible by 32)");
    synth->add_option("--slices", synth_slices, "slices per volume");
    synth->add_option("--out", synth_out, "output directory")->required();

    // --- preprocess ---------------------------------------------------------
    auto* prep = app.add_subcommand("preprocess",
                                    "normalize + resample NIfTI volumes into .tav records");
    std::string prep_in, prep_out, prep_phase = "ES";
    double prep_spacing = data::kTargetSpacingMm;
    int prep_size = data::kTargetSize;
    prep->add_option("--input-dir", prep_in, "dir with <id>_<phase>_image.nii, "
                                             "<id>_<phase>_label.nii and groups.txt")
        ->required();
    prep->add_option("--output-dir", prep_out)->required();
    prep->add_option("--phase", prep_phase, "cardiac phase selector (default ES)");
    prep->add_option("--target-spacing", prep_spacing, "in-plane spacing in mm");
    prep->add_option("--size", prep_size, "output grid size");

    // --- make-splits --------------------------------------------------------
    auto* mksplit = app.add_subcommand("make-splits", "build the group-balanced dataset split");
    std::string split_data, split_out = "splits.txt";
    std::uint64_t split_seed = 0;
    mksplit->add_option("--data", split_data, "preprocessed .tav directory")->required();
    mksplit->add_option("--seed", split_seed);
    mksplit->add_option("--out", split_out);

    // --- train-aug ----------------------------------------------------------
    auto* taug = app.add_subcommand("train-aug", "phase 1: jointly train one augmentation "
                                                 "generator with S and D");
    std::string taug_kind, taug_config, taug_split, taug_data, taug_out = "generator.ckpt";
    int taug_nl = 1, taug_run = 0;
    bool taug_desk = false;
    taug->add_option("--kind", taug_kind, "gd | gi")->required();
    taug->add_option("--config", taug_config, "key=value config file");
    taug->add_flag("--desk-preset", taug_desk, "start from the desk-scale preset");
    taug->add_option("--split", taug_split)->required();
    taug->add_option("--data", taug_data, ".tav directory")->required();
    taug->add_option("--n-labelled", taug_nl, "1 or 3");
    taug->add_option("--labelled-run", taug_run, "labelled subset index (0..4)");
    taug->add_option("--out", taug_out);

    // --- train-seg ----------------------------------------------------------
    auto* tseg = app.add_subcommand("train-seg", "phase 2: retrain the segmenter with frozen "
                                                 "generators");
    std::string tseg_mode = "none", tseg_config, tseg_split, tseg_data, tseg_out = "segmenter.ckpt";
    std::vector<std::string> tseg_gens;
    int tseg_nl = 1, tseg_run = 0;
    bool tseg_desk = false;
    tseg->add_option("--aug-mode", tseg_mode,
                     "none|affine|elastic|intensity|gd|gi|gd+gi|mixup|gd+gi+mixup");
    tseg->add_option("--generators", tseg_gens, "generator checkpoints")->delimiter(',');
    tseg->add_option("--config", tseg_config);
    tseg->add_flag("--desk-preset", tseg_desk);
    tseg->add_option("--split", tseg_split)->required();
    tseg->add_option("--data", tseg_data)->required();
    tseg->add_option("--n-labelled", tseg_nl);
    tseg->add_option("--labelled-run", tseg_run);
    tseg->add_option("--out", tseg_out);

    // --- experiment ---------------------------------------------------------
    auto* xp_cmd = app.add_subcommand("experiment", "run matrices and reports");
    xp_cmd->require_subcommand(1);
    auto* xrun = xp_cmd->add_subcommand("run", "execute the run matrix");
    std::vector<std::string> xrun_methods;
    std::vector<int> xrun_nl{1};
    std::string xrun_out, xrun_data, xrun_split, xrun_config;
    int xrun_subsets = 5, xrun_restarts = 3, xrun_jobs = 1;
    bool xrun_desk = false;
    xrun->add_option("--methods", xrun_methods, "method ids (aug modes, '-ablation' suffix allowed)")
        ->required()
        ->delimiter(',');
    xrun->add_option("--n-labelled", xrun_nl)->delimiter(',');
    xrun->add_option("--out", xrun_out)->required();
    xrun->add_option("--data", xrun_data)->required();
    xrun->add_option("--split", xrun_split)->required();
    xrun->add_option("--config", xrun_config);
    xrun->add_flag("--desk-preset", xrun_desk);
    xrun->add_option("--subsets", xrun_subsets, "labelled subsets per method");
    xrun->add_option("--restarts", xrun_restarts, "restarts per subset");
    xrun->add_option("--jobs", xrun_jobs, "parallel runs");

    auto* xrep = xp_cmd->add_subcommand("report", "summarize a finished matrix");
    std::string xrep_in, xrep_out = "report", xrep_data, xrep_split;
    bool xrep_table = false, xrep_figures = false;
    std::vector<std::string> xrep_baselines;
    int xrep_panel_slices = 1;
    xrep->add_option("--in", xrep_in, "matrix output directory")->required();
    xrep->add_option("--out-dir", xrep_out);
    xrep->add_flag("--table-csv", xrep_table, "emit table.csv/table.txt/significance.csv");
    xrep->add_flag("--figures", xrep_figures, "emit qualitative panels and generator sheets");
    xrep->add_option("--data", xrep_data, ".tav directory (needed for --figures)");
    xrep->add_option("--split", xrep_split, "split file (needed for --figures)");
    xrep->add_option("--baseline", xrep_baselines, "method=baseline significance pairs")
        ->delimiter(',');
    xrep->add_option("--panel-slices", xrep_panel_slices, "slices per test subject in panels");

    // --- dump-config ---------------------------------------------------------
    auto* dump = app.add_subcommand("dump-config", "print the effective configuration");
    std::string dump_config_path;
    bool dump_desk = false;
    dump->add_option("--config", dump_config_path);
    dump->add_flag("--desk-preset", dump_desk);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            const auto records =
                data::make_synthetic_dataset(synth_n, synth_seed, synth_size, synth_slices);
            data::save_volume_dir(records, synth_out);
            std::cout << "wrote " << records.size() << " volumes to " << synth_out << "\n";
        } else if (*prep) {
            const auto raw = data::ingest_nifti_dir(prep_in, prep_phase);
            fs::create_directories(prep_out);
            int kept = 0;
            for (const auto& rec : raw) {
                try {
                    data::VolumeRecord pre = data::preprocess_record(rec, prep_spacing, prep_size);
                    data::save_volume(pre,
                                      (fs::path(prep_out) / (rec.subject_id + ".tav")).string());
                    ++kept;
                } catch (const DegenerateVolume& e) {
                    std::cerr << "skipping " << rec.subject_id << ": " << e.what() << "\n";
                }
            }
            std::cout << "preprocessed " << kept << " of " << raw.size() << " subjects to "
                      << prep_out << "\n";
        } else if (*mksplit) {
            const auto records = data::load_volume_dir(split_data);
            const auto split = data::make_split(records, split_seed);
            data::save_split(split, split_out);
            std::cout << "wrote split to " << split_out << "\n";
        } else if (*taug) {
            const auto cfg = resolve_config(taug_config, taug_desk);
            const auto records = data::load_volume_dir(taug_data);
            const auto split = data::load_split(taug_split);
            const auto data = make_train_data(records, split, taug_nl, taug_run);
            auto res = train::train_augmentor_joint(gan::kind_from_name(taug_kind), data, cfg);
            train::save_generator(taug_out, *res.generator);
            std::cout << "trained " << taug_kind << " generator -> " << taug_out
                      << " (final seg loss " << res.final_loss_seg << ")\n";
        } else if (*tseg) {
            const auto cfg = resolve_config(tseg_config, tseg_desk);
            const auto records = data::load_volume_dir(tseg_data);
            const auto split = data::load_split(tseg_split);
            const auto data = make_train_data(records, split, tseg_nl, tseg_run);
            std::vector<gan::GeneratorNetwork> gens;
            gens.reserve(tseg_gens.size());
            for (const auto& p : tseg_gens) gens.push_back(train::load_generator(p));
            std::vector<gan::GeneratorNetwork*> ptrs;
            for (auto& g : gens) ptrs.push_back(&g);
            auto res = train::train_segmenter_augmented(
                ptrs, train::aug_mode_from_name(tseg_mode), data, cfg);
            train::save_segmenter(tseg_out, *res.best, cfg.grid);
            std::cout << "best validation dice " << res.best_val_dice << " at iteration "
                      << res.best_iteration << " -> " << tseg_out << "\n";
        } else if (*xrun) {
            const auto cfg = resolve_config(xrun_config, xrun_desk);
            const auto records = data::load_volume_dir(xrun_data);
            const auto split = data::load_split(xrun_split);
            xp::MatrixConfig mc;
            mc.methods = xrun_methods;
            mc.n_labelled = xrun_nl;
            mc.n_subsets = xrun_subsets;
            mc.n_restarts = xrun_restarts;
            mc.out_dir = xrun_out;
            mc.jobs = xrun_jobs;
            const auto results = xp::run_matrix(mc, records, split, cfg);
            int failed = 0;
            for (const auto& r : results) failed += r.failed;
            std::cout << results.size() << " runs finished (" << failed << " failed) -> "
                      << xrun_out << "\n";
        } else if (*xrep) {
            std::vector<xp::RunResult> results;
            for (const auto& e : fs::directory_iterator(fs::path(xrep_in) / "runs"))
                if (e.path().extension() == ".json")
                    results.push_back(xp::load_run_result(e.path().string()));
            if (results.empty()) throw EmptySplit("no run results under " + xrep_in);
            std::vector<std::pair<std::string, std::string>> pairs;
            for (const auto& b : xrep_baselines) {
                const auto eq = b.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("--baseline expects method=baseline");
                pairs.emplace_back(b.substr(0, eq), b.substr(eq + 1));
            }
            const auto summaries = xp::summarize(results, pairs);
            if (xrep_table || !xrep_figures) {
                xp::emit_report(summaries, xrep_out);
                xp::emit_dice_csv(results,
                                  (fs::path(xrep_out) / "dice_per_subject.csv").string());
            }
            if (xrep_figures) {
                if (xrep_data.empty() || xrep_split.empty())
                    throw std::invalid_argument("--figures needs --data and --split");
                const auto records = data::load_volume_dir(xrep_data);
                const auto split = data::load_split(xrep_split);
                fs::create_directories(fs::path(xrep_out) / "figures");

                // panels: load one segmenter per method (first run file found)
                std::vector<std::pair<std::string, seg::SegmentationNetwork>> nets;
                for (const auto& s : summaries) {
                    bool found = false;
                    for (int sub = 0; sub < 10 && !found; ++sub)
                        for (int r = 0; r < 10 && !found; ++r) {
                            const auto p = xp::segmenter_cache_path(xrep_in, s.method_id,
                                                                    s.n_labelled, sub, r);
                            if (fs::exists(p)) {
                                nets.emplace_back(s.method_id, train::load_segmenter(p));
                                found = true;
                            }
                        }
                }
                std::vector<std::pair<std::string, seg::SegmentationNetwork*>> net_ptrs;
                for (auto& [name, net] : nets) net_ptrs.emplace_back(name, &net);
                for (const auto* rec : train::select_records(records, split.test_ids)) {
                    for (int k = 0; k < xrep_panel_slices; ++k) {
                        const int z = rec->depth() / 2 + k;
                        if (z >= rec->depth()) break;
                        const auto path = fs::path(xrep_out) / "figures" /
                                          ("panel_" + rec->subject_id + "_z" + std::to_string(z) +
                                           ".ppm");
                        xp::emit_qualitative_panel(*rec, z, net_ptrs, path.string());
                    }
                }
                // generator sheets from cached generator checkpoints
                for (const auto& e : fs::directory_iterator(fs::path(xrep_in) / "gens")) {
                    if (e.path().extension() != ".ckpt") continue;
                    auto gen = train::load_generator(e.path().string());
                    const auto* rec = train::select_records(records, split.test_ids).front();
                    const auto path = fs::path(xrep_out) / "figures" /
                                      ("sheet_" + e.path().stem().string() + ".pgm");
                    xp::emit_generator_sheet(gen, *rec, rec->depth() / 2, 6, 7, path.string());
                }
            }
            std::cout << "report written to " << xrep_out << "\n";
        } else if (*dump) {
            const auto cfg = resolve_config(dump_config_path, dump_desk);
            train::dump_config(cfg, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
