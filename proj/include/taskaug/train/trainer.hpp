#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>

#include "taskaug/data/slice_batch.hpp"
#include "taskaug/data/splits.hpp"
#include "taskaug/gan/discriminator.hpp"
#include "taskaug/gan/generator.hpp"
#include "taskaug/gan/losses.hpp"
#include "taskaug/seg/unet.hpp"
#include "taskaug/train/config.hpp"

namespace taskaug::train {

// Which augmentation family a phase-2 training uses. All modes except None
// and Affine compose onto affine-augmented labelled slices.
enum class AugMode { None, Affine, Elastic, Intensity, GD, GI, GDGI, Mixup, GDGIMixup };

AugMode aug_mode_from_name(const std::string& name);
const char* aug_mode_name(AugMode mode);
bool aug_mode_needs_gd(AugMode mode);
bool aug_mode_needs_gi(AugMode mode);

struct TrainData {
    const std::vector<data::VolumeRecord>* records = nullptr;
    data::DatasetSplit split;
    std::vector<std::string> labelled_ids;  // the X_L subset for this run
};

struct TrainHooks {
    std::function<void(int iter, const std::map<std::string, double>&)> on_metrics;
    std::function<void(int iter, const data::SliceBatch&)> on_phase2_batch;
};

// Deterministic per-phase RNG streams derived from cfg.seed.
struct Phase1Streams {
    Rng data, z;
    std::uint64_t seg_init, gen_init, disc_init;
};
Phase1Streams make_phase1_streams(const TrainConfig& cfg);

struct Phase2Streams {
    Rng data, aug, z;
    std::uint64_t seg_init;
};
Phase2Streams make_phase2_streams(const TrainConfig& cfg);

// Uniform-with-replacement slice sampling; the batch builder shared by both
// phases and by reduction tests.
std::vector<int> draw_indices(int pool_size, int count, Rng& rng);
data::SliceBatch sample_real_batch(const data::SlicePool& pool, int count, Rng& rng);

// Phase-2 augmentation slots, one sample per source slice.
enum class GenChoice { V, I, VI };
data::SliceBatch generate_samples(gan::GeneratorNetwork* gd, gan::GeneratorNetwork* gi,
                                  GenChoice which, const data::SliceBatch& sources, Rng& z_rng);

data::SliceBatch assemble_phase2_batch(const data::SlicePool& labelled, AugMode mode,
                                       gan::GeneratorNetwork* gd, gan::GeneratorNetwork* gi,
                                       const TrainConfig& cfg, Rng& data_rng, Rng& aug_rng,
                                       Rng& z_rng);

struct Phase1Result {
    std::shared_ptr<gan::GeneratorNetwork> generator;
    double final_loss_seg = 0, final_loss_disc = 0, final_loss_gen = 0;
};

// Phase 1: one discriminator step and one joint generator+segmenter step per
// iteration. Real discriminator samples come from labelled + unlabelled
// images; the co-trained segmenter and discriminator are discarded.
// Background stays in the segmentation loss during this phase.
Phase1Result train_augmentor_joint(gan::GeneratorKind kind, const TrainData& data,
                                   const TrainConfig& cfg, const TrainHooks& hooks = {});

struct Phase2Result {
    std::shared_ptr<seg::SegmentationNetwork> best;
    double best_val_dice = -1.0;
    int best_iteration = -1;
    std::vector<std::pair<int, double>> val_trajectory;
};

// Phase 2: fresh segmenter trained on half affine-augmented labelled slices
// and half augmentation samples (per mode), background excluded from the
// loss, best-validation-Dice checkpoint returned. Generators stay frozen.
Phase2Result train_segmenter_augmented(const std::vector<gan::GeneratorNetwork*>& generators,
                                       AugMode mode, const TrainData& data, const TrainConfig& cfg,
                                       const TrainHooks& hooks = {});

data::LabelVolume predict_volume(seg::SegmentationNetwork& net, const data::VolumeRecord& rec);

// Mean over volumes of the mean foreground Dice.
double validate(seg::SegmentationNetwork& net, const std::vector<const data::VolumeRecord*>& vols);

std::vector<const data::VolumeRecord*> select_records(const std::vector<data::VolumeRecord>& all,
                                                      const std::vector<std::string>& ids);

}  // namespace taskaug::train
